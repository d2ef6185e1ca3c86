"""fbmhd: desk-scale numerics for the plasma-vacuum free boundary problem
in ideal compressible and relativistic MHD.

The library provides the symmetric-hyperbolic coefficient algebra, the
flattening (hodograph) machinery for graph interfaces, anisotropic Sobolev
diagnostics, a characteristic-boundary linearized solver, and a Nash-Moser
style iteration, all validated against algebraic identities rather than
unquantified analytic constants.
"""

from .eos import DefaultLaw, EosModel, eos_eval, gibbs_consistency
from .errors import (AdmissibilityViolation, BasicStateViolation, CflViolation,
                     DegenerateLifting, DivergenceDetected, FbmhdError, IoError,
                     MarginLost, NormalizationViolation, OrderExceedsResolution,
                     ParseError, ProfileInfeasible, SignConditionLost,
                     SubluminalViolation, SuperluminalInput, UnknownScenario,
                     ValidationError)
from .grid import Grid
from .kinematics import (KinematicState, covariant_to_primitive, lorentz_factor,
                         minkowski_dot, primitive_to_covariant)
from .matrices import (BoundaryMatrix, SystemMatrices, WTransform, assemble_nonrel,
                       assemble_rel, boundary_inertia, conservative_residual_rel,
                       lifted_a1, nonrel_limit_gap, pack_state, rel_jacobian,
                       split_state, w_transform)

__version__ = "0.1.0"
