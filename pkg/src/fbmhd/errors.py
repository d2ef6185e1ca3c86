"""Exception hierarchy shared by all fbmhd modules."""


class FbmhdError(Exception):
    """Base class for all library errors."""


class AdmissibilityViolation(FbmhdError):
    """Density left the admissible band (rho_min, rho_max)."""


class SubluminalViolation(FbmhdError):
    """Sound speed reached or exceeded the light speed 1/eps_c."""


class SuperluminalInput(FbmhdError):
    """Coordinate velocity with eps_c*|v| >= 1."""


class NormalizationViolation(FbmhdError):
    """Four-velocity fails the unit-timelike normalization."""


class DegenerateLifting(FbmhdError):
    """Lifting Jacobian d1_Phi dropped below 1/2."""


class ProfileInfeasible(FbmhdError):
    """Requested cutoff support too small to keep |chi'| < 1."""


class OrderExceedsResolution(FbmhdError):
    """Requested derivative/norm order not resolvable on the grid."""


class CflViolation(FbmhdError):
    """Time step exceeds the stable CFL bound."""


class BasicStateViolation(FbmhdError):
    """Basic state fails one of its admissibility constraints."""


class SignConditionLost(FbmhdError):
    """Interface sign condition d1 q >= kappa0/2 lost during a run."""


class MarginLost(FbmhdError):
    """Approximate-solution margins lost; caller must shrink T."""


class DivergenceDetected(FbmhdError):
    """Iteration increments grew for several consecutive steps."""


class UnknownScenario(FbmhdError):
    """Scenario name not present in the registry."""


class ParseError(FbmhdError):
    """Config text could not be parsed."""


class ValidationError(FbmhdError):
    """Config parsed but one or more invariants failed.

    Carries the full list of violations in `violations`.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IoError(FbmhdError):
    """Artifact emission failed."""
