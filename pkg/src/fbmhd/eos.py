"""Equations of state and thermodynamic derived quantities.

The default law is the liquid-like ideal family

    rho(p, S) = ((p + p_offset) * exp(-S)) ** (1/gamma),
    e(p, S)   = (p + p_offset) / ((gamma - 1) rho) + p_offset / rho,

which satisfies the Gibbs relation exactly (the temperature factor is
absorbed into the entropy normalization) and gives the closed form
a^2 = gamma (p + p_offset) / rho.  With p_offset = 0 this is the plain
ideal-gas law; p_offset > 0 keeps the density bounded away from zero at
zero (or slightly negative) pressure, which is what states touching the
vacuum interface need, where the total pressure vanishes.

All evaluation routines accept scalars, numpy arrays, or TimeJets, so
the same formulas drive both pointwise assembly and the Taylor-in-time
trace machinery.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from .errors import AdmissibilityViolation, SubluminalViolation
from .jets import TimeJet, jexp


class EosLaw(Protocol):
    """Pluggable constitutive law: density, its p-derivative, and energy."""

    def rho(self, p, S): ...

    def drho_dp(self, p, S): ...

    def e(self, p, S): ...


@dataclass(frozen=True)
class DefaultLaw:
    gamma: float = 5.0 / 3.0
    p_offset: float = 0.0

    def rho(self, p, S):
        return ((p + self.p_offset) * jexp(-S)) ** (1.0 / self.gamma)

    def drho_dp(self, p, S):
        return self.rho(p, S) / (self.gamma * (p + self.p_offset))

    def e(self, p, S):
        rho = self.rho(p, S)
        return (p + self.p_offset) / ((self.gamma - 1.0) * rho) + self.p_offset / rho


@dataclass(frozen=True)
class EosModel:
    """EOS plus admissibility band and the inverse light speed.

    eps_c = 0 selects the non-relativistic branch (h = 1 identically).
    """

    gamma: float = 5.0 / 3.0
    rho_min: float = 0.1
    rho_max: float = 10.0
    eps_c: float = 0.0
    p_offset: float = 0.0
    law: Optional[EosLaw] = None

    def __post_init__(self):
        if not 0.0 < self.rho_min < self.rho_max:
            raise ValueError("require 0 < rho_min < rho_max")
        if self.eps_c < 0.0:
            raise ValueError("eps_c must be nonnegative")

    @property
    def _law(self) -> EosLaw:
        return self.law if self.law is not None else DefaultLaw(self.gamma, self.p_offset)

    # jet-safe raw evaluations (no admissibility checks)
    def rho(self, p, S):
        return self._law.rho(p, S)

    def a2(self, p, S):
        return 1.0 / self._law.drho_dp(p, S)

    def e(self, p, S):
        return self._law.e(p, S)

    def h(self, p, S):
        if self.eps_c == 0.0:
            rho = self.rho(p, S)
            one = rho / rho  # shape- and jet-compatible unit
            return one
        return 1.0 + self.eps_c ** 2 * (self.e(p, S) + p / self.rho(p, S))


def _leading(x):
    """Numeric view used for validity checks (jet leading coefficient)."""
    return x.coeff(0) if isinstance(x, TimeJet) else np.asarray(x, dtype=float)


def check_admissible(model: EosModel, rho) -> None:
    r = _leading(rho)
    if np.any(r <= model.rho_min) or np.any(r >= model.rho_max):
        raise AdmissibilityViolation(
            f"density in [{np.min(r):.6g}, {np.max(r):.6g}] leaves band "
            f"({model.rho_min}, {model.rho_max})")


def eos_eval(model: EosModel, p, S):
    """Return (rho, a, e, h); raises if the state leaves the admissible band.

    The relativistic branch additionally requires the sound speed to stay
    below the light speed 1/eps_c.
    """
    rho = model.rho(p, S)
    check_admissible(model, rho)
    a2 = model.a2(p, S)
    if np.any(_leading(a2) <= 0.0):
        raise AdmissibilityViolation("a^2 = dp/drho must be positive")
    a = a2 ** 0.5
    e = model.e(p, S)
    h = model.h(p, S)
    if model.eps_c > 0.0:
        cs2 = _leading(a2) / _leading(h)
        if np.any(cs2 >= model.eps_c ** -2):
            raise SubluminalViolation("sound speed reached the light speed")
    return rho, a, e, h


def gibbs_consistency(model: EosModel, p: float, S: float, step: float) -> float:
    """Central-difference residual of the Gibbs relation along p (dS = 0).

    With dS = 0 the relation theta dS = de - (p/rho^2) drho reduces to
    de/dp = (p/rho^2) drho/dp; the returned magnitude is the defect of
    that identity measured with central differences of the configured law.
    """
    if not 0.0 < step <= 1e-2:
        raise ValueError("step must lie in (0, 1e-2]")
    for pp in (p - step, p, p + step):
        check_admissible(model, model.rho(pp, S))
    de_dp = (model.e(p + step, S) - model.e(p - step, S)) / (2.0 * step)
    drho_dp = (model.rho(p + step, S) - model.rho(p - step, S)) / (2.0 * step)
    rho = model.rho(p, S)
    return float(abs(de_dp - (p / rho ** 2) * drho_dp))
