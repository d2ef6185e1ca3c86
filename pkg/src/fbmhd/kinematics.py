"""Relativistic kinematic conversions between primitive and covariant variables.

Vectors are stored with the component axis first, so every routine is
vectorized over arbitrary trailing grid axes.  Spacetime indices follow
the mostly-plus Minkowski metric diag(-1, 1, ..., 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NormalizationViolation, SuperluminalInput
from .eos import EosModel


def minkowski_dot(u, w):
    """g_{ab} u^a w^b with the component axis first."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return -u[0] * w[0] + np.sum(u[1:] * w[1:], axis=0)


def lorentz_factor(v, eps_c: float):
    v = np.asarray(v, dtype=float)
    s = eps_c ** 2 * np.sum(v * v, axis=0)
    if np.any(s >= 1.0):
        raise SuperluminalInput("eps_c*|v| >= 1")
    return 1.0 / np.sqrt(1.0 - s)


@dataclass
class KinematicState:
    """Derived covariant data for a primitive (v, H) state."""

    v: np.ndarray
    Gamma: np.ndarray
    w: np.ndarray
    H: np.ndarray
    b0: np.ndarray
    b: np.ndarray
    b_norm2: np.ndarray

    @property
    def u(self) -> np.ndarray:
        """Four-velocity (u^0, u^i) = (Gamma, eps*Gamma*v); eps via b/H is
        not stored, so this is assembled by primitive_to_covariant."""
        return self._u

    _u: np.ndarray = None


def primitive_to_covariant(v, H, model: EosModel) -> KinematicState:
    """Build (Gamma, w, u^a, b^a) from the coordinate velocity and field."""
    eps = model.eps_c
    v = np.asarray(v, dtype=float)
    H = np.asarray(H, dtype=float)
    Gamma = lorentz_factor(v, eps)
    w = Gamma * v
    vH = np.sum(v * H, axis=0)
    b0 = eps ** 2 * Gamma * vH
    b_sp = eps * H / Gamma + eps ** 3 * Gamma * vH * v
    b = np.concatenate([np.asarray(b0)[None], b_sp], axis=0)
    u = np.concatenate([np.asarray(Gamma)[None], eps * Gamma * v], axis=0)
    b_norm2 = eps ** 2 * np.sum(H * H, axis=0) / Gamma ** 2 + eps ** 4 * vH ** 2
    state = KinematicState(v=v, Gamma=Gamma, w=w, H=H, b0=np.asarray(b0), b=b,
                           b_norm2=np.asarray(b_norm2))
    state._u = u
    return state


def covariant_to_primitive(u, b, model: EosModel, tol: float = 1e-10):
    """Invert (u^a, b^a) back to (v, H); u must be unit timelike."""
    eps = model.eps_c
    if eps <= 0.0:
        raise ValueError("covariant variables require eps_c > 0")
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    norm = minkowski_dot(u, u)
    if np.any(np.abs(norm + 1.0) > tol):
        raise NormalizationViolation(
            f"g u.u = {norm} is not -1 within {tol}")
    if np.any(u[0] <= 0.0):
        raise NormalizationViolation("u^0 must be positive")
    v = u[1:] / (eps * u[0])
    H = (u[0] * b[1:] - u[1:] * b[0]) / eps
    return v, H
