"""Anisotropic Sobolev machinery on space-time grid fields.

Fields carry the time axis first: u[k] is the sample at t_k = k*dt, and
fields that "vanish in the past" are extended by zero to t < 0 when the
time stencil needs history.  The weighted families

    D*^alpha = dt^a0 (sigma d1)^a1 d2^a2 .. dd^ad d1^a_{d+1},
    <alpha> = |alpha| + a_{d+1},

use the sigma weight from the geometry module; plain H^m norms of volume
and boundary fields are provided for the embedding/trace diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import OrderExceedsResolution
from .geometry import DEFAULT_CHI, sigma_weight
from .grid import Grid, boundary_l2, ddt, spacetime_l2


@dataclass(frozen=True)
class MultiIndex:
    """(a0, a1, a2..ad, a_{d+1}) with the doubled weight on the last slot."""

    alpha: tuple

    @property
    def weight(self) -> int:
        return sum(self.alpha) + self.alpha[-1]

    @property
    def total(self) -> int:
        return sum(self.alpha)


def multi_indices(m: int, d: int):
    """All D* indices with <alpha> <= m (d + 2 slots)."""
    out = []
    for a_last in range(m // 2 + 1):
        rest = m - 2 * a_last
        slots = d + 1  # a0..ad
        for combo in product(range(rest + 1), repeat=slots):
            if sum(combo) <= rest:
                out.append(MultiIndex(combo + (a_last,)))
    return out


def _check_resolution(u, grid: Grid, order: int, max_order: int):
    if order > max_order:
        raise OrderExceedsResolution(f"order {order} exceeds configured max {max_order}")
    n_min = min((u.shape[0],) + grid.shape)
    if n_min < 5 + order:
        raise OrderExceedsResolution(
            f"order {order} needs at least {5 + order} points per axis, have {n_min}")


def dstar(u, alpha, grid: Grid, dt: float, vanish_past: bool = True,
          max_order: int = 6) -> np.ndarray:
    """Apply D*^alpha to a space-time field (rightmost factor first)."""
    alpha = alpha.alpha if isinstance(alpha, MultiIndex) else tuple(alpha)
    if len(alpha) != grid.d + 2:
        raise ValueError(f"alpha needs {grid.d + 2} slots for d = {grid.d}")
    u = np.asarray(u, dtype=float)
    _check_resolution(u, grid, sum(alpha) + alpha[-1], max_order)
    sig = sigma_weight(grid.x1).reshape((grid.n1,) + (1,) * (grid.d - 1))
    out = u
    for _ in range(alpha[-1]):
        out = grid.d1(out)
    for i in range(grid.d, 1, -1):
        for _ in range(alpha[i]):
            out = grid.dtan(out, i)
    for _ in range(alpha[1]):
        out = sig * grid.d1(out)
    for _ in range(alpha[0]):
        out = ddt(out, dt, vanish_past=vanish_past)
    return out


def dstar_reordered(u, alpha, grid: Grid, dt: float, vanish_past: bool = True,
                    max_order: int = 6) -> np.ndarray:
    """Equivalent-norm ordering sigma^a1 d1^(a1+a_{d+1}) dt^a0 d'^a'."""
    alpha = alpha.alpha if isinstance(alpha, MultiIndex) else tuple(alpha)
    u = np.asarray(u, dtype=float)
    _check_resolution(u, grid, sum(alpha) + alpha[-1], max_order)
    sig = sigma_weight(grid.x1).reshape((grid.n1,) + (1,) * (grid.d - 1))
    out = u
    for i in range(grid.d, 1, -1):
        for _ in range(alpha[i]):
            out = grid.dtan(out, i)
    for _ in range(alpha[0]):
        out = ddt(out, dt, vanish_past=vanish_past)
    for _ in range(alpha[1] + alpha[-1]):
        out = grid.d1(out)
    return sig ** alpha[1] * out


@dataclass
class AnisoNorm:
    m: int
    value: float
    breakdown: dict


def aniso_norm_reordered(u, m: int, grid: Grid, dt: float, vanish_past: bool = True,
                         max_order: int = 6) -> float:
    """H*_m computed with the reordered operator family (equivalent norm)."""
    u = np.asarray(u, dtype=float)
    total = 0.0
    for mi in multi_indices(m, grid.d):
        term = dstar_reordered(u, mi, grid, dt, vanish_past, max_order)
        total += spacetime_l2(term, grid, dt) ** 2
    return float(np.sqrt(total))


def aniso_norm(u, m: int, grid: Grid, dt: float, vanish_past: bool = True,
               max_order: int = 6) -> AnisoNorm:
    """H*_m norm of a space-time field (components allowed on axis 1)."""
    u = np.asarray(u, dtype=float)
    total = 0.0
    breakdown = {}
    for mi in multi_indices(m, grid.d):
        term = dstar(u, mi, grid, dt, vanish_past, max_order)
        val2 = spacetime_l2(term, grid, dt) ** 2
        breakdown[mi.alpha] = float(np.sqrt(val2))
        total += val2
    return AnisoNorm(m=m, value=float(np.sqrt(total)), breakdown=breakdown)


def h_norm(u, m: int, grid: Grid, dt: float, vanish_past: bool = True) -> float:
    """Plain H^m norm over [0,T] x Omega (all derivatives weight one)."""
    u = np.asarray(u, dtype=float)
    total = 0.0
    for combo in product(range(m + 1), repeat=grid.d + 1):
        if sum(combo) > m:
            continue
        out = u
        for i in range(grid.d, 1, -1):
            for _ in range(combo[i]):
                out = grid.dtan(out, i)
        for _ in range(combo[1]):
            out = grid.d1(out)
        for _ in range(combo[0]):
            out = ddt(out, dt, vanish_past=vanish_past)
        total += spacetime_l2(out, grid, dt) ** 2
    return float(np.sqrt(total))


def boundary_h_norm(w, m: int, grid: Grid, dt: float, vanish_past: bool = True) -> float:
    """H^m norm on Sigma_T = [0,T] x T^(d-1); w has time first."""
    w = np.asarray(w, dtype=float)
    total = 0.0
    for combo in product(range(m + 1), repeat=grid.d):
        if sum(combo) > m:
            continue
        out = w
        for i in range(grid.d, 1, -1):
            for _ in range(combo[i - 1]):
                out = grid.dtan_boundary(out, i)
        for _ in range(combo[0]):
            out = ddt(out, dt, vanish_past=vanish_past)
        total += boundary_l2(out, grid, dt) ** 2
    return float(np.sqrt(total))


def trace_norm(u, m: int, grid: Grid, dt: float, vanish_past: bool = True) -> float:
    """H^m(Sigma_T) norm of the x1 = 0 trace of a volume field."""
    if m < 1:
        raise ValueError("trace norms need m >= 1")
    u = np.asarray(u, dtype=float)
    x1_axis = u.ndim - grid.d
    tr = np.take(u, 0, axis=x1_axis)
    return boundary_h_norm(tr, m, grid, dt, vanish_past)


def lift_from_boundary(w, grid: Grid, chi=DEFAULT_CHI) -> np.ndarray:
    """R_T w = chi(x1) w(t, x'): exact trace at x1 = 0 since chi(0) = 1."""
    w = np.asarray(w, dtype=float)
    chi_col = chi(grid.x1).reshape((grid.n1,) + (1,) * (grid.d - 1))
    lead = w.shape[: w.ndim - (grid.d - 1)]
    out = np.zeros(lead + grid.shape)
    out[...] = chi_col * np.expand_dims(w, axis=w.ndim - (grid.d - 1))
    return out
