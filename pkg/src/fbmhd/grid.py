"""Half-space grid and finite-difference stencils.

The computational domain is the flattened half-space x1 in [0, L] with
periodic tangential coordinates x' on the unit (d-1)-torus.  Interior
first derivatives use 4th-order centered stencils; the two rows next to
x1 = 0 and x1 = L use 3rd-order one-sided stencils.  Arrays may carry
arbitrary leading axes (components, time); spatial axes are always the
trailing ``d`` axes in the order (x1, x2[, x3]).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _moved(f, axis):
    return np.moveaxis(f, axis, 0)


def _deriv_nonperiodic(f, h, axis):
    """4th-order centered interior, 3rd-order one-sided at both ends."""
    g = _moved(np.asarray(f, dtype=float), axis)
    n = g.shape[0]
    if n < 5:
        raise ValueError(f"need at least 5 points along axis {axis}, got {n}")
    out = np.empty_like(g)
    out[2:-2] = (g[:-4] - 8.0 * g[1:-3] + 8.0 * g[3:-1] - g[4:]) / (12.0 * h)
    out[0] = (-11.0 * g[0] + 18.0 * g[1] - 9.0 * g[2] + 2.0 * g[3]) / (6.0 * h)
    out[1] = (-2.0 * g[0] - 3.0 * g[1] + 6.0 * g[2] - g[3]) / (6.0 * h)
    out[-1] = (11.0 * g[-1] - 18.0 * g[-2] + 9.0 * g[-3] - 2.0 * g[-4]) / (6.0 * h)
    out[-2] = (2.0 * g[-1] + 3.0 * g[-2] - 6.0 * g[-3] + g[-4]) / (6.0 * h)
    return np.moveaxis(out, 0, axis)


def _deriv_periodic(f, h, axis):
    """4th-order centered stencil on a periodic axis."""
    f = np.asarray(f, dtype=float)
    m2 = np.roll(f, 2, axis=axis)
    m1 = np.roll(f, 1, axis=axis)
    p1 = np.roll(f, -1, axis=axis)
    p2 = np.roll(f, -2, axis=axis)
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def _deriv_zero_past(f, h, axis=0):
    """Like the nonperiodic stencil but the signal is zero before index 0."""
    g = _moved(np.asarray(f, dtype=float), axis)
    pad = np.zeros((2,) + g.shape[1:])
    ext = np.concatenate([pad, g], axis=0)
    out = np.empty_like(g)
    n = g.shape[0]
    # centered rows exist for all but the last two indices
    out[:-2] = (ext[:n - 2] - 8.0 * ext[1:n - 1] + 8.0 * ext[3:n + 1] - ext[4:n + 2]) / (12.0 * h)
    out[-1] = (11.0 * g[-1] - 18.0 * g[-2] + 9.0 * g[-3] - 2.0 * g[-4]) / (6.0 * h)
    out[-2] = (2.0 * g[-1] + 3.0 * g[-2] - 6.0 * g[-3] + g[-4]) / (6.0 * h)
    return np.moveaxis(out, 0, axis)


def fourth_difference(f, axis, periodic):
    """Undivided 4th difference used for the mild stabilizing dissipation.

    Zeroed on the two rows next to each nonperiodic end.
    """
    f = np.asarray(f, dtype=float)
    if periodic:
        m2 = np.roll(f, 2, axis=axis)
        m1 = np.roll(f, 1, axis=axis)
        p1 = np.roll(f, -1, axis=axis)
        p2 = np.roll(f, -2, axis=axis)
        return m2 - 4.0 * m1 + 6.0 * f - 4.0 * p1 + p2
    g = _moved(f, axis)
    out = np.zeros_like(g)
    out[2:-2] = g[:-4] - 4.0 * g[1:-3] + 6.0 * g[2:-2] - 4.0 * g[3:-1] + g[4:]
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on [0, L] x T^(d-1)."""

    d: int
    n1: int
    n_tangential: int
    L: float = 4.0

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError("spatial dimension d must be 2 or 3")
        if self.n1 < 5 or self.n_tangential < 5:
            raise ValueError("need at least 5 grid points per axis")

    @property
    def ncomp(self) -> int:
        return 2 * self.d + 2

    @property
    def shape(self) -> tuple:
        return (self.n1,) + (self.n_tangential,) * (self.d - 1)

    @property
    def h1(self) -> float:
        return self.L / (self.n1 - 1)

    @property
    def ht(self) -> float:
        return 1.0 / self.n_tangential

    @property
    def x1(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n1)

    @property
    def xt(self) -> np.ndarray:
        return np.arange(self.n_tangential) * self.ht

    def x1_mesh(self) -> np.ndarray:
        """x1 coordinate broadcast over the full spatial shape."""
        return self.x1.reshape((self.n1,) + (1,) * (self.d - 1)) * np.ones(self.shape)

    def coords(self):
        """Meshgrid (x1, x2[, x3]) with 'ij' indexing."""
        axes = [self.x1] + [self.xt] * (self.d - 1)
        return np.meshgrid(*axes, indexing="ij")

    def bcoords(self):
        """Tangential meshgrid for boundary fields."""
        axes = [self.xt] * (self.d - 1)
        if self.d == 2:
            return (self.xt.copy(),)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    # axis bookkeeping: spatial axes are the trailing d axes
    def _axis1(self, f) -> int:
        return f.ndim - self.d

    def d1(self, f) -> np.ndarray:
        """Derivative along x1."""
        f = np.asarray(f, dtype=float)
        return _deriv_nonperiodic(f, self.h1, self._axis1(f))

    def dtan(self, f, i: int) -> np.ndarray:
        """Derivative along x_i for i = 2..d (periodic)."""
        if not 2 <= i <= self.d:
            raise ValueError(f"tangential index {i} out of range for d={self.d}")
        f = np.asarray(f, dtype=float)
        return _deriv_periodic(f, self.ht, self._axis1(f) + (i - 1))

    def dtan_boundary(self, f, i: int) -> np.ndarray:
        """Tangential derivative of a boundary field (no x1 axis)."""
        if not 2 <= i <= self.d:
            raise ValueError(f"tangential index {i} out of range for d={self.d}")
        f = np.asarray(f, dtype=float)
        return _deriv_periodic(f, self.ht, f.ndim - (self.d - 1) + (i - 2))

    def dspace(self, f, i: int) -> np.ndarray:
        """Derivative along spatial direction i = 1..d."""
        return self.d1(f) if i == 1 else self.dtan(f, i)

    # quadrature -------------------------------------------------------
    def weights(self) -> np.ndarray:
        w1 = np.full(self.n1, self.h1)
        w1[0] = w1[-1] = 0.5 * self.h1
        w = w1.reshape((self.n1,) + (1,) * (self.d - 1))
        return w * self.ht ** (self.d - 1) * np.ones(self.shape)

    def bweights(self) -> float:
        return self.ht ** (self.d - 1)

    def l2(self, f) -> float:
        """Spatial L2 norm; leading axes are summed as vector components."""
        f = np.asarray(f, dtype=float)
        return float(np.sqrt(np.sum(self.weights() * f ** 2)))

    def l2_boundary(self, f) -> float:
        f = np.asarray(f, dtype=float)
        return float(np.sqrt(self.bweights() * np.sum(f ** 2)))


def ddt(f, dt, vanish_past=True):
    """Time derivative along axis 0 of a space-time array."""
    if vanish_past:
        return _deriv_zero_past(f, dt, axis=0)
    return _deriv_nonperiodic(np.asarray(f, dtype=float), dt, 0)


def time_weights(n_time: int, dt: float) -> np.ndarray:
    w = np.full(n_time, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def spacetime_l2(f, grid: Grid, dt: float) -> float:
    """L2 over [0,T] x Omega; f has time first, then optional components."""
    f = np.asarray(f, dtype=float)
    wt = time_weights(f.shape[0], dt).reshape((f.shape[0],) + (1,) * (f.ndim - 1))
    wx = grid.weights()
    return float(np.sqrt(np.sum(wt * wx * f ** 2)))


def boundary_l2(f, grid: Grid, dt: float) -> float:
    """L2 over [0,T] x Sigma for boundary fields (time first)."""
    f = np.asarray(f, dtype=float)
    wt = time_weights(f.shape[0], dt).reshape((f.shape[0],) + (1,) * (f.ndim - 1))
    return float(np.sqrt(np.sum(wt * grid.bweights() * f ** 2)))
