"""The smoothing family S_theta used by the iteration scheme.

Realization: sharp Fourier truncation at angular frequency theta on the
periodic tangential axes and on a zero-padded copy of the time axis, then
a compactly supported mollification of width 1/theta along x1, and finally
zeroing of the slab t < 1/theta so images of functions vanishing in the
past vanish in the past again.  Every step is an L2 contraction (truncation,
convolution with a nonnegative unit-mass kernel against zero extension,
restriction), and the operator degenerates to the identity once theta
clears the Nyquist scales of every axis.

All constants of the three operator inequalities are measured, never
assumed; `smoothing_inequalities_report` tabulates them.
"""
from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

from .calculus import aniso_norm, boundary_h_norm
from .grid import Grid, boundary_l2, spacetime_l2


def _fourier_truncate(u, axis, period, theta):
    n = u.shape[axis]
    freq = 2.0 * np.pi * np.fft.rfftfreq(n, d=period / n)
    keep = freq <= theta
    if np.all(keep):
        return u
    spec = np.fft.rfft(u, axis=axis)
    shape = [1] * u.ndim
    shape[axis] = keep.size
    spec = spec * keep.reshape(shape)
    return np.fft.irfft(spec, n=n, axis=axis)


def _time_truncate(u, dt, theta):
    """Zero-pad both sides (vanish-past extension), truncate, crop."""
    n = u.shape[0]
    pad = np.zeros_like(u)
    ext = np.concatenate([pad, u, pad], axis=0)
    period = 3 * n * dt
    ext = _fourier_truncate(ext, 0, period, theta)
    return ext[n:2 * n]


def _x1_kernel(width, h1):
    """Nonnegative unit-mass bump of the given radius on the x1 grid."""
    r = int(np.floor(width / h1))
    if r < 1:
        return None
    s = np.arange(-r, r + 1) * h1 / width
    k = np.exp(-1.0 / np.maximum(1e-12, 1.0 - s ** 2))
    k[np.abs(s) >= 1.0] = 0.0
    return k / k.sum()


def smooth(u, theta: float, grid: Grid, dt: float, boundary: bool = False) -> np.ndarray:
    """Apply S_theta to a space-time field (time axis first).

    boundary = True treats u as a field on Sigma_T (no x1 axis).
    """
    if theta < 1.0:
        raise ValueError("theta must be >= 1")
    u = np.asarray(u, dtype=float)
    out = _time_truncate(u, dt, theta)
    n_tang_axes = grid.d - 1
    for j in range(n_tang_axes):
        axis = u.ndim - n_tang_axes + j
        out = _fourier_truncate(out, axis, 1.0, theta)
    if not boundary:
        kern = _x1_kernel(1.0 / theta, grid.h1)
        if kern is not None:
            axis = u.ndim - grid.d
            out = convolve1d(out, kern, axis=axis, mode="constant", cval=0.0)
    t = np.arange(u.shape[0]) * dt
    out[t < 1.0 / theta] = 0.0
    return out


def smooth_derivative_theta(u, theta, grid, dt, boundary=False, rel_step=0.25):
    """Finite-difference d/dtheta S_theta u (the third operator inequality)."""
    d = rel_step * theta
    up = smooth(u, theta + d, grid, dt, boundary)
    dn = smooth(u, max(1.0, theta - d), grid, dt, boundary)
    return (up - dn) / (theta + d - max(1.0, theta - d))


def _norm(u, k, grid, dt, boundary):
    if k == 0:
        return boundary_l2(u, grid, dt) if boundary else spacetime_l2(u, grid, dt)
    if boundary:
        return boundary_h_norm(u, k, grid, dt)
    return aniso_norm(u, k, grid, dt).value


def smoothing_inequalities_report(u, theta_list, k_j_pairs, grid: Grid, dt: float,
                                  boundary: bool = False, max_growth: float = 50.0):
    """Measured constants of the three S_theta inequalities.

    Returns a list of rows {kind, k, j, theta, constant} plus a `flags`
    list naming any (kind, k, j) whose constant blows up monotonically by
    more than max_growth across theta_list.
    """
    u = np.asarray(u, dtype=float)
    base = {}
    rows = []
    for k, j in sorted({(k, j) for k, j in k_j_pairs} | {(j, j) for _, j in k_j_pairs}):
        if (j, "norm") not in base:
            base[(j, "norm")] = _norm(u, j, grid, dt, boundary)
    for theta in theta_list:
        su = smooth(u, theta, grid, dt, boundary)
        dsu = smooth_derivative_theta(u, theta, grid, dt, boundary)
        for k, j in k_j_pairs:
            nj = base[(j, "norm")]
            if nj == 0.0:
                rows.append({"kind": "bound", "k": k, "j": j, "theta": theta,
                             "constant": 0.0})
                continue
            c_bound = _norm(su, k, grid, dt, boundary) / (theta ** max(0, k - j) * nj)
            rows.append({"kind": "bound", "k": k, "j": j, "theta": theta,
                         "constant": c_bound})
            if k <= j:
                c_approx = _norm(su - u, k, grid, dt, boundary) / (theta ** (k - j) * nj)
                rows.append({"kind": "approx", "k": k, "j": j, "theta": theta,
                             "constant": c_approx})
            c_deriv = _norm(dsu, k, grid, dt, boundary) / (theta ** (k - j - 1) * nj)
            rows.append({"kind": "deriv", "k": k, "j": j, "theta": theta,
                         "constant": c_deriv})
    flags = []
    for kind in ("bound", "approx", "deriv"):
        for k, j in k_j_pairs:
            cs = [r["constant"] for r in rows
                  if r["kind"] == kind and r["k"] == k and r["j"] == j]
            # blow-up means a large constant that is still rising; growth out
            # of the all-killed small-theta regime (constants near zero) is
            # expected and benign
            if len(cs) >= 2 and all(np.diff(cs) > 0) and cs[-1] > max_growth:
                flags.append((kind, k, j))
    return {"rows": rows, "flags": flags}
