import numpy as np
import pytest

from fbmhd.calculus import aniso_norm
from fbmhd.grid import Grid, boundary_l2, spacetime_l2
from fbmhd.smoothing import smooth, smoothing_inequalities_report


@pytest.fixture
def g():
    return Grid(d=2, n1=40, n_tangential=32)


def broadband_field(g, rng, nt=32, dt=0.02, decay=2.5, window="ramp"):
    """Fixture with a power-law tangential spectrum.

    window="ramp" vanishes in the past only; "bump" is compactly supported
    in time (no spectral edge at t = T), the case where the approximation
    decay order is observable."""
    t = np.arange(nt) * dt
    if window == "ramp":
        w = np.clip(t / (0.5 * t[-1]), 0, 1) ** 4
    else:
        w = np.sin(np.pi * np.clip(t / t[-1], 0, 1)) ** 6
    x1, x2 = g.coords()
    u = np.zeros((nt,) + g.shape)
    for k in range(1, g.n_tangential // 2):
        amp = rng.normal() * (1.0 + k) ** -decay
        u += amp * np.sin(2 * np.pi * k * x2 + rng.uniform(0, 2 * np.pi)) * np.exp(-x1)
    return u * w[:, None, None], dt


class TestSmoothBasics:
    def test_full_spectrum_identity(self, g, rng):
        u, dt = broadband_field(g, rng)
        theta = 1e4  # beyond every Nyquist scale and 1/theta < dt
        su = smooth(u, theta, g, dt)
        assert np.max(np.abs(su - u)) < 1e-12

    def test_single_mode_pass_and_kill(self, g):
        nt, dt = 32, 0.02
        t = np.arange(nt) * dt
        ramp = np.clip(t / (0.5 * t[-1]), 0, 1) ** 4
        x1, x2 = g.coords()
        for k, theta, kept in ((2, 40.0, True), (12, 20.0, False)):
            u = ramp[:, None, None] * np.sin(2 * np.pi * k * x2) * np.exp(-x1)
            su = smooth(u, theta, g, dt)
            ratio = spacetime_l2(su, g, dt) / spacetime_l2(u, g, dt)
            if kept:
                assert ratio > 0.8
            else:
                assert ratio < 0.05

    def test_l2_contraction_always(self, g, rng):
        u, dt = broadband_field(g, rng)
        n0 = spacetime_l2(u, g, dt)
        for theta in (1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 1e4):
            su = smooth(u, theta, g, dt)
            assert spacetime_l2(su, g, dt) <= n0 * (1.0 + 1e-12)

    def test_vanishing_past_zeroing(self, g, rng):
        u, dt = broadband_field(g, rng)
        theta = 4.0
        su = smooth(u, theta, g, dt)
        t = np.arange(u.shape[0]) * dt
        assert np.all(su[t < 1.0 / theta] == 0.0)

    def test_boundary_variant(self, g, rng):
        nt, dt = 32, 0.02
        t = np.arange(nt) * dt
        ramp = np.clip(t / (0.5 * t[-1]), 0, 1) ** 4
        w = ramp[:, None] * np.sin(2 * np.pi * 3 * g.xt)[None, :]
        n0 = boundary_l2(w, g, dt)
        for theta in (2.0, 8.0, 1e4):
            sw = smooth(w, theta, g, dt, boundary=True)
            assert boundary_l2(sw, g, dt) <= n0 * (1 + 1e-12)
        assert np.max(np.abs(smooth(w, 1e4, g, dt, boundary=True) - w)) < 1e-12


class TestMeasuredInequalities:
    def test_constants_bounded(self, g, rng):
        u, dt = broadband_field(g, rng)
        thetas = [2.0, 4.0, 8.0, 16.0]
        rep = smoothing_inequalities_report(u, thetas, [(3, 1), (1, 3), (2, 2)], g, dt)
        assert rep["flags"] == []
        cs = [r["constant"] for r in rep["rows"] if r["kind"] == "bound"]
        assert max(cs) < 50.0
        approx = [r["constant"] for r in rep["rows"] if r["kind"] == "approx"]
        assert max(approx) < 50.0

    def test_approx_decay_order(self):
        # borderline spectrum s = j + 1/2 makes the theta^(k-j) rate sharp;
        # compact support in t avoids the segment-edge Gibbs floor
        g = Grid(d=2, n1=40, n_tangential=64)
        rng = np.random.default_rng(20240817)
        u, dt = broadband_field(g, rng, decay=3.5, window="bump")
        k, j = 1, 3
        nj = aniso_norm(u, j, g, dt).value
        errs = []
        thetas = np.array([8.0, 16.0, 32.0, 64.0])
        for theta in thetas:
            su = smooth(u, theta, g, dt)
            errs.append(aniso_norm(su - u, k, g, dt).value / nj)
        slope = np.polyfit(np.log(thetas), np.log(np.maximum(errs, 1e-300)), 1)[0]
        assert slope <= -(j - k) * 0.8

    def test_zero_field_vacuous(self, g):
        u = np.zeros((16,) + g.shape)
        rep = smoothing_inequalities_report(u, [2.0, 4.0], [(2, 2)], g, 0.02)
        assert all(r["constant"] == 0.0 for r in rep["rows"] if r["kind"] == "bound")
        assert rep["flags"] == []
