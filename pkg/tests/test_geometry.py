import numpy as np
import pytest

from fbmhd.errors import AdmissibilityViolation, ProfileInfeasible
from fbmhd.geometry import (Chi, build_chi, constraints, divergence_free_init,
                            div_lifted, lift, lifted_derivative,
                            rayleigh_taylor_margin, sigma_weight)
from fbmhd.grid import Grid


@pytest.fixture
def grid2():
    return Grid(d=2, n1=48, n_tangential=32)


class TestChiSigma:
    def test_chi_plateau_and_support(self):
        chi = build_chi(3.0)
        assert chi(0.5) == 1.0
        assert chi(0.0) == 1.0
        assert np.all(chi(np.linspace(3.0, 10.0, 20)) == 0.0)

    def test_chi_slope_bound_measured(self):
        chi = build_chi(3.0)
        assert chi.max_abs_slope < 1.0

    def test_infeasible_support(self):
        with pytest.raises(ProfileInfeasible):
            build_chi(1.5)
        with pytest.raises(ProfileInfeasible):
            build_chi(0.5)

    def test_sigma_endpoints(self):
        assert sigma_weight(0.25) == 0.25
        assert sigma_weight(2.0) == 1.0
        s = sigma_weight(0.7)
        assert 0.5 < s < 1.0

    def test_sigma_monotone(self):
        xs = np.linspace(0.0, 2.0, 4001)
        s = sigma_weight(xs)
        assert np.all(np.diff(s) >= -1e-15)


class TestLift:
    def test_trivial(self, grid2):
        lf = lift(np.zeros(32), grid2)
        assert np.allclose(lf.Phi, grid2.x1_mesh())
        assert np.allclose(lf.d1_Phi, 1.0)

    def test_constant_quarter(self, grid2):
        lf = lift(np.full(32, 0.25), grid2)
        i = int(np.argmin(np.abs(grid2.x1 - 0.5)))
        # chi = 1 on [0,1] forces Phi = x1 + phi there
        assert np.allclose(lf.Phi[i], grid2.x1[i] + 0.25)

    def test_sinusoidal_margin(self, grid2):
        phi = 0.1 * np.sin(2 * np.pi * grid2.xt)
        lf = lift(phi, grid2)
        assert np.min(lf.d1_Phi) > 0.9
        assert np.min(lf.d1_Phi) >= 1.0 - 0.1 * lf.chi.max_abs_slope - 1e-12

    def test_smallness_enforced(self, grid2):
        with pytest.raises(AdmissibilityViolation):
            lift(np.full(32, 0.51), grid2)

    def test_injectivity_margin(self, grid2):
        phi = 0.5 * np.sin(2 * np.pi * grid2.xt)
        lf = lift(phi, grid2)
        assert np.min(lf.d1_Phi) >= 0.5 - 1e-12


class TestLiftedDerivatives:
    def test_flat_reduces_to_plain(self, grid2):
        lf = lift(np.zeros(32), grid2)
        x1, x2 = grid2.coords()
        F = np.sin(2 * np.pi * x2) * np.exp(-x1)
        assert np.allclose(lifted_derivative(F, lf, 1), grid2.d1(F))
        assert np.allclose(lifted_derivative(F, lf, 2), grid2.dtan(F, 2))

    def test_phi_chain_rule_identity(self):
        # d1^Phi Phi = 1, d2^Phi Phi = 0 to stencil order under refinement
        errs = []
        for n in (64, 128, 256):
            g = Grid(d=2, n1=n, n_tangential=n // 2)
            phi = 0.2 * np.sin(2 * np.pi * g.xt)
            lf = lift(phi, g)
            e1 = np.max(np.abs(lifted_derivative(lf.Phi, lf, 1) - 1.0))
            interior = lifted_derivative(lf.Phi, lf, 2)
            e2 = np.max(np.abs(interior))
            errs.append(max(e1, e2))
        # exact in the continuum; discrete error should fall fast
        assert errs[0] < 3e-3
        order = np.log2(errs[1] / errs[2])
        assert order > 2.5

    def test_linear_tangential_field(self, grid2):
        # F = x2 has d2^Phi F = 1 because d1 F = 0 kills the correction
        phi = 0.3 * np.cos(2 * np.pi * grid2.xt)
        lf = lift(phi, grid2)
        x1, x2 = grid2.coords()
        F = np.broadcast_to(x2, grid2.shape)
        # periodic stencil on the sawtooth x2 is only exact away from the seam
        inner = lifted_derivative(F, lf, 2)[:, 3:-3]
        assert np.allclose(inner, 1.0, atol=1e-12)


class TestConstraints:
    def test_tangential_field_flat(self, grid2):
        lf = lift(np.zeros(32), grid2)
        H = np.zeros((2,) + grid2.shape)
        H[1] = 1.0 + 0.3 * np.sin(2 * np.pi * grid2.coords()[1])
        hn, _ = constraints(H, lf)
        assert np.allclose(hn, 0.0)

    def test_curl_potential_flat_divfree(self, grid2):
        lf = lift(np.zeros(32), grid2)
        x1, x2 = grid2.coords()
        A = np.sin(2 * np.pi * x2) * np.exp(-((x1 - 2.0) ** 2))
        H = np.stack([grid2.dtan(A, 2), -grid2.d1(A)])
        assert np.max(np.abs(div_lifted(H, lf))) < 1e-11

    def test_initializer_exact(self, grid2, rng):
        phi = 0.2 * np.sin(2 * np.pi * grid2.xt)
        lf = lift(phi, grid2)
        x1, x2 = grid2.coords()
        sig = sigma_weight(x1)
        A = np.sin(2 * np.pi * x2) * sig ** 2
        H = divergence_free_init(A, lf)
        assert np.max(np.abs(div_lifted(H, lf))) < 1e-12
        hn, _ = constraints(H, lf)
        assert np.max(np.abs(hn)) < 1e-12

    def test_initializer_random_smooth(self, grid2, rng):
        phi = 0.15 * np.cos(2 * np.pi * grid2.xt)
        lf = lift(phi, grid2)
        x1, x2 = grid2.coords()
        A = np.zeros(grid2.shape)
        for k in range(1, 4):
            A += rng.normal() / k * np.sin(2 * np.pi * k * x2 + rng.uniform(0, 6)) \
                * np.exp(-(x1 - rng.uniform(1, 3)) ** 2)
        H = divergence_free_init(A, lf)
        assert np.max(np.abs(div_lifted(H, lf))) < 1e-12

    def test_initializer_3d(self):
        g = Grid(d=3, n1=24, n_tangential=12)
        phi = 0.1 * np.sin(2 * np.pi * g.bcoords()[0])
        lf = lift(phi, g)
        x1, x2, x3 = g.coords()
        A = np.zeros((3,) + g.shape)
        A[1] = np.sin(2 * np.pi * x3) * sigma_weight(x1) ** 2
        A[2] = np.cos(2 * np.pi * x2) * sigma_weight(x1) ** 2
        H = divergence_free_init(A, lf)
        assert np.max(np.abs(div_lifted(H, lf))) < 1e-12
        hn, _ = constraints(H, lf)
        assert np.max(np.abs(hn)) < 1e-12

    def test_zero_potential(self, grid2):
        lf = lift(np.zeros(32), grid2)
        H = divergence_free_init(np.zeros(grid2.shape), lf)
        assert np.all(H == 0.0)


class TestRayleighTaylor:
    def test_linear(self, grid2):
        q = grid2.x1_mesh()
        assert rayleigh_taylor_margin(q, grid2) == pytest.approx(1.0, abs=1e-12)

    def test_quadratic_degenerate(self):
        vals = []
        for n in (33, 65, 129):
            g = Grid(d=2, n1=n, n_tangential=8)
            q = g.x1_mesh() ** 2
            vals.append(abs(rayleigh_taylor_margin(q, g)))
        assert vals[0] < 1e-10 or vals[2] < vals[0]
        assert vals[2] < 1e-9

    def test_violation_sign(self, grid2):
        x1 = grid2.x1_mesh()
        q = -x1 + x1 ** 2
        assert rayleigh_taylor_margin(q, grid2) < 0
