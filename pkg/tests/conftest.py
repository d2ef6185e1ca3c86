import numpy as np
import pytest

from fbmhd.eos import EosModel


@pytest.fixture
def model():
    return EosModel()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_admissible_states(rng, n, d, model, vmax=0.45, hmax=0.8):
    """Draw n states U = (q, v, H, S) with pressures safely inside the band.

    Pressure is sampled first, then q = p + |H|^2/2, which keeps the
    non-relativistic density exactly at rho(p, S)."""
    out = []
    for _ in range(n):
        p = rng.uniform(0.3, 3.0)
        S = rng.uniform(-0.4, 0.4)
        v = rng.uniform(-vmax, vmax, size=d)
        H = rng.uniform(-hmax, hmax, size=d)
        q = p + 0.5 * np.dot(H, H)
        out.append(np.concatenate([[q], v, H, [S]]))
    return out
