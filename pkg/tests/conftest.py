import numpy as np
import pytest


@pytest.fixture
def param_rng():
    """Pinned generator for drawing test parameter corpora."""
    return np.random.default_rng(20_240_801)


def draw_alloc(rng, beta_mode="equal"):
    """One random two-layer allocation in the numerically ordinary regime."""
    from relaycast import TwoLayerAllocation

    alpha = float(rng.uniform(0.05, 0.95))
    if beta_mode == "equal":
        beta = alpha
    elif beta_mode == "ge":
        beta = float(rng.uniform(alpha, 1.0))
    else:
        beta = float(rng.uniform(0.02, 0.98))
    eta1 = float(rng.uniform(0.05, 1.2))
    return TwoLayerAllocation(alpha=alpha, eta1=eta1,
                              eta2=eta1 + float(rng.uniform(0.05, 1.5)), beta=beta)


def draw_powers(rng, q_hi=1000.0):
    from relaycast import PowerConfig

    def lu(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    return PowerConfig(p_s=lu(0.5, 100.0), p_r=lu(0.5, 100.0), q=lu(0.5, q_hi))
