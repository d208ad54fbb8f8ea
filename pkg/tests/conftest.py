import numpy as np
import pytest

from eigenbump import bump as bumpmod


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture(scope="session")
def moderate_bump():
    """One generous-budget bump whose grids and transfers stay cheap."""
    return bumpmod.design_bump(1, 2.0, 1.0, 2.0, 2.0, 0.25)


@pytest.fixture(scope="session")
def moderate_bumps():
    """Small matrix of generous d=1 bumps (native double lane)."""
    out = []
    for lam in (0.5, 1.0, 2.0):
        out.append(bumpmod.design_bump(1, 2.0, lam, 2.0, 2.0, 0.45))
    return out
