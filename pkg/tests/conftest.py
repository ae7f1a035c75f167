import numpy as np
import pytest

from isonets.nets import AffineNet, GridWindow
from isonets.special import catenoid_pair
from isonets.transforms import pair_from_nets


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def exp_pair_small():
    """Exponential Christoffel pair, 11x11, explicit (d h)(d g) scale."""
    g, h = catenoid_pair(20, 5, 5)
    return pair_from_nets(g.to_affine(), h.to_affine())


@pytest.fixture(scope="session")
def exp_pair_full():
    """Exponential Christoffel pair on the 21x21 reference window."""
    g, h = catenoid_pair(20, 10, 10)
    return pair_from_nets(g.to_affine(), h.to_affine())


@pytest.fixture(scope="session")
def planar_net():
    """The grid m + i n, the simplest isothermic net (q = -1)."""
    w = GridWindow.centered(3, 3)
    mm, nn = np.meshgrid(w.m_values(), w.n_values(), indexing="ij")
    return AffineNet.from_complex_grid(w, mm + 1j * nn)
