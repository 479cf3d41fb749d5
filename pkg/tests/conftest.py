import numpy as np
import pytest
from scipy.stats import unitary_group

from spindiscord.discord import XStateDensity


def random_x_state(rng, symmetric=False):
    pops = rng.dirichlet(np.ones(4))
    if symmetric:
        mid = 0.5 * (pops[1] + pops[2])
        pops[1] = pops[2] = mid
    c_out = rng.uniform(-1, 1) * np.sqrt(pops[0] * pops[3])
    c_in = rng.uniform(-1, 1) * np.sqrt(pops[1] * pops[2])
    return XStateDensity(*pops, c_out, c_in)


def random_classical_state(rng, rotate=True):
    """sum p_ij |i><i| x |j><j| in random local bases."""
    p = rng.dirichlet(np.ones(4)).reshape(2, 2)
    ua = unitary_group.rvs(2, random_state=rng) if rotate else np.eye(2)
    ub = unitary_group.rvs(2, random_state=rng) if rotate else np.eye(2)
    rho = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            rho += p[i, j] * np.kron(np.outer(ua[:, i], ua[:, i].conj()), np.outer(ub[:, j], ub[:, j].conj()))
    return rho


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bell_phi_plus():
    return XStateDensity(0.5, 0.0, 0.0, 0.5, 0.5, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
