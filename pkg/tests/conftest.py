import numpy as np
import pytest

import spinctl as sc


@pytest.fixture(scope="session")
def sys7():
    return sc.build_spin_system(3)


@pytest.fixture(scope="session")
def params():
    return sc.default_params()


@pytest.fixture(scope="session")
def filt(params):
    return sc.default_filter(params)


def random_pure(rng, dim=7):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return sc.QuantumState.pure(v / np.linalg.norm(v))


def random_density(rng, dim=7, rank=None):
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return sc.QuantumState.mixed(rho)


def random_waveform(rng, params):
    return sc.ControlWaveform(
        phis=rng.uniform(-np.pi, np.pi, params.n_steps), params=params)
