import os

# keep BLAS single-threaded: process pools + small matrices beat thread pools here
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

import numpy as np
import pytest

from riet.model import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def da_params(n_levels=8, delta_e=3.0, v=0.1, lam=1.0, kbt=1.0, gamma_cfg=0.01):
    return ModelParams(kind="DA", v=v, kbt=kbt, gamma_cfg=gamma_cfg,
                       n_levels=n_levels, delta_e=delta_e, lam=lam)


def dba_params(n_levels=8, v=0.1, kbt=1.0, gamma_cfg=0.01,
               energies=(5.0, 4.0, 3.0, 0.0), positions=(-1.5, -0.5, 0.5, 1.5)):
    return ModelParams(kind="DBA", v=v, kbt=kbt, gamma_cfg=gamma_cfg,
                       n_levels=n_levels, dba_site_energies=energies,
                       dba_positions=positions)


def random_density(rng, dims):
    """Random full-rank density matrix with the given factor dims."""
    d = int(np.prod(dims))
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    return rho / rho.trace()


def random_unitary(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def expm_taylor(m, terms=30):
    """Scaled 30-term Taylor series, the independent matrix-exponential oracle."""
    s = max(0, int(np.ceil(np.log2(max(1.0, np.abs(m).sum(axis=1).max())))))
    x = m / (2 ** s)
    acc = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, terms + 1):
        term = term @ x / j
        acc = acc + term
    for _ in range(s):
        acc = acc @ acc
    return acc
