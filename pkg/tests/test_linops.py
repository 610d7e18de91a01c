import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riet.linops import (
    DensityMatrix,
    Operator,
    concurrence,
    expm_i_herm,
    expm_nilpotent2,
    fidelity,
    herm_eig,
    identity,
    kron,
    partial_trace,
    sqrt_psd,
)

from conftest import expm_taylor, random_density, random_unitary

SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)


def op(m, dims=None):
    m = np.asarray(m, dtype=complex)
    return Operator(m, dims or (m.shape[0],))


# ---------------------------------------------------------------------------
# Operator / DensityMatrix invariants

def test_operator_rejects_bad_dims():
    with pytest.raises(ValueError):
        Operator(np.eye(6), (2, 2))
    with pytest.raises(ValueError):
        Operator(np.eye(6), ())
    with pytest.raises(ValueError):
        Operator(np.ones((2, 3)), (6,))


def test_density_matrix_validation(rng):
    rho = DensityMatrix.from_matrix(random_density(rng, (4,)), (4,))
    rho.validate()
    with pytest.raises(ValueError):
        DensityMatrix.from_matrix(np.diag([0.7, 0.7]).astype(complex), (2,))
    with pytest.raises(ValueError):
        DensityMatrix.from_matrix(np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex), (2,))


# ---------------------------------------------------------------------------
# kron

def test_kron_identities():
    assert np.allclose(kron(identity((2,)), identity((3,))).data, np.eye(6))
    got = kron(op(SZ), identity((2,))).data
    assert np.allclose(np.diag(got), [1, 1, -1, -1])


def test_kron_matches_elementwise_oracle(rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    got = kron(op(a), op(b))
    expected = np.zeros((12, 12), dtype=complex)
    for i in range(3):
        for j in range(3):
            for k in range(4):
                for l in range(4):
                    expected[i * 4 + k, j * 4 + l] = a[i, j] * b[k, l]
    assert np.allclose(got.data, expected)
    assert got.factor_dims == (3, 4)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 3), st.integers(2, 3), st.integers(2, 3))
def test_kron_associative(seed, da, db, dc):
    rng = np.random.default_rng(seed)
    a, b, c = (op(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
               for d in (da, db, dc))
    left = kron(kron(a, b), c)
    right = kron(a, kron(b, c))
    assert np.abs(left.data - right.data).max() < 1e-12
    assert left.factor_dims == right.factor_dims


# ---------------------------------------------------------------------------
# partial trace

def test_partial_trace_product_state(rng):
    ra = random_density(rng, (3,))
    rb = random_density(rng, (4,))
    joint = DensityMatrix(Operator(np.kron(ra, rb), (3, 4)))
    assert np.allclose(partial_trace(joint, {0}).op.data, ra)
    assert np.allclose(partial_trace(joint, {1}).op.data, rb)


def test_partial_trace_bell_state():
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    rho = DensityMatrix(Operator(np.outer(psi, psi.conj()), (2, 2)))
    red = partial_trace(rho, {0})
    assert np.allclose(red.op.data, np.eye(2) / 2)


def test_partial_trace_index_sum_oracle(rng):
    dims = (2, 3, 2)
    rho = random_density(rng, dims)
    red = partial_trace(DensityMatrix(Operator(rho, dims)), {0, 2}).op.data
    # brute-force sum over the middle index
    t = rho.reshape(2, 3, 2, 2, 3, 2)
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for k in range(2):
            for j in range(2):
                for l in range(2):
                    expected[i * 2 + k, j * 2 + l] = sum(t[i, m, k, j, m, l] for m in range(3))
    assert np.allclose(red, expected)


def test_partial_trace_keep_all_and_trace_preservation(rng):
    dims = (2, 3)
    rho = random_density(rng, dims)
    dm = DensityMatrix(Operator(rho, dims))
    assert np.allclose(partial_trace(dm, {0, 1}).op.data, rho)
    red = partial_trace(dm, {1})
    assert abs(red.op.data.trace() - 1.0) < 1e-12


def test_partial_trace_invalid_index(rng):
    dm = DensityMatrix(Operator(random_density(rng, (2, 2)), (2, 2)))
    with pytest.raises(ValueError):
        partial_trace(dm, {0, 5})
    with pytest.raises(ValueError):
        partial_trace(dm, set())


# ---------------------------------------------------------------------------
# eigendecomposition and exponentials

def test_herm_eig_pauli():
    dec = herm_eig(op(SZ))
    assert np.allclose(dec.eigenvalues, [-1, 1])
    dec = herm_eig(op(SX))
    assert np.allclose(dec.eigenvalues, [-1, 1])
    minus = dec.eigenvectors[:, 0]
    assert abs(abs(minus @ np.array([1, -1]) / np.sqrt(2)) - 1) < 1e-12


def test_herm_eig_number_operator():
    n = 16
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    dec = herm_eig(op(a.conj().T @ a))
    assert np.allclose(dec.eigenvalues, np.arange(n))


def test_herm_eig_reconstruction(rng):
    m = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    h = (m + m.conj().T) / 2
    dec = herm_eig(op(h))
    rebuilt = (dec.eigenvectors * dec.eigenvalues) @ dec.eigenvectors.conj().T
    assert np.linalg.norm(rebuilt - h) / np.linalg.norm(h) < 1e-10
    gram = dec.eigenvectors.conj().T @ dec.eigenvectors
    assert np.abs(gram - np.eye(9)).max() < 1e-10


def test_herm_eig_rejects_non_hermitian(rng):
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    with pytest.raises(ValueError):
        herm_eig(op(m))


def test_expm_trivial_cases(rng):
    h = rng.standard_normal((5, 5))
    h = op((h + h.T) / 2)
    assert np.allclose(expm_i_herm(h, 0.0).data, np.eye(5))
    u = expm_i_herm(op(SZ), np.pi / 2).data
    assert np.allclose(np.diag(u), [np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)])


def test_expm_matches_series_oracle(rng):
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    h = (m + m.conj().T) / 2
    theta = 0.73
    got = expm_i_herm(op(h), theta).data
    assert np.abs(got - expm_taylor(-1j * theta * h)).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(-3.0, 3.0))
def test_expm_inverse_property(seed, theta):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = op((m + m.conj().T) / 2)
    u = expm_i_herm(h, theta).data @ expm_i_herm(h, -theta).data
    assert np.abs(u - np.eye(6)).max() < 1e-9


def test_expm_nilpotent_cases(rng):
    sp = np.array([[0, 0], [1, 0]], dtype=complex)
    theta = 0.4 - 0.2j
    got = expm_nilpotent2(op(sp), theta).data
    assert np.allclose(got, np.eye(2) + theta * sp)
    assert np.allclose(expm_nilpotent2(op(sp), 0.0).data, np.eye(2))

    # L (x) sigma_plus style operator against the series oracle
    l = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    x = np.kron(l, sp)
    got = expm_nilpotent2(Operator(x, (4, 2)), theta).data
    assert np.abs(got - expm_taylor(theta * x)).max() < 1e-10


def test_expm_nilpotent_rejects_non_nilpotent():
    with pytest.raises(ValueError):
        expm_nilpotent2(op(SX), 0.3)


# ---------------------------------------------------------------------------
# sqrt, fidelity, concurrence

def test_sqrt_psd_trivial(rng):
    d = 6
    rho = DensityMatrix(Operator(np.eye(d, dtype=complex) / d, (d,)))
    assert np.allclose(sqrt_psd(rho).data, np.eye(d) / np.sqrt(d))
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    proj = DensityMatrix(Operator(np.outer(v, v.conj()), (d,)))
    assert np.abs(sqrt_psd(proj).data - proj.op.data).max() < 1e-8


def test_sqrt_psd_reconstruction(rng):
    rho = DensityMatrix(Operator(random_density(rng, (8,)), (8,)))
    s = sqrt_psd(rho).data
    assert np.linalg.norm(s @ s - rho.op.data) < 1e-9


def test_fidelity_values(rng):
    rho = DensityMatrix(Operator(random_density(rng, (5,)), (5,)))
    assert abs(fidelity(rho, rho) - 1.0) < 1e-9

    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    w = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v /= np.linalg.norm(v)
    w /= np.linalg.norm(w)
    pv = DensityMatrix(Operator(np.outer(v, v.conj()), (5,)))
    pw = DensityMatrix(Operator(np.outer(w, w.conj()), (5,)))
    assert abs(fidelity(pv, pw) - abs(v.conj() @ w)) < 1e-8

    mixed = DensityMatrix(Operator(np.eye(2, dtype=complex) / 2, (2,)))
    pure0 = DensityMatrix(Operator(np.diag([1.0, 0.0]).astype(complex), (2,)))
    assert abs(fidelity(mixed, pure0) - 1 / np.sqrt(2)) < 1e-12


def test_fidelity_dimension_mismatch(rng):
    a = DensityMatrix(Operator(random_density(rng, (2,)), (2,)))
    b = DensityMatrix(Operator(random_density(rng, (3,)), (3,)))
    with pytest.raises(ValueError):
        fidelity(a, b)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_fidelity_symmetry_and_bounds(seed):
    rng = np.random.default_rng(seed)
    a = DensityMatrix(Operator(random_density(rng, (6,)), (6,)))
    b = DensityMatrix(Operator(random_density(rng, (6,)), (6,)))
    fab, fba = fidelity(a, b), fidelity(b, a)
    assert abs(fab - fba) < 1e-9
    assert -1e-9 <= fab <= 1 + 1e-9


def bell_state():
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def test_concurrence_bell_and_product(rng):
    assert abs(concurrence(DensityMatrix(Operator(bell_state(), (2, 2)))) - 1.0) < 1e-12
    prod = np.kron(random_density(rng, (2,)), random_density(rng, (2,)))
    assert concurrence(DensityMatrix(Operator(prod, (2, 2)))) < 1e-9


def test_concurrence_werner_oracle():
    # p Bell + (1-p) I/4 has concurrence max(0, (3p-1)/2)
    for p, expected in [(0.8, 0.7), (0.5, 0.25), (0.2, 0.0)]:
        rho = p * bell_state() + (1 - p) * np.eye(4) / 4
        got = concurrence(DensityMatrix(Operator(rho, (2, 2))))
        assert abs(got - expected) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_concurrence_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = 0.6 * bell_state() + 0.4 * np.kron(random_density(rng, (2,)), random_density(rng, (2,)))
    rho = (rho + rho.conj().T) / 2
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    before = concurrence(DensityMatrix(Operator(rho, (2, 2))))
    after = concurrence(DensityMatrix(Operator(u @ rho @ u.conj().T, (2, 2))))
    assert abs(before - after) < 1e-9


def test_concurrence_wrong_dimension(rng):
    with pytest.raises(ValueError):
        concurrence(DensityMatrix(Operator(random_density(rng, (4,)), (4,))))
