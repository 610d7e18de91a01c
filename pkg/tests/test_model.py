import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riet.linops import DensityMatrix, Operator, fidelity
from riet.model import (
    ModelParams,
    build_ancilla_state,
    build_da,
    build_dba,
    build_initial_state,
    oscillator_ops,
    thermal_occupation,
)

from conftest import da_params, dba_params


# ---------------------------------------------------------------------------
# oscillator operators

def test_ladder_action():
    a, adag, _, _ = oscillator_ops(5)
    ket = np.zeros(5)
    ket[1] = 1.0
    assert np.allclose(a.data @ ket, [1, 0, 0, 0, 0])
    ket0 = np.zeros(5)
    ket0[0] = 1.0
    assert np.allclose(a.data @ ket0, 0)
    assert np.allclose(adag.data, a.data.conj().T)


def test_commutator_truncation_corner():
    n = 7
    a, adag, _, _ = oscillator_ops(n)
    comm = a.data @ adag.data - adag.data @ a.data
    expected = np.eye(n)
    expected[n - 1, n - 1] = 1 - n
    assert np.allclose(comm, expected)


def test_position_momentum_identity_interior():
    n = 10
    a, adag, q, p = oscillator_ops(n)
    lhs = q.data @ q.data + p.data @ p.data
    rhs = adag.data @ a.data + np.eye(n) / 2
    # the truncation artifact lives in the last row/column only
    assert np.allclose(lhs[: n - 1, : n - 1], rhs[: n - 1, : n - 1])


def test_oscillator_rejects_small_truncation():
    with pytest.raises(ValueError):
        oscillator_ops(1)


# ---------------------------------------------------------------------------
# thermal occupation

def test_thermal_occupation_values():
    assert thermal_occupation(0.01) < 1e-40
    assert abs(thermal_occupation(1.0) - 0.581977) < 1e-6
    assert abs(thermal_occupation(2.0) - 1.541494) < 1e-6
    with pytest.raises(ValueError):
        thermal_occupation(0.0)
    with pytest.raises(ValueError):
        thermal_occupation(-1.0)


# ---------------------------------------------------------------------------
# parameter validation

def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(kind="DA", v=0.1, kbt=1.0, gamma_cfg=0.01, n_levels=8)  # no delta_e/lam
    with pytest.raises(ValueError):
        ModelParams(kind="XX", v=0.1, kbt=1.0, gamma_cfg=0.01, n_levels=8)
    with pytest.raises(ValueError):
        da_params(n_levels=1)
    with pytest.raises(ValueError):
        da_params(kbt=-1.0)
    with pytest.raises(ValueError):
        ModelParams(kind="DBA", v=0.1, kbt=1.0, gamma_cfg=0.01, n_levels=8,
                    dba_site_energies=(1.0, 2.0), dba_positions=(0.0, 1.0))
    with pytest.raises(ValueError):
        build_da(dba_params())
    with pytest.raises(ValueError):
        build_dba(da_params())


def test_gamma_conversion():
    p = da_params(gamma_cfg=0.01)
    assert abs(p.gamma_internal - 0.01 / (2 * np.pi)) < 1e-15


# ---------------------------------------------------------------------------
# DA model

def test_da_decoupled_spectrum():
    p = da_params(n_levels=6, delta_e=2.5, v=0.0, lam=0.0)
    ops = build_da(p)
    got = np.linalg.eigvalsh(ops.h_et.data)
    expected = np.sort(np.concatenate(
        [m + np.array([1.25, -1.25]) for m in range(6)]))
    assert np.allclose(np.sort(got), expected)


def test_da_donor_displaced_ground_state_position():
    # lam = 1: the donor-well minimum sits at q = -0.5
    p = da_params(n_levels=16, delta_e=3.0, lam=1.0)
    ops = build_da(p)
    n = p.n_levels
    w, v = np.linalg.eigh(ops.h_et.data[:n, :n])
    ground = v[:, 0]
    _, _, q, _ = oscillator_ops(n)
    mean_q = (ground.conj() @ q.data @ ground).real
    assert abs(mean_q + 0.5) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.0, 2.0), st.floats(0.0, 4.0),
       st.floats(0.2, 3.0), st.floats(0.0, 0.3))
def test_da_hermiticity_and_adjointness(delta_e, v, lam, kbt, gamma_cfg):
    ops = build_da(ModelParams(kind="DA", v=v, kbt=kbt, gamma_cfg=gamma_cfg,
                               n_levels=6, delta_e=delta_e, lam=lam))
    assert np.abs(ops.h_et.data - ops.h_et.dag().data).max() < 1e-12
    assert np.abs(ops.h0_et.data - ops.h0_et.dag().data).max() < 1e-12
    assert np.abs(ops.h_int.data - ops.h_int.dag().data).max() < 1e-12
    assert np.allclose(ops.jump_dag.data, ops.jump.data.conj().T)


def test_da_state_prep_hamiltonian_drops_coupling():
    p = da_params(n_levels=4, v=0.7)
    ops = build_da(p)
    diff = ops.h_et.data - ops.h0_et.data
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(diff, 0.7 * np.kron(sx, np.eye(4)))


# ---------------------------------------------------------------------------
# DBA model

def test_dba_decoupled_blocks_are_displaced_oscillators():
    p = dba_params(n_levels=16, v=0.0)
    ops = build_dba(p)
    n = p.n_levels
    for i, eps in enumerate(p.dba_site_energies):
        block = ops.h_et.data[i * n:(i + 1) * n, i * n:(i + 1) * n]
        w = np.linalg.eigvalsh(block)
        assert abs(w[0] - (eps + 0.5)) < 1e-5


def test_dba_defaults_spacing_and_energies():
    p = dba_params()
    assert np.allclose(np.diff(p.dba_positions), 1.0)
    assert p.dba_site_energies == (5.0, 4.0, 3.0, 0.0)


def test_dba_uniform_position_shift_gauge():
    # a uniform shift of all well positions is a gauge choice; only
    # truncation breaks it, so compare the converged lower spectrum
    n = 32
    base = build_dba(dba_params(n_levels=n))
    shifted = build_dba(dba_params(
        n_levels=n, positions=tuple(x + 0.25 for x in (-1.5, -0.5, 0.5, 1.5))))
    w0 = np.linalg.eigvalsh(base.h_et.data)
    w1 = np.linalg.eigvalsh(shifted.h_et.data)
    assert np.abs(w0[:20] - w1[:20]).max() < 1e-6


def test_dba_state_prep_keeps_other_couplings():
    p = dba_params(n_levels=4, v=0.3)
    ops = build_dba(p)
    diff = ops.h_et.data - ops.h0_et.data
    d_b1 = np.zeros((4, 4))
    d_b1[0, 1] = d_b1[1, 0] = 1.0
    assert np.allclose(diff, 0.3 * np.kron(d_b1, np.eye(4)))


# ---------------------------------------------------------------------------
# ancilla and initial states

def test_ancilla_state_values():
    zero_t = build_ancilla_state(0.0)
    assert np.allclose(zero_t.op.data, np.diag([0.0, 1.0]))
    eta = build_ancilla_state(0.581977)
    assert np.allclose(np.diag(eta.op.data).real, [0.26894, 0.73106], atol=1e-5)
    for nbar in (0.0, 0.3, 2.7):
        assert abs(build_ancilla_state(nbar).op.data.trace() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        build_ancilla_state(-0.1)


def test_initial_state_donor_population_and_position():
    p = da_params(n_levels=16, delta_e=3.0, lam=1.0, kbt=1.0)
    ops = build_da(p)
    rho0 = build_initial_state(ops, p)
    rho0.validate(trace_tol=1e-12, eig_floor=-1e-12)
    n = p.n_levels
    donor_pop = rho0.op.data[:n, :n].trace().real
    assert abs(donor_pop - 1.0) < 1e-14
    _, _, q, _ = oscillator_ops(n)
    full_q = np.kron(np.eye(2), q.data)
    mean_q = np.einsum("ij,ji->", full_q, rho0.op.data).real
    assert abs(mean_q + 0.5) < 1e-3


def test_initial_state_zero_temperature_limit():
    p = da_params(n_levels=16, kbt=0.01)
    ops = build_da(p)
    rho0 = build_initial_state(ops, p)
    n = p.n_levels
    w, v = np.linalg.eigh(ops.h_et.data[:n, :n])
    ground = np.zeros((2 * n, 2 * n), dtype=complex)
    ground[:n, :n] = np.outer(v[:, 0], v[:, 0].conj())
    target = DensityMatrix(Operator(ground, (2, n)))
    assert fidelity(rho0, target) > 0.999


def test_initial_state_dba():
    p = dba_params(n_levels=12)
    ops = build_dba(p)
    rho0 = build_initial_state(ops, p)
    rho0.validate(trace_tol=1e-12, eig_floor=-1e-12)
    n = p.n_levels
    assert abs(rho0.op.data[:n, :n].trace().real - 1.0) < 1e-14
