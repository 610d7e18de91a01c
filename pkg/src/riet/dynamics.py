"""Time evolution engines.

Four propagation routes share one recording format (:class:`Trajectory`):
a fixed-step RK4 integrator for the Lindblad master equation, exact
repeated-interaction (RI) propagation, RI with a 2nd-order product-formula
unitary, and RI state preparation. Times are handled in oscillator periods
(2 pi / omega) at the interfaces and converted to internal 1/omega units
once, on entry.

Each trajectory evolution is single-threaded and deterministic; distinct
trajectories are independent and can run in separate processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import (
    DensityMatrix,
    Operator,
    _concurrence4,
    _fidelity,
    _ptrace,
    expm_i_herm,
    expm_nilpotent2,
)
from .model import (
    TWO_PI,
    ModelParams,
    SystemOperators,
    build_ancilla_state,
    build_initial_state,
)

__all__ = [
    "Trajectory",
    "RIConfig",
    "IntegrationDivergedError",
    "UnsupportedModelError",
    "lindblad_rhs",
    "integrate_lindblad",
    "build_ri_unitary",
    "ri_step",
    "evolve_ri",
    "build_trotter_unitary",
    "run_state_preparation",
]

TRACE_TOL = 1e-6


class IntegrationDivergedError(RuntimeError):
    """Raised when the propagated state loses its trace beyond tolerance."""


class UnsupportedModelError(ValueError):
    """Raised when an operation is asked for a model kind it does not cover."""


@dataclass
class Trajectory:
    """Recorded observables on a uniform time grid.

    Attributes
    ----------
    times : ndarray
        Record times in periods, strictly increasing, uniform.
    columns : dict
        Named real observable columns (site populations, trace, purity,
        optionally fidelity or concurrence), all the same length as `times`.
    record_stride : int
        Steps (or interactions) between records.
    """

    times: np.ndarray
    columns: dict[str, np.ndarray]
    record_stride: int

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def donor_population(self) -> np.ndarray:
        return self.columns["P_D"]


@dataclass(frozen=True)
class RIConfig:
    """Repeated-interaction schedule: `steps` interactions of `tau` periods.

    trotter_n = 0 propagates with the exact joint unitary; n >= 1 uses the
    2nd-order product formula with n steps per interaction.
    """

    tau: float
    steps: int
    trotter_n: int = 0
    record_stride: int = 1

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.trotter_n < 0:
            raise ValueError("trotter_n must be nonnegative")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")


# ---------------------------------------------------------------------------
# recording

class _Recorder:
    """Accumulates per-record observables for one evolution."""

    def __init__(self, ops: SystemOperators, dims: tuple[int, ...],
                 fidelity_target: np.ndarray | None = None,
                 concurrence_keep: tuple[int, int] | None = None):
        self.dims = dims
        dim = int(np.prod(dims))
        # electronic index of each diagonal element, for population masks
        tail = dim // dims[0]
        diag_site = np.arange(dim) // tail
        self.site_masks = [diag_site == i for i in range(dims[0])]
        self.site_names = ["P_D", "P_A"] if dims[0] == 2 else ["P_D", "P_B1", "P_B2", "P_A"]
        self.fidelity_target = fidelity_target
        self.concurrence_keep = concurrence_keep
        self.rows: list[list[float]] = []

    def names(self) -> list[str]:
        cols = self.site_names + ["trace", "purity"]
        if self.fidelity_target is not None:
            cols.append("fidelity")
        if self.concurrence_keep is not None:
            cols.append("concurrence")
        return cols

    def record(self, rho: np.ndarray) -> None:
        d = rho.diagonal().real
        row = [float(d[m].sum()) for m in self.site_masks]
        row.append(float(d.sum()))
        row.append(float((np.abs(rho) ** 2).sum()))
        if self.fidelity_target is not None:
            row.append(_fidelity(rho, self.fidelity_target))
        if self.concurrence_keep is not None:
            red, _ = _ptrace(rho, self.dims, self.concurrence_keep)
            row.append(_concurrence4(red))
        self.rows.append(row)

    def trajectory(self, dt_record: float, record_stride: int) -> Trajectory:
        data = np.asarray(self.rows)
        times = np.arange(data.shape[0]) * dt_record
        cols = {name: data[:, i].copy() for i, name in enumerate(self.names())}
        return Trajectory(times=times, columns=cols, record_stride=record_stride)


# ---------------------------------------------------------------------------
# Lindblad reference engine

def _dissipator_pieces(ops: SystemOperators):
    """Return (M, A, A^dag, B, B^dag) with rhs(x) = Mx + (Mx)^dag + AxA^dag + BxB^dag."""
    a = np.sqrt(ops.gamma * (1.0 + ops.nbar)) * ops.jump.data
    b = np.sqrt(ops.gamma * ops.nbar) * ops.jump_dag.data
    m = -1j * ops.h_et.data - 0.5 * (a.conj().T @ a + b.conj().T @ b)
    return m, a, a.conj().T.copy(), b, b.conj().T.copy()


def _rhs(x, m, a, adag, b, bdag):
    mx = m @ x
    return mx + mx.conj().T + a @ x @ adag + b @ x @ bdag


def lindblad_rhs(rho: DensityMatrix, ops: SystemOperators) -> Operator:
    """Master-equation right-hand side
    -i[H, rho] + gamma(1+nbar) D[L](rho) + gamma nbar D[L^dag](rho).

    Valid for Hermitian input; the result is traceless up to round-off.
    """
    if rho.dim != ops.dim:
        raise ValueError(f"dimension mismatch: rho {rho.dim} vs system {ops.dim}")
    m, a, adag, b, bdag = _dissipator_pieces(ops)
    return Operator(_rhs(rho.op.data, m, a, adag, b, bdag), rho.op.factor_dims)


def integrate_lindblad(rho0: DensityMatrix, ops: SystemOperators, t_max: float,
                       dt: float, record_stride: int = 100,
                       fidelity_target: DensityMatrix | None = None,
                       concurrence_keep: tuple[int, int] | None = None) -> Trajectory:
    """Classical fixed-step RK4 on the master equation.

    `t_max` and `dt` are in periods. The state is re-symmetrized after every
    step; a trace deviation beyond 1e-6 aborts with the offending step.
    """
    if dt <= 0 or t_max < dt:
        raise ValueError("need dt > 0 and t_max >= dt")
    m, a, adag, b, bdag = _dissipator_pieces(ops)
    h = dt * TWO_PI
    n_steps = int(round(t_max / dt))
    rho = rho0.op.data.copy()
    rec = _Recorder(ops, rho0.op.factor_dims,
                    None if fidelity_target is None else fidelity_target.op.data,
                    concurrence_keep)
    rec.record(rho)
    for step in range(1, n_steps + 1):
        k1 = _rhs(rho, m, a, adag, b, bdag)
        k2 = _rhs(rho + (h / 2) * k1, m, a, adag, b, bdag)
        k3 = _rhs(rho + (h / 2) * k2, m, a, adag, b, bdag)
        k4 = _rhs(rho + h * k3, m, a, adag, b, bdag)
        rho += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = (rho + rho.conj().T) / 2
        tr = rho.trace().real
        if abs(tr - 1.0) > TRACE_TOL:
            raise IntegrationDivergedError(
                f"trace deviated to {tr:.9f} at step {step} (t = {step * dt:g} periods)")
        if step % record_stride == 0:
            rec.record(rho)
    return rec.trajectory(dt * record_stride, record_stride)


# ---------------------------------------------------------------------------
# repeated-interaction engine

def build_ri_unitary(ops: SystemOperators, tau: float, state_prep: bool = False) -> Operator:
    """Joint system-ancilla unitary exp(-i tau_int (H + H_int / sqrt(tau_int))).

    `tau` is in periods; tau_int = 2 pi tau. The 1/sqrt(tau) scaling of the
    coupling keeps the induced dissipation finite as tau -> 0. With
    state_prep the electronic-coupling-free Hamiltonian is used.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    tau_int = tau * TWO_PI
    h_sys = ops.h0_et if state_prep else ops.h_et
    h_eff = np.kron(h_sys.data, np.eye(2, dtype=complex)) + ops.h_int.data / np.sqrt(tau_int)
    return expm_i_herm(Operator(h_eff, h_sys.factor_dims + (2,)), tau_int)


def _ri_apply(rho: np.ndarray, u: np.ndarray, udag: np.ndarray, eta: np.ndarray,
              d_sys: int) -> np.ndarray:
    joint = u @ np.kron(rho, eta) @ udag
    out = np.einsum("iaja->ij", joint.reshape(d_sys, 2, d_sys, 2))
    return (out + out.conj().T) / 2


def ri_step(rho: DensityMatrix, u: Operator, eta: DensityMatrix) -> DensityMatrix:
    """One interaction: Tr_ancilla{ U (rho (x) eta) U^dag }, re-symmetrized."""
    if u.dim != rho.dim * eta.dim:
        raise ValueError(
            f"dimension mismatch: unitary {u.dim} vs system {rho.dim} x ancilla {eta.dim}")
    out = _ri_apply(rho.op.data, u.data, u.data.conj().T, eta.op.data, rho.dim)
    return DensityMatrix(Operator(out, rho.op.factor_dims))


def evolve_ri(rho0: DensityMatrix, ops: SystemOperators, cfg: RIConfig,
              state_prep: bool = False,
              fidelity_target: DensityMatrix | None = None,
              concurrence_keep: tuple[int, int] | None = None) -> Trajectory:
    """Apply the repeated-interaction map cfg.steps times.

    The joint unitary is built once (exact for trotter_n = 0, product
    formula otherwise) and observables are recorded every record_stride
    interactions. In exact mode a trace drift beyond 1e-6 raises; in
    Trotter mode the drift is part of the product-formula error and is
    recorded in the trace column instead.
    """
    if cfg.trotter_n == 0:
        u = build_ri_unitary(ops, cfg.tau, state_prep)
    else:
        if state_prep:
            raise ValueError("Trotterized state preparation is not supported")
        u = build_trotter_unitary(ops, cfg.tau, cfg.trotter_n)
    u_m = u.data
    udag = u_m.conj().T.copy()
    eta = build_ancilla_state(ops.nbar).op.data
    d_sys = rho0.dim
    rho = rho0.op.data.copy()
    rec = _Recorder(ops, rho0.op.factor_dims,
                    None if fidelity_target is None else fidelity_target.op.data,
                    concurrence_keep)
    rec.record(rho)
    exact = cfg.trotter_n == 0
    for step in range(1, cfg.steps + 1):
        rho = _ri_apply(rho, u_m, udag, eta, d_sys)
        if exact:
            tr = rho.trace().real
            if abs(tr - 1.0) > TRACE_TOL:
                raise IntegrationDivergedError(
                    f"trace deviated to {tr:.9f} at interaction {step}")
        if step % cfg.record_stride == 0:
            rec.record(rho)
    return rec.trajectory(cfg.tau * cfg.record_stride, cfg.record_stride)


def build_trotter_unitary(ops: SystemOperators, tau: float, n: int) -> Operator:
    """2nd-order product-formula approximation of the joint RI unitary.

    The six factors are the four Hamiltonian terms (extended by the ancilla
    identity) and the two halves of the scaled coupling, c L (x) s- and
    c L^dag (x) s+ with c = sqrt(gamma (2 nbar + 1) / tau_int). Factors are
    applied in descending order of |scalar prefactor| (ties keep the listing
    order), each for a half step tau_int / (2n), then in reverse; the
    sequence is repeated n times. Hermitian factors exponentiate exactly by
    eigendecomposition; the coupling factors are order-2 nilpotent and
    exponentiate exactly as I + theta x. The per-interaction map is not
    exactly trace preserving; the drift is a diagnostic, not renormalized.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if ops.hamiltonian_terms is None:
        raise UnsupportedModelError("product-formula propagation is only defined for DA models")
    tau_int = tau * TWO_PI
    theta = tau_int / (2.0 * n)
    i2 = np.eye(2, dtype=complex)
    dims = ops.h_et.factor_dims + (2,)

    c = np.sqrt(ops.gamma * (2.0 * ops.nbar + 1.0) / tau_int)
    anc_drop = np.array([[0, 1], [0, 0]], dtype=complex)
    factors: list[tuple[float, int, np.ndarray]] = []
    for order, (coeff, term) in enumerate(ops.hamiltonian_terms):
        full = Operator(np.kron(term.data, i2), dims)
        factors.append((abs(coeff), order,
                        expm_i_herm(full, theta * coeff).data))
    lower = Operator(np.kron(ops.jump.data, anc_drop), dims)
    raise_ = lower.dag()
    for order, x in ((len(factors), lower), (len(factors) + 1, raise_)):
        factors.append((abs(c), order, expm_nilpotent2(x, -1j * theta * c).data))

    factors.sort(key=lambda f: (-f[0], f[1]))
    fwd = factors[0][2]
    for _, _, f in factors[1:]:
        fwd = fwd @ f
    rev = factors[-1][2]
    for _, _, f in factors[-2::-1]:
        rev = rev @ f
    step = fwd @ rev
    return Operator(np.linalg.matrix_power(step, n), dims)


def run_state_preparation(ops: SystemOperators, cfg: RIConfig,
                          params: ModelParams) -> Trajectory:
    """Repeated-interaction state preparation from |D><D| (x) |0><0|.

    Evolves with the electronic-coupling-free unitary and records the
    fidelity against the thermal displaced target state at each record
    point. The donor population stays at 1 throughout because nothing in
    the generator couples the donor to other sites.
    """
    target = build_initial_state(ops, params)
    rho0 = np.zeros((ops.dim, ops.dim), dtype=complex)
    rho0[0, 0] = 1.0
    start = DensityMatrix(Operator(rho0, ops.h_et.factor_dims))
    return evolve_ri(start, ops, cfg, state_prep=True, fidelity_target=target)
