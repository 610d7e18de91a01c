"""Physical operators and states for donor-acceptor (DA) and
donor-bridge-acceptor (DBA) electron transfer models.

Units: hbar = omega = 1 internally, so energies are in units of the
oscillator quantum and internal time is in 1/omega. Damping rates enter
configs in cycles (omega / 2 pi) and are converted once, here. Factor
order is fixed globally as (electronic, oscillator[, ancilla]) so partial
traces always use stable indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import DensityMatrix, Operator, identity, kron

__all__ = [
    "TWO_PI",
    "ModelParams",
    "SystemOperators",
    "oscillator_ops",
    "thermal_occupation",
    "build_da",
    "build_dba",
    "build_ancilla_state",
    "build_initial_state",
]

TWO_PI = 2.0 * np.pi

DBA_SITES = ("D", "B1", "B2", "A")

# Ancilla exchange operators, basis order (|0>, |1>). The system-lowering
# jump operator must pair with the operator that de-excites the ancilla's
# high-weight level |1>; the reverse pairing pumps energy into the system
# even at zero temperature.
_ANC_DROP = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
_ANC_RAISE = _ANC_DROP.conj().T                        # |1><0|


@dataclass(frozen=True)
class ModelParams:
    """All physical parameters of a DA or DBA system plus truncation level.

    Energies (`delta_e`, `v`, `lam`, `kbt`, site energies) are in units of
    the oscillator quantum; `gamma_cfg` is in cycles (omega / 2 pi);
    positions are dimensionless.
    """

    kind: str
    v: float
    kbt: float
    gamma_cfg: float
    n_levels: int
    delta_e: float | None = None
    lam: float | None = None
    dba_site_energies: tuple[float, ...] | None = None
    dba_positions: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("DA", "DBA"):
            raise ValueError(f"kind must be 'DA' or 'DBA', got {self.kind!r}")
        if self.n_levels < 2:
            raise ValueError("n_levels must be at least 2")
        if self.kbt <= 0:
            raise ValueError("kbt must be positive")
        if self.gamma_cfg < 0:
            raise ValueError("gamma_cfg must be nonnegative")
        if self.kind == "DA":
            if self.delta_e is None or self.lam is None:
                raise ValueError("DA model requires delta_e and lam")
            if self.lam < 0:
                raise ValueError("lam must be nonnegative")
            if self.dba_site_energies is not None or self.dba_positions is not None:
                raise ValueError("DBA fields are not allowed for a DA model")
        else:
            if self.dba_site_energies is None or self.dba_positions is None:
                raise ValueError("DBA model requires dba_site_energies and dba_positions")
            if len(self.dba_site_energies) != 4 or len(self.dba_positions) != 4:
                raise ValueError("DBA model takes exactly 4 site energies and 4 positions")
            if self.delta_e is not None or self.lam is not None:
                raise ValueError("delta_e/lam are not allowed for a DBA model")
        object.__setattr__(self, "n_levels", int(self.n_levels))

    @property
    def gamma_internal(self) -> float:
        """Damping rate in internal units (1/omega time), gamma_cfg / (2 pi)."""
        return self.gamma_cfg / TWO_PI

    @property
    def n_sites(self) -> int:
        return 2 if self.kind == "DA" else 4

    @property
    def site_labels(self) -> tuple[str, ...]:
        return ("D", "A") if self.kind == "DA" else DBA_SITES


@dataclass(frozen=True)
class SystemOperators:
    """Operators of one model instance, factor order (electronic, oscillator).

    `h_int` lives on (electronic, oscillator, ancilla). `hamiltonian_terms`
    holds the (prefactor, normalized operator) decomposition used by the
    product-formula propagator; it is only available for DA models.
    """

    h_et: Operator
    h0_et: Operator
    jump: Operator
    jump_dag: Operator
    h_int: Operator
    nbar: float
    gamma: float
    site_projectors: tuple[Operator, ...]
    hamiltonian_terms: tuple[tuple[float, Operator], ...] | None = None

    @property
    def dim(self) -> int:
        return self.h_et.dim

    @property
    def n_sites(self) -> int:
        return self.h_et.factor_dims[0]

    @property
    def n_levels(self) -> int:
        return self.h_et.factor_dims[1]


def oscillator_ops(n_levels: int):
    """Truncated ladder, position and momentum operators.

    a|n> = sqrt(n)|n-1>, q = (a^dag + a)/2, p = i(a^dag - a)/2.
    """
    if n_levels < 2:
        raise ValueError("n_levels must be at least 2")
    a = np.zeros((n_levels, n_levels), dtype=complex)
    for n in range(1, n_levels):
        a[n - 1, n] = np.sqrt(n)
    adag = a.conj().T
    dims = (n_levels,)
    return (
        Operator(a, dims),
        Operator(adag, dims),
        Operator((adag + a) / 2.0, dims),
        Operator(1j * (adag - a) / 2.0, dims),
    )


def thermal_occupation(kbt: float) -> float:
    """Mean Bose occupation 1 / (exp(1/kbt) - 1) at temperature kbt (hw = 1)."""
    if kbt <= 0:
        raise ValueError("kbt must be positive")
    return 1.0 / np.expm1(1.0 / kbt)


def _interaction_hamiltonian(jump: Operator, gamma: float, nbar: float) -> Operator:
    g = np.sqrt(gamma * (2.0 * nbar + 1.0))
    h = g * (np.kron(jump.data, _ANC_DROP) + np.kron(jump.dag().data, _ANC_RAISE))
    return Operator(h, jump.factor_dims + (2,))


def _site_projectors(n_sites: int, n_levels: int) -> tuple[Operator, ...]:
    projs = []
    for i in range(n_sites):
        e = np.zeros((n_sites, n_sites), dtype=complex)
        e[i, i] = 1.0
        projs.append(kron(Operator(e, (n_sites,)), identity((n_levels,))))
    return tuple(projs)


def build_da(params: ModelParams) -> SystemOperators:
    """Donor-acceptor Hamiltonian, shifted jump operator and ancilla coupling.

    h_et = (dE/2) sz x I + V sx x I + I x a^dag a + sqrt(lam) sz x q,
    jump = I x a - delta x I with delta = -(sqrt(lam)/2) sz, and the
    state-preparation Hamiltonian h0_et drops the electronic coupling term.
    """
    if params.kind != "DA":
        raise ValueError("build_da requires a DA parameter set")
    n = params.n_levels
    a, adag, q, _ = oscillator_ops(n)
    sz = Operator(np.diag([1.0, -1.0]).astype(complex), (2,))
    sx = Operator(np.array([[0, 1], [1, 0]], dtype=complex), (2,))
    i2 = identity((2,))
    i_osc = identity((n,))

    num = Operator(adag.data @ a.data, (n,))
    terms = (
        (params.delta_e / 2.0, kron(sz, i_osc)),
        (params.v, kron(sx, i_osc)),
        (1.0, kron(i2, num)),
        (np.sqrt(params.lam), kron(sz, q)),
    )
    h = sum(c * t.data for c, t in terms)
    h_et = Operator(h, (2, n))
    h0_et = Operator(h - params.v * kron(sx, i_osc).data, (2, n))

    shift = -(np.sqrt(params.lam) / 2.0) * sz.data
    jump = Operator(np.kron(np.eye(2), a.data) - np.kron(shift, np.eye(n)), (2, n))

    nbar = thermal_occupation(params.kbt)
    gamma = params.gamma_internal
    return SystemOperators(
        h_et=h_et,
        h0_et=h0_et,
        jump=jump,
        jump_dag=jump.dag(),
        h_int=_interaction_hamiltonian(jump, gamma, nbar),
        nbar=nbar,
        gamma=gamma,
        site_projectors=_site_projectors(2, n),
        hamiltonian_terms=terms,
    )


def build_dba(params: ModelParams) -> SystemOperators:
    """Donor-bridge-acceptor model with two bridge sites.

    Each site carries a displaced oscillator (q - q_site)^2 + p^2 plus its
    site energy; nearest neighbors are coupled with strength V. The
    state-preparation Hamiltonian removes only the D-B1 coupling.
    """
    if params.kind != "DBA":
        raise ValueError("build_dba requires a DBA parameter set")
    n = params.n_levels
    a, adag, q, p = oscillator_ops(n)
    eps = params.dba_site_energies
    pos = params.dba_positions
    i_osc = np.eye(n, dtype=complex)

    h = np.zeros((4 * n, 4 * n), dtype=complex)
    for i in range(4):
        e = np.zeros((4, 4), dtype=complex)
        e[i, i] = 1.0
        disp = (q.data - pos[i] * i_osc) @ (q.data - pos[i] * i_osc)
        h += np.kron(e, eps[i] * i_osc + disp)
    h += np.kron(np.eye(4, dtype=complex), p.data @ p.data)

    hop = np.zeros((4, 4), dtype=complex)
    for i in range(3):
        hop[i, i + 1] = 1.0
        hop[i + 1, i] = 1.0
    h += params.v * np.kron(hop, i_osc)
    h_et = Operator(h, (4, n))

    d_b1 = np.zeros((4, 4), dtype=complex)
    d_b1[0, 1] = d_b1[1, 0] = 1.0
    h0_et = Operator(h - params.v * np.kron(d_b1, i_osc), (4, n))

    shift = np.diag(np.asarray(pos, dtype=complex))
    jump = Operator(np.kron(np.eye(4), a.data) - np.kron(shift, i_osc), (4, n))

    nbar = thermal_occupation(params.kbt)
    gamma = params.gamma_internal
    return SystemOperators(
        h_et=h_et,
        h0_et=h0_et,
        jump=jump,
        jump_dag=jump.dag(),
        h_int=_interaction_hamiltonian(jump, gamma, nbar),
        nbar=nbar,
        gamma=gamma,
        site_projectors=_site_projectors(4, n),
        hamiltonian_terms=None,
    )


def build_ancilla_state(nbar: float) -> DensityMatrix:
    """Ancilla reset state diag(nbar, nbar + 1) / (2 nbar + 1)."""
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    z = 2.0 * nbar + 1.0
    return DensityMatrix(Operator(np.diag([nbar / z, (nbar + 1.0) / z]).astype(complex), (2,)))


def donor_block(ops: SystemOperators) -> np.ndarray:
    """Oscillator-space matrix element <D| h_et |D> (donor is site 0)."""
    n = ops.n_levels
    return ops.h_et.data[:n, :n]


def thermal_state(h_osc: np.ndarray, kbt: float) -> np.ndarray:
    """exp(-h/kbt)/Z for a Hermitian oscillator-space Hamiltonian."""
    w, v = np.linalg.eigh(h_osc)
    weights = np.exp(-(w - w[0]) / kbt)  # shift avoids underflow of Z
    rho = (v * weights) @ v.conj().T
    return rho / rho.trace().real


def build_initial_state(ops: SystemOperators, params: ModelParams) -> DensityMatrix:
    """Electron on the donor, oscillator thermalized in the donor potential.

    Returns |D><D| (x) exp(-<D|h_et|D> / kbt) / Z. The donor population is
    exactly 1 by construction.
    """
    n = ops.n_levels
    rho_osc = thermal_state(donor_block(ops), params.kbt)
    full = np.zeros((ops.dim, ops.dim), dtype=complex)
    full[:n, :n] = rho_osc
    return DensityMatrix(Operator(full, ops.h_et.factor_dims))
