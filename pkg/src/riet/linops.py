"""Dense complex linear algebra on tensor-structured operators.

Every matrix is carried together with the ordered list of tensor-factor
dimensions, so Kronecker products and partial traces never have to guess
the factorization. All functions are pure; returned objects are safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Operator",
    "DensityMatrix",
    "EigenDecomposition",
    "identity",
    "kron",
    "partial_trace",
    "herm_eig",
    "expm_i_herm",
    "expm_nilpotent2",
    "sqrt_psd",
    "fidelity",
    "concurrence",
]

HERM_TOL = 1e-10


@dataclass(frozen=True)
class Operator:
    """Square complex matrix tagged with its tensor-factor dimensions.

    Attributes
    ----------
    data : ndarray
        Row-major complex square matrix.
    factor_dims : tuple of int
        Ordered factor dimensions; their product equals the matrix dimension.
    """

    data: np.ndarray
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=complex)
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("factor_dims must be a non-empty list of positive integers")
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {data.shape}")
        if int(np.prod(dims)) != data.shape[0]:
            raise ValueError(
                f"product of factor_dims {dims} does not match matrix dimension {data.shape[0]}"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.factor_dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Operator constrained to be Hermitian, unit-trace and PSD.

    The constraints are checked by :meth:`validate`, not on construction:
    propagation loops re-wrap states thousands of times and validate only
    at recording points.
    """

    op: Operator

    @classmethod
    def from_matrix(cls, data, factor_dims, check: bool = True) -> "DensityMatrix":
        rho = cls(Operator(data, factor_dims))
        if check:
            rho.validate()
        return rho

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 eig_floor: float = -1e-10) -> "DensityMatrix":
        m = self.op.data
        herm = np.abs(m - m.conj().T).max()
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr:.12g} deviates from 1")
        wmin = np.linalg.eigvalsh(m)[0]
        if wmin < eig_floor:
            raise ValueError(f"density matrix has negative eigenvalue {wmin:.3e}")
        return self

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian operator."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def identity(factor_dims) -> Operator:
    dims = tuple(int(d) for d in factor_dims)
    return Operator(np.eye(int(np.prod(dims)), dtype=complex), dims)


def kron(a: Operator, b: Operator) -> Operator:
    """Kronecker product with `a` as the slow (leftmost) index."""
    return Operator(np.kron(a.data, b.data), a.factor_dims + b.factor_dims)


def _ptrace(data: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]):
    """Partial trace of a raw matrix; returns (matrix, kept dims)."""
    n = len(dims)
    t = data.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    red = np.einsum(t, row + col, out)
    kept = tuple(dims[i] for i in keep)
    m = int(np.prod(kept))
    return red.reshape(m, m), kept


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every factor not listed in `keep`.

    Kept factors retain their original order regardless of the order of
    `keep`. The trace is preserved exactly up to round-off.
    """
    dims = rho.op.factor_dims
    idx = tuple(sorted({int(k) for k in keep}))
    if not idx:
        raise ValueError("keep must name at least one factor")
    if any(k < 0 or k >= len(dims) for k in idx):
        raise ValueError(f"invalid factor index in {idx}; operator has {len(dims)} factors")
    red, kept = _ptrace(rho.op.data, dims, idx)
    return DensityMatrix(Operator(red, kept))


def herm_eig(h: Operator) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator (LAPACK `eigh`)."""
    m = h.data
    dev = np.abs(m - m.conj().T).max()
    if dev > HERM_TOL:
        raise ValueError(f"operator is not Hermitian: max |h - h^dag| = {dev:.3e}")
    w, v = np.linalg.eigh(m)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def _expm_i_herm(m: np.ndarray, theta: float) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def expm_i_herm(h: Operator, theta: float) -> Operator:
    """exp(-i * theta * h) for Hermitian h, via eigendecomposition.

    The decomposition route is chosen because each propagator is built
    once and applied many times, so its cost amortizes.
    """
    dec = herm_eig(h)
    u = (dec.eigenvectors * np.exp(-1j * theta * dec.eigenvalues)) @ dec.eigenvectors.conj().T
    return Operator(u, h.factor_dims)


def expm_nilpotent2(x: Operator, theta: complex) -> Operator:
    """exp(theta * x) = I + theta * x for x with x @ x = 0.

    Exact for order-2 nilpotent operators; the nilpotency is checked.
    """
    sq = x.data @ x.data
    if np.abs(sq).max() > 1e-12:
        raise ValueError("operator is not nilpotent of order 2 (x @ x != 0)")
    return Operator(np.eye(x.dim, dtype=complex) + theta * x.data, x.factor_dims)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    np.clip(w, 0.0, None, out=w)  # absorb integrator round-off
    return (v * np.sqrt(w)) @ v.conj().T


def sqrt_psd(rho: DensityMatrix) -> Operator:
    """Positive square root; negative round-off eigenvalues are clipped to 0."""
    return Operator(_sqrt_psd(rho.op.data), rho.op.factor_dims)


def _fidelity(a: np.ndarray, b: np.ndarray) -> float:
    s = _sqrt_psd(a)
    inner = s @ b @ s
    inner = (inner + inner.conj().T) / 2
    w = np.linalg.eigvalsh(inner)
    np.clip(w, 0.0, None, out=w)
    return float(np.sqrt(w).sum())


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr sqrt(rho^(1/2) sigma rho^(1/2)), symmetric in its arguments."""
    if rho.op.dim != sigma.op.dim:
        raise ValueError(f"dimension mismatch: {rho.op.dim} vs {sigma.op.dim}")
    return _fidelity(rho.op.data, sigma.op.data)


_SY_SY = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)  # sigma_y (x) sigma_y


def _concurrence4(m: np.ndarray) -> float:
    r = m @ _SY_SY @ m.conj() @ _SY_SY
    ev = np.linalg.eigvals(r).real
    np.clip(ev, 0.0, None, out=ev)
    lam = np.sort(np.sqrt(ev))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit concurrence: max(0, l1 - l2 - l3 - l4) with li the descending
    square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy)."""
    if rho.op.factor_dims != (2, 2):
        raise ValueError(f"concurrence requires factor_dims (2, 2), got {rho.op.factor_dims}")
    return _concurrence4(rho.op.data)
