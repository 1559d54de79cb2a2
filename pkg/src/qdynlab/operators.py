"""Dense operator algebra on truncated Fock spaces and finite spin lattices.

Tensor products use one fixed ordering throughout the package: the last site
is the fastest-varying index, so the operator on sites ``(s0, s1, ..., sk)`` is
``np.kron(A0, np.kron(A1, ...))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Hashable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.stats

from .errors import DimensionMismatch, NonFinite, TruncationError

#: default threshold for the population of the top Fock level
DEFAULT_TAIL_TOL = 1e-8


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return a @ b + b @ a


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace(m: np.ndarray) -> complex:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"trace needs a square matrix, got shape {m.shape}")
    return complex(np.trace(m))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m - dag(m)), initial=0.0) <= tol)


def matrix_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (Pade scaling-and-squaring via scipy)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix_exp needs a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix_exp input has non-finite entries")
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise NonFinite("matrix_exp overflowed")
    return out


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


# ---------------------------------------------------------------- Fock space


@dataclass(frozen=True)
class FockSpace:
    """Number states |0>, ..., |cutoff>."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ValueError(f"cutoff must be a non-negative integer, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1


def annihilation_op(space: FockSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1).astype(complex)


def creation_op(space: FockSpace) -> np.ndarray:
    return dag(annihilation_op(space))


def number_op(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim, dtype=float)).astype(complex)


def fock_state(space: FockSpace, n: int = 0) -> np.ndarray:
    """Density matrix |n><n|."""
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def tail_mass(rho: np.ndarray) -> float:
    """Population of the highest retained level."""
    return float(abs(rho[-1, -1].real))


def check_tail(rho: np.ndarray, tol: float = DEFAULT_TAIL_TOL, what: str = "state") -> None:
    mass = tail_mass(rho)
    if mass > tol:
        raise TruncationError(
            f"{what}: top Fock level holds {mass:.3e} > {tol:.1e}; raise the cutoff"
        )


def coherent_tail(space: FockSpace, amplitude: complex) -> float:
    """Weight of the exact coherent state |amplitude> on levels >= cutoff."""
    return float(scipy.stats.poisson.sf(space.cutoff - 1, abs(amplitude) ** 2))


def _check_shift(space, amplitude, tol, what):
    mass = coherent_tail(space, amplitude)
    if mass > tol:
        raise TruncationError(
            f"{what}: coherent amplitude {abs(amplitude):.3g} puts weight {mass:.3e} at the cutoff "
            f"{space.cutoff}"
        )


def displacement(space: FockSpace, r: float, tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """D(r) = exp(r (b* - b)) for real r, so that D b D* = b - r."""
    if r == 0:
        return np.eye(space.dim, dtype=complex)
    _check_shift(space, r, tol, "displacement")
    b = annihilation_op(space)
    return matrix_exp(r * (dag(b) - b))


def weyl_op(space: FockSpace, alpha: complex, tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """W(alpha) = exp(alpha b - conj(alpha) b*)."""
    if alpha == 0:
        return np.eye(space.dim, dtype=complex)
    _check_shift(space, alpha, tol, "weyl_op")
    b = annihilation_op(space)
    return matrix_exp(alpha * b - np.conj(alpha) * dag(b))


# ---------------------------------------------------------------- two-level atom

#: excitation projector of a two-level atom, eta = a* a
ATOM_EXCITED = np.diag([0.0, 1.0]).astype(complex)


def atom_state(p: float) -> np.ndarray:
    """Diagonal atom state with excitation probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"excitation probability must lie in [0, 1], got {p}")
    return np.diag([1.0 - p, p]).astype(complex)


# ---------------------------------------------------------------- lattices


@dataclass(frozen=True)
class SiteLattice:
    """Ordered sites with per-site Hilbert-space dimensions.

    ``labels`` default to ``0, 1, ..., n-1``; any hashable labels work, which
    lets nested volumes share labels for the same physical site.
    """

    dims: tuple[int, ...]
    labels: tuple[Hashable, ...] = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError("site dimensions must be positive")
        labels = tuple(range(len(dims))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(dims):
            raise DimensionMismatch("one label per site is required")
        if len(set(labels)) != len(labels):
            raise ValueError("site labels must be unique")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def qubits(cls, n: int, labels: Sequence[Hashable] | None = None) -> "SiteLattice":
        return cls((2,) * n, None if labels is None else tuple(labels))

    @property
    def dim(self) -> int:
        return prod(self.dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DimensionMismatch(f"site {label!r} is not in the lattice") from None

    def indices(self, support: Sequence[Hashable]) -> tuple[int, ...]:
        idx = tuple(self.index(s) for s in support)
        if len(set(idx)) != len(idx):
            raise DimensionMismatch("support lists a site twice")
        return idx

    def support_dim(self, support: Sequence[Hashable]) -> int:
        return prod(self.dims[i] for i in self.indices(support))


def _local_shape(local, lattice, idx):
    d_loc = prod(lattice.dims[i] for i in idx)
    if local.shape != (d_loc, d_loc):
        raise DimensionMismatch(
            f"local operator has shape {local.shape}, support needs ({d_loc}, {d_loc})"
        )


def embed(local: np.ndarray, support: Sequence[Hashable], lattice: SiteLattice) -> np.ndarray:
    """Global operator acting as ``local`` on ``support`` and as identity elsewhere."""
    local = np.asarray(local, dtype=complex)
    idx = lattice.indices(support)
    _local_shape(local, lattice, idx)
    return local_left_multiply(local, support, lattice, np.eye(lattice.dim, dtype=complex))


def local_left_multiply(
    local: np.ndarray, support: Sequence[Hashable], lattice: SiteLattice, a: np.ndarray
) -> np.ndarray:
    """embed(local) @ a, without forming the embedded matrix."""
    idx = lattice.indices(support)
    _local_shape(local, lattice, idx)
    if a.shape != (lattice.dim, lattice.dim):
        raise DimensionMismatch(f"operator shape {a.shape} does not match lattice dim {lattice.dim}")
    k = len(idx)
    if k == 0:
        return local[0, 0] * a
    t = a.reshape(lattice.dims + lattice.dims)
    loc = local.reshape(tuple(lattice.dims[i] for i in idx) * 2)
    out = np.tensordot(loc, t, axes=(list(range(k, 2 * k)), list(idx)))
    out = np.moveaxis(out, list(range(k)), list(idx))
    return out.reshape(a.shape)


def local_right_multiply(
    a: np.ndarray, local: np.ndarray, support: Sequence[Hashable], lattice: SiteLattice
) -> np.ndarray:
    """a @ embed(local)."""
    return local_left_multiply(local.T, support, lattice, a.T).T


def embed_sparse(
    local: np.ndarray, support: Sequence[Hashable], lattice: SiteLattice
) -> scipy.sparse.csr_matrix:
    """Sparse version of :func:`embed`."""
    local = np.asarray(local, dtype=complex)
    idx = lattice.indices(support)
    _local_shape(local, lattice, idx)
    lo = min(idx, default=0)
    if list(idx) != list(range(lo, lo + len(idx))):
        return scipy.sparse.csr_matrix(embed(local, support, lattice))
    left = prod(lattice.dims[:lo])
    right = prod(lattice.dims[lo + len(idx):])
    out = scipy.sparse.kron(scipy.sparse.identity(left, dtype=complex), scipy.sparse.csr_matrix(local))
    out = scipy.sparse.kron(out, scipy.sparse.identity(right, dtype=complex))
    return out.tocsr()


def partial_trace(m: np.ndarray, lattice: SiteLattice, keep: Sequence[Hashable]) -> np.ndarray:
    """Trace out every site not in ``keep``; kept sites stay in lattice order."""
    m = np.asarray(m)
    if m.shape != (lattice.dim, lattice.dim):
        raise DimensionMismatch(f"operator shape {m.shape} does not match lattice dim {lattice.dim}")
    kept = sorted(lattice.indices(keep))
    n = lattice.n_sites
    t = m.reshape(lattice.dims + lattice.dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if n > len(letters):
        raise ValueError("partial_trace supports at most 26 sites")
    rows = [letters[i] for i in range(n)]
    cols = [letters[i].upper() if i in kept else letters[i] for i in range(n)]
    out_sub = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    res = np.einsum("".join(rows) + "".join(cols) + "->" + out_sub, t)
    d_keep = prod(lattice.dims[i] for i in kept)
    return res.reshape(d_keep, d_keep)


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out
