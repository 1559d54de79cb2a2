"""Time-dependent Lindblad generators on finite lattices and their cocycles.

Generators act in the Heisenberg picture,

    L(t)(A) = sum_Z  i[Phi(t,Z), A] + sum_a ( L_a* A L_a - 1/2 {L_a* L_a, A} ),

and the cocycle gamma_{t,s} solves d/dt A(t) = L(t) A(t), A(s) = A.

Superoperators are stored as d^2 x d^2 matrices acting on column-stacked
operators, vec(A X B) = (B^T kron A) vec(X).  Under the Hilbert-Schmidt inner
product the Schroedinger-picture map is the conjugate transpose of that matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np
import scipy.sparse

from .errors import DimensionMismatch, NonFinite, StepControlFailure, TimeOutOfHorizon
from .operators import (
    SiteLattice,
    dag,
    embed,
    embed_sparse,
    is_hermitian,
    operator_norm,
)

HEISENBERG = "heisenberg"
SCHRODINGER = "schrodinger"


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    if d is None:
        d = math.isqrt(v.size)
    return np.asarray(v).reshape(d, d, order="F")


# ---------------------------------------------------------------- time dependence


class Constant:
    """Time-independent operator."""

    breakpoints: tuple[float, ...] = ()

    def __init__(self, value):
        self.value = np.asarray(value, dtype=complex)

    def __call__(self, t: float, left: bool = False) -> np.ndarray:
        return self.value


class PiecewiseConstant:
    """Operator equal to ``values[i]`` on ``[starts[i], starts[i+1])``.

    The first segment extends to -inf and the last to +inf.  ``left=True``
    returns the left limit at a breakpoint, which the integrator needs when a
    stage lands exactly on a segment end.
    """

    def __init__(self, starts: Sequence[float], values: Sequence[np.ndarray]):
        if len(starts) != len(values) or not starts:
            raise ValueError("need one start time per value")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        self.starts = tuple(float(s) for s in starts)
        self.values = tuple(np.asarray(v, dtype=complex) for v in values)
        self.breakpoints = self.starts[1:]

    def __call__(self, t: float, left: bool = False) -> np.ndarray:
        side = "left" if left else "right"
        i = int(np.searchsorted(self.starts, t, side=side)) - 1
        return self.values[max(i, 0)]


class Sampled:
    """Operator given by a callable ``t -> matrix`` (assumed norm-continuous)."""

    breakpoints: tuple[float, ...] = ()

    def __init__(self, fn: Callable[[float], np.ndarray]):
        self.fn = fn

    def __call__(self, t: float, left: bool = False) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=complex)


def as_time_operator(x):
    if isinstance(x, (Constant, PiecewiseConstant, Sampled)):
        return x
    if callable(x):
        return Sampled(x)
    return Constant(x)


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class InteractionTerm:
    """One term Psi_Z: a Hamiltonian Phi(t, Z) and jump operators L_a(t, Z) on Z."""

    support: tuple[Hashable, ...]
    hamiltonian: object = None
    jumps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        if self.hamiltonian is not None:
            object.__setattr__(self, "hamiltonian", as_time_operator(self.hamiltonian))
        object.__setattr__(self, "jumps", tuple(as_time_operator(j) for j in self.jumps))

    def operators(self, t: float, left: bool = False):
        h = None if self.hamiltonian is None else self.hamiltonian(t, left)
        return h, [j(t, left) for j in self.jumps]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        for op in ([self.hamiltonian] if self.hamiltonian is not None else []) + list(self.jumps):
            pts.update(op.breakpoints)
        return tuple(sorted(pts))

    @property
    def time_independent(self) -> bool:
        ops = ([self.hamiltonian] if self.hamiltonian is not None else []) + list(self.jumps)
        return all(isinstance(op, Constant) for op in ops)


@dataclass(frozen=True)
class GeneratorSpec:
    """Finite-volume generator: a lattice, its interaction terms and a time horizon."""

    lattice: SiteLattice
    terms: tuple[InteractionTerm, ...]
    horizon: float = math.inf
    _breaks: tuple = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            d_loc = self.lattice.support_dim(term.support)
            for t in (0.0,) + term.breakpoints:
                h, jumps = term.operators(t)
                for op in ([h] if h is not None else []) + jumps:
                    if op.shape != (d_loc, d_loc):
                        raise DimensionMismatch(
                            f"term on {term.support} has operator of shape {op.shape}, "
                            f"expected ({d_loc}, {d_loc})"
                        )
                if h is not None and not is_hermitian(h):
                    raise ValueError(f"Hamiltonian on {term.support} is not Hermitian at t={t}")
        pts = sorted({b for term in self.terms for b in term.breakpoints})
        object.__setattr__(self, "_breaks", tuple(pts))

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self._breaks

    @property
    def time_independent(self) -> bool:
        return all(term.time_independent for term in self.terms)

    def check_time(self, *times: float) -> None:
        for t in times:
            if not (0.0 <= t <= self.horizon):
                raise TimeOutOfHorizon(f"t={t} outside [0, {self.horizon}]")

    def restricted(self, lattice: SiteLattice) -> "GeneratorSpec":
        """Keep only the terms whose support lies inside ``lattice``."""
        keep = [t for t in self.terms if all(s in lattice.labels for s in t.support)]
        return GeneratorSpec(lattice, tuple(keep), self.horizon)


# ---------------------------------------------------------------- superoperators


@dataclass(frozen=True)
class Superoperator:
    """Linear map on d x d operators as a d^2 x d^2 matrix (column stacking)."""

    matrix: np.ndarray
    picture: str = HEISENBERG

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or math.isqrt(m.shape[0]) ** 2 != m.shape[0]:
            raise DimensionMismatch(f"superoperator matrix has bad shape {m.shape}")
        if self.picture not in (HEISENBERG, SCHRODINGER):
            raise ValueError(f"unknown picture {self.picture!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return math.isqrt(self.matrix.shape[0])

    @classmethod
    def identity(cls, d: int, picture: str = HEISENBERG) -> "Superoperator":
        return cls(np.eye(d * d, dtype=complex), picture)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], picture: str = SCHRODINGER) -> "Superoperator":
        """rho -> sum K rho K* (Schroedinger) or A -> sum K* A K (Heisenberg)."""
        d = kraus[0].shape[0]
        m = np.zeros((d * d, d * d), dtype=complex)
        for k in kraus:
            m += np.kron(k.conj(), k) if picture == SCHRODINGER else np.kron(k.T, dag(k))
        return cls(m, picture)

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"operator shape {a.shape} vs superoperator dim {self.dim}")
        return unvec(self.matrix @ vec(a), self.dim)

    def adjoint(self) -> "Superoperator":
        """Hilbert-Schmidt adjoint; flips the picture flag."""
        flipped = SCHRODINGER if self.picture == HEISENBERG else HEISENBERG
        return Superoperator(dag(self.matrix), flipped)

    def in_picture(self, picture: str) -> "Superoperator":
        return self if picture == self.picture else self.adjoint()

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        if other.picture != self.picture:
            raise ValueError("cannot compose maps given in different pictures")
        return Superoperator(self.matrix @ other.matrix, self.picture)


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    (m, n), (p, q) = a.shape, b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(m * p, n * q)


def lindblad_matrix(
    hamiltonian: np.ndarray | None, jumps: Sequence[np.ndarray], d: int
) -> np.ndarray:
    """Heisenberg generator matrix of A -> i[H, A] + sum L*AL - 1/2{L*L, A}.

    Written as G*A + AG + sum L*AL with G = -iH - 1/2 sum L*L.
    """
    eye = np.eye(d)
    g = np.zeros((d, d), dtype=complex)
    if hamiltonian is not None:
        g -= 1j * np.asarray(hamiltonian)
    for l in jumps:
        g -= 0.5 * dag(l) @ l
    out = _kron(eye, dag(g)) + _kron(g.T, eye)
    if len(jumps):
        # sum_k L_k^T kron L_k^* as one product over the jump index
        lt = np.stack([np.asarray(l).T for l in jumps]).reshape(len(jumps), d * d)
        ld = np.stack([dag(l) for l in jumps]).reshape(len(jumps), d * d)
        out += (lt.T @ ld).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return out


def _global_operators(spec: GeneratorSpec, t: float, left: bool = False):
    lat = spec.lattice
    h_tot = np.zeros((lat.dim, lat.dim), dtype=complex)
    jumps = []
    for term in spec.terms:
        h, ls = term.operators(t, left)
        if h is not None:
            h_tot += embed(h, term.support, lat)
        jumps.extend(embed(l, term.support, lat) for l in ls)
    return h_tot, jumps


def generator_matrix(spec: GeneratorSpec, t: float, left: bool = False) -> np.ndarray:
    h, jumps = _global_operators(spec, t, left)
    return lindblad_matrix(h, jumps, spec.dim)


def build_generator(spec: GeneratorSpec, t: float) -> Superoperator:
    """L(t) as a Heisenberg-picture superoperator."""
    spec.check_time(t)
    return Superoperator(generator_matrix(spec, t), HEISENBERG)


def _sparse_generator(lattice, terms, t, left):
    """Sparse Heisenberg generator: I kron G* + G^T kron I + sum L^T kron L*,
    with G = -iH - 1/2 sum L*L."""
    d = lattice.dim
    eye = scipy.sparse.identity(d, dtype=complex, format="csr")
    g = scipy.sparse.csr_matrix((d, d), dtype=complex)
    jump_part = scipy.sparse.csr_matrix((d * d, d * d), dtype=complex)
    for term in terms:
        h, ls = term.operators(t, left)
        if h is not None:
            g = g - 1j * embed_sparse(h, term.support, lattice)
        for l in ls:
            lg = embed_sparse(l, term.support, lattice)
            lg_d = lg.conj().T.tocsr()
            g = g - 0.5 * (lg_d @ lg)
            jump_part = jump_part + scipy.sparse.kron(lg.T, lg_d, format="csr")
    out = scipy.sparse.kron(eye, g.conj().T, format="csr") + scipy.sparse.kron(g.T, eye, format="csr")
    return (out + jump_part).tocsr()


def generator_sparse(spec: GeneratorSpec, t: float, left: bool = False) -> scipy.sparse.csr_matrix:
    """L(t) as a sparse d^2 x d^2 matrix; the time-independent part is cached on the spec."""
    if "const" not in spec._cache:
        const = [term for term in spec.terms if term.time_independent]
        spec._cache["const"] = _sparse_generator(spec.lattice, const, 0.0, False)
        spec._cache["varying"] = [term for term in spec.terms if not term.time_independent]
    s0 = spec._cache["const"]
    varying = spec._cache["varying"]
    if not varying:
        return s0
    return s0 + _sparse_generator(spec.lattice, varying, t, left)


def apply_generator(spec: GeneratorSpec, t: float, a: np.ndarray, left: bool = False) -> np.ndarray:
    """L(t)(a)."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"operator shape {a.shape} vs lattice dim {spec.dim}")
    return unvec(generator_sparse(spec, t, left) @ vec(a), spec.dim)


def cb_norm_upper(term: InteractionTerm, t: float) -> float:
    """2||Phi|| + 2 sum ||L_a||^2, an upper bound on the cb-norm of Psi_Z(t)."""
    h, ls = term.operators(t)
    val = 2.0 * operator_norm(h) if h is not None else 0.0
    return val + 2.0 * sum(operator_norm(l) ** 2 for l in ls)


def generator_norm_bound(spec: GeneratorSpec, t: float) -> float:
    """sum_Z of cb_norm_upper, an upper bound on ||L(t)||."""
    return sum(cb_norm_upper(term, t) for term in spec.terms)


# ---------------------------------------------------------------- Euler product


def euler_product(spec: GeneratorSpec, t: float, n: int) -> Superoperator:
    """prod_{k=n}^{1} (id + (t/n) L(kt/n)), the k=1 factor applied first."""
    spec.check_time(t)
    if n < 1:
        raise ValueError("n must be a positive integer")
    d2 = spec.dim**2
    h = t / n
    m = np.eye(d2, dtype=complex)
    if t == 0:
        return Superoperator(m, HEISENBERG)
    for k in range(1, n + 1):
        m = m + h * (generator_matrix(spec, k * h) @ m)
    return Superoperator(m, HEISENBERG)


# ---------------------------------------------------------------- ODE integration


@dataclass(frozen=True)
class StepControl:
    """RK4 step control: double the step count until the result moves by < tol."""

    tol: float = 1e-9
    max_steps: int = 1 << 16
    initial_steps: int | None = None


def _rk4(rhs, y, a, b, n):
    h = (b - a) / n
    for k in range(n):
        t0 = a + k * h
        t1 = t0 + 0.5 * h
        t2 = b if k == n - 1 else t0 + h
        last = k == n - 1
        k1 = rhs(t0, y, False)
        k2 = rhs(t1, y + 0.5 * h * k1, False)
        k3 = rhs(t1, y + 0.5 * h * k2, False)
        k4 = rhs(t2, y + h * k3, last)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _segments(spec, s, t):
    cuts = [s] + [b for b in spec.breakpoints if s < b < t] + [t]
    return list(zip(cuts[:-1], cuts[1:]))


def _integrate(spec, rhs, y0, s, t, control: StepControl):
    y = y0
    for a, b in _segments(spec, s, t):
        rate = max(generator_norm_bound(spec, a), generator_norm_bound(spec, 0.5 * (a + b)), 1e-300)
        n = control.initial_steps or max(1, math.ceil((b - a) * rate / 0.5))
        if n > control.max_steps:
            raise StepControlFailure(
                f"[{a}, {b}] needs at least {n} RK4 steps, above max_steps={control.max_steps}"
            )
        prev = _rk4(rhs, y, a, b, n)
        while True:
            n *= 2
            if n > control.max_steps:
                raise StepControlFailure(
                    f"RK4 did not converge to {control.tol:g} within {control.max_steps} steps "
                    f"on [{a}, {b}]"
                )
            cur = _rk4(rhs, y, a, b, n)
            if not np.all(np.isfinite(cur)):
                raise NonFinite("integration produced non-finite values")
            if np.max(np.abs(cur - prev)) < control.tol:
                break
            prev = cur
        y = cur
    return y


def evolve_operator(
    spec: GeneratorSpec, s: float, t: float, a: np.ndarray, control: StepControl = StepControl()
) -> np.ndarray:
    """gamma_{t,s}(a), integrating the operator directly (no d^2 matrices)."""
    spec.check_time(s, t)
    if t < s:
        raise ValueError("need s <= t")
    a = np.asarray(a, dtype=complex)
    if a.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"operator shape {a.shape} vs lattice dim {spec.dim}")
    if t == s:
        return a.copy()
    y = _integrate(spec, _operator_rhs(spec), vec(a), s, t, control)
    return unvec(y, spec.dim)


#: lattices up to this dimension use dense generator matrices when integrating
DENSE_DIM = 16


def _operator_rhs(spec):
    if spec.dim > DENSE_DIM:
        return lambda r, y, left: generator_sparse(spec, r, left) @ y
    if spec.time_independent:
        if "dense" not in spec._cache:
            spec._cache["dense"] = generator_matrix(spec, 0.0)
        return lambda r, y, left: spec._cache["dense"] @ y
    return lambda r, y, left: generator_matrix(spec, r, left) @ y


def evolve_cocycle(
    spec: GeneratorSpec, s: float, t: float, control: StepControl = StepControl()
) -> Superoperator:
    """gamma_{t,s} as a Heisenberg superoperator."""
    spec.check_time(s, t)
    if t < s:
        raise ValueError("need s <= t")
    d2 = spec.dim**2
    eye = np.eye(d2, dtype=complex)
    if t == s:
        return Superoperator(eye, HEISENBERG)
    cache = {}

    def rhs(r, y, left):
        key = (r, left and r in spec.breakpoints)
        if key not in cache:
            cache[key] = generator_matrix(spec, r, left)
        return cache[key] @ y

    return Superoperator(_integrate(spec, rhs, eye, s, t, control), HEISENBERG)


# ---------------------------------------------------------------- certification


def choi_matrix(ch: Superoperator) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij E_ij kron ch(E_ij) of the Schroedinger map."""
    m = ch.in_picture(SCHRODINGER).matrix
    d = ch.dim
    m4 = m.reshape((d, d, d, d), order="F")  # m4[a, b, i, j] = <a| ch(E_ij) |b>
    return m4.transpose(2, 0, 3, 1).reshape(d * d, d * d)


@dataclass(frozen=True)
class CPReport:
    min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_eigenvalue >= -self.tol


def check_cp(ch: Superoperator, tol: float = 1e-9) -> CPReport:
    c = choi_matrix(ch)
    c = 0.5 * (c + dag(c))
    return CPReport(float(np.linalg.eigvalsh(c)[0]), tol)


def unitality_defect(ch: Superoperator) -> float:
    """||ch(1) - 1|| for the Heisenberg form of ``ch``."""
    h = ch.in_picture(HEISENBERG)
    eye = np.eye(h.dim)
    return operator_norm(h(eye) - eye)


def trace_defect(ch: Superoperator, rho: np.ndarray) -> float:
    """|Tr ch(rho) - Tr rho| for the Schroedinger form of ``ch``."""
    s = ch.in_picture(SCHRODINGER)
    return float(abs(np.trace(s(rho)) - np.trace(rho)))


def dissipativity_defect(spec: GeneratorSpec, t: float, a: np.ndarray) -> np.ndarray:
    """L(A*A) - L(A*)A - A*L(A); positive semidefinite for Lindblad generators."""
    spec.check_time(t)
    a = np.asarray(a, dtype=complex)
    if a.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"operator shape {a.shape} vs lattice dim {spec.dim}")
    ad = dag(a)
    return (
        apply_generator(spec, t, ad @ a)
        - apply_generator(spec, t, ad) @ a
        - ad @ apply_generator(spec, t, a)
    )


def jump_commutator_sum(spec: GeneratorSpec, t: float, a: np.ndarray) -> np.ndarray:
    """sum over all jump operators of [A, L]*[A, L]."""
    _, jumps = _global_operators(spec, t)
    out = np.zeros((spec.dim, spec.dim), dtype=complex)
    for l in jumps:
        c = a @ l - l @ a
        out += dag(c) @ c
    return out


# ---------------------------------------------------------------- random specs


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (x + dag(x)) / math.sqrt(d)


def random_operator(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2 * d)


def random_spec(
    n_sites: int,
    rng: np.random.Generator | int,
    n_jumps: int = 1,
    time_dependent: bool = True,
    horizon: float = math.inf,
    scale: float = 1.0,
) -> GeneratorSpec:
    """Random qubit chain: one-site and nearest-neighbour terms.

    With ``time_dependent`` each operator is modulated by a smooth factor
    ``1 + 0.5 cos(w t + phi)`` with random w and phi.  Integer ``rng`` values
    seed numpy's default PCG64 generator.
    """
    rng = np.random.default_rng(rng)
    lattice = SiteLattice.qubits(n_sites)
    supports = [(i,) for i in range(n_sites)] + [(i, i + 1) for i in range(n_sites - 1)]
    terms = []
    for z in supports:
        d = 2 ** len(z)
        h = random_hermitian(rng, d, scale)
        ls = [random_operator(rng, d, scale * 0.7) for _ in range(n_jumps)]
        if time_dependent:
            h = _modulated(h, rng)
            ls = [_modulated(l, rng) for l in ls]
        terms.append(InteractionTerm(z, h, tuple(ls)))
    return GeneratorSpec(lattice, tuple(terms), horizon)


def _modulated(op, rng):
    w, phi = rng.uniform(0.5, 3.0), rng.uniform(0, 2 * math.pi)
    return Sampled(lambda t, op=op, w=w, phi=phi: (1.0 + 0.5 * math.cos(w * t + phi)) * op)
