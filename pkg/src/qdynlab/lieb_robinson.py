"""Decay functions, interaction norms and Lieb-Robinson bounds on finite boxes.

The decay function is F(r) = (1 + r)^(-nu - eps_F) with F_mu(r) = exp(-mu r) F(r),
on a box of Z^nu with the l1 metric.  Every constant is evaluated by exhaustive
summation over the finite box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
import scipy.special
from numpy.polynomial import polynomial as P

from .lindblad import GeneratorSpec, StepControl, cb_norm_upper, evolve_operator
from .operators import (
    SiteLattice,
    dag,
    local_left_multiply,
    local_right_multiply,
    operator_norm,
)


def _coords(label) -> tuple[int, ...]:
    return tuple(label) if isinstance(label, tuple) else (int(label),)


@dataclass(frozen=True)
class LatticeGeometry:
    """Finite subset of Z^nu with the l1 distance; site labels are integers (nu=1) or tuples."""

    labels: tuple[Hashable, ...]
    _coords: np.ndarray = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        coords = np.array([_coords(l) for l in labels], dtype=int)
        if coords.ndim != 2 or len(labels) == 0:
            raise ValueError("geometry needs at least one site with consistent dimension")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_coords", coords)
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(labels)})

    @classmethod
    def chain(cls, n: int, start: int = 0) -> "LatticeGeometry":
        return cls(tuple(range(start, start + n)))

    @classmethod
    def box(cls, shape: Sequence[int]) -> "LatticeGeometry":
        if len(shape) == 1:
            return cls.chain(shape[0])
        return cls(tuple(itertools.product(*(range(s) for s in shape))))

    @classmethod
    def for_lattice(cls, lattice: SiteLattice) -> "LatticeGeometry":
        return cls(lattice.labels)

    @property
    def nu(self) -> int:
        return self._coords.shape[1]

    @property
    def n_sites(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self._index[label]

    def distance(self, x, y) -> int:
        return int(np.abs(self._coords[self.index(x)] - self._coords[self.index(y)]).sum())

    def distance_matrix(self) -> np.ndarray:
        c = self._coords
        return np.abs(c[:, None, :] - c[None, :, :]).sum(axis=-1)

    def set_distance(self, xs, ys) -> int:
        return min(self.distance(x, y) for x in xs for y in ys)


@dataclass(frozen=True)
class DecayFunction:
    nu: int
    eps_f: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.eps_f <= 0:
            raise ValueError("eps_F must be positive")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")

    def F(self, r):
        return (1.0 + np.asarray(r, dtype=float)) ** (-self.nu - self.eps_f)

    def F_mu(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.mu * r) * self.F(r)


def decay_constants(geom: LatticeGeometry, decay: DecayFunction) -> tuple[float, float]:
    """(||F||, C_mu) by exhaustive summation over the box."""
    dist = geom.distance_matrix()
    f_norm = float(decay.F(dist).sum(axis=1).max())
    fm = decay.F_mu(dist)
    conv = fm @ fm  # sum_z F_mu(d(x,z)) F_mu(d(z,y))
    c_mu = float((conv / fm).max())
    return f_norm, c_mu


def example_c_bound(nu: int, eps_f: float) -> float:
    """2^(nu+eps) sum_{w in Z^nu} (1+|w|)^(-nu-eps), the infinite-lattice bound on C.

    The number of w with |w|_1 = k >= 1 is a polynomial in k, so the sum splits
    into Hurwitz zeta values.
    """
    s = nu + eps_f
    # c(k) = sum_j 2^j binom(nu, j) binom(k-1, j-1), rewritten in m = k + 1
    poly = np.zeros(1)
    for j in range(1, nu + 1):
        term = np.array([1.0])
        for i in range(1, j):  # (k-1)(k-2)...(k-j+1) with k = m - 1
            term = P.polymul(term, [-(i + 1), 1.0])
        term = term * (2**j * math.comb(nu, j) / math.factorial(j - 1))
        poly = P.polyadd(poly, term)
    total = 1.0  # w = 0
    for i, a in enumerate(poly):
        if a != 0:
            total += a * float(scipy.special.zeta(s - i, 2))
    return 2.0**s * total


# ---------------------------------------------------------------- interaction norm


def sample_times(spec: GeneratorSpec, t: float, n_grid: int = 64) -> np.ndarray:
    """Uniform grid on [0, t] plus all breakpoints inside it."""
    pts = set(np.linspace(0.0, t, n_grid).tolist()) if t > 0 else {0.0}
    pts.update(b for b in spec.breakpoints if 0.0 <= b <= t)
    return np.array(sorted(pts))


def interaction_norm(
    spec: GeneratorSpec,
    t: float,
    geom: LatticeGeometry,
    decay: DecayFunction,
    n_grid: int = 64,
) -> float:
    """||Psi||_{t,mu}: sup_s max_{x,y} sum_{Z containing x,y} cb(Psi_Z(s)) / F_mu(d(x,y))."""
    if not spec.terms:
        return 0.0
    fm = decay.F_mu(geom.distance_matrix())
    n = geom.n_sites
    members = [[geom.index(s) for s in term.support] for term in spec.terms]
    best = 0.0
    for s in sample_times(spec, t, n_grid):
        acc = np.zeros((n, n))
        for term, idx in zip(spec.terms, members):
            acc[np.ix_(idx, idx)] += cb_norm_upper(term, s)
        best = max(best, float((acc / fm).max()))
        if spec.time_independent:
            break
    return best


# ---------------------------------------------------------------- local maps and bounds


@dataclass(frozen=True)
class LocalMap:
    """K_X(B) = [A, B] (kind "commutator") or i[A, B] + sum L*BL - 1/2{L*L, B} ("lindblad")."""

    support: tuple[Hashable, ...]
    a: np.ndarray
    jumps: tuple[np.ndarray, ...] = ()
    kind: str = "commutator"

    def __post_init__(self):
        if self.kind not in ("commutator", "lindblad"):
            raise ValueError(f"unknown LocalMap kind {self.kind!r}")
        if self.kind == "commutator" and self.jumps:
            raise ValueError("commutator maps carry no jump operators")
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "jumps", tuple(np.asarray(l, dtype=complex) for l in self.jumps))

    @property
    def cb_upper(self) -> float:
        return 2.0 * operator_norm(self.a) + 2.0 * sum(operator_norm(l) ** 2 for l in self.jumps)

    def apply(self, b: np.ndarray, lattice: SiteLattice) -> np.ndarray:
        z = self.support
        comm = local_left_multiply(self.a, z, lattice, b) - local_right_multiply(b, self.a, z, lattice)
        if self.kind == "commutator":
            return comm
        out = 1j * comm
        for l in self.jumps:
            ldl = dag(l) @ l
            out += local_right_multiply(local_left_multiply(dag(l), z, lattice, b), l, z, lattice)
            out -= 0.5 * (
                local_left_multiply(ldl, z, lattice, b) + local_right_multiply(b, ldl, z, lattice)
            )
        return out


@dataclass(frozen=True)
class LRConstants:
    f_norm: float
    c_mu: float
    psi_norm: float
    decay: DecayFunction
    geom: LatticeGeometry

    @property
    def velocity(self) -> float:
        """v_{t,mu} = ||Psi||_{t,mu} C_mu / mu."""
        return self.psi_norm * self.c_mu / self.decay.mu

    @classmethod
    def compute(
        cls, spec: GeneratorSpec, t: float, geom: LatticeGeometry, decay: DecayFunction, n_grid: int = 64
    ) -> "LRConstants":
        f_norm, c_mu = decay_constants(geom, decay)
        return cls(f_norm, c_mu, interaction_norm(spec, t, geom, decay, n_grid), decay, geom)


def lr_bound(
    cb_upper: float, b_norm: float, xs: Sequence, ys: Sequence, dt: float, consts: LRConstants
) -> float:
    """(cb ||B|| / C_mu) exp(||Psi|| C_mu dt) sum_{x in X, y in Y} F(d(x,y))."""
    geom, decay = consts.geom, consts.decay
    fsum = float(sum(decay.F(geom.distance(x, y)) for x in xs for y in ys))
    return cb_upper * b_norm / consts.c_mu * math.exp(consts.psi_norm * consts.c_mu * dt) * fsum


def lr_bound_reduced(
    cb_upper: float, b_norm: float, xs: Sequence, ys: Sequence, dt: float, consts: LRConstants
) -> float:
    """(cb ||B|| / C_mu) ||F|| min(|X|,|Y|) exp(-mu (d(X,Y) - v dt))."""
    mu = consts.decay.mu
    dxy = consts.geom.set_distance(xs, ys)
    return (
        cb_upper * b_norm / consts.c_mu * consts.f_norm * min(len(xs), len(ys))
        * math.exp(-mu * (dxy - consts.velocity * dt))
    )


def measure_signal(
    spec: GeneratorSpec,
    kmap: LocalMap,
    b: np.ndarray,
    times: Sequence[float],
    s: float = 0.0,
    control: StepControl = StepControl(),
) -> np.ndarray:
    """||K gamma_{t,s}(B)|| for each t in ``times`` (sorted, >= s)."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < s):
        raise ValueError("times must be sorted and not before s")
    out = np.empty(times.size)
    cur, t_cur = np.asarray(b, dtype=complex), s
    for i, t in enumerate(times):
        cur = evolve_operator(spec, t_cur, t, cur, control)
        t_cur = t
        out[i] = operator_norm(kmap.apply(cur, spec.lattice))
    return out
