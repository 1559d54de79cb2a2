"""Finite-volume convergence diagnostic for growing chains.

For nested volumes Lambda_1 < Lambda_2 < ... the local observable A is evolved
in each volume and consecutive results are compared in operator norm.  The
measured differences are set against the explicit tail estimate

    ||A|| ||Psi||_{t,mu} (int_0^t exp(mu v_r r) dr) |X| sup_x sum_{z new} F(d(x, z)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np
import scipy.integrate

from .lieb_robinson import DecayFunction, LatticeGeometry, decay_constants, interaction_norm
from .lindblad import GeneratorSpec, StepControl, evolve_operator
from .operators import embed, operator_norm


@dataclass(frozen=True)
class VolumeSequence:
    """Nested site-label tuples with a rule building the generator on each volume."""

    volumes: tuple[tuple[Hashable, ...], ...]
    template: Callable[[tuple[Hashable, ...]], GeneratorSpec]

    def __post_init__(self):
        vols = tuple(tuple(v) for v in self.volumes)
        for small, big in zip(vols, vols[1:]):
            if not set(small) <= set(big):
                raise ValueError("volumes must be nested")
        object.__setattr__(self, "volumes", vols)

    @classmethod
    def centered_chain(cls, sizes: Sequence[int], template) -> "VolumeSequence":
        from .models import centered_labels

        return cls(tuple(centered_labels(n) for n in sizes), template)

    def spec(self, i: int) -> GeneratorSpec:
        return self.template(self.volumes[i])


def _check_support(volseq, support):
    if not set(support) <= set(volseq.volumes[0]):
        raise ValueError("observable support must lie in the smallest volume")


def convergence_series(
    volseq: VolumeSequence,
    a: np.ndarray,
    support: Sequence[Hashable],
    t: float,
    control: StepControl = StepControl(),
) -> list[tuple[int, float]]:
    """[(n, ||gamma^(n+1)_{t,0}(A) - gamma^(n)_{t,0}(A)||)] over consecutive volumes."""
    _check_support(volseq, support)
    evolved = []
    for i in range(len(volseq.volumes)):
        spec = volseq.spec(i)
        a_glob = embed(a, support, spec.lattice)
        evolved.append((spec.lattice, evolve_operator(spec, 0.0, t, a_glob, control)))
    out = []
    for i in range(len(evolved) - 1):
        (lat_s, small), (lat_b, big) = evolved[i], evolved[i + 1]
        diff = big - embed(small, lat_s.labels, lat_b)
        out.append((i + 1, operator_norm(diff)))
    return out


def growth_integral(
    spec: GeneratorSpec,
    t: float,
    geom: LatticeGeometry,
    decay: DecayFunction,
    c_mu: float,
    n_grid: int = 64,
) -> float:
    """int_0^t exp(mu v_{r,mu} r) dr with mu v_{r,mu} = ||Psi||_{r,mu} C_mu."""
    if t == 0:
        return 0.0
    if spec.time_independent:
        rate = interaction_norm(spec, t, geom, decay, n_grid) * c_mu
        return t if rate == 0 else math.expm1(rate * t) / rate

    def integrand(r):
        return math.exp(interaction_norm(spec, r, geom, decay, n_grid) * c_mu * r)

    val, _ = scipy.integrate.quad(integrand, 0.0, t, points=[b for b in spec.breakpoints if 0 < b < t])
    return val


def tail_bound(
    volseq: VolumeSequence,
    a: np.ndarray,
    support: Sequence[Hashable],
    t: float,
    decay: DecayFunction,
    n_grid: int = 64,
) -> list[float]:
    """Explicit upper bound on each consecutive difference of ``convergence_series``.

    ||Psi||_{t,mu} and C_mu are taken on the largest volume, which dominates
    the smaller ones for translation-covariant templates.
    """
    _check_support(volseq, support)
    big_spec = volseq.spec(len(volseq.volumes) - 1)
    geom = LatticeGeometry(volseq.volumes[-1])
    _, c_mu = decay_constants(geom, decay)
    psi = interaction_norm(big_spec, t, geom, decay, n_grid)
    integral = growth_integral(big_spec, t, geom, decay, c_mu, n_grid)
    prefactor = operator_norm(a) * psi * integral * len(support)
    out = []
    for small, big in zip(volseq.volumes, volseq.volumes[1:]):
        new = [z for z in big if z not in set(small)]
        if not new:
            out.append(0.0)
            continue
        tail = max(sum(float(decay.F(geom.distance(x, z))) for z in new) for x in support)
        out.append(prefactor * tail)
    return out
