"""Energy balance of cavity plus atom beam.

Atom n is coupled on [(n-1)tau, n tau) through lam (b + b*) eta_n.  The
interaction energies just after atom n enters and just before it leaves are

    I_n^+ = lam <(b + b*) eta_n> at (n-1)tau,   I_n^- = lam <(b + b*) eta_n> at n tau - 0,

and every energy difference below is assembled from them and the photon
number.  A gauge-invariant initial cavity state is assumed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import MicromaserParams
from .photons import photon_number_closed


def _check_step(n):
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")


def _pp(params):
    return params.p * (1 - params.p)


# ---------------------------------------------------------------- perfect cavity


def energy_variation_perfect(params: MicromaserParams, n: int) -> float:
    """Total-energy jump at (n-1)tau when atom n replaces atom n-1 (n >= 2).

    Inside each interval the Hamiltonian is conserved, so this is the whole
    change between (n-2)tau and (n-1)tau.  It does not depend on n.
    """
    if int(n) != n or n < 2:
        raise ValueError("the stepwise variation needs n >= 2")
    return 2 * params.lam**2 / params.eps * _pp(params) * (1 - params.cos_n(1))


def energy_variation_perfect_cumulative(params: MicromaserParams, n: int) -> float:
    """Sum of the steps 2..n, i.e. the change between the first and the last coupling."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return (n - 1) * energy_variation_perfect(params, 2) if n >= 2 else 0.0


def energy_step_perfect_reversed_order(params: MicromaserParams, n: int) -> float:
    """Step obtained when the one-atom propagators are composed in reverse order.

    This is 2(lam^2/eps) p(1-p)[cos((n-2)theta) - cos((n-1)theta)], which is
    what one gets by letting the most recent atom act first.  Kept for
    comparison; the physical step is :func:`energy_variation_perfect`.
    """
    if int(n) != n or n < 2:
        raise ValueError("the stepwise variation needs n >= 2")
    return 2 * params.lam**2 / params.eps * _pp(params) * (params.cos_n(n - 2) - params.cos_n(n - 1))


def energy_cumulative_perfect_reversed_order(params: MicromaserParams, n: int) -> float:
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return 2 * params.lam**2 / params.eps * _pp(params) * (1 - params.cos_n(n - 1))


# ---------------------------------------------------------------- leaky cavity


def interaction_energy_leaving(params: MicromaserParams, n: int) -> float:
    """I_n^-: interaction energy just before atom n leaves (n >= 1)."""
    _check_step(n)
    p, e, k = params.p, params.decay, params.strength
    eps, sig = params.eps, params.sigma
    se = math.sqrt(e)
    en2 = e ** (n / 2)
    return (
        -2 * eps * k * (_pp(params) * (1 - se * params.cos_n(1)) + p * p * (1 - en2 * params.cos_n(n)))
        + sig * k * (_pp(params) * se * params.sin_n(1) + p * p * en2 * params.sin_n(n))
    )


def interaction_energy_entering(params: MicromaserParams, n: int) -> float:
    """I_n^+: interaction energy right after atom n enters (n >= 1); zero for n = 1."""
    _check_step(n)
    p, k = params.p, params.strength
    en2 = params.decay ** ((n - 1) / 2)
    return (
        -2 * params.eps * k * p * p * (1 - en2 * params.cos_n(n - 1))
        + params.sigma * k * p * p * en2 * params.sin_n(n - 1)
    )


@dataclass(frozen=True)
class LeakyEnergyVariation:
    in_cavity_step: float  # from (n-1)tau to n tau - 0, atom n inside
    jump: float  # at (n-1)tau, atom n-1 out and atom n in
    extended_step: float  # from (n-1)tau - 0 to n tau - 0
    cumulative: float  # from before the first atom to n tau - 0
    limit: float  # cumulative as n -> infinity


def leaky_energy_jump(params: MicromaserParams) -> float:
    """Energy jump when a new atom replaces the previous one (n >= 2); independent of n."""
    k, e = params.strength, params.decay
    se = math.sqrt(e)
    return _pp(params) * k * (
        2 * params.eps * (1 - se * params.cos_n(1)) - params.sigma * se * params.sin_n(1)
    )


def leaky_energy_limit(params: MicromaserParams, n0: float = 0.0) -> float:
    if params.sigma <= 0:
        raise ValueError("needs sigma > 0")
    p, e, k, eps = params.p, params.decay, params.strength, params.eps
    se = math.sqrt(e)
    return (
        -eps * n0
        + 2 * eps * _pp(params) * k * (1 - se * params.cos_n(1)) * e / (1 - e)
        - eps * p * k
        + params.sigma * k * _pp(params) * se * params.sin_n(1)
    )


def energy_variation_leaky(params: MicromaserParams, n: int, n0: float = 0.0) -> LeakyEnergyVariation:
    if params.sigma <= 0:
        raise ValueError("energy_variation_leaky needs sigma > 0")
    _check_step(n)
    eps = params.eps
    n_now = photon_number_closed(params, n, n0)
    n_prev = photon_number_closed(params, n - 1, n0)
    i_minus = interaction_energy_leaving(params, n)
    in_cavity = eps * (n_now - n_prev) + i_minus - interaction_energy_entering(params, n)
    # the first atom enters an empty interaction slot
    jump = leaky_energy_jump(params) if n >= 2 else interaction_energy_entering(params, 1)
    return LeakyEnergyVariation(
        in_cavity_step=in_cavity,
        jump=jump,
        extended_step=in_cavity + jump,
        cumulative=eps * (n_now - n0) + i_minus,
        limit=leaky_energy_limit(params, n0),
    )


def leaky_limit_bounds(params: MicromaserParams, n0: float = 0.0) -> tuple[float, float]:
    """Two-sided estimate (lower, upper) on the asymptotic energy variation.

    These hold for the pumping part 2 eps K p(1-p)(1 - sqrt(E) cos theta)/(1 - E)
    alone; the full limit also carries -eps p K and a sine term and can fall
    below the lower value (e.g. at p = 1).
    """
    k, se = params.strength, math.sqrt(params.decay)
    a = 2 * params.eps * k * _pp(params)
    return -params.eps * n0 + a / (1 + se), -params.eps * n0 + a / (1 - se)


def leaky_pumping_part(params: MicromaserParams, n0: float = 0.0) -> float:
    """-eps n0 + 2 eps K p(1-p)(1 - sqrt(E) cos theta)/(1 - E), the quantity the bounds control."""
    k, e = params.strength, params.decay
    return -params.eps * n0 + 2 * params.eps * k * _pp(params) * (1 - math.sqrt(e) * params.cos_n(1)) / (1 - e)
