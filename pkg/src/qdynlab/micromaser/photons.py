"""Closed forms for the mean photon number and for the evolved number operator.

Dually, after n atoms the number operator becomes

    c_num b*b + c_cre b* + c_ann b + c_id 1,

and the coefficients obey a one-step linear recursion that the closed forms
below solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..operators import annihilation_op, dag, number_op
from .params import MicromaserParams


def _check_n(n):
    if int(n) != n or n < 0:
        raise ValueError("n must be a non-negative integer")


def photon_number_closed(params: MicromaserParams, n: int, n0: float = 0.0) -> float:
    """Tr(b*b rho_n) for a gauge-invariant initial state with photon number n0."""
    _check_n(n)
    p, lam = params.p, params.lam
    if params.sigma == 0:
        a = 2 * lam**2 / params.eps**2
        return n0 + n * p * (1 - p) * a * (1 - params.cos_n(1)) + p * p * a * (1 - params.cos_n(n))
    e, k = params.decay, params.strength
    en = e**n
    return (
        en * n0
        + 2 * p * (1 - p) * k * (1 - math.sqrt(e) * params.cos_n(1)) * (1 - en) / (1 - e)
        - p * k * (1 - en)
        + 2 * p * p * k * (1 - e ** (n / 2) * params.cos_n(n))
    )


def photon_number_limit(params: MicromaserParams) -> float:
    """lim_n Tr(b*b rho_n) for sigma > 0; independent of the initial state."""
    if params.sigma <= 0:
        raise ValueError("the photon number only converges for sigma > 0")
    p, e, k = params.p, params.decay, params.strength
    return 2 * p * (1 - p) * k * (1 - math.sqrt(e) * params.cos_n(1)) / (1 - e) - p * k + 2 * p * p * k


def pumping_rate(params: MicromaserParams) -> float:
    """Average photon gain per atom at resonance-free large n in a perfect cavity."""
    if params.sigma != 0:
        raise ValueError("pumping_rate is defined for the perfect cavity")
    return 2 * params.p * (1 - params.p) * params.shift**2 * (1 - params.cos_n(1))


@dataclass(frozen=True)
class NumberOpCoefficients:
    """c_num b*b + c_cre b* + c_ann b + c_id, with c_ann = conj(c_cre)."""

    c_num: float
    c_cre: complex
    c_ann: complex
    c_id: float

    def operator(self, params: MicromaserParams) -> np.ndarray:
        b = annihilation_op(params.space)
        d = params.space.dim
        return (
            self.c_num * number_op(params.space)
            + self.c_cre * dag(b)
            + self.c_ann * b
            + self.c_id * np.eye(d)
        )

    def expectation(self, rho: np.ndarray, params: MicromaserParams) -> complex:
        return complex(np.trace(self.operator(params) @ rho))


def _one_step(params: MicromaserParams):
    """Images of b*b and b under one atom: (E, c1, d1) and (q, a)."""
    p, mu, lam = params.p, params.mu, params.lam
    e, q = params.decay, params.q
    g = 1j * lam / mu
    c1 = p * g * (e - np.conj(q))
    d1 = p * params.strength * (1 + e - 2 * math.sqrt(e) * params.cos_n(1))
    a = -p * g * (1 - q)
    return e, c1, d1, q, a


def dual_number_step(params: MicromaserParams, c: NumberOpCoefficients) -> NumberOpCoefficients:
    """Apply one more atom in the Heisenberg picture."""
    e, c1, d1, q, a = _one_step(params)
    return NumberOpCoefficients(
        c_num=c.c_num * e,
        c_cre=c.c_num * c1 + c.c_cre * np.conj(q),
        c_ann=c.c_num * np.conj(c1) + c.c_ann * q,
        c_id=float(np.real(c.c_num * d1 + c.c_cre * np.conj(a) + c.c_ann * a + c.c_id)),
    )


def dual_number_recursive(params: MicromaserParams, n: int) -> NumberOpCoefficients:
    _check_n(n)
    c = NumberOpCoefficients(1.0, 0j, 0j, 0.0)
    for _ in range(n):
        c = dual_number_step(params, c)
    return c


def dual_number_coefficients(params: MicromaserParams, n: int) -> NumberOpCoefficients:
    """Closed-form coefficients of the number operator after n atoms."""
    _check_n(n)
    e, q = params.decay, params.q
    c_cre = params.p * (1j * params.lam / params.mu) * (e**n - np.conj(q) ** n)
    return NumberOpCoefficients(
        c_num=e**n,
        c_cre=complex(c_cre),
        c_ann=complex(np.conj(c_cre)),
        c_id=photon_number_closed(params, n, 0.0),
    )
