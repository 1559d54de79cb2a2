"""Weyl characteristic function of the cavity state after n atoms.

    Tr(W(alpha) rho_n) = exp(-(1 - E^n)|alpha|^2 / 2)
                         * prod_{k<n} (p exp(-2i Im z_k) + 1 - p)
                         * Tr(W(q^n alpha) rho_0),
    z_k = (i lam / mu)(1 - q) q^k alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..operators import DEFAULT_TAIL_TOL, weyl_op
from .params import MicromaserParams


def _phases(params: MicromaserParams, alpha: complex, ks: np.ndarray) -> np.ndarray:
    z = (1j * params.lam / params.mu) * (1 - params.q) * params.q ** ks * alpha
    return -2.0 * np.imag(z)


@dataclass(frozen=True)
class CharFactors:
    """Pieces of the characteristic function at one alpha."""

    factors: np.ndarray  # one per atom
    gaussian: float
    residual_alpha: complex  # argument left for the initial state

    @property
    def product(self) -> complex:
        return complex(np.prod(self.factors)) * self.gaussian

    def log_product(self) -> complex:
        """Sum of principal logs; continuous in alpha as long as no factor crosses the branch cut."""
        return complex(np.sum(np.log(self.factors.astype(complex)))) + math.log(self.gaussian)


def characteristic_factors(params: MicromaserParams, n: int, alpha: complex) -> CharFactors:
    if int(n) != n or n < 0:
        raise ValueError("n must be a non-negative integer")
    ks = np.arange(n)
    phase = _phases(params, alpha, ks)
    factors = params.p * np.exp(1j * phase) + (1 - params.p)
    gaussian = math.exp(-(1 - params.decay**n) * abs(alpha) ** 2 / 2)
    return CharFactors(factors, gaussian, complex(params.q**n * alpha))


def characteristic_function(
    params: MicromaserParams, n: int, alpha: complex, rho0: np.ndarray, tol: float = DEFAULT_TAIL_TOL
) -> complex:
    """Tr(W(alpha) rho_n) from the closed form."""
    cf = characteristic_factors(params, n, alpha)
    w = weyl_op(params.space, cf.residual_alpha, tol)
    return cf.product * complex(np.trace(w @ rho0))


def _atoms_needed(params: MicromaserParams, alpha: complex, tol: float) -> int:
    """Smallest K with the tail bound sum_{k>=K} |factor_k - 1| below tol."""
    # |factor_k - 1| <= p |2 Im z_k| <= 2 p (lam/|mu|) |1-q| |alpha| sqrt(E)^k
    amp = 2 * params.p * params.lam / abs(params.mu) * abs(1 - params.q) * abs(alpha)
    r = math.sqrt(params.decay)
    if amp == 0:
        return 0
    k = math.log(tol * (1 - r) / amp) / math.log(r)
    return max(0, math.ceil(k))


def limiting_characteristic(
    params: MicromaserParams,
    alpha: complex,
    tol: float = 1e-10,
    rho0: np.ndarray | None = None,
    weyl_tol: float = DEFAULT_TAIL_TOL,
) -> complex:
    """lim_n Tr(W(alpha) rho_n) for sigma > 0.

    Without ``rho0`` the infinite product is truncated by its geometric tail.
    With ``rho0`` enough atoms are applied that the initial state no longer
    matters at the requested tolerance, which gives an independent check.
    """
    if params.sigma <= 0:
        raise ValueError("the cavity state only converges for sigma > 0")
    k = _atoms_needed(params, alpha, tol)
    if rho0 is None:
        cf = characteristic_factors(params, k, alpha)
        return complex(np.prod(cf.factors)) * math.exp(-abs(alpha) ** 2 / 2)
    # |Tr(W(beta) rho0) - 1| <= |beta| * 2 sqrt(N_max + 1) on the truncated space
    scale = abs(alpha) * (2 * math.sqrt(params.cutoff + 1) + 1) + abs(alpha) ** 2
    r = math.sqrt(params.decay)
    extra = 0 if scale == 0 else max(0, math.ceil(math.log(tol / scale) / math.log(r)))
    return characteristic_function(params, max(k, extra), alpha, rho0, weyl_tol)


def quasifree_defect(params: MicromaserParams, radius: float = 2.0, points: int = 9, tol: float = 1e-12) -> float:
    """Residual of the best quadratic fit to log of the limiting characteristic function.

    A quasi-free (Gaussian) state has log phi(alpha) exactly quadratic in
    (alpha, conj alpha); the returned number is the max absolute deviation
    on a square grid of half-width ``radius``.
    """
    if params.sigma <= 0:
        raise ValueError("needs sigma > 0")
    xs = np.linspace(-radius, radius, points)
    alphas = (xs[:, None] + 1j * xs[None, :]).ravel()
    logs = []
    for a in alphas:
        k = _atoms_needed(params, a, tol)
        cf = characteristic_factors(params, k, a)
        logs.append(cf.log_product() - params.decay**k * abs(a) ** 2 / 2)
    logs = np.array(logs)
    ac = alphas.conj()
    basis = np.stack([np.ones_like(alphas), alphas, ac, alphas**2, ac**2, alphas * ac], axis=1)
    coef, *_ = np.linalg.lstsq(basis, logs, rcond=None)
    return float(np.max(np.abs(basis @ coef - logs)))
