"""Gibbs states, relative entropy and entropy production of the perfect cavity."""

from __future__ import annotations

import math

import numpy as np

from ..operators import FockSpace, dag
from .params import MicromaserParams
from .photons import photon_number_closed


def gibbs_state(beta: float, eps: float, cutoff: int) -> np.ndarray:
    """exp(-beta eps b*b) / Z, normalized on the truncated space."""
    if beta <= 0 or eps <= 0:
        raise ValueError("beta and eps must be positive")
    levels = np.arange(FockSpace(cutoff).dim)
    w = np.exp(-beta * eps * levels)
    return np.diag(w / w.sum()).astype(complex)


def gibbs_photon_number(beta: float, eps: float) -> float:
    """1 / (exp(beta eps) - 1), the untruncated thermal occupation."""
    if beta <= 0 or eps <= 0:
        raise ValueError("beta and eps must be positive")
    return 1.0 / math.expm1(beta * eps)


def entropy_production(params: MicromaserParams, beta: float, n: int, n0: float | None = None) -> float:
    """beta eps (N(n tau) - N(0)) for a cavity that starts in the Gibbs state at beta.

    ``n0`` overrides the initial photon number, e.g. with the value of the
    truncated Gibbs state.
    """
    if params.sigma != 0:
        raise ValueError("entropy_production is derived for the perfect cavity (sigma = 0)")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if n0 is None:
        n0 = gibbs_photon_number(beta, params.eps)
    return beta * params.eps * (photon_number_closed(params, n, n0) - n0)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray, cutoff: float = 1e-300) -> float:
    """Tr(rho ln rho - rho ln sigma) via eigendecompositions."""
    w, v = np.linalg.eigh(0.5 * (rho + dag(rho)))
    ws, vs = np.linalg.eigh(0.5 * (sigma + dag(sigma)))
    w = np.clip(w, 0.0, None)
    if np.any(ws <= 0) and np.any((np.abs(dag(vs) @ v) ** 2)[ws <= 0] @ w > 1e-14):
        return np.inf
    ent = float(np.sum(w[w > cutoff] * np.log(w[w > cutoff])))
    log_s = vs @ np.diag(np.log(np.clip(ws, cutoff, None))) @ dag(vs)
    return ent - float(np.real(np.trace(rho @ log_s)))
