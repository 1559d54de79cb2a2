"""One-atom cavity channels and their iteration.

Perfect cavity (sigma = 0):

    rho -> p U_e rho U_e* + (1-p) U_g rho U_g*,
    U_g = exp(-i tau eps b*b),  U_e = D(-lam/eps) U_g D(lam/eps).

Leaky cavity (sigma > 0):

    rho -> p D(-r) exp(tau L_r)(D(r) rho D(-r)) D(r) + (1-p) exp(tau L_0)(rho),

with r = lam/eps and L_x(rho) = -i[eps b*b, rho] + sigma (b - x) rho (b* - x)
- sigma/2 {(b* - x)(b - x), rho}.
"""

from __future__ import annotations

import numpy as np

from ..lindblad import SCHRODINGER, Superoperator, unvec, vec
from ..operators import (
    DEFAULT_TAIL_TOL,
    annihilation_op,
    check_tail,
    dag,
    displacement,
    matrix_exp,
    number_op,
)
from .params import MicromaserParams


def _conjugation(u: np.ndarray) -> np.ndarray:
    """Matrix of rho -> u rho u* under column stacking."""
    return np.kron(u.conj(), u)


def _shifted_damping(params: MicromaserParams, x: float) -> np.ndarray:
    """Schroedinger matrix of L_x for real shift x."""
    space = params.space
    d = space.dim
    eye = np.eye(d)
    h = params.eps * number_op(space)
    c = annihilation_op(space) - x * eye
    cdc = dag(c) @ c
    s = params.sigma
    return (
        -1j * (np.kron(eye, h) - np.kron(h.T, eye))
        + s * np.kron(c.conj(), c)
        - 0.5 * s * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    )


def one_atom_channel(params: MicromaserParams, tol: float = DEFAULT_TAIL_TOL) -> Superoperator:
    """Perfect-cavity channel (requires sigma = 0)."""
    if params.sigma != 0:
        raise ValueError("one_atom_channel describes the perfect cavity; use one_atom_channel_leaky")
    space = params.space
    r = params.shift
    u_g = np.diag(np.exp(-1j * params.tau * params.eps * np.arange(space.dim)))
    u_e = displacement(space, -r, tol) @ u_g @ displacement(space, r, tol)
    m = params.p * _conjugation(u_e) + (1 - params.p) * _conjugation(u_g)
    return Superoperator(m, SCHRODINGER)


def one_atom_channel_leaky(params: MicromaserParams, tol: float = DEFAULT_TAIL_TOL) -> Superoperator:
    """Leaky-cavity channel (requires sigma > 0)."""
    if params.sigma <= 0:
        raise ValueError("one_atom_channel_leaky needs sigma > 0")
    space = params.space
    r = params.shift
    tau = params.tau
    m = (1 - params.p) * matrix_exp(tau * _shifted_damping(params, 0.0))
    if params.p > 0:
        d_plus, d_minus = displacement(space, r, tol), displacement(space, -r, tol)
        excited = matrix_exp(tau * _shifted_damping(params, r))
        # rho -> D(-r) [e^{tau L_r}(D(r) rho D(-r))] D(r)
        m = m + params.p * _conjugation(d_minus) @ excited @ _conjugation(d_plus)
    return Superoperator(m, SCHRODINGER)


def cavity_channel(params: MicromaserParams, tol: float = DEFAULT_TAIL_TOL) -> Superoperator:
    """The perfect or the leaky channel, depending on sigma."""
    if params.sigma == 0:
        return one_atom_channel(params, tol)
    return one_atom_channel_leaky(params, tol)


def iterate(
    channel: Superoperator, rho0: np.ndarray, n: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> np.ndarray:
    """n-fold application of the channel, checking the top Fock level after each step."""
    return iterate_states(channel, rho0, n, tail_tol)[-1]


def iterate_states(
    channel: Superoperator, rho0: np.ndarray, n: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> list[np.ndarray]:
    """[rho0, L(rho0), ..., L^n(rho0)]."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if channel.picture != SCHRODINGER:
        channel = channel.adjoint()
    d = channel.dim
    v = vec(np.asarray(rho0, dtype=complex))
    out = [unvec(v, d)]
    for k in range(n):
        v = channel.matrix @ v
        rho = unvec(v, d)
        check_tail(rho, tail_tol, f"cavity state after {k + 1} atoms")
        out.append(rho)
    return out


def photon_numbers(channel: Superoperator, rho0: np.ndarray, n: int, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Tr(b*b rho^(k)) for k = 0..n."""
    states = iterate_states(channel, rho0, n, tail_tol)
    levels = np.arange(channel.dim)
    return np.array([float(np.real(np.diag(r)) @ levels) for r in states])


def check_state(rho: np.ndarray, tol: float = 1e-10, tail_tol: float = DEFAULT_TAIL_TOL) -> None:
    """Raise unless ``rho`` is a normalized, positive, well-truncated density matrix."""
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"state trace is {np.trace(rho):.12g}, expected 1")
    herm = 0.5 * (rho + dag(rho))
    if np.linalg.eigvalsh(herm)[0] < -tol:
        raise ValueError("state has a negative eigenvalue")
    check_tail(rho, tail_tol)
