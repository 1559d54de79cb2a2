"""Brute-force cavity-plus-atoms simulation used to check the closed forms.

The state lives on cavity (x) atom_1 (x) ... (x) atom_k, k <= 4.  During
slot j the lab-frame Hamiltonian is

    H_j = eps b*b + E sum_i eta_i + lam (b + b*) eta_j,

and with sigma > 0 the cavity also leaks through the jump sqrt(sigma) b.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..lindblad import unvec, vec
from ..operators import (
    ATOM_EXCITED,
    SiteLattice,
    annihilation_op,
    atom_state,
    dag,
    embed,
    matrix_exp,
    partial_trace,
)
from .params import MicromaserParams

MAX_ATOMS = 4


class FullSystemOracle:
    def __init__(self, params: MicromaserParams, n_atoms: int):
        if not 1 <= n_atoms <= MAX_ATOMS:
            raise ValueError(f"the full-system oracle handles 1..{MAX_ATOMS} atoms")
        self.params = params
        self.n_atoms = n_atoms
        self.lattice = SiteLattice((params.space.dim,) + (2,) * n_atoms, ("C",) + tuple(range(1, n_atoms + 1)))
        b = annihilation_op(params.space)
        self.b = embed(b, ("C",), self.lattice)
        self.number = dag(self.b) @ self.b
        self.field = self.b + dag(self.b)
        self.etas = [embed(ATOM_EXCITED, (j,), self.lattice) for j in range(1, n_atoms + 1)]
        self._props = {}

    def eta(self, j: int) -> np.ndarray:
        return self.etas[j - 1]

    def hamiltonian(self, j: int) -> np.ndarray:
        """H_j; j = 0 is the uncoupled Hamiltonian before the first atom enters."""
        p = self.params
        h = p.eps * self.number + p.atom_energy * sum(self.etas)
        return h if j == 0 else h + self.coupling(j)

    def coupling(self, j: int) -> np.ndarray:
        return self.params.lam * self.field @ self.eta(j)

    def energy_before_exit(self, states: list[np.ndarray], n: int) -> float:
        """Tr(rho(n tau - 0) H_n); n = 0 gives the initial uncoupled energy."""
        return self.expect(states[n], self.hamiltonian(n))

    def energy_after_entry(self, states: list[np.ndarray], n: int) -> float:
        """Tr(rho((n-1) tau) H_n) for 1 <= n <= n_atoms + 1.

        For n = n_atoms + 1 the entering atom is not simulated; it is still in
        its product state, so its coupling contributes lam p <b + b*>.
        """
        if n <= self.n_atoms:
            return self.expect(states[n - 1], self.hamiltonian(n))
        if n != self.n_atoms + 1:
            raise ValueError("atom n is beyond the simulated beam")
        p = self.params
        h = self.hamiltonian(0) + p.lam * p.p * self.field
        return self.expect(states[n - 1], h)

    def initial_state(self, rho_cavity: np.ndarray) -> np.ndarray:
        out = np.asarray(rho_cavity, dtype=complex)
        for _ in range(self.n_atoms):
            out = np.kron(out, atom_state(self.params.p))
        return out

    def _propagate(self, j: int, rho: np.ndarray) -> np.ndarray:
        p = self.params
        if p.sigma == 0:
            if j not in self._props:
                self._props[j] = matrix_exp(-1j * p.tau * self.hamiltonian(j))
            u = self._props[j]
            return u @ rho @ dag(u)
        if j not in self._props:
            self._props[j] = self._liouvillian(j)
        d = rho.shape[0]
        v = scipy.sparse.linalg.expm_multiply(p.tau * self._props[j], vec(rho))
        return unvec(v, d)

    def _liouvillian(self, j: int):
        s = self.params.sigma
        h = scipy.sparse.csr_matrix(self.hamiltonian(j))
        c = scipy.sparse.csr_matrix(self.b)
        cdc = c.conj().T @ c
        eye = scipy.sparse.identity(h.shape[0], dtype=complex, format="csr")
        kr = scipy.sparse.kron
        return (
            -1j * (kr(eye, h) - kr(h.T, eye))
            + s * kr(c.conj(), c)
            - 0.5 * s * (kr(eye, cdc) + kr(cdc.T, eye))
        ).tocsc()

    def run(self, rho_cavity: np.ndarray, order: str = "forward") -> list[np.ndarray]:
        """Full states after 0, 1, ..., n_atoms slots.

        ``order="reversed"`` applies slot propagators last-first, i.e. the
        k-th state is U_1 ... U_k rho U_k* ... U_1*.
        """
        if order not in ("forward", "reversed"):
            raise ValueError("order must be 'forward' or 'reversed'")
        rho0 = self.initial_state(rho_cavity)
        states = [rho0]
        if order == "forward":
            rho = rho0
            for j in range(1, self.n_atoms + 1):
                rho = self._propagate(j, rho)
                states.append(rho)
        else:
            for k in range(1, self.n_atoms + 1):
                rho = rho0
                for j in range(k, 0, -1):
                    rho = self._propagate(j, rho)
                states.append(rho)
        return states

    def expect(self, rho: np.ndarray, op: np.ndarray) -> float:
        return float(np.real(np.trace(rho @ op)))

    def cavity_state(self, rho: np.ndarray) -> np.ndarray:
        return partial_trace(rho, self.lattice, ("C",))
