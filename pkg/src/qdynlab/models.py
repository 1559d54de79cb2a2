"""Ready-made lattice generators used by the experiments and tests."""

from __future__ import annotations

import math
from typing import Hashable, Sequence

import numpy as np

from .lindblad import GeneratorSpec, InteractionTerm, Sampled
from .operators import SiteLattice

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SMINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|: lowers |1> to |0>
SPLUS = SMINUS.conj().T


def dissipative_xx_chain(
    labels: Sequence[Hashable],
    coupling: float = 1.0,
    dephasing: float = 0.1,
    damping: float = 0.0,
    modulation: float = 0.0,
    horizon: float = math.inf,
) -> GeneratorSpec:
    """Open XX chain: J (XX + YY) on bonds, sqrt(g) Z and sqrt(k) sigma^- jumps on sites.

    ``modulation`` makes the bond coupling J (1 + m sin t), giving a smooth
    time-dependent spec with the same support structure.
    """
    labels = tuple(labels)
    lattice = SiteLattice.qubits(len(labels), labels)
    bond = coupling * (np.kron(SX, SX) + np.kron(SY, SY))
    terms = []
    for x, y in zip(labels, labels[1:]):
        h = bond if modulation == 0 else Sampled(lambda t, m=modulation: (1 + m * math.sin(t)) * bond)
        terms.append(InteractionTerm((x, y), h))
    for x in labels:
        jumps = []
        if dephasing:
            jumps.append(math.sqrt(dephasing) * SZ)
        if damping:
            jumps.append(math.sqrt(damping) * SMINUS)
        if jumps:
            terms.append(InteractionTerm((x,), None, tuple(jumps)))
    return GeneratorSpec(lattice, tuple(terms), horizon)


def centered_labels(n_sites: int) -> tuple[int, ...]:
    """Integer labels -k..k (odd n) so nested chains share the central site 0."""
    if n_sites % 2 != 1:
        raise ValueError("centred chains need an odd number of sites")
    k = n_sites // 2
    return tuple(range(-k, k + 1))
