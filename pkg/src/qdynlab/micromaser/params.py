"""Parameters of the repeated-interaction cavity model."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..operators import FockSpace

#: |eps tau - 2 pi s| below this counts as exact resonance
RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class MicromaserParams:
    """Cavity frequency ``eps``, coupling ``lam``, passage time ``tau``,
    excitation probability ``p``, leak rate ``sigma`` and Fock ``cutoff``.

    ``atom_energy`` is the atomic level spacing; it never enters a cavity
    observable and is kept only so reports can echo it.
    """

    eps: float
    lam: float
    tau: float
    p: float
    sigma: float = 0.0
    cutoff: int = 30
    atom_energy: float = 1.0

    def __post_init__(self):
        for name in ("eps", "lam", "tau", "p", "sigma", "atom_energy"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.atom_energy <= 0:
            raise ValueError("atom_energy must be positive")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError("cutoff must be a positive integer")

    @property
    def space(self) -> FockSpace:
        return FockSpace(int(self.cutoff))

    @property
    def mu(self) -> complex:
        return complex(self.sigma / 2, self.eps)

    @property
    def q(self) -> complex:
        """exp(-mu tau), the one-step decay-and-rotation factor of b."""
        return complex(math.exp(-self.sigma * self.tau / 2) * complex(math.cos(self.theta), -math.sin(self.theta)))

    @property
    def decay(self) -> float:
        """exp(-sigma tau), the one-step contraction of the photon number."""
        return math.exp(-self.sigma * self.tau)

    @property
    def theta(self) -> float:
        return self.eps * self.tau

    @property
    def shift(self) -> float:
        """lam / eps, the displacement of the excited-atom equilibrium."""
        return self.lam / self.eps

    @property
    def strength(self) -> float:
        """lam^2 / |mu|^2."""
        return self.lam**2 / abs(self.mu) ** 2

    @property
    def resonant(self) -> bool:
        s = round(self.theta / (2 * math.pi))
        return s >= 1 and abs(self.theta - 2 * math.pi * s) < RESONANCE_TOL

    def cos_n(self, n: float) -> float:
        """cos(n eps tau), exactly 1 at resonance for integer n."""
        if self.resonant and float(n).is_integer():
            return 1.0
        return math.cos(n * self.theta)

    def sin_n(self, n: float) -> float:
        if self.resonant and float(n).is_integer():
            return 0.0
        return math.sin(n * self.theta)

    def replace(self, **kw) -> "MicromaserParams":
        from dataclasses import replace

        return replace(self, **kw)
