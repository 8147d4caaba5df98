"""Model parameters and Fock-space truncation for the two-photon Jaynes-Cummings model.

The system is an effective two-level atom (levels g, e with energies E1, E2)
coupled to two boson modes (frequencies w1, w2) through a nondegenerate
two-photon interaction of strength gamma, inside a Kerr medium with
susceptibilities chi1, chi2 and the cross term 2*sqrt(chi1*chi2) a2+ a1+ a1 a2.
Units are angular frequencies with hbar = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """Hamiltonian constants.

    Attributes:
        E1: energy of the lower atomic level.
        E2: energy of the upper atomic level.
        w1: frequency of mode 1.
        w2: frequency of mode 2.
        gamma_mod: coupling magnitude |gamma| >= 0.
        gamma_phase: phase of gamma in radians.
        chi1: Kerr susceptibility of mode 1, >= 0.
        chi2: Kerr susceptibility of mode 2, >= 0.

    The two-photon detuning alpha = E2 - E1 - w1 - w2 is always recomputed
    from these fields, never stored.
    """

    E1: float
    E2: float
    w1: float
    w2: float
    gamma_mod: float
    gamma_phase: float = 0.0
    chi1: float = 0.0
    chi2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("E1", "E2", "w1", "w2", "gamma_mod", "gamma_phase", "chi1", "chi2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.gamma_mod < 0:
            raise ValueError(f"gamma_mod must be >= 0, got {self.gamma_mod}")
        if self.chi1 < 0 or self.chi2 < 0:
            raise ValueError(f"Kerr susceptibilities must be >= 0, got chi1={self.chi1}, chi2={self.chi2}")

    @classmethod
    def resonant(cls, gamma_mod: float = 1.0, chi1: float = 0.0, chi2: float = 0.0,
                 detuning: float = 0.0, w1: float = 1.0, w2: float = 1.0,
                 gamma_phase: float = 0.0) -> "ModelParams":
        """Convenience constructor pinning E1 = 0 and E2 = w1 + w2 + detuning."""
        return cls(E1=0.0, E2=w1 + w2 + detuning, w1=w1, w2=w2,
                   gamma_mod=gamma_mod, gamma_phase=gamma_phase, chi1=chi1, chi2=chi2)

    @property
    def alpha(self) -> float:
        """Two-photon detuning E2 - E1 - w1 - w2."""
        return self.E2 - self.E1 - self.w1 - self.w2

    @property
    def chi_cross(self) -> float:
        """Intermode Kerr coefficient sqrt(chi1*chi2)."""
        return math.sqrt(self.chi1 * self.chi2)

    @property
    def epsilon1(self) -> float:
        """chi1 + sqrt(chi1*chi2); the mode-1 Kerr ladder coefficient."""
        return self.chi1 + self.chi_cross

    @property
    def epsilon2(self) -> float:
        """chi2 + sqrt(chi1*chi2); the mode-2 Kerr ladder coefficient."""
        return self.chi2 + self.chi_cross

    @property
    def gamma(self) -> complex:
        """Complex coupling gamma_mod * exp(i * gamma_phase)."""
        return self.gamma_mod * cmath.exp(1j * self.gamma_phase)

    def kerr_diagonal(self, n1: int, n2: int) -> float:
        """Kerr energy of the Fock state |n1, n2>.

        chi1*n1*(n1-1) + chi2*n2*(n2-1) + 2*sqrt(chi1*chi2)*n1*n2.
        """
        return (self.chi1 * n1 * (n1 - 1) + self.chi2 * n2 * (n2 - 1)
                + 2.0 * self.chi_cross * n1 * n2)


@dataclass(frozen=True)
class Truncation:
    """Inclusive per-mode photon-number cutoffs for the finite basis.

    The basis is |n1, n2, level> with 0 <= n_i <= nmax_i and level in {g, e},
    so the dimension is 2*(nmax1+1)*(nmax2+1).
    """

    nmax1: int
    nmax2: int

    def __post_init__(self) -> None:
        if self.nmax1 < 1 or self.nmax2 < 1:
            raise ValueError(f"truncation must keep at least two Fock states per mode, "
                             f"got ({self.nmax1}, {self.nmax2})")

    @property
    def dim(self) -> int:
        return 2 * (self.nmax1 + 1) * (self.nmax2 + 1)
