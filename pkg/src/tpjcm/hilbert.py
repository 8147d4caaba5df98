"""Exact reference engine on the truncated two-mode Fock space.

The interaction destroys one photon in each mode while exciting the atom, so
the two charges M1 = n1 + e and M2 = n2 + e are conserved and the Hamiltonian
splits into 2x2 blocks spanned by |n, m, e> and |n+1, m+1, g>, plus
1-dimensional remainders. Propagation uses the closed-form exponential of each
block, so there is no time-step error; this engine is the ground truth the
series and the operator hierarchy are checked against.

Level axis convention: index 0 is g, index 1 is e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .model import ModelParams, Truncation
from .states import JointPhotonDistribution, falling_factorial

G, E = 0, 1

RO_TAGS = ("N1", "N2", "D1", "D2", "I", "F", "N21")


class TruncationLeakageError(ValueError):
    """Initial state carries too much weight near the truncation edge."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over |n1, n2, level>, shape (nmax1+1, nmax2+1, 2)."""

    amps: np.ndarray
    truncation: Truncation

    def __post_init__(self) -> None:
        expected = (self.truncation.nmax1 + 1, self.truncation.nmax2 + 1, 2)
        if self.amps.shape != expected:
            raise ValueError(f"amplitude shape {self.amps.shape} does not match truncation {expected}")
        if abs(self.norm() - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: |psi|^2 = {self.norm() ** 2}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def populations(self) -> tuple[float, float]:
        """(ground, excited) level populations."""
        p = np.abs(self.amps) ** 2
        return float(p[:, :, G].sum()), float(p[:, :, E].sum())


def basis_state(trunc: Truncation, n1: int, n2: int, level) -> StateVector:
    """Fock basis state |n1, n2, level>; level is 0/1 or "g"/"e"."""
    if isinstance(level, str):
        level = {"g": G, "e": E}[level]
    amps = np.zeros((trunc.nmax1 + 1, trunc.nmax2 + 1, 2), dtype=complex)
    amps[n1, n2, level] = 1.0
    return StateVector(amps=amps, truncation=trunc)


def assemble_state(dist: JointPhotonDistribution, atom_level: str) -> StateVector:
    """Put a joint field distribution under one atomic level."""
    trunc = dist.truncation
    amps = np.zeros((trunc.nmax1 + 1, trunc.nmax2 + 1, 2), dtype=complex)
    amps[:, :, E if atom_level == "e" else G] = dist.amps
    return StateVector(amps=amps, truncation=trunc)


def diagonal_energies(params: ModelParams, trunc: Truncation) -> np.ndarray:
    """Table D[n1, n2, level] of diagonal matrix elements (free + Kerr)."""
    n1 = np.arange(trunc.nmax1 + 1)[:, None]
    n2 = np.arange(trunc.nmax2 + 1)[None, :]
    kerr = (params.chi1 * n1 * (n1 - 1) + params.chi2 * n2 * (n2 - 1)
            + 2.0 * params.chi_cross * n1 * n2)
    base = params.w1 * n1 + params.w2 * n2 + kerr
    out = np.empty((trunc.nmax1 + 1, trunc.nmax2 + 1, 2))
    out[:, :, G] = base + params.E1
    out[:, :, E] = base + params.E2
    return out


def _flat_index(trunc: Truncation, n1: int, n2: int, level: int) -> int:
    return (n1 * (trunc.nmax2 + 1) + n2) * 2 + level


def build_hamiltonian(params: ModelParams, trunc: Truncation,
                      envelope_value: float = 1.0) -> np.ndarray:
    """Dense Hamiltonian over the truncated basis (test-time cross-check path).

    Basis order: (n1, n2, level) flattened row-major with the level index
    fastest. The evolution code never touches this matrix; it exists so the
    block decomposition can be audited against a full assembly.
    """
    if not math.isfinite(envelope_value):
        raise ValueError(f"envelope value must be finite, got {envelope_value}")
    dim = trunc.dim
    H = np.zeros((dim, dim), dtype=complex)
    diag = diagonal_energies(params, trunc)
    H[np.arange(dim), np.arange(dim)] = diag.reshape(-1)
    gamma_t = envelope_value * params.gamma
    for n in range(trunc.nmax1):
        for m in range(trunc.nmax2):
            i = _flat_index(trunc, n, m, E)
            j = _flat_index(trunc, n + 1, m + 1, G)
            v = gamma_t * math.sqrt((n + 1) * (m + 1))
            H[i, j] += v
            H[j, i] += np.conj(v)
    return H


@dataclass(frozen=True)
class ExcitationBlock:
    """Invariant subspace: two paired states or a 1-dimensional remainder.

    states holds (n1, n2, level) tuples; charges is the shared (M1, M2).
    """

    states: tuple
    matrix: np.ndarray = field(repr=False)
    charges: tuple

    @property
    def dim(self) -> int:
        return len(self.states)


def block_decompose(params: ModelParams, trunc: Truncation,
                    envelope_value: float = 1.0) -> list[ExcitationBlock]:
    """Partition the basis into conserved-charge blocks.

    Every basis state appears exactly once: the pair {|n,m,e>, |n+1,m+1,g>}
    for n < nmax1, m < nmax2; ground states with a depleted mode (n1 = 0 or
    n2 = 0); and excited states at the truncation edge, whose coupling target
    falls outside the basis and is dropped (boundary cut).
    """
    diag = diagonal_energies(params, trunc)
    gamma_t = envelope_value * params.gamma
    blocks: list[ExcitationBlock] = []
    for n in range(trunc.nmax1):
        for m in range(trunc.nmax2):
            v = gamma_t * math.sqrt((n + 1) * (m + 1))
            matrix = np.array([[diag[n, m, E], v],
                               [np.conj(v), diag[n + 1, m + 1, G]]], dtype=complex)
            blocks.append(ExcitationBlock(
                states=((n, m, E), (n + 1, m + 1, G)),
                matrix=matrix,
                charges=(n + 1, m + 1),
            ))
    for n1 in range(trunc.nmax1 + 1):
        for n2 in range(trunc.nmax2 + 1):
            if n1 == 0 or n2 == 0:
                blocks.append(ExcitationBlock(
                    states=((n1, n2, G),),
                    matrix=np.array([[diag[n1, n2, G]]], dtype=complex),
                    charges=(n1, n2),
                ))
            if n1 == trunc.nmax1 or n2 == trunc.nmax2:
                blocks.append(ExcitationBlock(
                    states=((n1, n2, E),),
                    matrix=np.array([[diag[n1, n2, E]]], dtype=complex),
                    charges=(n1 + 1, n2 + 1),
                ))
    return blocks


def boundary_mass(psi: StateVector) -> float:
    """Probability within two photons of the truncation edge in either mode."""
    p = np.abs(psi.amps) ** 2
    inner = p[:max(psi.truncation.nmax1 - 1, 0), :max(psi.truncation.nmax2 - 1, 0), :]
    return float(p.sum() - inner.sum())


class _BlockPropagator:
    """Vectorized closed-form propagator for a diagonal table plus coupling."""

    def __init__(self, diag: np.ndarray, gamma_t: complex):
        nmax1 = diag.shape[0] - 1
        nmax2 = diag.shape[1] - 1
        n = np.arange(nmax1)[:, None]
        m = np.arange(nmax2)[None, :]
        self.Ee = diag[:-1, :-1, E]
        self.Eg = diag[1:, 1:, G]
        self.v = gamma_t * np.sqrt((n + 1.0) * (m + 1.0))
        self.delta = self.Ee - self.Eg
        self.mean = 0.5 * (self.Ee + self.Eg)
        self.beta = np.sqrt(self.delta ** 2 + 4.0 * np.abs(self.v) ** 2)
        self.diag = diag
        # states outside the paired region evolve by pure phases
        self.single_mask = np.zeros(diag.shape, dtype=bool)
        self.single_mask[:, :, G] = True
        self.single_mask[1:, 1:, G] = False
        self.single_mask[nmax1, :, E] = True
        self.single_mask[:, nmax2, E] = True

    def apply(self, amps: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(amps)
        safe = np.where(self.beta > 0.0, self.beta, 1.0)
        half = 0.5 * self.beta * t
        c = np.cos(half)
        f = np.where(self.beta > 0.0, np.sin(half) * 2.0 / safe, t)
        phase = np.exp(-1j * self.mean * t)
        ce = amps[:-1, :-1, E]
        cg = amps[1:, 1:, G]
        out[:-1, :-1, E] = phase * ((c - 0.5j * f * self.delta) * ce - 1j * f * self.v * cg)
        out[1:, 1:, G] = phase * (-1j * f * np.conj(self.v) * ce + (c + 0.5j * f * self.delta) * cg)
        singles = np.exp(-1j * self.diag * t) * amps
        out[self.single_mask] = singles[self.single_mask]
        return out


def iter_evolve_diagonal(psi0: StateVector, diag: np.ndarray, gamma_t: complex,
                         t_grid: Sequence[float],
                         leakage_threshold: float = 1e-8) -> Iterator[StateVector]:
    """Stream exact states at the requested times for a given diagonal table.

    This is the shared engine behind the Kerr and the Stark Hamiltonians: both
    have the same coupling structure and differ only in their diagonals.
    Raises TruncationLeakageError when psi0 puts more than leakage_threshold
    probability within two photons of the truncation edge, since blocks there
    are artificially cut.
    """
    leak = boundary_mass(psi0)
    if leak > leakage_threshold:
        raise TruncationLeakageError(
            f"initial state has weight {leak:.3e} near the truncation edge "
            f"(threshold {leakage_threshold:.1e}); enlarge the truncation")
    prop = _BlockPropagator(diag, gamma_t)
    for t in t_grid:
        yield StateVector(amps=prop.apply(psi0.amps, float(t)), truncation=psi0.truncation)


def iter_evolve(psi0: StateVector, params: ModelParams, t_grid: Sequence[float],
                envelope_value: float = 1.0,
                leakage_threshold: float = 1e-8) -> Iterator[StateVector]:
    """Stream exact states under the Kerr Hamiltonian (constant envelope)."""
    diag = diagonal_energies(params, psi0.truncation)
    return iter_evolve_diagonal(psi0, diag, envelope_value * params.gamma,
                                t_grid, leakage_threshold)


def evolve_exact(psi0: StateVector, params: ModelParams, t_grid: Sequence[float],
                 envelope_value: float = 1.0,
                 leakage_threshold: float = 1e-8) -> list[StateVector]:
    """Exact states at the requested times (constant envelope).

    Propagation is the closed-form exponential of each 2x2 block; the only
    error is floating-point roundoff. Use iter_evolve for long grids on large
    truncations to avoid holding every state in memory.
    """
    return list(iter_evolve(psi0, params, t_grid, envelope_value, leakage_threshold))


def ro_expectation(psi: StateVector, which: str, n: int, m: int,
                   gamma: complex = 1.0) -> float:
    """Expectation value of a relevant operator on a state.

    The seven families, indexed by (n, m):
        N1:  (a1+)^n (a2+)^m a2^m a1^n |g><g|
        N2:  (a1+)^n (a2+)^m a2^m a1^n |e><e|
        D1:  (a1+)^{n+1} (a2+)^m a2^m a1^{n+1}
        D2:  (a1+)^n (a2+)^{m+1} a2^{m+1} a1^n
        I:   (a1+)^n (a2+)^m (gamma a1 a2 |e><g| + h.c.) a2^m a1^n
        F:   i (a1+)^n (a2+)^m (gamma a1 a2 |e><g| - h.c.) a2^m a1^n
        N21: identically zero on the two-level atomic subspace.

    gamma enters the definitions of I and F and is ignored by the rest.
    All seven are Hermitian, so the result is real.
    """
    if which not in RO_TAGS:
        raise ValueError(f"unknown relevant-operator tag {which!r}; expected one of {RO_TAGS}")
    trunc = psi.truncation
    if n < 0 or m < 0 or n > trunc.nmax1 or m > trunc.nmax2:
        raise ValueError(f"(n, m) = ({n}, {m}) outside the truncated table "
                         f"(0..{trunc.nmax1}, 0..{trunc.nmax2})")
    n1 = np.arange(trunc.nmax1 + 1)
    n2 = np.arange(trunc.nmax2 + 1)
    if which in ("N1", "N2", "D1", "D2"):
        ordn = n + 1 if which == "D1" else n
        ordm = m + 1 if which == "D2" else m
        weight = np.outer(falling_factorial(n1, ordn), falling_factorial(n2, ordm))
        p = np.abs(psi.amps) ** 2
        if which == "N1":
            return float((weight * p[:, :, G]).sum())
        if which == "N2":
            return float((weight * p[:, :, E]).sum())
        return float((weight * (p[:, :, G] + p[:, :, E])).sum())
    if which == "N21":
        return 0.0
    # I and F share the cross amplitude <psi| (a1+)^n (a2+)^m a2^{m+1} a1^{n+1} |e><g| |psi>
    if n + 1 > trunc.nmax1 or m + 1 > trunc.nmax2:
        return 0.0
    r1 = np.arange(n + 1, trunc.nmax1 + 1)
    r2 = np.arange(m + 1, trunc.nmax2 + 1)
    f1 = falling_factorial(r1 - 1.0, n) * np.sqrt(r1)
    f2 = falling_factorial(r2 - 1.0, m) * np.sqrt(r2)
    ce = psi.amps[n:trunc.nmax1, m:trunc.nmax2, E]
    cg = psi.amps[n + 1:, m + 1:, G]
    cross = gamma * complex(np.einsum("i,j,ij,ij->", f1, f2, np.conj(ce), cg))
    if which == "I":
        return float(2.0 * cross.real)
    return float(-2.0 * cross.imag)


def expectation_energy(psi: StateVector, params: ModelParams,
                       envelope_value: float = 1.0) -> float:
    """<H> including the interaction cross terms."""
    diag = diagonal_energies(params, psi.truncation)
    value = float((np.abs(psi.amps) ** 2 * diag).sum())
    n = np.arange(psi.truncation.nmax1)[:, None]
    m = np.arange(psi.truncation.nmax2)[None, :]
    v = envelope_value * params.gamma * np.sqrt((n + 1.0) * (m + 1.0))
    ce = psi.amps[:-1, :-1, E]
    cg = psi.amps[1:, 1:, G]
    value += float(2.0 * np.real((np.conj(ce) * v * cg).sum()))
    return value


def expectation_n(psi: StateVector, mode: int) -> float:
    """Mean photon number of mode 1 or 2."""
    p = np.abs(psi.amps) ** 2
    if mode == 1:
        return float((p.sum(axis=(1, 2)) * np.arange(p.shape[0])).sum())
    if mode == 2:
        return float((p.sum(axis=(0, 2)) * np.arange(p.shape[1])).sum())
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def expectation_quadrature(psi: StateVector, mode: int) -> float:
    """<a + a+> for one mode; not a relevant operator, used as a contrast case."""
    if mode == 1:
        lower = psi.amps[1:, :, :]
        upper = psi.amps[:-1, :, :]
        root = np.sqrt(np.arange(1, psi.amps.shape[0]))[:, None, None]
    elif mode == 2:
        lower = psi.amps[:, 1:, :]
        upper = psi.amps[:, :-1, :]
        root = np.sqrt(np.arange(1, psi.amps.shape[1]))[None, :, None]
    else:
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    return float(2.0 * np.real((np.conj(upper) * root * lower).sum()))


def charges(psi: StateVector) -> tuple[float, float]:
    """Conserved excitation charges (<n1 + e>, <n2 + e>)."""
    pop_e = psi.populations()[1]
    return expectation_n(psi, 1) + pop_e, expectation_n(psi, 2) + pop_e
