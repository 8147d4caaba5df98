"""Kerr-to-Stark parameter correspondence and dynamical equivalence checks.

A two-level, two-mode system with intensity-dependent Stark shifts,

    H_S = sum_i E_i b_i+ b_i + sum_i w_si a_i+ a_i
          + T (gamma a1 a2 |e><g| + h.c.)
          + (a1+ a1 + a2+ a2)(eta1 |g><g| + eta2 |e><e|),

has the same conserved charges and the same 2x2 block structure as the Kerr
Hamiltonian. Matching the block detunings delta(n, m) for every (n, m) pins
the Stark parameters up to one free gauge:

    eta1 - eta2 = 2 eps1 = 2 eps2        (forces chi1 = chi2)
    w_s1 + eta1 = w1 + sqrt(chi1 chi2)
    w_s2 + eta1 = w2 + sqrt(chi1 chi2)

Note eta1 in both frequency conditions: the ground level, shifted by eta1,
is the partner state inside every block, so eta1 is what the block detuning
sees. Matched parameters reproduce every relevant-operator trajectory
exactly; observables connecting different blocks (field quadratures, say) are
under no such obligation, and verify_equivalence reports both sides of that
dichotomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Sequence, Union

import numpy as np

from .hilbert import (E, G, RO_TAGS, StateVector, assemble_state, diagonal_energies,
                      expectation_quadrature, iter_evolve_diagonal, ro_expectation)
from .model import ModelParams, Truncation
from .states import FieldStateSpec, amplitudes, default_truncation


class KerrAsymmetryError(ValueError):
    """The correspondence needs chi1 = chi2; unequal susceptibilities given."""


@dataclass(frozen=True)
class StarkParams:
    """Shifted mode frequencies and level-resolved Stark coefficients."""

    ws1: float
    ws2: float
    eta1: float
    eta2: float

    def __post_init__(self) -> None:
        for name in ("ws1", "ws2", "eta1", "eta2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")

    def matching_residuals(self, params: ModelParams) -> tuple:
        """Residuals of the three matching conditions against a Kerr model.

        All three vanish exactly when the block detunings of the two
        Hamiltonians coincide for every (n, m).
        """
        return (params.w1 + params.chi_cross - self.ws1 - self.eta1,
                params.w2 + params.chi_cross - self.ws2 - self.eta1,
                self.eta1 - self.eta2 - 2.0 * params.epsilon1)


def map_kerr_to_stark(params: ModelParams, gauge_eta2: float = 0.0) -> StarkParams:
    """The unique matched StarkParams for the gauge choice eta2 = gauge_eta2.

    The matching conditions determine only eta1 - eta2 and w_si + eta1, so one
    parameter is a free gauge; eta2 is the conventional knob. Raises
    KerrAsymmetryError unless chi1 = chi2, since eta1 - eta2 would otherwise
    have to equal both 2 eps1 and 2 eps2.
    """
    if not math.isclose(params.chi1, params.chi2, rel_tol=0.0, abs_tol=1e-12):
        raise KerrAsymmetryError(
            f"chi1 = {params.chi1} and chi2 = {params.chi2} differ; the Stark "
            "correspondence only exists for equal Kerr susceptibilities")
    eta1 = gauge_eta2 + 2.0 * params.epsilon1
    stark = StarkParams(ws1=params.w1 + params.chi_cross - eta1,
                        ws2=params.w2 + params.chi_cross - eta1,
                        eta1=eta1, eta2=gauge_eta2)
    residual = max(abs(r) for r in stark.matching_residuals(params))
    if residual > 1e-10:
        raise AssertionError(f"matching conditions violated by {residual:.3e}")
    return stark


def stark_diagonal_energies(params: ModelParams, stark: StarkParams,
                            trunc: Truncation) -> np.ndarray:
    """Diagonal table D[n1, n2, level] of the Stark Hamiltonian.

    Level energies and the coupling come from the companion ModelParams; the
    field part is linear in the photon numbers with a level-dependent slope.
    """
    n1 = np.arange(trunc.nmax1 + 1)[:, None]
    n2 = np.arange(trunc.nmax2 + 1)[None, :]
    base = stark.ws1 * n1 + stark.ws2 * n2
    out = np.empty((trunc.nmax1 + 1, trunc.nmax2 + 1, 2))
    out[:, :, G] = base + params.E1 + (n1 + n2) * stark.eta1
    out[:, :, E] = base + params.E2 + (n1 + n2) * stark.eta2
    return out


def iter_evolve_stark(psi0: StateVector, params: ModelParams, stark: StarkParams,
                      t_grid: Sequence[float], envelope_value: float = 1.0,
                      leakage_threshold: float = 1e-8):
    """Stream exact states under the Stark Hamiltonian (constant envelope)."""
    diag = stark_diagonal_energies(params, stark, psi0.truncation)
    return iter_evolve_diagonal(psi0, diag, envelope_value * params.gamma,
                                t_grid, leakage_threshold)


@dataclass(eq=False)
class EquivalenceReport:
    """Per-family deviation series between matched Kerr and Stark runs.

    per_ro maps each relevant-operator tag to the worst absolute deviation
    over the compared (n, m) table at each time; quadrature carries the
    deviation of <a1 + a1+>, which is allowed to be large.
    """

    t: np.ndarray
    per_ro: Dict[str, np.ndarray]
    quadrature: np.ndarray
    nm_max: int

    @property
    def max_deviation(self) -> float:
        return max(float(np.max(dev)) for dev in self.per_ro.values())

    @property
    def max_by_tag(self) -> Dict[str, float]:
        return {tag: float(np.max(dev)) for tag, dev in self.per_ro.items()}

    def deviation_until(self, t_max: float) -> float:
        """Worst relevant-operator deviation restricted to t <= t_max."""
        mask = self.t <= t_max
        return max(float(np.max(dev[mask])) for dev in self.per_ro.values())

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        header = ("t",) + RO_TAGS + ("quadrature",)
        lines = [",".join(header)]
        for i in range(len(self.t)):
            row = [self.t[i]] + [self.per_ro[tag][i] for tag in RO_TAGS]
            row.append(self.quadrature[i])
            lines.append(",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n", newline="\n")
        return path


def verify_equivalence(params: ModelParams, stark: StarkParams, spec: FieldStateSpec,
                       t_grid: Sequence[float], nm_max: int = 3,
                       truncation: Truncation = None) -> EquivalenceReport:
    """Run both Hamiltonians from the same state and compare all seven RO tables.

    The comparison covers every (n, m) with n, m <= nm_max. Matched parameters
    give deviations at roundoff level; a mismatched eta1 shows up as a secular
    drift in the deviation series.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if truncation is None:
        truncation = default_truncation(spec)
    psi0 = assemble_state(amplitudes(spec, truncation), spec.atom_level)
    diag_k = diagonal_energies(params, truncation)
    diag_s = stark_diagonal_energies(params, stark, truncation)
    per = {tag: np.zeros(len(t_grid)) for tag in RO_TAGS}
    quad = np.zeros(len(t_grid))
    pairs = [(n, m) for n in range(nm_max + 1) for m in range(nm_max + 1)]
    kerr_states = iter_evolve_diagonal(psi0, diag_k, params.gamma, t_grid)
    stark_states = iter_evolve_diagonal(psi0, diag_s, params.gamma, t_grid)
    for i, (pk, ps) in enumerate(zip(kerr_states, stark_states)):
        for tag in RO_TAGS:
            worst = 0.0
            for n, m in pairs:
                dev = abs(ro_expectation(pk, tag, n, m, gamma=params.gamma)
                          - ro_expectation(ps, tag, n, m, gamma=params.gamma))
                worst = max(worst, dev)
            per[tag][i] = worst
        quad[i] = abs(expectation_quadrature(pk, 1) - expectation_quadrature(ps, 1))
    return EquivalenceReport(t=t_grid.copy(), per_ro=per, quadrature=quad, nm_max=nm_max)
