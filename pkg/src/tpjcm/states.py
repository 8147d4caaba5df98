"""Initial two-mode field states and their photon statistics.

Three families are supported: product coherent states, the two-mode squeezed
vacuum, and pair coherent states. Each is reduced to a joint Fock amplitude
table plus the normally ordered cross factorial moments
E[(n1)_n (n2)_m] = <(a1+)^n (a2+)^m a2^m a1^n> that seed the series and the
operator hierarchy. Falling factorials are written (x)_k = x(x-1)...(x-k+1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln

from .model import Truncation

_TAIL_DEFAULT = 1e-12


def falling_factorial(x, k: int):
    """(x)_k = x(x-1)...(x-k+1) for scalar or array x and integer k >= 0."""
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    out = np.ones_like(np.asarray(x, dtype=float))
    for i in range(k):
        out = out * (np.asarray(x, dtype=float) - i)
    if np.isscalar(x):
        return float(out)
    return out


@dataclass(frozen=True)
class Coherent:
    """Product coherent state |alpha1> x |alpha2>."""

    alpha1: complex
    alpha2: complex


@dataclass(frozen=True)
class SqueezedVacuum:
    """Two-mode squeezed vacuum: amplitudes (e^{i phi} tanh r)^n / cosh r on |n, n>."""

    r: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if self.r < 0:
            raise ValueError(f"squeeze parameter must be >= 0, got {self.r}")


@dataclass(frozen=True)
class PairCoherent:
    """Pair coherent state |xi, q>: N_q * xi^n / sqrt(n! (n+q)!) on |n+q, n>.

    Joint eigenstate of a1 a2 and of the photon-number difference n1 - n2 = q.
    """

    xi: complex
    q: int = 0

    def __post_init__(self) -> None:
        if self.q < 0:
            raise ValueError(f"charge q must be >= 0, got {self.q}")


FieldVariant = Union[Coherent, SqueezedVacuum, PairCoherent]

LEVELS = ("g", "e")


@dataclass(frozen=True)
class FieldStateSpec:
    """Initial condition: a field variant plus the atomic level."""

    field: FieldVariant
    atom_level: str = "e"

    def __post_init__(self) -> None:
        if self.atom_level not in LEVELS:
            raise ValueError(f"atom_level must be one of {LEVELS}, got {self.atom_level!r}")
        if not isinstance(self.field, (Coherent, SqueezedVacuum, PairCoherent)):
            raise TypeError(f"unsupported field variant: {type(self.field).__name__}")


@dataclass(frozen=True)
class JointPhotonDistribution:
    """Fock amplitude table c(n1, n2) over a truncation, with tail accounting.

    amps is complex with shape (nmax1+1, nmax2+1), normalized so that
    sum |c|^2 = 1 at the truncation; ``leakage`` is the probability mass the
    truncation discarded before renormalization.
    """

    amps: np.ndarray
    truncation: Truncation
    leakage: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def mean_photons(self) -> tuple[float, float]:
        p = self.probabilities
        n1 = np.arange(p.shape[0])
        n2 = np.arange(p.shape[1])
        return float((p.sum(axis=1) * n1).sum()), float((p.sum(axis=0) * n2).sum())


def _field_of(spec) -> FieldVariant:
    return spec.field if isinstance(spec, FieldStateSpec) else spec


def _coherent_mode_amps(alpha: complex, nmax: int) -> np.ndarray:
    n = np.arange(nmax + 1)
    mod = abs(alpha)
    if mod == 0.0:
        amps = np.zeros(nmax + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    logmag = -0.5 * mod * mod + n * math.log(mod) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(complex(alpha)))


def pair_coherent_norm(xi: complex, q: int) -> float:
    """Normalization N_q = [sum_n |xi|^{2n} / (n! (n+q)!)]^{-1/2}.

    Summed directly with term-ratio stopping (next term < 1e-16 * partial sum).
    """
    x = abs(xi) ** 2
    term = 1.0 / math.factorial(q)
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (n * (n + q))
        total += term
        if term < 1e-16 * total and n > abs(xi):
            break
    return 1.0 / math.sqrt(total)


def amplitudes(spec, trunc: Truncation) -> JointPhotonDistribution:
    """Joint Fock amplitude table for a field spec at the given truncation.

    Args:
        spec: FieldStateSpec or a bare field variant.
        trunc: per-mode cutoffs; a warning is issued when the discarded tail
            mass exceeds 1e-10.

    Returns:
        JointPhotonDistribution, renormalized on the truncated table.
    """
    field = _field_of(spec)
    amps = np.zeros((trunc.nmax1 + 1, trunc.nmax2 + 1), dtype=complex)
    if isinstance(field, Coherent):
        amps = np.outer(_coherent_mode_amps(field.alpha1, trunc.nmax1),
                        _coherent_mode_amps(field.alpha2, trunc.nmax2))
    elif isinstance(field, SqueezedVacuum):
        ndiag = min(trunc.nmax1, trunc.nmax2)
        n = np.arange(ndiag + 1)
        lam = math.tanh(field.r)
        vals = (lam ** n) * np.exp(1j * field.phi * n) / math.cosh(field.r)
        amps[n, n] = vals
    elif isinstance(field, PairCoherent):
        q = field.q
        if trunc.nmax1 < q:
            raise ValueError(f"nmax1={trunc.nmax1} cannot hold the q={q} offset")
        ndiag = min(trunc.nmax1 - q, trunc.nmax2)
        n = np.arange(ndiag + 1)
        mod = abs(field.xi)
        norm = pair_coherent_norm(field.xi, q)
        with np.errstate(divide="ignore"):
            logmag = np.where(n > 0, n * np.log(mod if mod > 0 else 1.0), 0.0)
        if mod == 0.0:
            mags = np.zeros(ndiag + 1)
            mags[0] = norm / math.sqrt(math.factorial(q))
        else:
            mags = norm * np.exp(logmag - 0.5 * (gammaln(n + 1) + gammaln(n + q + 1)))
        phases = np.exp(1j * n * np.angle(complex(field.xi)))
        amps[n + q, n] = mags * phases
    else:
        raise TypeError(f"unsupported field variant: {type(field).__name__}")

    captured = float(np.sum(np.abs(amps) ** 2))
    leakage = max(0.0, 1.0 - captured)
    if leakage > 1e-10:
        warnings.warn(f"truncation {trunc.nmax1, trunc.nmax2} discards tail mass {leakage:.3e}",
                      stacklevel=2)
    if captured <= 0.0:
        raise ValueError("field state has no support inside the truncation")
    amps = amps / math.sqrt(captured)
    return JointPhotonDistribution(amps=amps, truncation=trunc, leakage=leakage)


def _squeezed_moment(mu: float, n: int, m: int) -> float:
    # E[(N)_n (N)_m] for geometric N with mean mu, via the product expansion
    # (N)_n (N)_m = sum_i C(n,i) C(m,i) i! (N)_{n+m-i} and E[(N)_j] = j! mu^j.
    total = math.fsum(
        math.comb(n, i) * math.comb(m, i) * math.factorial(i)
        * math.factorial(n + m - i) * mu ** (n + m - i)
        for i in range(min(n, m) + 1)
    )
    return total


def _pair_moment(field: PairCoherent, n: int, m: int) -> float:
    # E[(k+q)_n (k)_m] over p(k) = N_q^2 |xi|^{2k} / (k! (k+q)!).
    x = abs(field.xi) ** 2
    q = field.q
    norm2 = pair_coherent_norm(field.xi, q) ** 2
    pk = norm2 / math.factorial(q)
    total = 0.0
    k = 0
    while True:
        total += pk * falling_factorial(k + q, n) * falling_factorial(k, m)
        k += 1
        pk *= x / (k * (k + q))
        if k > max(n, m) and pk * (k + q) ** n * k ** m < 1e-16 * max(abs(total), 1e-300) and k > abs(field.xi):
            break
        if k > 100000:
            raise RuntimeError("pair coherent moment sum failed to converge")
    return total


def factorial_moment(spec, n: int, m: int) -> float:
    """Cross factorial moment E[(n1)_n (n2)_m] of the field's photon numbers.

    Args:
        spec: FieldStateSpec or a bare field variant.
        n: order in mode 1, >= 0.
        m: order in mode 2, >= 0.
    """
    if n < 0 or m < 0:
        raise ValueError(f"orders must be >= 0, got ({n}, {m})")
    field = _field_of(spec)
    if isinstance(field, Coherent):
        return abs(field.alpha1) ** (2 * n) * abs(field.alpha2) ** (2 * m)
    if isinstance(field, SqueezedVacuum):
        return _squeezed_moment(math.sinh(field.r) ** 2, n, m)
    if isinstance(field, PairCoherent):
        return _pair_moment(field, n, m)
    raise TypeError(f"unsupported field variant: {type(field).__name__}")


def moment_table(spec, size: int) -> np.ndarray:
    """Table M[n, m] = factorial_moment(spec, n, m) for 0 <= n, m <= size."""
    field = _field_of(spec)
    idx = np.arange(size + 1)
    if isinstance(field, Coherent):
        return np.outer(abs(field.alpha1) ** (2 * idx), abs(field.alpha2) ** (2 * idx))
    table = np.empty((size + 1, size + 1))
    for n in idx:
        for m in idx:
            table[n, m] = factorial_moment(field, int(n), int(m))
    return table


def mean_photons(spec) -> tuple[float, float]:
    """(mean n1, mean n2) for a field spec."""
    field = _field_of(spec)
    if isinstance(field, Coherent):
        return abs(field.alpha1) ** 2, abs(field.alpha2) ** 2
    if isinstance(field, SqueezedVacuum):
        mu = math.sinh(field.r) ** 2
        return mu, mu
    if isinstance(field, PairCoherent):
        mu2 = _pair_moment(field, 0, 1)
        return mu2 + field.q, mu2
    raise TypeError(f"unsupported field variant: {type(field).__name__}")


def squeezed_r_for_mean(target: float) -> float:
    """r with sinh^2(r) = target mean photon number per mode."""
    if target < 0:
        raise ValueError(f"target mean must be >= 0, got {target}")
    return math.asinh(math.sqrt(target))


def pair_xi_for_mean(target: float, q: int = 0) -> float:
    """|xi| giving the requested mean photon number in mode 2, by bisection."""
    if target <= 0:
        raise ValueError(f"target mean must be > 0, got {target}")
    lo, hi = 0.0, max(4.0, 3.0 * (target + q))

    def gap(x: float) -> float:
        return _pair_moment(PairCoherent(xi=x, q=q), 0, 1) - target

    if gap(hi) < 0:
        raise ValueError(f"bisection bracket [0, {hi}] does not contain mean {target}")
    return float(optimize.brentq(gap, lo, hi, xtol=1e-13, rtol=1e-14))


def default_truncation(spec, tail: float = _TAIL_DEFAULT) -> Truncation:
    """Per-mode cutoffs keeping the discarded photon-number tail below ``tail``.

    Coherent modes use the Poisson quantile (floored at mean + 8*sqrt(mean),
    which already meets the target in the bright regimes); squeezed vacuum uses
    the geometric quantile; pair coherent scans its superexponentially decaying
    distribution directly.
    """
    field = _field_of(spec)
    if isinstance(field, Coherent):
        cuts = []
        for alpha in (field.alpha1, field.alpha2):
            nbar = abs(alpha) ** 2
            rough = math.ceil(nbar + 8.0 * math.sqrt(nbar))
            quant = int(stats.poisson.isf(tail, nbar)) + 4 if nbar > 0 else 4
            cuts.append(max(rough, quant, 4))
        return Truncation(nmax1=cuts[0], nmax2=cuts[1])
    if isinstance(field, SqueezedVacuum):
        lam = math.tanh(field.r) ** 2
        if lam == 0.0:
            n = 4
        else:
            n = math.ceil(math.log(tail) / math.log(lam)) + 4
        return Truncation(nmax1=max(n, 4), nmax2=max(n, 4))
    if isinstance(field, PairCoherent):
        x = abs(field.xi) ** 2
        q = field.q
        norm2 = pair_coherent_norm(field.xi, q) ** 2
        pk = norm2 / math.factorial(q)
        cum = pk
        k = 0
        while 1.0 - cum > tail and k < 100000:
            k += 1
            pk *= x / (k * (k + q))
            cum += pk
        n2 = max(k + 4, 4)
        return Truncation(nmax1=n2 + q, nmax2=n2)
    raise TypeError(f"unsupported field variant: {type(field).__name__}")
