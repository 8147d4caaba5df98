"""Closed-form time evolution for constant coupling.

For a photon-number-diagonal initial field with the atom in an energy
eigenstate, every invariant 2x2 block oscillates at its generalized Rabi
frequency beta_{n,m}, and the excited-level population is a weighted sum of
(cos(beta t) - 1)/beta^2 terms. The weights follow from the photon statistics
of the initial field; this module evaluates those sums for coherent, squeezed
vacuum, and pair coherent fields, plus the general series driven by arbitrary
factorial-moment tables.

The ``variant`` flag on the coherent and pair evaluators selects between the
coefficient set that matches the exact engine ("exact", default) and a plainer
set kept for auditing ("plain": unit weights in place of the (j+1)(k+1)
matrix-element factors, diagonal Rabi indexing, and first-power normalization
for the pair state). The plain set does not track the exact engine for nonzero
coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .model import ModelParams
from .states import (Coherent, FieldStateSpec, PairCoherent, SqueezedVacuum,
                     default_truncation, factorial_moment, mean_photons,
                     pair_coherent_norm)

_TAIL_BUDGET = 1e-9


class SeriesConvergenceError(RuntimeError):
    """The summation cutoff K discards more weight than the tail budget."""


def block_detuning(n, m, params: ModelParams):
    """Effective detuning of block (n, m): alpha - 2(n chi1 + m chi2 + (n+m+1) sqrt(chi1 chi2))."""
    return params.alpha - 2.0 * (np.asarray(n) * params.chi1 + np.asarray(m) * params.chi2
                                 + (np.asarray(n) + np.asarray(m) + 1) * params.chi_cross)


def beta_squared(n, m, params: ModelParams):
    """Squared generalized Rabi frequency of block (n, m).

    beta^2 = [alpha - 2(n chi1 + m chi2 + (n+m+1) sqrt(chi1 chi2))]^2
             + 4 |gamma|^2 (n+1)(m+1)

    Equals the squared eigenvalue gap of the corresponding 2x2 block, which is
    the central cross-module identity of the package.
    """
    delta = block_detuning(n, m, params)
    out = delta ** 2 + 4.0 * params.gamma_mod ** 2 * (np.asarray(n) + 1.0) * (np.asarray(m) + 1.0)
    if np.isscalar(n) and np.isscalar(m):
        return float(out)
    return out


class RabiTable:
    """Cached beta^2 values for 0 <= n, m <= K."""

    def __init__(self, params: ModelParams, K: int):
        if K < 0:
            raise ValueError(f"K must be >= 0, got {K}")
        self.params = params
        self.K = K
        n = np.arange(K + 1)[:, None]
        m = np.arange(K + 1)[None, :]
        self.table = beta_squared(n, m, params)

    def beta2(self, n: int, m: int) -> float:
        return float(self.table[n, m])

    def beta(self, n: int, m: int) -> float:
        return math.sqrt(self.table[n, m])


@dataclass(frozen=True)
class SeriesCoefficients:
    """The trigonometric kernels and the alternating inverse-transform weights.

    S(j,k,t) = sin(beta_{j,k} t); C(j,k,t) = cos(beta_{j,k} t) - 1, always in
    [-2, 0]; a(n,m,j,k) = (-1)^{n+m+j+k+1} / [(n-j)! j! (m-k)! k!].
    """

    rabi: RabiTable

    def S(self, j: int, k: int, t: float) -> float:
        return math.sin(self.rabi.beta(j, k) * t)

    def C(self, j: int, k: int, t: float) -> float:
        return math.cos(self.rabi.beta(j, k) * t) - 1.0

    @staticmethod
    def a(n: int, m: int, j: int, k: int) -> float:
        if n < j or m < k:
            return 0.0
        sign = -1.0 if (n + m + j + k) % 2 == 0 else 1.0
        return sign / (math.factorial(n - j) * math.factorial(j)
                       * math.factorial(m - k) * math.factorial(k))


def _population_from_blocks(t, jidx, kidx, amplitudes, params: ModelParams):
    """1 + sum_i A_i (cos(beta_i t) - 1), accumulated smallest weight first."""
    beta = np.sqrt(beta_squared(jidx.astype(float), kidx.astype(float), params))
    order = np.argsort(np.abs(amplitudes), kind="stable")
    amp = amplitudes[order]
    beta = beta[order]
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(tarr.shape)
    for i, ti in enumerate(tarr):
        out[i] = 1.0 + math.fsum(amp * (np.cos(beta * ti) - 1.0))
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def _check_tail(captured: float, label: str) -> None:
    if 1.0 - captured > _TAIL_BUDGET:
        raise SeriesConvergenceError(
            f"{label}: cutoff discards weight {1.0 - captured:.3e} "
            f"(budget {_TAIL_BUDGET:.1e}); raise K")


def _geometric_weights(r: float, K: int) -> np.ndarray:
    k = np.arange(K + 1)
    lam = math.tanh(r) ** 2
    if lam == 0.0:
        return np.where(k == 0, 1.0, 0.0)
    return (1.0 - lam) * lam ** k


def _pair_weights(xi: complex, q: int, K: int) -> np.ndarray:
    k = np.arange(K + 1)
    x = abs(xi) ** 2
    norm2 = pair_coherent_norm(xi, q) ** 2
    if x == 0.0:
        return norm2 * np.where(k == 0, 1.0 / math.factorial(q), 0.0)
    logw = k * math.log(x) - gammaln(k + 1.0) - gammaln(k + q + 1.0)
    return norm2 * np.exp(logw)


def _coherent_blocks(params, alpha1, alpha2, K1, K2, variant):
    nb1, nb2 = abs(alpha1) ** 2, abs(alpha2) ** 2
    j = np.arange(K1 + 1)
    k = np.arange(K2 + 1)
    w = np.outer(stats.poisson.pmf(j, nb1), stats.poisson.pmf(k, nb2))
    _check_tail(float(w.sum()), "coherent series")
    jj, kk = np.meshgrid(j, k, indexing="ij")
    jf, kf = jj.reshape(-1), kk.reshape(-1)
    weight = w.reshape(-1)
    b2 = beta_squared(jf.astype(float), kf.astype(float), params)
    enh = (jf + 1.0) * (kf + 1.0) if variant == "exact" else np.ones_like(weight)
    amp = 2.0 * params.gamma_mod ** 2 * weight * enh / b2
    return jf, kf, weight, amp


def population_coherent(t, params: ModelParams, alpha1: complex, alpha2: complex,
                        K: int | None = None, variant: str = "exact"):
    """Excited-level population for a product coherent field, atom excited.

    pop_e(t) = 1 + 2|gamma|^2 sum_{j,k} Pois(j; nb1) Pois(k; nb2)
               (j+1)(k+1) C_{j,k}(t) / beta^2_{j,k}

    Args:
        t: scalar or array of times.
        K: per-mode summation cutoff; defaults to the truncation rule for the
            same field so series and exact-engine tails stay matched.
        variant: "exact" or "plain" (see module docstring).
    """
    _check_variant(variant)
    if K is None:
        trunc = default_truncation(Coherent(alpha1, alpha2))
        K1, K2 = trunc.nmax1, trunc.nmax2
    else:
        K1 = K2 = K
    jf, kf, _, amp = _coherent_blocks(params, alpha1, alpha2, K1, K2, variant)
    return _population_from_blocks(t, jf, kf, amp, params)


def population_squeezed(t, params: ModelParams, r: float, K: int | None = None):
    """Excited-level population for the two-mode squeezed vacuum, atom excited.

    pop_e(t) = 1 + (2|gamma|^2 / cosh^2 r) sum_k tanh^{2k}(r) (k+1)^2
               C_{k,k}(t) / beta^2_{k,k}
    """
    if K is None:
        K = default_truncation(SqueezedVacuum(r)).nmax1
    k = np.arange(K + 1)
    w = _geometric_weights(r, K)
    _check_tail(float(w.sum()), "squeezed-vacuum series")
    b2 = beta_squared(k.astype(float), k.astype(float), params)
    amp = 2.0 * params.gamma_mod ** 2 * w * (k + 1.0) ** 2 / b2
    return _population_from_blocks(t, k, k, amp, params)


def population_pair_coherent(t, params: ModelParams, xi: complex, q: int = 0,
                             K: int | None = None, variant: str = "exact"):
    """Excited-level population for a pair coherent field, atom excited.

    pop_e(t) = 1 + 2|gamma|^2 N_q^2 sum_k |xi|^{2k} / (k! (k+q)!)
               (k+1)(k+q+1) C_{k+q,k}(t) / beta^2_{k+q,k}

    The Rabi index is (k+q, k): the Fock component |k+q, k> pairs with
    |k+q+1, k+1> in the block labeled by its excited member.
    """
    _check_variant(variant)
    if K is None:
        K = default_truncation(PairCoherent(xi, q)).nmax2
    k = np.arange(K + 1)
    w = _pair_weights(xi, q, K)
    _check_tail(float(w.sum()), "pair coherent series")
    if variant == "exact":
        b2 = beta_squared((k + q).astype(float), k.astype(float), params)
        amp = 2.0 * params.gamma_mod ** 2 * w * (k + 1.0) * (k + q + 1.0) / b2
        return _population_from_blocks(t, k + q, k, amp, params)
    # plain: first-power normalization, diagonal Rabi index, no 1/beta^2
    wp = w / pair_coherent_norm(xi, q)
    amp = 2.0 * params.gamma_mod ** 2 * wp * (k + 1.0) * (k + q + 1.0)
    beta = np.sqrt(beta_squared(k.astype(float), k.astype(float), params))
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([1.0 + math.fsum(amp * (np.cos(beta * ti) - 1.0)) for ti in tarr])
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def _check_variant(variant: str) -> None:
    if variant not in ("exact", "plain"):
        raise ValueError(f"variant must be 'exact' or 'plain', got {variant!r}")


def general_ro_series(t, params: ModelParams, moments_excited: np.ndarray,
                      moments_ground: np.ndarray | None = None,
                      K: int | None = None,
                      f0: np.ndarray | None = None, i0: np.ndarray | None = None):
    """Excited-level population from raw factorial-moment tables.

    Evaluates the series term by term: the alternating a(n,m,j,k) transform of
    the moment tables recovers the per-block weights, which then multiply
    C_{j,k}(t)/beta^2_{j,k}. Only photon-number-diagonal initial fields with
    the atom in an energy eigenstate are in scope, which is why nonzero f0/i0
    tables are rejected rather than integrated.

    Args:
        moments_excited: table M2[n, m] = <(n1)_n (n2)_m> restricted to the
            excited level, at least (K+2) x (K+2).
        moments_ground: same for the ground level; defaults to zero.
        K: outer summation cutoff; defaults to table size minus 2.

    Note: the alternating transform cancels catastrophically when the moments
    span many orders of magnitude (bright fields); intended for small mean
    photon numbers, where it reproduces the specialized evaluators to 1e-12.
    """
    m2 = np.asarray(moments_excited, dtype=float)
    m1 = np.zeros_like(m2) if moments_ground is None else np.asarray(moments_ground, dtype=float)
    if m1.shape != m2.shape or m2.ndim != 2 or m2.shape[0] != m2.shape[1]:
        raise ValueError("moment tables must be square and share one shape")
    for name, table in (("f0", f0), ("i0", i0)):
        if table is not None and np.any(np.asarray(table) != 0.0):
            raise ValueError(f"nonzero {name} table: only diagonal initial fields are supported")
    size = m2.shape[0]
    if K is None:
        K = size - 2
    if K + 2 > size:
        raise ValueError(f"moment tables of size {size} support K <= {size - 2}, got {K}")

    g2 = 2.0 * params.gamma_mod ** 2
    nn = np.arange(K + 1)
    # bracket[n, m]: the up-coupling combination that drives d<F^{n,m}>/dt at t=0
    bracket = (np.outer(nn + 1.0, nn + 1.0) * m2[:K + 1, :K + 1]
               + (nn + 1.0)[:, None] * m2[:K + 1, 1:K + 2]
               + (nn + 1.0)[None, :] * m2[1:K + 2, :K + 1]
               + m2[1:K + 2, 1:K + 2] - m1[1:K + 2, 1:K + 2])

    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    total = np.zeros(tarr.shape)
    lognm = np.cumsum(np.concatenate(([0.0], np.log(np.maximum(nn[1:], 1)))))
    fact = np.exp(lognm)  # n! for n = 0..K
    for j in range(K + 1):
        for k in range(K + 1):
            terms = []
            dm = np.arange(K + 1 - k)
            for n in range(j, K + 1):
                row = bracket[n, k:K + 1]
                signs = np.where((n + dm + j) % 2 == 0, -1.0, 1.0)
                coeff = signs / (fact[n - j] * fact[j] * fact[dm] * fact[k])
                terms.extend((coeff * row).tolist())
            inner = math.fsum(terms)
            if inner == 0.0:
                continue
            b2 = beta_squared(j, k, params)
            beta = math.sqrt(b2)
            total += (np.cos(beta * tarr) - 1.0) / b2 * (-g2 * inner)
    out = m2[0, 0] + total
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def series_observables(field, params: ModelParams, t, K: int | None = None,
                       variant: str = "exact") -> dict:
    """Population and correlation series for an initially excited atom.

    Returns a dict with keys t, pop_e, pop_g, n1, n2, n1n2, g2_12. The photon
    observables follow from charge conservation within each block: every
    de-excitation adds one photon to each mode, so
    n_i(t) = n_i(0) + pop_g(t) and
    <n1 n2>(t) = <n1 n2>(0) + sum_{j,k} w_{j,k} (j+k+1) P_g^{(j,k)}(t).
    """
    _check_variant(variant)
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    if isinstance(field, FieldStateSpec):
        if field.atom_level != "e":
            raise ValueError("closed-form observables assume the atom starts excited")
        field = field.field
    if isinstance(field, Coherent):
        if K is None:
            trunc = default_truncation(field)
            K1, K2 = trunc.nmax1, trunc.nmax2
        else:
            K1 = K2 = K
        jf, kf, _, amp = _coherent_blocks(params, field.alpha1, field.alpha2, K1, K2, variant)
    elif isinstance(field, SqueezedVacuum):
        Kd = K if K is not None else default_truncation(field).nmax1
        k = np.arange(Kd + 1)
        w = _geometric_weights(field.r, Kd)
        _check_tail(float(w.sum()), "squeezed-vacuum series")
        b2 = beta_squared(k.astype(float), k.astype(float), params)
        jf, kf = k, k
        amp = 2.0 * params.gamma_mod ** 2 * w * (k + 1.0) ** 2 / b2
    elif isinstance(field, PairCoherent):
        Kd = K if K is not None else default_truncation(field).nmax2
        k = np.arange(Kd + 1)
        w = _pair_weights(field.xi, field.q, Kd)
        _check_tail(float(w.sum()), "pair coherent series")
        jf, kf = k + field.q, k
        b2 = beta_squared(jf.astype(float), kf.astype(float), params)
        amp = 2.0 * params.gamma_mod ** 2 * w * (kf + 1.0) * (jf + 1.0) / b2
    else:
        raise TypeError(f"unsupported field variant: {type(field).__name__}")

    beta = np.sqrt(beta_squared(jf.astype(float), kf.astype(float), params))
    order = np.argsort(np.abs(amp), kind="stable")
    amp_o = amp[order]
    beta_o = beta[order]
    cross_o = (amp * (jf + kf + 1.0))[order]
    pop_g = np.empty(tarr.shape)
    dn1n2 = np.empty(tarr.shape)
    for i, ti in enumerate(tarr):
        cosm1 = np.cos(beta_o * ti) - 1.0
        pop_g[i] = -math.fsum(amp_o * cosm1)
        dn1n2[i] = -math.fsum(cross_o * cosm1)
    n1_0, n2_0 = mean_photons(field)
    n1n2_0 = factorial_moment(field, 1, 1)
    n1 = n1_0 + pop_g
    n2 = n2_0 + pop_g
    n1n2 = n1n2_0 + dn1n2
    with np.errstate(divide="ignore", invalid="ignore"):
        g2 = np.where(np.abs(n1 * n2) > 1e-12, n1n2 / (n1 * n2) - 1.0, np.nan)
    return {"t": tarr, "pop_e": 1.0 - pop_g, "pop_g": pop_g,
            "n1": n1, "n2": n2, "n1n2": n1n2, "g2_12": g2}
