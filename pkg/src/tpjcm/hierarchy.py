"""Numerical integration of the relevant-operator evolution equations.

The seven expectation-value tables N1, N2, D1, D2, I, F, N21, indexed by
(n, m), form a closed linear ODE system driven by the coupling envelope T(t):

    dN1(n,m)/dt  =  T (F(n,m) + n F(n-1,m) + m F(n,m-1) + n m F(n-1,m-1))
    dN2(n,m)/dt  = -T F(n,m)
    dD1(n,m)/dt  =  T ((n+1) F(n,m) + m F(n+1,m-1) + m(n+1) F(n,m-1))
    dD2(n,m)/dt  =  T ((m+1) F(n,m) + n F(n-1,m+1) + n(m+1) F(n-1,m))
    dN21(n,m)/dt =  0
    dI(n,m)/dt   =  delta(n,m) F(n,m) - 2 eps1 F(n+1,m) - 2 eps2 F(n,m+1)
    dF(n,m)/dt   = -delta(n,m) I(n,m) + 2 eps1 I(n+1,m) + 2 eps2 I(n,m+1)
                   + 2|gamma|^2 T ((n+1)(m+1)(N2(n,m) - N21(n,m))
                                   + (n+1)(N2(n,m+1) - N21(n,m+1))
                                   + (m+1)(N2(n+1,m) - N21(n+1,m))
                                   + N2(n+1,m+1) - N1(n+1,m+1))

with delta(n,m) = alpha - 2(n chi1 + m chi2 + (n+m+1) sqrt(chi1 chi2)) and
eps_i = chi_i + sqrt(chi1 chi2). The up-coupling never terminates on its own,
so tables are kept for 0 <= n, m <= cutoff+1 and the outermost ring is frozen
at its initial values (zero derivative). Freezing rather than zeroing keeps
the short-time Taylor expansion exact to higher order and avoids injecting a
spurious sink into the F equation. The closure error is estimated by
re-running with the cutoff lowered by 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModelParams
from .observables import ObservableSeries
from .states import FieldStateSpec, mean_photons, moment_table

TABLE_ORDER = ("N1", "N2", "D1", "D2", "I", "F", "N21")


class HierarchyConvergenceError(RuntimeError):
    """The adaptive integrator failed to meet its tolerance."""


@dataclass(frozen=True)
class Constant:
    """Time-independent coupling envelope T(t) = value."""

    value: float = 1.0

    def __call__(self, t: float) -> float:
        return self.value

    def breakpoints(self, t0: float, t1: float) -> tuple:
        return ()


@dataclass(frozen=True)
class RectPulse:
    """T(t) = value for t_on <= t < t_off, zero outside."""

    value: float
    t_on: float
    t_off: float

    def __post_init__(self) -> None:
        if not self.t_off > self.t_on:
            raise ValueError(f"need t_off > t_on, got [{self.t_on}, {self.t_off}]")

    def __call__(self, t: float) -> float:
        return self.value if self.t_on <= t < self.t_off else 0.0

    def breakpoints(self, t0: float, t1: float) -> tuple:
        return tuple(b for b in (self.t_on, self.t_off) if t0 < b < t1)


@dataclass(frozen=True)
class Sinusoidal:
    """T(t) = amplitude * sin(frequency * t + phase), angular frequency."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(self.frequency * t + self.phase)

    def breakpoints(self, t0: float, t1: float) -> tuple:
        return ()


Envelope = Union[Constant, RectPulse, Sinusoidal]


@dataclass(frozen=True, eq=False)
class ROState:
    """The seven expectation tables, each of shape (cutoff+2, cutoff+2).

    Index (n, m) runs to cutoff+1; the last ring exists only to close the
    hierarchy and stays frozen during integration.
    """

    N1: np.ndarray
    N2: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    I: np.ndarray
    F: np.ndarray
    N21: np.ndarray
    cutoff: int

    def __post_init__(self) -> None:
        size = self.cutoff + 2
        for name in TABLE_ORDER:
            if getattr(self, name).shape != (size, size):
                raise ValueError(f"table {name} must have shape {(size, size)}, "
                                 f"got {getattr(self, name).shape}")

    def pack(self) -> np.ndarray:
        return np.concatenate([getattr(self, name).reshape(-1) for name in TABLE_ORDER])

    @classmethod
    def unpack(cls, y: np.ndarray, cutoff: int) -> "ROState":
        size = cutoff + 2
        tables = y.reshape(7, size, size)
        return cls(*[tables[i].copy() for i in range(7)], cutoff=cutoff)


def default_cutoff(spec: FieldStateSpec) -> int:
    """Table order K = ceil(nbar + 6 sqrt(nbar)) + 4 for the brighter mode.

    The tables carry factorial moments, which grow with the photon-number
    tail, so K follows the distribution width. Note the alternating structure
    of the population reconstruction makes the hierarchy ill-conditioned for
    bright fields regardless of K; the closure-error estimate reports this.
    """
    nbar = max(mean_photons(spec))
    return math.ceil(nbar + 6.0 * math.sqrt(nbar)) + 4


def init_ro(spec: FieldStateSpec, cutoff: int) -> ROState:
    """Initial tables for a field spec with the atom in an energy eigenstate.

    N2 (excited) or N1 (ground) carries the field's factorial moments; D1/D2
    carry them with one extra photon-number order; I and F vanish for the
    implemented field families (photon-number diagonal or with a fixed
    number offset, atom in an eigenstate); N21 is identically zero.
    """
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    moment = moment_table(spec, cutoff + 2)
    size = cutoff + 2
    occupied = moment[:size, :size]
    zero = np.zeros((size, size))
    d1 = moment[1:size + 1, :size]
    d2 = moment[:size, 1:size + 1]
    if spec.atom_level == "e":
        n1, n2 = zero.copy(), occupied.copy()
    else:
        n1, n2 = occupied.copy(), zero.copy()
    return ROState(N1=n1, N2=n2, D1=d1.copy(), D2=d2.copy(),
                   I=zero.copy(), F=zero.copy(), N21=zero.copy(), cutoff=cutoff)


def _shift(X: np.ndarray, dn: int, dm: int) -> np.ndarray:
    """Y[n, m] = X[n+dn, m+dm], zero-padded at the edges."""
    out = np.zeros_like(X)
    src_n = slice(dn, None) if dn >= 0 else slice(None, dn)
    dst_n = slice(None, -dn) if dn > 0 else slice(-dn if dn else None, None)
    src_m = slice(dm, None) if dm >= 0 else slice(None, dm)
    dst_m = slice(None, -dm) if dm > 0 else slice(-dm if dm else None, None)
    out[dst_n, dst_m] = X[src_n, src_m]
    return out


class _Rhs:
    """Precomputed coefficient grids for the derivative evaluation."""

    def __init__(self, params: ModelParams, cutoff: int):
        size = cutoff + 2
        self.size = size
        n = np.arange(size, dtype=float)[:, None]
        m = np.arange(size, dtype=float)[None, :]
        self.n = n
        self.m = m
        self.delta = (params.alpha
                      - 2.0 * (n * params.chi1 + m * params.chi2
                               + (n + m + 1.0) * params.chi_cross))
        self.e1 = params.epsilon1
        self.e2 = params.epsilon2
        self.g2 = 2.0 * params.gamma_mod ** 2

    def __call__(self, T: float, tables: np.ndarray) -> np.ndarray:
        N1, N2, D1, D2, Iexp, Fexp, N21 = tables
        n, m = self.n, self.m
        dN1 = T * (Fexp + n * _shift(Fexp, -1, 0) + m * _shift(Fexp, 0, -1)
                   + n * m * _shift(Fexp, -1, -1))
        dN2 = -T * Fexp
        dD1 = T * ((n + 1.0) * Fexp + m * _shift(Fexp, 1, -1)
                   + m * (n + 1.0) * _shift(Fexp, 0, -1))
        dD2 = T * ((m + 1.0) * Fexp + n * _shift(Fexp, -1, 1)
                   + n * (m + 1.0) * _shift(Fexp, -1, 0))
        dI = (self.delta * Fexp - 2.0 * self.e1 * _shift(Fexp, 1, 0)
              - 2.0 * self.e2 * _shift(Fexp, 0, 1))
        up = N2 - N21
        dF = (-self.delta * Iexp + 2.0 * self.e1 * _shift(Iexp, 1, 0)
              + 2.0 * self.e2 * _shift(Iexp, 0, 1)
              + self.g2 * T * ((n + 1.0) * (m + 1.0) * up
                               + (n + 1.0) * _shift(up, 0, 1)
                               + (m + 1.0) * _shift(up, 1, 0)
                               + _shift(N2, 1, 1) - _shift(N1, 1, 1)))
        out = np.stack([dN1, dN2, dD1, dD2, dI, dF, np.zeros_like(N1)])
        out[:, -1, :] = 0.0
        out[:, :, -1] = 0.0
        return out


def rhs(t: float, state: ROState, params: ModelParams, envelope: Envelope) -> ROState:
    """Time derivative of an ROState (pure function; frozen ring stays zero)."""
    evaluator = _Rhs(params, state.cutoff)
    tables = np.stack([getattr(state, name) for name in TABLE_ORDER])
    deriv = evaluator(envelope(t), tables)
    return ROState(*[deriv[i] for i in range(7)], cutoff=state.cutoff)


def integrate_tables(state0: ROState, params: ModelParams, envelope: Envelope,
                     t_grid: Sequence[float], tol: float = 1e-9) -> np.ndarray:
    """Raw table trajectories, shape (len(t_grid), 7, size, size).

    Adaptive eighth-order Runge-Kutta with segment splits at envelope
    discontinuities; local relative error tol per step. Within each segment
    the envelope is evaluated by its one-sided limits, so the sample reported
    at a breakpoint is the state just before the switch takes effect.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-D sequence")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    size = state0.cutoff + 2
    evaluator = _Rhs(params, state0.cutoff)
    y = state0.pack()
    out = np.empty((len(t_grid), 7, size, size))
    out[0] = y.reshape(7, size, size)
    if len(t_grid) == 1:
        return out
    edges = np.unique(np.concatenate((
        [t_grid[0], t_grid[-1]],
        list(envelope.breakpoints(float(t_grid[0]), float(t_grid[-1]))))))
    atol = tol * np.maximum(1.0, np.abs(y))
    filled = 1
    for a, b in zip(edges[:-1], edges[1:]):
        inside = t_grid[(t_grid > a) & (t_grid <= b)]
        endpoint_extra = len(inside) == 0 or inside[-1] != b
        t_eval = np.append(inside, b) if endpoint_extra else inside
        # The envelope is sampled only on the open interior of the segment:
        # a stage landing exactly on a breakpoint must not see the value on
        # the far side, or the stepper chases the jump with ever smaller steps.
        lo, hi = np.nextafter(a, b), np.nextafter(b, a)

        def fun(t, y, lo=lo, hi=hi):
            T = envelope(min(max(t, lo), hi))
            return evaluator(T, y.reshape(7, size, size)).reshape(-1)

        sol = solve_ivp(fun, (a, b), y, method="DOP853", t_eval=t_eval,
                        rtol=tol, atol=atol)
        if not sol.success:
            raise HierarchyConvergenceError(f"integration failed on [{a}, {b}]: {sol.message}")
        y = sol.y[:, -1]
        kept = sol.y[:, :-1] if endpoint_extra else sol.y
        for col in kept.T:
            out[filled] = col.reshape(7, size, size)
            filled += 1
    if filled != len(t_grid):
        raise RuntimeError(f"sampled {filled} of {len(t_grid)} grid points")
    return out


def integrate(state0: ROState, params: ModelParams, envelope: Envelope,
              t_grid: Sequence[float], tol: float = 1e-9,
              estimate_closure: bool = True) -> ObservableSeries:
    """Integrate the hierarchy and derive the physical observables.

    The closure error (reported, not fatal) is the maximum excited-population
    difference against a re-run with cutoff lowered by 2.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    tables = integrate_tables(state0, params, envelope, t_grid, tol)
    i_n1, i_n2, i_d1, i_d2 = (TABLE_ORDER.index(k) for k in ("N1", "N2", "D1", "D2"))
    pop_g = tables[:, i_n1, 0, 0]
    pop_e = tables[:, i_n2, 0, 0]
    n1 = tables[:, i_d1, 0, 0]
    n2 = tables[:, i_d2, 0, 0]
    n1n2 = tables[:, i_d1, 0, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        g2 = np.where(np.abs(n1 * n2) > 1e-12, n1n2 / (n1 * n2) - 1.0, np.nan)
    charge1_0 = state0.D1[0, 0] + state0.N2[0, 0]
    charge2_0 = state0.D2[0, 0] + state0.N2[0, 0]
    closure = float("nan")
    if estimate_closure and state0.cutoff >= 3:
        lowered = _drop_cutoff(state0, state0.cutoff - 2)
        smaller = integrate_tables(lowered, params, envelope, t_grid, tol)
        closure = float(np.max(np.abs(smaller[:, i_n2, 0, 0] - pop_e)))
    return ObservableSeries(
        t=t_grid.copy(), pop_e=pop_e.copy(), pop_g=pop_g.copy(), g2_12=g2,
        n1=n1.copy(), n2=n2.copy(),
        residual_norm=pop_e + pop_g - (state0.N1[0, 0] + state0.N2[0, 0]),
        residual_charge1=n1 + pop_e - charge1_0,
        residual_charge2=n2 + pop_e - charge2_0,
        meta={"engine": "hierarchy", "cutoff": state0.cutoff, "tol": tol,
              "closure_error": closure},
    )


def _drop_cutoff(state: ROState, cutoff: int) -> ROState:
    size = cutoff + 2
    return ROState(*[getattr(state, name)[:size, :size].copy() for name in TABLE_ORDER],
                   cutoff=cutoff)
