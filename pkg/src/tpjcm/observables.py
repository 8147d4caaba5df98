"""Derived observables, revival detection, and the CSV output format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks

from .hilbert import ro_expectation

CSV_COLUMNS = ("t", "pop_e", "pop_g", "g2_12", "n1", "n2",
               "residual_norm", "residual_charge1", "residual_charge2")


@dataclass(eq=False)
class ObservableSeries:
    """Time series of the standard observables plus conservation residuals.

    residual_norm is pop_e + pop_g minus its initial value; the charge
    residuals track n_i + pop_e, which commutes with the full Hamiltonian.
    """

    t: np.ndarray
    pop_e: np.ndarray
    pop_g: np.ndarray
    g2_12: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    residual_norm: np.ndarray
    residual_charge1: np.ndarray
    residual_charge2: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.t)
        for name in CSV_COLUMNS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"column {name} must have shape ({n},), got {arr.shape}")
            setattr(self, name, arr)

    def __len__(self) -> int:
        return len(self.t)

    def rows(self) -> Iterator[Tuple[float, ...]]:
        cols = [getattr(self, name) for name in CSV_COLUMNS]
        for i in range(len(self)):
            yield tuple(float(c[i]) for c in cols)


def g2_intermodes(d1_01: np.ndarray, d1_00: np.ndarray, d2_00: np.ndarray) -> np.ndarray:
    """Intermode correlation <n1 n2> / (<n1><n2>) - 1 from the moment tables.

    Negative values flag nonclassical anticorrelation of the two modes.
    Returns NaN where either mean occupation is numerically zero.
    """
    d1_01 = np.asarray(d1_01, dtype=float)
    denom = np.asarray(d1_00, dtype=float) * np.asarray(d2_00, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(denom) > 1e-12, d1_01 / denom - 1.0, np.nan)


def detect_revivals(t: Sequence[float], pop_e: Sequence[float],
                    window: Optional[float] = None,
                    prominence: float = 0.02) -> List[Tuple[float, float]]:
    """Locate population revivals as (t_peak, height) pairs, sorted in time.

    With window=None every local maximum of the raw series with the given
    prominence counts (suitable for clean Rabi oscillations). For
    collapse-and-revival dynamics pass a window of order the collapse time
    2/(|gamma| sqrt(n_bar)): the series is rectified about its mean and
    smoothed over that window, peaks of the smoothed envelope mark revival
    centres, and the reported height is the maximum raw population within
    one window of each centre.
    """
    t = np.asarray(t, dtype=float)
    pop = np.asarray(pop_e, dtype=float)
    if t.shape != pop.shape or t.ndim != 1:
        raise ValueError("t and pop_e must be 1-D arrays of equal length")
    if len(t) < 3:
        return []
    if window is None:
        idx, _ = find_peaks(pop, prominence=prominence)
        return [(float(t[i]), float(pop[i])) for i in idx]
    dt = float(np.median(np.diff(t)))
    half = max(1, int(round(window / dt)))
    kernel = np.ones(2 * half + 1) / (2 * half + 1)
    # upper excursions only: rectifying with abs() would also mark the troughs
    rectified = np.clip(pop - pop.mean(), 0.0, None)
    envelope = np.convolve(rectified, kernel, mode="same")
    idx, _ = find_peaks(envelope, prominence=prominence * max(1e-12, envelope.max()),
                        distance=2 * half)
    out = []
    for i in idx:
        lo = max(0, i - half)
        hi = min(len(pop), i + half + 1)
        j = lo + int(np.argmax(pop[lo:hi]))
        out.append((float(t[i]), float(pop[j])))
    return out


def from_states(states: Iterable, t_grid: Sequence[float],
                meta: Optional[dict] = None) -> ObservableSeries:
    """Accumulate the standard observables from a state-vector trajectory.

    Works with a generator, so a long trajectory in a large Fock space never
    needs to be held in memory all at once.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    n = len(t_grid)
    cols = {name: np.empty(n) for name in CSV_COLUMNS if name != "t"}
    count = 0
    for i, psi in enumerate(states):
        if i >= n:
            raise ValueError("more states than grid points")
        pg, pe = psi.populations()
        n1 = ro_expectation(psi, "D1", 0, 0)
        n2 = ro_expectation(psi, "D2", 0, 0)
        n1n2 = ro_expectation(psi, "D1", 0, 1)
        if i == 0:
            norm0, c1_0, c2_0 = pg + pe, n1 + pe, n2 + pe
        cols["pop_e"][i] = pe
        cols["pop_g"][i] = pg
        cols["n1"][i] = n1
        cols["n2"][i] = n2
        cols["g2_12"][i] = g2_intermodes(n1n2, n1, n2)
        cols["residual_norm"][i] = (pg + pe) - norm0
        cols["residual_charge1"][i] = (n1 + pe) - c1_0
        cols["residual_charge2"][i] = (n2 + pe) - c2_0
        count += 1
    if count != n:
        raise ValueError(f"got {count} states for {n} grid points")
    return ObservableSeries(t=t_grid.copy(), meta=dict(meta or {}), **cols)


def write_csv(series: ObservableSeries, path: Union[str, Path],
              sidecar: bool = False) -> Path:
    """Write the series in the fixed column order.

    Floats are rendered with repr, which round-trips exactly, so repeated
    runs of the same deterministic computation produce identical bytes.
    With sidecar=True the meta dict lands next to the CSV as .meta.json.
    """
    path = Path(path)
    lines = [",".join(CSV_COLUMNS)]
    for row in series.rows():
        lines.append(",".join(repr(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    if sidecar:
        meta_path = path.with_suffix(".meta.json")
        meta_path.write_text(json.dumps(series.meta, sort_keys=True, indent=2,
                                        default=repr) + "\n", newline="\n")
    return path


def read_csv(path: Union[str, Path]) -> ObservableSeries:
    """Inverse of write_csv (meta is not recovered)."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected header {header}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        data = data.reshape(0, len(CSV_COLUMNS))
    return ObservableSeries(**{name: data[:, i] for i, name in enumerate(CSV_COLUMNS)})
