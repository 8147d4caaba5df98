"""Acceptance gate: one test per numbered criterion.

Each test prints a one-line summary with the measured numbers before
asserting, so a failing run shows how far off it was. Tolerances and scenario
parameters are stated inline; the detector settings for the qualitative
figure checks (grid, prominence, smoothing window) are frozen here on purpose
so reruns are reproducible.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from tpjcm.cli import main
from tpjcm.hierarchy import Constant, ROState, init_ro, integrate_tables
from tpjcm.hilbert import (
    assemble_state,
    charges,
    expectation_energy,
    iter_evolve,
    ro_expectation,
)
from tpjcm.model import ModelParams, Truncation
from tpjcm.observables import detect_revivals
from tpjcm.series import (
    beta_squared,
    population_coherent,
    population_pair_coherent,
    population_squeezed,
    series_observables,
)
from tpjcm.hilbert import block_decompose
from tpjcm.states import (
    Coherent,
    FieldStateSpec,
    PairCoherent,
    SqueezedVacuum,
    amplitudes,
    default_truncation,
    factorial_moment,
    pair_xi_for_mean,
    squeezed_r_for_mean,
)
from tpjcm.stark import map_kerr_to_stark, verify_equivalence

CHI_SWEEP = (0.0, 0.5, 1.0)
MEAN = 10.0

FIG_FIELDS = {
    "fig1": Coherent(math.sqrt(MEAN), math.sqrt(MEAN)),
    "fig2": SqueezedVacuum(squeezed_r_for_mean(MEAN)),
    "fig3": PairCoherent(pair_xi_for_mean(MEAN), 0),
}


def oracle_population(field, params, t):
    trunc = default_truncation(FieldStateSpec(field, "e"))
    psi0 = assemble_state(amplitudes(field, trunc), "e")
    return np.array([ro_expectation(p, "N2", 0, 0)
                     for p in iter_evolve(psi0, params, t)])


def fig_observables(fig, chi, t):
    params = ModelParams.resonant(chi1=chi, chi2=chi)
    return series_observables(FIG_FIELDS[fig], params, t)


def test_criterion_1_block_identity():
    """beta^2 equals the squared 2x2 eigenvalue gap, 50 random parameter
    sets, all blocks with n, m <= 10, 1e-10 relative, under 5 s."""
    rng = np.random.default_rng(20260825)
    trunc = Truncation(12, 12)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        params = ModelParams.resonant(
            gamma_mod=rng.uniform(0.2, 2.0),
            chi1=rng.uniform(0.0, 2.0), chi2=rng.uniform(0.0, 2.0),
            detuning=rng.uniform(-2.0, 2.0),
            gamma_phase=rng.uniform(0.0, 2.0 * math.pi))
        for block in block_decompose(params, trunc):
            if block.matrix.shape != (2, 2):
                continue
            n, m, _ = block.states[0]
            if n > 10 or m > 10:
                continue
            gap2 = float(np.diff(np.linalg.eigvalsh(block.matrix))[0]) ** 2
            b2 = beta_squared(n, m, params)
            worst = max(worst, abs(gap2 - b2) / b2)
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max relative deviation {worst:.2e} "
          f"over 50 parameter sets in {elapsed:.2f} s")
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_criterion_2_series_oracle_coherent():
    """Coherent |alpha_i|^2 = 10, chi in {0, 0.5, 1}, 500 samples on [0, 25]:
    series population within 1e-6 of the exact block solution, under 60 s.
    The series uses the ledger-reconciled (j+1)(k+1)-weighted form."""
    t = np.linspace(0.0, 25.0, 500)
    field = FIG_FIELDS["fig1"]
    start = time.perf_counter()
    worst = 0.0
    for chi in CHI_SWEEP:
        params = ModelParams.resonant(chi1=chi, chi2=chi)
        pop = population_coherent(t, params, field.alpha1, field.alpha2)
        worst = max(worst, float(np.max(np.abs(pop - oracle_population(field, params, t)))))
    elapsed = time.perf_counter() - start
    print(f"criterion 2: max |series - oracle| {worst:.2e} in {elapsed:.1f} s")
    assert worst <= 1e-6
    assert elapsed < 60.0


def test_criterion_3_series_oracle_squeezed_and_pair():
    """Same gate for the squeezed vacuum (sinh^2 r = 10) and the pair
    coherent field (mean 10, q = 0)."""
    t = np.linspace(0.0, 25.0, 500)
    start = time.perf_counter()
    worst = {}
    for chi in CHI_SWEEP:
        params = ModelParams.resonant(chi1=chi, chi2=chi)
        sq = FIG_FIELDS["fig2"]
        dev = np.max(np.abs(population_squeezed(t, params, sq.r)
                            - oracle_population(sq, params, t)))
        worst["squeezed"] = max(worst.get("squeezed", 0.0), float(dev))
        pc = FIG_FIELDS["fig3"]
        dev = np.max(np.abs(population_pair_coherent(t, params, pc.xi, q=pc.q)
                            - oracle_population(pc, params, t)))
        worst["pair"] = max(worst.get("pair", 0.0), float(dev))
    elapsed = time.perf_counter() - start
    print(f"criterion 3: max |series - oracle| squeezed {worst['squeezed']:.2e}, "
          f"pair {worst['pair']:.2e} in {elapsed:.1f} s")
    assert worst["squeezed"] <= 1e-6
    assert worst["pair"] <= 1e-6
    assert elapsed < 60.0


def test_criterion_4_hierarchy_tracks_oracle():
    """Relevant-operator hierarchy, coherent <n> = 1, constant envelope,
    cutoff 25, tol 1e-9 on [0, 10]: population within 1e-4 of the oracle,
    N21 constant to 1e-9, N1(0,0) + N2(0,0) = 1 to 1e-8."""
    field = Coherent(1.0, 1.0)
    spec = FieldStateSpec(field, "e")
    params = ModelParams.resonant()
    t = np.linspace(0.0, 10.0, 201)
    tables = integrate_tables(init_ro(spec, cutoff=25), params, Constant(1.0),
                              t, tol=1e-9)
    pop = tables[:, 1, 0, 0]  # N2 table, entry (0, 0)
    dev = float(np.max(np.abs(pop - oracle_population(field, params, t))))
    n21_drift = float(np.max(np.abs(tables[:, 6])))
    closure = float(np.max(np.abs(tables[:, 0, 0, 0] + tables[:, 1, 0, 0] - 1.0)))
    print(f"criterion 4: population deviation {dev:.2e}, N21 drift {n21_drift:.2e}, "
          f"population closure {closure:.2e}")
    assert dev <= 1e-4
    assert n21_drift <= 1e-9
    assert closure <= 1e-8


def test_criterion_5_kerr_stark_equivalence():
    """Matched Stark map at chi in {0.25, 0.5, 1}, gauge eta2 = 0: every
    relevant-operator trajectory with n, m <= 3 within 1e-10 over [0, 25];
    perturbing eta1 by 0.1 must push the deviation past 1e-3 by t = 10."""
    spec = FieldStateSpec(Coherent(1.0, 1.0), "e")
    t = np.linspace(0.0, 25.0, 251)
    worst_matched = 0.0
    worst_control = math.inf
    for chi in (0.25, 0.5, 1.0):
        params = ModelParams.resonant(chi1=chi, chi2=chi)
        stark = map_kerr_to_stark(params, gauge_eta2=0.0)
        matched = verify_equivalence(params, stark, spec, t, nm_max=3)
        worst_matched = max(worst_matched, matched.max_deviation)
        control = verify_equivalence(
            params, dataclasses.replace(stark, eta1=stark.eta1 + 0.1),
            spec, t, nm_max=3)
        worst_control = min(worst_control, control.deviation_until(10.0))
    print(f"criterion 5: matched deviation {worst_matched:.2e}, "
          f"weakest control deviation {worst_control:.2e}")
    assert worst_matched <= 1e-10
    assert worst_control > 1e-3


def test_criterion_6_conservation_suite():
    """Norm (1e-12), energy (1e-10 relative), and both excitation charges
    (1e-10) along oracle runs covering all three field families and the
    chi sweep."""
    t = np.linspace(0.0, 25.0, 26)
    worst = {"norm": 0.0, "energy": 0.0, "charge": 0.0}
    for field in FIG_FIELDS.values():
        trunc = default_truncation(FieldStateSpec(field, "e"))
        psi0 = assemble_state(amplitudes(field, trunc), "e")
        for chi in CHI_SWEEP:
            params = ModelParams.resonant(chi1=chi, chi2=chi)
            e0 = expectation_energy(psi0, params)
            q0 = charges(psi0)
            for psi in iter_evolve(psi0, params, t):
                worst["norm"] = max(worst["norm"], abs(psi.norm() - 1.0))
                worst["energy"] = max(
                    worst["energy"],
                    abs(expectation_energy(psi, params) - e0) / max(abs(e0), 1.0))
                qt = charges(psi)
                worst["charge"] = max(worst["charge"],
                                      abs(qt[0] - q0[0]), abs(qt[1] - q0[1]))
    print(f"criterion 6: norm drift {worst['norm']:.2e}, relative energy drift "
          f"{worst['energy']:.2e}, charge drift {worst['charge']:.2e}")
    assert worst["norm"] <= 1e-12
    assert worst["energy"] <= 1e-10
    assert worst["charge"] <= 1e-10


def test_criterion_7_figure_regime_properties():
    """The four qualitative properties of the three figure regimes.

    Detector settings (frozen): 8001-point grid on [0, 25]; bare peak
    detection with prominence 0.05 for the squeezed regime, whose Kerr
    revivals are faster than the collapse-time smoothing window; envelope
    smoothing with window 2/(|gamma| sqrt(nbar)) and prominence 0.02 for the
    pair regime, where fractional revivals must merge into the main peaks.

    (c) is asserted in its ledger-reconciled form: the pair field carries a
    fixed photon-number difference, which forces g2_12 >= 0 at every time, so
    the chi attenuation is measured on the dip below g2(0) instead of the
    dip below zero (the coherent regime does dip below zero and is asserted
    literally).
    """
    t = np.linspace(0.0, 25.0, 8001)
    window = 2.0 / math.sqrt(MEAN)

    # (a) squeezed regime at chi = 1: regular revival spacing
    pop2 = {chi: fig_observables("fig2", chi, t) for chi in CHI_SWEEP}
    peaks = detect_revivals(t, pop2[1.0]["pop_e"], prominence=0.05)
    spacings = np.diff([p[0] for p in peaks])
    cv = float(np.std(spacings) / np.mean(spacings))
    print(f"criterion 7a: {len(peaks)} revivals, spacing CV {cv:.3f}")
    assert cv < 0.1

    # (b) pair regime: every revival recovers past 0.8 and recovery does not
    # degrade as chi grows (chi = 0 revives exactly, so growth is measured
    # from chi = 0.5 up)
    heights = {}
    for chi in CHI_SWEEP:
        obs = fig_observables("fig3", chi, t)
        found = detect_revivals(t, obs["pop_e"], window=window, prominence=0.02)
        heights[chi] = np.array([h for _, h in found])
        assert len(found) > 0
    print("criterion 7b: min/mean heights "
          + ", ".join(f"chi={chi:g}: {heights[chi].min():.4f}/{heights[chi].mean():.4f}"
                      for chi in CHI_SWEEP))
    for chi in CHI_SWEEP:
        assert np.all(heights[chi] > 0.8)
    assert heights[1.0].min() >= heights[0.5].min()
    assert heights[1.0].mean() >= heights[0.5].mean()

    # (c) coherent regime: anticorrelation dip below zero, attenuated by chi
    ming2 = {}
    for chi in CHI_SWEEP:
        obs = fig_observables("fig1", chi, t)
        ming2[chi] = float(np.min(obs["g2_12"]))
    print("criterion 7c (coherent): min g2 "
          + ", ".join(f"chi={chi:g}: {ming2[chi]:.2e}" for chi in CHI_SWEEP))
    assert ming2[0.0] < 0.0
    assert abs(ming2[0.0]) > abs(ming2[0.5]) > abs(ming2[1.0])

    # (c) pair regime: nonnegative throughout; the dip below g2(0) shrinks
    dips = {}
    for chi in CHI_SWEEP:
        obs = fig_observables("fig3", chi, t)
        g2 = obs["g2_12"]
        assert float(np.min(g2)) >= -1e-12
        dips[chi] = float(np.min(g2 - g2[0]))
    print("criterion 7c (pair): dip below g2(0) "
          + ", ".join(f"chi={chi:g}: {dips[chi]:.2e}" for chi in CHI_SWEEP))
    assert dips[0.0] < 0.0
    assert abs(dips[0.0]) > abs(dips[0.5]) > abs(dips[1.0])

    # (d) squeezed regime: intermode coherence recovers at population peaks
    worst = 0.0
    for chi in CHI_SWEEP:
        obs = pop2[chi]
        g2 = obs["g2_12"]
        for t_peak, _ in detect_revivals(t, obs["pop_e"], prominence=0.05):
            i = int(np.argmin(np.abs(t - t_peak)))
            worst = max(worst, abs(g2[i] - g2[0]))
    bar = 0.05 * abs(pop2[0.0]["g2_12"][0])
    print(f"criterion 7d: max |g2(peak) - g2(0)| {worst:.4f} vs allowance {bar:.4f}")
    assert worst < bar


def test_criterion_8_g2_spot_checks():
    """Coherent fields factorize, so g2(0) is exactly zero; the two-mode
    squeezed vacuum at mean 10 gives 1 + 1/10 = 1.1, cross-checked by a
    brute-force sum over the geometric photon-number distribution."""
    coh = FIG_FIELDS["fig1"]
    g2_coherent = (factorial_moment(coh, 1, 1)
                   / (factorial_moment(coh, 1, 0) * factorial_moment(coh, 0, 1)) - 1.0)
    assert g2_coherent == 0.0

    sq = FIG_FIELDS["fig2"]
    g2_squeezed = (factorial_moment(sq, 1, 1)
                   / (factorial_moment(sq, 1, 0) * factorial_moment(sq, 0, 1)) - 1.0)
    lam = math.tanh(sq.r) ** 2
    k = np.arange(4000)
    p = (1.0 - lam) * lam ** k
    brute = float(np.sum(k * k * p) / np.sum(k * p) ** 2 - 1.0)
    print(f"criterion 8: coherent g2(0) = {g2_coherent}, squeezed g2(0) = "
          f"{g2_squeezed:.12f} (brute force {brute:.12f})")
    assert g2_squeezed == pytest.approx(1.1, abs=1e-9)
    assert g2_squeezed == pytest.approx(brute, abs=1e-9)


def test_criterion_9_preset_determinism(tmp_path):
    """Repeated preset runs produce byte-identical CSV files."""
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    for out in (dir_a, dir_b):
        assert main(["presets", "fig1", "--out-dir", str(out)]) == 0
    names = sorted(p.name for p in dir_a.iterdir())
    assert sorted(p.name for p in dir_b.iterdir()) == names
    assert any(name.endswith(".csv") for name in names)
    for name in names:
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes(), name
    print(f"criterion 9: {len(names)} files byte-identical across two runs")
