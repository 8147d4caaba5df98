"""Command-line interface: config resolution, outputs, and exit codes."""

import numpy as np
import pytest

from tpjcm.cli import EXIT_CONVERGENCE, EXIT_OK, EXIT_USAGE, main
from tpjcm.observables import read_csv


def run(*argv):
    return main(list(argv))


def test_simulate_writes_readable_csv(tmp_path):
    out = tmp_path / "run.csv"
    code = run("simulate", "--engine", "series", "--mean-photons", "1",
               "--chi", "0.5", "--tmax", "5", "--samples", "11",
               "--out", str(out))
    assert code == EXIT_OK
    series = read_csv(out)
    assert len(series) == 11
    assert series.t[0] == 0.0 and series.t[-1] == 5.0
    assert series.pop_e[0] == pytest.approx(1.0)
    assert (tmp_path / "run.meta.json").exists()


def test_engines_write_comparable_series(tmp_path):
    # explicit cutoff: the hierarchy's default (11 at mean 1) leaves a
    # frozen-ring closure error near 2e-4, too coarse for this comparison
    paths = {}
    for engine in ("oracle", "series", "hierarchy"):
        paths[engine] = tmp_path / f"{engine}.csv"
        code = run("simulate", "--engine", engine, "--mean-photons", "1",
                   "--cutoff", "16", "--tmax", "6", "--samples", "13",
                   "--out", str(paths[engine]))
        assert code == EXIT_OK
    oracle = read_csv(paths["oracle"])
    for engine in ("series", "hierarchy"):
        other = read_csv(paths[engine])
        assert np.max(np.abs(oracle.pop_e - other.pop_e)) < 1e-8


def test_repeated_runs_are_byte_identical(tmp_path):
    args = ("simulate", "--engine", "oracle", "--field", "squeezed",
            "--mean-photons", "2", "--chi", "1", "--tmax", "4",
            "--samples", "21")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(*args, "--out", str(a)) == EXIT_OK
    assert run(*args, "--out", str(b)) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_out_dir_env_sets_default_location(tmp_path, monkeypatch):
    monkeypatch.setenv("TPJCM_OUT_DIR", str(tmp_path))
    code = run("simulate", "--engine", "series", "--mean-photons", "1",
               "--tmax", "3", "--samples", "7")
    assert code == EXIT_OK
    assert (tmp_path / "tpjcm_series_coherent.csv").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nengine = series\nfield = coherent\n"
                   "mean_photons = 1\nchi = 0.5\ntmax = 4\nsamples = 9\n")
    out = tmp_path / "from_config.csv"
    assert run("simulate", "--config", str(cfg), "--out", str(out)) == EXIT_OK
    base = read_csv(out)
    # flag wins over the file: different chi changes the trajectory
    out2 = tmp_path / "overridden.csv"
    assert run("simulate", "--config", str(cfg), "--chi", "0",
               "--out", str(out2)) == EXIT_OK
    over = read_csv(out2)
    assert np.max(np.abs(base.pop_e - over.pop_e)) > 1e-3


def test_missing_config_is_usage_error(tmp_path):
    assert run("simulate", "--config", str(tmp_path / "none.ini")) == EXIT_USAGE


def test_bad_sample_count_is_usage_error(tmp_path):
    code = run("simulate", "--samples", "1", "--out", str(tmp_path / "x.csv"))
    assert code == EXIT_USAGE


def test_series_engine_rejects_ground_start(tmp_path):
    code = run("simulate", "--engine", "series", "--atom", "g",
               "--out", str(tmp_path / "x.csv"))
    assert code == EXIT_USAGE


def test_undersized_cutoff_is_convergence_error(tmp_path):
    code = run("simulate", "--engine", "series", "--mean-photons", "10",
               "--cutoff", "5", "--tmax", "2", "--samples", "5",
               "--out", str(tmp_path / "x.csv"))
    assert code == EXIT_CONVERGENCE


def test_compare_engines_agree(tmp_path, capsys):
    code = run("compare", "--engines", "oracle,series", "--mean-photons", "1",
               "--chi", "0.5", "--tmax", "5", "--samples", "11",
               "--out", str(tmp_path / "dev.csv"))
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "pop_e" in text
    assert (tmp_path / "dev.csv").exists()


def test_compare_rejects_unknown_engine():
    assert run("compare", "--engines", "oracle,magic") == EXIT_USAGE


def test_sweep_writes_one_file_per_value(tmp_path):
    code = run("sweep", "--param", "chi", "--values", "0,0.5,1",
               "--engine", "series", "--mean-photons", "1", "--tmax", "3",
               "--samples", "7", "--prefix", "scan",
               "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    names = sorted(p.name for p in tmp_path.glob("scan_*.csv"))
    assert names == ["scan_chi0.5.csv", "scan_chi0.csv", "scan_chi1.csv"]
    for name in names:
        assert len(read_csv(tmp_path / name)) == 7


def test_sweep_detuning_changes_output(tmp_path):
    code = run("sweep", "--param", "detuning", "--values", "0,2",
               "--engine", "series", "--mean-photons", "1", "--tmax", "4",
               "--samples", "9", "--prefix", "det", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    a = read_csv(tmp_path / "det_detuning0.csv")
    b = read_csv(tmp_path / "det_detuning2.csv")
    assert np.max(np.abs(a.pop_e - b.pop_e)) > 1e-2


def test_presets_listing(capsys):
    assert run("presets") == EXIT_OK
    text = capsys.readouterr().out
    for name in ("fig1", "fig2", "fig3"):
        assert name in text


def test_preset_run_sweeps_chi(tmp_path):
    code = run("presets", "fig1", "--engine", "series", "--samples", "9",
               "--tmax", "3", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    for chi in ("0", "0.5", "1"):
        series = read_csv(tmp_path / f"fig1_chi{chi}.csv")
        assert len(series) == 9
        assert series.n1[0] == pytest.approx(10.0, rel=1e-9)
