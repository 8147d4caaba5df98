"""Command-line front end for the three engines.

All energies and frequencies are quoted in units of the coupling magnitude
|gamma|, time in 1/|gamma|. Scenario settings come from an INI file ([run]
section) and/or flags; flags override the file. Output location defaults to
the directory named by the TPJCM_OUT_DIR environment variable (falling back
to the current directory).

Exit codes: 0 success, 2 invalid configuration, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .hierarchy import (Constant, Envelope, HierarchyConvergenceError, RectPulse,
                        Sinusoidal, default_cutoff, init_ro, integrate)
from .hilbert import TruncationLeakageError, assemble_state, iter_evolve
from .model import ModelParams, Truncation
from .observables import ObservableSeries, from_states, write_csv
from .series import SeriesConvergenceError, series_observables
from .states import (Coherent, FieldStateSpec, PairCoherent, SqueezedVacuum,
                     amplitudes, default_truncation, pair_xi_for_mean,
                     squeezed_r_for_mean)

OUT_DIR_ENV = "TPJCM_OUT_DIR"
ENGINES = ("oracle", "series", "hierarchy")
FIELDS = ("coherent", "squeezed", "pair")
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3

_DEFAULTS = {
    "engine": "oracle", "field": "coherent", "mean_photons": 10.0, "atom": "e",
    "chi1": 0.0, "chi2": 0.0, "detuning": 0.0, "gamma": 1.0, "pair_charge": 0,
    "t_start": 0.0, "tmax": 25.0, "samples": 501, "cutoff": None, "tol": 1e-9,
    "envelope": "constant", "envelope_value": 1.0, "t_on": 0.0, "t_off": 1.0,
    "envelope_frequency": 1.0, "envelope_phase": 0.0,
}
_INT_KEYS = {"pair_charge", "samples", "cutoff"}
_STR_KEYS = {"engine", "field", "atom", "envelope"}

PRESETS = {
    "fig1": {"field": "coherent", "mean_photons": 10.0},
    "fig2": {"field": "squeezed", "mean_photons": 10.0},
    "fig3": {"field": "pair", "mean_photons": 10.0, "pair_charge": 0},
}
PRESET_CHI = (0.0, 0.5, 1.0)


def _default_field_spec() -> FieldStateSpec:
    return FieldStateSpec(Coherent(math.sqrt(10.0), math.sqrt(10.0)), "e")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved scenario: engine, physics, grid, and output location."""

    engine: str = "oracle"
    params: ModelParams = dc_field(default_factory=ModelParams.resonant)
    field_spec: FieldStateSpec = dc_field(default_factory=_default_field_spec)
    envelope: Envelope = Constant(1.0)
    t_start: float = 0.0
    t_end: float = 25.0
    samples: int = 501
    cutoff: Optional[int] = None
    tol: float = 1e-9
    out: Optional[Path] = None

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if not self.t_end > self.t_start:
            raise ValueError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.cutoff is not None and self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.engine in ("oracle", "series") and not isinstance(self.envelope, Constant):
            raise ValueError(f"engine {self.engine!r} supports only a constant envelope; "
                             "use engine=hierarchy for pulses")
        if self.engine == "series":
            if self.field_spec.atom_level != "e":
                raise ValueError("the series engine covers the atom starting excited")
            if self.envelope.value == 0.0:
                raise ValueError("series engine needs a nonzero envelope value")

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.samples)


def _field_family(spec: FieldStateSpec) -> str:
    return {Coherent: "coherent", SqueezedVacuum: "squeezed",
            PairCoherent: "pair"}[type(spec.field)]


def _base_meta(config: RunConfig) -> dict:
    return {
        "engine": config.engine,
        "field": _field_family(config.field_spec),
        "field_spec": dataclasses.asdict(config.field_spec),
        "params": dataclasses.asdict(config.params),
        "envelope": {"kind": type(config.envelope).__name__,
                     **dataclasses.asdict(config.envelope)},
        "t_start": config.t_start, "t_end": config.t_end,
        "samples": config.samples, "tol": config.tol,
    }


def compute_series(config: RunConfig) -> ObservableSeries:
    """Dispatch a validated RunConfig to its engine."""
    config.validate()
    t = config.t_grid()
    if config.engine == "oracle":
        if config.cutoff is not None:
            trunc = Truncation(config.cutoff, config.cutoff)
        else:
            trunc = default_truncation(config.field_spec)
        psi0 = assemble_state(amplitudes(config.field_spec, trunc),
                              config.field_spec.atom_level)
        states = iter_evolve(psi0, config.params, t,
                             envelope_value=config.envelope.value)
        series = from_states(states, t)
        series.meta["truncation"] = (trunc.nmax1, trunc.nmax2)
    elif config.engine == "series":
        params = config.params
        scale = abs(config.envelope.value)
        if scale != 1.0:
            params = dataclasses.replace(params, gamma_mod=params.gamma_mod * scale)
        data = series_observables(config.field_spec, params, t, K=config.cutoff)
        series = ObservableSeries(
            t=t, pop_e=data["pop_e"], pop_g=data["pop_g"], g2_12=data["g2_12"],
            n1=data["n1"], n2=data["n2"],
            residual_norm=data["pop_e"] + data["pop_g"]
                          - (data["pop_e"][0] + data["pop_g"][0]),
            residual_charge1=data["n1"] + data["pop_e"]
                             - (data["n1"][0] + data["pop_e"][0]),
            residual_charge2=data["n2"] + data["pop_e"]
                             - (data["n2"][0] + data["pop_e"][0]))
    else:
        cutoff = (config.cutoff if config.cutoff is not None
                  else default_cutoff(config.field_spec))
        state0 = init_ro(config.field_spec, cutoff)
        series = integrate(state0, config.params, config.envelope, t, tol=config.tol)
    series.meta.update(_base_meta(config))
    return series


def _out_dir(explicit: Optional[str]) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def _resolve_out(config: RunConfig) -> Path:
    if config.out is not None:
        return Path(config.out)
    name = f"tpjcm_{config.engine}_{_field_family(config.field_spec)}.csv"
    return _out_dir(None) / name


def _print_summary(series: ObservableSeries, path: Optional[Path]) -> None:
    print(f"engine: {series.meta.get('engine', '?')}  samples: {len(series)}  "
          f"t: [{series.t[0]:g}, {series.t[-1]:g}]")
    print(f"max |residual_norm|:    {np.max(np.abs(series.residual_norm)):.3e}")
    print(f"max |residual_charge1|: {np.max(np.abs(series.residual_charge1)):.3e}")
    print(f"max |residual_charge2|: {np.max(np.abs(series.residual_charge2)):.3e}")
    closure = series.meta.get("closure_error")
    if closure is not None and not (isinstance(closure, float) and math.isnan(closure)):
        print(f"closure error estimate: {closure:.3e}")
    if path is not None:
        print(f"wrote: {path}")


def _coerce(key: str, raw: str):
    if key in _STR_KEYS:
        return raw.strip()
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def _resolve_settings(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags."""
    resolved = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(config_path)
        if not read:
            raise ValueError(f"cannot read config file {config_path}")
        if not parser.has_section("run"):
            raise ValueError(f"config file {config_path} has no [run] section")
        for key, raw in parser.items("run"):
            if key == "chi":
                value = _coerce("chi1", raw)
                resolved["chi1"] = resolved["chi2"] = value
                continue
            if key not in _DEFAULTS:
                raise ValueError(f"unknown config key {key!r}")
            resolved[key] = _coerce(key, raw)
    if getattr(args, "chi", None) is not None:
        resolved["chi1"] = resolved["chi2"] = args.chi
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _build_envelope(resolved: dict) -> Envelope:
    kind = resolved["envelope"]
    if kind == "constant":
        return Constant(resolved["envelope_value"])
    if kind == "rect":
        return RectPulse(resolved["envelope_value"], resolved["t_on"], resolved["t_off"])
    if kind == "sin":
        return Sinusoidal(resolved["envelope_value"], resolved["envelope_frequency"],
                          resolved["envelope_phase"])
    raise ValueError(f"envelope must be constant, rect, or sin, got {kind!r}")


def _build_field(resolved: dict) -> FieldStateSpec:
    family = resolved["field"]
    nbar = resolved["mean_photons"]
    if nbar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {nbar}")
    if family == "coherent":
        field = Coherent(math.sqrt(nbar), math.sqrt(nbar))
    elif family == "squeezed":
        field = SqueezedVacuum(squeezed_r_for_mean(nbar))
    elif family == "pair":
        field = PairCoherent(pair_xi_for_mean(nbar, resolved["pair_charge"]),
                             resolved["pair_charge"])
    else:
        raise ValueError(f"field must be one of {FIELDS}, got {family!r}")
    return FieldStateSpec(field, resolved["atom"])


def _build_config(resolved: dict, out: Optional[Path] = None) -> RunConfig:
    params = ModelParams.resonant(gamma_mod=resolved["gamma"],
                                  chi1=resolved["chi1"], chi2=resolved["chi2"],
                                  detuning=resolved["detuning"])
    config = RunConfig(engine=resolved["engine"], params=params,
                       field_spec=_build_field(resolved),
                       envelope=_build_envelope(resolved),
                       t_start=resolved["t_start"], t_end=resolved["tmax"],
                       samples=resolved["samples"], cutoff=resolved["cutoff"],
                       tol=resolved["tol"], out=out)
    config.validate()
    return config


def _scenario_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, metavar="FILE",
                   help="INI file with a [run] section; flags override its values")
    p.add_argument("--engine", choices=ENGINES, help="which implementation runs the scenario")
    p.add_argument("--field", choices=FIELDS, help="initial field family")
    p.add_argument("--mean-photons", dest="mean_photons", type=float,
                   help="target mean photon number per mode (calibrates the field)")
    p.add_argument("--atom", choices=("e", "g"), help="initial atomic level")
    p.add_argument("--chi", type=float, help="set both Kerr susceptibilities at once")
    p.add_argument("--chi1", type=float, help="Kerr susceptibility of mode 1")
    p.add_argument("--chi2", type=float, help="Kerr susceptibility of mode 2")
    p.add_argument("--detuning", type=float, help="two-photon detuning alpha")
    p.add_argument("--gamma", type=float, help="coupling magnitude |gamma|")
    p.add_argument("--pair-charge", dest="pair_charge", type=int,
                   help="photon-number offset q of the pair field")
    p.add_argument("--t-start", dest="t_start", type=float, help="first sample time")
    p.add_argument("--tmax", type=float, help="last sample time")
    p.add_argument("--samples", type=int, help="number of grid points")
    p.add_argument("--cutoff", type=int,
                   help="per-mode Fock cutoff (oracle) or table order (series, hierarchy)")
    p.add_argument("--tol", type=float, help="hierarchy integrator tolerance")
    p.add_argument("--envelope", choices=("constant", "rect", "sin"),
                   help="coupling envelope T(t); non-constant needs the hierarchy engine")
    p.add_argument("--envelope-value", dest="envelope_value", type=float,
                   help="envelope value (constant/rect) or amplitude (sin)")
    p.add_argument("--t-on", dest="t_on", type=float, help="rect pulse switch-on time")
    p.add_argument("--t-off", dest="t_off", type=float, help="rect pulse switch-off time")
    p.add_argument("--envelope-frequency", dest="envelope_frequency", type=float,
                   help="sin envelope angular frequency")
    p.add_argument("--envelope-phase", dest="envelope_phase", type=float,
                   help="sin envelope phase")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _build_config(_resolve_settings(args),
                           out=Path(args.out) if args.out else None)
    series = compute_series(config)
    path = _resolve_out(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(series, path, sidecar=True)
    _print_summary(series, path)
    return EXIT_OK


_COMPARE_COLUMNS = ("pop_e", "pop_g", "n1", "n2", "g2_12")


def cmd_compare(args: argparse.Namespace) -> int:
    engines = tuple(e.strip() for e in args.engines.split(","))
    if len(engines) != 2 or any(e not in ENGINES for e in engines):
        raise ValueError(f"--engines wants two of {ENGINES}, got {args.engines!r}")
    resolved = _resolve_settings(args)
    runs = []
    for engine in engines:
        settings = dict(resolved)
        settings["engine"] = engine
        runs.append(compute_series(_build_config(settings)))
    print(f"comparing {engines[0]} vs {engines[1]} over {len(runs[0])} samples")
    lines = []
    for name in _COMPARE_COLUMNS:
        diff = np.abs(getattr(runs[0], name) - getattr(runs[1], name))
        worst = float(np.nanmax(diff)) if np.any(np.isfinite(diff)) else float("nan")
        mean = float(np.nanmean(diff)) if np.any(np.isfinite(diff)) else float("nan")
        lines.append((name, worst, mean))
        print(f"  {name:8s} max {worst:.3e}  mean {mean:.3e}")
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = ["observable,max_abs_dev,mean_abs_dev"]
        rows += [f"{n},{repr(w)},{repr(m)}" for n, w, m in lines]
        path.write_text("\n".join(rows) + "\n", newline="\n")
        print(f"wrote: {path}")
    return EXIT_OK


_SWEEPABLE = ("chi", "chi1", "chi2", "detuning", "gamma", "mean-photons")


def _format_value(v: float) -> str:
    return f"{v:g}"


def _run_point(config: RunConfig) -> dict:
    series = compute_series(config)
    write_csv(series, config.out, sidecar=True)
    return {"out": str(config.out),
            "residual_norm": float(np.max(np.abs(series.residual_norm))),
            "closure_error": series.meta.get("closure_error")}


def _run_points(configs: Sequence[RunConfig]) -> list:
    if len(configs) == 1:
        return [_run_point(configs[0])]
    workers = min(len(configs), os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, configs))


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.param not in _SWEEPABLE:
        raise ValueError(f"--param must be one of {_SWEEPABLE}, got {args.param!r}")
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ValueError("--values is empty")
    resolved = _resolve_settings(args)
    out_dir = _out_dir(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    key = args.param.replace("-", "_")
    configs = []
    for v in values:
        settings = dict(resolved)
        if args.param == "chi":
            settings["chi1"] = settings["chi2"] = v
        else:
            settings[key] = v
        name = f"{args.prefix}_{key}{_format_value(v)}.csv"
        configs.append(_build_config(settings, out=out_dir / name))
    for v, result in zip(values, _run_points(configs)):
        print(f"{key}={_format_value(v)}: wrote {result['out']} "
              f"(max |residual_norm| {result['residual_norm']:.3e})")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    if args.name is None:
        for name, settings in PRESETS.items():
            print(f"{name}: {settings['field']} field, mean photons "
                  f"{settings['mean_photons']:g}, atom starts excited, "
                  f"chi sweep {PRESET_CHI}")
        return EXIT_OK
    resolved = dict(_DEFAULTS)
    resolved.update(PRESETS[args.name])
    if args.engine is not None:
        resolved["engine"] = args.engine
    if args.samples is not None:
        resolved["samples"] = args.samples
    else:
        resolved["samples"] = 2001
    if args.tmax is not None:
        resolved["tmax"] = args.tmax
    if args.cutoff is not None:
        resolved["cutoff"] = args.cutoff
    out_dir = _out_dir(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = []
    for chi in PRESET_CHI:
        settings = dict(resolved)
        settings["chi1"] = settings["chi2"] = chi
        name = f"{args.name}_chi{_format_value(chi)}.csv"
        configs.append(_build_config(settings, out=out_dir / name))
    for chi, result in zip(PRESET_CHI, _run_points(configs)):
        print(f"chi={_format_value(chi)}: wrote {result['out']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tpjcm",
        description="Two-photon two-mode atom-field dynamics with a Kerr medium.",
        epilog=f"Energies in units of |gamma|, time in 1/|gamma|. Default output "
               f"directory comes from ${OUT_DIR_ENV} when set.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write the CSV series")
    _scenario_arguments(p_sim)
    p_sim.add_argument("--out", type=Path, help="output CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="run two engines on one scenario and "
                                           "report per-observable deviations")
    _scenario_arguments(p_cmp)
    p_cmp.add_argument("--engines", required=True, metavar="A,B",
                       help=f"two of {ENGINES}, comma separated")
    p_cmp.add_argument("--out", type=Path, help="optional deviation-report CSV path")
    p_cmp.set_defaults(func=cmd_compare)

    p_swp = sub.add_parser("sweep", help="run the scenario over a list of parameter values")
    _scenario_arguments(p_swp)
    p_swp.add_argument("--param", required=True, choices=_SWEEPABLE,
                       help="which parameter to sweep")
    p_swp.add_argument("--values", required=True, metavar="V1,V2,...",
                       help="comma-separated parameter values")
    p_swp.add_argument("--prefix", default="sweep", help="output file name prefix")
    p_swp.add_argument("--out-dir", dest="out_dir", help="output directory")
    p_swp.set_defaults(func=cmd_sweep)

    p_pre = sub.add_parser("presets", help="list or run the canned chi-sweep scenarios")
    p_pre.add_argument("name", nargs="?", choices=sorted(PRESETS),
                       help="preset to run; omit to list them")
    p_pre.add_argument("--engine", choices=ENGINES)
    p_pre.add_argument("--samples", type=int)
    p_pre.add_argument("--tmax", type=float)
    p_pre.add_argument("--cutoff", type=int)
    p_pre.add_argument("--out-dir", dest="out_dir", help="output directory")
    p_pre.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HierarchyConvergenceError, SeriesConvergenceError,
            TruncationLeakageError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, KeyError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
