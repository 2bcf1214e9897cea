"""Command-line entry point: ``sterngerlach {evolve,validate,scan,ensemble}``.

Exit codes: 0 success, 1 physics or tolerance failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import branch_overlap_analytic
from .coherence import coherence_from_states, scrambling_ensemble
from .config import RunConfig, load_config
from .core import BRANCHES, make_initial_state
from .errors import BoundaryMassError, ConfigError, GridError
from .io import (COHERENCE_COLUMNS, ENSEMBLE_COLUMNS, OBSERVABLE_COLUMNS, atomic_write,
                 coherence_rows, observable_rows, render)
from .observables import series_from_states
from .regime import ParameterPoint, evaluate_point, report_row, scan
from .spectral import evolve
from .validation import fit_dt, run_validation

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2

SWEEPABLE = tuple(f.name for f in fields(ParameterPoint))
REGIME_COLUMNS = SWEEPABLE + ("bohm_number", "exit_time", "separation_ratio", "visibility",
                              "label", "error", "b_hi", "b_lo", "s_min", "s_floor", "v_max")


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(time.strftime("sg-%Y%m%d-%H%M%S"))


def _config(args) -> RunConfig:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.format is not None:
        overrides.append(f"format={args.format}")
    return load_config(args.config, overrides)


def _ext(cfg: RunConfig) -> str:
    return "json" if cfg.format == "json" else "csv"


def _write_all(out: Path, files: dict[str, str]) -> None:
    """Everything is rendered before this is called, so failures leave no files."""
    for name, text in files.items():
        atomic_write(out / name, text)


def _spectral_run(cfg: RunConfig):
    grid = cfg.grid()
    state = make_initial_state(cfg.packet(), cfg.spins(), grid)
    t_final = cfg.final_time
    if t_final == 0:
        return [state]
    dt = fit_dt(t_final, cfg.time_step)
    return evolve(state, cfg.params(), t_final, dt, stride=cfg.snapshot_stride)


# -- subcommands --------------------------------------------------------------

def cmd_evolve(args) -> int:
    cfg = _config(args)
    snaps = _spectral_run(cfg)
    obs = series_from_states(snaps)
    coh = coherence_from_states(snaps, cfg.spins(), cfg.packet(), cfg.params(), cfg.jitter(),
                                cfg.n_samples, cfg.seed)
    ext = _ext(cfg)
    files = {
        f"observables.{ext}": render("observables", OBSERVABLE_COLUMNS, observable_rows(obs),
                                     cfg.format),
        f"coherence.{ext}": render("coherence", COHERENCE_COLUMNS, coherence_rows(coh), cfg.format),
        "config.txt": cfg.to_text(),
    }
    rep = evaluate_point(cfg.point(), cfg.scan_settings())
    out = _out_dir(args)
    _write_all(out, files)
    last = len(obs.times) - 1
    means = " ".join(
        f"<x>_{br.value}={obs.mean_x[last, j]:.10g} <p>_{br.value}={obs.mean_p[last, j]:.10g}"
        for j, br in enumerate(BRANCHES))
    print(f"t={obs.times[last]:.10g} {means} B={rep.bohm_number:.6g} label={rep.label} out={out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    rep = run_validation(cfg)
    text = "\n".join(rep.lines()) + "\n"
    print(text, end="")
    if args.out:
        files = {"validation.txt": text, "config.txt": cfg.to_text()}
        if cfg.format == "json":
            doc = {"schema_version": 1, "kind": "validation", **asdict(rep)}
            files["validation.json"] = json.dumps(doc, indent=1, default=float) + "\n"
        _write_all(Path(args.out), files)
    return EXIT_OK if rep.ok else EXIT_PHYSICS


def parse_sweep(tokens: list[str]) -> tuple[str, np.ndarray]:
    if len(tokens) not in (4, 5):
        raise UsageError(f"sweep needs NAME MIN MAX N [lin|log], got {' '.join(tokens)!r}")
    name = tokens[0]
    if name not in SWEEPABLE:
        raise UsageError(f"unknown sweep parameter {name!r}; choose from {', '.join(SWEEPABLE)}")
    try:
        lo, hi, n = float(tokens[1]), float(tokens[2]), int(tokens[3])
    except ValueError:
        raise UsageError(f"bad sweep numbers in {' '.join(tokens)!r}") from None
    spacing = tokens[4] if len(tokens) == 5 else "lin"
    if n < 1 or (n > 1 and lo == hi):
        raise UsageError(f"empty sweep range for {name}")
    if spacing == "lin":
        values = np.linspace(lo, hi, n)
    elif spacing == "log":
        if lo <= 0 or hi <= 0:
            raise UsageError(f"log sweep of {name} needs positive bounds")
        values = np.geomspace(lo, hi, n)
    else:
        raise UsageError(f"sweep spacing must be lin or log, got {spacing!r}")
    return name, values


def build_points(base: ParameterPoint, sweeps: list[tuple[str, np.ndarray]]) -> list[ParameterPoint]:
    """Cartesian product; the first sweep varies slowest."""
    names = [n for n, _ in sweeps]
    if len(set(names)) != len(names):
        raise UsageError("a parameter is swept twice")
    points = []
    for combo in itertools.product(*(vals for _, vals in sweeps)):
        changes = {n: float(v) for n, v in zip(names, combo)}
        points.append(ParameterPoint(**{**asdict(base), **changes}))
    return points


def cmd_scan(args) -> int:
    cfg = _config(args)
    specs = [s.split() for s in cfg.sweep.split(";") if s.strip()]
    specs += [list(s) for s in (args.sweep or [])]
    if not specs:
        raise UsageError("scan needs at least one --sweep NAME MIN MAX N [lin|log]")
    sweeps = [parse_sweep(s) for s in specs]
    points = build_points(cfg.point(), sweeps)
    settings = cfg.scan_settings()
    reports = scan(points, settings, workers=cfg.workers)
    rows = [report_row(r, settings.thresholds) for r in reports]
    meta = {"artifact_version": __version__, **asdict(settings.thresholds),
            "thresholds": "policy", "jitter_delta": settings.jitter.delta,
            "jitter_target": settings.jitter.target, "n_samples": settings.n_samples,
            "seed": settings.seed}
    ext = _ext(cfg)
    out = _out_dir(args)
    _write_all(out, {f"regime.{ext}": render("regime", REGIME_COLUMNS, rows, cfg.format, meta),
                     "config.txt": cfg.to_text()})
    counts = {lab: sum(r.label == lab for r in reports) for lab in ("measuring", "transition", "non-resolving")}
    errors = sum(bool(r.error) for r in reports)
    print(f"{len(reports)} points: " + " ".join(f"{k}={v}" for k, v in counts.items())
          + f" errors={errors} out={out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = _config(args)
    if cfg.n_samples < 2:
        raise ConfigError("n_samples: must be >= 2 for an ensemble")
    packet, params, spins, jitter = cfg.packet(), cfg.params(), cfg.spins(), cfg.jitter()
    rows = []
    for t in np.linspace(0.0, cfg.final_time, cfg.n_times):
        t = float(t)
        ens = scrambling_ensemble(packet, params, spins, t, jitter, cfg.n_samples, cfg.seed)
        rows.append(dict(time=t, overlap_mod=abs(branch_overlap_analytic(packet, params, t)),
                         ensemble_visibility=ens.visibility, std_error=ens.std_error,
                         mean_overlap_re=ens.mean_overlap.real,
                         mean_overlap_im=ens.mean_overlap.imag,
                         n_samples=cfg.n_samples, seed=cfg.seed))
    meta = {"seed": cfg.seed, "n_samples": cfg.n_samples, "jitter_delta": jitter.delta,
            "jitter_target": jitter.target}
    ext = _ext(cfg)
    out = _out_dir(args)
    _write_all(out, {f"ensemble.{ext}": render("ensemble", ENSEMBLE_COLUMNS, rows, cfg.format, meta),
                     "config.txt": cfg.to_text()})
    print(f"final visibility={rows[-1]['ensemble_visibility']:.6g} seed={cfg.seed} out={out}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: timestamped)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key; repeatable")

    ap = argparse.ArgumentParser(prog="sterngerlach", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="spectral run; observables and coherence CSVs")
    sub.add_parser("validate", parents=[common], help="closed form vs spectral cross-check")
    p = sub.add_parser("scan", parents=[common], help="regime map over a parameter sweep")
    p.add_argument("--sweep", action="append", nargs="+", metavar="TOKEN",
                   help="NAME MIN MAX N [lin|log]; repeatable, first one varies slowest")
    sub.add_parser("ensemble", parents=[common], help="jitter-averaged visibility over time")
    return ap


COMMANDS = {"evolve": cmd_evolve, "validate": cmd_validate, "scan": cmd_scan,
            "ensemble": cmd_ensemble}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GridError, BoundaryMassError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    raise SystemExit(main())
