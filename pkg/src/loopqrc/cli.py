"""Command line front end.

    loopqrc run <config> [--out DIR] [--threads N] [--seed S]
    loopqrc spectral-norm <config> [--out DIR] [--threads N] [--seed S]
    loopqrc gen-series mackey-glass [--length L] [--history H] [--seed S] ...
    loopqrc validate <config>

Exit codes: 0 success, 1 a grid point with every realization failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__, _core
from .analysis import EnsembleSummary, run_ensemble
from .config import ConfigError, ExperimentConfig, TaskConfig, parse_config
from .experiment import run_realization
from .tasks import MackeyGlassParams, mackey_glass_series

log = logging.getLogger("loopqrc")

RESULTS_HEADER = ["task", "N", "R", "r", "sigma2", "m", "seed", "realization", "metric_name", "metric_value"]


def fmt(x) -> str:
    """Round-trip exact text for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class _Writer:
    def __init__(self, path: Path, header):
        self.fh = open(path, "w", encoding="utf-8", newline="")
        self.w = csv.writer(self.fh, lineterminator="\n")
        self.w.writerow(header)

    def row(self, *values):
        self.w.writerow([fmt(v) for v in values])

    def close(self):
        self.fh.close()


def _point_dir(out: Path, idx: int) -> Path:
    d = out / f"point_{idx:03d}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _coords(cfg: ExperimentConfig) -> dict:
    return {"task": cfg.task.kind, "N": cfg.N, "R": cfg.R, "r": cfg.r, "sigma2": cfg.sigma2_noise, "m": cfg.m}


def _summary_entry(idx: int, summ: EnsembleSummary) -> dict:
    return {
        "point": idx,
        "directory": f"point_{idx:03d}",
        "coords": summ.coords,
        "n_realizations": len(summ.realizations),
        "n_ok": summ.n_ok,
        "metrics": {k: asdict(v) for k, v in summ.metrics.items()},
        "failures": [{"realization": f.index, "seed": f.seed, "error": f.error} for f in summ.failures],
    }


def _write_extras(pdir: Path, kind: str, summ: EnsembleSummary):
    ok = [r for r in summ.realizations if r.ok]
    w = _Writer(pdir / "spectral_norm.csv", ["realization", "d", "norm"])
    for r in ok:
        for d, v in enumerate(r.extras["spectral_norm"]):
            w.row(r.index, d, float(v))
    w.close()
    if kind == "memory":
        w = _Writer(pdir / "capacity_vs_delay.csv", ["realization", "d", "capacity"])
        for r in ok:
            for d, c in enumerate(r.extras["capacity"]):
                w.row(r.index, d, float(c))
        w.close()
    if kind == "mackey_glass":
        w = _Writer(pdir / "autonomous_trace.csv", ["step", "truth", "prediction", "realization"])
        for r in ok:
            for k, p in enumerate(r.extras["prediction"]):
                w.row(k, float(r.extras["truth"][k]), float(p), r.index)
        w.close()
        w = _Writer(pdir / "attractor.csv", ["y_k", "y_k_minus_lag"])
        if ok:
            for a, b in ok[0].extras["attractor"]:
                w.row(float(a), float(b))
        w.close()


def run_experiment(cfg: ExperimentConfig, out: Path, threads: int | None = None) -> int:
    """Run every grid point and write results; returns the exit status."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    points = cfg.grid()
    results = _Writer(out / "results.csv", RESULTS_HEADER)
    entries = []
    summaries = []
    status = 0
    for idx, point in enumerate(points):
        coords = _coords(point)
        log.info("grid point %d/%d: %s", idx + 1, len(points), coords)
        summ = run_ensemble(
            run_realization, point, point.n_realizations, point.master_seed,
            coords=coords, threads=threads,
        )
        summaries.append(summ)
        for r in summ.realizations:
            if not r.ok:
                log.warning("point %d realization %d failed: %s", idx, r.index, r.error)
                continue
            for name, value in r.metrics.items():
                results.row(point.task.kind, point.N, point.R, point.r, point.sigma2_noise,
                            point.m, r.seed, r.index, name, float(value))
        _write_extras(_point_dir(out, idx), point.task.kind, summ)
        entries.append(_summary_entry(idx, summ))
        if summ.n_ok == 0:
            status = 1
    results.close()

    if cfg.task.kind == "narma10":
        _write_boxplots(out, points, summaries)

    doc = {
        "code_version": __version__,
        "backend": _core.BACKEND,
        "config": cfg.to_dict(),
        "config_text": cfg.to_text(),
        "grid": entries,
        "failures": [dict(f, point=e["point"]) for e in entries for f in e["failures"]],
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return status


def _write_boxplots(out: Path, points, summaries):
    """One file per noise level: the NARMA10 error of every realization."""
    by_noise: dict[float, list] = {}
    for point, summ in zip(points, summaries):
        by_noise.setdefault(point.sigma2_noise, []).append((point, summ))
    for sigma2, items in by_noise.items():
        w = _Writer(out / f"narma10_sigma2_{fmt(sigma2)}.csv", ["R", "r", "m", "realization", "nmse"])
        for point, summ in items:
            for r in summ.realizations:
                if r.ok:
                    w.row(point.R, point.r, point.m, r.index, r.metrics["nmse"])
        w.close()


def spectral_norm_experiment(cfg: ExperimentConfig, out: Path, threads: int | None = None) -> int:
    d_max = cfg.task.d_max if cfg.task.kind in ("memory", "spectral_norm") else 40
    task = TaskConfig(kind="spectral_norm", d_max=d_max)
    return run_experiment(replace(cfg, task=task), out, threads)


def _cmd_run(args, spectral=False) -> int:
    cfg = parse_config(Path(args.config))
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    out = Path(args.out)
    if spectral:
        return spectral_norm_experiment(cfg, out, args.threads)
    return run_experiment(cfg, out, args.threads)


def _cmd_validate(args) -> int:
    cfg = parse_config(Path(args.config))
    sys.stdout.write(cfg.to_text())
    sys.stdout.write(f"# grid points: {len(cfg.grid())}\n")
    return 0


def _cmd_gen_series(args) -> int:
    p = MackeyGlassParams(
        tau=args.tau, t_r=args.t_r, h=args.h, transient=args.transient,
        history=args.history, interpolation=args.interpolation,
    )
    rng = np.random.default_rng(args.seed)
    s = mackey_glass_series(p, args.length, rng)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["k", "s"])
    for k, v in enumerate(s):
        w.writerow([k, fmt(float(v))])
    if args.out:
        fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopqrc", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    for name, help_ in (("run", "run a full experiment"),
                        ("spectral-norm", "spectral norm of A^d only, no reservoir runs")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--out", default="results")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: $QRC_THREADS or 1)")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")

    p = sub.add_parser("gen-series", help="emit a raw benchmark series as CSV")
    p.add_argument("series", choices=["mackey-glass"])
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--history", type=float, default=None,
                   help="constant initial history (random in [0.5, 1.5] if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=17.0)
    p.add_argument("--t-r", dest="t_r", type=float, default=3.0)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--transient", type=float, default=1000.0)
    p.add_argument("--interpolation", choices=["hermite", "linear"], default="hermite")
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="parse a config and print it resolved")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "spectral-norm":
            return _cmd_run(args, spectral=True)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "gen-series":
            return _cmd_gen_series(args)
    except (ConfigError, ValueError) as exc:
        print(f"loopqrc: error: {exc}", file=sys.stderr)
        return 2
    parser.print_usage(sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
