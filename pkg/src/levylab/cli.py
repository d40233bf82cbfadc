"""Command-line front end.

    levylab [--config FILE] [--seed S] [--threads N] [--out PATH] [--format json|csv] COMMAND [flags]

Global flags may also be given after COMMAND.

The config file is JSON: ``{"seed": 1, "params": {...}, "sweep": [...]}``
or a flat object whose keys are flag names (dashes or underscores).
Flags given on the command line override file values.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import runner
from .spectral_torus import ConvergenceError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

TRAJECTORY_COLUMNS = ("idx", "tau", "censored", "n_jumps")
MULTIPLIER_COLUMNS = ("l", "lambda", "quad_error", "parity_gap")


# per-command flags: name -> type; None means a store_true switch
FLAGS = {
    "constants": {"dim": int, "alpha": float},
    "simulate": {
        "manifold": str,
        "dim": int,
        "alpha": float,
        "delta": float,
        "eps": float,
        "target": str,
        "start": str,
        "samples": int,
        "tmax-mult": float,
        "gaussian-correction": None,
    },
    "solve-torus": {"dim": int, "alpha": float, "eps": float, "grid": int, "p0": str, "dump": str},
    "solve-sphere": {"alpha": float, "eps": float, "degree": int, "quad-nodes": int},
    "multipliers": {"alpha": float, "lmax": int, "quad-nodes": int},
    "ball-check": {"dim": int, "alpha": float, "resolution": str},
    "sweep": {"base": str, "eps-list": str, "dim": int, "alpha": float, "grid": int, "degree": int, "manifold": str, "delta": float, "samples": int},
    "fit": {"input": str},
}


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p, default):
        p.add_argument("--config", default=default, help="JSON file with parameters")
        p.add_argument("--seed", type=int, default=default)
        p.add_argument("--threads", type=int, default=default, help="worker processes (env LEVYLAB_THREADS)")
        p.add_argument("--out", default=default, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=default)

    ap = argparse.ArgumentParser(prog="levylab", description="Narrow-capture experiments for 2α-stable jump processes.")
    add_globals(ap, None)
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, flags in FLAGS.items():
        sp = sub.add_parser(cmd)
        # global flags may also follow the command; SUPPRESS keeps earlier values
        add_globals(sp, argparse.SUPPRESS)
        for name, typ in flags.items():
            if typ is None:
                sp.add_argument(f"--{name}", action="store_const", const=True, default=None)
            else:
                sp.add_argument(f"--{name}", type=typ, default=None)
    return ap


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise runner.ValidationError("config", str(exc)) from exc
    if not isinstance(cfg, dict):
        raise runner.ValidationError("config", "top level must be an object")
    flat = dict(cfg.pop("params", {}) or {})
    for k, v in cfg.items():
        flat.setdefault(k, v)
    return {k.replace("-", "_"): v for k, v in flat.items()}


def _gather(args, cfg):
    """Merge config values and explicit flags for the chosen command."""
    params = {}
    for name in FLAGS[args.command]:
        key = name.replace("-", "_")
        if key in cfg:
            params[key] = cfg[key]
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    threads = args.threads if args.threads is not None else cfg.get("threads")
    fmt = args.format or cfg.get("format")
    out = args.out or cfg.get("out")
    return params, seed, threads, fmt, out


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _fit_points(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise runner.ValidationError("input", str(exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or not {"eps", "value"} <= set(rows[0]):
            raise runner.ValidationError("input", "CSV needs columns eps,value") from None
        return [(float(r["eps"]), float(r["value"])) for r in rows]
    if isinstance(data, dict):
        # a sweep record or its outputs
        data = data.get("outputs", data).get("points")
    if not isinstance(data, list):
        raise runner.ValidationError("input", "expected a list of [eps, value] pairs")
    return [(float(e), float(v)) for e, v in data]


def _run(args) -> int:
    cfg = _load_config(args.config)
    params, seed, threads, fmt, out = _gather(args, cfg)
    cmd = args.command

    if cmd == "fit":
        if "input" not in params:
            raise runner.ValidationError("input", "required")
        try:
            slope, intercept, r2 = runner.fit_scaling(_fit_points(params["input"]))
        except ValueError as exc:
            raise runner.ValidationError("input", str(exc)) from exc
        _emit(json.dumps({"slope": slope, "intercept": intercept, "r_squared": r2}), out)
        return EXIT_OK

    sweep = None
    if cmd == "sweep":
        eps_list = params.pop("eps_list", None) or cfg.get("sweep")
        if eps_list is None:
            raise runner.ValidationError("sweep", "give --eps-list or a sweep entry in the config")
        sweep = [float(e) for e in eps_list.split(",")] if isinstance(eps_list, str) else list(eps_list)
    if cmd == "simulate":
        params["threads"] = threads
    spec = runner.ExperimentSpec(cmd, params, sweep, seed, out)

    if cmd == "simulate" and fmt == "csv":
        p = spec.resolved()
        try:
            _, tab = runner._simulate(p, seed, return_table=True)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, (runner.ValidationError, np.linalg.LinAlgError)):
                raise
            raise runner.ValidationError(cmd, str(exc)) from exc
        rows = [{"idx": i, "tau": float(t), "censored": int(c), "n_jumps": int(j)} for i, (t, c, j) in enumerate(zip(tab.tau, tab.censored, tab.n_jumps))]
        _emit(_csv_text(TRAJECTORY_COLUMNS, rows), out)
        return EXIT_OK

    rec = runner.run(spec, workers=threads)
    if cmd == "multipliers" and fmt != "json":
        _emit(_csv_text(MULTIPLIER_COLUMNS, rec.outputs["rows"]), out)
    elif fmt == "csv":
        raise runner.ValidationError("format", f"csv output is not available for {cmd}")
    elif cmd in ("constants", "solve-torus", "solve-sphere", "ball-check"):
        _emit(json.dumps(rec.outputs), out)
    else:
        _emit(rec.to_json(), out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except runner.ValidationError as exc:
        print(f"levylab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, runner.ToleranceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"levylab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"levylab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"levylab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
