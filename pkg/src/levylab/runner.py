"""Experiment specs, dispatch to the numerical modules, sweeps and fits.

An :class:`ExperimentSpec` is a plain record (kind, parameters, optional ε
sweep, seed) that serialises to JSON.  :func:`run` turns it into a
:class:`ResultRecord`.  Python's JSON encoder writes floats with ``repr``,
which round-trips bit-exactly, so records reload losslessly.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, ball_integral, constants, levy_sim, manifold, sphere_spectral, spectral_torus

__all__ = [
    "KINDS",
    "ValidationError",
    "ToleranceError",
    "ExperimentSpec",
    "ResultRecord",
    "run",
    "run_sweep",
    "fit_scaling",
    "multiplier_rows",
]

KINDS = ("constants", "simulate", "solve-torus", "solve-sphere", "multipliers", "ball-check", "sweep")
SWEEPABLE = ("simulate", "solve-torus", "solve-sphere")
TORUS_RESIDUAL_TOL = 1e-8

# parameter defaults per kind; every key is also a CLI flag
DEFAULTS = {
    "constants": {"dim": 2, "alpha": 0.5},
    "simulate": {
        "manifold": "torus",
        "dim": 2,
        "alpha": 0.5,
        "delta": 1e-3,
        "eps": 0.1,
        "target": None,
        "start": "uniform",
        "samples": 10000,
        "tmax_mult": 50.0,
        "gaussian_correction": False,
        "threads": None,
    },
    "solve-torus": {"dim": 2, "alpha": 0.5, "eps": 0.05, "grid": 512, "p0": None, "dump": None},
    "solve-sphere": {"alpha": 0.2, "eps": 0.1, "degree": 400, "quad_nodes": 6000},
    "multipliers": {"alpha": 0.5, "lmax": 200, "quad_nodes": 3000},
    "ball-check": {"dim": 2, "alpha": 0.5, "resolution": "standard"},
    "sweep": {"base": "solve-torus"},
}


class ValidationError(ValueError):
    """Malformed experiment description; ``field`` names the culprit."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class ToleranceError(RuntimeError):
    """A solve finished but missed its accuracy target."""


@dataclass
class ExperimentSpec:
    kind: str
    params: dict = field(default_factory=dict)
    sweep: list | None = None
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError("kind", f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not isinstance(self.params, dict):
            raise ValidationError("params", "must be a mapping")
        unknown = set(self.params) - set(DEFAULTS[self.kind]) - _sweep_extra(self)
        if unknown:
            raise ValidationError("params", f"unknown parameter(s) {sorted(unknown)} for {self.kind}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed", "must be an unsigned 64-bit integer")
        if self.kind == "sweep":
            if not self.sweep:
                raise ValidationError("sweep", "a sweep needs a list of eps values")
            if self.params.get("base", "solve-torus") not in SWEEPABLE:
                raise ValidationError("params.base", f"sweeps support {', '.join(SWEEPABLE)}")
        if self.sweep is not None:
            eps = [float(e) for e in self.sweep]
            if any(not 0 < e < 0.5 for e in eps):
                raise ValidationError("sweep", "eps values must lie in (0, 0.5)")
            if any(b >= a for a, b in zip(eps, eps[1:])):
                raise ValidationError("sweep", "eps values must be strictly decreasing")
            self.sweep = eps

    def resolved(self) -> dict:
        """Parameters with defaults filled in."""
        base = dict(DEFAULTS[self.kind])
        if self.kind == "sweep":
            base.update(DEFAULTS[self.params.get("base", "solve-torus")])
        base.update(self.params)
        return base

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        extra = set(d) - {"kind", "params", "sweep", "seed", "out"}
        if extra:
            raise ValidationError(sorted(extra)[0], "unknown top-level field")
        if "kind" not in d:
            raise ValidationError("kind", "missing")
        return cls(d["kind"], dict(d.get("params") or {}), d.get("sweep"), int(d.get("seed", 0)), d.get("out"))


def _sweep_extra(spec):
    if spec.kind != "sweep":
        return set()
    base = spec.params.get("base", "solve-torus")
    return set(DEFAULTS.get(base, {}))


def _versions():
    import scipy

    return {"levylab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


@dataclass
class ResultRecord:
    spec: dict
    outputs: dict
    wall_time: float
    versions: dict
    timestamp: str

    def to_json(self, indent=None) -> str:
        return json.dumps(asdict(self), indent=indent, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))


def _parse_point(value, dim):
    if value is None or isinstance(value, str) and value == "uniform":
        return value
    if isinstance(value, str):
        value = [float(v) for v in value.split(",")]
    pt = np.asarray(value, dtype=float)
    if pt.shape != (dim,):
        raise ValidationError("point", f"expected {dim} coordinates, got {pt.size}")
    return pt


def _manifold(name, dim):
    try:
        kind = manifold.Kind(name)
    except ValueError:
        raise ValidationError("manifold", f"unknown manifold {name!r}") from None
    return manifold.Manifold(kind, int(dim))


def _run_constants(p, seed):
    n, a = int(p["dim"]), float(p["alpha"])
    return {
        "C": constants.levy_constant(n, a),
        "c": constants.capture_constant(n, a),
        "c_alpha": constants.ball_inverse_constant(n, a),
        "W": constants.weight_integral(n, a),
        "identity_residual": constants.identity_residual(n, a),
    }


def _simulate(p, seed, return_table=False):
    M = _manifold(p["manifold"], p["dim"])
    a, eps = float(p["alpha"]), float(p["eps"])
    cfg = levy_sim.JumpProcessConfig(a, float(p["delta"]), M, seed=seed, gaussian_correction=bool(p["gaussian_correction"]))
    target = _parse_point(p["target"], M.ambient_dim)
    if target is None:
        target = {manifold.Kind.TORUS: np.full(M.n, 0.5), manifold.Kind.SPHERE: np.eye(M.n + 1)[-1], manifold.Kind.EUCLIDEAN: np.zeros(M.n)}[M.kind]
    start = p["start"]
    if M.kind is manifold.Kind.EUCLIDEAN and start == "uniform":
        start = np.zeros(M.n)
    start = _parse_point(start, M.ambient_dim)
    t_max = levy_sim.default_t_max(cfg, eps, float(p["tmax_mult"]))
    est, tab = levy_sim.estimate_capture(cfg, start, target, eps, int(p["samples"]), workers=p["threads"], t_max=t_max, return_table=True)
    out = est.as_dict()
    out["t_max"] = t_max
    out["censored_fraction"] = est.n_censored / est.n_samples
    return (out, tab) if return_table else out


def _run_simulate(p, seed):
    return _simulate(p, seed)


def _run_solve_torus(p, seed):
    grid = spectral_torus.TorusGrid(int(p["dim"]), int(p["grid"]))
    p0 = _parse_point(p["p0"], grid.n)
    sol = spectral_torus.solve_capture(grid, float(p["alpha"]), float(p["eps"]), p0)
    if p.get("dump"):
        spectral_torus.write_field(p["dump"], sol.u, sol.alpha, sol.eps)
    if not sol.residual < TORUS_RESIDUAL_TOL:
        raise ToleranceError(f"torus solve residual {sol.residual:.2e} above {TORUS_RESIDUAL_TOL:.0e}")
    return {
        "mean_u": sol.mean_u,
        "C_eps": sol.C_eps,
        "residual": sol.residual,
        "method": sol.method,
        "f_profile_similarity": spectral_torus.f_profile_similarity(sol),
        "slope_data": {"log_eps": math.log(sol.eps), "log_mean_u": math.log(sol.mean_u)},
    }


def _run_solve_sphere(p, seed):
    alpha, L = float(p["alpha"]), int(p["degree"])
    nodes = int(p["quad_nodes"])
    sol = sphere_spectral.solve_capture_zonal(alpha, float(p["eps"]), L, quad_nodes=nodes)
    return {
        "a0": sol.mean,
        "u_pi_minus_a0": sphere_spectral.antipodal_deviation(sol),
        "residual": sol.residual,
        "under_resolved": sol.under_resolved,
        "tail_ratio": float(abs(sol.coeffs[-1]) / np.abs(sol.coeffs).max()),
        "lambda_path": f"hurwitz-zeta fold, gauss-jacobi nodes={nodes}",
    }


def multiplier_rows(alpha, lmax, quad_nodes=3000):
    """Rows (l, lambda, quad_error, parity_gap); the gap is NaN at l = 0 and l = lmax."""
    tab = sphere_spectral.sphere_multipliers(int(lmax), float(alpha), quad_nodes=int(quad_nodes))
    gaps = np.full(tab.L + 1, np.nan)
    gaps[1:-1] = sphere_spectral.parity_gaps(tab.lambdas, tab.principal)
    return [{"l": l, "lambda": float(tab.lambdas[l]), "quad_error": float(tab.quad_error[l]), "parity_gap": float(gaps[l])} for l in range(tab.L + 1)]


def _run_multipliers(p, seed):
    return {"rows": multiplier_rows(p["alpha"], p["lmax"], p["quad_nodes"])}


def _run_ball_check(p, seed):
    rep = ball_integral.verify_inverse_formula(int(p["dim"]), float(p["alpha"]), resolution=p["resolution"])
    return {"max_residual": rep.max_residual, "center_residual": rep.center_residual, "points": rep.points}


_SWEEP_VALUE = {"simulate": "mean", "solve-torus": "mean_u", "solve-sphere": "a0"}


def _sweep_point(args):
    base, params, seed, eps, outdir, idx = args
    p = dict(params, eps=eps)
    out = _DISPATCH[base](p, seed)
    rec = {"eps": eps, "outputs": out}
    if outdir is not None:
        # write-then-rename keeps each point file complete or absent
        fd, tmp = tempfile.mkstemp(dir=outdir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(rec, fh)
        os.replace(tmp, Path(outdir) / f"point_{idx:03d}.json")
    return rec


def run_sweep(spec: ExperimentSpec, workers: int | None = None, outdir=None) -> dict:
    """Run the base experiment at every ε, then fit the log-log slope."""
    p = spec.resolved()
    base = p.pop("base")
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
    jobs = [(base, p, spec.seed, eps, outdir, i) for i, eps in enumerate(spec.sweep)]
    workers = levy_sim._resolve_workers(workers if workers is not None else p.get("threads"))
    if workers > 1 and base != "simulate":
        with ProcessPoolExecutor(max_workers=workers) as ex:
            recs = list(ex.map(_sweep_point, jobs))
    else:
        recs = [_sweep_point(j) for j in jobs]
    recs.sort(key=lambda r: -r["eps"])
    key = _SWEEP_VALUE[base]
    pts = [(r["eps"], r["outputs"][key]) for r in recs]
    out = {"base": base, "value": key, "points": [[e, v] for e, v in pts], "records": recs}
    if len(pts) >= 3 and all(v > 0 for _, v in pts):
        slope, intercept, r2 = fit_scaling(pts)
        out["fit"] = {"slope": slope, "intercept": intercept, "r_squared": r2}
    if base == "solve-sphere":
        devs = [(r["eps"], abs(r["outputs"]["u_pi_minus_a0"])) for r in recs]
        out["deviation_points"] = [[e, v] for e, v in devs]
        if len(devs) >= 3 and all(v > 0 for _, v in devs):
            s, i, r2 = fit_scaling(devs)
            out["deviation_fit"] = {"slope": s, "intercept": i, "r_squared": r2}
        out["note"] = "the blow-up remainder is unquantified; the deviation slope is indicative only"
    return out


_DISPATCH = {
    "constants": _run_constants,
    "simulate": _run_simulate,
    "solve-torus": _run_solve_torus,
    "solve-sphere": _run_solve_sphere,
    "multipliers": _run_multipliers,
    "ball-check": _run_ball_check,
}


def run(spec: ExperimentSpec, workers: int | None = None) -> ResultRecord:
    """Execute ``spec`` and wrap the outputs in a timestamped record."""
    t0 = time.perf_counter()
    if spec.kind == "sweep":
        outdir = None if spec.out is None else str(spec.out) + ".d"
        outputs = run_sweep(spec, workers, outdir)
    else:
        p = spec.resolved()
        if workers is not None and "threads" in p:
            p["threads"] = workers
        try:
            outputs = _DISPATCH[spec.kind](p, spec.seed)
        except (ValidationError, np.linalg.LinAlgError):
            raise
        except (ValueError, TypeError) as exc:
            raise ValidationError(spec.kind, str(exc)) from exc
    return ResultRecord(spec.to_dict(), outputs, time.perf_counter() - t0, _versions(), _dt.datetime.now(_dt.timezone.utc).isoformat())


def fit_scaling(points):
    """OLS fit of log(value) on log(eps); returns (slope, intercept, r²)."""
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 3:
        raise ValueError("at least three points are needed")
    if any(e <= 0 or v <= 0 for e, v in pts):
        raise ValueError("eps and values must be positive for a log-log fit")
    x = np.log([e for e, _ in pts])
    y = np.log([v for _, v in pts])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_res = float(np.sum((y - A @ [slope, intercept]) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
