"""Compound-Poisson simulation of isotropic 2α-stable jumps on a manifold.

Jumps shorter than a cutoff ``delta`` are dropped, which leaves a finite
jump rate.  The remaining Lévy measure

    C(n, α) r^{-1-2α} dr dS^{n-1}(v),   r >= delta

is sampled exactly: exponential waiting times, Pareto radii and uniform
tangent directions, pushed to the manifold by the exponential map.  Because
the process is constant between jumps, capture is tested only at arrival
points.

Reproducibility contract: trajectory ``i`` draws from its own stream seeded
by ``(seed, i)`` and consumes it in fixed-size blocks, so results do not
depend on batching or on the number of worker processes.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constants
from .manifold import Kind, Manifold, distance, exp_map, tangent_project, uniform_direction, uniform_point

__all__ = [
    "JumpProcessConfig",
    "CaptureEstimate",
    "RefinementStudy",
    "trajectory_rng",
    "jump_rate",
    "small_jump_variance",
    "sample_radius",
    "sample_jump",
    "default_t_max",
    "simulate_capture",
    "simulate_trajectories",
    "estimate_capture",
    "positions_at",
    "delta_refinement_study",
]

BLOCK = 128
BATCH = 4096


@dataclass(frozen=True)
class JumpProcessConfig:
    alpha: float
    delta: float
    manifold: Manifold
    seed: int = 0
    gaussian_correction: bool = False
    t_max: float | None = None

    def __post_init__(self):
        constants.check_alpha(self.alpha)
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CaptureEstimate:
    mean: float
    half_width_95: float
    n_samples: int
    n_censored: int
    delta_used: float

    @property
    def censoring_biased(self) -> bool:
        """True when censored samples pull the mean down."""
        return self.n_censored > 0

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width_95": self.half_width_95,
            "n_samples": self.n_samples,
            "n_censored": self.n_censored,
            "delta_used": self.delta_used,
        }


@dataclass
class TrajectoryTable:
    """Per-trajectory output, indexed by trajectory number."""

    tau: np.ndarray
    censored: np.ndarray
    n_jumps: np.ndarray
    final: np.ndarray = field(repr=False)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def jump_rate(cfg: JumpProcessConfig) -> float:
    """Total mass of the Lévy measure restricted to jumps longer than delta."""
    n, a = cfg.manifold.n, cfg.alpha
    return constants.levy_constant(n, a) * constants.sphere_area(n) * cfg.delta ** (-2 * a) / (2 * a)


def small_jump_variance(cfg: JumpProcessConfig) -> float:
    """Per-coordinate second moment rate of the discarded jumps (|v| < delta)."""
    n, a = cfg.manifold.n, cfg.alpha
    return constants.levy_constant(n, a) * constants.sphere_area(n) * cfg.delta ** (2 - 2 * a) / (n * (2 - 2 * a))


def sample_radius(alpha: float, delta: float, u):
    """Inverse CDF of the Pareto tail P(R > r) = (delta / r)^{2α}, u in (0, 1]."""
    return delta * np.asarray(u, dtype=float) ** (-1.0 / (2 * alpha))


def sample_jump(cfg: JumpProcessConfig, p, rng: np.random.Generator):
    """Draw one (waiting time, arrival point) pair from ``p``."""
    M = cfg.manifold
    wait = rng.exponential(1.0 / jump_rate(cfg))
    r = sample_radius(cfg.alpha, cfg.delta, 1.0 - rng.random())
    v = uniform_direction(M, p, rng)
    return float(wait), exp_map(M, p, v, r)


def default_t_max(cfg: JumpProcessConfig, eps: float, multiple: float = 50.0) -> float:
    """Censoring horizon: ``multiple`` times the predicted mean capture/exit time."""
    M, a, n = cfg.manifold, cfg.alpha, cfg.manifold.n
    if M.kind is Kind.EUCLIDEAN:
        pred = constants.getoor_ball_mean_exit(n, a, np.zeros(n)) * eps ** (2 * a)
    else:
        pred = eps ** (2 * a - n) * M.volume * constants.capture_constant(n, a)
    return multiple * pred


def _stopped(M: Manifold, q, target, eps):
    # closed target ball on compact manifolds; exit from the open ball in R^n
    d = distance(M, q, target)
    if M.kind is Kind.EUCLIDEAN:
        return d >= eps
    return d <= eps


def _jump(M: Manifold, p, z, r):
    if M.kind is Kind.SPHERE:
        v = tangent_project(p, z)
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        # a Gaussian exactly parallel to p has probability zero
        v = v / np.where(nrm > 0, nrm, 1.0)
        q = np.cos(r)[:, None] * p + np.sin(r)[:, None] * v
        return q / np.linalg.norm(q, axis=-1, keepdims=True)
    step = z / np.linalg.norm(z, axis=-1, keepdims=True) * r[:, None]
    if M.kind is Kind.TORUS:
        return np.mod(p + step, 1.0)
    return p + step


def _diffuse(M: Manifold, p, g, sd):
    if M.kind is Kind.SPHERE:
        v = tangent_project(p, g) * sd[:, None]
        length = np.linalg.norm(v, axis=-1)
        u = v / np.where(length > 0, length, 1.0)[:, None]
        q = np.cos(length)[:, None] * p + np.sin(length)[:, None] * u
        return q / np.linalg.norm(q, axis=-1, keepdims=True)
    q = p + g * sd[:, None]
    return np.mod(q, 1.0) if M.kind is Kind.TORUS else q


def _run_batch(cfg, indices, rngs, start, target, eps, t_max):
    M = cfg.manifold
    d = M.ambient_dim
    m = len(indices)
    lam = jump_rate(cfg)
    expo = -1.0 / (2 * cfg.alpha)
    sigma2 = small_jump_variance(cfg) if cfg.gaussian_correction else 0.0

    pos = np.empty((m, d))
    for j, g in enumerate(rngs):
        pos[j] = uniform_point(M, g) if start is None else start
    tau = np.zeros(m)
    n_jumps = np.zeros(m, dtype=np.int64)
    censored = np.zeros(m, dtype=bool)
    if target is None:
        done = np.zeros(m, dtype=bool)
    else:
        done = _stopped(M, pos, target, eps)

    active = np.flatnonzero(~done)
    n_rand = 2 * d if cfg.gaussian_correction else d
    while active.size:
        k = active.size
        U = np.empty((k, BLOCK, 2))
        Z = np.empty((k, BLOCK, n_rand))
        for j, idx in enumerate(active):
            U[j] = rngs[idx].random((BLOCK, 2))
            Z[j] = rngs[idx].standard_normal((BLOCK, n_rand))
        waits = -np.log1p(-U[..., 0]) / lam
        radii = cfg.delta * (1.0 - U[..., 1]) ** expo

        p = pos[active]
        t = tau[active]
        nj = n_jumps[active]
        cens = np.zeros(k, dtype=bool)
        alive = np.ones(k, dtype=bool)
        for s in range(BLOCK):
            live = np.flatnonzero(alive)
            if live.size == 0:
                break
            t_new = t[live] + waits[live, s]
            over = t_new > t_max
            if np.any(over):
                gone = live[over]
                t[gone] = t_max
                cens[gone] = True
                alive[gone] = False
                live = live[~over]
                t_new = t_new[~over]
            if live.size == 0:
                break
            q = p[live]
            hit = np.zeros(live.size, dtype=bool)
            if sigma2 > 0:
                q = _diffuse(M, q, Z[live, s, d:], np.sqrt(sigma2 * waits[live, s]))
                if target is not None:
                    hit = _stopped(M, q, target, eps)
            q = _jump(M, q, Z[live, s, :d], radii[live, s])
            if target is not None:
                hit |= _stopped(M, q, target, eps)
            p[live] = q
            t[live] = t_new
            nj[live] += 1
            alive[live[hit]] = False

        pos[active] = p
        tau[active] = t
        n_jumps[active] = nj
        censored[active] = cens
        finished = ~alive
        active = active[~finished]

    if target is None:
        censored[:] = False
    return tau, censored, n_jumps, pos


def _run_chunk(args):
    cfg, lo, hi, start, target, eps, t_max = args
    idx = np.arange(lo, hi)
    rngs = [trajectory_rng(cfg.seed, i) for i in idx]
    return _run_batch(cfg, idx, rngs, start, target, eps, t_max)


def _resolve_workers(workers):
    if workers is None:
        import os

        workers = int(os.environ.get("LEVYLAB_THREADS", "1"))
    return max(1, int(workers))


def simulate_trajectories(cfg, start, target, eps, n_samples, t_max=None, workers=None) -> TrajectoryTable:
    """Run trajectories ``0 .. n_samples-1``; ``start=None`` means uniform start."""
    M = cfg.manifold
    if start is not None:
        start = M.check_point(start)
    if target is not None:
        target = M.check_point(target)
    if t_max is None:
        t_max = cfg.t_max if cfg.t_max is not None else default_t_max(cfg, eps)
    chunks = [(cfg, lo, min(lo + BATCH, n_samples), start, target, eps, t_max) for lo in range(0, n_samples, BATCH)]
    workers = _resolve_workers(workers)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    tau, cens, nj, fin = (np.concatenate(x) for x in zip(*parts))
    return TrajectoryTable(tau, cens, nj, fin)


def simulate_capture(cfg, start, target, eps, rng, t_max=None):
    """Single trajectory: returns ``(tau, censored)``."""
    M = cfg.manifold
    start = M.check_point(start)
    target = M.check_point(target)
    if t_max is None:
        t_max = cfg.t_max if cfg.t_max is not None else default_t_max(cfg, eps)
    tau, cens, _, _ = _run_batch(cfg, np.array([0]), [rng], start, target, eps, t_max)
    return float(tau[0]), bool(cens[0])


def _summarise(tab: TrajectoryTable, delta) -> CaptureEstimate:
    n = tab.tau.size
    mean = float(np.mean(tab.tau))
    hw = 1.959963984540054 * float(np.std(tab.tau, ddof=1)) / math.sqrt(n)
    return CaptureEstimate(mean, hw, n, int(np.sum(tab.censored)), float(delta))


def estimate_capture(cfg, start, target, eps, n_samples, *, workers=None, t_max=None, return_table=False):
    """Monte Carlo mean capture (or, in R^n, exit) time with a normal 95% CI.

    ``start`` is a point or the string ``"uniform"`` (average over M).
    Censored trajectories contribute ``t_max``; see ``CaptureEstimate.censoring_biased``.
    """
    if n_samples < 100:
        raise ValueError("at least 100 trajectories are needed for a confidence interval")
    if isinstance(start, str):
        if start != "uniform":
            raise ValueError(f"unknown start value {start!r}")
        start = None
    tab = simulate_trajectories(cfg, start, target, eps, int(n_samples), t_max=t_max, workers=workers)
    est = _summarise(tab, cfg.delta)
    return (est, tab) if return_table else est


def positions_at(cfg, start, t, n_samples, workers=None) -> np.ndarray:
    """Positions at time ``t`` of ``n_samples`` trajectories started at ``start``."""
    tab = simulate_trajectories(cfg, start, None, 0.0, int(n_samples), t_max=t, workers=workers)
    return tab.final


@dataclass
class RefinementStudy:
    deltas: list
    estimates: list
    monotone: bool
    extrapolated: float
    rate: float

    def rows(self):
        return [dict(delta=d, **e.as_dict()) for d, e in zip(self.deltas, self.estimates)]


def delta_refinement_study(cfg, start, target, eps, deltas, n_samples, *, rate=None, workers=None):
    """Repeat ``estimate_capture`` for decreasing cutoffs.

    The extrapolated value assumes a bias proportional to ``delta**rate``
    (default ``2 - 2α``, the order of the discarded second moment); it is a
    heuristic summary, not a proven rate.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 2:
        raise ValueError("need at least two cutoffs")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    if cfg.manifold.kind is not Kind.EUCLIDEAN and deltas[0] >= eps:
        warnings.warn("delta >= eps: single jumps can overshoot the target ball", stacklevel=2)
    ests = []
    for d in deltas:
        c = JumpProcessConfig(cfg.alpha, d, cfg.manifold, cfg.seed, cfg.gaussian_correction, cfg.t_max)
        ests.append(estimate_capture(c, start, target, eps, n_samples, workers=workers))
    means = np.array([e.mean for e in ests])
    steps = np.diff(means)
    monotone = bool(np.all(steps >= 0) or np.all(steps <= 0))
    p = 2 - 2 * cfg.alpha if rate is None else float(rate)
    d1, d2 = deltas[-2] ** p, deltas[-1] ** p
    extrap = float((means[-1] * d1 - means[-2] * d2) / (d1 - d2))
    return RefinementStudy(deltas, ests, monotone, extrap, p)
