"""Harmonic multipliers of the jump generator on S² and the zonal capture solve.

The generator commutes with rotations, so on degree-ℓ harmonics it acts by a
scalar λ_ℓ.  Writing the generator in polar form at the pole,

    λ_ℓ = C(2,α) · 2π · ∫_0^∞ (P_ℓ(cos t) - 1) t^{-1-2α} dt,

and folding t onto one period gives the periodised kernel
Σ_m (t + 2πm)^{-1-2α} = (2π)^{-s} ζ(s, t/2π) with s = 1 + 2α (Hurwitz zeta).
The fold is symmetric about t = π, so only [0, π] is integrated, with a
Gauss–Jacobi rule carrying the t^{1-2α} endpoint behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi, zeta

from . import constants

__all__ = [
    "MultiplierTable",
    "ZonalSolution",
    "legendre_table",
    "sphere_multipliers",
    "sphere_multiplier",
    "multiplier_cosine_series",
    "torus_control_multipliers",
    "parity_gap",
    "parity_gaps",
    "solve_zonal_system",
    "solve_capture_zonal",
    "antipodal_deviation",
    "monte_carlo_multiplier",
]

DEFAULT_QUAD_NODES = 3000
UNDER_RESOLVED_RATIO = 1e-4


def legendre_table(L: int, x) -> np.ndarray:
    """P_0..P_L at points ``x`` by the three-term recurrence, shape (L+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = np.empty((L + 1, x.size))
    P[0] = 1.0
    if L >= 1:
        P[1] = x
    for l in range(1, L):
        P[l + 1] = ((2 * l + 1) * x * P[l] - l * P[l - 1]) / (l + 1)
    ends = np.abs(x) == 1.0
    if np.any(ends):
        assert np.all(np.abs(P[:, ends]) == 1.0), "recurrence lost |P_l(±1)| = 1"
    return P


def _legendre_minus_one(L: int, t) -> np.ndarray:
    """D_ℓ(t) = P_ℓ(cos t) - 1 without cancellation near t = 0.

    Subtracting 1 from the Legendre recurrence gives
    (ℓ+1) D_{ℓ+1} = (2ℓ+1) x D_ℓ - ℓ D_{ℓ-1} + (2ℓ+1)(x - 1),
    with x - 1 = -2 sin²(t/2) evaluated directly.
    """
    x = np.cos(t)
    xm1 = -2.0 * np.sin(t / 2) ** 2
    D = np.zeros((L + 1, np.size(t)))
    if L >= 1:
        D[1] = xm1
    for l in range(1, L):
        D[l + 1] = ((2 * l + 1) * x * D[l] - l * D[l - 1] + (2 * l + 1) * xm1) / (l + 1)
    return D


@dataclass
class MultiplierTable:
    alpha: float
    n: int
    lambdas: np.ndarray
    quad_error: np.ndarray
    principal: np.ndarray = field(default=None, repr=False)

    @property
    def L(self) -> int:
        return self.lambdas.size - 1

    def __post_init__(self):
        if self.principal is None:
            l = np.arange(self.lambdas.size, dtype=float)
            self.principal = (l * (l + 1)) ** self.alpha


def _lambdas(L: int, alpha: float, nodes: int) -> np.ndarray:
    s = 1.0 + 2 * alpha
    y, w = roots_jacobi(nodes, 0.0, 1 - 2 * alpha)
    t = np.pi * (1 + y) / 2
    w = w * (np.pi / 2) ** (2 - 2 * alpha)
    q = t / (2 * np.pi)
    # t^s times the folded kernel; bounded on [0, π]
    kernel = q**s * zeta(s, q) + q**s * zeta(s, 1 - q)
    integrand = _legendre_minus_one(L, t) / t**2 * kernel
    lam = constants.levy_constant(2, alpha) * 2 * np.pi * (integrand @ w)
    lam[0] = 0.0
    return lam


def sphere_multipliers(L: int, alpha: float, n: int = 2, *, quad_nodes: int = DEFAULT_QUAD_NODES) -> MultiplierTable:
    """λ_0..λ_L on S².  ``quad_error`` is the change under doubled nodes."""
    alpha = constants.check_alpha(alpha)
    if n != 2:
        raise NotImplementedError("only the 2-sphere is supported")
    if L < 1:
        raise ValueError("L must be >= 1")
    lam = _lambdas(L, alpha, quad_nodes)
    err = np.abs(_lambdas(L, alpha, 2 * quad_nodes) - lam)
    return MultiplierTable(alpha, n, lam, err)


def sphere_multiplier(l: int, alpha: float, n: int = 2, *, quad_nodes: int = DEFAULT_QUAD_NODES, tol: float | None = None):
    """Single multiplier λ_ℓ and its error estimate.

    With ``tol`` set, the node count is doubled until the estimate falls
    below it; ``RuntimeError`` reports the achieved error otherwise.
    """
    if l < 0:
        raise ValueError("degree must be >= 0")
    if l == 0:
        return 0.0, 0.0
    nodes = quad_nodes
    for _ in range(6):
        tab = sphere_multipliers(l, alpha, n, quad_nodes=nodes)
        val, err = float(tab.lambdas[l]), float(tab.quad_error[l])
        if tol is None or err <= tol:
            return val, err
        nodes *= 2
    raise RuntimeError(f"multiplier tolerance {tol:.1e} not reached, achieved {err:.2e}")


def multiplier_cosine_series(l: int, alpha: float) -> float:
    """λ_ℓ from the cosine expansion of P_ℓ(cos t).

    P_ℓ(cos t) = Σ_k g_k g_{ℓ-k} cos((ℓ-2k) t) with g_k = C(2k,k)/4^k, and
    ∫_0^∞ (cos(jt) - 1) t^{-1-2α} dt = j^{2α} I(α) scales exactly, so

        λ_ℓ = C(2,α) · 2π · I(α) · Σ_k g_k g_{ℓ-k} |ℓ-2k|^{2α}.

    I(α) is taken from adaptive Fourier quadrature.  This path shares no
    code with ``sphere_multipliers`` and serves as its oracle.
    """
    from .spectral_torus import _radial_cosine_integral

    alpha = constants.check_alpha(alpha)
    if l == 0:
        return 0.0
    k = np.arange(l + 1)
    g = np.ones(l + 1)
    g[1:] = np.cumprod((2 * k[1:] - 1) / (2 * k[1:]))
    coeff = g * g[::-1]
    I1, _ = _radial_cosine_integral(1.0, alpha)
    return float(constants.levy_constant(2, alpha) * 2 * np.pi * I1 * np.sum(coeff * np.abs(l - 2 * k) ** (2 * alpha)))


def torus_control_multipliers(L: int, alpha: float) -> MultiplierTable:
    """Control table -(2π)^{2α} ℓ^{2α}: a smooth symbol with no antipodal part.

    The principal part used by ``parity_gap`` is matched to (2π)^{2α}(ℓ(ℓ+1))^α.
    """
    l = np.arange(L + 1, dtype=float)
    c = (2 * np.pi) ** (2 * alpha)
    return MultiplierTable(alpha, 1, -c * l ** (2 * alpha), np.zeros(L + 1), principal=c * (l * (l + 1)) ** alpha)


def parity_gaps(lambdas, principal) -> np.ndarray:
    """g_ℓ = s_ℓ - (s_{ℓ-1} + s_{ℓ+1})/2, s = λ + principal, for ℓ = 1..L-1."""
    s = np.asarray(lambdas) + np.asarray(principal)
    return s[1:-1] - 0.5 * (s[:-2] + s[2:])


def parity_gap(table: MultiplierTable, l: int) -> float:
    """Parity-alternating part of λ at degree ``l`` (1 <= l <= L-1)."""
    if not 1 <= l <= table.L - 1:
        raise ValueError(f"degree must lie in [1, {table.L - 1}]")
    return float(parity_gaps(table.lambdas, table.principal)[l - 1])


@dataclass
class ZonalSolution:
    coeffs: np.ndarray
    eps: float
    alpha: float
    residual: float
    nodes: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.coeffs.size - 1

    @property
    def mean(self) -> float:
        """Average over S², equal to a_0."""
        return float(self.coeffs[0])

    @property
    def under_resolved(self) -> bool:
        a = np.abs(self.coeffs)
        return bool(a[-1] / a.max() >= UNDER_RESOLVED_RATIO)

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        P = legendre_table(self.L, np.cos(theta.ravel()))
        return (self.coeffs @ P).reshape(theta.shape)


def solve_zonal_system(lambdas, cap_mask, x) -> tuple[np.ndarray, float]:
    """Solve Σ a_ℓ P_ℓ(x_j) = 0 on the cap and Σ a_ℓ λ_ℓ P_ℓ(x_j) = -1 elsewhere.

    ``x`` must hold exactly L+1 collocation points.  Returns the
    coefficients and the max equation residual.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    L = lambdas.size - 1
    if x.size != L + 1:
        raise ValueError("square collocation needs L+1 points")
    P = legendre_table(L, x).T
    A = np.where(cap_mask[:, None], P, P * lambdas[None, :])
    b = np.where(cap_mask, 0.0, -1.0)
    a = np.linalg.solve(A, b)
    return a, float(np.max(np.abs(A @ a - b)))


def solve_capture_zonal(alpha: float, eps: float, L: int, quad_nodes: int = 2 * DEFAULT_QUAD_NODES, table: MultiplierTable | None = None) -> ZonalSolution:
    """Zonal expected capture time of the polar cap θ <= eps on S².

    Square collocation at the L+1 Gauss–Legendre nodes in x = cos θ: u = 0 at
    nodes in the cap, 𝒜u = -1 at the others.
    """
    alpha = constants.check_alpha(alpha)
    if not 0 < eps < np.pi:
        raise ValueError("eps must lie in (0, π)")
    if L < 4 / eps:
        raise ValueError(f"degree L={L} does not resolve a cap of radius {eps} (need L >= 4/eps)")
    if table is None:
        table = sphere_multipliers(L, alpha, quad_nodes=quad_nodes)
    elif table.L != L:
        raise ValueError("multiplier table degree does not match L")
    x, _ = leggauss(L + 1)
    cap = np.arccos(x) <= eps
    if not cap.any():
        raise np.linalg.LinAlgError("no collocation node inside the cap")
    a, res = solve_zonal_system(table.lambdas, cap, x)
    return ZonalSolution(a, eps, alpha, res, x)


def antipodal_deviation(sol: ZonalSolution) -> float:
    """u(π) - a_0 = Σ_{ℓ>=1} (-1)^ℓ a_ℓ."""
    a = sol.coeffs
    signs = (-1.0) ** np.arange(a.size)
    return float(np.sum(signs[1:] * a[1:]))


def monte_carlo_multiplier(alpha: float, t: float, n_samples: int, delta: float = 1e-3, seed: int = 0, workers: int | None = None):
    """Estimate λ_1 from jump-process positions started at the pole.

    E[P_1(cos Θ_t)] = E[z_t] = exp(λ_1 t) exactly, so λ_1 = log(mean z_t)/t.
    Returns the estimate and a 95% half-width from the delta method.
    """
    from . import levy_sim
    from .manifold import sphere

    cfg = levy_sim.JumpProcessConfig(alpha, delta, sphere(2), seed=seed)
    pts = levy_sim.positions_at(cfg, [0.0, 0.0, 1.0], t, n_samples, workers=workers)
    z = pts[:, 2]
    m = z.mean()
    hw = 1.96 * z.std(ddof=1) / np.sqrt(z.size) / (abs(m) * t)
    return float(np.log(m) / t), float(hw)
