"""The Riesz-type operator L_α on the unit ball and its explicit inverse.

    L_α u(x) = -∫_B u(y) |x - y|^{2α-n} dy,      n ∈ {2, 3}.

The integral is taken in polar coordinates centred at x, where the Jacobian
r^{n-1} turns the kernel into r^{2α-1}.  Each ray leaves the ball at
R(ω) = -x·ω + sqrt((x·ω)² + 1 - |x|²), and along the ray

    1 - |x + rω|² = (R - r)(r + R'),   R' = x·ω + sqrt((x·ω)² + 1 - |x|²),

so a function behaving like (1 - |y|²)^{-β} at the sphere is integrated
exactly by Gauss–Jacobi in r with weight r^{2α-1} (R - r)^{-β}.  Angles use
the trapezoid rule (periodic, smooth in ω) and, for n = 3, Gauss–Legendre in
the polar cosine about the axis through x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi

from . import constants

__all__ = [
    "BallFunction",
    "InverseReport",
    "RESOLUTIONS",
    "apply_L_alpha",
    "inverse_profile",
    "verify_inverse_formula",
    "leading_f_profile",
    "leading_capture_constant",
    "radial_inner_product",
]

# (radial nodes, angular nodes) per level
RESOLUTIONS = {"standard": (16, 32), "high": (40, 96)}


@dataclass(frozen=True)
class BallFunction:
    """Function on the unit ball.

    ``func`` maps points of shape (..., n) to values of shape (...).
    ``edge_exponent`` β declares the boundary behaviour (1 - |y|²)^{-β}; the
    radial quadrature absorbs it.  ``radial`` marks functions of |y| only.
    """

    func: Callable
    n: int
    edge_exponent: float = 0.0
    radial: bool = False

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("the ball operator is implemented for n = 2 and n = 3")
        if not 0.0 <= self.edge_exponent < 1.0:
            raise ValueError("edge exponent must lie in [0, 1)")

    def __call__(self, y):
        return self.func(np.asarray(y, dtype=float))

    def scaled(self, c: float) -> "BallFunction":
        f = self.func
        return BallFunction(lambda y: c * f(y), self.n, self.edge_exponent, self.radial)


def _resolution(resolution):
    if isinstance(resolution, str):
        try:
            return RESOLUTIONS[resolution]
        except KeyError:
            raise ValueError(f"unknown resolution {resolution!r}") from None
    m_r, m_a = resolution
    return int(m_r), int(m_a)


def _directions(x, n, m_a):
    """Unit directions and weights of the angular rule (weights sum to |S^{n-1}|)."""
    phi = 2 * np.pi * np.arange(m_a) / m_a
    if n == 2:
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(m_a, 2 * np.pi / m_a)
    z, wz = np.polynomial.legendre.leggauss(m_a // 2 if m_a >= 4 else 2)
    # orthonormal frame with e3 along x (any frame at the centre)
    xn = np.linalg.norm(x)
    e3 = x / xn if xn > 0 else np.array([0.0, 0.0, 1.0])
    a = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ e3) * e3
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S = np.sqrt(1 - Z**2)
    dirs = (S * np.cos(P))[..., None] * e1 + (S * np.sin(P))[..., None] * e2 + Z[..., None] * e3
    w = np.outer(wz, np.full(m_a, 2 * np.pi / m_a))
    return dirs.reshape(-1, 3), w.ravel()


def apply_L_alpha(u: BallFunction, x, alpha: float, resolution="standard") -> float:
    """Evaluate L_α u at an interior point ``x``."""
    alpha = constants.check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    if x.shape != (u.n,):
        raise ValueError(f"x must have {u.n} coordinates")
    if x @ x >= 1.0:
        raise ValueError("x must lie strictly inside the unit ball")
    m_r, m_a = _resolution(resolution)
    beta = u.edge_exponent
    y, w = roots_jacobi(m_r, -beta, 2 * alpha - 1)
    dirs, wa = _directions(x, u.n, m_a)
    xw = dirs @ x
    disc = np.sqrt(xw**2 + 1.0 - x @ x)
    R = disc - xw
    s = 0.5 * (1 + y)
    r = R[:, None] * s[None, :]
    pts = x + r[..., None] * dirs[:, None, :]
    vals = u(pts)
    # map the Jacobi rule on [-1, 1] to [0, R]; (R - r)^β restores the declared edge factor
    scale = R ** (2 * alpha - beta) * 2.0 ** (beta - 2 * alpha)
    tail = (R[:, None] - r) ** beta if beta else 1.0
    radial = np.sum(vals * tail * w[None, :], axis=1) * scale
    return float(-np.sum(wa * radial))


def inverse_profile(n: int, alpha: float) -> BallFunction:
    """-c_α (1 - |y|²)^{-α}, the claimed preimage of the constant 1."""
    c = constants.ball_inverse_constant(n, alpha)

    def f(y):
        return -c * (1.0 - np.sum(y * y, axis=-1)) ** (-alpha)

    return BallFunction(f, n, alpha, radial=True)


@dataclass
class InverseReport:
    n: int
    alpha: float
    resolution: str
    max_residual: float
    center_residual: float
    points: list

    def as_dict(self):
        return {"n": self.n, "alpha": self.alpha, "resolution": self.resolution, "max_residual": self.max_residual, "center_residual": self.center_residual, "points": self.points}


def _center_value(n, alpha):
    # ω_{n-1} c_α ∫_0^1 r^{2α-1} (1-r²)^{-α} dr = ω c_α B(α, 1-α)/2
    c = constants.ball_inverse_constant(n, alpha)
    val, _ = integrate.quad(lambda r: (1 + r) ** (-alpha), 0, 1, weight="alg", wvar=(2 * alpha - 1, -alpha), epsabs=0, epsrel=1e-13)
    return c * constants.sphere_area(n) * val


def verify_inverse_formula(n: int, alpha: float, test_points=None, resolution="standard") -> InverseReport:
    """Max |L_α(-c_α(1-|·|²)^{-α})(x) - 1| over ``test_points``.

    Default points are 50 radii in [0, 0.9] along a fixed direction.
    Points closer than 0.05 to the sphere are rejected.
    """
    alpha = constants.check_alpha(alpha)
    if test_points is None:
        e = np.zeros(n)
        e[0] = 1.0
        test_points = [r * e for r in np.linspace(0, 0.9, 50)]
    pts = [np.asarray(p, dtype=float) for p in test_points]
    if any(np.linalg.norm(p) > 0.95 for p in pts):
        raise ValueError("test points must stay at least 0.05 from the boundary")
    prof = inverse_profile(n, alpha)
    res = [abs(apply_L_alpha(prof, p, alpha, resolution) - 1.0) for p in pts]
    center = abs(_center_value(n, alpha) - 1.0)
    name = resolution if isinstance(resolution, str) else f"{resolution[0]}x{resolution[1]}"
    return InverseReport(n, alpha, name, float(max(res)), float(center), [[float(v) for v in p] + [r] for p, r in zip(pts, res)])


def leading_f_profile(n: int, alpha: float, eps: float, volume: float = 1.0):
    """Leading profile of the capture density in rescaled coordinates.

    Returns ``(profile, scale)`` with profile(x) = (1 - |x|²)^{-α} and
    scale = |M| ε^{-n} / W(n, α), so that ε^n ∫_B scale·profile = |M|.
    """
    alpha = constants.check_alpha(alpha)
    if not eps > 0:
        raise ValueError("eps must be positive")

    def f(y):
        return (1.0 - np.sum(np.asarray(y) ** 2, axis=-1)) ** (-alpha)

    scale = volume * eps ** (-n) / constants.weight_integral(n, alpha)
    return BallFunction(f, n, alpha, radial=True), scale


def leading_capture_constant(n: int, alpha: float, volume: float, eps: float) -> float:
    """ε^{2α-n} |M| C(n,-α) / (c_α W(n,α)), the leading mean capture time."""
    alpha = constants.check_alpha(alpha)
    num = constants.signed_levy_constant(n, -alpha)
    return eps ** (2 * alpha - n) * volume * num / (constants.ball_inverse_constant(n, alpha) * constants.weight_integral(n, alpha))


def radial_inner_product(u: BallFunction, v: BallFunction, alpha: float, nodes: int = 24, resolution=(40, 256)):
    """⟨u, L_α v⟩ and ⟨L_α u, v⟩ for radial u, v with no boundary blow-up.

    L_α v picks up a (1 - ρ)^{2α} term at the sphere, so the outer integral
    in ρ = |x| uses Gauss–Legendre after the grading ρ = 1 - (1 - σ)^4.
    Both orders share the same nodes.
    """
    if not (u.radial and v.radial):
        raise ValueError("both functions must be radial")
    if u.edge_exponent or v.edge_exponent:
        raise ValueError("inner products are implemented for bounded functions only")
    n = u.n
    z, w = np.polynomial.legendre.leggauss(nodes)
    sig = 0.5 * (1 + z)
    rho = 1 - (1 - sig) ** 4
    w = 2 * w * (1 - sig) ** 3 * constants.sphere_area(n) * rho ** (n - 1)
    e = np.zeros(n)
    e[0] = 1.0
    pts = rho[:, None] * e
    uv = np.array([u(p) for p in pts])
    vv = np.array([v(p) for p in pts])
    Lu = np.array([apply_L_alpha(u, p, alpha, resolution) for p in pts])
    Lv = np.array([apply_L_alpha(v, p, alpha, resolution) for p in pts])
    return float(np.sum(w * uv * Lv)), float(np.sum(w * Lu * vv))
