"""Closed-form constants for isotropic 2α-stable jump processes.

All functions are pure and vectorise poorly on purpose: they take scalar
``n`` (dimension) and ``alpha`` (stability index, the process is 2α-stable)
and return Python floats.

Notation used throughout the package::

    C(n, a)   Lévy-measure normalisation, fractional Laplacian convention
    c(n, a)   narrow-capture prefactor, mean capture time ~ eps^(2a-n) |M| c
    c_a       inverse constant of the ball Riesz operator, L^{-1} 1 = -c_a (1-|x|^2)^-a
    W(n, a)   weighted ball volume  int_B (1-|x|^2)^-a dx
"""

from __future__ import annotations

import math

from scipy.special import beta as _beta
from scipy.special import gamma as _gamma

__all__ = [
    "check_alpha",
    "check_dim",
    "levy_constant",
    "signed_levy_constant",
    "capture_constant",
    "ball_inverse_constant",
    "weight_integral",
    "identity_residual",
    "error_term",
    "getoor_ball_mean_exit",
    "sphere_area",
]

ERROR_TERM_KINDS = ("anosov", "sphere", "torus")


def check_alpha(alpha: float) -> float:
    """Validate a stability index, 0 < alpha < 1."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def check_dim(n: int) -> int:
    """Validate a manifold dimension, integer n >= 2."""
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    return int(n)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2) / _gamma(n / 2)


def levy_constant(n: int, alpha: float) -> float:
    """Normalisation C(n, α) = 4^α Γ(n/2+α) / (π^{n/2} |Γ(-α)|)."""
    n, alpha = check_dim(n), check_alpha(alpha)
    return signed_levy_constant(n, alpha)


def signed_levy_constant(n: int, alpha: float) -> float:
    """C(n, α) continued to α ∈ (-1, 0) ∪ (0, 1).

    For negative index this is the Riesz-potential constant: the kernel of
    (-Δ)^{-a} on R^n is C(n, -a) |x|^{2a-n}.
    """
    n = check_dim(n)
    alpha = float(alpha)
    if alpha == 0.0 or not -1.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (-1, 0) or (0, 1), got {alpha!r}")
    return 4.0**alpha * _gamma(n / 2 + alpha) / (math.pi ** (n / 2) * abs(_gamma(-alpha)))


def capture_constant(n: int, alpha: float) -> float:
    """Narrow-capture prefactor c(n, α).

    The average expected capture time of a ball of radius ``eps`` on a closed
    n-manifold M behaves like ``eps**(2α-n) * |M| * c(n, α)``.

    For n >= 3::

        c = 2^{1-2α} Γ(n/2-α) Γ(n/2-α+1) / (π^{n/2} (n-2) Γ(n/2-1))

    For n = 2 we use the limit of the same expression,
    ``4^{-α} (1-α) Γ(1-α)^2 / π``. The frequently quoted n = 2 form with
    π² in the denominator is smaller by a factor π; it violates
    ``c · c_a · W = C(n, -a)`` and disagrees with the spectral solvers.
    """
    n, alpha = check_dim(n), check_alpha(alpha)
    if n == 2:
        return 2.0 ** (-2 * alpha) * (1 - alpha) * _gamma(1 - alpha) ** 2 / math.pi
    num = 2.0 ** (1 - 2 * alpha) * _gamma(n / 2 - alpha) * _gamma(n / 2 - alpha + 1)
    return num / (math.pi ** (n / 2) * (n - 2) * _gamma(n / 2 - 1))


def ball_inverse_constant(n: int, alpha: float) -> float:
    """Constant c_α with L_α^{-1} 1 = -c_α (1 - |x|²)^{-α} on the unit ball.

    n = 2: π^{-2} sin((1-α)π).  n >= 3: the general expression whose radial
    factor ∫_0^1 r^{n-3} (1-r²)^{-α} dr equals B((n-2)/2, 1-α) / 2.
    """
    n, alpha = check_dim(n), check_alpha(alpha)
    s = math.sin((1 - alpha) * math.pi)
    if n == 2:
        return s / math.pi**2
    radial = 0.5 * _beta((n - 2) / 2, 1 - alpha)
    return (n - 2) * s * _gamma(n / 2 - alpha) / (math.pi ** (n / 2 + 1) * _gamma(1 - alpha)) * radial


def weight_integral(n: int, alpha: float) -> float:
    """W(n, α) = ∫_{B^n} (1-|x|²)^{-α} dx = π^{n/2} Γ(1-α) / Γ(n/2+1-α).

    Obtained by the Beta-function reduction of the radial integral
    ω_{n-1} ∫_0^1 r^{n-1} (1-r²)^{-α} dr.
    """
    n, alpha = check_dim(n), check_alpha(alpha)
    return math.pi ** (n / 2) * _gamma(1 - alpha) / _gamma(n / 2 + 1 - alpha)


def identity_residual(n: int, alpha: float) -> float:
    """|c(n,α) c_α W(n,α) - C(n,-α)|, zero up to rounding."""
    lhs = capture_constant(n, alpha) * ball_inverse_constant(n, alpha) * weight_integral(n, alpha)
    return abs(lhs - signed_levy_constant(n, -alpha))


def error_term(n: int, alpha: float, eps: float, kind: str = "sphere") -> float:
    """Relative size E(α, ε) of the remainder in the capture-time expansion.

    ``kind`` is ``"sphere"`` or ``"anosov"`` (general three-case rule) or
    ``"torus"`` (sharper rule, only α = 1/2 is special).
    """
    n, alpha = check_dim(n), check_alpha(alpha)
    if kind not in ERROR_TERM_KINDS:
        raise ValueError(f"unknown manifold kind {kind!r}")
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if alpha == 0.5:
        return eps * abs(math.log(eps))
    if kind == "torus" or alpha > 0.5:
        return max(eps, eps ** (n - 2 * alpha))
    return eps ** (2 * alpha)


def getoor_ball_mean_exit(n: int, alpha: float, x) -> float:
    """Expected exit time of the isotropic 2α-stable process from the unit ball.

    Γ(n/2) / (4^α Γ(1+α) Γ(n/2+α)) · (1-|x|²)^α, for a start point |x| < 1.
    This is quoted knowledge, checked against Monte Carlo in the test suite.
    """
    n, alpha = check_dim(n), check_alpha(alpha)
    r2 = float(sum(float(c) ** 2 for c in (x if hasattr(x, "__iter__") else [x])))
    if r2 >= 1.0:
        raise ValueError("start point must lie strictly inside the unit ball")
    pref = _gamma(n / 2) / (4.0**alpha * _gamma(1 + alpha) * _gamma(n / 2 + alpha))
    return pref * (1.0 - r2) ** alpha
