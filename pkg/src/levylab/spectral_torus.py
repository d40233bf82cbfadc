"""The jump generator on the flat torus as a Fourier multiplier.

On T^n = R^n / Z^n the generator of the isotropic 2α-stable flight is
``-(-Δ)^α``: the Fourier mode exp(2πi k·x) is multiplied by ``-|2πk|^{2α}``.
This module applies that multiplier and its pseudo-inverse on uniform grids,
solves the narrow-capture problem in the (F, C) form

    u = A⁺(F - 1_Ω) + C,      u = 0 on the target ball,   ∫ F = |Ω|,

and builds the discrete Green's function.
"""

from __future__ import annotations

import functools
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, sparse
from scipy.special import roots_jacobi

from . import constants
from .manifold import torus as _torus_manifold

__all__ = [
    "TorusGrid",
    "SpectralField",
    "CaptureSolution",
    "DirichletReport",
    "ConvergenceError",
    "apply_generator",
    "apply_pseudo_inverse",
    "multiplier_from_polar_integral",
    "solve_capture",
    "green_function",
    "dirichlet_check",
    "f_profile_similarity",
    "write_field",
    "read_field",
]

DENSE_LIMIT = 4000
DUMP_MAGIC = b"LVYT"
_DUMP_HEADER = struct.Struct("<4sii dd")


def _irfftn(coeffs, grid):
    return np.fft.irfftn(coeffs, s=grid.shape, axes=tuple(range(grid.n)))


class ConvergenceError(RuntimeError):
    """A quadrature or iterative solve missed its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with ``N`` points per axis on T^n."""

    n: int
    N: int

    def __post_init__(self):
        constants.check_dim(self.n)
        if self.N < 16 or self.N % 2:
            raise ValueError("grid size N must be even and >= 16")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def shape(self):
        return (self.N,) * self.n

    def coords(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        x = np.arange(self.N) * self.h
        return np.meshgrid(*([x] * self.n), indexing="ij")

    def frequency_norm(self):
        """|2πk| on the real-FFT half lattice (symmetric integer frequencies)."""
        full = np.fft.fftfreq(self.N, d=1.0 / self.N)
        half = np.fft.rfftfreq(self.N, d=1.0 / self.N)
        axes = [full] * (self.n - 1) + [half]
        ks = np.meshgrid(*axes, indexing="ij")
        return 2 * np.pi * np.sqrt(sum(k**2 for k in ks))

    def symbol(self, alpha):
        """Generator multiplier -|2πk|^{2α} on the half lattice."""
        return -self.frequency_norm() ** (2 * alpha)

    def inverse_symbol(self, alpha):
        s = self.symbol(alpha)
        out = np.zeros_like(s)
        nz = s != 0
        out[nz] = 1.0 / s[nz]
        return out

    def distance_to(self, p0):
        p0 = np.mod(np.asarray(p0, dtype=float), 1.0)
        d2 = 0.0
        for x, c in zip(self.coords(), p0):
            d = np.abs(x - c)
            d = np.minimum(d, 1.0 - d)
            d2 = d2 + d * d
        return np.sqrt(d2)

    def inner(self, u, v) -> float:
        """L² inner product ∫ u v dx by the grid rule."""
        return float(np.sum(np.asarray(u) * np.asarray(v)) * self.h**self.n)


class SpectralField:
    """Real grid function with lazily cached Fourier coefficients."""

    def __init__(self, grid: TorusGrid, values=None, coeffs=None):
        if (values is None) == (coeffs is None):
            raise ValueError("give exactly one of values or coeffs")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coeffs = coeffs
        if self._values is not None and self._values.shape != grid.shape:
            raise ValueError(f"values must have shape {grid.shape}")

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = _irfftn(self._coeffs, self.grid)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = np.fft.rfftn(self._values)
        return self._coeffs

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __add__(self, other):
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return SpectralField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SpectralField(self.grid, self.values * float(c))

    __rmul__ = __mul__


def apply_generator(field: SpectralField, alpha: float) -> SpectralField:
    """Apply A = -(-Δ)^α."""
    constants.check_alpha(alpha)
    return SpectralField(field.grid, coeffs=field.coeffs * field.grid.symbol(alpha))


def apply_pseudo_inverse(field: SpectralField, alpha: float) -> SpectralField:
    """Apply A⁺: inverse multiplier on k ≠ 0, the mean is dropped."""
    constants.check_alpha(alpha)
    return SpectralField(field.grid, coeffs=field.coeffs * field.grid.inverse_symbol(alpha))


@functools.lru_cache(maxsize=64)
def _unit_cosine_integral(alpha: float):
    """∫_0^∞ (cos s - 1) s^{-1-2α} ds and its error estimate."""
    # near 0 the integrand is s^{1-2α} times the smooth (cos s - 1)/s²
    with warnings.catch_warnings():
        # QAWF flags harmless cycles for the slowly decaying tail
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, e1 = integrate.quad(lambda s: -0.5 * np.sinc(s / (2 * np.pi)) ** 2, 0.0, 1.0, weight="alg", wvar=(1 - 2 * alpha, 0.0), epsabs=0, epsrel=1e-13, limit=200)
        tail, e2 = integrate.quad(lambda s: s ** (-1 - 2 * alpha), 1.0, np.inf, weight="cos", wvar=1.0, epsabs=1e-15, limlst=100)
    return head + tail - 1.0 / (2 * alpha), e1 + e2


def _radial_cosine_integral(a: float, alpha: float):
    """∫_0^∞ (cos(a t) - 1) t^{-1-2α} dt = |a|^{2α} ∫_0^∞ (cos s - 1) s^{-1-2α} ds."""
    a = abs(a)
    if a == 0.0:
        return 0.0, 0.0
    val, err = _unit_cosine_integral(float(alpha))
    f = a ** (2 * alpha)
    return f * val, f * err


def multiplier_from_polar_integral(k, alpha: float, n: int | None = None, *, rtol: float = 1e-7, nodes: int = 24, return_error: bool = False):
    """Evaluate C(n,α) ∫_{S^{n-1}} ∫_0^∞ (cos(2π t k·v) - 1) t^{-1-2α} dt dS(v).

    The radial integral uses adaptive Fourier quadrature; the angular one is
    Gauss–Jacobi on the arcs between zeros of k·v (n = 2) or on the polar
    variable z = v·k/|k| (n = 3).  The result should equal -|2πk|^{2α}.
    """
    k = np.asarray(k, dtype=float)
    n = k.size if n is None else int(n)
    if k.size != n or n not in (2, 3):
        raise ValueError("k must be a non-zero integer vector with 2 or 3 entries")
    if not np.any(k):
        raise ValueError("k must be non-zero")
    alpha = constants.check_alpha(alpha)
    Cn = constants.levy_constant(n, alpha)
    knorm = float(np.linalg.norm(k))
    err = 0.0

    def radial(a):
        nonlocal err
        val, e = _radial_cosine_integral(2 * np.pi * a, alpha)
        err += abs(e)
        return val

    y, w = roots_jacobi(nodes, 2 * alpha, 2 * alpha)
    total = 0.0
    if n == 2:
        phi_k = math.atan2(k[1], k[0])
        # zeros of k·v split the circle into two arcs; the radial integral
        # vanishes like |k·v|^{2α} at their ends
        edges = [phi_k - np.pi / 2 + j * np.pi for j in range(3)]
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = (hi - lo) / 2
            phis = lo + half * (1 + y)
            vals = np.array([radial(k[0] * math.cos(p) + k[1] * math.sin(p)) for p in phis])
            # divide out the |k·v|^{2α} behaviour that the Jacobi weight absorbs
            dist = (phis - lo) * (hi - phis) / half**2
            total += half * np.sum(w * vals / dist ** (2 * alpha))
    else:
        yz, wz = roots_jacobi(nodes, 0.0, 2 * alpha)
        z = 0.5 * (1 + yz)
        vals = np.array([radial(knorm * zz) for zz in z])
        # ∫_{S^2} f(k·v) dS = 4π ∫_0^1 f(|k| z) dz for even f
        total = 4 * np.pi * 0.5 * np.sum(wz * vals / (2 * z) ** (2 * alpha))
    value = Cn * total
    scale = Cn * 4 * np.pi * err
    if scale > rtol * abs(value):
        raise ConvergenceError(f"polar quadrature error estimate {scale:.2e} above tolerance", achieved=scale)
    return (value, scale) if return_error else value


@dataclass
class CaptureSolution:
    grid: TorusGrid
    alpha: float
    eps: float
    p0: np.ndarray
    u: SpectralField
    F: np.ndarray
    interior: np.ndarray = field(repr=False)
    C_eps: float = 0.0
    residual: float = 0.0
    method: str = "dense"

    @property
    def mean_u(self) -> float:
        return self.u.mean()


def _ball_mask(grid, p0, eps):
    return grid.distance_to(p0) <= eps


def _solve_dense(grid, alpha, mask, rhs_b):
    """Assemble A⁺ restricted to the ball from shifts of one kernel column."""
    h, n = grid.h, grid.n
    delta = np.zeros(grid.shape)
    delta[(0,) * n] = h ** (-n)
    g = _irfftn(np.fft.rfftn(delta) * grid.inverse_symbol(alpha), grid)
    idx = np.argwhere(mask)
    diff = tuple(((idx[:, None, a] - idx[None, :, a]) % grid.N) for a in range(n))
    G = g[diff] * h**n
    m = idx.shape[0]
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = G
    A[:m, m] = 1.0
    A[m, :m] = h**n
    return np.linalg.solve(A, rhs_b)


def _solve_krylov(grid, alpha, mask, rhs_b, tol):
    """Two CG solves with the SPD operator -A⁺|_ball, applied by FFT."""
    h, n = grid.h, grid.n
    m = int(mask.sum())
    inv = grid.inverse_symbol(alpha)
    buf = np.zeros(grid.shape)

    def matvec(x):
        buf[...] = 0.0
        buf[mask] = np.ravel(x)
        out = _irfftn(np.fft.rfftn(buf) * inv, grid)
        return -out[mask]

    op = sparse.linalg.LinearOperator((m, m), matvec=matvec, dtype=float)
    sols = []
    for rhs in (-rhs_b[:m], -np.ones(m)):
        x, info = sparse.linalg.cg(op, rhs, rtol=tol, atol=0.0, maxiter=20 * m)
        if info != 0:
            r = np.linalg.norm(op @ x - rhs) / np.linalg.norm(rhs)
            raise ConvergenceError(f"CG did not converge (relative residual {r:.2e})", achieved=r)
        sols.append(x)
    w1, w2 = sols
    C = (h**n * w1.sum() - rhs_b[m]) / (h**n * w2.sum())
    return np.concatenate([w1 - C * w2, [C]])


def solve_capture(grid: TorusGrid, alpha: float, eps: float, p0=None, *, method: str = "auto", tol: float = 1e-10) -> CaptureSolution:
    """Expected capture time of the closed ball B_eps(p0) on the grid.

    Unknowns are F on the grid points of the ball and the mean C; equations
    are u = 0 on the ball and h^n ΣF = |Ω|.  Systems with at most
    ``DENSE_LIMIT`` ball points are assembled densely, larger ones use CG.
    """
    alpha = constants.check_alpha(alpha)
    if eps < 3 * grid.h:
        raise ValueError("eps must be at least three grid spacings")
    p0 = np.full(grid.n, 0.5) if p0 is None else np.mod(np.asarray(p0, dtype=float), 1.0)
    mask = _ball_mask(grid, p0, eps)
    m = int(mask.sum())
    if m == grid.N**grid.n:
        raise np.linalg.LinAlgError("target ball covers the whole grid")
    h, n = grid.h, grid.n
    omega = SpectralField(grid, (~mask).astype(float))
    A_omega = apply_pseudo_inverse(omega, alpha).values
    b = np.concatenate([A_omega[mask], [omega.values.sum() * h**n]])
    if method == "auto":
        method = "dense" if m <= DENSE_LIMIT else "krylov"
    if method == "dense":
        sol = _solve_dense(grid, alpha, mask, b)
    elif method == "krylov":
        sol = _solve_krylov(grid, alpha, mask, b, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    F = sol[:m]
    C = float(sol[m])
    Fgrid = np.zeros(grid.shape)
    Fgrid[mask] = F
    u = apply_pseudo_inverse(SpectralField(grid, Fgrid) - omega, alpha)
    u = SpectralField(grid, u.values + C)

    Au = apply_generator(u, alpha).values
    dist = grid.distance_to(p0)
    band = dist >= eps + 3 * h
    residual = max(float(np.max(np.abs(Au[band] + 1.0))), float(np.max(np.abs(u.values[mask]))) / max(abs(C), 1.0))
    return CaptureSolution(grid, alpha, eps, p0, u, F, mask, C, residual, method)


def green_function(grid: TorusGrid, alpha: float, q) -> SpectralField:
    """Column G(·, q) = A⁺ δ_q of the discrete Green's function.

    ``q`` is a tuple of integer grid indices; δ_q has mass one.
    """
    delta = np.zeros(grid.shape)
    delta[tuple(int(i) % grid.N for i in q)] = grid.h ** (-grid.n)
    return apply_pseudo_inverse(SpectralField(grid, delta), alpha)


@dataclass
class DirichletReport:
    symmetry: float
    positivity: float
    poincare: float
    constant_kernel: float


def dirichlet_check(grid: TorusGrid, alpha: float, trials: int, seed: int = 0) -> DirichletReport:
    """Symmetry, sign and spectral-gap diagnostics on random fields.

    ``symmetry``: max relative |<u,Av> - <Au,v>|; ``positivity``: max of
    <u,Au> (should be <= 0); ``poincare``: max of <u,Au> + (2π)^{2α}‖u-ū‖²
    (should be <= 0); ``constant_kernel``: max |A1|.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    gap = (2 * np.pi) ** (2 * alpha)
    sym = 0.0
    pos = -np.inf
    poinc = -np.inf
    for _ in range(trials):
        u = SpectralField(grid, rng.standard_normal(grid.shape))
        v = SpectralField(grid, rng.standard_normal(grid.shape))
        Au, Av = apply_generator(u, alpha), apply_generator(v, alpha)
        a, b = grid.inner(u.values, Av.values), grid.inner(Au.values, v.values)
        sym = max(sym, abs(a - b) / max(abs(a), abs(b), 1e-300))
        uAu = grid.inner(u.values, Au.values)
        pos = max(pos, uAu)
        uc = u.values - u.mean()
        poinc = max(poinc, (uAu + gap * grid.inner(uc, uc)) / abs(uAu))
    one = apply_generator(SpectralField(grid, np.ones(grid.shape)), alpha)
    return DirichletReport(sym, pos, poinc, float(np.max(np.abs(one.values))))


def f_profile_similarity(sol: CaptureSolution) -> float:
    """Cosine similarity of F with (1 - |x|²)^{-α} in coordinates rescaled by eps.

    Only ball points at least one grid spacing inside the boundary are used.
    """
    dist = sol.grid.distance_to(sol.p0)
    x = dist[sol.interior] / sol.eps
    keep = dist[sol.interior] <= sol.eps - sol.grid.h
    prof = (1.0 - x[keep] ** 2) ** (-sol.alpha)
    F = sol.F[keep]
    return float(F @ prof / (np.linalg.norm(F) * np.linalg.norm(prof)))


def write_field(path, field: SpectralField, alpha: float, eps: float) -> None:
    """Binary dump: header (magic "LVYT", int32 n, int32 N, f64 alpha, f64 eps), then row-major f64 values, little endian."""
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(DUMP_MAGIC, g.n, g.N, float(alpha), float(eps)))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field(path):
    """Inverse of ``write_field``; returns ``(field, alpha, eps)``."""
    with open(path, "rb") as fh:
        head = fh.read(_DUMP_HEADER.size)
        magic, n, N, alpha, eps = _DUMP_HEADER.unpack(head)
        if magic != DUMP_MAGIC:
            raise ValueError("not a field dump (bad magic)")
        data = np.frombuffer(fh.read(), dtype="<f8")
    grid = TorusGrid(n, N)
    return SpectralField(grid, data.reshape(grid.shape).copy()), alpha, eps


def torus_manifold(n: int):
    return _torus_manifold(n)
