"""Geometry of the flat torus, the round sphere and Euclidean space.

Points are plain numpy arrays.  Torus points live in [0, 1)^n, sphere points
are unit vectors of R^{n+1}, Euclidean points are vectors of R^n.  Every
function broadcasts over leading axes, so a batch of points has shape
``(..., ambient_dim)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import check_dim

__all__ = [
    "Kind",
    "Manifold",
    "torus",
    "sphere",
    "euclidean",
    "exp_map",
    "distance",
    "uniform_point",
    "uniform_direction",
    "tangent_project",
]

TANGENCY_TOL = 1e-10


class Kind(str, enum.Enum):
    TORUS = "torus"
    SPHERE = "sphere"
    EUCLIDEAN = "ball"


@dataclass(frozen=True)
class Manifold:
    """Descriptor of one of the three supported geometries."""

    kind: Kind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        check_dim(self.n)

    @property
    def ambient_dim(self) -> int:
        return self.n + 1 if self.kind is Kind.SPHERE else self.n

    @property
    def volume(self) -> float:
        if self.kind is Kind.TORUS:
            return 1.0
        if self.kind is Kind.SPHERE:
            k = self.n + 1
            return 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)
        raise ValueError("Euclidean space has no finite volume")

    @property
    def diameter(self) -> float:
        if self.kind is Kind.TORUS:
            return math.sqrt(self.n) / 2
        if self.kind is Kind.SPHERE:
            return math.pi
        return math.inf

    @property
    def compact(self) -> bool:
        return self.kind is not Kind.EUCLIDEAN

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.ambient_dim:
            raise ValueError(f"expected points with {self.ambient_dim} coordinates, got shape {p.shape}")
        if self.kind is Kind.TORUS:
            return np.mod(p, 1.0)
        if self.kind is Kind.SPHERE:
            nrm = np.linalg.norm(p, axis=-1, keepdims=True)
            if np.any(np.abs(nrm - 1.0) > 1e-8):
                raise ValueError("sphere points must have unit norm")
            return p / nrm
        return p


def torus(n: int = 2) -> Manifold:
    return Manifold(Kind.TORUS, n)


def sphere(n: int = 2) -> Manifold:
    return Manifold(Kind.SPHERE, n)


def euclidean(n: int = 2) -> Manifold:
    return Manifold(Kind.EUCLIDEAN, n)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def tangent_project(p, z):
    """Project ambient vectors ``z`` onto the tangent space of the sphere at ``p``."""
    return z - _dot(z, p)[..., None] * p


def exp_map(M: Manifold, p, v, t):
    """Follow the unit-speed geodesic from ``p`` in direction ``v`` for time ``t``.

    On the sphere the result is renormalised to unit length.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("geodesic time must be non-negative")
    tt = t[..., None]
    if M.kind is Kind.TORUS:
        return np.mod(p + tt * v, 1.0)
    if M.kind is Kind.EUCLIDEAN:
        return p + tt * v
    if np.any(np.abs(_dot(p, v)) > TANGENCY_TOL):
        raise ValueError("direction is not tangent to the sphere at the base point")
    q = np.cos(tt) * p + np.sin(tt) * v
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def distance(M: Manifold, p, q):
    """Geodesic distance, symmetric in its arguments."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if M.kind is Kind.TORUS:
        d = np.abs(p - q) % 1.0
        d = np.minimum(d, 1.0 - d)
        return np.sqrt(_dot(d, d))
    if M.kind is Kind.SPHERE:
        # arctan2 form is accurate at both small and near-antipodal separation
        s = np.linalg.norm(p - q, axis=-1)
        c = np.linalg.norm(p + q, axis=-1)
        return 2.0 * np.arctan2(s, c)
    d = p - q
    return np.sqrt(_dot(d, d))


def uniform_point(M: Manifold, rng: np.random.Generator, size=None):
    """Sample from the normalised Riemannian volume of a compact manifold."""
    if not M.compact:
        raise ValueError("uniform sampling needs a compact manifold")
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (M.ambient_dim,)
    if M.kind is Kind.TORUS:
        return rng.random(shape)
    z = rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def uniform_direction(M: Manifold, p, rng: np.random.Generator):
    """Uniform unit tangent vector(s) at ``p``.

    On the sphere a Gaussian ambient vector is projected onto the tangent
    space; the probability-zero degenerate projections are redrawn.
    """
    p = np.asarray(p, dtype=float)
    z = rng.standard_normal(p.shape)
    if M.kind is not Kind.SPHERE:
        return z / np.linalg.norm(z, axis=-1, keepdims=True)
    v = tangent_project(p, z)
    nrm = np.linalg.norm(v, axis=-1, keepdims=True)
    bad = nrm[..., 0] < 1e-12
    while np.any(bad):
        z2 = rng.standard_normal(p.shape)
        v = np.where(bad[..., None], tangent_project(p, z2), v)
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        bad = nrm[..., 0] < 1e-12
    v = v / nrm
    # one more projection removes the rounding component along p
    v = tangent_project(p, v)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
