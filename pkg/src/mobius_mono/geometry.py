"""Dimension-generic Euclidean primitives.

Vectors are plain 1-D numpy arrays of float64 (ambient dimension n >= 2 is a
runtime value).  Spheres, hyperplanes, balls, half-spaces, Euclidean
isometries and orthonormal tangent frames are small immutable value types.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, RankDeficient

#: default tolerance for algebraic consistency checks
ALGEBRAIC_TOL = 1e-10
#: default tolerance for exact floating-point arithmetic identities
ARITHMETIC_TOL = 1e-12


def as_vec(x) -> np.ndarray:
    """Coerce to a finite float64 vector of dimension >= 2."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"expected a vector of dimension >= 2, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


class ExtendedPoint:
    """A point of R^n or the point at infinity (one-point compactification)."""

    __slots__ = ("_vec",)

    def __init__(self, vec=None):
        self._vec = None if vec is None else as_vec(vec)

    @classmethod
    def finite(cls, vec) -> "ExtendedPoint":
        return cls(as_vec(vec))

    @classmethod
    def infinity(cls) -> "ExtendedPoint":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self._vec is None

    @property
    def vec(self) -> np.ndarray:
        if self._vec is None:
            raise ValueError("point at infinity has no coordinates")
        return self._vec

    def __repr__(self):
        return "ExtendedPoint(inf)" if self.is_infinite else f"ExtendedPoint({self._vec})"

    def isclose(self, other: "ExtendedPoint", tol: float = ARITHMETIC_TOL) -> bool:
        if self.is_infinite or other.is_infinite:
            return self.is_infinite and other.is_infinite
        return bool(np.linalg.norm(self._vec - other._vec) <= tol * (1.0 + np.linalg.norm(self._vec)))


INFINITY = ExtendedPoint.infinity()


def extended(x) -> ExtendedPoint:
    """Coerce an array-like or ExtendedPoint to an ExtendedPoint."""
    if isinstance(x, ExtendedPoint):
        return x
    return ExtendedPoint.finite(x)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class Hyperplane:
    """The set {x : <unit_normal, x> = offset}."""

    unit_normal: np.ndarray
    offset: float

    def __post_init__(self):
        u = as_vec(self.unit_normal)
        if abs(np.linalg.norm(u) - 1.0) > ARITHMETIC_TOL:
            raise ValueError("hyperplane normal must be unit length")
        object.__setattr__(self, "unit_normal", u)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.unit_normal.size

    def signed_distance(self, x) -> float:
        return float(np.dot(self.unit_normal, as_vec(x)) - self.offset)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains(self, x) -> bool:
        return bool(np.linalg.norm(as_vec(x) - self.center) < self.radius)


@dataclass(frozen=True)
class HalfSpace:
    """The open set {x : <unit_normal, x> < offset}."""

    unit_normal: np.ndarray
    offset: float

    def __post_init__(self):
        u = as_vec(self.unit_normal)
        if abs(np.linalg.norm(u) - 1.0) > ARITHMETIC_TOL:
            raise ValueError("half-space normal must be unit length")
        object.__setattr__(self, "unit_normal", u)
        object.__setattr__(self, "offset", float(self.offset))

    def contains(self, x) -> bool:
        return bool(np.dot(self.unit_normal, as_vec(x)) < self.offset)


@dataclass(frozen=True)
class Isometry:
    """Euclidean isometry x |-> linear_part @ x + translation."""

    linear_part: np.ndarray
    translation: np.ndarray
    _tol: float = field(default=ARITHMETIC_TOL, repr=False)

    def __post_init__(self):
        a = np.asarray(self.linear_part, dtype=float)
        t = as_vec(self.translation)
        n = t.size
        if a.shape != (n, n):
            raise ValueError("linear part shape does not match translation")
        if np.max(np.abs(a.T @ a - np.eye(n))) > self._tol:
            raise ValueError("linear part is not orthogonal")
        object.__setattr__(self, "linear_part", a)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(np.eye(n), np.zeros(n))

    @property
    def dim(self) -> int:
        return self.translation.size

    def apply(self, points):
        """Apply to a single vector or an (..., n) stack of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.linear_part.T + self.translation

    def apply_extended(self, x: ExtendedPoint) -> ExtendedPoint:
        if x.is_infinite:
            return INFINITY
        return ExtendedPoint.finite(self.apply(x.vec))

    def inverse(self) -> "Isometry":
        ainv = self.linear_part.T
        return Isometry(ainv, -ainv @ self.translation)

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: x |-> self(other(x))."""
        return Isometry(
            self.linear_part @ other.linear_part,
            self.linear_part @ other.translation + self.translation,
        )

    def is_identity(self, tol: float = ALGEBRAIC_TOL) -> bool:
        n = self.dim
        return (
            np.max(np.abs(self.linear_part - np.eye(n))) <= tol
            and np.max(np.abs(self.translation)) <= tol
        )


@dataclass(frozen=True)
class Frame:
    """k orthonormal vectors spanning a tangent space; rows of `vectors`."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2:
            raise ValueError("frame vectors must form a (k, n) array")
        gram = v @ v.T
        if np.max(np.abs(gram - np.eye(v.shape[0]))) > ALGEBRAIC_TOL:
            raise ValueError("frame vectors are not orthonormal")
        object.__setattr__(self, "vectors", v)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]


def _fix_signs(q: np.ndarray) -> np.ndarray:
    """Make the first nonzero coordinate of each frame vector nonnegative."""
    q = q.copy()
    for i in range(q.shape[0]):
        nz = np.nonzero(np.abs(q[i]) > 1e-14)[0]
        if nz.size and q[i, nz[0]] < 0:
            q[i] = -q[i]
    return q


def orthonormal_frame(columns, tol: float = 1e-10) -> Frame:
    """Orthonormalize k independent vectors into a Frame spanning the same space.

    Uses a QR factorization followed by a re-orthogonalization pass; raises
    RankDeficient if the smallest singular value of the column matrix is <= tol.
    """
    cols = np.column_stack([as_vec(c) for c in columns])
    svals = np.linalg.svd(cols, compute_uv=False)
    if svals[-1] <= tol:
        raise RankDeficient(
            f"columns numerically dependent (smallest singular value {svals[-1]:.3e})"
        )
    q, _ = np.linalg.qr(cols)
    q, _ = np.linalg.qr(q)  # re-orthogonalize for stability
    return Frame(_fix_signs(q.T))


def project(x, frame: Frame):
    """Split a vector into (tangential, normal) parts relative to a frame."""
    v = as_vec(x)
    if v.size != frame.n:
        raise ValueError("vector dimension does not match frame ambient dimension")
    coeffs = frame.vectors @ v
    tangential = coeffs @ frame.vectors
    return tangential, v - tangential


def fit_sphere(points, degeneracy_tol: float = 1e-10):
    """Least-squares sphere through m >= n+2 points.

    Solves the algebraic system 2<p, c> + t = |p|^2 with t = r^2 - |c|^2.
    Returns (Sphere, residual) where residual = max | |p - c| - r |.
    Raises Degenerate when the design matrix is (numerically) singular, which
    happens exactly when the points lie near a hyperplane.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be an (m, n) array")
    m, n = pts.shape
    if m < n + 2:
        raise ValueError(f"need at least n+2 = {n + 2} points, got {m}")
    design = np.column_stack([2.0 * pts, np.ones(m)])
    rhs = np.einsum("ij,ij->i", pts, pts)
    svals = np.linalg.svd(design, compute_uv=False)
    if svals[-1] <= degeneracy_tol * svals[0]:
        raise Degenerate("points lie near a hyperplane; sphere fit is singular")
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center, t = sol[:n], sol[n]
    r2 = t + center @ center
    if r2 <= 0:
        raise Degenerate("sphere fit produced a non-positive squared radius")
    radius = float(np.sqrt(r2))
    residual = float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)))
    return Sphere(center, radius), residual
