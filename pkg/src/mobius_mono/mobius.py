"""Moebius transformations on compactified n-space.

A Moebius map is stored as a word of reflections in spheres or hyperplanes,
applied right-to-left.  Any map not fixing infinity factors uniquely as
(Euclidean isometry) o (reflection in its isometric sphere); the factorization
is computed numerically from probe points and validated at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    FixesInfinity,
    InvalidPrescribedPoint,
    OriginIsPole,
    PoleEncountered,
    ValidationFailed,
)
from .geometry import (
    ALGEBRAIC_TOL,
    INFINITY,
    Ball,
    ExtendedPoint,
    HalfSpace,
    Hyperplane,
    Isometry,
    Sphere,
    as_vec,
    extended,
)

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def _halton(count: int, dims: int) -> np.ndarray:
    """Deterministic low-discrepancy points in the unit cube [0,1)^dims."""
    out = np.empty((count, dims))
    for d in range(dims):
        base = _PRIMES[d % len(_PRIMES)]
        for i in range(count):
            f, x, idx = 1.0, 0.0, i + 1
            while idx > 0:
                f /= base
                x += f * (idx % base)
                idx //= base
            out[i, d] = x
    return out


@dataclass(frozen=True)
class Reflection:
    """Reflection in a sphere (inversion) or in a hyperplane (mirror)."""

    surface: Union[Sphere, Hyperplane]

    @property
    def is_sphere(self) -> bool:
        return isinstance(self.surface, Sphere)

    @property
    def dim(self) -> int:
        return self.surface.dim

    def apply_extended(self, x: ExtendedPoint) -> ExtendedPoint:
        if self.is_sphere:
            s = self.surface
            if x.is_infinite:
                return ExtendedPoint.finite(s.center)
            d = x.vec - s.center
            d2 = float(d @ d)
            if d2 == 0.0:
                return INFINITY
            return ExtendedPoint.finite(s.center + (s.radius**2 / d2) * d)
        if x.is_infinite:
            return INFINITY
        h = self.surface
        return ExtendedPoint.finite(x.vec - 2.0 * h.signed_distance(x.vec) * h.unit_normal)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        """Apply to an (..., n) stack of finite points; poles are errors."""
        p = np.asarray(points, dtype=float)
        if self.is_sphere:
            s = self.surface
            d = p - s.center
            d2 = np.einsum("...i,...i->...", d, d)
            if np.any(d2 == 0.0):
                raise PoleEncountered("a point coincides with the inversion center")
            return s.center + (s.radius**2 / d2)[..., None] * d
        h = self.surface
        sd = p @ h.unit_normal - h.offset
        return p - 2.0 * sd[..., None] * h.unit_normal

    def conformal_factors(self, points: np.ndarray) -> np.ndarray:
        """Local metric scaling at each point (R^2/|x-b|^2 for inversions)."""
        p = np.asarray(points, dtype=float)
        if self.is_sphere:
            s = self.surface
            d = p - s.center
            d2 = np.einsum("...i,...i->...", d, d)
            if np.any(d2 == 0.0):
                raise PoleEncountered("conformal factor requested at the pole")
            return s.radius**2 / d2
        return np.ones(p.shape[:-1])


def reflect(refl: Reflection, x) -> ExtendedPoint:
    """Apply a single reflection to an extended point.

    Sphere case: sigma(x) = b + R^2 (x-b)/|x-b|^2 with sigma(b) = inf and
    sigma(inf) = b.  Hyperplane case: mirror reflection, inf fixed.
    """
    return refl.apply_extended(extended(x))


@dataclass(frozen=True)
class Decomposition:
    """Isometric-sphere factorization phi = psi o sigma_{S(b,R)}.

    b = phi^-1(inf); a = sigma(0); direction = phi(inf) - phi(a) = psi(b) - psi(0).
    """

    b: np.ndarray
    R: float
    psi: Isometry
    a: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        b = as_vec(self.b)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "a", as_vec(self.a))
        object.__setattr__(self, "direction", as_vec(self.direction))
        nb = np.linalg.norm(b)
        if nb == 0.0:
            raise ValueError("decomposition requires b != 0")
        if abs(np.linalg.norm(self.direction) - nb) > ALGEBRAIC_TOL * (1.0 + nb):
            raise ValueError("|direction| must equal |b|")
        a_expected = ((nb**2 - self.R**2) / nb**2) * b
        if np.max(np.abs(self.a - a_expected)) > 1e-12 * (1.0 + nb):
            raise ValueError("a must equal ((|b|^2-R^2)/|b|^2) b")

    @property
    def sigma(self) -> Reflection:
        return Reflection(Sphere(self.b, self.R))


class MobiusMap:
    """A word of reflections applied right-to-left, with cached decomposition."""

    def __init__(self, word: Sequence[Reflection]):
        word = tuple(word)
        if not word:
            raise ValueError("word must contain at least one reflection")
        dims = {w.dim for w in word}
        if len(dims) != 1:
            raise ValueError("all reflections in a word must share the dimension")
        self.word = word
        self._decomposition: Optional[Decomposition] = None
        self._decomposition_error: Optional[Exception] = None
        try:
            self._decomposition = _decompose(self)
        except (FixesInfinity, OriginIsPole) as exc:
            self._decomposition_error = exc

    @property
    def dim(self) -> int:
        return self.word[0].dim

    def apply(self, x) -> ExtendedPoint:
        y = extended(x)
        for refl in reversed(self.word):
            y = refl.apply_extended(y)
        return y

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        for refl in reversed(self.word):
            p = refl.apply_points(p)
        return p

    def inverse(self) -> "MobiusMap":
        return MobiusMap(tuple(reversed(self.word)))

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other."""
        return MobiusMap(self.word + other.word)

    @property
    def decomposition(self) -> Decomposition:
        if self._decomposition is None:
            raise self._decomposition_error
        return self._decomposition


def apply(mobius_map: MobiusMap, x) -> ExtendedPoint:
    return mobius_map.apply(x)


def inverse(mobius_map: MobiusMap) -> MobiusMap:
    return mobius_map.inverse()


def conformal_factor(mobius_map: MobiusMap, x) -> float:
    """Local metric scaling of the map at a finite point.

    Product of per-reflection factors along the orbit of x through the word.
    """
    y = as_vec(x)
    factor = 1.0
    word = mobius_map.word
    for i in range(len(word) - 1, -1, -1):
        refl = word[i]
        try:
            factor *= float(refl.conformal_factors(y))
            y = refl.apply_points(y)
        except PoleEncountered:
            raise PoleEncountered(f"pole hit at word index {i}", word_index=i) from None
    return factor


def conformal_factors(mobius_map: MobiusMap, points: np.ndarray) -> np.ndarray:
    """Vectorized conformal_factor over an (..., n) stack of points."""
    y = np.asarray(points, dtype=float)
    factor = np.ones(y.shape[:-1])
    for refl in reversed(mobius_map.word):
        factor = factor * refl.conformal_factors(y)
        y = refl.apply_points(y)
    return factor


def _probe_points(mobius_map: MobiusMap, b: np.ndarray, count: int = 32) -> np.ndarray:
    """Deterministic probe set scaled to |b|, away from poles of the word."""
    n = mobius_map.dim
    scale = np.linalg.norm(b)
    pts = (2.0 * _halton(4 * count, n) - 1.0) * 2.0 * scale
    keep = np.linalg.norm(pts - b, axis=1) > 1e-3 * scale
    # also avoid poles of intermediate reflections
    for i, p in enumerate(pts):
        if not keep[i]:
            continue
        try:
            conformal_factor(mobius_map, p)
        except PoleEncountered:
            keep[i] = False
    pts = pts[keep]
    if pts.shape[0] < count:
        raise ValidationFailed("could not assemble a clean probe set")
    return pts[:count]


def _decompose(mobius_map: MobiusMap, tol: float = 1e-8) -> Decomposition:
    n = mobius_map.dim
    image_inf = mobius_map.apply(INFINITY)
    if image_inf.is_infinite:
        raise FixesInfinity("map fixes infinity (Euclidean similarity)")
    # b = phi^-1(inf); the inverse word is the reversed word, so fold forward
    b_pt = INFINITY
    for refl in mobius_map.word:
        b_pt = refl.apply_extended(b_pt)
    if b_pt.is_infinite:
        raise FixesInfinity("inverse map fixes infinity")
    b = b_pt.vec
    nb = float(np.linalg.norm(b))
    if nb <= 1e-12:
        raise OriginIsPole("origin is the pole of the map")

    probes = _probe_points(mobius_map, b)
    # R^2 = |x0 - b|^2 * conformal_factor(x0) for any probe x0
    factors = conformal_factors(mobius_map, probes)
    r2_candidates = np.einsum("ij,ij->i", probes - b, probes - b) * factors
    r2 = float(np.median(r2_candidates))
    if np.max(np.abs(r2_candidates - r2)) > tol * r2:
        raise ValidationFailed("isometric-sphere radius is inconsistent across probes")
    radius = float(np.sqrt(r2))

    sigma = Reflection(Sphere(b, radius))
    # psi = phi o sigma is affine; recover it from images of 0 and scaled axes
    step = 0.371 * nb
    base = np.zeros(n)
    axes = step * np.eye(n)
    psi0 = mobius_map.apply_points(sigma.apply_points(base[None, :]))[0]
    cols = np.empty((n, n))
    for i in range(n):
        yi = mobius_map.apply_points(sigma.apply_points(axes[i][None, :]))[0]
        cols[:, i] = (yi - psi0) / step
    try:
        psi = Isometry(cols, psi0, _tol=tol)
    except ValueError as exc:
        raise ValidationFailed(f"factor psi is not an isometry: {exc}") from None

    # pointwise validation phi = psi o sigma on the probe set
    lhs = mobius_map.apply_points(probes)
    rhs = psi.apply(sigma.apply_points(probes))
    norms = 1.0 + np.linalg.norm(probes, axis=1)
    if np.max(np.linalg.norm(lhs - rhs, axis=1) / norms) > 1e-9:
        raise ValidationFailed("phi != psi o sigma on probe points")

    a = ((nb**2 - r2) / nb**2) * b
    direction = psi.linear_part @ b
    return Decomposition(b=b, R=radius, psi=psi, a=a, direction=direction)


def isometric_decomposition(mobius_map: MobiusMap) -> Decomposition:
    """Factor phi = psi o sigma with sigma the reflection in the isometric sphere.

    Requires phi(inf) != inf and b = phi^-1(inf) != 0.
    """
    return mobius_map.decomposition


def ball_image_reflection(b, R: float, r: float) -> Union[Sphere, Hyperplane]:
    """Closed-form image of the origin-centered sphere S_r under inversion in S(b,R).

    For r != |b| the image is the sphere centered at
    ((|b|^2 - R^2 - r^2)/(|b|^2 - r^2)) b with radius R^2 r / | |b|^2 - r^2 |;
    for r = |b| it is the hyperplane {x : 2|b|^2 - R^2 - 2<b,x> = 0}.
    """
    b = as_vec(b)
    nb2 = float(b @ b)
    if nb2 == 0.0:
        raise ValueError("requires b != 0")
    if R <= 0 or r <= 0:
        raise ValueError("requires R > 0 and r > 0")
    nb = np.sqrt(nb2)
    if abs(r - nb) <= 1e-12 * nb:
        return Hyperplane(b / nb, (2.0 * nb2 - R**2) / (2.0 * nb))
    denom = nb2 - r**2
    center = ((nb2 - R**2 - r**2) / denom) * b
    radius = R**2 * r / abs(denom)
    return Sphere(center, radius)


def ball_image(dec: Decomposition, r: float) -> Union[Ball, HalfSpace]:
    """Image of the open ball B_r under phi = psi o sigma, for 0 < r <= |b|."""
    nb = float(np.linalg.norm(dec.b))
    if not 0 < r:
        raise ValueError("requires r > 0")
    if r > nb * (1.0 + 1e-12):
        raise ValueError("image of B_r is unbounded for r > |b|")
    base = ball_image_reflection(dec.b, dec.R, r)
    psi = dec.psi
    if isinstance(base, Sphere):
        return Ball(psi.apply(base.center), base.radius)
    # half-space {<u,x> < c} maps to {<Au, y> < c + <Au, t>}
    u = psi.linear_part @ base.unit_normal
    return HalfSpace(u, base.offset + float(u @ psi.translation))


def _mirror_basis_orthogonal_to(a_hat: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to a unit vector a_hat.

    Householder reflection mapping a_hat to +/- e_1; the remaining columns
    span a_hat-perp deterministically.
    """
    n = a_hat.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    sign = 1.0 if a_hat[0] >= 0 else -1.0
    w = a_hat + sign * e1
    h = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    return h[:, 1:].T  # rows are basis vectors of a_hat-perp


def make_sigma_a(a) -> MobiusMap:
    """Reflection sigma_a in the sphere S(a/|a|^2, sqrt(|a/|a|^2|^2 - 1)).

    Maps 0 to a; requires 0 < |a| < 1.
    """
    a = as_vec(a)
    na = float(np.linalg.norm(a))
    if not 0.0 < na < 1.0:
        raise InvalidPrescribedPoint("sigma_a requires 0 < |a| < 1")
    a_star = a / na**2
    radius = float(np.sqrt(a_star @ a_star - 1.0))
    return MobiusMap([Reflection(Sphere(a_star, radius))])


def phi_a_closed_form(a, points: np.ndarray) -> np.ndarray:
    """Closed-form conformal automorphism of the unit ball swapping 0 and a.

    phi_a(x) = (|x-a|^2 a - (1-|a|^2)(x-a)) / (1 - 2<a,x> + |a|^2 |x|^2).
    """
    a = as_vec(a)
    x = np.asarray(points, dtype=float)
    na2 = float(a @ a)
    xa = x - a
    num = np.einsum("...i,...i->...", xa, xa)[..., None] * a - (1.0 - na2) * xa
    den = 1.0 - 2.0 * (x @ a) + na2 * np.einsum("...i,...i->...", x, x)
    return num / den[..., None]


def make_phi_a(a) -> MobiusMap:
    """phi_a as a reflection word, cross-validated against the closed form.

    For a != 0: phi_a = sigma_a o rho where rho fixes the a-axis and negates
    its orthogonal complement (a word of n-1 mirrors through the origin).
    For a = 0: phi_0(x) = -x, a word of n coordinate mirrors.
    """
    a = as_vec(a)
    n = a.size
    na = float(np.linalg.norm(a))
    if na >= 1.0:
        raise InvalidPrescribedPoint("phi_a requires |a| < 1")
    if na == 0.0:
        word = [Reflection(Hyperplane(np.eye(n)[i], 0.0)) for i in range(n)]
        return MobiusMap(word)
    mirrors = [
        Reflection(Hyperplane(u, 0.0)) for u in _mirror_basis_orthogonal_to(a / na)
    ]
    word = list(make_sigma_a(a).word) + mirrors
    result = MobiusMap(word)
    probes = 0.8 * (2.0 * _halton(16, n) - 1.0) / np.sqrt(n)
    got = result.apply_points(probes)
    want = phi_a_closed_form(a, probes)
    if np.max(np.abs(got - want)) > 1e-10:
        raise ValidationFailed("phi_a word disagrees with its closed form")
    return result
