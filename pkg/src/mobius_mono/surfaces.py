"""Analytic k-dimensional parametric patches in R^n.

eval/jac are vectorized over stacks of parameter points; the quadrature
module depends on this for throughput.  All catalog surfaces carry analytic
Jacobians; finite differences are the fallback for user-supplied patches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter, RankDeficient, StepTooLarge
from .geometry import Frame, Isometry, orthonormal_frame


@dataclass(frozen=True)
class ParametricPatch:
    """An immersed k-dimensional patch in R^n over an axis-aligned box.

    eval_fn maps (..., k) parameter stacks to (..., n) positions; jac_fn, when
    given, maps them to (..., n, k) Jacobians, else central differences with
    step fd_step are used.
    """

    k: int
    n: int
    domain: np.ndarray  # (k, 2) array of [lo, hi] per parameter
    eval_fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: Optional[float] = None
    name: str = "patch"
    #: per-axis periodicity flags; a periodic seam is not a geometric boundary
    periodic: Optional[tuple] = None

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float)
        if dom.shape != (self.k, 2) or np.any(dom[:, 0] >= dom[:, 1]):
            raise InvalidParameter("domain must be a (k, 2) box with lo < hi")
        object.__setattr__(self, "domain", dom)
        if self.fd_step is None:
            extent = float(np.max(dom[:, 1] - dom[:, 0]))
            object.__setattr__(self, "fd_step", 1e-5 * extent)
        if self.periodic is None:
            object.__setattr__(self, "periodic", (False,) * self.k)
        elif len(self.periodic) != self.k:
            raise InvalidParameter("periodic flags must have one entry per axis")

    def eval(self, params) -> np.ndarray:
        return self.eval_fn(np.asarray(params, dtype=float))

    def jac(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=float)
        if self.jac_fn is not None:
            return self.jac_fn(p)
        h = self.fd_step
        cols = []
        for i in range(self.k):
            dp = np.zeros(self.k)
            dp[i] = h
            cols.append((self.eval_fn(p + dp) - self.eval_fn(p - dp)) / (2.0 * h))
        return np.stack(cols, axis=-1)

    def contains(self, params, margin: float = 0.0) -> np.ndarray:
        p = np.asarray(params, dtype=float)
        lo = self.domain[:, 0] + margin
        hi = self.domain[:, 1] - margin
        return np.all((p >= lo) & (p <= hi), axis=-1)


@dataclass(frozen=True)
class SurfaceSample:
    """Position, orthonormal tangent frame and area element at one parameter."""

    param: np.ndarray
    position: np.ndarray
    frame: Frame
    area_element: float


@dataclass(frozen=True)
class SampleBatch:
    """Vectorized samples: positions (m, n), tangents (m, k, n) orthonormal
    rows per point, area_elements (m,)."""

    params: np.ndarray
    positions: np.ndarray
    tangents: np.ndarray
    area_elements: np.ndarray

    def tangential_sq(self, vectors: np.ndarray) -> np.ndarray:
        """|X^T|^2 per sample for an (m, n) stack of ambient vectors."""
        coeffs = np.einsum("mkn,mn->mk", self.tangents, vectors)
        return np.einsum("mk,mk->m", coeffs, coeffs)

    def normal_sq(self, vectors: np.ndarray) -> np.ndarray:
        """|X^perp|^2 per sample; clipped at zero against roundoff."""
        total = np.einsum("mn,mn->m", vectors, vectors)
        return np.maximum(total - self.tangential_sq(vectors), 0.0)


def _orthonormalize(jac: np.ndarray) -> np.ndarray:
    """Gram-Schmidt (two passes) on Jacobian columns; returns (m, k, n) rows."""
    m, n, k = jac.shape
    cols = np.transpose(jac, (0, 2, 1)).copy()  # (m, k, n)
    for _pass in range(2):
        for i in range(k):
            v = cols[:, i, :]
            for j in range(i):
                proj = np.einsum("mn,mn->m", v, cols[:, j, :])
                v = v - proj[:, None] * cols[:, j, :]
            norms = np.linalg.norm(v, axis=1)
            if np.any(norms <= 1e-14):
                raise RankDeficient("Jacobian columns numerically dependent")
            cols[:, i, :] = v / norms[:, None]
    return cols


def sample_batch(patch: ParametricPatch, params: np.ndarray) -> SampleBatch:
    p = np.atleast_2d(np.asarray(params, dtype=float))
    positions = patch.eval(p)
    jac = patch.jac(p)
    gram = np.einsum("mni,mnj->mij", jac, jac)
    det = np.linalg.det(gram)
    if np.any(det <= 0):
        raise RankDeficient("degenerate parameterization point (det g <= 0)")
    return SampleBatch(
        params=p,
        positions=positions,
        tangents=_orthonormalize(jac),
        area_elements=np.sqrt(det),
    )


def sample(patch: ParametricPatch, param) -> SurfaceSample:
    """Single-point sample with the deterministic frame sign convention."""
    p = np.asarray(param, dtype=float)
    jac = patch.jac(p[None, :])[0]
    frame = orthonormal_frame(jac.T, tol=1e-12)
    gram = jac.T @ jac
    det = float(np.linalg.det(gram))
    if det <= 0:
        raise RankDeficient("degenerate parameterization point (det g <= 0)")
    return SurfaceSample(
        param=p,
        position=patch.eval(p),
        frame=frame,
        area_element=float(np.sqrt(det)),
    )


def _mean_curvature_vector(patch: ParametricPatch, param: np.ndarray, h: float) -> np.ndarray:
    """H = g^{ij} (F_ij)^perp via central differences of the Jacobian."""
    k = patch.k
    jac0 = patch.jac(param[None, :])[0]
    gram = jac0.T @ jac0
    ginv = np.linalg.inv(gram)
    # orthonormal tangent rows for the normal projection
    tangents = _orthonormalize(jac0[None, :, :])[0]
    hvec = np.zeros(patch.n)
    second = np.empty((k, k, patch.n))
    for j in range(k):
        dp = np.zeros(k)
        dp[j] = h
        jp = patch.jac((param + dp)[None, :])[0]
        jm = patch.jac((param - dp)[None, :])[0]
        second[:, j, :] = ((jp - jm) / (2.0 * h)).T  # second[i, j] = F_ij
    for i in range(k):
        for j in range(k):
            fij = second[i, j]
            normal = fij - tangents.T @ (tangents @ fij)
            hvec += ginv[i, j] * normal
    return hvec


def mean_curvature_norm(patch: ParametricPatch, param, h: Optional[float] = None) -> float:
    """|H| by Richardson-extrapolated finite differences of the Jacobian.

    Raises StepTooLarge when the h and h/2 estimates disagree by more than
    1e-4 (relative to 1 + |H|).
    """
    p = np.asarray(param, dtype=float)
    if h is None:
        h = 1e-3 * float(np.max(patch.domain[:, 1] - patch.domain[:, 0]))
    if not bool(patch.contains(p, margin=2.0 * h)):
        raise InvalidParameter("parameter too close to the domain boundary")
    h1 = _mean_curvature_vector(patch, p, h)
    h2 = _mean_curvature_vector(patch, p, h / 2.0)
    extrap = (4.0 * h2 - h1) / 3.0
    disagreement = float(np.linalg.norm(h2 - h1))
    value = float(np.linalg.norm(extrap))
    if disagreement > 1e-4 * (1.0 + value):
        raise StepTooLarge(
            f"finite-difference steps disagree by {disagreement:.3e}; decrease h"
        )
    return value


def minimality_grid_check(patch: ParametricPatch, grid: int = 10) -> float:
    """Max |H| over an interior grid; catalog surfaces stay below 1e-6."""
    lo, hi = patch.domain[:, 0], patch.domain[:, 1]
    span = hi - lo
    worst = 0.0
    axes = [lo[i] + span[i] * (np.arange(1, grid + 1) / (grid + 1)) for i in range(patch.k)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, patch.k)
    for p in mesh:
        worst = max(worst, mean_curvature_norm(patch, p))
    return worst


# ---------------------------------------------------------------------------
# catalog


def flat_disk(point, frame: Frame, extent: float) -> ParametricPatch:
    """Flat k-dimensional patch through `point` spanned by `frame`,
    parameterized isometrically over [-extent, extent]^k."""
    point = np.asarray(point, dtype=float)
    if extent <= 0:
        raise InvalidParameter("extent must be positive")
    if frame.n != point.size:
        raise InvalidParameter("frame ambient dimension does not match point")
    vectors = frame.vectors  # (k, n)
    k, n = vectors.shape

    def _eval(p):
        return point + np.asarray(p) @ vectors

    def _jac(p):
        p = np.asarray(p)
        return np.broadcast_to(vectors.T, p.shape[:-1] + (n, k)).copy()

    domain = np.tile([-extent, extent], (k, 1)).astype(float)
    return ParametricPatch(k, n, domain, _eval, _jac, name="flat_disk")


def catenoid(scale: float = 1.0, u_range=(-np.pi, np.pi), v_range=(-1.0, 1.0)) -> ParametricPatch:
    """Catenoid (c cosh(v/c) cos u, c cosh(v/c) sin u, v) in R^3."""
    c = float(scale)
    if c <= 0:
        raise InvalidParameter("scale must be positive")

    def _eval(p):
        u, v = p[..., 0], p[..., 1]
        ch = c * np.cosh(v / c)
        return np.stack([ch * np.cos(u), ch * np.sin(u), v], axis=-1)

    def _jac(p):
        u, v = p[..., 0], p[..., 1]
        ch = c * np.cosh(v / c)
        sh = np.sinh(v / c)
        zeros = np.zeros_like(u)
        du = np.stack([-ch * np.sin(u), ch * np.cos(u), zeros], axis=-1)
        dv = np.stack([sh * np.cos(u), sh * np.sin(u), np.ones_like(u)], axis=-1)
        return np.stack([du, dv], axis=-1)

    domain = np.array([list(u_range), list(v_range)], dtype=float)
    full_turn = abs((u_range[1] - u_range[0]) - 2.0 * np.pi) < 1e-12
    return ParametricPatch(2, 3, domain, _eval, _jac, name="catenoid",
                           periodic=(full_turn, False))


def helicoid(pitch: float = 1.0, u_range=(-np.pi, np.pi), v_range=(-1.0, 1.0)) -> ParametricPatch:
    """Helicoid (v cos u, v sin u, pitch * u) in R^3."""
    c = float(pitch)
    if c == 0:
        raise InvalidParameter("pitch must be nonzero")

    def _eval(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack([v * np.cos(u), v * np.sin(u), c * u], axis=-1)

    def _jac(p):
        u, v = p[..., 0], p[..., 1]
        zeros = np.zeros_like(u)
        du = np.stack([-v * np.sin(u), v * np.cos(u), np.full_like(u, c)], axis=-1)
        dv = np.stack([np.cos(u), np.sin(u), zeros], axis=-1)
        return np.stack([du, dv], axis=-1)

    domain = np.array([list(u_range), list(v_range)], dtype=float)
    return ParametricPatch(2, 3, domain, _eval, _jac, name="helicoid")


def enneper(extent: float = 0.5) -> ParametricPatch:
    """Enneper surface (u - u^3/3 + u v^2, v - v^3/3 + v u^2, u^2 - v^2)."""
    if extent <= 0:
        raise InvalidParameter("extent must be positive")

    def _eval(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack(
            [u - u**3 / 3.0 + u * v**2, v - v**3 / 3.0 + v * u**2, u**2 - v**2],
            axis=-1,
        )

    def _jac(p):
        u, v = p[..., 0], p[..., 1]
        du = np.stack([1.0 - u**2 + v**2, 2.0 * u * v, 2.0 * u], axis=-1)
        dv = np.stack([2.0 * u * v, 1.0 - v**2 + u**2, -2.0 * v], axis=-1)
        return np.stack([du, dv], axis=-1)

    domain = np.array([[-extent, extent], [-extent, extent]], dtype=float)
    return ParametricPatch(2, 3, domain, _eval, _jac, name="enneper")


def complex_parabola(extent: float = 1.0) -> ParametricPatch:
    """Holomorphic graph (x, y) -> (x, y, x^2 - y^2, 2xy) in R^4; minimal."""
    if extent <= 0:
        raise InvalidParameter("extent must be positive")

    def _eval(p):
        x, y = p[..., 0], p[..., 1]
        return np.stack([x, y, x**2 - y**2, 2.0 * x * y], axis=-1)

    def _jac(p):
        x, y = p[..., 0], p[..., 1]
        ones = np.ones_like(x)
        zeros = np.zeros_like(x)
        dx = np.stack([ones, zeros, 2.0 * x, 2.0 * y], axis=-1)
        dy = np.stack([zeros, ones, -2.0 * y, 2.0 * x], axis=-1)
        return np.stack([dx, dy], axis=-1)

    domain = np.array([[-extent, extent], [-extent, extent]], dtype=float)
    return ParametricPatch(2, 4, domain, _eval, _jac, name="complex_parabola")


def sphere_patch(radius: float, center=None) -> ParametricPatch:
    """Round 2-sphere patch in R^3; |H| = 2/radius (negative control)."""
    rho = float(radius)
    if rho <= 0:
        raise InvalidParameter("radius must be positive")
    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)

    def _eval(p):
        u, v = p[..., 0], p[..., 1]
        return c + rho * np.stack(
            [np.cos(u) * np.cos(v), np.sin(u) * np.cos(v), np.sin(v)], axis=-1
        )

    def _jac(p):
        u, v = p[..., 0], p[..., 1]
        du = rho * np.stack(
            [-np.sin(u) * np.cos(v), np.cos(u) * np.cos(v), np.zeros_like(u)], axis=-1
        )
        dv = rho * np.stack(
            [-np.cos(u) * np.sin(v), -np.sin(u) * np.sin(v), np.cos(v)], axis=-1
        )
        return np.stack([du, dv], axis=-1)

    domain = np.array([[-np.pi, np.pi], [-1.0, 1.0]], dtype=float)
    return ParametricPatch(2, 3, domain, _eval, _jac, name="sphere",
                           periodic=(True, False))


def transform_patch(patch: ParametricPatch, isometry: Isometry) -> ParametricPatch:
    """Compose a patch with a Euclidean isometry of the ambient space."""
    if isometry.dim != patch.n:
        raise InvalidParameter("isometry dimension does not match the patch")
    lin = isometry.linear_part

    def _eval(p):
        return isometry.apply(patch.eval(p))

    def _jac(p):
        return np.einsum("ij,...jk->...ik", lin, patch.jac(p))

    return ParametricPatch(
        patch.k, patch.n, patch.domain.copy(), _eval, _jac,
        fd_step=patch.fd_step, name=f"{patch.name}+isometry",
        periodic=patch.periodic,
    )


CATALOG_MINIMAL = ("flat_disk", "catenoid", "helicoid", "enneper", "complex_parabola")
