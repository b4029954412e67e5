"""Moving-center monotonicity quantities and exact identities.

For a reflection sigma in S(b, R) (or a general Moebius map phi = psi o sigma)
and a minimal k-patch Sigma, this module evaluates the weight f whose sublevel
sets are the Moebius images of concentric balls, the normalized volumes
J(r), I(r) and their level-set forms Q_A(s), Q_I(s), and verifies the exact
increment identities relating them to band integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import (
    OutsideDomain,
    OutsideHalfSpace,
    PointNotOnSurface,
    ValidationFailed,
)
from .geometry import Isometry, as_vec
from .mobius import Decomposition, MobiusMap
from .quadrature import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_TOL,
    QuadratureResult,
    RegionSpec,
    integrate_region,
    level_curve_integral,
    radial_integral,
)
from .surfaces import (
    ParametricPatch,
    SampleBatch,
    SurfaceSample,
    minimality_grid_check,
    sample_batch,
)

_BUDGET_SAFETY = 3.0
_BUDGET_FLOOR = 1e-12


def budget_for(lhs: float, *error_estimates: float) -> float:
    """Error budget: 3x the summed quadrature errors plus a relative floor."""
    return _BUDGET_SAFETY * math.fsum(error_estimates) + _BUDGET_FLOOR * abs(lhs)


# ---------------------------------------------------------------------------
# the weight f and the level/radius correspondence


def _f_closed_form(positions: np.ndarray, b: np.ndarray, R: float, a: np.ndarray) -> np.ndarray:
    """f(x) = |b|^2 |x-a|^2 / (2|b|^2 - R^2 - 2<b,x>); +inf outside the half-space."""
    x = np.asarray(positions, dtype=float)
    nb2 = float(b @ b)
    xa = x - a
    num = nb2 * np.einsum("...i,...i->...", xa, xa)
    den = 2.0 * nb2 - R**2 - 2.0 * (x @ b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return out


def f_reflection(x, b, R: float) -> float:
    """The weight f at one point, computed both ways and cross-checked.

    Closed form |b|^2 |x-a|^2 / (2|b|^2 - R^2 - 2<b,x>) is returned; the
    defining form R^2 |sigma(x)|^2 / (|b|^2 - |sigma(x)|^2) must agree to
    relative 1e-10.
    """
    x = as_vec(x)
    b = as_vec(b)
    nb2 = float(b @ b)
    a = ((nb2 - R**2) / nb2) * b
    den = 2.0 * nb2 - R**2 - 2.0 * float(b @ x)
    if den <= 0:
        raise OutsideHalfSpace("point outside the half-space of the weight f")
    closed = nb2 * float((x - a) @ (x - a)) / den
    # defining form through sigma(x)
    d = x - b
    sx = b + (R**2 / float(d @ d)) * d
    s2 = float(sx @ sx)
    defining = R**2 * s2 / (nb2 - s2)
    if abs(defining - closed) > 1e-10 * (1.0 + abs(closed)):
        raise ValidationFailed("the two closed forms of f disagree")
    return closed


def f_mobius(x, dec: Decomposition) -> float:
    """f(x) = R^2 |phi^-1(x)|^2 / (|b|^2 - |phi^-1(x)|^2) = f_reflection(psi^-1 x)."""
    z = dec.psi.inverse().apply(as_vec(x))
    nb = float(np.linalg.norm(dec.b))
    # |phi^-1(x)| = |sigma(psi^-1 x)| must stay below |b|
    d = z - dec.b
    sz = dec.b + (dec.R**2 / float(d @ d)) * d
    if np.linalg.norm(sz) >= nb:
        raise OutsideDomain("|phi^-1(x)| >= |b|")
    return f_reflection(z, dec.b, dec.R)


def s_of_r(r: float, b, R: float) -> float:
    """Level corresponding to radius: s = R^2 r^2 / (|b|^2 - r^2)."""
    nb2 = float(as_vec(b) @ as_vec(b))
    if not 0 < r < np.sqrt(nb2):
        raise ValueError("requires 0 < r < |b|")
    return R**2 * r**2 / (nb2 - r**2)


def r_of_s(s: float, b, R: float) -> float:
    """Inverse of s_of_r: r = |b| sqrt(s / (R^2 + s))."""
    if not s > 0:
        raise ValueError("requires s > 0")
    nb = float(np.linalg.norm(as_vec(b)))
    return nb * np.sqrt(s / (R**2 + s))


# ---------------------------------------------------------------------------
# scenarios


def _check_coverage(patch: ParametricPatch, f_vals, s_max: float, samples: int = 256):
    """Boundary of the parameter box must map outside the closed region f <= s_max."""
    periodic = getattr(patch, "periodic", None) or (False,) * patch.k
    lo, hi = patch.domain[:, 0], patch.domain[:, 1]
    ts = np.linspace(0.0, 1.0, samples)
    for axis in range(patch.k):
        if periodic[axis]:
            continue
        for endpoint in (lo[axis], hi[axis]):
            pts = np.empty((samples, patch.k))
            for other in range(patch.k):
                pts[:, other] = lo[other] + ts * (hi[other] - lo[other])
            pts[:, axis] = endpoint
            vals = f_vals(patch.eval(pts))
            if np.any(vals <= s_max):
                raise ValidationFailed(
                    "patch boundary intersects the closed region f <= s(r_max); "
                    "enlarge the parameter domain"
                )


def _check_minimal(patch: ParametricPatch, grid: int = 4, tol: float = 1e-6):
    worst = minimality_grid_check(patch, grid=grid)
    if worst > tol:
        raise ValidationFailed(f"patch is not minimal: max |H| = {worst:.3e}")


@dataclass(frozen=True)
class ReflectionScenario:
    """A reflection sigma in S(b, R) together with a minimal patch."""

    b: np.ndarray
    R: float
    patch: ParametricPatch
    r_max: float
    validate: bool = True

    def __post_init__(self):
        b = as_vec(self.b)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "R", float(self.R))
        nb = float(np.linalg.norm(b))
        if nb == 0.0:
            raise ValueError("requires b != 0")
        if not 0 < self.r_max <= 0.99 * nb:
            raise ValueError("requires 0 < r_max <= 0.99 |b|")
        if self.validate:
            _check_minimal(self.patch)
            _check_coverage(self.patch, self.f_values, self.s_max)

    @property
    def k(self) -> int:
        return self.patch.k

    @property
    def a(self) -> np.ndarray:
        nb2 = float(self.b @ self.b)
        return ((nb2 - self.R**2) / nb2) * self.b

    @property
    def center(self) -> np.ndarray:
        """The moving center: a = sigma(0)."""
        return self.a

    @property
    def direction(self) -> np.ndarray:
        """Normal direction of the equality-case disk: b itself."""
        return self.b

    @property
    def s_max(self) -> float:
        return s_of_r(self.r_max, self.b, self.R)

    def f_values(self, positions: np.ndarray) -> np.ndarray:
        return _f_closed_form(positions, self.b, self.R, self.a)


@dataclass(frozen=True)
class MobiusScenario:
    """A general Moebius map (via its decomposition) with a minimal patch."""

    mobius_map: MobiusMap
    patch: ParametricPatch
    r_max: float
    validate: bool = True
    dec: Decomposition = field(default=None)

    def __post_init__(self):
        dec = self.dec if self.dec is not None else self.mobius_map.decomposition
        object.__setattr__(self, "dec", dec)
        nb = float(np.linalg.norm(dec.b))
        if not 0 < self.r_max <= 0.99 * nb:
            raise ValueError("requires 0 < r_max <= 0.99 |b|")
        object.__setattr__(self, "_psi_inv", dec.psi.inverse())
        if self.validate:
            _check_minimal(self.patch)
            _check_coverage(self.patch, self.f_values, self.s_max)

    @property
    def k(self) -> int:
        return self.patch.k

    @property
    def b(self) -> np.ndarray:
        return self.dec.b

    @property
    def R(self) -> float:
        return self.dec.R

    @property
    def center(self) -> np.ndarray:
        """phi(0) = psi(a)."""
        return self.dec.psi.apply(self.dec.a)

    @property
    def direction(self) -> np.ndarray:
        """phi(inf) - phi(a) = psi(b) - psi(0)."""
        return self.dec.direction

    @property
    def s_max(self) -> float:
        return s_of_r(self.r_max, self.dec.b, self.dec.R)

    def f_values(self, positions: np.ndarray) -> np.ndarray:
        z = self._psi_inv.apply(positions)
        return _f_closed_form(z, self.dec.b, self.dec.R, self.dec.a)


def reflection_as_mobius(scn: ReflectionScenario) -> MobiusScenario:
    from .mobius import Reflection, Sphere

    m = MobiusMap([Reflection(Sphere(scn.b, scn.R))])
    return MobiusScenario(m, scn.patch, scn.r_max, validate=False)


# ---------------------------------------------------------------------------
# pointwise proof machinery


def surface_gradient_f(sample: SurfaceSample, b, R: float) -> np.ndarray:
    """grad_Sigma f = (2s/|x-a|^2) ((x-a)^T + s b^T / |b|^2), s = f(x)."""
    b = as_vec(b)
    nb2 = float(b @ b)
    a = ((nb2 - R**2) / nb2) * b
    s = f_reflection(sample.position, b, R)
    return _surface_gradient_single(sample, s, a, b, nb2)


def surface_gradient_f_scenario(sample: SurfaceSample, scn) -> np.ndarray:
    """Scenario form with center c = phi(0) and direction d = phi(inf) - phi(a)."""
    s = float(scn.f_values(sample.position[None, :])[0])
    nb2 = float(scn.b @ scn.b)
    return _surface_gradient_single(sample, s, scn.center, scn.direction, nb2)


def _surface_gradient_single(sample, s, c, d, nb2) -> np.ndarray:
    xc = sample.position - c
    d2 = float(xc @ xc)
    return (2.0 * s / d2) * (_tangential(sample, xc) + (s / nb2) * _tangential(sample, d))


def _tangential(sample_or_frame, vector: np.ndarray) -> np.ndarray:
    frame = sample_or_frame.frame.vectors
    return (frame @ vector) @ frame


def w_field(x, b, R: float, k: int) -> np.ndarray:
    """W(x) = (1/k) f^{-k/2} (x - a) - F(f) b/|b|^2 with the k-dependent F."""
    x = as_vec(x)
    b = as_vec(b)
    nb2 = float(b @ b)
    a = ((nb2 - R**2) / nb2) * b
    fval = f_reflection(x, b, R)
    if k >= 3:
        big_f = fval ** (-(k - 2) / 2.0) / (k - 2)
    else:
        big_f = -0.5 * math.log(fval)
    return (fval ** (-k / 2.0) / k) * (x - a) - big_f * b / nb2


def div_w_closed_form(sample: SurfaceSample, b, R: float, k: int) -> float:
    """div_Sigma W = f^{-k/2} |(x-a)^perp|^2/|x-a|^2
    + f^{-(k-4)/2} |b^T|^2 / (|b|^4 |x-a|^2)."""
    b = as_vec(b)
    nb2 = float(b @ b)
    a = ((nb2 - R**2) / nb2) * b
    x = sample.position
    fval = f_reflection(x, b, R)
    xa = x - a
    d2 = float(xa @ xa)
    xa_tan = _tangential(sample, xa)
    perp2 = float(xa @ xa) - float(xa_tan @ xa_tan)
    b_tan = _tangential(sample, b)
    btan2 = float(b_tan @ b_tan)
    return fval ** (-k / 2.0) * perp2 / d2 + fval ** (-(k - 4) / 2.0) * btan2 / (nb2**2 * d2)


def div_w_check(sample: SurfaceSample, b, R: float, k: Optional[int] = None,
                h: float = 1e-4):
    """(closed_form, fd_value) for div_Sigma W at a sample.

    The finite-difference value sums directional derivatives of the ambient
    field W along the orthonormal tangent frame, Richardson-extrapolated over
    steps h and h/2.
    """
    if k is None:
        k = sample.frame.k
    x = sample.position

    def fd(step):
        total = 0.0
        for e in sample.frame.vectors:
            wp = w_field(x + step * e, b, R, k)
            wm = w_field(x - step * e, b, R, k)
            total += float(e @ (wp - wm)) / (2.0 * step)
        return total

    d1 = fd(h)
    d2 = fd(h / 2.0)
    fd_value = (4.0 * d2 - d1) / 3.0
    return div_w_closed_form(sample, b, R, k), fd_value


# ---------------------------------------------------------------------------
# batched integrands


def _safe_ratio(num: np.ndarray, den: np.ndarray, at_zero: float) -> np.ndarray:
    tiny = den < 1e-280
    return np.where(tiny, at_zero, num / np.where(tiny, 1.0, den))


def _tangential_ratio(batch: SampleBatch, c: np.ndarray) -> np.ndarray:
    """|(x-c)^T|^2 / |x-c|^2 per sample; 1 at x = c (tangential limit)."""
    xc = batch.positions - c
    d2 = np.einsum("mn,mn->m", xc, xc)
    return _safe_ratio(batch.tangential_sq(xc), d2, 1.0)


def _perp_ratio(batch: SampleBatch, c: np.ndarray) -> np.ndarray:
    xc = batch.positions - c
    d2 = np.einsum("mn,mn->m", xc, xc)
    return _safe_ratio(batch.normal_sq(xc), d2, 0.0)


def _const_tangential_sq(batch: SampleBatch, d: np.ndarray) -> np.ndarray:
    vecs = np.broadcast_to(d, batch.positions.shape)
    return batch.tangential_sq(vecs)


# ---------------------------------------------------------------------------
# J, I, Q_A, Q_I


def _prefactor_r(scn, r: float) -> float:
    nb2 = float(scn.b @ scn.b)
    return ((nb2 - r**2) / r**2) ** (scn.k / 2.0)


def _scaled(result: QuadratureResult, factor: float) -> QuadratureResult:
    return QuadratureResult(
        result.value * factor,
        result.error_estimate * abs(factor),
        result.cells_used,
        result.depth_hit,
    )


def J_of_r(scn, r: float, tol: float = DEFAULT_TOL,
           max_depth: int = DEFAULT_MAX_DEPTH) -> QuadratureResult:
    """J(r) = ((|b|^2 - r^2)/r^2)^{k/2} |Sigma cap phi(B_r)|."""
    region = RegionSpec.sublevel(scn.f_values, s_of_r(r, scn.b, scn.R))
    res = integrate_region(scn.patch, lambda b: np.ones(b.positions.shape[0]),
                           region, tol=tol, max_depth=max_depth)
    return _scaled(res, _prefactor_r(scn, r))


def I_of_r(scn, r: float, tol: float = DEFAULT_TOL,
           max_depth: int = DEFAULT_MAX_DEPTH) -> QuadratureResult:
    """I(r) = prefactor * integral of |(x-c)^T|^2/|x-c|^2 over Sigma cap phi(B_r)."""
    c = scn.center
    region = RegionSpec.sublevel(scn.f_values, s_of_r(r, scn.b, scn.R))
    res = integrate_region(scn.patch, lambda b: _tangential_ratio(b, c),
                           region, tol=tol, max_depth=max_depth)
    return _scaled(res, _prefactor_r(scn, r))


def Q_A(scn, s: float, tol: float = DEFAULT_TOL,
        max_depth: int = DEFAULT_MAX_DEPTH) -> QuadratureResult:
    """Q_A(s) = s^{-k/2} |Sigma cap E_s| (level-set form of J / R^k)."""
    region = RegionSpec.sublevel(scn.f_values, s)
    res = integrate_region(scn.patch, lambda b: np.ones(b.positions.shape[0]),
                           region, tol=tol, max_depth=max_depth)
    return _scaled(res, s ** (-scn.k / 2.0))


def Q_I(scn, s: float, tol: float = DEFAULT_TOL,
        max_depth: int = DEFAULT_MAX_DEPTH) -> QuadratureResult:
    c = scn.center
    region = RegionSpec.sublevel(scn.f_values, s)
    res = integrate_region(scn.patch, lambda b: _tangential_ratio(b, c),
                           region, tol=tol, max_depth=max_depth)
    return _scaled(res, s ** (-scn.k / 2.0))


# ---------------------------------------------------------------------------
# the two increment identities


@dataclass(frozen=True)
class IdentityResult:
    lhs: float
    rhs: float
    residual: float
    budget: float

    @property
    def passed(self) -> bool:
        return abs(self.residual) <= self.budget


def volume_identity_residual(scn, r_lo: float, r_hi: float,
                             tol: float = DEFAULT_TOL,
                             max_depth: int = DEFAULT_MAX_DEPTH,
                             j_lo: Optional[QuadratureResult] = None,
                             j_hi: Optional[QuadratureResult] = None) -> IdentityResult:
    """J(r_hi) - J(r_lo) against the band integral of the volume identity."""
    if not 0 < r_lo < r_hi <= scn.r_max:
        raise ValueError("requires 0 < r_lo < r_hi <= r_max")
    if j_lo is None:
        j_lo = J_of_r(scn, r_lo, tol, max_depth)
    if j_hi is None:
        j_hi = J_of_r(scn, r_hi, tol, max_depth)
    lhs = j_hi.value - j_lo.value

    c, d = scn.center, scn.direction
    nb4 = float(scn.b @ scn.b) ** 2
    k = scn.k
    f_vals = scn.f_values

    def integrand(batch: SampleBatch) -> np.ndarray:
        fv = f_vals(batch.positions)
        xc = batch.positions - c
        d2 = np.einsum("mn,mn->m", xc, xc)
        perp2 = batch.normal_sq(xc)
        dtan2 = _const_tangential_sq(batch, d)
        num = nb4 * perp2 + fv**2 * dtan2
        return fv ** (-k / 2.0) * _safe_ratio(num, nb4 * d2, 0.0)

    band = RegionSpec.band(f_vals, s_of_r(r_lo, scn.b, scn.R), s_of_r(r_hi, scn.b, scn.R))
    rhs_q = integrate_region(scn.patch, integrand, band, tol=tol, max_depth=max_depth)
    rhs = scn.R**k * rhs_q.value
    budget = budget_for(lhs, j_lo.error_estimate, j_hi.error_estimate,
                        scn.R**k * rhs_q.error_estimate)
    return IdentityResult(lhs, rhs, lhs - rhs, budget)


def weighted_identity_residual(scn, r_lo: float, r_hi: float,
                               tol: float = DEFAULT_TOL,
                               max_depth: int = DEFAULT_MAX_DEPTH,
                               rho_nodes: int = 8,
                               i_lo: Optional[QuadratureResult] = None,
                               i_hi: Optional[QuadratureResult] = None) -> IdentityResult:
    """I(r_hi) - I(r_lo) against band + radial double integral."""
    if not 0 < r_lo < r_hi <= scn.r_max:
        raise ValueError("requires 0 < r_lo < r_hi <= r_max")
    if i_lo is None:
        i_lo = I_of_r(scn, r_lo, tol, max_depth)
    if i_hi is None:
        i_hi = I_of_r(scn, r_hi, tol, max_depth)
    lhs = i_hi.value - i_lo.value

    c, d = scn.center, scn.direction
    nb2 = float(scn.b @ scn.b)
    k = scn.k
    f_vals = scn.f_values

    def band_integrand(batch: SampleBatch) -> np.ndarray:
        fv = f_vals(batch.positions)
        xc = batch.positions - c
        d2 = np.einsum("mn,mn->m", xc, xc)
        dtan2 = _const_tangential_sq(batch, d)
        return fv ** (-(k - 4) / 2.0) * _safe_ratio(dtan2, nb2**2 * d2, 0.0)

    band = RegionSpec.band(f_vals, s_of_r(r_lo, scn.b, scn.R), s_of_r(r_hi, scn.b, scn.R))
    band_q = integrate_region(scn.patch, band_integrand, band, tol=tol, max_depth=max_depth)

    inner_errors: list = []
    # the inner surface integrals are smooth in rho; a shallower depth keeps
    # the radial quadrature affordable and their error is budgeted separately
    inner_depth = min(max_depth, 10)

    def perp_area(rho: float) -> QuadratureResult:
        region = RegionSpec.sublevel(f_vals, s_of_r(rho, scn.b, scn.R))
        return integrate_region(scn.patch, lambda b: _perp_ratio(b, c),
                                region, tol=tol, max_depth=inner_depth)

    def weight(rho: np.ndarray) -> np.ndarray:
        return k * nb2 * (nb2 - rho**2) ** ((k - 2) / 2.0) / rho ** (k + 1)

    def inner(rhos: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhos)
        for i, rho in enumerate(rhos):
            q = perp_area(float(rho))
            inner_errors.append(q.error_estimate)
            out[i] = q.value
        return out * weight(rhos)

    radial = radial_integral(inner, r_lo, r_hi, nodes=rho_nodes,
                             tol=1e-5, max_doublings=2)
    weight_mass = radial_integral(weight, r_lo, r_hi, nodes=rho_nodes, tol=1e-12)
    inner_err = (max(inner_errors) if inner_errors else 0.0) * weight_mass.value

    rhs = scn.R**k * band_q.value + radial.value
    budget = budget_for(lhs, i_lo.error_estimate, i_hi.error_estimate,
                        scn.R**k * band_q.error_estimate,
                        radial.error_estimate, inner_err)
    return IdentityResult(lhs, rhs, lhs - rhs, budget)


# ---------------------------------------------------------------------------
# flux identity and coarea (k = 2)


def flux_identity_check(scn, s: float, tol: float = DEFAULT_TOL,
                        max_depth: int = DEFAULT_MAX_DEPTH):
    """Divergence-theorem check: |Sigma cap E_s| = (1/k) boundary flux of X_s.

    Returns (boundary_flux, k_times_area_result, budget) where the first is a
    QuadratureResult of the contour integral of <X_s, grad f>/|grad f|.
    """
    if scn.k != 2:
        raise ValueError("flux identity check requires k = 2")
    c, d = scn.center, scn.direction
    nb2 = float(scn.b @ scn.b)
    f_vals = scn.f_values

    def flux_integrand(batch: SampleBatch) -> np.ndarray:
        xc = batch.positions - c
        xs = xc - (s / nb2) * d  # X_s = x - c - (s/|b|^2) d
        grad = _surface_gradient_batch(batch, scn, s)
        gnorm = np.linalg.norm(grad, axis=1)
        return np.einsum("mn,mn->m", xs, grad) / gnorm

    flux = level_curve_integral(scn.patch, f_vals, s, flux_integrand)
    area = integrate_region(scn.patch, lambda b: np.ones(b.positions.shape[0]),
                            RegionSpec.sublevel(f_vals, s), tol=tol, max_depth=max_depth)
    flux_over_k = QuadratureResult(flux.value / scn.k, flux.error_estimate / scn.k,
                                   flux.cells_used, flux.depth_hit)
    budget = budget_for(area.value, flux_over_k.error_estimate, area.error_estimate)
    return flux_over_k, area, budget


def _surface_gradient_batch(batch: SampleBatch, scn, s_at: Optional[float] = None) -> np.ndarray:
    """grad_Sigma f = (2f/|x-c|^2) ((x-c)^T + f d^T/|b|^2) as ambient vectors."""
    c, d = scn.center, scn.direction
    nb2 = float(scn.b @ scn.b)
    fv = scn.f_values(batch.positions) if s_at is None else np.full(
        batch.positions.shape[0], s_at)
    xc = batch.positions - c
    d2 = np.einsum("mn,mn->m", xc, xc)
    coeffs_xc = np.einsum("mkn,mn->mk", batch.tangents, xc)
    xc_tan = np.einsum("mk,mkn->mn", coeffs_xc, batch.tangents)
    dvec = np.broadcast_to(d, batch.positions.shape)
    coeffs_d = np.einsum("mkn,mn->mk", batch.tangents, dvec)
    d_tan = np.einsum("mk,mkn->mn", coeffs_d, batch.tangents)
    scale = 2.0 * fv / d2
    return scale[:, None] * (xc_tan + (fv / nb2)[:, None] * d_tan)


def coarea_check(scn, s_lo: float, s_hi: float, tol: float = DEFAULT_TOL,
                 max_depth: int = DEFAULT_MAX_DEPTH, tau_nodes: int = 6):
    """Two-sided coarea check with g = 1.

    lhs = integral of |grad_Sigma f| over the band {s_lo <= f <= s_hi};
    rhs = integral over tau of the level-length of {f = tau}.
    Returns (lhs_result, rhs_result, budget).
    """
    if scn.k != 2:
        raise ValueError("coarea check requires k = 2")
    f_vals = scn.f_values

    def grad_norm(batch: SampleBatch) -> np.ndarray:
        return np.linalg.norm(_surface_gradient_batch(batch, scn), axis=1)

    band = RegionSpec.band(f_vals, s_lo, s_hi)
    lhs = integrate_region(scn.patch, grad_norm, band, tol=tol, max_depth=max_depth)

    level_errors: list = []

    def level_length(taus: np.ndarray) -> np.ndarray:
        out = np.empty_like(taus)
        for i, tau in enumerate(taus):
            q = level_curve_integral(scn.patch, f_vals, float(tau),
                                     lambda b: np.ones(b.positions.shape[0]),
                                     start_grid=64, max_grid=512, rel_tol=1e-6)
            level_errors.append(q.error_estimate)
            out[i] = q.value
        return out

    rhs = radial_integral(level_length, s_lo, s_hi, nodes=tau_nodes,
                          tol=1e-7, max_doublings=2)
    level_err = (max(level_errors) if level_errors else 0.0) * (s_hi - s_lo)
    budget = budget_for(lhs.value, lhs.error_estimate, rhs.error_estimate, level_err)
    return lhs, rhs, budget


# ---------------------------------------------------------------------------
# prescribed-point bound


def prescribed_point_bound(patch: ParametricPatch, a, tol: float = DEFAULT_TOL,
                           max_depth: int = DEFAULT_MAX_DEPTH):
    """Area of Sigma inside the unit ball against |B^k_1| (1-|a|^2)^{k/2}.

    Requires k = 2 and the prescribed point a on the surface (to 1e-8).
    Returns (area_result, bound, slack, budget).
    """
    if patch.k != 2:
        raise ValueError("prescribed-point bound implemented for k = 2")
    a = as_vec(a)
    if np.linalg.norm(a) >= 1.0:
        raise ValueError("requires |a| < 1")

    # nearest point of the patch to a
    lo, hi = patch.domain[:, 0], patch.domain[:, 1]
    grid = np.stack(np.meshgrid(*[np.linspace(lo[i], hi[i], 41) for i in range(2)],
                                indexing="ij"), axis=-1).reshape(-1, 2)
    dists = np.linalg.norm(patch.eval(grid) - a, axis=1)
    p0 = grid[int(np.argmin(dists))]
    res = optimize.minimize(lambda p: float(np.sum((patch.eval(p) - a) ** 2)), p0,
                            method="Nelder-Mead",
                            options={"xatol": 1e-14, "fatol": 1e-30, "maxiter": 2000})
    if np.sqrt(res.fun) > 1e-8:
        raise PointNotOnSurface(
            f"min distance from the surface to a is {np.sqrt(res.fun):.3e}")

    region = RegionSpec.sublevel(lambda x: np.einsum("mn,mn->m", x, x), 1.0)
    area = integrate_region(patch, lambda b: np.ones(b.positions.shape[0]),
                            region, tol=tol, max_depth=max_depth)
    bound = math.pi * (1.0 - float(a @ a))
    slack = area.value - bound
    budget = budget_for(area.value, area.error_estimate)
    return area, bound, slack, budget


# ---------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class MonotonicityReport:
    radii: np.ndarray
    s_values: np.ndarray
    J: np.ndarray
    J_err: np.ndarray
    I: np.ndarray
    I_err: np.ndarray
    QA: np.ndarray
    QI: np.ndarray
    volume: list  # IdentityResult per adjacent pair (len = len(radii) - 1)
    weighted: list
    monotone_J: bool
    monotone_I: bool
    constant_J: bool
    constant_I: bool
    equality_perp_sup: float
    equality_dtan_sup: float

    def __post_init__(self):
        n = len(self.radii)
        for arr in (self.s_values, self.J, self.J_err, self.I, self.I_err,
                    self.QA, self.QI):
            if len(arr) != n:
                raise ValueError("report arrays must share length")
        if len(self.volume) != n - 1 or len(self.weighted) != n - 1:
            raise ValueError("pair results must have length len(radii) - 1")

    @property
    def all_pass(self) -> bool:
        return (self.monotone_J and self.monotone_I
                and all(v.passed for v in self.volume)
                and all(w.passed for w in self.weighted))


def _equality_diagnostics(scn, samples: int = 64):
    """Sup norms of |(x-c)^perp| and |d^T| over Sigma cap E_{s(r_max)}."""
    lo, hi = scn.patch.domain[:, 0], scn.patch.domain[:, 1]
    axes = [np.linspace(lo[i], hi[i], samples) for i in range(scn.patch.k)]
    params = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, scn.patch.k)
    batch = sample_batch(scn.patch, params)
    mask = scn.f_values(batch.positions) < scn.s_max
    if not np.any(mask):
        return 0.0, 0.0
    xc = batch.positions - scn.center
    perp = np.sqrt(batch.normal_sq(xc))
    dtan = np.sqrt(_const_tangential_sq(batch, scn.direction))
    return float(np.max(perp[mask])), float(np.max(dtan[mask]))


def monotone_sweep(scn, radius_grid, tol: float = DEFAULT_TOL,
                   max_depth: int = DEFAULT_MAX_DEPTH,
                   rho_nodes: int = 8,
                   max_workers: Optional[int] = None) -> MonotonicityReport:
    """Evaluate J, I (and Q_A, Q_I) on a radius grid and all pair identities."""
    radii = np.asarray(radius_grid, dtype=float)
    if radii.size == 0:
        raise ValueError("radius grid is empty")
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] > scn.r_max:
        raise ValueError("grid must be strictly increasing within (0, r_max]")

    from concurrent.futures import ThreadPoolExecutor

    def per_radius(r):
        jr = J_of_r(scn, r, tol, max_depth)
        ir = I_of_r(scn, r, tol, max_depth)
        sv = s_of_r(r, scn.b, scn.R)
        qa = Q_A(scn, sv, tol, max_depth)
        qi = Q_I(scn, sv, tol, max_depth)
        return jr, ir, sv, qa, qi

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(per_radius, radii))
    else:
        results = [per_radius(r) for r in radii]

    j_res = [r[0] for r in results]
    i_res = [r[1] for r in results]
    s_values = np.array([r[2] for r in results])
    qa = np.array([r[3].value for r in results])
    qi = np.array([r[4].value for r in results])

    volume, weighted = [], []
    for i in range(len(radii) - 1):
        volume.append(volume_identity_residual(
            scn, radii[i], radii[i + 1], tol, max_depth,
            j_lo=j_res[i], j_hi=j_res[i + 1]))
        weighted.append(weighted_identity_residual(
            scn, radii[i], radii[i + 1], tol, max_depth, rho_nodes=rho_nodes,
            i_lo=i_res[i], i_hi=i_res[i + 1]))

    jv = np.array([q.value for q in j_res])
    je = np.array([q.error_estimate for q in j_res])
    iv = np.array([q.value for q in i_res])
    ie = np.array([q.error_estimate for q in i_res])

    pair_budget_j = _BUDGET_SAFETY * (je[:-1] + je[1:])
    pair_budget_i = _BUDGET_SAFETY * (ie[:-1] + ie[1:])
    monotone_j = bool(np.all(np.diff(jv) >= -pair_budget_j))
    monotone_i = bool(np.all(np.diff(iv) >= -pair_budget_i))
    constant_j = bool(np.all(np.abs(np.diff(jv)) <= pair_budget_j))
    constant_i = bool(np.all(np.abs(np.diff(iv)) <= pair_budget_i))

    perp_sup, dtan_sup = (
        _equality_diagnostics(scn) if (constant_j or constant_i) else (np.nan, np.nan)
    )

    return MonotonicityReport(
        radii=radii, s_values=s_values, J=jv, J_err=je, I=iv, I_err=ie,
        QA=qa, QI=qi, volume=volume, weighted=weighted,
        monotone_J=monotone_j, monotone_I=monotone_i,
        constant_J=constant_j, constant_I=constant_i,
        equality_perp_sup=perp_sup, equality_dtan_sup=dtan_sup,
    )
