import numpy as np
import pytest
from scipy import integrate as sp_integrate

from mobius_mono.errors import NonFiniteIntegrand, NonRegularLevel
from mobius_mono.geometry import Frame
from mobius_mono.quadrature import (
    QuadratureResult,
    RegionSpec,
    integrate_region,
    level_curve_integral,
    radial_integral,
)
from mobius_mono.surfaces import catenoid, flat_disk

UNIT_SQUARE = flat_disk([0.5, 0.5, 0.0], Frame(np.eye(3)[:2]), 0.5)
ONES = lambda batch: np.ones(batch.positions.shape[0])  # noqa: E731


def _dist_sq(point):
    p = np.asarray(point, dtype=float)
    return lambda pos: np.einsum("mn,mn->m", pos - p, pos - p)


class TestIntegrateRegion:
    def test_whole_unit_square(self):
        res = integrate_region(UNIT_SQUARE, ONES, RegionSpec.whole())
        assert abs(res.value - 1.0) <= 1e-12
        assert res.error_estimate <= 1e-12

    def test_polynomial_exact(self):
        # 4x4 Gauss is exact for x^3 * y^2; integral over the unit square
        integrand = lambda b: b.positions[:, 0] ** 3 * b.positions[:, 1] ** 2
        res = integrate_region(UNIT_SQUARE, integrand, RegionSpec.whole())
        assert res.value == pytest.approx(1.0 / 12.0, abs=1e-13)

    def test_disk_area(self):
        # disk of radius 1/(2*sqrt(3)) about the square's center
        rho = 1.0 / (2.0 * np.sqrt(3.0))
        region = RegionSpec.sublevel(_dist_sq([0.5, 0.5, 0.0]), rho**2)
        res = integrate_region(UNIT_SQUARE, ONES, region, tol=1e-9)
        truth = np.pi * rho**2
        assert abs(res.value - truth) <= 3.0 * res.error_estimate
        assert abs(res.value - truth) <= 1e-8

    def test_half_plane_cut(self):
        # region x0 < 0.3 of the unit square; shift so the threshold is > 0
        region = RegionSpec.sublevel(lambda pos: pos[:, 0] + 1.0, 1.3)
        res = integrate_region(UNIT_SQUARE, ONES, region)
        assert res.value == pytest.approx(0.3, abs=1e-10)

    def test_band_additivity(self):
        fn = _dist_sq([0.5, 0.5, 0.0])
        lo, hi = 0.02, 0.06
        whole = integrate_region(UNIT_SQUARE, ONES, RegionSpec.sublevel(fn, hi))
        inner = integrate_region(UNIT_SQUARE, ONES, RegionSpec.sublevel(fn, lo))
        band = integrate_region(UNIT_SQUARE, ONES, RegionSpec.band(fn, lo, hi))
        budget = 3.0 * (whole.error_estimate + inner.error_estimate + band.error_estimate)
        assert abs(whole.value - inner.value - band.value) <= budget + 1e-12

    def test_error_estimate_honest_and_converging(self):
        rho = 0.35
        region = RegionSpec.sublevel(_dist_sq([0.5, 0.5, 0.0]), rho**2)
        truth = np.pi * rho**2
        errs = []
        for depth in (6, 8, 10):
            res = integrate_region(UNIT_SQUARE, ONES, region, tol=1e-15,
                                   max_depth=depth)
            assert abs(res.value - truth) <= 3.0 * res.error_estimate
            errs.append(abs(res.value - truth))
        assert errs[2] < errs[0]

    def test_weighted_integrand_on_catenoid(self):
        # total area of the catenoid band equals the closed form
        cat = catenoid(v_range=(-0.5, 0.5))
        res = integrate_region(cat, ONES, RegionSpec.whole())
        truth = 2.0 * np.pi * sp_integrate.quad(lambda v: np.cosh(v) ** 2, -0.5, 0.5)[0]
        assert res.value == pytest.approx(truth, rel=1e-10)

    def test_nonfinite_integrand_raises(self):
        bad = lambda b: np.where(b.positions[:, 0] > 0.5, np.nan, 1.0)
        with pytest.raises(NonFiniteIntegrand):
            integrate_region(UNIT_SQUARE, bad, RegionSpec.whole(), max_depth=6)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            RegionSpec.sublevel(lambda pos: pos[:, 0], -1.0)
        with pytest.raises(ValueError):
            RegionSpec.band(lambda pos: pos[:, 0], 2.0, 1.0)
        with pytest.raises(ValueError):
            integrate_region(UNIT_SQUARE, ONES, RegionSpec.whole(), tol=0.0)

    def test_deterministic(self):
        region = RegionSpec.sublevel(_dist_sq([0.5, 0.5, 0.0]), 0.1)
        a = integrate_region(UNIT_SQUARE, ONES, region)
        b = integrate_region(UNIT_SQUARE, ONES, region)
        assert a.value == b.value and a.error_estimate == b.error_estimate


class TestRadialIntegral:
    def test_polynomial(self):
        res = radial_integral(lambda r: r**3, 0.0, 2.0)
        assert res.value == pytest.approx(4.0, abs=1e-12)
        assert isinstance(res, QuadratureResult)

    def test_monotonicity_weight_vs_quad(self):
        # radial weight from the weighted identity, k = 2, |b| = 2
        k, nb = 2, 2.0
        fn = lambda r: (nb**2 - r**2) ** ((k - 2) / 2.0) / r ** (k + 1)
        res = radial_integral(fn, 0.5, 0.9)
        truth, _ = sp_integrate.quad(fn, 0.5, 0.9)
        assert res.value == pytest.approx(truth, rel=1e-10)
        # trapezoid cross-check at modest accuracy
        rr = np.linspace(0.5, 0.9, 20001)
        trap = np.trapezoid(fn(rr), rr)
        assert res.value == pytest.approx(trap, rel=1e-7)

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            radial_integral(lambda r: r, 1.0, 1.0)


class TestLevelCurveIntegral:
    def test_circle_circumference(self):
        rho = 1.0 / (2.0 * np.sqrt(3.0))
        center = np.array([0.5, 0.5, 0.0])
        f = lambda pos: np.einsum("mn,mn->m", pos - center, pos - center)
        ones = lambda b: np.ones(b.positions.shape[0])
        res = level_curve_integral(UNIT_SQUARE, f, rho**2, ones)
        assert res.value == pytest.approx(2.0 * np.pi * rho, rel=1e-7)

    def test_weighted_line_integral(self):
        # integral of x0 over the circle |x - c| = rho equals 0.5 * 2 pi rho
        rho = 0.3
        center = np.array([0.5, 0.5, 0.0])
        f = lambda pos: np.einsum("mn,mn->m", pos - center, pos - center)
        res = level_curve_integral(UNIT_SQUARE, f, rho**2,
                                   lambda b: b.positions[:, 0])
        assert res.value == pytest.approx(np.pi * rho, rel=1e-7)

    def test_missing_level_raises(self):
        f = lambda pos: np.einsum("mn,mn->m", pos, pos)
        ones = lambda b: np.ones(b.positions.shape[0])
        with pytest.raises(NonRegularLevel):
            level_curve_integral(UNIT_SQUARE, f, 100.0, ones)

    def test_critical_level_raises(self):
        # level through the minimum of f: gradient vanishes on the contour
        center = np.array([0.5, 0.5, 0.0])
        f = lambda pos: np.einsum("mn,mn->m", pos - center, pos - center)
        ones = lambda b: np.ones(b.positions.shape[0])
        with pytest.raises(NonRegularLevel):
            level_curve_integral(UNIT_SQUARE, f, 1e-18, ones)

    def test_requires_two_parameters(self):
        from mobius_mono.surfaces import ParametricPatch

        curve = ParametricPatch(
            k=1, n=2, domain=np.array([[0.0, 1.0]]),
            eval_fn=lambda p: np.concatenate([p, p], axis=-1))
        with pytest.raises(ValueError):
            level_curve_integral(curve, lambda pos: pos[:, 0], 0.5,
                                 lambda b: np.ones(b.positions.shape[0]))
