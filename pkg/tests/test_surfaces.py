import numpy as np
import pytest

from mobius_mono.errors import InvalidParameter, RankDeficient
from mobius_mono.geometry import Frame, Isometry
from mobius_mono.surfaces import (
    ParametricPatch,
    catenoid,
    complex_parabola,
    enneper,
    flat_disk,
    helicoid,
    mean_curvature_norm,
    minimality_grid_check,
    sample,
    sample_batch,
    sphere_patch,
    transform_patch,
)

CATALOG = {
    "flat_disk": flat_disk([0.0, 0.0, 0.0],
                           Frame(np.eye(3)[:2]), 1.0),
    "catenoid": catenoid(),
    "helicoid": helicoid(),
    "enneper": enneper(),
    "complex_parabola": complex_parabola(),
}


class TestPatchBasics:
    def test_domain_validation(self):
        with pytest.raises(InvalidParameter):
            ParametricPatch(k=1, n=2, domain=np.array([[1.0, 0.0]]),
                            eval_fn=lambda p: p)

    def test_periodic_flags(self):
        cat = catenoid()
        assert cat.periodic == (True, False)
        # truncated angular range is not a full turn, so not periodic
        part = catenoid(u_range=(-1.0, 1.0))
        assert part.periodic == (False, False)
        with pytest.raises(InvalidParameter):
            ParametricPatch(k=2, n=3, domain=np.array([[0, 1], [0, 1.0]]),
                            eval_fn=lambda p: np.zeros(p.shape[:-1] + (3,)),
                            periodic=(True,))

    def test_contains_with_margin(self):
        disk = CATALOG["flat_disk"]
        lo, hi = disk.domain[0]
        assert disk.contains([0.0, 0.0])
        assert not disk.contains([hi + 0.1, 0.0])
        assert not disk.contains([hi - 0.01, 0.0], margin=0.05)

    def test_fd_jacobian_fallback(self):
        patch = ParametricPatch(
            k=2, n=3, domain=np.array([[-1, 1], [-1, 1.0]]),
            eval_fn=lambda p: np.stack(
                [p[..., 0], p[..., 1], p[..., 0] * p[..., 1]], axis=-1))
        jac = patch.jac(np.array([[0.3, 0.5]]))[0]
        assert np.allclose(jac, [[1, 0], [0, 1], [0.5, 0.3]], atol=1e-8)


class TestSampling:
    def test_flat_disk_area_element(self):
        disk = CATALOG["flat_disk"]
        s = sample(disk, [0.2, -0.3])
        assert s.area_element == pytest.approx(1.0)
        assert np.allclose(s.position, [0.2, -0.3, 0.0])

    def test_catenoid_area_element(self):
        # |x_u ^ x_v| = cosh^2(v) for unit scale
        cat = CATALOG["catenoid"]
        for v in (0.0, 0.5, -0.8):
            s = sample(cat, [0.7, v])
            assert s.area_element == pytest.approx(np.cosh(v) ** 2, rel=1e-12)

    def test_catenoid_point(self):
        s = sample(CATALOG["catenoid"], [0.0, 0.5])
        assert np.allclose(s.position, [np.cosh(0.5), 0.0, 0.5])

    def test_enneper_point_and_minimality(self):
        enn = CATALOG["enneper"]
        u, v = 0.2, -0.1
        expect = [u - u ** 3 / 3 + u * v ** 2,
                  v - v ** 3 / 3 + v * u ** 2,
                  u ** 2 - v ** 2]
        s = sample(enn, [u, v])
        assert np.allclose(s.position, expect, atol=1e-12)

    def test_complex_parabola_point(self):
        par = CATALOG["complex_parabola"]
        u, v = 0.3, 0.4
        # (z, z^2) with z = u + iv embedded in R^4
        s = sample(par, [u, v])
        assert np.allclose(s.position, [u, v, u * u - v * v, 2 * u * v],
                           atol=1e-12)
        assert par.n == 4

    def test_batch_matches_single(self, rng):
        cat = CATALOG["catenoid"]
        params = rng.uniform([-2.0, -0.8], [2.0, 0.8], size=(20, 2))
        batch = sample_batch(cat, params)
        for i in range(20):
            s = sample(cat, params[i])
            assert np.allclose(batch.positions[i], s.position, atol=1e-12)
            assert batch.area_elements[i] == pytest.approx(s.area_element,
                                                           rel=1e-12)

    def test_tangential_normal_split(self, rng):
        cat = CATALOG["catenoid"]
        params = rng.uniform([-2.0, -0.8], [2.0, 0.8], size=(10, 2))
        batch = sample_batch(cat, params)
        vecs = rng.normal(size=(10, 3))
        total = np.einsum("mn,mn->m", vecs, vecs)
        assert np.allclose(batch.tangential_sq(vecs) + batch.normal_sq(vecs),
                           total, rtol=1e-12)

    def test_degenerate_point_rejected(self):
        bad = ParametricPatch(
            k=2, n=3, domain=np.array([[-1, 1], [-1, 1.0]]),
            eval_fn=lambda p: np.stack(
                [p[..., 0], p[..., 0], 0 * p[..., 1]], axis=-1))
        with pytest.raises(RankDeficient):
            sample_batch(bad, np.array([[0.0, 0.0]]))


class TestCurvature:
    def test_flat_disk_zero(self):
        assert mean_curvature_norm(CATALOG["flat_disk"], [0.1, 0.2]) <= 1e-10

    def test_sphere_curvature(self):
        for rho in (1.0, 2.5):
            sph = sphere_patch(rho)
            h = mean_curvature_norm(sph, [0.3, 0.6])
            assert h == pytest.approx(2.0 / rho, rel=1e-5)

    def test_catalog_is_minimal(self):
        for name, patch in CATALOG.items():
            worst = minimality_grid_check(patch, grid=6)
            assert worst <= 1e-6, f"{name}: max |H| = {worst:.2e}"

    def test_helicoid_minimal_pointwise(self):
        assert mean_curvature_norm(CATALOG["helicoid"], [0.4, 0.3]) <= 1e-7


class TestTransform:
    def test_transform_patch_moves_points(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        iso = Isometry(q, np.array([1.0, -2.0, 0.5]))
        cat = CATALOG["catenoid"]
        moved = transform_patch(cat, iso)
        p = np.array([0.3, -0.4])
        assert np.allclose(sample(moved, p).position,
                           iso.apply(sample(cat, p).position), atol=1e-12)
        assert sample(moved, p).area_element == pytest.approx(
            sample(cat, p).area_element, rel=1e-10)
        assert moved.periodic == cat.periodic

    def test_transform_preserves_minimality(self):
        iso = Isometry(np.diag([-1.0, 1.0, 1.0]), np.zeros(3))
        moved = transform_patch(CATALOG["catenoid"], iso)
        assert minimality_grid_check(moved, grid=5) <= 1e-6
