import numpy as np
import pytest

from mobius_mono.errors import Degenerate, RankDeficient
from mobius_mono.geometry import (
    ExtendedPoint,
    Frame,
    HalfSpace,
    Hyperplane,
    INFINITY,
    Isometry,
    Sphere,
    as_vec,
    extended,
    fit_sphere,
    orthonormal_frame,
    project,
)


class TestVectors:
    def test_as_vec_coerces(self):
        v = as_vec([1, 2, 3])
        assert v.dtype == np.float64 and v.shape == (3,)

    def test_as_vec_rejects_short_and_nonfinite(self):
        with pytest.raises(ValueError):
            as_vec([1.0])
        with pytest.raises(ValueError):
            as_vec([1.0, np.nan, 0.0])

    def test_extended_point_variants(self):
        p = extended([1.0, 2.0, 3.0])
        assert not p.is_infinite
        assert INFINITY.is_infinite
        with pytest.raises(ValueError):
            INFINITY.vec
        assert INFINITY.isclose(ExtendedPoint.infinity())
        assert not p.isclose(INFINITY)


class TestFrames:
    def test_orthonormal_frame_normalizes(self):
        fr = orthonormal_frame([[1.0, 0, 0], [0, 2.0, 0]])
        assert np.allclose(fr.vectors, [[1, 0, 0], [0, 1, 0]])

    def test_orthonormal_frame_spans_input(self):
        fr = orthonormal_frame([[1.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        # projector onto span equals projector onto the x-y plane
        proj = fr.vectors.T @ fr.vectors
        assert np.allclose(proj, np.diag([1.0, 1.0, 0.0]), atol=1e-12)

    def test_orthonormal_frame_rank_deficient(self):
        with pytest.raises(RankDeficient):
            orthonormal_frame([[1.0, 0, 0], [2.0, 0, 0]])

    def test_frame_rejects_skewed_vectors(self):
        with pytest.raises(ValueError):
            Frame(np.array([[1.0, 0, 0], [1.0, 1.0, 0]]))

    def test_project_example(self):
        fr = Frame(np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        tan, nor = project([3.0, 4.0, 5.0], fr)
        assert np.allclose(tan, [3, 4, 0]) and np.allclose(nor, [0, 0, 5])

    def test_project_pythagoras(self, rng):
        for _ in range(50):
            cols = rng.normal(size=(4, 2))
            fr = orthonormal_frame([cols[:, 0], cols[:, 1]])
            x = rng.normal(size=4)
            tan, nor = project(x, fr)
            assert abs(tan @ tan + nor @ nor - x @ x) <= 1e-12 * (1 + x @ x)
            # idempotence on the tangential output
            tan2, _ = project(tan, fr)
            assert np.allclose(tan2, tan, atol=1e-12)


class TestIsometry:
    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError):
            Isometry(np.array([[1.0, 0.2, 0], [0, 1, 0], [0, 0, 1]]), np.zeros(3))

    def test_preserves_distances(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        iso = Isometry(q, rng.normal(size=3))
        x, y = rng.normal(size=3), rng.normal(size=3)
        d0 = np.linalg.norm(x - y)
        d1 = np.linalg.norm(iso.apply(x) - iso.apply(y))
        assert abs(d0 - d1) <= 1e-12 * (1 + d0)

    def test_inverse_and_compose(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        iso = Isometry(q, rng.normal(size=3))
        assert iso.compose(iso.inverse()).is_identity()
        x = rng.normal(size=3)
        assert np.allclose(iso.inverse().apply(iso.apply(x)), x, atol=1e-12)

    def test_apply_extended(self):
        iso = Isometry.identity(3)
        assert iso.apply_extended(INFINITY).is_infinite


class TestFitSphere:
    def _sphere_samples(self, center, radius, m, rng):
        d = rng.normal(size=(m, len(center)))
        d /= np.linalg.norm(d, axis=1)[:, None]
        return np.asarray(center) + radius * d

    def test_exact_recovery(self, rng):
        pts = self._sphere_samples([1.0, 2.0, 3.0], 0.5, 10, rng)
        sph, res = fit_sphere(pts)
        assert np.allclose(sph.center, [1, 2, 3], atol=1e-10)
        assert abs(sph.radius - 0.5) <= 1e-10
        assert res < 1e-12

    def test_hyperplane_degenerate(self, rng):
        pts = rng.normal(size=(12, 3))
        pts[:, 2] = 0.7
        with pytest.raises(Degenerate):
            fit_sphere(pts)

    def test_needs_enough_points(self):
        with pytest.raises(ValueError):
            fit_sphere(np.eye(3))


class TestRegionPrimitives:
    def test_halfspace_contains(self):
        hs = HalfSpace(np.array([1.0, 0.0, 0.0]), 2.0)
        assert hs.contains([1.0, 5.0, 5.0]) and not hs.contains([3.0, 0.0, 0.0])

    def test_hyperplane_signed_distance(self):
        hp = Hyperplane(np.array([0.0, 1.0, 0.0]), 1.0)
        assert hp.signed_distance([0.0, 3.0, 0.0]) == pytest.approx(2.0)

    def test_sphere_positive_radius(self):
        with pytest.raises(ValueError):
            Sphere(np.zeros(3), -1.0)
