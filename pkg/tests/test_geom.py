import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlink.errors import CannotCertifyError
from smoothlink.geom import (Cone, ProjPoint, Slab, cone_contains,
                             cone_in_halfspace, cones_disjoint, normalize,
                             proj_canonical, proj_distance, rotation_about,
                             rotation_to_pole, sphere_distance)

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])


def random_units(n, seed=0):
    rng = np.random.default_rng(seed)
    return normalize(rng.standard_normal((n, 3)))


class TestSphereDistance:
    def test_identity(self):
        assert sphere_distance(Z, Z) == 0.0

    def test_orthogonal(self):
        assert sphere_distance(X, Y) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_antipodal(self):
        assert sphere_distance(Z, -Z) == pytest.approx(np.pi, abs=1e-15)

    def test_triangle_inequality_sampled(self):
        u = random_units(300, seed=1)
        for p, q, r in zip(u[::3], u[1::3], u[2::3]):
            assert sphere_distance(p, r) <= (sphere_distance(p, q)
                                             + sphere_distance(q, r) + 1e-12)

    def test_clamps_out_of_range_dots(self):
        v = normalize(np.array([1.0, 1.0, 1.0]))
        assert np.isfinite(sphere_distance(v, v))


class TestProjDistance:
    def test_antipodal_identified(self):
        assert proj_distance(X, -X) == 0.0

    def test_orthogonal(self):
        assert proj_distance(X, Y) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_small_rotation(self):
        q = np.array([np.sin(0.1), 0.0, np.cos(0.1)])
        assert proj_distance(Z, q) == pytest.approx(0.1, abs=1e-12)

    def test_sign_symmetry(self):
        u = random_units(200, seed=2)
        p, q = u[:100], u[100:]
        d = proj_distance(p, q)
        assert np.allclose(d, proj_distance(-p, q), atol=1e-12)
        assert np.allclose(d, proj_distance(p, -q), atol=1e-12)

    def test_range(self):
        u = random_units(400, seed=3)
        d = proj_distance(u[:200], u[200:])
        assert np.all((d >= 0) & (d <= np.pi / 2 + 1e-15))


class TestProjCanonical:
    def test_identifies_antipodes(self):
        for v in random_units(50, seed=4):
            assert np.allclose(proj_canonical(v), proj_canonical(-v))

    def test_projpoint_distance(self):
        a, b = ProjPoint(X), ProjPoint(-X)
        assert a.distance(b) == 0.0


class TestRotationToPole:
    def test_z_gives_identity(self):
        assert np.allclose(rotation_to_pole(Z), np.eye(3))

    def test_x_to_pole(self):
        R = rotation_to_pole(X)
        assert np.linalg.norm(R @ X - Z) <= 1e-12

    def test_random_property(self):
        # property check over 1000 random samples
        for v in random_units(1000, seed=5):
            R = rotation_to_pole(v)
            assert np.linalg.norm(R @ v - Z) <= 1e-12
            assert np.linalg.norm(R.T @ R - np.eye(3)) <= 1e-12
            assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)

    def test_near_south_pole(self):
        v = normalize(np.array([1e-12, 0, -1.0]))
        R = rotation_to_pole(v)
        assert np.linalg.norm(R @ v - Z) <= 1e-9


class TestCone:
    def test_contains_vertex(self):
        c = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 4)
        assert cone_contains(c, np.zeros(3))

    def test_on_axis(self):
        c = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 4)
        assert cone_contains(c, np.array([0.0, 0, 1]))

    def test_boundary(self):
        c = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 4)
        assert cone_contains(c, np.array([1.0, 0, 1]))

    def test_outside(self):
        c = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 4)
        assert not cone_contains(c, np.array([1.0, 0, 0.5]))

    def test_half_angle_validated(self):
        with pytest.raises(ValueError):
            Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 2)

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(6)
        c = Cone(vertex=np.array([0.5, -1.0, 2.0]), axis=normalize([1, 2, 3.0]),
                 half_angle=0.6)
        pts = rng.standard_normal((200, 3)) * 2.0
        base = cone_contains(c, pts, tol=0.0)
        # skip points within rounding distance of the cone boundary
        w = pts - c.vertex
        margin = np.abs(np.tensordot(w, c.axis, axes=([-1], [0]))
                        - np.cos(c.half_angle) * np.linalg.norm(w, axis=-1))
        sel = margin > 1e-9
        for seed in range(5):
            R = rotation_about(normalize(rng.standard_normal(3)),
                               rng.uniform(0, np.pi))
            t = rng.standard_normal(3)
            c2 = Cone(vertex=R @ c.vertex + t, axis=R @ c.axis,
                      half_angle=c.half_angle)
            moved = cone_contains(c2, pts @ R.T + t, tol=0.0)
            assert np.all(moved[sel] == base[sel])


class TestConesDisjoint:
    def test_opposite_cones(self):
        a = Cone(vertex=np.array([0, 0, 1.0]), axis=Z, half_angle=np.pi / 8)
        b = Cone(vertex=np.array([0, 0, -1.0]), axis=-Z, half_angle=np.pi / 8)
        assert cones_disjoint(a, b, radius_bound=10.0)

    def test_identical_cones(self):
        a = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 8)
        b = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 8)
        assert not cones_disjoint(a, b, radius_bound=10.0)

    def test_nested_cones(self):
        a = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 8)
        b = Cone(vertex=np.zeros(3), axis=Z, half_angle=np.pi / 4)
        assert not cones_disjoint(a, b, radius_bound=10.0)

    def test_crossing_cones(self):
        a = Cone(vertex=np.array([-1.0, 0, 0]), axis=X, half_angle=0.3)
        b = Cone(vertex=np.array([1.0, 0, 0]), axis=-X, half_angle=0.3)
        assert not cones_disjoint(a, b, radius_bound=10.0)

    def test_near_touching_cannot_certify(self):
        a = Cone(vertex=np.array([0, 0, 1e-9]), axis=Z, half_angle=np.pi / 8)
        b = Cone(vertex=np.array([0, 0, -1e-9]), axis=-Z, half_angle=np.pi / 8)
        with pytest.raises(CannotCertifyError):
            cones_disjoint(a, b, radius_bound=1.0, margin=1e-6)


class TestConeHalfspace:
    def test_upward_cone_above_plane(self):
        c = Cone(vertex=np.array([0, 0, 0.1]), axis=Z, half_angle=0.3)
        assert cone_in_halfspace(c, Z, 0.0)

    def test_tilted_cone_crossing(self):
        c = Cone(vertex=np.array([0, 0, 0.1]),
                 axis=normalize([1.0, 0, 0.1]), half_angle=0.3)
        assert not cone_in_halfspace(c, Z, 0.0)


class TestSlab:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            Slab(1.0, 0.0)

    def test_contains(self):
        s = Slab(-1.0, 2.0)
        assert s.contains_z(0.0)
        assert not s.contains_z(3.0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
       st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
@settings(max_examples=200, deadline=None)
def test_sphere_distance_symmetric(u, v):
    a, b = np.asarray(u), np.asarray(v)
    if np.linalg.norm(a) < 1e-6 or np.linalg.norm(b) < 1e-6:
        return
    p, q = normalize(a), normalize(b)
    assert sphere_distance(p, q) == pytest.approx(sphere_distance(q, p), abs=1e-12)
    assert proj_distance(p, q) == pytest.approx(proj_distance(q, p), abs=1e-12)
