import numpy as np
import pytest
from scipy.integrate import simpson

from smoothlink.suspension import (build_round_suspension,
                                   enclosing_triangle_height, measure_sagitta,
                                   stretch_to_factor, suspension_plane_normal)


def chord2_suspension(h=0.1):
    return build_round_suspension(np.array([0.0, 0, 0]), np.array([2.0, 0, 0]),
                                  height=h, plane_normal=np.array([0.0, 0, 1]),
                                  samples=512)


class TestBuildRoundSuspension:
    def test_chord_sagitta_relation(self):
        s = chord2_suspension(0.1)
        assert s.radius == pytest.approx(5.05, abs=1e-12)
        # verified on the sampled arc: endpoint distance and max sagitta
        assert np.linalg.norm(s.arc.points[-1] - s.arc.points[0]) == pytest.approx(2.0, abs=1e-9)
        sag = measure_sagitta(s.arc.points, s.base_from, s.base_to)
        assert sag == pytest.approx(0.1, abs=1e-9)

    def test_degenerate_flat_limit(self):
        s = chord2_suspension(1e-4)
        assert s.arc_length == pytest.approx(2.0, abs=1e-6)

    def test_endpoint_tangent_deviation(self):
        s = chord2_suspension(0.1)
        dev = float(np.arccos(np.clip(s.tangent_arc.point(np.array([0.0]))[0] @ s.e_dir, -1, 1)))
        assert dev == pytest.approx(np.arcsin(1.0 / 5.05), abs=1e-12)
        assert dev == pytest.approx(0.1993, abs=5e-4)
        mid = s.tangent_arc.point(np.array([s.arc_length / 2]))[0]
        assert float(np.arccos(np.clip(mid @ s.e_dir, -1, 1))) < 1e-9

    def test_tangent_matches_finite_differences(self):
        s = chord2_suspension(0.1)
        ts = np.linspace(0.01, s.arc_length - 0.01, 50)
        h = 1e-6
        fd = (s.point(ts + h) - s.point(ts - h)) / (2 * h)
        an = s.tangent_arc.point(ts)
        assert np.max(np.linalg.norm(fd - an, axis=1)) < 1e-8

    def test_unit_speed(self):
        s = chord2_suspension(0.1)
        assert np.allclose(np.linalg.norm(s.arc.tangents, axis=1), 1.0, atol=1e-12)

    def test_triangle_height_about_twice_sagitta(self):
        s = chord2_suspension(0.05)
        assert 1.8 * 0.05 < s.triangle_height < 2.2 * 0.05
        # the analytic value (endpoint tangent-line apex) upper-bounds the
        # sampled estimate and is approached from below
        measured = enclosing_triangle_height(s.arc.points, s.base_from, s.base_to)
        assert measured <= s.triangle_height * (1 + 1e-12)
        assert measured > 0.98 * s.triangle_height

    def test_degenerate_base_rejected(self):
        with pytest.raises(ValueError):
            build_round_suspension(np.zeros(3), np.zeros(3), 0.1)

    def test_default_plane_normal_rule(self):
        e = np.array([1.0, 0, 0])
        n = suspension_plane_normal(e)
        assert abs(n @ e) < 1e-12
        n2 = suspension_plane_normal(np.array([0.0, 0, 1.0]))
        assert abs(n2 @ np.array([0.0, 0, 1.0])) < 1e-12


class TestStretchToFactor:
    def test_identity_factor_returns_same_speed(self):
        s = chord2_suspension(0.1)
        g, rho, info = stretch_to_factor(s, 1.0)
        assert g.terms == ()
        assert g.base == 1.0
        assert np.allclose(rho.displacement(), s.base_to - s.base_from, atol=1e-12)

    def test_factor_1_25(self):
        s = chord2_suspension(0.1)
        g, rho, info = stretch_to_factor(s, 1.25)
        disp = rho.displacement()
        assert disp[0] == pytest.approx(2.5, abs=1e-10)
        assert abs(disp[1]) <= 1e-10 and abs(disp[2]) <= 1e-10
        # g = 1 exactly near both endpoints
        assert g.boundary_value("start") == 1.0
        assert g.boundary_value("end") == 1.0
        # independent quadrature re-measurement of the displacement
        ts = np.linspace(0.0, s.arc_length, 20001)
        integrand = s.tangent_arc.point(ts) * g(ts)[:, None]
        re = np.array([simpson(integrand[:, k], x=ts) for k in range(3)])
        assert np.linalg.norm(re - disp) < 1e-6

    def test_tangent_directions_identical(self):
        s = chord2_suspension(0.1)
        _, rho, _ = stretch_to_factor(s, 1.25)
        common = np.intersect1d(rho.params, s.arc.params)
        a = s.tangent_arc.point(common)
        b = rho.tangents[np.searchsorted(rho.params, common)]
        assert np.max(np.linalg.norm(a - b, axis=1)) <= 1e-12

    def test_factor_monotone_in_plateau_amplitude(self):
        from smoothlink.suspension import _plateau_speed
        from smoothlink.kernels import piecewise_vector_integrals
        s = chord2_suspension(0.1)
        disps = []
        for p in np.linspace(-0.5, 1.0, 7):
            f = _plateau_speed(s.arc_length, 1 / 8, p)
            grid = np.union1d(np.linspace(0, s.arc_length, 257), f.breakpoints())
            v = piecewise_vector_integrals(
                lambda t: s.tangent_arc.point(t) * f(t)[:, None], grid,
                tol=1e-12).sum(axis=0)
            disps.append(v @ s.e_dir)
        assert np.all(np.diff(disps) > 0)

    def test_shrunk_factor(self):
        s = chord2_suspension(0.1)
        g, rho, info = stretch_to_factor(s, 0.75)
        assert rho.displacement()[0] == pytest.approx(1.5, abs=1e-10)
        # suspension height stays bounded
        sag = measure_sagitta(rho.points, rho.points[0], rho.points[-1])
        assert sag < 0.2

    def test_out_of_range_rejected(self):
        s = chord2_suspension(0.1)
        with pytest.raises(ValueError):
            stretch_to_factor(s, 0.4)
        with pytest.raises(ValueError):
            stretch_to_factor(s, 1.6)
