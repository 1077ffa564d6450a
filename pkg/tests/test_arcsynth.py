import numpy as np
import pytest
from scipy.optimize import brentq

from smoothlink.arcsynth import (GapProblem, certify_gap_cones,
                                 choose_gap_frame, find_equator_crossings,
                                 slab_crossing_speed, solve_radial_amplitude,
                                 synthesize_gap_arc)
from smoothlink.errors import AmplitudeSolveError, PlannerError
from smoothlink.geom import normalize, sphere_distance
from smoothlink.indicatrix import CircleArc, FunctionArc
from smoothlink.kernels import SpeedFunction, integrate_curve


def wave_arc():
    """Admissible test curve: polar angle pi/2 - 0.4 cos(2 pi t), azimuth pi t."""

    def theta(t):
        return np.pi / 2 - 0.4 * np.cos(2 * np.pi * t)

    def phi(t):
        return np.pi * t

    def point(t):
        th, ph = theta(t), phi(t)
        return np.column_stack([np.sin(th) * np.cos(ph),
                                np.sin(th) * np.sin(ph),
                                np.cos(th)])

    def velocity(t):
        th, ph = theta(t), phi(t)
        dth = 0.4 * 2 * np.pi * np.sin(2 * np.pi * t)
        dph = np.pi * np.ones_like(t)
        e_th = np.column_stack([np.cos(th) * np.cos(ph),
                                np.cos(th) * np.sin(ph), -np.sin(th)])
        e_ph = np.column_stack([-np.sin(th) * np.sin(ph),
                                np.sin(th) * np.cos(ph), np.zeros_like(t)])
        return dth[:, None] * e_th + dph[:, None] * e_ph

    return FunctionArc(point_fn=point, velocity_fn=velocity, t0=0.0, t1=1.0)


def polar_cap_arc():
    """Arc staying inside the polar cap (no equator crossings)."""

    def point(t):
        th = 0.25 + 0.05 * np.sin(2 * np.pi * t)
        ph = 1.5 * t
        return np.column_stack([np.sin(th) * np.cos(ph),
                                np.sin(th) * np.sin(ph), np.cos(th)])

    return FunctionArc(point_fn=point, t0=0.0, t1=1.0)


class TestAmplitudeSolve:
    def test_axis_aligned(self):
        assert solve_radial_amplitude(np.zeros(3), np.array([0, 0, 1.0]),
                                      10.0) == pytest.approx(10.0)

    def test_3_4_5_triangle(self):
        b = solve_radial_amplitude(np.array([3.0, 0, 0]), np.array([0, 1.0, 0]),
                                   5.0)
        assert b == pytest.approx(4.0, abs=1e-12)

    def test_random_substitution_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            target = rng.uniform(0.5, 20.0)
            base = rng.standard_normal(3)
            base *= rng.uniform(0, 0.2) * target / np.linalg.norm(base)
            v = rng.standard_normal(3)
            b = solve_radial_amplitude(base, v, target)
            assert b > 0
            assert np.linalg.norm(base + b * v) == pytest.approx(target, abs=1e-12 * target)

    def test_preconditions(self):
        with pytest.raises(AmplitudeSolveError):
            solve_radial_amplitude(np.zeros(3), np.zeros(3), 1.0)
        with pytest.raises(AmplitudeSolveError):
            solve_radial_amplitude(np.array([2.0, 0, 0]), np.array([1.0, 0, 0]), 1.0)


class TestCrossings:
    def test_wave_arc_roots(self):
        # independent oracle: roots of sin(0.4 cos 2 pi t) via bracketed solves
        r1 = brentq(lambda t: np.sin(0.4 * np.cos(2 * np.pi * t)), 0.1, 0.4,
                    xtol=1e-15)
        r2 = brentq(lambda t: np.sin(0.4 * np.cos(2 * np.pi * t)), 0.6, 0.9,
                    xtol=1e-15)
        roots, slopes, band = find_equator_crossings(wave_arc(), np.eye(3))
        assert len(roots) == 2
        assert roots[0] == pytest.approx(r1, abs=1e-10)
        assert roots[1] == pytest.approx(r2, abs=1e-10)
        assert roots[0] == pytest.approx(0.25, abs=1e-10)
        assert roots[1] == pytest.approx(0.75, abs=1e-10)
        assert np.all(np.abs(slopes) > 1.0)

    def test_tangential_touch_detected(self):
        def point(t):
            z = np.sin(1.6 * (t - 0.5) ** 2 + 1e-12)
            r = np.sqrt(1 - z * z)
            ph = 0.8 * t
            return np.column_stack([r * np.cos(ph), r * np.sin(ph), z])

        arc = FunctionArc(point_fn=point, t0=0.0, t1=1.0)
        roots, slopes, band = find_equator_crossings(arc, np.eye(3))
        # tangential approach shows up as a tiny band margin, not a crossing
        assert band < 0.05


class TestGapFrame:
    def test_symmetric_bisector(self):
        arc = CircleArc(u_vec=np.array([1.0, 0, 0]), v_vec=np.array([0.0, 1, 0]),
                        omega=1.0, phase=0.0, t0=0.0, t1=np.pi / 2)
        R, info = choose_gap_frame(arc, epsilon=0.05)
        b = normalize(np.array([1.0, 1.0, 0]))
        assert np.linalg.norm(R @ b - np.array([0, 0, 1.0])) < 1e-9
        z0, z1 = info["z_ends"]
        assert z0 == pytest.approx(np.cos(np.pi / 4), abs=1e-12)
        assert z0 > 0.05 and z1 > 0.05

    def test_wave_arc_gets_identity_frame(self):
        R, info = choose_gap_frame(wave_arc(), epsilon=0.1)
        assert np.allclose(R, np.eye(3), atol=1e-9)
        assert len(info["roots"]) == 2

    def test_nearly_antipodal_rejected(self):
        arc = CircleArc(u_vec=np.array([1.0, 0, 0]), v_vec=np.array([0.0, 0, 1]),
                        omega=1.0, phase=0.0, t0=0.0, t1=np.pi - 1e-4)
        with pytest.raises(PlannerError):
            choose_gap_frame(arc, epsilon=0.05)


class TestSlabCrossingSpeed:
    def setup_method(self):
        self.arc = wave_arc()
        roots, _, _ = find_equator_crossings(self.arc, np.eye(3))
        self.u, self.v = float(roots[0]), float(roots[1])
        self.terms, self.rec = slab_crossing_speed(
            self.arc, np.eye(3), 0.0, 1.0, self.u, self.v,
            partition_gap=min(self.u, 1.0 - self.v))

    def _beta(self):
        f = SpeedFunction(0.0, 1.0, 1.0, self.terms)
        grid = np.union1d(np.linspace(0, 1, 4097), f.breakpoints())
        grid = np.union1d(grid, [self.u, self.v,
                                 self.u - self.rec["eps_t"],
                                 self.v + self.rec["eps_t"]])
        c = integrate_curve(f, self.arc, t0=self.u, v0=np.zeros(3),
                            params=grid, tol=1e-13)
        M = self.rec["frame2d"]
        return c.params, c.points @ M.T

    def test_flip_recorded_for_this_curve(self):
        # crossing azimuths 45 and 135 degrees force the reflected frame
        assert self.rec["flip"] is True

    def test_sign_conditions_between_crossings(self):
        gg, beta = self._beta()
        inside = (gg > self.u + 1e-9) & (gg < self.v - 1e-9)
        assert np.all(beta[inside, 0] > 0)
        assert np.all(beta[inside, 1] > 0)

    def test_second_coordinate_restored_at_v(self):
        gg, beta = self._beta()
        kv = int(np.searchsorted(gg, self.v))
        assert abs(beta[kv, 1]) <= 1e-9

    def test_slab_separations(self):
        gg, beta = self._beta()
        eps_t = self.rec["eps_t"]
        k = lambda x: int(np.searchsorted(gg, x))
        z3 = beta[k(self.u - eps_t), 2]
        z4 = beta[k(self.v + eps_t), 2]
        assert z3 < beta[k(self.v), 2]
        assert z4 > beta[k(self.u), 2]

    def test_z_monotone_outside_crossing_zone(self):
        gg, beta = self._beta()
        z = beta[:, 2]
        before = gg <= self.u
        after = gg >= self.v
        assert np.all(np.diff(z[before]) > 0)
        assert np.all(np.diff(z[after]) > 0)
        between = (gg >= self.u) & (gg <= self.v)
        assert np.all(np.diff(z[between]) < 0)

    def test_speed_equals_one_near_piece_boundary(self):
        f = SpeedFunction(0.0, 1.0, 1.0, self.terms)
        assert f.boundary_value("start") == 1.0
        assert f.boundary_value("end") == 1.0


class TestSynthesizeGapArc:
    def test_wave_gap_postconditions(self):
        arc = wave_arc()
        R, info = choose_gap_frame(arc, epsilon=0.1)
        gap = GapProblem(arc=arc, frame=R, epsilon=0.1, mu=0.01)
        res = synthesize_gap_arc(gap, frame_info=info)
        d = res.diagnostics
        # pre-rescale endpoint norms equal 10N
        ten_n = 10.0 * d["N"]
        for norm in d["pre_rescale_norms"]:
            assert norm == pytest.approx(ten_n, rel=1e-6)
        # final arc confined to the mu-ball
        norms = np.linalg.norm(res.curve.points, axis=1)
        assert float(np.max(norms)) <= 0.01 * (1 + 1e-8)
        assert norms[0] == pytest.approx(0.01, rel=1e-6)
        assert norms[-1] == pytest.approx(0.01, rel=1e-6)
        # endpoint cone clearance: cos theta above 1/2 at both ends
        assert min(d["cos_end_angles"]) > 0.5
        ok, why = certify_gap_cones(res, R)
        assert ok, why

    def test_speed_boundary_exactly_one(self):
        arc = wave_arc()
        R, info = choose_gap_frame(arc, epsilon=0.1)
        res = synthesize_gap_arc(GapProblem(arc=arc, frame=R, epsilon=0.1,
                                            mu=0.01), frame_info=info)
        assert res.speed.boundary_value("start") == 1.0
        assert res.speed.boundary_value("end") == 1.0

    def test_tangents_unchanged(self):
        arc = wave_arc()
        R, info = choose_gap_frame(arc, epsilon=0.1)
        res = synthesize_gap_arc(GapProblem(arc=arc, frame=R, epsilon=0.1,
                                            mu=0.01), frame_info=info)
        assert np.allclose(res.curve.tangents, arc.point(res.curve.params),
                           atol=0.0)

    def test_zero_crossing_gap(self):
        arc = polar_cap_arc()
        R, info = choose_gap_frame(arc, epsilon=0.05)
        res = synthesize_gap_arc(GapProblem(arc=arc, frame=R, epsilon=0.05,
                                            mu=0.02), frame_info=info)
        assert len(res.diagnostics["crossings"]) == 0
        norms = np.linalg.norm(res.curve.points, axis=1)
        assert float(np.max(norms)) <= 0.02 * (1 + 1e-8)
        ok, why = certify_gap_cones(res, R)
        assert ok, why

    def test_epsilon_range_enforced(self):
        arc = wave_arc()
        with pytest.raises(ValueError):
            GapProblem(arc=arc, frame=np.eye(3), epsilon=0.5, mu=0.01)

    def test_ball_scales_with_mu(self):
        arc = wave_arc()
        R, info = choose_gap_frame(arc, epsilon=0.1)
        r1 = synthesize_gap_arc(GapProblem(arc=arc, frame=R, epsilon=0.1,
                                           mu=0.01), frame_info=info)
        r2 = synthesize_gap_arc(GapProblem(arc=arc, frame=R, epsilon=0.1,
                                           mu=0.005), frame_info=info)
        assert r2.ball_radius == pytest.approx(r1.ball_radius / 2)
        n1 = np.linalg.norm(r1.curve.points, axis=1).max()
        n2 = np.linalg.norm(r2.curve.points, axis=1).max()
        assert n2 == pytest.approx(n1 / 2, rel=1e-6)
