import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlink.errors import SpeedPositivityError
from smoothlink.indicatrix import FunctionArc
from smoothlink.kernels import (Bump, SampledCurve, SpeedFunction, Step,
                                integrate_curve, piecewise_vector_integrals,
                                speed_positivity_certify)


def riemann_oracle(fn, a, b, n=1_000_000):
    """Independent midpoint-rule oracle for vector integrals."""
    ts = a + (b - a) * (np.arange(n) + 0.5) / n
    total = np.zeros(3)
    for lo in range(0, n, 200_000):
        total += fn(ts[lo:lo + 200_000]).sum(axis=0)
    return total * (b - a) / n


CONST_Z = FunctionArc(point_fn=lambda t: np.column_stack(
    [np.zeros_like(t), np.zeros_like(t), np.ones_like(t)]), t0=0.0, t1=2.0)

ROTOR = FunctionArc(point_fn=lambda t: np.column_stack(
    [np.cos(t), np.sin(t), np.zeros_like(t)]), t0=0.0, t1=np.pi / 2)


class TestBump:
    def test_center_value_exact(self):
        assert Bump(0.0, 1.0, 1.0)(np.array([0.0]))[0] == 1.0

    def test_outside_support_exactly_zero(self):
        b = Bump(0.0, 1.0, 1.0)
        assert b(np.array([1.5]))[0] == 0.0
        assert b(np.array([1.0]))[0] == 0.0
        assert b(np.array([-1.0]))[0] == 0.0

    def test_symmetry(self):
        b = Bump(0.0, 1.0, 1.0)
        v1, v2 = b(np.array([0.5]))[0], b(np.array([-0.5]))[0]
        assert v1 == pytest.approx(v2, abs=1e-15)
        assert 0.0 < v1 < 1.0

    def test_symmetry_general_center(self):
        b = Bump(2.7, 0.3, 1.0)
        s = np.linspace(0, 0.29, 50)
        assert np.allclose(b(2.7 + s), b(2.7 - s), atol=1e-15)

    def test_amplitude_scaling(self):
        assert Bump(0.0, 1.0, -2.5)(np.array([0.0]))[0] == -2.5


class TestStep:
    def test_flat_sides_exact(self):
        s = Step(0.0, 1.0, 1.0)
        assert s(np.array([-0.1]))[0] == 0.0
        assert s(np.array([0.0]))[0] == 0.0
        assert s(np.array([1.0]))[0] == 1.0
        assert s(np.array([2.0]))[0] == 1.0

    def test_midpoint_half(self):
        assert Step(0.0, 1.0, 1.0)(np.array([0.5]))[0] == pytest.approx(0.5, abs=1e-15)

    def test_monotone(self):
        s = Step(-1.0, 3.0, 1.0)
        xs = np.linspace(-2, 4, 400)
        assert np.all(np.diff(s(xs)) >= 0)


class TestSpeedFunction:
    def test_constant_margin(self):
        f = SpeedFunction(0.0, 1.0, 1.0, ())
        assert speed_positivity_certify(f) == 1.0

    def test_negative_bump_margin(self):
        f = SpeedFunction(0.0, 1.0, 1.0, (Bump(0.5, 0.2, -0.5),))
        assert speed_positivity_certify(f) >= 0.5

    def test_too_negative_bump_rejected(self):
        f = SpeedFunction(0.0, 1.0, 1.0, (Bump(0.5, 0.2, -1.2),))
        with pytest.raises(SpeedPositivityError):
            speed_positivity_certify(f)

    def test_boundary_value_structural(self):
        f = SpeedFunction(0.0, 4.0, 2.0, (Bump(2.0, 0.5, 3.0),
                                          Step(0.5, 1.0, -0.5)))
        assert f.boundary_value("start") == 2.0
        assert f.boundary_value("end") == 1.5

    def test_boundary_value_raises_inside_transition(self):
        f = SpeedFunction(0.0, 1.0, 1.0, (Step(-0.5, 0.5, 1.0),))
        with pytest.raises(ValueError):
            f.boundary_value("start")

    def test_breakpoints_sorted_within_domain(self):
        f = SpeedFunction(0.0, 1.0, 1.0, (Bump(0.5, 0.2, 1.0), Step(0.1, 0.3, 1.0)))
        bp = f.breakpoints()
        assert np.all(np.diff(bp) > 0)
        assert bp[0] == 0.0 and bp[-1] == 1.0


class TestIntegrateCurve:
    def test_constant_field(self):
        f = SpeedFunction(0.0, 2.0, 1.0, ())
        c = integrate_curve(f, CONST_Z)
        assert np.allclose(c.points[-1], [0, 0, 2], atol=1e-12)
        assert np.allclose(c.points[0], 0.0)

    def test_rotor_closed_form(self):
        f = SpeedFunction(0.0, np.pi / 2, 1.0, ())
        c = integrate_curve(f, ROTOR)
        assert np.allclose(c.points[-1], [1, 1, 0], atol=1e-10)
        # analytic solution along the way: (sin t, 1 - cos t, 0)
        ts = c.params
        exact = np.column_stack([np.sin(ts), 1 - np.cos(ts), np.zeros_like(ts)])
        assert np.max(np.linalg.norm(c.points - exact, axis=1)) < 1e-9

    def test_bump_speed_vs_riemann_oracle(self):
        f = SpeedFunction(0.0, np.pi / 2, 1.0, (Bump(0.5, 0.25, 1.0),))
        c = integrate_curve(f, ROTOR)
        fn = lambda t: ROTOR.point(t) * f(t)[:, None]
        oracle = riemann_oracle(fn, 0.0, np.pi / 2)
        rel = np.linalg.norm(c.points[-1] - oracle) / np.linalg.norm(oracle)
        assert rel < 1e-8

    def test_additivity_over_subintervals(self):
        f = SpeedFunction(0.0, 2.0, 1.0, (Bump(1.0, 0.5, 0.7),))
        ROTOR2 = FunctionArc(point_fn=lambda t: np.column_stack(
            [np.cos(t), np.sin(t), np.zeros_like(t)]), t0=0.0, t1=2.0)
        whole = integrate_curve(
            f, ROTOR2, params=np.union1d(np.linspace(0.0, 2.0, 4097), [1.3]))
        f_a = SpeedFunction(0.0, 1.3, 1.0, (Bump(1.0, 0.5, 0.7),))
        f_b = SpeedFunction(1.3, 2.0, 1.0, (Bump(1.0, 0.5, 0.7),))
        first = integrate_curve(f_a, ROTOR2)
        second = integrate_curve(f_b, ROTOR2, v0=first.points[-1])
        k = int(np.searchsorted(whole.params, 1.3))
        assert np.allclose(whole.points[k], first.points[-1], atol=1e-10)
        assert np.allclose(whole.points[-1], second.points[-1], atol=1e-10)

    def test_amplitude_linearity(self):
        # endpoint displacement is affine in the bump amplitude
        def endpoint(amp):
            f = SpeedFunction(0.0, 1.0, 1.0, (Bump(0.5, 0.25, amp),))
            return integrate_curve(f, ROTOR2B).points[-1]

        ROTOR2B = FunctionArc(point_fn=lambda t: np.column_stack(
            [np.cos(t), np.sin(t), np.zeros_like(t)]), t0=0.0, t1=1.0)
        e0, e1, e2 = endpoint(0.0), endpoint(1.0), endpoint(2.0)
        predicted = e0 + 2.0 * (e1 - e0)
        assert np.linalg.norm(e2 - predicted) < 1e-9

    def test_tangents_are_direction_samples(self):
        f = SpeedFunction(0.0, 2.0, 3.0, ())
        c = integrate_curve(f, CONST_Z)
        assert np.all(c.tangents == CONST_Z.point(c.params))

    def test_anchoring_at_interior_point(self):
        f = SpeedFunction(0.0, 2.0, 1.0, ())
        c = integrate_curve(f, CONST_Z, t0=1.0, v0=np.array([5.0, 0, 0]))
        k = int(np.searchsorted(c.params, 1.0))
        assert np.allclose(c.points[k], [5, 0, 0])

    def test_nonpositive_speed_rejected(self):
        f = SpeedFunction(0.0, 1.0, -1.0, ())
        with pytest.raises(SpeedPositivityError):
            integrate_curve(f, CONST_Z)

    def test_simpson_order(self):
        # halving the grid step cuts the fixed-grid endpoint error by >= 4x
        f = SpeedFunction(0.0, np.pi / 2, 1.0, (Bump(0.7, 0.3, 0.5),))
        fine = integrate_curve(f, ROTOR, tol=1e-15).points[-1]

        def err(n):
            c = integrate_curve(f, ROTOR, params=np.linspace(0, np.pi / 2, n + 1),
                                refine=False)
            return np.linalg.norm(c.points[-1] - fine)

        e1, e2 = err(64), err(128)
        assert e1 / e2 >= 4.0


class TestSampledCurve:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampledCurve(params=[0.0, 0.0], points=np.zeros((2, 3)),
                         tangents=np.zeros((2, 3)))

    def test_diameter(self):
        c = SampledCurve(params=[0, 1], points=[[0, 0, 0], [3, 4, 0.0]],
                         tangents=[[1, 0, 0], [1, 0, 0.0]])
        assert c.diameter() == 5.0


@given(st.floats(-5, 5), st.floats(0.01, 3.0), st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_bump_support_property(center, width, amp):
    b = Bump(center, width, amp)
    xs = np.linspace(center - 2 * width, center + 2 * width, 101)
    vals = b(xs)
    outside = np.abs(xs - center) >= width
    assert np.all(vals[outside] == 0.0)
    if amp != 0:
        assert np.all(np.abs(vals / amp) <= 1.0 + 1e-15)


@given(st.floats(-3, 3), st.floats(1e-3, 4.0))
@settings(max_examples=200, deadline=None)
def test_step_clamps_property(a, width):
    s = Step(a, a + width, 1.0)
    xs = np.linspace(a - 1, a + width + 1, 101)
    vals = s(xs)
    assert np.all((vals >= 0) & (vals <= 1))
    assert np.all(vals[xs <= a] == 0.0)
    assert np.all(vals[xs >= a + width] == 1.0)
