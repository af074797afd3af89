# src/galgeo/testfile/test_geodesy.py
import math

import numpy as np
import pytest

from src.galgeo.geodesy.curve import CurveSamples, five_point_derivative, hermite_midpoint
from src.galgeo.geodesy.development import (
    check_curve_development,
    check_geodesic_development,
    develop,
    lift_independence_residual,
    pullback_residuals,
)
from src.galgeo.geodesy.integrator import integrate_geodesic
from src.galgeo.geometry.connection import SecondOrderSystem, chern_connection
from src.galgeo.symbolic.expr import ChartPoint

from .conftest import connection_for, points_for


def _system(*sources):
    return SecondOrderSystem.from_strings(list(sources))


def _init(t, x, y):
    return ChartPoint(t, tuple(x), tuple(y))


# ---------- sampled curves ----------
def test_samples_must_be_uniform():
    s = np.array([0.0, 0.1, 0.3])
    with pytest.raises(ValueError):
        CurveSamples(1, s, np.zeros((3, 3)), np.zeros((3, 3)))


def test_samples_must_increase():
    s = np.array([0.0, -0.1, -0.2])
    with pytest.raises(ValueError):
        CurveSamples(1, s, np.zeros((3, 3)), np.zeros((3, 3)))


def test_hermite_midpoint_is_exact_on_cubics():
    f = lambda s: np.array([s**3 - s, 2 * s**2])
    df = lambda s: np.array([3 * s**2 - 1, 4 * s])
    value, derivative = hermite_midpoint(f(0.2), df(0.2), f(0.5), df(0.5), 0.3)
    assert value == pytest.approx(f(0.35))
    assert derivative == pytest.approx(df(0.35))


def test_five_point_derivative_is_exact_on_quartics():
    s = np.linspace(0.0, 1.0, 11)
    values = (s**4 - 3 * s**2)[:, None]
    derivative = five_point_derivative(values, 0.1)
    assert derivative[:, 0] == pytest.approx(4 * s[2:-2] ** 3 - 6 * s[2:-2], abs=1e-12)


# ---------- integrator ----------
def test_free_particle_moves_uniformly():
    curve = integrate_geodesic(_system("0"), _init(0.0, [0.0], [1.0]), 1.0, 0.1)
    assert len(curve) == 11
    assert curve.points[:, 0] == pytest.approx(curve.s)
    assert curve.points[:, 1] == pytest.approx(curve.s, abs=1e-12)
    assert np.all(curve.points[:, 2] == 1.0)


def test_oscillator_quarter_period():
    curve = integrate_geodesic(_system("x1"), _init(0.0, [0.0], [1.0]), math.pi / 2, 1e-3)
    assert curve.s[-1] == math.pi / 2
    assert curve.points[-1, 1] == pytest.approx(1.0, abs=1e-6)
    assert curve.points[-1, 2] == pytest.approx(0.0, abs=1e-6)


def test_quadratic_drag_closed_form():
    curve = integrate_geodesic(_system("y1^2"), _init(0.0, [0.0], [1.0]), 1.0, 1e-3)
    s = curve.s
    assert np.allclose(curve.points[:, 1], np.log1p(s), atol=1e-6)
    assert np.allclose(curve.points[:, 2], 1.0 / (1.0 + s), atol=1e-6)


def test_effective_step_never_exceeds_request():
    curve = integrate_geodesic(_system("0"), _init(0.0, [0.0], [1.0]), 1.0, 0.3)
    assert len(curve) == 5
    assert curve.h <= 0.3
    assert curve.s[-1] == 1.0


def test_samples_sit_on_the_requested_grid_when_step_divides():
    curve = integrate_geodesic(_system("x1"), _init(0.5, [0.0], [1.0]), 1.5, 0.25)
    assert curve.s.tolist() == [0.5 + 0.25 * k for k in range(5)]


def test_domain_error_truncates():
    curve = integrate_geodesic(_system("log(1 - t)"), _init(0.0, [0.0], [0.0]), 2.0, 0.1)
    assert curve.truncated
    assert curve.status == "domain_error"
    assert curve.points[-1, 0] < 1.0
    assert len(curve) < 21


def test_blowup_truncates():
    curve = integrate_geodesic(_system("-y1^2"), _init(0.0, [0.0], [1.0]), 3.0, 0.01)
    assert curve.truncated
    assert curve.status == "blowup"
    assert curve.s[-1] < 3.0


def test_rejects_bad_arguments():
    system = _system("0")
    with pytest.raises(ValueError):
        integrate_geodesic(system, _init(0.0, [0.0], [1.0]), 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_geodesic(system, _init(1.0, [0.0], [1.0]), 0.0, 0.1)


# ---------- development ----------
def test_flat_geodesic_develops_to_time_axis():
    conn = chern_connection(_system("0"))
    curve = integrate_geodesic(_system("0"), _init(0.5, [0.2], [1.5]), 1.5, 0.01)
    result = develop(conn, curve)
    assert np.array_equal(result.elements[0].matrix, np.eye(3))
    for s, point in result.samples():
        assert point.as_array() == pytest.approx([s - 0.5, 0.0, 0.0], abs=1e-12)
    assert result.straight_line(1e-10).passed


def test_parabola_develops_to_itself():
    conn = chern_connection(_system("0"))
    s = np.linspace(0.0, 1.0, 21)
    curve = CurveSamples.from_parametrization(1, s, lambda u: [u, u**2, 2 * u], lambda u: [1.0, 2 * u, 2.0])
    result = develop(conn, curve)
    for value, point in result.samples():
        assert point.as_array() == pytest.approx([value, value**2, 2 * value], abs=1e-12)
    verdict = check_curve_development(conn, curve, 1e-6)
    assert not verdict.passed
    assert verdict.max_phi_pullback == pytest.approx(2.0)


def test_constant_curve_develops_to_identity():
    conn = chern_connection(_system("x1"))
    s = np.linspace(0.0, 1.0, 6)
    curve = CurveSamples(1, s, np.tile([0.0, 0.3, 0.4], (6, 1)), np.zeros((6, 3)))
    for element in develop(conn, curve).elements:
        assert np.array_equal(element.matrix, np.eye(3))


def test_oscillator_geodesic_is_straight():
    conn = chern_connection(_system("x1"))
    verdict = check_geodesic_development(conn, _system("x1"), _init(0.0, [0.0], [1.0]), 1.0, 1e-3, 1e-5)
    assert verdict.passed, verdict
    assert verdict.status == "ok"


def test_corpus_geodesics_develop_to_straight_lines(corpus):
    for name, document in corpus:
        conn = connection_for(document)
        for init in points_for(conn, 5, seed=31):
            verdict = check_geodesic_development(conn, document.system, init, init.t + 0.25, 1e-3, 1e-5)
            assert verdict.passed, (name, init, verdict.straight_line, verdict.max_omega_pullback)


def test_pullback_residual_converges_at_fourth_order():
    system = _system("x1")
    conn = chern_connection(system)
    coarse = integrate_geodesic(system, _init(0.0, [0.0], [1.0]), 1.0, 0.1)
    fine = integrate_geodesic(system, _init(0.0, [0.0], [1.0]), 1.0, 0.05)
    ratio = max(pullback_residuals(conn, coarse)) / max(pullback_residuals(conn, fine))
    assert ratio >= 8.0


def test_development_does_not_depend_on_lift(corpus, rng):
    for name, document in corpus:
        conn = connection_for(document)
        n = conn.n
        A = np.eye(n) + 0.3 * rng.normal(size=(n, n))
        init = points_for(conn, 1, seed=41)[0]
        curve = integrate_geodesic(document.system, init, init.t + 0.2, 1e-2)
        assert lift_independence_residual(conn, curve, A) <= 1e-8, name


def test_truncated_geodesic_fails_verdict():
    system = _system("-y1^2")
    curve = integrate_geodesic(system, _init(0.0, [0.0], [1.0]), 3.0, 0.01, blowup_threshold=10.0)
    verdict = check_curve_development(chern_connection(system), curve, 1e-5)
    assert verdict.truncated
    assert verdict.status == "blowup"
    assert not verdict.passed
