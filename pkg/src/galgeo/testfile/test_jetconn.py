# src/galgeo/testfile/test_jetconn.py
import itertools

import numpy as np
import pytest

from src.galgeo.geometry.connection import SecondOrderSystem, build_connection, chern_connection
from src.galgeo.geometry.forms import coframe_matrix
from src.galgeo.geometry.jetconn import (
    AdaptedVectorField,
    FrameIndex,
    FrameKind,
    NonlinearConnection,
    appendix_cross_check,
    commutator,
    covariant_derivative,
    from_coordinate_frame,
    to_coordinate_frame,
    torsion,
)
from src.galgeo.symbolic.expr import ChartPoint, Const, add
from src.galgeo.symbolic.parser import parse

from .conftest import connection_for, points_for


def _system(*sources):
    return SecondOrderSystem.from_strings(list(sources))


def _frames(n):
    return [FrameIndex.time()] + [FrameIndex.horizontal(k) for k in range(1, n + 1)] + [
        FrameIndex.vertical(k) for k in range(1, n + 1)
    ]


def _evaluate(components, point):
    return np.array([c.evaluate(point) for c in components])


def _random_points(n, count, seed):
    rng = np.random.default_rng(seed)
    return [ChartPoint.from_array(rng.uniform(-1, 1, 2 * n + 1), n) for _ in range(count)]


# ---------- frames ----------
def test_frame_index_layout():
    assert FrameIndex.time().flat(2) == 0
    assert FrameIndex.horizontal(2).flat(2) == 2
    assert FrameIndex.vertical(1).flat(2) == 3
    assert str(FrameIndex.vertical(1)) == "∂/∂y1"
    assert FrameKind.TIME == "d/dt"
    with pytest.raises(ValueError):
        FrameIndex.horizontal(3).flat(2)


def test_frame_change_examples():
    conn = NonlinearConnection.chern(_system("sin(x1)*y1^2"))
    point = ChartPoint(0.2, (0.7,), (1.3,))
    gamma = np.sin(0.7) * 1.3**2
    N = np.sin(0.7) * 1.3
    d_dt = to_coordinate_frame(AdaptedVectorField.basis(conn, FrameIndex.time()))
    assert _evaluate(d_dt, point) == pytest.approx([1.0, 1.3, -gamma])
    delta_x = to_coordinate_frame(AdaptedVectorField.basis(conn, FrameIndex.horizontal(1)))
    assert _evaluate(delta_x, point) == pytest.approx([0.0, 1.0, -N])
    d_dy = to_coordinate_frame(AdaptedVectorField.basis(conn, FrameIndex.vertical(1)))
    assert _evaluate(d_dy, point) == pytest.approx([0.0, 0.0, 1.0])


def test_frame_change_round_trip():
    conn = NonlinearConnection.chern(_system("y1*y2 + cos(t)*x1", "y1^2 - x2"))
    fields = [
        AdaptedVectorField(conn, tuple(parse(s, 2) for s in ("x1", "t*y2", "1", "sin(y1)", "x2^2"))),
        AdaptedVectorField.basis(conn, FrameIndex.horizontal(2)),
    ]
    for field in fields:
        back = from_coordinate_frame(conn, to_coordinate_frame(field))
        for point in _random_points(2, 10, 1):
            assert np.allclose(back.evaluate(point), field.evaluate(point), atol=1e-12)


def test_adapted_frame_is_dual_to_coframe(corpus):
    for name, document in corpus:
        conn = connection_for(document)
        jet = NonlinearConnection.from_connection(conn)
        fields = [to_coordinate_frame(AdaptedVectorField.basis(jet, f)) for f in _frames(conn.n)]
        for point in points_for(conn, 5, seed=2):
            F = np.array([_evaluate(field, point) for field in fields]).T
            E = coframe_matrix(conn.coframe, point)
            assert np.allclose(E @ F, np.eye(2 * conn.n + 1), atol=1e-12), name


# ---------- brackets ----------
def test_commutator_of_vertical_and_horizontal():
    conn = NonlinearConnection.chern(_system("y1^2"))
    bracket = commutator(
        AdaptedVectorField.basis(conn, FrameIndex.vertical(1)), AdaptedVectorField.basis(conn, FrameIndex.horizontal(1))
    )
    point = ChartPoint(0.0, (0.3,), (0.4,))
    assert bracket.evaluate(point) == pytest.approx([0.0, 0.0, -1.0])


def test_vertical_fields_commute():
    conn = NonlinearConnection.chern(_system("y1*y2", "x1"))
    bracket = commutator(
        AdaptedVectorField.basis(conn, FrameIndex.vertical(1)), AdaptedVectorField.basis(conn, FrameIndex.vertical(2))
    )
    assert all(c.is_constant(0.0) for c in bracket.components)


def test_commutator_is_antisymmetric():
    conn = NonlinearConnection.chern(_system("y1*y2 + cos(t)*x1", "y1^2 - x2"))
    for a, b in itertools.combinations(_frames(2), 2):
        u, v = AdaptedVectorField.basis(conn, a), AdaptedVectorField.basis(conn, b)
        for point in _random_points(2, 3, 4):
            assert np.allclose(commutator(u, v).evaluate(point), -commutator(v, u).evaluate(point), atol=1e-12)


def _jacobi_sum(u, v, w):
    return commutator(u, commutator(v, w)) + commutator(v, commutator(w, u)) + commutator(w, commutator(u, v))


def test_commutator_satisfies_jacobi_on_frame(corpus_by_name):
    for name in ("trig_drag_forced", "coupled_drag"):
        system = corpus_by_name[name].system
        conn = NonlinearConnection.chern(system)
        points = points_for(chern_connection(system), 5, seed=14)
        for a, b, c in itertools.combinations(_frames(conn.n), 3):
            u, v, w = (AdaptedVectorField.basis(conn, f) for f in (a, b, c))
            total = _jacobi_sum(u, v, w)
            for point in points:
                assert np.allclose(total.evaluate(point), 0.0, atol=1e-10), (name, a, b, c)


def test_commutator_satisfies_jacobi_on_general_fields():
    conn = NonlinearConnection.chern(_system("sin(x1)*y1^2 + t"))
    u = AdaptedVectorField(conn, tuple(parse(s, 1) for s in ("1", "y1", "x1*t")))
    v = AdaptedVectorField(conn, tuple(parse(s, 1) for s in ("t", "cos(y1)", "1")))
    w = AdaptedVectorField.basis(conn, FrameIndex.horizontal(1))
    total = _jacobi_sum(u, v, w)
    for point in _random_points(1, 10, 15):
        assert np.allclose(total.evaluate(point), 0.0, atol=1e-10)


def test_commutator_is_bilinear():
    conn = NonlinearConnection.chern(_system("y1*y2 + cos(t)*x1", "y1^2 - x2"))
    u = AdaptedVectorField.basis(conn, FrameIndex.time())
    v = AdaptedVectorField(conn, tuple(parse(s, 2) for s in ("x1", "t*y2", "1", "sin(y1)", "x2^2")))
    w = AdaptedVectorField.basis(conn, FrameIndex.vertical(2))
    a, b = Const(2.5), Const(-0.75)
    left = commutator(u.scale(a) + v.scale(b), w)
    right = commutator(u, w).scale(a) + commutator(v, w).scale(b)
    second = commutator(w, u.scale(a) + v.scale(b))
    for point in _random_points(2, 10, 16):
        assert np.allclose(left.evaluate(point), right.evaluate(point), atol=1e-12)
        assert np.allclose(second.evaluate(point), -right.evaluate(point), atol=1e-12)


# ---------- covariant derivative ----------
def test_covariant_derivative_table():
    conn = NonlinearConnection.chern(_system("y1^2"))
    point = ChartPoint(0.0, (0.2,), (0.9,))
    time, horizontal, vertical = FrameIndex.time(), FrameIndex.horizontal(1), FrameIndex.vertical(1)
    assert not np.any(covariant_derivative(time, time, conn).evaluate(point))
    assert covariant_derivative(time, horizontal, conn).evaluate(point) == pytest.approx([0.0, 0.9, 0.0])
    assert covariant_derivative(time, vertical, conn).evaluate(point) == pytest.approx([0.0, 0.0, 0.9])
    assert covariant_derivative(horizontal, horizontal, conn).evaluate(point) == pytest.approx([0.0, 1.0, 0.0])
    assert covariant_derivative(vertical, vertical, conn).evaluate(point) == pytest.approx([0.0, 0.0, 1.0])
    assert not np.any(covariant_derivative(vertical, horizontal, conn).evaluate(point))
    assert not np.any(covariant_derivative(horizontal, vertical, conn).evaluate(point))


# ---------- torsion ----------
def test_vertical_time_torsion_for_arbitrary_N():
    system = _system("sin(x1)*y1^2")
    conn = NonlinearConnection(1, system.gamma, ((parse("x1*y1", 1),),))
    T = torsion(FrameIndex.vertical(1), FrameIndex.time(), conn)
    for point in _random_points(1, 10, 6):
        x, y = point.x[0], point.y[0]
        assert T.time_part(point) == pytest.approx(0.0, abs=1e-14)
        assert T.horizontal_part(point) == pytest.approx([-1.0])
        assert T.vertical_part(point) == pytest.approx([2 * np.sin(x) * y - 2 * x * y], abs=1e-12)


def test_chern_N_kills_vertical_torsion(corpus):
    for name, document in corpus:
        conn = NonlinearConnection.chern(document.system)
        for k in range(1, conn.n + 1):
            T = torsion(FrameIndex.vertical(k), FrameIndex.time(), conn)
            for point in points_for(chern_connection(document.system), 10, seed=8):
                assert np.max(np.abs(T.vertical_part(point))) <= 1e-12, name


def test_shifted_N_has_vertical_torsion():
    system = _system("sin(x1)*y1^2")
    chern = NonlinearConnection.chern(system)
    shifted = chern.with_N(((add(chern.N[0][0], Const(0.1)),),))
    T = torsion(FrameIndex.vertical(1), FrameIndex.time(), shifted)
    assert T.vertical_part(ChartPoint(0.0, (0.3,), (0.5,))) == pytest.approx([-0.2])


def test_horizontal_torsion_vanishes_for_flat_pair():
    conn = NonlinearConnection.chern(_system("0", "0"))
    T = torsion(FrameIndex.horizontal(1), FrameIndex.horizontal(2), conn)
    assert all(c.is_constant(0.0) for c in T.components)


def test_torsion_is_antisymmetric():
    conn = NonlinearConnection.chern(_system("y1*y2 + cos(t)*x1", "y1^2 - x2"))
    for a, b in itertools.combinations(_frames(2), 2):
        for point in _random_points(2, 3, 9):
            left = torsion(a, b, conn).evaluate(point)
            right = torsion(b, a, conn).evaluate(point)
            assert np.allclose(left, -right, atol=1e-12)


# ---------- cross-check ----------
def test_chern_from_cartan_side_agrees(corpus):
    for name, document in corpus:
        jet = NonlinearConnection.chern(document.system)
        cartan = NonlinearConnection.from_connection(chern_connection(document.system))
        for point in points_for(chern_connection(document.system), 10, seed=10):
            for a, b in zip(jet.N, cartan.N):
                assert _evaluate(a, point) == pytest.approx(_evaluate(b, point), abs=1e-12), name
            for a, b in zip(jet.affine, cartan.affine):
                for row_a, row_b in zip(a, b):
                    assert _evaluate(row_a, point) == pytest.approx(_evaluate(row_b, point), abs=1e-12), name


def test_appendix_cross_check_on_corpus(corpus):
    for name, document in corpus:
        conn = connection_for(document)
        report = appendix_cross_check(document.system, conn, points_for(conn, 20, seed=12), 1e-12)
        assert report.passed, (name, report.residuals)
        assert report.residuals["chern_vertical_torsion"] <= 1e-12


def test_appendix_reports_supplied_torsion(corpus_by_name):
    document = corpus_by_name["oscillator_normalized"]
    conn = build_connection(document.system, document.normalization)
    report = appendix_cross_check(document.system, conn, points_for(conn, 10, seed=3), 1e-12)
    # D = y1 shifts N away from the Chern value, so the supplied torsion is D itself
    assert report.info["supplied_vertical_torsion"] > 0.0
    assert report.passed
