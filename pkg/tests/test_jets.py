import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canonfield.catalog import ENTRIES, catalog
from canonfield.dsl import parse
from canonfield.errors import DomainError, EvalError, OrderTooLow
from canonfield.jets import Jet, eval_jet, fd_jet, jet_field
from canonfield.verification import jet_fd_errors

SPHERE = "dim 2 -> 3; x1 = cos(u1)*cos(u2); x2 = sin(u1)*cos(u2); x3 = sin(u2)"


def test_unit_sphere_at_origin():
    j = eval_jet(parse(SPHERE), [0.0, 0.0])
    np.testing.assert_allclose(j.f, [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.d1[:, 0], [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(j.d1[:, 1], [0, 0, 1], atol=1e-15)


def test_plane_has_vanishing_higher_partials():
    spec = parse("dim 2 -> 3; x1 = u1; x2 = u2; x3 = 0")
    j = eval_jet(spec, [[0.3, -0.2], [0.9, 0.1]])
    assert np.all(j.d2 == 0) and np.all(j.d3 == 0)


def test_helix_at_zero():
    j = eval_jet(parse("dim 1 -> 3; x1 = cos(u1); x2 = sin(u1); x3 = u1"), [0.0])
    np.testing.assert_allclose(j.f, [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.d1[:, 0], [0, 1, 1], atol=1e-15)
    np.testing.assert_allclose(j.d2[:, 0, 0], [-1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.d3[:, 0, 0, 0], [0, -1, 0], atol=1e-15)


def test_polynomial_jets_are_exact():
    # x1 = u1^2 u2 + 3 u2^3 has constant third partials
    spec = parse("dim 2 -> 3; x1 = u1^2*u2 + 3*u2^3; x2 = u1; x3 = u2")
    j = eval_jet(spec, [0.4, -0.7])
    assert j.d1[0, 0] == pytest.approx(2 * 0.4 * -0.7)
    assert j.d2[0, 0, 1] == pytest.approx(2 * 0.4)
    assert j.d2[0, 1, 1] == pytest.approx(18 * -0.7)
    assert j.d3[0, 0, 0, 1] == pytest.approx(2.0)
    assert j.d3[0, 1, 1, 1] == pytest.approx(18.0)
    assert j.d3[0, 0, 0, 0] == 0.0


@pytest.mark.parametrize("name", list(ENTRIES))
def test_symmetry_is_bit_exact(name):
    spec = catalog(name, {"c": 1.0} if name == "plane_offset" else None)
    rng = np.random.default_rng(1)
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    j = eval_jet(spec, lo + (hi - lo) * rng.random((10, spec.n)))
    n = spec.n
    for perm in itertools.permutations(range(2)):
        assert np.array_equal(j.d2, np.transpose(j.d2, (0, 1) + tuple(2 + p for p in perm)))
    for perm in itertools.permutations(range(3)):
        assert np.array_equal(j.d3, np.transpose(j.d3, (0, 1) + tuple(2 + p for p in perm)))
    assert j.d3.shape == (10, spec.m, n, n, n)


@pytest.mark.parametrize("name", list(ENTRIES))
def test_jets_match_central_differences(name):
    spec = catalog(name, {"c": 1.0} if name == "plane_offset" else None)
    rng = np.random.default_rng(7)
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    errors = jet_fd_errors(spec, lo + (hi - lo) * rng.random((100, spec.n)))
    assert max(errors.values()) <= 1e-6, errors


def test_fourth_order_matches_differences_of_third():
    spec = catalog("graph4")
    pts = np.random.default_rng(2).uniform(-0.4, 0.4, (5, 4))
    X = jet_field(spec, pts, 4)
    h = 1e-5
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fd = (jet_field(spec, pts + e, 3).d[3] - jet_field(spec, pts - e, 3).d[3]) / (2 * h)
        np.testing.assert_allclose(X.d[4][..., i], fd, atol=1e-6)


def test_unrequested_orders_are_nan():
    j = eval_jet(parse(SPHERE), [0.1, 0.2], order=1)
    assert not j.has(2) and np.all(np.isnan(j.d2)) and np.all(np.isnan(j.d3))
    assert not j.d1.flags.writeable


def test_domain_and_order_errors():
    spec = parse(SPHERE)
    with pytest.raises(DomainError):
        eval_jet(spec, [2.0, 0.0])
    with pytest.raises(OrderTooLow):
        eval_jet(spec, [0.0, 0.0], order=4)


@pytest.mark.parametrize("source, point", [
    ("dim 1 -> 2; x1 = u1; x2 = 1/u1", [0.0]),
    ("dim 1 -> 2; x1 = u1; x2 = sqrt(u1 - 1)", [0.5]),
    ("dim 1 -> 2; x1 = u1; x2 = (u1 - 1)^0.5", [0.5]),
    ("dim 1 -> 2; x1 = u1; x2 = sqrt(u1)", [0.0]),
])
def test_eval_errors(source, point):
    with pytest.raises(EvalError):
        eval_jet(parse(source), point)


def test_negative_base_integer_power_is_fine():
    j = eval_jet(parse("dim 1 -> 2; x1 = u1; x2 = u1^3"), [-0.5])
    assert j.f[1] == pytest.approx(-0.125)
    assert j.d1[1, 0] == pytest.approx(0.75)


def test_fd_jet_close_to_exact():
    spec = catalog("torus")
    u = np.array([[0.3, 1.1], [-2.0, 0.4]])
    exact, fd = eval_jet(spec, u, 2), fd_jet(spec, u)
    np.testing.assert_allclose(fd.d1, exact.d1, atol=1e-7)
    np.testing.assert_allclose(fd.d2, exact.d2, atol=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3))
def test_product_and_quotient_rules(a, b, c):
    """Jet arithmetic agrees with the closed-form derivatives of a rational function."""
    pts = np.array([[a, b]])
    u, v = Jet.variables(pts, 2)
    q = (u * v) / (v * v + c)
    den = b * b + c
    assert q.value[0] == pytest.approx(a * b / den)
    assert q.d[1][0, 0] == pytest.approx(b / den)
    assert q.d[1][0, 1] == pytest.approx(a * (c - b * b) / den ** 2)
    assert q.d[2][0, 0, 0] == 0.0
