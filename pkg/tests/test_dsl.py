import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canonfield.catalog import ENTRIES, catalog, catalog_source
from canonfield.dsl import ExprNode, ImmersionSpec, evaluate_constant, expr_to_source, parse, to_source
from canonfield.errors import (ConfigError, DimensionMismatch, DomainError, MissingParameter,
                               SpecSyntaxError, UnknownCatalogEntry, UnknownIdentifier)

SPHERE = "dim 2 -> 3; x1 = cos(u1)*cos(u2); x2 = sin(u1)*cos(u2); x3 = sin(u2)"
HELIX = "dim 1 -> 3; x1 = cos(u1); x2 = sin(u1); x3 = u1"


def test_parse_unit_sphere():
    spec = parse(SPHERE)
    assert (spec.n, spec.m) == (2, 3)
    assert spec.components[2] == ExprNode("sin", (ExprNode("var", payload=1),))


def test_parse_helix():
    spec = parse(HELIX)
    assert (spec.n, spec.m) == (1, 3)
    assert spec.components[2] == ExprNode("var", payload=0)


def test_unknown_variable():
    with pytest.raises(UnknownIdentifier) as err:
        parse("dim 2 -> 3; x1 = u1*u3")
    assert err.value.name == "u3"


def test_unknown_name():
    with pytest.raises(UnknownIdentifier):
        parse("dim 1 -> 2; x1 = u1; x2 = foo")


def test_syntax_error_location_and_expected():
    with pytest.raises(SpecSyntaxError) as err:
        parse("dim 2 -> 3;\nx1 = u1;\nx2 = (u2; x3 = 1")
    assert (err.value.line, err.value.col) == (3, 9)
    assert "')'" in err.value.expected


@pytest.mark.parametrize("source", [
    "dim 2 -> 3; x1 = u1; x2 = u2",          # missing x3
    "dim 1 -> 2; x1 = u1; x3 = 1",           # out of range component
    "dim 3 -> 2; x1 = u1; x2 = u2",          # n >= m
    "dim 1 -> 9; x1 = u1",                   # ambient too large
])
def test_dimension_mismatch(source):
    with pytest.raises(DimensionMismatch):
        parse(source)


def test_duplicate_component_is_syntax_error():
    with pytest.raises(SpecSyntaxError):
        parse("dim 1 -> 2; x1 = u1; x1 = 2")


def test_precedence_and_associativity():
    spec = parse("dim 1 -> 2; x1 = 2^3^2; x2 = -2^2 + 8/4/2")
    assert evaluate_constant(spec.components[0]) == 512.0
    assert evaluate_constant(spec.components[1]) == -4.0 + 1.0


def test_params_substitute_and_override():
    src = "dim 1 -> 2; param a = 2; x1 = a*u1; x2 = pi"
    assert parse(src).params == {"a": 2.0}
    assert parse(src, params={"a": 3.0}).params["a"] == 3.0
    assert evaluate_constant(parse(src).components[1]) == math.pi


def test_domain_and_grid_statements():
    spec = parse("dim 2 -> 3; domain u1 = [0, pi]; grid 4, 6; x1 = u1; x2 = u2; x3 = 0")
    assert spec.domain == ((0.0, math.pi), (-1.0, 1.0))
    assert spec.grid == (4, 6)


def test_bad_domain_and_grid():
    with pytest.raises(DomainError):
        parse("dim 1 -> 2; domain u1 = [1, 0]; x1 = u1; x2 = 0")
    with pytest.raises(DomainError):
        parse("dim 1 -> 2; grid 1; x1 = u1; x2 = 0")


def test_comments_and_whitespace():
    spec = parse("# a line\ndim 1->2 ;\n  x1=u1 # trailing\n;x2 = 1e-3*u1")
    assert spec.m == 2


def test_arity_is_validated():
    with pytest.raises(ValueError):
        ExprNode("add", (ExprNode("const", payload=1.0),))


@pytest.mark.parametrize("name", list(ENTRIES))
def test_catalog_round_trip(name):
    spec = catalog(name, {"c": 1.0} if name == "plane_offset" else None)
    again = parse(to_source(spec))
    assert again == spec


def test_catalog_matches_parse():
    spec = catalog("plane_offset", {"c": 1.0})
    assert spec == parse(catalog_source("plane_offset", {"c": 1.0}))
    centred = catalog("sphere", {"n": 2, "r": 1, "center": (0, 0, 0)})
    assert centred == catalog("sphere")
    off = catalog("sphere", {"center": (0.5, 0, 0)})
    assert off == catalog("sphere_offcenter")


def test_catalog_errors():
    with pytest.raises(UnknownCatalogEntry):
        catalog("klein_bottle")
    with pytest.raises(MissingParameter):
        catalog("plane_offset")
    with pytest.raises(ConfigError):
        catalog("cylinder", {"height": 2})


def test_with_grid_broadcasts():
    spec = parse(SPHERE).with_grid((5,))
    assert spec.grid == (5, 5)
    assert isinstance(spec, ImmersionSpec)


# -- round trip on generated trees ---------------------------------------------

def _trees(n):
    leaves = st.one_of(
        st.floats(min_value=0, max_value=1e3, allow_nan=False).map(lambda v: ExprNode("const", payload=v)),
        st.integers(0, n - 1).map(lambda i: ExprNode("var", payload=i)),
    )

    def extend(children):
        binary = st.tuples(st.sampled_from(["add", "sub", "mul", "div", "pow"]), children, children).map(
            lambda t: ExprNode(t[0], (t[1], t[2])))
        unary = st.tuples(st.sampled_from(["neg", "sin", "cos", "exp", "sqrt"]), children).map(
            lambda t: ExprNode(t[0], (t[1],)))
        return binary | unary

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_trees(2), _trees(2), _trees(2))
def test_print_parse_round_trip(a, b, c):
    spec = ImmersionSpec(2, 3, (a, b, c))
    assert parse(to_source(spec)) == spec


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_negative_literals_round_trip(v):
    node = ExprNode("mul", (ExprNode("const", payload=abs(v)), ExprNode("var", payload=0)))
    if v < 0:
        node = ExprNode("neg", (node,))
    spec = ImmersionSpec(1, 2, (node, ExprNode("const", payload=0.0)))
    assert parse(to_source(spec)) == spec
    assert np.isfinite(evaluate_constant(ExprNode("const", payload=v)))
    assert expr_to_source(node)
