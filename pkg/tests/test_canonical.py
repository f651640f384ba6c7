import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canonfield.canonical import (CLASSES, classify_field, conformal_umbilic_equivalence, conformality_test,
                                  lie_derivative_metric, parallel_normal_direction_test, umbilicity_test)
from canonfield.catalog import catalog
from canonfield.sampling import sample_grid, sample_points
from canonfield.verification import CONFORMAL, NEGATIVE, catalog_specs


def _verdicts(sample, tol=1e-8):
    _, lie = lie_derivative_metric(sample.jet, sample.frame, sample.split)
    return conformality_test(lie, sample.frame, tol, sample.split), umbilicity_test(sample.frame, sample.split)


@pytest.fixture(scope="module")
def samples():
    return {name: sample_grid(spec) for name, spec in catalog_specs().items()}


def test_cylinder_residuals():
    s = sample_points(catalog("cylinder"), [[0.3, 0.4], [1.0, -0.7]])
    conf, umb = _verdicts(s)
    np.testing.assert_allclose(conf.phi, 0.5, atol=1e-14)
    np.testing.assert_allclose(conf.residual, np.sqrt(2) / 2, atol=1e-14)
    np.testing.assert_allclose(umb.residual, np.sqrt(2) / 2, atol=1e-14)
    assert not conf.is_conformal and not umb.is_umbilical


def test_offcenter_sphere_phi():
    s = sample_points(catalog("sphere_offcenter"), [[0.0, 0.0], [np.pi - 1e-9, 0.0]])
    conf, umb = _verdicts(s)
    assert conf.is_conformal and umb.is_umbilical
    np.testing.assert_allclose(conf.phi, [-0.5, 0.5], atol=1e-8)
    c = np.array([0.5, 0.0, 0.0])
    x = s.split.x
    np.testing.assert_allclose(conf.phi, 1.0 - np.einsum("pa,pa->p", x, x - c), atol=1e-12)


def test_sphere_and_offset_plane_eta():
    sphere = conformal_umbilic_equivalence(sample_grid(catalog("sphere")))
    np.testing.assert_allclose(sphere.umbilic.mu, -1.0, atol=1e-12)
    np.testing.assert_allclose(sphere.conformal.phi, 0.0, atol=1e-12)
    assert sphere.conformal.trivially_conformal
    plane = conformal_umbilic_equivalence(sample_grid(catalog("plane_offset", {"c": 2.0})))
    np.testing.assert_allclose(plane.umbilic.mu, 0.0, atol=1e-12)
    np.testing.assert_allclose(plane.conformal.phi, 1.0, atol=1e-12)


def test_umbilicity_with_respect_to_H():
    s = sample_grid(catalog("clifford_torus"))
    v = umbilicity_test(s.frame, s.split, "H")
    assert v.is_umbilical and v.reference_normal == "H"
    with pytest.raises(ValueError):
        umbilicity_test(s.frame, s.split, "nope")


def test_subspace_has_vanishing_normal_part():
    v = umbilicity_test(*(lambda s: (s.frame, s.split))(sample_grid(catalog("subspace"))))
    assert np.all(v.vanishing) and v.is_umbilical


def test_biconditional_on_catalog(samples):
    for name, s in samples.items():
        eq = conformal_umbilic_equivalence(s)
        assert eq.holds, name
        if name in CONFORMAL:
            assert eq.conformal.is_conformal and eq.umbilic.is_umbilical, name
            assert eq.max_link <= 1e-10, name
        if name in NEGATIVE:
            assert np.min(eq.conformal.residual) >= 1e-2, name
            assert np.min(eq.umbilic.residual) >= 1e-2, name


def test_trace_coefficient_is_eta_plus_one(samples):
    for name in CONFORMAL:
        s = samples[name]
        eq = conformal_umbilic_equivalence(s)
        assert np.nanmax(eq.coefficient_one / s.scale) <= 1e-8, name
        assert np.nanmin(eq.coefficient_two / s.scale) >= 1e-2, name


def test_two_routes_agree(samples):
    for name, s in samples.items():
        a, b = lie_derivative_metric(s.jet, s.frame, s.split)
        assert np.max(np.abs(a - b).max(axis=(-2, -1)) / s.scale) <= 1e-10, name


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-3.0, 3.0), st.floats(-1.4, 1.4))
def test_scaling_covariance(c, u1, u2):
    """Under x -> c x, eta is invariant, L g scales by c^2 and the verdict is unchanged."""
    base = sample_points(catalog("sphere_offcenter"), [[u1, u2]])
    big = sample_points(catalog("sphere", {"r": c, "center": (0.5 * c, 0.0, 0.0)}), [[u1, u2]])
    e0, e1 = conformal_umbilic_equivalence(base), conformal_umbilic_equivalence(big)
    np.testing.assert_allclose(e1.umbilic.mu, e0.umbilic.mu, atol=1e-9)
    w0 = lie_derivative_metric(base.jet, base.frame, base.split)[1]
    w1 = lie_derivative_metric(big.jet, big.frame, big.split)[1]
    np.testing.assert_allclose(w1, c ** 2 * w0, atol=1e-9 * c ** 2)
    assert e0.conformal.is_conformal == e1.conformal.is_conformal


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["cylinder", "torus", "sphere", "helix"]), st.integers(0, 2 ** 31))
def test_biconditional_pointwise(name, seed):
    spec = catalog(name)
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    s = sample_points(spec, lo + (hi - lo) * np.random.default_rng(seed).random((20, spec.n)))
    assert conformal_umbilic_equivalence(s).holds


def test_classes(samples):
    expected = {"sphere": "zero", "clifford_torus": "zero", "subspace": "concurrent",
                "plane_offset": "concurrent", "sphere_offcenter": "concircular",
                "helix": "concircular", "ellipse": "concircular", "cylinder": "torse-forming",
                "graph4": "none"}
    for name, cls in expected.items():
        result = classify_field(samples[name])
        assert result.cls == cls, (name, result.residuals)
        assert result.cls in CLASSES
    assert classify_field(samples["sphere"]).degenerate


def test_concurrent_fit_is_torse_forming_with_zero_alpha(samples):
    result = classify_field(samples["plane_offset"])
    assert result.residuals["torse-forming"] <= 1e-10
    np.testing.assert_allclose(result.varphi, 1.0, atol=1e-10)
    np.testing.assert_allclose(result.alpha, 0.0, atol=1e-10)


def test_parallel_normal_direction(samples):
    for name in ("sphere", "cylinder", "torus", "clifford_torus", "plane_offset"):
        assert parallel_normal_direction_test(samples[name]).is_parallel, name
    assert parallel_normal_direction_test(samples["subspace"]).is_parallel is None
    helix = parallel_normal_direction_test(samples["helix"])
    assert helix.is_parallel is False and helix.max_residual > 1e-2
