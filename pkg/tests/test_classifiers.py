import numpy as np
import pytest

from canonfield.catalog import ENTRIES, catalog
from canonfield.classifiers import conformal_flatness_test, containment_test, corollary_dichotomy
from canonfield.errors import DimensionTooLow, TooFewPoints
from canonfield.sampling import sample_grid, sample_points


def test_sphere_lies_on_origin_hypersphere():
    v = containment_test(sample_grid(catalog("sphere", {"r": 2.0})))
    assert v.kind == "hypersphere_origin"
    assert v.sphere_radius == pytest.approx(2.0, abs=1e-12)
    assert v.plane_normal is None


def test_offset_plane_lies_in_hyperplane():
    v = containment_test(sample_grid(catalog("plane_offset", {"c": 1.5})))
    assert v.kind == "hyperplane"
    np.testing.assert_allclose(v.plane_normal, [0, 0, 1], atol=1e-12)
    assert v.plane_offset == pytest.approx(1.5, abs=1e-12)
    assert not v.origin_in_plane
    assert containment_test(sample_grid(catalog("subspace"))).origin_in_plane


def test_clifford_torus_lies_on_sphere_of_radius_sqrt2():
    v = containment_test(sample_grid(catalog("clifford_torus")))
    assert v.kind == "hypersphere_origin"
    assert v.sphere_radius == pytest.approx(np.sqrt(2), abs=1e-12)


def test_ellipse_is_planar_but_not_a_hyperplane_of_higher_codimension():
    # the ellipse spans its ambient plane, so it fits neither alternative
    assert containment_test(sample_grid(catalog("ellipse"))).kind == "neither"
    assert containment_test(sample_grid(catalog("cylinder"))).kind == "neither"


@pytest.mark.parametrize("name", list(ENTRIES))
def test_refinement_invariance(name):
    spec = catalog(name, {"c": 1.0} if name == "plane_offset" else None)
    coarse = containment_test(sample_grid(spec, 8, order=2))
    fine = containment_test(sample_grid(spec, 16, order=2))
    assert coarse.kind == fine.kind


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        containment_test(sample_points(catalog("sphere"), [[0.1, 0.2], [0.3, 0.4], [0.5, 0.1]]))


def test_flatness_dimension_guard():
    with pytest.raises(DimensionTooLow):
        conformal_flatness_test(sample_grid(catalog("sphere")))


def test_round_four_sphere_and_flat_torus_are_conformally_flat():
    assert conformal_flatness_test(sample_grid(catalog("sphere", {"n": 4}), 5)).is_conformally_flat
    assert conformal_flatness_test(sample_grid(catalog("flat_torus"))).is_conformally_flat


def test_graph_is_not_conformally_flat():
    res = conformal_flatness_test(sample_grid(catalog("graph4")))
    assert not res.is_conformally_flat and res.max_weyl > 1e-2


def test_dichotomy():
    sphere = corollary_dichotomy(sample_grid(catalog("sphere")))
    assert sphere["hypotheses_hold"] and sphere["containment"] == "hypersphere_origin"
    plane = corollary_dichotomy(sample_grid(catalog("plane_offset", {"c": 1.0})))
    assert plane["hypotheses_hold"] and plane["containment"] == "hyperplane"
    cyl = corollary_dichotomy(sample_grid(catalog("cylinder")))
    assert not cyl["hypotheses_hold"] and "containment" not in cyl
    sub = corollary_dichotomy(sample_grid(catalog("subspace")))
    assert sub["normal_part_vanishes_somewhere"] and not sub["hypotheses_hold"]
    # conformal with a parallel normal direction, yet neither alternative
    off = corollary_dichotomy(sample_grid(catalog("sphere_offcenter")))
    assert off["hypotheses_hold"] and off["containment"] == "neither" and not off["consistent"]
