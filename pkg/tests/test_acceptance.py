"""Acceptance criteria, one test each. Every test prints a ``[PASS]``/``[FAIL]`` line.

The lines are repeated in the terminal summary; ``-s`` also shows the measured values.
"""

import json

import pytest

from canonfield import verification as V
from canonfield.cli import main

from conftest import CRITERION_LINES


@pytest.fixture(scope="module")
def cache():
    return {}


def _report(criterion):
    CRITERION_LINES.append(criterion.line())
    print()
    print(criterion.line())
    for key, value in criterion.details.items():
        print(f"    {key}: {value}")
    assert criterion.passed, criterion.details


def test_criterion_1_conformal_iff_umbilical(cache):
    _report(V.criterion_1(cache))


def test_criterion_2_two_route_lie_derivative(cache):
    _report(V.criterion_2(cache))


def test_criterion_3_trace_coefficient(cache):
    _report(V.criterion_3(cache))


def test_criterion_4_yamabe(cache):
    _report(V.criterion_4(cache))


def test_criterion_5_self_similar(cache):
    _report(V.criterion_5(cache))


def test_criterion_6_conformal_identities(cache):
    _report(V.criterion_6(cache))


def test_criterion_7_self_similar_ricci_identity(cache):
    _report(V.criterion_7(cache))


def test_criterion_8_curvature(cache):
    _report(V.criterion_8(cache))


def test_criterion_9_jets_against_differences(cache):
    _report(V.criterion_9(cache, seed=0))


def test_criterion_10_verify_all_is_byte_identical(tmp_path, capsys):
    codes = [main(["verify-all", "--seed", "0", "--out", str(tmp_path / d)]) for d in ("a", "b")]
    first = (tmp_path / "a" / "verify.json").read_bytes()
    second = (tmp_path / "b" / "verify.json").read_bytes()
    capsys.readouterr()
    document = json.loads(second)
    passed = codes == [0, 0] and first == second and all(c["passed"] for c in document["criteria"])
    _report(V.Criterion(10, "verify-all twice with the same seed gives byte-identical reports",
                        passed, {"exit_codes": codes, "bytes": len(second),
                                 "identical": first == second}))
