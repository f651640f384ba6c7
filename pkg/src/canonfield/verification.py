"""The acceptance criteria as executable checks. Each returns a :class:`Criterion`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .applications import (curvature_identity_check, laplacian_gradient_check, ricci_identity_checks,
                           self_similar_check, self_similar_ricci_identity, yamabe_check)
from .canonical import conformal_umbilic_equivalence, lie_derivative_metric
from .catalog import ENTRIES, catalog
from .dsl import ImmersionSpec
from .geometry import curvature, riemann_residuals, traceless_norm
from .jets import central_difference, jet_field
from .report import RunConfig, analyze, clean, to_json
from .sampling import Sample, sample_grid

EXTRA_PARAMS = {"plane_offset": {"c": 1.0}}
CONFORMAL = ("sphere", "sphere_offcenter", "subspace", "plane_offset", "clifford_torus",
             "flat_torus", "helix", "ellipse")
NEGATIVE = ("cylinder", "torus")
RADII = (0.5, 1.0, 2.0)


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title}"


def catalog_specs() -> dict[str, ImmersionSpec]:
    return {name: catalog(name, EXTRA_PARAMS.get(name)) for name in ENTRIES}


def _samples(cache: dict | None = None) -> dict[str, Sample]:
    if cache is not None and "samples" in cache:
        return cache["samples"]
    samples = {name: sample_grid(spec) for name, spec in catalog_specs().items()}
    if cache is not None:
        cache["samples"] = samples
    return samples


def criterion_1(cache=None) -> Criterion:
    details, ok = {}, True
    for name, s in _samples(cache).items():
        eq = conformal_umbilic_equivalence(s, 1e-8)
        row = {"biconditional": eq.holds,
               "conformality_max": eq.conformal.max_residual,
               "umbilicity_max": eq.umbilic.max_residual,
               "conformality_min": float(np.min(eq.conformal.residual)),
               "umbilicity_min": float(np.min(eq.umbilic.residual)),
               "max_link": eq.max_link}
        good = eq.holds
        if name in CONFORMAL:
            good &= row["conformality_max"] <= 1e-8 and row["umbilicity_max"] <= 1e-8
            good &= row["max_link"] <= 1e-10
        elif name in NEGATIVE:
            good &= row["conformality_min"] >= 1e-2 and row["umbilicity_min"] >= 1e-2
        row["ok"] = bool(good)
        ok &= good
        details[name] = row
    return Criterion(1, "conformal x^T <=> umbilical w.r.t. x^N on the catalog", bool(ok), details)


def criterion_2(cache=None) -> Criterion:
    details = {}
    for name, s in _samples(cache).items():
        a, b = lie_derivative_metric(s.jet, s.frame, s.split)
        details[name] = float(np.max(np.max(np.abs(a - b), axis=(-2, -1)) / s.scale))
    return Criterion(2, "two-route Lie derivative agreement <= 1e-10 scale",
                     all(v <= 1e-10 for v in details.values()), details)


def criterion_3(cache=None) -> Criterion:
    details, ok = {}, True
    for name in CONFORMAL:
        s = _samples(cache)[name]
        eq = conformal_umbilic_equivalence(s, 1e-8)
        one = float(np.nanmax(eq.coefficient_one / s.scale))
        two = float(np.nanmin(eq.coefficient_two / s.scale))
        details[name] = {"eta_plus_one_max": one, "eta_plus_two_min": two}
        ok &= one <= 1e-8 and two >= 1e-2
    report = analyze(catalog("sphere_offcenter"), RunConfig("catalog:sphere_offcenter",
                                                            suites=("conformal",)))
    has_finding = any(f["id"] == "trace-coefficient" for f in report.findings)
    details["report_finding"] = has_finding
    return Criterion(3, "L g = 2(eta+1) g, not 2(eta+2) g, on conformal entries",
                     bool(ok and has_finding), details)


def criterion_4(cache=None) -> Criterion:
    details, ok = {}, True
    for r in RADII:
        rep = yamabe_check(sample_grid(catalog("sphere", {"r": r})), 1e-8)
        err = abs(rep.lambda_fit - 2.0 / r ** 2)
        res = float(np.max(rep.residual_per_point))
        details[f"sphere r={r}"] = {"lambda": rep.lambda_fit, "lambda_error": err, "residual": res}
        ok &= err <= 1e-6 and res <= 1e-8
    cyl = yamabe_check(_samples(cache)["cylinder"], 1e-8)
    bound = float(np.max(cyl.lower_bound))
    details["cylinder"] = {"lambda_fit": cyl.lambda_fit, "lambda_free_bound": bound,
                           "residual_at_fit": float(np.max(cyl.residual_per_point))}
    ok &= bound >= 1e-2 and details["cylinder"]["residual_at_fit"] >= 1e-2
    return Criterion(4, "Yamabe: sphere lambda = 2/r^2, cylinder admits no lambda", bool(ok), details)


def criterion_5(cache=None) -> Criterion:
    details, ok = {}, True
    for r in RADII:
        rep = self_similar_check(sample_grid(catalog("sphere", {"r": r})), 1e-10)
        f_err = float(np.max(np.abs(rep.f_per_point + r ** 2)))
        shrink = float(np.max(rep.shrinker_residual))
        shrink_min = float(np.min(rep.shrinker_residual))
        details[f"sphere r={r}"] = {"f_error": f_err, "shrinker_max": shrink, "shrinker_min": shrink_min}
        ok &= f_err <= 1e-10
        ok &= shrink <= 1e-10 if r == 1.0 else shrink_min > 1e-10
    for name, s in _samples(cache).items():
        if s.m != s.n + 1:
            continue
        rep = self_similar_check(s, 1e-8)
        where = ~rep.H_vanishing_set
        good = bool(np.all(rep.self_similar_points[where]))
        details[f"hypersurface {name}"] = {"points_with_H": int(where.sum()), "all_self_similar": good}
        ok &= good
    return Criterion(5, "self-similar factor and shrinker on spheres; hypersurfaces automatic",
                     bool(ok), details)


def _plane_hessian(sample: Sample) -> float:
    fj = sample.fields
    hess = fj.hessian(fj.half_norm_xT).value
    return float(np.max(traceless_norm(sample.frame, hess, np.ones(sample.size))))


def criterion_6(cache=None) -> Criterion:
    details, ok = {}, True
    limits = {"curvature_identity": 1e-8, "ricci_potential": 1e-8,
              "laplacian_gradient": 1e-7, "gradient_alignment": 1e-8}
    for name in CONFORMAL:
        s = _samples(cache)[name]
        checks = [curvature_identity_check(s, 1e-8, seed=0)]
        checks += ricci_identity_checks(s, 1e-8)
        checks += laplacian_gradient_check(s, 1e-8).checks
        row = {}
        for c in checks:
            if c.name in limits:
                value = c.max if c.max is not None else 0.0
                row[c.name] = value
                ok &= c.status != "skipped" and value <= limits[c.name]
        details[name] = row
    hf = _plane_hessian(_samples(cache)["subspace"])
    details["plane_hessian_F"] = hf
    ok &= hf <= 1e-10
    return Criterion(6, "identities for a conformal x^T", bool(ok), details)


def criterion_7(cache=None) -> Criterion:
    details, ok = {}, True
    for name, s in _samples(cache).items():
        rep = self_similar_check(s, 1e-8)
        if not rep.is_generalized_self_similar:
            continue
        check = self_similar_ricci_identity(s, 1e-8, rep)["self_similar_ricci_identity"]
        value = check.max if check.max is not None else 0.0
        details[name] = value
        ok &= value <= 1e-8
    return Criterion(7, "self-similar Ricci identity on generalized self-similar entries",
                     bool(ok and details), details)


def criterion_8(cache=None) -> Criterion:
    samples = _samples(cache)
    details, ok = {}, True
    expected = {"sphere": 2.0, "cylinder": 0.0, "flat_torus": 0.0, "clifford_torus": 0.0}
    for name, value in expected.items():
        err = float(np.max(np.abs(curvature(samples[name].frame).scalar - value)))
        details[f"scalar {name}"] = err
        ok &= err <= 1e-10
    for name, s in samples.items():
        res = riemann_residuals(curvature(s.frame))
        worst = max(float(np.max(v / s.scale)) for v in res.values())
        details[f"symmetries {name}"] = worst
        ok &= worst <= 1e-10
    return Criterion(8, "Gauss-equation curvature values and symmetries", bool(ok), details)


def jet_fd_errors(spec: ImmersionSpec, points: np.ndarray, step: float = 1e-5) -> dict[str, float]:
    """Relative error of each jet order against central differences of the order below."""
    X = jet_field(spec, points, 3)
    out = {}
    for k in (1, 2, 3):
        def lower(p, k=k):
            return jet_field(spec, p, k - 1).d[k - 1]
        fd = central_difference(lower, points, step)
        exact = X.d[k]
        lead = exact.shape[0]
        diff = np.linalg.norm((fd - exact).reshape(lead, -1), axis=-1)
        size = np.maximum(np.linalg.norm(exact.reshape(lead, -1), axis=-1), 1.0)
        out[f"d{k}"] = float(np.max(diff / size))
    return out


def criterion_9(cache=None, seed: int = 0) -> Criterion:
    rng = np.random.default_rng(seed)
    details, ok = {}, True
    for name, spec in catalog_specs().items():
        lo = np.array([a for a, _ in spec.domain])
        hi = np.array([b for _, b in spec.domain])
        points = lo + (hi - lo) * rng.random((100, spec.n))
        errs = jet_fd_errors(spec, points)
        details[name] = errs
        ok &= max(errs.values()) <= 1e-6
    return Criterion(9, "exact jets match central differences (step 1e-5) to 1e-6", bool(ok), details)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9)


def run_criteria(seed: int = 0) -> list[Criterion]:
    cache: dict = {}
    out = [fn(cache) for fn in CRITERIA[:-1]]
    out.append(criterion_9(cache, seed))
    return out


def _document(results: list[Criterion], seed: int) -> dict:
    return {"seed": seed,
            "criteria": [{"number": c.number, "title": c.title, "passed": c.passed,
                          "details": c.details} for c in results]}


def verify_all(seed: int = 0) -> tuple[list[Criterion], str]:
    """Run every criterion twice; the tenth compares the two serialised reports byte for byte."""
    first = to_json(clean(_document(run_criteria(seed), seed)))
    results = run_criteria(seed)
    second = to_json(clean(_document(results, seed)))
    results.append(Criterion(10, "two runs with the same seed give byte-identical reports",
                             first == second, {"bytes": len(second)}))
    return results, to_json(clean(_document(results, seed)))
