"""Suite runner and deterministic JSON/CSV serialisation of analysis reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .applications import (curvature_identity_check, hessian_obata_check, laplacian_gradient_check,
                           ricci_identity_checks, self_similar_check, self_similar_ricci_identity,
                           yamabe_check)
from .canonical import (DEFAULT_TOL, FD_TOL, classify_field, conformal_umbilic_equivalence,
                        conformality_test, lie_derivative_metric, parallel_normal_direction_test)
from .checks import Check, info, residual_check
from .classifiers import conformal_flatness_test, containment_test, corollary_dichotomy
from .dsl import ImmersionSpec, to_source
from .errors import ConfigError, TooFewPoints
from .fields import jet_from_point
from .geometry import (curvature, gauss_formula_residual, riemann_residuals, weingarten_residual,
                       weyl_trace_residual)
from .jets import fd_jet
from .sampling import Sample, sample_grid

SCHEMA_VERSION = "1.0"
SUITES = ("geometry", "conformal", "yamabe", "self_similar", "identities", "classify")
FORMATS = ("json", "csv", "both")

A_LIE_ROUTES = "2 g + 2 <h, x^N> = g(nabla x^T, .) + g(., nabla x^T)"
A_GAUSS = "d_i d_j x = gamma^k_ij d_k x + h_ij"
A_WEINGARTEN = "tangential part of D xi = -A_xi"
A_RIEMANN = "R_ijkl = <h_il, h_jk> - <h_ik, h_jl>"
A_WEYL = "Weyl tensor is trace-free"
A_CONFORMAL = "L_{x^T} g = 2 phi g"
A_UMBILIC = "<h(X,Y), x^N> = eta g(X,Y)"
A_EQUIVALENCE = "x^T conformal <=> umbilical with respect to x^N"
A_LINK = "phi = 1 + eta"
A_COEFF_ONE = "L_{x^T} g = 2 (eta + 1) g"
A_COEFF_TWO = "L_{x^T} g = 2 (eta + 2) g (rejected alternative)"
A_PARALLEL = "D (x^N / |x^N|) = 0"
A_TORSE = "nabla_X x^T = phi X + alpha(X) x^T"
A_CONTAINMENT = "lies in a hypersphere centred at the origin or in a hyperplane"
A_FLAT = "conformally flat: Weyl = 0"


@dataclass
class RunConfig:
    input: str
    params: dict = field(default_factory=dict)
    suites: tuple[str, ...] = SUITES
    grid: tuple[int, ...] | None = None
    tol: float = DEFAULT_TOL
    fd_tol: float = FD_TOL
    fd_check: bool = False
    seed: int = 0
    out: str | None = None
    format: str = "json"

    def validate(self) -> "RunConfig":
        if not self.suites:
            raise ConfigError("select at least one suite")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {', '.join(bad)}; choose from {', '.join(SUITES)}")
        if not (self.tol > 0 and self.fd_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.grid is not None and any(int(g) < 1 for g in self.grid):
            raise ConfigError("grid sizes must be positive")
        # keep suite order canonical so reports do not depend on flag order
        self.suites = tuple(s for s in SUITES if s in self.suites)
        return self


@dataclass
class SuiteResult:
    verdicts: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)


@dataclass
class AnalysisReport:
    spec: dict
    provenance: dict
    points: list
    excluded: list
    suites: dict[str, SuiteResult]
    findings: list[dict]

    @property
    def failures(self) -> list[str]:
        return [f"{name}/{c.name}" for name, suite in self.suites.items()
                for c in suite.checks if c.failed]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec,
            "provenance": self.provenance,
            "points": self.points,
            "excluded": self.excluded,
            "suites": {name: {"verdicts": s.verdicts,
                              "checks": [_check_dict(c) for c in s.checks]}
                       for name, s in self.suites.items()},
            "findings": self.findings,
            "failures": self.failures,
            "exit_code": self.exit_code,
        }


# -- serialisation -------------------------------------------------------------------

def clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _check_dict(c: Check) -> dict:
    return {"name": c.name, "anchor": c.anchor, "status": c.status, "asserted": c.asserted,
            "tol": c.tol, "scaled": c.scaled, "max": c.max, "mean": c.mean, "argmax": c.argmax,
            "reason": c.reason, "extra": c.extra,
            "series": None if c.values is None else c.values}


def to_json(report: AnalysisReport | dict) -> str:
    data = report.to_dict() if isinstance(report, AnalysisReport) else report
    return json.dumps(clean(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def to_csv(report: AnalysisReport) -> str:
    """One row per (point, quantity) for every check that carries a series."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["suite", "quantity", "point", "u", "value"])
    for name, suite in report.suites.items():
        for c in suite.checks:
            if c.values is None:
                continue
            for i, (u, v) in enumerate(zip(report.points, c.values)):
                coords = ";".join(repr(float(x)) for x in u)
                writer.writerow([name, c.name, i, coords, repr(float(v)) if np.isfinite(v) else ""])
    return buf.getvalue()


def load_schema() -> dict:
    text = resources.files("canonfield").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def write_report(report: AnalysisReport, out: str | Path, fmt: str = "json",
                 stem: str = "report") -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out / f"{stem}.json"
        path.write_text(to_json(report))
        written.append(path)
    if fmt in ("csv", "both"):
        path = out / f"{stem}.csv"
        path.write_text(to_csv(report))
        written.append(path)
    return written


# -- suites ------------------------------------------------------------------------

def _range(values: np.ndarray) -> dict:
    finite = values[np.isfinite(values)]
    if not finite.size:
        return {"min": None, "max": None, "mean": None}
    return {"min": float(finite.min()), "max": float(finite.max()), "mean": float(finite.mean())}


def geometry_suite(sample: Sample, config: RunConfig) -> SuiteResult:
    tol, u, scale = config.tol, sample.u, sample.scale
    fine = tol * 1e-2
    frame, split = sample.frame, sample.split
    route_a, route_b = lie_derivative_metric(sample.jet, frame, split)
    pack = curvature(frame)
    res = SuiteResult()
    res.checks.append(residual_check("lie_two_route", A_LIE_ROUTES,
                                     np.max(np.abs(route_a - route_b), axis=(-2, -1)),
                                     fine, u, scale=scale))
    res.checks.append(residual_check("gauss_formula", A_GAUSS, gauss_formula_residual(sample.jet, frame),
                                     fine, u, scale=scale))
    res.checks.append(residual_check("weingarten", A_WEINGARTEN, weingarten_residual(sample.fields, frame),
                                     fine, u, scale=scale))
    for name, values in riemann_residuals(pack).items():
        res.checks.append(residual_check(f"riemann_{name}", A_RIEMANN, values, fine, u, scale=scale))
    if pack.weyl is not None:
        res.checks.append(residual_check("weyl_trace", A_WEYL, weyl_trace_residual(pack, frame.metric_inv),
                                         fine, u, scale=scale))
    res.checks.append(info("scalar_curvature", A_RIEMANN, pack.scalar, u))
    res.verdicts = {"n": sample.n, "m": sample.m, "valid_points": sample.size,
                    "excluded_points": len(sample.excluded),
                    "scalar_curvature": _range(pack.scalar)}
    return res


def conformal_suite(sample: Sample, config: RunConfig, findings: list) -> SuiteResult:
    tol, u, scale = config.tol, sample.u, sample.scale
    eq = conformal_umbilic_equivalence(sample, tol)
    par = parallel_normal_direction_test(sample, tol)
    conf, umb = eq.conformal, eq.umbilic
    res = SuiteResult()
    res.checks += [
        residual_check("conformality_residual", A_CONFORMAL, conf.residual, tol, u, asserted=False),
        residual_check("umbilicity_residual", A_UMBILIC, umb.residual, tol, u, asserted=False),
        residual_check("conformal_umbilic_equivalence", A_EQUIVALENCE,
                       (~eq.agrees).astype(float), 0.5, u),
        residual_check("potential_link", A_LINK, eq.phi_minus_one_minus_eta, tol * 1e-2, u),
        residual_check("coefficient_eta_plus_one", A_COEFF_ONE, eq.coefficient_one, tol, u, scale=scale),
        residual_check("coefficient_eta_plus_two", A_COEFF_TWO, eq.coefficient_two, tol, u,
                       scale=scale, asserted=False),
        residual_check("parallel_normal_direction", A_PARALLEL, par.residual, tol, u, asserted=False),
        info("phi", A_CONFORMAL, conf.phi, u),
        info("eta", A_UMBILIC, umb.mu, u),
    ]
    phi = _range(conf.phi)
    res.verdicts = {
        "is_conformal": conf.is_conformal, "trivially_conformal": conf.trivially_conformal,
        "is_umbilical": umb.is_umbilical, "biconditional_holds": eq.holds,
        "phi": phi, "phi_constant": bool(phi["max"] - phi["min"] <= tol),
        "max_phi_minus_one_minus_eta": eq.max_link,
        "normal_part_vanishing_points": int(np.sum(umb.vanishing)),
        "normal_direction_parallel": par.is_parallel,
    }
    if config.fd_check:
        res.checks += _fd_cross_check(sample, config, conf.is_conformal)
        res.verdicts["fd_tol"] = config.fd_tol
    one, two = eq.coefficient_one, eq.coefficient_two
    if np.any(np.isfinite(one)):
        findings.append({
            "id": "trace-coefficient",
            "message": "where x^T is conformal the measured factor is L g = 2(eta + 1) g; "
                       "the coefficient 2(eta + 2) does not fit",
            "data": {"max_residual_eta_plus_one": float(np.nanmax(one)),
                     "min_residual_eta_plus_two": float(np.nanmin(two))},
        })
    return res


def _fd_cross_check(sample: Sample, config: RunConfig, exact_verdict: bool) -> list[Check]:
    """Repeat the conformality test on jets built from finite differences of values."""
    fd = fd_jet(sample.spec, sample.u)
    fd_sample = Sample(sample.spec, sample.u, jet_from_point(fd))
    _, lie_fd = lie_derivative_metric(fd_sample.jet, fd_sample.frame, fd_sample.split)
    _, lie_exact = lie_derivative_metric(sample.jet, sample.frame, sample.split)
    verdict = conformality_test(lie_fd, fd_sample.frame, config.fd_tol)
    agree = np.full(sample.size, 0.0 if verdict.is_conformal == exact_verdict else 1.0)
    return [
        residual_check("fd_lie_derivative", "finite-difference jets reproduce L_{x^T} g",
                       np.max(np.abs(lie_fd - lie_exact), axis=(-2, -1)), config.fd_tol,
                       sample.u, scale=sample.scale),
        residual_check("fd_conformal_verdict", "finite-difference verdict matches the exact verdict",
                       agree, 0.5, sample.u, fd_residual=verdict.max_residual),
    ]


def yamabe_suite(sample: Sample, config: RunConfig) -> SuiteResult:
    rep = yamabe_check(sample, config.tol)
    return SuiteResult({"lambda_fit": rep.lambda_fit, "is_soliton": rep.is_soliton,
                        "lambda_variance": rep.lambda_variance,
                        "max_residual": float(np.max(rep.residual_per_point)),
                        "lambda_free_lower_bound": float(np.max(rep.lower_bound)),
                        "scalar_curvature": _range(rep.R_samples)}, rep.checks)


def self_similar_suite(sample: Sample, config: RunConfig) -> SuiteResult:
    rep = self_similar_check(sample, config.tol)
    ledger = self_similar_ricci_identity(sample, config.tol, rep)
    return SuiteResult({
        "is_generalized_self_similar": rep.is_generalized_self_similar,
        "is_self_shrinker": rep.is_self_shrinker,
        "f": _range(rep.f_per_point),
        "self_similar_points": int(np.sum(rep.self_similar_points)),
        "H_vanishing_points": int(np.sum(rep.H_vanishing_set)),
        "vacuous_points": int(np.sum(rep.vacuous_set)),
        "ricci_expression_min": ledger.values.get("expression_min"),
    }, rep.checks + ledger.checks)


def identities_suite(sample: Sample, config: RunConfig) -> SuiteResult:
    tol = config.tol
    _, lie = lie_derivative_metric(sample.jet, sample.frame, sample.split)
    conformal = conformality_test(lie, sample.frame, tol).is_conformal
    checks = [curvature_identity_check(sample, tol, seed=config.seed, conformal=conformal)]
    checks += ricci_identity_checks(sample, tol, conformal=conformal)
    lap = laplacian_gradient_check(sample, tol, conformal=conformal)
    obata = hessian_obata_check(sample, tol, lam=lap.values.get("lambda"), conformal=conformal)
    return SuiteResult({"conformal": conformal, "lambda": lap.values.get("lambda"),
                        "beta_mean": lap.values.get("beta")},
                       checks + lap.checks + obata.checks)


def classify_suite(sample: Sample, config: RunConfig, findings: list) -> SuiteResult:
    tol, u = config.tol, sample.u
    fc = classify_field(sample, tol)
    res = SuiteResult()
    res.checks += [residual_check(f"class_{name}", A_TORSE, series, tol, u, asserted=False)
                   for name, series in fc.series.items()]
    res.verdicts["class"] = fc.cls
    res.verdicts["degenerate_fit"] = fc.degenerate
    res.verdicts["class_residuals"] = fc.residuals
    res.verdicts["varphi"] = _range(fc.varphi)
    try:
        cv = containment_test(sample, tol)
        res.verdicts["containment"] = {
            "kind": cv.kind, "sphere_radius": cv.sphere_radius, "plane_normal": cv.plane_normal,
            "plane_offset": cv.plane_offset, "origin_in_plane": cv.origin_in_plane,
            "sphere_residual": cv.sphere_residual, "plane_residual": cv.plane_residual}
    except TooFewPoints as exc:
        res.verdicts["containment"] = {"kind": None, "reason": str(exc)}
    if sample.n >= 4:
        flat = conformal_flatness_test(sample, tol)
        res.checks.append(residual_check("weyl_norm", A_FLAT, flat.weyl_per_point, tol, u, asserted=False))
        res.verdicts["conformally_flat"] = flat.is_conformally_flat
        res.verdicts["max_weyl"] = flat.max_weyl
    else:
        res.verdicts["conformally_flat"] = None
    dichotomy = corollary_dichotomy(sample, tol)
    res.verdicts["containment_dichotomy"] = dichotomy
    if dichotomy.get("hypotheses_hold") and not dichotomy.get("consistent"):
        findings.append({
            "id": "containment-dichotomy",
            "message": "x^T is conformal, x^N never vanishes and its direction is parallel, yet the "
                       "image lies neither in a hypersphere centred at the origin nor in a hyperplane",
            "data": dichotomy,
        })
    return res


def spec_echo(spec: ImmersionSpec) -> dict:
    return {"label": spec.label, "n": spec.n, "m": spec.m, "params": dict(spec.params),
            "domain": [list(iv) for iv in spec.domain], "grid": list(spec.grid),
            "source": to_source(spec)}


def analyze(spec: ImmersionSpec, config: RunConfig) -> AnalysisReport:
    config.validate()
    if config.grid is not None:
        spec = spec.with_grid(tuple(config.grid))
    sample = sample_grid(spec)
    findings: list[dict] = []
    suites: dict[str, SuiteResult] = {}
    for name in config.suites:
        if name == "geometry":
            suites[name] = geometry_suite(sample, config)
        elif name == "conformal":
            suites[name] = conformal_suite(sample, config, findings)
        elif name == "yamabe":
            suites[name] = yamabe_suite(sample, config)
        elif name == "self_similar":
            suites[name] = self_similar_suite(sample, config)
        elif name == "identities":
            suites[name] = identities_suite(sample, config)
        elif name == "classify":
            suites[name] = classify_suite(sample, config, findings)
    if sample.excluded:
        findings.append({"id": "excluded-points",
                         "message": "chart points where the differential is rank deficient were skipped",
                         "data": {"count": len(sample.excluded)}})
    provenance = {"tool": "canonfield", "version": __version__, "seed": config.seed,
                  "grid": list(spec.grid), "tol": config.tol, "fd_tol": config.fd_tol,
                  "fd_check": config.fd_check, "suites": list(config.suites)}
    return AnalysisReport(spec_echo(spec), provenance, sample.u.tolist(), sample.excluded,
                          suites, findings)
