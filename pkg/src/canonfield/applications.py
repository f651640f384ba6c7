"""Yamabe solitons, generalized self-similar submanifolds and the identities satisfied
by a conformal canonical field.

Scalar fields whose derivatives are needed (the potential ``phi``, the support
factor ``f`` and ``|x^T|^2 / 2``) are carried as jets, so every directional
derivative here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .canonical import DEFAULT_TOL, conformality_test, lie_derivative_metric, umbilicity_test
from .checks import Check, info, residual_check, skipped
from .errors import OrderTooLow, SkippedMissingPrereq, SkippedNonconstantPhi, SkippedNotConformal
from .geometry import curvature, mean_curvature, onb_coefficients, traceless_norm
from .sampling import Sample

A_YAMABE = "1/2 L_v g = (R - lambda) g"
A_YAMABE_SFF = "<h(V,W), x^N> = (R - lambda - 1) g(V,W)"
A_SELF_SIMILAR = "x^N = f H"
A_SHRINKER = "H = -x^N"
A_PSEUDO = "x^T conformal <=> pseudo-umbilical"
A_CURVATURE = "R(X,Y) x^T = (X phi) Y - (Y phi) X"
A_RIC_PHI = "Ric(Y, x^T) = -(n-1) (Y phi)"
A_RIC_GAUSS = "Ric(x^T,x^T) = n g(H, h(x^T,x^T)) - sum |h(e_i,x^T)|^2"
A_LAPLACIAN = "Laplacian x^T = grad phi"
A_ALIGN = "grad phi = beta x^T"
A_EIGEN = "Laplacian x^T = -lambda x^T"
A_GRAD_F = "grad F = phi x^T, F = |x^T|^2 / 2"
A_HESS_F = "Hess F = phi^2 g"
A_OBATA = "nabla_X grad phi + lambda phi X = 0"
A_SS_IDENTITY = ("x^T phi + |H|^2 (x^T f) + (2/n) Ric(x^T,x^T) = "
                 "-(2/n) sum |h(e_i,x^T)|^2")
A_SS_HYPOTHESIS = "Ric(x^T,x^T) + (n/2) [x^T phi + |H|^2 (x^T f)] >= 0"


def _gnorm(metric: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", v, metric, v), 0.0))


def _grad(sample: Sample, scalar_d1: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", sample.frame.metric_inv, scalar_d1)


@dataclass
class SolitonReport:
    lambda_fit: float
    residual_per_point: np.ndarray
    is_soliton: bool
    R_samples: np.ndarray
    lambda_variance: float
    lower_bound: np.ndarray  # lambda-independent: trace-free part of L g / 2
    consistency: np.ndarray  # (L g - 2(R-lambda) g) - 2(<h,x^N> - (R-lambda-1) g), scaled
    checks: list[Check] = field(default_factory=list)


@dataclass
class SelfSimilarReport:
    f_per_point: np.ndarray  # NaN where H vanishes
    colinearity_residual: np.ndarray
    shrinker_residual: np.ndarray
    is_generalized_self_similar: bool
    is_self_shrinker: bool
    H_vanishing_set: np.ndarray
    vacuous_set: np.ndarray  # H = 0 and x^N = 0
    self_similar_points: np.ndarray
    pseudo_umbilic: Check | None = None
    checks: list[Check] = field(default_factory=list)


@dataclass
class IdentityLedger:
    checks: list[Check] = field(default_factory=list)
    values: dict[str, float | None] = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def conformal_gate(sample: Sample, tol: float) -> bool:
    _, lie = lie_derivative_metric(sample.jet, sample.frame, sample.split)
    return conformality_test(lie, sample.frame, tol).is_conformal


def _require_conformal(sample: Sample, tol: float, conformal: bool | None) -> None:
    if conformal is None:
        conformal = conformal_gate(sample, tol)
    if not conformal:
        raise SkippedNotConformal("x^T is not conformal on this grid")


def _require_order(sample: Sample, order: int) -> None:
    if sample.X.order < order:
        raise OrderTooLow(f"needs jets of order {order}, sample carries {sample.X.order}")


# -- Yamabe --------------------------------------------------------------------

def yamabe_check(sample: Sample, tol: float = DEFAULT_TOL) -> SolitonReport:
    """Fit the soliton constant by least squares on the traced equation, then test the tensor."""
    frame, split, u = sample.frame, sample.split, sample.u
    _, lie = lie_derivative_metric(sample.jet, frame, split)
    R = curvature(frame).scalar
    phi = np.einsum("...ij,...ij->...", frame.metric_inv, lie) / (2.0 * frame.n)
    # trace(1/2 Lg - R g + lambda g) = n (phi - R + lambda); minimised by the mean
    estimates = R - phi
    lam = float(np.mean(estimates))
    residual = traceless_norm(frame, 0.5 * lie, R - lam)
    lower = traceless_norm(frame, 0.5 * lie, phi)
    w = np.einsum("...aij,...a->...ij", frame.sff_ambient, split.xN)
    e42 = lie - 2.0 * (R - lam)[..., None, None] * frame.metric
    e43 = w - (R - lam - 1.0)[..., None, None] * frame.metric
    consistency = np.max(np.abs(e42 - 2.0 * e43), axis=(-2, -1))
    is_soliton = bool(np.max(residual) <= tol)
    checks = [
        residual_check("yamabe_residual", A_YAMABE, residual, tol, u, asserted=False,
                       lambda_fit=lam),
        residual_check("yamabe_lambda_free_bound", A_YAMABE, lower, tol, u, asserted=False),
        residual_check("yamabe_form_consistency", f"{A_YAMABE} vs {A_YAMABE_SFF}",
                       consistency, tol * 1e-2, u, scale=sample.scale),
    ]
    return SolitonReport(lam, residual, is_soliton, R, float(np.var(estimates)), lower,
                         checks[-1].values, checks)


# -- self-similar ----------------------------------------------------------------

def self_similar_check(sample: Sample, tol: float = DEFAULT_TOL) -> SelfSimilarReport:
    frame, split, u, scale = sample.frame, sample.split, sample.u, sample.scale
    H = mean_curvature(frame)
    normH = np.linalg.norm(H, axis=-1)
    h_zero = normH <= tol
    xn_zero = split.norm_xN <= tol * scale
    safe = np.where(h_zero, 1.0, normH ** 2)
    f = np.where(h_zero, np.nan, np.einsum("...a,...a->...", split.xN, H) / safe)
    colinear = np.where(h_zero, split.norm_xN,
                        np.linalg.norm(split.xN - np.nan_to_num(f)[..., None] * H, axis=-1))
    shrinker = np.linalg.norm(H + split.xN, axis=-1)
    points_ok = colinear <= tol * scale
    vacuous = h_zero & xn_zero
    checks = [
        residual_check("self_similar_colinearity", A_SELF_SIMILAR, colinear, tol, u,
                       scale=scale, asserted=False),
        residual_check("self_shrinker_residual", A_SHRINKER, shrinker, tol, u, asserted=False),
        info("self_similar_factor", A_SELF_SIMILAR, f, u),
    ]
    report = SelfSimilarReport(f, colinear, shrinker, bool(np.all(points_ok)),
                               bool(np.max(shrinker) <= tol), h_zero, vacuous, points_ok, None, checks)
    if report.is_generalized_self_similar:
        report.pseudo_umbilic = pseudo_umbilic_equivalence(sample, tol, f)
        checks.append(report.pseudo_umbilic)
    return report


def pseudo_umbilic_equivalence(sample: Sample, tol: float, f: np.ndarray) -> Check:
    """Pointwise ``conformal <=> umbilical w.r.t. H`` where ``x^N = f H`` with ``f != 0``."""
    frame, split = sample.frame, sample.split
    _, lie = lie_derivative_metric(sample.jet, frame, split)
    conf = conformality_test(lie, frame, tol).residual <= tol
    umb = umbilicity_test(frame, split, "H", tol).residual <= tol
    applies = np.isfinite(f) & (np.abs(np.nan_to_num(f)) > tol)
    mismatch = np.where(applies, (conf != umb).astype(float), np.nan)
    return residual_check("pseudo_umbilic_equivalence", A_PSEUDO, mismatch, 0.5, sample.u)


# -- identities for a conformal canonical field ------------------------------------

def _directions(sample: Sample, seed: int, count: int) -> np.ndarray:
    """Seeded g-unit chart directions, shape ``(P, count, n)``; drawn before any use."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((sample.size, count, sample.n))
    raw /= np.linalg.norm(raw, axis=-1, keepdims=True)
    B = onb_coefficients(sample.frame)
    return np.einsum("pij,pcj->pci", B, raw)


def _riemann_apply(riemann, metric_inv, X, Y, Z):
    """Chart components of ``R(X,Y)Z`` from ``R_ijkl = g(R(d_i,d_j) d_k, d_l)``."""
    low = np.einsum("...ijkl,...i,...j,...k->...l", riemann, X, Y, Z)
    return np.einsum("...lm,...m->...l", metric_inv, low)


def curvature_identity_check(sample: Sample, tol: float = DEFAULT_TOL, seed: int = 0,
                             count: int = 3, conformal: bool | None = None) -> Check:
    try:
        _require_conformal(sample, tol, conformal)
    except SkippedNotConformal as exc:
        return skipped("curvature_identity", A_CURVATURE, exc.reason, tol)
    frame, split = sample.frame, sample.split
    dirs = _directions(sample, seed, 2 * count)
    R = curvature(frame).riemann
    dphi = sample.fields.phi.d[1]
    worst = np.zeros(sample.size)
    for c in range(count):
        X, Y = dirs[:, 2 * c], dirs[:, 2 * c + 1]
        lhs = _riemann_apply(R, frame.metric_inv, X, Y, split.xT_chart)
        Xphi = np.einsum("pi,pi->p", dphi, X)
        Yphi = np.einsum("pi,pi->p", dphi, Y)
        rhs = Xphi[:, None] * Y - Yphi[:, None] * X
        worst = np.maximum(worst, _gnorm(frame.metric, lhs - rhs))
    return residual_check("curvature_identity", A_CURVATURE, worst, tol, sample.u,
                          scale=sample.scale, seed=seed, directions=count)


def ricci_identity_checks(sample: Sample, tol: float = DEFAULT_TOL,
                          conformal: bool | None = None) -> list[Check]:
    frame, split = sample.frame, sample.split
    n = frame.n
    pack = curvature(frame)
    v = split.xT_chart
    ric_v = np.einsum("...ij,...j->...i", pack.ricci, v)
    # Gauss route for Ric(x^T, x^T)
    H = mean_curvature(frame)
    h_v = np.einsum("...aij,...j->...ai", frame.sff_ambient, v)  # h(d_i, x^T)
    h_vv = np.einsum("...ai,...i->...a", h_v, v)
    gram = np.einsum("...ai,...aj->...ij", h_v, h_v)
    sum_sq = np.einsum("...ij,...ij->...", frame.metric_inv, gram)
    rhs = n * np.einsum("...a,...a->...", H, h_vv) - sum_sq
    lhs = np.einsum("...i,...i->...", ric_v, v)
    checks = [residual_check("ricci_gauss_contraction", A_RIC_GAUSS, np.abs(lhs - rhs), tol,
                             sample.u, scale=sample.scale)]
    try:
        _require_conformal(sample, tol, conformal)
    except SkippedNotConformal as exc:
        checks.append(skipped("ricci_potential", A_RIC_PHI, exc.reason, tol))
        return checks
    dphi = sample.fields.phi.d[1]
    covector = ric_v + (n - 1) * dphi
    norm = _gnorm(frame.metric_inv, covector)
    checks.append(residual_check("ricci_potential", A_RIC_PHI, norm, tol, sample.u,
                                 scale=sample.scale))
    return checks


def laplacian_gradient_check(sample: Sample, tol: float = DEFAULT_TOL,
                             conformal: bool | None = None) -> IdentityLedger:
    """(a) Laplacian of ``x^T`` against ``grad phi``; (b) alignment of ``grad phi`` with ``x^T``;
    (c) the eigenvalue ``lambda = -beta`` when ``beta`` is constant."""
    ledger = IdentityLedger()
    names = ("laplacian_gradient", "gradient_alignment", "laplacian_eigenvalue")
    anchors = (A_LAPLACIAN, A_ALIGN, A_EIGEN)
    try:
        _require_conformal(sample, tol, conformal)
        _require_order(sample, 3)
    except (SkippedNotConformal, OrderTooLow) as exc:
        reason = getattr(exc, "reason", "order-too-low")
        for name, anchor in zip(names, anchors):
            ledger.add(skipped(name, anchor, reason, tol))
        ledger.values["lambda"] = None
        return ledger
    frame, split, u, scale = sample.frame, sample.split, sample.u, sample.scale
    lap = sample.fields.laplacian_xT_chart.value
    grad_phi = _grad(sample, sample.fields.phi.d[1])
    a = ledger.add(residual_check(names[0], anchors[0], _gnorm(frame.metric, lap - grad_phi),
                                  tol * 10.0, u, scale=scale))
    v = split.xT_chart
    vv = np.einsum("...i,...ij,...j->...", v, frame.metric, v)
    moving = split.norm_xT > tol * scale
    beta = np.where(moving, np.einsum("...i,...ij,...j->...", grad_phi, frame.metric, v)
                    / np.where(moving, vv, 1.0), np.nan)
    perp = grad_phi - np.nan_to_num(beta)[..., None] * v
    b = ledger.add(residual_check(names[1], anchors[1],
                                  np.where(moving, _gnorm(frame.metric, perp), np.nan),
                                  tol, u, scale=scale))
    finite = beta[np.isfinite(beta)]
    lam = None
    if a.passed and b.passed and finite.size:
        spread = float(np.max(finite) - np.min(finite))
        if spread <= tol * float(np.max(scale)):
            lam = 0.0 - float(np.mean(finite))
            ledger.add(info(names[2], anchors[2], lam=lam, variance=float(np.var(finite)),
                            beta_spread=spread))
        else:
            ledger.add(info(names[2], anchors[2], -beta, u, note="beta is not constant; no eigenvalue claimed"))
    elif not finite.size:
        ledger.add(info(names[2], anchors[2], note="x^T vanishes on the grid; beta is undefined"))
    else:
        ledger.add(info(names[2], anchors[2], note="alignment or Laplacian check did not pass"))
    ledger.values["lambda"] = lam
    ledger.values["beta"] = None if not finite.size else float(np.mean(finite))
    return ledger


def hessian_obata_check(sample: Sample, tol: float = DEFAULT_TOL, lam: float | None = None,
                        conformal: bool | None = None) -> IdentityLedger:
    ledger = IdentityLedger()
    try:
        _require_conformal(sample, tol, conformal)
    except SkippedNotConformal as exc:
        for name, anchor in (("gradient_F", A_GRAD_F), ("hessian_F", A_HESS_F), ("obata", A_OBATA)):
            ledger.add(skipped(name, anchor, exc.reason, tol))
        return ledger
    frame, split, u, scale = sample.frame, sample.split, sample.u, sample.scale
    fj = sample.fields
    F = fj.half_norm_xT
    phi = fj.phi.value
    grad_F = fj.gradient(F).value
    ledger.add(residual_check("gradient_F", A_GRAD_F,
                              _gnorm(frame.metric, grad_F - phi[..., None] * split.xT_chart),
                              tol, u, scale=scale))
    spread = float(np.max(phi) - np.min(phi))
    if spread > tol:
        ledger.add(skipped("hessian_F", A_HESS_F, SkippedNonconstantPhi("").reason, tol))
    else:
        hess = fj.hessian(F).value
        ledger.add(residual_check("hessian_F", A_HESS_F, traceless_norm(frame, hess, phi ** 2),
                                  tol, u, scale=scale))
    if lam is None:
        ledger.add(info("obata", A_OBATA, note="no eigenvalue available"))
        return ledger
    s4 = sample.with_order(4)
    hess_phi = s4.fields.hessian(s4.fields.phi).value
    ledger.add(residual_check("obata", A_OBATA, traceless_norm(frame, hess_phi, -lam * phi),
                              tol, u, scale=scale, lam=lam))
    return ledger


def self_similar_ricci_identity(sample: Sample, tol: float = DEFAULT_TOL,
                                similar: SelfSimilarReport | None = None) -> IdentityLedger:
    """The Ricci hypothesis expression and the identity that shows it is never positive.

    ``f`` is the self-similar support factor and ``phi`` the trace potential; both
    are differentiated along ``x^T`` as jets. Points where ``H`` vanishes enter
    only when ``x^N`` vanishes too, with the ``|H|^2 (x^T f)`` term set to zero.
    """
    ledger = IdentityLedger()
    similar = similar or self_similar_check(sample, tol)
    if not similar.is_generalized_self_similar:
        reason = SkippedMissingPrereq("").reason
        ledger.add(skipped("self_similar_ricci_identity", A_SS_IDENTITY, reason, tol))
        ledger.add(skipped("self_similar_ricci_expression", A_SS_HYPOTHESIS, reason))
        return ledger
    frame, split, u, scale = sample.frame, sample.split, sample.u, sample.scale
    n = frame.n
    fj = sample.fields
    v = split.xT_chart
    xt_phi = np.einsum("...i,...i->...", fj.phi.d[1], v)
    xt_f = np.einsum("...i,...i->...", fj.support.d[1], v)
    H = mean_curvature(frame)
    H2 = np.einsum("...a,...a->...", H, H)
    term_f = np.where(similar.H_vanishing_set, np.where(similar.vacuous_set, 0.0, np.nan), H2 * xt_f)
    ric_vv = np.einsum("...i,...ij,...j->...", v, curvature(frame).ricci, v)
    h_v = np.einsum("...aij,...j->...ai", frame.sff_ambient, v)
    sum_sq = np.einsum("...ij,...ai,...aj->...", frame.metric_inv, h_v, h_v)
    lhs = xt_phi + term_f + (2.0 / n) * ric_vv
    rhs = -(2.0 / n) * sum_sq
    ledger.add(residual_check("self_similar_ricci_identity", A_SS_IDENTITY, np.abs(lhs - rhs),
                              tol, u, scale=scale))
    expression = ric_vv + 0.5 * n * (xt_phi + term_f)
    finite = expression[np.isfinite(expression)]
    ledger.add(info("self_similar_ricci_expression", A_SS_HYPOTHESIS, expression, u,
                    minimum=float(finite.min()) if finite.size else None))
    ledger.values["expression_min"] = float(finite.min()) if finite.size else None
    return ledger
