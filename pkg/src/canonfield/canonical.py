"""Conformality of the canonical field ``x^T`` and umbilicity with respect to ``x^N``.

The Lie derivative of the metric along ``x^T`` is computed two ways: from the
second fundamental form (``2g + 2<h, x^N>``) and from the covariant derivative
of ``x^T`` itself (``g(nabla_i x^T, d_j) + g(d_i, nabla_j x^T)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (GeometryFrame, PositionSplit, covariant_derivative_xT, mean_curvature,
                       onb_coefficients, sff_apply, traceless_norm)
from .jets import JetPoint
from .sampling import Sample

DEFAULT_TOL = 1e-8
FD_TOL = 1e-5
CLASSES = ("zero", "concurrent", "concircular", "torse-forming", "conformal-only", "none")


def _summary(values: np.ndarray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return float("nan"), float("nan")
    return float(finite.max()), float(finite.mean())


@dataclass
class ConformalVerdict:
    is_conformal: bool
    phi: np.ndarray
    residual: np.ndarray
    max_residual: float
    mean_residual: float
    tol: float
    trivially_conformal: bool = False


@dataclass
class UmbilicVerdict:
    is_umbilical: bool
    mu: np.ndarray
    residual: np.ndarray
    reference_normal: str
    vanishing: np.ndarray  # mask of points where the reference normal is zero
    max_residual: float
    mean_residual: float
    tol: float


@dataclass
class EquivalenceReport:
    """Pointwise check of: x^T conformal  <=>  umbilical with respect to x^N."""

    conformal: ConformalVerdict
    umbilic: UmbilicVerdict
    agrees: np.ndarray
    holds: bool
    phi_minus_one_minus_eta: np.ndarray
    max_link: float
    coefficient_one: np.ndarray  # |Lg - 2(eta+1) g| at conformal points
    coefficient_two: np.ndarray  # |Lg - 2(eta+2) g| at conformal points


@dataclass
class FieldClass:
    cls: str
    varphi: np.ndarray
    alpha: np.ndarray  # 1-form in the orthonormal tangent frame
    residuals: dict[str, float]
    series: dict[str, np.ndarray] = field(default_factory=dict)
    degenerate: bool = False


@dataclass
class ParallelNormalReport:
    residual: np.ndarray  # NaN where x^N vanishes
    vanishing: np.ndarray
    max_residual: float
    is_parallel: bool | None  # None when x^N vanishes everywhere
    tol: float


def lie_derivative_metric(jet: JetPoint, frame: GeometryFrame, split: PositionSplit):
    """Both routes for ``L_{x^T} g`` in chart indices, as ``(from_h, from_nabla)``."""
    pairing = np.einsum("...aij,...a->...ij", frame.sff_ambient, split.xN)
    from_h = 2.0 * frame.metric + 2.0 * pairing
    C = covariant_derivative_xT(jet, frame, split)
    lowered = frame.metric @ C  # g(nabla_i x^T, d_j) = lowered[j, i]
    from_nabla = lowered + np.swapaxes(lowered, -1, -2)
    return from_h, from_nabla


def conformality_test(lie: np.ndarray, frame: GeometryFrame, tol: float = DEFAULT_TOL,
                      split: PositionSplit | None = None) -> ConformalVerdict:
    n = frame.n
    phi = np.einsum("...ij,...ij->...", frame.metric_inv, lie) / (2.0 * n)
    residual = traceless_norm(frame, lie, 2.0 * phi) / n
    mx, mean = _summary(np.atleast_1d(residual))
    trivial = bool(split is not None and np.all(split.norm_xT <= tol * (1.0 + np.linalg.norm(split.x, axis=-1))))
    return ConformalVerdict(bool(mx <= tol), phi, residual, mx, mean, tol, trivial)


def resolve_normal(tag, frame: GeometryFrame, split: PositionSplit) -> tuple[str, np.ndarray]:
    if isinstance(tag, str):
        if tag == "xN":
            return tag, split.xN
        if tag == "H":
            return tag, mean_curvature(frame)
        raise ValueError(f"unknown normal field tag {tag!r}")
    return "explicit", np.asarray(tag, dtype=float)


def umbilicity_test(frame: GeometryFrame, split: PositionSplit, xi_field="xN",
                    tol: float = DEFAULT_TOL, vanish_tol: float = 1e-12) -> UmbilicVerdict:
    """Is ``<h(X,Y), xi>`` proportional to ``g(X,Y)``? ``xi_field`` is ``"xN"``, ``"H"`` or an array."""
    tag, xi = resolve_normal(xi_field, frame, split)
    pairing = np.einsum("...aij,...a->...ij", frame.sff_ambient, xi)
    mu = np.einsum("...ij,...ij->...", frame.metric_inv, pairing) / frame.n
    residual = traceless_norm(frame, pairing, mu)
    vanishing = np.linalg.norm(xi, axis=-1) <= vanish_tol * (1.0 + np.linalg.norm(split.x, axis=-1))
    mu = np.where(vanishing, 0.0, mu)
    residual = np.where(vanishing, 0.0, residual)
    mx, mean = _summary(np.atleast_1d(residual))
    return UmbilicVerdict(bool(mx <= tol), mu, residual, tag, vanishing, mx, mean, tol)


def conformal_umbilic_equivalence(sample: Sample, tol: float = DEFAULT_TOL) -> EquivalenceReport:
    frame, split = sample.frame, sample.split
    _, lie = lie_derivative_metric(sample.jet, frame, split)
    conf = conformality_test(lie, frame, tol, split)
    umb = umbilicity_test(frame, split, "xN", tol)
    conf_pt = conf.residual <= tol
    umb_pt = umb.residual <= tol
    agrees = conf_pt == umb_pt
    both = conf_pt & umb_pt
    # eta is the trace factor even where x^N vanishes (it is 0 there anyway)
    pairing = np.einsum("...aij,...a->...ij", frame.sff_ambient, split.xN)
    eta = np.einsum("...ij,...ij->...", frame.metric_inv, pairing) / frame.n
    link = np.where(both, np.abs(conf.phi - 1.0 - eta), np.nan)
    one = np.where(conf_pt, traceless_norm(frame, lie, 2.0 * (eta + 1.0)), np.nan)
    two = np.where(conf_pt, traceless_norm(frame, lie, 2.0 * (eta + 2.0)), np.nan)
    max_link = _summary(link)[0]
    return EquivalenceReport(conf, umb, agrees, bool(np.all(agrees)), link, max_link, one, two)


def classify_field(sample: Sample, tol: float = DEFAULT_TOL) -> FieldClass:
    """Most restrictive class of ``x^T``, from a pointwise fit ``nabla x^T = phi I + x^T (x) alpha``."""
    frame, split = sample.frame, sample.split
    n = frame.n
    C = covariant_derivative_xT(sample.jet, frame, split)
    B = onb_coefficients(frame)
    Binv = np.linalg.inv(B)
    Cn = Binv @ C @ B  # endomorphism in the orthonormal frame
    v = np.einsum("...ij,...j->...i", Binv, split.xT_chart)
    eye = np.eye(n)

    zero = split.norm_xT
    concurrent = np.linalg.norm(Cn - eye, axis=(-2, -1))
    trace_phi = np.trace(Cn, axis1=-2, axis2=-1) / n
    concircular = np.linalg.norm(Cn - trace_phi[..., None, None] * eye, axis=(-2, -1))

    # columns: vec(I) for phi, vec(v e_j^T) for alpha_j
    design = np.empty(Cn.shape[:-2] + (n * n, n + 1))
    design[..., 0] = eye.reshape(-1)
    for j in range(n):
        col = np.zeros(Cn.shape[:-2] + (n, n))
        col[..., :, j] = v
        design[..., j + 1] = col.reshape(Cn.shape[:-2] + (n * n,))
    coef = np.einsum("...ij,...j->...i", np.linalg.pinv(design), Cn.reshape(Cn.shape[:-2] + (n * n,)))
    fit = np.einsum("...ij,...j->...i", design, coef).reshape(Cn.shape)
    torse = np.linalg.norm(Cn - fit, axis=(-2, -1))
    sym = 0.5 * (Cn + np.swapaxes(Cn, -1, -2))
    conformal_only = np.linalg.norm(sym - trace_phi[..., None, None] * eye, axis=(-2, -1))

    series = {"zero": zero, "concurrent": concurrent, "concircular": concircular,
              "torse-forming": torse, "conformal-only": conformal_only}
    residuals = {k: float(np.max(s)) for k, s in series.items()}
    cls = next((k for k in CLASSES[:-1] if residuals[k] <= tol), "none")
    degenerate = cls == "zero"
    return FieldClass(cls, coef[..., 0], coef[..., 1:], residuals, series, degenerate)


def parallel_normal_direction_test(sample: Sample, tol: float = DEFAULT_TOL) -> ParallelNormalReport:
    """Is ``x^N/|x^N|`` parallel in the normal bundle? Uses ``D_Z x^N = -h(x^T, Z)``."""
    frame, split = sample.frame, sample.split
    vanishing = split.norm_xN <= tol * (1.0 + np.linalg.norm(split.x, axis=-1))
    safe = np.where(vanishing, 1.0, split.norm_xN)
    unit = split.xN / safe[..., None]
    B = onb_coefficients(frame)
    worst = np.zeros(split.norm_xN.shape)
    for a in range(frame.n):
        hz = sff_apply(frame, split.xT_chart, B[..., :, a])
        perp = hz - np.einsum("...a,...a->...", hz, unit)[..., None] * unit
        worst = np.maximum(worst, np.linalg.norm(perp, axis=-1) / safe)
    residual = np.where(vanishing, np.nan, worst)
    mx = _summary(residual)[0]
    verdict = None if np.all(vanishing) else bool(mx <= tol)
    return ParallelNormalReport(residual, vanishing, mx, verdict, tol)
