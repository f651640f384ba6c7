"""Global shape diagnostics: does the sampled image lie on a hypersphere centred at the
origin or in a hyperplane, and is the induced metric conformally flat.

These are reported, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import DEFAULT_TOL, conformal_umbilic_equivalence, parallel_normal_direction_test
from .errors import DimensionTooLow, TooFewPoints
from .geometry import curvature, onb_coefficients
from .sampling import Sample


@dataclass
class ContainmentVerdict:
    kind: str  # hypersphere_origin | hyperplane | neither | both
    sphere_radius: float | None
    plane_normal: np.ndarray | None
    plane_offset: float | None
    origin_in_plane: bool
    sphere_residual: float  # std(|x|) / mean(|x|)
    plane_residual: float  # max distance of the samples to the fitted hyperplane
    singular_ratio: float  # smallest / largest singular value of the centred cloud


@dataclass
class FlatnessResult:
    weyl_per_point: np.ndarray  # Frobenius norm in the orthonormal frame
    max_weyl: float
    is_conformally_flat: bool
    tol: float


def containment_test(sample: Sample, tol: float = DEFAULT_TOL) -> ContainmentVerdict:
    x = sample.split.x
    P, m = x.shape
    if P < sample.n + 2:
        raise TooFewPoints(f"need at least {sample.n + 2} points, got {P}")
    radii = np.linalg.norm(x, axis=-1)
    mean_r = float(radii.mean())
    sphere_res = float(radii.std() / mean_r) if mean_r > 0 else float("inf")
    on_sphere = sphere_res <= tol

    centre = x.mean(axis=0)
    cloud = x - centre
    # the triangular factor has the same singular values and right vectors, without a P x P factor
    tri = np.linalg.qr(cloud, mode="r")
    _, sv, vt = np.linalg.svd(tri, full_matrices=True)
    sv = np.concatenate([sv, np.zeros(m - len(sv))])
    ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    normal = vt[-1]
    # fix the sign so the report does not depend on the SVD routine
    pivot = np.argmax(np.abs(normal))
    normal = normal * np.sign(normal[pivot])
    offset = float(centre @ normal)
    distance = float(np.max(np.abs(cloud @ normal)))
    diameter = float(np.max(np.linalg.norm(cloud, axis=-1))) * 2.0
    in_plane = ratio <= tol and distance <= tol * max(diameter, 1.0)

    kind = {(True, True): "both", (True, False): "hypersphere_origin",
            (False, True): "hyperplane", (False, False): "neither"}[(on_sphere, in_plane)]
    return ContainmentVerdict(
        kind, mean_r if on_sphere else None, normal if in_plane else None,
        offset if in_plane else None, bool(in_plane and abs(offset) <= tol),
        sphere_res, distance, ratio)


def conformal_flatness_test(sample: Sample, tol: float = DEFAULT_TOL) -> FlatnessResult:
    if sample.n < 4:
        raise DimensionTooLow(f"conformal flatness via the Weyl tensor needs n >= 4, got {sample.n}")
    frame = sample.frame
    W = curvature(frame).weyl
    B = onb_coefficients(frame)
    Wo = np.einsum("...ijkl,...ia,...jb,...kc,...ld->...abcd", W, B, B, B, B)
    norms = np.sqrt(np.einsum("...abcd,...abcd->...", Wo, Wo))
    mx = float(norms.max())
    return FlatnessResult(norms, mx, mx <= tol, tol)


def corollary_dichotomy(sample: Sample, tol: float = DEFAULT_TOL) -> dict:
    """Evaluate the hypersphere-or-hyperplane alternative where its hypotheses hold.

    Hypotheses: x^T conformal, x^N nowhere zero, and x^N/|x^N| parallel in the
    normal bundle. The outcome is a finding; it never fails a run.
    """
    eq = conformal_umbilic_equivalence(sample, tol)
    par = parallel_normal_direction_test(sample, tol)
    applies = bool(eq.conformal.is_conformal and not np.any(par.vanishing) and par.is_parallel)
    out = {"hypotheses_hold": applies, "conformal": eq.conformal.is_conformal,
           "normal_part_vanishes_somewhere": bool(np.any(par.vanishing)),
           "normal_direction_parallel": par.is_parallel}
    if not applies:
        return out
    verdict = containment_test(sample, tol)
    out["containment"] = verdict.kind
    out["consistent"] = verdict.kind != "neither"
    return out
