"""Extrinsic geometry of an immersion at a point: frames, second fundamental form,
shape operators, mean curvature, position split and Gauss-equation curvature.

All functions accept a single point or a batch (leading axes). Curvature uses
the convention ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`` and
``R_ijkl = g(R(e_i, e_j) e_k, e_l) = <h_il, h_jk> - <h_ik, h_jl>``, which gives
the unit 2-sphere scalar curvature +2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsl import ImmersionSpec
from .errors import NotNormal, OrderTooLow, RankDeficient
from .fields import FieldJets, jet_from_point
from .jets import Jet, JetPoint, contract, jet_field

RANK_TOLERANCE = 1e-8


@dataclass(frozen=True)
class GeometryFrame:
    tangent_basis: np.ndarray  # (..., m, n)
    metric: np.ndarray  # (..., n, n)
    metric_inv: np.ndarray
    onb_tangent: np.ndarray  # (..., m, n), orthonormal columns
    onb_normal: np.ndarray  # (..., m, m - n)
    sff_ambient: np.ndarray  # (..., m, n, n)
    christoffel: np.ndarray  # (..., n, n, n), [k, i, j]

    @property
    def n(self) -> int:
        return self.metric.shape[-1]

    @property
    def m(self) -> int:
        return self.tangent_basis.shape[-2]

    def __getitem__(self, index) -> "GeometryFrame":
        return GeometryFrame(*(getattr(self, f)[index] for f in self.__dataclass_fields__))


@dataclass(frozen=True)
class PositionSplit:
    x: np.ndarray
    xT_ambient: np.ndarray
    xT_chart: np.ndarray
    xN: np.ndarray
    norm_xT: np.ndarray
    norm_xN: np.ndarray

    def __getitem__(self, index) -> "PositionSplit":
        return PositionSplit(*(getattr(self, f)[index] for f in self.__dataclass_fields__))


@dataclass(frozen=True)
class CurvaturePack:
    riemann: np.ndarray  # (..., n, n, n, n)
    ricci: np.ndarray
    scalar: np.ndarray
    weyl: np.ndarray | None  # only for n >= 4


def point_scale(jet: JetPoint) -> np.ndarray:
    """``1 + |x| + |d1| + |d2|``; makes residual bounds dimensionless."""
    lead = jet.f.shape[:-1]
    return (1.0 + np.linalg.norm(jet.f, axis=-1)
            + np.linalg.norm(jet.d1.reshape(lead + (-1,)), axis=-1)
            + np.linalg.norm(jet.d2.reshape(lead + (-1,)), axis=-1))


def rank_ratio(tangent_basis: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(tangent_basis, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s[..., 0] > 0, s[..., -1] / s[..., 0], 0.0)


def pivoted_mgs(candidates: np.ndarray, count: int, against: np.ndarray | None = None) -> np.ndarray:
    """Modified Gram-Schmidt with column pivoting over a batch.

    ``candidates`` has shape ``(B, m, k)``. At each step the remaining column
    with the largest residual norm is normalised and removed from the others.
    Columns are first orthogonalised (twice) against ``against`` if given.
    Returns ``(B, m, count)`` orthonormal columns.
    """
    work = np.array(candidates, dtype=float)
    if against is not None:
        for _ in range(2):
            work -= against @ (np.swapaxes(against, -1, -2) @ work)
    batch = work.shape[0]
    rows = np.arange(batch)
    used = np.zeros(work.shape[::2], dtype=bool)
    out = np.empty(work.shape[:2] + (count,))
    for step in range(count):
        norms = np.linalg.norm(work, axis=1)
        norms[used] = -1.0
        piv = np.argmax(norms, axis=1)
        q = work[rows, :, piv] / norms[rows, piv][:, None]
        # reorthogonalise the chosen column against earlier output for stability
        if step:
            prev = out[:, :, :step]
            q -= np.einsum("bmi,bi->bm", prev, np.einsum("bmi,bm->bi", prev, q))
            q /= np.linalg.norm(q, axis=1, keepdims=True)
        out[:, :, step] = q
        used[rows, piv] = True
        work -= q[:, :, None] * np.einsum("bm,bmk->bk", q, work)[:, None, :]
    return out


def build_frame(jet: JetPoint) -> GeometryFrame:
    if not jet.has(2):
        raise OrderTooLow("build_frame needs second partials")
    T = np.asarray(jet.d1)
    lead = T.shape[:-2]
    m, n = T.shape[-2:]
    ratio = rank_ratio(T)
    if np.any(ratio < RANK_TOLERANCE):
        raise RankDeficient(f"tangent vectors are dependent (singular value ratio {ratio.min():.3g})")
    G = np.swapaxes(T, -1, -2) @ T
    Ginv = np.linalg.inv(G)
    Tb = T.reshape((-1, m, n))
    onb_t = pivoted_mgs(Tb, n)
    eye = np.broadcast_to(np.eye(m), (Tb.shape[0], m, m))
    onb_n = pivoted_mgs(eye, m - n, against=onb_t)
    onb_t = onb_t.reshape(lead + (m, n))
    onb_n = onb_n.reshape(lead + (m, m - n))
    d2 = np.asarray(jet.d2)
    coeff = np.einsum("...aq,...aij->...qij", onb_n, d2)
    sff = np.einsum("...aq,...qij->...aij", onb_n, coeff)
    first_kind = np.einsum("...aij,...al->...ijl", d2, T)
    gamma = np.einsum("...kl,...ijl->...kij", Ginv, first_kind)
    return GeometryFrame(T, G, Ginv, onb_t, onb_n, sff, gamma)


def position_split(jet: JetPoint, frame: GeometryFrame) -> PositionSplit:
    x = np.asarray(jet.f)
    E = frame.onb_tangent
    xT = np.einsum("...ai,...i->...a", E, np.einsum("...ai,...a->...i", E, x))
    xN = x - xT
    rhs = np.einsum("...al,...a->...l", frame.tangent_basis, x)
    chart = np.linalg.solve(frame.metric, rhs[..., None])[..., 0]
    return PositionSplit(x, xT, chart, xN, np.linalg.norm(xT, axis=-1), np.linalg.norm(xN, axis=-1))


def tangential_part(frame: GeometryFrame, vec: np.ndarray) -> np.ndarray:
    E = frame.onb_tangent
    return np.einsum("...ai,...i->...a", E, np.einsum("...ai,...a->...i", E, vec))


def shape_operator(frame: GeometryFrame, xi: np.ndarray) -> np.ndarray:
    """Chart matrix ``A[k, j] = g^{ki} <h_ij, xi>`` of the shape operator."""
    xi = np.asarray(xi, dtype=float)
    tangential = np.linalg.norm(tangential_part(frame, xi), axis=-1)
    if np.any(tangential > 1e-8 * np.linalg.norm(xi, axis=-1)):
        raise NotNormal(f"vector has tangential component {np.max(tangential):.3g}")
    pairing = np.einsum("...aij,...a->...ij", frame.sff_ambient, xi)
    return frame.metric_inv @ pairing


def mean_curvature(frame: GeometryFrame) -> np.ndarray:
    return np.einsum("...ij,...aij->...a", frame.metric_inv, frame.sff_ambient) / frame.n


def sff_apply(frame: GeometryFrame, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``h(X, Y)`` for chart vectors ``X``, ``Y``."""
    return np.einsum("...aij,...i,...j->...a", frame.sff_ambient, X, Y)


def normal_derivative_xN(jet: JetPoint, frame: GeometryFrame, split: PositionSplit,
                         Z: np.ndarray, cross_check: bool = False):
    """``D_Z x^N = -h(x^T, Z)``.

    With ``cross_check`` the normal part of the directional derivative of the
    ``x^N`` jet is returned as well, as a ``(primary, cross)`` pair.
    """
    primary = -sff_apply(frame, split.xT_chart, Z)
    if not cross_check:
        return primary
    if not jet.has(2):
        raise OrderTooLow("the cross-check route differentiates x^N and needs second partials")
    fields = FieldJets(jet_from_point(jet))
    dxN = fields.xN.d[1]  # (B, m, n)
    if jet.f.ndim == 1:
        dxN = dxN[0]
    along = np.einsum("...an,...n->...a", dxN, Z)
    Q = frame.onb_normal
    cross = np.einsum("...aq,...q->...a", Q, np.einsum("...aq,...a->...q", Q, along))
    return primary, cross


def curvature(frame: GeometryFrame) -> CurvaturePack:
    h = frame.sff_ambient
    R = (np.einsum("...ail,...ajk->...ijkl", h, h)
         - np.einsum("...aik,...ajl->...ijkl", h, h))
    gi = frame.metric_inv
    ricci = np.einsum("...il,...ijkl->...jk", gi, R)
    scalar = np.einsum("...jk,...jk->...", gi, ricci)
    n = frame.n
    weyl = None
    if n >= 4:
        g = frame.metric
        schouten = (ricci - scalar[..., None, None] * g / (2.0 * (n - 1))) / (n - 2)
        weyl = R - kulkarni_nomizu(schouten, g)
    return CurvaturePack(R, ricci, scalar, weyl)


def kulkarni_nomizu(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``(A o B)_ijkl = A_il B_jk + A_jk B_il - A_ik B_jl - A_jl B_ik``."""
    return (np.einsum("...il,...jk->...ijkl", A, B) + np.einsum("...jk,...il->...ijkl", A, B)
            - np.einsum("...ik,...jl->...ijkl", A, B) - np.einsum("...jl,...ik->...ijkl", A, B))


def riemann_residuals(pack: CurvaturePack) -> dict[str, np.ndarray]:
    """Pointwise max-abs deviation from each algebraic symmetry of the Riemann tensor."""
    R = pack.riemann

    def amax(a):
        return np.max(np.abs(a), axis=(-4, -3, -2, -1))

    return {
        "antisym_first_pair": amax(R + np.swapaxes(R, -4, -3)),
        "antisym_second_pair": amax(R + np.swapaxes(R, -2, -1)),
        "pair_symmetry": amax(R - np.moveaxis(R, (-4, -3, -2, -1), (-2, -1, -4, -3))),
        # R_ijkl + R_jkil + R_kijl
        "bianchi": amax(R + np.einsum("...jkil->...ijkl", R) + np.einsum("...kijl->...ijkl", R)),
    }


def weyl_trace_residual(pack: CurvaturePack, metric_inv: np.ndarray) -> np.ndarray:
    W = pack.weyl
    traces = [np.einsum("...ij,...ijkl->...kl", metric_inv, W),
              np.einsum("...ik,...ijkl->...jl", metric_inv, W),
              np.einsum("...il,...ijkl->...jk", metric_inv, W)]
    return np.max([np.max(np.abs(t), axis=(-2, -1)) for t in traces], axis=0)


def laplacian_xT(spec: ImmersionSpec, u, order: int = 3) -> np.ndarray:
    """Ambient vector of the rough Laplacian of the canonical field at ``u``."""
    if order < 3:
        raise OrderTooLow("the Laplacian of x^T needs third partials")
    u = np.asarray(u, dtype=float)
    fields = FieldJets(jet_field(spec, np.atleast_2d(u), order))
    lap = fields.laplacian_xT_chart.value
    amb = np.einsum("bak,bk->ba", fields.T.value, lap)
    return amb[0] if u.ndim == 1 else amb


def onb_coefficients(frame: GeometryFrame) -> np.ndarray:
    """Chart components ``B`` of the orthonormal tangent frame, ``e_a = T B[:, a]``."""
    rhs = np.einsum("...al,...ab->...lb", frame.tangent_basis, frame.onb_tangent)
    return frame.metric_inv @ rhs


def to_orthonormal(frame: GeometryFrame, form: np.ndarray) -> np.ndarray:
    """Components of a symmetric 2-form in the orthonormal tangent frame."""
    B = onb_coefficients(frame)
    return np.swapaxes(B, -1, -2) @ form @ B


def traceless_norm(frame: GeometryFrame, form: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Frobenius norm of ``form - factor * g`` in the orthonormal frame."""
    dev = to_orthonormal(frame, form - factor[..., None, None] * frame.metric)
    return np.linalg.norm(dev, axis=(-2, -1))


def covariant_derivative_xT(jet: JetPoint, frame: GeometryFrame, split: PositionSplit) -> np.ndarray:
    """``C[k, i] = (nabla_i x^T)^k`` by differentiating the chart components of ``x^T``.

    Uses only first and second partials; no second fundamental form is involved.
    """
    T, d2, x = frame.tangent_basis, np.asarray(jet.d2), split.x
    v = split.xT_chart
    # d_i <x, f_l> = <f_li, x> + g_li ; d_i g_ab = <f_ai, f_b> + <f_a, f_bi>
    dr = np.einsum("...ali,...a->...li", d2, x) + frame.metric
    dG = np.einsum("...aki,...al->...kli", d2, T)
    dG = dG + np.swapaxes(dG, -3, -2)
    dv = np.einsum("...kl,...li->...ki", frame.metric_inv,
                   dr - np.einsum("...abi,...b->...ai", dG, v))
    return dv + np.einsum("...kij,...j->...ki", frame.christoffel, v)


def gauss_formula_residual(jet: JetPoint, frame: GeometryFrame) -> np.ndarray:
    """Max-abs of ``d2_ij - gamma^k_ij f_k - h_ij`` per point."""
    recon = np.einsum("...ak,...kij->...aij", frame.tangent_basis, frame.christoffel) + frame.sff_ambient
    return np.max(np.abs(np.asarray(jet.d2) - recon), axis=(-3, -2, -1))


def weingarten_residual(fields: FieldJets, frame: GeometryFrame) -> np.ndarray:
    """Tangential part of the derivative of a unit normal field against ``-A_xi``.

    The normal field is the normalised normal projection of the ambient basis
    vector that is most normal at each point.
    """
    m = fields.m
    T, Ginv = fields.T, fields.Ginv
    proj = Jet.constant(np.broadcast_to(np.eye(m), T.shape[:-2] + (m, m)), T.n, T.order) \
        - contract("ak,kl->al", T, contract("kl,bl->kb", Ginv, T))
    pick = np.argmax(np.linalg.norm(frame.onb_normal, axis=-1), axis=-1)
    onehot = np.eye(m)[pick]
    raw = contract("ab,b->a", proj, Jet.constant(onehot, T.n, proj.order))
    xi = contract(",a->a", contract("a,a->", raw, raw).power(-0.5), raw)
    dxi = xi.d[1]  # (P, m, n)
    tangential = np.einsum("...kl,...al,...aj->...kj", frame.metric_inv, frame.tangent_basis, dxi)
    A = shape_operator(frame, xi.value)
    return np.max(np.abs(tangential + A), axis=(-2, -1))
