"""Geometric fields of an immersion carried as jets, so they can be differentiated.

Everything here is derived from the jet of the immersion ``X`` by exact jet
arithmetic. A field that needs ``k`` derivatives of ``X`` has order
``X.order - k``; asking for a derivative beyond that raises ``OrderTooLow``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .jets import Jet, JetPoint, contract


def jet_from_point(jet: JetPoint) -> Jet:
    """Rebuild a batched :class:`Jet` from a (possibly single-point) ``JetPoint``."""
    arrays = [jet.f, jet.d1, jet.d2, jet.d3][: jet.order + 1]
    if jet.f.ndim == 1:
        arrays = [a[None] for a in arrays]
    return Jet(arrays, jet.d1.shape[-1])


class FieldJets:
    def __init__(self, X: Jet):
        self.X = X
        self.n = X.n
        self.m = X.shape[-1]

    @property
    def order(self) -> int:
        return self.X.order

    @cached_property
    def T(self) -> Jet:
        """Coordinate tangent vectors, value ``(P, m, n)``."""
        return self.X.diff()

    @cached_property
    def G(self) -> Jet:
        return contract("ai,aj->ij", self.T, self.T)

    @cached_property
    def Ginv(self) -> Jet:
        return self.G.inv()

    @cached_property
    def second(self) -> Jet:
        """Second partials of the immersion, value ``(P, m, n, n)``."""
        return self.T.diff()

    @cached_property
    def gamma(self) -> Jet:
        """Christoffel symbols ``gamma[k, i, j]``."""
        first_kind = contract("aij,al->ijl", self.second, self.T)
        return contract("kl,ijl->kij", self.Ginv, first_kind)

    @cached_property
    def xT_chart(self) -> Jet:
        return contract("kl,l->k", self.Ginv, contract("a,al->l", self.X, self.T))

    @cached_property
    def xT(self) -> Jet:
        return contract("al,l->a", self.T, self.xT_chart)

    @cached_property
    def xN(self) -> Jet:
        return self.X - self.xT

    @cached_property
    def h(self) -> Jet:
        """Ambient-valued second fundamental form by the Gauss formula split."""
        return self.second - contract("ak,kij->aij", self.T, self.gamma)

    @cached_property
    def w(self) -> Jet:
        """Pairing of the second fundamental form with the normal part of the position."""
        return contract("aij,a->ij", self.h, self.xN)

    @cached_property
    def lie(self) -> Jet:
        """Lie derivative of the metric along the canonical field, from ``h``."""
        return self.G * 2.0 + self.w * 2.0

    @cached_property
    def phi(self) -> Jet:
        return contract("ij,ij->", self.Ginv, self.lie) / (2.0 * self.n)

    @cached_property
    def eta(self) -> Jet:
        return contract("ij,ij->", self.Ginv, self.w) / float(self.n)

    @cached_property
    def H(self) -> Jet:
        return contract("ij,aij->a", self.Ginv, self.h) / float(self.n)

    @cached_property
    def nabla_xT(self) -> Jet:
        """Covariant derivative ``C[k, i] = (nabla_i xT)^k``."""
        v = self.xT_chart
        return v.diff() + contract("kij,j->ki", self.gamma.truncate(v.order - 1), v)

    @cached_property
    def laplacian_xT_chart(self) -> Jet:
        """Rough Laplacian of the canonical field in chart components."""
        C = self.nabla_xT
        gam = self.gamma.truncate(C.order - 1)
        # second covariant derivative D[k, i, j] = (nabla_j nabla x^T)^k_i
        D = (C.diff() + contract("kjl,li->kij", gam, C)
             - contract("lji,kl->kij", gam, C))
        return contract("ij,kij->k", self.Ginv, D)

    def gradient(self, scalar: Jet) -> Jet:
        """Chart components of the gradient of a scalar field."""
        d = scalar.diff()
        return contract("ij,j->i", self.Ginv.truncate(d.order), d)

    def hessian(self, scalar: Jet) -> Jet:
        """Covariant Hessian ``f_ij - gamma^k_ij f_k``."""
        d = scalar.diff()
        dd = d.diff()
        return dd - contract("kij,k->ij", self.gamma.truncate(dd.order), d.truncate(dd.order))

    @cached_property
    def half_norm_xT(self) -> Jet:
        """``|x^T|^2 / 2`` as a scalar field."""
        v = self.xT_chart
        return contract("j,j->", contract("ij,i->j", self.G, v), v) * 0.5

    @cached_property
    def support(self) -> Jet:
        """``<x^N, H> / |H|^2``; only meaningful where ``H`` does not vanish."""
        H = self.H
        xN = self.xN.truncate(H.order)
        num = contract("a,a->", xN, H)
        den = contract("a,a->", H, H)
        safe = Jet([den.d[0].copy()] + den.d[1:], den.n)
        safe.d[0][safe.d[0] == 0.0] = np.inf
        return num / safe
