"""Truncated multivariate Taylor jets.

A :class:`Jet` stores a tensor-valued field together with all of its partial
derivatives up to a fixed order at a batch of chart points. ``d[k]`` has shape
``value_shape + (n,) * k``; the value shape normally starts with a batch axis.
Products use the Leibniz rule over index subsets and composition with scalar
functions uses Faa di Bruno's formula over set partitions, so results are
exact up to rounding for any order.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .dsl import ExprNode, ImmersionSpec
from .errors import DomainError, EvalError, OrderTooLow

_DLETTERS = "PQRSTUVW"  # derivative slots in einsum strings; value subscripts are lowercase
MAX_PUBLIC_ORDER = 3


@functools.lru_cache(maxsize=None)
def _canonical_flat(n: int, k: int) -> np.ndarray:
    idx = np.indices((n,) * k).reshape(k, -1)
    return np.ravel_multi_index(tuple(np.sort(idx, axis=0)), (n,) * k)


def symmetrize(arr: np.ndarray, n: int, k: int) -> np.ndarray:
    """Copy every entry's sorted-index representative over the last ``k`` axes.

    Makes derivative tensors bit-exactly symmetric regardless of summation order.
    """
    if k < 2:
        return arr
    lead = arr.shape[: arr.ndim - k]
    flat = arr.reshape(lead + (n ** k,))
    return flat[..., _canonical_flat(n, k)].reshape(arr.shape)


@functools.lru_cache(maxsize=None)
def _subsets(k: int) -> tuple[tuple[str, str], ...]:
    out = []
    letters = _DLETTERS[:k]
    for mask in range(1 << k):
        a = "".join(letters[i] for i in range(k) if mask >> i & 1)
        b = "".join(letters[i] for i in range(k) if not mask >> i & 1)
        out.append((a, b))
    return tuple(out)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


@functools.lru_cache(maxsize=None)
def _partitions(k: int) -> tuple[tuple[str, ...], ...]:
    letters = _DLETTERS[:k]
    return tuple(tuple("".join(letters[i] for i in block) for block in part)
                 for part in _set_partitions(list(range(k))))


def _einsum(subscripts, *operands):
    return np.einsum(subscripts, *operands, optimize=False)


class Jet:
    __slots__ = ("d", "n")

    def __init__(self, d, n: int):
        self.d = [np.asarray(a, dtype=float) for a in d]
        self.n = n

    @property
    def order(self) -> int:
        return len(self.d) - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.d[0].shape

    @property
    def value(self) -> np.ndarray:
        return self.d[0]

    @classmethod
    def constant(cls, value, n: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        return cls([value] + [np.zeros(value.shape + (n,) * k) for k in range(1, order + 1)], n)

    @classmethod
    def variables(cls, points: np.ndarray, order: int) -> list["Jet"]:
        """One jet per chart coordinate over a batch of points of shape ``(P, n)``."""
        points = np.asarray(points, dtype=float)
        batch, n = points.shape
        out = []
        for i in range(n):
            d = [points[:, i].copy()]
            if order >= 1:
                d1 = np.zeros((batch, n))
                d1[:, i] = 1.0
                d.append(d1)
            d += [np.zeros((batch,) + (n,) * k) for k in range(2, order + 1)]
            out.append(cls(d, n))
        return out

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderTooLow(f"jet has order {self.order}, {order} requested")
        return Jet(self.d[: order + 1], self.n)

    def diff(self) -> "Jet":
        """Jet of the first partials; the new value axis (last) is the derivative index."""
        if self.order < 1:
            raise OrderTooLow("cannot differentiate an order-0 jet")
        return Jet(self.d[1:], self.n)

    # -- linear structure ---------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.broadcast_to(np.asarray(other, dtype=float), self.shape),
                            self.n, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        k = min(self.order, other.order)
        return Jet([a + b for a, b in zip(self.d[: k + 1], other.d[: k + 1])], self.n)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.d], self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return contract("", self, other)
        return Jet([a * other for a in self.d], self.n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet([a / other for a in self.d], self.n)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- nonlinear elementwise maps ----------------------------------------
    def compose(self, derivs: list[np.ndarray]) -> "Jet":
        """Compose with a scalar function given its derivatives ``derivs[j] = F^(j)(value)``."""
        out = [np.asarray(derivs[0], dtype=float)]
        for k in range(1, self.order + 1):
            total = None
            for blocks in _partitions(k):
                subs = ",".join("..." + b for b in blocks) + "->..." + _DLETTERS[:k]
                term = _einsum(subs, *[self.d[len(b)] for b in blocks])
                term = term * derivs[len(blocks)][(...,) + (None,) * k]
                total = term if total is None else total + term
            out.append(symmetrize(total, self.n, k))
        return Jet(out, self.n)

    def reciprocal(self) -> "Jet":
        x = self.value
        if np.any(x == 0.0):
            raise EvalError("division by zero")
        derivs, fact = [], 1.0
        for j in range(self.order + 1):
            derivs.append((-1.0) ** j * fact * x ** (-1.0 - j))
            fact *= j + 1
        return self.compose(derivs)

    def sqrt(self) -> "Jet":
        x = self.value
        if np.any(x < 0.0):
            raise EvalError("square root of a negative number")
        if self.order >= 1 and np.any(x == 0.0):
            raise EvalError("square root is not differentiable at 0")
        return self.power(0.5)

    def power(self, p: float) -> "Jet":
        """``self ** p`` for a constant exponent."""
        x = self.value
        is_int = float(p).is_integer()
        if not is_int and np.any(x < 0.0):
            raise EvalError(f"negative base raised to non-integer power {p}")
        derivs, coef = [], 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            for j in range(self.order + 1):
                if coef == 0.0:
                    derivs.append(np.zeros_like(x))
                else:
                    term = coef * np.power(x, p - j)
                    if not np.all(np.isfinite(term)):
                        raise EvalError(f"power {p} is singular at a zero base")
                    derivs.append(term)
                coef *= p - j
        return self.compose(derivs)

    def log(self) -> "Jet":
        x = self.value
        if np.any(x <= 0.0):
            raise EvalError("logarithm of a non-positive number")
        derivs, fact = [np.log(x)], 1.0
        for j in range(1, self.order + 1):
            derivs.append((-1.0) ** (j - 1) * fact * x ** (-float(j)))
            fact *= j
        return self.compose(derivs)

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([(s, c, -s, -c)[j % 4] for j in range(self.order + 1)])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([(c, -s, -c, s)[j % 4] for j in range(self.order + 1)])

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.compose([e] * (self.order + 1))

    def inv(self) -> "Jet":
        """Matrix inverse over the last two value axes."""
        y0 = np.linalg.inv(self.d[0])
        out = [y0]
        for k in range(1, self.order + 1):
            acc = None
            for a, b in _subsets(k):
                if not a:
                    continue
                term = _einsum(f"...ab{a},...bc{b}->...ac{_DLETTERS[:k]}", self.d[len(a)], out[len(b)])
                acc = term if acc is None else acc + term
            yk = -_einsum(f"...ab,...bc{_DLETTERS[:k]}->...ac{_DLETTERS[:k]}", y0, acc)
            out.append(symmetrize(yk, self.n, k))
        return Jet(out, self.n)

    def __getitem__(self, index) -> "Jet":
        """Index the value axes (derivative axes are untouched)."""
        if not isinstance(index, tuple):
            index = (index,)
        return Jet([a[index] for a in self.d], self.n)


def contract(subscripts: str, a, b) -> Jet:
    """Leibniz product of two operands under an einsum over their value axes.

    ``subscripts`` names value axes after the leading batch axes, which are
    matched with ``...``; e.g. ``"ai,aj->ij"``. Either operand may be a
    constant ndarray, in which case its subscripts address all of its axes.
    """
    lhs, out = subscripts.split("->") if "->" in subscripts else (subscripts, None)
    sa, sb = lhs.split(",") if "," in lhs else (lhs, "")
    if out is None:
        out = ""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        raise TypeError("at least one operand must be a Jet")
    n = a.n if isinstance(a, Jet) else b.n
    if not isinstance(a, Jet):
        return Jet([_einsum(f"{sa},...{sb}{_DLETTERS[:k]}->...{out}{_DLETTERS[:k]}", a, db)
                    for k, db in enumerate(b.d)], n)
    if not isinstance(b, Jet):
        return Jet([_einsum(f"...{sa}{_DLETTERS[:k]},{sb}->...{out}{_DLETTERS[:k]}", da, b)
                    for k, da in enumerate(a.d)], n)
    order = min(a.order, b.order)
    d = []
    for k in range(order + 1):
        acc = None
        for la, lb in _subsets(k):
            term = _einsum(f"...{sa}{la},...{sb}{lb}->...{out}{_DLETTERS[:k]}",
                           a.d[len(la)], b.d[len(lb)])
            acc = term if acc is None else acc + term
        d.append(symmetrize(acc, n, k))
    return Jet(d, n)


def stack(jets: list[Jet], axis: int = -1) -> Jet:
    """Stack scalar-valued-per-batch jets into a new trailing value axis."""
    order = min(j.order for j in jets)
    n = jets[0].n
    d = []
    for k in range(order + 1):
        arrays = [j.d[k] for j in jets]
        vdim = arrays[0].ndim - k
        d.append(np.stack(arrays, axis=vdim))
    return Jet(d, n)


# -- expression evaluation --------------------------------------------------

def eval_expr(node: ExprNode, variables: list[Jet], order: int, batch: int) -> Jet:
    n = len(variables)
    kind = node.kind
    if kind == "var":
        return variables[node.payload]
    if kind in ("const", "param"):
        value = node.payload if kind == "const" else node.payload[1]
        return Jet.constant(np.full(batch, float(value)), n, order)
    args = [eval_expr(c, variables, order, batch) for c in node.children]
    if kind == "add":
        return args[0] + args[1]
    if kind == "sub":
        return args[0] - args[1]
    if kind == "mul":
        return args[0] * args[1]
    if kind == "div":
        return args[0] / args[1]
    if kind == "neg":
        return -args[0]
    if kind == "pow":
        base, expo = args
        if _is_constant(node.children[1]):
            p = float(expo.value.flat[0]) if expo.value.size else 0.0
            return base.power(p)
        if np.any(base.value <= 0.0):
            raise EvalError("variable exponent requires a positive base")
        return (expo * base.log()).exp()
    return getattr(args[0], kind)()


@functools.lru_cache(maxsize=4096)
def _is_constant(node: ExprNode) -> bool:
    return all(sub.kind != "var" for sub in node.walk())


def jet_field(spec: ImmersionSpec, points, order: int = 3) -> Jet:
    """Jet of the immersion over ``points`` (shape ``(P, n)``); value shape ``(P, m)``.

    No domain check and no order cap; internal callers use order 4 for the
    Hessian of derived scalar fields.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != spec.n:
        raise DomainError(f"expected {spec.n} chart coordinates, got {points.shape[1]}")
    variables = Jet.variables(points, order)
    comps = [eval_expr(c, variables, order, len(points)) for c in spec.components]
    jet = stack(comps)
    jet.d = [symmetrize(a, spec.n, k) for k, a in enumerate(jet.d)]
    return jet


# -- public per-point view ------------------------------------------------------

@dataclass(frozen=True)
class JetPoint:
    """Position and partials of the immersion at one chart point (or a batch).

    Arrays may carry leading batch axes. Orders above ``order`` are NaN-filled
    and must not be used.
    """

    u: np.ndarray
    f: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    order: int

    def has(self, order: int) -> bool:
        return order <= self.order

    def __getitem__(self, index) -> "JetPoint":
        return JetPoint(self.u[index], self.f[index], self.d1[index], self.d2[index],
                        self.d3[index], self.order)


def check_domain(spec: ImmersionSpec, points: np.ndarray) -> None:
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    outside = np.any((points < lo) | (points > hi), axis=-1)
    if np.any(outside):
        bad = points[np.argmax(outside)]
        raise DomainError(f"chart point {bad.tolist()} lies outside the domain box")


def eval_jet(spec: ImmersionSpec, u, order: int = 3) -> JetPoint:
    """Exact jet of the immersion at ``u`` (shape ``(n,)`` or ``(P, n)``)."""
    if order not in (1, 2, 3):
        raise OrderTooLow(f"order must be 1, 2 or 3, got {order}")
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    points = np.atleast_2d(u)
    if points.shape[-1] != spec.n:
        raise DomainError(f"expected {spec.n} chart coordinates, got {points.shape[-1]}")
    check_domain(spec, points)
    jet = jet_field(spec, points, order)
    return _to_point(points, jet, spec.n, spec.m, order, single)


def _to_point(points, jet: Jet, n: int, m: int, order: int, single: bool) -> JetPoint:
    batch = len(points)
    arrays = []
    for k in range(4):
        if k <= order:
            arrays.append(jet.d[k])
        else:
            arrays.append(np.full((batch, m) + (n,) * k, np.nan))
    if single:
        points = points[0]
        arrays = [a[0] for a in arrays]
    for a in arrays:
        a.setflags(write=False)
    return JetPoint(points, arrays[0], arrays[1], arrays[2], arrays[3], order)


# -- finite differences -------------------------------------------------------

def central_difference(fn, points: np.ndarray, step: float) -> np.ndarray:
    """Central differences of an array-valued ``fn(points)`` along each chart axis.

    Returns an array with a new trailing axis of length ``n``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cols = []
    for i in range(points.shape[1]):
        e = np.zeros(points.shape[1])
        e[i] = step
        cols.append((fn(points + e) - fn(points - e)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def fd_jet(spec: ImmersionSpec, u, step: float = 1e-4) -> JetPoint:
    """Order-2 jet built purely from values of the immersion by central differences."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    points = np.atleast_2d(u)

    def values(p):
        return jet_field(spec, p, 0).value

    f = values(points)
    d1 = central_difference(values, points, step)
    n = spec.n
    d2 = np.empty(f.shape + (n, n))
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        ei = np.zeros(n)
        ej = np.zeros(n)
        ei[i] = step
        ej[j] = step
        if i == j:
            val = (values(points + ei) - 2.0 * f + values(points - ei)) / step ** 2
        else:
            val = (values(points + ei + ej) - values(points + ei - ej)
                   - values(points - ei + ej) + values(points - ei - ej)) / (4.0 * step ** 2)
        d2[..., i, j] = val
        d2[..., j, i] = val
    jet = Jet([f, d1, d2], n)
    return _to_point(points, jet, n, spec.m, 2, single)
