"""Chart grids and the per-grid bundle of jets, frames and splits used by every check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dsl import ImmersionSpec
from .fields import FieldJets
from .geometry import (RANK_TOLERANCE, GeometryFrame, PositionSplit, build_frame,
                       point_scale, position_split, rank_ratio)
from .jets import Jet, JetPoint, jet_field


def grid_points(spec: ImmersionSpec, grid=None) -> np.ndarray:
    """Cell-centred grid: ``N`` samples per axis, half a cell in from each chart boundary.

    Points are ordered lexicographically (last axis fastest). A single count
    applies to every axis.
    """
    grid = spec.grid if grid is None else grid
    grid = (int(grid),) if np.isscalar(grid) else tuple(int(g) for g in grid)
    if len(grid) == 1 and spec.n > 1:
        grid = grid * spec.n
    axes = [lo + (np.arange(N) + 0.5) * (hi - lo) / N for (lo, hi), N in zip(spec.domain, grid)]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, spec.n)


@dataclass
class Sample:
    """Everything computed once per grid. Arrays are indexed by valid point."""

    spec: ImmersionSpec
    u: np.ndarray
    X: Jet
    excluded: list[list[float]] = field(default_factory=list)

    @cached_property
    def jet(self) -> JetPoint:
        d = self.X.d
        n, m = self.spec.n, self.spec.m
        batch = len(self.u)
        arrays = [d[k] if k < len(d) else np.full((batch, m) + (n,) * k, np.nan) for k in range(4)]
        return JetPoint(self.u, *arrays, min(self.X.order, 3))

    @cached_property
    def frame(self) -> GeometryFrame:
        return build_frame(self.jet)

    @cached_property
    def split(self) -> PositionSplit:
        return position_split(self.jet, self.frame)

    @cached_property
    def fields(self) -> FieldJets:
        return FieldJets(self.X)

    @cached_property
    def scale(self) -> np.ndarray:
        return point_scale(self.jet)

    @property
    def size(self) -> int:
        return len(self.u)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def m(self) -> int:
        return self.spec.m

    def with_order(self, order: int) -> "Sample":
        """Same points, jets of a different order."""
        return Sample(self.spec, self.u, jet_field(self.spec, self.u, order), list(self.excluded))


def sample_points(spec: ImmersionSpec, points, order: int = 3) -> Sample:
    """Evaluate jets at ``points`` and drop non-immersion points (listed in ``excluded``)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    X = jet_field(spec, points, order)
    ratio = rank_ratio(X.d[1])
    keep = ratio >= RANK_TOLERANCE
    excluded = points[~keep].tolist()
    if not np.all(keep):
        X = X[keep]
        points = points[keep]
    return Sample(spec, points, X, excluded)


def sample_grid(spec: ImmersionSpec, grid=None, order: int = 3) -> Sample:
    return sample_points(spec, grid_points(spec, grid), order)
