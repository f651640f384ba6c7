"""Named immersions. Each entry renders source text and goes through :func:`parse`."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .dsl import ImmersionSpec, parse
from .errors import ConfigError, MissingParameter, UnknownCatalogEntry

REQUIRED = object()
_GRID_BY_DIM = {1: 24, 2: 12, 3: 6, 4: 4}


@dataclass(frozen=True)
class Entry:
    name: str
    description: str
    defaults: Mapping[str, object]
    build: Callable[[dict], str]


def _grid(n: int) -> str:
    return f"grid {_GRID_BY_DIM.get(n, 3)};"


def _num(value: float) -> str:
    return repr(float(value))


def _sphere(p: dict) -> str:
    n = int(p["n"])
    center = tuple(p["center"]) if p["center"] is not None else (0.0,) * (n + 1)
    if len(center) != n + 1:
        raise ConfigError(f"center needs {n + 1} coordinates, got {len(center)}")
    lines = [f"dim {n} -> {n + 1};", f"param r = {_num(p['r'])};"]
    lines += [f"param c{i + 1} = {_num(c)};" for i, c in enumerate(center) if c != 0.0]
    lines.append("domain u1 = [-pi, pi];")
    lines += [f"domain u{k} = [-pi/2, pi/2];" for k in range(2, n + 1)]
    lines.append(_grid(n))

    def tail(start):  # cos(u_start) * ... * cos(u_n)
        return "".join(f"*cos(u{j})" for j in range(start, n + 1))

    exprs = [f"r*cos(u1){tail(2)}", f"r*sin(u1){tail(2)}"]
    exprs += [f"r*sin(u{k}){tail(k + 1)}" for k in range(2, n + 1)]
    for i, e in enumerate(exprs):
        shift = f"c{i + 1} + " if center[i] != 0.0 else ""
        lines.append(f"x{i + 1} = {shift}{e};")
    return "\n".join(lines)


def _subspace(p: dict) -> str:
    n, m = int(p["n"]), int(p["m"])
    lines = [f"dim {n} -> {m};"] + [f"domain u{i} = [-2, 2];" for i in range(1, n + 1)]
    lines.append(_grid(n))
    lines += [f"x{i} = u{i};" if i <= n else f"x{i} = 0;" for i in range(1, m + 1)]
    return "\n".join(lines)


def _plane_offset(p: dict) -> str:
    n = int(p["n"])
    lines = [f"dim {n} -> {n + 1};", f"param c = {_num(p['c'])};"]
    lines += [f"domain u{i} = [-2, 2];" for i in range(1, n + 1)]
    lines.append(_grid(n))
    lines += [f"x{i} = u{i};" for i in range(1, n + 1)] + [f"x{n + 1} = c;"]
    return "\n".join(lines)


def _cylinder(p: dict) -> str:
    return "\n".join([
        "dim 2 -> 3;", f"param r = {_num(p['r'])};",
        "domain u1 = [-pi, pi];", "domain u2 = [-1, 1];", _grid(2),
        "x1 = r*cos(u1);", "x2 = r*sin(u1);", "x3 = u2;"])


def _torus(p: dict) -> str:
    return "\n".join([
        "dim 2 -> 3;", f"param R = {_num(p['R'])};", f"param r = {_num(p['r'])};",
        "domain u1 = [-pi, pi];", "domain u2 = [-pi, pi];", _grid(2),
        "x1 = (R + r*cos(u2))*cos(u1);", "x2 = (R + r*cos(u2))*sin(u1);", "x3 = r*sin(u2);"])


def _clifford(p: dict) -> str:
    return "\n".join([
        "dim 2 -> 4;", f"param a = {_num(p['a'])};", f"param b = {_num(p['b'])};",
        "domain u1 = [-pi, pi];", "domain u2 = [-pi, pi];", _grid(2),
        "x1 = a*cos(u1);", "x2 = a*sin(u1);", "x3 = b*cos(u2);", "x4 = b*sin(u2);"])


def _flat_torus(p: dict) -> str:
    k = int(p["k"])
    lines = [f"dim {k} -> {2 * k};", f"param r = {_num(p['r'])};"]
    lines += [f"domain u{i} = [-pi, pi];" for i in range(1, k + 1)]
    lines.append(_grid(k))
    for i in range(1, k + 1):
        lines += [f"x{2 * i - 1} = r*cos(u{i});", f"x{2 * i} = r*sin(u{i});"]
    return "\n".join(lines)


def _helix(p: dict) -> str:
    return "\n".join([
        "dim 1 -> 3;", f"param a = {_num(p['a'])};", f"param b = {_num(p['b'])};",
        "domain u1 = [-pi, pi];", _grid(1),
        "x1 = a*cos(u1);", "x2 = a*sin(u1);", "x3 = b*u1;"])


def _ellipse(p: dict) -> str:
    return "\n".join([
        "dim 1 -> 2;", f"param a = {_num(p['a'])};", f"param b = {_num(p['b'])};",
        "domain u1 = [-pi, pi];", _grid(1),
        "x1 = a*cos(u1);", "x2 = b*sin(u1);"])


def _graph4(p: dict) -> str:
    return "\n".join([
        "dim 4 -> 6;", f"param e = {_num(p['eps'])};",
        *[f"domain u{i} = [-0.5, 0.5];" for i in range(1, 5)], _grid(4),
        "x1 = u1;", "x2 = u2;", "x3 = u3;", "x4 = u4;",
        "x5 = e*(u1^2 + 2*u2*u3 - u4^2 + u1*u2*u4);",
        "x6 = e*(u2^2 - u1*u4 + 3*u3^2 + sin(u1*u3));"])


ENTRIES: dict[str, Entry] = {e.name: e for e in [
    Entry("sphere", "round n-sphere of radius r, centred at `center` (origin by default)",
          {"n": 2, "r": 1.0, "center": None}, _sphere),
    Entry("sphere_offcenter", "round n-sphere of radius r centred away from the origin",
          {"n": 2, "r": 1.0, "center": (0.5, 0.0, 0.0)}, _sphere),
    Entry("subspace", "linear n-subspace through the origin of E^m",
          {"n": 2, "m": 3}, _subspace),
    Entry("plane_offset", "affine hyperplane x_{n+1} = c", {"n": 2, "c": REQUIRED}, _plane_offset),
    Entry("cylinder", "circular cylinder of radius r in E^3", {"r": 1.0}, _cylinder),
    Entry("torus", "torus of revolution with radii R > r", {"R": 2.0, "r": 1.0}, _torus),
    Entry("clifford_torus", "product of circles of radii a and b in E^4",
          {"a": 1.0, "b": 1.0}, _clifford),
    Entry("flat_torus", "product of k circles of radius r in E^(2k)", {"k": 4, "r": 1.0}, _flat_torus),
    Entry("helix", "circular helix (a cos t, a sin t, b t)", {"a": 1.0, "b": 1.0}, _helix),
    Entry("ellipse", "plane ellipse with semi-axes a, b", {"a": 2.0, "b": 1.0}, _ellipse),
    Entry("graph4", "4-dimensional quadratic-plus graph in E^6", {"eps": 0.5}, _graph4),
]}


def catalog_source(name: str, params: Mapping[str, object] | None = None) -> str:
    try:
        entry = ENTRIES[name]
    except KeyError:
        raise UnknownCatalogEntry(f"no catalog entry {name!r}; known: {', '.join(ENTRIES)}") from None
    merged = dict(entry.defaults)
    for key, value in (params or {}).items():
        if key not in entry.defaults:
            raise ConfigError(f"{name} has no parameter {key!r}")
        merged[key] = value
    missing = [k for k, v in merged.items() if v is REQUIRED]
    if missing:
        raise MissingParameter(f"{name} needs parameter(s): {', '.join(missing)}")
    if name == "sphere_offcenter" and "n" in (params or {}) and "center" not in (params or {}):
        merged["center"] = (0.5,) + (0.0,) * int(merged["n"])
    return entry.build(merged)


def catalog(name: str, params: Mapping[str, object] | None = None) -> ImmersionSpec:
    return parse(catalog_source(name, params), label=name)


def list_catalog() -> list[Entry]:
    return list(ENTRIES.values())
