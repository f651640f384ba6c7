"""Command-line front end.

Exit codes: 0 when every asserted check passes, 1 when some fail (the report is
still written), 2 for unreadable input or bad configuration.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

from .catalog import REQUIRED, catalog, list_catalog
from .dsl import parse
from .errors import CanonFieldError, ConfigError
from .report import FORMATS, SUITES, RunConfig, analyze, write_report
from .verification import verify_all

OUT_ENV = "CANONFIELD_OUT"
DEFAULT_OUT = "canonfield-out"


def _parse_value(text: str):
    parts = [p.strip() for p in text.split(",")]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"parameter value {text!r} is not numeric") from None
    return values[0] if len(values) == 1 else values


def _parse_params(items) -> dict:
    params = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--param expects NAME=VALUE, got {item!r}")
        params[key.strip()] = _parse_value(value)
    return params


def _parse_grid(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(g) for g in str(text).split(","))
    except ValueError:
        raise ConfigError(f"grid must be comma-separated integers, got {text!r}") from None


def _float(text, name: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {text!r}") from None


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines mirroring the long flags; ``param.NAME = value`` sets parameters."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from None
    out: dict = {"params": {}}
    known = {"input", "suite", "grid", "tol", "fd-tol", "fd-check", "seed", "out", "format"}
    for key, value in parser["run"].items():
        key = key.replace("_", "-")
        if key.startswith("param."):
            out["params"][key[6:]] = _parse_value(value)
        elif key in known:
            out[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return out


def build_config(args) -> RunConfig:
    file = read_config_file(args.config) if args.config else {"params": {}}
    params = dict(file["params"])
    params.update(_parse_params(args.param))
    if args.suite:
        suites = tuple(args.suite)
    elif "suite" in file:
        suites = tuple(s.strip() for s in file["suite"].split(",") if s.strip())
    else:
        suites = SUITES
    fd_check = args.fd_check or file.get("fd-check", "false").strip().lower() in ("1", "true", "yes")
    seed = args.seed if args.seed is not None else file.get("seed", 0)
    try:
        seed = int(seed)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None
    out = args.out or file.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT
    return RunConfig(
        input=args.input or file.get("input") or "",
        params=params,
        suites=suites,
        grid=_parse_grid(args.grid if args.grid is not None else file.get("grid")),
        tol=_float(args.tol if args.tol is not None else file.get("tol", 1e-8), "tol"),
        fd_tol=_float(args.fd_tol if args.fd_tol is not None else file.get("fd-tol", 1e-5), "fd-tol"),
        fd_check=fd_check,
        seed=seed,
        out=out,
        format=args.format or file.get("format", "json"),
    ).validate()


def load_spec(config: RunConfig):
    if not config.input:
        raise ConfigError("no input given (a spec file or catalog:NAME)")
    if config.input.startswith("catalog:"):
        return catalog(config.input[len("catalog:"):], config.params)
    path = Path(config.input)
    try:
        source = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read spec file: {exc}") from None
    params = dict(config.params)
    for key, value in params.items():
        if isinstance(value, tuple):
            raise ConfigError(f"parameter {key} must be a single number for a spec file")
    return parse(source, params or None, label=path.stem)


def _cmd_analyze(args) -> int:
    config = build_config(args)
    spec = load_spec(config)
    report = analyze(spec, config)
    for path in write_report(report, config.out, config.format):
        print(f"wrote {path}")
    for name, suite in report.suites.items():
        counts = {}
        for c in suite.checks:
            key = c.status if c.asserted or c.status in ("info", "skipped") else "diagnostic"
            counts[key] = counts.get(key, 0) + 1
        summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
        print(f"{name}: {summary}")
    for finding in report.findings:
        print(f"finding [{finding['id']}]: {finding['message']}")
    for failure in report.failures:
        print(f"FAILED {failure}")
    return report.exit_code


def _cmd_catalog(args) -> int:
    for entry in list_catalog():
        defaults = ", ".join(f"{k}={'<required>' if v is REQUIRED else v}"
                             for k, v in entry.defaults.items())
        print(f"{entry.name:18s} {entry.description}  [{defaults}]")
    return 0


def _cmd_verify(args) -> int:
    results, text = verify_all(args.seed)
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify.json"
    path.write_text(text)
    for c in results:
        print(c.line())
    print(f"wrote {path}")
    return 0 if all(c.passed for c in results) else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canonfield",
                                     description="Check the canonical vector field of a Euclidean submanifold.")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="run analysis suites on a spec file or catalog entry")
    an.add_argument("input", nargs="?", help="spec file or catalog:NAME")
    an.add_argument("--param", action="append", metavar="NAME=VALUE",
                    help="parameter override; comma-separate vector values")
    an.add_argument("--suite", action="append", choices=SUITES)
    an.add_argument("--grid", help="points per axis, e.g. 12 or 8,16")
    an.add_argument("--tol", type=float)
    an.add_argument("--fd-tol", type=float)
    an.add_argument("--fd-check", action="store_true", help="cross-check with finite-difference jets")
    an.add_argument("--seed", type=int)
    an.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    an.add_argument("--format", choices=FORMATS)
    an.add_argument("--config", help="flat key = value file; flags override it")
    an.set_defaults(func=_cmd_analyze)

    cat = sub.add_parser("catalog", help="catalog operations")
    cat_sub = cat.add_subparsers(dest="action", required=True)
    cat_sub.add_parser("list", help="list catalog entries").set_defaults(func=_cmd_catalog)

    ver = sub.add_parser("verify-all", help="run the full acceptance suite")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except CanonFieldError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
