"""Named residual series with a tolerance verdict; the unit every report is built from."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASS, FAIL, SKIPPED, INFO = "pass", "fail", "skipped", "info"


@dataclass
class Check:
    """One residual series over the grid.

    ``values`` is per valid point (NaN where the quantity does not apply).
    When ``scaled`` is set the series has already been divided by the point
    scale, so the comparison is ``values <= tol`` either way. Checks with
    ``asserted=False`` are diagnostics and never count as failures.
    """

    name: str
    anchor: str
    tol: float | None
    values: np.ndarray | None = None
    status: str = INFO
    asserted: bool = True
    scaled: bool = False
    max: float | None = None
    mean: float | None = None
    argmax: list[float] | None = None
    reason: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    @property
    def failed(self) -> bool:
        return self.asserted and self.status == FAIL


def residual_check(name: str, anchor: str, values, tol: float, u: np.ndarray, *,
                   scale: np.ndarray | None = None, asserted: bool = True, lower: bool = False,
                   **extra) -> Check:
    """Build a check from a per-point series. ``lower`` flips the test to ``min >= tol``."""
    values = np.asarray(values, dtype=float)
    if scale is not None:
        values = values / scale
    finite = np.isfinite(values)
    if not finite.any():
        return Check(name, anchor, tol, values, PASS, asserted, scale is not None,
                     reason="no applicable points", extra=extra)
    masked = np.where(finite, values, -np.inf)
    idx = int(np.argmax(masked))
    mx = float(values[idx])
    mean = float(values[finite].mean())
    if lower:
        ok = float(values[finite].min()) >= tol
    else:
        ok = mx <= tol
    return Check(name, anchor, tol, values, PASS if ok else FAIL, asserted, scale is not None,
                 mx, mean, [float(x) for x in u[idx]], extra=extra)


def skipped(name: str, anchor: str, reason: str, tol: float | None = None) -> Check:
    return Check(name, anchor, tol, None, SKIPPED, True, reason=reason)


def info(name: str, anchor: str, values=None, u=None, **extra) -> Check:
    if values is None:
        return Check(name, anchor, None, None, INFO, False, extra=extra)
    chk = residual_check(name, anchor, values, np.inf, u, asserted=False, **extra)
    chk.status, chk.tol = INFO, None
    return chk
