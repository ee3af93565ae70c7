"""Log-log rate fitting for empirical convergence orders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fracspike.errors import ConfigError

__all__ = ["RateFit", "fit_rate"]


@dataclass(frozen=True)
class RateFit:
    """value ~ C * eps^slope; pairs stored with eps strictly decreasing."""

    pairs: tuple
    slope: float
    intercept: float
    r_squared: float


def fit_rate(pairs) -> RateFit:
    """Least squares on (log eps, log value).

    Needs at least three pairs with positive entries and distinct eps.
    r_squared is reported even when the fit is poor; a constant sequence
    fits slope 0 exactly and reports r_squared = 1.
    """
    pts = [(float(e), float(v)) for e, v in pairs]
    if len(pts) < 3:
        raise ConfigError(f"rate fit needs at least 3 pairs, got {len(pts)}")
    for e, v in pts:
        if not e > 0:
            raise ConfigError(f"rate fit needs positive eps, got {e}")
        if not v > 0:
            raise ConfigError(f"rate fit needs positive values, got {v} "
                              f"at eps = {e}")
    pts.sort(key=lambda ev: -ev[0])
    eps = np.array([e for e, _ in pts])
    if np.any(np.diff(eps) >= 0):
        raise ConfigError("rate fit needs distinct eps values")
    vals = np.array([v for _, v in pts])
    x, y = np.log(eps), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(pairs=tuple(pts), slope=float(slope),
                   intercept=float(intercept), r_squared=r2)
