"""Trapping potentials V with analytic gradients and Hessians.

Potentials are evaluated on per-axis coordinate arrays (broadcastable, the
same convention as Grid.coords), so a single call serves both isolated
points, V(*q), and whole grids, V(*[eps * c for c in grid.coords()]). All
builtin families are bounded with inf V > 0 on any box once their parameter
constraints hold; positivity for sign-indefinite bump sums is checked on the
target grid instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from fracspike.errors import ConfigError
from fracspike.grid import Grid

__all__ = ["Potential", "builtin_potentials", "potential_from_config",
           "validate_positive"]


@dataclass(frozen=True)
class Potential:
    """Bounded potential with analytic first and (optionally) second derivatives.

    eval/grad/hess all take per-axis coordinate arrays and broadcast; grad
    returns one array per component, hess a dim x dim nested list.
    """

    kind: str
    parameters: dict = field(default_factory=dict)
    _eval: Callable = None
    _grad: Callable = None
    _hess: Optional[Callable] = None

    def __call__(self, *axes):
        return self._eval(*axes)

    def grad(self, *axes):
        return self._grad(*axes)

    def hess(self, *axes):
        if self._hess is None:
            raise ConfigError(f"potential kind {self.kind!r} has no Hessian")
        return self._hess(*axes)

    @property
    def has_hess(self) -> bool:
        return self._hess is not None

    def on_grid(self, grid: Grid, epsilon: float) -> np.ndarray:
        """Samples of V(eps * x) over the grid."""
        vals = self(*[epsilon * c for c in grid.coords()])
        return np.broadcast_to(vals, grid.shape).astype(float, copy=True)

    def __repr__(self):
        return f"Potential(kind={self.kind!r}, parameters={self.parameters})"


def validate_positive(pot: Potential, grid: Grid, epsilon: float) -> float:
    """Return inf V(eps x) over the grid, raising if it is not positive."""
    m = float(np.min(pot.on_grid(grid, epsilon)))
    if not m > 0:
        raise ConfigError(
            f"potential {pot.kind!r} is not positive on the grid: min = {m:.3e}")
    return m


def _constant(lam: float) -> Potential:
    if not lam > 0:
        raise ConfigError(f"constant potential must be positive, got {lam}")

    def ev(*axes):
        return lam + 0.0 * sum(np.asarray(a, dtype=float) for a in axes)

    def gr(*axes):
        z = 0.0 * sum(np.asarray(a, dtype=float) for a in axes)
        return [z.copy() for _ in axes]

    def he(*axes):
        z = 0.0 * sum(np.asarray(a, dtype=float) for a in axes)
        return [[z.copy() for _ in axes] for _ in axes]

    return Potential("constant", {"lam": lam}, ev, gr, he)


def _well(a: float, b: float) -> Potential:
    # 0 < b < a keeps inf V = a - b > 0; unique nondegenerate minimum at 0
    if not (0 < b < a):
        raise ConfigError(f"well requires 0 < b < a, got a={a}, b={b}")

    def ev(*axes):
        r2 = sum(np.asarray(x, dtype=float) ** 2 for x in axes)
        return a - b / (1.0 + r2)

    def gr(*axes):
        xs = [np.asarray(x, dtype=float) for x in axes]
        d2 = (1.0 + sum(x ** 2 for x in xs)) ** 2
        return [2.0 * b * x / d2 for x in xs]

    def he(*axes):
        xs = [np.asarray(x, dtype=float) for x in axes]
        r2 = sum(x ** 2 for x in xs)
        d3 = (1.0 + r2) ** 3
        out = []
        for i, xi in enumerate(xs):
            row = []
            for j, xj in enumerate(xs):
                dij = 1.0 if i == j else 0.0
                row.append(2.0 * b * (dij * (1.0 + r2) - 4.0 * xi * xj) / d3)
            out.append(row)
        return out

    return Potential("well", {"a": a, "b": b}, ev, gr, he)


def _gaussian_bumps(a: float, bumps: Sequence[dict]) -> Potential:
    """a + sum_i b_i exp(-|x - c_i|^2 / sigma_i^2); b_i of either sign."""
    if not a > 0:
        raise ConfigError(f"gaussian_bumps base level must be positive, got {a}")
    parsed = []
    for i, bump in enumerate(bumps):
        try:
            b = float(bump["b"])
            c = np.atleast_1d(np.asarray(bump["center"], dtype=float))
            sig = float(bump["sigma"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bump {i}: expected b, center, sigma ({exc})")
        if not sig > 0:
            raise ConfigError(f"bump {i}: sigma must be positive, got {sig}")
        parsed.append((b, c, sig))
    # sufficient positivity check; sign-indefinite sums are re-checked on-grid
    floor = a + sum(min(b, 0.0) for b, _, _ in parsed)
    if floor <= 0:
        import logging
        logging.getLogger(__name__).warning(
            "gaussian_bumps: conservative positivity bound fails (%.3g); "
            "relying on the on-grid check", floor)

    def _dim_check(axes):
        for b, c, sig in parsed:
            if c.size != len(axes):
                raise ConfigError(
                    f"bump center has {c.size} components, coordinates have "
                    f"{len(axes)}")

    def ev(*axes):
        _dim_check(axes)
        xs = [np.asarray(x, dtype=float) for x in axes]
        out = a + 0.0 * sum(xs)
        for b, c, sig in parsed:
            r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c))
            out = out + b * np.exp(-r2 / sig ** 2)
        return out

    def gr(*axes):
        _dim_check(axes)
        xs = [np.asarray(x, dtype=float) for x in axes]
        comps = [0.0 * sum(xs) for _ in xs]
        for b, c, sig in parsed:
            r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c))
            e = b * np.exp(-r2 / sig ** 2)
            for j, (x, ci) in enumerate(zip(xs, c)):
                comps[j] = comps[j] - 2.0 * (x - ci) / sig ** 2 * e
        return comps

    def he(*axes):
        _dim_check(axes)
        xs = [np.asarray(x, dtype=float) for x in axes]
        dim = len(xs)
        zero = 0.0 * sum(xs)
        out = [[zero.copy() for _ in range(dim)] for _ in range(dim)]
        for b, c, sig in parsed:
            r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c))
            e = b * np.exp(-r2 / sig ** 2)
            for i in range(dim):
                di = xs[i] - c[i]
                for j in range(dim):
                    dj = xs[j] - c[j]
                    dij = 1.0 if i == j else 0.0
                    out[i][j] = out[i][j] + e * (
                        4.0 * di * dj / sig ** 4 - 2.0 * dij / sig ** 2)
        return out

    return Potential("gaussian_bumps",
                     {"a": a, "bumps": [
                         {"b": b, "center": c.tolist(), "sigma": sig}
                         for b, c, sig in parsed]},
                     ev, gr, he)


def _double_well(a: float, b: float) -> Potential:
    """a + b (1 - |x|^2)^2 / (1 + |x|^4): wells on |x| = 1, hump at 0.

    With t = |x|^2 the radial part f(t) = (1-t)^2/(1+t^2) has
    f'(t) = -2(1-t^2)/(1+t^2)^2 and f''(t) = 4t(3-t^2)/(1+t^2)^3, so the
    gradient and Hessian are closed-form.
    """
    if not (a > 0 and b > 0):
        raise ConfigError(f"double_well requires a, b > 0, got a={a}, b={b}")

    def _t(xs):
        return sum(x ** 2 for x in xs)

    def _fp(t):
        return -2.0 * (1.0 - t ** 2) / (1.0 + t ** 2) ** 2

    def ev(*axes):
        xs = [np.asarray(x, dtype=float) for x in axes]
        t = _t(xs)
        return a + b * (1.0 - t) ** 2 / (1.0 + t ** 2)

    def gr(*axes):
        xs = [np.asarray(x, dtype=float) for x in axes]
        fp = _fp(_t(xs))
        return [2.0 * b * fp * x for x in xs]

    def he(*axes):
        xs = [np.asarray(x, dtype=float) for x in axes]
        t = _t(xs)
        fp = _fp(t)
        fpp = 4.0 * t * (3.0 - t ** 2) / (1.0 + t ** 2) ** 3
        out = []
        for i, xi in enumerate(xs):
            row = []
            for j, xj in enumerate(xs):
                dij = 1.0 if i == j else 0.0
                row.append(2.0 * b * (2.0 * fpp * xi * xj + fp * dij))
            out.append(row)
        return out

    return Potential("double_well", {"a": a, "b": b}, ev, gr, he)


def _user_table(axes: Sequence[np.ndarray], values: np.ndarray) -> Potential:
    """Tabulated potential; linear interpolation, gradient from the table.

    C^0 only: gradients come from central differences of the table and are
    interpolated the same way. No Hessian. Evaluation clamps to the table
    edges outside its box.
    """
    from scipy.interpolate import RegularGridInterpolator

    nodes = [np.asarray(ax, dtype=float) for ax in axes]
    vals = np.asarray(values, dtype=float)
    if vals.shape != tuple(len(ax) for ax in nodes):
        raise ConfigError(
            f"table shape {vals.shape} does not match axes "
            f"{tuple(len(ax) for ax in nodes)}")
    if not np.all(np.isfinite(vals)):
        raise ConfigError("table contains non-finite values")
    if not np.min(vals) > 0:
        raise ConfigError(f"table minimum {np.min(vals):.3e} is not positive")

    def _interp(table):
        return RegularGridInterpolator(nodes, table, method="linear",
                                       bounds_error=False, fill_value=None)

    f = _interp(vals)
    grads = np.gradient(vals, *nodes) if len(nodes) > 1 else \
        [np.gradient(vals, nodes[0])]
    gfs = [_interp(g) for g in grads]

    def _pts(axes_in):
        xs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in axes_in])
        shape = xs[0].shape
        lo = [ax[0] for ax in nodes]
        hi = [ax[-1] for ax in nodes]
        cols = [np.clip(x, l, h).ravel() for x, l, h in zip(xs, lo, hi)]
        return np.column_stack(cols), shape

    def ev(*axes_in):
        pts, shape = _pts(axes_in)
        return f(pts).reshape(shape)

    def gr(*axes_in):
        pts, shape = _pts(axes_in)
        return [g(pts).reshape(shape) for g in gfs]

    return Potential("user_table",
                     {"axes": [ax.tolist() for ax in nodes]},
                     ev, gr, None)


_BUILDERS = {
    "constant": _constant,
    "well": _well,
    "gaussian_bumps": _gaussian_bumps,
    "double_well": _double_well,
    "user_table": _user_table,
}


def builtin_potentials(name: str, **params) -> Potential:
    """Construct a builtin potential family by name."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown potential kind {name!r}; known: {sorted(_BUILDERS)}")
    return builder(**params)


def potential_from_config(cfg: dict) -> Potential:
    """Build a Potential from a scenario dictionary {'kind': ..., **params}."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("potential config must be a dict with a 'kind' key")
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    if kind == "user_table":
        try:
            axes = [np.asarray(a, dtype=float) for a in cfg.pop("axes")]
            values = np.asarray(cfg.pop("values"), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"user_table needs 'axes' and 'values' ({exc})")
        if cfg:
            raise ConfigError(f"unknown user_table keys: {sorted(cfg)}")
        return _user_table(axes, values)
    try:
        return builtin_potentials(kind, **cfg)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for potential {kind!r}: {exc}")
