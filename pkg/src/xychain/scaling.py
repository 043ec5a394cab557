"""Peak finding, least-squares fits and data-collapse quality."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Curve:
    """Observable sampled along ``lambda`` for one system size."""

    N: int
    gamma: float
    observable: str
    lambdas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if lam.shape != val.shape or lam.ndim != 1:
            raise ConfigError("curve lambdas and values must be 1-d arrays of equal length")
        if lam.size > 1 and np.any(np.diff(lam) <= 0):
            raise ConfigError("curve lambdas must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)

    def __len__(self) -> int:
        return self.lambdas.size

    def map(self, fn, observable: str | None = None) -> "Curve":
        return Curve(self.N, self.gamma, observable or self.observable, self.lambdas, fn(self.values))


@dataclass(frozen=True)
class Peak:
    lambda_m: float
    height: float
    interior: bool


def find_peak(c: Curve, mode: str = "max") -> Peak:
    """Grid extremum refined by the parabola through it and its two neighbours.

    Ties resolve to the smallest ``lambda``.  ``mode="min"`` locates a minimum.
    """
    if len(c) < 3:
        raise ConfigError("find_peak needs at least 3 points")
    sgn = 1.0 if mode == "max" else -1.0
    y = sgn * c.values
    i = int(np.argmax(y))
    if i == 0 or i == len(c) - 1:
        return Peak(float(c.lambdas[i]), float(c.values[i]), False)
    x3 = c.lambdas[i - 1 : i + 2]
    y3 = y[i - 1 : i + 2]
    # Lagrange form keeps the exact-parabola case exact
    x0, x1, x2 = x3 - x3[1]
    y0, y1, y2 = y3
    d0 = y0 / ((x0 - x1) * (x0 - x2))
    d1 = y1 / ((x1 - x0) * (x1 - x2))
    d2 = y2 / ((x2 - x0) * (x2 - x1))
    a = d0 + d1 + d2
    b = -(d0 * (x1 + x2) + d1 * (x0 + x2) + d2 * (x0 + x1))
    cc = d0 * x1 * x2 + d1 * x0 * x2 + d2 * x0 * x1
    if a >= 0:
        return Peak(float(c.lambdas[i]), float(c.values[i]), True)
    xv = -b / (2 * a)
    yv = cc - b * b / (4 * a)
    return Peak(float(x3[1] + xv), float(sgn * yv), True)


class FitModel(enum.Enum):
    LOG = "log"  # y = a + b ln x
    POWER = "power"  # y = a x^p, fitted as ln y = ln a + p ln x
    PARABOLA = "parabola"  # y = c0 + c1 x + c2 x^2


@dataclass(frozen=True)
class FitReport:
    model: FitModel
    coefficients: tuple[float, ...]
    residual_rms: float
    r_squared: float

    @property
    def exponent(self) -> float:
        """Power-law exponent ``p`` (POWER) or log slope ``b`` (LOG)."""
        return self.coefficients[1]


def fit_model(xs, ys, model: FitModel | str) -> FitReport:
    """Linear least squares in the model's natural coordinates.

    Residuals and ``r_squared`` are measured in those coordinates (log-log
    for the power law).
    """
    model = FitModel(model)
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n_par = 3 if model is FitModel.PARABOLA else 2
    if x.shape != y.shape or x.ndim != 1 or x.size <= n_par:
        raise ConfigError(f"{model.value} fit needs more than {n_par} matching points")
    if model is FitModel.LOG:
        if np.any(x <= 0):
            raise ConfigError("log model needs positive abscissae")
        X = np.column_stack([np.ones_like(x), np.log(x)])
        t = y
    elif model is FitModel.POWER:
        if np.any(x <= 0) or np.any(y <= 0):
            raise ConfigError("power model needs positive data")
        X = np.column_stack([np.ones_like(x), np.log(np.abs(x))])
        t = np.log(y)
    else:
        X = np.column_stack([np.ones_like(x), x, x * x])
        t = y
    XtX = X.T @ X
    if np.linalg.cond(XtX) > 1e14:
        raise ConfigError("degenerate design matrix")
    beta = np.linalg.solve(XtX, X.T @ t)
    res = t - X @ beta
    ss_res = float(res @ res)
    ss_tot = float(((t - t.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    coef = tuple(float(b) for b in beta)
    if model is FitModel.POWER:
        coef = (float(np.exp(beta[0])), float(beta[1]))
    return FitReport(model, coef, float(np.sqrt(ss_res / x.size)), r2)


def rescale(c: Curve, nu: float, peak: Peak) -> tuple[np.ndarray, np.ndarray]:
    """Collapse coordinates ``(N^{1/nu} (lambda - lambda_m), y - y_m)``."""
    x = c.N ** (1.0 / nu) * (c.lambdas - peak.lambda_m)
    return x, c.values - peak.height


def collapse_quality(curves, nu: float, peaks=None, n_grid: int = 201) -> float:
    """Normalized RMS spread of rescaled curves on their common abscissa window.

    Each curve is shifted by its own extremum (``peaks``, default: the
    maximum of each curve), rescaled with ``N^{1/nu}``, and linearly
    interpolated onto ``n_grid`` points spanning the overlap of all curves.
    The spread is the RMS deviation from the pointwise mean divided by the
    pooled range of the interpolated values.
    """
    curves = list(curves)
    if len(curves) < 2:
        raise ConfigError("collapse needs at least two curves")
    if peaks is None:
        peaks = [find_peak(c) for c in curves]
    xs, ys = zip(*(rescale(c, nu, p) for c, p in zip(curves, peaks)))
    lo = max(x.min() for x in xs)
    hi = min(x.max() for x in xs)
    if not hi > lo:
        raise ConfigError("rescaled curves do not overlap")
    grid = np.linspace(lo, hi, n_grid)
    table = np.array([np.interp(grid, x, y) for x, y in zip(xs, ys)])
    spread = np.sqrt(np.mean(table.var(axis=0)))
    yrange = table.max() - table.min()
    if yrange == 0:
        return 0.0 if spread == 0 else float("inf")
    return float(spread / yrange)


def long_range_order(params, cov=None) -> float:
    """Order-parameter proxy ``sqrt(max(0, <X_0 X_{N//2}>))``."""
    from .model import majorana_covariance
    from .subset_engine import SubsetEngine

    if cov is None:
        cov = majorana_covariance(params)
    r = params.N // 2
    xx = SubsetEngine(cov).expectations([[0, r]], ["XX"])[0, 0]
    return float(np.sqrt(max(0.0, xx)))
