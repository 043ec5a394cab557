import numpy as np
import pytest
from hypothesis import given, strategies as st

from xychain.errors import ConfigError
from xychain.model import ModelParams
from xychain.scaling import Curve, FitModel, collapse_quality, find_peak, fit_model, long_range_order


def curve(lams, vals, N=10):
    return Curve(N, 1.0, "obs", np.asarray(lams, float), np.asarray(vals, float))


def test_curve_validation():
    with pytest.raises(ConfigError):
        curve([0, 0.5, 0.4], [1, 2, 3])
    with pytest.raises(ConfigError):
        curve([0, 1], [1, 2, 3])


@given(st.floats(0.3, 1.7), st.floats(0.5, 5), st.floats(-2, 2))
def test_parabola_vertex_is_exact(x0, a, c):
    lams = np.linspace(0, 2, 41)
    pk = find_peak(curve(lams, c - a * (lams - x0) ** 2))
    assert pk.interior
    assert pk.lambda_m == pytest.approx(x0, abs=1e-12)
    assert pk.height == pytest.approx(c, abs=1e-12)


def test_monotone_and_ties():
    lams = np.linspace(0, 1, 11)
    pk = find_peak(curve(lams, lams))
    assert not pk.interior and pk.lambda_m == 1.0
    flat = find_peak(curve(lams, np.ones(11)))
    assert flat.lambda_m == 0.0
    with pytest.raises(ConfigError):
        find_peak(curve([0, 1], [1, 2]))


@given(st.floats(-10, 10))
def test_peak_shift_invariance(shift):
    lams = np.linspace(0, 2, 30)
    vals = np.exp(-((lams - 0.83) ** 2) / 0.1)
    a, b = find_peak(curve(lams, vals)), find_peak(curve(lams, vals + shift))
    assert b.lambda_m == pytest.approx(a.lambda_m, abs=1e-9)
    assert b.height == pytest.approx(a.height + shift, abs=1e-9)


def test_minimum_mode():
    lams = np.linspace(0, 2, 21)
    pk = find_peak(curve(lams, (lams - 1.23) ** 2), mode="min")
    assert pk.lambda_m == pytest.approx(1.23) and pk.height == pytest.approx(0.0, abs=1e-12)


def test_exact_fits():
    N = np.array([24, 32, 48, 64, 96], float)
    log = fit_model(N, 2 + 3 * np.log(N), "log")
    assert log.coefficients == pytest.approx((2, 3), abs=1e-10)
    assert log.residual_rms <= 1e-10 and log.r_squared == pytest.approx(1.0)
    pw = fit_model(N, 0.5 * N**1.5, FitModel.POWER)
    assert pw.exponent == pytest.approx(1.5, abs=1e-10) and pw.coefficients[0] == pytest.approx(0.5)
    assert pw.residual_rms <= 1e-10
    x = np.linspace(-1, 1, 7)
    par = fit_model(x, 1 - 2 * x + 0.5 * x**2, FitModel.PARABOLA)
    assert par.coefficients == pytest.approx((1, -2, 0.5), abs=1e-10)


def test_noisy_fit_bounds(rng):
    x = np.linspace(1, 5, 20)
    rep = fit_model(x, 1 + x + rng.normal(0, 0.3, 20), "parabola")
    assert rep.residual_rms >= 0 and rep.r_squared <= 1


def test_fit_errors():
    with pytest.raises(ConfigError):
        fit_model([1, 2], [1, 2], "log")
    with pytest.raises(ConfigError):
        fit_model([1, 2, 3, 4, 5], [1, -2, 3, 4, 5], "power")
    with pytest.raises(ConfigError):
        fit_model(np.ones(6), np.arange(6.0), "parabola")


def test_collapse_identical_and_synthetic():
    lams = np.linspace(0.5, 1.5, 201)
    c = curve(lams, np.exp(-((lams - 1) ** 2)), N=20)
    assert collapse_quality([c, c], 1.0) == 0.0

    def f(x):
        return np.tanh(x / 3) + 0.1 * x

    curves = []
    for N in (32, 48, 64, 80):
        lm = 1 - 0.8 / N
        lam = np.linspace(lm - 0.5, lm + 0.5, 2001)
        curves.append(Curve(N, 1.0, "y", lam, -np.abs(f(N * (lam - lm)))))
    assert collapse_quality(curves, 1.0) < 1e-3
    assert collapse_quality(curves, 2.0) > 10 * collapse_quality(curves, 1.0)


def test_collapse_needs_overlap():
    a = curve(np.linspace(0, 1, 11), np.linspace(0, 1, 11) * (1 - np.linspace(0, 1, 11)))
    b = Curve(10, 1.0, "obs", np.linspace(5, 6, 11), -((np.linspace(5, 6, 11) - 5.5) ** 2))
    with pytest.raises(ConfigError):
        collapse_quality([a, b], 1.0, peaks=[find_peak(a), find_peak(a)])
    with pytest.raises(ConfigError):
        collapse_quality([a], 1.0)


def test_order_parameter_proxy():
    assert long_range_order(ModelParams(12, 1.0, 0.0)) == pytest.approx(1.0)
    assert long_range_order(ModelParams(128, 1.0, 2.0)) < 0.05
    assert long_range_order(ModelParams(64, 1.0, 0.5)) > long_range_order(ModelParams(64, 1.0, 0.9))
