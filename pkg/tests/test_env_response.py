"""Response curves against an independent high-precision oracle.

Expected values below were computed with mpmath at 50 significant digits
(`oracle_logan10` / `oracle_light`, kept here so the numbers can be
regenerated); the curve implementations are float64.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from bsfopt.env_response import (
    DenominatorNearZero,
    FeedParams,
    LightParams,
    Logan10Params,
    OutOfRange,
    UnknownDiet,
    check_denominator_grid,
    feed_preset,
    light_preset,
    light_rate,
    logan10_rate,
    preset,
    presets_document,
)

mp.dps = 50


def oracle_logan10(T, alpha, k_L, p, T_let, T_R, dT):
    T, alpha, k_L, p = mpf(T), mpf(str(alpha)), mpf(str(k_L)), mpf(str(p))
    T_let, T_R, dT = mpf(T_let), mpf(T_R), mpf(dT)
    theta = (T_let - T) / dT
    return alpha / (1 + k_L * mp.exp(-p * (T - T_R)) + mp.exp(-theta))


def oracle_light(tau, a1, a2):
    return mpf(str(a1)) * (1 - mp.exp(-mpf(str(a2)) * mpf(tau)))


# frozen 50-digit oracle evaluations at 25 degC / 16 h
ORACLE_AT_25 = {
    "energy": 0.975212084698,
    "stage": 5.50397668425,
    "egg": 0.789860284518,
}
ORACLE_LIGHT_16 = 1.87753329839


@pytest.mark.parametrize("kind", ["energy", "stage", "egg"])
def test_logan10_matches_oracle_at_25(kind):
    params = preset(kind)
    want = float(oracle_logan10(25, *params.as_tuple()))
    assert abs(want - ORACLE_AT_25[kind]) < 5e-12  # frozen value is current
    assert logan10_rate(25.0, params) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("kind", ["energy", "stage", "egg"])
def test_logan10_finite_positive_on_control_box(kind):
    params = preset(kind)
    grid = np.arange(150, 401) / 10.0  # 15.0, 15.1, ..., 40.0
    values = logan10_rate(grid, params)
    assert np.all(np.isfinite(values))
    assert np.all(values > 0.0)


def test_logan10_pure_function_bit_identical():
    params = preset("stage")
    assert logan10_rate(31.7, params) == logan10_rate(31.7, params)


def test_logan10_rejects_nonfinite_temperature():
    with pytest.raises(OutOfRange):
        logan10_rate(float("nan"), preset("energy"))


def test_logan10_denominator_guard():
    # k_L = -1 with p = 0 cancels the leading 1; far below T_let the
    # remaining boundary-layer term is astronomically small
    params = Logan10Params(alpha=1.0, k_L=-1.0, p=0.0, T_let=100.0, T_R=0.0, dT=1.0)
    with pytest.raises(DenominatorNearZero):
        logan10_rate(0.0, params)
    with pytest.raises(DenominatorNearZero):
        check_denominator_grid(params)


def test_preset_rows_exact():
    energy = preset("energy")
    assert energy == Logan10Params(0.08, -0.9753, -0.0157, 40.0, 15.0, 10.0)
    stage = preset("stage")
    assert stage.alpha == 2.3823 and stage.dT == 15.0
    egg = preset("egg")
    assert egg.alpha == 0.511 and egg.T_R == 20.0 and egg.dT == 2.0
    with pytest.raises(KeyError):
        preset("bogus")


def test_feed_preset_rows_exact():
    assert feed_preset("water") == FeedParams("water", 1.27, 1.04, 1.78)
    assert feed_preset("agar") == FeedParams("agar", 1.0, 1.0, 3.03)
    assert feed_preset("milk") == FeedParams("milk", 0.58, 0.87, 4.06)
    assert feed_preset("none") == FeedParams("none", 1.69, 3.12, 2.26)
    with pytest.raises(UnknownDiet):
        feed_preset("soda")


def test_light_zero_is_exactly_zero():
    assert light_rate(0.0, light_preset()) == 0.0


def test_light_matches_oracle_at_16():
    want = float(oracle_light(16, 1.8825, 0.3711))
    assert abs(want - ORACLE_LIGHT_16) < 5e-12
    assert light_rate(16.0, light_preset()) == pytest.approx(want, abs=1e-12)


def test_light_saturates_below_a1():
    params = light_preset()
    assert light_rate(24.0, params) < params.a1


def test_light_out_of_range():
    with pytest.raises(OutOfRange):
        light_rate(-0.1, light_preset())
    with pytest.raises(OutOfRange):
        light_rate(24.1, light_preset())


# a2 capped where exp(-a2*24) stays representable; beyond that the strict
# bound saturates to equality in float64
@given(a1=st.floats(0.01, 50.0), a2=st.floats(0.001, 1.4))
@settings(max_examples=50)
def test_light_monotone_and_bounded(a1, a2):
    params = LightParams(a1=a1, a2=a2)
    grid = np.linspace(0.0, 24.0, 200)
    values = light_rate(grid, params)
    assert np.all(np.diff(values) >= -1e-12)
    assert values[0] == 0.0
    assert np.all(values < a1)


def test_logan10_accepts_arrays():
    params = preset("egg")
    grid = np.array([20.0, 25.0, 30.0])
    values = logan10_rate(grid, params)
    assert values.shape == (3,)
    assert values[1] == logan10_rate(25.0, params)


@pytest.mark.parametrize("bad", [
    dict(alpha=0.0, k_L=0.1, p=0.1, T_let=40.0, T_R=15.0, dT=10.0),
    dict(alpha=1.0, k_L=0.1, p=0.1, T_let=40.0, T_R=15.0, dT=0.0),
    dict(alpha=1.0, k_L=0.1, p=0.1, T_let=15.0, T_R=15.0, dT=10.0),
    dict(alpha=float("inf"), k_L=0.1, p=0.1, T_let=40.0, T_R=15.0, dT=10.0),
])
def test_logan10_params_invariants(bad):
    with pytest.raises(ValueError):
        Logan10Params(**bad)


def test_light_and_feed_params_invariants():
    with pytest.raises(ValueError):
        LightParams(a1=0.0, a2=1.0)
    with pytest.raises(ValueError):
        LightParams(a1=1.0, a2=-1.0)
    with pytest.raises(ValueError):
        FeedParams("water", 0.0, 1.0, 1.0)


def test_presets_document_mirrors_tables():
    doc = presets_document()
    assert doc["temperature"]["energy"] == {
        "alpha": 0.08, "kL": -0.9753, "p": -0.0157,
        "Tlet": 40.0, "TR": 15.0, "dT": 10.0}
    assert doc["temperature"]["stage"]["alpha"] == 2.3823
    assert doc["temperature"]["egg"]["dT"] == 2.0
    assert doc["light"] == {"a1": 1.8825, "a2": 0.3711}
    assert doc["feed"]["milk"] == {"kFed1f": 0.58, "kFed1m": 0.87, "kFed2": 4.06}
    assert set(doc["feed"]) == {"none", "water", "agar", "milk"}
    import json
    json.dumps(doc)  # JSON-ready
