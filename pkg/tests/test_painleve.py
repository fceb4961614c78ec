from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from orthoheun.mpcore import Dual2
from orthoheun.painleve import (
    FlowConfig,
    PainleveInstance,
    SingularConfigurationError,
    adjudicate,
    certify,
    instance_for,
    rhs,
)


@pytest.fixture(autouse=True)
def _precision():
    with mpmath.workdps(50):
        yield


def test_painleve_iv_rational_solution():
    # y = -2t solves P_IV with a = 0, b = -2
    inst = PainleveInstance("IV", {"a": 0, "b": -2}, "rational")
    for t in (mpf("0.3"), mpf("1.7"), mpf("-2.1")):
        assert abs(rhs(inst, t, -2 * t, mpf(-2))) < mpf(10) ** -45


def test_painleve_iii_prime_sqrt_solution():
    # y = sqrt(t) solves P_III' whenever alpha = -beta and gamma = -delta
    inst = PainleveInstance("III'", {"alpha": 3, "beta": -3, "gamma": Fraction(1, 2), "delta": Fraction(-1, 2)}, "sqrt")
    for t in (mpf("0.4"), mpf("2.5")):
        y = mpmath.sqrt(t)
        assert abs(rhs(inst, t, y, 1 / (2 * y)) + 1 / (4 * t * y)) < mpf(10) ** -45


def test_painleve_vi_against_symbolic_form():
    inst, _ = instance_for("jc", 3, 1)
    p = {k: mpf(v) for k, v in inst.params.items()}
    t, y, yp = mpf("2.3"), mpf("1.4"), mpf("0.2")
    expect = (
        (1 / y + 1 / (y - 1) + 1 / (y - t)) * yp * yp / 2
        - (1 / t + 1 / (t - 1) + 1 / (y - t)) * yp
        + y * (y - 1) * (y - t) / (t * t * (t - 1) ** 2)
        * (p["alpha"] + p["beta"] * t / y ** 2 + p["gamma"] * (t - 1) / (y - 1) ** 2 + p["delta"] * t * (t - 1) / (y - t) ** 2)
    )
    assert abs(rhs(inst, t, y, yp) - expect) < mpf(10) ** -45
    assert p["alpha"] == mpf(3 * 6) / 2 + mpf(1) / 8 and p["beta"] == mpf(-9) / 8


def test_singular_configurations():
    inst, _ = instance_for("spg", 2, 1)
    with pytest.raises(SingularConfigurationError):
        rhs(inst, mpf(1), mpf(0), mpf(1))
    inst, _ = instance_for("df", 2, 1)
    with pytest.raises(SingularConfigurationError):
        rhs(inst, mpf(1), mpf(0), mpf(1))


def test_unknown_candidates():
    with pytest.raises(ValueError):
        instance_for("gj", 2, variant="nope")
    with pytest.raises(ValueError):
        instance_for("hermite", 2)


vals = st.fractions(min_value=Fraction(1, 5), max_value=2, max_denominator=50)


@settings(max_examples=30)
@given(st.sampled_from(["spg", "df", "gj", "jc"]), vals, vals, vals)
def test_variable_change_round_trip(family, t, lam, lam_dot):
    _, change = instance_for(family, 2, None if family == "gj" else 1)
    t, lam, lam_dot = (mpf(v.numerator) / v.denominator for v in (t, lam, lam_dot))
    x, y, yp, _ = change.to_painleve(t, lam, lam_dot, 0)
    t2, lam2, ld2 = change.from_painleve(x, y, yp)
    assert abs(t2 - t) + abs(lam2 - lam) + abs(ld2 - lam_dot) < mpf(10) ** -40


def test_spg_certification_passes():
    rep = certify("spg", 3, 1, FlowConfig(tol=mpf(10) ** -10))
    assert rep.verdict
    assert rep.max_residual < mpf(10) ** -8
    assert rep.shadow_deviation < mpf(10) ** -8
    doc = rep.to_json()
    assert doc["verdict"] == "pass" and len(doc["runs"]) == 3


def test_gj_adjudication_selects_one_reading():
    cfg = FlowConfig(tol=mpf(10) ** -10, initial=((mpf("0.5"), mpf("0.1")),))
    reps = adjudicate("gj", 3, None, cfg)
    passing = [k for k, r in reps.items() if r.verdict]
    assert passing == ["certified"]


def test_flow_config_from_json():
    cfg = FlowConfig.from_json({"window": ["2", "3"], "tol": "1e-10", "initial": [["1.5", "0.1"]]})
    assert cfg.window == (2, 3) and cfg.initial == ((mpf("1.5"), mpf("0.1")),)
    assert cfg.tol == mpf("1e-10")


def test_pole_in_window_is_reported_not_raised():
    rep = certify("spg", 3, 1, FlowConfig(tol=mpf(10) ** -8, window=(1, 40), initial=((mpf(30), mpf(30)),)))
    assert not rep.verdict
