from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mpf

from orthoheun.mpcore import DomainError
from orthoheun.weights import WeightSpec, df, evaluate, gj, jc, potential, spg, spg_hard_edge

pos = st.fractions(min_value=Fraction(1, 100), max_value=5, max_denominator=1000)
anyf = st.fractions(min_value=-5, max_value=5, max_denominator=1000)
unit = st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=1000)

weights = st.one_of(
    st.builds(spg, pos, pos),
    st.builds(df, pos, anyf),
    st.builds(gj, pos, st.fractions(min_value=0, max_value=3, max_denominator=100), anyf),
    st.builds(jc, pos, unit),
    st.builds(spg_hard_edge, pos, pos, pos),
)


@given(weights)
def test_json_round_trip(w):
    assert WeightSpec.from_json(w.dumps()) == w
    assert WeightSpec.from_json(w.to_json()) == w


def test_aliases_and_exact_params():
    w = WeightSpec("singularly_perturbed_gaussian", {"alpha": 1, "t": 0.1})
    assert w.family == "spg"
    assert w["t"] == Fraction(1, 10)


@pytest.mark.parametrize(
    "build",
    [lambda: spg(-1, 1), lambda: spg(1, 0), lambda: jc(1, 1), lambda: gj(0, 0, 0), lambda: spg_hard_edge(1, -1, 0)],
)
def test_domain_violations(build):
    with pytest.raises(DomainError):
        build()


def test_unknown_family_and_params():
    with pytest.raises(ValueError):
        WeightSpec("hermite", {})
    with pytest.raises(ValueError):
        WeightSpec("spg", {"alpha": 1})


def test_boundary_warnings():
    assert spg(0, 1).warnings
    assert df(1, -1).warnings
    assert not spg(1, 1).warnings


def test_evaluation(ctx60):
    with ctx60.workdps():
        x = mpf("0.7")
        assert evaluate(spg(1, Fraction(1, 10)), x, ctx60) == x * mpmath.exp(-x * x - mpf("0.1") / (x * x))
        assert evaluate(jc(1, Fraction(1, 2)), mpf("0.3"), ctx60) == 0
        assert evaluate(gj(1, 1, Fraction(1, 2)), 1, ctx60) == 2 * mpmath.exp(-1)
        assert evaluate(spg_hard_edge(1, 0, 1), mpf("0.5"), ctx60) == 0
        assert abs(potential(df(0, 1), 2, ctx60) - (16 - 4)) < mpf(10) ** -70


def test_evenness():
    assert gj(1, 0, 1).is_even
    assert not gj(1, 1, 1).is_even
    assert spg(1, 1).is_even and jc(1, Fraction(1, 2)).is_even
