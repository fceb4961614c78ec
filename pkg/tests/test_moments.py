from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from orthoheun.moments import (
    MomentTable,
    cross_check,
    exact_moment,
    moment_table,
    quadrature_moment,
    verify_spg_bessel_form,
)
from orthoheun.mpcore import PrecisionContext
from orthoheun.weights import df, gj, jc, spg, spg_hard_edge


def test_gaussian_mass(ctx60):
    with ctx60.workdps():
        assert abs(exact_moment(gj(1, 0, 0), 0, ctx60) - mpmath.sqrt(mpmath.pi)) < mpf(10) ** -70


def test_gaussian_even_moments(ctx60):
    # int x^{2j} e^{-x^2} = Gamma(j + 1/2)
    with ctx60.workdps():
        for j in range(6):
            assert abs(exact_moment(gj(1, 0, 0), 2 * j, ctx60) - mpmath.gamma(j + mpf(1) / 2)) < mpf(10) ** -65


def test_odd_moments_vanish_for_even_weights(ctx60):
    for w in (spg(1, Fraction(1, 10)), df(1, 1), jc(1, Fraction(1, 2)), gj(2, 0, 1)):
        assert exact_moment(w, 3, ctx60) == 0


def test_jump_weight_has_odd_moments(ctx60):
    with ctx60.workdps():
        v = exact_moment(gj(1, 1, Fraction(1, 2)), 1, ctx60)
        # (A+B) int_t^inf x e^{-x^2} - A int_{-inf}^t ... = B e^{-t^2}/2
        assert abs(v - mpmath.exp(-mpf(1) / 4) / 2) < mpf(10) ** -65


@pytest.mark.parametrize(
    "w",
    [spg(1, Fraction(1, 10)), df(1, 1), df(1, -2), gj(1, 1, Fraction(1, 2)), jc(1, Fraction(1, 2)),
     spg_hard_edge(1, Fraction(3, 10), Fraction(1, 5)), spg_hard_edge(1, 0, Fraction(1, 5))],
    ids=lambda w: w.family,
)
@pytest.mark.parametrize("k", [0, 2, 7, 12])
def test_exact_route_matches_quadrature(ctx60, w, k):
    assert cross_check(w, k, ctx60) < mpf(10) ** -30


@settings(max_examples=10)
@given(st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=20),
       st.fractions(min_value=Fraction(1, 20), max_value=2, max_denominator=20),
       st.integers(min_value=0, max_value=5))
def test_spg_bessel_route_property(alpha, t, j):
    ctx = PrecisionContext(50, 10)
    assert cross_check(spg(alpha, t), 2 * j, ctx) < mpf(10) ** -25


def test_spg_bessel_form_points(ctx60):
    rows = verify_spg_bessel_form(ctx60)
    assert len(rows) == 5 and all(r[-1] < mpf(10) ** -30 for r in rows)


def test_table_checks_and_round_trip(ctx60):
    t = moment_table(jc(1, Fraction(1, 2)), 5, ctx60)
    assert set(t.checks) == {0, 1, 2, 5, 10}
    back = MomentTable.from_json(t.to_json())
    with ctx60.workdps():
        assert all(abs(a - b) <= mpf(10) ** -75 * abs(a) for a, b in zip(back.entries, t.entries))
    assert t.to_csv().splitlines()[0] == "k,value,method"


def test_parallel_table_matches_serial(ctx60):
    w = df(1, 1)
    a = moment_table(w, 4, ctx60, check=False)
    b = moment_table(w, 4, ctx60, check=False, jobs=2)
    with ctx60.workdps():
        assert all(abs(x - y) <= mpf(10) ** -75 * max(abs(x), 1) for x, y in zip(a.entries, b.entries))


def test_negative_index_rejected(ctx60):
    with pytest.raises(ValueError):
        exact_moment(spg(1, 1), -1, ctx60)
    with pytest.raises(ValueError):
        quadrature_moment(spg(1, 1), -1, ctx60)
