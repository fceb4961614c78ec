from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from orthoheun.mpcore import PrecisionContext, ln_barnes_g
from orthoheun.scaling import (
    ScalingSpec,
    barnes_block,
    c_term,
    c_term_sum,
    compare_expansions,
    decay_ratios,
    expansion,
    factorization_check,
    laguerre_norms_closed_form,
    laguerre_side_tables,
    ln_delta_expansion,
    ln_full_hankel_zero,
    norm_split_errors,
    numeric_delta,
    scaled_hankel,
)


def test_scaling_spec():
    sp = ScalingSpec(4, 100, Fraction(1, 2), 1)
    assert sp.scaled_s == mpf(100) / 16
    assert sp.scaled_t == mpf(1) / 2 / 10
    for bad in ((0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 1, 0)):
        with pytest.raises(ValueError):
            ScalingSpec(*bad)


def test_laguerre_side_norms_at_zero(ctx60):
    lo, hi = laguerre_side_tables(Fraction(3, 2), 0, 0, 5, ctx60)
    with ctx60.workdps():
        for m in range(6):
            for tb, lam in ((lo, mpf(1) / 4), (hi, mpf(5) / 4)):
                exact = laguerre_norms_closed_form(lam, m, ctx60)
                assert abs(tb.h[m] / exact - 1) < mpf(10) ** -60


def test_full_hankel_zero_closed_form(ctx60):
    with ctx60.workdps():
        for N in (3, 4, 7):
            D = scaled_hankel(1, 0, 0, N, ctx60).D[N]
            assert abs(mpmath.log(D) - ln_full_hankel_zero(1, N, ctx60)) < mpf(10) ** -55


@pytest.mark.parametrize("n", [1, 2, 3])
def test_even_odd_factorization(ctx60, n):
    rep = factorization_check(1, Fraction(1, 5), Fraction(3, 10), n, ctx60)
    assert rep.even_error < mpf(10) ** -30 and rep.odd_error < mpf(10) ** -30
    assert set(rep.to_json()) == {"n", "evenError", "oddError", "D2n", "D2n+1"}


def test_norm_split(ctx60):
    for _, e, o in norm_split_errors(1, Fraction(1, 5), Fraction(3, 10), 3, ctx60):
        assert e < mpf(10) ** -30 and o < mpf(10) ** -30


def test_barnes_special_values(ctx60):
    with ctx60.workdps():
        assert abs(ln_barnes_g(1, ctx60)) < mpf(10) ** -70
        assert abs(ln_barnes_g(2, ctx60)) < mpf(10) ** -70
        assert abs(ln_barnes_g(4, ctx60) - mpmath.log(2)) < mpf(10) ** -70


@settings(max_examples=15)
@given(st.fractions(min_value=Fraction(1, 10), max_value=4, max_denominator=30),
       st.fractions(min_value=Fraction(1, 10), max_value=50, max_denominator=30),
       st.fractions(min_value=0, max_value=3, max_denominator=30))
def test_constant_block_sum(alpha, s, t):
    ctx = PrecisionContext(50, 10)
    with ctx.workdps():
        a = mpf(alpha.numerator) / alpha.denominator
        total = c_term(s, t, (a - 1) / 2, ctx) + c_term(s, t, (a + 1) / 2, ctx)
        assert abs(total - c_term_sum(alpha, s, t, ctx)) < mpf(10) ** -45


def test_c_term_needs_positive_s(ctx60):
    with pytest.raises(ValueError):
        c_term(0, 1, 1, ctx60)


def test_large_s_printed_matches_summed(ctx60):
    assert all(c.agrees for c in compare_expansions("largeS", 1, 1, ctx60))
    bad = compare_expansions("largeS", 1, 1, ctx60, exponent="as-printed")
    assert sum(not c.agrees for c in bad) == 2


def test_small_s_coefficient_disagreements_are_logged(ctx60):
    cmp = {c.to_json()["term"]: c for c in compare_expansions("smallS", 1, 1, ctx60)}
    assert not cmp["ln s"].agrees
    assert not cmp["s^7/2"].agrees
    with ctx60.workdps():
        assert abs(cmp["ln s"].printed - mpf(1) / 8) < mpf(10) ** -50
        assert abs(cmp["ln s"].recomputed + mpf(1) / 8) < mpf(10) ** -50


def test_decay_in_large_s(ctx60):
    with ctx60.workdps():
        exp = expansion("largeS", 1, 1, ctx60)
        assert all(r < mpf(1) / 2 for r in decay_ratios(exp, 1000))
        doc = exp.to_json(20, s=1000)
        assert len(doc["termValues"]) == len(exp.terms)


def test_expansion_warnings(ctx60):
    _, breakdown, warnings = ln_delta_expansion("largeS", 1, 2, 1, ctx60)
    assert warnings and breakdown[0][0] == "constant"
    _, _, warnings = ln_delta_expansion("largeS", 1, 1000, 1, ctx60)
    assert not warnings
    with pytest.raises(ValueError):
        expansion("mediumS", 1, 1, ctx60)


def test_numeric_delta_at_origin(ctx60):
    assert numeric_delta(1, 0, 0, 2, ctx60) == 0
    with ctx60.workdps():
        v = numeric_delta(1, 1, Fraction(1, 2), 2, ctx60)
        assert v < 0  # the perturbation and the gap both remove mass
