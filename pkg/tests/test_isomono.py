from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from orthoheun.isomono import (
    CaseCheckError,
    DeformedEquation,
    Gauge,
    Trajectory,
    check_case,
    checked_hamiltonian,
    compatibility_residual,
    family_hamiltonian,
    hamilton_flow,
)
from orthoheun.linode import PoleProximityError, heun_limit
from orthoheun.mpcore import Dual2, PrecisionContext

FAMILIES = ("spg", "df", "gj", "jc")
T_CHECK = {"spg": Fraction(3, 2), "df": Fraction(3, 2), "gj": Fraction(3, 2), "jc": Fraction(5, 2)}


def _ste(family, n=4):
    params = {"n": n, "t": 1}
    if family != "gj":
        params["alpha"] = 1
    return heun_limit(family, params)


@pytest.mark.parametrize("family", FAMILIES)
def test_family_gauge_passes(ctx100, family):
    rep = check_case(_ste(family), Gauge(family), T_CHECK[family], ctx100)
    assert rep.case == ("A" if family == "jc" else "B")
    assert rep.passed
    assert max(rep.residuals.values()) < mpf(10) ** -60


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("scale", [2, -1, Fraction(1, 3)])
def test_scaled_gauge_fails(ctx100, family, scale):
    rep = check_case(_ste(family), Gauge(family, scale), T_CHECK[family], ctx100)
    assert not rep.passed
    assert max(rep.residuals.values()) > mpf(10) ** -3


def test_checked_hamiltonian_refuses_wrong_gauge(ctx100):
    with pytest.raises(CaseCheckError):
        checked_hamiltonian(_ste("spg"), Gauge("spg", 2), 2, ctx100)
    assert checked_hamiltonian(_ste("spg"), Gauge("spg"), 2, ctx100).case == "B"


lam_s = st.fractions(min_value=Fraction(1, 5), max_value=Fraction(4, 5), max_denominator=97)
mu_s = st.fractions(min_value=-2, max_value=2, max_denominator=97)


@settings(max_examples=25)
@given(st.sampled_from(FAMILIES), lam_s, mu_s)
def test_hamilton_partials_match_dual_derivatives(family, lam, mu):
    hs = family_hamiltonian(family, 3, None if family == "gj" else 1)
    t = mpf(5) / 2 if family == "jc" else mpf(3) / 2
    with mpmath.workdps(50):
        lam, mu = mpf(lam.numerator) / lam.denominator, mpf(mu.numerator) / mu.denominator
        assert abs(hs.H(t, lam, Dual2(mu, 1, 0)).d1 - hs.dH_dmu(t, lam, mu)) < mpf(10) ** -40
        assert abs(hs.H(t, Dual2(lam, 1, 0), mu).d1 - hs.dH_dlam(t, lam, mu)) < mpf(10) ** -40
        ld = hs.dH_dmu(t, lam, mu)
        assert abs(hs.mu_from_lambda_dot(t, lam, ld) - mu) < mpf(10) ** -40


def test_mu_undetermined_where_sigma_vanishes():
    hs = family_hamiltonian("spg", 3, 1)
    with pytest.raises(ZeroDivisionError):
        hs.mu_from_lambda_dot(mpf(2), mpf(0), mpf(1))


@pytest.mark.parametrize("family", FAMILIES)
def test_compatibility_along_flow(ctx100, family):
    hs = family_hamiltonian(family, 3, None if family == "gj" else 1)
    t0, lam0, mu0 = (mpf(5) / 2, mpf("1.5"), mpf("0.1")) if family == "jc" else (mpf(1), mpf("0.5"), mpf("0.1"))
    tr = hamilton_flow(hs, t0, lam0, mu0, t0 + mpf("0.25"), mpf(10) ** -12, ctx100, samples=3)
    for t, lam, mu, _, _ in tr.rows:
        for x in (mpf("-0.83"), mpf("2.37"), mpf("0.61")):
            r1, r2 = compatibility_residual(hs, t, lam, mu, x, ctx100)
            assert abs(r1) + abs(r2) < mpf(10) ** -60
    t, lam, mu = tr.rows[-1][:3]
    r1, r2 = compatibility_residual(hs, t, lam, mu, mpf("2.37"), ctx100, frozen=True)
    assert abs(r1) + abs(r2) > mpf(10) ** -3


def test_mu2_convention_matters(ctx100):
    hs = family_hamiltonian("df", 3, 1)
    r = compatibility_residual(hs, 1, mpf("0.5"), mpf("0.3"), mpf("2.37"), ctx100, convention="sigma(x)")
    assert abs(r[1]) > mpf(10) ** -3


def test_compatibility_rejects_points_near_singularities(ctx100):
    hs = family_hamiltonian("spg", 3, 1)
    with pytest.raises(PoleProximityError):
        compatibility_residual(hs, 1, mpf("0.5"), mpf("0.1"), mpf("0.5") + mpf(10) ** -9, ctx100)


def test_apparent_singularity_is_lambda():
    de = DeformedEquation(_ste("df"), mpf("0.4"), mpf("0.2"))
    assert de.apparent_singularity() == mpf("0.4")
    assert mpf("0.4") in de.singular_points()


def test_flow_reversibility_and_round_trip(ctx100):
    hs = family_hamiltonian("spg", 3, 1)
    fwd = hamilton_flow(hs, 1, mpf("0.5"), mpf("0.1"), 2, mpf(10) ** -12, ctx100, samples=2)
    _, lam1, mu1 = fwd.rows[-1][:3]
    back = hamilton_flow(hs, 2, lam1, mu1, 1, mpf(10) ** -12, ctx100, samples=2)
    assert abs(back.rows[-1][1] - mpf("0.5")) < mpf(10) ** -9
    with ctx100.workdps():
        again = Trajectory.from_json(fwd.to_json(40))
        assert len(again.rows) == 2 and abs(again.rows[-1][1] - lam1) < mpf(10) ** -35
    assert fwd.to_csv().splitlines()[0] == "t,lambda,mu,lambda_dot,lambda_ddot"
