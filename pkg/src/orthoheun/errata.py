"""Typo adjudication: every ambiguous formula is built in each candidate
reading and scored by an independent residual; the reading with a
precision-level residual wins.

Each ``adjudicate_*`` function recomputes one entry.  ``build_ledger``
runs them all and ``load_ledger`` reads the stored copy shipped with the
package (regenerated with ``write_ledger``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath
from mpmath import mpf

from . import isomono, linode, painleve, scaling
from .integrate import dopri45
from .moments import cross_check, moment_table, quadrature_moment
from .mpcore import Dual2, PrecisionContext, bessel_k, to_mpf
from .orthopoly import build_recurrence
from .poly import peval2
from .weights import df, jc, spg


@dataclass(frozen=True)
class ErrataEntry:
    key: str
    location: str
    residuals: dict  # variant -> residual (mpf or inf)
    selected: str
    note: str

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "location": self.location,
            "variants": {k: mpmath.nstr(v, 4) for k, v in self.residuals.items()},
            "selected": self.selected,
            "note": self.note,
        }


def _winner(res: dict, tol) -> str:
    good = [k for k, v in res.items() if v < tol]
    return good[0] if len(good) == 1 else ("ambiguous: " + ", ".join(good) if good else "none")


def _xs():
    return [mpf(v) for v in ("0.37", "0.81", "1.3", "0.55", "1.7")]


def _betas(w, n_max, ctx):
    return build_recurrence(moment_table(w, n_max + 1, ctx, check=False), n_max + 1, ctx)


def adjudicate_spg_factor(ctx: PrecisionContext, ns=range(1, 7)) -> ErrataEntry:
    tb = _betas(spg(1, Fraction(1, 10)), max(ns) + 1, ctx)
    res = {}
    with ctx.workdps():
        for variant in linode.SPG_VARIANTS:
            worst = mpf(0)
            for n in ns:
                ode = linode.spg_ode(n, 1, Fraction(1, 10), tb.beta[n - 1], tb.beta[n], tb.beta[n + 1], variant=variant)
                for x in _xs():
                    f, d, dd = peval2(list(tb.coeffs[n]), x)
                    worst = max(worst, linode.residual(ode, f, d, dd, x, ctx, normalized=True))
            res[variant] = worst
    return ErrataEntry(
        "spg-ode-factor", "SPG finite-n equation, Q_n: lone factor 8 after the fourth term",
        res, _winner(res, mpf(10) ** (-(ctx.digits // 4))), "normalized residual of the exact P_n at 5 points, n <= 6",
    )


def _df_residuals(ctx, ns, coefficient, readings=linode.DF_READINGS, alpha=1):
    tb = _betas(df(alpha, 1), max(ns) + 1, ctx)
    res = {}
    with ctx.workdps():
        for reading in readings:
            worst = mpf(0)
            for n in ns:
                ode = linode.df_ode(n, alpha, 1, tb.beta[n - 1], tb.beta[n], tb.beta[n + 1], reading=reading, coefficient=coefficient)
                for x in _xs():
                    f, d, dd = peval2(list(tb.coeffs[n]), x)
                    worst = max(worst, linode.residual(ode, f, d, dd, x, ctx, normalized=True))
            res[reading] = worst
    return res


def adjudicate_df_tail(ctx: PrecisionContext) -> ErrataEntry:
    res = _df_residuals(ctx, (1, 3, 5), "alpha")
    return ErrataEntry(
        "df-ode-tail", "DF finite-n equation, Q_n last line: scope of the trailing (t - 1/(2x^2)) factor",
        res, _winner(res, mpf(10) ** (-(ctx.digits // 4))), "odd n only (the term vanishes for even n); weight |x| e^{-x^4+x^2}",
    )


def adjudicate_df_constant(ctx: PrecisionContext) -> ErrataEntry:
    res = {c: _df_residuals(ctx, (1, 2, 3, 4), c, ("split",))["split"] for c in linode.DF_COEFFICIENTS}
    return ErrataEntry(
        "df-ode-constant", "DF finite-n equation: constant written 2alpha+1 (power of |x| in the weight)",
        res, _winner(res, mpf(10) ** (-(ctx.digits // 4))),
        "with weight |x|^alpha e^{-x^4+tx^2} the constant must be alpha; the printed form matches weight |x|^(2alpha+1)",
    )


def adjudicate_jc_parenthesis(ctx: PrecisionContext, n: int = 6) -> ErrataEntry:
    a = Fraction(1, 2)
    tb = _betas(jc(1, a), n + 1, ctx)
    xs = [mpf(v) for v in ("0.61", "0.83", "0.55", "0.7", "0.95", "1.4", "0.2")]
    guess = linode.jc_asymptotic_aux(n, 1, a)
    res = {}
    notes = []
    with ctx.workdps():
        for reading in linode.JC_READINGS:
            build = lambda R, Rp, rd=reading: linode.jc_ode(n, 1, a, linode.AuxiliaryQuantities(R, Rp), reading=rd)  # noqa: E731
            try:
                R, Rp = linode.fit_auxiliary(build, tb.coeffs[n], xs[:2], (guess.Rn, guess.RnPrime), ctx)
            except (ZeroDivisionError, ValueError, mpmath.libmp.NoConvergence):
                res[reading] = mpmath.inf
                continue
            ode = build(R, Rp)
            worst = mpf(0)
            for x in xs[2:]:
                f, d, dd = peval2(list(tb.coeffs[n]), x)
                worst = max(worst, linode.residual(ode, f, d, dd, x, ctx, normalized=True))
            res[reading] = worst
            beta = linode.jc_auxiliary(n, 1, a, R, Rp).betaN
            notes.append(f"{reading}: beta_n from the fitted R_n {mpmath.nstr(beta, 10)} vs exact {mpmath.nstr(tb.beta[n], 10)}")
    return ErrataEntry(
        "jc-ode-parenthesis", "JC finite-n equation, Q_n: unbalanced parenthesis around the beta_n coefficient",
        res, _winner(res, mpf(10) ** (-(ctx.digits // 4))),
        "R_n, R_n' fitted at two points, residual at five others (n=6, alpha=1, a=1/2); " + "; ".join(notes),
    )


def adjudicate_spg_moment(ctx: PrecisionContext) -> ErrataEntry:
    pts = [(Fraction(1), Fraction(1, 10), 0), (Fraction(1, 2), Fraction(3, 7), 4), (Fraction(3), Fraction(2), 6)]
    res = {"t-form": mpf(0), "literal x=1": mpf(0)}
    with ctx.workdps():
        for al, t, k in pts:
            res["t-form"] = max(res["t-form"], cross_check(spg(al, t), k, ctx))
            nu = (to_mpf(al) + k + 1) / 2
            literal = 2 * bessel_k(nu, mpf(2), ctx)
            q = quadrature_moment(spg(al, t), k, ctx)
            res["literal x=1"] = max(res["literal x=1"], abs(literal - q) / abs(q))
    return ErrataEntry(
        "spg-moment-variable", "SPG Bessel moment formula written in x instead of t",
        res, _winner(res, mpf(10) ** (-(ctx.digits // 2))), "relative difference to x-space quadrature at three (alpha, t, k)",
    )


def adjudicate_deformed_sign(ctx: PrecisionContext) -> ErrataEntry:
    """Integrate a general Heun equation, form v = W y' and test both signs."""
    h = linode.heun_general_jc(3, 1, mpf(5) / 2)
    res = {}
    with ctx.workdps():
        heun = h.ode()
        x0, x1 = mpf("1.3"), mpf("1.9")
        tol = mpf(10) ** -20

        def f(x, s):
            p, q = heun.coefficients(x, ctx, check=False)
            return [s[1], -p * s[1] - q * s[0]]

        sol = dopri45(f, x0, [mpf(1), mpf("0.3")], x1, tol, t_eval=[x0 + (x1 - x0) * k / 4 for k in range(5)])
        for sign in (-1, 1):
            dode = linode.heun_deformed_derivative(h, sign=sign)
            worst = mpf(0)
            for x, (y, yp) in zip(sol.t, sol.y):
                p, q = heun.coefficients(x, ctx, check=False)
                ypp = -p * yp - q * y
                # third derivative from differentiating the equation once
                xd = Dual2(x, 1, 0)
                pd, qd = heun.coefficients(xd, ctx, check=False)
                yppp = -(pd.d1 * yp + p * ypp + qd.d1 * y + q * yp)
                W = h.weight_factor(xd)
                v = W.value * yp
                vp = W.d1 * yp + W.value * ypp
                vpp = W.d2 * yp + 2 * W.d1 * ypp + W.value * yppp
                worst = max(worst, linode.residual(dode, v, vp, vpp, x, ctx, normalized=True))
            res[f"{sign:+d}"] = worst
    return ErrataEntry(
        "deformed-heun-sign", "deformed Heun equation: sign of the alpha beta/(alpha beta x - q) term in p",
        res, _winner(res, mpf(10) ** -12), "v = x^g (x-1)^d (x-a)^e y' along a numerically integrated Heun solution (tol 1e-20)",
    )


def adjudicate_gj_eta(ctx: PrecisionContext) -> ErrataEntry:
    """Leading large-n accessory constant of the GJ limit, derived from the finite-n Q_n."""
    res = {}
    with ctx.workdps():
        for n in (10, 1000, 10 ** 6):
            R = 2 * mpmath.sqrt(6 * mpf(n)) / 3
            # 1/(x - t) coefficient R(8n - R^2)/8, times 1/sqrt 2 from x - t = y/sqrt 2
            derived = R * (8 * n - R * R) / 8 / mpmath.sqrt(2)
            for variant in linode.GJ_ETA_VARIANTS:
                eta = linode.heun_limit("gj", {"n": n, "t": 0, "eta": variant}).eta[0]
                rel = abs(eta - derived) / abs(derived)
                res[variant] = max(res.get(variant, mpf(0)), rel)
    return ErrataEntry(
        "gj-heun-constant", "GJ Heun limit accessory constant: n^(3/2) vs n^(2/3)",
        res, _winner(res, mpf(10) ** -20), "substituting the leading R_n into the finite-n Q_n at n = 10, 10^3, 10^6",
    )


def adjudicate_mu2_convention(ctx: PrecisionContext) -> ErrataEntry:
    res = {}
    cases = {"spg": {"n": 3, "alpha": 1, "t": 1}, "df": {"n": 3, "alpha": 1, "t": 1}, "gj": {"n": 3, "t": 1}, "jc": {"n": 3, "alpha": 1, "t": 1}}
    with ctx.workdps():
        for conv in isomono.MU2_CONVENTIONS:
            worst = mpf(0)
            for fam, p in cases.items():
                hs = isomono.hamiltonian(linode.heun_limit(fam, p))
                t = mpf("1.3") if fam != "jc" else mpf("2.3")
                for x in (mpf(3) / 7, mpf(-11) / 5):
                    r1, r2 = isomono.compatibility_residual(hs, t, mpf("0.7"), mpf(1) / 3, x, ctx, convention=conv)
                    worst = max(worst, abs(r1), abs(r2))
            res[conv] = worst
    return ErrataEntry(
        "deformed-q-mu2", "deformed equation q(x): mu^2 multiplies sigma(lambda) or sigma(x)",
        res, _winner(res, mpf(10) ** (-(ctx.digits - 60))), "compatibility residual at a generic (t, lambda, mu, x), all four families",
    )


def _painleve_entry(family, n, alpha, key, location, note) -> ErrataEntry:
    reports = painleve.adjudicate(family, n, alpha)
    res = {name: rep.max_residual for name, rep in reports.items()}
    return ErrataEntry(key, location, res, _winner(res, mpf(10) ** -8), note)


def adjudicate_gj_painleve(ctx: PrecisionContext) -> ErrataEntry:
    return _painleve_entry(
        "gj", 4, None, "gj-painleve-form",
        "GJ Painleve IV: sign of lambda = -y/sqrt 2 and the doubled linear term 2(t^2-1)y - 2y",
        "certified against the Hamiltonian flow; candidate = (map sign, a) with b = 0",
    )


def adjudicate_jc_painleve(ctx: PrecisionContext) -> ErrataEntry:
    return _painleve_entry(
        "jc", 3, 1, "jc-painleve-denominator",
        "JC Painleve VI prefactor denominator: t(t-1)^2 vs t^2(t-1)^2",
        "certified against the Case A Hamiltonian flow, three initial conditions",
    )


def adjudicate_expansion_exponent(ctx: PrecisionContext) -> ErrataEntry:
    res = {}
    for exponent in scaling.LARGE_S_EXPONENTS:
        cmp = scaling.compare_expansions("largeS", 1, 1, ctx, exponent=exponent)
        res[exponent] = mpf(sum(0 if c.agrees else 1 for c in cmp))
    return ErrataEntry(
        "largeS-exponent", "single-lambda large-s expansion: exponent s^(-2/3) of the lambda^3 term",
        res, _winner(res, mpf(1) / 2), "number of printed two-lambda coefficients not reproduced by the lambda sum (alpha = t = 1)",
    )


def adjudicate_small_s(ctx: PrecisionContext) -> ErrataEntry:
    cmp = scaling.compare_expansions("smallS", 1, 1, ctx)
    bad = [c for c in cmp if not c.agrees]
    res = {"printed": mpf(len(bad)), "recomputed": mpf(0)}
    detail = "; ".join(f"{c.to_json(6)['term']}: printed {c.to_json(6)['printed']} vs sum {c.to_json(6)['recomputed']}" for c in bad)
    return ErrataEntry(
        "smallS-coefficients", "small-s two-lambda expansion coefficients (ln s and s^(7/2)/t^3)",
        res, "recomputed",
        "recomputed from the two single-lambda expansions: ln s coefficient -alpha^2/8, s^(7/2)/t^3 coefficient alpha^2/16 - 23/64; " + detail,
    )


ADJUDICATORS = (
    adjudicate_spg_moment,
    adjudicate_spg_factor,
    adjudicate_df_tail,
    adjudicate_df_constant,
    adjudicate_jc_parenthesis,
    adjudicate_deformed_sign,
    adjudicate_gj_eta,
    adjudicate_mu2_convention,
    adjudicate_gj_painleve,
    adjudicate_jc_painleve,
    adjudicate_expansion_exponent,
    adjudicate_small_s,
)


def build_ledger(digits: int = 80) -> list:
    ctx = PrecisionContext(digits)
    return [f(ctx).to_json() for f in ADJUDICATORS]


def write_ledger(path, digits: int = 80) -> list:
    entries = build_ledger(digits)
    Path(path).write_text(json.dumps({"digits": digits, "entries": entries}, indent=2) + "\n")
    return entries


def load_ledger() -> dict:
    text = resources.files("orthoheun").joinpath("errata.json").read_text()
    return json.loads(text)
