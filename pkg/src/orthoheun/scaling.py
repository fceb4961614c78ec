"""Double scaling of the hard-edge singularly perturbed Gaussian ensemble.

The even weight |x|^alpha e^{-x^2 - t/x^2} on |x| >= sqrt(s) splits, under
y = x^2, into two Laguerre-type weights y^lam e^{-y - t/y} on [s, inf) with
lam = (alpha -+ 1)/2.  Even-index norms come from the first system and
odd-index norms from the second, so

    D_{2n}   = Dt_n(lam+) Dt_n(lam-)
    D_{2n+1} = Dt_n(lam+) Dt_{n+1}(lam-)

This module checks those identities, evaluates the constant block built
from Barnes G, assembles the three asymptotic expansions of ln Delta (as
printed and as the sum of the two per-lam expansions) and computes the
finite-n scaled determinant ratio the expansions describe.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .moments import MomentTable, _laguerre_side, moment_table, quadrature_table
from .mpcore import PrecisionContext, ln_barnes_g, ln_gamma, to_fraction, to_mpf
from .orthopoly import RecurrenceTable, build_recurrence, hankel_determinant_lu
from .weights import spg_hard_edge

REGIMES = ("largeS", "smallS", "largeT")


@dataclass(frozen=True)
class ScalingSpec:
    n: int
    s: object
    t: object
    alpha: object

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if to_mpf(self.s) < 0 or to_mpf(self.t) < 0 or to_mpf(self.alpha) <= 0:
            raise ValueError("need s >= 0, t >= 0 and alpha > 0")

    @property
    def scaled_s(self):
        return to_mpf(self.s) / (4 * self.n)

    @property
    def scaled_t(self):
        return to_mpf(self.t) / (2 * self.n + 1 + to_mpf(self.alpha))


# ---------------------------------------------------------------------------
# Laguerre-side systems


@dataclass(frozen=True)
class LaguerreSideWeight:
    """y^lam e^{-y - t/y} on [s, inf); not symmetric, so no parity skipping."""

    lam: object
    s: object
    t: object
    family: str = "laguerre_side"
    is_even: bool = False

    def to_json(self) -> dict:
        return {"family": self.family, "params": {k: mpmath.nstr(to_mpf(getattr(self, k)), 30) for k in ("lam", "s", "t")}}


def laguerre_side_moments(lam, s, t, N: int, ctx: PrecisionContext) -> MomentTable:
    with ctx.workdps():
        lam, s, t = to_mpf(lam), to_mpf(s), to_mpf(t)
        entries = tuple(_laguerre_side(lam, s, t, k, ctx) for k in range(2 * N + 1))
    method = "closed-form" if s == 0 else "quadrature"
    return MomentTable(LaguerreSideWeight(lam, s, t), entries, ctx, tuple(method for _ in entries))


def laguerre_side_tables(alpha, s, t, n_max: int, ctx: PrecisionContext) -> tuple:
    """(table at lam = (alpha-1)/2, table at lam = (alpha+1)/2)."""
    with ctx.workdps():
        a = to_mpf(alpha)
        out = []
        for lam in ((a - 1) / 2, (a + 1) / 2):
            out.append(build_recurrence(laguerre_side_moments(lam, s, t, n_max, ctx), n_max, ctx))
        return tuple(out)


def laguerre_norms_closed_form(lam, m: int, ctx: PrecisionContext):
    """Classical Laguerre norm m! Gamma(m + lam + 1) (s = t = 0)."""
    with ctx.workdps():
        return mpmath.exp(ln_gamma(m + 1, ctx) + ln_gamma(m + to_mpf(lam) + 1, ctx))


def ln_hankel_zero(lam, n: int, ctx: PrecisionContext):
    """ln Dt_n(0, 0, lam) = sum_{m<n} ln(m! Gamma(m + lam + 1))."""
    with ctx.workdps():
        return mpmath.fsum(ln_gamma(m + 1, ctx) + ln_gamma(m + to_mpf(lam) + 1, ctx) for m in range(n))


def ln_full_hankel_zero(alpha, N: int, ctx: PrecisionContext):
    """ln D_N(0, 0) of |x|^alpha e^{-x^2} from the even/odd split."""
    with ctx.workdps():
        a = to_mpf(alpha)
        lo, hi = (a - 1) / 2, (a + 1) / 2
        return ln_hankel_zero(lo, (N + 1) // 2, ctx) + ln_hankel_zero(hi, N // 2, ctx)


@dataclass(frozen=True)
class FactorizationReport:
    n: int
    even_error: object  # |D_2n - Dt_n(+) Dt_n(-)| / D_2n
    odd_error: object  # |D_2n+1 - Dt_n(+) Dt_n+1(-)| / D_2n+1
    D_even: object
    D_odd: object

    def to_json(self, digits: int = 10) -> dict:
        f = lambda v: mpmath.nstr(v, digits)  # noqa: E731
        return {"n": self.n, "evenError": f(self.even_error), "oddError": f(self.odd_error), "D2n": f(self.D_even), "D2n+1": f(self.D_odd)}


def factorization_check(alpha, s, t, n: int, ctx: PrecisionContext) -> FactorizationReport:
    """Compare raw Hankel determinants of the full weight (x-space quadrature,
    LU determinant) against products of the two Laguerre-side determinants."""
    with ctx.workdps():
        full = quadrature_table(spg_hard_edge(alpha, t, s), 2 * n, ctx)
        d_even = hankel_determinant_lu(full, 2 * n, ctx)
        d_odd = hankel_determinant_lu(full, 2 * n + 1, ctx)
        lo, hi = laguerre_side_tables(alpha, s, t, n + 1, ctx)
        even = hi.D[n] * lo.D[n]
        odd = hi.D[n] * lo.D[n + 1]
        return FactorizationReport(n, abs(d_even - even) / abs(d_even), abs(d_odd - odd) / abs(d_odd), d_even, d_odd)


def norm_split_errors(alpha, s, t, m_max: int, ctx: PrecisionContext) -> list:
    """max relative gaps |h_2m - ht_m(lam-)| and |h_2m+1 - ht_m(lam+)| for m <= m_max."""
    with ctx.workdps():
        full = build_recurrence(moment_table(spg_hard_edge(alpha, t, s), 2 * m_max + 1, ctx, check=False), 2 * m_max + 1, ctx)
        lo, hi = laguerre_side_tables(alpha, s, t, m_max, ctx)
        out = []
        for m in range(m_max + 1):
            out.append((m, abs(full.h[2 * m] - lo.h[m]) / lo.h[m], abs(full.h[2 * m + 1] - hi.h[m]) / hi.h[m]))
        return out


# ---------------------------------------------------------------------------
# constant block


def c_term(s, t, lam, ctx: PrecisionContext):
    """ln(G(lam+1)/(2 pi)^(lam/2)) + lam t/(2s)."""
    with ctx.workdps():
        s, t, lam = to_mpf(s), to_mpf(t), to_mpf(lam)
        if s == 0:
            raise ValueError("c_term needs s > 0")
        return ln_barnes_g(lam + 1, ctx) - lam / 2 * mpmath.log(2 * mpmath.pi) + lam * t / (2 * s)


def barnes_block(alpha, ctx: PrecisionContext):
    """ln[G((alpha+3)/2) G((alpha+1)/2)] - (alpha/2) ln(2 pi)."""
    with ctx.workdps():
        a = to_mpf(alpha)
        return ln_barnes_g((a + 3) / 2, ctx) + ln_barnes_g((a + 1) / 2, ctx) - a / 2 * mpmath.log(2 * mpmath.pi)


def c_term_sum(alpha, s, t, ctx: PrecisionContext):
    """The closed form of C(lam-) + C(lam+): Barnes block + alpha t/(2s)."""
    with ctx.workdps():
        s, t, a = to_mpf(s), to_mpf(t), to_mpf(alpha)
        if s == 0:
            raise ValueError("c_term_sum needs s > 0")
        return barnes_block(a, ctx) + a * t / (2 * s)


# ---------------------------------------------------------------------------
# expansions


@dataclass(frozen=True)
class Term:
    coefficient: object
    power: Fraction  # s^power
    log: bool = False  # coefficient * ln s when set (power is then 0)
    label: str = ""

    @property
    def half_power(self):
        p = 2 * self.power
        return int(p) if p.denominator == 1 else None

    def value(self, s):
        if self.log:
            return self.coefficient * mpmath.log(s)
        return self.coefficient * mpmath.power(s, mpf(self.power.numerator) / self.power.denominator)


@dataclass(frozen=True)
class Expansion:
    regime: str
    variant: str
    terms: tuple
    constant_term: object
    alpha: object
    t: object

    def evaluate(self, s):
        return self.constant_term + mpmath.fsum(term.value(s) for term in self.terms)

    def breakdown(self, s) -> list:
        return [(term.label, term.value(s)) for term in self.terms]

    def coefficient_map(self) -> dict:
        out: dict = {}
        for term in self.terms:
            key = (term.power, term.log)
            out[key] = out.get(key, 0) + term.coefficient
        return out

    def to_json(self, digits: int = 20, s=None) -> dict:
        f = lambda v: mpmath.nstr(v, digits)  # noqa: E731
        doc = {
            "regime": self.regime,
            "variant": self.variant,
            "alpha": f(self.alpha),
            "t": f(self.t),
            "constant": f(self.constant_term),
            "terms": [{"label": tm.label, "power": str(tm.power), "log": tm.log, "coefficient": f(tm.coefficient)} for tm in self.terms],
        }
        if s is not None:
            s = to_mpf(s)
            doc["s"] = f(s)
            doc["value"] = f(self.evaluate(s))
            doc["termValues"] = [f(v) for _, v in self.breakdown(s)]
        return doc


def _F(p, q=1):
    return Fraction(p, q)


def _printed_terms(regime, a, t):
    """Two-lam expansion terms in their reference form; the alpha t/(2s) part of
    the constant block is merged into the 1/s term (largeS) or listed separately."""
    if regime == "largeS":
        return [
            Term(mpf(-1) / 2, _F(1), label="-s/2"),
            Term(a, _F(1, 2), label="alpha sqrt(s)"),
            Term(-(a * a + 1) / 8, _F(0), True, "-(alpha^2+1)/8 ln s"),
            Term(a / 8 - 2 * t, _F(-1, 2), label="(alpha/8 - 2t)/sqrt(s)"),
            Term((a * a + 16 * a * t + 1) / 32, _F(-1), label="(alpha^2+16 alpha t+1)/(32 s)"),
            Term(a ** 3 / 96 + 7 * a / 128 + t / 4, _F(-3, 2), label="(alpha^3/96+7alpha/128+t/4) s^-3/2"),
            Term(a ** 4 / 256 + 15 * a * a / 256 + a * t / 8 + mpf(5) / 128, _F(-2), label="(alpha^4/256+15alpha^2/256+alpha t/8+5/128) s^-2"),
        ]
    if regime == "smallS":
        return [
            Term(a * t / 2, _F(-1), label="alpha t/(2s) [constant block]"),
            Term(-2 * t, _F(-1, 2), label="-2t/sqrt(s)"),
            Term(a * a / 8, _F(0), True, "(alpha^2/8) ln s"),
            Term(a, _F(1, 2), label="alpha sqrt(s)"),
            Term(mpf(-1) / 2, _F(1), label="-s/2"),
            Term(1 / (4 * t), _F(3, 2), label="s^3/2/(4t)"),
            Term(-a / (8 * t * t), _F(5, 2), label="-alpha s^5/2/(8t^2)"),
            Term(1 / (8 * t * t), _F(3), label="s^3/(8t^2)"),
            Term((a * a / 8 - mpf(23) / 128) / t ** 3, _F(7, 2), label="(alpha^2/8-23/128) s^7/2/t^3"),
            Term(-a / (8 * t ** 3), _F(4), label="-alpha s^4/(8t^3)"),
        ]
    if regime == "largeT":
        return [
            Term(a * t / 2, _F(-1), label="alpha t/(2s) [constant block]"),
            Term(-2 * t, _F(-1, 2), label="-2t/sqrt(s)"),
            Term(mpf(-1) / 2, _F(1), label="-s/2"),
            Term(a, _F(1, 2), label="alpha sqrt(s)"),
            Term(-a * a / 8, _F(0), True, "-(alpha^2/8) ln s"),
            Term(1 / (4 * t), _F(3, 2), label="s^3/2/(4t)"),
            Term(1 / (8 * t * t), _F(3), label="s^3/(8t^2)"),
            Term(-a / (8 * t * t), _F(5, 2), label="-alpha s^5/2/(8t^2)"),
            Term(mpf(16) / (192 * t ** 3), _F(9, 2), label="16 s^9/2/(192t^3)"),
            Term(-24 * a / (192 * t ** 3), _F(4), label="-24 alpha s^4/(192t^3)"),
            Term((12 * a * a - 69) / (192 * t ** 3), _F(7, 2), label="(12alpha^2-69) s^7/2/(192t^3)"),
            Term(mpf(8) / (128 * t ** 4), _F(6), label="8 s^6/(128t^4)"),
            Term(-16 * a / (128 * t ** 4), _F(11, 2), label="-16 alpha s^11/2/(128t^4)"),
            Term((12 * a * a - 96) / (128 * t ** 4), _F(5), label="(12alpha^2-96) s^5/(128t^4)"),
            Term((-4 * a ** 3 + 87 * a) / (128 * t ** 4), _F(9, 2), label="(-4alpha^3+87alpha) s^9/2/(128t^4)"),
        ]
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


# exponent of the lam^3 term in the large-s single-lam expansion: as typeset
# (-2/3) or as the half-integer progression requires (-3/2)
LARGE_S_EXPONENTS = {"corrected": _F(-3, 2), "as-printed": _F(-2, 3)}


def single_lambda_terms(regime, lam, t, *, exponent: str = "corrected"):
    """Per-lam expansion of ln Delta(s, t, lam) without its C block."""
    L = lam
    if regime == "largeS":
        return [
            Term(mpf(-1) / 4, _F(1)),
            Term(L, _F(1, 2)),
            Term(-L * L / 4, _F(0), True),
            Term(L / 8 - t, _F(-1, 2)),
            Term(L * L / 16, _F(-1)),
            Term(L ** 3 / 24 + 3 * L / 128 + t / 8, LARGE_S_EXPONENTS[exponent]),
            Term(L ** 4 / 32 + 9 * L * L / 128 + L * t / 8, _F(-2)),
        ]
    if regime == "smallS":
        return [
            Term(-t, _F(-1, 2)),
            Term((1 - 4 * L * L) / 16, _F(0), True),
            Term(L, _F(1, 2)),
            Term(mpf(-1) / 4, _F(1)),
            Term(1 / (8 * t), _F(3, 2)),
            Term(-L / (8 * t * t), _F(5, 2)),
            Term(1 / (16 * t * t), _F(3)),
            Term((L * L / 8 - mpf(27) / 128) / t ** 3, _F(7, 2)),
            Term(-L / (8 * t ** 3), _F(4)),
        ]
    if regime == "largeT":
        c3 = 1 / (24 * t ** 3)
        c4 = 1 / (32 * t ** 4)
        return [
            Term(-t, _F(-1, 2)),
            Term(mpf(-1) / 4, _F(1)),
            Term(L, _F(1, 2)),
            Term((1 - 4 * L * L) / 16, _F(0), True),
            Term(1 / (8 * t), _F(3, 2)),
            Term(-L / (8 * t * t), _F(5, 2)),
            Term(1 / (16 * t * t), _F(3)),
            Term(c3, _F(9, 2)),
            Term(-3 * L * c3, _F(4)),
            Term((3 * L * L - mpf(81) / 16) * c3, _F(7, 2)),
            Term(c4, _F(6)),
            Term(-4 * L * c4, _F(11, 2)),
            Term((6 * L * L - mpf(27) / 2) * c4, _F(5)),
            Term((-4 * L ** 3 + 99 * L / 4) * c4, _F(9, 2)),
        ]
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def expansion(regime: str, alpha, t, ctx: PrecisionContext, *, variant: str = "printed", exponent: str = "corrected") -> Expansion:
    """The printed two-lam expansion, or the sum of the two per-lam expansions
    (``variant="recomputed"``) with the C blocks summed in closed form."""
    with ctx.workdps():
        a, t = to_mpf(alpha), to_mpf(t)
        const = barnes_block(a, ctx)
        if variant == "printed":
            return Expansion(regime, variant, tuple(_printed_terms(regime, a, t)), const, a, t)
        if variant != "recomputed":
            raise ValueError("variant must be 'printed' or 'recomputed'")
        acc: dict = {(_F(-1), False): a * t / 2}
        order = [(_F(-1), False)]
        for lam in ((a - 1) / 2, (a + 1) / 2):
            for term in single_lambda_terms(regime, lam, t, exponent=exponent):
                key = (term.power, term.log)
                if key not in acc:
                    acc[key] = mpf(0)
                    order.append(key)
                acc[key] += term.coefficient
        if regime == "largeS":
            order = sorted(order, key=lambda k: (-k[0], not k[1]))
        terms = tuple(Term(acc[k], k[0], k[1], _term_label(k)) for k in order)
        return Expansion(regime, f"recomputed ({exponent})" if regime == "largeS" else variant, terms, const, a, t)


def _term_label(key) -> str:
    power, log = key
    return "ln s" if log else f"s^{power}"


def ln_delta_expansion(regime, alpha, s, t, ctx: PrecisionContext, *, variant: str = "printed", exponent: str = "corrected"):
    """(value, per-term breakdown, warnings)."""
    with ctx.workdps():
        s, t = to_mpf(s), to_mpf(t)
        warnings = []
        if regime == "largeS" and s < 10:
            warnings.append("largeS expansion used at s < 10")
        if regime == "smallS" and s > mpf(1) / 10:
            warnings.append("smallS expansion used at s > 1/10")
        if regime == "largeT" and t < 10:
            warnings.append("largeT expansion used at t < 10")
        exp = expansion(regime, alpha, t, ctx, variant=variant, exponent=exponent)
        return exp.evaluate(s), [("constant", exp.constant_term)] + exp.breakdown(s), warnings


@dataclass(frozen=True)
class CoefficientComparison:
    power: Fraction
    log: bool
    printed: object
    recomputed: object

    @property
    def agrees(self) -> bool:
        p = self.printed if self.printed is not None else mpf(0)
        r = self.recomputed if self.recomputed is not None else mpf(0)
        return abs(p - r) <= mpf(10) ** (-(mpmath.mp.dps // 2)) * max(1, abs(p), abs(r))

    def to_json(self, digits: int = 15) -> dict:
        f = lambda v: None if v is None else mpmath.nstr(v, digits)  # noqa: E731
        return {"term": "ln s" if self.log else f"s^{self.power}", "printed": f(self.printed), "recomputed": f(self.recomputed), "agrees": self.agrees}


def compare_expansions(regime, alpha, t, ctx: PrecisionContext, *, exponent: str = "corrected") -> list:
    """Per-term printed vs recomputed coefficients (union of terms)."""
    with ctx.workdps():
        pm = expansion(regime, alpha, t, ctx).coefficient_map()
        rm = expansion(regime, alpha, t, ctx, variant="recomputed", exponent=exponent).coefficient_map()
        keys = list(pm) + [k for k in rm if k not in pm]
        return [CoefficientComparison(k[0], k[1], pm.get(k), rm.get(k)) for k in keys]


def decay_ratios(exp: Expansion, s) -> list:
    """|term_{k+1}/term_k| along the term order."""
    vals = [abs(v) for _, v in exp.breakdown(to_mpf(s))]
    return [vals[k + 1] / vals[k] for k in range(len(vals) - 1)]


# ---------------------------------------------------------------------------
# finite-n ratios


def scaled_hankel(alpha, s, t, N: int, ctx: PrecisionContext) -> RecurrenceTable:
    """Recurrence table of the full hard-edge weight up to D_N."""
    with ctx.workdps():
        w = spg_hard_edge(alpha, t, s)
        m = moment_table(w, N, ctx, check=False)
        return build_recurrence(m, N, ctx)


def numeric_delta(alpha, s, t, n: int, ctx: PrecisionContext, *, parity: str = "even", zero_check: bool = True):
    """ln[D_N(s/(4n), t/(2n+1+alpha)) / D_N(0, 0)], N = 2n (even) or 2n+1 (odd).

    D_N(0, 0) comes from the same moment pipeline and is compared with the
    Gamma-product closed form.
    """
    ScalingSpec(n, s, t, alpha)
    N = 2 * n if parity == "even" else 2 * n + 1
    with ctx.workdps():
        a = to_mpf(alpha)
        if to_mpf(s) == 0 and to_mpf(t) == 0:
            return mpf(0)
        # exact rational scaled parameters, so the weight is specified without rounding
        sf, tf, af = to_fraction(s), to_fraction(t), to_fraction(alpha)
        num = scaled_hankel(af, sf / (4 * n), tf / (2 * n + 1 + af), N, ctx).D[N]
        den_closed = ln_full_hankel_zero(a, N, ctx)
        if zero_check:
            den = scaled_hankel(a, 0, 0, N, ctx).D[N]
            gap = abs(mpmath.log(den) - den_closed)
            if gap > mpf(10) ** (-(ctx.digits // 2)):
                raise ArithmeticError(f"D_{N}(0,0) pipeline vs closed form differ by {mpmath.nstr(gap, 5)}")
        return mpmath.log(num) - den_closed


def delta_trend(alpha, s, t, ns, ctx: PrecisionContext, *, parity: str = "even") -> list:
    """(n, ln numeric Delta, largeS expansion value, gap) rows."""
    with ctx.workdps():
        target = expansion("largeS", alpha, t, ctx).evaluate(to_mpf(s))
        rows = []
        for n in ns:
            v = numeric_delta(alpha, s, t, n, ctx, parity=parity)
            rows.append((n, v, target, v - target))
        return rows


def trend_csv(rows, digits: int = 20) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "ln_delta_numeric", "ln_delta_expansion", "gap"])
    for n, v, e, g in rows:
        w.writerow([n, mpmath.nstr(v, digits), mpmath.nstr(e, digits), mpmath.nstr(g, digits)])
    return buf.getvalue()
