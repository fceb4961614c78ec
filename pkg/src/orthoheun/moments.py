"""Moment sequences mu_k = int x^k w(x) dx for the weight families.

Every family has an exact route and a quadrature route.  The exact routes
are: SPG via Bessel K, GJ via (incomplete) gamma functions, JC via the
incomplete beta function, DF via a convergent gamma series, and the SPG
hard-edge weight via the Laguerre-side integral in y = x^2 (Bessel K again
when s = 0).  Quadrature integrates x^k w(x) directly and is the oracle the
exact routes are checked against.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .mpcore import (
    ConvergenceError,
    PrecisionContext,
    bessel_k,
    inc_beta,
    inc_gamma_upper,
    quad_tanh_sinh,
    to_mpf,
)
from .weights import WeightSpec

CLOSED_FORM = "closed-form"
QUADRATURE = "quadrature"


class MomentConsistencyError(ArithmeticError):
    """Exact and quadrature moments disagree beyond tolerance."""


# ---------------------------------------------------------------------------
# exact routes


def _spg_bessel(alpha, t, k, ctx):
    # int_R |x|^(alpha+k) e^{-x^2 - t/x^2} dx = 2 t^{nu/2} K_nu(2 sqrt t), nu = (alpha+k+1)/2
    nu = (alpha + k + 1) / 2
    return 2 * t ** (nu / 2) * bessel_k(nu, 2 * mpmath.sqrt(t), ctx)


def _df_series(e, t, ctx):
    """int_R |x|^e e^{-x^4 + t x^2} dx as (1/2) sum_j t^j/j! Gamma((e+1)/4 + j/2)."""
    boost = int(float(t) ** 2 / 4 / math.log(10)) + 10 if t < 0 else 5
    with mp.workdps(ctx.dps + boost):
        a = (to_mpf(e) + 1) / 4
        t = to_mpf(t)
        if t == 0:
            return mpmath.gamma(a) / 2
        eps = mpf(10) ** (-(ctx.dps + boost))
        gam = [mpmath.gamma(a), mpmath.gamma(a + mpf(1) / 2)]
        total = mpf(0)
        coef = mpf(1)  # t^j / j!
        j = 0
        while True:
            term = coef * gam[j % 2]
            total += term
            if j > 2 * float(t) ** 2 + 20 and abs(term) <= eps * abs(total):
                break
            gam[j % 2] *= a + mpf(j) / 2
            j += 1
            coef = coef * t / j
        return total / 2


def _gj_exact(A, B, t, k, ctx):
    half = (to_mpf(k) + 1) / 2
    full = mpmath.gamma(half) if k % 2 == 0 else mpf(0)
    if B == 0:
        return A * full
    # int_t^inf x^k e^{-x^2} dx
    if t >= 0:
        tail = inc_gamma_upper(half, t * t, ctx) / 2
    else:
        sign = 1 if k % 2 == 0 else -1
        tail = full - sign * inc_gamma_upper(half, t * t, ctx) / 2
    return A * full + B * tail


def _jc_exact(alpha, a, k, ctx):
    if k % 2:
        return mpf(0)
    p = (to_mpf(k) + 1) / 2
    q = alpha + 1
    return mpmath.beta(p, q) - inc_beta(p, q, a * a, ctx)


def _laguerre_side(lam, s, t, k, ctx):
    """int_s^inf y^(k+lam) e^{-y - t/y} dy."""
    e = k + lam
    if s == 0:
        if t == 0:
            return mpmath.gamma(e + 1)
        nu = e + 1
        return 2 * t ** (nu / 2) * bessel_k(nu, 2 * mpmath.sqrt(t), ctx)

    def f(y):
        return y ** e * mpmath.exp(-y - t / y)

    peak = _laguerre_peak(e, t)
    pts = [s, peak] if peak > s else [s]
    return quad_tanh_sinh(f, pts + [mpmath.inf], ctx).value


def _laguerre_peak(e, t):
    # maximum of y^e e^{-y-t/y}: y^2 - e y - t = 0
    return (e + mpmath.sqrt(e * e + 4 * t)) / 2


def exact_moment(w: WeightSpec, k: int, ctx: PrecisionContext) -> mpf:
    """Moment by the family's exact route (see module docstring)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    with ctx.workdps():
        p = {name: to_mpf(v) for name, v in w.params.items()}
        f = w.family
        if f != "gj" and k % 2:
            return mpf(0)
        if f == "spg":
            return _spg_bessel(p["alpha"], p["t"], k, ctx)
        if f == "df":
            return +_df_series(w.params["alpha"] + k, p["t"], ctx)
        if f == "gj":
            return _gj_exact(p["A"], p["B"], p["t"], k, ctx)
        if f == "jc":
            return _jc_exact(p["alpha"], p["a"], k, ctx)
        # hard edge: with y = x^2,
        # int_{|x|>=sqrt s} |x|^(alpha+k) e^{-x^2-t/x^2} dx = int_s^inf y^((alpha+k-1)/2) e^{-y-t/y} dy
        return _laguerre_side((p["alpha"] + k - 1) / 2, p["s"], p["t"], 0, ctx)


# ---------------------------------------------------------------------------
# quadrature oracle


def _peak_even(family, m, t):
    """Location of the maximum of x^m w(x) on x > 0 for the even families."""
    if family == "df":
        return mpmath.sqrt((2 * t + mpmath.sqrt(4 * t * t + 16 * m)) / 8)
    return mpmath.sqrt((m + mpmath.sqrt(m * m + 16 * t)) / 4)


def quadrature_moment(w: WeightSpec, k: int, ctx: PrecisionContext) -> mpf:
    """Moment by direct tanh-sinh integration of x^k w(x) over the support."""
    if k < 0:
        raise ValueError("k must be >= 0")
    with ctx.workdps():
        p = {name: to_mpf(v) for name, v in w.params.items()}
        f = w.family
        if f == "gj":
            A, B, t = p["A"], p["B"], p["t"]
            peak = mpmath.sqrt(mpf(k) / 2)
            pts = sorted({-peak, peak, t} if k else {t, mpf(0)})
            left = [q for q in pts if q <= t]
            right = [q for q in pts if q >= t]

            def g(x):
                return x ** k * mpmath.exp(-x * x)

            total = mpf(0)
            if A != 0:
                total += A * quad_tanh_sinh(g, [-mpmath.inf] + left, ctx).value
            if A + B != 0:
                total += (A + B) * quad_tanh_sinh(g, right + [mpmath.inf], ctx).value
            return total
        if k % 2:
            return mpf(0)
        if f == "jc":
            alpha, a = p["alpha"], p["a"]
            return 2 * quad_tanh_sinh(lambda x: x ** k * (1 - x * x) ** alpha, [a, 1], ctx).value
        m = p["alpha"] + k
        t = p["t"]
        lower = mpmath.sqrt(p["s"]) if f == "spg_hard_edge" else mpf(0)
        if f == "df":
            def g(x):
                return x ** m * mpmath.exp(-x ** 4 + t * x * x)
        else:
            def g(x):
                return x ** m * mpmath.exp(-x * x - t / (x * x))
        if f == "spg_hard_edge" and t == 0:
            def g(x):
                return x ** m * mpmath.exp(-x * x)
        peak = _peak_even(f, m, t) if (m > 0 or t > 0) else mpf(0)
        pts = [lower, peak] if peak > lower else [lower]
        return 2 * quad_tanh_sinh(g, pts + [mpmath.inf], ctx).value


def oracle_context(ctx: PrecisionContext) -> PrecisionContext:
    """Cheaper context for quadrature cross-checks at 10^(-digits/2)."""
    return PrecisionContext(max(50, ctx.digits // 2 + 15), 15)


def moment(w: WeightSpec, k: int, ctx: PrecisionContext) -> mpf:
    return exact_moment(w, k, ctx)


def relative_difference(a, b) -> mpf:
    scale = max(abs(a), abs(b))
    if scale == 0:
        return mpf(0)
    return abs(a - b) / scale


def cross_check(w: WeightSpec, k: int, ctx: PrecisionContext, value=None) -> mpf:
    """Relative difference between the exact moment and the quadrature oracle."""
    octx = oracle_context(ctx)
    with ctx.workdps():
        exact = exact_moment(w, k, ctx) if value is None else value
        try:
            quad = quadrature_moment(w, k, octx)
        except ConvergenceError as exc:
            raise MomentConsistencyError(f"quadrature oracle failed for k={k}: {exc}") from exc
        with ctx.workdps():
            return relative_difference(exact, quad)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class MomentTable:
    weight: WeightSpec
    entries: tuple
    precision: PrecisionContext
    methods: tuple
    checks: dict = field(default_factory=dict)  # k -> relative difference vs quadrature

    @property
    def N(self) -> int:
        return (len(self.entries) - 1) // 2

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def to_rows(self) -> list:
        return [(k, _dec(v, self.precision), m) for k, (v, m) in enumerate(zip(self.entries, self.methods))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "value", "method"])
        writer.writerows(self.to_rows())
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "weight": self.weight.to_json(),
            "digits": self.precision.digits,
            "guard": self.precision.guard,
            "entries": [_dec(v, self.precision) for v in self.entries],
            "methods": list(self.methods),
            "checks": {str(k): mpmath.nstr(v, 5) for k, v in sorted(self.checks.items())},
        }

    @classmethod
    def from_json(cls, doc) -> "MomentTable":
        if isinstance(doc, str):
            doc = json.loads(doc)
        ctx = PrecisionContext(doc["digits"], doc["guard"])
        with ctx.workdps():
            entries = tuple(mpf(v) for v in doc["entries"])
        return cls(WeightSpec.from_json(doc["weight"]), entries, ctx, tuple(doc["methods"]))


def _dec(v, ctx: PrecisionContext) -> str:
    return mpmath.nstr(v, ctx.dps)


def _exact_job(args):
    doc, k, digits, guard = args
    ctx = PrecisionContext(digits, guard)
    w = WeightSpec.from_json(doc)
    with ctx.workdps():
        return mpmath.nstr(exact_moment(w, k, ctx), ctx.dps + 5)


def moment_table(w: WeightSpec, N: int, ctx: PrecisionContext, *, check: bool = True, jobs: int = 1) -> MomentTable:
    """Moments mu_0..mu_{2N}, with quadrature spot checks at k in {0,1,2,N,2N}."""
    if N < 0:
        raise ValueError("N must be >= 0")
    ks = range(2 * N + 1)
    with ctx.workdps():
        if jobs > 1:
            doc = w.to_json()
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                strs = list(pool.map(_exact_job, [(doc, k, ctx.digits, ctx.guard) for k in ks]))
            entries = tuple(mpf(s) for s in strs)
        else:
            entries = tuple(exact_moment(w, k, ctx) for k in ks)
    checks = {}
    if check:
        tol = mpf(10) ** (-(ctx.digits // 2))
        for k in sorted({0, 1, 2, N, 2 * N} & set(ks)):
            rd = cross_check(w, k, ctx, entries[k])
            checks[k] = rd
            if rd > tol:
                raise MomentConsistencyError(
                    f"{w.family} moment k={k}: exact vs quadrature relative difference {mpmath.nstr(rd, 5)}"
                )
    return MomentTable(w, entries, ctx, tuple(CLOSED_FORM for _ in ks), checks)


def quadrature_table(w: WeightSpec, N: int, ctx: PrecisionContext) -> MomentTable:
    with ctx.workdps():
        entries = tuple(quadrature_moment(w, k, ctx) for k in range(2 * N + 1))
    return MomentTable(w, entries, ctx, tuple(QUADRATURE for _ in entries))


def verify_spg_bessel_form(ctx: PrecisionContext, points=None) -> list:
    """Check the Bessel-K moment formula against quadrature at several (alpha, t, k).

    Returns (alpha, t, k, relative difference) rows; also evaluates the
    formula with the variable read literally as x = 1 to show it is not that.
    """
    from fractions import Fraction

    from .weights import spg

    points = points or [
        (Fraction(1), Fraction(1, 10), 0),
        (Fraction(1), Fraction(1), 2),
        (Fraction(1, 2), Fraction(3, 7), 4),
        (Fraction(3), Fraction(2), 6),
        (Fraction(5, 3), Fraction(1, 20), 10),
    ]
    rows = []
    for alpha, t, k in points:
        w = spg(alpha, t)
        rows.append((alpha, t, k, cross_check(w, k, ctx)))
    return rows
