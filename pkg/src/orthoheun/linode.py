"""Second-order linear ODEs with rational coefficients.

Covers the finite-n equations y'' + T_n y' + Q_n y = 0 for the four weight
families, the large-n Heun-class limits written as sigma u'' + tau u' +
eta u = 0, the general Heun equation and the equation satisfied by its
weighted derivative, and residual evaluation for all of them.

Where a published coefficient formula admits more than one reading, every
reading is constructible through a ``variant`` or ``reading`` argument so the
residual tests can decide between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .mpcore import DomainError, Dual2, PrecisionContext, sqrt, to_mpf, value_of
from .poly import Rational, X, degree, padd, peval, peval2, pmul, pscale

FAMILIES = ("spg", "df", "gj", "jc")


class PoleProximityError(DomainError):
    def __init__(self, x, pole):
        super().__init__(f"x = {mpmath.nstr(x, 10)} lies within pole tolerance of {mpmath.nstr(pole, 10)}")
        self.x = x
        self.pole = pole


def _num(v):
    """Parameters arrive as int, Fraction, str, mpf or Dual2."""
    if isinstance(v, Dual2):
        return v
    return to_mpf(v)


# ---------------------------------------------------------------------------
# rational-coefficient equations


@dataclass(frozen=True)
class RationalODE2:
    """y'' + p(x) y' + q(x) y = 0."""

    p: Rational
    q: Rational
    label: str = ""
    meta: dict = field(default_factory=dict)

    def poles(self) -> list:
        return self.p.poles() + self.q.poles()

    def check_point(self, x, ctx: PrecisionContext):
        tol = mpf(10) ** (-(ctx.digits // 4))
        xv = value_of(x)
        for z in self.poles():
            if abs(xv - z) < tol:
                raise PoleProximityError(xv, z)

    def coefficients(self, x, ctx: PrecisionContext, *, check: bool = True):
        """(p(x), q(x)); x may be a Dual2 for derivatives in x."""
        with ctx.workdps():
            if check:
                self.check_point(x, ctx)
            return self.p.evaluate(x), self.q.evaluate(x)

    def to_json(self, digits: int) -> dict:
        out = {"label": self.label, "p": self.p.to_json(digits), "q": self.q.to_json(digits)}
        if self.meta:
            out["meta"] = {k: (mpmath.nstr(v, digits) if isinstance(v, mpf) else v) for k, v in self.meta.items()}
        return out


def residual(ode, f, fp, fpp, x, ctx: PrecisionContext, *, normalized: bool = False):
    """|f'' + p f' + q f| for a RationalODE2, |sigma f'' + tau f' + eta f| for a SigmaTauEta.

    The normalized variant divides by the largest of the three terms.
    """
    with ctx.workdps():
        if isinstance(ode, SigmaTauEta):
            a = peval(ode.sigma, x) * fpp
            b = peval(ode.tau, x) * fp
            c = peval(ode.eta, x) * f
        else:
            p, q = ode.coefficients(x, ctx)
            a, b, c = fpp, p * fp, q * f
        r = abs(a + b + c)
        if not normalized:
            return r
        scale = max(abs(a), abs(b), abs(c))
        return r / scale if scale else mpf(0)


# ---------------------------------------------------------------------------
# finite-n equations

SPG_VARIANTS = {"dropped": Fraction(1), "multiplied": Fraction(8), "divided": Fraction(1, 8)}


def spg_ode(n: int, alpha, t, beta_prev, beta_n, beta_next, *, variant: str = "dropped") -> RationalODE2:
    """Finite-n equation for the singularly perturbed Gaussian polynomials.

    ``variant`` says what to do with the lone factor 8 trailing the fourth
    term of Q_n: drop it, multiply the term by it, or divide by it.
    """
    if variant not in SPG_VARIANTS:
        raise ValueError(f"variant must be one of {tuple(SPG_VARIANTS)}")
    c = to_mpf(SPG_VARIANTS[variant])
    al, t = _num(alpha), _num(t)
    bp, b, bn = _num(beta_prev), _num(beta_n), _num(beta_next)
    A = 2 * b + 2 * bn - al - 2 * n - 1
    s = 1 if n % 2 == 0 else -1
    x2A = [A, 0, 2]  # 2x^2 + A
    xx = [0, 1]
    T = (
        Rational.over([2 * A], xx, x2A)
        + Rational.poly([0, -2])
        + Rational.over([2 * t], (xx, 3))
        + Rational.over([al], xx)
    )
    E = [(1 - s) * t, 0, 2 * b - n]  # (2 beta_n - n) x^2 + (1 - s) t
    Q = (
        Rational.over([-(2 * b - n)], (xx, 2))
        + Rational.over([-3 * (1 - s) * t], (xx, 4))
        + Rational.over(pscale(E, 2 * A), (xx, 4), x2A)
        # (2x - (1+s) t / x^3 + (2 beta_n - n - alpha)/x) * E / x^3 * c
        - Rational.over(pscale(pmul([-(1 + s) * t, 0, 2 * b - n - al, 0, 2], E), c), (xx, 6))
        + Rational.over(pscale(pmul(x2A, [2 * bp + 2 * b - al - 2 * n + 1, 0, 2]), b), (xx, 4))
    )
    return RationalODE2(T, Q, f"spg n={n} variant={variant}", {"A": value_of(A)})


DF_READINGS = ("split", "merged", "over-den")
DF_COEFFICIENTS = ("2alpha+1", "alpha")


def df_ode(
    n: int, alpha, t, beta_prev, beta_n, beta_next, *, reading: str = "split", coefficient: str = "2alpha+1"
) -> RationalODE2:
    """Finite-n equation for the deformed Freud polynomials.

    ``coefficient`` picks the constant L written as 2 alpha + 1 in the
    displayed formulas: "2alpha+1" uses it literally, "alpha" replaces it
    by alpha.  The equation holds when L is the power of |x| in the weight,
    so with the weight |x|^alpha exp(-x^4 + t x^2) the "alpha" choice is
    the one that works.

    ``reading`` resolves the last line of Q_n:
      split     -(8 b x^2 + L(1-s)) / D + L(1-s)(t - 1/(2x^2))
      merged    -(8 b x^2 + L(1-s)(t - 1/(2x^2))) / D
      over-den  -(8 b x^2 + L(1-s)) / D + L(1-s)(t - 1/(2x^2)) / D
    with s = (-1)^n and D = x^2 - t/2 + beta_n + beta_{n+1}.
    """
    if reading not in DF_READINGS:
        raise ValueError(f"reading must be one of {DF_READINGS}")
    if coefficient not in DF_COEFFICIENTS:
        raise ValueError(f"coefficient must be one of {DF_COEFFICIENTS}")
    al, t = _num(alpha), _num(t)
    bp, b, bn = _num(beta_prev), _num(beta_n), _num(beta_next)
    L = 2 * al + 1 if coefficient == "2alpha+1" else al
    s = 1 if n % 2 == 0 else -1
    xx = [0, 1]
    D = [b + bn - t / 2, 0, 1]
    T = Rational.poly([0, 2 * t, 0, -4]) + Rational.over([L], xx) - Rational.over([0, 2], D)
    Q = Rational.const(4 * b + 16 * b * (b + bn - t / 2) * (b + bp - t / 2) + 4 * L * s * b) + Rational.poly([0, 0, 4 * n])
    odd = L * (1 - s)
    # t - 1/(2x^2) = (2 t x^2 - 1) / (2 x^2)
    tail = Rational.over([-odd, 0, 2 * t * odd], ([0, 0, 2], 1))
    head = Rational.over([odd, 0, 8 * b], D)
    if reading == "split":
        Q = Q - head + tail
    elif reading == "merged":
        Q = Q - Rational.over([0, 0, 8 * b], D) - tail / Rational.poly(D)
    else:
        Q = Q - head + tail / Rational.poly(D)
    return RationalODE2(T, Q, f"df n={n} reading={reading} coefficient={coefficient}")


@dataclass(frozen=True)
class AuxiliaryQuantities:
    """R_n and its derivative in the deformation parameter, plus the JC-derived r_n, beta_n."""

    Rn: object
    RnPrime: object
    rn: object = None
    betaN: object = None
    source: str = "supplied"


def gj_asymptotic_aux(n: int, t) -> AuxiliaryQuantities:
    """R_n(t) ~ 2 sqrt(6n)/3 + 4t/3, R_n'(t) ~ 4/3."""
    t = _num(t)
    return AuxiliaryQuantities(2 * sqrt(mpf(6) * n) / 3 + 4 * t / 3, mpf(4) / 3, source="asymptotic")


def jc_asymptotic_aux(n: int, alpha, a) -> AuxiliaryQuantities:
    """R_n(a) ~ (2an + 2 alpha a + a + 1)/(1 - a^2), with its a-derivative."""
    al, a = _num(alpha), _num(a)
    num = 2 * a * n + 2 * al * a + a + 1
    den = 1 - a * a
    R = num / den
    Rp = (2 * n + 2 * al + 1) / den + 2 * a * num / den ** 2
    return jc_auxiliary(n, alpha, a, R, Rp, source="asymptotic")


def jc_auxiliary(n: int, alpha, a, R, Rp, *, source: str = "supplied") -> AuxiliaryQuantities:
    """Fill in r_n(a) and beta_n(a) from (R_n, R_n')."""
    al, a, R, Rp = _num(alpha), _num(a), _num(R), _num(Rp)
    K = 2 * al + 2 * n + 1
    a21 = a * a - 1
    r = a * (-a21 * Rp + a21 * R * R + 2 * a * (al + n) * R) / (2 * (a21 * R + a * K))
    beta = ((r + n) * (r + 2 * al + n) / (a * R + K) - a * r * r / R) / (2 * n + 2 * al - 1)
    return AuxiliaryQuantities(R, Rp, r, beta, source)


def gj_ode(n: int, t, aux: AuxiliaryQuantities) -> RationalODE2:
    """Finite-n equation for the Gaussian weight with a jump, in terms of R_n(t)."""
    t = _num(t)
    R, Rp = aux.Rn, aux.RnPrime
    xt = [-t, 1]
    lin = [R - 2 * t, 2]  # 2x - 2t + R
    T = Rational.over([R], xt, lin) + Rational.poly([0, -2])
    c1 = Rp - R * R + 2 * t * R
    Q = (
        Rational.const(2 * n)
        - Rational.over([c1 / 4], (xt, 2))
        + Rational.over([R * c1 / 4], (xt, 2), lin)
        + Rational.over([(Rp * Rp - R ** 4 + 4 * t * R ** 3 + (8 * n - 4 * t * t) * R * R) / (8 * R)], xt)
    )
    return RationalODE2(T, Q, f"gj n={n}", {"Rn": value_of(R), "RnPrime": value_of(Rp)})


JC_READINGS = ("inner", "outer")


def jc_ode(n: int, alpha, a, aux: AuxiliaryQuantities, *, reading: str = "outer") -> RationalODE2:
    """Finite-n equation for the Jacobi weight with the gap (-a, a).

    The last numerator carries an unbalanced parenthesis around the beta_n
    term; "inner" reads it as 4((alpha+n)^2 - 1) beta_n, "outer" as
    (4(alpha+n)^2 - 1) beta_n.  The variable written z in one denominator
    of T_n is taken to be x.
    """
    if reading not in JC_READINGS:
        raise ValueError(f"reading must be one of {JC_READINGS}")
    al, a = _num(alpha), _num(a)
    if aux.rn is None:
        aux = jc_auxiliary(n, alpha, a, aux.Rn, aux.RnPrime, source=aux.source)
    R, r, beta = aux.Rn, aux.rn, aux.betaN
    K = 2 * al + 2 * n + 1
    a2 = a * a
    F = [-1, 0, 1]  # x^2 - 1
    G = [-a2, 0, 1]  # x^2 - a^2
    H = [a * (1 - a2) * R - a2 * K, 0, K]  # (a - a^3) R + (x^2 - a^2) K
    T = Rational.over([0, 2 * (al + 1)], F) + Rational.over([0, 2], G) - Rational.over([0, 2 * K], H)
    q1 = pscale([a2 * K + a * (a2 - 1) * R, 0, K], (1 - a2) * r)
    G2 = pmul(G, G)
    q2 = pscale(padd(pscale(G2, K), pscale([a2, 0, -3], a * (a2 - 1) * R)), -n)
    c3 = 4 * ((al + n) ** 2 - 1) if reading == "inner" else 4 * (al + n) ** 2 - 1
    const = (n * n + 2 * al * n) * a2 + 2 * (a2 - 1) * (al + n) * r + c3 * beta - n * (2 * al + n)
    q3 = [const, 0, -(n * n + 2 * al * n)]
    Q = Rational.over(q1, F, G, H) + Rational.over(q2, F, G, H) + Rational.over(q3, G, F)
    return RationalODE2(T, Q, f"jc n={n} reading={reading}", {"Rn": value_of(R), "rn": value_of(r), "betaN": value_of(beta)})


# ---------------------------------------------------------------------------
# Heun-class triples


@dataclass(frozen=True)
class SigmaTauEta:
    """sigma(x) u'' + tau(x) u' + eta(x) u = 0 with polynomial coefficients.

    ``params`` holds the closed-form parameter dependence, so the triple can
    be rebuilt at a different (possibly Dual2) value of the deformation
    parameter ``t`` with :meth:`at`.
    """

    sigma: tuple
    tau: tuple
    eta: tuple
    family: str
    params: dict
    time_param: str = "t"

    def __post_init__(self):
        if degree(list(self.sigma)) < 0:
            raise ValueError("sigma must not vanish identically")

    def at(self, t) -> "SigmaTauEta":
        return heun_limit(self.family, {**self.params, self.time_param: t})

    def degrees(self) -> dict:
        d = lambda p: degree([value_of(c) for c in p])  # noqa: E731
        return {
            "sigma": d(self.sigma),
            "tau": d(self.tau),
            "eta": d(self.eta),
            "sigma_eta": d(pmul(list(self.sigma), list(self.eta))),
        }

    def satisfies_degree_bounds(self, bound_sigma_eta: int = 4) -> bool:
        """deg sigma <= 3, deg tau <= 2, deg(sigma eta) <= bound_sigma_eta."""
        d = self.degrees()
        return d["sigma"] <= 3 and d["tau"] <= 2 and d["sigma_eta"] <= bound_sigma_eta

    def case_b_admissible(self) -> bool:
        d = self.degrees()
        return d["sigma"] <= 2 and d["sigma_eta"] <= 3

    def to_ode(self) -> RationalODE2:
        sig = list(self.sigma)
        return RationalODE2(Rational.over(list(self.tau), sig), Rational.over(list(self.eta), sig), f"{self.family} heun")

    def to_json(self, digits: int) -> dict:
        fmt = lambda c: mpmath.nstr(value_of(c), digits)  # noqa: E731
        return {
            "family": self.family,
            "params": {k: str(v) if isinstance(v, (int, Fraction, str)) else fmt(v) for k, v in self.params.items()},
            "sigma": [fmt(c) for c in self.sigma],
            "tau": [fmt(c) for c in self.tau],
            "eta": [fmt(c) for c in self.eta],
        }


GJ_ETA_VARIANTS = ("n^(3/2)", "n^(2/3)")


def heun_limit(family: str, params: dict) -> SigmaTauEta:
    """The large-n Heun-class equation for one family.

    params: spg {n, alpha, t}; df {n, alpha, t}; gj {n, t, eta?}; jc {n, alpha, t} with t = a^2
    (``a`` may be given instead of ``t``).  For GJ, ``eta`` chooses between
    4 sqrt(3) n^(3/2)/9 and 4 sqrt(6) n^(2/3)/9.
    """
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"heun_limit: unknown family {family!r}")
    p = dict(params)
    n = p["n"]
    if family == "jc" and "t" not in p:
        p["t"] = _num(p.pop("a")) ** 2
    t = _num(p["t"])
    r2 = sqrt(mpf(2))
    if family == "spg":
        al = _num(p["alpha"])
        sigma = (0, 0, 1)
        tau = (r2, (1 + al) / 2, -r2 * t / 2)
        eta = (0, r2 * t * (2 * n + al) / 8)
    elif family == "df":
        al = _num(p["alpha"])
        sigma = (0, 1)
        tau = (1 + al, r2 * t / 2, -1)
        eta = (sqrt(mpf(6)) * mpf(n) ** mpf(1.5) / 9,)
    elif family == "gj":
        choice = p.setdefault("eta", GJ_ETA_VARIANTS[0])
        if choice not in GJ_ETA_VARIANTS:
            raise ValueError(f"gj eta must be one of {GJ_ETA_VARIANTS}")
        sigma = (0, 1)
        tau = (1, -r2 * t, -1)
        if choice == "n^(3/2)":
            eta = (4 * sqrt(mpf(3)) * mpf(n) ** (mpf(3) / 2) / 9,)
        else:
            eta = (4 * sqrt(mpf(6)) * mpf(n) ** (mpf(2) / 3) / 9,)
    else:
        al = _num(p["alpha"])
        # x(x-1)(x-t)
        sigma = tuple(pmul(pmul(X, [-1, 1]), [-t, 1]))
        tau = tuple(
            padd(
                padd(pscale(pmul([-1, 1], [-t, 1]), mpf(-1) / 2), pscale(pmul(X, [-t, 1]), 1 + al)),
                pmul(X, [-1, 1]),
            )
        )
        eta = (-n * sqrt(t) / 4, -n * (n + 2 * al + 1) / mpf(4))
    return SigmaTauEta(tuple(sigma), tuple(tau), tuple(eta), family, p)


# ---------------------------------------------------------------------------
# general and deformed Heun


@dataclass(frozen=True)
class HeunGeneral:
    """y'' + (g/x + d/(x-1) + e/(x-a)) y' + (al be x - q)/(x(x-1)(x-a)) y = 0."""

    gamma: object
    delta: object
    epsilon: object
    alpha: object
    beta: object
    q: object
    a: object
    fuchs_tol: object = None

    def __post_init__(self):
        vals = [_num(v) for v in (self.gamma, self.delta, self.epsilon, self.alpha, self.beta, self.q, self.a)]
        for name, v in zip(("gamma", "delta", "epsilon", "alpha", "beta", "q", "a"), vals):
            object.__setattr__(self, name, v)
        tol = self.fuchs_tol if self.fuchs_tol is not None else mpf(10) ** (-(mpmath.mp.dps // 2))
        gap = self.gamma + self.delta + self.epsilon - self.alpha - self.beta - 1
        if abs(value_of(gap)) > tol:
            raise ValueError(f"Fuchs relation violated by {mpmath.nstr(value_of(gap), 5)}")
        if value_of(self.a) in (0, 1):
            raise ValueError("singular point a must differ from 0 and 1")

    def ode(self) -> RationalODE2:
        x, a = X, self.a
        p = Rational.over([self.gamma], x) + Rational.over([self.delta], [-1, 1]) + Rational.over([self.epsilon], [-a, 1])
        q = Rational.over([-self.q, self.alpha * self.beta], x, [-1, 1], [-a, 1])
        return RationalODE2(p, q, "heun general")

    def weight_factor(self, x):
        """x^gamma (x-1)^delta (x-a)^epsilon, for real x where the powers are defined."""
        return x ** self.gamma * (x - 1) ** self.delta * (x - self.a) ** self.epsilon

    def singular_points(self) -> list:
        return [mpf(0), mpf(1), self.a, mpmath.inf]


def heun_general_jc(n: int, alpha, t) -> HeunGeneral:
    """The JC limit as a general Heun equation: exponents (-1/2, 1+alpha, 1) at (0, 1, t)."""
    al, t = _num(alpha), _num(t)
    return HeunGeneral(mpf(-1) / 2, 1 + al, mpf(1), (n + 2 * al + 1) / 2, mpf(-n) / 2, n * sqrt(t) / 4, t)


def heun_deformed_derivative(h: HeunGeneral, *, sign: int = -1) -> RationalODE2:
    """Equation for v = x^gamma (x-1)^delta (x-a)^epsilon y' when y solves ``h``.

    v'' + ((1-g)/x + (1-d)/(x-1) + (1-e)/(x-a) + sign al be/(al be x - q)) v'
        + (al be x - q)/(x(x-1)(x-a)) v = 0

    sign = -1 is the form the derivative actually satisfies; sign = +1 is
    kept so the alternative can be tested.  The extra singularity sits at
    x = q/(al be).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ab = h.alpha * h.beta
    if value_of(ab) == 0:
        raise ValueError("alpha * beta must be nonzero")
    a = h.a
    p = (
        Rational.over([1 - h.gamma], X)
        + Rational.over([1 - h.delta], [-1, 1])
        + Rational.over([1 - h.epsilon], [-a, 1])
        + Rational.over([sign * ab], [-h.q, ab])
    )
    q = Rational.over([-h.q, ab], X, [-1, 1], [-a, 1])
    return RationalODE2(p, q, f"deformed heun sign={sign:+d}", {"apparent": value_of(h.q / ab)})


def deformed_singular_points(h: HeunGeneral) -> list:
    return [mpf(0), mpf(1), value_of(h.a), value_of(h.q / (h.alpha * h.beta)), mpmath.inf]


# ---------------------------------------------------------------------------
# convergence of scaled exact polynomials to the Heun limits


def scaled_derivatives(coeffs, y, family: str, params: dict):
    """(u, u', u'') at y where u(y) = P(x(y)) for the family's change of variable.

    spg: x = 2^(-1/4) t^(1/2) y^(1/2); df: x = 2^(-1/4) y^(1/2); gj: x = y/sqrt 2 + t; jc: x = y^(1/2).
    """
    y = to_mpf(y)
    yd = Dual2(y, 1, 0)
    t = _num(params.get("t", 0))
    if family == "spg":
        x = mpf(2) ** (mpf(-1) / 4) * sqrt(t) * sqrt(yd)
    elif family == "df":
        x = mpf(2) ** (mpf(-1) / 4) * sqrt(yd)
    elif family == "gj":
        x = yd / sqrt(mpf(2)) + t
    elif family == "jc":
        x = sqrt(yd)
    else:
        raise ValueError(f"unknown family {family!r}")
    # chain rule through Dual2: P(x(y)) with x a Dual2 in y
    v = peval(list(coeffs), x)
    return v.value, v.d1, v.d2


def heun_residual_rms(coeffs, ste: SigmaTauEta, ys, ctx: PrecisionContext):
    """RMS over ``ys`` of the normalized residual of the scaled polynomial in the triple."""
    with ctx.workdps():
        vals = []
        for y in ys:
            u, up, upp = scaled_derivatives(coeffs, y, ste.family, ste.params)
            vals.append(residual(ste, u, up, upp, to_mpf(y), ctx, normalized=True))
        return mpmath.sqrt(mpmath.fsum(v * v for v in vals) / len(vals))


def fit_auxiliary(build, coeffs, xs, guess, ctx: PrecisionContext):
    """Solve for (R_n, R_n') making the equation hold exactly at the two points ``xs``.

    ``build(R, Rp)`` returns the RationalODE2 for given auxiliary values and
    ``coeffs`` is the exact polynomial.  Used to test the GJ/JC coefficient
    formulas without the (external) exact R_n: if the formula is right, the
    fitted equation also holds at every other x.
    """
    with ctx.workdps():
        pts = [to_mpf(x) for x in xs]

        def eqs(R, Rp):
            ode = build(R, Rp)
            out = []
            for x in pts:
                f, d, dd = peval2(list(coeffs), x)
                p, q = ode.coefficients(x, ctx, check=False)
                out.append((dd + p * d + q * f) / max(abs(dd), abs(f), abs(d)))
            return out

        sol = mpmath.findroot(eqs, tuple(_num(g) for g in guess), tol=mpf(10) ** (-(ctx.digits * 2 // 3)), maxsteps=200)
        return sol[0], sol[1]
