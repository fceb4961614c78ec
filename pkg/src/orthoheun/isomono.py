"""Isomonodromic deformation of the Heun-class limits.

Given a triple (sigma, tau, eta) depending on a time t, the deformed
equation adds an apparent singularity at lambda with momentum mu:

    p(x) = tau/sigma - 1/(x - lambda)
    q(x) = (eta(x) - eta(lambda) - mu (tau(lambda) - sigma'(lambda))
            - mu^2 sigma(lambda) + mu sigma(lambda)/(x - lambda)) / sigma(x)

and the deformation phi_t = a phi' + b phi is compatible exactly when
(lambda, mu) follow the Hamiltonian flow of H.  Every t-, x- and
lambda-derivative here is taken with Dual2 on the closed-form parameter
dependence; nothing is differenced.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .integrate import dopri45
from .linode import PoleProximityError, SigmaTauEta, heun_limit
from .mpcore import Dual2, PrecisionContext, d1_of, to_mpf, value_of
from .poly import Rational, padd, pder, peval, pmul, pneg

CASE_OF = {"spg": "B", "df": "B", "gj": "B", "jc": "A"}


class CaseCheckError(ValueError):
    pass


# ---------------------------------------------------------------------------
# gauges m(t)


@dataclass(frozen=True)
class Gauge:
    """m(t) = scale * (the family's gauge function)."""

    family: str
    scale: object = 1

    def __call__(self, t):
        f = self.family
        if f == "spg":
            base = 1 / t
        elif f == "df":
            base = -mpmath.sqrt(2) / 2 + 0 * t
        elif f == "gj":
            base = mpmath.sqrt(2) + 0 * t
        elif f == "jc":
            base = 1 / (t * (t - 1))
        else:
            raise ValueError(f"no gauge for family {f!r}")
        return base * to_mpf(self.scale)

    def describe(self) -> str:
        forms = {"spg": "1/t", "df": "-sqrt(2)/2", "gj": "sqrt(2)", "jc": "1/(t(t-1))"}
        return f"{self.scale} * {forms[self.family]}" if self.scale != 1 else forms[self.family]


def jc_root(t):
    """Case A data for JC: sigma = (x - s) rho with s = t, rho = x(x-1)."""
    return t


def jc_rho(t):
    return [0, -1, 1]


# ---------------------------------------------------------------------------
# Case A / Case B checks


@dataclass(frozen=True)
class CaseReport:
    case: str
    passed: bool
    residuals: dict  # condition name -> max relative residual over the grid
    tolerance: object
    gauge: str
    t: object

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "passed": self.passed,
            "gauge": self.gauge,
            "t": mpmath.nstr(self.t, 20),
            "tolerance": mpmath.nstr(self.tolerance, 5),
            "residuals": {k: mpmath.nstr(v, 5) for k, v in self.residuals.items()},
        }


def _grid(ctx: PrecisionContext, avoid=()):
    """Seven generic sample abscissae (irrational-looking, away from 0, 1 and ``avoid``)."""
    with ctx.workdps():
        pts = [mpf(k) / 7 + mpmath.sqrt(2) / 100 * k for k in (-5, -3, 2, 4, 9, 13, 19)]
        out = []
        for p in pts:
            while any(abs(p - a) < mpf(1) / 50 for a in list(avoid) + [0, 1]):
                p += mpf(1) / 37
            out.append(p)
        return out


def _rel(lhs, rhs):
    lhs, rhs = value_of(lhs), value_of(rhs)
    scale = max(abs(lhs), abs(rhs), mpf(1))
    return abs(lhs - rhs) / scale


def _poly_t(ste: SigmaTauEta, t):
    """Triple at Dual2 time t (first derivative seeded)."""
    return ste.at(Dual2(t, 1, 0))


def check_case_b(ste: SigmaTauEta, gauge: Gauge, t, ctx: PrecisionContext, *, tol=None) -> CaseReport:
    """tau_dot(x)/sigma(x) = m tau''/2 and eta_dot(x) - eta_dot(lam) = m (sigma eta)'''/6 (x - lam)."""
    with ctx.workdps():
        t = to_mpf(t)
        tol = mpf(10) ** (-max(ctx.digits - 60, ctx.digits // 2)) if tol is None else tol
        if not ste.case_b_admissible():
            raise CaseCheckError(f"degree constraint violated: {ste.degrees()}")
        base = ste.at(t)
        dual = _poly_t(ste, t)
        if any(d1_of(c) != 0 for c in dual.sigma):
            raise CaseCheckError("Case B needs sigma independent of t")
        m = gauge(t)
        sigma = [value_of(c) for c in base.sigma]
        tau = [value_of(c) for c in base.tau]
        se = pmul(sigma, [value_of(c) for c in base.eta])
        tau2 = 2 * (tau[2] if len(tau) > 2 else 0)
        se3 = 6 * (se[3] if len(se) > 3 else 0)
        xs = _grid(ctx)
        r21 = mpf(0)
        r22 = mpf(0)
        for x in xs:
            tau_dot = d1_of(peval(list(dual.tau), x))
            r21 = max(r21, _rel(tau_dot / peval(sigma, x), m * tau2 / 2))
            for lam in xs:
                if lam == x:
                    continue
                lhs = d1_of(peval(list(dual.eta), x)) - d1_of(peval(list(dual.eta), lam))
                r22 = max(r22, _rel(lhs, m * se3 / 6 * (x - lam)))
        res = {"t21": r21, "t22": r22}
        return CaseReport("B", all(v < tol for v in res.values()), res, tol, gauge.describe(), t)


def check_case_a(ste: SigmaTauEta, gauge: Gauge, t, ctx: PrecisionContext, *, s=jc_root, rho=jc_rho, tol=None) -> CaseReport:
    """Conditions (T1)-(T3) with sigma = (x - s) rho, all t-derivatives by Dual2.

    In the second condition the gauge m multiplies both bracketed groups on
    the right-hand side.
    """
    with ctx.workdps():
        t = to_mpf(t)
        tol = mpf(10) ** (-max(ctx.digits - 60, ctx.digits // 2)) if tol is None else tol
        T = Dual2(t, 1, 0)
        dual = ste.at(T)
        sv = s(T)
        rho_d = rho(T)
        # sigma(s) = 0 and sigma = (x - s) rho
        if abs(value_of(peval(list(dual.sigma), value_of(sv)))) > tol:
            raise CaseCheckError("sigma(s) != 0")
        m = gauge(t)
        sig = list(dual.sigma)
        tau = list(dual.tau)
        eta = list(dual.eta)
        rho_v = [value_of(c) for c in rho_d]
        s0 = value_of(sv)
        ev = lambda p, x: value_of(peval(p, x))  # noqa: E731
        dot = lambda p, x: d1_of(peval(p, x))  # noqa: E731
        eta_v = [value_of(c) for c in eta]
        rho_eta = pmul(rho_v, eta_v)
        xs = _grid(ctx, avoid=[s0])
        r1 = r2 = r3 = mpf(0)
        for x in xs:
            # d/dt (tau/sigma)(x) at fixed x
            ratio = peval(tau, x) / peval(sig, x)
            lhs1 = d1_of(ratio)
            rhs1 = m * ev(tau, s0) / (x - s0) ** 2
            r1 = max(r1, _rel(lhs1, rhs1))
            sdot_x = dot(sig, x) / ev(sig, x)
            for lam in xs:
                if lam == x:
                    continue
                sdot_l = dot(sig, lam) / ev(sig, lam)
                deta = ev(eta, x) - ev(eta, lam)
                lhs2 = sdot_x * deta - dot(eta, x) + dot(eta, lam)
                inner = deta * (lam - s0) * peval(rho_v, x) / ((x - lam) * (x - s0)) - peval(pder(eta_v), lam) * peval(rho_v, lam)
                bracket = (lam - s0) / (x - lam) ** 2 * (
                    2 * peval(rho_eta, x) - 2 * peval(rho_eta, lam) - (peval(pder(rho_eta), x) + peval(pder(rho_eta), lam)) * (x - lam)
                )
                r2 = max(r2, _rel(lhs2, m * (inner + bracket)))
                lhs3 = sdot_x - sdot_l
                rhs3 = m * peval(rho_v, s0) * (x - lam) / ((x - s0) * (lam - s0))
                r3 = max(r3, _rel(lhs3, rhs3))
        res = {"T1": r1, "T2": r2, "T3": r3}
        return CaseReport("A", all(v < tol for v in res.values()), res, tol, gauge.describe(), t)


def check_case(ste: SigmaTauEta, gauge: Gauge, t, ctx: PrecisionContext, **kw) -> CaseReport:
    if CASE_OF[ste.family] == "B":
        return check_case_b(ste, gauge, t, ctx, **kw)
    return check_case_a(ste, gauge, t, ctx, **kw)


# ---------------------------------------------------------------------------
# Hamiltonians


@dataclass(frozen=True)
class HamiltonianSpec:
    """H(t, lam, mu) = m (eta(lam) + L(lam) mu + sigma(lam) mu^2).

    Case B: L = tau - sigma'.  Case A: L = tau - (lam - s) rho'.
    """

    case: str
    base: SigmaTauEta
    gauge: Gauge
    s: object = None
    rho: object = None

    def parts(self, t):
        ste = self.base.at(t)
        sigma, tau, eta = list(ste.sigma), list(ste.tau), list(ste.eta)
        if self.case == "B":
            lin = padd(tau, pneg(pder(sigma)))
        else:
            lin = padd(tau, pneg(pmul([-self.s(t), 1], pder(self.rho(t)))))
        return self.gauge(t), sigma, lin, eta

    def H(self, t, lam, mu):
        m, sigma, lin, eta = self.parts(t)
        return m * (peval(eta, lam) + peval(lin, lam) * mu + peval(sigma, lam) * mu * mu)

    def dH_dmu(self, t, lam, mu):
        m, sigma, lin, _ = self.parts(t)
        return m * (peval(lin, lam) + 2 * peval(sigma, lam) * mu)

    def dH_dlam(self, t, lam, mu):
        m, sigma, lin, eta = self.parts(t)
        return m * (peval(pder(eta), lam) + peval(pder(lin), lam) * mu + peval(pder(sigma), lam) * mu * mu)

    def vector_field(self, t, state):
        lam, mu = state
        return [self.dH_dmu(t, lam, mu), -self.dH_dlam(t, lam, mu)]

    def lambda_ddot(self, t, lam, mu):
        """d/dt of dH/dmu along the flow: partial_t + partial_lam * lam' + partial_mu * mu'."""
        lam_dot = self.dH_dmu(t, lam, mu)
        mu_dot = -self.dH_dlam(t, lam, mu)
        h_t = self.dH_dmu(Dual2(t, 1, 0), lam, mu).d1
        h_l = self.dH_dmu(t, Dual2(lam, 1, 0), mu).d1
        m, sigma, _, _ = self.parts(t)
        h_m = 2 * m * peval(sigma, lam)
        return h_t + h_l * lam_dot + h_m * mu_dot

    def mu_from_lambda_dot(self, t, lam, lam_dot):
        """The unique mu with dH/dmu(t, lam, mu) = lam_dot."""
        m, sigma, lin, _ = self.parts(t)
        sl = peval(sigma, lam)
        if sl == 0:
            raise ZeroDivisionError("sigma(lambda) = 0: mu is not determined by lambda'")
        return (lam_dot / m - peval(lin, lam)) / (2 * sl)

    def mu_squared_coefficient(self, t, lam):
        m, sigma, _, _ = self.parts(t)
        return m * peval(sigma, lam)

    def compatibility_pair(self, x, t, lam, mu):
        """(a, b) of phi_t = a phi' + b phi."""
        m, sigma, _, _ = self.parts(t)
        if self.case == "B":
            a = m * peval(sigma, x) / (x - lam)
            b = -m * peval(sigma, lam) * mu / (x - lam)
        else:
            s, rho = self.s(t), self.rho(t)
            a = m * (lam - s) * peval(rho, x) / (x - lam)
            b = -m * (lam - s) * peval(rho, lam) * mu / (x - lam)
        return a, b

    def to_json(self, digits: int, t=None) -> dict:
        out = {"case": self.case, "gauge": self.gauge.describe(), "family": self.base.family}
        if t is not None:
            m, sigma, lin, eta = self.parts(to_mpf(t))
            fmt = lambda p: [mpmath.nstr(value_of(c), digits) for c in p]  # noqa: E731
            out.update({"t": mpmath.nstr(to_mpf(t), digits), "m": mpmath.nstr(m, digits),
                        "mu2_coeffs": fmt(sigma), "mu1_coeffs": fmt(lin), "mu0_coeffs": fmt(eta)})
        return out


def hamiltonian(ste: SigmaTauEta, gauge: Gauge | None = None, *, case: str | None = None, s=None, rho=None) -> HamiltonianSpec:
    case = case or CASE_OF[ste.family]
    gauge = gauge or Gauge(ste.family)
    if case == "A":
        s = s or jc_root
        rho = rho or jc_rho
    return HamiltonianSpec(case, ste, gauge, s, rho)


def family_hamiltonian(family: str, n: int, alpha=None, *, scale=1, **extra) -> HamiltonianSpec:
    params = {"n": n, "t": 1}
    if family != "gj":
        params["alpha"] = alpha
    params.update(extra)
    return hamiltonian(heun_limit(family, params), Gauge(family, scale))


def checked_hamiltonian(ste: SigmaTauEta, gauge: Gauge, t, ctx: PrecisionContext) -> HamiltonianSpec:
    """hamiltonian() after the Case A/B check has passed at time t."""
    rep = check_case(ste, gauge, t, ctx)
    if not rep.passed:
        raise CaseCheckError(f"case {rep.case} check failed: {rep.to_json()['residuals']}")
    return hamiltonian(ste, gauge)


# ---------------------------------------------------------------------------
# deformed equation and compatibility


@dataclass(frozen=True)
class DeformedEquation:
    base: SigmaTauEta
    lam: object
    mu: object

    def coefficients(self, x):
        return deformed_pq(self.base, x, self.lam, self.mu)

    def singular_points(self):
        return _real_roots(self.base.sigma) + [self.lam]

    def apparent_singularity(self):
        return self.lam


MU2_CONVENTIONS = ("sigma(lambda)", "sigma(x)")


def deformed_pq(ste: SigmaTauEta, x, lam, mu, *, convention: str = "sigma(lambda)"):
    """p and q of the deformed equation; ``convention`` picks the polynomial
    multiplying mu^2 in q (sigma at lambda, or sigma at x)."""
    sigma, tau, eta = list(ste.sigma), list(ste.tau), list(ste.eta)
    sx = peval(sigma, x)
    sl = peval(sigma, lam)
    s2 = sl if convention == "sigma(lambda)" else sx
    p = peval(tau, x) / sx - 1 / (x - lam)
    q = (
        peval(eta, x)
        - peval(eta, lam)
        - mu * (peval(tau, lam) - peval(pder(sigma), lam))
        - mu * mu * s2
        + mu * sl / (x - lam)
    ) / sx
    return p, q


def compatibility_residual(hs: HamiltonianSpec, t, lam, mu, x, ctx: PrecisionContext, *, frozen: bool = False, convention: str = "sigma(lambda)"):
    """(r1, r2) = (p_t - a p' + 2 b' - p a' + a'', q_t + p b' - 2 q a' - q' a + b'').

    Time derivatives are total derivatives along the Hamiltonian flow
    (lam' = H_mu, mu' = -H_lam); ``frozen`` sets lam' = mu' = 0.
    """
    with ctx.workdps():
        t, lam, mu, x = (to_mpf(v) for v in (t, lam, mu, x))
        if frozen:
            ld = md = mpf(0)
        else:
            ld = hs.dH_dmu(t, lam, mu)
            md = -hs.dH_dlam(t, lam, mu)
        ste = hs.base.at(t)
        X = Dual2(x, 1, 0)
        for z in [lam] + _real_roots(ste.sigma):
            if abs(x - z) < mpf(10) ** -6:
                raise PoleProximityError(x, z)
        p, q = deformed_pq(ste, X, lam, mu, convention=convention)
        a, b = hs.compatibility_pair(X, t, lam, mu)
        # total time derivative: seed t, lam, mu with their velocities
        T = Dual2(t, 1, 0)
        L = Dual2(lam, ld, 0)
        M = Dual2(mu, md, 0)
        pt, qt = deformed_pq(hs.base.at(T), x, L, M, convention=convention)
        r1 = pt.d1 - a.value * p.d1 + 2 * b.d1 - p.value * a.d1 + a.d2
        r2 = qt.d1 + p.value * b.d1 - 2 * q.value * a.d1 - q.d1 * a.value + b.d2
        return r1, r2


def _real_roots(sigma):
    roots = Rational.over([1], [value_of(c) for c in sigma]).poles()
    return [mpmath.re(r) for r in roots if abs(mpmath.im(r)) < mpf(10) ** -20]


# ---------------------------------------------------------------------------
# flows


@dataclass(frozen=True)
class Trajectory:
    family: str
    rows: tuple  # (t, lam, mu, lam_dot, lam_ddot)
    tol: object
    steps: int = 0
    meta: dict = field(default_factory=dict)

    HEADER = ("t", "lambda", "mu", "lambda_dot", "lambda_ddot")

    def to_csv(self, digits: int = 30) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        for row in self.rows:
            w.writerow([mpmath.nstr(v, digits) for v in row])
        return buf.getvalue()

    def to_json(self, digits: int = 30) -> dict:
        return {
            "family": self.family,
            "tol": mpmath.nstr(self.tol, 5),
            "steps": self.steps,
            "columns": list(self.HEADER),
            "rows": [[mpmath.nstr(v, digits) for v in row] for row in self.rows],
            **self.meta,
        }

    @classmethod
    def from_json(cls, doc) -> "Trajectory":
        if isinstance(doc, str):
            doc = json.loads(doc)
        rows = tuple(tuple(mpf(v) for v in r) for r in doc["rows"])
        return cls(doc["family"], rows, mpf(doc["tol"]), doc.get("steps", 0))


def hamilton_flow(hs: HamiltonianSpec, t0, lam0, mu0, t1, tol, ctx: PrecisionContext, *, samples: int = 21, t_eval=None) -> Trajectory:
    """Integrate lam' = H_mu, mu' = -H_lam from t0 to t1 (Dormand-Prince 5(4))."""
    with ctx.workdps():
        t0, t1 = to_mpf(t0), to_mpf(t1)
        if t_eval is None:
            t_eval = [t0 + (t1 - t0) * k / (samples - 1) for k in range(samples)]
        sol = dopri45(hs.vector_field, t0, [to_mpf(lam0), to_mpf(mu0)], t1, to_mpf(tol), t_eval=t_eval)
        rows = []
        for t, (lam, mu) in zip(sol.t, sol.y):
            rows.append((t, lam, mu, hs.dH_dmu(t, lam, mu), hs.lambda_ddot(t, lam, mu)))
        return Trajectory(hs.base.family, tuple(rows), to_mpf(tol), sol.steps)
