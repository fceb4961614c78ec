"""Arbitrary-precision primitives shared by every other module.

Everything here runs on mpmath ``mpf`` numbers.  Functions take a
:class:`PrecisionContext` and evaluate under ``digits + guard`` decimal
digits; the returned values are plain ``mpf`` at that precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mp, mpf


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation failed to reach the requested accuracy."""


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = 250
    guard: int = 30

    def __post_init__(self):
        if self.digits < 50:
            raise ValueError(f"digits must be >= 50, got {self.digits}")
        if self.guard < 0:
            raise ValueError(f"guard must be >= 0, got {self.guard}")

    @property
    def dps(self) -> int:
        return self.digits + self.guard

    def workdps(self, extra: int = 0):
        return mp.workdps(self.dps + extra)

    def tol(self, exponent_shift: int = 0) -> mpf:
        """10**(-digits + exponent_shift) at the working precision."""
        with self.workdps():
            return mpf(10) ** (-self.digits + exponent_shift)

    def for_degree(self, n: int) -> "PrecisionContext":
        """Context with enough digits for Hankel work up to degree ``n``."""
        need = 12 * n + 100
        if need <= self.digits:
            return self
        return PrecisionContext(need, self.guard)


def to_mpf(value) -> mpf:
    """Convert user-facing numbers exactly.

    Floats are read through their shortest decimal repr, so ``0.1`` means
    the decimal one tenth rather than the nearest binary double.
    """
    if isinstance(value, mpf):
        return +value
    if isinstance(value, Fraction):
        return mpf(value.numerator) / value.denominator
    if isinstance(value, float):
        return mpf(repr(value))
    if isinstance(value, (int, str)):
        return mpf(value)
    if isinstance(value, Dual2):
        raise TypeError("to_mpf called on a Dual2")
    return mpf(value)


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, mpf):
        return Fraction(mpmath.nstr(value, mp.dps, min_fixed=-mp.inf, max_fixed=mp.inf))
    return Fraction(value)


# ---------------------------------------------------------------------------
# second-order forward-mode differentiation


class Dual2:
    """Truncated Taylor number ``value + d1*e + d2*e**2/2``.

    ``d1`` and ``d2`` are the first and second derivatives with respect to
    one seed variable.  Coefficients can be any field elements (mpf, float,
    Fraction), which lets the product and chain rules be tested exactly.
    """

    __slots__ = ("value", "d1", "d2")

    def __init__(self, value, d1=0, d2=0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def variable(cls, value):
        return cls(value, 1, 0)

    def __repr__(self):
        return f"Dual2({self.value!r}, {self.d1!r}, {self.d2!r})"

    @staticmethod
    def _lift(other):
        return other if isinstance(other, Dual2) else Dual2(other, 0, 0)

    def __add__(self, other):
        if not isinstance(other, Dual2):
            return Dual2(self.value + other, self.d1, self.d2)
        return Dual2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.value, -self.d1, -self.d2)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Dual2):
            return Dual2(self.value * other, self.d1 * other, self.d2 * other)
        return Dual2(
            self.value * other.value,
            self.d1 * other.value + self.value * other.d1,
            self.d2 * other.value + 2 * self.d1 * other.d1 + self.value * other.d2,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        if self.value == 0:
            raise ZeroDivisionError("Dual2 reciprocal of zero")
        inv = 1 / self.value
        return Dual2(inv, -self.d1 * inv * inv, (2 * self.d1 * self.d1 * inv - self.d2) * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, Dual2):
            return Dual2(self.value / other, self.d1 / other, self.d2 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, power):
        if isinstance(power, Dual2):
            return exp(log(self) * power)
        if isinstance(power, int):
            if power == 0:
                return Dual2(self.value ** 0, 0 * self.d1, 0 * self.d2)
            if power < 0:
                return (self ** (-power)).reciprocal()
            result = Dual2(self.value ** 0, 0 * self.d1, 0 * self.d2)
            base = self
            while power:
                if power & 1:
                    result = result * base
                power >>= 1
                if power:
                    base = base * base
            return result
        v = self.value ** power
        f1 = power * self.value ** (power - 1)
        f2 = power * (power - 1) * self.value ** (power - 2)
        return _chain(self, v, f1, f2)

    def __eq__(self, other):
        other = Dual2._lift(other)
        return (self.value, self.d1, self.d2) == (other.value, other.d1, other.d2)

    def __hash__(self):
        return hash((self.value, self.d1, self.d2))

    def __abs__(self):
        return -self if self.value < 0 else self


def _chain(u: Dual2, f0, f1, f2) -> Dual2:
    return Dual2(f0, f1 * u.d1, f2 * u.d1 * u.d1 + f1 * u.d2)


def sqrt(u):
    if not isinstance(u, Dual2):
        return mpmath.sqrt(u)
    r = mpmath.sqrt(u.value)
    return _chain(u, r, 1 / (2 * r), -1 / (4 * r * u.value))


def exp(u):
    if not isinstance(u, Dual2):
        return mpmath.exp(u)
    e = mpmath.exp(u.value)
    return _chain(u, e, e, e)


def log(u):
    if not isinstance(u, Dual2):
        return mpmath.log(u)
    return _chain(u, mpmath.log(u.value), 1 / u.value, -1 / (u.value * u.value))


def value_of(u):
    return u.value if isinstance(u, Dual2) else u


def d1_of(u):
    return u.d1 if isinstance(u, Dual2) else 0


def d2_of(u):
    return u.d2 if isinstance(u, Dual2) else 0


# ---------------------------------------------------------------------------
# tanh-sinh family quadrature


@dataclass(frozen=True)
class QuadResult:
    value: object  # mpf, or list of mpf for vector integrands
    error: mpf
    levels: int
    evaluations: int


def _nodes(kind: str, a, b, tau):
    """Abscissa and weight of the double-exponential map at ``tau``."""
    half_pi = mp.pi / 2
    sh = half_pi * mpmath.sinh(tau)
    ch = half_pi * mpmath.cosh(tau)
    if kind == "finite":
        e = mpmath.exp(-2 * abs(sh))
        # 1 - tanh|sh| computed without cancellation
        one_minus = 2 * e / (1 + e)
        half = (b - a) / 2
        if sh >= 0:
            x = b - half * one_minus
        else:
            x = a + half * one_minus
        cosh_sh = (1 + e) / (2 * mpmath.sqrt(e))
        w = half * ch / (cosh_sh * cosh_sh)
        return x, w
    if kind == "upper":  # [a, inf)
        ex = mpmath.exp(sh)
        return a + ex, ch * ex
    if kind == "lower":  # (-inf, b]
        ex = mpmath.exp(sh)
        return b - ex, ch * ex
    # whole line
    return mpmath.sinh(sh), ch * mpmath.cosh(sh)


def _accumulate(total, fx, w):
    if total is None:
        return [w * v for v in fx] if isinstance(fx, (list, tuple)) else w * fx
    if isinstance(fx, (list, tuple)):
        for i, v in enumerate(fx):
            total[i] += w * v
        return total
    return total + w * fx


def _magnitude(v):
    if isinstance(v, list):
        return max((abs(x) for x in v), default=mpf(0))
    return abs(v)


def _segment(f, kind, a, b, eps, max_level):
    tiny = eps * eps
    h = mpf(1)
    tau_max = mpmath.asinh(4 * mp.dps * math.log(10) / mp.pi)  # generous cut-off

    def sweep(start, step):
        acc = None
        count = 0
        for sign in (1, -1):
            quiet = 0
            j = start
            while True:
                tau = sign * j * h
                if abs(tau) > tau_max:
                    break
                if j == 0 and sign == -1:
                    j += step
                    continue
                x, w = _nodes(kind, a, b, tau)
                if w == 0 or (kind == "finite" and not (a < x < b)):
                    break
                fx = f(x)
                count += 1
                acc = _accumulate(acc, fx, w)
                term = _magnitude(fx) * w
                ref = _magnitude(acc) if acc is not None else mpf(0)
                if j > 0 and term <= tiny * ref:
                    quiet += 1
                    if quiet >= 2:
                        break
                else:
                    quiet = 0
                j += step
        return acc, count

    total, evals = sweep(0, 1)
    estimate = _scale(total, h)
    prev_diff = None
    for level in range(1, max_level + 1):
        h /= 2
        extra, n_new = sweep(1, 2)
        evals += n_new
        if extra is None:
            extra = [mpf(0)] * len(total) if isinstance(total, list) else mpf(0)
        total = _sum(total, extra)
        new_estimate = _scale(total, h)
        diff = _diff(new_estimate, estimate)
        estimate = new_estimate
        size = _rel_size(estimate)
        if diff <= eps * size:
            return estimate, diff, level, evals
        if prev_diff is not None and prev_diff > 0 and diff > 0 and level >= 3:
            d1 = mpmath.log10(diff / size)
            d2 = mpmath.log10(prev_diff / size)
            if d2 < 0 and d1 < d2:
                predicted = mpf(10) ** (d1 * d1 / d2) * size
                if d1 < -4 and predicted <= eps * size:
                    return estimate, max(predicted, diff * diff / size), level, evals
        prev_diff = diff
    raise ConvergenceError(
        f"tanh-sinh did not converge on {kind} segment [{mpmath.nstr(a, 8)}, {mpmath.nstr(b, 8)}]"
    )


def _scale(total, h):
    if isinstance(total, list):
        return [h * v for v in total]
    return h * total


def _sum(a, b):
    if isinstance(a, list):
        return [x + y for x, y in zip(a, b)]
    return a + b


def _diff(a, b):
    if isinstance(a, list):
        return max(abs(x - y) for x, y in zip(a, b))
    return abs(a - b)


def _rel_size(v):
    if isinstance(v, list):
        # componentwise tolerance is handled by the caller scaling; use max
        return max(max(abs(x) for x in v), mpf(10) ** (-mp.dps))
    return max(abs(v), mpf(10) ** (-mp.dps))


def quad_tanh_sinh(
    f: Callable,
    points: Sequence,
    ctx: PrecisionContext,
    *,
    max_level: int = 12,
    componentwise: bool = False,
) -> QuadResult:
    """Integrate ``f`` over the union of the intervals between ``points``.

    ``points`` is an increasing sequence whose first/last entries may be
    ``-mpmath.inf``/``mpmath.inf``.  Finite pieces use tanh-sinh, half-lines
    exp-sinh and the whole line sinh-sinh.  ``f`` may return a list, in which
    case all components share the same nodes; with ``componentwise=True``
    each component is integrated to its own relative accuracy.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    with ctx.workdps():
        pts = [p if p in (mpmath.inf, -mpmath.inf) else to_mpf(p) for p in points]
        # aim past the requested digits so sums of several pieces stay clean
        eps = mpf(10) ** (-(ctx.digits + ctx.guard // 2))
        total = None
        err = mpf(0)
        levels = 0
        evals = 0
        for a, b in zip(pts[:-1], pts[1:]):
            if a == -mpmath.inf and b == mpmath.inf:
                kind = "line"
            elif b == mpmath.inf:
                kind = "upper"
            elif a == -mpmath.inf:
                kind = "lower"
            else:
                kind = "finite"
                if a == b:
                    continue
                if a > b:
                    raise ValueError("points must be increasing")
            if componentwise:
                val, e, lv, ev = _segment_componentwise(f, kind, a, b, eps, max_level)
            else:
                val, e, lv, ev = _segment(f, kind, a, b, eps, max_level)
            total = val if total is None else _sum(total, val)
            err += e
            levels = max(levels, lv)
            evals += ev
        return QuadResult(total, err, levels, evals)


def _segment_componentwise(f, kind, a, b, eps, max_level):
    # normalise every component by a first pass so the shared stopping rule
    # demands full relative accuracy on each nonzero component
    probe, _, _, _ = _segment(f, kind, a, b, mpf(10) ** (-min(20, mp.dps // 4)), max_level)
    scales = [abs(v) if v != 0 else mpf(1) for v in probe]

    def g(x):
        return [v / s for v, s in zip(f(x), scales)]

    val, e, lv, ev = _segment(g, kind, a, b, eps, max_level)
    return [v * s for v, s in zip(val, scales)], e, lv, ev


# ---------------------------------------------------------------------------
# special functions


def _is_integer(nu) -> bool:
    return nu == mpmath.floor(nu)


def _bessel_i_series(nu, x):
    """I_nu(x) by its power series; nu may be negative non-integer."""
    half = x / 2
    q = half * half
    term = half ** nu / mpmath.gamma(nu + 1) if not (nu < 0 and _is_integer(nu)) else mpf(0)
    total = term
    eps = mpf(10) ** (-mp.dps - 5)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + nu))
        total += term
        if k > 5 and abs(term) <= eps * abs(total):
            return total


def _bessel_k_integer_series(n: int, x):
    half = x / 2
    q = half * half
    eps = mpf(10) ** (-mp.dps - 5)
    first = mpf(0)
    if n > 0:
        term = mpmath.factorial(n - 1)
        first = term
        for k in range(1, n):
            term = term * (-q) / (k * (n - k))
            first += term
        first = first / (2 * half ** n)
    i_n = _bessel_i_series(mpf(n), x)
    log_part = (-1) ** (n + 1) * mpmath.log(half) * i_n
    # psi(k+1) + psi(n+k+1)
    psi_a = -mp.euler
    psi_b = -mp.euler + mpmath.harmonic(n)
    term = mpf(1) / mpmath.factorial(n)
    s = (psi_a + psi_b) * term
    k = 0
    while True:
        k += 1
        term = term * q / (k * (n + k))
        psi_a += mpf(1) / k
        psi_b += mpf(1) / (n + k)
        contrib = (psi_a + psi_b) * term
        s += contrib
        if k > 5 and abs(contrib) <= eps * abs(s):
            break
    return first + log_part + (-1) ** n * half ** n * s / 2


def bessel_k(nu, x, ctx: PrecisionContext) -> mpf:
    """Modified Bessel function of the second kind ``K_nu(x)`` for real x > 0.

    Power series below x = 10, the integral
    ``K_nu(x) = int_0^inf exp(-x cosh u) cosh(nu u) du`` above.
    """
    with ctx.workdps():
        nu = abs(to_mpf(nu))
        x = to_mpf(x)
        if x <= 0:
            raise DomainError(f"bessel_k needs x > 0, got {x}")
        if x >= 10:
            def integrand(u):
                return mpmath.exp(-x * (mpmath.cosh(u) - 1)) * mpmath.cosh(nu * u)

            peak = mpmath.asinh(nu / x) if nu > x else mpf(0)
            pts = [0, peak] if peak > 0 else [0]
            res = quad_tanh_sinh(integrand, pts + [mpmath.inf], ctx)
            return +(res.value * mpmath.exp(-x))

        boost = int(2 * float(x) / math.log(10)) + 15
        near = mpmath.nint(nu)
        with mp.workdps(ctx.dps):
            distance = abs(nu - near)
        if distance == 0 or distance < mpf(10) ** (-ctx.dps):
            with mp.workdps(ctx.dps + boost + int(near) // 2):
                val = _bessel_k_integer_series(int(near), mpf(x))
            return +val
        sin_loss = max(0, int(-math.log10(float(abs(mpmath.sin(mp.pi * nu))) + 1e-300))) + 5
        with mp.workdps(ctx.dps + boost + sin_loss):
            nu_w, x_w = mpf(nu), mpf(x)
            val = mp.pi / 2 * (_bessel_i_series(-nu_w, x_w) - _bessel_i_series(nu_w, x_w)) / mpmath.sin(mp.pi * nu_w)
        return +val


def ln_gamma(z, ctx: PrecisionContext) -> mpf:
    with ctx.workdps():
        return mpmath.loggamma(to_mpf(z))


def ln_barnes_g(z, ctx: PrecisionContext) -> mpf:
    """Natural log of the Barnes G-function for real z > 0.

    The argument is shifted into [1, 2) with ``G(z+1) = Gamma(z) G(z)`` and
    then ``ln G(1+w) = w(1-w)/2 + (w/2) ln 2pi + w lnGamma(w) - int_0^w lnGamma``.
    """
    with ctx.workdps():
        z = to_mpf(z)
        if z <= 0:
            raise DomainError(f"ln_barnes_g needs z > 0, got {z}")
        shift = mpf(0)
        while z >= 2:
            z -= 1
            shift += mpmath.loggamma(z)
        while z < 1:
            shift -= mpmath.loggamma(z)
            z += 1
        w = z - 1
        if w == 0:
            return +shift
        integral = quad_tanh_sinh(mpmath.loggamma, [0, w], ctx).value
        base = w * (1 - w) / 2 + w / 2 * mpmath.log(2 * mp.pi) + w * mpmath.loggamma(w) - integral
        return base + shift


def inc_gamma_upper(a, x, ctx: PrecisionContext) -> mpf:
    """Upper incomplete gamma ``Gamma(a, x)`` (not regularized)."""
    with ctx.workdps():
        a, x = to_mpf(a), to_mpf(x)
        if x < 0:
            raise DomainError(f"inc_gamma_upper needs x >= 0, got {x}")
        if x == 0 and a <= 0:
            raise DomainError("Gamma(a, 0) diverges for a <= 0")
        return mpmath.gammainc(a, x, mpmath.inf)


def inc_beta(a, b, x, ctx: PrecisionContext) -> mpf:
    """Incomplete beta ``B(x; a, b) = int_0^x y^(a-1) (1-y)^(b-1) dy``."""
    with ctx.workdps():
        a, b, x = to_mpf(a), to_mpf(b), to_mpf(x)
        if not 0 <= x <= 1:
            raise DomainError(f"inc_beta needs 0 <= x <= 1, got {x}")
        if a <= 0 or b <= 0:
            raise DomainError("inc_beta needs a, b > 0")
        return mpmath.betainc(a, b, 0, x)
