"""Dense polynomials and rational functions with factored denominators.

Coefficient lists run from the constant term upward.  Coefficients may be
mpf, Fraction or Dual2, so the same code serves numeric evaluation and
forward-mode differentiation in a parameter.

A :class:`Rational` keeps its denominator as a product of (factor, power)
pairs.  Adding two rationals takes the least common multiple of the factor
lists, which keeps the degrees of the per-family ODE coefficients small
without any symbolic gcd machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf


def trim(p):
    p = list(p)
    while len(p) > 1 and _is_zero(p[-1]):
        p.pop()
    return p or [0]


def _is_zero(c):
    try:
        return c == 0
    except TypeError:
        return False


def degree(p) -> int:
    p = trim(p)
    if len(p) == 1 and _is_zero(p[0]):
        return -1
    return len(p) - 1


def padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def pneg(p):
    return [-c for c in p]


def psub(p, q):
    return padd(p, pneg(q))


def pscale(p, c):
    return [c * a for a in p]


def pmul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if _is_zero(a):
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def ppow(p, k: int):
    out = [1]
    for _ in range(k):
        out = pmul(out, p)
    return out


def pder(p, order: int = 1):
    for _ in range(order):
        p = [k * p[k] for k in range(1, len(p))] or [0]
    return p


def peval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def peval2(p, x):
    """p(x), p'(x), p''(x)."""
    v = d = dd = 0 * x
    for c in reversed(p):
        dd = dd * x + 2 * d
        d = d * x + v
        v = v * x + c
    return v, d, dd


def pcompose(p, q):
    """p(q(x))."""
    out = [0]
    for c in reversed(p):
        out = padd(pmul(out, q), [c])
    return out


def _same(p, q) -> bool:
    p, q = trim(p), trim(q)
    return len(p) == len(q) and all(a == b for a, b in zip(p, q))


X = [0, 1]


@dataclass(frozen=True)
class Rational:
    num: tuple
    den: tuple = ()  # ((factor coeffs, power), ...)

    @staticmethod
    def const(c) -> "Rational":
        return Rational((c,))

    @staticmethod
    def poly(p) -> "Rational":
        return Rational(tuple(p))

    @staticmethod
    def over(num, *factors) -> "Rational":
        """num / prod(factors); each factor is a coefficient list or (list, power)."""
        den = []
        for f in factors:
            if isinstance(f, tuple) and len(f) == 2 and isinstance(f[1], int) and isinstance(f[0], (list, tuple)):
                den.append((tuple(f[0]), f[1]))
            else:
                den.append((tuple(f), 1))
        return Rational(tuple(num) if isinstance(num, (list, tuple)) else (num,), ())._divide_by(den)

    def _divide_by(self, factors) -> "Rational":
        merged = [list(fp) for fp in self.den]
        for f, k in factors:
            for entry in merged:
                if _same(entry[0], f):
                    entry[1] += k
                    break
            else:
                merged.append([tuple(f), k])
        return Rational(self.num, tuple((tuple(f), k) for f, k in merged))

    def den_poly(self):
        out = [1]
        for f, k in self.den:
            out = pmul(out, ppow(list(f), k))
        return out

    def _lcm(self, other):
        merged = [list(fp) for fp in self.den]
        for f, k in other.den:
            for entry in merged:
                if _same(entry[0], f):
                    entry[1] = max(entry[1], k)
                    break
            else:
                merged.append([f, k])
        return merged

    def _lift(self, lcm):
        # numerator multiplied by lcm / own denominator
        mult = [1]
        for f, k in lcm:
            own = 0
            for g, j in self.den:
                if _same(g, f):
                    own = j
            if k > own:
                mult = pmul(mult, ppow(list(f), k - own))
        return pmul(list(self.num), mult)

    def __add__(self, other):
        other = _as_rational(other)
        lcm = self._lcm(other)
        num = padd(self._lift(lcm), other._lift(lcm))
        return Rational(tuple(trim(num)), tuple((tuple(f), k) for f, k in lcm))

    __radd__ = __add__

    def __neg__(self):
        return Rational(tuple(pneg(list(self.num))), self.den)

    def __sub__(self, other):
        return self + (-_as_rational(other))

    def __rsub__(self, other):
        return _as_rational(other) + (-self)

    def __mul__(self, other):
        other = _as_rational(other)
        out = Rational(tuple(trim(pmul(list(self.num), list(other.num)))), self.den)
        return out._divide_by(other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rational(other)
        if other.den:
            # multiply by the reciprocal: other.den goes to the numerator
            num = pmul(list(self.num), other.den_poly())
        else:
            num = list(self.num)
        res = Rational(tuple(trim(num)), self.den)
        o = trim(list(other.num))
        if len(o) == 1:
            return Rational(tuple(c / o[0] for c in res.num), res.den)
        return res._divide_by([(tuple(o), 1)])

    def evaluate(self, x):
        d = 1
        for f, k in self.den:
            d = d * peval(list(f), x) ** k
        return peval(list(self.num), x) / d

    def evaluate2(self, x):
        """Value, first and second derivative at x (x may be a plain number)."""
        from .mpcore import Dual2

        v = self.evaluate(Dual2(x, 1, 0))
        return v.value, v.d1, v.d2

    def poles(self) -> list:
        """Real and complex roots of the denominator factors."""
        roots = []
        for f, _ in self.den:
            f = trim([mpf(c) if not hasattr(c, "value") else c.value for c in f])
            while len(f) > 1 and f[0] == 0:
                roots.append(mpf(0))
                f = f[1:]
            deg = len(f) - 1
            if deg == 1:
                roots.append(-f[0] / f[1])
            elif deg == 2:
                c, b, a = f
                disc = mpmath.sqrt(mpmath.mpc(b * b - 4 * a * c))
                roots.extend([(-b + disc) / (2 * a), (-b - disc) / (2 * a)])
            elif deg >= 3:
                roots.extend(mpmath.polyroots(list(reversed(f)), maxsteps=400, extraprec=2 * mpmath.mp.prec))
        return roots

    def to_json(self, digits: int) -> dict:
        fmt = lambda c: mpmath.nstr(mpf(c), digits)  # noqa: E731
        return {"numerator": [fmt(c) for c in self.num], "denominator": [fmt(c) for c in self.den_poly()]}


def _as_rational(v) -> Rational:
    if isinstance(v, Rational):
        return v
    return Rational.const(v)
