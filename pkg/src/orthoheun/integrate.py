"""Dormand-Prince 5(4) with step-size control, written for mpf state vectors.

Steps are clipped so that every requested output time is hit exactly;
there is no dense-output interpolation.  A component exceeding
``pole_bound`` in magnitude aborts the run with :class:`PoleError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as _F
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

# Butcher tableau (exact rationals, converted at the working precision)
_C = [0, _F(1, 5), _F(3, 10), _F(4, 5), _F(8, 9), 1, 1]
_A = [
    [],
    [_F(1, 5)],
    [_F(3, 40), _F(9, 40)],
    [_F(44, 45), _F(-56, 15), _F(32, 9)],
    [_F(19372, 6561), _F(-25360, 2187), _F(64448, 6561), _F(-212, 729)],
    [_F(9017, 3168), _F(-355, 33), _F(46732, 5247), _F(49, 176), _F(-5103, 18656)],
    [_F(35, 384), 0, _F(500, 1113), _F(125, 192), _F(-2187, 6784), _F(11, 84)],
]
_B5 = [_F(35, 384), 0, _F(500, 1113), _F(125, 192), _F(-2187, 6784), _F(11, 84), 0]
_B4 = [_F(5179, 57600), 0, _F(7571, 16695), _F(393, 640), _F(-92097, 339200), _F(187, 2100), _F(1, 40)]


class PoleError(ArithmeticError):
    def __init__(self, t, state):
        super().__init__(f"solution left the pole bound near t = {mpmath.nstr(t, 12)}")
        self.t = t
        self.state = state


class StepSizeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Solution:
    t: tuple
    y: tuple  # y[i] is the state at t[i]
    steps: int
    rejected: int


def _q(r):
    return mpf(r.numerator) / r.denominator if isinstance(r, _F) else mpf(r)


def dopri45(
    f: Callable,
    t0,
    y0: Sequence,
    t1,
    tol,
    *,
    t_eval: Sequence | None = None,
    pole_bound=mpf(10) ** 8,
    h0=None,
    max_steps: int = 200000,
) -> Solution:
    """Integrate y' = f(t, y) from t0 to t1 (either direction)."""
    C = [_q(c) for c in _C]
    A = [[_q(a) for a in row] for row in _A]
    B5 = [_q(b) for b in _B5]
    E = [_q(b5) - _q(b4) for b5, b4 in zip(_B5, _B4)]
    t0, t1, tol = mpf(t0), mpf(t1), mpf(tol)
    direction = 1 if t1 >= t0 else -1
    outputs = sorted({mpf(s) for s in (t_eval or [])} | {t1}, reverse=direction < 0)
    outputs = [s for s in outputs if (s - t0) * direction >= 0]
    y = [mpf(v) for v in y0]
    t = t0
    ts, ys = [], []
    if outputs and outputs[0] == t0:
        ts.append(t0)
        ys.append(tuple(y))
        outputs.pop(0)
    span = abs(t1 - t0)
    h = mpf(h0) if h0 is not None else min(span, mpf(10) ** -2) if span else mpf(0)
    h = abs(h)
    k1 = f(t, y)
    steps = rejected = 0
    while outputs:
        if steps + rejected > max_steps:
            raise StepSizeError("too many steps")
        target = outputs[0]
        remaining = abs(target - t)
        last = h >= remaining
        step = remaining if last else h
        hs = direction * step
        ks = [k1]
        for i in range(1, 7):
            yi = [y[j] + hs * mpmath.fsum(A[i][m] * ks[m][j] for m in range(i)) for j in range(len(y))]
            ks.append(f(t + C[i] * hs, yi))
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        err_vec = [hs * mpmath.fsum(E[m] * ks[m][j] for m in range(7)) for j in range(len(y))]
        scale = [tol * (1 + max(abs(y[j]), abs(y_new[j]))) for j in range(len(y))]
        err = max(abs(e) / s for e, s in zip(err_vec, scale)) if y else mpf(0)
        if not mpmath.isfinite(err):
            err = mpf(10) ** 10
        if err <= 1:
            steps += 1
            t = target if last else t + hs
            y = y_new
            k1 = ks[6]
            if max(abs(v) for v in y) > pole_bound:
                raise PoleError(t, tuple(y))
            if last:
                ts.append(t)
                ys.append(tuple(y))
                outputs.pop(0)
            factor = mpf("0.9") * err ** (-mpf(1) / 5) if err > 0 else mpf(5)
            factor = min(mpf(5), max(mpf("0.2"), factor))
            if not last or factor < 1:
                h = step * factor
        else:
            rejected += 1
            factor = max(mpf("0.1"), mpf("0.9") * err ** (-mpf(1) / 5))
            h = step * factor
            if h < mpf(10) ** (-mpmath.mp.dps // 2):
                raise StepSizeError(f"step size underflow near t = {mpmath.nstr(t, 12)}")
    return Solution(tuple(ts), tuple(ys), steps, rejected)
