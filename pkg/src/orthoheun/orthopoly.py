"""Recurrence coefficients, norms and Hankel determinants from moments.

The Hankel matrix H = (mu_{i+j}) is factored as H = L diag(h) L^T with L
unit lower triangular.  The pivots are the squared norms h_n, the rows of
L^{-1} are the coefficient rows of the monic orthogonal polynomials, and
the subdiagonal of those rows gives alpha_n.  Hankel determinants follow
as running products of the pivots.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .moments import MomentTable
from .mpcore import PrecisionContext, to_mpf


class PositivityError(ArithmeticError):
    """A pivot of the moment matrix came out non-positive."""

    def __init__(self, n: int, pivot):
        super().__init__(f"pivot h_{n} = {mpmath.nstr(pivot, 5)} is not positive (precision exhausted?)")
        self.n = n
        self.pivot = pivot


@dataclass(frozen=True)
class RecurrenceTable:
    n_max: int
    h: tuple  # h_0..h_{n_max}
    D: tuple  # D_0..D_{n_max+1}; D_{-1} = 0 is implicit
    alpha: tuple  # alpha_0..alpha_{n_max-1} (alpha_{n_max} too when mu_{2 n_max + 1} was available)
    beta: tuple  # beta_0..beta_{n_max}; beta_0 = 0 by convention
    coeffs: tuple  # coeffs[n][k] = coefficient of x^k in P_n, k = 0..n
    precision: PrecisionContext
    even: bool = False

    def D_at(self, n: int):
        """D_n with the convention D_{-1} = 0, D_0 = 1."""
        if n == -1:
            return mpf(0)
        return self.D[n]

    def to_json(self) -> dict:
        dec = lambda v: mpmath.nstr(v, self.precision.dps)  # noqa: E731
        return {
            "n_max": self.n_max,
            "digits": self.precision.digits,
            "guard": self.precision.guard,
            "h": [dec(v) for v in self.h],
            "D": [dec(v) for v in self.D],
            "alpha": [dec(v) for v in self.alpha],
            "beta": [dec(v) for v in self.beta],
            "coeffs": [[dec(c) for c in row] for row in self.coeffs],
        }

    def to_csv(self) -> str:
        dec = lambda v: mpmath.nstr(v, self.precision.dps)  # noqa: E731
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "h", "D", "alpha", "beta"])
        for n in range(self.n_max + 1):
            a = dec(self.alpha[n]) if n < len(self.alpha) else ""
            writer.writerow([n, dec(self.h[n]), dec(self.D[n]), a, dec(self.beta[n])])
        return buf.getvalue()

    @classmethod
    def from_json(cls, doc) -> "RecurrenceTable":
        if isinstance(doc, str):
            doc = json.loads(doc)
        ctx = PrecisionContext(doc["digits"], doc["guard"])
        with ctx.workdps():
            conv = lambda seq: tuple(mpf(v) for v in seq)  # noqa: E731
            return cls(
                doc["n_max"], conv(doc["h"]), conv(doc["D"]), conv(doc["alpha"]), conv(doc["beta"]),
                tuple(conv(r) for r in doc["coeffs"]), ctx,
            )


def build_recurrence(m: MomentTable, n_max: int | None = None, ctx: PrecisionContext | None = None) -> RecurrenceTable:
    """Factor the (n_max+1) x (n_max+1) Hankel matrix of ``m``."""
    ctx = ctx or m.precision
    if n_max is None:
        n_max = m.N
    if 2 * n_max + 1 > len(m.entries):
        raise ValueError(f"n_max={n_max} needs moments up to mu_{2 * n_max}, table has {len(m.entries)}")
    even = m.weight.is_even
    size = n_max + 1
    with ctx.workdps():
        mu = [to_mpf(v) for v in m.entries]
        L = [[mpf(0)] * size for _ in range(size)]
        h = []
        for j in range(size):
            for i in range(j, size):
                # odd Hankel entries vanish for even weights, so L is checkerboard
                if even and (i + j) % 2:
                    continue
                acc = mu[i + j] - mp.fsum(L[i][k] * L[j][k] * h[k] for k in range(j))
                if i == j:
                    if not acc > 0:
                        raise PositivityError(j, acc)
                    h.append(acc)
                    L[j][j] = mpf(1)
                else:
                    L[i][j] = acc / h[j]
        # rows of L^{-1} are the monic polynomial coefficients
        coeffs = []
        for n in range(size):
            row = [mpf(0)] * (n + 1)
            row[n] = mpf(1)
            for k in range(n - 1, -1, -1):
                if even and (n - k) % 2:
                    continue
                row[k] = -mp.fsum(L[i][k] * row[i] for i in range(k + 1, n + 1))
            coeffs.append(tuple(row))
        D = [mpf(1)]
        for v in h:
            D.append(D[-1] * v)
        beta = [mpf(0)] + [h[n] / h[n - 1] for n in range(1, size)]
        if even:
            alpha = [mpf(0)] * size
        else:
            alpha = [coeffs[n][n - 1] - coeffs[n + 1][n] if n > 0 else -coeffs[1][0] for n in range(size - 1)]
            if len(mu) > 2 * n_max + 1:
                c = coeffs[n_max]
                s = mp.fsum(c[i] * c[j] * mu[i + j + 1] for i in range(size) for j in range(size))
                alpha.append(s / h[n_max])
        return RecurrenceTable(n_max, tuple(h), tuple(D), tuple(alpha), tuple(beta), tuple(coeffs), ctx, even)


def hankel_determinant_lu(m: MomentTable, n: int, ctx: PrecisionContext | None = None) -> mpf:
    """D_n = det(mu_{i+j})_{i,j<n} by LU with partial pivoting (independent of the LDL route)."""
    ctx = ctx or m.precision
    if n == 0:
        return mpf(1)
    with ctx.workdps():
        M = mpmath.matrix([[m.entries[i + j] for j in range(n)] for i in range(n)])
        return mpmath.det(M)


def eval_poly(table: RecurrenceTable, n: int, x, ctx: PrecisionContext | None = None):
    """(P_n(x), P_n'(x), P_n''(x)) by Horner's scheme on the coefficient row."""
    ctx = ctx or table.precision
    if n > table.n_max:
        raise ValueError(f"n={n} exceeds n_max={table.n_max}")
    with ctx.workdps():
        return horner2(table.coeffs[n], x)


def horner2(coeffs, x):
    """Value, first and second derivative of sum coeffs[k] x^k."""
    v = d = dd = 0 * x
    for c in reversed(coeffs):
        dd = dd * x + 2 * d
        d = d * x + v
        v = v * x + c
    return v, d, dd


def recurrence_residual(table: RecurrenceTable, n: int, x, ctx: PrecisionContext | None = None):
    """|x P_n - P_{n+1} - alpha_n P_n - beta_n P_{n-1}| relative to |x P_n|."""
    ctx = ctx or table.precision
    with ctx.workdps():
        x = to_mpf(x)
        pn = horner2(table.coeffs[n], x)[0]
        pn1 = horner2(table.coeffs[n + 1], x)[0]
        pm1 = horner2(table.coeffs[n - 1], x)[0] if n > 0 else mpf(0)
        r = x * pn - pn1 - table.alpha[n] * pn - table.beta[n] * pm1
        scale = max(abs(x * pn), abs(pn1), abs(table.beta[n] * pm1), mpf(10) ** (-ctx.dps))
        return abs(r) / scale


def orthogonality_residual(table: RecurrenceTable, m: MomentTable, i: int, j: int, ctx: PrecisionContext | None = None):
    """|<P_i, P_j> - h_i delta_ij| / sqrt(h_i h_j) from the exact bilinear form on moments."""
    ctx = ctx or table.precision
    with ctx.workdps():
        ci, cj = table.coeffs[i], table.coeffs[j]
        mu = m.entries
        ip = mp.fsum(a * b * mu[p + q] for p, a in enumerate(ci) if a for q, b in enumerate(cj) if b)
        target = table.h[i] if i == j else 0
        return abs(ip - target) / mpmath.sqrt(table.h[i] * table.h[j])


def beta_determinant_identity(table: RecurrenceTable, n: int, D=None):
    """|beta_n - D_{n-1} D_{n+1} / D_n^2| / beta_n, using ``D`` if supplied."""
    D = D if D is not None else table.D
    with table.precision.workdps():
        Dm1 = mpf(0) if n == 0 else D[n - 1]
        ratio = Dm1 * D[n + 1] / D[n] ** 2
        return abs(table.beta[n] - ratio) / table.beta[n]
