"""The five weight families and their log-potentials.

Parameters are stored as exact ``Fraction`` values so that a weight read
from JSON and written back is unchanged, and so that floats typed on the
command line (``--t 0.1``) mean the decimal value the user wrote.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import mpmath
from mpmath import mpf

from .mpcore import DomainError, PrecisionContext, to_fraction, to_mpf

FAMILIES = ("spg", "df", "gj", "jc", "spg_hard_edge")

_PARAM_NAMES = {
    "spg": ("alpha", "t"),
    "df": ("alpha", "t"),
    "gj": ("A", "B", "t"),
    "jc": ("alpha", "a"),
    "spg_hard_edge": ("alpha", "t", "s"),
}

_ALIASES = {
    "singularly_perturbed_gaussian": "spg",
    "deformed_freud": "df",
    "gaussian_jump": "gj",
    "jumpy_gaussian": "gj",
    "jacobi_cut": "jc",
    "spghardedge": "spg_hard_edge",
    "spg-hard-edge": "spg_hard_edge",
}


@dataclass(frozen=True)
class WeightSpec:
    family: str
    params: Mapping[str, Fraction] = field(default_factory=dict)
    warnings: tuple = ()

    def __post_init__(self):
        family = _ALIASES.get(self.family.lower(), self.family.lower())
        if family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}; expected one of {FAMILIES}")
        names = _PARAM_NAMES[family]
        missing = [k for k in names if k not in self.params]
        extra = [k for k in self.params if k not in names]
        if missing or extra:
            raise ValueError(f"{family} needs parameters {names}; missing {missing}, unexpected {extra}")
        params = {k: to_fraction(self.params[k]) for k in names}
        warnings = _validate(family, params)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "warnings", tuple(warnings))

    def __getitem__(self, name: str) -> Fraction:
        return self.params[name]

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def __eq__(self, other):
        return isinstance(other, WeightSpec) and self.family == other.family and self.params == other.params

    @property
    def is_even(self) -> bool:
        if self.family == "gj":
            return self.params["B"] == 0
        return True

    @property
    def exponent(self) -> Fraction:
        """Power of |x| in front of the exponential (0 for GJ, JC)."""
        if self.family in ("spg", "df", "spg_hard_edge"):
            return self.params["alpha"]
        return Fraction(0)

    def support(self, ctx: PrecisionContext) -> list:
        """Support as a list of closed intervals (endpoints may be infinite)."""
        with ctx.workdps():
            if self.family == "jc":
                a = to_mpf(self.params["a"])
                return [(mpf(-1), -a), (a, mpf(1))]
            if self.family == "spg_hard_edge":
                r = mpmath.sqrt(to_mpf(self.params["s"]))
                if r == 0:
                    return [(-mpmath.inf, mpmath.inf)]
                return [(-mpmath.inf, -r), (r, mpmath.inf)]
            return [(-mpmath.inf, mpmath.inf)]

    def to_json(self) -> dict:
        return {"family": self.family, "params": {k: _fraction_str(v) for k, v in self.params.items()}}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc) -> "WeightSpec":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(doc["family"], {k: _parse_param(v) for k, v in doc["params"].items()})


def _fraction_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _parse_param(v) -> Fraction:
    if isinstance(v, str):
        return Fraction(v.strip())
    return to_fraction(v)


def _validate(family: str, p: dict) -> list:
    warnings = []
    if family in ("spg", "df", "jc", "spg_hard_edge"):
        if p["alpha"] < 0:
            raise DomainError(f"{family}: alpha must be >= 0, got {p['alpha']}")
        if p["alpha"] == 0:
            warnings.append(f"{family}: alpha = 0 is outside the stated domain alpha > 0")
    if family == "spg" and p["t"] <= 0:
        raise DomainError(f"spg: t must be > 0, got {p['t']}")
    if family == "spg_hard_edge":
        if p["t"] < 0 or p["s"] < 0:
            raise DomainError("spg_hard_edge: t and s must be >= 0")
    if family == "df" and p["t"] <= 0:
        warnings.append("df: t <= 0 is outside the stated domain t > 0 (the weight is still integrable)")
    if family == "gj":
        if p["A"] < 0 or p["A"] + p["B"] < 0:
            raise DomainError("gj: need A >= 0 and A + B >= 0")
        if p["A"] == 0 and p["B"] == 0:
            raise DomainError("gj: A = B = 0 gives the zero weight")
    if family == "jc" and not (0 < p["a"] < 1):
        raise DomainError(f"jc: a must lie in (0, 1), got {p['a']}")
    return warnings


def spg(alpha, t) -> WeightSpec:
    return WeightSpec("spg", {"alpha": alpha, "t": t})


def df(alpha, t) -> WeightSpec:
    return WeightSpec("df", {"alpha": alpha, "t": t})


def gj(A, B, t) -> WeightSpec:
    return WeightSpec("gj", {"A": A, "B": B, "t": t})


def jc(alpha, a) -> WeightSpec:
    return WeightSpec("jc", {"alpha": alpha, "a": a})


def spg_hard_edge(alpha, t, s) -> WeightSpec:
    return WeightSpec("spg_hard_edge", {"alpha": alpha, "t": t, "s": s})


def _abs_pow(x, e):
    if e == 0:
        return mpf(1)
    if x == 0:
        return mpf(0)
    return abs(x) ** e


def evaluate(w: WeightSpec, x, ctx: PrecisionContext) -> mpf:
    """w(x); exactly zero off the support."""
    with ctx.workdps():
        x = to_mpf(x)
        p = {k: to_mpf(v) for k, v in w.params.items()}
        f = w.family
        if f in ("spg", "spg_hard_edge"):
            if f == "spg_hard_edge" and x * x < p["s"]:
                return mpf(0)
            if x == 0:
                # e^{-t/x^2} -> 0 for t > 0; the t = 0 hard-edge case is |x|^alpha
                return mpf(0) if (f == "spg" or p["t"] > 0) else _abs_pow(x, p["alpha"])
            return _abs_pow(x, p["alpha"]) * mpmath.exp(-x * x - p["t"] / (x * x))
        if f == "df":
            return _abs_pow(x, p["alpha"]) * mpmath.exp(-x ** 4 + p["t"] * x * x)
        if f == "gj":
            step = p["B"] if x > p["t"] else mpf(0)
            return mpmath.exp(-x * x) * (p["A"] + step)
        # jc
        if abs(x) > 1 or abs(x) < p["a"]:
            return mpf(0)
        return (1 - x * x) ** p["alpha"]


def potential(w: WeightSpec, x, ctx: PrecisionContext) -> mpf:
    """v(x) = -ln w(x); raises where the weight vanishes."""
    with ctx.workdps():
        x = to_mpf(x)
        p = {k: to_mpf(v) for k, v in w.params.items()}
        f = w.family
        if f in ("spg", "spg_hard_edge", "df") and x == 0:
            if f == "df" and p["alpha"] == 0:
                return mpf(0)
            raise DomainError("potential is infinite at x = 0")
        if f in ("spg", "spg_hard_edge"):
            if f == "spg_hard_edge" and x * x < p["s"]:
                raise DomainError("x lies inside the hard-edge gap")
            return x * x + p["t"] / (x * x) - p["alpha"] * mpmath.log(abs(x))
        if f == "df":
            return x ** 4 - p["t"] * x * x - p["alpha"] * mpmath.log(abs(x))
        if f == "gj":
            c = p["A"] + (p["B"] if x > p["t"] else 0)
            if c == 0:
                raise DomainError("gj weight vanishes here")
            return x * x - mpmath.log(c)
        if abs(x) >= 1 or abs(x) < p["a"]:
            raise DomainError("x outside the interior of the jc support")
        return -p["alpha"] * mpmath.log(1 - x * x)
