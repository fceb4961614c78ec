"""Command-line front end.

Every command prints a JSON document (or CSV with ``#`` header lines)
beginning with a reproducibility header, and exits 0 only when the checks
it ran passed.  Failures and errors produce a JSON object with an
``error`` field and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import __version__
from .mpcore import PrecisionContext, to_mpf

ENV_DIGITS = "ORTHOHEUN_DIGITS"
DEFAULT_DIGITS = 60

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2


class CheckFailed(Exception):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


# ---------------------------------------------------------------------------
# argument handling

# option defaults applied after merging --config (None in the parser means "not given")
DEFAULTS = {
    "format": "json",
    "jobs": 1,
    "guard": 20,
    "alpha": "1",
    "t": "1",
    "n": 10,
    "family": "spg",
    "scale": "1",
    "tol": "1e-12",
    "regime": "largeS",
    "variant": None,
    "s": "1",
}


def _frac(text) -> Fraction:
    return Fraction(str(text).strip())


def _add_common(p):
    p.add_argument("--digits", type=int, help=f"working precision (default ${ENV_DIGITS} or {DEFAULT_DIGITS})")
    p.add_argument("--guard", type=int, help="guard digits (default 20)")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--jobs", type=int, help="worker processes for independent jobs")
    p.add_argument("--config", help="JSON file whose keys supply option values")


def _add_weight(p):
    p.add_argument("--weight", help="spg, df, gj, jc or spg_hard_edge")
    for name in ("alpha", "t", "A", "B", "a", "s"):
        p.add_argument(f"--{name}", dest=name)
    p.add_argument("--weight-json", dest="weight_json", help="weight as JSON text or @file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthoheun", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"orthoheun {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="moment sequence of a weight")
    _add_common(p)
    _add_weight(p)
    p.add_argument("--k", type=int, help="a single moment index")
    p.add_argument("--N", type=int, help="moments mu_0..mu_2N")
    p.add_argument("--no-check", action="store_true", help="skip the quadrature spot checks")

    p = sub.add_parser("recurrence", help="recurrence coefficients and Hankel determinants")
    _add_common(p)
    _add_weight(p)
    p.add_argument("--n", type=int)

    p = sub.add_parser("ode-residual", help="finite-n ODE residual of the exact polynomials")
    _add_common(p)
    p.add_argument("--family", choices=("spg", "df"))
    p.add_argument("--n", type=int)
    p.add_argument("--alpha")
    p.add_argument("--t")
    p.add_argument("--variant", help="spg: dropped/multiplied/divided")
    p.add_argument("--reading", help="df: split/merged/over-den")
    p.add_argument("--coefficient", help="df: alpha or 2alpha+1")
    p.add_argument("--x", help="comma-separated sample points")

    p = sub.add_parser("heun-limit", help="Heun-class triple and convergence of scaled polynomials")
    _add_common(p)
    p.add_argument("--family", choices=("spg", "df", "gj", "jc"))
    p.add_argument("--n", type=int)
    p.add_argument("--alpha")
    p.add_argument("--t")
    p.add_argument("--a")
    p.add_argument("--rms", action="store_true", help="also report the residual RMS of the scaled exact P_n")

    p = sub.add_parser("isomono-check", help="Case A/B gauge identities")
    _add_common(p)
    p.add_argument("--family", choices=("spg", "df", "gj", "jc"))
    p.add_argument("--n", type=int)
    p.add_argument("--alpha")
    p.add_argument("--t", help="time at which the identities are checked")
    p.add_argument("--scale", help="multiply the gauge m by this constant")

    p = sub.add_parser("painleve-certify", help="certify a Painleve reduction along Hamiltonian flows")
    _add_common(p)
    p.add_argument("--family", choices=("spg", "df", "gj", "jc"))
    p.add_argument("--n", type=int)
    p.add_argument("--alpha")
    p.add_argument("--window", help="a:b in the Painleve independent variable")
    p.add_argument("--tol")
    p.add_argument("--variant", help="gj/jc candidate reading")
    p.add_argument("--ic", help="initial conditions 'lam,mu;lam,mu;...'")

    p = sub.add_parser("asymptotics", help="expansions of ln Delta and the finite-n trend")
    _add_common(p)
    p.add_argument("--regime", choices=("largeS", "smallS", "largeT"))
    p.add_argument("--alpha")
    p.add_argument("--s")
    p.add_argument("--t")
    p.add_argument("--variant", choices=("printed", "recomputed"))
    p.add_argument("--compare", action="store_true", help="printed vs recomputed coefficients")
    p.add_argument("--trend", help="comma-separated n for the numeric ratio (even and odd)")

    p = sub.add_parser("factorization", help="even/odd factorization of the hard-edge determinants")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--s")
    p.add_argument("--t")
    p.add_argument("--n", type=int, help="check every n from 1 to this value")

    p = sub.add_parser("errata", help="typo-adjudication ledger")
    _add_common(p)
    p.add_argument("--recompute", action="store_true", help="rerun every adjudication instead of printing the stored ledger")
    return parser


def _merge_config(args) -> argparse.Namespace:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("--config must contain a JSON object")
    ns = vars(args)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest == "command":
            continue
        if dest not in ns:
            raise ValueError(f"unknown config key {key!r} for command {args.command}")
        if ns[dest] is None or ns[dest] is False:
            ns[dest] = value
    for key, value in DEFAULTS.items():
        if key in ns and ns[key] is None:
            ns[key] = value
    if ns.get("digits") is None:
        ns["digits"] = int(os.environ.get(ENV_DIGITS, DEFAULT_DIGITS))
    return argparse.Namespace(**ns)


def _context(args) -> PrecisionContext:
    return PrecisionContext(int(args.digits), int(args.guard))


def _weight(args):
    from .weights import WeightSpec

    if args.weight_json:
        text = args.weight_json
        if text.startswith("@"):
            with open(text[1:]) as fh:
                text = fh.read()
        return WeightSpec.from_json(text)
    if not args.weight:
        raise ValueError("--weight is required")
    from .weights import _PARAM_NAMES, _ALIASES

    fam = _ALIASES.get(args.weight.lower(), args.weight.lower())
    if fam not in _PARAM_NAMES:
        raise ValueError(f"unknown weight {args.weight!r}")
    params = {}
    for name in _PARAM_NAMES[fam]:
        v = getattr(args, name, None)
        if v is None:
            raise ValueError(f"--{name} is required for weight {fam}")
        params[name] = _frac(v)
    return WeightSpec(fam, params)


def _header(args, ctx) -> dict:
    skip = {"out", "config", "jobs"}
    cfg = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    return {"program": "orthoheun", "version": __version__, "command": args.command, "digits": ctx.digits, "guard": ctx.guard, "config": cfg}


def _dec(v, ctx) -> str:
    return mpmath.nstr(to_mpf(v), ctx.dps) if not isinstance(v, str) else v


# ---------------------------------------------------------------------------
# commands; each returns (payload, csv_rows or None, passed)


def cmd_moments(args, ctx):
    from .moments import MomentConsistencyError, cross_check, exact_moment, moment_table

    w = _weight(args)
    if args.k is not None:
        with ctx.workdps():
            v = exact_moment(w, args.k, ctx)
        check = None if args.no_check else cross_check(w, args.k, ctx, v)
        tol = mpf(10) ** (-(ctx.digits // 2))
        passed = check is None or check <= tol
        payload = {"weight": w.to_json(), "k": args.k, "value": _dec(v, ctx)}
        if check is not None:
            payload["quadratureRelativeDifference"] = mpmath.nstr(check, 5)
        return payload, [("k", "value"), (args.k, _dec(v, ctx))], passed
    N = args.N if args.N is not None else 10
    try:
        table = moment_table(w, N, ctx, check=not args.no_check, jobs=int(args.jobs))
    except MomentConsistencyError as exc:
        raise CheckFailed(str(exc))
    rows = [("k", "value", "method")] + [tuple(r) for r in table.to_rows()]
    return table.to_json(), rows, True


def _scaled_beta(w, n, beta):
    if w.family == "spg":
        return 4 * beta / (2 * n + to_mpf(w["alpha"]))
    if w.family == "df":
        return 6 * beta / mpmath.sqrt(3 * n)
    return None


def cmd_recurrence(args, ctx):
    from .moments import moment_table
    from .orthopoly import beta_determinant_identity, build_recurrence

    w = _weight(args)
    n = int(args.n)
    work = ctx.for_degree(n + 1)
    m = moment_table(w, n + 1, work, check=False, jobs=int(args.jobs))
    tb = build_recurrence(m, n + 1, work)
    rows = [("n", "beta_n", "beta_scaled")]
    worst = mpf(0)
    with work.workdps():
        for k in range(1, n + 1):
            sc = _scaled_beta(w, k, tb.beta[k])
            rows.append((k, _dec(tb.beta[k], ctx), "" if sc is None else _dec(sc, ctx)))
            worst = max(worst, beta_determinant_identity(tb, k))
    tol = mpf(10) ** (-max(ctx.digits - 60, ctx.digits // 2))
    payload = {
        "weight": w.to_json(),
        "workingDigits": work.digits,
        "rows": [dict(zip(rows[0], r)) for r in rows[1:]],
        "alpha": [_dec(v, ctx) for v in tb.alpha[:n]],
        "betaDeterminantIdentity": mpmath.nstr(worst, 5),
    }
    return payload, rows, worst < tol


def _xs(text):
    if text:
        return [mpf(v) for v in str(text).split(",")]
    return [mpf(v) for v in ("0.37", "0.81", "1.3", "0.55", "1.7", "0.23", "1.11", "2.05", "0.67", "1.49")]


def cmd_ode_residual(args, ctx):
    from .linode import df_ode, residual, spg_ode
    from .moments import moment_table
    from .orthopoly import build_recurrence
    from .poly import peval2
    from .weights import df, spg

    n, al, t = int(args.n), _frac(args.alpha), _frac(args.t)
    w = spg(al, t) if args.family == "spg" else df(al, t)
    tb = build_recurrence(moment_table(w, n + 2, ctx, check=False), n + 1, ctx)
    if args.family == "spg":
        ode = spg_ode(n, al, t, tb.beta[n - 1], tb.beta[n], tb.beta[n + 1], variant=args.variant or "dropped")
    else:
        ode = df_ode(n, al, t, tb.beta[n - 1], tb.beta[n], tb.beta[n + 1], reading=args.reading or "split", coefficient=args.coefficient or "alpha")
    rows = [("x", "normalized_residual")]
    worst = mpf(0)
    with ctx.workdps():
        for x in _xs(args.x):
            r = residual(ode, *peval2(list(tb.coeffs[n]), x), x, ctx, normalized=True)
            worst = max(worst, r)
            rows.append((_dec(x, ctx), mpmath.nstr(r, 5)))
    tol = mpf(10) ** (-(ctx.digits // 4))
    payload = {"equation": ode.label, "maxResidual": mpmath.nstr(worst, 5), "threshold": mpmath.nstr(tol, 3), "points": [dict(zip(rows[0], r)) for r in rows[1:]]}
    return payload, rows, worst < tol


def _heun_params(args):
    params = {"n": int(args.n)}
    if args.family != "gj":
        params["alpha"] = _frac(args.alpha)
    if args.family == "jc" and getattr(args, "a", None) is not None:
        params["a"] = _frac(args.a)
    else:
        params["t"] = _frac(args.t)
    return params


def cmd_heun_limit(args, ctx):
    from .linode import heun_limit, heun_residual_rms
    from .moments import moment_table
    from .orthopoly import build_recurrence
    from .weights import df, gj, jc, spg

    params = _heun_params(args)
    with ctx.workdps():
        ste = heun_limit(args.family, params)
        payload = {"triple": ste.to_json(ctx.dps), "degrees": ste.degrees(), "degreeBounds": ste.satisfies_degree_bounds()}
        if args.rms:
            n = params["n"]
            fam = args.family
            weights = {
                "spg": lambda: spg(params["alpha"], params["t"]),
                "df": lambda: df(2 * params["alpha"] + 1, params["t"]),
                "gj": lambda: gj(1, 1, params["t"]),
                "jc": lambda: jc(params["alpha"], _frac(args.a) if args.a is not None else mpmath.sqrt(to_mpf(params["t"]))),
            }
            work = PrecisionContext(max(ctx.digits, 12 * n + 100), ctx.guard)
            tb = build_recurrence(moment_table(weights[fam](), n, work, check=False), n, work)
            grids = {"spg": (1, 10), "df": (Fraction(1, 5), 2), "gj": (Fraction(1, 5), 2), "jc": (Fraction(3, 10), Fraction(9, 10))}
            lo, hi = grids[fam]
            ys = [lo + (hi - lo) * Fraction(k, 9) for k in range(10)]
            payload["scaledResidualRMS"] = mpmath.nstr(heun_residual_rms(tb.coeffs[n], ste, ys, work), 6)
    rows = [("poly", "coefficients")] + [(k, " ".join(payload["triple"][k])) for k in ("sigma", "tau", "eta")]
    return payload, rows, bool(payload["degreeBounds"])


def cmd_isomono_check(args, ctx):
    from .isomono import Gauge, check_case
    from .linode import heun_limit

    fam = args.family
    params = {"n": int(args.n), "t": 1}
    if fam != "gj":
        params["alpha"] = _frac(args.alpha)
    ste = heun_limit(fam, params)
    t = _frac(args.t) if fam != "jc" or _frac(args.t) not in (0, 1) else Fraction(5, 2)
    rep = check_case(ste, Gauge(fam, _frac(args.scale)), t, ctx)
    rows = [("condition", "residual")] + [(k, mpmath.nstr(v, 5)) for k, v in rep.residuals.items()]
    return rep.to_json(), rows, rep.passed


def cmd_painleve_certify(args, ctx):
    from .painleve import FlowConfig, certify

    kw = {"tol": to_mpf(_frac(args.tol)), "digits": max(50, ctx.digits)}
    if args.window:
        a, b = str(args.window).split(":")
        kw["window"] = (to_mpf(_frac(a)), to_mpf(_frac(b)))
    if args.variant:
        kw["variant"] = args.variant
    if args.ic:
        kw["initial"] = tuple(tuple(mpf(v) for v in pair.split(",")) for pair in str(args.ic).split(";"))
    alpha = None if args.family == "gj" else _frac(args.alpha)
    rep = certify(args.family, int(args.n), alpha, FlowConfig(**kw))
    doc = rep.to_json()
    rows = [("initial", "maxResidual", "shadowDeviation", "muRecovery")] + [
        (" ".join(r["initial"]), r["maxResidual"], r["shadowDeviation"], r["muRecovery"]) for r in doc["runs"]
    ]
    return doc, rows, rep.verdict


def _trend_job(job):
    alpha, s, t, n, parity, digits, guard = job
    from .scaling import numeric_delta

    ctx = PrecisionContext(digits, guard)
    with ctx.workdps():
        return mpmath.nstr(numeric_delta(Fraction(alpha), Fraction(s), Fraction(t), n, ctx, parity=parity), ctx.dps)


def cmd_asymptotics(args, ctx):
    from .scaling import compare_expansions, decay_ratios, expansion

    al, s, t = _frac(args.alpha), _frac(args.s), _frac(args.t)
    variant = args.variant or "printed"
    with ctx.workdps():
        exp = expansion(args.regime, al, t, ctx, variant=variant)
        payload = {"expansion": exp.to_json(ctx.dps, s=to_mpf(s)), "decayRatios": [mpmath.nstr(r, 5) for r in decay_ratios(exp, to_mpf(s))]}
        rows = [("term", "value")] + [("constant", _dec(exp.constant_term, ctx))] + [(lbl, _dec(v, ctx)) for lbl, v in exp.breakdown(to_mpf(s))]
        passed = True
        if args.compare:
            cmp = compare_expansions(args.regime, al, t, ctx)
            payload["comparison"] = [c.to_json(ctx.dps) for c in cmp]
        if args.trend:
            ns = [int(v) for v in str(args.trend).split(",")]
            target = expansion("largeS", al, t, ctx).evaluate(to_mpf(s))
            jobs = [(str(al), str(s), str(t), n, par, ctx.digits, ctx.guard) for par in ("even", "odd") for n in ns]
            if int(args.jobs) > 1:
                with ProcessPoolExecutor(max_workers=int(args.jobs)) as pool:
                    vals = list(pool.map(_trend_job, jobs))
            else:
                vals = [_trend_job(j) for j in jobs]
            rows = [("n", "parity", "ln_delta_numeric", "ln_delta_expansion", "gap")]
            trend = []
            for (_, _, _, n, par, _, _), v in zip(jobs, vals):
                gap = mpf(v) - target
                rows.append((n, par, v, _dec(target, ctx), _dec(gap, ctx)))
                trend.append({"n": n, "parity": par, "lnDelta": v, "gap": _dec(gap, ctx)})
            payload["trend"] = trend
            for par in ("even", "odd"):
                gaps = [abs(mpf(r["gap"])) for r in trend if r["parity"] == par]
                passed = passed and all(b < a for a, b in zip(gaps, gaps[1:]))
    return payload, rows, passed


def _fact_job(job):
    alpha, s, t, n, digits, guard = job
    from .scaling import factorization_check

    ctx = PrecisionContext(digits, guard)
    r = factorization_check(Fraction(alpha), Fraction(s), Fraction(t), n, ctx)
    return (n, mpmath.nstr(r.even_error, 5), mpmath.nstr(r.odd_error, 5))


def cmd_factorization(args, ctx):
    al, s, t = _frac(args.alpha), _frac(args.s), _frac(args.t)
    n_max = int(args.n) if args.n else 6
    jobs = [(str(al), str(s), str(t), n, ctx.digits, ctx.guard) for n in range(1, n_max + 1)]
    if int(args.jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(args.jobs)) as pool:
            res = list(pool.map(_fact_job, jobs))
    else:
        res = [_fact_job(j) for j in jobs]
    tol = mpf(10) ** (-(ctx.digits // 2))
    passed = all(mpf(e) < tol and mpf(o) < tol for _, e, o in res)
    rows = [("n", "even_error", "odd_error")] + res
    payload = {"threshold": mpmath.nstr(tol, 3), "rows": [{"n": n, "evenError": e, "oddError": o} for n, e, o in res]}
    return payload, rows, passed


def cmd_errata(args, ctx):
    from .errata import build_ledger, load_ledger

    if args.recompute:
        entries = build_ledger(ctx.digits)
    else:
        entries = load_ledger()["entries"]
    rows = [("key", "selected", "location")] + [(e["key"], e["selected"], e["location"]) for e in entries]
    passed = all(not e["selected"].startswith(("none", "ambiguous")) for e in entries)
    return {"entries": entries}, rows, passed


COMMANDS = {
    "moments": cmd_moments,
    "recurrence": cmd_recurrence,
    "ode-residual": cmd_ode_residual,
    "heun-limit": cmd_heun_limit,
    "isomono-check": cmd_isomono_check,
    "painleve-certify": cmd_painleve_certify,
    "asymptotics": cmd_asymptotics,
    "factorization": cmd_factorization,
    "errata": cmd_errata,
}


# ---------------------------------------------------------------------------
# output


def _render(fmt, header, payload, rows, passed) -> str:
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        buf.write(f"# {json.dumps(header, sort_keys=True)}\n")
        buf.write(f"# passed: {str(passed).lower()}\n")
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    return json.dumps({"header": header, "passed": passed, "result": payload}, indent=2, sort_keys=True) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        ctx = _context(args)
        header = _header(args, ctx)
    except (ValueError, OSError) as exc:
        _emit(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}, sort_keys=True) + "\n", getattr(args, "out", None))
        return EXIT_ERROR
    try:
        with ctx.workdps():
            payload, rows, passed = COMMANDS[args.command](args, ctx)
    except CheckFailed as exc:
        doc = {"header": header, "passed": False, "error": {"type": "CheckFailed", "message": str(exc)}}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_CHECK_FAILED
    except Exception as exc:  # structured report for any failure inside a command
        doc = {"header": header, "passed": False, "error": {"type": type(exc).__name__, "message": str(exc)}}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_ERROR
    with ctx.workdps():
        text = _render(args.format, header, payload, rows, passed)
    _emit(text, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED
