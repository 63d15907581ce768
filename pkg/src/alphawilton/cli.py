"""Command-line front end.

Exit codes: 0 success, 2 domain error, 3 failed check, 4 no convergence,
64 usage error.
"""
import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from .exact import DomainError, format_rational

EXIT_OK, EXIT_DOMAIN, EXIT_CHECK, EXIT_CONVERGENCE, EXIT_USAGE = 0, 2, 3, 4, 64


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    """Emitted output is complete but a verification step failed."""


class NotConverged(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


# ---------------------------------------------------------------------------
# value parsing and emission


def parse_exact(text, rationalize=False, what="alpha"):
    """``"p/q"`` or an integer; decimals only with ``rationalize`` (denominator <= 10^6)."""
    s = text.strip()
    try:
        if "/" in s or s.lstrip("+-").isdigit():
            return Fraction(s), None
        dec = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse {what}={text!r}")
    if not rationalize:
        raise DomainError(f"{what}={text!r}: exact commands take p/q (or pass --rationalize)")
    r = dec.limit_denominator(10 ** 6)
    return r, format_rational(r)


def parse_real(text, what="x"):
    """Float value of ``"p/q"`` or a decimal; rationals stay exact."""
    s = text.strip()
    try:
        if "/" in s:
            return Fraction(s)
        return float(s)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse {what}={text!r}")


def fmt(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return format_rational(v)
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    if isinstance(v, bool) or v is None or isinstance(v, (str, int, Fraction)):
        return json.dumps(fmt(v))
    f = float(v)
    if math.isfinite(f):
        return format(f, ".17g")
    return json.dumps(str(f))


def to_json(obj):
    return _json_value(obj) + "\n"


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _alpha_exact(args):
    alpha, note = parse_exact(args.alpha, args.rationalize)
    if note:
        args._notes["alpha_rationalized"] = note
    return alpha


# ---------------------------------------------------------------------------
# subcommands


def cmd_expand(args):
    from .alpha_cf import orbit, unfolded_expansion

    if args.unfolded:
        alpha = _alpha_exact(args)
        x, _ = parse_exact(args.x, args.rationalize, "x")
        its, digits = unfolded_expansion(x, alpha, args.K)
        rows = [(n, its[n], *(digits[n] if n < len(digits) else ("", ""))) for n in range(len(its))]
        return to_csv(["n", "x", "eps", "c"], rows)
    if args.mode == "exact":
        alpha = _alpha_exact(args)
        x, _ = parse_exact(args.x, args.rationalize, "x")
        try:
            tr = orbit(x, alpha, args.K)
        except AssertionError as e:
            raise CheckFailed(str(e))
    else:
        tr = orbit(parse_real(args.x), parse_real(args.alpha, "alpha"), args.K, mode="float")
    rows = [(s.n, s.x, s.digit.a, s.digit.eps, s.p, s.q, s.beta) for s in tr.steps]
    return to_csv(["n", "x", "a", "eps", "p", "q", "beta"], rows)


def cmd_wilton(args):
    from . import wilton as W

    fn = {"wilton": W.wilton_eval, "brjuno": W.brjuno_eval, "q": W.q_series_eval}[args.series]
    if args.unfolded:
        if args.series != "wilton":
            raise DomainError("--unfolded is only available for the Wilton series")
        fn = W.wilton_unfolded
    x = parse_real(args.x)
    alpha = parse_real(args.alpha, "alpha")
    r = fn(x, alpha, tol=args.tol, kmax=args.kmax, backend=args.backend)
    out = {"x": x, "alpha": alpha, "value": r.value, "err_est": r.err_est, "k_used": r.K_used,
           "hit_zero": r.hit_zero, "flag": r.flag}
    text = to_json(out)
    if r.flag in ("kmax", "precision"):
        raise NotConverged(text)
    return text


def cmd_grid(args):
    from .wilton import grid_emit

    alpha = parse_real(args.alpha, "alpha")
    rows = grid_emit(float(alpha), float(parse_real(args.a, "a")), float(parse_real(args.b, "b")),
                     args.n, tol=args.tol, kmax=args.kmax, unfolded=args.unfolded,
                     backend=args.backend)
    text = to_csv(["x", "value", "err_est", "k_used", "flag"],
                  [(r.x, r.value, r.err_est, r.k_used, r.flag) for r in rows])
    if any(r.flag in ("kmax", "precision") for r in rows):
        raise NotConverged(text)
    return text


def cmd_matching(args):
    from .matching import find_matching_exponents

    data = find_matching_exponents(_alpha_exact(args))
    if not data:
        raise DomainError(f"alpha={format_rational(data.alpha)}: {data.reason}")
    out = dict(data.as_dict(), **args._notes)
    text = to_json(out)
    if not data.verified:
        raise CheckFailed(text)
    return text


def cmd_pseudocenter(args):
    from .matching import exponents_from_pseudocenter, find_matching_exponents, pseudocenter_check

    if args.max_den is not None:
        cands = sorted({Fraction(p, q) for q in range(2, args.max_den + 1) for p in range(1, q)})
    else:
        cands = [_alpha_exact(args)]
    rows, bad = [], 0
    for r in cands:
        if not pseudocenter_check(r):
            if args.max_den is None:
                rows.append((r, False, "", "", "", "", ""))
            continue
        n, m = exponents_from_pseudocenter(r)
        data = find_matching_exponents(r)
        fn, fm = (data.n, data.m) if data else ("", "")
        agree = bool(data) and (fn, fm) == (n, m) and data.verified
        bad += not agree
        rows.append((r, True, n, m, fn, fm, agree))
    text = to_csv(["r", "pseudocenter", "n", "m", "found_n", "found_m", "agree"], rows)
    if bad:
        raise CheckFailed(text)
    return text


def cmd_classify(args):
    from .singularity import classify

    st = classify(parse_exact(args.xi, args.rationalize, "xi")[0], _alpha_exact(args))
    if args.format == "json":
        return to_json({"kind": st.kind, "sign": st.sign, "provenance": st.provenance,
                        **args._notes})
    return f"{st.kind}\n"


def cmd_witness(args):
    from .singularity import bmo_witness

    alpha = _alpha_exact(args)
    xi = parse_exact(args.xi, args.rationalize, "xi")[0] if args.xi else alpha
    w = bmo_witness(alpha, xi, epsilon=args.epsilon, tol=args.tol, backend=args.backend)
    return to_json({"alpha": alpha, "xi": xi, "x_minus": w.x_minus, "x_plus": w.x_plus,
                    "integral": w.integral, "check_integral": w.check_integral,
                    "normalized": w.normalized, "epsilon": w.epsilon, **args._notes})


def cmd_sync(args):
    from .sync import NoStateMatch, monitors, sync_trace, validate_trace

    if args.mode == "exact":
        alpha = _alpha_exact(args)
        x = parse_exact(args.x, args.rationalize, "x")[0]
    else:
        alpha, x = parse_real(args.alpha, "alpha"), parse_real(args.x)
    try:
        tr = sync_trace(x, alpha, args.K, mode=args.mode)
    except NoStateMatch as e:
        sys.stderr.write(f"{e}\n")
        raise CheckFailed("")
    rep = validate_trace(tr, q_bound=args.q_bound)
    mon = monitors(tr)
    if args.format == "json":
        text = to_json({"alpha": alpha, "x": x, "states": tr.states,
                        "truncated_at": tr.truncated_at,
                        "validation_failures": rep.failures, "monitor_failures": mon.failures,
                        **args._notes})
    else:
        text = to_csv(["i", "state", "x", "x_half", "q", "q_half"],
                      [(s.i, s.state, s.x, s.xp, s.q, s.qp) for s in tr.steps])
    if not (rep.ok and mon.ok):
        for f in rep.failures + mon.failures:
            sys.stderr.write(f + "\n")
        raise CheckFailed(text)
    return text


def cmd_diffnorm(args):
    from .sync import supnorm_scan

    alpha = parse_real(args.alpha, "alpha")
    r = supnorm_scan(alpha, args.n, args.tol, backend=args.backend)
    return to_json({"alpha": alpha, "max_abs": r.max_abs, "argmax": r.argmax, "points": r.points,
                    "dropped": r.dropped, "max_err": r.max_err})


def cmd_entropy(args):
    from .entropy import constancy_report

    alphas = [parse_real(a, "alpha") for a in args.alpha.split(",")]
    rep = constancy_report(alphas, args.k, args.trials, args.seed, backend=args.backend,
                           check_range=args.constancy)
    rows = [{"alpha": float(r.alpha), "k": r.k, "trials": r.trials, "mean": r.mean,
             "stderr": r.stderr, "seed": r.seed, "redrawn": r.redrawn} for r in rep.rows]
    if args.format == "csv":
        return to_csv(list(rows[0]), [list(r.values()) for r in rows])
    return to_json({"rows": rows, "spread": rep.spread})


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="alphawilton", description="alpha-continued fractions and Wilton functions")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help, exact=False, formats=("json",)):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write to this file instead of stdout")
        sp.add_argument("--format", choices=formats, default=formats[0])
        if exact:
            sp.add_argument("--rationalize", action="store_true",
                            help="accept decimals, using the nearest p/q with q <= 10^6")
        return sp

    def numerics(sp, tol=1e-8):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--kmax", type=int, default=200)
        sp.add_argument("--backend", choices=("numba", "numpy", "mpmath"))

    sp = add("expand", cmd_expand, "orbit and digit table", exact=True, formats=("csv",))
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--K", type=int, default=20)
    sp.add_argument("--mode", choices=("exact", "float"), default="exact")
    sp.add_argument("--unfolded", action="store_true")

    sp = add("wilton", cmd_wilton, "evaluate one series")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--series", choices=("wilton", "brjuno", "q"), default="wilton")
    sp.add_argument("--unfolded", action="store_true")
    numerics(sp)

    sp = add("grid", cmd_grid, "midpoint grid samples", formats=("csv",))
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--unfolded", action="store_true")
    numerics(sp)

    sp = add("matching", cmd_matching, "matching exponents", exact=True)
    sp.add_argument("--alpha", required=True)

    sp = add("pseudocenter", cmd_pseudocenter, "pseudocenter exponents", exact=True,
             formats=("csv",))
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha")
    g.add_argument("--max-den", type=int)

    sp = add("classify", cmd_classify, "singularity type at a rational", exact=True,
             formats=("text", "json"))
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--xi", required=True)

    sp = add("witness", cmd_witness, "mean oscillation witness", exact=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--xi")
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--backend", choices=("numba", "numpy"))

    sp = add("sync", cmd_sync, "joint orbit states against alpha = 1/2", exact=True,
             formats=("csv", "json"))
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--K", type=int, default=50)
    sp.add_argument("--mode", choices=("exact", "float"), default="exact")
    sp.add_argument("--q-bound", choices=("prev", "prime"), default="prev")

    sp = add("diffnorm", cmd_diffnorm, "sup norm of W_alpha - W_1/2")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--backend", choices=("numba", "numpy"))

    sp = add("entropy", cmd_entropy, "entropy estimates", formats=("json", "csv"))
    sp.add_argument("--alpha", required=True, help="one value or a comma separated list")
    sp.add_argument("--k", type=int, default=10_000)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--constancy", action="store_true", help="require alpha in [1-g, g]")
    sp.add_argument("--backend", choices=("numba", "numpy"))
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    args._notes = {}
    try:
        _emit(args, args.func(args))
        return EXIT_OK
    except CheckFailed as e:
        _emit(args, str(e))
        return EXIT_CHECK
    except NotConverged as e:
        _emit(args, str(e))
        return EXIT_CONVERGENCE
    except (DomainError, ZeroDivisionError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
