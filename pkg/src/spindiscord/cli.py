"""Command-line front end that writes discord profiles and their decay fits as CSV or JSON.

Exit status is 1 on a numeric failure and 2 on a usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import fitting, xxz, xy
from .errors import DomainError, PreconditionError, SpinDiscordError
from .profile import DecayProfile

THREADS_ENV = "SPINDISCORD_THREADS"
DEFAULT_PROFILE_LAMBDAS = (0.5, 0.75, 1.1, 1.5)


class UsageError(Exception):
    pass


def _fmt(value, digits: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{digits}g")
    if value is None:
        return ""
    return str(value)


def _round(obj, digits: int):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(format(obj, f".{digits}g")) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    return obj


def render(columns, rows, footer: dict | None, fmt: str, digits: int) -> str:
    """Serialize a table (and optional metadata) deterministically."""
    if fmt == "json":
        payload = {"rows": [dict(zip(columns, r)) for r in rows]}
        if footer:
            payload.update(footer)
        return json.dumps(_round(payload, digits), sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v, digits) for v in r])
    for key, val in (footer or {}).items():
        buf.write(f"# {key}: {json.dumps(_round(val, digits), sort_keys=True)}\n")
    return buf.getvalue()


def render_record(record: dict, fmt: str, digits: int) -> str:
    if fmt == "json":
        return json.dumps(_round(record, digits), sort_keys=True) + "\n"
    return render(list(record), [list(record.values())], None, "csv", digits)


# destinations whose flag spelling differs from the attribute name
_FLAG_NAMES = {"lam": "lambda"}


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ("--" + _FLAG_NAMES.get(m, m).replace("_", "-") for m in missing)
        raise UsageError("missing required option(s): " + ", ".join(flags))


def xy_pair_record(gamma, lam, n, beta=None, tol=xy.DEFAULT_TOL, method="auto") -> dict:
    params = xy.XYParams(gamma, lam, beta)
    obs, rep = xy.pair_discord(n, params, tol, method)
    return {
        "gamma": gamma, "lambda": lam, "n": n,
        "mz": obs.mz, "gxx": obs.gxx, "gyy": obs.gyy, "gzz": obs.gzz,
        "mutual_info": rep.mutual_info, "classical_corr": rep.classical_corr,
        "discord": rep.discord, "method": rep.method,
    }


def cmd_xy_pair(args):
    _need(args, "gamma", "lam", "n")
    rec = xy_pair_record(args.gamma, args.lam, args.n, args.beta, args.tol, args.method)
    return render_record(rec, args.format, args.digits)


def cmd_xy_profile(args):
    _need(args, "gamma", "n_max")
    if args.fit and args.n_max < fitting.MIN_SAMPLES:
        raise UsageError(f"--fit needs --n-max >= {fitting.MIN_SAMPLES}")
    if args.lam is not None:
        prof = xy.discord_profile(xy.XYParams(args.gamma, args.lam, args.beta), args.n_max, args.tol)
        footer = {"fit": fitting.fit_exponential(prof).to_dict()} if args.fit else None
        return render(["n", "discord"], prof.samples(), footer, args.format, args.digits)
    # no --lambda: one curve per representative field on each side of the transition
    rows, fits = [], {}
    for lam in DEFAULT_PROFILE_LAMBDAS:
        prof = xy.discord_profile(xy.XYParams(args.gamma, lam, args.beta), args.n_max, args.tol)
        rows.extend([lam, n, q] for n, q in prof.samples())
        if args.fit:
            fits[repr(lam)] = fitting.fit_exponential(prof).to_dict()
    footer = {"fit": fits} if args.fit else None
    return render(["lambda", "n", "discord"], rows, footer, args.format, args.digits)


def cmd_xy_heatmap(args):
    _need(args, "gamma_min", "gamma_max", "lambda_min", "lambda_max")
    grid = fitting.heatmap_scan((args.gamma_min, args.gamma_max), (args.lambda_min, args.lambda_max),
                                (args.gamma_steps, args.lambda_steps), args.m, args.tol, args.threads)
    return render(["gamma", "lambda", "ratio"], list(grid.rows()), None, args.format, args.digits)


def cmd_xxz_profile(args):
    _need(args, "delta", "h", "sites")
    system = xxz.XXZSystem(args.sites, args.delta, args.h)
    gs = xxz.ground_state(system)
    side = "a" if args.measure_side == "near" else "b"
    prof = xxz.discord_profile(system, args.n_max, side, gs)
    footer = {
        "ground_state": {"energy": gs.energy, "sector": gs.sector, "degenerate": gs.degenerate,
                         "degeneracy": [list(d) for d in gs.degeneracy],
                         "residual": gs.residual_norm},
    }
    if len(prof) >= fitting.MIN_SAMPLES:
        footer["fits"] = fitting.select_model(prof).to_dict()
    return render(["n", "discord"], prof.samples(), footer, args.format, args.digits)


def cmd_critical_field(args):
    _need(args, "delta")
    return render_record({"delta": args.delta, "h_c": xxz.critical_field(args.delta)},
                         args.format, args.digits)


def read_profile_csv(text: str) -> DecayProfile:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    fields = reader.fieldnames or []
    qcol = next((c for c in ("discord", "q", "Q") if c in fields), None)
    if "n" not in fields or qcol is None:
        raise UsageError("profile CSV needs columns 'n' and 'discord' (or 'q')")
    samples = [(int(float(row["n"])), float(row[qcol])) for row in reader]
    return DecayProfile.from_samples(samples, {"source": "csv"})


def cmd_fit(args):
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    sel = fitting.select_model(read_profile_csv(text))
    cols = ["model", "a", "b", "c", "sse", "aic", "converged", "iterations"]
    rows = [[getattr(f, k) for k in cols] for f in (sel.exponential, sel.power_law)]
    return render(cols, rows, {"preferred": sel.preferred}, args.format, args.digits)


def _common(config_default_tol=xy.DEFAULT_TOL) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("output and numerics")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", default="-", help="output path (default: stdout)")
    g.add_argument("--tol", type=float, default=config_default_tol, help="quadrature tolerance")
    g.add_argument("--threads", type=int, default=None,
                   help=f"worker processes for scans (default: ${THREADS_ENV} or 1)")
    g.add_argument("--digits", type=int, default=12, help="significant digits, 6..17")
    g.add_argument("--config", default=None, help="JSON file of option defaults")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="spindiscord", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)
    leaves = {}

    xy_p = top.add_parser("xy", help="thermodynamic-limit XY chain")
    xy_sub = xy_p.add_subparsers(dest="command", required=True)

    p = xy_sub.add_parser("pair", parents=[common], help="observables and discord of one pair")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float, default=None, help="inverse temperature (omit for T -> 0)")
    p.add_argument("--method", choices=("auto", "closed_form", "optimized"), default="auto")
    p.set_defaults(func=cmd_xy_pair)
    leaves["xy pair"] = p

    p = xy_sub.add_parser("profile", parents=[common], help="discord versus distance")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", dest="lam", type=float,
                   help="omit to emit curves at lambda = 0.5, 0.75, 1.1, 1.5")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--fit", action="store_true", help="append an exponential fit footer")
    p.set_defaults(func=cmd_xy_profile)
    leaves["xy profile"] = p

    p = xy_sub.add_parser("heatmap", parents=[common], help="range ratio over a (gamma, lambda) grid")
    p.add_argument("--gamma-min", type=float)
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--gamma-steps", type=int, default=1)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--lambda-steps", type=int, default=1)
    p.add_argument("--M", "--m", dest="m", type=int, default=10)
    p.set_defaults(func=cmd_xy_heatmap)
    leaves["xy heatmap"] = p

    xxz_p = top.add_parser("xxz", help="XXZ chain with domain-wall boundary fields")
    xxz_sub = xxz_p.add_subparsers(dest="command", required=True)

    p = xxz_sub.add_parser("profile", parents=[common], help="ground-state discord profile and fits")
    p.add_argument("--delta", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--sites", type=int)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--measure-side", choices=("near", "far"), default="far")
    p.set_defaults(func=cmd_xxz_profile)
    leaves["xxz profile"] = p

    p = xxz_sub.add_parser("critical-field", parents=[common], help="h_c = sqrt(delta^2 - 1) / 2")
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_critical_field)
    leaves["xxz critical-field"] = p

    p = top.add_parser("fit", parents=[common], help="fit both decay laws to a CSV profile")
    p.add_argument("input", help="CSV with columns n,discord ('-' for stdin)")
    p.set_defaults(func=cmd_fit)
    leaves["fit"] = p
    return parser, leaves


def parse_args(argv=None):
    parser, leaves = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        key = args.group if args.group == "fit" else f"{args.group} {args.command}"
        leaf = leaves[key]
        known = {a.dest for a in leaf._actions}
        unknown = set(config) - known
        if unknown:
            parser.error("unknown config keys: " + ", ".join(sorted(unknown)))
        leaf.set_defaults(**config)
        args = parser.parse_args(argv)
    if args.threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            args.threads = int(env) if env else 1
        except ValueError:
            parser.error(f"${THREADS_ENV} must be an integer")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if not (6 <= args.digits <= 17):
        parser.error("--digits must lie in [6, 17]")
    if not args.tol > 0:
        parser.error("--tol must be positive")
    return parser, args


def main(argv=None) -> int:
    parser, args = parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"spindiscord: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PreconditionError) as exc:
        print(f"spindiscord: error: {exc}", file=sys.stderr)
        return 2
    except (SpinDiscordError, ArithmeticError) as exc:
        print(f"spindiscord: numeric failure: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
