"""Command-line front end.

Every subcommand writes CSV to stdout (or ``--out``) and a one-line summary
to stderr. Exit status: 0 when all checks pass, 1 when a check finds a
violation, 2 on usage or domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import experiments
from .catalog import GeometryParams, envelope_closed_form, list_catalog, make_estimate
from .compare import dominance, emit_csv
from .condition import verify_at_times, verify_estimate_condition
from .designer import (
    builtin_profile,
    envelope_ode,
    pair_from_profile,
    profile_from_csv,
    spliced_pair,
)
from .errors import LiYauError
from .kernels import KERNEL_IDS, fd_check, fd_solve, harnack_check, make_kernel, verify_estimate
from .timefn import constant

__all__ = ["main", "run", "parse_grid", "parse_estimate"]

OK, VIOLATION, USAGE = 0, 1, 2
SLACK_TOL = 1e-8
HARNACK_TOL = 1e-8
ODE_REL_TOL = 1e-6
C1_TOL = 1e-6
FD_DECAY_TOL = 5e-3
FD_MASS_TOL = 1e-8
# list-valued options; a flag on the command line replaces the config-file entry
_APPEND_KEYS = {"estimate", "e2"}


class UsageError(Exception):
    pass


def parse_grid(text: str, log: bool = True) -> np.ndarray:
    """``lo:hi:count`` (log-spaced unless ``log`` is False) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {text!r} must look like lo:hi:count")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"bad range {text!r}: {exc}") from None
        if count < 1 or not lo <= hi:
            raise UsageError(f"range {text!r} needs lo <= hi and count >= 1")
        if count == 1:
            return np.array([lo])
        if log:
            if not lo > 0:
                raise UsageError(f"log-spaced range {text!r} needs lo > 0 (use --linear)")
            out = np.geomspace(lo, hi, count)
        else:
            out = np.linspace(lo, hi, count)
        out[0], out[-1] = lo, hi
        return out
    try:
        return np.array([float(_number(v)) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from None


def _number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_estimate(text: str, default_alpha=None, default_theta=None):
    """``id`` or ``id:alpha=2`` / ``id:theta=1/3``; returns (id, extra)."""
    eid, _, rest = text.partition(":")
    extra = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"estimate parameter {item!r} must look like name=value")
        try:
            extra[key.strip()] = _number(value)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    entry = {e.id: e for e in list_catalog()}.get(eid)
    if entry is None:
        raise UsageError(f"unknown estimate {eid!r}; run the catalog subcommand for the list")
    if "alpha" in entry.required and "alpha" not in extra and default_alpha is not None:
        extra["alpha"] = default_alpha
    if "theta" in entry.required and "theta" not in extra and default_theta is not None:
        extra["theta"] = default_theta
    return eid, extra


def _float(text: str) -> float:
    try:
        return _number(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _geometry_args(p, K=True, n=True):
    if K:
        p.add_argument("--K", type=_float, default=None, help="Ricci lower bound is -K")
    if n:
        p.add_argument("--n", type=_float, default=None, help="dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liyau", description="Li-Yau type gradient estimates: verify, design, compare.")
    parser.add_argument("--out", default=None, help="write CSV here instead of stdout")
    parser.add_argument("--config", default=None, help="key=value file; command-line flags take precedence")
    # the same two options are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    add("catalog", help="list estimates")

    p = add("verify", help="check the quadratic condition over a t-interval")
    p.add_argument("--estimate", required=True)
    p.add_argument("--alpha", type=_float)
    p.add_argument("--theta", type=_float)
    _geometry_args(p)
    p.add_argument("--t", default="0.01:10:100", help="lo:hi:count")
    p.add_argument("--linear", action="store_true", help="linear instead of log spacing")

    p = add("design", help="build (alpha, c) pairs")
    p.add_argument("mode", choices=("from-a", "ode", "splice"))
    p.add_argument("--profile", default="quadratic", help="quadratic, sinh or a CSV file of t,a")
    p.add_argument("--alpha", type=_float, default=2.0)
    _geometry_args(p)
    p.add_argument("--t", default=None, help="output grid lo:hi:count")
    p.add_argument("--t0", type=_float, default=None, help="ode start (default (alpha-1)/K)")
    p.add_argument("--c0", type=_float, default=None, help="ode start value (default: closed form at t0)")
    p.add_argument("--T", type=_float, default=5.0, help="ode/splice end time")
    p.add_argument("--step", type=_float, default=1e-3)
    p.add_argument("--linear", action="store_true")

    p = add("simulate", help="estimate slack on a model-space kernel or the circle FD solver")
    p.add_argument("--kernel", required=True, choices=KERNEL_IDS + ("fd_circle",))
    p.add_argument("--estimate", action="append", default=None,
                   help="id or id:alpha=...; repeatable; 'all' = every estimate valid for the kernel")
    p.add_argument("--alpha", type=_float)
    p.add_argument("--theta", type=_float)
    _geometry_args(p)
    p.add_argument("--r", default=None, help="radial grid lo:hi:count (always linear)")
    p.add_argument("--t", default=None, help="time grid lo:hi:count")
    p.add_argument("--linear", action="store_true")
    p.add_argument("--init", default="single_mode", choices=("single_mode", "random", "gaussian", "constant"))
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--T", type=_float, default=1.0)
    p.add_argument("--t-min", dest="t_min", type=_float, default=0.05)
    p.add_argument("--seed", type=int, default=0)

    p = add("compare", help="gradient-ceiling dominance e1 <= e2")
    p.add_argument("--e1", required=True)
    p.add_argument("--e2", action="append", required=False, default=None, help="repeatable")
    p.add_argument("--alpha", type=_float)
    p.add_argument("--theta", type=_float)
    _geometry_args(p)
    p.add_argument("--t", default="0.1:10:3")
    p.add_argument("--h", default=None, help="h grid lo:hi:count (linear); default per t")
    p.add_argument("--h-points", dest="h_points", type=int, default=100)
    p.add_argument("--linear", action="store_true")

    p = add("harnack", help="Harnack ratio on the 3-sphere kernel")
    p.add_argument("--theta", default="1/3", help="value or list")
    p.add_argument("--s", default="0.5", help="value, list or lo:hi:count")
    p.add_argument("--t", default="1", help="value, list or lo:hi:count")
    p.add_argument("--d", default="0", help="distances; x sits at r_y + d on the ray through y")
    p.add_argument("--ry", type=_float, default=1.0)
    p.add_argument("--linear", action="store_true")

    p = add("acceptance", help="run the acceptance experiments")
    p.add_argument("--criterion", type=int, action="append", choices=sorted(experiments.CRITERIA))
    return parser


def _read_config(path: str):
    pairs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        pairs.append((key.strip().replace("_", "-"), value.strip()))
    return pairs


def _config_tokens(pairs, argv_rest: Sequence[str]):
    given = {a.split("=", 1)[0] for a in argv_rest if a.startswith("--")}
    tokens = []
    for key, value in pairs:
        flag = f"--{key}"
        if key.replace("-", "_") in _APPEND_KEYS and flag in given:
            continue
        if value.lower() in ("true", "yes") and key == "linear":
            tokens.append(flag)
        elif key == "linear":
            continue
        else:
            tokens.append(f"{flag}={value}")
    return tokens


def _splice_config(argv: List[str]) -> List[str]:
    # config entries go right after the subcommand so later flags override them
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    if config is None:
        return argv
    commands = {"catalog", "verify", "design", "simulate", "compare", "harnack", "acceptance"}
    idx = next((i for i, a in enumerate(argv) if a in commands), None)
    if idx is None:
        return argv
    if argv[idx] == "design" and idx + 1 < len(argv) and not argv[idx + 1].startswith("-"):
        idx += 1
    tokens = _config_tokens(_read_config(config), argv[idx + 1:])
    return argv[: idx + 1] + tokens + argv[idx + 1:]


def _geometry(args, fallback_K=None, fallback_n=None) -> GeometryParams:
    K = args.K if args.K is not None else fallback_K
    n = args.n if args.n is not None else fallback_n
    if K is None or n is None:
        raise UsageError("--K and --n are required")
    return GeometryParams(float(K), n)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _cmd_catalog(args, out, err):
    out.write(_csv(((e.id, " ".join(e.required), e.validity) for e in list_catalog()),
                   ("id", "parameters", "validity")))
    return OK


def _cmd_verify(args, out, err):
    eid, extra = parse_estimate(args.estimate, args.alpha, args.theta)
    p = _geometry(args)
    # constructed without the parameter check so that the condition reports the failure
    e = make_estimate(eid, p, extra, validate=False)
    ts = parse_grid(args.t, not args.linear)
    if ts.size < 2:
        raise UsageError("--t needs at least two points")
    rep = verify_estimate_condition(e, float(ts[0]), float(ts[-1]), ts.size, not args.linear)
    out.write(rep.to_csv())
    for msg in rep.errors:
        err.write(f"error: {msg}\n")
    failed = sum(1 for r in rep.rows if not r.verdict.holds) + len(rep.errors)
    err.write(f"{e.label()}: {len(rep.rows) - failed + len(rep.errors)}/{len(rep.rows)} rows hold, "
              f"worst margin {rep.worst_margin:.6g}\n")
    return OK if rep.holds else VIOLATION


def _profile(name: str, K: float):
    if name in ("quadratic", "sinh"):
        return builtin_profile(name, K)
    return profile_from_csv(name)


def _cmd_design(args, out, err):
    p = _geometry(args)
    log = not args.linear
    if args.mode == "from-a":
        ts = parse_grid(args.t or "0.01:10:100", log)
        prof = _profile(args.profile, p.K)
        alpha, c = pair_from_profile(prof, p)
        rows = [(float(t), alpha(float(t)), c(float(t))) for t in ts]
        out.write(_csv(rows, ("t", "alpha", "c")))
        rep = verify_at_times(alpha, c, p, ts)
        err.write(f"profile {prof.label}: condition {'holds' if rep.holds else 'fails'} on the grid\n")
        return OK if rep.holds else VIOLATION

    alpha_v = args.alpha
    if not alpha_v > 1:
        raise UsageError("--alpha must exceed 1 for the envelope")
    if not p.K > 0:
        raise UsageError("--K must be positive for the envelope")
    t0 = args.t0 if args.t0 is not None else (alpha_v - 1) / p.K
    ts = parse_grid(args.t or f"{t0!r}:{args.T!r}:101", log=False if args.t is None else log)
    if args.mode == "ode":
        ref = envelope_closed_form(alpha_v, p) if args.t0 is None else None
        c0 = args.c0 if args.c0 is not None else envelope_closed_form(alpha_v, p)(t0)
        sol = envelope_ode(constant(alpha_v), p, t0, c0, args.T, args.step)
        rows, worst = [], 0.0
        for t in ts:
            t = float(t)
            if ref is not None and args.c0 is None:
                rel = abs(sol(t) - ref(t)) / ref(t)
                worst = max(worst, rel)
                rows.append((t, sol(t), ref(t), rel))
            else:
                rows.append((t, sol(t), math.nan, math.nan))
        out.write(_csv(rows, ("t", "c_ode", "c_closed", "rel_err")))
        if ref is None or args.c0 is not None:
            err.write("no closed form for this start point; values only\n")
            return OK
        err.write(f"envelope: max relative error {worst:.3g} (tolerance {ODE_REL_TOL:g})\n")
        return OK if worst <= ODE_REL_TOL else VIOLATION

    alpha, c, report = spliced_pair(alpha_v, p, args.T, args.step)
    grid = parse_grid(args.t or f"0.01:{args.T!r}:100", log)
    rows = [(float(t), alpha(float(t)), c(float(t))) for t in grid]
    out.write(_csv(rows, ("t", "alpha", "c")))
    rep = verify_at_times(alpha, c, p, grid)
    err.write(f"splice at t0={report.t0:.6g}: c jump {report.c_jump:.3g}, derivative gap "
              f"{report.derivative_gap:.3g}; condition {'holds' if rep.holds else 'fails'}\n")
    return OK if report.derivative_gap <= C1_TOL and rep.holds else VIOLATION


def _estimates_for(args, p: GeometryParams):
    specs = args.estimate or []
    if not specs:
        raise UsageError("--estimate is required")
    out = []
    for spec in specs:
        if spec == "all":
            alphas = (args.alpha,) if args.alpha is not None else experiments.ALPHAS
            if args.theta is not None:
                thetas = (args.theta,)
            elif p.K < 0:
                thetas = (0.1, 1 / 3)
            else:
                thetas = experiments.THETAS
            out += experiments.applicable_estimates(p, alphas, thetas)
            continue
        eid, extra = parse_estimate(spec, args.alpha, args.theta)
        out.append(make_estimate(eid, p, extra))
    return out


def _kernel_geometry_check(args, k):
    p = k.params
    if args.K is not None and args.K != p.K:
        raise UsageError(f"{k.id} has K={p.K:g}; got --K {args.K:g}")
    if args.n is not None and args.n != p.n:
        raise UsageError(f"{k.id} has n={p.n:g}; got --n {args.n:g}")


def _cmd_simulate(args, out, err):
    log = not args.linear
    if args.kernel == "fd_circle":
        return _simulate_fd(args, out, err)
    k = make_kernel(args.kernel, args.n if args.n is not None else 3)
    _kernel_geometry_check(args, k)
    estimates = _estimates_for(args, k.params)
    r_default = "0.001:3:50" if args.kernel == "sphere_s3" else "0:3:50"
    rs = parse_grid(args.r or r_default, log=False)
    ts = parse_grid(args.t or "0.01:10:50", log)
    chunks, passed = [], True
    for e in estimates:
        rep = verify_estimate(k, e, rs, ts)
        text = rep.to_csv()
        chunks.append(text if not chunks else text.split("\n", 1)[1])
        ok = rep.passed(SLACK_TOL)
        passed &= ok
        r, t = rep.argmin
        err.write(f"{k.id} {e.label()}: min slack {rep.min_slack:.6g} at r={r:.6g}, t={t:.6g} "
                  f"[{'ok' if ok else 'VIOLATION'}]\n")
    out.write("".join(chunks))
    return OK if passed else VIOLATION


def _fd_initial(args):
    N = args.N
    if args.init == "single_mode":
        return experiments.single_mode(N)
    if args.init == "random":
        return experiments.random_smooth(N, args.seed)
    if args.init == "gaussian":
        return experiments.wrapped_gaussian(N)
    return np.ones(N)


def _simulate_fd(args, out, err):
    p = GeometryParams(0.0, 1)
    if (args.K not in (None, 0.0)) or (args.n not in (None, 1.0)):
        raise UsageError("fd_circle has K=0, n=1")
    estimates = _estimates_for(args, p)
    run = fd_solve(_fd_initial(args), args.N, args.T)
    drift = run.mass_drift()
    passed = drift <= FD_MASS_TOL
    summary = [f"mass drift {drift:.3g}"]
    if args.init == "single_mode":
        exact = 1 + 0.5 * np.exp(-run.times)[:, None] * np.cos(run.x)[None, :]
        decay = float(np.max(np.abs(run.u - exact)))
        passed &= decay <= FD_DECAY_TOL
        summary.append(f"single-mode error {decay:.3g}")
    chunks = []
    for e in estimates:
        rep = fd_check(run, e, args.t_min, args.T)
        text = rep.to_csv()
        chunks.append(text if not chunks else text.split("\n", 1)[1])
        ok = rep.passed()
        passed &= ok
        summary.append(f"{e.label()} min slack {rep.min_slack:.6g} (allowance {rep.allowance:.3g})"
                       f"{'' if ok else ' VIOLATION'}")
    out.write("".join(chunks))
    err.write(f"fd_circle N={args.N} init={args.init}: " + "; ".join(summary) + "\n")
    return OK if passed else VIOLATION


def _cmd_compare(args, out, err):
    p = _geometry(args)
    eid1, extra1 = parse_estimate(args.e1, args.alpha, args.theta)
    e1 = make_estimate(eid1, p, extra1)
    if not args.e2:
        raise UsageError("--e2 is required")
    rivals = []
    for spec in args.e2:
        eid, extra = parse_estimate(spec, args.alpha, args.theta)
        rivals.append(make_estimate(eid, p, extra))
    ts = parse_grid(args.t, not args.linear)
    hs = parse_grid(args.h, log=False) if args.h else None
    passed = True
    chunks = []
    for e2 in rivals:
        rep = dominance(e1, e2, ts, hs, args.h_points)
        passed &= rep.holds
        text = emit_csv(rep)
        if len(rivals) > 1:
            lines = text.splitlines()
            head = "e1,e2," + lines[0] + "\n"
            body = "".join(f"{rep.e1},{rep.e2},{line}\n" for line in lines[1:])
            text = (head if not chunks else "") + body
        chunks.append(text)
        err.write(f"{rep.verdict}: max ceiling difference {rep.max_diff:.3g}\n")
    out.write("".join(chunks))
    return OK if passed else VIOLATION


def _cmd_harnack(args, out, err):
    log = not args.linear
    k = make_kernel("sphere_s3")
    thetas = parse_grid(args.theta, log)
    ss = parse_grid(args.s, log)
    ts = parse_grid(args.t, log)
    ds = parse_grid(args.d, log=False)
    rows, worst = [], math.inf
    for theta in thetas:
        for s in ss:
            for t in ts:
                if not s < t and not (s == t and len(ss) == 1 and len(ts) == 1):
                    continue
                for d in ds:
                    r_x = args.ry + float(d)
                    ratio = harnack_check(k, float(theta), float(s), float(t), r_x, args.ry, float(d))
                    worst = min(worst, ratio)
                    rows.append((float(theta), float(s), float(t), r_x, args.ry, float(d), ratio))
    if not rows:
        raise UsageError("no (s, t) pair with s < t")
    out.write(_csv(rows, ("theta", "s", "t", "r_x", "r_y", "d", "ratio")))
    ok = worst >= 1 - HARNACK_TOL
    err.write(f"harnack: {len(rows)} checks, min ratio {worst:.9g} [{'ok' if ok else 'VIOLATION'}]\n")
    return OK if ok else VIOLATION


def _cmd_acceptance(args, out, err):
    results = experiments.run_all(args.criterion)
    out.write(_csv(((r.number, r.name, "pass" if r.passed else "fail", r.detail) for r in results),
                   ("criterion", "name", "result", "detail")))
    for r in results:
        err.write(r.line() + "\n")
    return OK if all(r.passed for r in results) else VIOLATION


_COMMANDS = {
    "catalog": _cmd_catalog,
    "verify": _cmd_verify,
    "design": _cmd_design,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "harnack": _cmd_harnack,
    "acceptance": _cmd_acceptance,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit code instead of exiting."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _splice_config(argv)
    except UsageError as exc:
        stderr.write(f"liyau: error: {exc}\n")
        return USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    buf = io.StringIO()
    try:
        code = _COMMANDS[args.command](args, buf, stderr)
    except UsageError as exc:
        parser.print_usage(stderr)
        stderr.write(f"liyau: error: {exc}\n")
        return USAGE
    except (LiYauError, ValueError) as exc:
        stderr.write(f"liyau: error: {exc}\n")
        return USAGE
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return code


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
