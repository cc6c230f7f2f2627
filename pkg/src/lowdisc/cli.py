"""Command-line interface.

Every command writes CSV (or JSON for scalar results with ``--format json``)
whose first line is ``# lowdisc <canonical arguments>``; running those
arguments again reproduces the output byte for byte.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import importlib
import io
import json
import math
import sys
from typing import Sequence

from . import __version__, _rng
from .cbc import CbcConfig, cbc_search
from .cubature import (
    Integrand,
    IntegrandError,
    keister_integrand,
    keister_reference,
    stop_clt_iid,
    stop_qmc_clt,
)
from .discrepancy import (
    KernelSpec,
    discrepancy_iid_rms,
    discrepancy_lattice_fast,
    discrepancy_naive,
    double_integral,
)
from .multilevel import (
    ANALYTIC_MEAN,
    LevelStack,
    analytic_stack,
    estimate_level_variation,
    ml_estimate,
    optimal_allocation,
)
from .sampling import RANDOMIZE_ALIASES, Sampler, replication_samplers
from .seqgen import LatticeSpec, grid_points, read_matrix_file, sobol_spec
from .tvalue import t_value

SEQS = ("lattice", "sobol", "digital", "halton", "hammersley", "grid", "iid")


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.17g}"


# --------------------------------------------------------------------------
# argument parsing helpers

def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _m_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _weights(text: str) -> str:
    if text in ("inv", "one"):
        return text
    try:
        [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("weights are 'inv', 'one' or comma-separated numbers")
    return text


def _add_seq(p: argparse.ArgumentParser, default: str = "sobol", randomize: str = "none") -> None:
    p.add_argument("--seq", choices=SEQS, default=default, help=f"sequence family (default {default})")
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--randomize", choices=tuple(RANDOMIZE_ALIASES), default=randomize,
                   help=f"randomization (default {randomize})")
    p.add_argument("--h", type=_int_list, default=None, help="lattice generating vector, e.g. 1,11")
    p.add_argument("--matrices", default=None, help="generating-matrix file for --seq digital")
    p.add_argument("--directions", default=None, help="direction-number file for --seq sobol")


def _add_kernel(p: argparse.ArgumentParser, default: str = "centered") -> None:
    p.add_argument("--kernel", choices=("centered", "weighted_centered", "shift_invariant"), default=default)
    p.add_argument("--weights", type=_weights, default=None,
                   help="coordinate weights: 'inv' (1/l), 'one', or a comma list")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lowdisc", description="Low-discrepancy sampling and cubature.")
    ap.add_argument("--version", action="version", version=f"lowdisc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit points as CSV")
    _add_seq(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, default=0, help="index of the first point")
    p.add_argument("--order", choices=("extensible", "natural"), default="extensible", help="lattice order")

    p = sub.add_parser("discrepancy", help="kernel discrepancy of a point set")
    _add_seq(p)
    _add_kernel(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--m-range", type=_m_range, help="n = 2^m for m in LO..HI")
    p.add_argument("--method", choices=("naive", "lattice-fast"), default="naive")

    p = sub.add_parser("tvalue", help="t-value of a base-2 digital net")
    p.add_argument("--matrices", default=None, help="generating-matrix file (default: Sobol')")
    p.add_argument("--directions", default=None)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--method", choices=("auto", "rank", "count"), default="auto")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("cbc", help="component-by-component lattice search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _add_kernel(p, "weighted_centered")
    p.add_argument("--exclude-used", action="store_true")

    p = sub.add_parser("integrate", help="adaptive cubature with a stopping rule")
    _add_seq(p, randomize="digital-shift")
    p.add_argument("--integrand", default="keister", help="'keister' or module:function returning an Integrand")
    p.add_argument("--rule", choices=("qmc-clt", "iid-clt"), default="qmc-clt")
    p.add_argument("--eps", type=float, default=1e-2, help="absolute error tolerance")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--replications", type=int, default=15)
    p.add_argument("--n-init", type=int, default=256)
    p.add_argument("--n-max", type=int, default=2 ** 20)
    p.add_argument("--inflation", type=float, default=1.2)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("ml-integrate", help="multilevel estimate with optimal allocation")
    _add_seq(p, randomize="digital-shift")
    p.add_argument("--stack", default="analytic", help="'analytic' or module:function returning a LevelStack")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("benchmark", help="data for error and discrepancy decay plots")
    p.add_argument("target", choices=("keister", "discrepancy"))
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--mmin", type=int, default=7)
    p.add_argument("--mmax", type=int, default=14)
    p.add_argument("--replications", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    _add_kernel(p, "weighted_centered")

    for sp in sub.choices.values():
        sp.add_argument("--out", default=None, help="output path (default stdout)")
    return ap


def canonical(args: argparse.Namespace, parser: argparse.ArgumentParser) -> str:
    """Command line that reproduces ``args``, with every option spelled out."""
    sp = parser._subparsers._group_actions[0].choices[args.command]
    parts = [args.command]
    for act in sp._actions:
        if act.dest in ("help", "out"):
            continue
        val = getattr(args, act.dest, None)
        if not act.option_strings:
            parts.append(str(val))
            continue
        opt = act.option_strings[-1]
        if isinstance(act, argparse._StoreTrueAction):
            if val:
                parts.append(opt)
        elif val is not None:
            if isinstance(val, tuple) and act.dest == "m_range":
                val = f"{val[0]}:{val[1]}"
            elif isinstance(val, tuple):
                val = ",".join(map(str, val))
            parts.append(f"{opt} {val}")
    return " ".join(parts)


# --------------------------------------------------------------------------
# shared construction

def _kernel(args) -> KernelSpec:
    fam = args.kernel
    w = args.weights
    if w is None or (w == "inv" and fam != "centered"):
        return KernelSpec(fam)
    if w == "one":
        return KernelSpec(fam, (1.0,) * args.d)
    if w == "inv":
        raise ConfigError("the centered kernel has unit weights")
    return KernelSpec(fam, tuple(float(v) for v in w.split(",")))


def _sampler(args, seed: int | None = None) -> Sampler:
    kw = {}
    if args.h is not None:
        if args.seq != "lattice":
            raise ConfigError("--h applies to --seq lattice")
        kw["lattice"] = LatticeSpec(args.h)
        if len(args.h) != args.d:
            raise ConfigError(f"--h has {len(args.h)} components but --d is {args.d}")
    if args.matrices is not None:
        if args.seq not in ("digital", "sobol"):
            raise ConfigError("--matrices applies to --seq digital")
        kw["digital"] = read_matrix_file(args.matrices)
    elif args.directions is not None:
        if args.seq != "sobol":
            raise ConfigError("--directions applies to --seq sobol")
        kw["digital"] = sobol_spec(args.d, args.directions)
    if args.seq == "digital" and "digital" not in kw:
        raise ConfigError("--seq digital needs --matrices")
    if "digital" in kw and kw["digital"].d != args.d:
        raise ConfigError(f"matrix file has d={kw['digital'].d} but --d is {args.d}")
    if getattr(args, "order", "extensible") != "extensible":
        kw["order"] = args.order
    return Sampler(args.seq, args.d, args.randomize, args.seed if seed is None else seed, **kw)


def _load(ref: str, kind: type):
    mod, _, name = ref.partition(":")
    if not name:
        raise ConfigError(f"expected module:function, got {ref!r}")
    try:
        obj = getattr(importlib.import_module(mod), name)()
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot load {ref!r}: {exc}")
    if not isinstance(obj, kind):
        raise ConfigError(f"{ref!r} did not return a {kind.__name__}")
    return obj


def _scalars(out: io.StringIO, rows: list[tuple[str, object]], form: str) -> None:
    def conv(v):
        return fmt(v) if isinstance(v, float) else v

    if form == "json":
        out.write(json.dumps({k: v for k, v in rows}, sort_keys=False) + "\n")
    else:
        out.write("key,value\n")
        for k, v in rows:
            if isinstance(v, (tuple, list)):
                v = " ".join(str(conv(x)) for x in v)
            out.write(f"{k},{conv(v)}\n")


# --------------------------------------------------------------------------
# commands

def cmd_generate(args, out) -> None:
    if args.n < 0 or args.start < 0:
        raise ConfigError("--n and --start must be nonnegative")
    x = _sampler(args).points(args.n, args.start)
    out.write("i," + ",".join(f"x{j + 1}" for j in range(args.d)) + "\n")
    for k, row in enumerate(x):
        out.write(f"{args.start + k}," + ",".join(fmt(v) for v in row) + "\n")


def cmd_discrepancy(args, out) -> None:
    kern = _kernel(args)
    ns = [args.n] if args.n is not None else [2 ** m for m in range(args.m_range[0], args.m_range[1] + 1)]
    smp = _sampler(args)
    out.write("n,value,scaled,iid_rms\n")
    for n in ns:
        if n < 1:
            raise ConfigError("--n must be positive")
        x = smp.points(n)
        if args.method == "lattice-fast":
            if args.seq != "lattice" or args.randomize != "none":
                raise ConfigError("the fast path needs an unrandomized lattice")
            res = discrepancy_lattice_fast(x, kern)
        else:
            res = discrepancy_naive(x, kern)
        out.write(f"{n},{fmt(res.value)},{fmt(res.scaled)},{fmt(discrepancy_iid_rms(n, args.d, res.kernel))}\n")


def cmd_tvalue(args, out) -> None:
    spec = read_matrix_file(args.matrices) if args.matrices else sobol_spec(args.d, args.directions)
    res = t_value(spec, args.m, args.method)
    rows = [("t", res.t), ("m", res.m), ("d", res.d), ("method", res.method)]
    if res.witness_k is not None:
        rows += [("witness_k", res.witness_k), ("witness_a", res.witness_a),
                 ("witness_count", res.witness_count), ("fair_share", res.fair_share)]
    if args.format == "json":
        _scalars(out, rows, "json")
    else:
        for k, v in rows:
            v = " ".join(map(str, v)) if isinstance(v, tuple) else v
            out.write(f"{k},{v}\n")


def cmd_cbc(args, out) -> None:
    res = cbc_search(CbcConfig(args.n, args.d, _kernel(args), exclude_used=args.exclude_used))
    out.write(f"# evaluations {res.evaluations}\n")
    out.write("j,h,fom\n")
    for j, (h, f) in enumerate(zip(res.h, res.trace), 1):
        out.write(f"{j},{h},{fmt(f)}\n")


def _integrand(args) -> tuple[Integrand, float | None]:
    if args.integrand == "keister":
        ref = keister_reference(args.d) if args.d <= 12 else None
        return keister_integrand(args.d), ref
    f = _load(args.integrand, Integrand)
    if f.d != args.d:
        raise ConfigError(f"integrand has d={f.d} but --d is {args.d}")
    return f, None


def cmd_integrate(args, out) -> None:
    f, ref = _integrand(args)
    if args.rule == "iid-clt":
        res = stop_clt_iid(f, args.eps, args.alpha, inflation=args.inflation, seed=args.seed, n_max=args.n_max)
    else:
        kw = {}
        if args.h is not None:
            kw["lattice"] = LatticeSpec(args.h)
        if args.matrices is not None:
            kw["digital"] = read_matrix_file(args.matrices)
        res = stop_qmc_clt(f, args.eps, args.alpha, args.replications, args.n_init, args.n_max,
                           args.seq, args.randomize, args.seed, **kw)
    rows = [("estimate", res.estimate), ("half_width", res.half_width), ("n", res.n),
            ("replications", res.replications), ("evaluations", res.evaluations),
            ("guaranteed", int(res.guaranteed))]
    if ref is not None:
        rows.append(("reference", ref))
    _scalars(out, rows, args.format)


def cmd_ml(args, out) -> None:
    stack = analytic_stack() if args.stack == "analytic" else _load(args.stack, LevelStack)
    V = estimate_level_variation(stack, args.seq, args.randomize, args.seed)
    alloc = optimal_allocation(V, stack.costs, args.eps)
    est = ml_estimate(stack, alloc, args.seq, args.randomize, args.seed)
    rows = [("estimate", est), ("predicted_error", alloc.predicted_error), ("n", alloc.n),
            ("V", tuple(V)), ("total_cost", alloc.total_cost),
            ("continuous_cost", alloc.continuous_cost)]
    if args.stack == "analytic":
        rows.append(("reference", ANALYTIC_MEAN))
    _scalars(out, rows, args.format)


def keister_benchmark(d: int, mmin: int, mmax: int, R: int, seed: int = 0):
    """Rows ``(method, n, replication, estimate, abs_err, rel_err)`` for grid, IID and Sobol' nodes."""
    f = keister_integrand(d)
    ref = keister_reference(d)
    rows = []
    m = 1
    while m ** d < 2 ** mmin:
        m += 1
    while m ** d <= 2 ** mmax:
        est = math.fsum(f(grid_points(m, d))) / m ** d
        rows.append(("grid", m ** d, 0, est))
        m += 1
    ns = [2 ** k for k in range(mmin, mmax + 1)]
    for method, fam, rz in (("iid", "iid", "none"), ("ld", "sobol", "digital_shift")):
        for r, smp in enumerate(replication_samplers(fam, d, rz, _rng.child_seed(seed, "replication", 0 if fam == "iid" else 1), R)):
            y = f(smp.points(ns[-1]))
            for n in ns:
                rows.append((method, n, r, math.fsum(y[:n]) / n))
    return [(mt, n, r, e, abs(e - ref), abs(e - ref) / abs(ref)) for mt, n, r, e in rows]


def cmd_benchmark(args, out) -> None:
    if args.mmin > args.mmax or args.replications < 1:
        raise ConfigError("need mmin <= mmax and at least one replication")
    if args.target == "keister":
        out.write("method,n,replication,estimate,abs_err,rel_err\n")
        for mt, n, r, e, ae, re in keister_benchmark(args.d, args.mmin, args.mmax, args.replications, args.seed):
            out.write(f"{mt},{n},{r},{fmt(e)},{fmt(ae)},{fmt(re)}\n")
        return
    kern = _kernel(args)
    out.write("method,n,replication,value,scaled\n")
    for m in range(args.mmin, args.mmax + 1):
        n = 2 ** m
        rms = discrepancy_iid_rms(n, args.d, kern)
        out.write(f"iid,{n},0,{fmt(rms)},{fmt(rms / math.sqrt(double_integral(kern, args.d)))}\n")
        res = discrepancy_naive(Sampler("sobol", args.d).points(n), kern)
        out.write(f"sobol,{n},0,{fmt(res.value)},{fmt(res.scaled)}\n")
        res = discrepancy_naive(Sampler("halton", args.d).points(n), kern)
        out.write(f"halton,{n},0,{fmt(res.value)},{fmt(res.scaled)}\n")
        res = discrepancy_lattice_fast(Sampler("lattice", args.d).points(n), kern)
        out.write(f"lattice_rms,{n},0,{fmt(res.value)},{fmt(res.scaled)}\n")


COMMANDS = {
    "generate": cmd_generate,
    "discrepancy": cmd_discrepancy,
    "tvalue": cmd_tvalue,
    "cbc": cmd_cbc,
    "integrate": cmd_integrate,
    "ml-integrate": cmd_ml,
    "benchmark": cmd_benchmark,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    buf.write(f"# lowdisc {canonical(args, parser)}\n")
    try:
        COMMANDS[args.command](args, buf)
    except (IntegrandError, ArithmeticError, FloatingPointError) as exc:
        print(f"lowdisc: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as exc:
        msg = str(exc)
        if "normal quantile" in msg:
            msg += " (a coordinate is exactly 0 or 1; enable --randomize)"
        print(f"lowdisc: {msg}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
