"""Command-line front end: ``qnetbounds {channel,emax,network,sweep,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 usage or parse error,
3 missing entanglement measure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import checks
from .channels import KINDS, ChannelError, closed_form_measures, make_channel
from .emax import (UnsupportedDims, UnsupportedKind, emax_lower_sdp, emax_reduced,
                   emax_sigma_sdp, emax_upper_marginal_sdp)
from .network import (MEASURES, Cut, MissingMeasure, NetworkError, TooLarge, cut_bound,
                      load_network, min_cut, mu_dephasing_family)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_MISSING = 0, 1, 2, 3
NAMED_KINDS = tuple(k for k in KINDS if k != "custom")


class UsageError(Exception):
    pass


def _fmt6(v) -> str:
    return "inf" if math.isinf(v) else f"{v:.6f}"


def _g9(v: float) -> str:
    return f"{v:.9g}"


def _json_number(v):
    if v is None:
        return None
    return "inf" if math.isinf(v) else v


# ---------------------------------------------------------------- commands

def cmd_channel(args, out):
    ch = make_channel(args.kind, args.param)
    closed = closed_form_measures(args.kind, args.param)
    print(f"kind={ch.kind}", file=out)
    print(f"param={_fmt6(ch.param)}", file=out)
    print(f"choi_simulable={str(ch.choi_simulable).lower()}", file=out)
    for name in ("e_r", "e_sq_ub"):
        value = getattr(closed, name)
        print(f"{name}={_fmt6(value) if value is not None else 'n/a'}", file=out)
    if closed.e_max is not None:
        print(f"e_max(closed)={_fmt6(closed.e_max)}", file=out)
    print(f"e_max(sdp)={_fmt6(max(emax_sigma_sdp(ch).value, 0.0))}", file=out)
    return EXIT_OK


SDP_PROGRAMS = {"sigma": emax_sigma_sdp, "lower": emax_lower_sdp, "upper": emax_upper_marginal_sdp}


def cmd_emax(args, out):
    ch = make_channel(args.kind, args.param)
    if args.method == "closed":
        value = closed_form_measures(args.kind, args.param).e_max
        if value is None:
            print(f"error: no closed form for E_max of {args.kind}", file=sys.stderr)
            return EXIT_MISSING
        label = "closed"
    elif args.method == "reduced":
        if args.program == "sigma":
            raise UsageError("the reduced search has variants 'lower' and 'upper' only")
        value = emax_reduced(ch, args.program).value
        label = "reduced"
    else:
        value = SDP_PROGRAMS[args.program or "sigma"](ch).value
        label = "sdp"
    print(f"e_max({label})={_fmt6(max(value, 0.0))}", file=out)
    return EXIT_OK


def _cut_record(graph, bound, epsilon):
    rec = {
        "c_a": sorted(bound.cut.c_a),
        "crossing_edges": list(bound.crossing_edges),
        "e_versatile": _json_number(bound.e_versatile),
    }
    for m in MEASURES:
        rec[m] = _json_number(bound.e_by_measure.get(m))
    rec["mu"] = bound.mu
    rec["ebit_bound"] = {prof: _json_number(bound.ebit_bound.get((prof, epsilon)))
                        for prof in ("er_versatile", "emax")}
    return rec


def cmd_network(args, out):
    graph, epsilon = load_network(args.file)
    if args.epsilon is not None:
        epsilon = args.epsilon
    if not 0.0 <= epsilon < 1.0:
        raise UsageError(f"epsilon must lie in [0, 1), got {epsilon}")
    if args.min_cut:
        method = "exhaustive" if args.exhaustive else "maxflow" if args.maxflow else "auto"
        bounds = [min_cut(graph, "versatile", method, epsilon)]
    else:
        inter = graph.intermediate
        if len(inter) > 20:
            raise UsageError(f"{len(inter)} intermediate nodes: too many cuts to list, use --min-cut")
        bounds = [cut_bound(graph, Cut(frozenset(n for i, n in enumerate(inter) if mask >> i & 1)),
                            "versatile", epsilon) for mask in range(1 << len(inter))]
    doc = {"epsilon": epsilon, "cuts": [_cut_record(graph, b, epsilon) for b in bounds]}
    json.dump(doc, out, indent=2)
    out.write("\n")
    return EXIT_OK


def _parse_k(text: str):
    try:
        ks = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--k must be a comma-separated list of integers: {text!r}") from exc
    if not ks or min(ks) < 1:
        raise UsageError("--k needs positive integers")
    return ks


def sweep_rows(ks, grid):
    """Rows ``(k, x, lambda, mu)`` in lexicographic order."""
    axis = np.linspace(0.0, 1.0, grid)
    x, lam = np.meshgrid(axis, axis, indexing="ij")
    for k in ks:
        mu = mu_dephasing_family(k, x, lam)
        for i in range(grid):
            for j in range(grid):
                yield k, axis[i], axis[j], mu[i, j]


def sweep_sdp_check(points=5, tol=1e-4):
    """Closed forms used by the sweep against the SDP on a coarse subgrid."""
    worst = 0.0
    for v in np.linspace(0.0, 1.0, points):
        worst = max(worst,
                    abs(emax_lower_sdp(make_channel("dephasing", v)).value
                        - emax_sigma_sdp(make_channel("dephasing", v)).value),
                    abs(emax_sigma_sdp(make_channel("amplitude_damping", v)).value
                        - closed_form_measures("amplitude_damping", v).e_max))
    return worst <= tol, worst


def cmd_sweep(args, out):
    ks = _parse_k(args.k)
    if args.grid < 2:
        raise UsageError("--grid needs at least 2 points")
    lines = ["k,x,lambda,mu"] + [f"{k},{_g9(x)},{_g9(lam)},{_g9(mu + 0.0)}"
                                  for k, x, lam, mu in sweep_rows(ks, args.grid)]
    text = "\n".join(lines) + "\n"
    if args.output in (None, "-"):
        out.write(text)
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc}") from exc
    if args.sdp_check:
        ok, worst = sweep_sdp_check()
        print(f"sdp-check: {'PASS' if ok else 'FAIL'} max deviation {worst:.2e}", file=sys.stderr)
        if not ok:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args, out):
    failed = []
    for i in range(len(checks.CHECKS)):
        r = checks.run_check(i)
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail} ({r.seconds:.1f} s)",
              file=out, flush=True)
        if not r.passed:
            failed.append(r.name)
    print(f"{len(checks.CHECKS) - len(failed)}/{len(checks.CHECKS)} checks passed", file=out)
    if failed:
        print("failed: " + "; ".join(failed), file=out)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _unit_float(text):
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnetbounds",
                                     description="Entanglement bounds for qubit channels and quantum networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel", help="entanglement measures of one channel")
    p.add_argument("--kind", required=True, choices=NAMED_KINDS)
    p.add_argument("--param", required=True, type=_unit_float)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("emax", help="E_max of one channel")
    p.add_argument("--kind", required=True, choices=NAMED_KINDS)
    p.add_argument("--param", required=True, type=_unit_float)
    p.add_argument("--method", choices=("sdp", "reduced", "closed"), default="sdp")
    p.add_argument("--program", choices=("sigma", "lower", "upper"), default=None,
                   help="SDP program, or reduced-search variant (default: sigma / channel's own)")
    p.set_defaults(func=cmd_emax)

    p = sub.add_parser("network", help="cut bounds for a network file")
    p.add_argument("--file", required=True)
    p.add_argument("--epsilon", type=float, default=None, help="override the file's epsilon")
    p.add_argument("--min-cut", action="store_true", help="report only the minimum versatile cut")
    how = p.add_mutually_exclusive_group()
    how.add_argument("--exhaustive", action="store_true")
    how.add_argument("--maxflow", action="store_true")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("sweep", help="mu tilde over (x, lambda) for k dephasing + 1 amplitude damping")
    p.add_argument("--k", default="1,2,3")
    p.add_argument("--grid", type=int, default=101, help="points per axis, endpoints included")
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    p.add_argument("--sdp-check", action="store_true", help="re-verify the closed forms on a 5x5 subgrid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the reproduction checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, out)
    except MissingMeasure as exc:
        print(f"error: missing measure: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (UsageError, NetworkError, ChannelError, UnsupportedKind, UnsupportedDims,
            TooLarge, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
