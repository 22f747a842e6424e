"""Command-line interface.

Exit codes for ``solve``: 0 feasible, 1 infeasible, 2 undecided, 3 input
error.  ``check-flow`` and ``verify-cert`` use 0 for pass, 1 for fail and 3
for input errors.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from .analysis import cut_sides, verify_equilibrium
from .core import FORMAT_TAG, DecompositionResidual, Instance, InstanceError, check_conservation, decompose_paths
from .estimator import make_model
from .io import (InputError, certificate_to_json, certificate_weights_from_json, dump, flow_from_json,
                 flow_to_json, fmt_exact, fmt_float, load_instance, load_json)
from .oracle import TooLarge, gen_instance, oracle_feasible
from .penalty import PenaltyModel, overflow
from .solver import SolveResult, SolverParams, Verdict, fw_solve, trace_line
from .sssp import NegativeWeight, shortest_paths

EXIT_CODES = {Verdict.FEASIBLE: 0, Verdict.INFEASIBLE: 1, Verdict.UNDECIDED: 2}
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    # argparse's own exit status 2 would collide with "undecided"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    return q


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _add_model_flags(p):
    p.add_argument("--penalty", choices=("feasibility", "quadratic", "mincost"), default="feasibility")
    p.add_argument("--big-m", type=_fraction, default=None, help="overflow price, required for --penalty mincost")


def mincost_summary(inst: Instance, model: PenaltyModel, res: SolveResult) -> dict:
    """Total arc cost and the overflow bound implied by the equilibrium.

    On a used path p of commodity k, M * sum of overflows = lam_k - cost(p)
    <= lam_k - (cheapest path cost), so every arc on a used path overflows by
    at most that difference over M.
    """
    agg = res.aggregate
    bound = 0.0
    cache: dict[int, list] = {}
    for k, com in enumerate(inst.commodities):
        if com.source not in cache:
            cache[com.source] = shortest_paths(inst, inst.cost, com.source).dist
        lam = float(res.equilibrium.path_length[k])
        bound = max(bound, (lam - cache[com.source][com.sink]) / model.big_m)
    return {
        "total_cost": fmt_float(float(np.dot(inst.cost, agg))),
        "overflow_bound": fmt_float(bound),
    }


def build_report(inst: Instance, model: PenaltyModel, params: SolverParams, res: SolveResult) -> dict:
    eq = res.equilibrium
    report = {
        "format": FORMAT_TAG,
        "verdict": res.verdict.value,
        "stop_rule": res.stop_rule,
        "iterations": res.iterations,
        "objective": fmt_float(res.objective),
        "lower_bound": fmt_float(res.lower_bound),
        "max_overflow": fmt_float(res.max_overflow),
        "flows": flow_to_json(inst, res.flow),
        "aggregate": {inst.arc_label(a): fmt_float(x) for a, x in enumerate(res.aggregate)},
        "equilibrium": {
            "classification": eq.classification,
            "max_used_reduced_cost": fmt_float(eq.worst),
            "path_length": {inst.commodity_label(k): fmt_float(x) for k, x in enumerate(eq.path_length)},
        },
        "certificate": certificate_to_json(inst, res.certificate) if res.certificate is not None else None,
        "params": {
            "penalty": model.kind,
            "big_m": fmt_float(model.big_m) if model.big_m is not None else None,
            "max_iters": params.max_iters,
            "rel_gap": fmt_float(params.rel_gap),
            "feas_tol": fmt_float(params.feas_tol),
            "infeas_margin": fmt_float(params.infeas_margin),
            "line_search_tol": fmt_float(params.line_search_tol),
        },
    }
    if model.kind == "mincost":
        report["mincost"] = mincost_summary(inst, model, res)
    return report


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    model = make_model(args.penalty, args.big_m)
    params = SolverParams(max_iters=args.max_iters, rel_gap=args.rel_gap, feas_tol=args.feas_tol)
    start = time.perf_counter()
    res = fw_solve(inst, model, params)
    elapsed = time.perf_counter() - start
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in res.trace:
                fh.write(trace_line(rec) + "\n")
    report = build_report(inst, model, params, res)
    if args.report:
        dump(report, args.report)
        print(f"{res.verdict.value} after {res.iterations} iterations (rule {res.stop_rule})")
    else:
        sys.stdout.write(dump(report))
    print(f"wall time {elapsed:.3f}s", file=sys.stderr)
    return EXIT_CODES[res.verdict]


def cmd_check_flow(args) -> int:
    inst = load_instance(args.instance)
    model = make_model(args.penalty, args.big_m)
    flow = flow_from_json(inst, load_json(args.flow))
    tol = args.tol
    ok = True

    cons = check_conservation(inst, flow, tol)
    if cons.negative > tol:
        ok = False
        print(f"negative flow: most negative entry is -{fmt_float(cons.negative)}")
    if cons.max_violation > tol:
        ok = False
        print(f"conservation violated: {fmt_float(cons.max_violation)} at commodity "
              f"{inst.commodity_label(cons.commodity)}, node {inst.node_names[cons.node]}")
    else:
        print(f"conservation: ok (max violation {fmt_float(cons.max_violation)})")

    agg = flow.sum(axis=0)
    over = overflow(agg, inst.capacity)
    for a in np.flatnonzero(over > tol):
        ok = False
        print(f"capacity exceeded on arc {inst.arc_label(int(a))} by {fmt_float(over[a])}")
    if not (over > tol).any():
        print("capacity: ok")

    if cons.max_violation <= 1e-9 and cons.negative <= tol:
        eq = verify_equilibrium(inst, model, flow, tol)
        if eq.is_equilibrium:
            print(f"equilibrium: yes ({eq.classification}); max used-arc reduced cost {fmt_float(eq.worst)}")
        else:
            print(f"not an equilibrium: max used-arc reduced cost {fmt_float(eq.worst)}")
        for k in range(inst.n_commodities):
            print(f"  commodity {inst.commodity_label(k)}: shortest path length {fmt_float(eq.path_length[k])}")
        try:
            dec = decompose_paths(inst, flow)
        except DecompositionResidual as exc:
            print(f"  path decomposition failed: {exc}")
        else:
            for k, paths in enumerate(dec.paths):
                for arcs, x in paths:
                    length = float(sum(eq.weights[a] for a in arcs))
                    names = " ".join(inst.arc_label(a) for a in arcs)
                    print(f"  commodity {inst.commodity_label(k)} path [{names}] flow {fmt_float(x)} "
                          f"length {fmt_float(length)}")
    else:
        print("equilibrium: not checked (flow is not a pseudo-flow)")
    return 0 if ok else 1


def cmd_verify_cert(args) -> int:
    inst = load_instance(args.instance)
    mu = certificate_weights_from_json(inst, load_json(args.certificate))
    lhs, rhs = cut_sides(inst, mu)
    if lhs > rhs:
        print(f"valid: {fmt_exact(lhs)} > {fmt_exact(rhs)}; the instance is infeasible")
        return 0
    print(f"not a certificate: {fmt_exact(lhs)} ≤ {fmt_exact(rhs)}")
    return 1


def cmd_oracle(args) -> int:
    if args.seed is not None:
        from .core import instance_to_json
        inst = gen_instance(args.seed)
        if args.dump:
            sys.stdout.write(dump(instance_to_json(inst)))
            return 0
    elif args.instance:
        inst = load_instance(args.instance)
    else:
        raise InputError("oracle: give an instance path or --seed")
    verdict = oracle_feasible(inst)
    print("feasible" if verdict.feasible else "infeasible")
    if verdict.witness is not None:
        for k, row in enumerate(verdict.witness):
            print(f"  commodity {inst.commodity_label(k)}: "
                  + " ".join(f"{inst.arc_label(a)}={fmt_exact(x)}" for a, x in enumerate(row) if x))
    return 0 if verdict.feasible else 1


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eqflow", description="Multi-commodity flow feasibility by Frank-Wolfe.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("solve", help="decide feasibility of an instance")
    p.add_argument("instance")
    _add_model_flags(p)
    p.add_argument("--max-iters", type=int, default=SolverParams.max_iters)
    p.add_argument("--rel-gap", type=_positive_float, default=SolverParams.rel_gap)
    p.add_argument("--feas-tol", type=_positive_float, default=SolverParams.feas_tol)
    p.add_argument("--trace", help="write one JSON line per iteration here")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-flow", help="check a flow for conservation, capacity and equilibrium")
    p.add_argument("instance")
    p.add_argument("flow")
    p.add_argument("--tol", type=float, default=1e-9)
    _add_model_flags(p)
    p.set_defaults(func=cmd_check_flow)

    p = sub.add_parser("verify-cert", help="exactly verify an infeasibility certificate")
    p.add_argument("instance")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify_cert)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    p.add_argument("instance", nargs="?")
    p.add_argument("--seed", type=int)
    p.add_argument("--dump", action="store_true", help="print the generated instance instead")
    p.set_defaults(func=cmd_oracle)
    # keep the debugging command out of the listing
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, InstanceError, NegativeWeight, TooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
