"""Frank-Wolfe minimization of the penalty objective.

Each iteration weights the arcs with h of the current aggregate flow, routes
all demand on shortest paths (the linear subproblem), finds the exact step
along the segment towards that direction, and moves.

Termination, first match wins:

T1  zero-inside-capacity penalty and max overflow <= feas_tol  -> feasible
T2  best lower bound > infeas_margin and an exact cut certificate
    is found                                                    -> infeasible
T3  relative gap <= rel_gap                                     -> undecided
T4  max_iters reached                                           -> undecided
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import (CertificateNotFound, CutCertificate, EquilibriumReport, build_certificate,
                       verify_equilibrium)
from .core import Instance, aggregate
from .penalty import PenaltyModel, objective, overflow, penalty_value, weights as penalty_weights
from .sssp import all_or_nothing


class Verdict(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SolverParams:
    max_iters: int = 10000
    rel_gap: float = 1e-8
    feas_tol: float = 1e-6
    infeas_margin: float = 1e-12
    line_search_tol: float = 1e-12
    denominator_limit: int = 2**60

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("rel_gap", "feas_tol", "infeas_margin", "line_search_tol"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.denominator_limit < 1:
            raise ValueError("denominator_limit must be >= 1")


@dataclass
class IterationRecord:
    n: int
    z: float
    alpha: float
    aon_value: float
    lb: float
    max_overflow: float


@dataclass
class SolveResult:
    verdict: Verdict
    flow: np.ndarray
    objective: float
    lower_bound: float
    max_overflow: float
    iterations: int
    stop_rule: str
    trace: list[IterationRecord] = field(default_factory=list)
    certificate: CutCertificate | None = None
    equilibrium: EquilibriumReport | None = None

    @property
    def aggregate(self) -> np.ndarray:
        return aggregate(self.flow)


def initialize(inst: Instance) -> np.ndarray:
    """Hop-minimal all-or-nothing assignment.

    Every pseudo-flow minimizes the all-zero-weight subproblem; unit
    weights pick the fewest-arcs path among them.
    """
    flow, _ = all_or_nothing(inst, [1.0] * inst.n_arcs)
    return flow


def lower_bound(inst: Instance, model: PenaltyModel, flow, aon_value: float) -> float:
    """Convexity bound ``z(f) - h(f).f + min_x h(f).x`` on the optimum of z."""
    agg = aggregate(flow)
    h = penalty_weights(model, inst, agg)
    return objective(model, inst, agg).z - float(np.dot(h, agg)) + aon_value


def _slope(model, f, d, u, c, alpha):
    return float(np.dot(d, penalty_value(model, f + alpha * d, u, c)))


def line_search(inst: Instance, model: PenaltyModel, f, y, tol: float = 1e-12) -> float:
    """Smallest minimizer over [0, 1] of the objective along f + a (y - f).

    ``f`` and ``y`` are aggregate flows.  The derivative along the segment is
    continuous and nondecreasing with kinks where an arc reaches capacity;
    the kinks are searched for the sign change and the root is solved in
    closed form inside that piece.
    """
    f = np.asarray(f, dtype=float)
    d = np.asarray(y, dtype=float) - f
    moving = d != 0
    if not moving.any():
        return 0.0
    f, d = f[moving], d[moving]
    u, c = inst.capacity[moving], inst.cost[moving]

    def slope(a):
        return _slope(model, f, d, u, c, a)

    if slope(0.0) >= 0:
        return 0.0
    if slope(1.0) < 0:
        return 1.0
    kinks = (u - f) / d
    pts = np.unique(np.concatenate(([0.0, 1.0], kinks[(kinks > 0) & (kinks < 1)])))
    lo_i, hi_i = 0, len(pts) - 1  # slope(pts[lo_i]) < 0 <= slope(pts[hi_i])
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if slope(pts[mid]) >= 0:
            hi_i = mid
        else:
            lo_i = mid
    lo, hi = float(pts[lo_i]), float(pts[hi_i])
    active = (f + 0.5 * (lo + hi) * d) > u
    e, da = (f - u)[active], d[active]
    root = None
    if model.kind in ("feasibility", "mincost"):
        scale = model.big_m if model.kind == "mincost" else 1.0
        p = scale * float(np.dot(da, e)) + (float(np.dot(d, c)) if model.kind == "mincost" else 0.0)
        q = scale * float(np.dot(da, da))
        if q > 0:
            root = -p / q
    else:
        # sum d (e + a d)^2 = c0 + c1 a + c2 a^2
        c0 = float(np.dot(da, e * e))
        c1 = 2.0 * float(np.dot(da * da, e))
        c2 = float(np.dot(da * da, da))
        root = _quadratic_root(c0, c1, c2, lo, hi)
    if root is None or not lo - tol <= root <= hi + tol:
        root = _bisect(slope, lo, hi, tol)
    return min(max(root, lo), hi)


def _quadratic_root(c0, c1, c2, lo, hi):
    if c2 == 0:
        return -c0 / c1 if c1 != 0 else None
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    q = -0.5 * (c1 + math.copysign(sq, c1))
    roots = [r for r in ((q / c2) if q != 0 else None, (c0 / q) if q != 0 else None) if r is not None]
    inside = [r for r in roots if lo <= r <= hi]
    return min(inside) if inside else None


def _bisect(slope, lo, hi, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if slope(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _max_overflow(inst, agg) -> float:
    return float(overflow(agg, inst.capacity).max()) if inst.n_arcs else 0.0


def fw_solve(inst: Instance, model: PenaltyModel | None = None, params: SolverParams | None = None,
             *, equilibrium: bool = True, callback=None) -> SolveResult:
    """Run Frank-Wolfe from the zero-weight all-or-nothing flow.

    ``callback(n, flow)`` is called after every move with the new iterate.
    """
    model = model or PenaltyModel()
    params = params or SolverParams()
    demand = inst.demand

    flow = initialize(inst)
    agg = aggregate(flow)
    z = objective(model, inst, agg).z
    ovf = _max_overflow(inst, agg)
    trace: list[IterationRecord] = []
    best_lb, best_flow = -math.inf, None
    cert_tried = False
    cert = None
    verdict, stop, n = None, "", 0

    if model.zero_inside_capacity and ovf <= params.feas_tol:
        verdict, stop = Verdict.FEASIBLE, "T1"

    while verdict is None:
        n += 1
        h = penalty_weights(model, inst, agg)
        y, lengths = all_or_nothing(inst, h)
        aon = 0.0
        for k in range(inst.n_commodities):
            aon += float(lengths[k]) * float(demand[k])
        lb = z - float(np.dot(h, agg)) + aon
        y_agg = aggregate(y)
        alpha = line_search(inst, model, agg, y_agg, params.line_search_tol)
        trace.append(IterationRecord(n, z, alpha, aon, lb, ovf))
        if lb > best_lb:
            best_lb, best_flow, cert_tried = lb, flow, False

        if model.zero_inside_capacity and best_lb > params.infeas_margin and not cert_tried:
            cert_tried = True
            try:
                cert = build_certificate(inst, model, best_flow, params.denominator_limit)
            except CertificateNotFound:
                cert = None
            if cert is not None:
                verdict, stop = Verdict.INFEASIBLE, "T2"
                break
        if (z - max(best_lb, 0.0)) / max(z, 1e-300) <= params.rel_gap:
            verdict, stop = Verdict.UNDECIDED, "T3"
            break

        flow = flow + alpha * (y - flow)
        agg = aggregate(flow)
        z = objective(model, inst, agg).z
        ovf = _max_overflow(inst, agg)
        if callback is not None:
            callback(n, flow)
        if model.zero_inside_capacity and ovf <= params.feas_tol:
            verdict, stop = Verdict.FEASIBLE, "T1"
            break
        if n >= params.max_iters:
            verdict, stop = Verdict.UNDECIDED, "T4"
            break

    return SolveResult(
        verdict=verdict, flow=flow, objective=z, lower_bound=best_lb, max_overflow=ovf,
        iterations=n, stop_rule=stop, trace=trace, certificate=cert,
        equilibrium=verify_equilibrium(inst, model, flow) if equilibrium else None,
    )


def trace_line(rec: IterationRecord) -> str:
    """One JSON line, numbers with 17 significant digits."""
    d = asdict(rec)
    fields = [f'"n": {d.pop("n")}'] + [f'"{k}": {_num(v)}' for k, v in d.items()]
    return "{" + ", ".join(fields) + "}"


def _num(x: float) -> str:
    if math.isfinite(x):
        return format(x, ".17g")
    return '"' + ("inf" if x > 0 else "-inf" if x < 0 else "nan") + '"'
