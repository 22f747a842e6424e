"""Instance and flow data model shared by the solver, analysis and oracle.

Nodes, arcs and commodities are dense 0-based integers internally.  External
names survive in ``node_names`` and in the ``name`` field of each record.

Flows are plain numpy arrays:

* a pseudo-flow has shape ``(n_commodities, n_arcs)``
* an aggregate flow has shape ``(n_arcs,)``
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np


class InstanceError(ValueError):
    """Rejected instance data.  ``entity`` names the offending record."""

    def __init__(self, message: str, entity: str | None = None):
        super().__init__(message)
        self.entity = entity


class SelfLoop(InstanceError):
    pass


class SourceEqualsSink(InstanceError):
    pass


class NonpositiveDemand(InstanceError):
    pass


class NegativeCapacity(InstanceError):
    pass


class NegativeCost(InstanceError):
    pass


class UnreachableSink(InstanceError):
    pass


class DecompositionResidual(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: Fraction
    cost: Fraction = Fraction(0)
    name: str = ""


@dataclass(frozen=True)
class Commodity:
    source: int
    sink: int
    demand: Fraction
    name: str = ""


@dataclass(frozen=True)
class Instance:
    """A validated multi-commodity flow instance.  Immutable.

    Build through :func:`make_instance` or :func:`validate_instance`; the
    constructor itself does not validate.
    """

    node_names: tuple[str, ...]
    arcs: tuple[Arc, ...]
    commodities: tuple[Commodity, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.node_names)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def n_commodities(self) -> int:
        return len(self.commodities)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([a.tail for a in self.arcs], dtype=np.intp)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([a.head for a in self.arcs], dtype=np.intp)

    @cached_property
    def capacity(self) -> np.ndarray:
        return np.array([float(a.capacity) for a in self.arcs], dtype=float)

    @cached_property
    def cost(self) -> np.ndarray:
        return np.array([float(a.cost) for a in self.arcs], dtype=float)

    @cached_property
    def demand(self) -> np.ndarray:
        return np.array([float(c.demand) for c in self.commodities], dtype=float)

    @cached_property
    def out_arcs(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node, ``(arc_id, head)`` pairs in ascending arc_id order."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nodes)]
        for i, a in enumerate(self.arcs):
            out[a.tail].append((i, a.head))
        return tuple(tuple(x) for x in out)

    @cached_property
    def divergence(self) -> np.ndarray:
        """Required net outflow, shape ``(n_commodities, n_nodes)``."""
        b = np.zeros((self.n_commodities, self.n_nodes))
        for k, c in enumerate(self.commodities):
            b[k, c.source] = float(c.demand)
            b[k, c.sink] = -float(c.demand)
        return b

    def arc_label(self, a: int) -> str:
        return self.arcs[a].name or str(a)

    def commodity_label(self, k: int) -> str:
        return self.commodities[k].name or str(k)

    def zero_flow(self) -> np.ndarray:
        return np.zeros((self.n_commodities, self.n_arcs))


def _as_fraction(value, what: str) -> Fraction:
    if isinstance(value, bool):
        raise InstanceError(f"{what}: expected a number, got {value!r}", what)
    try:
        q = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError, OverflowError):
        raise InstanceError(f"{what}: not a finite rational: {value!r}", what) from None
    return q


def _reachable(n_nodes: int, arcs: Sequence[Arc], source: int) -> set[int]:
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for a in arcs:
        adj[a.tail].append(a.head)
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def make_instance(n_nodes, arcs, commodities, node_names=None) -> Instance:
    """Build and validate an instance from plain tuples.

    ``arcs`` holds ``(tail, head, capacity[, cost])`` and ``commodities``
    holds ``(source, sink, demand)``, all nodes given as integer indices.
    """
    if node_names is None:
        node_names = [str(i) for i in range(n_nodes)]
    node_names = tuple(str(n) for n in node_names)
    if len(node_names) != n_nodes:
        raise InstanceError("node_names length does not match n_nodes")

    def node(v, what):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < n_nodes:
            raise InstanceError(f"{what}: unknown node {v!r}", what)
        return int(v)

    arc_recs = []
    for i, rec in enumerate(arcs):
        name = str(rec[4]) if len(rec) > 4 else str(i)
        what = f"arc {name}"
        tail, head = node(rec[0], what), node(rec[1], what)
        cap = _as_fraction(rec[2], f"{what} capacity")
        cost = _as_fraction(rec[3], f"{what} cost") if len(rec) > 3 else Fraction(0)
        if tail == head:
            raise SelfLoop(f"{what} is a self-loop at node {node_names[tail]}", what)
        if cap < 0:
            raise NegativeCapacity(f"{what} has negative capacity {cap}", what)
        if cost < 0:
            raise NegativeCost(f"{what} has negative cost {cost}", what)
        arc_recs.append(Arc(tail, head, cap, cost, name))

    com_recs = []
    for k, rec in enumerate(commodities):
        name = str(rec[3]) if len(rec) > 3 else str(k)
        what = f"commodity {name}"
        s, t = node(rec[0], what), node(rec[1], what)
        d = _as_fraction(rec[2], f"{what} demand")
        if s == t:
            raise SourceEqualsSink(f"{what} has source == sink ({node_names[s]})", what)
        if d <= 0:
            raise NonpositiveDemand(f"{what} has nonpositive demand {d}", what)
        com_recs.append(Commodity(s, t, d, name))

    reach: dict[int, set[int]] = {}
    for c in com_recs:
        if c.source not in reach:
            reach[c.source] = _reachable(n_nodes, arc_recs, c.source)
        if c.sink not in reach[c.source]:
            raise UnreachableSink(
                f"commodity {c.name}: sink {node_names[c.sink]} unreachable "
                f"from source {node_names[c.source]}",
                f"commodity {c.name}",
            )
    return Instance(node_names, tuple(arc_recs), tuple(com_recs))


_TOP_KEYS = {"format", "nodes", "arcs", "commodities"}
_ARC_KEYS = {"id", "tail", "head", "capacity", "cost"}
_COM_KEYS = {"id", "source", "sink", "demand"}
FORMAT_TAG = "eqflow-v1"


def _check_keys(obj, allowed, required, what):
    if not isinstance(obj, dict):
        raise InstanceError(f"{what}: expected an object", what)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise InstanceError(f"{what}: unknown key(s) {', '.join(unknown)}", what)
    missing = sorted(required - set(obj))
    if missing:
        raise InstanceError(f"{what}: missing key(s) {', '.join(missing)}", what)


def validate_instance(raw: dict) -> Instance:
    """Validate parsed instance JSON (see README for the schema)."""
    _check_keys(raw, _TOP_KEYS, {"nodes", "arcs", "commodities"}, "instance")
    if "format" in raw and raw["format"] != FORMAT_TAG:
        raise InstanceError(f"instance: unsupported format {raw['format']!r}", "format")
    nodes = raw["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise InstanceError("nodes: expected an array of strings", "nodes")
    index = {}
    for i, n in enumerate(nodes):
        if n in index:
            raise InstanceError(f"nodes: duplicate node {n!r}", "nodes")
        index[n] = i

    def lookup(name, what):
        if not isinstance(name, str) or name not in index:
            raise InstanceError(f"{what}: unknown node {name!r}", what)
        return index[name]

    def ident(rec, what):
        v = rec["id"]
        if isinstance(v, bool) or not isinstance(v, (str, int)):
            raise InstanceError(f"{what}: id must be a string or integer", what)
        return str(v)

    if not isinstance(raw["arcs"], list):
        raise InstanceError("arcs: expected an array", "arcs")
    arcs, seen = [], set()
    for pos, rec in enumerate(raw["arcs"]):
        what = f"arcs[{pos}]"
        _check_keys(rec, _ARC_KEYS, _ARC_KEYS - {"cost"}, what)
        name = ident(rec, what)
        if name in seen:
            raise InstanceError(f"{what}: duplicate arc id {name!r}", what)
        seen.add(name)
        arcs.append((lookup(rec["tail"], f"arc {name} tail"), lookup(rec["head"], f"arc {name} head"),
                     rec["capacity"], rec.get("cost", 0), name))

    if not isinstance(raw["commodities"], list):
        raise InstanceError("commodities: expected an array", "commodities")
    coms, seen = [], set()
    for pos, rec in enumerate(raw["commodities"]):
        what = f"commodities[{pos}]"
        _check_keys(rec, _COM_KEYS, _COM_KEYS, what)
        name = ident(rec, what)
        if name in seen:
            raise InstanceError(f"{what}: duplicate commodity id {name!r}", what)
        seen.add(name)
        coms.append((lookup(rec["source"], f"commodity {name} source"),
                     lookup(rec["sink"], f"commodity {name} sink"), rec["demand"], name))
    return make_instance(len(nodes), arcs, coms, node_names=nodes)


def instance_to_json(inst: Instance) -> dict:
    def num(q: Fraction):
        return int(q) if q.denominator == 1 else str(q)

    return {
        "format": FORMAT_TAG,
        "nodes": list(inst.node_names),
        "arcs": [
            {"id": a.name, "tail": inst.node_names[a.tail], "head": inst.node_names[a.head],
             "capacity": num(a.capacity), "cost": num(a.cost)}
            for a in inst.arcs
        ],
        "commodities": [
            {"id": c.name, "source": inst.node_names[c.source], "sink": inst.node_names[c.sink],
             "demand": num(c.demand)}
            for c in inst.commodities
        ],
    }


def aggregate(flow: np.ndarray) -> np.ndarray:
    """Total flow per arc, summed in ascending commodity order."""
    flow = np.asarray(flow, dtype=float)
    total = np.zeros(flow.shape[1])
    for row in flow:
        total += row
    return total


def node_balance(inst: Instance, flow: np.ndarray) -> np.ndarray:
    """Net outflow per commodity and node, shape ``(n_commodities, n_nodes)``."""
    flow = np.asarray(flow, dtype=float)
    bal = np.zeros((flow.shape[0], inst.n_nodes))
    for k in range(flow.shape[0]):
        np.add.at(bal[k], inst.tails, flow[k])
        np.subtract.at(bal[k], inst.heads, flow[k])
    return bal


@dataclass
class ConservationReport:
    max_violation: float
    commodity: int | None
    node: int | None
    per_commodity: np.ndarray
    negative: float = 0.0
    ok: bool = field(default=True)


def check_conservation(inst: Instance, flow: np.ndarray, tol: float = 1e-9) -> ConservationReport:
    """Worst ``|net outflow - required divergence|`` per commodity.

    Negative arc flows are reported through ``negative`` (the most negative
    entry, as a positive magnitude) and also make ``ok`` false.
    """
    flow = np.asarray(flow, dtype=float)
    if flow.shape != (inst.n_commodities, inst.n_arcs):
        raise ValueError(f"flow has shape {flow.shape}, expected {(inst.n_commodities, inst.n_arcs)}")
    viol = np.abs(node_balance(inst, flow) - inst.divergence)
    per_k = viol.max(axis=1) if inst.n_nodes else np.zeros(inst.n_commodities)
    negative = float(max(0.0, -flow.min())) if flow.size else 0.0
    if viol.size == 0:
        return ConservationReport(0.0, None, None, per_k, negative, negative <= tol)
    k, v = np.unravel_index(int(np.argmax(viol)), viol.shape)
    worst = float(viol[k, v])
    return ConservationReport(worst, int(k), int(v), per_k, negative, worst <= tol and negative <= tol)


@dataclass
class PathDecomposition:
    """Per commodity: ``paths[k]`` and ``cycles[k]`` as ``(arc_ids, flow)`` lists."""

    paths: list[list[tuple[tuple[int, ...], float]]]
    cycles: list[list[tuple[tuple[int, ...], float]]]

    def recompose(self, n_arcs: int) -> np.ndarray:
        out = np.zeros((len(self.paths), n_arcs))
        for k in range(len(self.paths)):
            for arcs, x in self.paths[k] + self.cycles[k]:
                out[k, list(arcs)] += x
        return out


def _walk(inst: Instance, resid: np.ndarray, start: int, stop: int | None, tol: float):
    """Follow positive residual arcs from ``start``.

    Returns ``("path", arcs)`` on reaching ``stop`` or ``("cycle", arcs)`` on
    revisiting a node.  Returns ``None`` when stuck.
    """
    pos = {start: 0}
    arcs: list[int] = []
    v = start
    while True:
        if v == stop:
            return "path", arcs
        nxt = None
        for a, w in inst.out_arcs[v]:
            if resid[a] > tol:
                nxt = (a, w)
                break
        if nxt is None:
            return None
        a, w = nxt
        arcs.append(a)
        if w in pos:
            return "cycle", arcs[pos[w]:]
        pos[w] = len(arcs)
        v = w


def decompose_paths(inst: Instance, flow: np.ndarray, tol: float = 1e-9) -> PathDecomposition:
    """Split each commodity's arc flow into simple s-t paths plus cycles."""
    flow = np.asarray(flow, dtype=float)
    paths: list[list] = []
    cycles: list[list] = []
    for k, com in enumerate(inst.commodities):
        resid = flow[k].copy()
        resid[resid <= tol] = 0.0
        kp, kc = [], []

        def extract(arcs):
            x = float(resid[arcs].min())
            resid[arcs] -= x
            resid[arcs[int(np.argmin(resid[arcs]))]] = 0.0
            resid[resid <= tol] = 0.0
            return x

        while True:
            found = _walk(inst, resid, com.source, com.sink, tol)
            if found is None:
                break
            kind, arcs = found
            if kind == "path" and not arcs:
                break
            x = extract(arcs)
            (kp if kind == "path" else kc).append((tuple(arcs), x))

        # whatever is left must be circulations
        while True:
            pos = np.flatnonzero(resid > tol)
            if pos.size == 0:
                break
            found = _walk(inst, resid, inst.arcs[int(pos[0])].tail, None, tol)
            if found is None or found[0] != "cycle":
                raise DecompositionResidual(
                    f"commodity {inst.commodity_label(k)}: flow {float(resid.sum()):.3g} "
                    "left after path extraction (conservation violated?)")
            kc.append((tuple(found[1]), extract(found[1])))

        shipped = sum(x for _, x in kp)
        if abs(shipped - float(com.demand)) > max(tol, tol * float(com.demand)) * max(1, inst.n_arcs):
            raise DecompositionResidual(
                f"commodity {inst.commodity_label(k)}: paths carry {shipped!r}, demand is {float(com.demand)!r}")
        paths.append(kp)
        cycles.append(kc)
    return PathDecomposition(paths, cycles)
