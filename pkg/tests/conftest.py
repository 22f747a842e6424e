import json
import random

import numpy as np
import pytest

from eqflow.core import instance_to_json, make_instance

BIG = 10


def instance_a():
    """Single arc, capacity 5, demand 3."""
    return make_instance(2, [(0, 1, 5)], [(0, 1, 3)], node_names=["s", "t"])


def instance_b():
    """Single arc, capacity 2, demand 3."""
    return make_instance(2, [(0, 1, 2)], [(0, 1, 3)], node_names=["s", "t"])


def diamond():
    """Two parallel arcs s->t with capacity 2 each, demand 3."""
    return make_instance(2, [(0, 1, 2), (0, 1, 2)], [(0, 1, 3)], node_names=["s", "t"])


def bottleneck(shared_cap):
    """Commodity 0: s1->t, 2 units, via bypass (cap 1) or the shared arc.
    Commodity 1: s2->t, 2 units, shared arc only.

    Arc ids: 0 s1->v, 1 s2->v, 2 v->t (shared), 3 s1->t (bypass).
    """
    return make_instance(
        4,
        [(0, 2, BIG), (1, 2, BIG), (2, 3, shared_cap), (0, 3, 1)],
        [(0, 3, 2), (1, 3, 2)],
        node_names=["s1", "s2", "v", "t"],
    )


def mincost_pair():
    """Parallel arcs with costs (1, 2), capacities (1, 2), demand 2."""
    return make_instance(2, [(0, 1, 1, 1), (0, 1, 2, 2)], [(0, 1, 2)], node_names=["s", "t"])


def simple_paths(inst, s, t):
    """All simple s-t paths as arc-id tuples, by exhaustive DFS."""
    out = []

    def dfs(v, seen, arcs):
        if v == t:
            out.append(tuple(arcs))
            return
        for a, arc in enumerate(inst.arcs):
            if arc.tail == v and arc.head not in seen:
                dfs(arc.head, seen | {arc.head}, arcs + [a])

    dfs(s, {s}, [])
    return out


def random_pseudo_flow(inst, rng: random.Random):
    """Random convex mix of simple paths per commodity."""
    flow = inst.zero_flow()
    for k, com in enumerate(inst.commodities):
        paths = simple_paths(inst, com.source, com.sink)
        w = np.array([rng.random() ** 3 for _ in paths])
        if rng.random() < 0.3:
            w = np.zeros(len(paths))
            w[rng.randrange(len(paths))] = 1.0
        w /= w.sum()
        for p, x in zip(paths, w):
            flow[k, list(p)] += x * float(com.demand)
    return flow


@pytest.fixture
def write_json(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        if hasattr(obj, "arcs"):
            obj = instance_to_json(obj)
        path.write_text(json.dumps(obj))
        return str(path)

    return write


# acceptance criteria register their outcome here; printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
