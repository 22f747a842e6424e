"""Exact feasibility oracle and tiny random instances for cross-checking.

The oracle is a Phase-I simplex over :class:`fractions.Fraction` with
Bland's rule, so it always terminates and never rounds.  It shares nothing
with the solver beyond the instance type.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, make_instance

MAX_VARIABLES = 24


class TooLarge(ValueError):
    pass


@dataclass
class OracleVerdict:
    feasible: bool
    witness: list[list[Fraction]] | None = None  # [commodity][arc]


def _phase_one(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Minimize the sum of artificials for ``rows @ x = rhs, x >= 0``.

    Returns the values of the structural variables, or None if the system
    has no nonnegative solution.
    """
    m, n = len(rows), len(rows[0]) if rows else 0
    # tableau columns: structural 0..n-1, artificial n..n+m-1, rhs last
    tab = []
    for i in range(m):
        sign = -1 if rhs[i] < 0 else 1
        row = [sign * v for v in rows[i]] + [Fraction(0)] * m + [sign * rhs[i]]
        row[n + i] = Fraction(1)
        tab.append(row)
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of the phase-one objective
    obj = [Fraction(0)] * (width + 1)
    for row in tab:
        for j in range(n):
            obj[j] -= row[j]
        obj[width] -= row[width]

    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[width] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # cannot happen: phase one is bounded below by 0
            raise RuntimeError("unbounded phase-one problem")
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        prow = tab[leave]
        for i, row in enumerate(tab):
            if i != leave and row[enter] != 0:
                f = row[enter]
                tab[i] = [a - f * b for a, b in zip(row, prow)]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, prow)]
        basis[leave] = enter

    if obj[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][width]
    return x


def oracle_feasible(inst: Instance) -> OracleVerdict:
    """Decide exactly whether all demands fit within the arc capacities."""
    K, A, V = inst.n_commodities, inst.n_arcs, inst.n_nodes
    if K * A > MAX_VARIABLES:
        raise TooLarge(f"{K} commodities x {A} arcs = {K * A} flow variables; the oracle allows {MAX_VARIABLES}")
    n = K * A + A  # flows, then capacity slacks
    rows, rhs = [], []
    for k, com in enumerate(inst.commodities):
        for v in range(V):
            row = [Fraction(0)] * n
            for a, arc in enumerate(inst.arcs):
                if arc.tail == v:
                    row[k * A + a] += 1
                if arc.head == v:
                    row[k * A + a] -= 1
            rows.append(row)
            rhs.append(com.demand if v == com.source else -com.demand if v == com.sink else Fraction(0))
    for a, arc in enumerate(inst.arcs):
        row = [Fraction(0)] * n
        for k in range(K):
            row[k * A + a] = Fraction(1)
        row[K * A + a] = Fraction(1)
        rows.append(row)
        rhs.append(arc.capacity)
    x = _phase_one(rows, rhs)
    if x is None:
        return OracleVerdict(False)
    return OracleVerdict(True, [x[k * A:(k + 1) * A] for k in range(K)])


def gen_instance(seed: int, max_nodes: int = 5, max_arcs: int = 8, max_commodities: int = 2) -> Instance:
    """Deterministic tiny instance for ``seed``.

    Draws (from ``random.Random(seed)``) a node count in [3, max_nodes] and
    a commodity count in [1, max_commodities].  Each commodity gets a random
    source/sink pair joined by a path through up to two random intermediate
    nodes, which guarantees reachability.  Random extra arcs are added up to
    a target count in [arcs so far, max_arcs].  Capacities are integers in
    [1, 4] and demands integers in [1, 3].
    """
    rng = random.Random(seed)
    n = rng.randint(3, max_nodes)
    n_com = rng.randint(1, max_commodities)
    pairs: list[tuple[int, int]] = []
    commodities = []
    for _ in range(n_com):
        s, t = rng.sample(range(n), 2)
        others = [v for v in range(n) if v not in (s, t)]
        hops = rng.sample(others, rng.randint(0, min(2, len(others))))
        seq = [s, *hops, t]
        for a, b in zip(seq, seq[1:]):
            if (a, b) not in pairs and len(pairs) < max_arcs:
                pairs.append((a, b))
        commodities.append((s, t))
    # a truncated path must still connect; fall back to a direct arc
    for s, t in commodities:
        if not _connected(n, pairs, s, t):
            pairs.append((s, t))
    target = rng.randint(len(pairs), max(len(pairs), max_arcs))
    while len(pairs) < target:
        a, b = rng.sample(range(n), 2)
        pairs.append((a, b))
    arcs = [(a, b, rng.randint(1, 4)) for a, b in pairs]
    coms = [(s, t, rng.randint(1, 3)) for s, t in commodities]
    return make_instance(n, arcs, coms)


def _connected(n, pairs, s, t) -> bool:
    seen, stack = {s}, [s]
    while stack:
        v = stack.pop()
        for a, b in pairs:
            if a == v and b not in seen:
                seen.add(b)
                stack.append(b)
    return t in seen
