import math
import random
from fractions import Fraction

import numpy as np
import pytest

from eqflow.core import aggregate, check_conservation, make_instance
from eqflow.oracle import gen_instance
from eqflow.sssp import NegativeWeight, Unreachable, all_or_nothing, extract_path, shortest_paths

from conftest import diamond, instance_a, random_pseudo_flow, simple_paths


def path_graph():
    # arcs: 0 s->m (2), 1 m->t (3), 2 s->t (6)
    return make_instance(3, [(0, 1, 9), (1, 2, 9), (0, 2, 9)], [(0, 2, 1)])


def brute_dist(inst, w, s, t):
    lengths = [sum(w[a] for a in p) for p in simple_paths(inst, s, t)]
    return min(lengths) if lengths else math.inf


def test_zero_weights_follow_smallest_arc():
    inst = make_instance(3, [(0, 2, 1), (0, 1, 1), (1, 2, 1), (0, 2, 1)], [(0, 2, 1)])
    d = shortest_paths(inst, [0.0] * 4, 0)
    assert d.dist == [0.0, 0.0, 0.0]
    assert d.parent == [-1, 1, 0]


def test_parallel_arcs_pick_the_cheaper():
    d = shortest_paths(diamond(), [1.0, 0.0], 0)
    assert d.dist[1] == 0.0 and extract_path(diamond(), d, 1) == [1]


def test_path_graph():
    inst = path_graph()
    w = [2.0, 3.0, 6.0]
    d = shortest_paths(inst, w, 0)
    assert d.dist[2] == 5.0 == brute_dist(inst, w, 0, 2)
    assert extract_path(inst, d, 2) == [0, 1]


def test_equal_length_parent_is_smallest_arc_id():
    inst = path_graph()
    d = shortest_paths(inst, [2.0, 3.0, 5.0], 0)
    assert d.dist[2] == 5.0 and extract_path(inst, d, 2) == [0, 1]
    d = shortest_paths(inst, [3.0, 3.0, 5.0], 0)
    assert extract_path(inst, d, 2) == [2]


def test_extract_path_to_source_and_unreachable():
    inst = path_graph()
    d = shortest_paths(inst, [1.0, 1.0, 1.0], 1)
    assert extract_path(inst, d, 1) == []
    with pytest.raises(Unreachable):
        extract_path(inst, d, 0)


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        shortest_paths(diamond(), [1.0, -1.0], 0)
    with pytest.raises(NegativeWeight):
        shortest_paths(diamond(), [1.0, float("nan")], 0)


def test_exact_weights_stay_exact():
    d = shortest_paths(path_graph(), [Fraction(1, 3), Fraction(1, 3), Fraction(1, 2)], 0)
    assert d.dist[2] == Fraction(1, 2) and isinstance(d.dist[2], Fraction)


def test_distances_match_enumeration_and_bellman():
    rng = random.Random(1)
    for seed in range(120):
        inst = gen_instance(seed)
        w = [rng.choice([0.0, 0.5, 1.0, rng.random() * 3]) for _ in range(inst.n_arcs)]
        for s in range(inst.n_nodes):
            d = shortest_paths(inst, w, s)
            for t in range(inst.n_nodes):
                if t == s:
                    continue
                assert d.dist[t] == pytest.approx(brute_dist(inst, w, s, t), abs=1e-12)
                if d.dist[t] < math.inf:
                    p = extract_path(inst, d, t)
                    assert abs(sum(w[a] for a in p) - d.dist[t]) <= 1e-12
            for a, arc in enumerate(inst.arcs):
                if d.dist[arc.tail] < math.inf:
                    assert d.dist[arc.head] <= d.dist[arc.tail] + w[a] + 1e-12
            for v, a in enumerate(d.parent):
                if a >= 0:
                    assert d.dist[v] == d.dist[inst.arcs[a].tail] + w[a]


def test_aon_fixtures():
    flow, lengths = all_or_nothing(instance_a(), [0.0])
    assert flow.tolist() == [[3.0]] and lengths.tolist() == [0.0]
    flow, _ = all_or_nothing(diamond(), [1.0, 0.0])
    assert flow.tolist() == [[0.0, 3.0]]


def test_aon_shared_source_diverging_sinks():
    # arcs: 0 s->a, 1 s->b, 2 a->b, 3 b->a
    inst = make_instance(3, [(0, 1, 5), (0, 2, 5), (1, 2, 5), (2, 1, 5)], [(0, 1, 2), (0, 2, 3)])
    w = [1.0, 4.0, 1.0, 0.5]
    flow, lengths = all_or_nothing(inst, w)
    expected = [brute_dist(inst, w, 0, 1), brute_dist(inst, w, 0, 2)]
    assert lengths.tolist() == expected == [1.0, 2.0]
    assert flow.tolist() == [[2.0, 0.0, 0.0, 0.0], [3.0, 0.0, 3.0, 0.0]]
    assert float(np.dot(w, aggregate(flow))) == pytest.approx(2 * 1.0 + 3 * 2.0)


def test_aon_optimal_against_random_pseudo_flows():
    rng = random.Random(2)
    cases = 0
    for seed in range(120):
        inst = gen_instance(seed)
        w = np.array([rng.choice([0.0, rng.random(), 2 * rng.random()]) for _ in range(inst.n_arcs)])
        y, lengths = all_or_nothing(inst, w)
        assert check_conservation(inst, y).max_violation == 0.0
        aon = float(np.dot(w, aggregate(y)))
        assert aon == pytest.approx(float(np.dot(lengths, inst.demand)), abs=1e-12)
        for _ in range(3):
            x = random_pseudo_flow(inst, rng)
            assert aon <= float(np.dot(w, aggregate(x))) + 1e-9
            cases += 1
    assert cases >= 100


def test_aon_deterministic():
    for seed in range(30):
        inst = gen_instance(seed)
        w = np.linspace(0, 1, inst.n_arcs) ** 2
        a, b = all_or_nothing(inst, w), all_or_nothing(inst, w.copy())
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
