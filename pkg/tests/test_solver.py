import math
import random

import numpy as np
import pytest

from eqflow.analysis import verify_certificate
from eqflow.core import aggregate, check_conservation, make_instance
from eqflow.oracle import gen_instance
from eqflow.penalty import PenaltyModel, objective
from eqflow.solver import (IterationRecord, SolverParams, Verdict, fw_solve, initialize, line_search, lower_bound,
                           trace_line)
from eqflow.sssp import all_or_nothing

from conftest import bottleneck, diamond, instance_a, instance_b, random_pseudo_flow

FEAS = PenaltyModel.feasibility()
QUAD = PenaltyModel.generalized("quadratic")


def test_initialize():
    assert initialize(instance_a()).tolist() == [[3.0]]
    assert initialize(diamond()).tolist() == [[3.0, 0.0]]
    # hop-minimal: commodity 0 takes the 1-hop bypass (arc 3), commodity 1 the only route
    assert initialize(bottleneck(3)).tolist() == [[0, 0, 0, 2], [0, 2, 2, 0]]


@pytest.mark.parametrize("inst, flow, aon, expected", [
    (instance_b(), [[3.0]], 3.0, 0.5),
    (instance_a(), [[3.0]], 0.0, 0.0),
    (diamond(), [[3.0, 0.0]], 0.0, -2.5),
])
def test_lower_bound_hand_values(inst, flow, aon, expected):
    assert lower_bound(inst, FEAS, np.array(flow), aon) == expected


def test_lower_bound_aon_value_from_subproblem():
    inst = instance_b()
    _, lengths = all_or_nothing(inst, [1.0])
    assert float(lengths @ inst.demand) == 3.0


def test_line_search_diamond():
    inst = diamond()
    a = line_search(inst, FEAS, np.array([3.0, 0.0]), np.array([0.0, 3.0]))
    assert abs(a - 1 / 3) <= 1e-12


def test_line_search_degenerate():
    inst = diamond()
    assert line_search(inst, FEAS, np.array([3.0, 0.0]), np.array([3.0, 0.0])) == 0.0
    # already optimal: any move only adds overflow
    assert line_search(inst, FEAS, np.array([2.0, 1.0]), np.array([3.0, 0.0])) == 0.0
    # whole segment descends
    assert line_search(inst, FEAS, np.array([3.0, 0.0]), np.array([2.5, 0.5])) == 1.0
    assert line_search(inst, FEAS, np.array([3.0, 0.0]), np.array([1.5, 1.5])) == pytest.approx(2 / 3, abs=1e-12)


def phi(inst, model, f, y, a):
    return objective(model, inst, f + a * (y - f)).z


@pytest.mark.parametrize("model", [FEAS, QUAD, PenaltyModel.mincost(50)], ids=lambda m: m.kind)
def test_line_search_against_grid(model):
    rng = random.Random(4)
    grid = np.linspace(0.0, 1.0, 4001)
    for seed in range(60):
        inst = gen_instance(seed)
        if model.kind == "mincost":
            inst = make_instance(inst.n_nodes, [(a.tail, a.head, a.capacity, rng.randint(0, 3)) for a in inst.arcs],
                                 [(c.source, c.sink, c.demand) for c in inst.commodities])
        f, y = aggregate(random_pseudo_flow(inst, rng)), aggregate(random_pseudo_flow(inst, rng))
        a = line_search(inst, model, f, y)
        assert 0.0 <= a <= 1.0
        best = phi(inst, model, f, y, a)
        values = np.array([phi(inst, model, f, y, g) for g in grid])
        assert best <= values.min() + 1e-9
        earlier = values[grid < a - 1e-3]
        assert np.all(earlier >= best - 1e-12)
        if values[0] - best > 1e-9:  # smallest minimizer, unless phi is flat to rounding
            assert np.all(earlier > best)


def test_fw_instance_a_feasible_at_iteration_0():
    res = fw_solve(instance_a())
    assert res.verdict is Verdict.FEASIBLE and res.iterations == 0 and res.trace == []
    assert abs(res.flow[0, 0] - 3) <= 1e-9


def test_fw_instance_b_infeasible():
    res = fw_solve(instance_b())
    assert res.verdict is Verdict.INFEASIBLE and res.stop_rule == "T2"
    assert res.trace[0].n == 1 and abs(res.trace[0].lb - 0.5) <= 1e-12
    assert res.certificate.weights == (1,) and (res.certificate.lhs, res.certificate.rhs) == (3, 2)
    assert verify_certificate(instance_b(), res.certificate)


def test_fw_diamond_one_step():
    res = fw_solve(diamond())
    assert res.verdict is Verdict.FEASIBLE and res.iterations == 1
    assert abs(res.trace[0].alpha - 1 / 3) <= 1e-12
    np.testing.assert_allclose(res.flow, [[2.0, 1.0]], atol=1e-9)


def test_quadratic_penalty_verdicts():
    res = fw_solve(instance_b(), QUAD)
    assert res.verdict is Verdict.INFEASIBLE and verify_certificate(instance_b(), res.certificate)
    res = fw_solve(diamond(), QUAD)
    assert res.verdict is Verdict.FEASIBLE
    np.testing.assert_allclose(res.flow, [[2.0, 1.0]], atol=1e-6)


def test_undecided_when_iterations_run_out():
    res = fw_solve(gen_instance(281), params=SolverParams(max_iters=5))
    assert res.verdict is Verdict.UNDECIDED and res.stop_rule == "T4" and res.iterations == 5


def test_mincost_exits_on_gap():
    inst = make_instance(2, [(0, 1, 1, 1), (0, 1, 2, 2)], [(0, 1, 2)])
    res = fw_solve(inst, PenaltyModel.mincost(1000))
    assert res.verdict is Verdict.UNDECIDED and res.stop_rule == "T3"


def test_params_validated():
    with pytest.raises(ValueError):
        SolverParams(max_iters=0)
    with pytest.raises(ValueError):
        SolverParams(feas_tol=0)


def _runs(n_seeds=300, **kw):
    for seed in range(n_seeds):
        inst = gen_instance(seed)
        iterates = []
        res = fw_solve(inst, callback=lambda n, f: iterates.append(f.copy()), **kw)
        yield inst, res, iterates


def test_descent_conservation_and_bounds_along_traces():
    cases = 0
    params = SolverParams(max_iters=2000)
    for inst, res, iterates in _runs(params=params):
        zs = [r.z for r in res.trace] + [res.objective]
        assert all(b <= a + 1e-12 for a, b in zip(zs, zs[1:]))
        assert all(0.0 <= r.alpha <= 1.0 for r in res.trace)
        for f in iterates:
            assert check_conservation(inst, f).max_violation <= 1e-12
            assert f.min() >= 0.0
        if res.trace:
            assert max(r.lb for r in res.trace) <= min(zs) + 1e-9
            cases += 1
    assert cases >= 100


def test_verdict_soundness():
    for inst, res, _ in _runs():
        if res.verdict is Verdict.FEASIBLE:
            assert np.all(aggregate(res.flow) <= inst.capacity + 1e-6)
            assert check_conservation(inst, res.flow).max_violation <= 1e-9
        elif res.verdict is Verdict.INFEASIBLE:
            assert verify_certificate(inst, res.certificate)


def test_deterministic_traces():
    for seed in (3, 281, 392):
        a = fw_solve(gen_instance(seed), params=SolverParams(max_iters=300))
        b = fw_solve(gen_instance(seed), params=SolverParams(max_iters=300))
        assert [trace_line(r) for r in a.trace] == [trace_line(r) for r in b.trace]
        assert np.array_equal(a.flow, b.flow)


def test_trace_line_format():
    line = trace_line(IterationRecord(1, 0.5, 1 / 3, 3.0, -math.inf, 1.0))
    assert line == '{"n": 1, "z": 0.5, "alpha": 0.33333333333333331, "aon_value": 3, "lb": "-inf", "max_overflow": 1}'
