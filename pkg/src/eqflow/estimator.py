"""scikit-learn style front end to :func:`eqflow.solver.fw_solve`."""
from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from os import PathLike

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from .core import Instance, validate_instance
from .penalty import PenaltyModel
from .solver import SolverParams, fw_solve


def check_instance(X) -> Instance:
    """Accept an :class:`Instance`, parsed instance JSON, or a path to one."""
    if isinstance(X, Instance):
        return X
    if isinstance(X, Mapping):
        return validate_instance(dict(X))
    if isinstance(X, (str, PathLike)):
        from .io import load_instance
        return load_instance(X)
    raise TypeError(f"expected an Instance, a mapping or a path, got {type(X).__name__}")


def check_flow(inst: Instance, flow) -> np.ndarray:
    """Coerce to a finite float array of shape (n_commodities, n_arcs)."""
    flow = np.asarray(flow, dtype=float)
    if flow.ndim == 1 and inst.n_commodities == 1:
        flow = flow[None, :]
    if flow.shape != (inst.n_commodities, inst.n_arcs):
        raise ValueError(f"flow has shape {flow.shape}, expected {(inst.n_commodities, inst.n_arcs)}")
    if not np.all(np.isfinite(flow)):
        raise ValueError("flow contains non-finite values")
    return flow


def make_model(penalty: str = "feasibility", big_m=None) -> PenaltyModel:
    if penalty == "mincost":
        if big_m is None:
            raise ValueError("the mincost penalty needs big_m")
        return PenaltyModel.mincost(Fraction(big_m) if isinstance(big_m, str) else big_m)
    if big_m is not None:
        raise ValueError(f"big_m is only meaningful with penalty='mincost', not {penalty!r}")
    return PenaltyModel.generalized("linear" if penalty == "feasibility" else penalty)


class MultiCommodityFlowSolver(BaseEstimator):
    """Decide multi-commodity flow feasibility by Frank-Wolfe on the penalty objective.

    ``fit`` takes an instance and sets ``verdict_`` to ``"feasible"``,
    ``"infeasible"`` or ``"undecided"`` together with the final flow, bounds
    and (when infeasible) an exact cut certificate.

    Parameters
    ----------
    penalty : {"feasibility", "quadratic", "mincost"}
    big_m : float or str, optional
        Overflow price for ``penalty="mincost"``.
    max_iters, rel_gap, feas_tol, infeas_margin, line_search_tol
        See :class:`eqflow.solver.SolverParams`.
    """

    def __init__(self, penalty="feasibility", big_m=None, max_iters=10000, rel_gap=1e-8,
                 feas_tol=1e-6, infeas_margin=1e-12, line_search_tol=1e-12):
        self.penalty = penalty
        self.big_m = big_m
        self.max_iters = max_iters
        self.rel_gap = rel_gap
        self.feas_tol = feas_tol
        self.infeas_margin = infeas_margin
        self.line_search_tol = line_search_tol

    def _params(self) -> SolverParams:
        return SolverParams(max_iters=self.max_iters, rel_gap=self.rel_gap, feas_tol=self.feas_tol,
                            infeas_margin=self.infeas_margin, line_search_tol=self.line_search_tol)

    def fit(self, X, y=None):
        inst = check_instance(X)
        model = make_model(self.penalty, self.big_m)
        res = fw_solve(inst, model, self._params())
        self.instance_ = inst
        self.model_ = model
        self.result_ = res
        self.verdict_ = res.verdict.value
        self.flow_ = res.flow
        self.aggregate_ = res.aggregate
        self.objective_ = res.objective
        self.lower_bound_ = res.lower_bound
        self.certificate_ = res.certificate
        self.equilibrium_ = res.equilibrium
        self.trace_ = res.trace
        self.n_iter_ = res.iterations
        return self

    def fit_predict(self, X, y=None) -> str:
        return self.fit(X).verdict_

    def predict(self, X=None) -> str:
        """Verdict for ``X``; with no argument, the verdict of the last fit."""
        if X is None:
            check_is_fitted(self, "verdict_")
            return self.verdict_
        return clone(self).fit(X).verdict_
