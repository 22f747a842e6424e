"""Arc penalty functions and the integrated objective.

Three variants share one interface:

``feasibility``
    h(f) = max(f - u, 0)
``quadratic``
    h(f) = max(f - u, 0) ** 2
``mincost``
    h(f) = c + M * max(f - u, 0)

All functions broadcast over numpy arrays.  At the kink ``f == u`` the
lower branch is used.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

KINDS = ("feasibility", "quadratic", "mincost")


@dataclass(frozen=True)
class PenaltyModel:
    kind: str = "feasibility"
    big_m: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "mincost":
            if self.big_m is None or not np.isfinite(self.big_m) or self.big_m <= 0:
                raise ValueError("mincost penalty needs a finite big_m > 0")
        elif self.big_m is not None:
            raise ValueError(f"big_m only applies to the mincost penalty, not {self.kind!r}")

    @classmethod
    def feasibility(cls) -> PenaltyModel:
        return cls("feasibility")

    @classmethod
    def generalized(cls, g: str) -> PenaltyModel:
        """Overflow penalty ``g(f - u)`` with ``g`` from the closed catalog."""
        if g == "linear":
            return cls("feasibility")
        if g == "quadratic":
            return cls("quadratic")
        raise ValueError(f"unknown g {g!r}; expected 'linear' or 'quadratic'")

    @classmethod
    def mincost(cls, big_m) -> PenaltyModel:
        return cls("mincost", float(Fraction(big_m)))

    @property
    def zero_inside_capacity(self) -> bool:
        """True when h vanishes on [0, u], so z = 0 characterizes feasibility."""
        return self.kind != "mincost"


def overflow(f, u):
    return np.maximum(np.asarray(f, dtype=float) - u, 0.0)


def penalty_value(model: PenaltyModel, f, u, c=0.0):
    """Arc weight h(f)."""
    x = overflow(f, u)
    if model.kind == "feasibility":
        return x
    if model.kind == "quadratic":
        return x * x
    return c + model.big_m * x


def arc_integral(model: PenaltyModel, f, u, c=0.0):
    """Closed-form integral of h from 0 to f."""
    x = overflow(f, u)
    if model.kind == "feasibility":
        return 0.5 * x * x
    if model.kind == "quadratic":
        return x * x * x / 3.0
    return c * np.asarray(f, dtype=float) + 0.5 * model.big_m * x * x


@dataclass
class ObjectiveValue:
    z: float
    per_arc: np.ndarray


def objective(model: PenaltyModel, inst, agg) -> ObjectiveValue:
    """z = sum over arcs of the integrated penalty, in arc_id order."""
    per_arc = np.asarray(arc_integral(model, agg, inst.capacity, inst.cost), dtype=float)
    z = 0.0
    for v in per_arc.tolist():
        z += v
    return ObjectiveValue(z, per_arc)


def weights(model: PenaltyModel, inst, agg) -> np.ndarray:
    return np.asarray(penalty_value(model, agg, inst.capacity, inst.cost), dtype=float)
