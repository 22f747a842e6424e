"""Equilibrium checks and infeasibility certificates.

Equilibrium is checked in arc form.  With potentials lam = shortest
distances from the source under weights h, every arc gets a reduced cost
``lam[tail] + h - lam[head] >= 0``.  A flow is an equilibrium when every
arc it uses has zero reduced cost; then every used path is a shortest path.

A cut certificate is a vector of nonnegative rational arc weights mu with

    sum_k dist_mu(s_k, t_k) * d_k  >  sum_a mu_a * u_a

which rules out any flow meeting all demands within capacity.  Certificates
are checked in exact rational arithmetic only.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Instance, aggregate
from .penalty import PenaltyModel, weights as penalty_weights
from .sssp import NegativeWeight, shortest_paths


@dataclass
class EquilibriumReport:
    potentials: np.ndarray        # (K, V), inf where unreachable
    reduced_costs: np.ndarray     # (K, A), inf on arcs leaving unreachable nodes
    used: np.ndarray              # (K, A) bool
    max_used_reduced_cost: np.ndarray  # (K,)
    path_length: np.ndarray       # (K,) common length of the used paths
    weights: np.ndarray           # (A,) the h values used
    classification: str
    tol: float

    @property
    def worst(self) -> float:
        return float(self.max_used_reduced_cost.max()) if self.max_used_reduced_cost.size else 0.0

    @property
    def is_equilibrium(self) -> bool:
        return self.worst <= self.tol


def classify(model: PenaltyModel, agg, inst: Instance) -> str:
    """'zero' when no arc carries more than its capacity, else 'nonzero'.

    The comparison is exact on the given numbers.  For the mincost penalty
    h never vanishes, so the labels are 'overflow-zero'/'overflow-positive'.
    """
    over = any(Fraction(float(x)) > a.capacity for x, a in zip(agg, inst.arcs))
    if model.zero_inside_capacity:
        return "nonzero" if over else "zero"
    return "overflow-positive" if over else "overflow-zero"


def verify_equilibrium(inst: Instance, model: PenaltyModel, flow, tol: float = 1e-9) -> EquilibriumReport:
    flow = np.asarray(flow, dtype=float)
    agg = aggregate(flow)
    h = penalty_weights(model, inst, agg)
    K, V, A = inst.n_commodities, inst.n_nodes, inst.n_arcs
    lam = np.full((K, V), np.inf)
    cache: dict[int, list] = {}
    for k, com in enumerate(inst.commodities):
        if com.source not in cache:
            cache[com.source] = shortest_paths(inst, h, com.source).dist
        lam[k] = cache[com.source]
    tail_pot = lam[:, inst.tails]
    finite = np.isfinite(tail_pot)
    rc = np.full((K, A), np.inf)
    with np.errstate(invalid="ignore"):
        rc[finite] = (tail_pot + h[None, :] - lam[:, inst.heads])[finite]
    used = flow > 1e-9 * inst.demand[:, None]
    worst = np.where(used, rc, 0.0).max(axis=1) if A else np.zeros(K)
    sinks = [c.sink for c in inst.commodities]
    length = lam[np.arange(K), sinks] if K else np.zeros(0)
    return EquilibriumReport(lam, rc, used, worst, length, h, classify(model, agg, inst), tol)


class CertificateNotFound(Exception):
    def __init__(self, message: str, best_margin: Fraction):
        super().__init__(message)
        self.best_margin = best_margin


@dataclass(frozen=True)
class CutCertificate:
    weights: tuple[Fraction, ...]
    lhs: Fraction
    rhs: Fraction

    @property
    def valid(self) -> bool:
        return self.lhs > self.rhs

    def scaled(self, q) -> CutCertificate:
        q = Fraction(q)
        return CutCertificate(tuple(q * w for w in self.weights), q * self.lhs, q * self.rhs)


def _exact(w) -> Fraction:
    if isinstance(w, (bool, float)) or not isinstance(w, (int, Fraction)):
        raise TypeError(f"certificate weights must be int or Fraction, got {type(w).__name__}")
    return Fraction(w)


def cut_sides(inst: Instance, mu) -> tuple[Fraction, Fraction]:
    """Exact ``(sum_k dist_mu(s_k, t_k) d_k, sum_a mu_a u_a)``."""
    mu = [_exact(w) for w in mu]
    if len(mu) != inst.n_arcs:
        raise ValueError(f"{len(mu)} weights for {inst.n_arcs} arcs")
    for a, w in enumerate(mu):
        if w < 0:
            raise NegativeWeight(f"arc {inst.arc_label(a)} has negative weight {w}")
    lhs = Fraction(0)
    cache: dict[int, list] = {}
    for com in inst.commodities:
        if com.source not in cache:
            cache[com.source] = shortest_paths(inst, mu, com.source, check=False).dist
        lhs += cache[com.source][com.sink] * com.demand
    rhs = sum((w * a.capacity for w, a in zip(mu, inst.arcs)), Fraction(0))
    return lhs, rhs


def verify_certificate(inst: Instance, cert) -> bool:
    """Recompute both sides exactly and return ``lhs > rhs``.

    ``cert`` is a :class:`CutCertificate` or a plain weight sequence; any
    stored sides are ignored.
    """
    mu = cert.weights if isinstance(cert, CutCertificate) else cert
    lhs, rhs = cut_sides(inst, mu)
    return lhs > rhs


def _denominators(limit: int):
    d = 1
    while d <= limit:
        yield d
        d <<= 10


def certificate_from_weights(inst: Instance, h, denominator_limit: int = 2**60) -> CutCertificate:
    """Round ``h / max(h)`` to dyadic rationals until the cut inequality holds.

    Denominators 1, 2**10, 2**20, ... up to ``denominator_limit`` are tried,
    then the exact binary value of the scaled floats.
    """
    h = np.asarray(h, dtype=float)
    if h.size == 0 or not np.all(np.isfinite(h)) or h.min() < 0:
        raise ValueError("weights must be finite and nonnegative")
    top = float(h.max())
    if top <= 0:
        raise CertificateNotFound("all weights are zero", Fraction(0))
    scaled = (h / top).tolist()
    best = None
    tried = set()
    candidates = [[Fraction(round(x * D), D) for x in scaled] for D in _denominators(denominator_limit)]
    candidates.append([Fraction(x) for x in scaled])
    for mu in candidates:
        key = tuple(mu)
        if key in tried:
            continue
        tried.add(key)
        lhs, rhs = cut_sides(inst, mu)
        if lhs > rhs:
            return CutCertificate(key, lhs, rhs)
        if best is None or lhs - rhs > best:
            best = lhs - rhs
    raise CertificateNotFound(f"no rounding of the weights separates (best lhs - rhs = {best})", best)


def build_certificate(inst: Instance, model: PenaltyModel, flow, denominator_limit: int = 2**60) -> CutCertificate:
    """Certificate candidate from the penalty weights h of ``flow``."""
    agg = aggregate(np.asarray(flow, dtype=float))
    return certificate_from_weights(inst, penalty_weights(model, inst, agg), denominator_limit)


def balance_sides(inst: Instance, model: PenaltyModel, flow) -> tuple[float, float]:
    """``(sum_k l_k d_k, sum_a h_a f_a)``; equal at an equilibrium."""
    rep = verify_equilibrium(inst, model, flow)
    agg = aggregate(np.asarray(flow, dtype=float))
    return float(np.dot(rep.path_length, inst.demand)), float(np.dot(rep.weights, agg))

