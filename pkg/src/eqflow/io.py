"""JSON readers and writers for instances, flows, certificates and reports.

Numbers are read exactly: JSON numbers go through :class:`decimal.Decimal`
and strings may be ``"p/q"`` or decimals.  Floats are written as strings
with 17 significant digits; exact values as ``"p/q"`` strings.
"""
from __future__ import annotations

import json
import math
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import CutCertificate
from .core import FORMAT_TAG, Instance, InstanceError, validate_instance
from .sssp import NegativeWeight


class InputError(ValueError):
    """Malformed input file; the message names the offending field."""


def _reject_constant(name):
    raise InputError(f"non-finite number {name} is not allowed")


def load_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_instance(path) -> Instance:
    raw = load_json(path)
    if not isinstance(raw, dict):
        raise InputError(f"{path}: instance must be a JSON object")
    return validate_instance(raw)


def parse_number(value, what: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal, str)):
        raise InputError(f"{what}: expected a number or 'p/q' string, got {value!r}")
    try:
        q = Fraction(value)
    except (ValueError, ZeroDivisionError, ArithmeticError):
        raise InputError(f"{what}: cannot parse {value!r} as a rational") from None
    return q


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isfinite(x):
        return format(x, ".17g")
    return "inf" if x > 0 else "-inf" if x < 0 else "nan"


def fmt_exact(q: Fraction) -> str:
    return str(Fraction(q))


def _index(inst: Instance):
    arcs = {inst.arc_label(a): a for a in range(inst.n_arcs)}
    coms = {inst.commodity_label(k): k for k in range(inst.n_commodities)}
    return arcs, coms


def flow_from_json(inst: Instance, raw) -> np.ndarray:
    """Read ``{"flows": {commodity_id: {arc_id: value}}}``; missing entries are 0.

    Other top-level keys are ignored so that a solve report can be fed
    back in as a flow file.
    """
    if not isinstance(raw, dict) or not isinstance(raw.get("flows"), dict):
        raise InputError("flow file: expected an object with a 'flows' object")
    arcs, coms = _index(inst)
    flow = inst.zero_flow()
    for cname, per_arc in raw["flows"].items():
        if cname not in coms:
            raise InputError(f"flows: unknown commodity {cname!r}")
        if not isinstance(per_arc, dict):
            raise InputError(f"flows.{cname}: expected an object of arc_id -> value")
        for aname, value in per_arc.items():
            if aname not in arcs:
                raise InputError(f"flows.{cname}: unknown arc {aname!r}")
            flow[coms[cname], arcs[aname]] = float(parse_number(value, f"flows.{cname}.{aname}"))
    return flow


def flow_to_json(inst: Instance, flow) -> dict:
    return {
        inst.commodity_label(k): {inst.arc_label(a): fmt_float(flow[k, a]) for a in range(inst.n_arcs)}
        for k in range(inst.n_commodities)
    }


def certificate_to_json(inst: Instance, cert: CutCertificate) -> dict:
    return {
        "format": FORMAT_TAG,
        "weights": {inst.arc_label(a): fmt_exact(w) for a, w in enumerate(cert.weights)},
        "lhs": fmt_exact(cert.lhs),
        "rhs": fmt_exact(cert.rhs),
    }


def certificate_weights_from_json(inst: Instance, raw) -> list[Fraction]:
    """Arc weights from a certificate file.  Missing arcs get weight 0."""
    if not isinstance(raw, dict) or not isinstance(raw.get("weights"), dict):
        raise InputError("certificate: expected an object with a 'weights' object")
    unknown = sorted(set(raw) - {"format", "weights", "lhs", "rhs"})
    if unknown:
        raise InputError(f"certificate: unknown key(s) {', '.join(unknown)}")
    arcs, _ = _index(inst)
    mu = [Fraction(0)] * inst.n_arcs
    for aname, value in raw["weights"].items():
        if aname not in arcs:
            raise InputError(f"certificate.weights: unknown arc {aname!r}")
        w = parse_number(value, f"certificate.weights.{aname}")
        if w < 0:
            raise NegativeWeight(f"certificate.weights.{aname}: negative weight {w}")
        mu[arcs[aname]] = w
    return mu


def dump(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


__all__ = [
    "InputError", "InstanceError", "load_json", "load_instance", "parse_number", "fmt_float", "fmt_exact",
    "flow_from_json", "flow_to_json", "certificate_to_json", "certificate_weights_from_json", "dump",
]
