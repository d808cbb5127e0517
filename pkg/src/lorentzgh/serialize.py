"""JSON artifact formats.

Finite values are written in shortest round-trip decimal (python repr), so
load(dump(x)) is bit-exact; -inf is the string "-inf" (JSON has no
infinities), and distortion sentinels serialize as "inf".
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .core import CoveredFiniteSpace, FiniteLorentzSpace, build_space, covered
from .corr import Correspondence, make_correspondence
from .causet import CausalSet, build_causet
from .errors import ShapeMismatch
from .extended import NEG_INF
from .geometry import (FiniteMetricFiber, ProductGenerator, build_fiber,
                       circle_fiber, product_family, segment_fiber)
from .measured import AtomicMeasure, atomic_measure
from .nets import DiamondNet


def _encode_value(x: float):
    if x == NEG_INF:
        return "-inf"
    if math.isinf(x):
        return "inf"
    if x == int(x) and abs(x) < 2**53:
        return x  # ints and integral floats round-trip as-is
    return x


def _decode_value(v) -> float:
    if v == "-inf":
        return NEG_INF
    if v == "inf":
        return math.inf
    return float(v)


def encode_matrix(m: np.ndarray) -> list:
    return [[_encode_value(float(x)) for x in row] for row in m]


def decode_matrix(rows) -> list:
    return [[_decode_value(v) for v in row] for row in rows]


def space_to_dict(space: FiniteLorentzSpace) -> dict:
    return {"labels": list(space.labels), "ell": encode_matrix(space.ell)}


def space_from_dict(data: dict, tol: float = None) -> FiniteLorentzSpace:
    kwargs = {} if tol is None else {"tol": tol}
    return build_space(data["labels"], decode_matrix(data["ell"]), **kwargs)


def covered_to_dict(cov: CoveredFiniteSpace) -> dict:
    out = space_to_dict(cov.space)
    out["basepoint"] = cov.basepoint
    out["cover"] = [list(level) for level in cov.cover]
    return out


def covered_from_dict(data: dict, tol: float = None) -> CoveredFiniteSpace:
    space = space_from_dict(data, tol)
    return covered(space, int(data["basepoint"]), data["cover"])


def net_to_dict(net: DiamondNet) -> dict:
    return {"epsilon": _encode_value(net.epsilon),
            "pairs": [[p, q] for p, q in net.pairs]}


def net_from_dict(data: dict) -> DiamondNet:
    return DiamondNet(pairs=tuple((int(p), int(q)) for p, q in data["pairs"]),
                      epsilon=_decode_value(data["epsilon"]))


def correspondence_to_dict(r: Correspondence) -> dict:
    return {"pairs": [[x, y] for x, y in r.pairs],
            "n_left": r.n_left, "n_right": r.n_right}


def correspondence_from_dict(data: dict) -> Correspondence:
    return make_correspondence([(int(x), int(y)) for x, y in data["pairs"]],
                               int(data["n_left"]), int(data["n_right"]))


def fiber_to_dict(fiber: FiniteMetricFiber) -> dict:
    return {"labels": list(fiber.labels), "d": encode_matrix(fiber.d)}


def fiber_from_dict(data: dict) -> FiniteMetricFiber:
    return build_fiber(data["labels"], decode_matrix(data["d"]))


def measure_to_dict(m: AtomicMeasure, space: FiniteLorentzSpace = None) -> dict:
    if space is None:
        return {"weights": {str(i): _encode_value(w) for i, w in m.weights}}
    return {"weights": {space.labels[i]: _encode_value(w) for i, w in m.weights}}


def measure_from_dict(data: dict, space: FiniteLorentzSpace = None) -> AtomicMeasure:
    weights = {}
    for key, w in data["weights"].items():
        if space is not None and key in space.labels:
            idx = space.labels.index(key)
        else:
            idx = int(key)
        weights[idx] = _decode_value(w)
    return atomic_measure(weights)


def causet_to_dict(c: CausalSet) -> dict:
    return {"elements": list(c.elements), "covers": [[a, b] for a, b in c.covers]}


def causet_from_dict(data: dict) -> CausalSet:
    return build_causet(data["elements"], [(int(a), int(b)) for a, b in data["covers"]])


def generator_to_dict(gen: ProductGenerator) -> dict:
    out = {"fiber": fiber_to_dict(gen.fiber),
           "t_range": [gen.t_range[0], gen.t_range[1]]}
    if gen.family_index is not None:
        out["family_index"] = gen.family_index
    else:
        out["cone_scale"] = _encode_value(gen.cone_scale)
    return out


def generator_from_dict(data: dict) -> ProductGenerator:
    if "fiber" in data:
        fiber = fiber_from_dict(data["fiber"])
    elif data.get("fiber_kind") == "circle":
        fiber = circle_fiber(int(data["fiber_points"]), float(data.get("fiber_radius", 1.0)))
    elif data.get("fiber_kind") == "segment":
        fiber = segment_fiber(int(data["fiber_points"]), float(data.get("fiber_length", 1.0)))
    else:
        raise ShapeMismatch("generator spec needs a fiber")
    t_range = tuple(float(v) for v in data.get("t_range", (-1.0, 1.0)))
    if "family_index" in data:
        n = data["family_index"]
        return product_family(fiber, n if n == "inf" else int(n), t_range)
    return ProductGenerator(fiber=fiber, cone_scale=_decode_value(data.get("cone_scale", 1)),
                            t_range=t_range)


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, shortest-round-trip floats."""
    return json.dumps(_sanitize(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _encode_value(float(obj))
    if isinstance(obj, float):
        return _encode_value(obj)
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    return obj


def loads(text: str) -> Any:
    return json.loads(text)
