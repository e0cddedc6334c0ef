"""JSON documents for fundamental sets, cameras and reports.

Output is key-sorted, locale-independent and prints floats with 17
significant digits, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import json
import math
from itertools import combinations

import numpy as np

from .errors import InvalidDocument, MissingPair
from .fundamental import FundamentalSet, make_set
from .projective import DEFAULT_TOL, Tolerances, as_camera


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    if x == 0:
        return "0.0"  # folds -0.0 so outputs stay byte-stable
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for n, key in enumerate(sorted(obj, key=str)):
            if n:
                out.append(", ")
            out.append(json.dumps(str(key), ensure_ascii=False) + ": ")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for n, item in enumerate(obj):
            if n:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out = []
    _emit(obj, out)
    return "".join(out) + "\n"


def _matrix(value, shape, what):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidDocument(f"{what} is not a numeric matrix") from None
    if M.shape != shape:
        raise InvalidDocument(f"{what} must be {shape[0]}x{shape[1]}, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidDocument(f"{what} has non-finite entries")
    return M


def _int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidDocument(f"{what} must be an integer")
    return value


def parse_tolerances(doc) -> Tolerances:
    block = doc.get("tolerances")
    if block is None:
        return DEFAULT_TOL
    if not isinstance(block, dict):
        raise InvalidDocument("tolerances must be an object")
    known = {"tol_rank", "tol_equal", "tol_compat", "tol_classify"}
    unknown = set(block) - known
    if unknown:
        raise InvalidDocument(f"unknown tolerance keys {sorted(unknown)}")
    try:
        return Tolerances(**{k: float(v) for k, v in block.items()})
    except (TypeError, ValueError) as exc:
        raise InvalidDocument(f"bad tolerances: {exc}") from None


def parse_set(doc) -> tuple[FundamentalSet, Tolerances]:
    if not isinstance(doc, dict):
        raise InvalidDocument("set document must be an object")
    if "n" not in doc or "fundamental" not in doc:
        raise InvalidDocument("set document needs 'n' and 'fundamental'")
    n = _int(doc["n"], "n")
    if n < 2:
        raise InvalidDocument("n must be at least 2")
    if not isinstance(doc["fundamental"], list):
        raise InvalidDocument("'fundamental' must be an array")
    raw = {}
    for entry in doc["fundamental"]:
        if not isinstance(entry, dict) or not {"i", "j", "matrix"} <= set(entry):
            raise InvalidDocument("each fundamental entry needs i, j and matrix")
        i, j = _int(entry["i"], "i"), _int(entry["j"], "j")
        if not 1 <= i < j <= n:
            raise InvalidDocument(f"pair ({i},{j}) must satisfy 1 <= i < j <= n")
        if (i, j) in raw:
            raise InvalidDocument(f"pair ({i},{j}) listed twice")
        raw[i, j] = _matrix(entry["matrix"], (3, 3), f"F({i},{j})")
    for i, j in combinations(range(1, n + 1), 2):
        if (i, j) not in raw:
            raise MissingPair(f"missing pair ({i},{j})")
    tol = parse_tolerances(doc)
    return make_set(n, raw, tol.tol_rank), tol


def set_document(fset: FundamentalSet, tol: Tolerances | None = None):
    doc = {
        "n": fset.n,
        "fundamental": [{"i": i, "j": j, "matrix": fset.F(i, j).tolist()} for i, j in fset.pairs()],
    }
    if tol is not None and tol != DEFAULT_TOL:
        doc["tolerances"] = {k: getattr(tol, k) for k in ("tol_rank", "tol_equal", "tol_compat", "tol_classify")}
    return doc


def parse_cameras(doc):
    if not isinstance(doc, dict) or not isinstance(doc.get("cameras"), list):
        raise InvalidDocument("camera document needs a 'cameras' array")
    by_id = {}
    for entry in doc["cameras"]:
        if not isinstance(entry, dict) or not {"id", "matrix"} <= set(entry):
            raise InvalidDocument("each camera needs id and matrix")
        k = _int(entry["id"], "id")
        if k in by_id:
            raise InvalidDocument(f"camera id {k} listed twice")
        by_id[k] = as_camera(_matrix(entry["matrix"], (3, 4), f"camera {k}"))
    if sorted(by_id) != list(range(1, len(by_id) + 1)):
        raise InvalidDocument("camera ids must be contiguous from 1")
    return [by_id[k] for k in sorted(by_id)]


def camera_document(cameras, **extra):
    doc = {"cameras": [{"id": k, "matrix": np.asarray(C).tolist()} for k, C in enumerate(cameras, start=1)]}
    doc.update(extra)
    return doc
