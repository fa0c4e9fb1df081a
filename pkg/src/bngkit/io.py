"""JSON forms of the package's values.

Floats are written with ``repr`` precision, so every emitted document parses
back to bit-identical values. Parse errors raise SchemaError naming the field.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .certify import Certificate, Report
from .core import ClusteredModel, DiagonalUnitary
from .decomp import FactorSequence
from .errors import BngError, SchemaError
from .su2 import ConjugateChain
from .typeiii import FiniteSpectrumUnitary

# -- emitting -----------------------------------------------------------------------


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def diagonal_to_json(u: DiagonalUnitary) -> dict:
    return {"phases": u.phases.tolist()}


def model_to_json(model: ClusteredModel) -> dict:
    return {
        "clusters": list(model.clusters),
        "exceptional": [[p, k] for p, k in model.exceptional],
    }


def operator_to_json(x) -> dict:
    if isinstance(x, DiagonalUnitary):
        return diagonal_to_json(x)
    if isinstance(x, ClusteredModel):
        return model_to_json(x)
    if isinstance(x, FiniteSpectrumUnitary):
        return finite_spectrum_to_json(x)
    return matrix_to_json(x)


def factor_sequence_to_json(seq: FactorSequence) -> dict:
    out = {"kind": seq.kind, "factors": [diagonal_to_json(f) for f in seq.factors]}
    if seq.block_angles:
        out["block_angles"] = list(seq.block_angles)
    return out


def finite_spectrum_to_json(u: FiniteSpectrumUnitary) -> dict:
    return {
        "eigenphases": [[p, k] for p, k in u.eigenphases],
        "basis": "canonical" if u.basis is None else matrix_to_json(u.basis),
    }


def chain_to_json(chain: ConjugateChain) -> dict:
    return {
        "theta": chain.theta,
        "phi": chain.phi,
        "m": chain.m,
        "conjugators": [matrix_to_json(g) for g in chain.conjugators],
        "product": matrix_to_json(chain.product()),
    }


def certificate_to_json(cert: Certificate) -> dict:
    meta = {}
    for key, value in cert.meta.items():
        meta[key] = operator_to_json(value) if isinstance(value, ClusteredModel) else value
    return {
        "mode": cert.mode,
        "base": operator_to_json(cert.base),
        "target": operator_to_json(cert.target),
        "claimed_bound": int(cert.claimed_bound),
        "factors": [{"sign": int(s), "conjugator": matrix_to_json(g)} for s, g in cert.factors],
        "meta": meta,
    }


def report_to_json(report: Report) -> dict:
    return report.to_json()


def dumps(doc: Any, indent: int | None = None) -> str:
    """Serialize with exact float round trip; non-finite floats are rejected."""
    return json.dumps(doc, indent=indent, allow_nan=False)


# -- parsing ------------------------------------------------------------------------


def loads(text: str, field: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(field, f"malformed JSON: {exc}") from None


def _get(obj, key: str, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(where, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{where}.{key}", "missing")
    return obj[key]


def _real(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(where, f"expected a number, got {x!r}")
    if not math.isfinite(x):
        raise SchemaError(where, "must be finite")
    return float(x)


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(where, f"expected an integer, got {x!r}")
    return x


def _reals(xs, where: str) -> list:
    if not isinstance(xs, list):
        raise SchemaError(where, "expected an array of numbers")
    return [_real(x, f"{where}[{i}]") for i, x in enumerate(xs)]


def _pairs(xs, where: str) -> list:
    if not isinstance(xs, list):
        raise SchemaError(where, "expected an array of [phase, multiplicity] pairs")
    out = []
    for i, pair in enumerate(xs):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(f"{where}[{i}]", "expected [phase, multiplicity]")
        out.append((_real(pair[0], f"{where}[{i}][0]"), _int(pair[1], f"{where}[{i}][1]")))
    return out


def _wrap(where: str, build):
    # precondition failures while building a value are schema problems of that field
    try:
        return build()
    except SchemaError:
        raise
    except BngError as exc:
        raise SchemaError(where, str(exc)) from None


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    dim = _int(_get(obj, "dim", where), f"{where}.dim")
    parts = []
    for key in ("re", "im"):
        rows = _get(obj, key, where)
        if not isinstance(rows, list) or len(rows) != dim:
            raise SchemaError(f"{where}.{key}", f"expected {dim} rows")
        grid = []
        for i, row in enumerate(rows):
            vals = _reals(row, f"{where}.{key}[{i}]")
            if len(vals) != dim:
                raise SchemaError(f"{where}.{key}[{i}]", f"expected {dim} entries")
            grid.append(vals)
        parts.append(np.array(grid, dtype=np.float64).reshape(dim, dim))
    return parts[0] + 1j * parts[1]


def diagonal_from_json(obj, where: str = "input") -> DiagonalUnitary:
    if isinstance(obj, list):
        phases = _reals(obj, where)
    else:
        phases = _reals(_get(obj, "phases", where), f"{where}.phases")
    return _wrap(f"{where}.phases", lambda: DiagonalUnitary(phases))


def model_from_json(obj, where: str = "input") -> ClusteredModel:
    clusters = _reals(_get(obj, "clusters", where), f"{where}.clusters")
    exceptional = _pairs(obj.get("exceptional", []), f"{where}.exceptional")
    return _wrap(where, lambda: ClusteredModel(tuple(clusters), tuple(exceptional)))


def finite_spectrum_from_json(obj, where: str = "input") -> FiniteSpectrumUnitary:
    eig = _pairs(_get(obj, "eigenphases", where), f"{where}.eigenphases")
    raw = obj.get("basis", "canonical")
    basis = None if raw == "canonical" else matrix_from_json(raw, f"{where}.basis")
    return _wrap(where, lambda: FiniteSpectrumUnitary(tuple(eig), basis))


def factor_sequence_from_json(obj, where: str = "input") -> FactorSequence:
    kind = _get(obj, "kind", where)
    if kind not in ("product", "torus"):
        raise SchemaError(f"{where}.kind", f"expected 'product' or 'torus', got {kind!r}")
    factors = _get(obj, "factors", where)
    if not isinstance(factors, list):
        raise SchemaError(f"{where}.factors", "expected an array")
    fs = tuple(diagonal_from_json(f, f"{where}.factors[{i}]") for i, f in enumerate(factors))
    angles = tuple(_reals(obj.get("block_angles", []), f"{where}.block_angles"))
    return FactorSequence(kind, fs, angles)


def operator_from_json(obj, where: str = "input"):
    """Dispatch on the keys present: phases, clusters, eigenphases or dim."""
    if isinstance(obj, list) or (isinstance(obj, dict) and "phases" in obj):
        return diagonal_from_json(obj, where)
    if isinstance(obj, dict):
        if "clusters" in obj:
            return model_from_json(obj, where)
        if "eigenphases" in obj:
            return finite_spectrum_from_json(obj, where)
        if "dim" in obj:
            return matrix_from_json(obj, where)
    raise SchemaError(where, "expected phases, clusters, eigenphases or a dim/re/im matrix")


def certificate_from_json(obj, where: str = "cert") -> Certificate:
    mode = _get(obj, "mode", where)
    if not isinstance(mode, str):
        raise SchemaError(f"{where}.mode", "expected a string")
    base = operator_from_json(_get(obj, "base", where), f"{where}.base")
    target = operator_from_json(_get(obj, "target", where), f"{where}.target")
    for name, value in (("base", base), ("target", target)):
        if isinstance(value, (ClusteredModel, FiniteSpectrumUnitary)):
            raise SchemaError(f"{where}.{name}", "expected a diagonal unitary or a matrix")
    bound = _int(_get(obj, "claimed_bound", where), f"{where}.claimed_bound")
    raw = _get(obj, "factors", where)
    if not isinstance(raw, list):
        raise SchemaError(f"{where}.factors", "expected an array")
    factors = []
    for i, f in enumerate(raw):
        here = f"{where}.factors[{i}]"
        sign = _int(_get(f, "sign", here), f"{here}.sign")
        if sign not in (1, -1):
            raise SchemaError(f"{here}.sign", f"expected +1 or -1, got {sign}")
        factors.append((sign, matrix_from_json(_get(f, "conjugator", here), f"{here}.conjugator")))
    meta = dict(obj.get("meta", {}))
    for key in ("base_model", "target_model"):
        if key in meta:
            meta[key] = model_from_json(meta[key], f"{where}.meta.{key}")
    return Certificate(base, target, factors, bound, mode, meta)


def _residual(x, where: str) -> float:
    return math.inf if x is None else _real(x, where)


def report_from_json(obj, where: str = "report") -> Report:
    worst = _get(obj, "worst_factor", where)
    return Report(
        bool(_get(obj, "pass", where)),
        _residual(_get(obj, "product_residual", where), f"{where}.product_residual"),
        _int(_get(worst, "index", f"{where}.worst_factor"), f"{where}.worst_factor.index"),
        _residual(_get(worst, "residual", f"{where}.worst_factor"), f"{where}.worst_factor.residual"),
        bool(_get(obj, "count_ok", where)),
        list(obj.get("failures", [])),
    )
