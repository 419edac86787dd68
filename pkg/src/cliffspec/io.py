"""JSON forms of Clifford numbers, vectors, operators and spectral measures.

Floats are written with ``repr`` precision, so finite doubles round-trip
bit-exactly (signed zeros included).  NaN and infinities are rejected both
ways.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .clifford_core import CliffordNumber, basis_key, parse_basis_key
from .clifford_module import CliffordOperator, CliffordVector
from .s_spectrum import SpectralPoint
from .spectral_measure import SpectralMeasureFS

__all__ = [
    "FormatError",
    "number_to_json",
    "number_from_json",
    "vector_to_json",
    "vector_from_json",
    "operator_to_json",
    "operator_from_json",
    "measure_to_json",
    "measure_from_json",
    "dumps",
    "loads",
    "read_operator",
    "write_json",
]


class FormatError(ValueError):
    """Malformed or non-finite JSON payload."""


def _present(arr: np.ndarray) -> bool:
    # keep -0.0 so that the round trip is bit-exact
    return bool(np.any(arr != 0.0) or np.any(np.signbit(arr)))


def _finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what} contains non-finite values")
    return arr


def _header(obj: Any, keys: tuple[str, ...]) -> tuple[int, ...]:
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object")
    try:
        vals = tuple(obj[k] for k in keys)
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}") from exc
    for k, v in zip(keys, vals):
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise FormatError(f"field {k!r} must be a non-negative integer")
    return vals


def _index(key: str, n: int) -> int:
    try:
        return parse_basis_key(key, n)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def number_to_json(a: CliffordNumber) -> dict:
    c = _finite(a.coeffs, "Clifford number")
    return {"n": a.n, "coeffs": {basis_key(i, a.n): float(v) for i, v in enumerate(c) if _present(c[i:i + 1])}}


def number_from_json(obj: Any) -> CliffordNumber:
    (n,) = _header(obj, ("n",))
    coeffs = np.zeros(1 << n)
    for key, value in dict(obj.get("coeffs", {})).items():
        coeffs[_index(key, n)] = float(value)
    return CliffordNumber(n, _finite(coeffs, "Clifford number"))


def vector_to_json(x: CliffordVector) -> dict:
    c = _finite(x.coeffs, "vector")
    return {"n": x.n, "m": x.m,
            "coeffs": {basis_key(a, x.n): c[a].tolist() for a in range(c.shape[0]) if _present(c[a])}}


def vector_from_json(obj: Any) -> CliffordVector:
    n, m = _header(obj, ("n", "m"))
    coeffs = np.zeros((1 << n, m))
    for key, row in dict(obj.get("coeffs", {})).items():
        arr = np.asarray(row, dtype=float)
        if arr.shape != (m,):
            raise FormatError(f"vector component {key!r} must have length {m}")
        coeffs[_index(key, n)] = arr
    return CliffordVector(n, m, _finite(coeffs, "vector"))


def operator_to_json(t: CliffordOperator) -> dict:
    b = _finite(t.blocks, "operator")
    return {"n": t.n, "m": t.m,
            "blocks": {basis_key(a, t.n): b[a].tolist() for a in range(b.shape[0]) if _present(b[a])}}


def operator_from_json(obj: Any) -> CliffordOperator:
    n, m = _header(obj, ("n", "m"))
    if n > 12:
        raise FormatError("n above 12 is not supported")
    blocks = np.zeros((1 << n, m, m))
    for key, block in dict(obj.get("blocks", {})).items():
        try:
            arr = np.asarray(block, dtype=float)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"block {key!r} is not numeric") from exc
        if arr.shape != (m, m):
            raise FormatError(f"block {key!r} must be {m}x{m}, got shape {arr.shape}")
        blocks[_index(key, n)] = arr
    return CliffordOperator(n, m, _finite(blocks, "operator"))


def measure_to_json(e: SpectralMeasureFS) -> dict:
    points = []
    for lab, proj in e.atoms:
        if not isinstance(lab, SpectralPoint):
            raise FormatError("only measures labelled by slice points have a JSON form")
        points.append({"u": lab.u, "v": lab.v, "projection": operator_to_json(proj)})
    return {"n": e.n, "m": e.m, "points": points}


def measure_from_json(obj: Any) -> SpectralMeasureFS:
    n, m = _header(obj, ("n", "m"))
    atoms = []
    for entry in obj.get("points", []):
        u, v = float(entry["u"]), float(entry["v"])
        _finite(np.array([u, v]), "spectral point")
        atoms.append((SpectralPoint(u, v), operator_from_json(entry["projection"])))
    return SpectralMeasureFS(n, m, tuple(atoms))


def _reject_constant(name: str) -> float:
    raise FormatError(f"non-finite JSON constant {name}")


def dumps(obj: Any, indent: int | None = 2) -> str:
    try:
        return json.dumps(obj, indent=indent, allow_nan=False, sort_keys=False, default=_default)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, SpectralPoint):
        return {"u": obj.u, "v": obj.v}
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serialisable")


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc


def read_operator(path: str | Path) -> CliffordOperator:
    return operator_from_json(loads(Path(path).read_text()))


def write_json(obj: Any, path: str | Path | None) -> str:
    text = dumps(obj) + "\n"
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text
