"""JSON ingestion and canonical output for models, operators and Orlicz functions.

Infinite values travel as the string ``"inf"``; complex numbers as
``[re, im]`` pairs (a bare number is accepted for a real value).  Parse
errors carry a field path such as ``factors[1].weight``.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from . import orlicz
from .operator_model import AlgebraModel, Factor, OperatorElement, TailRule

__all__ = [
    "InputError",
    "load_json",
    "parse_json_arg",
    "model_from_dict",
    "operator_from_dict",
    "orlicz_from_dict",
    "tail_from_dict",
    "encode",
    "canonical_json",
    "dumps",
    "digest",
]


class InputError(ValueError):
    """Malformed input; ``where`` names the file position or field path."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


# ------------------------------------------------------------------ input


def load_json(source: str | Path, text: str | None = None) -> Any:
    """Parse a JSON file (or ``text`` labelled by ``source``) with line/column errors."""
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read file ({exc.strerror})", str(source)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg}", f"{source}:{exc.lineno}:{exc.colno}") from None


def parse_json_arg(arg: str, label: str) -> Any:
    """Inline JSON or ``@path`` (as used by CLI flags)."""
    if arg.startswith("@"):
        return load_json(arg[1:])
    return load_json(label, text=arg)


def _num(v: Any, where: str, allow_inf: bool = False) -> float:
    if isinstance(v, str) and v in ("inf", "Infinity") and allow_inf:
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"expected a number, got {v!r}", where)
    x = float(v)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise InputError(f"expected a finite number, got {v!r}", where)
    return x


def _complex(v: Any, where: str) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"complex value must be [re, im], got {v!r}", where)
        return complex(_num(v[0], where + "[0]"), _num(v[1], where + "[1]"))
    return complex(_num(v, where))


def _obj(d: Any, where: str) -> dict:
    if not isinstance(d, dict):
        raise InputError(f"expected an object, got {type(d).__name__}", where)
    return d


def _list(d: Any, where: str) -> list:
    if not isinstance(d, list):
        raise InputError(f"expected a list, got {type(d).__name__}", where)
    return d


def tail_from_dict(d: Any, where: str = "declared_tail") -> TailRule:
    d = _obj(d, where)
    if "rule" not in d:
        raise InputError("missing field 'rule'", where)
    kw: dict[str, Any] = {"rule": d["rule"]}
    for key in ("A", "rho", "kappa", "sigma", "beta", "gamma"):
        if key in d:
            kw[key] = _num(d[key], f"{where}.{key}")
    if "dim" in d:
        kw["dim"] = int(_num(d["dim"], f"{where}.dim"))
    if "table" in d:
        rows = []
        for i, row in enumerate(_list(d["table"], f"{where}.table")):
            r = _list(row, f"{where}.table[{i}]")
            if len(r) != 2:
                raise InputError("table rows are [norm, weight]", f"{where}.table[{i}]")
            rows.append((_num(r[0], f"{where}.table[{i}][0]"), _num(r[1], f"{where}.table[{i}][1]")))
        kw["table"] = tuple(rows)
    if "then" in d:
        kw["then"] = tail_from_dict(d["then"], f"{where}.then")
    try:
        return TailRule(**kw)
    except ValueError as exc:
        raise InputError(str(exc), where) from None


def model_from_dict(d: Any, where: str = "model") -> AlgebraModel:
    d = _obj(d, where)
    unknown = set(d) - {"factors", "intervals", "declared_tail"}
    if unknown:
        raise InputError(f"unknown fields {sorted(unknown)}", where)
    factors = []
    for i, f in enumerate(_list(d.get("factors", []), f"{where}.factors")):
        fw = f"{where}.factors[{i}]"
        f = _obj(f, fw)
        if "dim" not in f:
            raise InputError("missing field 'dim'", fw)
        dim = _num(f["dim"], fw + ".dim")
        if dim != int(dim) or dim < 1:
            raise InputError(f"dim must be a positive integer, got {f['dim']!r}", fw + ".dim")
        weight = _num(f.get("weight", 1.0), fw + ".weight")
        if weight <= 0:
            raise InputError(f"weight must be positive, got {weight}", fw + ".weight")
        factors.append(Factor(int(dim), weight))
    intervals = []
    for i, it in enumerate(_list(d.get("intervals", []), f"{where}.intervals")):
        iw = f"{where}.intervals[{i}]"
        it = _obj(it, iw)
        if "length" not in it:
            raise InputError("missing field 'length'", iw)
        L = _num(it["length"], iw + ".length", allow_inf=True)
        if L <= 0:
            raise InputError(f"length must be positive, got {L}", iw + ".length")
        intervals.append(L)
    tail = tail_from_dict(d["declared_tail"], f"{where}.declared_tail") if d.get("declared_tail") else None
    try:
        return AlgebraModel(tuple(factors), tuple(intervals), tail)
    except ValueError as exc:
        raise InputError(str(exc), where) from None


def operator_from_dict(d: Any, model: AlgebraModel | None = None, where: str = "operator") -> OperatorElement:
    d = _obj(d, where)
    blocks = []
    for n, b in enumerate(_list(d.get("blocks", []), f"{where}.blocks")):
        bw = f"{where}.blocks[{n}]"
        rows = _list(b, bw)
        mat = []
        for i, row in enumerate(rows):
            row = _list(row, f"{bw}[{i}]")
            if len(row) != len(rows):
                raise InputError(f"block must be square: row has {len(row)} entries, expected {len(rows)}", f"{bw}[{i}]")
            mat.append([_complex(z, f"{bw}[{i}][{j}]") for j, z in enumerate(row)])
        blocks.append(np.array(mat, dtype=complex).reshape(len(rows), len(rows)))
    steps = [_complex(z, f"{where}.steps[{j}]") for j, z in enumerate(_list(d.get("steps", []), f"{where}.steps"))]
    x = OperatorElement(tuple(blocks), np.array(steps, dtype=complex))
    if model is not None:
        try:
            x.check(model)
        except ValueError as exc:
            raise InputError(str(exc), where) from None
    return x


def orlicz_from_dict(d: Any, where: str = "phi") -> orlicz.OrliczFunction:
    d = _obj(d, where)
    kind = d.get("kind")
    try:
        if kind == "power":
            return orlicz.PowerScaled(_num(d.get("a", 1.0), where + ".a"), _num(d.get("p"), where + ".p"))
        if kind == "threshold":
            return orlicz.ZeroInfinityThreshold(_num(d.get("b"), where + ".b"))
        if kind == "piecewise":
            bps = [_num(b, f"{where}.breakpoints[{i}]") for i, b in enumerate(_list(d.get("breakpoints"), where + ".breakpoints"))]
            segs = []
            for i, s in enumerate(_list(d.get("segments"), where + ".segments")):
                sw = f"{where}.segments[{i}]"
                s = _obj(s, sw)
                segs.append(
                    orlicz.Segment(
                        _num(s.get("coef", 0.0), sw + ".coef"),
                        _num(s.get("p", 1.0), sw + ".p"),
                        _num(s.get("slope", 0.0), sw + ".slope"),
                    )
                )
            return orlicz.PiecewiseConvex(tuple(bps), tuple(segs))
        if kind == "compose":
            return orlicz.compose(orlicz_from_dict(d.get("outer"), where + ".outer"), orlicz_from_dict(d.get("inner"), where + ".inner"))
        if kind == "conjugate":
            return orlicz.NumericConjugate(orlicz_from_dict(d.get("base"), where + ".base"))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc), where) from None
    raise InputError(f"unknown kind {kind!r}; expected power, threshold, piecewise, compose or conjugate", where + ".kind")


# ----------------------------------------------------------------- output


def encode(obj: Any) -> Any:
    """Convert to JSON-ready data: ``inf`` to ``"inf"``, arrays to lists, dataclasses via ``to_dict``."""
    if hasattr(obj, "to_dict"):
        return encode(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [encode(obj.real), encode(obj.imag)]
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(encode(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def dumps(obj: Any) -> str:
    """Stable, human-readable JSON (sorted keys, two-space indent)."""
    return json.dumps(encode(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest(*objs: Any) -> str:
    """sha256 of the canonical JSON of the inputs."""
    return hashlib.sha256(canonical_json(list(objs)).encode()).hexdigest()
