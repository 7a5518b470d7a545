"""Deterministic text output: every float is written with 17 significant digits.

The stdlib JSON encoder always uses ``float.__repr__``, so floats are
formatted here and everything else is delegated to :func:`json.dumps`.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from typing import Any, Iterable, Sequence

from .errors import NumericalError

SWEEP_HEADER = ("kT_over_omega0", "purity", "p_min", "coherence_abs", "is_minimum")


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"refusing to emit non-finite number {x!r}")
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return _encode(obj.value, indent, level)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + pad + ("," + pad).join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot emit {type(obj).__name__}")


def to_json(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def sweep_csv(rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([fmt_float(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()
