"""JSON files for structures, controls and quadratic forms, and CSV writers.

Every file carries a ``schema`` field naming its kind and version. Parse and
schema errors raise ``FileFormatError`` with the offending line number.
"""
from __future__ import annotations

import csv
import io
import json
import re

import numpy as np

from .core import CarnotStructure
from .endpoint import Control
from .errors import ValidationError

STRUCTURE_SCHEMA = "carnot-structure/1"
CONTROL_SCHEMA = "carnot-control/1"
FORMS_SCHEMA = "carnot-forms/1"
DIGITS = 12


class FileFormatError(ValidationError):
    def __init__(self, path: str, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path, self.line = path, line


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _load(path: str, schema: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(path, exc.lineno, exc.msg) from None
    if not isinstance(obj, dict):
        raise FileFormatError(path, 1, "top level must be an object")
    if obj.get("schema") != schema:
        raise FileFormatError(path, _line_of(text, "schema"),
                              f"expected schema {schema!r}, got {obj.get('schema')!r}")
    return obj, text


def _field(obj, text, path, key, kind=None):
    if key not in obj:
        raise FileFormatError(path, 1, f"missing field {key!r}")
    val = obj[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool)):
        raise FileFormatError(path, _line_of(text, key), f"field {key!r} must be an integer")
    return val


def _array(obj, text, path, key, shape):
    raw = _field(obj, text, path, key)
    try:
        a = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise FileFormatError(path, _line_of(text, key), f"field {key!r} must be numeric") from None
    try:
        return a.reshape(shape)
    except ValueError:
        raise FileFormatError(path, _line_of(text, key),
                              f"field {key!r} has {a.size} entries, expected shape {shape}") from None


def read_structure(path: str) -> CarnotStructure:
    obj, text = _load(path, STRUCTURE_SCHEMA)
    d = _field(obj, text, path, "d", int)
    l = _field(obj, text, path, "l", int)
    if d < 1 or l < 1:
        raise FileFormatError(path, _line_of(text, "d"), "d and l must be positive")
    m = _array(obj, text, path, "matrices", (l, d, d))
    try:
        return CarnotStructure.from_list(m)
    except ValidationError as exc:
        raise FileFormatError(path, _line_of(text, "matrices"), str(exc)) from None


def structure_to_dict(W: CarnotStructure) -> dict:
    return {"schema": STRUCTURE_SCHEMA, "d": W.d, "l": W.l,
            "matrices": [A.ravel().tolist() for A in W.matrices]}


def write_json(path: str, obj: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def read_control(path: str) -> Control:
    obj, text = _load(path, CONTROL_SCHEMA)
    L = _field(obj, text, path, "L", int)
    mean = _array(obj, text, path, "mean", (-1,))
    co = _array(obj, text, path, "coeffs", (L, 2, mean.shape[0]))
    return Control(mean, co[:, 0], co[:, 1])


def control_to_dict(u: Control) -> dict:
    return {"schema": CONTROL_SCHEMA, **u.to_dict()}


def read_forms(path: str):
    obj, text = _load(path, FORMS_SCHEMA)
    N = _field(obj, text, path, "N", int)
    forms = _array(obj, text, path, "forms", (-1, N, N))
    if forms.shape[0] not in (1, 2):
        raise FileFormatError(path, _line_of(text, "forms"), "expected one or two forms")
    if np.abs(forms - np.transpose(forms, (0, 2, 1))).max() > 1e-12:
        raise FileFormatError(path, _line_of(text, "forms"), "forms must be symmetric")
    q1 = forms[0]
    q2 = forms[1] if len(forms) > 1 else np.zeros((N, N))
    return q1, q2


# --- CSV -----------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"  # avoid "-0"
        return f"{x:.{DIGITS}g}"
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()
