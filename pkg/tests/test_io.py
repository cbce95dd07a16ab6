import json

import numpy as np
import pytest

from carnot_paths.endpoint import Control
from carnot_paths.io import (CONTROL_SCHEMA, FORMS_SCHEMA, FileFormatError, control_to_dict, csv_text,
                             fmt, read_control, read_forms, read_structure, structure_to_dict,
                             write_json)

from conftest import random_structure


def test_structure_round_trip(tmp_path, rng):
    W = random_structure(rng, 5, 3)
    f = tmp_path / "w.json"
    write_json(f, structure_to_dict(W))
    V = read_structure(str(f))
    assert V.d == 5 and V.l == 3 and np.allclose(V.matrices, W.matrices, atol=0)


def test_control_round_trip(tmp_path, rng):
    u = Control.random(rng, 3, 4, zero_mean=False)
    f = tmp_path / "u.json"
    write_json(f, control_to_dict(u))
    v = read_control(str(f))
    assert np.array_equal(u.vector(), v.vector()) and np.array_equal(u.mean, v.mean)


def test_forms(tmp_path):
    f = tmp_path / "q.json"
    write_json(f, {"schema": FORMS_SCHEMA, "N": 3, "forms": [np.eye(3).tolist(), np.diag([1, -1, 0]).tolist()]})
    q1, q2 = read_forms(str(f))
    assert np.array_equal(q2, np.diag([1.0, -1.0, 0.0]))
    write_json(f, {"schema": FORMS_SCHEMA, "N": 3, "forms": [np.eye(3).tolist()]})
    assert not np.any(read_forms(str(f))[1])
    write_json(f, {"schema": FORMS_SCHEMA, "N": 2, "forms": [[[0, 1], [2, 0]]]})
    with pytest.raises(FileFormatError, match="symmetric"):
        read_forms(str(f))
    write_json(f, {"schema": FORMS_SCHEMA, "N": 2, "forms": [[[0, 1], [1, 0]]] * 3})
    with pytest.raises(FileFormatError, match="one or two"):
        read_forms(str(f))


@pytest.mark.parametrize("obj,line,msg", [
    ({"schema": "other/1", "d": 2, "l": 1, "matrices": [[0, 1, -1, 0]]}, 2, "schema"),
    ({"schema": "carnot-structure/1", "d": 2.5, "l": 1, "matrices": [[0, 1, -1, 0]]}, 3, "integer"),
    ({"schema": "carnot-structure/1", "d": 2, "l": 1, "matrices": [[0, 1, -1]]}, 5, "entries"),
    ({"schema": "carnot-structure/1", "d": 2, "l": 1, "matrices": [["a", 1, -1, 0]]}, 5, "numeric"),
    ({"schema": "carnot-structure/1", "d": 2, "l": 1}, 1, "missing"),
])
def test_structure_errors_carry_line_numbers(tmp_path, obj, line, msg):
    f = tmp_path / "w.json"
    f.write_text(json.dumps(obj, indent=1))
    with pytest.raises(FileFormatError, match=msg) as ei:
        read_structure(str(f))
    assert ei.value.line == line and str(ei.value).startswith(f"{f}:{line}:")


def test_control_schema_checked(tmp_path):
    f = tmp_path / "u.json"
    f.write_text(json.dumps({"schema": "carnot-structure/1"}))
    with pytest.raises(FileFormatError):
        read_control(str(f))
    f.write_text(json.dumps({"schema": CONTROL_SCHEMA, "L": 1, "mean": [0, 0], "coeffs": [1, 2, 3]}))
    with pytest.raises(FileFormatError):
        read_control(str(f))


def test_fmt_and_csv():
    assert fmt(-0.0) == "0" and fmt(True) == "true" and fmt(np.int64(3)) == "3"
    assert fmt(1 / 3) == "0.333333333333"
    assert csv_text(["a", "b"], [(1, 0.5), ("x,y", 2.0)]) == 'a,b\n1,0.5\n"x,y",2\n'
