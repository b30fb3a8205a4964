import json
from pathlib import Path

import numpy as np
import pytest

from conftest import M
from dbmat.debranges import DeBrangesPair, K0Operator
from dbmat.herglotz import HerglotzParams
from dbmat.modelfile import ModelError, dumps, encode_value, parse, parse_text, serialize
from dbmat.ratmat import GaussianRational as G

RUNNING = Path(__file__).resolve().parent.parent / "models" / "running.json"


def test_round_trip_byte_identical(tmp_path):
    text = RUNNING.read_text()
    mf = parse(RUNNING)
    out = tmp_path / "again.json"
    assert serialize(mf, out) == text
    assert out.read_text() == text


def test_running_encoding():
    enc = encode_value(M([["z", 1], [-1, 0]]))
    assert enc[0][0] == {"num": ["0", "1"], "den": ["1"]}
    assert enc[0][1] == {"num": ["1"], "den": ["1"]}
    assert enc[1][0] == {"num": ["-1"], "den": ["1"]}
    assert enc[1][1] == {"num": [], "den": ["1"]}


def test_objects_decode():
    mf = parse(RUNNING)
    assert mf.mode == "exact"
    assert isinstance(mf["pair"], DeBrangesPair)
    kind, n, A = mf["A"]
    assert kind == "db_matrix" and n == 1 and A == M([["z", 1], [-1, 0]])
    with pytest.raises(KeyError, match="unknown object"):
        mf["nosuch"]


def test_complex_and_rational_scalars():
    text = json.dumps({"mode": "exact", "objects": {"F": {
        "type": "rational_matrix", "entries": [[{"num": [["1/2", "-3"]], "den": ["2", "1"]}]]}}})
    F = parse_text(text)["F"]
    assert F == M([["(1/2 - 3*I)/(z + 2)"]])
    assert json.loads(dumps({"F": F}))["objects"]["F"]["entries"][0][0]["num"] == [["1/2", "-3"]]


def test_zero_denominator():
    text = json.dumps({"mode": "exact", "objects": {"F": {
        "type": "rational_matrix", "entries": [[{"num": ["1"], "den": ["0"]}]]}}})
    with pytest.raises(ModelError, match="zero denominator"):
        parse_text(text)


def test_unknown_field_has_position():
    text = '{\n  "mode": "exact",\n  "objects": {\n    "F": {"type": "rational_matrix",\n' \
           '      "entries": [["1"]], "colour": 3}\n  }\n}\n'
    with pytest.raises(ModelError, match=r"unknown field 'colour'.*line 4") as err:
        parse_text(text)
    assert err.value.line == 4


def test_unknown_top_level_field():
    with pytest.raises(ModelError, match="unknown field 'extra'.*line"):
        parse_text('{"mode": "exact",\n "extra": 1}')


def test_syntax_error_position():
    with pytest.raises(ModelError) as err:
        parse_text('{"mode": "exact",\n "objects": {,}}')
    assert err.value.line == 2 and err.value.col is not None


def test_float_in_exact_mode():
    text = json.dumps({"mode": "exact", "objects": {"F": {
        "type": "rational_matrix", "entries": [[0.5]]}}})
    with pytest.raises(ModelError, match="float literal"):
        parse_text(text)


def test_float_mode_round_trip():
    F = M([["1/(z + I)"]]).to_float()
    text = dumps({"F": F})
    assert json.loads(text)["mode"] == "float"
    assert parse_text(text)["F"].equals(F)
    assert dumps(parse_text(text)) == text


def test_herglotz_and_k0_round_trip():
    objs = {
        "h": HerglotzParams(M([[1]]), M([[2]]), M([["1/(z**2 + 1)"]])),
        "k": K0Operator.from_data([[G(0, 1), G(0)], [G(0), G(0, -1)]],
                                  [[G(1), G(0, 1)], [G(1), G(0, -1)]]),
    }
    text = dumps(objs, mode="exact")
    back = parse_text(text)
    assert back["h"].density == M([["1/(z**2 + 1)"]]) and back["h"].Q == M([[2]])
    assert np.allclose(back["k"].T, np.diag([1j, -1j]))
    assert dumps(back) == text


def test_db_matrix_size_checked():
    text = json.dumps({"mode": "exact", "objects": {"A": {
        "type": "db_matrix", "n": 2, "matrix": [["1", "0"], ["0", "1"]]}}})
    with pytest.raises(ModelError, match="must be 4x4"):
        parse_text(text)
