import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import M
from dbmat.cli import main, run
from dbmat.modelfile import decode_matrix

MODEL = str(Path(__file__).resolve().parent.parent / "models" / "running.json")


def _json(argv):
    code, text = run(argv)
    return code, json.loads(text)


def test_db_construct_running():
    code, rep = _json(["db-construct", "-m", MODEL, "--pair", "pair", "--assoc", "S",
                       "--P", "0", "--Q", "0"])
    assert code == 0 and rep["verdict"]["member"]
    assert decode_matrix(rep["result"]["A"], True) == M([["z", 1], [-1, 0]])
    assert decode_matrix(rep["result"]["Phi"], True) == M([["I/(z + I)"]])


def test_db_construct_Q_literal():
    code, rep = _json(["db-construct", "-m", MODEL, "--pair", "pair", "--assoc", "S",
                       "--Q", "3"])
    assert code == 0
    assert decode_matrix(rep["result"]["A"], True) == M([["z", 1], ["-3*z - 1", -3]])


def test_charfn_certified():
    code, rep = _json(["charfn", "--seed", "7", "--dim", "4", "--n", "1"])
    assert code == 0 and rep["verdict"]["member"]
    assert rep["config"]["seed"] == 7


def test_verify_identity_all_pass():
    code, rep = _json(["verify", "-m", MODEL, "I2"])
    assert code == 0
    assert rep["verdict"]["member"]

    def leaves(v):
        kids = v.get("children", [])
        return [v] if not kids else [x for c in kids for x in leaves(c)]
    assert all(leaf["member"] for leaf in leaves(rep["verdict"]))


def test_verify_running():
    code, rep = _json(["verify", "-m", MODEL, "A"])
    assert code == 0


def test_uniq():
    code, rep = _json(["uniq", "-m", MODEL, "A", "B"])
    assert code == 0
    assert decode_matrix(rep["result"]["L"], True) == M([[-3]])


@pytest.mark.parametrize("argv", [
    ["classify", "F"], ["pg", "A"], ["factor", "F"], ["local", "F", "--point", "2"],
    ["db-check", "A"], ["db-decompose", "A"], ["kernel", "--pair", "pair", "--w", "1j"],
    ["gram", "--pair", "pair"], ["inner-product", "--pair", "pair", "--f", "f", "--g", "g"],
    ["assoc-check", "--pair", "pair", "--assoc", "S2"], ["cofactor", "F", "F"],
])
def test_commands_run(argv):
    code, rep = _json(argv[:1] + ["-m", MODEL] + argv[1:])
    assert code in (0, 1)
    assert "verdict" in rep and "result" in rep


def test_inner_product_value():
    code, rep = _json(["inner-product", "-m", MODEL, "--pair", "pair", "--f", "f", "--g", "g"])
    # <2, 1> = pi * 2
    assert code == 0
    assert rep["result"]["value"] == pytest.approx([2 * 3.141592653589793, 0.0])


def test_failure_exit_code():
    code, rep = _json(["db-check", "-m", MODEL, "F", "--n", "1"])
    assert code == 1 and not rep["verdict"]["member"]


def test_errors_exit_2():
    code, text = run(["verify", "-m", MODEL, "nosuch"])
    assert code == 2 and "unknown object" in json.loads(text)["error"]
    # wrong object type
    code, text = run(["verify", "-m", MODEL, "pair"])
    assert code == 2


def test_determinism():
    argv = ["charfn", "--seed", "7", "--dim", "6", "--n", "2"]
    assert run(argv) == run(argv)


def test_timing_opt_in():
    _, rep = _json(["charfn", "--seed", "1", "--dim", "2", "--n", "1"])
    assert "timing" not in rep
    _, rep = _json(["charfn", "--seed", "1", "--dim", "2", "--n", "1", "--timing"])
    assert "timing" in rep


def test_text_format_and_out(tmp_path):
    out = tmp_path / "r.txt"
    code = main(["db-check", "A", "-m", MODEL, "--format", "text", "--out", str(out)])
    assert code == 0
    assert "PASS" in out.read_text()


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "dbmat", "verify", "nosuch", "-m", MODEL],
                       capture_output=True, text=True)
    assert p.returncode == 2 and "error" in json.loads(p.stderr)
