import contextlib
import io
import json
import subprocess
import sys

import pytest

from nilpoly import cli


def call(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.run(list(argv))
    out = buf.getvalue().strip()
    return code, (json.loads(out) if out else None)


def test_gp_eval():
    assert call("gp", "eval", "floor(sqrt(2)*x1)", "--at", "5") == (0, {"value": 7})


def test_syntax_error_has_position():
    code, out = call("gp", "eval", "floor(sqrt(2)*x1", "--at", "5")
    assert code == 2
    assert out["error"] == "syntax" and out["position"] == 16


def test_admissibility_exit_codes():
    assert call("gp", "admissible", "floor(x1+1/2)") == (0, {"admissible": True})
    assert call("gp", "admissible", "floor(sqrt(2)*x1)")[0] == 1


def test_group_commands():
    code, out = call("group", "lcs", "--group", "heisenberg")
    assert code == 0 and out["length"] == 2
    code, out = call("group", "index", "--group", "heisenberg", "--gens", "[[2,0,0],[0,1,0]]")
    assert (code, out) == (0, {"finite": True, "index": 4})
    code, out = call("group", "hirsch", "--group", "heisenberg", "--gens", "[[1,0,0],[0,1,0]]")
    assert code == 0 and out["hirsch_length"] == 3


def test_not_nilpotent_is_invalid_input():
    code, out = call("group", "lcs", "--group", "dihedral", "--class-cap", "3")
    assert code == 2 and out["error"] == "not-nilpotent"


def test_hindman_search():
    code, out = call("ip", "hindman", "--rule", "parity", "--ground", "4", "--chain", "2")
    assert code == 0 and out["found"] and out["chain"] == [3, 12]


def test_cap_exceeded_exit_code():
    code, out = call("ip", "hindman", "--rule", "parity", "--ground", "70", "--chain", "2")
    assert code == 3 and out["error"] == "cap-exceeded"


def test_fvip_certificate_output():
    code, out = call("gp", "fvip", "x1^2", "--depth", "4")
    assert code == 0 and out["found"]
    assert out["certificate"]["filtration"]["degree"] == 2


def test_recur_check_rotation():
    code, out = call("recur", "check", "--system", "rotation:4", "--A", "[0, 1]", "--polys", '[["x1"]]',
                     "--ipsys", "powers:4")
    assert code == 0 and out["rechecked"]
    assert set(out["measures"].values()) <= {"0", "1/4", "1/2"}


def test_schema_and_unknown_schema():
    code, out = call("--schema", "certificate")
    assert code == 0 and "subchain" in out["required"]
    code, out = call("--schema", "nonsense")
    assert code == 2 and out["error"] == "unknown-schema"


def test_bad_arguments_exit_invalid(capsys):
    assert cli.run(["gp", "eval"]) == 2
    assert cli.run([]) == 2


def test_jobs_flag_does_not_change_output():
    argv = ["ip", "milliken", "--rule", "max_mod", "--ground", "6", "--chain", "2", "--arity", "2"]
    base = call(*argv)
    assert call("--jobs", "2", *argv) == base
    assert call(*argv, "--jobs", "2") == base


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nilpoly", "gp", "eval", "x1^2+x2", "--at", "3,4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"value": 13}
