import json
import subprocess
import sys

import pytest

from conftest import fixture_path
from nzgeom import bloch, cli, zlinalg


def nz(*args):
    return cli.run([str(a) for a in args])


def test_volume(capsys):
    code, rep = nz("volume", "fig8")
    assert code == 0
    assert "2.0298832128" in capsys.readouterr().out


def test_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "nzgeom.cli", "volume", fixture_path("whitehead")], capture_output=True, text=True)
    assert out.returncode == 0 and "3.6638623767" in out.stdout


def test_validate_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.tri"
    bad.write_text(fixture_path("fig8").read_text().replace("perm 1230", "perm 1233", 1))
    code, _ = nz("validate", bad)
    assert code == 2
    assert "permutation" in capsys.readouterr().err


def test_missing_file():
    assert nz("validate", "/nonexistent.tri")[0] == 2


def test_bad_arguments():
    assert nz("frobnicate")[0] == 2
    assert nz("zeta", "--disc", "-12")[0] == 2


def test_solver_failure_exit_code():
    assert nz("volume", "fig8", "--slope", "1,0")[0] == 1


def test_fill_sweep_monotone():
    code, rep = nz("fill", "fig8", "--sweep", "5..9", "--prec", "15")
    assert code == 0
    vols = [it["values"]["volume"] for it in rep.items if it["name"].startswith("slope")]
    assert len(vols) == 5 and vols == sorted(vols)


@pytest.mark.parametrize(
    "args",
    [
        ("validate", "sister"),
        ("matrices", "whitehead"),
        ("complex", "fig8"),
        ("cvol", "fig8"),
        ("potential", "fig8", "--grid", "0.05,3", "--prec", "15"),
        ("nahm", "--A", "2", "--b", "0", "--order", "10"),
        ("nahm-solve", "--A", "4,2;2,2"),
        ("zeta", "--disc", "-3", "--terms", "10000"),
        ("dilog", "--fn", "D", "0.5+0.8660254037844386j"),
        ("bloch", "verify", "fig8"),
        ("bloch", "element", "whitehead"),
    ],
)
def test_commands_succeed(args):
    assert nz(*args)[0] == 0


def test_nahm_odd_diagonal_fails():
    code, rep = nz("nahm-solve", "--A", "1")
    assert code == 1


def test_matrix_commands(tmp_path, capsys):
    f = tmp_path / "m.txt"
    f.write_text(zlinalg.format_matrix(zlinalg.int_matrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])))
    code, rep = nz("matrix", "snf", f)
    assert code == 0
    assert "    2 0 0\n    0 6 0\n    0 0 12" in capsys.readouterr().out
    f.write_text(zlinalg.format_matrix(zlinalg.int_matrix([[1, 0, 0, 1], [0, 0, 1, 0]])))
    assert nz("matrix", "halfsymp", f)[0] == 1


def test_report_check_round_trip(tmp_path):
    path = tmp_path / "r.json"
    assert nz("volume", "fig8", "--report", path)[0] == 0
    assert json.loads(path.read_text())["items"][0]["pass"]
    code, rep = nz("check", path)
    assert code == 0 and rep.ok
    data = json.loads(path.read_text())
    data["items"][0]["values"]["volume"] = "2.5"
    path.write_text(json.dumps(data))
    assert nz("check", path)[0] == 1


def test_bloch_move_round_trip(tmp_path):
    out = tmp_path / "moved.pair"
    code, rep = nz("bloch", "move", "fig8", "--rotate", "1,1", "--output", out)
    assert code == 0
    moved = cli.load_pair(out.read_text())
    code2, rep2 = nz("bloch", "regulator", out)
    assert code2 == 0
    orig = nz("bloch", "regulator", "fig8")[1]
    a = complex(rep2.items[0]["values"]["value"].replace("i", "j"))
    b = complex(orig.items[0]["values"]["value"].replace("i", "j"))
    assert bloch.torsion_difference(a, b, tol=1e-8) is not None
    back = out.with_suffix(".back")
    assert nz("bloch", "move", out, "--stabilize", "--output", back)[0] == 0
    assert cli.load_pair(back.read_text()).N == moved.N + 1


def test_pair_format_errors(tmp_path):
    f = tmp_path / "p.pair"
    f.write_text("2 4\n1 0 1 0\n0 1 0 0\nSHAPES\nz 0.5\n")
    assert nz("bloch", "verify", f)[0] == 2
