import io
import json
import subprocess
import sys

import pytest

from tpmkit.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_fk_all_table_layout():
    code, out, _ = call("fk", "--joints", "-111.24,244.70,246.92", "--all")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split()[:6] == ["NO.", "m", "n", "x", "y", "z"]
    assert len(lines) == 5
    assert lines[1].split()[3:6] == ["-80.3862", "66.7300", "307.2328"]
    assert lines[4].split()[3:6] == ["-80.3862", "66.7300", "-167.2328"]


def test_fk_csv_and_degrees():
    code, out, _ = call("fk", "--joints", "-111.24,244.70,246.92", "--format", "csv", "--degrees", "--branch", "1,-1")
    assert code == 0
    header, row = out.splitlines()
    assert header == "no,m,n,x,y,z,alpha_deg,beta_deg,status"
    assert row.split(",")[3:6] == ["194.7183", "66.7300", "78.1662"]


def test_fk_json():
    code, out, _ = call("fk", "--joints", "-111.24,244.70,246.92", "--format", "json")
    rec = json.loads(out)[0]
    assert code == 0 and rec["status"] == "ok" and rec["x"] == pytest.approx(-80.3862, abs=1e-4)


def test_fk_infeasible_exit_one():
    code, out, _ = call("fk", "--joints", "0,1000,0")
    assert code == 1 and "cos_out_of_range" in out


def test_ik_default_lists_feasible():
    code, out, _ = call("ik", "--pose", "-80.3862,66.73,307.2328")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["No.", "1", "2", "3", "4", "5", "6"]
    assert lines[5].split()[5] == "-111.2400"


def test_ik_all_reports_reasons():
    code, out, _ = call("ik", "--pose", "-80.3862,66.73,307.2328", "--all", "--format", "csv")
    rows = out.splitlines()[1:]
    assert code == 0 and len(rows) == 16
    statuses = [r.split(",")[-1] for r in rows]
    assert statuses.count("ok") == 6 and statuses.count("ordering_violation") == 2
    assert statuses.count("complex_discriminant") == 8


def test_ik_unreachable():
    code, out, _ = call("ik", "--pose", "-500,0,300")
    assert code == 1 and "no feasible" in out
    code, out, _ = call("ik", "--pose", "-500,0,300", "--branch", "1,1,1,1", "--format", "csv")
    assert code == 1 and "beta_cos_out_of_range" in out


def test_jac_and_rates():
    code, out, _ = call("jac", "--joints", "-111.24,244.70,246.92", "--rates", "0,0,0")
    assert code == 0
    assert "det(A)" in out and "det(B)" in out and "platform velocity: 0.0000, 0.0000, 0.0000" in out.replace("-0.0000", "0.0000")
    code, out, _ = call("jac", "--joints", "-111.24,244.70,246.92", "--format", "json")
    rec = json.loads(out)
    assert len(rec["A"]) == 3 and rec["B"][0][1] == 0.0


def test_singularity_with_pose():
    from tpmkit.kinematics import inverse
    from tpmkit.model import PlatformPose, StructuralParams

    pose = (-80.3862, 66.73, 307.2328)
    joints = inverse(PlatformPose(*pose), StructuralParams(), 1, 1, 1, 1).joints
    argv = ["singularity", "--joints", ",".join(map(repr, joints)), "--pose", ",".join(map(repr, pose))]
    code, out, _ = call(*argv, "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["kind"] == "parallel" and "rows12_dependent" in rec["parallel_cases"]
    # joints that do not close the loops with the pose are rejected
    code, _, err = call("singularity", "--joints", "0,120,0", "--pose", ",".join(map(repr, pose)))
    assert code == 1 and "infeasible" in err
    code, out, _ = call("singularity", "--joints", "-40,80,60", "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["kind"] == "mixed" and rec["serial_cases"] == ["u11_zero", "u22_zero"]


def test_singularity_text():
    code, out, _ = call("singularity", "--joints", "-111.24,244.70,246.92")
    assert code == 0 and out.startswith("kind: regular")


def test_topology():
    code, out, _ = call("topology")
    assert code == 0
    assert "F=3" in out and "kappa=1" in out and "[t3; r0]" in out
    code, out, _ = call("topology", "--format", "json")
    rec = json.loads(out)
    assert rec["xi"] == [3, 5] and rec["delta"] == [1, -1]


def test_workspace_empty_nominal_bounds_is_success(tmp_path):
    out_file = tmp_path / "ws.ply"
    code, out, _ = call("workspace", "--bounds", "x:-150:150", "y:-200:200", "z:380:550", "--res", "7,9,5", "--format", "ply", "--out", str(out_file))
    assert code == 0 and out == ""
    text = out_file.read_text().splitlines()
    assert text[:3] == ["ply", "format ascii 1.0", "element vertex 315"]


def test_workspace_projection_csv():
    code, out, _ = call("workspace", "--bounds", "z:0:360", "--pitch", "40", "--project", "YZ", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "y,z" and len(lines) > 1


def test_workspace_joint_range_none():
    code, out, _ = call("workspace", "--bounds", "z:0:360", "--pitch", "40", "--joint-range", "none")
    assert code == 0 and "inside:" in out


def test_surface_jointspace_text():
    code, out, _ = call("surface", "--kind", "serial", "--space", "jointspace", "--pitch", "40", "--factor", "u11")
    assert code == 0 and out.startswith("serial surface in jointspace:")


@pytest.mark.parametrize(
    "argv",
    [
        ["fk"],
        [],
        ["fk", "--joints", "1,2"],
        ["fk", "--joints", "1,2,3", "--branch", "1,2"],
        ["fk", "--joints", "1,2,3", "--format", "ply"],
        ["workspace", "--bounds", "q:0:1", "y:0:1", "z:0:1"],
        ["workspace", "--res", "1,2,2"],
        ["workspace", "--joint-range", "wide"],
        ["fk", "--joints", "1,2,3", "--params", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_two(argv, capsys):
    code, _, err = call(*argv)
    assert code == 2


def test_usage_error_names_flag():
    code, _, err = call("fk", "--joints", "1,2")
    assert code == 2 and "--joints" in err


def test_params_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"b": 90, "d": 45, "l1": 70, "l2": 160, "l3": 120, "l4": 0, "l6": 180, "l7": 0, "l8": 0, "l9": 300}))
    assert call("fk", "--joints", "-111.24,244.70,246.92", "--params", str(path)) == call(
        "fk", "--joints", "-111.24,244.70,246.92"
    )


def test_deterministic_output():
    argv = ["surface", "--kind", "parallel", "--space", "workspace", "--bounds", "z:0:360", "--pitch", "40", "--format", "csv"]
    assert call(*argv) == call(*argv)


def test_out_file_and_decimals(tmp_path):
    path = tmp_path / "fk.txt"
    code, out, _ = call("fk", "--joints", "-111.24,244.70,246.92", "--decimals", "2", "--out", str(path))
    assert code == 0 and out == ""
    assert "-80.39" in path.read_text()


def test_unwritable_out(tmp_path):
    code, _, err = call("topology", "--out", str(tmp_path / "no" / "such" / "file"))
    assert code == 1 and "error" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tpmkit", "topology"], capture_output=True, text=True)
    assert proc.returncode == 0 and "F=3" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "tpmkit", "fk"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr
