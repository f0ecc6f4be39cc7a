import subprocess
import sys

import numpy as np
import pytest

from totalcurv.cli import main
from totalcurv.formats import read_csv_header, read_obj, read_ply


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    values = dict(line.split("=", 1) for line in out.splitlines() if "=" in line)
    return code, values, err


@pytest.fixture
def sphere_obj(tmp_path, capsys):
    path = tmp_path / "s.obj"
    assert run(capsys, "gen", "sphere", "--subdiv", 3, "--out", path)[0] == 0
    return path


def test_gen(tmp_path, capsys):
    code, v, err = run(capsys, "gen", "torus", "--R", 2, "--r", 1, "--grid", 9,
                       "--out", tmp_path / "t.obj")
    assert code == 0 and v["faces"] == "162"
    assert read_obj(tmp_path / "t.obj").n_faces == 162
    assert (tmp_path / "t.obj.surface.json").exists()
    assert '"grid": 9' in err
    code, v, _ = run(capsys, "gen", "sphere", "--subdiv", 4, "--radius", 1,
                     "--out", tmp_path / "s.obj")
    assert v["faces"] == "5120"
    code, v, _ = run(capsys, "gen", "knot", "--kind", "fig8", "--nu", 64, "--nv", 8,
                     "--out", tmp_path / "k.obj")
    assert code == 0 and v["faces"] == str(2 * 64 * 8)


def test_gen_usage_and_runtime_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["gen", "torus", "--R", "2", "--r", "1", "--out", str(tmp_path / "t.obj")])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err
    assert run(capsys, "gen", "torus", "--R", 1, "--r", 2, "--grid", 9,
               "--out", tmp_path / "t.obj")[0] == 3


def test_sample_deterministic(tmp_path, capsys):
    run(capsys, "gen", "torus", "--grid", 40, "--out", tmp_path / "t.obj")
    a, b = tmp_path / "a.ply", tmp_path / "b.ply"
    code, v, _ = run(capsys, "sample", tmp_path / "t.obj", "--count", 500, "--out", a)
    assert code == 0 and 450 <= int(v["points"]) <= 550
    run(capsys, "sample", tmp_path / "t.obj", "--count", 500, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    code, v, _ = run(capsys, "sample", tmp_path / "t.obj", "--mode", "nonuniform",
                     "--count", 300, "--oversample", 2.0, "--out", tmp_path / "n.xyz")
    assert code == 0 and v["points"] == "300"


def test_curvature_mesh_analytic_sphere(tmp_path, capsys, sphere_obj):
    csv = tmp_path / "k.csv"
    code, v, _ = run(capsys, "curvature", "mesh", sphere_obj, "--normals", "analytic",
                     "--csv", csv, "--ply", tmp_path / "k.ply")
    assert code == 0
    header, data = read_csv_header(csv)
    assert header == ["id", "kappa", "area", "gt_kappa"]
    assert np.sqrt(np.mean((data[:, 1] - 2 * data[:, 2]) ** 2)) < 1e-6
    ply = read_ply(tmp_path / "k.ply")
    assert ply.quality is not None and ply.colors is not None and len(ply.faces) == 1280
    code, v, _ = run(capsys, "eval", "rmse", csv, csv, "--est-column", "kappa",
                     "--gt-column", "gt_kappa")
    assert code == 0 and float(v["rmse"]) < 1e-6


def test_curvature_mesh_vertex_csv(tmp_path, capsys, sphere_obj):
    code, _, _ = run(capsys, "curvature", "mesh", sphere_obj, "--per", "vertex",
                     "--csv", tmp_path / "v.csv")
    header, data = read_csv_header(tmp_path / "v.csv")
    assert header[:2] == ["id", "density"] and len(data) == 642
    assert run(capsys, "curvature", "mesh", sphere_obj, "--normals",
               tmp_path / "missing.ply")[0] == 3


def test_curvature_pcd(tmp_path, capsys):
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.random((300, 2)), np.zeros(300)])
    nrm = np.tile([0.0, 0.0, 1.0], (300, 1))
    cloud = tmp_path / "plane.xyz"
    np.savetxt(cloud, np.hstack([pts, nrm]))
    code, v, err = run(capsys, "curvature", "pcd", cloud, "--k", 10, "--normals", "file",
                       "--ply", tmp_path / "q.ply", "--csv", tmp_path / "q.csv")
    assert code == 0 and "failures=0" in err
    assert np.abs(read_ply(tmp_path / "q.ply").quality).max() < 1e-9
    assert run(capsys, "curvature", "pcd", cloud, "--k", 2)[0] == 2
    np.savetxt(tmp_path / "bare.xyz", pts)
    assert run(capsys, "curvature", "pcd", tmp_path / "bare.xyz", "--normals", "file")[0] == 2


def test_decimate(tmp_path, capsys, sphere_obj):
    out = tmp_path / "d.obj"
    code, v, _ = run(capsys, "decimate", sphere_obj, "--target-faces", 320, "--out", out)
    assert code == 0 and int(v["faces"]) <= 320
    code, v, _ = run(capsys, "decimate", sphere_obj, "--method", "edge-midpoint",
                     "--target-faces", 320, "--curvature-weight", "off", "--out", out)
    assert code == 0 and int(v["faces"]) <= 320
    code, v, _ = run(capsys, "decimate", sphere_obj, "--target-faces", 5000, "--out", out)
    assert code == 0 and v["faces"] == "1280" and v["collapses"] == "0"
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0\n")
    assert run(capsys, "decimate", bad, "--target-faces", 10, "--out", out)[0] == 2


def test_decimate_unreachable_writes_best_effort(tmp_path, capsys):
    tet = tmp_path / "tet.obj"
    tet.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 5 5 5\nv 6 5 5\nv 5 6 5\nv 5 5 6\n"
                   "f 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\nf 5 7 6\nf 5 6 8\nf 5 8 7\nf 6 7 8\n")
    code, v, err = run(capsys, "decimate", tet, "--target-faces", 4, "--out", tmp_path / "o.obj")
    assert code == 3 and v["target_reached"] == "False"
    assert read_obj(tmp_path / "o.obj").n_faces == 8


def test_eval(tmp_path, capsys, sphere_obj):
    a = tmp_path / "a.csv"
    a.write_text("id,v\n0,1\n1,2\n")
    b = tmp_path / "b.csv"
    b.write_text("id,v\n0,1\n")
    assert run(capsys, "eval", "rmse", a, a)[1]["rmse"] == "0"
    assert run(capsys, "eval", "rmse", a, b)[0] == 2
    code, v, _ = run(capsys, "eval", "hausdorff", sphere_obj, sphere_obj, "--samples", 2000)
    assert float(v["rms"]) < 1e-12 and float(v["max"]) < 1e-12
    moved = tmp_path / "m.obj"
    mesh = read_obj(sphere_obj)
    from totalcurv.formats import write_obj
    from totalcurv.geometry import TriangleMesh
    write_obj(moved, TriangleMesh(mesh.vertices + [0, 0, 0.05], mesh.faces))
    code, v, _ = run(capsys, "eval", "hausdorff", sphere_obj, moved, "--samples", 5000)
    assert float(v["max"]) == pytest.approx(0.05, abs=5e-3)
    assert "rms_normalized" in v and "max_normalized" in v


def test_repro_table3(tmp_path, capsys):
    code, v, _ = run(capsys, "repro", "table3", "--out-dir", tmp_path)
    assert code == 0
    assert all(float(v[f"sphere_s{s}_rmse_per_triangle"]) < 1e-9 for s in (4, 5, 6))
    t = [float(v[f"torus_{n}x{n}_rmse_per_triangle"]) for n in (9, 18, 36)]
    assert t[0] > t[1] > t[2]
    assert (tmp_path / "table3.md").read_text().startswith("| row |")


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "totalcurv", "gen", "sphere", "--subdiv", "1",
                          "--out", str(tmp_path / "s.obj"), "--threads", "4"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "faces=80" in res.stdout
    assert res.stderr.startswith("config ")
