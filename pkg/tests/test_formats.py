import numpy as np
import pytest

from totalcurv.exceptions import EmptyInput, ParseError
from totalcurv.formats import (
    COLOR_TABLE, PlyPayload, UnsupportedElement, colorize, read_csv_header, read_obj,
    read_ply, read_xyz, write_csv, write_obj, write_ply, write_xyz,
)
from totalcurv.geometry import PointCloud, TriangleMesh
from totalcurv.shapes import icosphere


def test_obj_single_triangle_round_trip(tmp_path):
    m = TriangleMesh(np.array([[0.1, 0.2, 0.3], [1.0 / 3, 2, 3], [7, 8, 9.123456789]]),
                     [[0, 1, 2]])
    write_obj(tmp_path / "t.obj", m)
    r = read_obj(tmp_path / "t.obj")
    assert np.array_equal(r.faces, m.faces)
    assert np.allclose(r.vertices, m.vertices, rtol=1e-8, atol=1e-7)
    assert r.vertex_normals is None


def test_obj_round_trip_with_normals(tmp_path):
    m = icosphere(2)
    write_obj(tmp_path / "s.obj", m, comments=["generated"])
    r = read_obj(tmp_path / "s.obj")
    assert np.array_equal(r.faces, m.faces)
    assert np.abs(r.vertices - m.vertices).max() < 1e-8
    assert np.abs(r.vertex_normals - m.vertex_normals).max() < 1e-8


def test_obj_grammar(tmp_path):
    p = tmp_path / "q.obj"
    p.write_text("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\n"
                 "vt 0 0\ng grp\nf 1//1 2//1 3//1 4//1\n")
    m = read_obj(p)
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]
    assert np.allclose(m.vertex_normals, [0, 0, 1])
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1 -2/2 -1/3\n")
    assert read_obj(p).faces.tolist() == [[0, 1, 2]]


@pytest.mark.parametrize("text, line", [
    ("v 0 0 0\nv 1 x 0\n", 2),
    ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", 4),
    ("v 0 0 0\nv 1 0 0\nf 1 2\n", 3),
])
def test_obj_parse_errors_carry_line(tmp_path, text, line):
    p = tmp_path / "bad.obj"
    p.write_text(text)
    with pytest.raises(ParseError) as info:
        read_obj(p)
    assert info.value.line == line


@pytest.mark.parametrize("binary", [True, False])
def test_ply_cloud_round_trip(tmp_path, binary):
    rng = np.random.default_rng(0)
    n = rng.normal(size=(100, 3))
    payload = PlyPayload(rng.normal(size=(100, 3)), n / np.linalg.norm(n, axis=1, keepdims=True),
                         rng.normal(size=100), binary=binary)
    write_ply(tmp_path / "c.ply", payload, comments=["seed 0"])
    r = read_ply(tmp_path / "c.ply")
    assert r.binary == binary
    for name in ("positions", "normals", "quality"):
        assert np.array_equal(getattr(r, name), getattr(payload, name))
    assert r.faces is None and r.colors is None


@pytest.mark.parametrize("binary", [True, False])
def test_ply_colored_mesh_round_trip(tmp_path, binary):
    m = icosphere(1)
    colors = np.random.default_rng(1).integers(0, 256, (m.n_vertices, 3)).astype(np.uint8)
    write_ply(tmp_path / "m.ply", PlyPayload(m.vertices, colors=colors, faces=m.faces,
                                             binary=binary))
    r = read_ply(tmp_path / "m.ply")
    assert np.array_equal(r.colors, colors) and np.array_equal(r.faces, m.faces)
    assert r.to_mesh().n_faces == m.n_faces


def test_ply_empty_vertex_element(tmp_path):
    p = tmp_path / "e.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\n"
                 "property float y\nproperty float z\nend_header\n")
    r = read_ply(p)
    assert r.positions.shape == (0, 3)


def test_ply_foreign_binary_types_and_unknown_element(tmp_path):
    p = tmp_path / "f.ply"
    header = ("ply\nformat binary_little_endian 1.0\ncomment x\nelement vertex 3\n"
              "property float x\nproperty float y\nproperty float z\n"
              "element face 1\nproperty list uchar uint vertex_index\n"
              "element edge 1\nproperty int vertex1\nproperty int vertex2\nend_header\n")
    body = (np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], "<f4").tobytes()
            + bytes([3]) + np.array([0, 1, 2], "<u4").tobytes()
            + np.array([0, 1], "<i4").tobytes())
    p.write_bytes(header.encode() + body)
    with pytest.warns(UnsupportedElement):
        r = read_ply(p)
    assert r.faces.tolist() == [[0, 1, 2]]
    assert np.allclose(r.positions[1], [1, 0, 0])


@pytest.mark.parametrize("text", [
    "plx\n",
    "ply\nformat binary_big_endian 1.0\nend_header\n",
    "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
    "property float z\nend_header\n0 0 0\n",
    "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
    "property float z\nelement face 1\nproperty list uchar int vertex_indices\n"
    "end_header\n0 0 0\n3 0 1 2\n",
])
def test_ply_malformed(tmp_path, text):
    p = tmp_path / "bad.ply"
    p.write_text(text)
    with pytest.raises(ParseError):
        read_ply(p)


def test_ply_truncated_binary(tmp_path):
    p = tmp_path / "t.ply"
    write_ply(p, PlyPayload(np.ones((10, 3))))
    p.write_bytes(p.read_bytes()[:-5])
    with pytest.raises(ParseError):
        read_ply(p)


def test_xyz_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(20, 3))
    n = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    write_xyz(tmp_path / "a.xyz", PointCloud(pts, n))
    r = read_xyz(tmp_path / "a.xyz")
    assert np.array_equal(r.points, pts) and np.allclose(r.normals, n)
    write_xyz(tmp_path / "b.xyz", PointCloud(pts))
    assert read_xyz(tmp_path / "b.xyz").normals is None


def test_colorize():
    assert np.all(colorize([3.0] * 5) == COLOR_TABLE[128])
    c = colorize([0.0, 5.0, 10.0])
    assert np.array_equal(c[0], COLOR_TABLE[0]) and np.array_equal(c[2], COLOR_TABLE[255])
    assert np.array_equal(c[1], COLOR_TABLE[127])
    assert COLOR_TABLE[0].tolist() == [0, 0, 255] and COLOR_TABLE[255].tolist() == [255, 0, 0]
    clipped = colorize(np.arange(101.0), 10, 90)
    assert np.all(clipped[:11] == COLOR_TABLE[0]) and np.all(clipped[90:] == COLOR_TABLE[255])
    with pytest.raises(EmptyInput):
        colorize([])
    with pytest.raises(ValueError):
        colorize([1, 2], 50, 50)


def test_csv(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, ["id", "value"], [(2, 1.0 / 3), (0, 1234567.0), (1, -2.5e-9)])
    assert p.read_text() == "id,value\n0,1.23457e+06\n1,-2.5e-09\n2,0.333333\n"
    header, data = read_csv_header(p)
    assert header == ["id", "value"] and data[:, 0].tolist() == [0, 1, 2]
    write_csv(p, ["id", "value"], [])
    assert p.read_text() == "id,value\n"
    assert read_csv_header(p)[1].shape == (0, 2)
