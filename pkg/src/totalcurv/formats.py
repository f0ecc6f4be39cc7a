"""File formats: OBJ meshes, PLY meshes and clouds, XYZ clouds, CSV tables,
and a diverging colour map for curvature renders."""

import csv
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyInput, ParseError
from .geometry import PointCloud, TriangleMesh


class UnsupportedElement(UserWarning):
    """A PLY element or property the reader does not understand; it is skipped."""


# ---------------------------------------------------------------- OBJ

def write_obj(path, mesh, comments=()):
    """Write vertices, optional vertex normals and faces (9 significant digits)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        if mesh.vertex_normals is not None:
            for x, y, z in mesh.vertex_normals:
                fh.write(f"vn {x:.9g} {y:.9g} {z:.9g}\n")
            for a, b, c in mesh.faces + 1:
                fh.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")
        else:
            for a, b, c in mesh.faces + 1:
                fh.write(f"f {a} {b} {c}\n")


def _obj_index(token, count, lineno):
    try:
        i = int(token)
    except ValueError:
        raise ParseError(f"bad index {token!r}", lineno) from None
    if i < 0:
        i += count + 1  # relative indexing
    if not 1 <= i <= count:
        raise ParseError(f"index {token} out of range (have {count})", lineno)
    return i - 1


def read_obj(path):
    """Read ``v``/``vn``/``f`` records; polygons are fan-triangulated.

    Vertex normals are attached when every face corner references one, in
    which case each vertex takes the normal of its last reference.
    Other record types are ignored.

    Raises
    ------
    ParseError
        Malformed records, with the offending line number.
    """
    verts, vnormals, faces, corner_normals = [], [], [], []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            tag, args = parts[0], parts[1:]
            if tag in ("v", "vn"):
                if len(args) < 3:
                    raise ParseError(f"{tag} needs 3 coordinates", lineno)
                try:
                    xyz = [float(a) for a in args[:3]]
                except ValueError:
                    raise ParseError(f"bad number in {tag} record", lineno) from None
                (verts if tag == "v" else vnormals).append(xyz)
            elif tag == "f":
                if len(args) < 3:
                    raise ParseError("face needs at least 3 corners", lineno)
                vi, ni = [], []
                for corner in args:
                    fields = corner.split("/")
                    vi.append(_obj_index(fields[0], len(verts), lineno))
                    if len(fields) == 3 and fields[2]:
                        ni.append(_obj_index(fields[2], len(vnormals), lineno))
                    else:
                        ni.append(None)
                for k in range(1, len(vi) - 1):
                    faces.append((vi[0], vi[k], vi[k + 1]))
                    corner_normals.append((ni[0], ni[k], ni[k + 1]))
    verts = np.array(verts, dtype=np.float64).reshape(-1, 3)
    faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
    normals = None
    flat = [n for tri in corner_normals for n in tri]
    if flat and all(n is not None for n in flat):
        vn = np.array(vnormals, dtype=np.float64)
        normals = np.zeros_like(verts)
        normals[faces.ravel()] = vn[np.array(flat)]
        lengths = np.linalg.norm(normals, axis=1)
        if np.all(lengths > 0):
            normals /= lengths[:, None]
        else:
            normals = None
    try:
        return TriangleMesh(verts, faces, vertex_normals=normals)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------- PLY

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


@dataclass
class PlyPayload:
    """Contents of a PLY file.

    Attributes
    ----------
    positions : ndarray, shape (n, 3)
    normals : ndarray, shape (n, 3), optional
    quality : ndarray, shape (n,), optional
        Per-vertex scalar; curvature values are stored here.
    colors : ndarray of uint8, shape (n, 3), optional
    faces : ndarray of int, shape (m, 3), optional
    binary : bool
        Binary little-endian when True, ASCII otherwise.
    """

    positions: np.ndarray
    normals: np.ndarray | None = None
    quality: np.ndarray | None = None
    colors: np.ndarray | None = None
    faces: np.ndarray | None = None
    binary: bool = True

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        n = len(self.positions)
        for name, width in (("normals", 3), ("quality", None), ("colors", 3)):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value)
            if len(value) != n or (width and value.shape[1:] != (width,)):
                raise ValueError(f"{name} has shape {value.shape} for {n} vertices")
        if self.faces is not None:
            self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)

    def to_mesh(self):
        normals = self.normals
        if normals is not None:
            normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        faces = self.faces if self.faces is not None else np.zeros((0, 3), dtype=np.int64)
        return TriangleMesh(self.positions, faces, vertex_normals=normals)

    def to_cloud(self):
        normals = self.normals
        if normals is not None:
            normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        return PointCloud(self.positions, normals)


def _vertex_dtype(payload):
    # doubles keep binary round trips lossless
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    if payload.normals is not None:
        fields += [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8")]
    if payload.quality is not None:
        fields += [("quality", "<f8")]
    if payload.colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    return np.dtype(fields)


def write_ply(path, payload, comments=()):
    """Write a :class:`PlyPayload` as binary little-endian or ASCII PLY.

    ``comments`` become ``comment`` lines in the header.
    """
    dtype = _vertex_dtype(payload)
    n = len(payload.positions)
    rec = np.zeros(n, dtype=dtype)
    rec["x"], rec["y"], rec["z"] = payload.positions.T
    if payload.normals is not None:
        rec["nx"], rec["ny"], rec["nz"] = np.asarray(payload.normals, dtype=np.float64).T
    if payload.quality is not None:
        rec["quality"] = payload.quality
    if payload.colors is not None:
        rec["red"], rec["green"], rec["blue"] = np.asarray(payload.colors, dtype=np.uint8).T
    faces = payload.faces
    fmt = "binary_little_endian" if payload.binary else "ascii"
    names = {"<f8": "double", "u1": "uchar"}
    header = ["ply", f"format {fmt} 1.0"] + [f"comment {c}" for c in comments]
    header.append(f"element vertex {n}")
    header += [f"property {names[dtype[f].str.replace('|', '')]} {f}" for f in dtype.names]
    if faces is not None:
        header += [f"element face {len(faces)}", "property list uchar int vertex_indices"]
    header.append("end_header")
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if payload.binary:
            fh.write(rec.tobytes())
            if faces is not None:
                frec = np.zeros(len(faces), dtype=[("n", "u1"), ("v", "<i4", (3,))])
                frec["n"] = 3
                frec["v"] = faces
                fh.write(frec.tobytes())
        else:
            for row in rec.tolist():
                fh.write((" ".join(repr(x) if isinstance(x, float) else str(x)
                                   for x in row) + "\n").encode("ascii"))
            if faces is not None:
                for a, b, c in faces.tolist():
                    fh.write(f"3 {a} {b} {c}\n".encode("ascii"))


def _parse_header(fh):
    magic = fh.readline().strip()
    if magic != b"ply":
        raise ParseError("missing 'ply' magic", 1)
    fmt, elements, lineno = None, [], 1
    while True:
        raw = fh.readline()
        lineno += 1
        if not raw:
            raise ParseError("header has no end_header", lineno)
        parts = raw.decode("ascii", errors="replace").split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        if parts[0] == "end_header":
            break
        if parts[0] == "format":
            if len(parts) < 2 or parts[1] not in ("ascii", "binary_little_endian"):
                raise ParseError(f"unsupported format {' '.join(parts[1:])!r}", lineno)
            fmt = parts[1]
        elif parts[0] == "element":
            try:
                elements.append({"name": parts[1], "count": int(parts[2]), "props": []})
            except (IndexError, ValueError):
                raise ParseError("bad element line", lineno) from None
            if elements[-1]["count"] < 0:
                raise ParseError("negative element count", lineno)
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before any element", lineno)
            if len(parts) == 5 and parts[1] == "list":
                if parts[2] not in _PLY_TYPES or parts[3] not in _PLY_TYPES:
                    raise ParseError("unknown list type", lineno)
                elements[-1]["props"].append((parts[4], "list", parts[2], parts[3]))
            elif len(parts) == 3 and parts[1] in _PLY_TYPES:
                elements[-1]["props"].append((parts[2], parts[1]))
            else:
                raise ParseError(f"bad property line {raw!r}", lineno)
        else:
            raise ParseError(f"unknown header keyword {parts[0]!r}", lineno)
    if fmt is None:
        raise ParseError("header has no format line", lineno)
    return fmt, elements, lineno


def _read_element_binary(fh, el):
    props = el["props"]
    if all(len(p) == 2 for p in props):
        dtype = np.dtype([(p[0], "<" + _PLY_TYPES[p[1]]) for p in props])
        data = fh.read(dtype.itemsize * el["count"])
        if len(data) != dtype.itemsize * el["count"]:
            raise ParseError(f"file ends inside element {el['name']!r}")
        return np.frombuffer(data, dtype=dtype), None
    # rows with list properties are read one by one
    rows = []
    for _ in range(el["count"]):
        row = {}
        for p in props:
            if len(p) == 2:
                t = np.dtype("<" + _PLY_TYPES[p[1]])
                buf = fh.read(t.itemsize)
                if len(buf) != t.itemsize:
                    raise ParseError(f"file ends inside element {el['name']!r}")
                row[p[0]] = np.frombuffer(buf, t)[0]
            else:
                ct, it = np.dtype("<" + _PLY_TYPES[p[2]]), np.dtype("<" + _PLY_TYPES[p[3]])
                buf = fh.read(ct.itemsize)
                if len(buf) != ct.itemsize:
                    raise ParseError(f"file ends inside element {el['name']!r}")
                k = int(np.frombuffer(buf, ct)[0])
                buf = fh.read(it.itemsize * k)
                if len(buf) != it.itemsize * k:
                    raise ParseError(f"file ends inside element {el['name']!r}")
                row[p[0]] = np.frombuffer(buf, it).astype(np.int64)
        rows.append(row)
    return None, rows


def _read_element_ascii(lines, el, lineno):
    rows = []
    for _ in range(el["count"]):
        raw = next(lines, None)
        lineno += 1
        if raw is None:
            raise ParseError(f"file ends inside element {el['name']!r}", lineno)
        tokens = raw.split()
        row, pos = {}, 0
        try:
            for p in el["props"]:
                if len(p) == 2:
                    row[p[0]] = float(tokens[pos])
                    pos += 1
                else:
                    k = int(tokens[pos])
                    row[p[0]] = np.array([int(t) for t in tokens[pos + 1:pos + 1 + k]])
                    if len(row[p[0]]) != k:
                        raise IndexError
                    pos += 1 + k
        except (IndexError, ValueError):
            raise ParseError(f"malformed {el['name']} record", lineno) from None
        rows.append(row)
    return rows, lineno


def _column(table, rows, name):
    if table is not None:
        return np.asarray(table[name], dtype=np.float64)
    return np.array([r[name] for r in rows], dtype=np.float64)


def read_ply(path):
    """Read an ASCII or binary little-endian PLY file into a :class:`PlyPayload`.

    Elements other than ``vertex`` and ``face`` are skipped with an
    :class:`UnsupportedElement` warning. Polygonal faces are fan-triangulated.
    """
    with open(path, "rb") as fh:
        fmt, elements, lineno = _parse_header(fh)
        binary = fmt == "binary_little_endian"
        if not binary:
            lines = (ln.decode("ascii", errors="replace") for ln in fh if ln.strip())
        positions = np.zeros((0, 3))
        normals = quality = colors = faces = None
        for el in elements:
            if binary:
                table, rows = _read_element_binary(fh, el)
            else:
                rows, lineno = _read_element_ascii(lines, el, lineno)
                table = None
            names = [p[0] for p in el["props"]]
            if el["name"] == "vertex":
                if not {"x", "y", "z"} <= set(names):
                    raise ParseError("vertex element lacks x, y, z")
                positions = np.stack([_column(table, rows, c) for c in "xyz"], -1)
                positions = positions.reshape(-1, 3)
                if {"nx", "ny", "nz"} <= set(names):
                    normals = np.stack([_column(table, rows, c)
                                        for c in ("nx", "ny", "nz")], -1)
                if "quality" in names:
                    quality = _column(table, rows, "quality")
                if {"red", "green", "blue"} <= set(names):
                    colors = np.stack([_column(table, rows, c)
                                       for c in ("red", "green", "blue")], -1).astype(np.uint8)
            elif el["name"] == "face":
                key = next((k for k in ("vertex_indices", "vertex_index") if k in names), None)
                if key is None or rows is None and el["count"]:
                    raise ParseError("face element lacks a vertex index list")
                tris = []
                for r in rows or []:
                    poly = r[key]
                    if len(poly) < 3:
                        raise ParseError("face with fewer than 3 corners")
                    tris.extend((poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1))
                faces = np.array(tris, dtype=np.int64).reshape(-1, 3)
                if len(faces) and (faces.min() < 0 or faces.max() >= len(positions)):
                    raise ParseError("face index out of range")
            else:
                warnings.warn(UnsupportedElement(f"skipping PLY element {el['name']!r}"),
                              stacklevel=2)
    return PlyPayload(positions, normals, quality, colors, faces, binary)


# ---------------------------------------------------------------- XYZ

def write_xyz(path, cloud):
    """One point per line: ``x y z`` or ``x y z nx ny nz``."""
    data = cloud.points if cloud.normals is None else np.hstack([cloud.points, cloud.normals])
    np.savetxt(path, data, fmt="%.17g")


def read_xyz(path):
    try:
        data = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if data.size == 0:
        return PointCloud(np.zeros((0, 3)))
    if data.shape[1] not in (3, 6):
        raise ParseError(f"expected 3 or 6 columns, got {data.shape[1]}")
    normals = None
    if data.shape[1] == 6:
        normals = data[:, 3:] / np.linalg.norm(data[:, 3:], axis=1, keepdims=True)
    return PointCloud(data[:, :3], normals)


def read_mesh(path):
    """OBJ or PLY mesh, chosen by extension."""
    if str(path).lower().endswith(".ply"):
        return read_ply(path).to_mesh()
    return read_obj(path)


def read_cloud(path):
    """PLY or XYZ point cloud, chosen by extension."""
    if str(path).lower().endswith(".ply"):
        return read_ply(path).to_cloud()
    return read_xyz(path)


def write_cloud(path, cloud, quality=None, colors=None, comments=()):
    if str(path).lower().endswith(".xyz"):
        write_xyz(path, cloud)
    else:
        write_ply(path, PlyPayload(cloud.points, cloud.normals, quality, colors),
                  comments)


# ---------------------------------------------------------------- colours and CSV

def _diverging_table():
    t = np.linspace(0.0, 1.0, 128)
    blue, white, red = np.array([0, 0, 255]), np.array([255, 255, 255]), np.array([255, 0, 0])
    low = blue + t[:, None] * (white - blue)
    high = white + t[:, None] * (red - white)
    return np.round(np.concatenate([low, high])).astype(np.uint8)


COLOR_TABLE = _diverging_table()


def colorize(values, clip_lo_pct=0.0, clip_hi_pct=100.0):
    """Map scalars to 8-bit RGB through a 256-entry blue-white-red table.

    Values are clipped to the given percentiles and mapped linearly, the
    table index being ``floor(255 * t)``. A constant field maps to the
    table midpoint (index 128).

    Returns
    -------
    ndarray of uint8, shape (n, 3)
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if len(values) == 0:
        raise EmptyInput("nothing to colorize")
    if not 0 <= clip_lo_pct < clip_hi_pct <= 100:
        raise ValueError("need 0 <= clip_lo_pct < clip_hi_pct <= 100")
    lo, hi = np.percentile(values, [clip_lo_pct, clip_hi_pct])
    if not hi > lo:
        return np.tile(COLOR_TABLE[128], (len(values), 1))
    t = (np.clip(values, lo, hi) - lo) / (hi - lo)
    return COLOR_TABLE[np.floor(255 * t).astype(np.int64)]


def write_csv(path, header, rows):
    """Write ``rows`` of ``(id, value, ...)`` sorted by id, floats as ``%.6g``.

    ``path`` may be ``"-"`` for standard output.
    """
    rows = sorted(rows, key=lambda r: r[0])

    def fmt(x):
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            return "%.6g" % x
        return str(x)

    fh = sys.stdout if path == "-" else open(path, "w", newline="", encoding="ascii")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


def read_csv_header(path):
    """Header names and float data of a CSV written by :func:`write_csv`.

    Returns
    -------
    header : list of str
    data : ndarray, shape (rows, columns)
    """
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty CSV", 1)
        out = []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
            try:
                out.append([float(x) for x in row])
            except ValueError:
                raise ParseError("non-numeric CSV field", lineno) from None
    return header, np.array(out, dtype=np.float64).reshape(-1, len(header))
