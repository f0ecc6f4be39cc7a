"""Mesh and point-cloud containers plus the per-triangle cotangent stiffness kernel.

The stiffness matrix ``S`` of a triangle with corners ``(a, b, c)`` is the
3x3 matrix whose off-diagonal entry ``S[i, j]`` is ``-cot(theta_k) / 2``,
``theta_k`` being the corner angle opposite the edge ``ij``. For a function
``u`` linearly interpolated from its corner values, ``u @ S @ u`` is the
Dirichlet energy of ``u`` over the triangle.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateTriangle
from .validation import check_faces, check_normals, check_points

DEGENERATE_AREA_FACTOR = 1e-12

# corner k is opposite the edge (_EDGE_I[k], _EDGE_J[k])
_EDGE_I = np.array([1, 2, 0])
_EDGE_J = np.array([2, 0, 1])


@dataclass
class TriangleMesh:
    """Indexed triangle mesh.

    Parameters
    ----------
    vertices : array_like, shape (n, 3)
    faces : array_like of int, shape (m, 3)
        Counter-clockwise corner indices.
    vertex_normals : array_like, shape (n, 3), optional
        Unit normals, one per vertex.
    vertex_uv : array_like, shape (n, 2), optional
        Surface parameters of each vertex, for meshes generated from a
        parametric surface.
    """

    vertices: np.ndarray
    faces: np.ndarray
    vertex_normals: np.ndarray | None = None
    vertex_uv: np.ndarray | None = None

    def __post_init__(self):
        if len(self.vertices):
            self.vertices = check_points(self.vertices, "vertices")
        else:
            self.vertices = np.zeros((0, 3))
        self.faces = check_faces(self.faces, len(self.vertices))
        if self.vertex_normals is not None:
            self.vertex_normals = check_normals(self.vertex_normals, len(self.vertices),
                                                "vertex_normals")
        if self.vertex_uv is not None:
            uv = np.asarray(self.vertex_uv, dtype=np.float64)
            if uv.shape != (len(self.vertices), 2):
                raise ValueError(f"vertex_uv has shape {uv.shape}, "
                                 f"expected ({len(self.vertices)}, 2)")
            self.vertex_uv = uv

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def corners(self):
        """Corner positions, shape (m, 3, 3)."""
        return self.vertices[self.faces]

    def face_areas(self):
        return triangle_areas(self.corners())

    def edges(self):
        """Unique undirected edges as a sorted (e, 2) array."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges()) + self.n_faces

    def bounding_box_diagonal(self):
        if self.n_vertices == 0:
            return 0.0
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    def copy(self):
        return TriangleMesh(
            self.vertices.copy(), self.faces.copy(),
            None if self.vertex_normals is None else self.vertex_normals.copy(),
            None if self.vertex_uv is None else self.vertex_uv.copy())


@dataclass
class PointCloud:
    """Point positions with optional unit normals."""

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        if len(self.points):
            self.points = check_points(self.points)
        else:
            self.points = np.zeros((0, 3))
        if self.normals is not None:
            self.normals = check_normals(self.normals, len(self.points))

    def __len__(self):
        return len(self.points)


def triangle_area(a, b, c):
    """Area of the triangle ``abc``; degenerate triangles give 0."""
    a, b, c = (np.asarray(p, dtype=np.float64) for p in (a, b, c))
    return float(np.linalg.norm(np.cross(b - a, c - a)) / 2.0)


def triangle_areas(corners):
    """Vectorised :func:`triangle_area` over corners of shape (m, 3, 3)."""
    corners = np.asarray(corners, dtype=np.float64)
    cr = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    return np.linalg.norm(cr, axis=1) / 2.0


def degenerate_mask(corners):
    """True for triangles whose area is at most 1e-12 times the squared longest edge."""
    corners = np.asarray(corners, dtype=np.float64)
    edges = corners[:, [1, 2, 0]] - corners
    longest_sq = np.max(np.einsum("mij,mij->mi", edges, edges), axis=1)
    return triangle_areas(corners) <= DEGENERATE_AREA_FACTOR * longest_sq


def _check_nondegenerate(a, b, c):
    corners = np.array([a, b, c], dtype=np.float64)[None]
    if degenerate_mask(corners)[0]:
        raise DegenerateTriangle(f"degenerate triangle {corners[0].tolist()}")
    return corners


def _corner_cotangents(corners):
    # cot = (u . v) / |u x v| for the two edges leaving each corner
    u = corners[:, [1, 2, 0]] - corners
    v = corners[:, [2, 0, 1]] - corners
    dot = np.einsum("mij,mij->mi", u, v)
    cross = np.linalg.norm(np.cross(u, v), axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return dot / cross


def corner_angles(a, b, c):
    """Interior angles (radians) at ``a``, ``b`` and ``c``."""
    corners = _check_nondegenerate(a, b, c)
    u = corners[:, [1, 2, 0]] - corners
    v = corners[:, [2, 0, 1]] - corners
    dot = np.einsum("mij,mij->mi", u, v)
    cross = np.linalg.norm(np.cross(u, v), axis=2)
    return tuple(float(t) for t in np.arctan2(cross, dot)[0])


def stiffness_matrices(corners):
    """Cotangent stiffness matrices for a batch of triangles.

    Parameters
    ----------
    corners : ndarray, shape (m, 3, 3)

    Returns
    -------
    S : ndarray, shape (m, 3, 3)
        Degenerate triangles get an all-zero matrix.
    degenerate : ndarray of bool, shape (m,)
    """
    corners = np.asarray(corners, dtype=np.float64)
    m = len(corners)
    degenerate = degenerate_mask(corners)
    cot = _corner_cotangents(corners)
    cot[degenerate] = 0.0
    S = np.zeros((m, 3, 3))
    half = -0.5 * cot
    S[:, _EDGE_I, _EDGE_J] = half
    S[:, _EDGE_J, _EDGE_I] = half
    S[:, [0, 1, 2], [0, 1, 2]] = -S.sum(axis=2)
    return S, degenerate


def per_triangle_stiffness(a, b, c):
    """Cotangent stiffness matrix of a single triangle.

    Raises
    ------
    DegenerateTriangle
        If the area is at most 1e-12 times the squared longest edge.
    """
    corners = _check_nondegenerate(a, b, c)
    return stiffness_matrices(corners)[0][0]


def dirichlet_energy(s, u):
    """Quadratic form ``u @ s @ u``."""
    u = np.asarray(u, dtype=np.float64)
    return float(u @ np.asarray(s, dtype=np.float64) @ u)


def is_oriented_manifold(mesh):
    """True when every edge has one or two incident faces, shared edges are
    traversed in opposite directions, and each vertex star is a single fan."""
    f = mesh.faces
    if len(f) == 0:
        return True
    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    if len(np.unique(directed, axis=0)) != len(directed):
        return False  # an edge is traversed twice in the same direction
    und = np.sort(directed, axis=1)
    _, counts = np.unique(und, axis=0, return_counts=True)
    if counts.max() > 2:
        return False
    # vertex fans: the link edges (opposite each vertex) must form one path or cycle
    links = {}
    for a, b, c in f.tolist():
        links.setdefault(a, []).append((b, c))
        links.setdefault(b, []).append((c, a))
        links.setdefault(c, []).append((a, b))
    for edges in links.values():
        nxt = dict(edges)
        if len(nxt) != len(edges):
            return False
        starts = set(nxt) - set(nxt.values())
        if len(starts) > 1:
            return False
        first = next(iter(starts)) if starts else edges[0][0]
        node, steps = first, 0
        while node in nxt and steps <= len(edges):
            node = nxt[node]
            steps += 1
            if node == first:
                break
        if steps != len(edges):
            return False
    return True
