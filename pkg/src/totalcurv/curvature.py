"""Per-triangle total curvature of a mesh from vertex normals.

Each coordinate of the normal field is treated as a piecewise-linear
function, and the total curvature over a triangle is the summed Dirichlet
energy of those three functions, ``trace(N @ S @ N.T)`` with ``N`` holding
the corner normals as columns and ``S`` the cotangent stiffness matrix.
Interpolated normals are not renormalised inside the triangle.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import IsolatedVertex, SizeMismatch
from .geometry import TriangleMesh, stiffness_matrices, triangle_areas
from .validation import check_normals

logger = logging.getLogger(__name__)


@dataclass
class CurvatureField:
    """Curvature values on a mesh.

    Attributes
    ----------
    per_triangle : ndarray, shape (m,)
        Integrated total curvature of each face (dimensionless).
    per_vertex_density : ndarray, shape (n,), optional
        Pointwise density ``k1**2 + k2**2`` at each vertex (1 / length**2).
    n_degenerate : int
        Number of faces skipped as degenerate (their value is 0).
    """

    per_triangle: np.ndarray
    per_vertex_density: np.ndarray | None = None
    n_degenerate: int = 0
    areas: np.ndarray | None = field(default=None, repr=False)

    def per_triangle_density(self):
        """Per-face curvature divided by face area (0 on zero-area faces)."""
        areas = self.areas
        out = np.zeros_like(self.per_triangle)
        np.divide(self.per_triangle, areas, out=out, where=areas > 0)
        return out


def face_normals(mesh):
    """Unnormalised face normals; their length is twice the face area."""
    c = mesh.corners()
    return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])


def vertex_normals_area_weighted(mesh, allow_isolated=False):
    """Unit vertex normals from area-weighted incident face normals.

    Parameters
    ----------
    mesh : TriangleMesh
    allow_isolated : bool, default=False
        If True, vertices without incident faces get a zero normal instead
        of raising.

    Raises
    ------
    IsolatedVertex
        If some vertex has no incident face (and ``allow_isolated`` is False).
    """
    acc = np.zeros((mesh.n_vertices, 3))
    fn = face_normals(mesh)  # |fn| = 2 * area, so this is area weighting
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], fn)
    lengths = np.linalg.norm(acc, axis=1)
    isolated = np.flatnonzero(lengths == 0)
    if len(isolated) and not allow_isolated:
        raise IsolatedVertex(isolated)
    out = np.zeros_like(acc)
    ok = lengths > 0
    out[ok] = acc[ok] / lengths[ok, None]
    return out


def triangle_total_curvature(corners, corner_normals):
    """Trace formula over a batch of triangles.

    Parameters
    ----------
    corners : ndarray, shape (m, 3, 3)
        ``corners[t, i]`` is the position of corner ``i`` of triangle ``t``.
    corner_normals : ndarray, shape (m, 3, 3)
        Normals at the same corners.

    Returns
    -------
    kappa : ndarray, shape (m,)
    degenerate : ndarray of bool, shape (m,)
    """
    S, degenerate = stiffness_matrices(corners)
    # trace(N S N^T) with N = corner_normals^T
    kappa = np.einsum("mia,mij,mja->m", corner_normals, S, corner_normals)
    return kappa, degenerate


def total_curvature_per_triangle(mesh, normals=None):
    """Integrated total curvature of every face.

    Parameters
    ----------
    mesh : TriangleMesh
    normals : array_like, shape (n, 3), optional
        Unit vertex normals. Defaults to ``mesh.vertex_normals`` and then to
        area-weighted normals.

    Returns
    -------
    CurvatureField
        Degenerate faces are assigned 0 and counted in ``n_degenerate``.
    """
    if normals is None:
        normals = mesh.vertex_normals
    if normals is None:
        normals = vertex_normals_area_weighted(mesh)
    normals = np.asarray(normals, dtype=np.float64)
    if normals.shape != (mesh.n_vertices, 3):
        raise SizeMismatch(f"{len(normals)} normals for {mesh.n_vertices} vertices")
    normals = check_normals(normals, mesh.n_vertices)
    corners = mesh.corners()
    kappa, degenerate = triangle_total_curvature(corners, normals[mesh.faces])
    n_deg = int(degenerate.sum())
    if n_deg:
        logger.warning("%d degenerate faces assigned zero curvature", n_deg)
    return CurvatureField(per_triangle=kappa, n_degenerate=n_deg,
                          areas=triangle_areas(corners))


def per_vertex_curvature_density(mesh, curvature_field):
    """Ring-integrated curvature divided by ring area at every vertex.

    Vertices without incident faces get 0.
    """
    kappa = np.asarray(curvature_field.per_triangle, dtype=np.float64)
    if kappa.shape != (mesh.n_faces,):
        raise SizeMismatch(f"{len(kappa)} values for {mesh.n_faces} faces")
    areas = curvature_field.areas
    if areas is None:
        areas = mesh.face_areas()
    ring_kappa = np.zeros(mesh.n_vertices)
    ring_area = np.zeros(mesh.n_vertices)
    for k in range(3):
        np.add.at(ring_kappa, mesh.faces[:, k], kappa)
        np.add.at(ring_area, mesh.faces[:, k], areas)
    density = np.zeros(mesh.n_vertices)
    np.divide(ring_kappa, ring_area, out=density, where=ring_area > 0)
    return density


def mesh_total_curvature(mesh, normals=None):
    """Per-face values and per-vertex densities in one call."""
    cf = total_curvature_per_triangle(mesh, normals)
    cf.per_vertex_density = per_vertex_curvature_density(mesh, cf)
    return cf


__all__ = [
    "CurvatureField",
    "TriangleMesh",
    "face_normals",
    "mesh_total_curvature",
    "per_vertex_curvature_density",
    "total_curvature_per_triangle",
    "triangle_total_curvature",
    "vertex_normals_area_weighted",
]
