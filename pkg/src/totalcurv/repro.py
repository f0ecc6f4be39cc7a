"""Reference experiments shared by the command line and the test suite.

``table3`` runs the mesh convergence study (icospheres and grid tori with
analytic normals); ``pcd_torus`` runs the point-cloud study on a torus
under three sampling regimes with true and estimated normals.
"""

import numpy as np

from .curvature import mesh_total_curvature
from .metrics import rmse
from .pointcloud import estimate_normals_pca, orient_normals_mst, pointcloud_total_curvature
from .sampling import DEFAULT_SEED, nonuniform_sample, poisson_disk_sample
from .shapes import Sphere, Torus, gt_per_triangle, icosphere, torus_grid

SPHERE_SUBDIVISIONS = (4, 5, 6)
TORUS_GRIDS = (9, 18, 36)
REGIMES = ("uniform", "nonuniform", "sparse")

TABLE3_HEADER = ("row", "shape", "resolution", "faces",
                 "rmse_per_triangle", "rmse_vertex_density")
PCD_HEADER = ("row", "regime", "normals", "points", "k", "rmse", "density_range")


def mesh_errors(mesh, surface):
    """RMSE of the per-face integral and of the per-vertex density against
    the analytic surface, both using the mesh's own vertex normals."""
    est = mesh_total_curvature(mesh)
    gt = gt_per_triangle(mesh, surface)
    return (rmse(est.per_triangle, gt.per_triangle),
            rmse(est.per_vertex_density, gt.per_vertex_density))


def table3(R=2.0, r=1.0, subdivisions=SPHERE_SUBDIVISIONS, grids=TORUS_GRIDS):
    """Sphere and torus convergence rows.

    Returns
    -------
    list of tuple
        Rows matching :data:`TABLE3_HEADER`.
    """
    rows = []
    sphere = Sphere(1.0)
    for s in subdivisions:
        m = icosphere(s, 1.0)
        e_tri, e_vtx = mesh_errors(m, sphere)
        rows.append((len(rows), "sphere", f"s={s}", m.n_faces, e_tri, e_vtx))
    torus = Torus(R, r)
    for n in grids:
        m = torus_grid(R, r, n, n)
        e_tri, e_vtx = mesh_errors(m, torus)
        rows.append((len(rows), "torus", f"{n}x{n}", m.n_faces, e_tri, e_vtx))
    return rows


def torus_cloud(regime, n_dense=20000, n_sparse=2000, seed=DEFAULT_SEED, R=2.0, r=1.0,
                mesh_resolution=(200, 100)):
    """Sample a torus under one regime and snap the samples onto the exact surface.

    Returns
    -------
    points, normals : ndarray, shape (n, 3)
        Positions and exact outward normals.
    density : ndarray, shape (n,)
        Exact ``k1**2 + k2**2`` at each point.
    """
    surface = Torus(R, r)
    mesh = torus_grid(R, r, *mesh_resolution)
    if regime == "uniform":
        cloud = poisson_disk_sample(mesh, n_dense, seed)
    elif regime == "nonuniform":
        cloud = nonuniform_sample(mesh, n_dense, seed)
    elif regime == "sparse":
        cloud = poisson_disk_sample(mesh, n_sparse, seed)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    pos, nrm, uv = surface.project(cloud.points)
    return pos, nrm, surface.density(uv[:, 0], uv[:, 1])


def pcd_torus(n_dense=20000, n_sparse=2000, seed=DEFAULT_SEED, regimes=REGIMES):
    """Point-cloud RMSE on the torus for every regime, with true and
    PCA + MST estimated normals. Rows match :data:`PCD_HEADER`."""
    rows = []
    for regime in regimes:
        pos, nrm, gt = torus_cloud(regime, n_dense, n_sparse, seed)
        k = 10 if regime == "sparse" else 20
        spread = float(gt.max() - gt.min())
        est = orient_normals_mst(pos, estimate_normals_pca(pos, k), k)
        for label, normals in (("gt", nrm), ("est", est)):
            density = pointcloud_total_curvature(pos, normals, k)
            rows.append((len(rows), regime, label, len(pos), k, rmse(density, gt), spread))
    return rows


def markdown_table(header, rows):
    """Render rows as a Markdown table; floats use 6 significant digits."""
    def cell(x):
        return "%.6g" % x if isinstance(x, (float, np.floating)) else str(x)

    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(cell(x) for x in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"
