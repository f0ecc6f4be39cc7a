"""Total curvature (k1**2 + k2**2) estimation on triangle meshes and point clouds.

The per-triangle value is the Dirichlet energy of the linearly interpolated
vertex normals, computed with the cotangent stiffness matrix. Point clouds
reuse it on local Delaunay one-rings built in each tangent plane.
"""

__version__ = "0.1.0"

from .curvature import (
    CurvatureField, mesh_total_curvature, per_vertex_curvature_density,
    total_curvature_per_triangle, triangle_total_curvature, vertex_normals_area_weighted,
)
from .decimation import (
    DecimationConfig, DecimationInfo, decimate, edge_midpoint_decimate, qslim_decimate,
)
from .delaunay import LocalTriangulation, delaunay_2d, one_ring
from .estimators import NormalEstimator, PointCloudTotalCurvature
from .exceptions import *  # noqa: F401,F403
from .formats import (
    PlyPayload, colorize, read_obj, read_ply, read_xyz, write_csv, write_obj, write_ply,
    write_xyz,
)
from .geometry import (
    PointCloud, TriangleMesh, corner_angles, dirichlet_energy, is_oriented_manifold,
    per_triangle_stiffness, stiffness_matrices, triangle_area,
)
from .metrics import EvalReport, hausdorff, hausdorff_report, point_to_triangle_distance, rmse
from .pointcloud import (
    KnnIndex, build_knn_index, estimate_normals_pca, orient_normals_mst,
    pointcloud_total_curvature, tangent_frame,
)
from .sampling import (
    SamplingConfig, nonuniform_sample, poisson_disk_sample, sample, sample_points_on_mesh,
)
from .shapes import (
    Sphere, Torus, Tube, analytic_density, figure_eight, gt_per_triangle, icosahedron,
    icosphere, torus_grid, torus_knot, tube_knot,
)
