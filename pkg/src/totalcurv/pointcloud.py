"""Total curvature on oriented point clouds.

For every point the k nearest neighbours are projected onto the tangent
plane, triangulated with a planar Delaunay triangulation, and the triangles
incident on the point are lifted back to their 3D positions. The density at
the point is the summed per-triangle total curvature of that one-ring over
its lifted area.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from .curvature import triangle_total_curvature
from .delaunay import delaunay_2d, one_ring
from .exceptions import (
    CollinearInput, DisconnectedGraph, EmptyCloud, IsolatedCenter, TooFewNeighbors,
    TooFewPoints,
)
from .geometry import triangle_areas
from .validation import check_k, check_normals, check_points

logger = logging.getLogger(__name__)

DENSE_K = 20
SPARSE_K = 10
SPARSE_THRESHOLD = 5000

# keeps zero-weight MST edges (parallel normals) from vanishing in sparse storage
_MST_WEIGHT_FLOOR = 1e-12


def default_k(n_points):
    """20 neighbours for dense clouds, 10 below 5,000 points."""
    return SPARSE_K if n_points < SPARSE_THRESHOLD else DENSE_K


class KnnIndex:
    """Exact k-nearest-neighbour queries over a fixed point set.

    Immutable after construction, so queries may run from several threads.
    """

    def __init__(self, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or len(points) == 0:
            raise EmptyCloud("cannot index an empty point set")
        self.points = check_points(points)
        self._tree = cKDTree(self.points)

    def __len__(self):
        return len(self.points)

    def query(self, x, k):
        """Indices and distances of the ``min(k, n)`` nearest points, ascending.

        ``x`` may be a single point (3,) or a batch (m, 3).
        """
        k = min(int(k), len(self.points))
        d, idx = self._tree.query(np.asarray(x, dtype=np.float64), k=k)
        if k == 1:
            d, idx = d[..., None], idx[..., None]
        return idx, d


def build_knn_index(points):
    return KnnIndex(points)


def estimate_normals_pca(points, k=DENSE_K, index=None, return_flags=False):
    """Unoriented normals from the covariance of each point's k nearest
    neighbours (the point itself included).

    Parameters
    ----------
    points : array_like, shape (n, 3)
    k : int, default=20
    index : KnnIndex, optional
        Reused if given.
    return_flags : bool, default=False
        Also return a boolean mask of degenerate neighbourhoods, where the
        two smallest covariance eigenvalues agree within 1e-12 (relative to
        the largest).

    Returns
    -------
    normals : ndarray, shape (n, 3)
    degenerate : ndarray of bool, shape (n,)
        Only when ``return_flags`` is True.
    """
    points = check_points(points)
    if k < 3:
        raise TooFewNeighbors(f"k must be at least 3, got {k}")
    if len(points) < k:
        raise TooFewNeighbors(f"{len(points)} points cannot supply {k} neighbours")
    index = index or KnnIndex(points)
    idx, _ = index.query(points, k)
    nb = points[idx]
    centered = nb - nb.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / k
    evals, evecs = np.linalg.eigh(cov)
    normals = evecs[:, :, 0]
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    scale = np.maximum(evals[:, 2], np.finfo(float).tiny)
    degenerate = (evals[:, 1] - evals[:, 0]) <= 1e-12 * scale
    if degenerate.any():
        logger.warning("%d points have degenerate neighbourhoods", int(degenerate.sum()))
    if return_flags:
        return normals, degenerate
    return normals


def orient_normals_mst(points, normals, k=DENSE_K, index=None):
    """Make normal signs consistent by propagating along a minimum spanning tree.

    The tree spans the symmetrised kNN graph with edge weight
    ``1 - |n_i . n_j|``. In each connected component the highest point is
    the root; its normal is turned to face away from the component centroid
    and every child is flipped when it disagrees with its parent.

    Warns
    -----
    DisconnectedGraph
        When the kNN graph has several components (each is oriented on its own).
    """
    points = check_points(points)
    normals = check_normals(normals, len(points), renormalize=True).copy()
    n = len(points)
    if n == 1:
        if normals[0] @ (points[0] - points.mean(0)) < 0:
            normals[0] = -normals[0]
        return normals
    index = index or KnnIndex(points)
    idx, _ = index.query(points, min(k + 1, n))
    rows = np.repeat(np.arange(n), idx.shape[1])
    cols = idx.ravel()
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    w = 1.0 - np.abs(np.einsum("ij,ij->i", normals[rows], normals[cols])) + _MST_WEIGHT_FLOOR
    graph = coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
    graph = graph.maximum(graph.T)
    mst = minimum_spanning_tree(graph)
    mst = mst + mst.T
    n_comp, labels = connected_components(mst, directed=False)
    if n_comp > 1:
        warnings.warn(DisconnectedGraph(n_comp), stacklevel=2)
    for comp in range(n_comp):
        members = np.flatnonzero(labels == comp)
        root = members[np.argmax(points[members, 2])]
        centroid = points[members].mean(axis=0)
        if normals[root] @ (points[root] - centroid) < 0:
            normals[root] = -normals[root]
        order, pred = breadth_first_order(mst, root, directed=False)
        for node in order[1:]:
            if normals[node] @ normals[pred[node]] < 0:
                normals[node] = -normals[node]
    return normals


@dataclass
class TangentFrame:
    origin: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def project(self, points):
        """Planar coordinates ``((x - origin) . e1, (x - origin) . e2)``."""
        d = np.asarray(points, dtype=np.float64) - self.origin
        return np.stack([d @ self.e1, d @ self.e2], -1)


def _frame_axes(normals):
    # e1 from the coordinate axis least aligned with each normal
    axis = np.eye(3)[np.argmin(np.abs(normals), axis=-1)]
    e1 = axis - np.einsum("...i,...i->...", axis, normals)[..., None] * normals
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(normals, e1)
    return e1, e2


def tangent_frame(origin, normal):
    """Deterministic right-handed orthonormal frame ``(e1, e2, normal)``."""
    normal = np.asarray(normal, dtype=np.float64)
    if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
        raise ValueError("normal must have unit length")
    e1, e2 = _frame_axes(normal[None])
    return TangentFrame(np.asarray(origin, dtype=np.float64), normal, e1[0], e2[0])


def _local_neighbourhoods(points, queries, k, index, exclude):
    """kNN of each query, with the query itself excluded when it is a cloud point."""
    n = len(points)
    kk = min(k + 1, n) if exclude is not None else min(k, n)
    idx, _ = index.query(queries, kk)
    if exclude is None:
        return idx
    out = np.empty((len(queries), kk - 1), dtype=np.int64)
    for row, (cand, self_i) in enumerate(zip(idx, exclude)):
        cand = cand[cand != self_i]
        out[row] = cand[:kk - 1]
    return out


def pointcloud_total_curvature(points, normals, k=None, return_failures=False):
    """Per-point total curvature density of an oriented point cloud.

    Parameters
    ----------
    points : array_like, shape (n, 3)
    normals : array_like, shape (n, 3)
        Oriented unit normals.
    k : int, optional
        Neighbourhood size; defaults to 20, or 10 below 5,000 points.
    return_failures : bool, default=False
        Also return a mask of points whose one-ring could not be built
        (collinear projection or isolated center); those get density 0.

    Returns
    -------
    density : ndarray, shape (n,)
    failed : ndarray of bool, shape (n,)
        Only when ``return_failures`` is True.
    """
    points = check_points(points)
    normals = check_normals(normals, len(points))
    n = len(points)
    k = default_k(n) if k is None else check_k(k, 2)
    index = KnnIndex(points)
    nbrs = _local_neighbourhoods(points, points, k, index, exclude=np.arange(n))
    return _ring_densities(points, normals, points, normals,
                           np.arange(n), nbrs, return_failures)


def _ring_densities(points, normals, centers, center_normals, center_ids, nbrs,
                    return_failures):
    """Shared one-ring machinery.

    ``center_ids[i]`` is the cloud index of centre ``i`` or -1 for an
    external query point; external centres are appended as extra vertices.
    """
    m = len(centers)
    e1, e2 = _frame_axes(center_normals)
    # local vertex 0 is the centre, 1.. are its neighbours
    local_pos = np.concatenate([centers[:, None, :], points[nbrs]], axis=1)
    d = local_pos - centers[:, None, :]
    planar = np.stack([np.einsum("mki,mi->mk", d, e1), np.einsum("mki,mi->mk", d, e2)], -1)

    ext = np.flatnonzero(center_ids < 0)
    all_pos = np.concatenate([points, centers[ext]])
    all_nrm = np.concatenate([normals, center_normals[ext]])
    gid = center_ids.copy()
    gid[ext] = len(points) + np.arange(len(ext))
    local_gid = np.concatenate([gid[:, None], nbrs], axis=1)

    failed = np.zeros(m, dtype=bool)
    ring_tris, ring_owner = [], []
    for i in range(m):
        try:
            tri = delaunay_2d(planar[i], center_index=0)
            ring = one_ring(tri)
        except (CollinearInput, IsolatedCenter, TooFewPoints):
            failed[i] = True
            continue
        ring_tris.append(local_gid[i][ring])
        ring_owner.append(np.full(len(ring), i))
    density = np.zeros(m)
    if ring_tris:
        tris = np.concatenate(ring_tris)
        owner = np.concatenate(ring_owner)
        corners = all_pos[tris]
        kappa, _ = triangle_total_curvature(corners, all_nrm[tris])
        areas = triangle_areas(corners)
        ring_k = np.bincount(owner, weights=kappa, minlength=m)
        ring_a = np.bincount(owner, weights=areas, minlength=m)
        np.divide(ring_k, ring_a, out=density, where=ring_a > 0)
    if failed.any():
        logger.warning("%d points have no usable one-ring; density set to 0",
                       int(failed.sum()))
    if return_failures:
        return density, failed
    return density
