"""Curvature-aware edge-collapse decimation.

Two collapse policies share one validity test (link condition, minimum
vertex degree, and a veto on any incident face normal turning by more than
90 degrees):

* ``qslim``: quadric error metric with area-weighted plane quadrics. With
  curvature weighting each vertex quadric is pre-scaled by
  ``eps + weight`` so the weight survives quadric accumulation.
* ``edge_midpoint``: edge length times ``eps + mean endpoint weight``,
  always collapsing to the midpoint.
"""

import heapq
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SizeMismatch, TargetUnreachable
from .geometry import TriangleMesh

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8
DEGENERATE_AREA_FACTOR = 1e-12


@dataclass
class DecimationConfig:
    method: str = "qslim"
    target_faces: int = 1000
    curvature_weighting: bool = True
    weight_floor: float = 1e-3

    def __post_init__(self):
        if self.method not in ("qslim", "edge_midpoint"):
            raise ValueError(f"unknown decimation method {self.method!r}")
        if self.target_faces < 4:
            raise ValueError("target_faces must be >= 4")


@dataclass
class DecimationInfo:
    collapses: list = field(default_factory=list)
    target_reached: bool = True


def plane_quadrics(mesh):
    """Area-weighted fundamental quadrics of every face, shape (m, 4, 4)."""
    c = mesh.corners()
    cr = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    dbl_area = np.linalg.norm(cr, axis=1)
    n = np.zeros_like(cr)
    ok = dbl_area > 0
    n[ok] = cr[ok] / dbl_area[ok, None]
    plane = np.concatenate([n, -np.einsum("ij,ij->i", n, c[:, 0])[:, None]], axis=1)
    return 0.5 * dbl_area[:, None, None] * plane[:, :, None] * plane[:, None, :]


def vertex_quadrics(mesh):
    """Sum of incident face quadrics at each vertex, shape (n, 4, 4)."""
    fq = plane_quadrics(mesh)
    Q = np.zeros((mesh.n_vertices, 4, 4))
    for k in range(3):
        np.add.at(Q, mesh.faces[:, k], fq)
    return Q


def quadric_error(Q, x):
    h = np.append(np.asarray(x, dtype=np.float64), 1.0)
    return float(h @ Q @ h)


class EditableMesh:
    """Triangle mesh with vertex-face incidence, supporting edge collapses.

    Collapsing ``(i, j)`` keeps ``i`` at the new position and retires ``j``.
    """

    def __init__(self, mesh, quadrics=None, weights=None):
        self.pos = mesh.vertices.copy()
        self.faces = mesh.faces.copy()
        self.face_alive = np.ones(len(self.faces), dtype=bool)
        self.vert_alive = np.ones(len(self.pos), dtype=bool)
        self.vert_faces = [set() for _ in range(len(self.pos))]
        for fi, f in enumerate(self.faces):
            for v in f:
                self.vert_faces[v].add(fi)
        self.quadrics = quadrics
        self.weights = weights
        self.n_faces = len(self.faces)

    def neighbours(self, v):
        out = set()
        for fi in self.vert_faces[v]:
            out.update(self.faces[fi])
        out.discard(v)
        return out

    def edge_faces(self, i, j):
        return self.vert_faces[i] & self.vert_faces[j]

    def is_boundary_vertex(self, v):
        counts = {}
        for fi in self.vert_faces[v]:
            for u in self.faces[fi]:
                if u != v:
                    counts[u] = counts.get(u, 0) + 1
        return any(c == 1 for c in counts.values())

    def edges(self):
        out = set()
        for fi in np.flatnonzero(self.face_alive):
            a, b, c = (int(x) for x in self.faces[fi])
            out.update({(min(a, b), max(a, b)), (min(b, c), max(b, c)), (min(a, c), max(a, c))})
        return sorted(out)

    def link_condition(self, i, j):
        shared = self.edge_faces(i, j)
        if not shared:
            return False
        opposite = set()
        for fi in shared:
            opposite.update(self.faces[fi])
        opposite -= {i, j}
        common = self.neighbours(i) & self.neighbours(j)
        if common != opposite:
            return False
        if len(shared) == 1:
            return True
        # interior edge joining two boundary vertices would pinch the surface
        return not (self.is_boundary_vertex(i) and self.is_boundary_vertex(j))

    def collapse_is_valid(self, i, j, x):
        if not self.link_condition(i, j):
            return False
        if len(self.neighbours(i) | self.neighbours(j)) - 2 < 3:
            return False
        shared = self.edge_faces(i, j)
        for v in (i, j):
            for fi in self.vert_faces[v] - shared:
                f = self.faces[fi]
                p = self.pos[f]
                old = np.cross(p[1] - p[0], p[2] - p[0])
                q = p.copy()
                q[f == v] = x
                new = np.cross(q[1] - q[0], q[2] - q[0])
                if old @ new <= 0:
                    return False
                e = q[[1, 2, 0]] - q
                longest = np.max(np.einsum("ij,ij->i", e, e))
                if 0.5 * np.linalg.norm(new) <= DEGENERATE_AREA_FACTOR * longest:
                    return False
        return True

    def collapse(self, i, j, x):
        for fi in self.edge_faces(i, j):
            self.face_alive[fi] = False
            for v in self.faces[fi]:
                self.vert_faces[v].discard(fi)
            self.n_faces -= 1
        for fi in self.vert_faces[j]:
            f = self.faces[fi]
            f[f == j] = i
            self.vert_faces[i].add(fi)
        self.vert_faces[j] = set()
        self.vert_alive[j] = False
        self.pos[i] = x
        if self.quadrics is not None:
            self.quadrics[i] = self.quadrics[i] + self.quadrics[j]
        if self.weights is not None:
            self.weights[i] = max(self.weights[i], self.weights[j])

    def to_mesh(self):
        keep = np.flatnonzero(self.vert_alive)
        remap = -np.ones(len(self.pos), dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        faces = remap[self.faces[self.face_alive]]
        return TriangleMesh(self.pos[keep], faces)


def _qslim_placement(Q, pi, pj):
    A, b = Q[:3, :3], Q[:3, 3]
    if np.linalg.cond(A) <= CONDITION_LIMIT:
        x = np.linalg.solve(A, -b)
        return x, quadric_error(Q, x)
    best = None
    for x in (pi, pj, 0.5 * (pi + pj)):
        err = quadric_error(Q, x)
        if best is None or err < best[1]:
            best = (x, err)
    return best


def _decimate(mesh, weights, config, return_info):
    weights = np.asarray(weights, dtype=np.float64) if weights is not None else None
    if weights is not None and weights.shape != (mesh.n_vertices,):
        raise SizeMismatch(f"{len(weights)} weights for {mesh.n_vertices} vertices")
    info = DecimationInfo()
    if mesh.n_faces <= config.target_faces:
        return (mesh.copy(), info) if return_info else mesh.copy()

    eps = config.weight_floor
    use_w = config.curvature_weighting and weights is not None
    scale = (eps + weights) if use_w else np.ones(mesh.n_vertices)
    qslim = config.method == "qslim"
    Q = vertex_quadrics(mesh) * scale[:, None, None] if qslim else None
    em = EditableMesh(mesh, Q, (weights.copy() if use_w else None))
    stamp = np.zeros(mesh.n_vertices, dtype=np.int64)

    def candidate(i, j):
        pi, pj = em.pos[i], em.pos[j]
        if qslim:
            x, cost = _qslim_placement(em.quadrics[i] + em.quadrics[j], pi, pj)
        else:
            x = 0.5 * (pi + pj)
            cost = float(np.linalg.norm(pi - pj))
            if use_w:
                cost *= eps + 0.5 * (em.weights[i] + em.weights[j])
        return cost, x

    heap = []

    def push(i, j):
        i, j = min(i, j), max(i, j)
        cost, x = candidate(i, j)
        heapq.heappush(heap, (cost, i, j, stamp[i], stamp[j], x))

    for i, j in em.edges():
        push(i, j)

    deferred = []
    progressed = False
    while em.n_faces > config.target_faces:
        if not heap:
            if not deferred or not progressed:
                break
            # neighbourhoods changed since these failed; give them another try
            for i, j in deferred:
                if em.vert_alive[i] and em.vert_alive[j] and em.edge_faces(i, j):
                    push(i, j)
            deferred, progressed = [], False
            continue
        cost, i, j, si, sj, x = heapq.heappop(heap)
        if not (em.vert_alive[i] and em.vert_alive[j]):
            continue
        if si != stamp[i] or sj != stamp[j]:
            continue
        if not em.collapse_is_valid(i, j, x):
            deferred.append((i, j))
            continue
        em.collapse(i, j, x)
        info.collapses.append((int(i), int(j)))
        progressed = True
        stamp[i] += 1
        for k in em.neighbours(i):
            push(i, k)

    if em.n_faces > config.target_faces:
        info.target_reached = False
        warnings.warn(TargetUnreachable(
            f"stopped at {em.n_faces} faces, target {config.target_faces}"), stacklevel=3)
    out = em.to_mesh()
    return (out, info) if return_info else out


def qslim_decimate(mesh, weights=None, config=None, return_info=False):
    """Quadric-error edge-collapse decimation with optional per-vertex weights.

    Parameters
    ----------
    mesh : TriangleMesh
        Manifold input.
    weights : array_like, shape (n,), optional
        Per-vertex curvature weights; ignored when
        ``config.curvature_weighting`` is False.
    config : DecimationConfig, optional
    return_info : bool, default=False
        Also return a :class:`DecimationInfo` with the collapse sequence.

    Warns
    -----
    TargetUnreachable
        When no valid collapse remains above the target; the best-effort
        mesh is returned.
    """
    config = config or DecimationConfig()
    if config.method != "qslim":
        config = DecimationConfig("qslim", config.target_faces,
                                  config.curvature_weighting, config.weight_floor)
    return _decimate(mesh, weights, config, return_info)


def edge_midpoint_decimate(mesh, weights=None, config=None, return_info=False):
    """Shortest-edge decimation collapsing to midpoints; the edge length is
    multiplied by ``eps + mean endpoint weight`` when weighting is on.

    Same parameters and warnings as :func:`qslim_decimate`.
    """
    config = config or DecimationConfig(method="edge_midpoint")
    if config.method != "edge_midpoint":
        config = DecimationConfig("edge_midpoint", config.target_faces,
                                  config.curvature_weighting, config.weight_floor)
    return _decimate(mesh, weights, config, return_info)


def decimate(mesh, weights, config):
    """Dispatch on ``config.method``; returns ``(mesh, info)``."""
    return _decimate(mesh, weights, config, return_info=True)
