"""Surface sampling: area-uniform random points and Poisson-disk point sets.

All randomness comes from ``numpy.random.Generator(Philox(seed))``, a
counter-based generator whose streams are stable across platforms.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import UnreachableTarget
from .geometry import PointCloud, triangle_areas

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
MAX_BISECTIONS = 30
COUNT_TOLERANCE = 0.10
# candidate pool size relative to the target count
POOL_FACTOR = 12
# expected fraction of a maximal random disk packing: count ~ 0.7 area / radius**2
_RSA_DENSITY = 0.7


def make_rng(seed=DEFAULT_SEED):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class SamplingConfig:
    mode: str = "uniform"
    target_count: int = 20000
    seed: int = DEFAULT_SEED
    oversample_factor: float = 2.0

    def __post_init__(self):
        if self.mode not in ("uniform", "nonuniform", "sparse"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.target_count < 1:
            raise ValueError("target_count must be >= 1")
        if not self.oversample_factor > 1:
            raise ValueError("oversample_factor must be > 1")


def _surface_samples(mesh, count, rng):
    corners = mesh.corners()
    areas = triangle_areas(corners)
    total = areas.sum()
    if not total > 0:
        raise ValueError("mesh has zero surface area")
    # one (face, r1, r2) triple per sample so shorter runs are prefixes of longer ones
    draws = rng.random((count, 3))
    cdf = np.cumsum(areas)
    face = np.minimum(np.searchsorted(cdf, draws[:, 0] * cdf[-1], side="right"),
                      len(areas) - 1)
    r1, r2 = draws[:, 1], draws[:, 2]
    # uniform on the simplex via the square-root fold
    s = np.sqrt(r1)
    bary = np.stack([1.0 - s, s * (1.0 - r2), s * r2], -1)
    pts = np.einsum("nk,nki->ni", bary, corners[face])
    return pts, face, bary


def sample_points_on_mesh(mesh, count, seed=DEFAULT_SEED, return_faces=False):
    """Draw ``count`` points uniformly over the surface area of ``mesh``.

    Returns
    -------
    PointCloud
    faces, barycentric : ndarray
        Source face and barycentric coordinates per point, only when
        ``return_faces`` is True.
    """
    pts, face, bary = _surface_samples(mesh, int(count), make_rng(seed))
    if return_faces:
        return PointCloud(pts), face, bary
    return PointCloud(pts)


def _dart_throw(candidates, radius):
    """Greedy in-order acceptance of candidates at least ``radius`` from every
    accepted point. Works batch-wise but matches the sequential result."""
    accepted = np.zeros(0, dtype=np.int64)
    batch = max(1024, len(candidates) // 16)
    for start in range(0, len(candidates), batch):
        ids = np.arange(start, min(start + batch, len(candidates)))
        if len(accepted):
            d, _ = cKDTree(candidates[accepted]).query(candidates[ids],
                                                       distance_upper_bound=radius)
            ids = ids[d >= radius]
        if len(ids) == 0:
            continue
        conflicts = [[] for _ in ids]
        for a, b in cKDTree(candidates[ids]).query_pairs(radius, output_type="ndarray"):
            if np.linalg.norm(candidates[ids[a]] - candidates[ids[b]]) < radius:
                conflicts[max(a, b)].append(min(a, b))
        taken = np.zeros(len(ids), dtype=bool)
        for j in range(len(ids)):
            taken[j] = not any(taken[c] for c in conflicts[j])
        accepted = np.concatenate([accepted, ids[taken]])
    return accepted


def poisson_disk_sample(mesh, target_count, seed=DEFAULT_SEED, return_radius=False):
    """Poisson-disk sample of about ``target_count`` points (within 10%).

    Dart throwing over a fixed stream of area-uniform candidates, with the
    exclusion radius bisected until the accepted count lands in range.

    Raises
    ------
    UnreachableTarget
        If 30 bisection steps do not reach the target range.
    """
    target_count = int(target_count)
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    rng = make_rng(seed)
    pool = max(POOL_FACTOR * target_count, 64)
    candidates, _, _ = _surface_samples(mesh, pool, rng)
    area = triangle_areas(mesh.corners()).sum()
    lo_n, hi_n = target_count * (1 - COUNT_TOLERANCE), target_count * (1 + COUNT_TOLERANCE)

    lo, hi = 0.0, 2.0 * (np.linalg.norm(np.ptp(candidates, axis=0)) + 1.0)
    radius = np.sqrt(_RSA_DENSITY * area / target_count)
    for it in range(MAX_BISECTIONS):
        accepted = _dart_throw(candidates, radius)
        count = len(accepted)
        logger.debug("bisection %d: radius=%.6g count=%d", it, radius, count)
        if lo_n <= count <= hi_n:
            pts = candidates[accepted]
            cloud = PointCloud(pts)
            return (cloud, radius) if return_radius else cloud
        if count > hi_n:
            lo = radius
        else:
            hi = radius
        # count scales like 1 / radius**2; take that step when it stays in the bracket
        guess = radius * np.sqrt(max(count, 1) / target_count)
        radius = guess if lo < guess < hi else 0.5 * (lo + hi)
    raise UnreachableTarget(f"no radius gives {target_count} points (+-10%) "
                            f"after {MAX_BISECTIONS} bisections")


def nonuniform_sample(mesh, target_count, seed=DEFAULT_SEED, oversample_factor=2.0):
    """Poisson-disk oversample, then a uniform random subset of exactly ``target_count``."""
    if not oversample_factor > 1:
        raise ValueError("oversample_factor must be > 1")
    dense = poisson_disk_sample(mesh, int(round(oversample_factor * target_count)), seed)
    rng = make_rng(seed + 1)
    target_count = min(int(target_count), len(dense))
    pick = np.sort(rng.choice(len(dense), size=target_count, replace=False))
    return PointCloud(dense.points[pick])


def sample(mesh, config):
    """Dispatch on ``config.mode``; "sparse" is a uniform sample with a small target."""
    if config.mode == "nonuniform":
        return nonuniform_sample(mesh, config.target_count, config.seed,
                                 config.oversample_factor)
    return poisson_disk_sample(mesh, config.target_count, config.seed)
