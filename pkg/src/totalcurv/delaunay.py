"""Incremental Bowyer-Watson Delaunay triangulation in the plane.

Triangles are kept in a directed-edge map ``(a, b) -> c`` for each
counter-clockwise triangle ``(a, b, c)``. The convex hull is closed off by
ghost triangles sharing a single vertex at infinity, so no bounding
super-triangle is needed and the result always covers the convex hull.
A ghost triangle ``(a, b, inf)`` stands for the open half-plane left of
``a -> b`` together with the open segment ``ab``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import CollinearInput, IsolatedCenter, TooFewPoints

GHOST = -1
INCIRCLE_TOL = 1e-9
ORIENT_TOL = 1e-12
DUPLICATE_TOL = 1e-12


@dataclass
class LocalTriangulation:
    """Delaunay triangulation of a planar point set.

    Attributes
    ----------
    planar_points : ndarray, shape (n, 2)
        The input points, unchanged. Duplicates are kept but never referenced.
    triangles : ndarray of int, shape (t, 3)
        Counter-clockwise triangles indexing ``planar_points``.
    center_index : int
        Index of the point whose one-ring is of interest.
    """

    planar_points: np.ndarray
    triangles: np.ndarray
    center_index: int = 0


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _incircle(a, b, c, d):
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (adx * (bdy * cd - bd * cdy)
            - ady * (bdx * cd - bd * cdx)
            + ad * (bdx * cdy - bdy * cdx))


def _canon(t):
    # rotate so the smallest index (the ghost, if any) comes first
    a, b, c = t
    if a <= b and a <= c:
        return t
    if b <= c:
        return (b, c, a)
    return (c, a, b)


def unique_point_indices(points, tol=DUPLICATE_TOL):
    """Indices of the first occurrence of each point, merging points closer than ``tol``."""
    n = len(points)
    if n < 2:
        return np.arange(n)
    if n <= 64:
        d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(-1)
        close = np.triu(d2 < tol * tol, 1)
        return np.flatnonzero(~close.any(axis=0))
    drop = set()
    for i, j in sorted(cKDTree(points).query_pairs(tol)):
        if i not in drop:
            drop.add(j)
    return np.array([i for i in range(n) if i not in drop], dtype=np.int64)


class _Triangulator:
    def __init__(self, pts):
        self.p = pts
        self.edge = {}

    def add(self, a, b, c):
        e = self.edge
        e[(a, b)] = c
        e[(b, c)] = a
        e[(c, a)] = b

    def remove(self, a, b, c):
        e = self.edge
        del e[(a, b)], e[(b, c)], e[(c, a)]

    def triangles(self):
        return {_canon((a, b, c)) for (a, b), c in self.edge.items()}

    def is_bad(self, tri, i):
        p = self.p
        a, b, c = tri
        if a == GHOST:
            # ghost (inf, b, c): hull edge b -> c
            o = _orient(p[b], p[c], p[i])
            if o > ORIENT_TOL:
                return True
            if o < -ORIENT_TOL:
                return False
            (dx, dy), (bx, by), (cx, cy) = p[i], p[b], p[c]
            return ((dx - bx) * (cx - bx) + (dy - by) * (cy - by) > 0
                    and (dx - cx) * (bx - cx) + (dy - cy) * (by - cy) > 0)
        return _incircle(p[a], p[b], p[c], p[i]) > INCIRCLE_TOL

    def contains(self, tri, i):
        p = self.p
        a, b, c = tri
        if a == GHOST:
            return _orient(p[b], p[c], p[i]) > ORIENT_TOL
        q = p[i]
        return (_orient(p[a], p[b], q) >= -ORIENT_TOL
                and _orient(p[b], p[c], q) >= -ORIENT_TOL
                and _orient(p[c], p[a], q) >= -ORIENT_TOL)

    def locate(self, i, t):
        """Visibility walk from real triangle ``t`` to one containing point ``i``."""
        p, edge = self.p, self.edge
        qx, qy = p[i]
        for _ in range(2 * len(edge) + 8):
            a, b, c = t
            for x, y in ((a, b), (b, c), (c, a)):
                (xx, xy), (yx, yy) = p[x], p[y]
                if (yx - xx) * (qy - xy) - (yy - xy) * (qx - xx) < -ORIENT_TOL:
                    t = (y, x, edge[(y, x)])
                    break
            else:
                return t
            if GHOST in t:
                return _canon(t)
        # walk did not settle; fall back to a scan
        tris = self.triangles()
        found = next((t for t in tris if t[0] != GHOST and self.contains(t, i)), None)
        if found is None:
            found = next(t for t in tris if t[0] == GHOST and self.contains(t, i))
        return found

    def insert(self, i, hint):
        p, edge = self.p, self.edge
        start = self.locate(i, hint)
        bad = {_canon(start)}
        stack = [start]
        boundary = []
        qx, qy = p[i]
        while stack:
            a, b, c = stack.pop()
            for x, y in ((a, b), (b, c), (c, a)):
                z = edge[(y, x)]
                nb = _canon((y, x, z))
                if nb in bad:
                    continue
                if nb[0] == GHOST:
                    worse = self.is_bad(nb, i)
                else:
                    # in-circumcircle test, inlined for speed
                    (ax, ay), (bx, by), (cx, cy) = p[nb[0]], p[nb[1]], p[nb[2]]
                    adx, ady, bdx, bdy, cdx, cdy = ax - qx, ay - qy, bx - qx, by - qy, cx - qx, cy - qy
                    ad = adx * adx + ady * ady
                    bd = bdx * bdx + bdy * bdy
                    cd = cdx * cdx + cdy * cdy
                    worse = (adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx)
                             + ad * (bdx * cdy - bdy * cdx)) > INCIRCLE_TOL
                    if not worse and x != GHOST and y != GHOST:
                        (xx, xy), (yx, yy) = p[x], p[y]
                        worse = (yx - xx) * (qy - xy) - (yy - xy) * (qx - xx) <= ORIENT_TOL
                if worse:
                    bad.add(nb)
                    stack.append(nb)
                else:
                    boundary.append((x, y, nb))
        for t in bad:
            self.remove(*t)
        # a neighbour recorded as boundary may have joined the cavity later
        last = None
        for x, y, nb in boundary:
            if nb not in bad:
                self.add(x, y, i)
                if x != GHOST and y != GHOST:
                    last = (x, y, i)
        return last


def delaunay_2d(points, center_index=0):
    """Delaunay triangulation of planar points by Bowyer-Watson insertion.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    center_index : int, default=0
        Stored on the result for :func:`one_ring`.

    Returns
    -------
    LocalTriangulation

    Raises
    ------
    TooFewPoints
        Fewer than three distinct points.
    CollinearInput
        All points on a line.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
    keep = unique_point_indices(pts)
    if len(keep) < 3:
        raise TooFewPoints(f"need 3 distinct points, got {len(keep)}")
    # predicates run on coordinates normalised to unit spread
    q = pts[keep]
    q = q - q.mean(axis=0)
    spread = np.abs(q).max()
    q = q / spread

    i0 = 0
    i1 = int(np.argmax(((q - q[i0]) ** 2).sum(1)))
    area = (q[i1, 0] - q[i0, 0]) * (q[:, 1] - q[i0, 1]) - (q[i1, 1] - q[i0, 1]) * (q[:, 0] - q[i0, 0])
    i2 = int(np.argmax(np.abs(area)))
    if abs(area[i2]) <= ORIENT_TOL:
        raise CollinearInput("all points are collinear")
    if area[i2] < 0:
        i1, i2 = i2, i1

    tr = _Triangulator([(float(x), float(y)) for x, y in q])
    tr.add(i0, i1, i2)
    tr.add(GHOST, i1, i0)
    tr.add(GHOST, i2, i1)
    tr.add(GHOST, i0, i2)
    hint = (i0, i1, i2)
    for i in range(len(q)):
        if i not in (i0, i1, i2):
            hint = tr.insert(i, hint)

    tris = [t for t in tr.triangles() if t[0] != GHOST]
    tris = keep[np.array(sorted(tris), dtype=np.int64)]
    return LocalTriangulation(pts, tris, int(center_index))


def one_ring(tri):
    """Triangles of ``tri`` incident on its center point.

    Raises
    ------
    IsolatedCenter
        If no triangle uses the center (e.g. it was merged into a duplicate).
    """
    t = tri.triangles
    ring = t[np.any(t == tri.center_index, axis=1)]
    if len(ring) == 0:
        raise IsolatedCenter(f"point {tri.center_index} is in no triangle")
    return ring
