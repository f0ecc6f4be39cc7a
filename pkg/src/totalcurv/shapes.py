"""Analytic evaluation surfaces and their triangulations.

Every surface exposes positions, unit normals and principal curvatures as
functions of a ``(u, v)`` parameterisation, so meshes and point samples can
carry exact normals and a ground-truth density ``k1**2 + k2**2``.
"""

import numpy as np

from .exceptions import InvalidRadii, MissingUV, SelfIntersectingTube
from .geometry import TriangleMesh, triangle_areas

TWO_PI = 2.0 * np.pi


def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


class ParametricSurface:
    """Base class. Subclasses implement ``position``, ``normal`` and
    ``principal_curvatures`` for broadcastable arrays ``u`` and ``v``."""

    kind = None

    def position(self, u, v):
        raise NotImplementedError

    def normal(self, u, v):
        raise NotImplementedError

    def principal_curvatures(self, u, v):
        raise NotImplementedError

    def density(self, u, v):
        k1, k2 = self.principal_curvatures(u, v)
        return k1 ** 2 + k2 ** 2

    def closest_uv(self, points):
        """Parameters of the surface points closest to ``points`` (n, 3)."""
        raise NotImplementedError

    def project(self, points):
        """Snap points onto the surface.

        Returns
        -------
        positions, normals : ndarray, shape (n, 3)
        uv : ndarray, shape (n, 2)
        """
        uv = self.closest_uv(np.asarray(points, dtype=np.float64))
        u, v = uv[:, 0], uv[:, 1]
        return self.position(u, v), self.normal(u, v), uv

    def to_dict(self):
        raise NotImplementedError

    @staticmethod
    def from_dict(d):
        kind = d["kind"]
        if kind == "sphere":
            return Sphere(d["radius"])
        if kind == "torus":
            return Torus(d["R"], d["r"])
        if kind == "tube":
            return Tube(TorusWindingCurve(**d["curve"]), d["r_tube"])
        raise ValueError(f"unknown surface kind {kind!r}")


class Sphere(ParametricSurface):
    """Sphere of radius ``radius``; ``u`` is azimuth, ``v`` is polar angle."""

    kind = "sphere"

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise InvalidRadii(f"radius must be positive, got {radius}")
        self.radius = float(radius)

    def normal(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([np.sin(v) * np.cos(u), np.sin(v) * np.sin(u), np.cos(v)], -1)

    def position(self, u, v):
        return self.radius * self.normal(u, v)

    def principal_curvatures(self, u, v):
        k = np.full(np.broadcast(np.asarray(u), np.asarray(v)).shape, 1.0 / self.radius)
        return k, k.copy()

    def closest_uv(self, points):
        x, y, z = np.asarray(points, dtype=np.float64).T
        rho = np.sqrt(x * x + y * y + z * z)
        return np.stack([np.mod(np.arctan2(y, x), TWO_PI),
                         np.arccos(np.clip(z / rho, -1, 1))], -1)

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}


class Torus(ParametricSurface):
    """Torus of revolution about z with tube centre radius ``R`` and tube radius ``r``.

    ``((R + r cos v) cos u, (R + r cos v) sin u, r sin v)``.
    """

    kind = "torus"

    def __init__(self, R=2.0, r=1.0):
        if not (R > r > 0):
            raise InvalidRadii(f"need R > r > 0, got R={R}, r={r}")
        self.R = float(R)
        self.r = float(r)

    def normal(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v)], -1)

    def position(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        ring = self.R + self.r * np.cos(v)
        return np.stack([ring * np.cos(u), ring * np.sin(u), self.r * np.sin(v)], -1)

    def principal_curvatures(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        k1 = np.cos(v) / (self.R + self.r * np.cos(v))
        return k1, np.full_like(k1, 1.0 / self.r)

    def closest_uv(self, points):
        x, y, z = np.asarray(points, dtype=np.float64).T
        u = np.arctan2(y, x)
        v = np.arctan2(z, np.hypot(x, y) - self.R)
        return np.mod(np.stack([u, v], -1), TWO_PI)

    def to_dict(self):
        return {"kind": self.kind, "R": self.R, "r": self.r}


class TorusWindingCurve:
    """Closed curve ``(rho(t) cos(p t), rho(t) sin(p t), height sin(n t))``
    with ``rho(t) = major + minor cos(m t)``, for ``t`` in ``[0, 2 pi)``.

    Covers torus knots and the usual figure-eight knot parameterisation.
    """

    def __init__(self, major, minor, m, p, height, n, name="curve"):
        self.major = float(major)
        self.minor = float(minor)
        self.m = int(m)
        self.p = int(p)
        self.height = float(height)
        self.n = int(n)
        self.name = name

    def to_dict(self):
        return dict(major=self.major, minor=self.minor, m=self.m, p=self.p,
                    height=self.height, n=self.n, name=self.name)

    def derivatives(self, t):
        """Position, first and second derivative at ``t``; each shape (..., 3)."""
        t = np.asarray(t, dtype=np.float64)
        A, B, m, p, C, n = self.major, self.minor, self.m, self.p, self.height, self.n
        rho = A + B * np.cos(m * t)
        drho = -B * m * np.sin(m * t)
        ddrho = -B * m * m * np.cos(m * t)
        cp, sp = np.cos(p * t), np.sin(p * t)
        c = np.stack([rho * cp, rho * sp, C * np.sin(n * t)], -1)
        d1 = np.stack([drho * cp - p * rho * sp,
                       drho * sp + p * rho * cp,
                       C * n * np.cos(n * t)], -1)
        d2 = np.stack([ddrho * cp - 2 * p * drho * sp - p * p * rho * cp,
                       ddrho * sp + 2 * p * drho * cp - p * p * rho * sp,
                       -C * n * n * np.sin(n * t)], -1)
        return c, d1, d2

    def curvature(self, t):
        _, d1, d2 = self.derivatives(t)
        speed = np.linalg.norm(d1, axis=-1)
        return np.linalg.norm(np.cross(d1, d2), axis=-1) / speed ** 3


def torus_knot(p=2, q=3, major=2.0, minor=1.0):
    return TorusWindingCurve(major, minor, q, p, minor, q, name=f"torus_knot_{p}_{q}")


def figure_eight():
    return TorusWindingCurve(2.0, 1.0, 2, 3, 1.0, 4, name="figure_eight")


def _reflect(x, v, vv):
    # Householder reflection of rows of x across the plane orthogonal to v.
    safe = vv > 1e-300
    coef = np.where(safe, 2.0 * np.einsum("...i,...i->...", v, x) / np.where(safe, vv, 1.0), 0.0)
    return x - coef[..., None] * v


class Tube(ParametricSurface):
    """Tube of radius ``r_tube`` around a closed curve.

    The cross-section frame is rotation-minimising (double-reflection
    transport over a dense table), with the closing twist spread linearly
    over the loop so the frame is periodic. ``position(u, v) = c(u) + r_tube *
    (cos v N(u) + sin v B(u))`` with ``B = N x T``, which makes the grid
    winding produce outward normals.
    """

    kind = "tube"

    def __init__(self, curve, r_tube=0.25, table_size=4096):
        self.curve = curve
        self.r_tube = float(r_tube)
        if self.r_tube <= 0:
            raise InvalidRadii(f"tube radius must be positive, got {r_tube}")
        self.table_size = int(table_size)
        self._build_table(self.table_size)
        kmax = float(curve.curvature(self._t).max())
        if self.r_tube * kmax >= 1.0:
            raise SelfIntersectingTube(
                f"r_tube * max curvature = {self.r_tube * kmax:.3f} >= 1")

    def _build_table(self, M):
        t = np.arange(M) * (TWO_PI / M)
        c, d1, _ = self.curve.derivatives(np.append(t, TWO_PI))
        T = _unit(d1)
        # initial normal: outward direction from the curve's centroid
        guess = c[0] - c[:-1].mean(axis=0)
        guess = guess - (guess @ T[0]) * T[0]
        if np.linalg.norm(guess) < 1e-9:
            axis = np.eye(3)[np.argmin(np.abs(T[0]))]
            guess = axis - (axis @ T[0]) * T[0]
        N = np.empty((M + 1, 3))
        N[0] = guess / np.linalg.norm(guess)
        for i in range(M):
            N[i + 1] = self._transport(N[i], c[i], T[i], c[i + 1], T[i + 1])
        # closing twist: signed angle from the transported end frame back to N0
        B0 = np.cross(N[0], T[0])
        end = N[M] - (N[M] @ T[0]) * T[0]
        self._twist = float(np.arctan2(end @ B0, end @ N[0]))
        self._t = t
        self._c = c[:-1]
        self._T = T[:-1]
        self._N_raw = N[:-1]

    @staticmethod
    def _transport(r, x0, t0, x1, t1):
        v1 = x1 - x0
        c1 = v1 @ v1
        rL = r - (2.0 / c1) * (v1 @ r) * v1 if c1 > 1e-300 else r
        tL = t0 - (2.0 / c1) * (v1 @ t0) * v1 if c1 > 1e-300 else t0
        v2 = t1 - tL
        c2 = v2 @ v2
        out = rL - (2.0 / c2) * (v2 @ rL) * v2 if c2 > 1e-300 else rL
        out = out - (out @ t1) * t1
        return out / np.linalg.norm(out)

    def frame(self, u):
        """Tangent ``T``, normal ``N`` and binormal ``B = N x T`` at ``u``."""
        u = np.mod(np.asarray(u, dtype=np.float64), TWO_PI)
        M = self.table_size
        h = TWO_PI / M
        i = np.minimum((u / h).astype(np.int64), M - 1)
        c, d1, _ = self.curve.derivatives(u)
        T = _unit(d1)
        v1 = c - self._c[i]
        c1 = np.einsum("...i,...i->...", v1, v1)
        rL = _reflect(self._N_raw[i], v1, c1)
        tL = _reflect(self._T[i], v1, c1)
        v2 = T - tL
        N = _reflect(rL, v2, np.einsum("...i,...i->...", v2, v2))
        N = _unit(N - np.einsum("...i,...i->...", N, T)[..., None] * T)
        # undo the closing twist proportionally to arc parameter
        ang = -self._twist * u / TWO_PI
        Bt = np.cross(N, T)
        N = np.cos(ang)[..., None] * N + np.sin(ang)[..., None] * Bt
        return T, N, np.cross(N, T)

    def _offset(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        _, N, B = self.frame(u)
        return np.cos(v)[..., None] * N + np.sin(v)[..., None] * B, u

    def position(self, u, v):
        d, u = self._offset(u, v)
        c, _, _ = self.curve.derivatives(u)
        return c + self.r_tube * d

    def normal(self, u, v):
        return self._offset(u, v)[0]

    def principal_curvatures(self, u, v):
        d, u = self._offset(u, v)
        _, d1, d2 = self.curve.derivatives(u)
        T = _unit(d1)
        speed = np.linalg.norm(d1, axis=-1)
        acc_perp = d2 - np.einsum("...i,...i->...", d2, T)[..., None] * T
        # acc_perp / speed**2 is the curvature vector kappa * principal normal
        kvec = acc_perp / (speed ** 2)[..., None]
        kcos = np.einsum("...i,...i->...", kvec, d)
        k_along = -kcos / (1.0 - self.r_tube * kcos)
        return k_along, np.full_like(k_along, 1.0 / self.r_tube)

    def closest_uv(self, points, iterations=8):
        points = np.asarray(points, dtype=np.float64)
        # nearest table sample, then Newton on (x - c(u)) . c'(u) = 0
        from scipy.spatial import cKDTree
        _, idx = cKDTree(self._c).query(points)
        u = self._t[idx]
        for _ in range(iterations):
            c, d1, d2 = self.curve.derivatives(u)
            diff = points - c
            g = np.einsum("ij,ij->i", diff, d1)
            dg = np.einsum("ij,ij->i", diff, d2) - np.einsum("ij,ij->i", d1, d1)
            u = u - g / dg
        u = np.mod(u, TWO_PI)
        c, _, _ = self.curve.derivatives(u)
        _, N, B = self.frame(u)
        diff = points - c
        v = np.arctan2(np.einsum("ij,ij->i", diff, B), np.einsum("ij,ij->i", diff, N))
        return np.stack([u, np.mod(v, TWO_PI)], -1)

    def to_dict(self):
        return {"kind": self.kind, "r_tube": self.r_tube, "curve": self.curve.to_dict()}


def _grid_faces(nu, nv):
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    a = i * nv + j
    b = ((i + 1) % nu) * nv + j
    c = ((i + 1) % nu) * nv + (j + 1) % nv
    d = i * nv + (j + 1) % nv
    lower = np.stack([a, b, c], -1).reshape(-1, 3)
    upper = np.stack([a, c, d], -1).reshape(-1, 3)
    return np.stack([lower, upper], 1).reshape(-1, 3)


def grid_mesh(surface, nu, nv):
    """Triangulate a doubly periodic surface over an ``nu`` x ``nv`` parameter grid.

    Each grid quad is split along its (i, j)-(i+1, j+1) diagonal. Vertices
    carry exact normals and their ``(u, v)`` parameters.
    """
    u = np.arange(nu) * (TWO_PI / nu)
    v = np.arange(nv) * (TWO_PI / nv)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    return TriangleMesh(surface.position(uu, vv), _grid_faces(nu, nv),
                        vertex_normals=surface.normal(uu, vv),
                        vertex_uv=np.stack([uu, vv], -1))


def torus_grid(R, r, nu, nv):
    """Closed grid triangulation of a torus: ``nu*nv`` vertices, ``2*nu*nv`` faces."""
    if nu < 3 or nv < 3:
        raise ValueError("torus grid needs nu, nv >= 3")
    return grid_mesh(Torus(R, r), nu, nv)


def tube_knot(curve, r_tube=0.25, nu=400, nv=40):
    """Closed tube mesh around ``curve`` (a :class:`TorusWindingCurve` or one of
    ``"torus23"`` / ``"fig8"``).

    Returns
    -------
    mesh : TriangleMesh
    surface : Tube
    """
    if isinstance(curve, str):
        curve = {"torus23": lambda: torus_knot(2, 3), "fig8": figure_eight}[curve]()
    if nu < 8 or nv < 8:
        raise ValueError("tube grid needs nu, nv >= 8")
    table = nu * int(np.ceil(4096 / nu))
    surface = Tube(curve, r_tube, table_size=table)
    return grid_mesh(surface, nu, nv), surface


_ICO_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
])


def icosahedron(radius=1.0):
    g = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([[-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
                  [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
                  [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1]], dtype=np.float64)
    v *= radius / np.linalg.norm(v[0])
    return TriangleMesh(v, _ICO_FACES.copy())


def icosphere(subdivisions=0, radius=1.0):
    """Icosahedron refined ``subdivisions`` times by edge midpoints, projected
    onto the sphere. Has ``20 * 4**s`` faces and ``10 * 4**s + 2`` vertices."""
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    base = icosahedron(1.0)
    verts, faces = base.vertices, base.faces
    for _ in range(subdivisions):
        e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        e.sort(axis=1)
        edges, inverse = np.unique(e, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        mids = verts[edges[:, 0]] + verts[edges[:, 1]]
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        m = len(faces)
        ab, bc, ca = (inverse[k * m:(k + 1) * m] + len(verts) for k in range(3))
        a, b, c = faces.T
        faces = np.concatenate([
            np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1),
            np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1)])
        verts = np.concatenate([verts, mids])
    sphere = Sphere(radius)
    uv = sphere.closest_uv(verts)
    normals = verts / np.linalg.norm(verts, axis=1, keepdims=True)
    return TriangleMesh(radius * normals, faces, vertex_normals=normals, vertex_uv=uv)


def analytic_density(surface, u, v):
    """Ground-truth ``k1**2 + k2**2`` at parameters ``(u, v)``."""
    return surface.density(u, v)


def gt_per_triangle(mesh, surface):
    """Reference per-face total curvature: mean corner density times face area.

    Returns
    -------
    CurvatureField
    """
    from .curvature import CurvatureField

    if mesh.vertex_uv is None:
        raise MissingUV("mesh has no vertex_uv")
    dens = surface.density(mesh.vertex_uv[:, 0], mesh.vertex_uv[:, 1])
    areas = triangle_areas(mesh.corners())
    kappa = dens[mesh.faces].mean(axis=1) * areas
    return CurvatureField(per_triangle=kappa, per_vertex_density=dens, areas=areas)
