"""scikit-learn style wrappers around the point-cloud pipeline."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .pointcloud import (
    KnnIndex, _local_neighbourhoods, _ring_densities, default_k, estimate_normals_pca,
    orient_normals_mst,
)
from .validation import check_k, check_normals, check_points

# a query closer than this to a fitted point is treated as that point
_SAME_POINT = 1e-12


class NormalEstimator(TransformerMixin, BaseEstimator):
    """PCA normals, optionally made consistent with an MST sign propagation.

    Stateless: :meth:`transform` estimates normals for the cloud it is given.

    Parameters
    ----------
    k : int, default=20
        Neighbourhood size for the covariance and the MST graph.
    orient : bool, default=True
        Propagate a consistent sign; otherwise signs are arbitrary.
    """

    def __init__(self, k=20, orient=True):
        self.k = k
        self.orient = orient

    def fit(self, X, y=None):
        X = check_points(X)
        check_k(self.k, 3)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_points(X)
        index = KnnIndex(X)
        normals = estimate_normals_pca(X, self.k, index=index)
        if self.orient:
            normals = orient_normals_mst(X, normals, self.k, index=index)
        return normals


class PointCloudTotalCurvature(TransformerMixin, BaseEstimator):
    """Total curvature density ``k1**2 + k2**2`` from an oriented point cloud.

    :meth:`fit` stores the cloud and its normals; :meth:`transform`
    evaluates the density at query points using one-rings built from the
    fitted cloud. Queries that coincide with fitted points reuse their
    normals; other queries get a PCA normal from their fitted neighbours,
    signed to agree with the nearest fitted normal.

    Parameters
    ----------
    k : int, optional
        Neighbourhood size. Defaults to 20, or 10 for clouds below 5,000 points.
    normal_k : int, default=20
        Neighbourhood size used when normals have to be estimated.

    Attributes
    ----------
    points_ : ndarray, shape (n, 3)
    normals_ : ndarray, shape (n, 3)
    k_ : int
    failed_ : ndarray of bool
        Queries of the last :meth:`transform` call without a usable one-ring.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> p = rng.normal(size=(2000, 3))
    >>> p /= np.linalg.norm(p, axis=1, keepdims=True)
    >>> est = PointCloudTotalCurvature(k=20).fit(p, normals=p)
    >>> bool(abs(est.transform(p).mean() - 2.0) < 0.05)
    True
    """

    def __init__(self, k=None, normal_k=20):
        self.k = k
        self.normal_k = normal_k

    def fit(self, X, y=None, normals=None):
        X = check_points(X, min_samples=3)
        self.k_ = default_k(len(X)) if self.k is None else check_k(self.k, 2)
        self._index = KnnIndex(X)
        if normals is None:
            normals = NormalEstimator(min(self.normal_k, len(X))).fit_transform(X)
        self.normals_ = check_normals(normals, len(X), renormalize=True)
        self.points_ = X
        self.n_features_in_ = 3
        return self

    def _query_normals(self, X):
        k = min(self.normal_k, len(self.points_))
        idx, _ = self._index.query(X, k)
        nb = self.points_[idx]
        centered = nb - nb.mean(axis=1, keepdims=True)
        _, evecs = np.linalg.eigh(np.einsum("nki,nkj->nij", centered, centered))
        normals = evecs[:, :, 0]
        flip = np.einsum("ij,ij->i", normals, self.normals_[idx[:, 0]]) < 0
        normals[flip] *= -1
        return normals

    def transform(self, X):
        check_is_fitted(self, "points_")
        X = check_points(X)
        nearest, dist = self._index.query(X, 1)
        nearest, dist = nearest[:, 0], dist[:, 0]
        own = dist <= _SAME_POINT
        center_ids = np.where(own, nearest, -1)
        centers = np.where(own[:, None], self.points_[nearest], X)
        normals = np.empty_like(X)
        normals[own] = self.normals_[nearest[own]]
        if (~own).any():
            normals[~own] = self._query_normals(X[~own])
        nbrs = _local_neighbourhoods(self.points_, centers, self.k_, self._index,
                                     exclude=center_ids)
        density, self.failed_ = _ring_densities(
            self.points_, self.normals_, centers, normals, center_ids, nbrs, True)
        return density
