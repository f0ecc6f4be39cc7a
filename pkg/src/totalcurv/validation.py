"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import SizeMismatch

UNIT_TOL = 1e-9


def check_points(X, name="points", min_samples=1):
    """Return ``X`` as a C-contiguous float64 array of shape (n, 3)."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples,
                    input_name=name, order="C")
    if X.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {X.shape}")
    return X


def check_normals(normals, n, name="normals", renormalize=False):
    """Validate an (n, 3) array of unit vectors.

    With ``renormalize`` the rows are rescaled to unit length instead of
    being rejected when they drift.
    """
    normals = check_array(normals, dtype=np.float64, input_name=name, order="C")
    if normals.shape != (n, 3):
        raise SizeMismatch(f"{name} has shape {normals.shape}, expected ({n}, 3)")
    lengths = np.linalg.norm(normals, axis=1)
    if renormalize:
        if np.any(lengths == 0):
            raise ValueError(f"{name} contains zero vectors")
        return normals / lengths[:, None]
    if np.any(np.abs(lengths - 1.0) > UNIT_TOL):
        raise ValueError(f"{name} must have unit length within {UNIT_TOL}")
    return normals


def check_faces(faces, n_vertices):
    faces = np.asarray(faces)
    if faces.size == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ValueError(f"faces must have shape (m, 3), got {faces.shape}")
    if not np.issubdtype(faces.dtype, np.integer):
        if not np.all(np.equal(np.mod(faces, 1), 0)):
            raise ValueError("faces must contain integer indices")
    faces = faces.astype(np.int64)
    if faces.min() < 0 or faces.max() >= n_vertices:
        raise ValueError("face index out of range")
    if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
              | (faces[:, 0] == faces[:, 2])):
        raise ValueError("a face repeats a vertex index")
    return np.ascontiguousarray(faces)


def check_k(k, minimum):
    if int(k) != k or k < minimum:
        raise ValueError(f"k must be an integer >= {minimum}, got {k}")
    return int(k)
