import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from totalcurv.exceptions import DegenerateTriangle
from totalcurv.geometry import (
    TriangleMesh, corner_angles, degenerate_mask, dirichlet_energy, is_oriented_manifold,
    per_triangle_stiffness, stiffness_matrices, triangle_area,
)
from totalcurv.shapes import icosphere, torus_grid

coords = arrays(np.float64, (3, 3), elements=st.floats(-10, 10, allow_nan=False))


def fem_stiffness(p):
    """Oracle: S_ij = area * grad(phi_i) . grad(phi_j) from explicit barycentric gradients."""
    e1, e2 = p[1] - p[0], p[2] - p[0]
    G = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
    # gradients of phi_1, phi_2 in the (e1, e2) basis; phi_0 = 1 - phi_1 - phi_2
    Ginv = np.linalg.inv(G)
    grads = np.array([-Ginv.sum(axis=0), Ginv[0], Ginv[1]])  # coefficients on e1, e2
    area = 0.5 * np.linalg.norm(np.cross(e1, e2))
    return area * grads @ G @ grads.T


def well_shaped(p):
    return not degenerate_mask(p[None])[0] and np.min(corner_angles(*p)) > 1e-3


@settings(max_examples=200, deadline=None)
@given(coords)
def test_stiffness_matches_fem_oracle(p):
    if not well_shaped(p):
        return
    S = per_triangle_stiffness(*p)
    ref = fem_stiffness(p)
    assert np.allclose(S, ref, rtol=1e-7, atol=1e-9 * np.abs(ref).max())


@settings(max_examples=200, deadline=None)
@given(coords)
def test_stiffness_symmetric_rowsum_zero_psd(p):
    if degenerate_mask(p[None])[0]:
        return
    S = per_triangle_stiffness(*p)
    scale = np.abs(S).max()
    assert np.allclose(S, S.T)
    assert np.allclose(S.sum(axis=1), 0, atol=1e-12 * scale)
    assert np.linalg.eigvalsh(S).min() >= -1e-10 * scale


def test_equilateral_stiffness():
    p = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]])
    S = per_triangle_stiffness(*p)
    off = -0.5 / np.sqrt(3)
    expected = np.full((3, 3), off)
    np.fill_diagonal(expected, -2 * off)
    assert np.allclose(S, expected, atol=1e-15)


def test_dirichlet_energy_of_linear_function():
    rng = np.random.default_rng(1)
    p = rng.normal(size=(3, 3))
    a = rng.normal(size=3)
    n = np.cross(p[1] - p[0], p[2] - p[0])
    n /= np.linalg.norm(n)
    a_tan = a - (a @ n) * n
    energy = dirichlet_energy(per_triangle_stiffness(*p), p @ a)
    assert energy == pytest.approx(triangle_area(*p) * a_tan @ a_tan, rel=1e-12)


def test_constant_function_has_zero_energy():
    p = np.array([[0, 0, 0], [2, 0, 0], [0.3, 1, 0.5]])
    assert abs(dirichlet_energy(per_triangle_stiffness(*p), [3.0, 3.0, 3.0])) < 1e-14


@settings(max_examples=100, deadline=None)
@given(coords)
def test_angles_sum_to_pi(p):
    if degenerate_mask(p[None])[0]:
        return
    assert sum(corner_angles(*p)) == pytest.approx(np.pi, abs=1e-9)


@pytest.mark.parametrize("p", [
    [[0, 0, 0], [1, 0, 0], [2, 0, 0]],
    [[0, 0, 0], [0, 0, 0], [1, 1, 1]],
    [[0, 0, 0], [1, 0, 0], [0.5, 1e-13, 0]],
])
def test_degenerate_triangle_raises(p):
    with pytest.raises(DegenerateTriangle):
        per_triangle_stiffness(*np.array(p, dtype=float))


def test_batch_marks_degenerate_with_zero_matrix():
    c = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 0, 0], [1, 0, 0], [2, 0, 0]]], float)
    S, deg = stiffness_matrices(c)
    assert deg.tolist() == [False, True]
    assert np.all(S[1] == 0)


def test_triangle_area():
    assert triangle_area([0, 0, 0], [2, 0, 0], [0, 3, 0]) == pytest.approx(3.0)
    assert triangle_area([0, 0, 0], [1, 1, 1], [2, 2, 2]) == 0.0


def test_mesh_helpers():
    m = icosphere(2)
    assert m.euler_characteristic() == 2
    assert is_oriented_manifold(m)
    t = torus_grid(2, 1, 9, 9)
    assert t.euler_characteristic() == 0
    assert is_oriented_manifold(t)
    assert t.copy() is not t


def test_manifold_check_rejects_flipped_face_and_fins():
    m = icosphere(1)
    bad = m.faces.copy()
    bad[0] = bad[0][::-1]
    assert not is_oriented_manifold(TriangleMesh(m.vertices, bad))
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]], float)
    fin = np.array([[0, 1, 2], [1, 0, 3], [0, 1, 4]])  # three faces on one edge
    assert not is_oriented_manifold(TriangleMesh(v, fin))


def test_two_cones_at_one_vertex_not_manifold():
    # two fans sharing only vertex 0
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0],
                  [-1, 0, 0], [0, -1, 0], [-1, -1, 0]], float)
    f = np.array([[0, 1, 3], [0, 3, 2], [0, 4, 6], [0, 6, 5]])
    assert not is_oriented_manifold(TriangleMesh(v, f))


def test_mesh_validation():
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), [[0, 1, 5]])
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 2)), [[0, 1, 2]])
    with pytest.raises(ValueError):
        TriangleMesh(np.eye(3), [[0, 1, 2]], vertex_normals=2 * np.eye(3))
