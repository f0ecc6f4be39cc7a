import warnings

import numpy as np
import pytest

from totalcurv.curvature import mesh_total_curvature
from totalcurv.decimation import (
    CONDITION_LIMIT, DecimationConfig, EditableMesh, _qslim_placement, decimate,
    edge_midpoint_decimate, plane_quadrics, qslim_decimate, quadric_error, vertex_quadrics,
)
from totalcurv.exceptions import SizeMismatch, TargetUnreachable
from totalcurv.geometry import TriangleMesh, is_oriented_manifold
from totalcurv.metrics import hausdorff
from totalcurv.shapes import icosphere, torus_grid


def perturbed_sphere(s=2, seed=0):
    m = icosphere(s)
    v = m.vertices * (1 + 0.01 * np.random.default_rng(seed).random((m.n_vertices, 1)))
    return TriangleMesh(v, m.faces)


@pytest.mark.parametrize("method", ["qslim", "edge_midpoint"])
def test_contract_on_icosphere(method):
    m = icosphere(3)
    w = mesh_total_curvature(m).per_vertex_density
    out, info = decimate(m, w, DecimationConfig(method, 320))
    assert out.n_faces <= 320 and info.target_reached
    assert is_oriented_manifold(out) and out.euler_characteristic() == 2
    rms, _ = hausdorff(m, out, samples=20000)
    assert rms < 0.02 * m.bounding_box_diagonal()


def test_vertex_quadric_vanishes_at_vertex():
    m = perturbed_sphere()
    Q = vertex_quadrics(m)
    errs = [quadric_error(Q[i], m.vertices[i]) for i in range(m.n_vertices)]
    assert np.max(np.abs(errs)) < 1e-14
    assert np.all(np.linalg.eigvalsh(plane_quadrics(m)) > -1e-14)


def test_quadric_measures_squared_plane_distance():
    m = TriangleMesh(np.array([[0, 0, 0], [2, 0, 0], [0, 1, 0]], float), [[0, 1, 2]])
    Q = plane_quadrics(m)[0]
    assert quadric_error(Q, [5, 5, 0.3]) == pytest.approx(1.0 * 0.09)


def test_placement_falls_back_when_ill_conditioned():
    # all quadrics from one plane: A is singular
    m = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float), [[0, 1, 2]])
    Q = plane_quadrics(m)[0]
    assert np.linalg.cond(Q[:3, :3]) > CONDITION_LIMIT
    pi, pj = np.array([0.0, 0, 1]), np.array([1.0, 0, 0])
    x, err = _qslim_placement(Q, pi, pj)
    assert np.allclose(x, pj) and err == pytest.approx(0.0)


@pytest.mark.parametrize("method", ["qslim", "edge_midpoint"])
def test_uniform_weights_keep_collapse_order(method):
    # a power-of-two scale leaves every comparison unchanged
    m = perturbed_sphere(2)
    base = DecimationConfig(method, 100, curvature_weighting=False)
    weighted = DecimationConfig(method, 100, curvature_weighting=True, weight_floor=0.0)
    _, a = decimate(m, None, base)
    _, b = decimate(m, np.full(m.n_vertices, 4.0), weighted)
    assert a.collapses == b.collapses and len(a.collapses) > 0


@pytest.mark.parametrize("method", ["qslim", "edge_midpoint"])
def test_weighting_concentrates_vertices_where_curvature_is_high(method):
    m = torus_grid(2, 1, 36, 36)
    w = mesh_total_curvature(m).per_vertex_density

    def inner_count(weighting):
        out, _ = decimate(m, w, DecimationConfig(method, 600, weighting))
        x = out.vertices
        cos_v = (np.hypot(x[:, 0], x[:, 1]) - 2.0)
        return np.sum(cos_v < -0.5)

    assert inner_count(True) > inner_count(False)


def test_noop_when_target_not_below_face_count():
    m = icosphere(1)
    out, info = decimate(m, None, DecimationConfig("qslim", 80))
    assert np.array_equal(out.faces, m.faces) and info.collapses == []


def test_target_unreachable_warns_and_returns_best_effort():
    tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], float)
    f = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    m = TriangleMesh(np.concatenate([tet, tet + 5]), np.concatenate([f, f + 4]))
    with pytest.warns(TargetUnreachable):
        out, info = decimate(m, None, DecimationConfig("qslim", 4))
    assert not info.target_reached and out.n_faces == 8


def test_link_condition_blocks_pinching():
    m = icosphere(0)
    em = EditableMesh(m)
    assert all(em.link_condition(i, j) for i, j in em.edges())
    # once a vertex has degree 3, merging across its tetrahedral cap would pinch
    out = qslim_decimate(m, config=DecimationConfig("qslim", 4))
    assert out.n_faces == 4 and is_oriented_manifold(out)


def test_wrappers_and_validation():
    m = perturbed_sphere(1)
    a = qslim_decimate(m, config=DecimationConfig("edge_midpoint", 40, False))
    b = edge_midpoint_decimate(m, config=DecimationConfig("qslim", 40, False))
    assert a.n_faces <= 40 and b.n_faces <= 40
    with pytest.raises(SizeMismatch):
        qslim_decimate(m, np.ones(3), DecimationConfig("qslim", 40))
    with pytest.raises(ValueError):
        DecimationConfig("qslim", 3)
    with pytest.raises(ValueError):
        DecimationConfig("vertex-clustering", 100)
