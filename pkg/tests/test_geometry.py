"""Polygon extraction: exact vertices on known shapes, Monte-Carlo area
agreement on random ones, and coverage of exported facet surfaces.
"""
import numpy as np
import pytest

import hznet as hz
from hznet import milp
from hznet.geometry import (InfeasibleLeafError, export_faceted_surface,
                            point_in_polygon, project_leaf_polygon,
                            read_surface, write_surface)
from hznet.network import (Layer, ReluNetwork, forward_eval, graph_set_over,
                           network_graph_set, relu_atom)

from conftest import random_network


def shoelace(V):
    x, y = V[:, 0], V[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_unit_box_square():
    poly = project_leaf_polygon(hz.box([-1, -1], [1, 1]), (0, 1))
    assert not poly.degenerate
    assert len(poly.vertices) == 4
    assert shoelace(poly.vertices) == pytest.approx(4.0, abs=1e-7)
    got = {tuple(np.round(v, 7)) for v in poly.vertices}
    assert got == {(1, 1), (-1, 1), (-1, -1), (1, -1)}


def test_vertices_counter_clockwise():
    poly = project_leaf_polygon(hz.box([0, 0], [2, 1]), (0, 1))
    V = poly.vertices
    signed = 0.0
    for k in range(len(V)):
        a, b = V[k], V[(k + 1) % len(V)]
        signed += a[0] * b[1] - b[0] * a[1]
    assert signed > 0


def test_relu_atom_leaves_are_segments():
    Z = relu_atom(6.0)
    segs = []
    for bits, _ in milp.enumerate_feasible_leaves(Z).leaves:
        poly = project_leaf_polygon(Z, (0, 1), bits)
        assert poly.degenerate and len(poly.vertices) == 2
        segs.append({tuple(np.round(v, 7)) for v in poly.vertices})
    assert {(-6, 0), (0, 0)} in segs and {(0, 0), (6, 6)} in segs


def test_infeasible_leaf_raises():
    # two coupled binaries: force them equal, then ask for unequal
    U = hz.union_shifted_pair(np.eye(2) * 0.1, [-1, -1], [1, 1])
    W = hz.generalized_intersection(
        U, hz.union_shifted_pair(np.zeros((1, 0)).reshape(1, 0), [-1], [1]),
        np.array([[1.0, 0.0]]))
    feasible = [a for a, _ in milp.enumerate_feasible_leaves(W).leaves]
    assert (1, -1) not in feasible
    with pytest.raises(InfeasibleLeafError):
        project_leaf_polygon(W, (0, 1), (1, -1))


def test_rotated_zonotope_area_monte_carlo(rng):
    """Shoelace area of the extracted polygon vs hit-rate sampling."""
    G = rng.normal(size=(2, 4))
    Z = hz.HybridZonotope(G, np.zeros((2, 0)), rng.normal(size=2),
                          np.zeros((0, 4)), np.zeros((0, 0)), np.zeros(0))
    poly = project_leaf_polygon(Z, (0, 1))
    area = shoelace(poly.vertices)
    # direct sampling of the factor cube maps onto the set; estimate area
    # by rejection inside the polygon's bounding box instead
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    samples = rng.uniform(lo, hi, size=(20000, 2))
    hits = sum(point_in_polygon(poly.vertices, s, tol=1e-9) for s in samples)
    estimate = hits / len(samples) * np.prod(hi - lo)
    assert estimate == pytest.approx(area, rel=0.03)


def test_polygon_members_round_trip(rng):
    """Every vertex is a member; every member projects inside the hull."""
    Z = hz.generalized_intersection(hz.box([-2, -2], [2, 2]),
                                    hz.box([-1.0], [1.5]),
                                    np.array([[1.0, 1.0]]))
    poly = project_leaf_polygon(Z, (0, 1))
    for v in poly.vertices:
        assert milp.contains_point(Z, v, tol=1e-6)
    for _ in range(100):
        p = rng.uniform(-2, 2, size=2)
        if -1.0 <= p.sum() <= 1.5:
            assert point_in_polygon(poly.vertices, p, tol=1e-6)


def test_point_in_polygon_degenerate():
    assert point_in_polygon(np.array([[1.0, 2.0]]), [1.0, 2.0])
    assert not point_in_polygon(np.array([[1.0, 2.0]]), [1.1, 2.0])
    seg = np.array([[0.0, 0.0], [2.0, 2.0]])
    assert point_in_polygon(seg, [1.0, 1.0])
    assert not point_in_polygon(seg, [1.0, 1.2])


def test_one_neuron_surface():
    """relu itself: exactly two facets, joined along x = 0."""
    net = ReluNetwork((Layer([[1.0]], [0.0], "relu"),
                       Layer([[1.0]], [0.0], "none")))
    F = network_graph_set(net, 3.0)
    surf = export_faceted_surface(F, (0, 1))
    assert surf.complete and surf.facet_count == 2
    joints = []
    for leaf in surf.leaves:
        assert leaf.degenerate  # 1-D graph: every facet is a segment
        joints.extend(v for v in leaf.vertices if abs(v[0]) < 1e-7)
    assert len(joints) == 2
    assert all(abs(v[1]) < 1e-7 for v in joints)


def test_surface_facets_cover_members(rng):
    net = random_network(rng, [2, 3, 1], scale=0.8)
    X = hz.box([-1.5, -1.5], [1.5, 1.5])
    G = graph_set_over(net, X, 20.0)
    surf = export_faceted_surface(G, (0, 1, 2))
    rep = milp.enumerate_feasible_leaves(G)
    assert surf.facet_count == rep.feasible_count
    for _ in range(50):
        x = rng.uniform(-1.5, 1.5, size=2)
        hit = any(point_in_polygon(leaf.vertices[:, :2], x, tol=1e-6)
                  for leaf in surf.leaves)
        assert hit


def test_surface_facets_are_graph_slices(rng):
    """On a 3-D surface every vertex satisfies y = f(x) exactly."""
    net = random_network(rng, [2, 2, 1], scale=0.6)
    G = graph_set_over(net, hz.box([-1, -1], [1, 1]), 10.0)
    surf = export_faceted_surface(G, (0, 1, 2))
    for leaf in surf.leaves:
        for v in leaf.vertices:
            assert forward_eval(net, v[:2])[0] == pytest.approx(v[2], abs=1e-6)


def test_projection_matrix_argument():
    Z = hz.box([-1, -1, -1], [1, 1, 1])
    P = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    poly = project_leaf_polygon(Z, P)
    assert shoelace(poly.vertices) == pytest.approx(8.0, abs=1e-6)
    with pytest.raises(ValueError):
        project_leaf_polygon(Z, np.ones((2, 3)))  # rank 1


def test_surface_file_round_trip(tmp_path, rng):
    net = random_network(rng, [2, 2, 1], scale=0.5)
    F = network_graph_set(net, 8.0)
    surf = export_faceted_surface(F, (0, 1, 2))
    path = tmp_path / "surface.json"
    write_surface(surf, path)
    back = read_surface(path)
    assert back.dims == surf.dims and back.complete == surf.complete
    assert back.facet_count == surf.facet_count
    for a, b in zip(back.leaves, surf.leaves):
        assert a.assignment == b.assignment
        assert np.allclose(a.vertices, b.vertices)
        assert a.degenerate == b.degenerate
