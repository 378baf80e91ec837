"""Acceptance gate: one test per headline guarantee, one PASS line each.

Each test re-derives its expected answers from independent oracles (direct
forward evaluation, exhaustive scipy enumeration, trajectory simulation) and
prints a single summary verdict line on success.
"""
import itertools

import numpy as np
import pytest

import hznet as hz
from hznet import milp
from hznet.network import (forward_eval, graph_set_over, network_graph_set,
                           output_set, read_network, relu_atom)
from hznet.reach import reach_tube, read_plant, verify_goal

from conftest import (PLANT_FILE, POLICY_FILE, oracle_all_leaves,
                      oracle_support, random_network)
from test_network import oracle_output_range


def report(name):
    print(f"PASS: {name}")


def test_relu_atom_exactness():
    """Grid membership of the relu graph, off-graph rejection, exact matrices."""
    for a in (1.0, 10.0, 100.0):
        Z = relu_atom(a)
        h = a / 2.0
        assert np.array_equal(Z.Gc, [[h, h, 0, 0], [h, 0, 0, 0]])
        assert np.array_equal(Z.Gb, [[0], [0]])
        assert np.array_equal(Z.c, [0, h])
        assert np.array_equal(Z.Ac, [[h, h, -h, -h], [h, 0, -h, 0]])
        assert np.array_equal(Z.Ab, [[-a], [-h]])
        assert np.array_equal(Z.b, [0, -h])
        leaves = milp.enumerate_feasible_leaves(Z)
        for v in np.linspace(-a, a, 1000):
            r = max(0.0, v)
            assert milp.contains_point(Z, [v, r], leaves=leaves)
            assert not milp.contains_point(Z, [v, r + 1e-3 * a], leaves=leaves)
            assert not milp.contains_point(Z, [v, r - 1e-3 * a], leaves=leaves)
    report("relu atom exact on 3 x 1000 grid points, matrices closed-form")


def test_count_formulas():
    rng = np.random.default_rng(20240501)
    for _ in range(50):
        hidden = [int(rng.integers(1, 11))
                  for _ in range(int(rng.integers(1, 4)))]
        widths = [int(rng.integers(1, 11))] + hidden + [int(rng.integers(1, 11))]
        net = random_network(rng, widths)
        F = network_graph_set(net, 5.0)
        n, n_N = net.input_dim, net.n_relu
        assert F.set.counts == (n + 4 * n_N, n_N, 3 * n_N)
    big = random_network(rng, [2, 20, 10, 10, 1])
    assert network_graph_set(big, 5.0).set.counts == (162, 40, 120)
    # reach ledger: every step adds (4 n_N, n_N, 3 n_N); the stacked set
    # shares factors, so its counts equal the final step's
    from hznet.network import Layer, ReluNetwork
    from hznet.reach import LinearPlant
    net = ReluNetwork((Layer([[1.0], [-1.0]], [0.0, 0.0], "relu"),
                       Layer([[0.2, -0.2]], [0.0], "none")))
    plant = LinearPlant([[0.5]], [[1.0]])
    tube = reach_tube(plant, net, hz.box([-1.0], [1.0]), K=4, a=8.0)
    for k in range(1, 5):
        prev, cur = tube.counts[k - 1], tube.counts[k]
        assert cur == (prev[0] + 8, prev[1] + 2, prev[2] + 6)
    assert tube.stacked.counts == tube.counts[-1]
    report("count formulas on 50 random architectures, 162/40/120 instance, "
           "reach ledger")


def test_network_exactness_vs_forward_oracle():
    rng = np.random.default_rng(777)
    for trial in range(20):
        depth = int(rng.integers(1, 3))
        hidden = []
        left = 12
        for _ in range(depth):
            w = int(rng.integers(2, min(7, left - (depth - len(hidden) - 1)) + 1))
            hidden.append(w)
            left -= w
        widths = [2] + hidden + [1]
        net = random_network(rng, widths, scale=0.6)
        F = network_graph_set(net, 8.0)
        for j in range(200):
            x = rng.uniform(-1.5, 1.5, size=2)
            y = forward_eval(net, x)
            p = np.concatenate([x, y])
            if j % 4 == 3:
                p[-1] += rng.choice([-1.0, 1.0]) * 0.01
                assert not milp.contains_point(F.set, p, tol=1e-6)
            else:
                assert milp.contains_point(F.set, p, tol=1e-6)
    report("graph-set membership matches forward evaluation on 20 nets x "
           "200 points (negatives included)")


def test_milp_vs_brute_force():
    from conftest import random_hz
    rng = np.random.default_rng(31337)
    for trial in range(100):
        n_b = int(rng.integers(0, 11))
        Z = random_hz(rng, dim=int(rng.integers(1, 4)),
                      n_g=int(rng.integers(1, 6)), n_b=n_b,
                      n_c=int(rng.integers(0, 4)),
                      force_feasible=trial % 3 != 2)
        d = rng.normal(size=Z.dim)
        want = oracle_support(Z, d)
        got = milp.support(Z, d)
        if want is None:
            assert got.status == "infeasible"
            assert milp.is_empty(Z)
        else:
            assert got.status == "optimal"
            assert abs(got.value - want) <= 1e-6
            assert not milp.is_empty(Z)
        want_leaves = [bits for bits, ok in oracle_all_leaves(Z) if ok]
        rep = milp.enumerate_feasible_leaves(Z)
        assert [a for a, ok in rep.leaves if ok] == want_leaves
    report("support / emptiness / leaf census equal exhaustive enumeration "
           "on 100 random sets")


def test_output_bounds_vs_activation_pattern_oracle():
    rng = np.random.default_rng(5150)
    for _ in range(10):
        hidden = [int(rng.integers(2, 6))]
        if rng.random() < 0.5:
            hidden.append(int(rng.integers(2, 11 - hidden[0])))
        net = random_network(rng, [2] + hidden + [1], scale=0.8)
        lo_x = rng.uniform(-1.5, -0.5, size=2)
        hi_x = lo_x + rng.uniform(0.5, 2.0, size=2)
        want_lo, want_hi = oracle_output_range(net, lo_x, hi_x)
        Y = output_set(network_graph_set(net, 30.0), hz.box(lo_x, hi_x))
        lo, hi = milp.interval_bounds(Y)
        assert abs(lo[0] - want_lo) <= 1e-6
        assert abs(hi[0] - want_hi) <= 1e-6
    report("output interval bounds equal activation-pattern enumeration on "
           "10 random nets")


def test_closed_loop_double_integrator():
    net = read_network(POLICY_FILE)
    plant = read_plant(PLANT_FILE)
    lo0, hi0 = np.array([2.5, -0.25]), np.array([3.0, 0.25])
    tube = reach_tube(plant, net, hz.box(lo0, hi0), K=5, a=10.0, stacked=True)
    reports = [milp.enumerate_feasible_leaves(R) for R in tube.per_step]
    rng = np.random.default_rng(424242)
    for _ in range(100):
        x = rng.uniform(lo0, hi0)
        for k in range(1, 6):
            x = plant.A @ x + plant.B @ forward_eval(net, x)
            assert milp.contains_point(tube.per_step[k], x, tol=1e-6,
                                       leaves=reports[k])
    H = np.vstack([np.eye(2), -np.eye(2)])
    good = verify_goal(tube, 5, H, np.full(4, 0.25))
    assert good.contained
    bad = verify_goal(tube, 5, H, np.full(4, 1e-4))
    assert not bad.contained and bad.witness is not None
    assert milp.contains_point(tube.per_step[5], bad.witness, tol=1e-6,
                               leaves=reports[5])
    assert tube.stacked.counts == tube.counts[-1]
    report("double-integrator tube contains 100 simulated trajectories; "
           "goal verdicts definite with witness; stacked counts match")


def test_geometry_facets():
    from hznet.geometry import export_faceted_surface, point_in_polygon
    rng = np.random.default_rng(606)
    covered = 0
    for _ in range(3):
        net = random_network(rng, [2, int(rng.integers(2, 5)), 1], scale=0.8)
        X = hz.box([-1.5, -1.5], [1.5, 1.5])
        G = graph_set_over(net, X, 25.0)
        surf = export_faceted_surface(G, (0, 1, 2))
        rep = milp.enumerate_feasible_leaves(G)
        assert surf.complete and surf.facet_count == rep.feasible_count
        for leaf in surf.leaves:
            for v in leaf.vertices:
                assert abs(forward_eval(net, v[:2])[0] - v[2]) <= 1e-6
        for _ in range(167):
            x = rng.uniform(-1.5, 1.5, size=2)
            assert any(point_in_polygon(leaf.vertices[:, :2], x, tol=1e-6)
                       for leaf in surf.leaves)
            covered += 1
    assert covered >= 500
    from hznet.network import Layer, ReluNetwork
    relu_net = ReluNetwork((Layer([[1.0]], [0.0], "relu"),
                            Layer([[1.0]], [0.0], "none")))
    surf = export_faceted_surface(network_graph_set(relu_net, 3.0), (0, 1))
    assert surf.facet_count == 2
    joints = [v for leaf in surf.leaves for v in leaf.vertices
              if abs(v[0]) < 1e-7]
    assert len(joints) == 2 and all(abs(v[1]) < 1e-7 for v in joints)
    report("facet counts equal leaf counts; 501 members covered; 1-neuron "
           "net splits into 2 facets at x = 0")


def test_output_file_determinism(tmp_path):
    """Two seeded end-to-end runs must leave byte-identical files."""
    from hznet.cli import main
    digests = []
    for tag in ("first", "second"):
        d = tmp_path / tag
        d.mkdir()
        main(["graph", POLICY_FILE, "--a", "10", "--out",
              str(d / "graph.json")])
        main(["plot", str(d / "graph.json"), "--dims", "0", "1", "2",
              "--out", str(d / "surface.json"), "--png",
              str(d / "surface.png")])
        main(["reach", POLICY_FILE, PLANT_FILE,
              "--init-box", "2.5", "-0.25", "3.0", "0.25",
              "--steps", "2", "--a", "10", "--stacked",
              "--out-dir", str(d / "tube")])
        main(["bounds", POLICY_FILE, "--a", "10",
              "--input-box", "2.5", "-0.25", "3.0", "0.25",
              "--out", str(d / "bounds.csv")])
        main(["leaves", str(d / "graph.json"), "--out",
              str(d / "leaves.json")])
        blob = b""
        for f in sorted(p for p in d.rglob("*") if p.is_file()):
            blob += f.name.encode() + f.read_bytes()
        digests.append(blob)
    assert digests[0] == digests[1]
    report("repeated seeded runs produce byte-identical output files "
           "(JSON, CSV, PNG)")
