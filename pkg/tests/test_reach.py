"""Closed-loop reachability: hand-checkable cases, count ledgers, and
simulation containment.

The simulator (plain forward evaluation plus the plant update) is the
independent oracle: every simulated state must lie in the computed set.
"""
import csv
import os

import numpy as np
import pytest

import hznet as hz
from hznet import milp
from hznet.network import Layer, ReluNetwork, forward_eval
from hznet.reach import (DomainValidationError, LinearPlant, closed_loop_step,
                         export_tube, reach_tube, read_plant, stacked_reach,
                         verify_goal, write_plant)
from hznet.sets import DimensionError

from conftest import random_network


def relu_id_net():
    """f(x) = relu(x), one neuron."""
    return ReluNetwork((Layer([[1.0]], [0.0], "relu"),
                        Layer([[1.0]], [0.0], "none")))


def test_plant_validation():
    with pytest.raises(DimensionError):
        LinearPlant(np.ones((2, 3)), np.ones((2, 1)))
    with pytest.raises(DimensionError):
        LinearPlant(np.eye(2), np.ones((3, 1)))
    P = LinearPlant(np.eye(2), np.ones((2, 1)))
    assert P.state_dim == 2 and P.input_dim == 1


def test_scalar_step_by_hand():
    """x+ = 0.5 x + relu(x) over [-2, 2] is exactly [-1, 3]."""
    plant = LinearPlant([[0.5]], [[1.0]])
    R1 = closed_loop_step(plant, relu_id_net(), hz.box([-2.0], [2.0]), 5.0)
    lo, hi = milp.interval_bounds(R1)
    assert lo[0] == pytest.approx(-1.0, abs=1e-7)
    assert hi[0] == pytest.approx(3.0, abs=1e-7)


def test_count_ledger():
    """Each step adds exactly (4 n_N, n_N, 3 n_N) to the factor counts."""
    rng = np.random.default_rng(2)
    net = random_network(rng, [2, 3, 2, 1], scale=0.3)
    plant = LinearPlant([[1.0, 0.1], [0.0, 1.0]], [[0.0], [0.1]])
    tube = reach_tube(plant, net, hz.box([-0.2, -0.2], [0.2, 0.2]),
                      K=3, a=20.0, stacked=False)
    n_N = net.n_relu
    for k in range(1, 4):
        prev, cur = tube.counts[k - 1], tube.counts[k]
        assert cur == (prev[0] + 4 * n_N, prev[1] + n_N, prev[2] + 3 * n_N)


def test_routes_agree():
    rng = np.random.default_rng(3)
    net = random_network(rng, [2, 3, 1], scale=0.4)
    plant = LinearPlant([[1.0, 0.2], [0.0, 0.9]], [[0.0], [0.2]])
    R0 = hz.box([-0.5, -0.5], [0.5, 0.5])
    Ra = closed_loop_step(plant, net, R0, 10.0, route="constructive")
    Rb = closed_loop_step(plant, net, R0, 10.0, route="compositional")
    for _ in range(4):
        d = rng.normal(size=2)
        assert milp.support_value(Ra, d) == pytest.approx(
            milp.support_value(Rb, d), abs=1e-7)
    with pytest.raises(ValueError):
        closed_loop_step(plant, net, R0, 10.0, route="magic")


def test_simulation_containment():
    rng = np.random.default_rng(4)
    net = random_network(rng, [2, 3, 1], scale=0.4)
    plant = LinearPlant([[1.0, 0.3], [0.0, 0.8]], [[0.0], [0.3]])
    lo0, hi0 = np.array([-0.5, -0.5]), np.array([0.5, 0.5])
    tube = reach_tube(plant, net, hz.box(lo0, hi0), K=3, a=15.0,
                      stacked=False)
    for _ in range(5):
        x = rng.uniform(lo0, hi0)
        for k in range(1, 4):
            x = plant.A @ x + plant.B @ forward_eval(net, x)
            assert milp.contains_point(tube.per_step[k], x)


def test_domain_validation_raises():
    plant = LinearPlant([[2.0]], [[1.0]])
    with pytest.raises(DomainValidationError, match="step 0"):
        closed_loop_step(plant, relu_id_net(), hz.box([-9.0], [9.0]), 5.0)
    # same check inside the tube recursion, later step
    with pytest.raises(DomainValidationError, match="step 2"):
        reach_tube(plant, relu_id_net(), hz.box([-1.0], [1.0]), K=3, a=4.0,
                   stacked=False)


def test_stacked_counts_match_final_step():
    rng = np.random.default_rng(5)
    net = random_network(rng, [2, 2, 1], scale=0.3)
    plant = LinearPlant([[1.0, 0.1], [0.0, 1.0]], [[0.0], [0.1]])
    R0 = hz.box([-0.2, -0.2], [0.2, 0.2])
    K = 3
    tube = reach_tube(plant, net, R0, K=K, a=10.0, stacked=True)
    assert tube.stacked is not None
    assert tube.stacked.dim == 2 * (K + 1)
    assert tube.stacked.counts == tube.counts[-1]


def test_stacked_projections_match_tube():
    """Every block of the stacked set projects onto that step's set."""
    rng = np.random.default_rng(6)
    net = random_network(rng, [1, 2, 1], scale=0.4)
    plant = LinearPlant([[0.8]], [[0.5]])
    R0 = hz.box([-1.0], [1.0])
    K = 2
    tube = reach_tube(plant, net, R0, K=K, a=10.0, stacked=True)
    for k in range(K + 1):
        sel = np.zeros((1, K + 1))
        sel[0, k] = 1.0
        block = hz.linear_map(sel, tube.stacked)
        for d in ([1.0], [-1.0]):
            assert milp.support_value(block, d) == pytest.approx(
                milp.support_value(tube.per_step[k], d), abs=1e-7)


def test_stacked_keeps_factor_memory():
    """Consecutive blocks must be coupled: the joint spread along
    (x_k, x_{k+1}) is smaller than the Cartesian box of the margins."""
    net = relu_id_net()
    plant = LinearPlant([[1.0]], [[1.0]])
    S = stacked_reach(plant, net, hz.box([0.5], [1.0]), K=1, a=5.0)
    # x1 = x0 + relu(x0) = 2 x0 here, so x1 - 2 x0 == 0 exactly
    diff = hz.linear_map(np.array([[-2.0, 1.0]]), S)
    lo, hi = milp.interval_bounds(diff)
    assert abs(lo[0]) < 1e-7 and abs(hi[0]) < 1e-7


def test_verify_goal_verdicts():
    net = relu_id_net()
    plant = LinearPlant([[0.5]], [[0.0]])  # control has no effect
    tube = reach_tube(plant, net, hz.box([-1.0], [1.0]), K=2, a=5.0,
                      stacked=False)
    H = np.array([[1.0], [-1.0]])
    good = verify_goal(tube, 2, H, [0.3, 0.3])
    assert good.contained
    bad = verify_goal(tube, 2, H, [0.2, 0.2])
    assert not bad.contained
    assert bad.witness is not None
    assert float(bad.violated_direction @ bad.witness) > 0.2
    assert milp.contains_point(tube.per_step[2], bad.witness)
    with pytest.raises(ValueError):
        verify_goal(tube, 5, H, [1.0, 1.0])


def test_plant_file_round_trip(tmp_path):
    plant = LinearPlant([[1.0, 1.0], [0.0, 1.0]], [[0.5], [1.0]])
    path = tmp_path / "plant.json"
    write_plant(plant, path)
    back = read_plant(path)
    assert np.array_equal(back.A, plant.A) and np.array_equal(back.B, plant.B)
    bad = tmp_path / "bad.json"
    bad.write_text('{"A": [[1]]}')
    with pytest.raises(DimensionError, match="'A' and 'B'"):
        read_plant(bad)


def test_export_tube(tmp_path):
    net = relu_id_net()
    plant = LinearPlant([[0.5]], [[0.1]])
    tube = reach_tube(plant, net, hz.box([-1.0], [1.0]), K=2, a=5.0)
    paths = export_tube(tube, tmp_path / "tube")
    names = [os.path.basename(p) for p in paths]
    assert names == ["step_000.json", "step_001.json", "step_002.json",
                     "manifest.csv", "stacked.json"]
    with open(tmp_path / "tube" / "manifest.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "file", "n_g", "n_b", "n_c"]
    assert len(rows) == 4
    assert tuple(int(v) for v in rows[2][2:]) == tube.counts[1]
    back = hz.read_set(tmp_path / "tube" / "step_001.json")
    assert back.counts == tube.counts[1]
