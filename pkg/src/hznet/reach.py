"""Closed-loop reachability of x_{k+1} = A x_k + B f(x_k).

Single steps, K-step tubes, the stacked extended-vector set sharing factors
across time, and goal-containment verdicts.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .milp import ContainmentResult, check_containment_in_polytope
from .network import (ReluNetwork, _append_network_image, graph_set_over,
                      network_graph_set, validate_domain)
from .sets import (DimensionError, HybridZonotope, generalized_intersection,
                   linear_map, to_dict, write_set)

__all__ = [
    "LinearPlant",
    "ReachTube",
    "DomainValidationError",
    "closed_loop_step",
    "reach_tube",
    "stacked_reach",
    "verify_goal",
    "read_plant",
    "write_plant",
    "export_tube",
]


class DomainValidationError(RuntimeError):
    """A pre-activation interval escapes [-a, a] at some step."""


@dataclass(frozen=True)
class LinearPlant:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DimensionError("plant: A must be square")
        if B.shape[0] != A.shape[0]:
            raise DimensionError("plant: B must have as many rows as A")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]


@dataclass
class ReachTube:
    per_step: list[HybridZonotope]
    stacked: HybridZonotope | None
    counts: list[tuple[int, int, int]]

    @property
    def steps(self) -> int:
        return len(self.per_step) - 1


def _check_pair(plant: LinearPlant, net: ReluNetwork) -> None:
    if plant.input_dim != net.output_dim:
        raise DimensionError(
            f"plant expects {plant.input_dim} control inputs, network "
            f"outputs {net.output_dim}")
    if plant.state_dim != net.input_dim:
        raise DimensionError(
            f"plant state dimension {plant.state_dim} != network input "
            f"dimension {net.input_dim}")


def _validate_step(net: ReluNetwork, R: HybridZonotope, a: float,
                   step: int) -> None:
    check = validate_domain(net, R, a)
    if not check.ok:
        raise DomainValidationError(f"step {step}: {check.message}")


def closed_loop_step(plant: LinearPlant, net: ReluNetwork,
                     R_k: HybridZonotope, a: float,
                     route: str = "constructive",
                     validate: bool = True,
                     step: int = 0) -> HybridZonotope:
    """One exact step A x + B f(x) over all x in R_k.

    The constructive route chains the network directly onto R_k; the
    compositional route intersects the standalone graph set with R_k (same
    point set, n extra constraint rows), kept for cross-validation.
    """
    _check_pair(plant, net)
    if validate:
        _validate_step(net, R_k, a, step)
    AB = np.hstack([plant.A, plant.B])
    if route == "constructive":
        return linear_map(AB, graph_set_over(net, R_k, a))
    if route == "compositional":
        F = network_graph_set(net, a)
        n, m = plant.state_dim, plant.input_dim
        restrict = np.hstack([np.eye(n), np.zeros((n, m))])
        return linear_map(AB, generalized_intersection(F.set, R_k, restrict))
    raise ValueError(f"unknown route {route!r}")


def reach_tube(plant: LinearPlant, net: ReluNetwork, R_0: HybridZonotope,
               K: int, a: float, stacked: bool = True,
               route: str = "constructive",
               validate: bool = True) -> ReachTube:
    """K-fold recursion of closed_loop_step, with a per-step counts ledger."""
    if K < 0:
        raise ValueError("reach_tube: K must be non-negative")
    per_step = [R_0]
    for k in range(K):
        per_step.append(closed_loop_step(plant, net, per_step[-1], a,
                                         route=route, validate=validate,
                                         step=k))
    counts = [R.counts for R in per_step]
    lifted = None
    if stacked:
        lifted = stacked_reach(plant, net, R_0, K, a, validate=False)
    return ReachTube(per_step, lifted, counts)


def stacked_reach(plant: LinearPlant, net: ReluNetwork, R_0: HybridZonotope,
                  K: int, a: float, validate: bool = True) -> HybridZonotope:
    """Lifted set of state histories [x_0; ...; x_K].

    Each new state block is appended onto the running lifted set, so every
    step's factors stay shared and the generator counts equal those of R_K
    alone: n_g = n_{g,0} + 4 K n_N, n_b = n_{b,0} + K n_N, while constraints
    grow by 3 n_N per step.
    """
    _check_pair(plant, net)
    n = plant.state_dim
    m = plant.input_dim
    T = R_0
    for k in range(K):
        N = T.dim
        if validate:
            block = np.zeros((n, N))
            block[:, N - n:] = np.eye(n)
            _validate_step(net, linear_map(block, T), a, k)
        sel = np.zeros((n, N))
        sel[:, N - n:] = np.eye(n)
        lifted = _append_network_image(T, sel, net, a, step=k)  # (hist, u)
        R = np.zeros((N + n, N + m))
        R[:N, :N] = np.eye(N)
        R[N:, N - n:N] = plant.A
        R[N:, N:] = plant.B
        T = linear_map(R, lifted)
    return T


def verify_goal(tube: ReachTube, k: int, H, h,
                tol: float = 1e-6) -> ContainmentResult:
    """Is the step-k reachable set inside the polytope {x : H x <= h}?"""
    if not 0 <= k < len(tube.per_step):
        raise ValueError(f"verify_goal: step {k} outside tube range")
    return check_containment_in_polytope(tube.per_step[k], H, h, tol=tol)


# -- file formats --------------------------------------------------------

def read_plant(path) -> LinearPlant:
    with open(path) as fh:
        d = json.load(fh)
    if "A" not in d or "B" not in d:
        raise DimensionError(f"{path}: plant file needs keys 'A' and 'B'")
    return LinearPlant(np.asarray(d["A"], dtype=float),
                       np.asarray(d["B"], dtype=float))


def write_plant(plant: LinearPlant, path) -> None:
    with open(path, "w") as fh:
        json.dump({"A": plant.A.tolist(), "B": plant.B.tolist()}, fh, indent=1)
        fh.write("\n")


def export_tube(tube: ReachTube, out_dir) -> list[str]:
    """Write per-step set files plus a counts manifest (CSV).

    Returns the written paths; the stacked set, when present, is written
    alongside as stacked.json.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    rows = []
    for k, R in enumerate(tube.per_step):
        name = f"step_{k:03d}.json"
        write_set(R, os.path.join(out_dir, name))
        paths.append(os.path.join(out_dir, name))
        rows.append((k, name) + R.counts)
    manifest = os.path.join(out_dir, "manifest.csv")
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "file", "n_g", "n_b", "n_c"])
        writer.writerows(rows)
    paths.append(manifest)
    if tube.stacked is not None:
        spath = os.path.join(out_dir, "stacked.json")
        with open(spath, "w") as fh:
            json.dump(to_dict(tube.stacked), fh, indent=1)
            fh.write("\n")
        paths.append(spath)
    return paths
