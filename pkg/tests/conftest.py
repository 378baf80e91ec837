"""Shared generators and independent oracles for the test suite.

The oracles deliberately avoid the package's own solver: exhaustive leaf
enumeration backed by scipy.optimize.linprog, plus direct forward
evaluation of networks.
"""
import itertools
import os

import numpy as np
import pytest

from hznet import HybridZonotope
from hznet.network import Layer, ReluNetwork

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..",
                        "src", "hznet", "data")
PLANT_FILE = os.path.join(DATA_DIR, "double_integrator_plant.json")
POLICY_FILE = os.path.join(DATA_DIR, "double_integrator_policy.json")


def random_hz(rng, dim=2, n_g=4, n_b=3, n_c=2, force_feasible=True):
    """Random hybrid zonotope; constraints anchored at a feasible factor
    pair unless force_feasible is off (then the set may well be empty)."""
    Gc = rng.normal(size=(dim, n_g))
    Gb = rng.normal(size=(dim, n_b)) if n_b else np.zeros((dim, 0))
    c = rng.normal(size=dim)
    Ac = rng.normal(size=(n_c, n_g)) if n_c else np.zeros((0, n_g))
    Ab = rng.normal(size=(n_c, n_b)) if n_c else np.zeros((0, n_b))
    if force_feasible and n_c:
        xi_c = rng.uniform(-1, 1, size=n_g)
        xi_b = rng.choice([-1.0, 1.0], size=n_b)
        b = Ac @ xi_c + Ab @ xi_b
    elif n_c:
        b = rng.normal(size=n_c)
    else:
        b = np.zeros(0)
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b)


def random_network(rng, widths, scale=0.7):
    layers = []
    for i in range(len(widths) - 1):
        act = "relu" if i < len(widths) - 2 else "none"
        layers.append(Layer(rng.normal(size=(widths[i + 1], widths[i])) * scale,
                            rng.normal(size=widths[i + 1]) * 0.3, act))
    return ReluNetwork(layers)


def _linprog(c, A_eq, b_eq, bounds, maximize=False):
    from scipy.optimize import linprog
    sign = -1.0 if maximize else 1.0
    res = linprog(sign * np.asarray(c, dtype=float), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if not res.success:
        return None
    return sign * res.fun, res.x


def oracle_leaf_support(Z, xi_b, d):
    """scipy LP over one fixed leaf; None when the leaf is empty."""
    xi_b = np.asarray(xi_b, dtype=float)
    A_eq = Z.Ac if Z.n_c else None
    b_eq = (Z.b - Z.Ab @ xi_b) if Z.n_c else None
    got = _linprog(Z.Gc.T @ d, A_eq, b_eq, [(-1, 1)] * Z.n_g, maximize=True)
    if got is None:
        return None
    val, xi_c = got
    return val + float(d @ (Z.c + Z.Gb @ xi_b))


def oracle_all_leaves(Z):
    """Exhaustive list of (assignment, feasible) over all 2^n_b leaves."""
    out = []
    zero = np.zeros(Z.dim)
    for bits in itertools.product([-1, 1], repeat=Z.n_b):
        out.append((bits, oracle_leaf_support(Z, bits, zero) is not None))
    return out


def oracle_support(Z, d):
    """Exhaustive support value, or None for an empty set."""
    best = None
    for bits in itertools.product([-1, 1], repeat=Z.n_b):
        val = oracle_leaf_support(Z, bits, np.asarray(d, dtype=float))
        if val is not None and (best is None or val > best):
            best = val
    return best


def oracle_contains(Z, p, tol=1e-6):
    """Exhaustive membership: some leaf holds a point within tol of p."""
    p = np.asarray(p, dtype=float)
    for bits in itertools.product([-1, 1], repeat=Z.n_b):
        xi_b = np.asarray(bits, dtype=float)
        A_eq = [Z.Ac] if Z.n_c else []
        rows = np.vstack(A_eq + [Z.Gc]) if A_eq else Z.Gc
        # slack variables absorb the tolerance on the membership rows
        n = Z.dim
        A = np.hstack([rows, np.vstack([np.zeros((Z.n_c, n)), -np.eye(n)])])
        b = np.concatenate([(Z.b - Z.Ab @ xi_b) if Z.n_c else np.zeros(0),
                            p - Z.c - Z.Gb @ xi_b])
        bounds = [(-1, 1)] * Z.n_g + [(-tol, tol)] * n
        if _linprog(np.zeros(Z.n_g + n), A, b, bounds) is not None:
            return True
    return False


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
