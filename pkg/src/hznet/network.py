"""Exact hybrid-zonotope graph sets for ReLU networks.

A feed-forward ReLU network f : R^n -> R^m is represented exactly as the
set of input-output pairs [x; f(x)] over a bounded domain, built from one
two-dimensional activation atom per neuron plus inter-layer coupling rows.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .sets import (DimensionError, FactorTag, HybridZonotope, affine_map,
                   box, cartesian_product, generalized_intersection,
                   linear_map, point_set)

__all__ = [
    "Layer",
    "ReluNetwork",
    "GraphSet",
    "relu_atom",
    "interleave_transform",
    "layer_graph_set",
    "graph_set_over",
    "network_graph_set",
    "output_set",
    "forward_eval",
    "validate_domain",
    "read_network",
    "write_network",
]

RELU = "relu"
NONE = "none"


class NetworkFormatError(ValueError):
    """Malformed network description; message carries the offending field."""


@dataclass(frozen=True)
class Layer:
    W: np.ndarray
    b: np.ndarray
    activation: str

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if W.shape[0] != b.shape[0]:
            raise NetworkFormatError(
                f"layer: W has {W.shape[0]} rows but b has length {b.shape[0]}")
        if self.activation not in (RELU, NONE):
            raise NetworkFormatError(
                f"layer: unknown activation {self.activation!r}")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class ReluNetwork:
    """Ordered affine layers; all hidden layers ReLU, the last affine."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise NetworkFormatError("network must have at least one layer")
        for i in range(1, len(layers)):
            want = layers[i - 1].W.shape[0]
            got = layers[i].W.shape[1]
            if want != got:
                raise NetworkFormatError(
                    f"layers[{i}].W: expected {want} columns to chain with "
                    f"layers[{i - 1}], got {got}")
        for i, layer in enumerate(layers[:-1]):
            if layer.activation != RELU:
                raise NetworkFormatError(
                    f"layers[{i}].activation: hidden layers must be 'relu'")
        if layers[-1].activation != NONE:
            raise NetworkFormatError(
                "layers[-1].activation: final layer must be 'none'")
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].W.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].W.shape[0]

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(layer.W.shape[0] for layer in self.layers[:-1])

    @property
    def n_relu(self) -> int:
        """Total ReLU activation count."""
        return sum(self.hidden_widths)

    def content_hash(self) -> str:
        payload = json.dumps(
            [[l.W.tolist(), l.b.tolist(), l.activation] for l in self.layers])
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class GraphSet:
    """Input-output set of a network over the domain box [-a, a]^n."""

    set: HybridZonotope
    input_dim: int
    output_dim: int
    domain_radius: float
    net_hash: str


def forward_eval(net: ReluNetwork, x) -> np.ndarray:
    """Exact feed-forward evaluation; the ground-truth oracle."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape[0] != net.input_dim:
        raise DimensionError(
            f"input length {v.shape[0]} != network input dim {net.input_dim}")
    for layer in net.layers:
        v = layer.W @ v + layer.b
        if layer.activation == RELU:
            v = np.maximum(v, 0.0)
    return v


def relu_atom(a: float, tag_args: tuple[int, int, int] = (0, 0, 0)
              ) -> HybridZonotope:
    """The 2-D set {(v, max(0, v)) : |v| <= a}.

    Exactly the union-of-shifted-parallelograms construction; 4 continuous
    generators, 1 binary generator, 2 constraints.
    """
    if a <= 0:
        raise ValueError("relu_atom: domain radius a must be positive")
    h = a / 2.0
    Gc = np.array([[h, h, 0.0, 0.0], [h, 0.0, 0.0, 0.0]])
    Gb = np.array([[0.0], [0.0]])
    c = np.array([0.0, h])
    Ac = np.array([[h, h, -h, -h], [h, 0.0, -h, 0.0]])
    Ab = np.array([[-a], [-h]])
    b = np.array([0.0, -h])
    step, layer, neuron = tag_args
    ctags = tuple(FactorTag("relu-layer", "continuous", step, layer, neuron)
                  for _ in range(4))
    btags = (FactorTag("relu-layer", "binary", step, layer, neuron),)
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b, ctags=ctags, btags=btags)


def interleave_transform(width: int) -> np.ndarray:
    """Permutation sending (v1, x1, ..., vw, xw) to (v1..vw, x1..xw)."""
    if width < 1:
        raise ValueError("interleave_transform: width must be >= 1")
    eye = np.eye(width)
    return np.vstack([np.kron(eye, np.array([[1.0, 0.0]])),
                      np.kron(eye, np.array([[0.0, 1.0]]))])


def layer_graph_set(width: int, a: float, step: int = 0,
                    layer: int = 0) -> HybridZonotope:
    """Stacked activation atoms for one layer: coords (v_1..v_w, x_1..x_w)."""
    if width < 1:
        raise ValueError("layer_graph_set: width must be >= 1")
    prod = relu_atom(a, (step, layer, 0))
    for i in range(1, width):
        prod = cartesian_product(prod, relu_atom(a, (step, layer, i)))
    return linear_map(interleave_transform(width), prod)


def _append_network_image(S: HybridZonotope, input_rows: np.ndarray,
                          net: ReluNetwork, a: float,
                          step: int = 0) -> HybridZonotope:
    """Lift S in R^N to {(s, f(Sel s)) : s in S} in R^{N+m}.

    input_rows is the n x N selector picking the network input out of s.
    Adds 4*n_N continuous generators, n_N binaries, and 3*n_N constraints.
    """
    N = S.dim
    sel = np.vstack([np.eye(N), input_rows])
    M = linear_map(sel, S)  # (s, x0)
    prev = net.input_dim
    for li, layer in enumerate(net.layers[:-1]):
        w = layer.W.shape[0]
        # (s, x_l) -> (s, v_{l+1})
        R = np.zeros((N + w, N + prev))
        R[:N, :N] = np.eye(N)
        R[N:, N:] = layer.W
        t = np.concatenate([np.zeros(N), layer.b])
        M = affine_map(R, t, M)
        atoms = layer_graph_set(w, a, step, li)
        P = cartesian_product(M, atoms)  # (s, v, v', x_new)
        couple = np.zeros((w, N + 3 * w))
        couple[:, N:N + w] = np.eye(w)
        couple[:, N + w:N + 2 * w] = -np.eye(w)
        P = generalized_intersection(P, point_set(np.zeros(w)), couple)
        keep = np.zeros((N + w, N + 3 * w))
        keep[:N, :N] = np.eye(N)
        keep[N:, N + 2 * w:] = np.eye(w)
        M = linear_map(keep, P)  # (s, x_{l+1})
        prev = w
    final = net.layers[-1]
    m = final.W.shape[0]
    R = np.zeros((N + m, N + prev))
    R[:N, :N] = np.eye(N)
    R[N:, N:] = final.W
    t = np.concatenate([np.zeros(N), final.b])
    return affine_map(R, t, M)


def graph_set_over(net: ReluNetwork, X: HybridZonotope,
                   a: float) -> HybridZonotope:
    """Constructive graph set {(x, f(x)) : x in X} in R^{n+m}.

    Counts: n_g = n_{g,x} + 4 n_N, n_b = n_{b,x} + n_N, n_c = n_{c,x} + 3 n_N.
    The caller certifies (e.g. via validate_domain) that every pre-activation
    over X stays within [-a, a].
    """
    if X.dim != net.input_dim:
        raise DimensionError(
            f"input set dimension {X.dim} != network input dim {net.input_dim}")
    if a <= 0:
        raise ValueError("graph_set_over: domain radius a must be positive")
    return _append_network_image(X, np.eye(X.dim), net, a)


def network_graph_set(net: ReluNetwork, a: float) -> GraphSet:
    """Graph set over the full domain box [-a, a]^n, reusable for any input set."""
    n = net.input_dim
    domain = box(-a * np.ones(n), a * np.ones(n))
    F = graph_set_over(net, domain, a)
    return GraphSet(F, n, net.output_dim, float(a), net.content_hash())


def output_set(F: GraphSet, X: HybridZonotope) -> HybridZonotope:
    """Outputs {f(x) : x in X} via the compositional route.

    Intersects the reusable graph set with X on the input coordinates, then
    projects onto the output block.
    """
    n, m = F.input_dim, F.output_dim
    if X.dim != n:
        raise DimensionError(
            f"input set dimension {X.dim} != graph-set input dim {n}")
    restrict = np.hstack([np.eye(n), np.zeros((n, m))])
    inter = generalized_intersection(F.set, X, restrict)
    project = np.hstack([np.zeros((m, n)), np.eye(m)])
    return linear_map(project, inter)


@dataclass(frozen=True)
class DomainCheck:
    ok: bool
    preactivation_bounds: tuple[tuple[np.ndarray, np.ndarray], ...]
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_domain(net: ReluNetwork, X: HybridZonotope,
                    a: float) -> DomainCheck:
    """Interval-arithmetic check that all pre-activations over X fit in [-a, a].

    Conservative: propagates the bounding box of X layer by layer, so it may
    reject a valid radius but never accepts an invalid one.
    """
    from .milp import interval_bounds  # local import; milp sits above sets only

    if X.dim != net.input_dim:
        raise DimensionError("validate_domain: input set dimension mismatch")
    lo, hi = interval_bounds(X)
    per_layer: list[tuple[np.ndarray, np.ndarray]] = []
    ok = True
    message = ""
    for li, layer in enumerate(net.layers[:-1]):
        mid = (lo + hi) / 2.0
        rad = (hi - lo) / 2.0
        vmid = layer.W @ mid + layer.b
        vrad = np.abs(layer.W) @ rad
        vlo, vhi = vmid - vrad, vmid + vrad
        per_layer.append((vlo, vhi))
        if ok and (np.any(vlo < -a) or np.any(vhi > a)):
            i = int(np.argmax(np.maximum(-a - vlo, vhi - a)))
            message = (f"pre-activation of layer {li} neuron {i} spans "
                       f"[{vlo[i]:.17g}, {vhi[i]:.17g}], outside [-{a:.17g}, "
                       f"{a:.17g}]")
            ok = False
        lo, hi = np.maximum(vlo, 0.0), np.maximum(vhi, 0.0)
    return DomainCheck(ok, tuple(per_layer), message)


# -- JSON interchange ----------------------------------------------------

def network_to_dict(net: ReluNetwork) -> dict:
    return {"layers": [{"W": l.W.tolist(), "b": l.b.tolist(),
                        "activation": l.activation} for l in net.layers]}


def network_from_dict(d: dict) -> ReluNetwork:
    if "layers" not in d or not isinstance(d["layers"], list):
        raise NetworkFormatError("missing 'layers' list")
    layers = []
    for i, entry in enumerate(d["layers"]):
        for key in ("W", "b", "activation"):
            if key not in entry:
                raise NetworkFormatError(f"layers[{i}]: missing field {key!r}")
        try:
            layers.append(Layer(np.asarray(entry["W"], dtype=float),
                                np.asarray(entry["b"], dtype=float),
                                str(entry["activation"])))
        except (ValueError, TypeError) as exc:
            raise NetworkFormatError(f"layers[{i}]: {exc}") from exc
    return ReluNetwork(tuple(layers))


def write_network(net: ReluNetwork, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=1)
        fh.write("\n")


def read_network(path) -> ReluNetwork:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return network_from_dict(data)
