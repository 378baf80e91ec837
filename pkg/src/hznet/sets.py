"""Hybrid zonotope data model and the closed set-operation algebra.

A hybrid zonotope is the set

    { Gc @ xi_c + Gb @ xi_b + c  :  xi_c in [-1,1]^n_g,  xi_b in {-1,1}^n_b,
                                    Ac @ xi_c + Ab @ xi_b = b }

All values are immutable after construction; every operation here is a pure
function of its inputs and may be called concurrently.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FactorTag",
    "HybridZonotope",
    "linear_map",
    "affine_map",
    "minkowski_sum",
    "cartesian_product",
    "generalized_intersection",
    "union_shifted_pair",
    "fix_binaries",
    "box",
    "compress",
    "read_set",
    "write_set",
]


class DimensionError(ValueError):
    """Raised when operand dimensions are mutually inconsistent."""


@dataclass(frozen=True)
class FactorTag:
    """Provenance of one generator column.

    origin is one of "input-set", "relu-layer", "control"; for ReLU factors
    the (step, layer, neuron) triple records which activation introduced the
    column.  Tags travel with their columns through every operation and are
    never relabeled.
    """

    origin: str
    kind: str  # "continuous" | "binary"
    step: int = 0
    layer: int = -1
    neuron: int = -1


def _input_tags(count: int, kind: str) -> tuple[FactorTag, ...]:
    return tuple(FactorTag("input-set", kind) for _ in range(count))


def _as_matrix(M, rows: int | None, cols: int | None) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        A = A.reshape(rows if rows is not None else 0,
                      cols if cols is not None else 0)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class HybridZonotope:
    """Six-matrix hybrid zonotope ``<Gc, Gb, c, Ac, Ab, b>``."""

    Gc: np.ndarray
    Gb: np.ndarray
    c: np.ndarray
    Ac: np.ndarray
    Ab: np.ndarray
    b: np.ndarray
    ctags: tuple[FactorTag, ...] = field(default=(), compare=False)
    btags: tuple[FactorTag, ...] = field(default=(), compare=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.shape[0]
        Gc = _as_matrix(self.Gc, n, None)
        Gb = _as_matrix(self.Gb, n, None)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        nc = b.shape[0]
        Ac = _as_matrix(self.Ac, nc, Gc.shape[1])
        Ab = _as_matrix(self.Ab, nc, Gb.shape[1])
        if Gc.shape[0] != n or Gb.shape[0] != n:
            raise DimensionError("generator matrices must have n rows")
        if Ac.shape[0] != nc or Ab.shape[0] != nc:
            raise DimensionError("constraint matrices must have n_c rows")
        if Ac.shape[1] != Gc.shape[1]:
            raise DimensionError("Ac and Gc must share column count n_g")
        if Ab.shape[1] != Gb.shape[1]:
            raise DimensionError("Ab and Gb must share column count n_b")
        ctags = tuple(self.ctags) or _input_tags(Gc.shape[1], "continuous")
        btags = tuple(self.btags) or _input_tags(Gb.shape[1], "binary")
        if len(ctags) != Gc.shape[1] or len(btags) != Gb.shape[1]:
            raise DimensionError("factor tag lists must match generator counts")
        for name, arr in (("Gc", Gc), ("Gb", Gb), ("c", c),
                          ("Ac", Ac), ("Ab", Ab), ("b", b)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "ctags", ctags)
        object.__setattr__(self, "btags", btags)

    # -- shape accessors -------------------------------------------------
    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def n_g(self) -> int:
        return self.Gc.shape[1]

    @property
    def n_b(self) -> int:
        return self.Gb.shape[1]

    @property
    def n_c(self) -> int:
        return self.b.shape[0]

    @property
    def counts(self) -> tuple[int, int, int]:
        """(n_g, n_b, n_c) bookkeeping triple."""
        return (self.n_g, self.n_b, self.n_c)

    def point(self, xi_c: np.ndarray, xi_b: np.ndarray) -> np.ndarray:
        """Map a factor pair to ambient space (no feasibility check)."""
        xi_c = np.asarray(xi_c, dtype=float).reshape(self.n_g)
        xi_b = np.asarray(xi_b, dtype=float).reshape(self.n_b)
        return self.Gc @ xi_c + self.Gb @ xi_b + self.c

    def constraint_residual(self, xi_c, xi_b) -> float:
        xi_c = np.asarray(xi_c, dtype=float).reshape(self.n_g)
        xi_b = np.asarray(xi_b, dtype=float).reshape(self.n_b)
        if self.n_c == 0:
            return 0.0
        return float(np.max(np.abs(self.Ac @ xi_c + self.Ab @ xi_b - self.b)))

    def __repr__(self) -> str:
        return (f"HybridZonotope(dim={self.dim}, n_g={self.n_g}, "
                f"n_b={self.n_b}, n_c={self.n_c})")


def point_set(p) -> HybridZonotope:
    """The degenerate singleton {p} (no generators, no constraints)."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = p.shape[0]
    return HybridZonotope(np.zeros((n, 0)), np.zeros((n, 0)), p,
                          np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0))


def box(lo, hi, tags: tuple[FactorTag, ...] | None = None) -> HybridZonotope:
    """Axis-aligned box [lo, hi] as an unconstrained zonotope.

    Zero-width dimensions keep their (all-zero) generator columns so the
    count formulas stay exactly checkable.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise DimensionError("lo and hi must have equal length")
    if np.any(lo > hi):
        bad = int(np.argmax(lo > hi))
        raise ValueError(f"box: lo > hi in coordinate {bad}")
    n = lo.shape[0]
    G = np.diag((hi - lo) / 2.0)
    ctags = tags if tags is not None else _input_tags(n, "continuous")
    return HybridZonotope(G, np.zeros((n, 0)), (hi + lo) / 2.0,
                          np.zeros((0, n)), np.zeros((0, 0)), np.zeros(0),
                          ctags=ctags)


def linear_map(R, Z: HybridZonotope) -> HybridZonotope:
    """R @ Z = {R z : z in Z}. Factor counts and tags are unchanged."""
    R = _as_matrix(R, None, Z.dim)
    if R.shape[1] != Z.dim:
        raise DimensionError(
            f"linear_map: R has {R.shape[1]} columns, set has dimension {Z.dim}")
    return HybridZonotope(R @ Z.Gc, R @ Z.Gb, R @ Z.c, Z.Ac, Z.Ab, Z.b,
                          ctags=Z.ctags, btags=Z.btags)


def affine_map(R, t, Z: HybridZonotope) -> HybridZonotope:
    """R @ Z + t."""
    R = _as_matrix(R, None, Z.dim)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if R.shape[1] != Z.dim:
        raise DimensionError("affine_map: R columns must equal set dimension")
    if t.shape[0] != R.shape[0]:
        raise DimensionError("affine_map: offset length must equal R rows")
    return HybridZonotope(R @ Z.Gc, R @ Z.Gb, R @ Z.c + t, Z.Ac, Z.Ab, Z.b,
                          ctags=Z.ctags, btags=Z.btags)


def minkowski_sum(Z: HybridZonotope, W: HybridZonotope) -> HybridZonotope:
    """Z + W elementwise; generators concatenate, constraints block-diagonal."""
    if Z.dim != W.dim:
        raise DimensionError("minkowski_sum: operands must share dimension")
    Gc = np.hstack([Z.Gc, W.Gc])
    Gb = np.hstack([Z.Gb, W.Gb])
    Ac = _blockdiag(Z.Ac, W.Ac)
    Ab = _blockdiag(Z.Ab, W.Ab)
    return HybridZonotope(Gc, Gb, Z.c + W.c, Ac, Ab,
                          np.concatenate([Z.b, W.b]),
                          ctags=Z.ctags + W.ctags, btags=Z.btags + W.btags)


def cartesian_product(Z: HybridZonotope, Y: HybridZonotope) -> HybridZonotope:
    """(Z, Y) stacked; all six blocks become block-diagonal."""
    Gc = _blockdiag(Z.Gc, Y.Gc)
    Gb = _blockdiag(Z.Gb, Y.Gb)
    Ac = _blockdiag(Z.Ac, Y.Ac)
    Ab = _blockdiag(Z.Ab, Y.Ab)
    return HybridZonotope(Gc, Gb, np.concatenate([Z.c, Y.c]), Ac, Ab,
                          np.concatenate([Z.b, Y.b]),
                          ctags=Z.ctags + Y.ctags, btags=Z.btags + Y.btags)


def generalized_intersection(Z: HybridZonotope, Y: HybridZonotope,
                             R) -> HybridZonotope:
    """Z inter_R Y = {z in Z : R z in Y}.

    Keeps Z's generators, appends Y's generators with zero output blocks,
    and adds dim(Y) coupling rows equating R(z) with Y's parameterization.
    """
    R = _as_matrix(R, Y.dim, Z.dim)
    if R.shape != (Y.dim, Z.dim):
        raise DimensionError(
            f"generalized_intersection: R must be {Y.dim}x{Z.dim}, got {R.shape}")
    n = Z.dim
    Gc = np.hstack([Z.Gc, np.zeros((n, Y.n_g))])
    Gb = np.hstack([Z.Gb, np.zeros((n, Y.n_b))])
    Ac = np.vstack([
        np.hstack([Z.Ac, np.zeros((Z.n_c, Y.n_g))]),
        np.hstack([np.zeros((Y.n_c, Z.n_g)), Y.Ac]),
        np.hstack([R @ Z.Gc, -Y.Gc]),
    ])
    Ab = np.vstack([
        np.hstack([Z.Ab, np.zeros((Z.n_c, Y.n_b))]),
        np.hstack([np.zeros((Y.n_c, Z.n_b)), Y.Ab]),
        np.hstack([R @ Z.Gb, -Y.Gb]),
    ])
    b = np.concatenate([Z.b, Y.b, Y.c - R @ Z.c])
    return HybridZonotope(Gc, Gb, Z.c, Ac, Ab, b,
                          ctags=Z.ctags + Y.ctags, btags=Z.btags + Y.btags)


def union_shifted_pair(G, c_minus, c_plus,
                       btag: FactorTag | None = None) -> HybridZonotope:
    """Union of two zonotopes <G, c_minus> and <G, c_plus>.

    One binary generator selects the center; the result is unconstrained.
    """
    c_minus = np.atleast_1d(np.asarray(c_minus, dtype=float))
    c_plus = np.atleast_1d(np.asarray(c_plus, dtype=float))
    G = _as_matrix(G, c_minus.shape[0], None)
    if c_minus.shape != c_plus.shape or G.shape[0] != c_minus.shape[0]:
        raise DimensionError("union_shifted_pair: inconsistent dimensions")
    n = c_minus.shape[0]
    Gb = ((c_plus - c_minus) / 2.0).reshape(n, 1)
    c = (c_plus + c_minus) / 2.0
    btags = (btag if btag is not None else FactorTag("input-set", "binary"),)
    return HybridZonotope(G, Gb, c, np.zeros((0, G.shape[1])),
                          np.zeros((0, 1)), np.zeros(0), btags=btags)


def fix_binaries(Z: HybridZonotope, assignment) -> HybridZonotope:
    """The constrained-zonotope leaf obtained by fixing all binary factors."""
    xi_b = np.atleast_1d(np.asarray(assignment, dtype=float))
    if xi_b.shape[0] != Z.n_b:
        raise DimensionError(
            f"fix_binaries: assignment length {xi_b.shape[0]} != n_b {Z.n_b}")
    if Z.n_b and not np.all(np.abs(np.abs(xi_b) - 1.0) < 1e-12):
        raise ValueError("fix_binaries: assignment entries must be +/-1")
    if Z.n_b == 0:
        return Z
    n = Z.dim
    return HybridZonotope(Z.Gc, np.zeros((n, 0)), Z.c + Z.Gb @ xi_b,
                          Z.Ac, np.zeros((Z.n_c, 0)), Z.b - Z.Ab @ xi_b,
                          ctags=Z.ctags)


def compress(Z: HybridZonotope) -> HybridZonotope:
    """Drop all-zero generator columns and exactly-duplicate/zero constraint rows.

    Never applied implicitly; counts elsewhere follow the uncompressed
    closed-form identities.
    """
    keep_c = [j for j in range(Z.n_g)
              if np.any(Z.Gc[:, j]) or np.any(Z.Ac[:, j])]
    keep_b = [j for j in range(Z.n_b)
              if np.any(Z.Gb[:, j]) or np.any(Z.Ab[:, j])]
    Gc, Ac = Z.Gc[:, keep_c], Z.Ac[:, keep_c]
    Gb, Ab = Z.Gb[:, keep_b], Z.Ab[:, keep_b]
    rows = np.hstack([Ac, Ab, Z.b.reshape(-1, 1)])
    keep_r: list[int] = []
    for i in range(rows.shape[0]):
        if not np.any(rows[i]):
            continue
        if any(np.array_equal(rows[i], rows[k]) for k in keep_r):
            continue
        keep_r.append(i)
    return HybridZonotope(Gc, Gb, Z.c, Ac[keep_r], Ab[keep_r], Z.b[keep_r],
                          ctags=tuple(Z.ctags[j] for j in keep_c),
                          btags=tuple(Z.btags[j] for j in keep_b))


def _blockdiag(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0], A.shape[1] + B.shape[1]))
    out[:A.shape[0], :A.shape[1]] = A
    out[A.shape[0]:, A.shape[1]:] = B
    return out


# -- JSON interchange ----------------------------------------------------

def to_dict(Z: HybridZonotope) -> dict:
    """Interchange dict with keys Gc,Gb,c,Ac,Ab,b; empty blocks omitted."""
    out: dict = {"c": Z.c.tolist()}
    if Z.n_g:
        out["Gc"] = Z.Gc.tolist()
    if Z.n_b:
        out["Gb"] = Z.Gb.tolist()
    if Z.n_c:
        out["Ac"] = Z.Ac.tolist()
        out["Ab"] = Z.Ab.tolist()
        out["b"] = Z.b.tolist()
    return out


def from_dict(d: dict) -> HybridZonotope:
    c = np.asarray(d["c"], dtype=float)
    n = c.shape[0]
    Gc = np.asarray(d["Gc"], dtype=float) if "Gc" in d else np.zeros((n, 0))
    Gb = np.asarray(d["Gb"], dtype=float) if "Gb" in d else np.zeros((n, 0))
    b = np.asarray(d.get("b", []), dtype=float)
    nc = b.shape[0]
    Ac = (np.asarray(d["Ac"], dtype=float) if "Ac" in d
          else np.zeros((nc, Gc.shape[1] if Gc.size else np.shape(Gc)[1])))
    Ab = (np.asarray(d["Ab"], dtype=float) if "Ab" in d
          else np.zeros((nc, Gb.shape[1])))
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b)


def write_set(Z: HybridZonotope, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(Z), fh, indent=1)
        fh.write("\n")


def read_set(path) -> HybridZonotope:
    with open(path) as fh:
        return from_dict(json.load(fh))
