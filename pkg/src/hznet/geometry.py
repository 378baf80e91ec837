"""Exact 2-D polygon extraction of hybrid zonotope projections, leaf by leaf.

Each fixed-binaries leaf is convex; its planar projection is recovered by
support LPs in adaptively refined directions, so every reported vertex is an
LP optimum of the leaf itself.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .milp import factor_program, enumerate_feasible_leaves, solve_lp
from .network import GraphSet
from .sets import HybridZonotope, fix_binaries

__all__ = [
    "LeafPolygon",
    "SurfaceExport",
    "project_leaf_polygon",
    "export_faceted_surface",
    "point_in_polygon",
    "write_surface",
    "read_surface",
]

_ANGLE_TOL = 1e-10
_MERGE_TOL = 1e-9


class InfeasibleLeafError(ValueError):
    """The requested binary assignment admits no continuous factors."""


@dataclass
class LeafPolygon:
    """Convex polygon, counter-clockwise, implicitly closed."""

    assignment: tuple[int, ...]
    vertices: np.ndarray            # v x 2
    degenerate: bool = False        # point or segment leaf
    lifted: np.ndarray | None = None  # v x full-dim support points


@dataclass
class SurfaceExport:
    dims: tuple[int, ...]
    leaves: list[LeafPolygon]
    complete: bool = True

    @property
    def facet_count(self) -> int:
        return len(self.leaves)


def _projection_matrix(Z: HybridZonotope, dims) -> np.ndarray:
    P = np.asarray(dims, dtype=float)
    if P.ndim == 2:
        if P.shape != (2, Z.dim):
            raise ValueError(f"projection matrix must be 2x{Z.dim}")
        if np.linalg.matrix_rank(P) < 2:
            raise ValueError("projection matrix must have rank 2")
        return P
    i, j = (int(d) for d in dims)
    P = np.zeros((2, Z.dim))
    P[0, i] = 1.0
    P[1, j] = 1.0
    return P


def _leaf_support(leaf: HybridZonotope, d: np.ndarray):
    res = solve_lp(factor_program(leaf, objective_z=d))
    if res.status != "optimal":
        return None
    return res.value, leaf.point(res.xi_c, res.xi_b)


def project_leaf_polygon(Z: HybridZonotope, dims, assignment=(),
                         tol: float = 1e-9) -> LeafPolygon:
    """Vertices of the leaf's 2-D projection via support-function wrapping.

    Directions rotate counter-clockwise from (1, 0); an arc is subdivided
    while the support along its chord's outward normal clears the chord, so
    the hull closes exactly to LP tolerance.  Degenerate (point/segment)
    leaves come back with 1-2 vertices and a flag.
    """
    assignment = tuple(int(v) for v in np.atleast_1d(
        np.asarray(assignment, dtype=float)).astype(int)) if Z.n_b else ()
    leaf = fix_binaries(Z, list(assignment)) if Z.n_b else Z
    P = _projection_matrix(Z, dims)

    def probe(theta):
        d2 = np.array([math.cos(theta), math.sin(theta)])
        got = _leaf_support(leaf, P.T @ d2)
        if got is None:
            raise InfeasibleLeafError(
                f"assignment {assignment} is infeasible")
        _, z = got
        return (theta, d2, z)

    entries = [probe(t) for t in
               (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)]
    scale = max(1.0, max(float(np.max(np.abs(P @ z))) for _, _, z in entries))
    gap = tol * scale

    out: list[tuple[float, np.ndarray]] = []  # (theta, full point)

    def refine(e1, e2):
        t1, _, z1 = e1
        t2, _, z2 = e2
        out.append((t1, z1))
        if t2 - t1 <= _ANGLE_TOL:
            return
        p1, p2 = P @ z1, P @ z2
        edge = p2 - p1
        length = float(np.hypot(edge[0], edge[1]))
        if length <= gap:
            return  # both arcs' support points coincide; nothing between
        # Probe along the chord's outward normal: anything of the set beyond
        # the chord must beat p1 there, which an angle bisector can miss
        # when a tied direction hides an intermediate vertex.
        dn = np.array([edge[1], -edge[0]]) / length
        tn = math.atan2(dn[1], dn[0]) % (2.0 * math.pi)
        while tn < t1:
            tn += 2.0 * math.pi
        if not t1 + _ANGLE_TOL < tn < t2 - _ANGLE_TOL:
            return
        em = probe(tn)
        _, dm, zm = em
        if float(dm @ (P @ zm - p1)) > gap:
            refine(e1, em)
            refine(em, e2)

    for k in range(4):
        refine(entries[k], entries[(k + 1) % 4] if k < 3 else
               (2 * math.pi, entries[0][1], entries[0][2]))

    pts = [z for _, z in out]
    verts2d = [P @ z for z in pts]
    keep = _dedupe_and_merge(verts2d, gap)
    vertices = np.array([verts2d[i] for i in keep])
    lifted = np.array([pts[i] for i in keep])
    return LeafPolygon(assignment, vertices, degenerate=len(keep) < 3,
                       lifted=lifted)


def _dedupe_and_merge(verts: list[np.ndarray], gap: float) -> list[int]:
    """Indices of distinct, non-collinear vertices (cyclic CCW order)."""
    keep: list[int] = []
    for i, v in enumerate(verts):
        if keep and np.max(np.abs(v - verts[keep[-1]])) <= gap:
            continue
        keep.append(i)
    if len(keep) > 1 and np.max(np.abs(verts[keep[0]] - verts[keep[-1]])) <= gap:
        keep.pop()
    changed = True
    while changed and len(keep) > 2:
        changed = False
        for k in range(len(keep)):
            a = verts[keep[k - 1]]
            b = verts[keep[k]]
            c = verts[keep[(k + 1) % len(keep)]]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if abs(cross) <= gap * max(1.0, np.max(np.abs(c - a))):
                keep.pop(k)
                changed = True
                break
    return keep


def export_faceted_surface(F: GraphSet, dims, cap: int = 100_000,
                           tol: float = 1e-9) -> SurfaceExport:
    """One planar facet per feasible leaf of a graph set.

    dims is (input_i, input_j, output_k) for a 3-D surface, or any pair of
    coordinates for a flat 2-D view.  Each leaf is affine in its inputs, so
    the facet is the input-projection polygon carried through the leaf's
    affine map (the full-dimensional LP support points).
    """
    Z = F.set if isinstance(F, GraphSet) else F
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise ValueError("dims must name 2 or 3 coordinates")
    for d in dims:
        if not 0 <= d < Z.dim:
            raise ValueError(f"dims: coordinate {d} outside set dimension {Z.dim}")
    report = enumerate_feasible_leaves(Z, cap=cap)
    leaves: list[LeafPolygon] = []
    for assignment, ok in report.leaves:
        if not ok:
            continue
        poly = project_leaf_polygon(Z, dims[:2], assignment, tol=tol)
        if len(dims) == 3:
            coords = np.array(dims)
            poly = LeafPolygon(poly.assignment,
                               poly.lifted[:, coords],
                               degenerate=poly.degenerate,
                               lifted=poly.lifted)
        leaves.append(poly)
    return SurfaceExport(dims, leaves, complete=report.complete)


def point_in_polygon(vertices: np.ndarray, p, tol: float = 1e-6) -> bool:
    """Membership in a convex CCW polygon; handles point/segment degeneracy."""
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    p = np.asarray(p, dtype=float)
    if V.shape[0] == 1:
        return bool(np.max(np.abs(p - V[0])) <= tol)
    if V.shape[0] == 2:
        a, b = V
        ab = b - a
        L2 = float(ab @ ab)
        t = 0.0 if L2 == 0 else float(np.clip((p - a) @ ab / L2, 0.0, 1.0))
        return bool(np.max(np.abs(a + t * ab - p)) <= tol)
    for k in range(V.shape[0]):
        a = V[k]
        b = V[(k + 1) % V.shape[0]]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -tol * max(1.0, float(np.max(np.abs(b - a)))):
            return False
    return True


# -- polygon/surface file ------------------------------------------------

def surface_to_dict(surface: SurfaceExport) -> dict:
    return {
        "dims": list(surface.dims),
        "complete": surface.complete,
        "leaves": [{
            "binary": list(leaf.assignment),
            "vertices": leaf.vertices.tolist(),
            "degenerate": leaf.degenerate,
        } for leaf in surface.leaves],
    }


def write_surface(surface: SurfaceExport, path) -> None:
    with open(path, "w") as fh:
        json.dump(surface_to_dict(surface), fh, indent=1)
        fh.write("\n")


def read_surface(path) -> SurfaceExport:
    with open(path) as fh:
        d = json.load(fh)
    leaves = [LeafPolygon(tuple(e["binary"]),
                          np.asarray(e["vertices"], dtype=float),
                          bool(e.get("degenerate", False)))
              for e in d["leaves"]]
    return SurfaceExport(tuple(d["dims"]), leaves,
                         complete=bool(d.get("complete", True)))
