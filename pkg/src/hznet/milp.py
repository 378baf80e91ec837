"""Branch-and-bound MILP over a hybrid zonotope's factor space.

All verification queries (emptiness, membership, support, interval bounds,
leaf enumeration, polytope containment) reduce to mixed-integer LPs over
the continuous factors xi_c in [-1,1] and binaries beta in {0,1}, where
xi_b = 2*beta - 1.  The {-1,1} <-> {0,1} mapping lives only in this encoder.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .lp import (INFEASIBLE, ITERATION_LIMIT, OPTIMAL, LpResult,
                 solve_bounded_lp)
from .sets import HybridZonotope, fix_binaries

__all__ = [
    "MilpProblem",
    "MilpResult",
    "LeafReport",
    "ContainmentResult",
    "solve_lp",
    "solve_milp",
    "is_empty",
    "contains_point",
    "support",
    "interval_bounds",
    "enumerate_feasible_leaves",
    "check_containment_in_polytope",
    "dump_problem",
]

DEFAULT_NODE_CAP = 1_000_000
_INT_TOL = 1e-7
_GAP_TOL = 1e-9
# Above this many binaries the relaxation bound is too loose to prune well,
# so optimization switches to depth-first leaf enumeration (still exact).
_LEAF_SWITCH = 20


@dataclass
class MilpProblem:
    """min/max objective @ x over A_eq @ x = b_eq, lo <= x <= hi.

    Variables listed as binary_idx are {0,1}-integral; the remaining
    variables are continuous within their bounds.
    """

    objective: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    binary_idx: np.ndarray
    maximize: bool = True
    constant: float = 0.0
    n_g: int = 0  # leading continuous factor count (for result reporting)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.A_eq = np.asarray(self.A_eq, dtype=float)
        if self.A_eq.size == 0:
            self.A_eq = self.A_eq.reshape(0, self.objective.shape[0])
        self.b_eq = np.asarray(self.b_eq, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.binary_idx = np.asarray(self.binary_idx, dtype=int)
        if np.any(self.binary_idx >= self.objective.shape[0]):
            raise ValueError("binary index out of range")


@dataclass
class MilpResult:
    status: str  # "optimal" | "infeasible" | "iteration_limit"
    value: float
    xi_c: np.ndarray
    xi_b: np.ndarray  # entries in {-1, +1}
    nodes_explored: int = 0


@dataclass
class LeafReport:
    """Feasible binary assignments of a hybrid zonotope."""

    leaves: list[tuple[tuple[int, ...], bool]]
    feasible_count: int
    possible_count: int
    complete: bool = True


@dataclass
class ContainmentResult:
    contained: bool
    empty: bool = False
    violated_direction: np.ndarray | None = None
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.contained


def factor_program(Z: HybridZonotope, objective_z=None, point=None,
                   tol: float = 1e-6) -> MilpProblem:
    """Encode Z's factor space as a MilpProblem.

    objective_z, when given, is a direction d in ambient space; the program
    maximizes d @ z.  point, when given, adds membership rows pinning the
    ambient value to the point within +/- tol (via slack variables).
    """
    n_g, n_b, n = Z.n_g, Z.n_b, Z.dim
    ones_b = np.ones(n_b)
    cols = [Z.Ac, 2.0 * Z.Ab]
    rhs = Z.b + Z.Ab @ ones_b
    lo = [np.full(n_g, -1.0), np.zeros(n_b)]
    hi = [np.ones(n_g), np.ones(n_b)]
    nvar = n_g + n_b
    A = np.hstack(cols) if Z.n_c else np.zeros((0, nvar))
    if point is not None:
        p = np.asarray(point, dtype=float).reshape(n)
        mem = np.hstack([Z.Gc, 2.0 * Z.Gb, -np.eye(n)])
        A = np.hstack([A, np.zeros((A.shape[0], n))])
        A = np.vstack([A, mem])
        rhs = np.concatenate([rhs, p - Z.c + Z.Gb @ ones_b])
        lo.append(np.full(n, -tol))
        hi.append(np.full(n, tol))
        nvar += n
    obj = np.zeros(nvar)
    const = 0.0
    if objective_z is not None:
        d = np.asarray(objective_z, dtype=float).reshape(n)
        obj[:n_g] = Z.Gc.T @ d
        obj[n_g:n_g + n_b] = 2.0 * (Z.Gb.T @ d)
        const = float(d @ Z.c - d @ (Z.Gb @ ones_b))
    return MilpProblem(obj, A, rhs, np.concatenate(lo), np.concatenate(hi),
                       np.arange(n_g, n_g + n_b), maximize=True,
                       constant=const, n_g=n_g)


def solve_lp(prob: MilpProblem) -> MilpResult:
    """LP relaxation of the problem (binaries relaxed to [0,1])."""
    res = solve_bounded_lp(prob.objective, prob.A_eq, prob.b_eq,
                           prob.lo, prob.hi, maximize=prob.maximize)
    return _to_milp_result(prob, res)


def _to_milp_result(prob: MilpProblem, res: LpResult,
                    nodes: int = 0) -> MilpResult:
    status = {OPTIMAL: "optimal", INFEASIBLE: "infeasible"}.get(
        res.status, "iteration_limit")
    value = res.value + prob.constant if status == "optimal" else float("nan")
    n_g = prob.n_g
    xi_c = res.x[:n_g].copy()
    beta = res.x[prob.binary_idx] if prob.binary_idx.size else np.zeros(0)
    return MilpResult(status, value, xi_c, 2.0 * np.round(beta) - 1.0, nodes)


def _iter_feasible_assignments(prob: MilpProblem, counter: list | None = None):
    """Yield feasible {0,1} binary assignments in lexicographic order.

    Depth-first search fixing binaries in index order, 0 before 1; a subtree
    is pruned as soon as its LP relaxation is infeasible.  counter, when
    given, accumulates the number of LPs solved in counter[0].
    """
    bidx = prob.binary_idx
    zero_obj = np.zeros_like(prob.objective)

    def feasible(lo, hi) -> bool:
        if counter is not None:
            counter[0] += 1
        res = solve_bounded_lp(zero_obj, prob.A_eq, prob.b_eq, lo, hi)
        return res.status == OPTIMAL

    def dfs(depth, lo, hi):
        if not feasible(lo, hi):
            return
        if depth == bidx.size:
            yield tuple(int(lo[j]) for j in bidx)
            return
        j = bidx[depth]
        for val in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = val
            chi[j] = val
            yield from dfs(depth + 1, clo, chi)

    yield from dfs(0, prob.lo.copy(), prob.hi.copy())


def _solve_fixed(prob: MilpProblem, beta) -> LpResult:
    lo, hi = prob.lo.copy(), prob.hi.copy()
    lo[prob.binary_idx] = beta
    hi[prob.binary_idx] = beta
    return solve_bounded_lp(prob.objective, prob.A_eq, prob.b_eq,
                            lo, hi, maximize=prob.maximize)


def _solve_by_leaves(prob: MilpProblem, node_cap: int) -> MilpResult:
    """Exact optimum as the best over feasible leaves (one LP per leaf).

    Pure feasibility queries (identically zero objective) stop at the first
    feasible leaf.  Ties keep the first leaf encountered, which is the
    lexicographically smallest assignment.
    """
    sense = 1.0 if prob.maximize else -1.0
    feasibility_only = not np.any(prob.objective)
    lps = [0]
    best: LpResult | None = None
    best_val = -np.inf
    for beta in _iter_feasible_assignments(prob, counter=lps):
        res = _solve_fixed(prob, np.asarray(beta, dtype=float))
        lps[0] += 1
        if res.status != OPTIMAL:
            if res.status == INFEASIBLE:
                continue
            return _to_milp_result(prob, res, lps[0])
        if feasibility_only:
            return _to_milp_result(prob, res, lps[0])
        if sense * res.value > best_val + _GAP_TOL:
            best, best_val = res, sense * res.value
        if lps[0] >= node_cap:
            out = _to_milp_result(
                prob, best if best is not None else res, lps[0])
            out.status = "iteration_limit"
            return out
    if best is None:
        return MilpResult("infeasible", float("nan"), np.zeros(prob.n_g),
                          np.zeros(0), lps[0])
    return _to_milp_result(prob, best, lps[0])


def solve_milp(prob: MilpProblem,
               node_cap: int = DEFAULT_NODE_CAP) -> MilpResult:
    """Globally optimal branch-and-bound with LP relaxation bounds.

    Best-bound node selection; branches on the most-fractional binary
    (ties: lowest index) and explores the beta = 1 child first.  Serial and
    deterministic: identical inputs yield identical results and witnesses.
    Past _LEAF_SWITCH binaries, heavily constrained problems (at least one
    equality row per binary, the layered-set shape) run depth first over
    binary assignments instead, which prunes far better there; pure
    feasibility queries (zero objective) also take that route and stop at
    the first feasible leaf.
    """
    n_bin = prob.binary_idx.size
    dense = prob.A_eq.shape[0] >= n_bin
    if n_bin and dense and (n_bin > _LEAF_SWITCH
                            or not np.any(prob.objective)):
        return _solve_by_leaves(prob, node_cap)
    sense = 1.0 if prob.maximize else -1.0
    bidx = prob.binary_idx
    root_lo = prob.lo.copy()
    root_hi = prob.hi.copy()

    def relax(lo, hi):
        return solve_bounded_lp(prob.objective, prob.A_eq, prob.b_eq,
                                lo, hi, maximize=prob.maximize)

    incumbent: LpResult | None = None
    incumbent_val = -np.inf  # in max-sense units
    nodes = 0
    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray, LpResult]] = []

    def beta_of(res):
        return res.x[bidx] if bidx.size else np.zeros(0)

    def lex_key(res):
        return tuple(np.round(beta_of(res)).astype(int))

    def offer(res):
        nonlocal incumbent, incumbent_val
        val = sense * res.value
        if val > incumbent_val + _GAP_TOL:
            incumbent, incumbent_val = res, val
        elif incumbent is not None and val > incumbent_val - _GAP_TOL:
            if lex_key(res) < lex_key(incumbent):
                incumbent = res

    def try_rounding(res, lo, hi):
        if not bidx.size:
            return
        beta = np.round(beta_of(res))
        flo, fhi = lo.copy(), hi.copy()
        flo[bidx] = beta
        fhi[bidx] = beta
        fixed = relax(flo, fhi)
        if fixed.status == OPTIMAL:
            offer(fixed)

    root = relax(root_lo, root_hi)
    nodes += 1
    if root.status == INFEASIBLE:
        return MilpResult("infeasible", float("nan"), np.zeros(prob.n_g),
                          np.zeros(0), nodes)
    if root.status != OPTIMAL:
        return _to_milp_result(prob, root, nodes)
    heap.append((-sense * root.value, counter, root_lo, root_hi, root))
    heuristic_tried = False

    while heap:
        neg_bound, _, lo, hi, res = heapq.heappop(heap)
        bound = -neg_bound
        if bound <= incumbent_val + _GAP_TOL:
            break  # best-bound: nothing left can improve
        beta = beta_of(res)
        frac = np.abs(beta - np.round(beta))
        if frac.size == 0 or np.max(frac) <= _INT_TOL:
            offer(res)
            continue
        if incumbent is None and not heuristic_tried:
            heuristic_tried = True
            try_rounding(res, lo, hi)
            if incumbent is not None and bound <= incumbent_val + _GAP_TOL:
                break
        # most-fractional branching, ties to the lowest index
        j = int(bidx[np.argmax(frac)])
        for val in (1.0, 0.0):
            if nodes >= node_cap:
                break
            clo, chi = lo.copy(), hi.copy()
            clo[j] = val
            chi[j] = val
            child = relax(clo, chi)
            nodes += 1
            if child.status == INFEASIBLE:
                continue
            if child.status != OPTIMAL:
                return _to_milp_result(prob, child, nodes)
            cval = sense * child.value
            if cval <= incumbent_val + _GAP_TOL:
                continue
            cbeta = beta_of(child)
            if cbeta.size == 0 or np.max(np.abs(cbeta - np.round(cbeta))) <= _INT_TOL:
                offer(child)
            else:
                counter += 1
                heapq.heappush(heap, (-cval, counter, clo, chi, child))
        if nodes >= node_cap:
            if incumbent is None:
                return MilpResult("iteration_limit", float("nan"),
                                  np.zeros(prob.n_g), np.zeros(0), nodes)
            out = _to_milp_result(prob, incumbent, nodes)
            out.status = "iteration_limit"
            return out

    if incumbent is None:
        return MilpResult("infeasible", float("nan"), np.zeros(prob.n_g),
                          np.zeros(0), nodes)
    return _to_milp_result(prob, incumbent, nodes)


# -- set queries ---------------------------------------------------------

def is_empty(Z: HybridZonotope) -> bool:
    """True iff no factor pair satisfies the set's constraints."""
    res = solve_milp(factor_program(Z))
    return res.status == "infeasible"


def contains_point(Z: HybridZonotope, p, tol: float = 1e-6,
                   leaves: LeafReport | None = None) -> bool:
    """Membership test |Gc xi_c + Gb xi_b + c - p|_inf <= tol.

    A complete LeafReport for Z (from enumerate_feasible_leaves) short-cuts
    the search to one LP per feasible leaf — worthwhile when many points are
    tested against the same set.
    """
    p = np.asarray(p, dtype=float)
    if p.shape[0] != Z.dim:
        raise ValueError(f"point has length {p.shape[0]}, set dimension {Z.dim}")
    if leaves is not None and leaves.complete:
        for bits, ok in leaves.leaves:
            if not ok:
                continue
            leaf = fix_binaries(Z, bits)
            if solve_lp(factor_program(leaf, point=p,
                                       tol=tol)).status == "optimal":
                return True
        return False
    res = solve_milp(factor_program(Z, point=p, tol=tol))
    return res.status == "optimal"


def support(Z: HybridZonotope, d) -> MilpResult:
    """max over Z of d @ z; result.value is the support value.

    Infeasible status signals an empty set.
    """
    return solve_milp(factor_program(Z, objective_z=d))


def support_value(Z: HybridZonotope, d) -> float:
    res = support(Z, d)
    if res.status != "optimal":
        raise ValueError(f"support query failed: {res.status}")
    return res.value


def support_point(Z: HybridZonotope, res: MilpResult) -> np.ndarray:
    """Ambient-space maximizer reconstructed from a support result."""
    return Z.point(res.xi_c, res.xi_b)


def _feasible_leaf_sets(Z: HybridZonotope) -> list[HybridZonotope]:
    """Fixed-binaries slices of Z, one per feasible assignment, lex order."""
    out = []
    for beta in _iter_feasible_assignments(factor_program(Z)):
        out.append(fix_binaries(Z, [2 * v - 1 for v in beta]))
    return out


def _max_over_leaves(leaves, d):
    """Best (value, leaf point) of d @ z over fixed-binaries slices."""
    best = None
    for leaf in leaves:
        res = solve_lp(factor_program(leaf, objective_z=d))
        if res.status != "optimal":
            continue
        if best is None or res.value > best[0] + _GAP_TOL:
            best = (res.value, leaf.point(res.xi_c, res.xi_b))
    return best


def interval_bounds(Z: HybridZonotope) -> tuple[np.ndarray, np.ndarray]:
    """Tight per-coordinate bounds (each attained by a member)."""
    n = Z.dim
    lo = np.empty(n)
    hi = np.empty(n)
    leaves = _feasible_leaf_sets(Z) if Z.n_b > _LEAF_SWITCH else None
    for i in range(n):
        for sign, dest in ((1.0, hi), (-1.0, lo)):
            e = np.zeros(n)
            e[i] = sign
            if leaves is None:
                dest[i] = sign * support_value(Z, e)
            else:
                got = _max_over_leaves(leaves, e)
                if got is None:
                    raise ValueError("support query failed: infeasible")
                dest[i] = sign * got[0]
    return lo, hi


def enumerate_feasible_leaves(Z: HybridZonotope,
                              cap: int = 100_000) -> LeafReport:
    """All feasible binary assignments, by DFS with LP-relaxation pruning.

    Assignments are visited in lexicographic order (-1 before +1).  If more
    than `cap` feasible leaves are found the report is flagged incomplete.
    """
    n_b = Z.n_b
    found: list[tuple[tuple[int, ...], bool]] = []
    complete = True
    for beta in _iter_feasible_assignments(factor_program(Z)):
        if len(found) == cap:
            complete = False
            break
        found.append((tuple(2 * v - 1 for v in beta), True))
    return LeafReport(found, len(found), 2 ** n_b, complete)


def check_containment_in_polytope(Z: HybridZonotope, H, h,
                                  tol: float = 1e-6) -> ContainmentResult:
    """Z subset of {x : H x <= h}?  On failure reports direction + witness."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if H.shape[0] != h.shape[0] or H.shape[1] != Z.dim:
        raise ValueError("polytope dimensions do not match the set")
    if Z.n_b > _LEAF_SWITCH:
        leaves = _feasible_leaf_sets(Z)
        if not leaves:
            return ContainmentResult(True, empty=True)
        for i in range(H.shape[0]):
            got = _max_over_leaves(leaves, H[i])
            if got is not None and got[0] > h[i] + tol:
                return ContainmentResult(False,
                                         violated_direction=H[i].copy(),
                                         witness=got[1])
        return ContainmentResult(True)
    for i in range(H.shape[0]):
        res = support(Z, H[i])
        if res.status == "infeasible":
            return ContainmentResult(True, empty=True)
        if res.status != "optimal":
            raise RuntimeError("support query hit the node cap")
        if res.value > h[i] + tol:
            return ContainmentResult(False, violated_direction=H[i].copy(),
                                     witness=support_point(Z, res))
    return ContainmentResult(True)


def leaf_lp_support(Z: HybridZonotope, assignment, d) -> float | None:
    """Support of one fixed-binaries leaf, or None if the leaf is empty."""
    leaf = fix_binaries(Z, assignment)
    prob = factor_program(leaf, objective_z=d)
    res = solve_lp(prob)
    if res.status != "optimal":
        return None
    return res.value


def dump_problem(prob: MilpProblem, path) -> None:
    """Debug dump in an LP-format-like text layout (not a stable format)."""
    lines = ["maximize" if prob.maximize else "minimize"]
    terms = " + ".join(f"{v:.17g} x{j}" for j, v in enumerate(prob.objective)
                       if v != 0.0) or "0"
    lines.append(f"  {terms}")
    lines.append("subject to")
    for i in range(prob.A_eq.shape[0]):
        row = " + ".join(f"{v:.17g} x{j}"
                         for j, v in enumerate(prob.A_eq[i]) if v != 0.0) or "0"
        lines.append(f"  c{i}: {row} = {prob.b_eq[i]:.17g}")
    lines.append("bounds")
    for j in range(prob.objective.shape[0]):
        lines.append(f"  {prob.lo[j]:.17g} <= x{j} <= {prob.hi[j]:.17g}")
    if prob.binary_idx.size:
        lines.append("binary")
        lines.append("  " + " ".join(f"x{j}" for j in prob.binary_idx))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
