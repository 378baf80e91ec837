"""Command-line front-end: files in, verdicts/sets/figures out.

Exit codes: 0 success or true verdict, 1 false verdict (witness emitted),
2 input error, 3 resource cap exceeded.  All numeric output uses 17
significant digits so downstream comparisons stay bit-stable.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import geometry, milp, network, reach, sets

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_CAP = 3


class InputError(Exception):
    pass


class CapExceeded(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _echo_config(args: argparse.Namespace) -> None:
    shown = {k: v for k, v in sorted(vars(args).items())
             if k != "func" and v is not None}
    print("config: " + " ".join(f"{k}={v}" for k, v in shown.items()))


def _load_network(path) -> network.ReluNetwork:
    try:
        return network.read_network(path)
    except (OSError, network.NetworkFormatError) as exc:
        raise InputError(f"network file {path}: {exc}") from exc


def _load_set(path) -> sets.HybridZonotope:
    try:
        return sets.read_set(path)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"set file {path}: {exc}") from exc


def _parse_box(values, name) -> tuple[np.ndarray, np.ndarray]:
    vals = [float(v) for v in values]
    if len(vals) % 2:
        raise InputError(f"{name}: expected an even count of numbers "
                         "(lo... hi...)")
    n = len(vals) // 2
    lo, hi = np.array(vals[:n]), np.array(vals[n:])
    if np.any(lo > hi):
        raise InputError(f"{name}: lo > hi")
    return lo, hi


def _input_set(args) -> sets.HybridZonotope:
    if args.input_box is not None:
        lo, hi = _parse_box(args.input_box, "--input-box")
        return sets.box(lo, hi)
    if args.center is not None and args.sigma is not None:
        mu = np.array([float(v) for v in args.center])
        sig = np.array([float(v) for v in args.sigma])
        if mu.shape != sig.shape:
            raise InputError("--center and --sigma must have equal length")
        alpha = args.alpha if args.alpha is not None else 1.0
        if not 0 < alpha <= 1:
            raise InputError("--alpha must be in (0, 1]")
        return sets.box(mu - alpha * sig, mu + alpha * sig)
    raise InputError("give either --input-box or --center/--sigma")


def _write_graph_file(F: network.GraphSet, path) -> None:
    doc = {
        "set": sets.to_dict(F.set),
        "input_dim": F.input_dim,
        "output_dim": F.output_dim,
        "domain_radius": F.domain_radius,
        "net_hash": F.net_hash,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _read_set_or_graph(path) -> tuple[sets.HybridZonotope, dict | None]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if "set" in doc:
        return sets.from_dict(doc["set"]), doc
    try:
        return sets.from_dict(doc), None
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


# -- subcommands ---------------------------------------------------------

def cmd_graph(args) -> int:
    net = _load_network(args.net)
    if args.a <= 0:
        raise InputError("--a must be positive")
    F = network.network_graph_set(net, args.a)
    if args.out:
        _write_graph_file(F, args.out)
    n_g, n_b, n_c = F.set.counts
    print(f"n_g={n_g} n_b={n_b} n_c={n_c}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    net = _load_network(args.net)
    X = _input_set(args)
    if X.dim != net.input_dim:
        raise InputError(f"input set dimension {X.dim} != network input "
                         f"dimension {net.input_dim}")
    check = network.validate_domain(net, X, args.a)
    if not check.ok:
        raise InputError(f"domain validation failed: {check.message}")
    Fo = network.graph_set_over(net, X, args.a)
    m = net.output_dim
    project = np.hstack([np.zeros((m, net.input_dim)), np.eye(m)])
    Y = sets.linear_map(project, Fo)
    lo, hi = milp.interval_bounds(Y)
    rows = [(i, lo[i], hi[i]) for i in range(m)]
    for i, l, h in rows:
        print(f"{i}\t{_fmt(l)}\t{_fmt(h)}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("output,lo,hi\n")
            for i, l, h in rows:
                fh.write(f"{i},{_fmt(l)},{_fmt(h)}\n")
    return EXIT_OK


def cmd_reach(args) -> int:
    net = _load_network(args.net)
    try:
        plant = reach.read_plant(args.plant)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"plant file {args.plant}: {exc}") from exc
    lo, hi = _parse_box(args.init_box, "--init-box")
    if lo.shape[0] != plant.state_dim:
        raise InputError("--init-box dimension != plant state dimension")
    R0 = sets.box(lo, hi)
    try:
        tube = reach.reach_tube(plant, net, R0, args.steps, args.a,
                                stacked=args.stacked)
    except reach.DomainValidationError as exc:
        raise InputError(str(exc)) from exc
    for k, counts in enumerate(tube.counts):
        print(f"step {k}: n_g={counts[0]} n_b={counts[1]} n_c={counts[2]}")
    if args.out_dir:
        reach.export_tube(tube, args.out_dir)
    if args.self_test:
        rng = np.random.default_rng(args.seed)
        bad = 0
        reports = [milp.enumerate_feasible_leaves(R) for R in tube.per_step]
        for _ in range(args.self_test):
            x = rng.uniform(lo, hi)
            for k in range(args.steps + 1):
                if not milp.contains_point(tube.per_step[k], x, tol=1e-6,
                                           leaves=reports[k]):
                    bad += 1
                    break
                if k < args.steps:
                    u = network.forward_eval(net, x)
                    x = plant.A @ x + plant.B @ u
        print(f"self-test: {args.self_test - bad}/{args.self_test} "
              "simulated trajectories contained")
        if bad:
            return EXIT_FALSE
    if args.goal:
        glo, ghi = _parse_box(args.goal, "--goal")
        n = plant.state_dim
        H = np.vstack([np.eye(n), -np.eye(n)])
        h = np.concatenate([ghi, -glo])
        verdict = reach.verify_goal(tube, args.steps, H, h)
        if verdict.contained:
            print(f"goal: contained at step {args.steps}")
            return EXIT_OK
        w = verdict.witness
        print(f"goal: VIOLATED at step {args.steps}; witness state "
              + " ".join(_fmt(v) for v in w))
        return EXIT_FALSE
    return EXIT_OK


def cmd_leaves(args) -> int:
    if args.set:
        Z, _ = _read_set_or_graph(args.set)
    elif args.net:
        net = _load_network(args.net)
        Z = network.network_graph_set(net, args.a).set
    else:
        raise InputError("give a set file or --net")
    report = milp.enumerate_feasible_leaves(Z, cap=args.cap)
    print(f"feasible leaves: {report.feasible_count} of "
          f"{report.possible_count}")
    if args.out:
        doc = {"feasible_count": report.feasible_count,
               "possible_count": report.possible_count,
               "complete": report.complete,
               "leaves": [{"binary": list(a), "nonempty": ok}
                          for a, ok in report.leaves]}
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    if not report.complete:
        print(f"leaf cap {args.cap} exceeded; report incomplete")
        return EXIT_CAP
    return EXIT_OK


def cmd_plot(args) -> int:
    Z, doc = _read_set_or_graph(args.set)
    dims = tuple(int(d) for d in args.dims)
    if doc is not None:
        F = network.GraphSet(Z, int(doc["input_dim"]), int(doc["output_dim"]),
                             float(doc["domain_radius"]), doc["net_hash"])
    else:
        F = network.GraphSet(Z, Z.dim, 0, 0.0, "")
    try:
        surface = geometry.export_faceted_surface(F, dims, cap=args.cap)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    geometry.write_surface(surface, args.out)
    print(f"facets: {surface.facet_count} -> {args.out}")
    if args.png:
        _render_surface(surface, args.png)
        print(f"figure: {args.png}")
    if not surface.complete:
        print(f"leaf cap {args.cap} exceeded; export partial")
        return EXIT_CAP
    return EXIT_OK


def cmd_contain(args) -> int:
    Z, _ = _read_set_or_graph(args.set)
    lo, hi = _parse_box(args.box, "--box")
    if lo.shape[0] != Z.dim:
        raise InputError("--box dimension != set dimension")
    n = Z.dim
    H = np.vstack([np.eye(n), -np.eye(n)])
    h = np.concatenate([hi, -lo])
    verdict = milp.check_containment_in_polytope(Z, H, h, tol=args.tolerance)
    if verdict.contained:
        print("contained" + (" (set is empty)" if verdict.empty else ""))
        return EXIT_OK
    print("NOT contained; witness "
          + " ".join(_fmt(v) for v in verdict.witness)
          + " violates direction "
          + " ".join(_fmt(v) for v in verdict.violated_direction))
    return EXIT_FALSE


def _render_surface(surface: geometry.SurfaceExport, path) -> None:
    # report-path rendering: one filled patch per leaf, color keyed to the
    # binary assignment
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib import cm

    three_d = len(surface.dims) == 3
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(111, projection="3d" if three_d else None)
    n_leaves = max(1, len(surface.leaves))
    for idx, leaf in enumerate(surface.leaves):
        color = cm.viridis(idx / n_leaves)
        V = leaf.vertices
        if three_d:
            from mpl_toolkits.mplot3d.art3d import Poly3DCollection
            if V.shape[0] >= 3:
                ax.add_collection3d(Poly3DCollection(
                    [V.tolist()], facecolor=color, edgecolor="k",
                    linewidth=0.3, alpha=0.9))
            else:
                ax.plot(V[:, 0], V[:, 1], V[:, 2], color=color)
        else:
            if V.shape[0] >= 3:
                ax.fill(V[:, 0], V[:, 1], facecolor=color, edgecolor="k",
                        linewidth=0.3)
            else:
                ax.plot(V[:, 0], V[:, 1], color=color, marker="o",
                        markersize=2)
    pts = np.vstack([leaf.vertices for leaf in surface.leaves]) \
        if surface.leaves else np.zeros((1, len(surface.dims)))
    ax.set_xlim(pts[:, 0].min() - 0.1, pts[:, 0].max() + 0.1)
    ax.set_ylim(pts[:, 1].min() - 0.1, pts[:, 1].max() + 0.1)
    if three_d:
        ax.set_zlim(pts[:, 2].min() - 0.1, pts[:, 2].max() + 0.1)
    ax.set_xlabel(f"coord {surface.dims[0]}")
    ax.set_ylabel(f"coord {surface.dims[1]}")
    fig.savefig(path, dpi=120)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hznet",
        description="Exact hybrid-zonotope verification and reachability "
                    "for ReLU networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="build a network's reusable graph set")
    p.add_argument("net", help="network JSON file")
    p.add_argument("--a", type=float, required=True,
                   help="domain radius for pre-activations")
    p.add_argument("--out", help="write the graph-set file here")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("bounds", help="tight per-output interval bounds")
    p.add_argument("net")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--input-box", nargs="+", metavar="V",
                   help="lo... hi... (2n numbers)")
    p.add_argument("--center", nargs="+", metavar="MU")
    p.add_argument("--sigma", nargs="+", metavar="SIG")
    p.add_argument("--alpha", type=float,
                   help="scale factor in (0,1] applied to sigma")
    p.add_argument("--out", help="write bounds as CSV here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reach", help="closed-loop reach tube + goal verdict")
    p.add_argument("net")
    p.add_argument("plant", help="plant JSON file with keys A, B")
    p.add_argument("--init-box", nargs="+", required=True, metavar="V")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--goal", nargs="+", metavar="V",
                   help="goal box lo... hi...")
    p.add_argument("--stacked", action="store_true",
                   help="also build the stacked extended-vector set")
    p.add_argument("--out-dir", help="write per-step sets and manifest here")
    p.add_argument("--self-test", type=int, default=0, metavar="N",
                   help="simulate N trajectories and check containment")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("leaves", help="enumerate feasible binary assignments")
    p.add_argument("set", nargs="?", help="set or graph-set JSON file")
    p.add_argument("--net", help="network file (builds its graph set)")
    p.add_argument("--a", type=float, default=10.0)
    p.add_argument("--cap", type=int, default=100000)
    p.add_argument("--out", help="write the leaf report here")
    p.set_defaults(func=cmd_leaves)

    p = sub.add_parser("plot", help="export leaf polygons / faceted surface")
    p.add_argument("set", help="set or graph-set JSON file")
    p.add_argument("--dims", nargs="+", required=True,
                   help="2 or 3 coordinate indices")
    p.add_argument("--out", required=True, help="polygon/surface JSON file")
    p.add_argument("--png", help="also render a figure to this file")
    p.add_argument("--cap", type=int, default=100000)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("contain", help="box-containment verdict + witness")
    p.add_argument("set")
    p.add_argument("--box", nargs="+", required=True, metavar="V")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(func=cmd_contain)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
