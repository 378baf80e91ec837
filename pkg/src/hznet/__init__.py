"""Exact hybrid-zonotope representations of ReLU networks.

Feed-forward ReLU networks are represented exactly as hybrid zonotopes,
enabling output-range verification, closed-loop reachability of linear
systems under network control, linear-region enumeration, and set
containment certification through an in-repo mixed-integer LP engine.
"""
from .sets import (FactorTag, HybridZonotope, affine_map, box,
                   cartesian_product, compress, fix_binaries,
                   generalized_intersection, linear_map, minkowski_sum,
                   point_set, read_set, union_shifted_pair, write_set)
from .network import (GraphSet, Layer, ReluNetwork, forward_eval,
                      graph_set_over, interleave_transform, layer_graph_set,
                      network_graph_set, output_set, read_network, relu_atom,
                      validate_domain, write_network)
from .milp import (ContainmentResult, LeafReport, MilpProblem, MilpResult,
                   check_containment_in_polytope, contains_point,
                   enumerate_feasible_leaves, interval_bounds, is_empty,
                   solve_lp, solve_milp, support, support_value)
from .reach import (LinearPlant, ReachTube, closed_loop_step, export_tube,
                    reach_tube, read_plant, stacked_reach, verify_goal,
                    write_plant)
from .geometry import (LeafPolygon, SurfaceExport, export_faceted_surface,
                       point_in_polygon, project_leaf_polygon, read_surface,
                       write_surface)

__version__ = "0.1.0"
