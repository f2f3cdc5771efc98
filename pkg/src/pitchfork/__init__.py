"""Pitchfork bifurcations of codimension-1 invariant manifolds.

Hypothesis checks, a graph-transform solver for the bifurcated branches,
and the reduction of flows to their time-t maps.
"""
__version__ = "0.1.0"

from .dynsys import (MapFamily, SigmaProfile, canonical_family, classify_side_behavior, compose,
                     identity_family, inverse_components, rotation_2d, rotation_3d, side_reversing_wrap,
                     split_components)
from .errors import *  # noqa: F401,F403
from .flow import (GronwallParams, VectorFieldFamily, check_theorem5, flow_solve, gronwall_bounds,
                   gronwall_domination, integrate_flow, model_field, model_radius, time_t_map,
                   verify_invariance_across_t)
from .geometry import (ManifoldMesh, ParameterizedManifold, TubularPoint, TubularRegion, UnitSphere, build_mesh,
                       embed, icosphere, project, unit_circle, unit_sphere)
from .graphtransform import (BranchPair, GraphFunction, SolverConfig, assemble_bifurcation_report,
                             graph_invariance_defect, graph_transform_apply, lipschitz_estimate, solve_branches,
                             solve_fixed_point)
from .hypotheses import (check_corollary2, check_corollary_ix, check_theorem1, estimate_norms, find_mu_star,
                         resolve_shell)
from .simulate import iterate, start_points
