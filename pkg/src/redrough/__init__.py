"""Reduced rough paths: lifts, controlled paths, sewing integrals and a Picard RDE solver."""

from .controlled import (
    ControlledPath,
    compose,
    compose_norm_bound,
    controlled_norms,
    identity_path,
    leibniz_norm_bound,
    leibniz_product,
    lift_function,
)
from .drivers import DriverSpec, gen_fbm, gen_piecewise_linear, gen_smooth
from .errors import *  # noqa: F401,F403
from .functions import SmoothFunction, builtin
from .grid import Grid, GridPath, TwoParamField, holder_seminorm, two_param_seminorm
from .rough_path import ReducedRoughPath, geometric_lift, ito_lift, perturbed_lift, rrp_distance, rrp_norm
from .sewing import germ, integral_as_controlled, integral_norm_bound, integrate, local_error_certificate
from .solver import SolverConfig, canonical_center, picard_map, solve_global, solve_local, verify_solution

__version__ = "0.1.0"
