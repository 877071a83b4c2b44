"""Ratio bounds for relative entropies on a segment of the simplex, and
capacities of binary-input channels with noisy causal state information."""

from .bounds import (
    Interval,
    IntervalSet,
    TestWeight,
    F_g,
    extremal_ratio,
    feasible_a,
    feasible_b,
    feasible_c,
    q_of_g,
    ratio_bounds,
    sup_ratio_search,
)
from .capacity import (
    CapacityResult,
    capacity_achieving_input_in_band,
    capacity_causal,
    capacity_no_side_info,
    kkt_certificate,
)
from .channels import (
    Channel,
    Decomposition,
    ShannonStrategy,
    StateChannelSystem,
    d_dominance_check,
    d_functional,
    decompose,
    gamma,
    gamma_product_check,
    strategy_channel,
)
from .errors import ConvergenceError, DomainError
from .scalarfn import Branch, rho, rho_inv, threshold_T, threshold_Ta, xi, xi_inv, zeta
from .simplex import Dist, RayTriple, kl, kl_ratio, ray_point

__version__ = "0.1.0"
