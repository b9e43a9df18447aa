"""Rank-1 lattice rules built component by component under several weight constraints."""

from .bounds import (BoundReport, bound_report, chebyshev_probability, combined_bound,
                     empirical_coverage, polytope_bound, riemann_zeta, robustness_bound,
                     tractability_bound, x_value)
from .constructor import (ConstraintSpec, ConstructionTrace, candidate_threshold, construct,
                          construct_classic, rank_order, rank_select, verify_theorem_bound)
from .errors import (CapacityError, ConsistencyError, DomainError, FastPathUnsupported,
                     InfeasibleError, PreconditionError)
from .fastcbc import CbcState, CirculantKernel, init_state
from .geometry import (Simplex, dual_membership, intersection_membership, simplex_contains,
                       smallest_epsilon)
from .numtheory import Modulus, is_prime, primitive_root
from .wce import (ErrorProfile, GeneratingVector, error_profile, projection_error, squared_wce,
                  wce_expectation, wce_std, wce_variance)
from .weights import RandomWeightModel, WeightAssignment, holder_ratio, linear_combination

__version__ = "0.1.0"
