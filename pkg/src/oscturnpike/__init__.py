"""LQ optimal control of truncated oscillator chains.

Spectral analysis of the state-costate generator, steady optima, two
independent horizon solvers, polynomial turnpike diagnostics, and the rotating
clamped-free beam instantiation.
"""

from .beam import BeamMode, BeamParams, build_system, mode_data, mode_shape, solve_delta
from .exceptions import ConfigError, NumericsError
from .lq import (HorizonSpec, Trajectory, assemble_generator, dynamic_cost,
                 pmp_residual, solve_bvp_spectral, solve_riccati_oracle)
from .model import (AssumptionReport, OscillatorSystem, StateVector, WeightIndex,
                    check_assumptions, free_flow, min_control_time, weighted_norm)
from .spectral import (ComplexQuadVector, EigenQuad, RieszFamily, build_riesz_family,
                       char_residual, closeness_sums, complexify, decomplexify,
                       eigvec, find_nu, lambda0, riesz_vectors, rouche_certificate,
                       spectrum)
from .static_opt import StaticSolution, TargetSpec, solve_static, static_cost
from .turnpike import (DeviationProfile, deviation_profile, envelope_constant,
                       fit_decay_exponent, g_matrices, hyperbolic_bound_scan,
                       modal_decay_constant, shooting_ratio)

__version__ = "0.1.0"
