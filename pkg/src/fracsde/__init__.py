"""fracsde: simulation and verification toolkit for SDEs driven by fBm.

Library layout:
    grids       time grids, Hurst parameters, discrete path norms
    fbm         fBm covariance, Volterra kernel, path sampling
    fraccalc    Riemann-Liouville operators and the kernel inverse K_H^{-1}
    models      drift/diffusion specifications with regularity constants
    sde         Euler solvers, Lamperti transform, coupling constructions
    weights     Malliavin-type weights, Girsanov densities, Harnack constants
    estimators  Monte Carlo estimators and inequality verification harnesses
    cli         configuration-driven experiment runner
"""

from .grids import Hurst, HurstRegime, PathNorms, TimeGrid, path_norms
from .fbm import (PathPair, fbm_covariance, sample_fgn_exact, sample_path_batch,
                  sample_path_pair, volterra_kernel)
from .fraccalc import (SampledFunction, c0_constant, k_h_inverse, kh_forward,
                       rl_derivative, rl_integral)
from .models import SdeModel, make_model
from .sde import (AprioriBounds, LampertiMap, SolvedPath, coupled_bismut_pair,
                  coupled_ibp_pair, lamperti, solve_additive,
                  solve_multiplicative_1d)
from .weights import (GirsanovDensity, HarnackConstants, MalliavinWeight,
                      WeightKind, bismut_weight, girsanov_density,
                      harnack_constants, ibp_weight_high, ibp_weight_low,
                      quad_variation_bound_check)

__version__ = "0.1.0"
