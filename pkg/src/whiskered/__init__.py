"""Whiskered invariant tori of conformally symplectic maps: KAM Newton solver,
Lindstedt series and a-posteriori domain validation."""

__version__ = "0.1.0"

from .fourier import CohomologyError, FourierSeries, ResonanceError, SpectralGrid, solve_cohomology
from .diophantine import (GOLDEN_MEAN, DiophantineParams, DomainSetParams, in_domain_G, nu_lambda,
                          nu_omega)
from .models import (CoupledStandardWhiskerMap, ConformalMapFamily, DissipativeStandardMap,
                     DomainMarginError, LambdaSpec, check_conformal, make_model)
from .cocycle import (Cocycle, FrameError, HyperbolicityError, Rates, ResolutionError,
                      TrichotomySplitting, close_splitting, estimate_rates, perturbed_rate_bound)
from .newton import (KamResult, NonConvergenceError, SolverConfig, TorusEmbedding, TwistError,
                     continue_in_eps, exact_torus, invariance_error, newton_step, reference_splitting,
                     run_kam_iteration)
from .lindstedt import (LindstedtExpansion, LindstedtError, lindstedt_bundle_expansion,
                        lindstedt_torus_expansion)
from .domain import (DomainRaster, GridSpec, ValidationResult, restrict_raster,
                     scan_analyticity_domain, validate_at_epsilon)
from .config import ConfigError, RunConfig, load_config
