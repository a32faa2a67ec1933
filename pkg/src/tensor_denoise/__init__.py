"""Noise filtering by low-rank tensor approximation: experiments and bounds."""

__version__ = "0.1.0"

from .core import (SVDResult, as_tensor, fold, fro_norm, inner, khatri_rao, kron,
                   mode_product, singular_values, truncated_svd, unfold, vectorize,
                   devectorize)
from .formats import (CPTensor, FormatKind, TTTensor, TuckerTensor, parameter_count,
                      random_lowrank)
from .decompose import (AlsInit, AlsOptions, ApproxReport, als_cp, default_schedule, hosvd,
                        multigrid_als_rank1, split_factor, tt_svd)
from .noise import (NoiseMode, NoiseSpec, add_noise, check_hypothesis, filtration_error,
                    guarantee_bound, knorm_lower_bound)
from .experiments import (ExperimentRecord, InvariantViolation, PowerLawFit, dimension_sweep,
                          fit_power_law, rank_sweep, run_trial)
from .bounds import (BoundKind, BoundValue, MuCalibration, calibrate_mu,
                     empirical_rank1_bound, net_log_cardinality, rank_bound,
                     scaled_theorem1_bound, theorem1_bound, theorem1_tail_probability)
from .steering import steering_tensor, steering_trial

__all__ = [name for name in dir() if not name.startswith("_")]
