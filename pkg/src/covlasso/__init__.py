"""Sparse inverse covariance estimation by blockwise coordinate descent."""

from .errors import (AsymmetricInput, BoundsDoNotBracket, CovLassoError, DegenerateData,
                     InvalidDiagonal, NonConvergence, NonNumericCell, NonPositivePivot,
                     NotPositiveDefinite, ParseError)
from .glasso import (GlassoConfig, GlassoSolution, KKTReport, Mode, edge_set, glasso_fit,
                     kkt_check, mb_fit, theta_recover)
from .lasso import LassoResult, LassoSubproblem, kkt_residual_inner, lasso_cd_solve
from .matrix import (Partition, chol_logdet, extract_partition, insert_partition,
                     soft_threshold)
from .selection import (CVResult, Dataset, PathResult, Scheme, calibrate_rho, cv_run,
                        empirical_covariance, path_run, penalized_loglik, validation_loglik)
from .synth import BenchRecord, Kind, Scenario, run_benchmark, sample_gaussian, true_precision

__version__ = "0.1.0"
