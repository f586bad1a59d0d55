"""
LEGIT gene-by-environment modelling.

Latent gene and environment scores fitted by alternating least squares,
competitive-confirmatory classification of the interaction pattern,
Johnson-Neyman regions of significance and a Monte Carlo accuracy study.
"""

from types import ModuleType as _ModuleType

from .competitive import (DISPLAY_NAMES, GXE_MODELS, NULL_MODELS, CompetitiveModelSet,
                          GxEClassification, classify, crossover_interval,
                          fit_competitive_set, interaction_f_ratio, proportion_affected)
from .ingest import InputError, PompScaling, ingest_csv, pomp_rescale, write_dataset
from .legit import (CrossoverDivergedError, GxEDataset, LegitModel, count_free_params,
                    fit_legit, predict)
from .ros import (DIATHESIS_STRESS, DIFFERENTIAL_SUSCEPTIBILITY, NO_EVIDENCE,
                  VANTAGE_SENSITIVITY, RoSResult, classify_ros, default_alpha,
                  regions_of_significance, ros_bounds, simple_slope)
from .simulation import (AccuracyTable, Scenario, evaluate_replicate, export_long,
                         export_results, study_grid, generate_dataset, read_results,
                         run_study)
from .stats_core import (DimensionError, OlsFit, RankDeficientError, information_criteria,
                         ols_fit, student_t_quantile)

__version__ = "0.1.0"

__all__ = sorted(n for n, v in list(globals().items()) if not n.startswith("_") and not isinstance(v, _ModuleType))
