"""Covariate-guided Bayesian mixture-of-spline-experts clustering."""

from .basis import BasisSet, TimeGrid, build_basis, build_phi, rescale_times
from .errors import ConfigError, DataError, NumericalError, SplinemixError
from .gibbs import FitConfig, GibbsChain, PosteriorSamples, run_chain
from .metrics import MetricsReport, abias_vbias, arse, logistic_rmse, match_labels
from .model import (ComponentParams, Dataset, Hyperparams, LatentState,
                    allocation_probs, component_mean, log_component_density,
                    log_observed_likelihood, mixing_weights)
from .postproc import (DicReport, SummaryReport, build_dic_report, compute_dic,
                       relabel_ecr, summarize)
from .rng import (RngStream, draw_half_t_sq, draw_inverse_gamma, draw_mvn,
                  draw_polya_gamma)
from .simulate import ScenarioSpec, SimTruth, generate_scenario, scenario_a, scenario_b

__version__ = "0.1.0"
