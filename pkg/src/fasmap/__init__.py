"""Pixel-antenna radio map simulation and physics-regularized tensor
reconstruction."""

from .antenna import (Codebook, DifferentialPrior, circular_distance,
                      differential_prior, gain_db, synthesize_codebook)
from .baselines import (BaselineParams, knn_reconstruct, kriging_reconstruct,
                        lrtc_reconstruct, pr_only_reconstruct)
from .channel import ChannelParams, ground_truth_tensor, load_rmt, save_rmt, shadowing_field
from .config import (CodebookConfig, ExperimentConfig, ScenarioConfig,
                     default_experiment_config, load_experiment_config)
from .harness import rmse_db, run_experiment
from .sampling import ObservationSet, project_omega, sample_observations
from .scenario import (Obstacle, Scenario, cell_center, generate_scenario,
                       link_geometry, los_indicator)
from .solver import ConvergenceReport, SolverConfig, solve
from .tensor_ops import fold, nuclear_norm, svt, unfold

__version__ = "0.1.0"
