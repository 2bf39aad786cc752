import numpy as np
import pytest
from dataclasses import replace

from fasmap import harness
from fasmap.config import ScenarioConfig, default_experiment_config
from fasmap.sampling import sample_observations


@pytest.fixture(scope="session")
def small_config():
    """A 12x12 world with two fixed obstacles and a 6-mode codebook; fast to
    simulate (tiny shadowing covariance) but structurally like the full setup."""
    cfg = default_experiment_config()
    scen = ScenarioConfig(
        width_m=12.0, height_m=12.0, grid_rows=12, grid_cols=12,
        bs_position=(6.0, 6.0),
        fixed_obstacles=((2.0, 2.0, 4.5, 4.5), (8.0, 7.5, 10.5, 10.0)))
    return replace(cfg, scenario=scen,
                   codebook=replace(cfg.codebook, n_modes=6, eadof=5))


@pytest.fixture(scope="session")
def small_world(small_config):
    return harness.build_world(small_config, 0)


@pytest.fixture(scope="session")
def small_obs(small_config, small_world):
    scen, codebook, prior, truth = small_world
    return sample_observations(
        truth, 0.3, 0.0, harness.sampling_seed(0, 1),
        harness.excluded_cells(small_config, scen, prior))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
