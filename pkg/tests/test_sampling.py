import csv

import numpy as np
import pytest

from fasmap import sampling


@pytest.fixture
def truth(rng):
    return rng.normal(-50.0, 10.0, size=(10, 10, 6))


class TestSampleObservations:
    def test_count_and_indices(self, truth):
        obs = sampling.sample_observations(truth, 0.1, 0.0, 0)
        assert obs.n_observed == round(0.1 * truth.size) == 60
        assert obs.omega.shape == (60, 3)
        flat = np.ravel_multi_index(obs.omega.T, truth.shape)
        assert (np.diff(flat) > 0).all()      # sorted, no duplicates

    def test_values_match_truth_noiseless(self, truth):
        obs = sampling.sample_observations(truth, 0.25, 0.0, 3)
        np.testing.assert_array_equal(obs.values[obs.mask], truth[obs.mask])
        assert not obs.values[~obs.mask].any()
        assert obs.mask.sum() == obs.n_observed

    def test_deterministic(self, truth):
        a = sampling.sample_observations(truth, 0.2, 0.0, 11)
        b = sampling.sample_observations(truth, 0.2, 0.0, 11)
        np.testing.assert_array_equal(a.omega, b.omega)
        np.testing.assert_array_equal(a.values, b.values)
        c = sampling.sample_observations(truth, 0.2, 0.0, 12)
        assert (a.omega != c.omega).any()

    def test_noise_statistics(self, rng):
        truth = np.zeros((20, 20, 10))
        obs = sampling.sample_observations(truth, 0.8, 2.0, 0)
        resid = obs.values[obs.mask]
        assert abs(resid.mean()) < 0.15
        assert resid.std() == pytest.approx(2.0, rel=0.1)
        assert obs.noise_sigma == 2.0

    def test_excluded_cells(self, truth):
        obs = sampling.sample_observations(truth, 1.0, 0.0, 0,
                                           excluded_cells=[(4, 7)])
        assert obs.n_observed == truth.size - 6
        assert not obs.mask[4, 7].any()
        assert obs.mask[4, 6].all()

    def test_ratio_validation(self, truth):
        for bad in (0.0, -0.1, 1.01):
            with pytest.raises(ValueError):
                sampling.sample_observations(truth, bad, 0.0, 0)

    def test_tiny_ratio_zero_samples(self):
        with pytest.raises(ValueError):
            sampling.sample_observations(np.zeros((2, 2, 2)), 0.01, 0.0, 0)

    def test_rank_validation(self):
        with pytest.raises(ValueError):
            sampling.sample_observations(np.zeros((4, 4)), 0.5, 0.0, 0)


class TestProjectOmega:
    def test_projects(self, truth):
        obs = sampling.sample_observations(truth, 0.3, 0.0, 1)
        proj = sampling.project_omega(truth, obs.mask)
        np.testing.assert_array_equal(proj, obs.values)

    def test_dim_mismatch(self, truth):
        with pytest.raises(ValueError):
            sampling.project_omega(truth, np.ones((3, 3, 3), dtype=bool))


class TestExportCsv:
    def test_round_trip(self, truth, tmp_path):
        obs = sampling.sample_observations(truth, 0.15, 0.0, 2)
        path = tmp_path / "omega.csv"
        sampling.export_omega_csv(path, obs)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["i", "j", "m", "value_dbm"]
        assert len(rows) == obs.n_observed + 1
        for row, (i, j, m) in zip(rows[1:], obs.omega):
            assert [int(row[0]), int(row[1]), int(row[2])] == [i, j, m]
            assert float(row[3]) == truth[i, j, m]
