"""Observation set construction: uniform entry sampling, masking, noise."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ObservationSet:
    omega: np.ndarray          # (N, 3) int indices (i, j, m)
    values: np.ndarray         # (I, J, M) tensor, zero off omega
    mask: np.ndarray           # (I, J, M) bool indicator of omega
    noise_sigma: float
    sampling_ratio: float
    seed: int

    @property
    def dims(self):
        return self.values.shape

    @property
    def n_observed(self) -> int:
        return self.omega.shape[0]


def sample_observations(truth: np.ndarray, ratio: float, noise_sigma: float,
                        seed: int, excluded_cells=()) -> ObservationSet:
    """Draw round(ratio * I*J*M) entry indices uniformly without replacement
    and record noisy values there; all triples of ``excluded_cells`` (a list
    of (i, j) pairs, e.g. a degenerate BS cell) are ineligible.
    """
    truth = np.asarray(truth, dtype=np.float64)
    if truth.ndim != 3:
        raise ValueError("truth tensor must be 3-way")
    if not (0.0 < ratio <= 1.0):
        raise ValueError(f"sampling ratio must be in (0, 1], got {ratio}")
    n_rows, n_cols, n_modes = truth.shape
    total = truth.size
    eligible = np.ones(total, dtype=bool)
    for (i, j) in excluded_cells:
        base = (i * n_cols + j) * n_modes
        eligible[base:base + n_modes] = False
    pool = np.flatnonzero(eligible)
    n_samples = min(int(round(ratio * total)), pool.size)
    if n_samples == 0:
        raise ValueError(f"sampling ratio {ratio} yields zero samples")
    rng = np.random.default_rng(seed)
    flat = np.sort(rng.choice(pool, size=n_samples, replace=False))
    mask = np.zeros(total, dtype=bool)
    mask[flat] = True
    values = np.zeros(total)
    observed = truth.ravel()[flat]
    if noise_sigma > 0.0:
        observed = observed + rng.normal(0.0, noise_sigma, size=n_samples)
    values[flat] = observed
    omega = np.column_stack(np.unravel_index(flat, truth.shape)).astype(np.int64)
    return ObservationSet(omega=omega,
                          values=values.reshape(truth.shape),
                          mask=mask.reshape(truth.shape),
                          noise_sigma=float(noise_sigma),
                          sampling_ratio=float(ratio),
                          seed=int(seed))


def project_omega(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out every entry not in the observation set."""
    x = np.asarray(x)
    if x.shape != mask.shape:
        raise ValueError(f"dim mismatch: {x.shape} vs {mask.shape}")
    return x * mask


def export_omega_csv(path, observations: ObservationSet) -> None:
    """Write the observation set as CSV with header i,j,m,value_dbm."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "m", "value_dbm"])
        vals = observations.values
        for i, j, m in observations.omega:
            writer.writerow([i, j, m, f"{vals[i, j, m]:.17g}"])
