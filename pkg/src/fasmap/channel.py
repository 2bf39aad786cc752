"""Ground-truth RSS tensor generation: segmented log-distance path loss,
spatially correlated log-normal shadowing, and mode-dependent antenna gain.

The tensor is indexed (i, j, m) and holds RSS in dBm. Tensor files use the
"RMT" format: a JSON header plus a raw little-endian float64 sidecar.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .antenna import Codebook, gain_table
from .scenario import (Scenario, cell_centers, cell_size, degenerate_cell,
                       link_geometry_map, los_map, scenario_hash)

RMT_ORDER = "i-major,then j,then m"
RMT_DTYPE = "float64-le"


@dataclass(frozen=True)
class ChannelParams:
    p_tx: float = 30.0          # dBm
    alpha_los: float = 2.0
    alpha_nlos: float = 3.8
    beta_los: float = 32.4      # dB at 1 m
    beta_nlos: float = 35.3
    sigma_los: float = 1.0      # dB
    sigma_nlos: float = 3.0
    d_corr: float = 10.0        # shadowing decorrelation distance, m

    def __post_init__(self):
        if self.alpha_los <= 0 or self.alpha_nlos <= 0:
            raise ValueError("path-loss exponents must be positive")
        if self.sigma_los < 0 or self.sigma_nlos < 0:
            raise ValueError("shadowing deviations must be nonnegative")
        if self.d_corr <= 0:
            raise ValueError("decorrelation distance must be positive")


def shadowing_field(scenario: Scenario, params: ChannelParams, seed: int) -> np.ndarray:
    """Correlated log-normal shadowing in dB, shape (I, J).

    One zero-mean Gaussian field with exponential (Gudmundson) spatial
    correlation exp(-dist/d_corr) is drawn by Cholesky factorization of the
    grid covariance, then scaled per cell by sigma_los or sigma_nlos.
    """
    centers = cell_centers(scenario)
    n = centers.shape[0]
    if params.sigma_los == 0.0 and params.sigma_nlos == 0.0:
        return np.zeros(scenario.shape)
    cov = np.exp(-squareform(pdist(centers)) / params.d_corr)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        warnings.warn("shadowing covariance not positive definite; "
                      "retrying with diagonal jitter 1e-8", RuntimeWarning)
        chol = np.linalg.cholesky(cov + 1e-8 * np.eye(n))
    z = np.random.default_rng(seed).standard_normal(n)
    field = chol @ z
    sigma = np.where(los_map(scenario).ravel() == 1,
                     params.sigma_los, params.sigma_nlos)
    return (field * sigma).reshape(scenario.shape)


def ground_truth_tensor(scenario: Scenario, codebook: Codebook,
                        params: ChannelParams, seed: int) -> np.ndarray:
    """Dense RSS tensor (I, J, M) in dBm.

    Per cell: p_tx + gain(mode, AoD) - (alpha*10*log10(d) + beta) + shadowing,
    with LoS/NLoS parameters chosen by the visibility flag. The shadowing draw
    is shared across modes at a cell.
    """
    d, phi = link_geometry_map(scenario)
    d = d.ravel().copy()
    deg = degenerate_cell(scenario)
    if deg is not None:
        # cell center on top of the BS: clamp the distance so the tensor
        # stays finite; the cell is excluded from sampling downstream
        d[deg[0] * scenario.grid_cols + deg[1]] = 0.5 * min(cell_size(scenario))
    gains = gain_table(codebook, phi.ravel())                    # (C, M)
    if deg is not None:
        gains[deg[0] * scenario.grid_cols + deg[1], :] = 0.0
    los = los_map(scenario).ravel() == 1
    alpha = np.where(los, params.alpha_los, params.alpha_nlos)
    beta = np.where(los, params.beta_los, params.beta_nlos)
    path_loss = alpha * 10.0 * np.log10(d) + beta                # (C,)
    eps = shadowing_field(scenario, params, seed).ravel()
    x = params.p_tx + gains - path_loss[:, None] + eps[:, None]
    return x.reshape(scenario.grid_rows, scenario.grid_cols, codebook.n_modes)


# ---------------------------------------------------------------------------
# RMT file format

def _sidecar(path: Path) -> Path:
    if path.suffix == ".json":
        return path.with_suffix(".bin")
    return path.with_name(path.name + ".bin")


def save_rmt(path, values: np.ndarray, scenario_hash_: str = "", seed: int = 0) -> None:
    """Write a tensor as JSON header ``path`` plus a binary ``.bin`` sidecar."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3:
        raise ValueError("RMT tensors are 3-way")
    if not np.isfinite(values).all():
        raise ValueError("RMT tensors must be fully finite")
    path = Path(path)
    header = {
        "dims": list(values.shape),
        "order": RMT_ORDER,
        "dtype": RMT_DTYPE,
        "scenario_hash": scenario_hash_,
        "seed": int(seed),
    }
    path.write_text(json.dumps(header, sort_keys=True) + "\n", encoding="utf-8")
    _sidecar(path).write_bytes(np.ascontiguousarray(values, dtype="<f8").tobytes())


def load_rmt(path) -> tuple[np.ndarray, dict]:
    """Read an RMT file pair; bit-exact inverse of :func:`save_rmt`."""
    path = Path(path)
    header = json.loads(path.read_text(encoding="utf-8"))
    if header.get("dtype") != RMT_DTYPE or header.get("order") != RMT_ORDER:
        raise ValueError(f"unsupported RMT header in {path}")
    dims = tuple(header["dims"])
    raw = _sidecar(path).read_bytes()
    values = np.frombuffer(raw, dtype="<f8").reshape(dims).astype(np.float64)
    return values, header


def tensor_hash_fields(scenario: Scenario, seed: int) -> dict:
    return {"scenario_hash_": scenario_hash(scenario), "seed": seed}
