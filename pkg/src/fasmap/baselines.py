"""Reference reconstruction methods: KNN inverse-distance interpolation,
per-mode ordinary Kriging, and the two solver ablations.

KNN and Kriging treat each antenna-mode slice as an independent spatial field
over the cell-center grid; observed cells always keep their measured values.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.distance import cdist, pdist, squareform

from .antenna import DifferentialPrior
from .kernels import idw
from .sampling import ObservationSet
from .scenario import Scenario, cell_centers
from .solver import SolverConfig, solve, solve_variant

KRIGING_MIN_OBSERVATIONS = 10


@dataclass(frozen=True)
class BaselineParams:
    knn_neighbors: int = 5
    idw_power: float = 2.0
    variogram_bins: int = 15
    variogram_range_default: float = 10.0   # fallback range when the fit fails


@dataclass(frozen=True)
class VariogramModel:
    """Exponential semivariogram gamma(h) = nugget + (sill-nugget)*(1-exp(-h/range))."""

    nugget: float
    sill: float
    range_m: float

    def __post_init__(self):
        if not (self.sill >= self.nugget >= 0.0) or self.range_m <= 0.0:
            raise ValueError("variogram needs sill >= nugget >= 0 and range > 0")

    def __call__(self, h):
        return self.nugget + (self.sill - self.nugget) * (
            1.0 - np.exp(-np.asarray(h, dtype=np.float64) / self.range_m))


def _slice_points(observations: ObservationSet, scenario: Scenario, m: int):
    centers = cell_centers(scenario).reshape(
        scenario.grid_rows, scenario.grid_cols, 2)
    obs_mask = observations.mask[:, :, m]
    pts = centers[obs_mask]
    vals = observations.values[:, :, m][obs_mask]
    return centers.reshape(-1, 2), obs_mask.ravel(), pts, vals


def knn_reconstruct(observations: ObservationSet, scenario: Scenario,
                    params: BaselineParams | None = None) -> np.ndarray:
    """Per-mode inverse-distance-weighted mean of the K nearest observations."""
    params = params or BaselineParams()
    dims = observations.dims
    out = np.empty(dims)
    empty = [m for m in range(dims[2]) if not observations.mask[:, :, m].any()]
    if empty:
        raise ValueError(f"mode slices without observations: {empty}")
    for m in range(dims[2]):
        centers, obs_flat, pts, vals = _slice_points(observations, scenario, m)
        est = idw(centers[:, 0], centers[:, 1], pts[:, 0], pts[:, 1], vals,
                  params.knn_neighbors, params.idw_power)
        est[obs_flat] = vals
        out[:, :, m] = est.reshape(dims[0], dims[1])
    return out


def fit_variogram(pts: np.ndarray, vals: np.ndarray, n_bins: int,
                  range_default: float) -> VariogramModel:
    """Least-squares exponential fit to the binned empirical semivariogram.

    Falls back to (nugget 0, sill = sample variance, range = range_default)
    with a warning when the fit cannot be carried out.
    """
    sample_var = float(np.var(vals))
    fallback = VariogramModel(0.0, max(sample_var, 0.0), range_default)
    try:
        h = pdist(pts)
        g = 0.5 * pdist(vals[:, None], metric="sqeuclidean")
        h_max = h.max() / 2.0
        edges = np.linspace(0.0, h_max, n_bins + 1)
        which = np.digitize(h, edges[1:-1])
        keep = h <= h_max
        lags, gammas = [], []
        for b in range(n_bins):
            sel = keep & (which == b)
            if sel.any():
                lags.append(h[sel].mean())
                gammas.append(g[sel].mean())
        lags = np.asarray(lags)
        gammas = np.asarray(gammas)
        if len(lags) < 3 or gammas.max() <= 0.0:
            raise RuntimeError("degenerate empirical variogram")

        def residual(p):
            nugget, partial_sill, rng = p
            return nugget + partial_sill * (1.0 - np.exp(-lags / rng)) - gammas

        x0 = np.array([0.0, max(sample_var, 1e-12), max(lags.mean(), 1e-6)])
        fit = least_squares(residual, x0,
                            bounds=([0.0, 0.0, 1e-9], [np.inf, np.inf, np.inf]))
        nugget, partial_sill, rng = fit.x
        return VariogramModel(float(nugget), float(nugget + partial_sill), float(rng))
    except Exception:
        warnings.warn("variogram fit failed; using default exponential model",
                      RuntimeWarning)
        return fallback


def _kriging_weights(pts: np.ndarray, model: VariogramModel,
                     targets: np.ndarray):
    """Ordinary-Kriging weights for all targets at once via one bordered
    system (unbiasedness enforced with a Lagrange multiplier)."""
    n = pts.shape[0]
    gamma = model(squareform(pdist(pts)))
    np.fill_diagonal(gamma, 0.0)
    lhs = np.zeros((n + 1, n + 1))
    lhs[:n, :n] = gamma
    lhs[n, :n] = 1.0
    lhs[:n, n] = 1.0
    rhs = np.empty((n + 1, targets.shape[0]))
    rhs[:n] = model(cdist(pts, targets))
    rhs[n] = 1.0
    sol = np.linalg.solve(lhs, rhs)
    if not np.isfinite(sol).all():
        raise np.linalg.LinAlgError("non-finite kriging weights")
    return sol[:n]


def kriging_reconstruct(observations: ObservationSet, scenario: Scenario,
                        params: BaselineParams | None = None) -> np.ndarray:
    """Per-mode ordinary Kriging under a fitted exponential variogram."""
    params = params or BaselineParams()
    dims = observations.dims
    out = np.empty(dims)
    short = [m for m in range(dims[2])
             if int(observations.mask[:, :, m].sum()) < KRIGING_MIN_OBSERVATIONS]
    if short:
        raise ValueError(
            f"mode slices with fewer than {KRIGING_MIN_OBSERVATIONS} "
            f"observations: {short}")
    for m in range(dims[2]):
        centers, obs_flat, pts, vals = _slice_points(observations, scenario, m)
        model = fit_variogram(pts, vals, params.variogram_bins,
                              params.variogram_range_default)
        if model.sill <= model.nugget:
            # flat field: any positive nugget makes the system well posed and
            # the estimate collapses to the observation mean
            model = VariogramModel(max(model.nugget, 1e-12),
                                   max(model.nugget, 1e-12) + 1e-12,
                                   model.range_m)
        targets = centers[~obs_flat]
        try:
            weights = _kriging_weights(pts, model, targets)
        except np.linalg.LinAlgError:
            warnings.warn("singular kriging system; jittering the nugget",
                          RuntimeWarning)
            jitter = model.nugget + max(1e-6 * model.sill, 1e-12)
            model = VariogramModel(jitter, max(model.sill, jitter) + 1e-12,
                                   model.range_m)
            weights = _kriging_weights(pts, model, targets)
        est = np.empty(centers.shape[0])
        est[~obs_flat] = weights.T @ vals
        est[obs_flat] = vals
        out[:, :, m] = est.reshape(dims[0], dims[1])
    return out


def lrtc_reconstruct(observations: ObservationSet, config: SolverConfig):
    """Plain low-rank tensor completion: the solver with the physics weight
    forced to zero."""
    return solve_variant(observations, None, config, lam2=0.0)


def pr_only_reconstruct(observations: ObservationSet, prior: DifferentialPrior,
                        config: SolverConfig):
    """Physics-only reconstruction: the solver with the low-rank weight forced
    to zero. Cells with no observed mode keep the zero-initialized mean level
    (the cyclic physics term pins only the differences)."""
    return solve_variant(observations, prior, config, lam1=0.0)
