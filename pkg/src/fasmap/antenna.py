"""Pixel-antenna codebook synthesis, directional gain, and the differential
gain prior.

A codebook row is a unit-norm complex weight vector over truncated Fourier
basis functions; rows are phase-rotated copies of one Gaussian-tapered
profile, so the inter-mode correlation magnitude depends only on the circular
mode distance. The taper width is tuned so the adjacent-mode correlation hits
the configured target.

Mode indices are 0-based throughout the API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, degenerate_cell, link_geometry_map

GAIN_FLOOR_DB = -300.0
_POWER_FLOOR = 1e-30


class SynthesisError(ValueError):
    """Requested codebook correlation is unreachable for the given size."""


@dataclass(frozen=True)
class Codebook:
    weights: np.ndarray        # (M, R) complex, row m = weight vector of mode m
    target_corr: float
    c_norm: float = 1.0        # global power calibration constant

    def __post_init__(self):
        if self.weights.ndim != 2 or self.weights.shape[1] % 2 == 0:
            raise ValueError("weights must be (M, R) with R odd")

    @property
    def n_modes(self) -> int:
        return self.weights.shape[0]

    @property
    def eadof(self) -> int:
        return self.weights.shape[1]

    @property
    def k_indices(self) -> np.ndarray:
        half = (self.eadof - 1) // 2
        return np.arange(-half, half + 1)


@dataclass(frozen=True)
class DifferentialPrior:
    """Cycle-consistent circular first differences of the directional gain.

    ``d[i, j, m]`` is gain(mode m) - gain(mode m-1, circular) in dB at the
    cell's angle of departure, after mean removal over the mode cycle.
    """

    d: np.ndarray              # (I, J, M) float64
    degenerate_cell: tuple[int, int] | None = None


def basis_value(k: int, phi) -> complex:
    """Truncated Fourier basis function exp(j*k*phi) / sqrt(2*pi)."""
    return np.exp(1j * k * np.asarray(phi)) / math.sqrt(2.0 * math.pi)


def circular_distance(p: int, q: int, n_modes: int) -> int:
    d = abs(p - q)
    return min(d, n_modes - d)


def _taper(s: float, eadof: int) -> np.ndarray:
    half = (eadof - 1) // 2
    k = np.arange(-half, half + 1)
    a = np.exp(-k.astype(float) ** 2 / (2.0 * s * s))
    return a / np.linalg.norm(a)


def _adjacent_corr(s: float, eadof: int, n_modes: int) -> float:
    a = _taper(s, eadof)
    half = (eadof - 1) // 2
    k = np.arange(-half, half + 1)
    return abs(np.sum(a ** 2 * np.exp(1j * k * 2.0 * math.pi / n_modes)))


def synthesize_codebook(n_modes: int, eadof: int, target_corr: float,
                        peak_gain_dbi: float = 7.14) -> Codebook:
    """Build an M x R codebook whose adjacent-mode correlation magnitude
    equals ``target_corr`` (within 5e-3), calibrated to the given peak gain.

    Weights are w[m, k] = a_k * exp(j*k*theta_m) with theta_m = 2*pi*m/M and a
    Gaussian taper a; the taper width is found by bisection on the adjacent
    correlation, which spans (uniform-taper value, 1) for this family.
    """
    if n_modes < 2:
        raise SynthesisError("need at least two modes")
    if eadof < 1 or eadof % 2 == 0:
        raise SynthesisError("EADoF must be an odd positive integer")
    if not (0.0 < target_corr < 1.0):
        raise SynthesisError("target correlation must lie in (0, 1)")

    s_lo, s_hi = 1e-2, 1e3
    c_hi = _adjacent_corr(s_lo, eadof, n_modes)   # narrow taper -> corr ~ 1
    c_lo = _adjacent_corr(s_hi, eadof, n_modes)   # wide taper -> uniform limit
    if not (c_lo <= target_corr <= c_hi):
        raise SynthesisError(
            f"correlation {target_corr} unreachable for M={n_modes}, R={eadof}; "
            f"achievable range is [{c_lo:.4f}, {c_hi:.4f}]")
    for _ in range(200):
        s_mid = math.sqrt(s_lo * s_hi)
        if _adjacent_corr(s_mid, eadof, n_modes) > target_corr:
            s_lo = s_mid
        else:
            s_hi = s_mid
    s = math.sqrt(s_lo * s_hi)
    achieved = _adjacent_corr(s, eadof, n_modes)
    if abs(achieved - target_corr) > 5e-3:
        raise SynthesisError(
            f"bisection landed at correlation {achieved:.4f}, "
            f"target {target_corr}")

    a = _taper(s, eadof)
    half = (eadof - 1) // 2
    k = np.arange(-half, half + 1)
    theta = 2.0 * math.pi * np.arange(n_modes) / n_modes
    weights = a[None, :] * np.exp(1j * np.outer(theta, k))
    cb = Codebook(weights=weights, target_corr=target_corr, c_norm=1.0)
    return Codebook(weights=weights, target_corr=target_corr,
                    c_norm=_calibrate_peak(cb, peak_gain_dbi))


def _calibrate_peak(codebook: Codebook, peak_gain_dbi: float,
                    n_grid: int = 3600) -> float:
    """Scan the angle grid per mode and return the constant that puts the
    codebook's peak power at the requested gain."""
    phi = np.linspace(-math.pi, math.pi, n_grid, endpoint=False)
    power = np.abs(field_values(codebook, phi)) ** 2
    return 10.0 ** (peak_gain_dbi / 10.0) / power.max()


def field_values(codebook: Codebook, phi) -> np.ndarray:
    """Complex far-field value per mode, shape phi.shape + (M,)."""
    phi = np.asarray(phi, dtype=np.float64)
    basis = np.exp(1j * phi[..., None] * codebook.k_indices) / math.sqrt(2.0 * math.pi)
    return basis @ codebook.weights.T


def gain_table(codebook: Codebook, phi) -> np.ndarray:
    """Directional gain in dBi for every mode, shape phi.shape + (M,).

    Pattern nulls are floored at GAIN_FLOOR_DB instead of -inf.
    """
    power = np.abs(field_values(codebook, phi)) ** 2 * codebook.c_norm
    return np.where(power < _POWER_FLOOR, GAIN_FLOOR_DB,
                    10.0 * np.log10(np.maximum(power, _POWER_FLOOR)))


def gain_db(codebook: Codebook, m: int, phi):
    """Directional gain of mode ``m`` (0-based) at AoD ``phi`` in dBi."""
    if not (0 <= m < codebook.n_modes):
        raise IndexError(f"mode {m} out of range 0..{codebook.n_modes - 1}")
    out = gain_table(codebook, phi)[..., m]
    return float(out) if np.isscalar(phi) or np.asarray(phi).ndim == 0 else out


def mode_correlation(codebook: Codebook, p: int, q: int) -> float:
    """|w_p^H w_q| between two modes."""
    return abs(np.vdot(codebook.weights[p], codebook.weights[q]))


def cycle_projection(d: np.ndarray) -> np.ndarray:
    """Project mode-cycle difference vectors onto the zero-sum subspace by
    removing the per-cell mean over the last axis."""
    return d - d.mean(axis=-1, keepdims=True)


def differential_prior(codebook: Codebook, scenario: Scenario) -> DifferentialPrior:
    """Circular gain differences per cell, projected to be cycle-consistent.

    The prior depends only on the codebook and the cell AoDs; path loss,
    shadowing, and transmit power never enter. A cell whose center coincides
    with the BS has an undefined AoD; its prior is zeroed and flagged.
    """
    _, phi = link_geometry_map(scenario)
    gains = gain_table(codebook, phi.ravel())           # (I*J, M)
    raw = gains - np.roll(gains, 1, axis=1)
    proj = cycle_projection(raw)
    deg = degenerate_cell(scenario)
    d = proj.reshape(scenario.grid_rows, scenario.grid_cols, codebook.n_modes)
    if deg is not None:
        d[deg[0], deg[1], :] = 0.0
    return DifferentialPrior(d=d, degenerate_cell=deg)


# ---------------------------------------------------------------------------
# codebook text export (round-trip exact for 64-bit floats)

def save_codebook(path, codebook: Codebook) -> None:
    lines = [
        "fasmap-codebook v1",
        f"modes {codebook.n_modes}",
        f"eadof {codebook.eadof}",
        f"target_corr {codebook.target_corr:.17g}",
        f"c_norm {codebook.c_norm:.17g}",
    ]
    half = (codebook.eadof - 1) // 2
    for m in range(codebook.n_modes):
        for ki, k in enumerate(range(-half, half + 1)):
            w = codebook.weights[m, ki]
            lines.append(f"{m} {k} {w.real:.17g} {w.imag:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if lines[0] != "fasmap-codebook v1":
        raise ValueError(f"unrecognized codebook header: {lines[0]!r}")
    header = dict(ln.split(None, 1) for ln in lines[1:5])
    n_modes = int(header["modes"])
    eadof = int(header["eadof"])
    weights = np.zeros((n_modes, eadof), dtype=np.complex128)
    half = (eadof - 1) // 2
    for ln in lines[5:]:
        m_s, k_s, re_s, im_s = ln.split()
        weights[int(m_s), int(k_s) + half] = float(re_s) + 1j * float(im_s)
    return Codebook(weights=weights, target_corr=float(header["target_corr"]),
                    c_norm=float(header["c_norm"]))
