"""Dense 3-way tensor algebra: mode-k unfolding/folding, singular value
thresholding, and nuclear norm.

Unfolding convention: element (i1, i2, i3) maps to row i_k; the column index
is formed by the remaining modes in increasing order with the lower-numbered
remaining mode varying fastest.
"""
from __future__ import annotations

import numpy as np


class SvdError(RuntimeError):
    """SVD failed to converge; message carries condition diagnostics."""


def _check_mode(k: int):
    if k not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {k}")


def unfold(x: np.ndarray, k: int) -> np.ndarray:
    """Mode-k matricization of a 3-way tensor, shape (dim_k, prod of rest)."""
    _check_mode(k)
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got ndim={x.ndim}")
    return np.moveaxis(x, k - 1, 0).reshape(x.shape[k - 1], -1, order="F")


def fold(mat: np.ndarray, k: int, dims) -> np.ndarray:
    """Inverse of :func:`unfold` for the given tensor dims."""
    _check_mode(k)
    dims = tuple(dims)
    rest = tuple(d for axis, d in enumerate(dims) if axis != k - 1)
    moved = np.asarray(mat).reshape((dims[k - 1],) + rest, order="F")
    return np.moveaxis(moved, 0, k - 1)


def _svd(a: np.ndarray):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        fro = float(np.linalg.norm(a))
        raise SvdError(
            f"SVD did not converge on a {a.shape[0]}x{a.shape[1]} matrix "
            f"(frobenius={fro:.3e}, finite={bool(np.isfinite(a).all())})"
        ) from exc


def svt(a: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding: soft-threshold the singular values by tau.

    This is the proximal operator of tau * nuclear norm.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    u, s, vt = _svd(np.asarray(a, dtype=np.float64))
    s = np.maximum(s - tau, 0.0)
    return (u * s) @ vt


def nuclear_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    a = np.asarray(a, dtype=np.float64)
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    _, s, _ = _svd(a)
    return float(s.sum())
