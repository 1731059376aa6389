"""Sorted-L1 norm, its proximal operator and scalar soft-thresholding."""
from __future__ import annotations

import numba
import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "sorted_l1_norm",
    "dual_sorted_l1_norm",
    "prox_sorted_l1",
    "soft_threshold",
]


def _pair(b, lam):
    b = np.asarray(b, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if b.ndim != 1 or b.shape != lam.shape:
        raise ShapeError(f"vector of shape {b.shape} does not match lambda of shape {lam.shape}")
    return b, lam


def sorted_l1_norm(b, lam) -> float:
    """Return ``sum_i lam_i |b|_(i)`` with ``|b|_(1) >= ... >= |b|_(p)``."""
    b, lam = _pair(b, lam)
    return float(lam @ np.sort(np.abs(b))[::-1])


def dual_sorted_l1_norm(g, lam) -> float:
    """Dual norm ``max_k sum_{i<=k} |g|_(i) / sum_{i<=k} lam_i``.

    Infinite when ``lam`` vanishes on a prefix carrying non-zero mass of ``g``.
    """
    g, lam = _pair(g, lam)
    num = np.cumsum(np.sort(np.abs(g))[::-1])
    den = np.cumsum(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0),
                         np.where(num > 0, np.inf, 0.0))
    return float(ratio.max())


@numba.njit(cache=True, nogil=True)
def _pava_nonincreasing(z):
    """Least-squares non-increasing fit of ``z`` by pool-adjacent-violators."""
    n = z.size
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    top = -1
    for idx in range(n):
        top += 1
        sums[top] = z[idx]
        counts[top] = 1
        # pool while the new block mean exceeds its left neighbour's
        while top > 0 and sums[top] * counts[top - 1] > sums[top - 1] * counts[top]:
            sums[top - 1] += sums[top]
            counts[top - 1] += counts[top]
            top -= 1
    out = np.empty(n)
    pos = 0
    for block in range(top + 1):
        mean = sums[block] / counts[block]
        for _ in range(counts[block]):
            out[pos] = mean
            pos += 1
    return out


def prox_sorted_l1(v, lam) -> np.ndarray:
    """Proximal operator ``argmin_b 0.5 ||v - b||^2 + J_lam(b)``.

    Sort ``|v|`` in decreasing order (stable in the original index), fit a
    non-increasing sequence to ``|v|_sorted - lam`` by PAVA, clip at zero,
    then undo the sort and restore signs.
    """
    v, lam = _pair(v, lam)
    order = np.argsort(-np.abs(v), kind="stable")
    fitted = np.maximum(_pava_nonincreasing(np.ascontiguousarray(np.abs(v)[order] - lam)), 0.0)
    out = np.empty_like(v)
    out[order] = fitted
    # adding 0.0 turns -0.0 into 0.0
    return np.sign(v) * out + 0.0


def soft_threshold(x, lam):
    """Scalar shrinkage ``sign(x) max(|x| - lam, 0)``; broadcasts over arrays."""
    if np.any(np.asarray(lam) < 0):
        raise DomainError("soft_threshold requires lam >= 0")
    out = np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)
    return float(out) if np.ndim(out) == 0 else out
