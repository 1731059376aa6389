"""Tuning sequences for SLOPE and the normal quantile they are built from.

All sequences are expressed on the scale of a design whose entries have
variance 1/n, so they do not depend on the sample size (the heuristic
sequence excepted).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "SequenceKind",
    "LambdaSequence",
    "normal_cdf",
    "normal_quantile",
    "lambda_bh",
    "lambda_heuristic",
    "lambda_constant",
]

# Acklam's rational approximation, relative error ~1.2e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


class SequenceKind(str, enum.Enum):
    BH = "bh"
    HEURISTIC = "heur"
    CONSTANT = "const"


@dataclass(frozen=True)
class LambdaSequence:
    """A non-increasing, non-negative vector of penalty weights.

    ``params`` records how the sequence was generated (``q``, ``delta``,
    ``sigma`` and, for the heuristic sequence, ``n``); ``kind`` is None for
    user-supplied weights.
    """

    values: np.ndarray
    kind: Optional[SequenceKind] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("lambda sequence must be a non-empty vector")
        if not np.all(np.isfinite(values)):
            raise DomainError("lambda sequence must be finite")
        if np.any(values < 0):
            raise DomainError("lambda sequence must be non-negative")
        if np.any(np.diff(values) > 0):
            raise DomainError("lambda sequence must be non-increasing")
        if self.kind is SequenceKind.CONSTANT and np.any(values != values[0]):
            raise DomainError("constant sequence must have equal entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) < 0))


def normal_cdf(x: float) -> float:
    """Standard normal distribution function via ``erfc``."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _initial_guess(u: float) -> float:
    if u < _P_LOW:
        t = math.sqrt(-2.0 * math.log(u))
        num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
        den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
        return num / den
    t = u - 0.5
    r = t * t
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * t
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def normal_quantile(u: float) -> float:
    """Inverse of the standard normal distribution function.

    A rational approximation is polished by two Halley steps against
    :func:`normal_cdf`. The lower half is computed directly and the upper
    half by reflection, so ``normal_quantile(1 - u) == -normal_quantile(u)``
    whenever ``1 - u`` is exactly representable.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"normal_quantile requires 0 < u < 1, got {u!r}")
    if u > 0.5:
        return -normal_quantile(1.0 - u)
    if u == 0.5:
        return 0.0
    x = _initial_guess(u)
    for _ in range(2):
        err = normal_cdf(x) - u
        step = err * _SQRT2PI * math.exp(0.5 * x * x)
        x -= step / (1.0 + 0.5 * x * step)
    return x


def _upper_quantiles(tail: np.ndarray) -> np.ndarray:
    # Phi^{-1}(1 - t) evaluated as -Phi^{-1}(t) to keep precision for small t
    return np.array([-normal_quantile(t) for t in tail])


def _check_common(p, q, sigma, delta=0.0):
    if int(p) != p or p < 1:
        raise DomainError(f"p must be a positive integer, got {p!r}")
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not delta >= 0:
        raise DomainError(f"delta must be non-negative, got {delta!r}")


def lambda_bh(p: int, q: float, delta: float = 0.0, sigma: float = 1.0) -> LambdaSequence:
    """Benjamini-Hochberg sequence ``sigma (1 + delta) Phi^{-1}(1 - q i / 2p)``.

    Entries whose quantile would be negative are clamped at zero.
    """
    _check_common(p, q, sigma, delta)
    p = int(p)
    tail = q * np.arange(1, p + 1) / (2.0 * p)
    values = sigma * (1.0 + delta) * np.maximum(_upper_quantiles(tail), 0.0)
    return LambdaSequence(values, SequenceKind.BH, {"q": q, "delta": delta, "sigma": sigma})


def lambda_heuristic(p: int, n: int, q: float, sigma: float = 1.0) -> LambdaSequence:
    """Heuristic sequence correcting the BH weights for correlated columns.

    Each weight is inflated by ``sqrt(1 + sum_{j<i} lambda_j^2 / (n - i - 2))``
    and capped by its predecessor. Once ``n - i - 2 <= 0`` the previous
    value is repeated.
    """
    _check_common(p, q, sigma)
    if int(n) != n or n <= 3:
        raise DomainError(f"heuristic sequence requires integer n > 3, got {n!r}")
    p, n = int(p), int(n)
    base = sigma * np.maximum(_upper_quantiles(q * np.arange(1, p + 1) / (2.0 * p)), 0.0)
    values = np.empty(p)
    values[0] = base[0]
    sum_sq = values[0] ** 2
    for i in range(2, p + 1):
        dof = n - i - 2
        if dof > 0:
            values[i - 1] = min(values[i - 2], base[i - 1] * math.sqrt(1.0 + sum_sq / dof))
        else:
            values[i - 1] = values[i - 2]
        sum_sq += values[i - 1] ** 2
    return LambdaSequence(
        values, SequenceKind.HEURISTIC, {"q": q, "delta": 0.0, "sigma": sigma, "n": n}
    )


def lambda_constant(p: int, q: float, delta: float = 0.0, sigma: float = 1.0) -> LambdaSequence:
    """LASSO tuning: every entry equals the first BH weight."""
    _check_common(p, q, sigma, delta)
    first = sigma * (1.0 + delta) * max(-normal_quantile(q / (2.0 * p)), 0.0)
    return LambdaSequence(
        np.full(int(p), first), SequenceKind.CONSTANT, {"q": q, "delta": delta, "sigma": sigma}
    )
