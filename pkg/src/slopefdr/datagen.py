"""Seeded simulation data: Gaussian design, sparse signal, Gaussian noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .solver import Dataset

__all__ = [
    "GeneratorSpec",
    "generate",
    "replicate_seed",
    "amplitude_strong",
    "amplitude_weak",
    "dimensions_from_n",
    "p_from_n",
]


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    p: int
    k: int
    amplitude: float
    sigma: float = 1.0
    seed: int = 0
    design: str = "gaussian"

    def __post_init__(self):
        if self.design not in ("gaussian", "identity"):
            raise DomainError(f"unknown design {self.design!r}")
        if self.design == "identity" and self.n != self.p:
            raise DomainError("identity design requires n == p")
        if self.n < 1 or self.p < 1:
            raise DomainError("n and p must be positive")
        if not 0 <= self.k <= self.p:
            raise DomainError(f"k must lie in [0, p={self.p}], got {self.k}")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def replicate_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Independent stream for one replicate, derived from the master seed.

    ``key`` identifies the replicate (for instance grid cell and replicate
    index); distinct keys give non-overlapping streams.
    """
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))


def generate(spec: GeneratorSpec, seed_seq: np.random.SeedSequence | None = None) -> Dataset:
    """Draw ``y = X b0 + eps`` with ``X_ij ~ N(0, 1/n)`` and ``eps ~ N(0, sigma^2 I)``.

    The first ``k`` coefficients of ``b0`` equal ``spec.amplitude``. With
    ``design="identity"`` the design is the n x n identity instead.
    """
    rng = np.random.Generator(np.random.PCG64(seed_seq if seed_seq is not None else spec.seed))
    if spec.design == "identity":
        X = np.eye(spec.n)
    else:
        X = rng.standard_normal((spec.n, spec.p)) / math.sqrt(spec.n)
    eps = spec.sigma * rng.standard_normal(spec.n)
    b0 = np.zeros(spec.p)
    b0[: spec.k] = spec.amplitude
    return Dataset(X, X @ b0 + eps, b0, spec.sigma)


def amplitude_strong(p: int, sigma: float = 1.0, delta: float = 0.0) -> float:
    """Signal level ``2 sigma (1 + delta) sqrt(2 log p)``."""
    if p < 2:
        raise DomainError("amplitude requires p >= 2")
    return 2.0 * sigma * (1.0 + delta) * math.sqrt(2.0 * math.log(p))


def amplitude_weak(p: int, sigma: float = 1.0) -> float:
    """Signal level ``0.9 sigma sqrt(2 log p)``."""
    if p < 2:
        raise DomainError("amplitude requires p >= 2")
    return 0.9 * sigma * math.sqrt(2.0 * math.log(p))


def p_from_n(n: int) -> int:
    return round(0.05 * n**1.5)


def dimensions_from_n(n: int, alpha: float) -> tuple[int, int]:
    """``p = round(0.05 n^1.5)`` and ``k = round(n^alpha)``, half to even."""
    return p_from_n(n), round(n**alpha)
