"""Support characterisation of SLOPE solutions and proof-event probes.

The score ``U(b)`` is the negative gradient of the loss, and ``T(a) =
U(b_hat) + a b_hat``. The number of selected variables is ``r`` exactly
when ``T(a)`` lies in the region ``H_r``, and a variable is selected
exactly when ``|T_i(a)|`` exceeds ``lambda_r``. Only the least-squares
loss is instantiated, but the checks below only consume ``U``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CertificateError, DataError, DomainError, ShapeError
from .seqgen import lambda_bh
from .solver import DEFAULT_ZERO_TOL, Dataset, SlopeSolution, support

__all__ = [
    "SupportDiagnostics",
    "QEventReport",
    "score_vector",
    "t_vector",
    "hr_margin",
    "hr_membership",
    "hr_gamma_membership",
    "locate_r",
    "verify_theorems",
    "gamma_decomposition",
    "resolvent_set",
    "q_events",
]


@dataclass
class SupportDiagnostics:
    U: np.ndarray
    T: np.ndarray
    R: int
    r_star: Optional[int]
    gamma_vec: Optional[np.ndarray]
    M: Optional[np.ndarray]
    theorem2_ok: bool
    theorem3_ok: bool
    a: float = 1.0
    support: np.ndarray = None
    duality_gap: float = 0.0

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "r_star": self.r_star,
            "theorem2_ok": self.theorem2_ok,
            "theorem3_ok": self.theorem3_ok,
            "duality_gap": self.duality_gap,
        }


@dataclass
class QEventReport:
    q1: bool
    q2: bool
    q3: bool
    k_star: int
    gamma_n: float
    resolvent_set: np.ndarray

    @property
    def all(self) -> bool:
        return self.q1 and self.q2 and self.q3

    def to_dict(self) -> dict:
        return {
            "q1": self.q1,
            "q2": self.q2,
            "q3": self.q3,
            "k_star": self.k_star,
            "gamma_n": self.gamma_n,
            "resolvent_set": [int(i) + 1 for i in self.resolvent_set],
        }


def score_vector(data: Dataset, b) -> np.ndarray:
    """``U(b) = X'(y - X b)``."""
    b = np.asarray(b, dtype=float)
    if b.shape != (data.p,):
        raise ShapeError(f"coefficient vector has {b.size} entries, expected {data.p}")
    return data.X.T @ (data.y - data.X @ b)


def t_vector(data: Dataset, solution: SlopeSolution, a: float = 1.0) -> np.ndarray:
    if not a > 0:
        raise DomainError("a must be positive")
    return score_vector(data, solution.beta) + a * solution.beta


def _check_r(w, lam, r):
    w = np.asarray(w, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if w.shape != lam.shape or w.ndim != 1:
        raise ShapeError(f"vector of shape {w.shape} does not match lambda of shape {lam.shape}")
    if int(r) != r or not 0 <= r <= w.size:
        raise DomainError(f"r must be an integer in [0, {w.size}], got {r!r}")
    return w, lam, int(r)


def _families(w, lam, r, gamma=0.0):
    """Margins of the two inequality families defining ``H_r^gamma``.

    ``lower[j]`` is ``sum_{i=j}^r |w|_(i) - sum_{i=j}^r (lam_i - gamma)`` for
    ``j <= r`` (must be > 0); ``upper[j]`` is ``sum_{i=r+1}^j (lam_i +
    gamma) - sum_{i=r+1}^j |w|_(i)`` for ``j > r`` (must be >= 0).
    """
    diff = np.sort(np.abs(w))[::-1] - lam
    # suffix sums over 1..r and prefix sums over r+1..p
    lower = np.cumsum(diff[:r][::-1])[::-1] + gamma * np.arange(r, 0, -1)
    upper = -np.cumsum(diff[r:]) + gamma * np.arange(1, w.size - r + 1)
    return lower, upper


def hr_margin(w, lam, r: int) -> float:
    """Smallest slack of the ``H_r`` inequalities (``inf`` if there are none).

    Non-negative margins with strictly positive lower-family entries mean
    membership; the most negative entry measures the violation.
    """
    w, lam, r = _check_r(w, lam, r)
    lower, upper = _families(w, lam, r)
    return float(min(lower.min(initial=np.inf), upper.min(initial=np.inf)))


def hr_gamma_membership(w, lam, r: int, gamma: float = 0.0, slack: float = 0.0) -> bool:
    """Membership in ``H_r^gamma``; ``slack`` relaxes every inequality."""
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    if slack < 0:
        raise DomainError("slack must be non-negative")
    w, lam, r = _check_r(w, lam, r)
    lower, upper = _families(w, lam, r, gamma)
    return bool(np.all(lower > -slack) and np.all(upper >= -slack))


def hr_membership(w, lam, r: int, slack: float = 0.0) -> bool:
    """Membership of ``w`` in ``H_r``; ``r = 0`` and ``r = p`` keep one family."""
    return hr_gamma_membership(w, lam, r, 0.0, slack)


def locate_r(w, lam) -> int:
    """The ``r`` whose ``H_r`` contains ``w``, or the least-violated one.

    The regions partition generic points, so under exact arithmetic this is
    the unique member; on the boundary the lowest ``r`` of maximal margin wins.
    """
    w = np.asarray(w, dtype=float)
    margins = [hr_margin(w, lam, r) for r in range(w.size + 1)]
    return int(np.argmax(margins))


def _default_slack(solution):
    return 10.0 * solution.tol


def verify_theorems(
    data: Dataset,
    solution: SlopeSolution,
    lam,
    a: float = 1.0,
    slack: Optional[float] = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> SupportDiagnostics:
    """Check the model-size and support characterisations at a solution.

    ``theorem2_ok``: ``T(a)`` lies in ``H_R`` with every inequality relaxed by
    ``slack``. ``theorem3_ok``: every selected coordinate has ``|T_i(a)| >
    lam_R - slack`` and ``|U_i| >= lam_R - slack``, every coordinate with
    ``|T_i(a)| > lam_R + slack`` is selected, and, for strictly decreasing
    ``lam``, so is every coordinate with ``|U_i| > lam_R + slack``.
    """
    if not solution.converged:
        raise CertificateError(
            f"solution not converged (duality gap {solution.duality_gap:.3g} > {solution.tol:.3g})"
        )
    if not a > 0:
        raise DomainError("a must be positive")
    lam = np.asarray(lam, dtype=float)
    slack = _default_slack(solution) if slack is None else float(slack)

    U = score_vector(data, solution.beta)
    T = U + a * solution.beta
    sel = support(solution.beta, zero_tol)
    R = int(sel.size)
    r_star = locate_r(T, lam)
    theorem2_ok = hr_membership(T, lam, R, slack)

    selected = np.zeros(data.p, dtype=bool)
    selected[sel] = True
    if R == 0:
        # lam_0 is undefined; the claim degenerates to an empty support
        theorem3_ok = True
    else:
        lam_r = lam[R - 1]
        absT, absU = np.abs(T), np.abs(U)
        theorem3_ok = bool(
            np.all(absT[selected] > lam_r - slack)
            and np.all(selected[absT > lam_r + slack])
            and np.all(absU[selected] >= lam_r - slack)
        )
        if np.all(np.diff(lam) < 0):
            theorem3_ok = theorem3_ok and bool(np.all(selected[absU > lam_r + slack]))

    M = gamma_vec = None
    if data.b0 is not None:
        M, gamma_vec = gamma_decomposition(data, solution)
    return SupportDiagnostics(
        U, T, R, r_star, gamma_vec, M, theorem2_ok, theorem3_ok, a, sel, solution.duality_gap
    )


def gamma_decomposition(data: Dataset, solution: SlopeSolution):
    """Split ``T(1) = M + Gamma`` with ``M = X'eps + b0`` and
    ``Gamma = (I - X'X)(b_hat - b0)``."""
    if data.b0 is None:
        raise DataError("gamma decomposition requires the ground truth b0")
    X = data.X
    M = X.T @ data.noise + data.b0
    diff = solution.beta - data.b0
    Gamma = diff - X.T @ (X @ diff)
    return M, Gamma


def resolvent_set(data: Dataset, k_star: int) -> np.ndarray:
    """``supp(b0)`` plus the ``k_star - k`` null indices with largest ``|X_i' eps|``.

    Ties are broken towards the lower index. Returns sorted 0-based indices.
    """
    if data.b0 is None:
        raise DataError("resolvent set requires the ground truth b0")
    true_support = np.flatnonzero(data.b0 != 0)
    k, p = true_support.size, data.p
    if int(k_star) != k_star or not k <= k_star <= p:
        raise DomainError(f"k_star must be an integer in [{k}, {p}], got {k_star!r}")
    null = np.setdiff1d(np.arange(p), true_support)
    corr = np.abs(data.X[:, null].T @ data.noise)
    # stable sort on the negated score keeps lower indices first among ties
    extra = null[np.argsort(-corr, kind="stable")[: int(k_star) - k]]
    return np.sort(np.concatenate([true_support, extra]))


def q_events(
    data: Dataset,
    solution: SlopeSolution,
    k_star: int,
    c_q: float = 1.0,
    q: float = 0.2,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> QEventReport:
    """Evaluate the three high-probability events used in the FDR bound.

    ``q1``: supports of ``b0`` and ``b_hat`` lie in the resolvent set.
    ``q2``: ``max |Gamma_i| <= c_q sqrt(k*^2 log p / n) lambda^BH_{k*}``.
    ``q3``: ``||eps||_2 / (sigma sqrt(n)) <= 1 + 1/k*``.
    """
    if data.b0 is None or data.sigma is None:
        raise DataError("q events require the ground truth b0 and sigma")
    if not c_q > 0:
        raise DomainError("c_q must be positive")
    S_star = resolvent_set(data, k_star)
    if k_star < 1:
        raise DomainError("k_star must be at least 1")
    n, p = data.n, data.p
    in_set = np.zeros(p, dtype=bool)
    in_set[S_star] = True
    union = np.union1d(np.flatnonzero(data.b0 != 0), support(solution.beta, zero_tol))
    q1 = bool(np.all(in_set[union]))

    _, Gamma = gamma_decomposition(data, solution)
    lam_k = lambda_bh(p, q, 0.0, data.sigma).values[k_star - 1]
    gamma_n = c_q * math.sqrt(k_star**2 * math.log(p) / n) * lam_k
    q2 = bool(np.max(np.abs(Gamma)) <= gamma_n)

    eps = data.noise
    q3 = bool(np.linalg.norm(eps) / (data.sigma * math.sqrt(n)) <= 1.0 + 1.0 / k_star)
    return QEventReport(q1, q2, q3, int(k_star), gamma_n, S_star)
