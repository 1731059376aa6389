"""Monte Carlo estimation of FDR and power for SLOPE and LASSO."""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .datagen import (
    GeneratorSpec,
    amplitude_strong,
    amplitude_weak,
    generate,
    p_from_n,
    replicate_seed,
)
from .diagnostics import SupportDiagnostics
from .errors import ConvergenceError, DomainError
from .seqgen import lambda_bh, lambda_constant, lambda_heuristic
from .solver import DEFAULT_ZERO_TOL, solve_slope
from .sorted_l1 import prox_sorted_l1

__all__ = [
    "Method",
    "ExperimentConfig",
    "ReportRow",
    "ExperimentReport",
    "SelectionMetrics",
    "selection_metrics",
    "bh_orthogonal",
    "compare_bh_slope_orthogonal",
    "fdr_decomposition_replicate",
    "fdr_decomposition",
    "run_grid",
    "REPORT_HEADER",
]

logger = logging.getLogger(__name__)

REPORT_HEADER = (
    "method", "n", "p", "k", "alpha", "delta",
    "fdr", "fdr_se", "power", "power_se", "mean_R", "replicates_done",
)
MAX_EXCLUDED_FRACTION = 0.01


class Method(str, enum.Enum):
    SLOPE_BH = "SlopeBH"
    SLOPE_HEUR = "SlopeHeur"
    LASSO = "Lasso"


@dataclass(frozen=True)
class SelectionMetrics:
    V: int
    TR: int
    R: int
    k: int
    fdp: float
    tpp: float


def selection_metrics(b0, beta, zero_tol: float = DEFAULT_ZERO_TOL) -> SelectionMetrics:
    """False, true and total selections with their proportions.

    ``fdp = V / max(R, 1)``; ``tpp = TR / k``, taken as 1 when ``k = 0``.
    """
    b0 = np.asarray(b0, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if b0.shape != beta.shape:
        raise DomainError(f"truth has {b0.size} entries but estimate has {beta.size}")
    selected = np.abs(beta) > zero_tol
    truth = b0 != 0
    V = int(np.sum(selected & ~truth))
    TR = int(np.sum(selected & truth))
    R = V + TR
    k = int(truth.sum())
    return SelectionMetrics(V, TR, R, k, V / max(R, 1), TR / k if k > 0 else 1.0)


def bh_orthogonal(y_tilde, q: float, sigma: float = 1.0) -> np.ndarray:
    """Benjamini-Hochberg step-up selection on ``|y_tilde|``.

    Returns the sorted 0-based indices of the ``j_BH`` largest magnitudes,
    where ``j_BH`` is the largest ``j`` with ``|y|_(j) >= lambda^BH_j``.
    """
    y = np.abs(np.asarray(y_tilde, dtype=float))
    order = np.argsort(-y, kind="stable")
    thresholds = lambda_bh(y.size, q, 0.0, sigma).values
    passing = np.flatnonzero(y[order] >= thresholds)
    if passing.size == 0:
        return np.array([], dtype=int)
    return np.sort(order[: passing[-1] + 1])


def compare_bh_slope_orthogonal(
    p: int, k: int, amplitude: float, q: float = 0.2, draws: int = 1000, seed: int = 0
) -> dict:
    """Compare SLOPE (identity design, BH weights) with BH on the same draws.

    Reports how often the SLOPE model is at least as large as the BH
    rejection set, how often the sets coincide, and the mean sizes.
    """
    lam = lambda_bh(p, q)
    b0 = np.zeros(p)
    b0[:k] = amplitude
    rng = np.random.default_rng(seed)
    slope_sizes, bh_sizes, same = [], [], 0
    for _ in range(draws):
        y = b0 + rng.standard_normal(p)
        sel_slope = np.flatnonzero(prox_sorted_l1(y, lam))
        sel_bh = bh_orthogonal(y, q)
        slope_sizes.append(sel_slope.size)
        bh_sizes.append(sel_bh.size)
        same += int(np.array_equal(sel_slope, sel_bh))
    slope_sizes, bh_sizes = np.array(slope_sizes), np.array(bh_sizes)
    return {
        "draws": draws,
        "freq_slope_ge_bh": float(np.mean(slope_sizes >= bh_sizes)),
        "freq_equal_sets": same / draws,
        "mean_R_slope": float(slope_sizes.mean()),
        "mean_R_bh": float(bh_sizes.mean()),
    }


def fdr_decomposition_replicate(diag: SupportDiagnostics, b0, lam) -> float:
    """``sum_r (1/r) #{i null : |T_i| > lam_r, T in H_r}`` for one replicate.

    ``T`` belongs to exactly one region ``H_r``, identified by ``diag.r_star``,
    so only that term of the outer sum is non-zero.
    """
    if diag.a != 1.0:
        raise DomainError(f"decomposition needs diagnostics computed with a = 1, got {diag.a}")
    lam = np.asarray(lam, dtype=float)
    r = diag.r_star
    if r is None or r == 0:
        return 0.0
    null = np.asarray(b0) == 0
    count = int(np.sum(null & (np.abs(diag.T) > lam[r - 1])))
    return count / r


def fdr_decomposition(replicate_diags: Sequence[SupportDiagnostics], b0, lam) -> float:
    """Average of :func:`fdr_decomposition_replicate` over replicates."""
    values = [fdr_decomposition_replicate(d, b0, lam) for d in replicate_diags]
    return float(np.mean(values))


@dataclass
class ExperimentConfig:
    n_grid: list
    alpha_grid: list = field(default_factory=lambda: [0.3])
    delta_grid: list = field(default_factory=lambda: [0.0])
    q: float = 0.2
    amplitude_rule: object = "strong"
    methods: list = field(default_factory=lambda: [m.value for m in Method])
    replicates: int = 500
    sigma: float = 1.0
    master_seed: int = 0
    zero_tol: float = DEFAULT_ZERO_TOL
    # extensions: explicit sparsity levels instead of n^alpha, identity design
    k_grid: Optional[list] = None
    design: str = "gaussian"
    tol: Optional[float] = None
    max_iter: int = 100_000

    def __post_init__(self):
        if not self.n_grid or not self.delta_grid:
            raise DomainError("n_grid and delta_grid must be non-empty")
        if self.k_grid is None and not self.alpha_grid:
            raise DomainError("alpha_grid must be non-empty when k_grid is not given")
        if self.k_grid is not None and not self.k_grid:
            raise DomainError("k_grid must be non-empty when given")
        if any(not 0 < a < 1 for a in self.alpha_grid):
            raise DomainError("alpha values must lie in (0, 1)")
        if any(d < 0 for d in self.delta_grid):
            raise DomainError("delta values must be non-negative")
        if not 0 < self.q < 1:
            raise DomainError("q must lie in (0, 1)")
        if self.replicates < 1:
            raise DomainError("replicates must be at least 1")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if self.design not in ("gaussian", "identity"):
            raise DomainError(f"unknown design {self.design!r}")
        try:
            self.methods = [Method(m) for m in self.methods]
        except ValueError as exc:
            raise DomainError(str(exc)) from None
        if not self.methods:
            raise DomainError("at least one method is required")
        self._amplitude_kind()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise DomainError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return cls(**raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["methods"] = [m.value for m in self.methods]
        return out

    def _amplitude_kind(self):
        rule = self.amplitude_rule
        if isinstance(rule, str) and rule.lower() in ("strong", "weak"):
            return rule.lower(), None
        if isinstance(rule, dict) and set(rule) == {"fixed"}:
            rule = rule["fixed"]
        if isinstance(rule, (int, float)) and not isinstance(rule, bool):
            return "fixed", float(rule)
        raise DomainError(f"amplitude_rule must be 'strong', 'weak' or a number, got {rule!r}")

    def amplitude(self, p: int, delta: float) -> float:
        kind, value = self._amplitude_kind()
        if kind == "strong":
            return amplitude_strong(p, self.sigma, delta)
        if kind == "weak":
            return amplitude_weak(p, self.sigma)
        return value

    def cells(self) -> list[dict]:
        """Grid cells in a fixed order: n, then sparsity, then delta."""
        out = []
        for n in self.n_grid:
            if self.k_grid is not None:
                sparsity = [(None, int(k)) for k in self.k_grid]
            else:
                sparsity = [(a, None) for a in self.alpha_grid]
            p = n if self.design == "identity" else p_from_n(n)
            for alpha, k in sparsity:
                if k is None:
                    k = round(n**alpha)
                if k > p:
                    raise DomainError(f"k={k} exceeds p={p} at n={n}")
                for delta in self.delta_grid:
                    out.append({"n": int(n), "p": int(p), "k": int(k), "alpha": alpha,
                                "delta": float(delta)})
        return out


@dataclass
class ReportRow:
    method: str
    n: int
    p: int
    k: int
    alpha: Optional[float]
    delta: float
    fdr: float
    fdr_se: float
    power: Optional[float]
    power_se: Optional[float]
    mean_R: float
    replicates_done: int


@dataclass
class ExperimentReport:
    rows: list
    # per cell and method: replicate-ordered fdp, tpp and R arrays
    replicates: dict = field(default_factory=dict)
    # per cell: fraction of replicates where LASSO selects no more than SLOPE
    nesting: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, name)) for name in REPORT_HEADER])
        return buf.getvalue()

    def row(self, method, **cell) -> ReportRow:
        method = Method(method).value
        for r in self.rows:
            if r.method == method and all(getattr(r, k) == v for k, v in cell.items()):
                return r
        raise KeyError((method, cell))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _lambda_for(method: Method, cfg: ExperimentConfig, cell: dict):
    p, n, delta = cell["p"], cell["n"], cell["delta"]
    if method is Method.SLOPE_BH:
        return lambda_bh(p, cfg.q, delta, cfg.sigma)
    if method is Method.LASSO:
        return lambda_constant(p, cfg.q, delta, cfg.sigma)
    return lambda_heuristic(p, n, cfg.q, cfg.sigma)


def _run_replicate(cfg: ExperimentConfig, cell_index: int, cell: dict, rep: int):
    spec = GeneratorSpec(
        cell["n"], cell["p"], cell["k"], cfg.amplitude(cell["p"], cell["delta"]),
        cfg.sigma, cfg.master_seed, cfg.design,
    )
    data = generate(spec, replicate_seed(cfg.master_seed, cell_index, rep))
    out = {}
    for method in cfg.methods:
        sol = solve_slope(data, _lambda_for(method, cfg, cell), tol=cfg.tol, max_iter=cfg.max_iter)
        m = selection_metrics(data.b0, sol.beta, cfg.zero_tol)
        out[method.value] = (sol.converged, m.fdp, m.tpp, m.R)
    return cell_index, rep, out


def _run_chunk(args):
    cfg, tasks = args
    return [_run_replicate(cfg, ci, cell, rep) for ci, cell, rep in tasks]


def run_grid(config: ExperimentConfig, threads: Optional[int] = None) -> ExperimentReport:
    """Estimate FDR and power on every grid cell for every method.

    Replicates share nothing and are farmed out to ``threads`` worker
    processes; results are aggregated in replicate order, so the report
    does not depend on the number of workers.
    """
    cells = config.cells()
    tasks = [(ci, cell, rep) for ci, cell in enumerate(cells) for rep in range(config.replicates)]
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(tasks) == 1:
        results = _run_chunk((config, tasks))
    else:
        chunk = max(1, math.ceil(len(tasks) / (4 * threads)))
        chunks = [(config, tasks[i : i + chunk]) for i in range(0, len(tasks), chunk)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = [res for part in pool.map(_run_chunk, chunks) for res in part]
    results.sort(key=lambda item: (item[0], item[1]))

    report = ExperimentReport(rows=[])
    for ci, cell in enumerate(cells):
        per_cell = [out for c, _, out in results if c == ci]
        for method in config.methods:
            records = [out[method.value] for out in per_cell]
            kept = [rec for rec in records if rec[0]]
            excluded = len(records) - len(kept)
            if excluded > MAX_EXCLUDED_FRACTION * len(records):
                raise ConvergenceError(
                    f"{method.value} at n={cell['n']}, k={cell['k']}, delta={cell['delta']}: "
                    f"{excluded} of {len(records)} replicates did not converge"
                )
            if excluded:
                logger.warning("%s: excluded %d unconverged replicate(s)", method.value, excluded)
            fdp = np.array([rec[1] for rec in kept])
            tpp = np.array([rec[2] for rec in kept])
            R = np.array([rec[3] for rec in kept], dtype=float)
            done = len(kept)
            report.replicates[(ci, method.value)] = {"fdp": fdp, "tpp": tpp, "R": R}
            has_power = cell["k"] > 0
            report.rows.append(ReportRow(
                method=method.value, n=cell["n"], p=cell["p"], k=cell["k"],
                alpha=cell["alpha"], delta=cell["delta"],
                fdr=float(np.mean(fdp)), fdr_se=_se(fdp),
                power=float(np.mean(tpp)) if has_power else None,
                power_se=_se(tpp) if has_power else None,
                mean_R=float(np.mean(R)), replicates_done=done,
            ))
        if Method.LASSO in config.methods and Method.SLOPE_BH in config.methods:
            pairs = [(out[Method.LASSO.value], out[Method.SLOPE_BH.value]) for out in per_cell]
            both = [(l[3], s[3]) for l, s in pairs if l[0] and s[0]]
            if both:
                report.nesting[ci] = float(np.mean([l <= s for l, s in both]))
    return report


def _se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def joint_se(se_a: float, se_b: float) -> float:
    """Standard error of a difference of two independent estimates."""
    return math.hypot(se_a, se_b)
