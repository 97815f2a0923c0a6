"""Topological entropy estimation and strip-entropy convergence studies.

The topological entropy of a Markov hom tree-shift is the limit of
log(block labeling count) / block size.  Because both numerator and
denominator grow like the tree itself, the raw quotient converges only at
rate O(1/block size); the per-level difference quotient
(log count increment) / (block size increment) converges geometrically and
is what the reference values here use.  The raw quotients are still reported
for diagnostics.
"""

from __future__ import annotations

import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .counting import MODE_AUTO, MODE_LOG, context
from .matrices import BinaryMatrix, is_primitive
from .ray import Ray
from .transfer import strip_entropy_closed
from .tree import MarkovTree, delta_size

#: residuals below this many machine epsilons are treated as converged noise
NOISE_FLOOR = 10 * sys.float_info.epsilon

DEFAULT_N_BUDGET = 20


@dataclass(frozen=True)
class BlockEntropyRow:
    n: int
    log_count: float
    block_size: int
    ratio: float
    estimate: float | None  # per-level difference quotient, None at n=0


@dataclass(frozen=True)
class TopologicalEntropy:
    """Reference entropy with its per-level table and a gap diagnostic."""

    h_ref: float
    n_used: int
    rows: tuple[BlockEntropyRow, ...]
    gap: float  # |estimate(n) - estimate(n-1)| at the budget, 0 if n_used < 2


def topological_entropy(
    tree: MarkovTree,
    a: BinaryMatrix,
    n_budget: int = DEFAULT_N_BUDGET,
) -> TopologicalEntropy:
    """Log-domain block-count sweep up to n_budget.

    The reference value is the last per-level difference quotient; the table
    carries the raw quotients as well so consumers can judge convergence.
    """
    if n_budget < 1:
        raise ValueError("n_budget must be >= 1")
    if not is_primitive(a):
        warnings.warn("adjacency matrix is not primitive; entropy limit may not exist")
    ctx = context(tree, a, MODE_LOG)
    rows: list[BlockEntropyRow] = []
    logs: list[float] = []
    sizes: list[int] = []
    for n in range(n_budget + 1):
        log_count = ctx.block_counts(n).total()
        size = delta_size(tree, n)
        logs.append(log_count)
        sizes.append(size)
        estimate = None
        if n >= 1:
            estimate = (logs[n] - logs[n - 1]) / (sizes[n] - sizes[n - 1])
        rows.append(
            BlockEntropyRow(
                n=n,
                log_count=log_count,
                block_size=size,
                ratio=log_count / size,
                estimate=estimate,
            )
        )
    gap = 0.0
    if n_budget >= 2:
        gap = abs(rows[n_budget].estimate - rows[n_budget - 1].estimate)
    return TopologicalEntropy(
        h_ref=rows[n_budget].estimate,
        n_used=n_budget,
        rows=tuple(rows),
        gap=gap,
    )


@dataclass(frozen=True)
class RateFit:
    """Ordinary least squares on (n, log residual)."""

    slope: float | None
    intercept: float | None
    r_squared: float | None
    points: int
    status: str  # "ok" or "below-noise-floor"


def fit_rate(points: Sequence[tuple[int, float]]) -> RateFit:
    """Fit log(residual) = slope * n + intercept.

    Residuals within the noise floor are excluded (their logs are
    meaningless); fewer than three usable points reports
    "converged below noise floor" instead of a fit.
    """
    usable = [(n, math.log(r)) for n, r in points if r > NOISE_FLOOR]
    if len(usable) < 3:
        return RateFit(None, None, None, len(usable), "below-noise-floor")
    xs = np.array([n for n, _ in usable], dtype=float)
    ys = np.array([y for _, y in usable], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2, len(usable), "ok")


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: float
    method: str
    residual: float
    runtime: float


@dataclass
class EntropyReport:
    """Strip entropies across widths, residuals against the reference."""

    tree_id: str
    matrix_id: str
    ray_id: str
    h_ref: float
    h_ref_n: int
    h_ref_gap: float
    rows: tuple[ConvergenceRow, ...]
    rate: RateFit
    total_runtime: float
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "tree": self.tree_id,
            "matrix": self.matrix_id,
            "ray": self.ray_id,
            "h_ref": self.h_ref,
            "h_ref_n": self.h_ref_n,
            "h_ref_gap": self.h_ref_gap,
            "rows": [
                {
                    "n": r.n,
                    "h_strip": r.value,
                    "h_ref": self.h_ref,
                    "residual": r.residual,
                    "method": r.method,
                    "runtime": r.runtime,
                }
                for r in self.rows
            ],
            "fitted_rate": {
                "slope": self.rate.slope,
                "intercept": self.rate.intercept,
                "r_squared": self.rate.r_squared,
                "points": self.rate.points,
                "status": self.rate.status,
            },
            "total_runtime": self.total_runtime,
            "diagnostics": self.diagnostics,
        }


def strip_convergence(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n_range: Iterable[int],
    n_budget: int = DEFAULT_N_BUDGET,
    mode: str = MODE_AUTO,
    tree_id: str = "",
    matrix_id: str = "",
    ray_id: str = "",
) -> EntropyReport:
    """Strip entropies over a range of widths, with residuals and a rate fit.

    Uses the closed form whenever the period product's support is primitive
    (it falls back to the iterative estimator on its own otherwise).  The
    reference value is the block-count estimate at n_budget; its own gap
    diagnostic rides along in the report.
    """
    start = time.perf_counter()
    reference = topological_entropy(tree, a, n_budget)
    rows: list[ConvergenceRow] = []
    for n in sorted(set(int(n) for n in n_range)):
        t0 = time.perf_counter()
        result = strip_entropy_closed(tree, a, ray, n, mode)
        rows.append(
            ConvergenceRow(
                n=n,
                value=result.value,
                method=result.method,
                residual=abs(result.value - reference.h_ref),
                runtime=time.perf_counter() - t0,
            )
        )
    rate = fit_rate([(r.n, r.residual) for r in rows])
    return EntropyReport(
        tree_id=tree_id or f"M(d={tree.d})",
        matrix_id=matrix_id or f"A(k={a.dim})",
        ray_id=ray_id or ray.describe(),
        h_ref=reference.h_ref,
        h_ref_n=reference.n_used,
        h_ref_gap=reference.gap,
        rows=tuple(rows),
        rate=rate,
        total_runtime=time.perf_counter() - start,
    )
