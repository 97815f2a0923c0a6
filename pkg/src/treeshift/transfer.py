"""Per-step transfer matrices, period products, and strip entropies.

Pinning the label of the m-th path node turns strip counting into a linear
recursion: appending the next strip piece multiplies the per-symbol count
vector by a k x k step matrix R whose (s, i) entry is a(i, s) times the
number of labelings of the new strip piece with its path node pinned to s.
For an eventually periodic ray the step matrices repeat with the ray period,
so the growth rate per period is the spectral radius of the product of one
period's steps, and the strip entropy has a closed form: log rho divided by
the strip sites of one period.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .counting import (
    EXACT_BIT_GUARD,
    MODE_AUTO,
    MODE_EXACT,
    MODE_LOG,
    CountVector,
    context,
    log_sum,
    resolve_mode,
)
from .errors import SizeGuardError
from .matrices import (
    NEG_INF,
    BinaryMatrix,
    LogNonnegMatrix,
    PerronData,
    PrimitivityResult,
    is_primitive,
    log_matvec,
    product,
    spectral_radius,
)
from .ray import Ray, StripProfile, lambda_strip, period_sites, step_profile, validate_ray
from .tree import MarkovTree

#: iterative fallback length when the closed form refuses
DEFAULT_FALLBACK_STEPS = 1000

METHOD_CLOSED = "closed_form"
METHOD_ITERATIVE = "iterative"

#: step tags on the golden-mean tree, named by the off-path branch content
TAG_RESTRICTED_BRANCH = "restricted-branch"  # off-branch is the restricted letter
TAG_FREE_BRANCH = "free-branch"              # off-branch is the full-row letter
TAG_NO_BRANCH = "no-branch"                  # no off-branch at all
TAG_OTHER = "other"


@dataclass(frozen=True)
class TransferStep:
    """One step matrix R together with the strip profile it was built from."""

    matrix: LogNonnegMatrix
    profile: StripProfile
    width: int


@dataclass
class StripEntropyResult:
    """A strip entropy value for one width, with its provenance."""

    width: int
    value: float
    method: str
    denominator: int
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "n": self.width,
            "method": self.method,
            "value": self.value,
            "denominator": str(self.denominator),
            "diagnostics": self.diagnostics,
        }


def _strip_piece_factors(ctx, profile: StripProfile, n: int, s: int):
    """Per-branch masked sums for the strip piece, root pinned to s."""
    return [
        ctx.branch_factor(s, ctx.subtree_counts(t, n - 1))
        for t in profile.off_branches
    ]


def step_matrix(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    j: int,
    n: int,
    mode: str = MODE_AUTO,
) -> TransferStep:
    """Step matrix carrying the pinned count vector from path node j-1 to j.

    R(s, i) = a(i, s) * (labelings of the width-n strip piece at node j with
    the node pinned to s); the strip factor is a product over off-path
    branches, empty product = 1.
    """
    if j < 1:
        raise ValueError("step index j must be >= 1")
    if n < 1:
        raise ValueError("strip width n must be >= 1")
    used = resolve_mode(tree, a, n, mode)
    ctx = context(tree, a, used)
    profile = step_profile(tree, ray, j)
    k = a.dim
    if used == MODE_EXACT:
        weights = [math.prod(_strip_piece_factors(ctx, profile, n, s)) for s in range(k)]
        rows = [
            [a.entry(i, s) * weights[s] for i in range(k)] for s in range(k)
        ]
        matrix = LogNonnegMatrix.from_exact(rows)
    else:
        weights = [sum(_strip_piece_factors(ctx, profile, n, s)) for s in range(k)]
        logs = np.full((k, k), NEG_INF)
        for s in range(k):
            for i in range(k):
                if a.entry(i, s):
                    logs[s, i] = weights[s]
        matrix = LogNonnegMatrix(logs)
    return TransferStep(matrix=matrix, profile=profile, width=n)


def initial_strip_counts(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n: int,
    mode: str = MODE_AUTO,
) -> CountVector:
    """Labelings of the root strip piece, per pinned root symbol.

    The root's off-path children are all generators except the ray's first
    letter.
    """
    if n < 1:
        raise ValueError("strip width n must be >= 1")
    used = resolve_mode(tree, a, n, mode)
    ctx = context(tree, a, used)
    profile = step_profile(tree, ray, 0)
    k = a.dim
    if used == MODE_EXACT:
        vals = tuple(
            math.prod(_strip_piece_factors(ctx, profile, n, i)) for i in range(k)
        )
    else:
        vals = tuple(
            float(sum(_strip_piece_factors(ctx, profile, n, i))) for i in range(k)
        )
    return CountVector(vals, used)


def _phase(ray: Ray, j: int) -> int:
    """Collapse step index j >= 1 onto its representative (prefix or period)."""
    if j <= ray.c:
        return j
    return ray.c + 1 + (j - ray.c - 1) % ray.ell


def _predicted_region_bits(tree: MarkovTree, a: BinaryMatrix, ray: Ray, n: int, m: int) -> float:
    sites = sum(
        lambda_strip(tree, step_profile(tree, ray, j), n) for j in range(m + 1)
    )
    return sites * math.log2(max(a.dim, 2))


def strip_counts(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n: int,
    m: int,
    mode: str = MODE_AUTO,
) -> tuple[CountVector, float]:
    """Count vector after m steps, pinned at path node m.

    Covers the strip pieces at path indices 0..m.  Returns the vector and a
    running log-normalizer (zero in exact mode): in log mode the vector is
    renormalized by its max entry each step and the log of the factored-out
    scale accumulates in the normalizer.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    validate_ray(tree, ray)
    used = mode
    if used == MODE_AUTO:
        used = (
            MODE_EXACT
            if _predicted_region_bits(tree, a, ray, n, m) <= EXACT_BIT_GUARD
            else MODE_LOG
        )
    elif used == MODE_EXACT and _predicted_region_bits(tree, a, ray, n, m) > EXACT_BIT_GUARD:
        raise SizeGuardError(
            f"exact strip counts refused: predicted size beyond {EXACT_BIT_GUARD} bits"
        )
    steps: dict[int, TransferStep] = {}
    if used == MODE_EXACT:
        vec = list(initial_strip_counts(tree, a, ray, n, MODE_EXACT).values)
        k = a.dim
        for j in range(1, m + 1):
            ph = _phase(ray, j)
            if ph not in steps:
                steps[ph] = step_matrix(tree, a, ray, ph, n, MODE_EXACT)
            r = steps[ph].matrix.exact
            vec = [
                sum(r[s][i] * vec[i] for i in range(k)) for s in range(k)
            ]
        return CountVector(tuple(vec), MODE_EXACT), 0.0
    v = np.array(initial_strip_counts(tree, a, ray, n, MODE_LOG).values, dtype=float)
    normalizer = 0.0
    for j in range(1, m + 1):
        ph = _phase(ray, j)
        if ph not in steps:
            steps[ph] = step_matrix(tree, a, ray, ph, n, MODE_LOG)
        v = log_matvec(steps[ph].matrix, v)
        top = float(v.max())
        if top == NEG_INF:
            raise ValueError("counts vanished: adjacency admits no labelings here")
        v -= top
        normalizer += top
    return CountVector(tuple(float(x) for x in v), MODE_LOG), normalizer


@dataclass(frozen=True)
class PeriodMatrix:
    """Product of one period's step matrices, plus support primitivity."""

    matrix: LogNonnegMatrix
    support_primitivity: PrimitivityResult
    phases: tuple[int, ...]


def period_matrix(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n: int,
    mode: str = MODE_AUTO,
) -> PeriodMatrix:
    """Composition of the step matrices over one ray period.

    The steps at phases c+1 .. c+ell are composed in application order (the
    phase-(c+1) step acts first), which is the operator whose powers drive
    the pinned count vector across whole periods.  Its spectral radius is
    invariant under the choice of starting phase.
    """
    validate_ray(tree, ray)
    phases = tuple(range(ray.c + 1, ray.c + ray.ell + 1))
    steps = [step_matrix(tree, a, ray, j, n, mode).matrix for j in phases]
    composed = product(list(reversed(steps)))
    return PeriodMatrix(
        matrix=composed,
        support_primitivity=is_primitive(composed.support()),
        phases=phases,
    )


def strip_entropy_closed(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n: int,
    mode: str = MODE_AUTO,
    fallback_steps: int = DEFAULT_FALLBACK_STEPS,
) -> StripEntropyResult:
    """Strip entropy of width n via the period product's spectral radius.

    value = log rho(D) / (strip sites of one period).  Requires the support
    of the period product to be primitive; otherwise the Perron asymptotics
    behind the formula are not justified and the iterative estimator is used
    instead (flagged in the diagnostics).
    """
    validate_ray(tree, ray)
    if not is_primitive(a):
        warnings.warn("adjacency matrix is not primitive; strip entropy may not converge")
    pm = period_matrix(tree, a, ray, n, mode)
    if not pm.support_primitivity:
        result = strip_entropy_iterative(
            tree, a, ray, n, max(fallback_steps, ray.c + 2 * ray.ell)
        )
        result.diagnostics["closed_form_refused"] = "period product support not primitive"
        return result
    perron: PerronData = spectral_radius(pm.matrix)
    denominator = period_sites(tree, ray, n)
    value = perron.rho_log / denominator
    return StripEntropyResult(
        width=n,
        value=value,
        method=METHOD_CLOSED,
        denominator=denominator,
        diagnostics={
            "rho_log": perron.rho_log,
            "power_iterations": perron.iterations,
            "power_converged": perron.converged,
            "support_primitive": True,
            "support_exponent": pm.support_primitivity.exponent,
        },
    )


def strip_entropy_iterative(
    tree: MarkovTree,
    a: BinaryMatrix,
    ray: Ray,
    n: int,
    m_max: int,
) -> StripEntropyResult:
    """Strip entropy of width n estimated from the count iteration itself.

    Runs the log-domain iteration to m_max and takes the growth of the log
    count over the final whole period divided by that period's strip sites.
    Diagnostics carry the oscillation width of the per-step estimates over
    the last period and the raw cumulative quotient log(count)/sites.
    """
    validate_ray(tree, ray)
    c, ell = ray.c, ray.ell
    if m_max < c + ell:
        raise ValueError("m_max must be >= c + ell")
    steps: dict[int, TransferStep] = {}
    v = np.array(initial_strip_counts(tree, a, ray, n, MODE_LOG).values, dtype=float)
    normalizer = 0.0
    # log totals are only needed near m_max (two periods suffice)
    first_needed = max(0, m_max - 2 * ell)
    totals: dict[int, float] = {}
    if first_needed == 0:
        totals[0] = log_sum(tuple(v))
    for j in range(1, m_max + 1):
        ph = _phase(ray, j)
        if ph not in steps:
            steps[ph] = step_matrix(tree, a, ray, ph, n, MODE_LOG)
        v = log_matvec(steps[ph].matrix, v)
        top = float(v.max())
        if top == NEG_INF:
            raise ValueError("counts vanished: adjacency admits no labelings here")
        v -= top
        normalizer += top
        if j >= first_needed:
            totals[j] = normalizer + log_sum(tuple(v))
    sites = period_sites(tree, ray, n)
    value = (totals[m_max] - totals[m_max - ell]) / sites
    window = [
        (totals[j] - totals[j - ell]) / sites
        for j in range(max(ell, m_max - ell + 1), m_max + 1)
    ]
    region_sites = sum(
        lambda_strip(tree, step_profile(tree, ray, j), n) for j in range(m_max + 1)
    )
    return StripEntropyResult(
        width=n,
        value=value,
        method=METHOD_ITERATIVE,
        denominator=sites,
        diagnostics={
            "m_max": m_max,
            "oscillation_width": (max(window) - min(window)) if window else 0.0,
            "raw_quotient": totals[m_max] / region_sites,
        },
    )


def classify_golden_step(tree: MarkovTree, a: BinaryMatrix, step: TransferStep) -> str:
    """Tag a step on the golden-mean tree by its off-branch content.

    Interior steps there come in exactly three kinds: the off-branch is the
    restricted letter (path continues along the full-row letter), the
    off-branch is the full-row letter (path turns onto the restricted one),
    or there is no off-branch (path leaves the restricted letter).  Any other
    tree, and the root profile, tag as "other".
    """
    if tree.shape != BinaryMatrix.golden():
        return TAG_OTHER
    kind = step.profile.kind()
    if kind == (0, 0, (1,)):
        return TAG_RESTRICTED_BRANCH
    if kind == (0, 1, (0,)):
        return TAG_FREE_BRANCH
    if kind == (1, 0, ()):
        return TAG_NO_BRANCH
    return TAG_OTHER
