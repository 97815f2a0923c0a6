"""Pattern-count recursions over tree blocks and follower subtrees.

Everything reduces to one typed recursion: the number of admissible labelings
of the depth-n follower subtree of a type-t node, with the node's own label
pinned, is a product over the node's children of a masked sum of the childs'
counts one level down.  The root block (all d children) is the same product
over every generator.

Counts run either over arbitrary-precision integers (exact mode) or as logs
(log mode, -inf encoding a zero count).  Exact mode is chosen automatically
while the predicted bit size stays desk-scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .matrices import NEG_INF, BinaryMatrix
from .tree import MarkovTree, delta_size

MODE_EXACT = "exact"
MODE_LOG = "log"
MODE_AUTO = "auto"

#: auto mode switches to logs when predicted exact size exceeds this many bits
EXACT_BIT_GUARD = 10**6


@dataclass(frozen=True)
class CountVector:
    """Per-root-symbol pattern counts, exact integers or logs."""

    values: tuple
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in (MODE_EXACT, MODE_LOG):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_EXACT:
            if any(v < 0 for v in self.values):
                raise ValueError("exact counts must be nonnegative")
        else:
            if any(math.isnan(v) for v in self.values):
                raise ValueError("log counts must not be NaN")

    @property
    def k(self) -> int:
        return len(self.values)

    def total(self):
        """Sum of the per-symbol counts (logsumexp in log mode)."""
        if self.mode == MODE_EXACT:
            return sum(self.values)
        return log_sum(self.values)

    def log_values(self) -> tuple[float, ...]:
        if self.mode == MODE_LOG:
            return self.values
        return tuple(math.log(v) if v > 0 else NEG_INF for v in self.values)

    def log_total(self) -> float:
        return log_sum(self.log_values())


def log_sum(values) -> float:
    """logsumexp over a finite list; ignores -inf terms, empty -> -inf."""
    mx = max(values, default=NEG_INF)
    if mx == NEG_INF:
        return NEG_INF
    return mx + math.log(sum(math.exp(v - mx) for v in values if v > NEG_INF))


def resolve_mode(tree: MarkovTree, a: BinaryMatrix, n: int, mode: str = MODE_AUTO) -> str:
    """Pick exact or log mode; auto keys on the predicted count bit-size."""
    if mode in (MODE_EXACT, MODE_LOG):
        return mode
    if mode != MODE_AUTO:
        raise ValueError(f"unknown mode {mode!r}")
    bits = delta_size(tree, max(n, 0)) * math.log2(max(a.dim, 2))
    return MODE_EXACT if bits <= EXACT_BIT_GUARD else MODE_LOG


class CountingContext:
    """Memo tables for one (tree, adjacency, mode) triple.

    The tables are the only shared state: either confine a context to one
    thread or guard it externally.  All returned values are immutable.
    """

    def __init__(self, tree: MarkovTree, a: BinaryMatrix, mode: str):
        if mode not in (MODE_EXACT, MODE_LOG):
            raise ValueError(f"context mode must be exact or log, got {mode!r}")
        self.tree = tree
        self.a = a
        self.mode = mode
        self._subtree: dict[tuple[int, int], CountVector] = {}
        self._block: dict[int, CountVector] = {}
        self._row_support = tuple(a.row_support(i) for i in range(a.dim))

    def _factor_exact(self, i: int, child: CountVector) -> int:
        return sum(child.values[j] for j in self._row_support[i])

    def _factor_log(self, i: int, child: CountVector) -> float:
        return log_sum([child.values[j] for j in self._row_support[i]])

    def branch_factor(self, i: int, child: CountVector):
        """Masked sum over the labels an i-labeled parent allows below."""
        if self.mode == MODE_EXACT:
            return self._factor_exact(i, child)
        return self._factor_log(i, child)

    def subtree_counts(self, t: int, n: int) -> CountVector:
        """Labelings of the depth-n follower subtree of a type-t node,
        per pinned root symbol."""
        if t not in self.tree.generators():
            raise ValueError(f"generator {t} out of range")
        if n < 0:
            raise ValueError("depth must be >= 0")
        key = (t, n)
        if key in self._subtree:
            return self._subtree[key]
        k = self.a.dim
        if n == 0:
            vec = CountVector(
                tuple(1 for _ in range(k)) if self.mode == MODE_EXACT else (0.0,) * k,
                self.mode,
            )
        else:
            children = [self.subtree_counts(u, n - 1) for u in self.tree.children(t)]
            vec = self._product_over(children)
        self._subtree[key] = vec
        return vec

    def _product_over(self, children: list[CountVector]) -> CountVector:
        k = self.a.dim
        if self.mode == MODE_EXACT:
            vals = tuple(
                math.prod(self._factor_exact(i, ch) for ch in children)
                for i in range(k)
            )
        else:
            vals = tuple(
                sum(self._factor_log(i, ch) for ch in children) for i in range(k)
            )
        return CountVector(vals, self.mode)

    def block_counts(self, n: int) -> CountVector:
        """Labelings of the depth-n block, per pinned root symbol.

        The root has all d generators as children.
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        if n in self._block:
            return self._block[n]
        k = self.a.dim
        if n == 0:
            vec = CountVector(
                tuple(1 for _ in range(k)) if self.mode == MODE_EXACT else (0.0,) * k,
                self.mode,
            )
        else:
            children = [self.subtree_counts(t, n - 1) for t in self.tree.generators()]
            vec = self._product_over(children)
        self._block[n] = vec
        return vec


@lru_cache(maxsize=None)
def context(tree: MarkovTree, a: BinaryMatrix, mode: str) -> CountingContext:
    """Shared memoized context so repeated sweeps reuse tables."""
    return CountingContext(tree, a, mode)


def subtree_counts(
    tree: MarkovTree, a: BinaryMatrix, t: int, n: int, mode: str = MODE_AUTO
) -> CountVector:
    return context(tree, a, resolve_mode(tree, a, n, mode)).subtree_counts(t, n)


def block_counts(
    tree: MarkovTree, a: BinaryMatrix, n: int, mode: str = MODE_AUTO
) -> CountVector:
    return context(tree, a, resolve_mode(tree, a, n, mode)).block_counts(n)


def block_count_total(tree: MarkovTree, a: BinaryMatrix, n: int, mode: str = MODE_AUTO):
    return block_counts(tree, a, n, mode).total()


def full_row_counts_match(tree: MarkovTree, a: BinaryMatrix, n: int) -> bool:
    """For every full-row generator, subtree counts equal block counts.

    The follower tree of a full-row node is the whole tree, so the two
    recursions must agree exactly; compared in exact mode.  Vacuously true
    (with a warning) when the tree has no full row.
    """
    full = [t for t in tree.generators() if tree.shape.row_is_full(t)]
    if not full:
        warnings.warn("tree has no full row; full-row count check is vacuous")
        return True
    block = block_counts(tree, a, n, MODE_EXACT)
    return all(
        subtree_counts(tree, a, t, n, MODE_EXACT).values == block.values for t in full
    )
