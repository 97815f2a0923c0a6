"""0-1 and nonnegative matrix algebra: primitivity, Hadamard products,
spectral radii and Perron vectors in log domain.

Matrices here are tiny (symbol alphabets, generator sets), so the emphasis is
on robustness rather than speed: a zero entry is represented by a -inf
sentinel in log space, never by a large negative float, and every product
factors out scales so that astronomically large pattern counts never overflow.

All values are immutable after construction and safe for concurrent
read-only use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NEG_INF = float("-inf")

#: relative tolerance for power-iteration convergence
EIG_REL_TOL = 1e-12
#: additive tolerance for inequality checks
BOUND_TOL = 1e-9
#: hard cap on power-iteration steps
ITERATION_CAP = 100_000


class ZeroSpectralRadiusError(ValueError):
    """The matrix has spectral radius zero, so its log is undefined."""


@dataclass(frozen=True)
class BinaryMatrix:
    """A square 0-1 matrix; doubles as symbol adjacency and tree shape."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        d = len(self.rows)
        if d < 1:
            raise ValueError("matrix must have dimension >= 1")
        for row in self.rows:
            if len(row) != d:
                raise ValueError("matrix must be square")
            for x in row:
                if x not in (0, 1):
                    raise ValueError(f"entries must be 0 or 1, got {x!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "BinaryMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def full(cls, dim: int) -> "BinaryMatrix":
        """The all-ones matrix (the shape of the conventional d-tree)."""
        return cls(tuple((1,) * dim for _ in range(dim)))

    @classmethod
    def identity(cls, dim: int) -> "BinaryMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)))

    @classmethod
    def golden(cls) -> "BinaryMatrix":
        """[[1,1],[1,0]]: golden-mean constraint, as adjacency or tree shape."""
        return cls(((1, 1), (1, 0)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.rows[i]

    def row_is_full(self, i: int) -> bool:
        return all(self.rows[i])

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, x in enumerate(self.rows[i]) if x)

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(tuple(zip(*self.rows)))

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


@dataclass(frozen=True)
class PrimitivityResult:
    primitive: bool
    exponent: int | None  # smallest e with m^e entrywise positive

    def __bool__(self) -> bool:
        return self.primitive


def wielandt_bound(dim: int) -> int:
    """Largest exponent that must be checked: (d-1)^2 + 1."""
    return (dim - 1) ** 2 + 1


def is_primitive(m: BinaryMatrix) -> PrimitivityResult:
    """Primitivity via boolean matrix powers up to the Wielandt bound.

    Returns the smallest exponent e with m^e entrywise positive as witness.
    """
    base = m.to_array() > 0
    cur = base.copy()
    for e in range(1, wielandt_bound(m.dim) + 1):
        if cur.all():
            return PrimitivityResult(True, e)
        cur = (cur.astype(np.int64) @ base.astype(np.int64)) > 0
    return PrimitivityResult(False, None)


def _log_of_int(n: int) -> float:
    # math.log handles arbitrary-precision ints without float conversion
    return math.log(n) if n > 0 else NEG_INF


class LogNonnegMatrix:
    """Nonnegative square matrix stored in log domain.

    ``logs`` is a float array with -inf marking zero entries.  When the matrix
    was built from integer counts, ``exact`` holds the arbitrary-precision
    entries and is propagated through products and Hadamard products so that
    desk-scale results can be compared exactly against brute-force counts.
    """

    __slots__ = ("logs", "exact")

    def __init__(self, logs: np.ndarray, exact: tuple[tuple[int, ...], ...] | None = None):
        logs = np.asarray(logs, dtype=float)
        if logs.ndim != 2 or logs.shape[0] != logs.shape[1]:
            raise ValueError("log matrix must be square")
        if np.isnan(logs).any():
            raise ValueError("log matrix must not contain NaN")
        if np.isposinf(logs).any():
            raise ValueError("log matrix must not contain +inf")
        if exact is not None:
            for i in range(logs.shape[0]):
                for j in range(logs.shape[1]):
                    v = exact[i][j]
                    if v < 0:
                        raise ValueError("exact entries must be nonnegative")
                    ref = _log_of_int(v)
                    got = logs[i, j]
                    if ref == NEG_INF or got == NEG_INF:
                        if ref != got:
                            raise ValueError("exact and log entries disagree about zeros")
                    elif abs(got - ref) > 1e-12 * max(1.0, abs(ref)):
                        raise ValueError("log entries inconsistent with exact entries")
        self.logs = logs
        self.logs.setflags(write=False)
        self.exact = exact

    @classmethod
    def from_exact(cls, rows: Iterable[Iterable[int]]) -> "LogNonnegMatrix":
        exact = tuple(tuple(int(x) for x in row) for row in rows)
        logs = np.array([[_log_of_int(x) for x in row] for row in exact], dtype=float)
        return cls(logs, exact)

    @classmethod
    def from_binary(cls, m: BinaryMatrix) -> "LogNonnegMatrix":
        return cls.from_exact(m.rows)

    @classmethod
    def from_entries(cls, rows: Iterable[Iterable[float]]) -> "LogNonnegMatrix":
        """Build from linear-domain nonnegative floats (test/CLI convenience)."""
        arr = np.array([[float(x) for x in row] for row in rows], dtype=float)
        if (arr < 0).any():
            raise ValueError("entries must be nonnegative")
        with np.errstate(divide="ignore"):
            logs = np.log(arr)
        return cls(logs)

    @classmethod
    def from_logs(cls, logs: np.ndarray) -> "LogNonnegMatrix":
        return cls(np.array(logs, dtype=float, copy=True))

    @property
    def dim(self) -> int:
        return self.logs.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def support(self) -> BinaryMatrix:
        return BinaryMatrix.from_rows((self.logs > NEG_INF).astype(int).tolist())

    def scaled(self, log_factor: float) -> "LogNonnegMatrix":
        """Multiply every nonzero entry by exp(log_factor).  Drops exact mode."""
        logs = np.where(self.logs > NEG_INF, self.logs + log_factor, NEG_INF)
        return LogNonnegMatrix(logs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LogNonnegMatrix):
            return NotImplemented
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return bool(np.array_equal(self.logs, other.logs))

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"LogNonnegMatrix(exact={self.exact!r})"
        return f"LogNonnegMatrix(logs={self.logs.tolist()!r})"


@dataclass(frozen=True)
class PerronData:
    """Spectral radius (as a log) with right/left Perron vectors.

    Vectors are positive for primitive input and normalized so that
    left . right = 1.
    """

    rho_log: float
    right_vec: tuple[float, ...]
    left_vec: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def rho(self) -> float:
        return math.exp(self.rho_log)


def hadamard(x: LogNonnegMatrix, y: LogNonnegMatrix) -> LogNonnegMatrix:
    """Entrywise product; log entries add, -inf absorbs."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    logs = x.logs + y.logs  # no +inf entries exist, so -inf absorbs cleanly
    exact = None
    if x.exact is not None and y.exact is not None:
        exact = tuple(
            tuple(a * b for a, b in zip(rx, ry)) for rx, ry in zip(x.exact, y.exact)
        )
    return LogNonnegMatrix(logs, exact)


def _log_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise-stable log-domain matrix product."""
    dim = a.shape[0]
    out = np.full((dim, b.shape[1]), NEG_INF)
    for i in range(dim):
        cols = a[i][:, None] + b  # (k, j)
        mx = cols.max(axis=0)
        good = mx > NEG_INF
        if good.any():
            out[i, good] = mx[good] + np.log(
                np.exp(cols[:, good] - mx[good]).sum(axis=0)
            )
    return out


def product(ms: Sequence[LogNonnegMatrix]) -> LogNonnegMatrix:
    """Ordered product of log-domain matrices, scale-safe.

    Exact mode is propagated when every factor carries exact entries.
    """
    if len(ms) == 0:
        raise ValueError("product of an empty sequence")
    dim = ms[0].dim
    for m in ms:
        if m.dim != dim:
            raise ValueError("dimension mismatch in product")
    if all(m.exact is not None for m in ms):
        acc = ms[0].exact
        for m in ms[1:]:
            nxt = m.exact
            acc = tuple(
                tuple(
                    sum(acc[i][k] * nxt[k][j] for k in range(dim))
                    for j in range(dim)
                )
                for i in range(dim)
            )
        return LogNonnegMatrix.from_exact(acc)
    logs = ms[0].logs
    for m in ms[1:]:
        logs = _log_matmul(logs, m.logs)
    return LogNonnegMatrix(logs)


def log_matvec(m: LogNonnegMatrix, v: np.ndarray) -> np.ndarray:
    """out[s] = logsumexp_i (m[s,i] + v[i]); -inf rows stay -inf."""
    w = m.logs + np.asarray(v, dtype=float)[None, :]
    mx = w.max(axis=1)
    out = np.full(m.dim, NEG_INF)
    good = mx > NEG_INF
    if good.any():
        out[good] = mx[good] + np.log(np.exp(w[good] - mx[good, None]).sum(axis=1))
    return out


def _power_iterate(lin: np.ndarray, cap: int, tol: float):
    """Power iteration with Collatz-Wielandt convergence bounds.

    Returns (rho_lin, vector, iterations, converged).  On non-primitive but
    irreducible input the quotients may oscillate forever; in that case the
    Cesaro mean of the last two iterates is used as a fallback estimate and
    the converged flag stays False.
    """
    dim = lin.shape[0]
    x = np.ones(dim)
    prev = x
    rho = 0.0
    stable = 0
    for it in range(1, cap + 1):
        y = lin @ x
        top = y.max()
        if top <= 0.0:
            raise ZeroSpectralRadiusError("zero spectral radius (nilpotent support)")
        if (x > 0).all():
            q = y / x
            hi, lo = q.max(), q.min()
            rho = 0.5 * (hi + lo)
            if hi - lo <= tol * hi:
                return rho, y / top, it, True
        else:
            # zero coordinates block the Collatz-Wielandt bound (reducible
            # support); fall back to growth-rate stabilization
            g = top / x.max()
            stable = stable + 1 if abs(g - rho) <= tol * max(g, 1e-300) else 0
            rho = g
            if stable >= 32:
                return rho, y / top, it, True
        prev = x
        x = y / top
    # Cesaro fallback for oscillating (period-two) iterates
    z = 0.5 * (x + prev)
    y = lin @ z
    if (z > 0).all():
        q = y / z
        rho = 0.5 * (q.max() + q.min())
    else:
        rho = y.max() / z.max()
    return rho, z / z.max(), cap, False


def spectral_radius(m: LogNonnegMatrix, cap: int = ITERATION_CAP) -> PerronData:
    """Perron data by power iteration on the log-scaled matrix.

    The largest log entry is factored out, the iteration runs in the linear
    domain with per-step renormalization, and the scale is added back at the
    end.  The left vector comes from iterating the transpose; it is scaled so
    that left . right = 1.
    """
    scale = float(m.logs.max())
    if scale == NEG_INF:
        raise ZeroSpectralRadiusError("zero spectral radius (zero matrix)")
    lin = np.exp(m.logs - scale)
    rho_r, right, it_r, ok_r = _power_iterate(lin, cap, EIG_REL_TOL)
    _, left, it_l, ok_l = _power_iterate(lin.T, cap, EIG_REL_TOL)
    denom = float(left @ right)
    if denom > 0:
        left = left / denom
    return PerronData(
        rho_log=scale + math.log(rho_r),
        right_vec=tuple(float(v) for v in right),
        left_vec=tuple(float(v) for v in left),
        iterations=max(it_r, it_l),
        converged=ok_r and ok_l,
    )


@dataclass(frozen=True)
class PerronBoundResult:
    ok: bool
    max_violation: float

    def __bool__(self) -> bool:
        return self.ok


def perron_sandwich_check(m: LogNonnegMatrix, n: int, tol: float = BOUND_TOL) -> PerronBoundResult:
    """Check the outer-product lower bound v w^T <= m^n / rho^n entrywise.

    (v, w) are the Perron vectors with w . v = 1.  Returns the largest
    entrywise violation; ok means it stays within ``tol``.  Requires the
    matrix support to be primitive.

    Note: the bound holds only in the n -> infinity limit; at finite n the
    subdominant spectral term can push entries below the outer product, so
    this is a diagnostic, not a theorem checker.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prim = is_primitive(m.support())
    if not prim:
        raise ValueError("perron_sandwich_check requires a primitive support")
    pd = spectral_radius(m)
    power = product([m] * n)
    ratio = np.exp(power.logs - n * pd.rho_log)
    outer = np.outer(pd.right_vec, pd.left_vec)
    violation = float((outer - ratio).max())
    return PerronBoundResult(ok=violation <= tol, max_violation=max(violation, 0.0))
