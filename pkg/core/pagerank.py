"""
PageRank module for the PageRank discrepancy toolkit.
Implements the transition operator R(G, alpha) and the stationary vector by
exact solve, power iteration, the alpha = 1 sink solve and a Monte Carlo walk.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union
import logging
import math
import warnings

import numpy as np
from numba import njit
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from core.digraph import (
    Alpha1UndefinedError,
    AlphaError,
    Digraph,
    DimensionError,
    SolverError,
    alpha1_violations,
    scc_report,
    sink_component,
)


logger = logging.getLogger("pagerank.solver")

STATIONARITY_TOL = 1e-9
_WALK_CHUNK = 1 << 20
_STACK_ENTRIES = 1 << 22


class SolveMethod(Enum):
    """How a PageRank vector was obtained."""
    EXACT = "exact"
    POWER = "power"
    ALPHA1 = "alpha1"
    WALK = "walk"


@dataclass(frozen=True)
class PowerConfig:
    """Stopping rule for power iteration."""
    tol: float = 1e-12
    max_iter: int = 10 ** 6


@dataclass(frozen=True)
class WalkConfig:
    """Length and seed of a Monte Carlo walk."""
    steps: int = 10 ** 6
    seed: int = 0


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """
    Column-stochastic operator R(G, alpha).

    entries[i, j] is the probability of moving from vertex j to vertex i,
    so the PageRank vector satisfies R @ pi = pi.
    """
    entries: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)


@dataclass(frozen=True, eq=False)
class PagerankVector:
    """
    Stochastic vector indexed by vertex, tagged with the alpha and method
    that produced it.
    """
    values: np.ndarray
    alpha: float
    method: SolveMethod
    iterations: Optional[int] = None
    converged: bool = True
    residual: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, v):
        return self.values[v]

    def __repr__(self) -> str:
        return f"PagerankVector(n={len(self)}, alpha={self.alpha!r}, method={self.method.value})"

    def as_array(self) -> np.ndarray:
        """Writable copy of the values."""
        return self.values.copy()

    def norm(self, p: float = 2.0) -> float:
        """p-norm of the vector (p = inf for the largest entry)."""
        if p == math.inf:
            return float(np.max(np.abs(self.values)))
        return math.fsum(np.abs(self.values) ** p) ** (1.0 / p)

    def total(self) -> float:
        return math.fsum(self.values)


VectorLike = Union[PagerankVector, Sequence[float], np.ndarray]


def as_values(pi: VectorLike) -> np.ndarray:
    """Plain float array behind a PagerankVector or sequence."""
    if isinstance(pi, PagerankVector):
        return pi.values
    return np.asarray(pi, dtype=np.float64)


def check_alpha(alpha: float) -> float:
    """Validate a jumping parameter and return it as a float."""
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        raise AlphaError(f"alpha must be a number, got {alpha!r}") from None
    if not 0.0 <= value <= 1.0:
        raise AlphaError(f"alpha must lie in [0, 1], got {alpha!r}")
    return value


def walk_matrix(adjacency: np.ndarray) -> np.ndarray:
    """
    Column-stochastic matrix of the pure walk (alpha = 1).

    Column j spreads uniformly over the out-neighbours of j, or over all
    vertices when j is dangling.
    """
    n = adjacency.shape[0]
    degrees = adjacency.sum(axis=1)
    dangling = degrees == 0
    walk = np.empty((n, n), dtype=np.float64)
    walk[:, ~dangling] = adjacency[~dangling].T / degrees[~dangling]
    walk[:, dangling] = 1.0 / n
    return walk


def build_transition(g: Digraph, alpha: float) -> TransitionMatrix:
    """
    Build R(G, alpha).

    R[i, j] = alpha / deg(j) + (1 - alpha) / n when j -> i, (1 - alpha) / n
    when j has out-arcs but none to i, and 1 / n when j is dangling.
    """
    alpha = check_alpha(alpha)
    adjacency = g.to_adjacency()
    dangling = adjacency.sum(axis=1) == 0
    entries = alpha * walk_matrix(adjacency) + (1.0 - alpha) / g.n
    entries[:, dangling] = 1.0 / g.n
    return TransitionMatrix(np.asfortranarray(entries), alpha)


def delta_pi(R: TransitionMatrix, pi: VectorLike, v: int) -> float:
    """Rate in minus rate out at v: sum_u R[v, u] pi[u] - pi[v]."""
    values = as_values(pi)
    if values.shape != (R.n,):
        raise DimensionError(f"vector of length {values.shape[0]} does not match n={R.n}")
    if not 0 <= v < R.n:
        raise DimensionError(f"vertex {v} out of range [0, {R.n})")
    return float(R.entries[v] @ values - values[v])


def stationarity_residual(R: TransitionMatrix, pi: VectorLike) -> float:
    """max_v |delta_pi(R, pi, v)|."""
    values = as_values(pi)
    if values.shape != (R.n,):
        raise DimensionError(f"vector of length {values.shape[0]} does not match n={R.n}")
    return float(np.max(np.abs(R.entries @ values - values)))


def _normalise(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum(axis=-1, keepdims=True)


def _solve_stationary(entries: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Solve (I - R) x = 0 with sum(x) = 1 by LU with partial pivoting.

    The last row of I - R is replaced by the normalisation row. One pass of
    iterative refinement runs when the residual exceeds STATIONARITY_TOL.
    """
    n = entries.shape[0]
    system = np.eye(n) - entries
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        factors = lu_factor(system, check_finite=False)
    if np.any(np.diag(factors[0]) == 0.0):
        raise SolverError(f"stationary system of size {n} is singular")
    x = lu_solve(factors, rhs, check_finite=False)
    residual = float(np.max(np.abs(entries @ x - x)))
    if residual > STATIONARITY_TOL:
        logger.warning(f"Residual {residual:.3e} above tolerance, refining once")
        x = x + lu_solve(factors, rhs - system @ x, check_finite=False)
        residual = float(np.max(np.abs(entries @ x - x)))
        if residual > STATIONARITY_TOL:
            raise SolverError(f"residual {residual:.3e} still above {STATIONARITY_TOL} after refinement")
    x = _normalise(x)
    return x, float(np.max(np.abs(entries @ x - x)))


def _stack_block(walk: np.ndarray, alphas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = walk.shape[0]
    stack = alphas[:, None, None] * walk + ((1.0 - alphas) / n)[:, None, None]
    system = np.eye(n) - stack
    system[:, -1, :] = 1.0
    rhs = np.zeros((alphas.shape[0], n, 1))
    rhs[:, -1, 0] = 1.0
    try:
        vectors = np.linalg.solve(system, rhs)[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"stacked stationary solve failed: {exc}") from exc
    vectors = _normalise(vectors)
    residuals = np.abs(np.einsum("aij,aj->ai", stack, vectors) - vectors).max(axis=1)
    return vectors, residuals


def stationary_stack(walk: np.ndarray, alphas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stationary vectors for several alpha < 1 at once.

    Systems are solved in blocks of at most _STACK_ENTRIES matrix entries.

    Args:
        walk: Pure-walk matrix from walk_matrix
        alphas: 1-d array of jumping parameters, each below 1

    Returns:
        (vectors, residuals) with one row / entry per alpha
    """
    n = walk.shape[0]
    alphas = np.asarray(alphas, dtype=np.float64)
    block = max(1, _STACK_ENTRIES // (n * n))
    parts = [_stack_block(walk, alphas[start:start + block]) for start in range(0, alphas.shape[0], block)]
    if not parts:
        return np.empty((0, n)), np.empty(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def solve_exact(g: Digraph, alpha: float) -> PagerankVector:
    """
    PageRank by direct linear solve.

    alpha = 1 is handed to solve_alpha1.
    """
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return solve_alpha1(g)
    transition = build_transition(g, alpha)
    values, residual = _solve_stationary(transition.entries)
    logger.debug(f"Exact solve n={g.n} alpha={alpha!r} residual={residual:.3e}")
    return PagerankVector(values, alpha, SolveMethod.EXACT, residual=residual)


def solve_exact_many(g: Digraph, alphas: Sequence[float]) -> List[PagerankVector]:
    """
    Exact PageRank vectors for every alpha in alphas, in the same order.

    Values below 1 share one stacked solve; any entry whose residual misses
    the tolerance is redone through solve_exact.
    """
    checked = [check_alpha(a) for a in alphas]
    results: List[Optional[PagerankVector]] = [None] * len(checked)
    if any(a == 1.0 for a in checked):
        at_one = solve_alpha1(g)
        for index, a in enumerate(checked):
            if a == 1.0:
                results[index] = at_one
    below = [index for index, a in enumerate(checked) if a < 1.0]
    if below:
        walk = walk_matrix(g.to_adjacency())
        vectors, residuals = stationary_stack(walk, np.array([checked[i] for i in below]))
        for row, index in enumerate(below):
            if residuals[row] > STATIONARITY_TOL:
                results[index] = solve_exact(g, checked[index])
            else:
                results[index] = PagerankVector(vectors[row], checked[index], SolveMethod.EXACT,
                                                residual=float(residuals[row]))
    return results


def solve_power(g: Digraph, alpha: float, tol: float = PowerConfig.tol,
                max_iter: int = PowerConfig.max_iter) -> PagerankVector:
    """
    PageRank by power iteration from the uniform vector.

    Stops when successive iterates differ by less than tol in the 1-norm.
    Running out of iterations is not an error: the result carries
    converged=False and a warning is logged.
    """
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        raise AlphaError("power iteration needs alpha < 1; use solve_alpha1 for alpha = 1")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter!r}")
    entries = build_transition(g, alpha).entries
    x = np.full(g.n, 1.0 / g.n)
    converged = False
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        following = entries @ x
        following /= following.sum()
        change = float(np.abs(following - x).sum())
        x = following
        if change < tol:
            converged = True
            break
    residual = float(np.max(np.abs(entries @ x - x)))
    if converged:
        logger.info(f"Power iteration converged in {iterations} iterations (alpha={alpha!r})")
    else:
        logger.warning(f"Power iteration stopped after {iterations} iterations without "
                       f"reaching tol={tol:g} (alpha={alpha!r}, residual={residual:.3e})")
    return PagerankVector(x, alpha, SolveMethod.POWER, iterations=iterations,
                          converged=converged, residual=residual)


def solve_alpha1(g: Digraph) -> PagerankVector:
    """
    PageRank at alpha = 1.

    All mass sits on the unique sink component, distributed as the pure
    walk's stationary distribution there; every other entry is exactly 0.

    Raises:
        Alpha1UndefinedError: the graph fails one of the alpha = 1 conditions
    """
    report = scc_report(g)
    violations = alpha1_violations(g, report)
    if violations:
        raise Alpha1UndefinedError(violations)
    sink = sorted(sink_component(g, report))
    values = np.zeros(g.n)
    if len(sink) == 1:
        values[sink[0]] = 1.0
    else:
        walk = walk_matrix(g.to_adjacency())
        restricted, _ = _solve_stationary(walk[np.ix_(sink, sink)])
        values[sink] = restricted
    residual = stationarity_residual(build_transition(g, 1.0), values)
    return PagerankVector(values, 1.0, SolveMethod.ALPHA1, residual=residual)


@njit
def _walk_kernel(indptr, indices, start, alpha, coins, picks, jumps, counts):
    v = start
    for t in range(coins.shape[0]):
        lo = indptr[v]
        degree = indptr[v + 1] - lo
        if degree == 0 or coins[t] >= alpha:
            v = jumps[t]
        else:
            j = int(picks[t] * degree)
            if j >= degree:
                j = degree - 1
            v = indices[lo + j]
        counts[v] += 1
    return v


def simulate_walk(g: Digraph, alpha: float, steps: int = WalkConfig.steps,
                  seed: int = WalkConfig.seed) -> PagerankVector:
    """
    Empirical visit frequencies of the alpha-walker.

    The walker starts at a uniformly random vertex; each step it jumps
    uniformly with probability 1 - alpha (always, at a dangling vertex) and
    otherwise follows a uniformly random out-arc. Every step is counted,
    the start included. The result depends only on the seed.
    """
    alpha = check_alpha(alpha)
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps!r}")
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(g.out_degrees(), out=indptr[1:])
    indices = np.fromiter((v for _, v in g.sorted_arcs()), dtype=np.int64, count=g.arc_count())
    rng = np.random.default_rng(seed)
    counts = np.zeros(g.n, dtype=np.int64)
    v = int(rng.integers(g.n))
    counts[v] += 1
    remaining = steps - 1
    while remaining > 0:
        size = min(remaining, _WALK_CHUNK)
        coins = rng.random(size)
        picks = rng.random(size)
        jumps = rng.integers(0, g.n, size=size)
        v = int(_walk_kernel(indptr, indices, v, alpha, coins, picks, jumps, counts))
        remaining -= size
    logger.info(f"Walk of {steps} steps on n={g.n} finished (alpha={alpha!r}, seed={seed})")
    return PagerankVector(counts / steps, alpha, SolveMethod.WALK, iterations=steps)


def solve(g: Digraph, alpha: float, method: str = "auto",
          power: Optional[PowerConfig] = None,
          walk: Optional[WalkConfig] = None) -> PagerankVector:
    """
    Dispatch to a solver by name: exact, power, walk or auto.

    auto and exact use the direct solve below alpha = 1 and the sink solve
    at alpha = 1.
    """
    if method in ("auto", SolveMethod.EXACT.value):
        return solve_exact(g, alpha)
    if method == SolveMethod.POWER.value:
        power = power or PowerConfig()
        return solve_power(g, alpha, tol=power.tol, max_iter=power.max_iter)
    if method == SolveMethod.WALK.value:
        walk = walk or WalkConfig()
        return simulate_walk(g, alpha, steps=walk.steps, seed=walk.seed)
    raise ValueError(f"unknown solver {method!r}; expected auto, exact, power or walk")
