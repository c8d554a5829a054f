"""
Discrepancy module for the PageRank discrepancy toolkit.
Implements norm differences between PageRank vectors, alpha sweeps, the
best alpha pair on a graph, the ladder limit table and the exhaustive
small-graph search.
"""
from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from core.digraph import AlphaError, Digraph, DimensionError, alpha1_valid
from core.gamma import build_gamma_general
from core.pagerank import (
    VectorLike,
    as_values,
    check_alpha,
    solve_alpha1,
    solve_exact,
    solve_exact_many,
    stationary_stack,
    walk_matrix,
)


logger = logging.getLogger("pagerank.discrepancy")

MAX_SEARCH_VERTICES = 5
LARGE_SEARCH_VERTICES = 5
# search ranking compares d2 at this many decimals; isomorphic graphs then tie exactly
RANK_DECIMALS = 12


def default_grid() -> List[float]:
    """{0, 0.05, ..., 0.95} plus 1 - 10^-j for j = 1..6, plus 1, sorted."""
    grid = {round(0.05 * i, 2) for i in range(20)}
    grid.update(round(1.0 - 10.0 ** -j, j) for j in range(1, 7))
    grid.add(1.0)
    return sorted(grid)


def parse_grid(text: str) -> List[float]:
    """
    Parse a grid description.

    Args:
        text: "default" or a comma separated list of alphas in [0, 1]
    """
    if text.strip().lower() == "default":
        return default_grid()
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(check_alpha(float(item)))
        except ValueError:
            raise AlphaError(f"grid value {item!r} is not an alpha in [0, 1]") from None
    if not values:
        raise AlphaError("grid is empty")
    return values


@dataclass(frozen=True)
class SweepSample:
    """Distances between the reference vector and the vector at alpha."""
    alpha: float
    d1: float
    d2: float
    dinf: float


@dataclass(frozen=True)
class SweepResult:
    """Samples of ||pi_ref - pi_alpha||_p along a grid of alphas."""
    alpha_ref: float
    samples: Tuple[SweepSample, ...]

    def peak(self) -> SweepSample:
        """Sample with the largest 2-norm distance (first one on ties)."""
        return max(self.samples, key=lambda s: s.d2)


@dataclass(frozen=True)
class SearchRecord:
    """Best alpha pair found on one graph."""
    graph: Digraph
    alpha1: float
    alpha2: float
    d2: float

    @property
    def bitmask(self) -> str:
        return self.graph.bitmask

    def recompute(self) -> float:
        """d2 from fresh solves of the recorded alphas."""
        return norm_diff(solve_exact(self.graph, self.alpha1), solve_exact(self.graph, self.alpha2), 2)


@dataclass(frozen=True)
class LimitRow:
    """One row of the ladder limit table."""
    k: int
    pi_A: float
    pi_C: float
    norm_sq: float
    d1: float
    d2: float
    dinf: float


@dataclass
class SearchConfig:
    """Settings for the exhaustive small-graph search."""
    n: int = 4
    top: int = 10
    refine_rounds: int = 3
    workers: int = 1
    allow_large: bool = False


def norm_diff(pi1: VectorLike, pi2: VectorLike, p: float = 2) -> float:
    """
    ||pi1 - pi2||_p for p in [1, inf].

    Sums are compensated (math.fsum) so long vectors keep full precision.
    """
    a, b = as_values(pi1), as_values(pi2)
    if a.shape != b.shape:
        raise DimensionError(f"vectors of lengths {a.shape[0]} and {b.shape[0]} cannot be compared")
    if not p >= 1:
        raise ValueError(f"norm order must be at least 1, got {p!r}")
    diff = np.abs(a - b)
    if p == math.inf:
        return float(diff.max()) if diff.size else 0.0
    if p == 1:
        return math.fsum(diff)
    if p == 2:
        return math.sqrt(math.fsum(diff * diff))
    return math.fsum(diff ** p) ** (1.0 / p)


def sweep(g: Digraph, alpha_ref: float, grid: Sequence[float]) -> SweepResult:
    """
    Distances from the vector at alpha_ref to the vector at each grid alpha.

    alpha = 1 anywhere requires the graph to satisfy the alpha = 1 conditions.
    """
    alpha_ref = check_alpha(alpha_ref)
    grid = [check_alpha(a) for a in grid]
    distinct = sorted(set(grid) | {alpha_ref})
    logger.info(f"Sweeping {len(grid)} alphas against alpha_ref={alpha_ref!r} on n={g.n}")
    solved = dict(zip(distinct, solve_exact_many(g, distinct)))
    reference = solved[alpha_ref]
    samples = []
    for alpha in grid:
        vector = solved[alpha]
        samples.append(SweepSample(alpha, norm_diff(reference, vector, 1),
                                   norm_diff(reference, vector, 2),
                                   norm_diff(reference, vector, math.inf)))
    return SweepResult(alpha_ref, tuple(samples))


def _solve_arrays(g: Digraph, walk: np.ndarray, alphas: Sequence[float], at_one: Optional[np.ndarray]) -> np.ndarray:
    """Stationary vectors as rows, alpha = 1 rows taken from at_one."""
    rows = np.empty((len(alphas), g.n))
    below = [i for i, a in enumerate(alphas) if a < 1.0]
    if below:
        vectors, residuals = stationary_stack(walk, np.array([alphas[i] for i in below]))
        for row, index in enumerate(below):
            rows[index] = vectors[row] if residuals[row] <= 1e-9 else solve_exact(g, alphas[index]).values
    for index, a in enumerate(alphas):
        if a == 1.0:
            rows[index] = at_one
    return rows


def _pairwise_d2(rows: np.ndarray) -> np.ndarray:
    diff = rows[:, None, :] - rows[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _best_pair(alphas: Sequence[float], rows: np.ndarray) -> Tuple[int, int, float]:
    """Indices of the largest d2 over i < j; row-major first occurrence on ties."""
    distances = _pairwise_d2(rows)
    distances[np.tril_indices(len(alphas))] = -np.inf
    flat = int(np.argmax(distances))
    i, j = divmod(flat, len(alphas))
    return i, j, float(distances[i, j])


def max_pair(g: Digraph, grid: Sequence[float], refine_rounds: int = 3) -> SearchRecord:
    """
    Largest ||pi_a1 - pi_a2||_2 over grid pairs a1 < a2, then local refinement.

    The grid is sorted and de-duplicated first, so the result does not depend
    on its order. alpha = 1 is used only when the graph admits it. Each
    refinement round tries the incumbent alphas shifted by +-h and halves h,
    starting from half the smallest grid gap. Ties keep the lexicographically
    smaller (alpha1, alpha2).
    """
    allow_one = alpha1_valid(g)
    alphas = sorted({check_alpha(a) for a in grid})
    if not allow_one:
        alphas = [a for a in alphas if a < 1.0]
    if not alphas:
        raise AlphaError("grid has no usable alpha for this graph")
    if len(alphas) == 1:
        return SearchRecord(g, alphas[0], alphas[0], 0.0)

    walk = walk_matrix(g.to_adjacency())
    at_one = solve_alpha1(g).values if allow_one else None
    rows = _solve_arrays(g, walk, alphas, at_one)
    i, j, _ = _best_pair(alphas, rows)
    best = (alphas[i], alphas[j])
    best_d2 = norm_diff(rows[i], rows[j], 2)

    step = min(b - a for a, b in zip(alphas, alphas[1:])) / 2.0
    for _ in range(refine_rounds):
        around = sorted({a for centre in best for a in (centre - step, centre, centre + step)
                         if 0.0 <= a <= 1.0 and (a < 1.0 or allow_one)})
        local = _solve_arrays(g, walk, around, at_one)
        for x in range(len(around)):
            for y in range(x + 1, len(around)):
                if (around[x], around[y]) == best:
                    continue
                d2 = norm_diff(local[x], local[y], 2)
                if d2 > best_d2 or (d2 == best_d2 and (around[x], around[y]) < best):
                    best, best_d2 = (around[x], around[y]), d2
        step /= 2.0
    return SearchRecord(g, best[0], best[1], best_d2)


def limit_table(k_values: Iterable[int], m: int = 2) -> List[LimitRow]:
    """
    Discrepancy of Gamma(k, m) between alpha = 1 and alpha = 1 - 1/k.

    Each row holds pi_A and pi at the C vertex feeding the chain (both at
    alpha = 1 - 1/k), ||pi_{1-1/k}||_2^2 and the 1-, 2- and inf-norm
    distances.
    """
    rows = []
    for k in k_values:
        if isinstance(k, bool) or not isinstance(k, int) or k < 2:
            raise AlphaError(f"limit table needs integer k >= 2, got {k!r}")
        g, labels = build_gamma_general(k, m)
        at_one = solve_alpha1(g)
        near_one = solve_exact(g, 1.0 - 1.0 / k)
        rows.append(LimitRow(
            k=k,
            pi_A=float(near_one[labels.index_of_A]),
            pi_C=float(near_one[labels.distinguished_c]),
            norm_sq=near_one.norm(2) ** 2,
            d1=norm_diff(at_one, near_one, 1),
            d2=norm_diff(at_one, near_one, 2),
            dinf=norm_diff(at_one, near_one, math.inf),
        ))
        logger.info(f"Limit row k={k} m={m}: d2={rows[-1].d2:.9f}")
    return rows


def _search_chunk(task: Tuple[int, int, int, Tuple[float, ...], int]) -> List[Tuple[float, float, float, int]]:
    """Run max_pair on masks [start, stop); returns (d2, alpha1, alpha2, mask) tuples."""
    n, start, stop, grid, refine_rounds = task
    found = []
    for mask in range(start, stop):
        record = max_pair(Digraph.from_bitmask(n, mask), grid, refine_rounds)
        found.append((record.d2, record.alpha1, record.alpha2, mask))
    return found


def brute_search(n: int = 4, grid: Optional[Sequence[float]] = None, top: int = 10,
                 refine_rounds: int = 3, workers: int = 1, allow_large: bool = False) -> List[SearchRecord]:
    """
    Exhaustive search over all 2^(n^2) graphs on n vertices, loops allowed.

    Records are ranked by d2 (rounded to RANK_DECIMALS) descending, then
    (alpha1, alpha2) ascending, then adjacency mask ascending. Chunks may
    run in worker processes; the merge follows submission order so the
    ranking is independent of scheduling.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > MAX_SEARCH_VERTICES:
        raise ValueError(f"exhaustive search is capped at n = {MAX_SEARCH_VERTICES}, got {n}")
    if n >= LARGE_SEARCH_VERTICES and not allow_large:
        raise ValueError(f"n = {n} enumerates 2^{n * n} graphs; pass allow_large to run it")
    grid = tuple(default_grid() if grid is None else grid)
    total = 1 << (n * n)
    chunk = max(1, min(4096, total // max(1, workers * 8)))
    tasks = [(n, start, min(start + chunk, total), grid, refine_rounds) for start in range(0, total, chunk)]
    logger.info(f"Searching {total} graphs on {n} vertices in {len(tasks)} chunks with {workers} worker(s)")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(_search_chunk, tasks))
    else:
        chunks = [_search_chunk(task) for task in tasks]

    found = [entry for part in chunks for entry in part]
    found.sort(key=lambda e: (-round(e[0], RANK_DECIMALS), e[1], e[2], e[3]))
    return [SearchRecord(Digraph.from_bitmask(n, mask), a1, a2, d2) for d2, a1, a2, mask in found[:top]]


def run_search(config: SearchConfig, grid: Optional[Sequence[float]] = None) -> List[SearchRecord]:
    """brute_search driven by a SearchConfig."""
    return brute_search(config.n, grid, top=config.top, refine_rounds=config.refine_rounds,
                        workers=config.workers, allow_large=config.allow_large)
