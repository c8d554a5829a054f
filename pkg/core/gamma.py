"""
Gamma module for the PageRank discrepancy toolkit.
Implements the ladder constructions Gamma(k) and Gamma(k, m), their role
labels, and the closed-form predictions and bounds that describe them.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging
import math

from scipy.optimize import minimize_scalar

from core.digraph import AlphaError, Digraph, DimensionError, GraphError
from core.pagerank import PagerankVector, VectorLike, as_values


logger = logging.getLogger("pagerank.gamma")

# slack absorbing roundoff when the strict inequalities are checked
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class GammaLabels:
    """
    Vertex roles of a constructed ladder.

    C_1..C_m occupy 0..m-1, B_1..B_k occupy m..m+k-1 and A is m+k.
    The last C vertex is the one with the arc to B_1.
    """
    k: int
    m: int
    index_of_A: int
    index_of_B: Tuple[int, ...]
    index_of_C: Tuple[int, ...]

    @property
    def n(self) -> int:
        return self.k + self.m + 1

    @property
    def distinguished_c(self) -> int:
        """The C vertex feeding the B chain."""
        return self.index_of_C[-1]

    def role_of(self, v: int) -> str:
        """Role name of vertex v, e.g. 'C2', 'B7' or 'A'."""
        if v == self.index_of_A:
            return "A"
        if v in self.index_of_C:
            return f"C{self.index_of_C.index(v) + 1}"
        if v in self.index_of_B:
            return f"B{self.index_of_B.index(v) + 1}"
        raise DimensionError(f"vertex {v} is not part of Gamma({self.k}, {self.m})")


def _check_positive(name: str, value: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise GraphError(f"{name} must be a positive integer, got {value!r}")
    return value


def build_gamma_general(k: int, m: int) -> Tuple[Digraph, GammaLabels]:
    """
    Build Gamma(k, m).

    Every C vertex has a loop and arcs to every other C vertex, and C_m also
    has the arc to B_1. Each B_i points at all m C vertices and at B_{i+1}
    (B_k at A). A only has its loop.

    Returns:
        The frozen graph and its role labels
    """
    _check_positive("k", k)
    _check_positive("m", m)
    labels = GammaLabels(
        k=k,
        m=m,
        index_of_A=m + k,
        index_of_B=tuple(range(m, m + k)),
        index_of_C=tuple(range(m)),
    )
    graph = Digraph(labels.n)
    for c in labels.index_of_C:
        for other in labels.index_of_C:
            graph.add_arc(c, other)
    graph.add_arc(labels.distinguished_c, labels.index_of_B[0])
    for i, b in enumerate(labels.index_of_B):
        for c in labels.index_of_C:
            graph.add_arc(b, c)
        forward = labels.index_of_B[i + 1] if i + 1 < k else labels.index_of_A
        graph.add_arc(b, forward)
    graph.add_arc(labels.index_of_A, labels.index_of_A)
    logger.debug(f"Built Gamma({k}, {m}) with {graph.arc_count()} arcs")
    return graph.freeze(), labels


def build_gamma(k: int) -> Tuple[Digraph, GammaLabels]:
    """Build the two-C ladder Gamma(k) on k + 3 vertices."""
    return build_gamma_general(k, 2)


def expected_arc_count(k: int, m: int) -> int:
    """Arc count of Gamma(k, m): m^2 + (m + 1) k + 2."""
    return m * m + (m + 1) * k + 2


def gamma_legend(labels: GammaLabels) -> List[str]:
    """Lines mapping each role to its vertex index."""
    lines = [f"# Gamma(k={labels.k}, m={labels.m}): {labels.n} vertices"]
    lines.extend(f"C{i + 1} = {v}" for i, v in enumerate(labels.index_of_C))
    lines.extend(f"B{i + 1} = {v}" for i, v in enumerate(labels.index_of_B))
    lines.append(f"A = {labels.index_of_A}")
    return lines


# closed-form predictions

def predict_c_mass(m: float) -> float:
    """Limiting PageRank of each C vertex at alpha = 1 - 1/k: m / (1 + m^2)."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m!r}")
    return m / (1.0 + m * m)


def predicted_norm_sq(m: float) -> float:
    """Limiting squared 2-norm of pi at alpha = 1 - 1/k on Gamma(k, m)."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m!r}")
    return (m ** 4 + 2 * m ** 3 + m) / ((m + 2) * (m * m + 1) ** 2)


def predict_discrepancy(m: float) -> float:
    """f(m) = sqrt(1 + (m^4 + 2m^3 + m) / ((m + 2)(m^2 + 1)^2)); m may be real."""
    return math.sqrt(1.0 + predicted_norm_sq(m))


def argmax_discrepancy() -> Tuple[float, float]:
    """
    Continuous maximiser of f by golden-section search.

    Returns:
        (m*, f(m*))
    """
    result = minimize_scalar(lambda m: -predict_discrepancy(m), bracket=(1.0, 1.5, 2.0),
                             method="golden", tol=1e-10)
    return float(result.x), float(-result.fun)


def integer_argmax(m_max: int = 10) -> int:
    """Integer m in 1..m_max with the largest f(m); smallest m on ties."""
    return max(range(1, m_max + 1), key=lambda m: (predict_discrepancy(m), -m))


def prediction_table(m_values: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Rows (m, f(m), m / (1 + m^2))."""
    return [(float(m), predict_discrepancy(m), predict_c_mass(m)) for m in m_values]


# bounds from the ladder's balance equations

def _check_index(k: int, i: int) -> None:
    _check_positive("k", k)
    if not 1 <= i <= k:
        raise DimensionError(f"index i={i} outside 1..{k}")


def pi_a_upper_bound(k: int) -> float:
    """k / 3^k + 3 / (2(k + 1)); pi_A of Gamma(k) at alpha = 1 - 1/k lies below it."""
    _check_positive("k", k)
    return k * (1.0 / 3.0) ** k + 3.0 / (2.0 * (k + 1))


def pi_a_tight_bound(k: int, pi_c2: float) -> float:
    """k (1 - 1/k)^k pi_C2 / 3^k + 3 / (2(3 + k)), before the bound is weakened."""
    _check_positive("k", k)
    return k * ((1.0 - 1.0 / k) / 3.0) ** k * pi_c2 + 3.0 / (2.0 * (3 + k))


def bi_lower_bound(k: int, i: int, pi_c2: float) -> float:
    """(1 - 1/k)^i pi_C2 / 3^i; pi_{B_i} lies above it."""
    _check_index(k, i)
    return ((1.0 - 1.0 / k) / 3.0) ** i * pi_c2


def b_sum_lower_bound(k: int, pi_c2: float) -> float:
    """Finite geometric sum of bi_lower_bound over i = 1..k."""
    _check_positive("k", k)
    ratio = (1.0 - 1.0 / k) / 3.0
    return ratio * (1.0 - ratio ** k) / (1.0 - ratio) * pi_c2


def b_sum_upper_bound(k: int, pi_c2: float) -> float:
    """(pi_C2 / 6 + 5 pi_C2 / (6k)) * 3 / (1 - 1/k), from the C_2 balance; needs k >= 2."""
    if _check_positive("k", k) < 2:
        raise AlphaError("the B-sum bound needs k >= 2")
    return (pi_c2 / 6.0 + 5.0 * pi_c2 / (6.0 * k)) * 3.0 / (1.0 - 1.0 / k)


def norm_sq_bounds(k: int, pi_a: float, pi_c1: float, pi_c2: float) -> Tuple[float, float]:
    """
    Lower and upper bounds on ||pi||_2^2 for Gamma(k) at alpha = 1 - 1/k.

    The lower bound keeps pi_A^2 + pi_C1^2 plus the squared geometric lower
    bounds of C_2 and B_1..B_{k-1}; the upper bound overestimates the B tail
    by an infinite series plus the jump contribution t = (3/k) / (2(3 + k)).
    """
    _check_positive("k", k)
    q = (1.0 - 1.0 / k) / 3.0
    lower = pi_a ** 2 + pi_c1 ** 2 + (pi_c2 ** 2 - pi_c2 ** 2 * q ** (2 * k)) / (1.0 - q * q)
    t = (3.0 / k) / (2.0 * (3 + k))
    upper = pi_c1 ** 2 + pi_c2 ** 2 / (1.0 - 1.0 / 9.0) + k * (t + t * t) + pi_a ** 2
    return lower, upper


def _ladder_alpha(labels: GammaLabels, pi: VectorLike, g: Digraph) -> float:
    if g.n != labels.n:
        raise DimensionError(f"graph has {g.n} vertices, labels describe {labels.n}")
    if len(as_values(pi)) != labels.n:
        raise DimensionError(f"vector of length {len(as_values(pi))} does not match n={labels.n}")
    if labels.k < 2:
        raise AlphaError("balance equations need k >= 2 so that alpha = 1 - 1/k lies in (0, 1)")
    if not isinstance(pi, PagerankVector):
        raise AlphaError("a PagerankVector carrying its alpha is required")
    expected = 1.0 - 1.0 / labels.k
    if abs(pi.alpha - expected) > BOUND_SLACK:
        raise AlphaError(f"balance equations hold at alpha = 1 - 1/k = {expected!r}, got {pi.alpha!r}")
    return expected


def check_b_recurrence(g: Digraph, labels: GammaLabels, pi: PagerankVector) -> float:
    """
    Largest residual of the B-chain balance equations.

    pi_{B_i} = (1 - alpha) / n + alpha * pi_{B_{i-1}} / deg(B_{i-1}), with the
    distinguished C vertex standing in for B_0. On Gamma(k) this is
    (1/k) / (3 + k) + (1 - 1/k) pi_{B_{i-1}} / 3.
    """
    alpha = _ladder_alpha(labels, pi, g)
    values = pi.values
    jump = (1.0 - alpha) / labels.n
    worst = 0.0
    previous = labels.distinguished_c
    for b in labels.index_of_B:
        expected = jump + alpha * values[previous] / g.out_degree(previous)
        worst = max(worst, abs(values[b] - expected))
        previous = b
    return worst


def check_c_balance(g: Digraph, labels: GammaLabels, pi: PagerankVector) -> float:
    """
    Residual of the C_2 balance on Gamma(k):
    pi_C2 = (1/k)/(3+k) + (1-1/k) sum(pi_B)/3 + (1-1/k) pi_C2 5/6.
    """
    if labels.m != 2:
        raise GraphError(f"the C_2 balance equation is specific to m = 2, got m = {labels.m}")
    alpha = _ladder_alpha(labels, pi, g)
    values = pi.values
    pi_c2 = values[labels.distinguished_c]
    b_total = math.fsum(values[b] for b in labels.index_of_B)
    expected = (1.0 - alpha) / labels.n + alpha * b_total / 3.0 + alpha * pi_c2 * 5.0 / 6.0
    return abs(pi_c2 - expected)
