"""
Digraph module for the PageRank discrepancy toolkit.
Implements the Digraph class, strongly connected component reports and the
plain-text graph file format.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple
import logging
import re

import networkx as nx
import numpy as np


logger = logging.getLogger("pagerank.digraph")

Arc = Tuple[int, int]


class PagerankError(Exception):
    """Base class for every error raised by this package."""


class GraphError(PagerankError, ValueError):
    """Invalid graph construction: bad vertex count, endpoint or duplicate arc."""


class GraphParseError(GraphError):
    """Malformed graph file. Carries the offending 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DimensionError(PagerankError, ValueError):
    """A vector or label set does not match the graph it is used with."""


class AlphaError(PagerankError, ValueError):
    """Jumping parameter out of range, or not the one an operation requires."""


class Alpha1UndefinedError(PagerankError):
    """PageRank at alpha = 1 is not well-defined on the given graph."""

    def __init__(self, violations: List[str]):
        super().__init__("alpha = 1 is undefined: " + "; ".join(violations))
        self.violations = list(violations)


class SolverError(PagerankError):
    """Linear solve failed or left a residual above tolerance."""


class Digraph:
    """
    Unweighted directed graph on vertices 0..n-1.

    Loops and bidirectional pairs are allowed, duplicate arcs are not.
    The graph accepts arcs until it is frozen; afterwards it is immutable
    and hashable.
    """
    def __init__(self, n: int):
        """
        Initialize an empty graph.

        Args:
            n: Number of vertices (must be at least 1)
        """
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {n!r}")
        self.n = int(n)
        self._succ: List[Set[int]] = [set() for _ in range(self.n)]
        self._arc_count = 0
        self._frozen = False

    def __repr__(self) -> str:
        """String representation of the graph."""
        state = "frozen" if self._frozen else "open"
        return f"Digraph(n={self.n}, arcs={self._arc_count}, {state})"

    def __eq__(self, other: object) -> bool:
        """Two graphs are equal when they have the same vertex count and arc set."""
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self._succ == other._succ

    def __hash__(self) -> int:
        """Hash value, available once the graph is frozen."""
        if not self._frozen:
            raise TypeError("unhashable: freeze() the Digraph first")
        return hash((self.n, self.arcs))

    def _check_vertex(self, u: int) -> int:
        if isinstance(u, bool) or not isinstance(u, (int, np.integer)) or not 0 <= u < self.n:
            raise GraphError(f"vertex {u!r} out of range [0, {self.n})")
        return int(u)

    def add_arc(self, u: int, v: int) -> "Digraph":
        """
        Add the arc u -> v.

        Returns:
            The graph itself, so calls can be chained
        """
        if self._frozen:
            raise GraphError("cannot add arcs to a frozen graph")
        u = self._check_vertex(u)
        v = self._check_vertex(v)
        if v in self._succ[u]:
            raise GraphError(f"duplicate arc ({u}, {v})")
        self._succ[u].add(v)
        self._arc_count += 1
        return self

    def freeze(self) -> "Digraph":
        """Make the graph immutable and return it."""
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def arcs(self) -> FrozenSet[Arc]:
        """The arc set as (source, target) pairs."""
        return frozenset((u, v) for u in range(self.n) for v in self._succ[u])

    def arc_count(self) -> int:
        """Number of arcs, loops included."""
        return self._arc_count

    def has_arc(self, u: int, v: int) -> bool:
        """Check whether u -> v is present."""
        return self._check_vertex(v) in self._succ[self._check_vertex(u)]

    def out_neighbors(self, u: int) -> Tuple[int, ...]:
        """Sorted out-neighbours of u (u itself if it has a loop)."""
        return tuple(sorted(self._succ[self._check_vertex(u)]))

    def out_degree(self, u: int) -> int:
        """Number of arcs leaving u; a loop counts once."""
        return len(self._succ[self._check_vertex(u)])

    def out_degrees(self) -> np.ndarray:
        """Out-degree of every vertex as an integer array."""
        return np.fromiter((len(s) for s in self._succ), dtype=np.int64, count=self.n)

    def sorted_arcs(self) -> Iterator[Arc]:
        """Arcs in (source, target) lexicographic order."""
        for u in range(self.n):
            for v in sorted(self._succ[u]):
                yield u, v

    def to_adjacency(self) -> np.ndarray:
        """0/1 adjacency matrix; row is the source, column the target."""
        adjacency = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v in self.sorted_arcs():
            adjacency[u, v] = 1.0
        return adjacency

    def to_networkx(self) -> nx.DiGraph:
        """Equivalent networkx DiGraph (vertices 0..n-1)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.sorted_arcs())
        return graph

    @property
    def bitmask(self) -> str:
        """Row-major adjacency bit string, character u*n + v for arc u -> v."""
        bits = ["0"] * (self.n * self.n)
        for u, v in self.sorted_arcs():
            bits[u * self.n + v] = "1"
        return "".join(bits)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Digraph":
        """Build and freeze a graph from an arc iterable."""
        graph = cls(n)
        for u, v in arcs:
            graph.add_arc(u, v)
        return graph.freeze()

    @classmethod
    def from_adjacency(cls, matrix) -> "Digraph":
        """Build and freeze a graph from a square 0/1 matrix (row = source)."""
        adjacency = np.asarray(matrix)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got shape {adjacency.shape}")
        if not np.isin(adjacency, (0, 1)).all():
            raise GraphError("adjacency matrix entries must be 0 or 1")
        sources, targets = np.nonzero(adjacency)
        return cls.from_arcs(adjacency.shape[0], zip(sources.tolist(), targets.tolist()))

    @classmethod
    def from_bitmask(cls, n: int, bits) -> "Digraph":
        """
        Build and freeze a graph from a row-major adjacency mask.

        Args:
            n: Number of vertices
            bits: Either the bit string of length n*n or its integer value,
                  where the first character is the most significant bit
        """
        if isinstance(bits, str):
            if len(bits) != n * n or set(bits) - {"0", "1"}:
                raise GraphError(f"bitmask must be {n * n} characters of 0/1")
            text = bits
        else:
            if not 0 <= bits < 1 << (n * n):
                raise GraphError(f"bitmask {bits} out of range for n={n}")
            text = format(bits, f"0{n * n}b")
        return cls.from_arcs(n, ((p // n, p % n) for p, c in enumerate(text) if c == "1"))


@dataclass(frozen=True)
class SccReport:
    """Strongly connected components of a graph with sink and aperiodicity flags."""
    components: Tuple[FrozenSet[int], ...]
    sink_flags: Tuple[bool, ...]
    aperiodic_flags: Tuple[bool, ...]

    @property
    def sink_components(self) -> Tuple[FrozenSet[int], ...]:
        """Components with no arc leaving them."""
        return tuple(c for c, sink in zip(self.components, self.sink_flags) if sink)

    def component_of(self, v: int) -> int:
        """Index of the component containing v."""
        for index, component in enumerate(self.components):
            if v in component:
                return index
        raise GraphError(f"vertex {v} not in any component")


def new_digraph(n: int) -> Digraph:
    """Create an open graph with n vertices and no arcs."""
    return Digraph(n)


def add_arc(g: Digraph, u: int, v: int) -> Digraph:
    """Add u -> v to g and return g."""
    return g.add_arc(u, v)


def out_degree(g: Digraph, u: int) -> int:
    """Out-degree of u in g."""
    return g.out_degree(u)


def _is_component_aperiodic(graph: nx.DiGraph, component: FrozenSet[int]) -> bool:
    if any(graph.has_edge(v, v) for v in component):
        return True
    if len(component) == 1:
        # no loop, no cycle
        return False
    return nx.is_aperiodic(graph.subgraph(component))


def scc_report(g: Digraph) -> SccReport:
    """
    Partition g into strongly connected components.

    Components are ordered by their smallest vertex. A component is a sink
    when every arc from its vertices stays inside it, and aperiodic when the
    gcd of its cycle lengths is 1.
    """
    graph = g.to_networkx()
    components = sorted((frozenset(c) for c in nx.strongly_connected_components(graph)), key=min)
    condensed = nx.condensation(graph, scc=components)
    sink_flags = tuple(condensed.out_degree(i) == 0 for i in range(len(components)))
    aperiodic_flags = tuple(_is_component_aperiodic(graph, c) for c in components)
    return SccReport(tuple(components), sink_flags, aperiodic_flags)


def is_weakly_connected(g: Digraph) -> bool:
    """True iff the underlying undirected graph of g is connected."""
    return nx.is_weakly_connected(g.to_networkx())


def alpha1_violations(g: Digraph, report: Optional[SccReport] = None) -> List[str]:
    """
    List the conditions for alpha = 1 that g violates.

    Returns:
        An empty list when PageRank at alpha = 1 is well-defined
    """
    report = report or scc_report(g)
    violations = []
    if not is_weakly_connected(g):
        violations.append("graph is not weakly connected")
    sinks = [i for i, sink in enumerate(report.sink_flags) if sink]
    if len(sinks) != 1:
        violations.append(f"expected exactly one sink component, found {len(sinks)}")
    elif not report.aperiodic_flags[sinks[0]]:
        violations.append("sink component is periodic")
    return violations


def alpha1_valid(g: Digraph) -> bool:
    """Weakly connected, exactly one sink component, and that component aperiodic."""
    return not alpha1_violations(g)


def sink_component(g: Digraph, report: Optional[SccReport] = None) -> Optional[FrozenSet[int]]:
    """The unique sink component of g, or None when there is not exactly one."""
    sinks = (report or scc_report(g)).sink_components
    return sinks[0] if len(sinks) == 1 else None


# ASCII digits only: no sign, no underscore, no other scripts
_DIGITS = re.compile(r"[0-9]+")


def parse_graph(text: str) -> Digraph:
    """
    Parse the text graph format.

    The first meaningful line is the vertex count; every further non-empty
    line is "u v" for the arc u -> v. Lines starting with '#' are comments.

    Returns:
        A frozen Digraph
    """
    graph: Optional[Digraph] = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if graph is None:
            if len(fields) != 1:
                raise GraphParseError(line_number, f"expected vertex count, got {line!r}")
            if not _DIGITS.fullmatch(fields[0]):
                raise GraphParseError(line_number, f"vertex count is not a decimal integer: {fields[0]!r}")
            n = int(fields[0])
            if n < 1:
                raise GraphParseError(line_number, f"vertex count must be positive, got {n}")
            graph = Digraph(n)
            continue
        if len(fields) != 2:
            raise GraphParseError(line_number, f"expected 'u v', got {line!r}")
        if not (_DIGITS.fullmatch(fields[0]) and _DIGITS.fullmatch(fields[1])):
            raise GraphParseError(line_number, f"arc endpoints must be decimal integers: {line!r}")
        u, v = int(fields[0]), int(fields[1])
        try:
            graph.add_arc(u, v)
        except GraphError as exc:
            raise GraphParseError(line_number, str(exc)) from None
    if graph is None:
        raise GraphParseError(1, "missing vertex count")
    logger.debug(f"Parsed graph with {graph.n} vertices and {graph.arc_count()} arcs")
    return graph.freeze()


def serialize_graph(g: Digraph) -> str:
    """Render g in the text graph format, arcs sorted."""
    lines = [str(g.n)]
    lines.extend(f"{u} {v}" for u, v in g.sorted_arcs())
    return "\n".join(lines) + "\n"


def read_graph(path: str) -> Digraph:
    """
    Read and parse a graph file (UTF-8).

    Raises:
        OSError: the file cannot be read
        GraphParseError: bad content, including bytes that are not UTF-8
    """
    with open(path, "rb") as handle:
        data = handle.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_number = data[:exc.start].count(b"\n") + 1
        raise GraphParseError(line_number, f"invalid UTF-8 at byte {exc.start}") from None
    return parse_graph(text)


def write_graph(g: Digraph, path: str) -> None:
    """Write g to path in the text graph format."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_graph(g))
