"""Labeled simple directed graphs and the combinatorial queries built on them.

Nodes are the integers 1..n.  A graph is *simple*: no self-loops and never
both i->j and j->i.  Graphs are immutable after construction and safe to
share between threads or worker processes.
"""

from __future__ import annotations

import heapq
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Optional, Sequence


class GraphError(ValueError):
    """Invalid graph data (bad node, self-loop, anti-parallel pair, ...)."""


class GraphFormatError(GraphError):
    """Malformed graph text.  Carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedLineError(GraphFormatError):
    pass


class NodeRangeError(GraphFormatError):
    pass


class SelfLoopError(GraphFormatError):
    pass


class DuplicateEdgeError(GraphFormatError):
    pass


class AntiParallelEdgeError(GraphFormatError):
    pass


# Enumeration guard: 3**(n*(n-1)/2) graphs; n=7 is already ~10^10.
MAX_ENUMERATION_NODES = 7


class Digraph:
    """A labeled simple directed graph.

    Attributes:
        n: Number of nodes; nodes are labeled 1..n.
        edges: Edge set as a sorted tuple of ordered pairs (i, j), meaning
            the directed edge i -> j.
    """

    __slots__ = ("n", "edges", "_children", "_parents", "_edge_set", "_hash")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 1:
            raise GraphError(f"node count must be at least 1, got {n}")
        edge_list = [(int(i), int(j)) for i, j in edges]
        seen: set[tuple[int, int]] = set()
        children: list[set[int]] = [set() for _ in range(n + 1)]
        parents: list[set[int]] = [set() for _ in range(n + 1)]
        for i, j in edge_list:
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphError(f"edge ({i}, {j}) has endpoint outside 1..{n}")
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            if (j, i) in seen:
                raise GraphError(f"anti-parallel pair ({j}, {i}) and ({i}, {j})")
            seen.add((i, j))
            children[i].add(j)
            parents[j].add(i)
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        self._edge_set = frozenset(seen)
        self._children = tuple(frozenset(c) for c in children)
        self._parents = tuple(frozenset(p) for p in parents)
        self._hash = hash((n, self.edges))

    # -- basic queries ----------------------------------------------------

    def _check_node(self, i: int) -> None:
        if not (1 <= i <= self.n):
            raise GraphError(f"node {i} out of range 1..{self.n}")

    def children(self, i: int) -> frozenset[int]:
        """Nodes j with i -> j."""
        self._check_node(i)
        return self._children[i]

    def parents(self, i: int) -> frozenset[int]:
        """Nodes j with j -> i."""
        self._check_node(i)
        return self._parents[i]

    def neighbors(self, i: int) -> frozenset[int]:
        """Nodes adjacent to i (children or parents; disjoint by simplicity)."""
        self._check_node(i)
        return self._children[i] | self._parents[i]

    def ancestors(self, i: int) -> frozenset[int]:
        """Nodes with a directed path (of length >= 1) into i.

        With simplicity and no self-loops, i is its own ancestor exactly
        when i lies on a directed cycle.
        """
        self._check_node(i)
        seen: set[int] = set()
        stack = list(self._parents[i])
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(self._parents[v] - seen)
        return frozenset(seen)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_set

    def is_adjacent(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_set or (j, i) in self._edge_set

    def out_degree_sequence(self) -> tuple[int, ...]:
        """Multiset of out-degrees, sorted descending."""
        return tuple(sorted((len(self._children[i]) for i in range(1, self.n + 1)), reverse=True))

    def is_complete(self) -> bool:
        """True iff every unordered pair of nodes is adjacent."""
        return len(self.edges) == self.n * (self.n - 1) // 2

    def is_sink(self, i: int) -> bool:
        return not self.children(i)

    def sinks(self) -> frozenset[int]:
        return frozenset(i for i in range(1, self.n + 1) if not self._children[i])

    def is_transitive_triangle_free(self) -> bool:
        """True iff no edge (u, v) has a common child of u and v.

        Equivalently, the graph contains no shielded collider: no triple where
        two adjacent nodes point into a common third node.
        """
        return all(not (self._children[u] & self._children[v]) for u, v in self.edges)

    def strongly_connected_components(self) -> tuple[tuple[int, ...], ...]:
        """SCC partition, canonically ordered.

        Each class is sorted ascending and classes are sorted by their
        minimum element, so the output is byte-stable across runs.
        """
        # Iterative Tarjan.
        index: dict[int, int] = {}
        lowlink: dict[int, int] = {}
        on_stack: set[int] = set()
        stack: list[int] = []
        components: list[tuple[int, ...]] = []
        counter = 0
        for root in range(1, self.n + 1):
            if root in index:
                continue
            work: list[tuple[int, Iterator[int]]] = [(root, iter(sorted(self._children[root])))]
            index[root] = lowlink[root] = counter
            counter += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                v, it = work[-1]
                advanced = False
                for w in it:
                    if w not in index:
                        index[w] = lowlink[w] = counter
                        counter += 1
                        stack.append(w)
                        on_stack.add(w)
                        work.append((w, iter(sorted(self._children[w]))))
                        advanced = True
                        break
                    if w in on_stack:
                        lowlink[v] = min(lowlink[v], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[v])
                if lowlink[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    components.append(tuple(sorted(comp)))
        components.sort(key=lambda c: c[0])
        return tuple(components)

    def is_acyclic(self) -> bool:
        return all(len(c) == 1 for c in self.strongly_connected_components())

    def topological_order(self) -> Optional[tuple[int, ...]]:
        """The lexicographically smallest topological order, or None if cyclic.

        Kahn's algorithm with a min-heap of ready nodes; the heap makes the
        returned extension deterministic, which the acyclic witness
        construction relies on.
        """
        indeg = {i: len(self._parents[i]) for i in range(1, self.n + 1)}
        ready = [i for i, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order: list[int] = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for w in self._children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        if len(order) != self.n:
            return None
        return tuple(order)

    def relabel(self, mapping: Mapping[int, int]) -> "Digraph":
        """Apply a node permutation; mapping must be a bijection on 1..n."""
        if sorted(mapping) != list(range(1, self.n + 1)) or sorted(mapping.values()) != list(
            range(1, self.n + 1)
        ):
            raise GraphError("relabeling must be a permutation of 1..n")
        return Digraph(self.n, ((mapping[i], mapping[j]) for i, j in self.edges))

    def key(self) -> str:
        """A stable text key for hashing/seeding (node count plus edge list)."""
        return f"{self.n}:" + ",".join(f"{i}-{j}" for i, j in self.edges)

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Digraph) and self.n == other.n and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={list(self.edges)})"


# -- enumeration -----------------------------------------------------------


def node_pairs(n: int) -> list[tuple[int, int]]:
    """All unordered node pairs (i, j), i < j, in lexicographic order."""
    return list(combinations(range(1, n + 1), 2))


def count_simple_digraphs(n: int) -> int:
    """3 ** (n*(n-1)/2): each pair is absent, forward, or backward."""
    return 3 ** (n * (n - 1) // 2)


def digraph_from_index(n: int, index: int) -> Digraph:
    """Decode the graph at a given position of the enumeration order.

    The enumeration is a big-endian ternary counter over the node pairs in
    lexicographic order: digit 0 leaves the pair non-adjacent, 1 orients it
    i -> j, 2 orients it j -> i.
    """
    pairs = node_pairs(n)
    total = count_simple_digraphs(n)
    if not (0 <= index < total):
        raise GraphError(f"graph index {index} out of range 0..{total - 1}")
    edges = []
    for i, j in reversed(pairs):
        index, digit = divmod(index, 3)
        if digit == 1:
            edges.append((i, j))
        elif digit == 2:
            edges.append((j, i))
    return Digraph(n, edges)


def digraph_to_index(g: Digraph) -> int:
    """Inverse of digraph_from_index."""
    index = 0
    for i, j in node_pairs(g.n):
        digit = 1 if g.has_edge(i, j) else 2 if g.has_edge(j, i) else 0
        index = index * 3 + digit
    return index


def enumerate_simple_digraphs(
    n: int, start: int = 0, *, max_nodes: int = MAX_ENUMERATION_NODES
) -> Iterator[Digraph]:
    """Stream every labeled simple digraph on n nodes exactly once.

    Deterministic order (see digraph_from_index); restartable from any index
    so sweeps can be partitioned across workers.

    Args:
        n: Node count, 1 <= n <= max_nodes.
        start: Index to resume from.
        max_nodes: Guard against accidentally huge enumerations.
    """
    if n < 1:
        raise GraphError(f"node count must be at least 1, got {n}")
    if n > max_nodes:
        raise GraphError(
            f"enumeration of {n}-node graphs exceeds the guard (max_nodes={max_nodes})"
        )
    for index in range(start, count_simple_digraphs(n)):
        yield digraph_from_index(n, index)


# -- text format ------------------------------------------------------------


def parse_graph(text: str) -> Digraph:
    """Parse the graph text format.

    Format (UTF-8): `#` starts a comment; the first non-comment line is
    `n <p>`; every following non-comment line is `<u> <v>` for the edge
    u -> v.  Nodes are 1-indexed.
    """
    n: Optional[int] = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise MalformedLineError(f"expected 'n <count>', got {line!r}", line_no)
            try:
                n = int(fields[1])
            except ValueError:
                raise MalformedLineError(f"bad node count {fields[1]!r}", line_no) from None
            if n < 1:
                raise MalformedLineError(f"node count must be positive, got {n}", line_no)
            continue
        if len(fields) != 2:
            raise MalformedLineError(f"expected '<u> <v>', got {line!r}", line_no)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise MalformedLineError(f"non-integer endpoint in {line!r}", line_no) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise NodeRangeError(f"edge ({u}, {v}) has endpoint outside 1..{n}", line_no)
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}", line_no)
        if (u, v) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({u}, {v})", line_no)
        if (v, u) in seen:
            raise AntiParallelEdgeError(
                f"edge ({u}, {v}) is anti-parallel to earlier ({v}, {u})", line_no
            )
        seen.add((u, v))
        edges.append((u, v))
    if n is None:
        raise MalformedLineError("missing 'n <count>' header", 1)
    return Digraph(n, edges)


def serialize_graph(g: Digraph) -> str:
    """Render a graph in the text format; parse_graph inverts this exactly."""
    lines = [f"n {g.n}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> Digraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())
