"""Graphical criteria that certify two graphs have different Jacobian
matroids, together with their explicit witness-set constructions.

Everything here is pure graph combinatorics: no rank is ever computed.  The
emitted column sets are the rank-gap sets from the constructions; sweeps
verify the gap against the randomized oracle separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from .digraph import Digraph
from .jacobian import ColumnIndex
from .matroid import MatroidComparison, RankOracleConfig, matroids_equal


class CriterionError(ValueError):
    pass


class NeighborhoodTooLarge(CriterionError):
    """Parentally-closed-set enumeration would exceed the subset guard."""


def _pair(a: int, b: int) -> ColumnIndex:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PCSet:
    """A parentally closed set L with respect to an anchor node.

    L is a subset of the anchor's neighbors whose parents inside the
    neighborhood stay inside L: pa(L) & neighbors(i) <= L.
    """

    node: int
    members: frozenset[int]


def is_parentally_closed(graph: Digraph, i: int, members: frozenset[int]) -> bool:
    nb = graph.neighbors(i)
    if not members <= nb:
        return False
    parents: set[int] = set()
    for m in members:
        parents |= graph.parents(m)
    return (parents & nb) <= members


def pc_sets(graph: Digraph, i: int, *, neighborhood_cap: int = 20) -> Iterator[PCSet]:
    """All parentally closed sets with respect to i, the empty set and the
    full neighborhood included, in increasing-size then lexicographic order."""
    nb = sorted(graph.neighbors(i))
    if len(nb) > neighborhood_cap:
        raise NeighborhoodTooLarge(
            f"node {i} has {len(nb)} neighbors; enumeration guard is {neighborhood_cap}"
        )
    for size in range(len(nb) + 1):
        for combo in combinations(nb, size):
            members = frozenset(combo)
            if is_parentally_closed(graph, i, members):
                yield PCSet(i, members)


@dataclass(frozen=True)
class CriterionWitness:
    """Why a criterion fired, and the constructed rank-gap column set.

    Attributes:
        kind: Which criterion produced the witness.
        node: The anchor node i.
        direction: k in {1, 2}; the graph whose children intersect the
            witness set (or whose out-degree) is strictly larger.
        pc_set: The parentally closed set L, when one is part of the
            argument.
        column_set: The constructed set S of precision entries; when
            present its rank in the gap graph strictly exceeds its rank in
            the other graph, and |S| = |D| + 1.
        gap_graph: 1 or 2; the graph whose Jacobian attains the larger rank
            on column_set (0 when no column set was constructed).
        detail: Which construction case applied.
    """

    kind: str
    node: int
    direction: int
    pc_set: Optional[PCSet] = None
    column_set: Optional[frozenset[ColumnIndex]] = None
    gap_graph: int = 0
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "node": self.node,
            "direction": self.direction,
            "pc_set": sorted(self.pc_set.members) if self.pc_set else None,
            "column_set": [[str(i), str(j)] for i, j in sorted(self.column_set)]
            if self.column_set
            else None,
            "gap_graph": self.gap_graph,
            "detail": self.detail,
        }


def _check_same_nodes(g1: Digraph, g2: Digraph) -> None:
    if g1.n != g2.n:
        raise CriterionError("graphs must have the same node count")


def adjacency_columns(graph: Digraph) -> frozenset[ColumnIndex]:
    """Columns K_kl of adjacent pairs."""
    return frozenset(_pair(k, l) for k, l in graph.edges)


def rank_gap_columns(favored: Digraph, other: Digraph, i: int, members: frozenset[int]) -> frozenset[ColumnIndex]:
    """The set S = (S_E \\ S_-) | S_+ whose rank in `other` exceeds its rank
    in `favored`.

    S_E are the adjacency columns of `other`, S_- the columns pairing i with
    members of L, and S_+ diagonal padding: diagonals of the members of L
    adjacent to i in `other` plus one diagonal outside {i} | L.  When L is
    all of V \\ {i} there is no outside node and the construction falls back
    to the around-one-node variant: pad with every diagonal but K_ii and,
    if the neighborhood of i in `other` is full, one extra column on a
    non-adjacent pair away from i (`other` is not complete, so one exists).

    Always returns |D_other| + 1 columns.
    """
    n = favored.n
    s_e = set(adjacency_columns(other))
    if len(members) < n - 1:
        s_minus = {_pair(i, m) for m in members}
        j0 = min(m for m in range(1, n + 1) if m != i and m not in members)
        s_plus = {(m, m) for m in members if other.is_adjacent(i, m)}
        s_plus.add((j0, j0))
        return frozenset((s_e - s_minus) | s_plus)
    s_minus = {_pair(i, m) for m in range(1, n + 1) if m != i}
    deg = len(other.neighbors(i))
    if deg < n - 1:
        j0 = min(m for m in range(1, n + 1) if m != i and not other.is_adjacent(i, m))
        s_plus = {(m, m) for m in other.neighbors(i)}
        s_plus.add((j0, j0))
    else:
        s_plus = {(m, m) for m in range(1, n + 1) if m != i}
        extra = min(
            (x, y)
            for x, y in combinations(range(1, n + 1), 2)
            if x != i and y != i and not other.is_adjacent(x, y)
        )
        s_plus.add(extra)
    return frozenset((s_e - s_minus) | s_plus)


def cross_closure_ok(favored: Digraph, other: Digraph, i: int, members: frozenset[int]) -> bool:
    """Whether the rank-gap argument applies to a parentally closed witness.

    The zero-row argument for the favored graph needs the parents of every
    favored-child inside L to land in L even when they neighbor i in the
    *other* graph; single-graph parental closure only controls the favored
    neighborhood.  (When L is all of V \\ {i} the around-one-node
    construction avoids every column touching i, and no condition is
    needed.)
    """
    nb_other = other.neighbors(i)
    for j in favored.children(i) & members:
        if not (favored.parents(j) & nb_other) <= members:
            return False
    return True


def _all_but(n: int, i: int) -> frozenset[int]:
    return frozenset(m for m in range(1, n + 1) if m != i)


def outdegree_criterion(g1: Digraph, g2: Digraph) -> Optional[CriterionWitness]:
    """Fires when some node has different out-degrees in the two graphs (and
    at least one graph is not complete)."""
    _check_same_nodes(g1, g2)
    if g1.is_complete() and g2.is_complete():
        return None
    node = None
    for i in range(1, g1.n + 1):
        if len(g1.children(i)) != len(g2.children(i)):
            node = i
            break
    if node is None:
        return None
    k = 1 if len(g1.children(node)) > len(g2.children(node)) else 2
    column_set = None
    gap = 0
    pc = None
    if len(g1.edges) == len(g2.edges):
        # With equal edge counts the explicit rank-gap set is meaningful
        # (otherwise the matroids already differ in rank).  The set avoids
        # every column touching the node, so the whole child-row block of
        # the favored graph vanishes on it.
        favored, other = (g1, g2) if k == 1 else (g2, g1)
        pc = PCSet(node, favored.neighbors(node))
        column_set = rank_gap_columns(favored, other, node, _all_but(g1.n, node))
        gap = 3 - k
    return CriterionWitness(
        kind="out_degree",
        node=node,
        direction=k,
        pc_set=pc,
        column_set=column_set,
        gap_graph=gap,
        detail="per-node out-degree difference",
    )


def ttf_criterion(g1: Digraph, g2: Digraph) -> Optional[CriterionWitness]:
    """Fires for distinct, non-complete graphs that are both free of
    shielded colliders; includes the constructed rank-gap set when the
    out-degree criterion does not already settle the pair."""
    _check_same_nodes(g1, g2)
    if not (g1.is_transitive_triangle_free() and g2.is_transitive_triangle_free()):
        return None
    if g1.is_complete() or g2.is_complete():
        return None
    if g1.edges == g2.edges:
        return None
    od = outdegree_criterion(g1, g2)
    if od is not None:
        return CriterionWitness(
            kind="transitive_triangle_free",
            node=od.node,
            direction=od.direction,
            detail="decided by out-degree difference",
        )
    # Every node has the same out-degree in both graphs; pick the first node
    # whose child sets differ and an edge (i, j) present only in g1.
    i = next(m for m in range(1, g1.n + 1) if g1.children(m) != g2.children(m))
    j = min(g1.children(i) - g2.children(i))
    if g2.has_edge(j, i):
        # Anti-parallel case: around-j construction on g2, then swap the
        # diagonal K_ii for K_ij.  The s row needs a pivot of its own after
        # K_ii leaves, so pad with a fresh non-adjacent pair that shares a
        # child in g2 (nonzero column) when the degree of j is full;
        # otherwise the non-adjacent diagonal K_j0_j0 serves.
        n = g1.n
        s_e = set(adjacency_columns(g2))
        s_minus = {_pair(j, m) for m in g2.neighbors(j)}
        s_plus: set[ColumnIndex] = {(m, m) for m in g2.neighbors(j)}
        if len(g2.neighbors(j)) < n - 1:
            j0 = min(m for m in range(1, n + 1) if m != j and not g2.is_adjacent(j, m))
            s_plus.add((j0, j0))
        else:
            s_plus = {(m, m) for m in range(1, n + 1) if m != j}
            fresh = [
                (x, y)
                for x, y in combinations(range(1, n + 1), 2)
                if x != j and y != j and not g2.is_adjacent(x, y)
            ]
            with_child = [p for p in fresh if g2.children(p[0]) & g2.children(p[1])]
            s_plus.add(min(with_child) if with_child else min(fresh))
        s = (s_e - s_minus) | s_plus
        s.discard((i, i))
        s.add(_pair(i, j))
        return CriterionWitness(
            kind="transitive_triangle_free",
            node=i,
            direction=1,
            column_set=frozenset(s),
            gap_graph=2,
            detail=f"edge ({i},{j}) reversed; swapped K_{i}{i} for K_{_pair(i, j)}",
        )
    common = g2.children(i) & g2.children(j)
    if not common:
        # {i, j} adjacent in g1 but neither adjacent nor sharing a child in
        # g2: column K_ij vanishes in graph 2 only, so the pair is already
        # separated by the adjacency pattern; no |D|+1 gap set is built.
        return CriterionWitness(
            kind="transitive_triangle_free",
            node=i,
            direction=1,
            detail=f"column K_{_pair(i, j)} vanishes in graph 2 only",
        )
    # Common-child case: around-j construction on g2 with the spare diagonal
    # taken at i, then swap K_ll for K_ij.
    l = min(common)
    s_e = set(adjacency_columns(g2))
    s_minus = {_pair(j, m) for m in g2.neighbors(j)}
    s_plus = {(m, m) for m in g2.neighbors(j)}
    s_plus.add((i, i))
    s = (s_e - s_minus) | s_plus
    s.discard((l, l))
    s.add(_pair(i, j))
    return CriterionWitness(
        kind="transitive_triangle_free",
        node=i,
        direction=1,
        column_set=frozenset(s),
        gap_graph=2,
        detail=f"common child {l}; swapped K_{l}{l} for K_{_pair(i, j)}",
    )


def pc_criterion(
    g1: Digraph, g2: Digraph, *, neighborhood_cap: int = 20
) -> Optional[CriterionWitness]:
    """Search for a node i and a set L parentally closed in one graph whose
    intersection with that graph's children of i is strictly larger than in
    the other graph.

    First hit wins, scanning k in {1, 2}, then nodes, then sets in
    increasing-size lexicographic order, so witnesses are deterministic.
    """
    _check_same_nodes(g1, g2)
    if g1.is_complete() or g2.is_complete():
        return None
    same_edge_count = len(g1.edges) == len(g2.edges)
    for k, favored, other in ((1, g1, g2), (2, g2, g1)):
        for i in range(1, g1.n + 1):
            ch_f = favored.children(i)
            ch_o = other.children(i)
            for pc in pc_sets(favored, i, neighborhood_cap=neighborhood_cap):
                if len(ch_f & pc.members) > len(ch_o & pc.members):
                    emit = same_edge_count and (
                        len(pc.members) == g1.n - 1
                        or cross_closure_ok(favored, other, i, pc.members)
                    )
                    column_set = (
                        rank_gap_columns(favored, other, i, pc.members) if emit else None
                    )
                    return CriterionWitness(
                        kind="parentally_closed",
                        node=i,
                        direction=k,
                        pc_set=pc,
                        column_set=column_set,
                        gap_graph=3 - k if column_set is not None else 0,
                        detail=(
                            f"|ch_{k}({i}) & L| = {len(ch_f & pc.members)} > "
                            f"{len(ch_o & pc.members)} = |ch_{3 - k}({i}) & L|"
                            + ("" if emit else "; gap set omitted (cross closure fails)")
                        ),
                    )
    return None


def acyclic_pc_witness(g1: Digraph, g2: Digraph) -> CriterionWitness:
    """Constructive parentally-closed witness when one graph is acyclic.

    Preconditions: equal out-degree sequences, different edge sets, both
    graphs non-complete, at least one acyclic.  When every node has the same
    out-degree in both graphs the witness is built from the acyclic graph's
    topological order: i is the earliest node whose child sets differ, j the
    smallest child lost by the other graph, and L collects j together with
    its ancestors, restricted to the neighborhood of i.  Minimality of i in
    the order forces ch_other(i) & L inside ch_acyclic(i) & L, and j makes
    the inequality strict.
    """
    _check_same_nodes(g1, g2)
    if g1.out_degree_sequence() != g2.out_degree_sequence():
        raise CriterionError("graphs must have the same out-degree sequence")
    if g1.edges == g2.edges:
        raise CriterionError("graphs must differ")
    if g1.is_complete() or g2.is_complete():
        raise CriterionError("graphs must not be complete")
    if not (g1.is_acyclic() or g2.is_acyclic()):
        raise CriterionError("one graph must be acyclic")
    for m in range(1, g1.n + 1):
        if len(g1.children(m)) != len(g2.children(m)):
            k = 1 if len(g1.children(m)) > len(g2.children(m)) else 2
            favored, other = (g1, g2) if k == 1 else (g2, g1)
            return CriterionWitness(
                kind="acyclic_construction",
                node=m,
                direction=k,
                pc_set=PCSet(m, favored.neighbors(m)),
                column_set=rank_gap_columns(favored, other, m, _all_but(g1.n, m)),
                gap_graph=3 - k,
                detail="per-node out-degree difference",
            )
    k = 1 if g1.is_acyclic() else 2
    anchor, other = (g1, g2) if k == 1 else (g2, g1)
    order = anchor.topological_order()
    assert order is not None
    i = next(m for m in order if anchor.children(m) != other.children(m))
    j = min(anchor.children(i) - other.children(i))
    members = frozenset((anchor.ancestors(j) | {j}) & anchor.neighbors(i))
    pc = PCSet(i, members)
    if not is_parentally_closed(anchor, i, members):
        raise CriterionError("constructed set is not parentally closed")
    if not len(anchor.children(i) & members) > len(other.children(i) & members):
        raise CriterionError("constructed set does not witness the inequality")
    emit = len(members) == g1.n - 1 or cross_closure_ok(anchor, other, i, members)
    return CriterionWitness(
        kind="acyclic_construction",
        node=i,
        direction=k,
        pc_set=pc,
        column_set=rank_gap_columns(anchor, other, i, members) if emit else None,
        gap_graph=3 - k if emit else 0,
        detail=f"topological construction from child {j}"
        + ("" if emit else "; gap set omitted (cross closure fails)"),
    )


# -- necessary conditions ------------------------------------------------------


def dependence_pattern(graph: Digraph) -> frozenset[ColumnIndex]:
    """Pairs {i, j} that are adjacent or share a child; exactly the nonzero
    off-diagonal columns of the Jacobian."""
    out = set()
    for i in range(1, graph.n + 1):
        for j in range(i + 1, graph.n + 1):
            if graph.is_adjacent(i, j) or (graph.children(i) & graph.children(j)):
                out.add((i, j))
    return frozenset(out)


@dataclass(frozen=True)
class NecessaryConditionReport:
    """Violations of the conditions every matroid-equal pair must satisfy.

    Two graphs with equal Jacobian matroids must have the same
    adjacent-or-common-child pattern, and any node that is a sink in both
    must have the same parents.  A violation certifies different matroids;
    no violation certifies nothing.
    """

    adjacency_mismatches: tuple[tuple[int, int], ...]
    sink_mismatches: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...]

    @property
    def certifies_different(self) -> bool:
        return bool(self.adjacency_mismatches or self.sink_mismatches)

    def to_json(self) -> dict:
        return {
            "adjacency_mismatches": [list(p) for p in self.adjacency_mismatches],
            "sink_mismatches": [
                {"node": node, "parents_1": list(p1), "parents_2": list(p2)}
                for node, p1, p2 in self.sink_mismatches
            ],
            "certifies_different": self.certifies_different,
        }


def necessary_condition_checks(g1: Digraph, g2: Digraph) -> NecessaryConditionReport:
    _check_same_nodes(g1, g2)
    adjacency = tuple(
        sorted(dependence_pattern(g1) ^ dependence_pattern(g2))
    )
    sinks = []
    for i in sorted(g1.sinks() & g2.sinks()):
        p1, p2 = g1.parents(i), g2.parents(i)
        if p1 != p2:
            sinks.append((i, tuple(sorted(p1)), tuple(sorted(p2))))
    return NecessaryConditionReport(adjacency, tuple(sinks))


# -- the cascade ---------------------------------------------------------------


@dataclass(frozen=True)
class StageOutcome:
    name: str
    fired: bool
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {"name": self.name, "fired": self.fired, "witness": self.witness}


@dataclass(frozen=True)
class DistinguishReport:
    """Outcome of the full identifiability query for a pair of graphs.

    Every stage's outcome is recorded and the matroid verdict is always
    included (unless explicitly skipped) so criterion soundness stays
    auditable against the oracle.
    """

    stages: tuple[StageOutcome, ...]
    matroid: Optional[MatroidComparison]
    decided_by: str
    flags: tuple[str, ...] = ()

    @property
    def distinguishable(self) -> Optional[bool]:
        for stage in self.stages:
            if stage.fired:
                return True
        if self.matroid is not None:
            return not self.matroid.equal
        return None

    def to_json(self) -> dict:
        return {
            "stages": [s.to_json() for s in self.stages],
            "matroid": self.matroid.to_json() if self.matroid else None,
            "decided_by": self.decided_by,
            "flags": list(self.flags),
        }


def distinguish(
    g1: Digraph,
    g2: Digraph,
    cfg: Optional[RankOracleConfig] = None,
    *,
    skip_matroid: bool = False,
    neighborhood_cap: int = 20,
) -> DistinguishReport:
    """Run the criteria cheapest-first, then the matroid oracle.

    Stage order: edge count, necessary-condition checks, out-degree,
    shielded-collider-free, parentally closed sets (with the acyclic
    constructive fast path when its preconditions hold).  decided_by names
    the first decisive stage, or "matroid" when only the oracle separates
    the pair, or "none" when the matroids are equal.
    """
    _check_same_nodes(g1, g2)
    stages: list[StageOutcome] = []
    flags: list[str] = []

    edge_fired = len(g1.edges) != len(g2.edges)
    stages.append(
        StageOutcome(
            "edge_count",
            edge_fired,
            {"edges": [len(g1.edges), len(g2.edges)]} if edge_fired else None,
        )
    )

    nec = necessary_condition_checks(g1, g2)
    stages.append(
        StageOutcome(
            "necessary_conditions",
            nec.certifies_different,
            nec.to_json() if nec.certifies_different else None,
        )
    )

    od = outdegree_criterion(g1, g2)
    stages.append(StageOutcome("out_degree", od is not None, od.to_json() if od else None))

    ttf = ttf_criterion(g1, g2)
    stages.append(
        StageOutcome("transitive_triangle_free", ttf is not None, ttf.to_json() if ttf else None)
    )

    pc: Optional[CriterionWitness] = None
    fast_path_ok = (
        g1.out_degree_sequence() == g2.out_degree_sequence()
        and g1.edges != g2.edges
        and not g1.is_complete()
        and not g2.is_complete()
        and (g1.is_acyclic() or g2.is_acyclic())
    )
    try:
        if fast_path_ok:
            pc = acyclic_pc_witness(g1, g2)
        else:
            pc = pc_criterion(g1, g2, neighborhood_cap=neighborhood_cap)
    except NeighborhoodTooLarge:
        flags.append("pc-neighborhood-guard")
    stages.append(
        StageOutcome("parentally_closed", pc is not None, pc.to_json() if pc else None)
    )

    comparison = None
    if not skip_matroid:
        comparison = matroids_equal(g1, g2, cfg)

    decided_by = "none"
    for stage in stages:
        if stage.fired:
            decided_by = stage.name
            break
    else:
        if comparison is not None and not comparison.equal:
            decided_by = "matroid"
    return DistinguishReport(tuple(stages), comparison, decided_by, tuple(flags))
