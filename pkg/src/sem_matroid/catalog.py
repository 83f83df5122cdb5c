"""Small named graphs used by the demo scripts and the test suite."""

from __future__ import annotations

from .digraph import Digraph


def diamond() -> Digraph:
    """1 -> {2, 3} -> 4: acyclic, two directed paths meeting at a sink."""
    return Digraph(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


def four_cycle() -> Digraph:
    """A 3-cycle 2 -> 3 -> 4 -> 2 fed by node 1."""
    return Digraph(4, [(1, 2), (2, 3), (3, 4), (4, 2)])


def path_with_chord() -> Digraph:
    """The chain 1 -> 2 -> 3 -> 4 plus the chord 2 -> 4 (a shielded collider)."""
    return Digraph(4, [(1, 2), (2, 3), (2, 4), (3, 4)])


def same_outdegree_ttf_pair() -> tuple[Digraph, Digraph]:
    """Six-node pair: equal out-degree sequences, no shielded colliders.

    The two graphs differ only in where node 1 sends two of its three edges.
    """
    g1 = Digraph(6, [(1, 2), (1, 3), (1, 4), (2, 5), (3, 6), (5, 3), (6, 2)])
    g2 = Digraph(6, [(1, 4), (1, 5), (1, 6), (2, 5), (3, 6), (5, 3), (6, 2)])
    return g1, g2


def transitive_triangle_pair() -> tuple[Digraph, Digraph]:
    """Four-node pair where both graphs contain a shielded collider.

    Equal out-degree sequences, so only the parentally-closed-set criterion
    separates them.
    """
    g1 = Digraph(4, [(1, 2), (1, 3), (2, 3), (2, 4)])
    g2 = Digraph(4, [(2, 1), (1, 3), (1, 4), (2, 4)])
    return g1, g2


def same_scc_pair() -> tuple[Digraph, Digraph]:
    """Six-node pair with equal out-degree sequences and identical strongly
    connected components ({1..5} and {6}) but no parentally-closed witness.

    Their column matroids still differ, so the pair is distinguishable only
    by the rank oracle.
    """
    g1 = Digraph(
        6,
        [(1, 2), (1, 4), (1, 6), (2, 4), (2, 5), (3, 1), (3, 2), (4, 3), (4, 5), (5, 1), (5, 3)],
    )
    g2 = Digraph(
        6,
        [(1, 3), (1, 5), (1, 6), (2, 1), (2, 5), (3, 2), (3, 4), (4, 1), (4, 2), (5, 3), (5, 4)],
    )
    return g1, g2


def complete_flip_pair(p: int = 5) -> tuple[Digraph, Digraph]:
    """Two complete digraphs on p nodes differing only in the direction of
    the edge between p-1 and p.

    For p = 5 this is the classic pair: a 3-cycle on {1, 2, 3} pointing into
    4 and 5, with the 4-5 edge flipped between the two graphs.
    """
    if p == 5:
        shared = [
            (1, 2), (2, 3), (3, 1),
            (1, 4), (2, 4), (3, 4),
            (1, 5), (2, 5), (3, 5),
        ]
    else:
        shared = [(i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)]
        shared.remove((p - 1, p))
    g1 = Digraph(p, shared + [(p - 1, p)])
    g2 = Digraph(p, shared + [(p, p - 1)])
    return g1, g2
