"""Verification campaigns, family classification, and the command-line tool.

The sweeps reproduce the two computational studies: (1) for every pair of
distinct non-complete graphs with the same out-degree sequence, look for a
parentally-closed witness and flag witness-less pairs (splitting them by
whether the strongly connected components coincide); (2) for complete graphs,
compare the matroids of orientation pairs differing in a single edge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import random
import sys
import time
from dataclasses import dataclass, field
from itertools import combinations, islice
from multiprocessing import get_context
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import __version__
from .digraph import (
    Digraph,
    GraphError,
    count_simple_digraphs,
    digraph_from_index,
    load_graph,
    node_pairs,
    parse_graph,
    serialize_graph,
)
from .jacobian import JacobianError, build_jacobian, parse_column, render_column, render_var, simplify_s_row
from .matroid import (
    DEFAULT_SEED,
    MatroidError,
    RankOracle,
    RankOracleConfig,
    generic_rank,
    matroids_equal,
)
from .criteria import (
    CriterionError,
    dependence_pattern,
    distinguish,
    necessary_condition_checks,
    outdegree_criterion,
    pc_criterion,
    pc_sets,
    ttf_criterion,
)

DEFAULT_SAMPLE_SIZE = 100_000
CHECKPOINT_VERSION = 1


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a pairwise-witness campaign.

    Attributes:
        n: Node count.
        mode: "exhaustive" (all same-sequence pairs) or "sampled"
            (sample_size pairs per out-degree class, uniform with
            replacement; classes with fewer pairs are swept exhaustively).
        sample_size: Pairs per class in sampled mode.
        seed: Master seed; per-class sampling streams derive from it.
        workers: Process count for the pair loop.
        out_path: Optional JSON-lines report destination.
        checkpoint_path: Optional sidecar file; sweeps resume from it when
            present and refuse to resume across a config change.
        checkpoint_every: Pairs between checkpoint writes.
        allow_large: Permit exhaustive mode above 5 nodes.
    """

    n: int
    mode: str = "exhaustive"
    sample_size: int = DEFAULT_SAMPLE_SIZE
    seed: int = DEFAULT_SEED
    workers: int = 1
    out_path: Optional[str] = None
    checkpoint_path: Optional[str] = None
    checkpoint_every: int = 10_000
    allow_large: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise HarnessError("sweeps need at least 2 nodes")
        if self.n > 6:
            raise HarnessError("sweeps beyond 6 nodes are not supported")
        if self.mode not in ("exhaustive", "sampled"):
            raise HarnessError(f"unknown mode {self.mode!r}")
        if self.mode == "exhaustive" and self.n > 5 and not self.allow_large:
            raise HarnessError("exhaustive mode above n=5 requires allow_large")
        if self.sample_size < 1:
            raise HarnessError("sample_size must be >= 1")
        if self.workers < 1:
            raise HarnessError("workers must be >= 1")
        if self.checkpoint_every < 1:
            raise HarnessError("checkpoint_every must be >= 1")

    def semantic_hash(self) -> str:
        """Hash of the fields that determine the sweep's results."""
        body = f"{self.n}:{self.mode}:{self.sample_size}:{self.seed}"
        return hashlib.sha256(body.encode()).hexdigest()[:16]


# -- out-degree classes -------------------------------------------------------


def outdegree_classes(n: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Group every graph index by sorted out-degree sequence.

    Vectorized digit-peeling over the ternary enumeration; 3^15 indices for
    n = 6 stay comfortably in memory as int64 arrays.  Classes are returned
    in a deterministic order (ascending packed key) with sequences reported
    descending, matching Digraph.out_degree_sequence().
    """
    pairs = node_pairs(n)
    p_count = len(pairs)
    total = 3**p_count
    keys = np.zeros(total, dtype=np.int64)
    chunk = 1 << 19
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        deg = np.zeros((idx.size, n), dtype=np.int8)
        rem = idx.copy()
        for p in range(p_count - 1, -1, -1):
            digit = rem % 3
            rem //= 3
            i, j = pairs[p]
            deg[:, i - 1] += digit == 1
            deg[:, j - 1] += digit == 2
        deg.sort(axis=1)
        packed = np.zeros(idx.size, dtype=np.int64)
        for t in range(n):
            packed = packed * 8 + deg[:, t]
        keys[start:stop] = packed
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    boundaries = np.flatnonzero(np.diff(sorted_keys)) + 1
    groups = np.split(order, boundaries)
    out = []
    for grp in groups:
        packed = int(keys[grp[0]])
        digits = []
        for _ in range(n):
            packed, d = divmod(packed, 8)
            digits.append(d)
        seq = tuple(sorted(digits, reverse=True))
        out.append((seq, grp))
    return out


def _class_rng(seed: int, sequence: tuple[int, ...]) -> random.Random:
    material = f"{seed}:pc-class:{','.join(map(str, sequence))}".encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:16], "big"))


def _class_pair_stream(
    sequence: tuple[int, ...], members: Sequence[int], cfg: SweepConfig
) -> tuple[int, Iterator[tuple[int, int]]]:
    """Deterministic pair stream for one class and its length."""
    size = len(members)
    n_pairs = size * (size - 1) // 2
    if cfg.mode == "exhaustive" or n_pairs <= cfg.sample_size:
        return n_pairs, combinations(members, 2)

    def sampled() -> Iterator[tuple[int, int]]:
        rng = _class_rng(cfg.seed, sequence)
        for _ in range(cfg.sample_size):
            a = rng.randrange(size)
            b = rng.randrange(size)
            while b == a:
                b = rng.randrange(size)
            yield int(members[a]), int(members[b])

    return cfg.sample_size, sampled()


# -- the parentally-closed-witness campaign ------------------------------------


@dataclass(frozen=True)
class WitnesslessPair:
    """A same-sequence pair with no parentally closed witness."""

    sequence: tuple[int, ...]
    graph1: str
    graph2: str
    same_scc: bool

    @property
    def is_counterexample(self) -> bool:
        return not self.same_scc

    def to_json(self) -> dict:
        return {
            "sequence": list(self.sequence),
            "graph1": self.graph1,
            "graph2": self.graph2,
            "same_scc": self.same_scc,
            "counterexample": self.is_counterexample,
        }


@dataclass
class ClassResult:
    sequence: tuple[int, ...]
    class_size: int
    pairs_planned: int
    pairs_tested: int = 0
    witness_count: int = 0
    witnessless: list[WitnesslessPair] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "sequence": list(self.sequence),
            "class_size": self.class_size,
            "pairs_planned": self.pairs_planned,
            "pairs_tested": self.pairs_tested,
            "witness_count": self.witness_count,
            "witnessless": [w.to_json() for w in self.witnessless],
        }


@dataclass
class PCSweepResult:
    config: SweepConfig
    classes: list[ClassResult]
    skipped_complete_classes: int
    runtime_seconds: float

    @property
    def pairs_tested(self) -> int:
        return sum(c.pairs_tested for c in self.classes)

    @property
    def witnessless_pairs(self) -> list[WitnesslessPair]:
        return [w for c in self.classes for w in c.witnessless]

    @property
    def counterexamples(self) -> list[WitnesslessPair]:
        return [w for w in self.witnessless_pairs if w.is_counterexample]

    def summary_json(self) -> dict:
        return {
            "kind": "summary",
            "n": self.config.n,
            "mode": self.config.mode,
            "classes": len(self.classes),
            "skipped_complete_classes": self.skipped_complete_classes,
            "pairs_tested": self.pairs_tested,
            "witnessless": len(self.witnessless_pairs),
            "counterexamples": len(self.counterexamples),
            "runtime_seconds": self.runtime_seconds,
        }


def classify_pc_pair(g1: Digraph, g2: Digraph) -> Optional[WitnesslessPair]:
    """None when a parentally closed witness separates the pair; otherwise
    the witness-less record with the SCC comparison."""
    if pc_criterion(g1, g2) is not None:
        return None
    same_scc = g1.strongly_connected_components() == g2.strongly_connected_components()
    return WitnesslessPair(
        sequence=g1.out_degree_sequence(),
        graph1=serialize_graph(g1),
        graph2=serialize_graph(g2),
        same_scc=same_scc,
    )


def _pc_chunk_worker(task: tuple[int, list[tuple[int, int]]]) -> tuple[int, int, list]:
    n, chunk = task
    tested = 0
    witnesses = 0
    witnessless = []
    for a, b in chunk:
        g1 = digraph_from_index(n, a)
        g2 = digraph_from_index(n, b)
        record = classify_pc_pair(g1, g2)
        tested += 1
        if record is None:
            witnesses += 1
        else:
            witnessless.append(record)
    return tested, witnesses, witnessless


def _load_checkpoint(cfg: SweepConfig) -> Optional[dict]:
    if not cfg.checkpoint_path or not os.path.exists(cfg.checkpoint_path):
        return None
    with open(cfg.checkpoint_path, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    if state.get("version") != CHECKPOINT_VERSION:
        raise HarnessError(f"unsupported checkpoint version {state.get('version')}")
    if state.get("config_hash") != cfg.semantic_hash():
        raise HarnessError("checkpoint belongs to a different sweep configuration")
    return state


def _store_checkpoint(cfg: SweepConfig, done_pairs: int, classes: list[ClassResult]) -> None:
    if not cfg.checkpoint_path:
        return
    state = {
        "version": CHECKPOINT_VERSION,
        "config_hash": cfg.semantic_hash(),
        "done_pairs": done_pairs,
        "classes": [c.to_json() for c in classes],
    }
    tmp = cfg.checkpoint_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(state, fh)
    os.replace(tmp, cfg.checkpoint_path)


def _restore_classes(state: dict, planned: list[ClassResult]) -> list[ClassResult]:
    by_seq = {tuple(c["sequence"]): c for c in state["classes"]}
    out = []
    for cls in planned:
        got = by_seq.get(cls.sequence)
        if got is None:
            out.append(cls)
            continue
        out.append(
            ClassResult(
                sequence=cls.sequence,
                class_size=cls.class_size,
                pairs_planned=cls.pairs_planned,
                pairs_tested=got["pairs_tested"],
                witness_count=got["witness_count"],
                witnessless=[
                    WitnesslessPair(
                        sequence=tuple(w["sequence"]),
                        graph1=w["graph1"],
                        graph2=w["graph2"],
                        same_scc=w["same_scc"],
                    )
                    for w in got["witnessless"]
                ],
            )
        )
    return out


def verify_pc_conjecture(cfg: SweepConfig, *, stop_after_pairs: Optional[int] = None) -> PCSweepResult:
    """Scan same-out-degree-sequence pairs for parentally closed witnesses.

    Classes whose graphs are complete are skipped (the criterion does not
    apply to complete graphs).  Witness-less pairs are recorded with the SCC
    comparison: identical components fall under the conjecture's carve-out,
    differing components are true counterexamples.

    `stop_after_pairs` aborts mid-sweep after checkpointing (used by the
    resumability tests).
    """
    start_time = time.time()
    classes_raw = outdegree_classes(cfg.n)
    complete_edges = cfg.n * (cfg.n - 1) // 2
    skipped = 0
    plan: list[tuple[tuple[int, ...], np.ndarray, int]] = []
    results: list[ClassResult] = []
    for seq, members in classes_raw:
        if sum(seq) == complete_edges:
            skipped += 1
            continue
        if len(members) < 2:
            continue
        n_pairs, _ = _class_pair_stream(seq, members, cfg)
        plan.append((seq, members, n_pairs))
        results.append(ClassResult(sequence=seq, class_size=len(members), pairs_planned=n_pairs))

    done_pairs = 0
    state = _load_checkpoint(cfg)
    if state is not None:
        done_pairs = state["done_pairs"]
        results = _restore_classes(state, results)

    def global_pairs() -> Iterator[tuple[int, tuple[int, int]]]:
        for cls_idx, (seq, members, _) in enumerate(plan):
            _, stream = _class_pair_stream(seq, members, cfg)
            for pair in stream:
                yield cls_idx, pair

    stream = global_pairs()
    if done_pairs:
        next(islice(stream, done_pairs - 1, done_pairs), None)

    pool = None
    ctx = get_context("fork")
    if cfg.workers > 1:
        pool = ctx.Pool(cfg.workers)
    try:
        while True:
            budget = cfg.checkpoint_every
            if stop_after_pairs is not None:
                budget = min(budget, max(0, stop_after_pairs - done_pairs))
                if budget == 0:
                    break
            batch = list(islice(stream, budget))
            if not batch:
                break
            by_class: dict[int, list[tuple[int, int]]] = {}
            for cls_idx, pair in batch:
                by_class.setdefault(cls_idx, []).append(pair)
            for cls_idx, pairs in by_class.items():
                cls = results[cls_idx]
                if pool is not None and len(pairs) > 64:
                    step = math.ceil(len(pairs) / cfg.workers)
                    tasks = [
                        (cfg.n, pairs[i : i + step]) for i in range(0, len(pairs), step)
                    ]
                    outs = pool.map(_pc_chunk_worker, tasks)
                else:
                    outs = [_pc_chunk_worker((cfg.n, pairs))]
                for tested, witnesses, witnessless in outs:
                    cls.pairs_tested += tested
                    cls.witness_count += witnesses
                    cls.witnessless.extend(witnessless)
            done_pairs += len(batch)
            _store_checkpoint(cfg, done_pairs, results)
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    result = PCSweepResult(
        config=cfg,
        classes=results,
        skipped_complete_classes=skipped,
        runtime_seconds=time.time() - start_time,
    )
    if cfg.out_path and (stop_after_pairs is None):
        write_pc_report(result, cfg.out_path)
    return result


def write_pc_report(result: PCSweepResult, path: str) -> None:
    """JSON-lines report: header, one line per witness-less pair, summary.

    Partial output stays parseable; the summary line isolates the runtime
    so byte-level comparisons can drop it.
    """
    cfg = result.config
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "kind": "header",
            "tool_version": __version__,
            "n": cfg.n,
            "mode": cfg.mode,
            "sample_size": cfg.sample_size,
            "seed": cfg.seed,
            "config_hash": cfg.semantic_hash(),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for cls in result.classes:
            for w in cls.witnessless:
                fh.write(json.dumps({"kind": "witnessless", **w.to_json()}, sort_keys=True) + "\n")
        fh.write(json.dumps(result.summary_json(), sort_keys=True) + "\n")


# -- the complete-graph flip campaign -------------------------------------------


@dataclass(frozen=True)
class FlipComparison:
    orientation: tuple[int, ...]
    verdict: str
    ranks: tuple[int, int]
    flip_nodes_dominated: bool

    def to_json(self) -> dict:
        return {
            "orientation": list(self.orientation),
            "verdict": self.verdict,
            "ranks": list(self.ranks),
            "flip_nodes_dominated": self.flip_nodes_dominated,
        }


@dataclass
class CompleteSweepResult:
    p: int
    comparisons: list[FlipComparison]
    sampled: bool
    runtime_seconds: float

    @property
    def equal_count(self) -> int:
        return sum(1 for c in self.comparisons if c.verdict == "equal")

    @property
    def all_equal(self) -> bool:
        return self.equal_count == len(self.comparisons)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "pairs": len(self.comparisons),
            "equal": self.equal_count,
            "different": len(self.comparisons) - self.equal_count,
            "sampled": self.sampled,
            "comparisons": [c.to_json() for c in self.comparisons],
            "runtime_seconds": self.runtime_seconds,
        }


def flip_pair(p: int, orientation: Sequence[int]) -> tuple[Digraph, Digraph]:
    """The two complete graphs over a fixed orientation of every pair except
    (p-1, p), which is directed forward in the first and backward in the
    second."""
    pairs = [pr for pr in node_pairs(p) if pr != (p - 1, p)]
    if len(orientation) != len(pairs):
        raise HarnessError(f"orientation needs {len(pairs)} bits")
    shared = [(i, j) if d == 0 else (j, i) for (i, j), d in zip(pairs, orientation)]
    return Digraph(p, shared + [(p - 1, p)]), Digraph(p, shared + [(p, p - 1)])


def _flip_worker(task) -> FlipComparison:
    p, orientation, cfg_fields = task
    cfg = RankOracleConfig(**cfg_fields)
    ga, gb = flip_pair(p, orientation)
    cmp = matroids_equal(ga, gb, cfg)
    dominated = all(
        ga.has_edge(m, p - 1) and ga.has_edge(m, p) for m in range(1, p - 1)
    )
    return FlipComparison(tuple(orientation), cmp.verdict, cmp.ranks, dominated)


def verify_complete_conjecture(
    p: int,
    cfg: Optional[RankOracleConfig] = None,
    *,
    full: bool = False,
    sample_size: int = 1000,
    workers: int = 1,
) -> CompleteSweepResult:
    """Compare the matroids of complete-graph pairs differing only in the
    direction of the edge between p-1 and p.

    Exhaustive over the orientations of the remaining edges for p <= 5;
    for p = 6 a seeded sample of orientations unless full is set.
    """
    if not 3 <= p <= 6:
        raise HarnessError("p must be between 3 and 6")
    cfg = cfg or RankOracleConfig()
    start = time.time()
    bits = p * (p - 1) // 2 - 1
    total = 2**bits
    sampled = p >= 6 and not full and total > sample_size
    if sampled:
        rng = random.Random(cfg.seed ^ 0xC0FFEE)
        chosen = sorted({rng.randrange(total) for _ in range(sample_size)})
    else:
        chosen = range(total)
    orientations = [tuple((v >> (bits - 1 - b)) & 1 for b in range(bits)) for v in chosen]
    cfg_fields = {"prime": cfg.prime, "trials": cfg.trials, "seed": cfg.seed}
    tasks = [(p, o, cfg_fields) for o in orientations]
    if workers > 1:
        with get_context("fork").Pool(workers) as pool:
            comparisons = pool.map(_flip_worker, tasks)
    else:
        comparisons = [_flip_worker(t) for t in tasks]
    return CompleteSweepResult(p, comparisons, sampled, time.time() - start)


# -- criterion soundness sweep ---------------------------------------------------


@dataclass(frozen=True)
class _GraphProfile:
    index: int
    rank: int
    bases: frozenset
    pattern: frozenset
    sink_parents: tuple


@dataclass
class SoundnessSweepResult:
    n: int
    pairs_total: int
    fired_pairs: int
    matroid_equal_pairs: int
    soundness_violations: list[tuple[int, int, str]]
    pattern_violations: list[tuple[int, int, str]]
    gap_checked: int
    gap_failures: list[tuple[int, int, str]]
    runtime_seconds: float

    @property
    def clean(self) -> bool:
        return not (self.soundness_violations or self.pattern_violations or self.gap_failures)


_SOUNDNESS_STATE: dict = {}


def _profile_graphs(n: int, cfg: RankOracleConfig):
    graphs = list()
    oracles = list()
    profiles = list()
    for index in range(count_simple_digraphs(n)):
        g = digraph_from_index(n, index)
        oracle = RankOracle(build_jacobian(g), cfg)
        graphs.append(g)
        oracles.append(oracle)
        profiles.append(
            _GraphProfile(
                index=index,
                rank=oracle.full_rank(),
                bases=oracle.bases(),
                pattern=dependence_pattern(g),
                sink_parents=tuple(
                    (i, tuple(sorted(g.parents(i)))) for i in sorted(g.sinks())
                ),
            )
        )
    return graphs, oracles, profiles


def _soundness_chunk(task: tuple[int, int]) -> tuple:
    lo, hi = task
    graphs = _SOUNDNESS_STATE["graphs"]
    oracles = _SOUNDNESS_STATE["oracles"]
    profiles = _SOUNDNESS_STATE["profiles"]
    check_gaps = _SOUNDNESS_STATE["check_gaps"]
    total = len(graphs)
    fired_pairs = 0
    equal_pairs = 0
    soundness = []
    patterns = []
    gap_checked = 0
    gap_failures = []
    # linear index -> (a, b) with a < b, row-major over the upper triangle
    pair_idx = lo
    a, k = 0, lo
    while k >= total - a - 1:
        k -= total - a - 1
        a += 1
    b = a + 1 + k
    while pair_idx < hi:
        g1, g2 = graphs[a], graphs[b]
        p1, p2 = profiles[a], profiles[b]
        equal = p1.rank == p2.rank and p1.bases == p2.bases
        if equal:
            equal_pairs += 1
            if p1.pattern != p2.pattern:
                patterns.append((a, b, "adjacent-or-common-child pattern differs"))
            common = {i for i, _ in p1.sink_parents} & {i for i, _ in p2.sink_parents}
            pa1 = dict(p1.sink_parents)
            pa2 = dict(p2.sink_parents)
            for i in sorted(common):
                if pa1[i] != pa2[i]:
                    patterns.append((a, b, f"parents of common sink {i} differ"))
        witnesses = [
            ("out_degree", outdegree_criterion(g1, g2)),
            ("ttf", ttf_criterion(g1, g2)),
            ("parentally_closed", pc_criterion(g1, g2)),
        ]
        any_fired = any(w is not None for _, w in witnesses)
        if any_fired:
            fired_pairs += 1
            if equal:
                names = ",".join(name for name, w in witnesses if w is not None)
                soundness.append((a, b, f"criteria fired ({names}) on matroid-equal pair"))
        if check_gaps:
            for name, w in witnesses:
                if w is None or not w.column_set:
                    continue
                gap_checked += 1
                hi_rank = (oracles[a] if w.gap_graph == 1 else oracles[b]).rank(w.column_set)
                lo_rank = (oracles[b] if w.gap_graph == 1 else oracles[a]).rank(w.column_set)
                if not hi_rank > lo_rank:
                    gap_failures.append((a, b, f"{name} witness set has no rank gap"))
        pair_idx += 1
        b += 1
        if b >= total:
            a += 1
            b = a + 1
    return fired_pairs, equal_pairs, soundness, patterns, gap_checked, gap_failures


def criterion_soundness_sweep(
    n: int = 4,
    cfg: Optional[RankOracleConfig] = None,
    *,
    workers: int = 1,
    check_gaps: bool = True,
) -> SoundnessSweepResult:
    """Exhaustive audit over all unordered pairs of n-node graphs.

    Confirms that (a) whenever any criterion fires the matroids differ,
    (b) matroid-equal pairs have identical adjacent-or-common-child patterns
    and identical parents at common sinks, and (c) every emitted witness set
    exhibits its rank gap against the oracle.
    """
    cfg = cfg or RankOracleConfig()
    start = time.time()
    graphs, oracles, profiles = _profile_graphs(n, cfg)
    _SOUNDNESS_STATE.clear()
    _SOUNDNESS_STATE.update(
        graphs=graphs, oracles=oracles, profiles=profiles, check_gaps=check_gaps
    )
    total_pairs = len(graphs) * (len(graphs) - 1) // 2
    if workers > 1:
        step = math.ceil(total_pairs / (workers * 8))
        tasks = [(lo, min(lo + step, total_pairs)) for lo in range(0, total_pairs, step)]
        with get_context("fork").Pool(workers) as pool:
            outs = pool.map(_soundness_chunk, tasks)
    else:
        outs = [_soundness_chunk((0, total_pairs))]
    fired = sum(o[0] for o in outs)
    equal_pairs = sum(o[1] for o in outs)
    soundness = sorted(x for o in outs for x in o[2])
    patterns = sorted(x for o in outs for x in o[3])
    gap_checked = sum(o[4] for o in outs)
    gap_failures = sorted(x for o in outs for x in o[5])
    return SoundnessSweepResult(
        n=n,
        pairs_total=total_pairs,
        fired_pairs=fired,
        matroid_equal_pairs=equal_pairs,
        soundness_violations=soundness,
        pattern_violations=patterns,
        gap_checked=gap_checked,
        gap_failures=gap_failures,
        runtime_seconds=time.time() - start,
    )


# -- family classification -------------------------------------------------------


@dataclass
class FamilyReport:
    """Pairwise distinguishability of a family of graphs."""

    size: int
    pair_reports: list[tuple[int, int, str, str]]  # (i, j, decided_by, matroid verdict)
    identifiable: bool
    unique_out_degree_sequences: bool
    all_ttf_non_complete: bool
    pairwise_pc_witness: bool

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "identifiable": self.identifiable,
            "conditions": {
                "unique_out_degree_sequences": self.unique_out_degree_sequences,
                "all_transitive_triangle_free": self.all_ttf_non_complete,
                "pairwise_pc_witness": self.pairwise_pc_witness,
            },
            "pairs": [
                {"i": i, "j": j, "decided_by": d, "matroid": m}
                for i, j, d, m in self.pair_reports
            ],
        }


def classify_family(graphs: Sequence[Digraph], cfg: Optional[RankOracleConfig] = None) -> FamilyReport:
    """Pairwise identifiability of a family under the matroid criterion,
    plus which of the three sufficient family conditions hold."""
    if not graphs:
        raise HarnessError("empty family")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise HarnessError("family members must share the node count")
    cfg = cfg or RankOracleConfig()
    pair_reports = []
    all_different = True
    pc_everywhere = True
    for i, j in combinations(range(len(graphs)), 2):
        report = distinguish(graphs[i], graphs[j], cfg)
        verdict = report.matroid.verdict if report.matroid else "skipped"
        if verdict != "different":
            all_different = False
        pc_stage = next(s for s in report.stages if s.name == "parentally_closed")
        if not pc_stage.fired:
            pc_everywhere = False
        pair_reports.append((i, j, report.decided_by, verdict))
    sequences = [g.out_degree_sequence() for g in graphs]
    return FamilyReport(
        size=len(graphs),
        pair_reports=pair_reports,
        identifiable=all_different and len(graphs) > 0,
        unique_out_degree_sequences=len(set(sequences)) == len(sequences),
        all_ttf_non_complete=all(
            g.is_transitive_triangle_free() and not g.is_complete() for g in graphs
        ),
        pairwise_pc_witness=pc_everywhere if len(graphs) > 1 else True,
    )


# -- CLI ---------------------------------------------------------------------


def _envelope(cfg: RankOracleConfig) -> dict:
    return {
        "tool_version": __version__,
        "seed": cfg.seed,
        "prime": cfg.prime,
        "trials": cfg.trials,
    }


def _default_seed() -> int:
    env = os.environ.get("SEM_MATROID_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise HarnessError(f"SEM_MATROID_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _oracle_cfg(args: argparse.Namespace) -> RankOracleConfig:
    return RankOracleConfig(seed=args.seed)


def _print_jacobian_pretty(jac) -> None:
    headers = [""] + [render_column(c) for c in jac.cols]
    rows = []
    for label, row in zip(jac.rows, jac.entries):
        rows.append([render_var(label)] + [str(p) for p in row])
    widths = [max(len(r[c]) for r in [headers] + rows) for c in range(len(headers))]
    for r in [headers] + rows:
        print("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))


def _cmd_jacobian(args) -> int:
    graph = load_graph(args.graph)
    jac = build_jacobian(graph)
    if args.simplify_s_row:
        jac = simplify_s_row(jac)
    if args.format == "json":
        payload = {
            "rows": [render_var(r) for r in jac.rows],
            "cols": [render_column(c) for c in jac.cols],
            "entries": [[str(p) for p in row] for row in jac.entries],
        }
        print(json.dumps(payload, indent=2))
    else:
        _print_jacobian_pretty(jac)
    return 0


def _cmd_rank(args) -> int:
    graph = load_graph(args.graph)
    cfg = _oracle_cfg(args)
    jac = build_jacobian(graph)
    if args.columns:
        cols = [parse_column(tok, graph.n) for tok in args.columns.split(",")]
    else:
        cols = list(jac.cols)
    rank = generic_rank(jac, cols, cfg)
    if args.json:
        print(
            json.dumps(
                {
                    "rank": rank,
                    "columns": [render_column(c) for c in cols],
                    **_envelope(cfg),
                },
                indent=2,
            )
        )
    else:
        print(f"rank {rank} ({len(cols)} columns)")
    return 0


def _cmd_compare(args) -> int:
    g1, g2 = load_graph(args.graph1), load_graph(args.graph2)
    cfg = _oracle_cfg(args)
    cmp = matroids_equal(g1, g2, cfg)
    if args.json:
        print(json.dumps({**cmp.to_json(), **_envelope(cfg)}, indent=2))
    else:
        print(f"verdict: {cmp.verdict} (ranks {cmp.ranks[0]}, {cmp.ranks[1]})")
        if cmp.witness:
            cols = ", ".join(render_column(c) for c in sorted(cmp.witness))
            print(f"witness: {{{cols}}}")
    return 0


def _cmd_criteria(args) -> int:
    g1, g2 = load_graph(args.graph1), load_graph(args.graph2)
    nec = necessary_condition_checks(g1, g2)
    outcomes = {
        "necessary_conditions": nec.to_json(),
        "out_degree": (w := outdegree_criterion(g1, g2)) and w.to_json(),
        "transitive_triangle_free": (w := ttf_criterion(g1, g2)) and w.to_json(),
        "parentally_closed": (w := pc_criterion(g1, g2)) and w.to_json(),
    }
    if args.json:
        print(json.dumps(outcomes, indent=2))
    else:
        for name, out in outcomes.items():
            if name == "necessary_conditions":
                state = "violated" if nec.certifies_different else "consistent"
                print(f"{name}: {state}")
            else:
                print(f"{name}: {'fired' if out else 'absent'}")
    return 0


def _cmd_pc_sets(args) -> int:
    graph = load_graph(args.graph)
    sets = [sorted(pc.members) for pc in pc_sets(graph, args.node)]
    if args.json:
        print(json.dumps({"node": args.node, "pc_sets": sets}, indent=2))
    else:
        for members in sets:
            print("{" + ", ".join(map(str, members)) + "}")
    return 0


def _cmd_distinguish(args) -> int:
    g1, g2 = load_graph(args.graph1), load_graph(args.graph2)
    cfg = _oracle_cfg(args)
    report = distinguish(g1, g2, cfg, skip_matroid=args.skip_matroid)
    if args.json:
        print(json.dumps({**report.to_json(), **_envelope(cfg)}, indent=2))
    else:
        for stage in report.stages:
            print(f"{stage.name}: {'fired' if stage.fired else 'absent'}")
        if report.matroid:
            print(f"matroid: {report.matroid.verdict}")
        print(f"decided_by: {report.decided_by}")
    return 0


def _cmd_verify_pc(args) -> int:
    mode = "sampled" if (args.sample is not None or args.n >= 6) else "exhaustive"
    cfg = SweepConfig(
        n=args.n,
        mode=mode,
        sample_size=args.sample if args.sample is not None else DEFAULT_SAMPLE_SIZE,
        seed=args.seed,
        workers=args.workers,
        out_path=args.out,
        checkpoint_path=args.checkpoint,
    )
    result = verify_pc_conjecture(cfg)
    summary = result.summary_json()
    print(json.dumps({**summary, **_envelope(RankOracleConfig(seed=args.seed))}, indent=2))
    return 0


def _cmd_verify_complete(args) -> int:
    cfg = RankOracleConfig(seed=args.seed)
    result = verify_complete_conjecture(
        args.p, cfg, full=args.full, workers=args.workers
    )
    payload = result.to_json()
    if not args.verbose:
        payload.pop("comparisons")
    print(json.dumps({**payload, **_envelope(cfg)}, indent=2))
    return 0


def _cmd_classify(args) -> int:
    graphs = [load_graph(path) for path in args.graphs]
    cfg = _oracle_cfg(args)
    report = classify_family(graphs, cfg)
    print(json.dumps({**report.to_json(), **_envelope(cfg)}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sem-matroid",
        description="Identifiability queries for homoscedastic linear SEMs on simple digraphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=_default_seed(), help="master seed")

    p = sub.add_parser("jacobian", help="print the symbolic Jacobian of a graph")
    p.add_argument("graph")
    p.add_argument("--simplify-s-row", action="store_true")
    p.add_argument("--format", choices=["pretty", "json"], default="pretty")
    p.set_defaults(func=_cmd_jacobian)

    p = sub.add_parser("rank", help="generic rank of a column set")
    p.add_argument("graph")
    p.add_argument("--columns", help="comma-separated labels, e.g. K11,K12")
    p.add_argument("--json", action="store_true")
    add_seed(p)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("compare", help="decide whether two graphs share their matroid")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--json", action="store_true")
    add_seed(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("criteria", help="run the graphical criteria on a pair")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_criteria)

    p = sub.add_parser("pc-sets", help="list parentally closed sets of a node")
    p.add_argument("graph")
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_pc_sets)

    p = sub.add_parser("distinguish", help="full criterion cascade plus matroid oracle")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--json", action="store_true")
    p.add_argument("--skip-matroid", action="store_true")
    add_seed(p)
    p.set_defaults(func=_cmd_distinguish)

    p = sub.add_parser("verify-pc-conjecture", help="pairwise witness sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sample", type=int, default=None, help="pairs per class")
    p.add_argument("--out", default=None, help="JSON-lines report path")
    p.add_argument("--checkpoint", default=None, help="checkpoint sidecar path")
    p.add_argument("--workers", type=int, default=1)
    add_seed(p)
    p.set_defaults(func=_cmd_verify_pc)

    p = sub.add_parser("verify-complete-conjecture", help="single-edge flips of complete graphs")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--full", action="store_true", help="no sampling at p=6")
    p.add_argument("--verbose", action="store_true", help="include per-pair verdicts")
    p.add_argument("--workers", type=int, default=1)
    add_seed(p)
    p.set_defaults(func=_cmd_verify_complete)

    p = sub.add_parser("classify", help="pairwise identifiability of a graph family")
    p.add_argument("graphs", nargs="+")
    add_seed(p)
    p.set_defaults(func=_cmd_classify)

    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (GraphError, JacobianError, MatroidError, CriterionError, HarnessError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
