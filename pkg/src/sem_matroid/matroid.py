"""Rank oracle for the Jacobian column matroid over F_q, matroid equality
testing, and distinguishing-set search.

Independence of a column set is decided by evaluating the symbolic Jacobian
at random points of F_q and taking the maximum rank over a few trials.  The
evaluated rank never exceeds the generic rank, and equals it except with
probability at most (d/q) per trial for a degree-d minor (Schwartz-Zippel),
so rank underestimates -- the only failure mode -- are vanishingly rare for
q = 2^61 - 1.  The slow-but-exact counterpart `exact_rank` does fraction-free
elimination directly on the polynomial entries and exists to audit the
randomized oracle.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .digraph import Digraph
from .jacobian import (
    ColumnIndex,
    Jacobian,
    Polynomial,
    VarKey,
    S_KEY,
    build_jacobian,
    lam_key,
)

MERSENNE_61 = 2**61 - 1
DEFAULT_SEED = 1000003


class MatroidError(ValueError):
    pass


def _is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 2^64."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class RankOracleConfig:
    """Randomized rank oracle parameters.

    Attributes:
        prime: Field size q; must be prime and comfortably larger than the
            degree bound of the Jacobian minors.
        trials: Number of random evaluation points; the reported rank is the
            maximum over trials.
        seed: 64-bit master seed; trial points are derived from
            (seed, graph key, trial index) so runs are reproducible and
            independent of worker scheduling.
    """

    prime: int = MERSENNE_61
    trials: int = 3
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.trials < 1:
            raise MatroidError("trials must be >= 1")
        if not _is_probable_prime(self.prime):
            raise MatroidError(f"{self.prime} is not prime")

    def failure_bound(self, rows: int) -> float:
        """(degree bound / q) ** trials with degree bound 2 * rows."""
        return float((2 * rows) / self.prime) ** self.trials


def trial_assignment(graph: Digraph, cfg: RankOracleConfig, trial: int) -> dict[VarKey, int]:
    """The deterministic random point for one trial: coordinatewise uniform
    over F_q, with s resampled until nonzero."""
    material = f"{cfg.seed}:{graph.key()}:{trial}".encode()
    rng = random.Random(int.from_bytes(hashlib.sha256(material).digest()[:16], "big"))
    assignment = {lam_key(k, l): rng.randrange(cfg.prime) for k, l in graph.edges}
    s = 0
    while s == 0:
        s = rng.randrange(cfg.prime)
    assignment[S_KEY] = s
    return assignment


# -- F_q linear algebra -------------------------------------------------------


def _reduce_against(
    vec: Sequence[int], pivots: list[tuple[int, tuple[int, ...]]], p: int
) -> Optional[tuple[int, tuple[int, ...]]]:
    """Reduce a column vector against normalized pivots; returns the new
    (pivot row, normalized vector) or None when the vector is in the span."""
    v = list(vec)
    for row, pvec in pivots:
        c = v[row]
        if c:
            v = [(a - c * b) % p for a, b in zip(v, pvec)]
    for row, a in enumerate(v):
        if a:
            inv = pow(a, p - 2, p)
            return row, tuple(x * inv % p for x in v)
    return None


def matrix_rank_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix over F_p (columns reduced left to right)."""
    if not rows:
        return 0
    columns = list(zip(*rows))
    pivots: list[tuple[int, tuple[int, ...]]] = []
    for vec in columns:
        res = _reduce_against(vec, pivots, p)
        if res is not None:
            pivots.append(res)
    return len(pivots)


class RankOracle:
    """Randomized independence oracle for the columns of one Jacobian.

    Evaluates the Jacobian once per trial and answers rank queries on column
    subsets by Gaussian elimination over F_q.
    """

    def __init__(self, jac: Jacobian, cfg: Optional[RankOracleConfig] = None):
        self.cfg = cfg or RankOracleConfig()
        self.jac = jac
        n_rows = len(jac.rows)
        if self.cfg.prime <= 4 * n_rows:
            raise MatroidError(
                f"prime {self.cfg.prime} too small for degree bound {2 * n_rows}"
            )
        self.cols = jac.cols
        self._pos = {c: i for i, c in enumerate(jac.cols)}
        # One column-major integer matrix per trial.
        self._trials: list[list[tuple[int, ...]]] = []
        for t in range(self.cfg.trials):
            assignment = trial_assignment(jac.graph, self.cfg, t)
            rows = [
                [poly.evaluate_mod(assignment, self.cfg.prime) for poly in row]
                for row in jac.entries
            ]
            self._trials.append([tuple(col) for col in zip(*rows)])

    # -- rank queries ------------------------------------------------------

    def _positions(self, cols: Iterable[ColumnIndex]) -> list[int]:
        out = []
        for c in cols:
            if c not in self._pos:
                raise MatroidError(f"column {c} not in the Jacobian")
            out.append(self._pos[c])
        return sorted(set(out))

    def rank(self, cols: Iterable[ColumnIndex]) -> int:
        """Max over trials of the rank of the selected columns."""
        positions = self._positions(cols)
        best = 0
        for trial in self._trials:
            pivots: list[tuple[int, tuple[int, ...]]] = []
            for pos in positions:
                res = _reduce_against(trial[pos], pivots, self.cfg.prime)
                if res is not None:
                    pivots.append(res)
            best = max(best, len(pivots))
            if best == len(positions):
                break
        return best

    def is_independent(self, cols: Iterable[ColumnIndex]) -> bool:
        positions = self._positions(cols)
        return self.rank(self.cols[p] for p in positions) == len(positions)

    def full_rank(self) -> int:
        return self.rank(self.cols)

    def lex_first_basis(self) -> frozenset[ColumnIndex]:
        """Lexicographically first maximum independent set, in column order."""
        r = self.full_rank()
        best: Optional[tuple[int, ...]] = None
        for trial in self._trials:
            pivots: list[tuple[int, tuple[int, ...]]] = []
            chosen: list[int] = []
            for pos in range(len(self.cols)):
                res = _reduce_against(trial[pos], pivots, self.cfg.prime)
                if res is not None:
                    pivots.append(res)
                    chosen.append(pos)
                    if len(chosen) == r:
                        break
            if len(chosen) == r:
                cand = tuple(chosen)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise MatroidError("no trial attains the full rank")
        return frozenset(self.cols[p] for p in best)

    # -- independent-set DFS -------------------------------------------------

    def _initial_state(self) -> list[tuple[int, list]]:
        return [(t, []) for t in range(len(self._trials))]

    def _advance(self, alive: list[tuple[int, list]], pos: int) -> list[tuple[int, list]]:
        """Extend every surviving trial state by one column; trials where the
        column falls in the current span drop out."""
        out = []
        for t, pivots in alive:
            res = _reduce_against(self._trials[t][pos], pivots, self.cfg.prime)
            if res is not None:
                out.append((t, pivots + [res]))
        return out

    def bases(self) -> frozenset[frozenset[ColumnIndex]]:
        """All maximum independent column sets (the matroid's bases)."""
        r = self.full_rank()
        n_cols = len(self.cols)
        found: list[frozenset[ColumnIndex]] = []

        def rec(start: int, chosen: list[int], alive) -> None:
            if len(chosen) == r:
                found.append(frozenset(self.cols[p] for p in chosen))
                return
            for pos in range(start, n_cols - (r - len(chosen)) + 1):
                nxt = self._advance(alive, pos)
                if nxt:
                    chosen.append(pos)
                    rec(pos + 1, chosen, nxt)
                    chosen.pop()

        rec(0, [], self._initial_state())
        return frozenset(found)


# -- public operations ---------------------------------------------------------


def generic_rank(
    jac: Jacobian, cols: Iterable[ColumnIndex], cfg: Optional[RankOracleConfig] = None
) -> int:
    """Generic rank of a column subset via randomized evaluation."""
    return RankOracle(jac, cfg).rank(cols)


def is_independent(
    jac: Jacobian, cols: Iterable[ColumnIndex], cfg: Optional[RankOracleConfig] = None
) -> bool:
    return RankOracle(jac, cfg).is_independent(cols)


def matroid_rank(graph: Digraph, cfg: Optional[RankOracleConfig] = None) -> int:
    """Rank of the whole Jacobian matroid (|D| + 1 for simple graphs)."""
    return RankOracle(build_jacobian(graph), cfg).full_rank()


EXACT_RANK_ENTRY_GUARD = 400


def exact_rank(jac: Jacobian, cols: Optional[Iterable[ColumnIndex]] = None) -> int:
    """Rank over the fraction field by fraction-free (Bareiss) elimination
    on the polynomial entries.

    An audit oracle, not a production path: intermediate entries are minors
    whose degree grows with each step, so the size is guarded.
    """
    col_list = list(cols) if cols is not None else list(jac.cols)
    positions = [jac.col_position(c) for c in col_list]
    n_rows = len(jac.rows)
    if len(positions) * n_rows > EXACT_RANK_ENTRY_GUARD:
        raise MatroidError(
            f"exact_rank guard: {len(positions) * n_rows} entries exceeds "
            f"{EXACT_RANK_ENTRY_GUARD}"
        )
    matrix = [[jac.entries[r][p] for p in positions] for r in range(n_rows)]
    return _bareiss_rank(matrix)


def _bareiss_rank(matrix: list[list[Polynomial]]) -> int:
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if matrix else 0
    prev = Polynomial.constant(1)
    k = 0
    while k < min(n_rows, n_cols):
        pivot = None
        for j in range(k, n_cols):
            for i in range(k, n_rows):
                if not matrix[i][j].is_zero():
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            return k
        pi, pj = pivot
        if pi != k:
            matrix[pi], matrix[k] = matrix[k], matrix[pi]
        if pj != k:
            for row in matrix:
                row[pj], row[k] = row[k], row[pj]
        piv = matrix[k][k]
        for i in range(k + 1, n_rows):
            row_i = matrix[i]
            head = row_i[k]
            for j in range(k + 1, n_cols):
                num = piv * row_i[j] - head * matrix[k][j]
                row_i[j] = num.divexact(prev)
            row_i[k] = Polynomial.zero()
        prev = piv
        k += 1
    return k


# -- matroid comparison ----------------------------------------------------


@dataclass(frozen=True)
class MatroidComparison:
    """Outcome of comparing two Jacobian matroids.

    When the verdict is "different", `witness` is a column set independent
    in exactly one of the two matroids.
    """

    verdict: str  # "equal" | "different"
    witness: Optional[frozenset[ColumnIndex]]
    ranks: tuple[int, int]
    failure_bound: float
    prime: int
    trials: int
    seed: int

    @property
    def equal(self) -> bool:
        return self.verdict == "equal"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": [[str(i), str(j)] for i, j in sorted(self.witness)]
            if self.witness is not None
            else None,
            "ranks": list(self.ranks),
            "failure_bound": self.failure_bound,
            "prime": self.prime,
            "trials": self.trials,
            "seed": self.seed,
        }


DEFAULT_SUBSET_CAP = 10**7


def _xor_independent(o1: RankOracle, o2: RankOracle, cols: frozenset[ColumnIndex]) -> bool:
    return o1.is_independent(cols) != o2.is_independent(cols)


def _lex_first_completion(
    oracle: RankOracle, alive, chosen: list[int], start: int, r: int
) -> Optional[tuple[int, ...]]:
    """Lex-first extension of `chosen` to an independent r-set using columns
    at positions >= start, or None.  Greedy per trial is lex-minimal by the
    exchange property; the answer is the minimum over surviving trials."""
    n_cols = len(oracle.cols)
    best: Optional[tuple[int, ...]] = None
    for t, pivots in alive:
        trial = oracle._trials[t]
        p = oracle.cfg.prime
        pv = list(pivots)
        picked = list(chosen)
        for pos in range(start, n_cols):
            if len(picked) == r:
                break
            res = _reduce_against(trial[pos], pv, p)
            if res is not None:
                pv.append(res)
                picked.append(pos)
        if len(picked) == r:
            cand = tuple(picked)
            if best is None or cand < best:
                best = cand
    return best


def _first_disagreeing_rset(
    o1: RankOracle, o2: RankOracle, r: int
) -> Optional[frozenset[ColumnIndex]]:
    """Lexicographically first size-r column set independent in exactly one
    of the two matroids, or None when the matroids have identical bases.

    Depth-first over column positions in order; prefixes dependent in both
    matroids are pruned (every completion is dependent in both), and once a
    prefix is dependent in exactly one matroid the lex-first completion that
    is independent in the other -- if any -- is located greedily.
    """
    cols = o1.cols
    n_cols = len(cols)

    def rec(start: int, chosen: list[int], alive1, alive2) -> Optional[tuple[int, ...]]:
        if len(chosen) == r:
            return tuple(chosen) if bool(alive1) != bool(alive2) else None
        for pos in range(start, n_cols - (r - len(chosen)) + 1):
            nxt1 = o1._advance(alive1, pos)
            nxt2 = o2._advance(alive2, pos)
            if not nxt1 and not nxt2:
                continue
            chosen.append(pos)
            if not nxt1:
                res = _lex_first_completion(o2, nxt2, chosen, pos + 1, r)
            elif not nxt2:
                res = _lex_first_completion(o1, nxt1, chosen, pos + 1, r)
            else:
                res = rec(pos + 1, chosen, nxt1, nxt2)
            chosen.pop()
            if res is not None:
                return res
        return None

    res = rec(0, [], o1._initial_state(), o2._initial_state())
    if res is None:
        return None
    return frozenset(cols[p] for p in res)


def _shrink_disagreeing(
    o1: RankOracle, o2: RankOracle, witness: frozenset[ColumnIndex]
) -> frozenset[ColumnIndex]:
    """Greedy minimization: repeatedly drop an element while the set stays
    independent in exactly one matroid, trying the largest column label first."""
    pos = {c: i for i, c in enumerate(o1.cols)}
    current = set(witness)
    while True:
        for col in sorted(current, key=lambda c: pos[c], reverse=True):
            smaller = frozenset(current - {col})
            if smaller and _xor_independent(o1, o2, smaller):
                current = set(smaller)
                break
        else:
            return frozenset(current)


def matroids_equal(
    g1: Digraph,
    g2: Digraph,
    cfg: Optional[RankOracleConfig] = None,
    *,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> MatroidComparison:
    """Decide whether two graphs have the same Jacobian matroid.

    A matroid is determined by its bases, so when the ranks agree it
    suffices to compare independence of every column set of the common rank
    r.  When the ranks differ, any maximum independent set of the larger
    matroid already separates them.  The returned witness is minimized by
    greedy element removal.
    """
    if g1.n != g2.n:
        raise MatroidError("graphs must have the same node count")
    cfg = cfg or RankOracleConfig()
    o1 = RankOracle(build_jacobian(g1), cfg)
    o2 = RankOracle(build_jacobian(g2), cfg)
    r1, r2 = o1.full_rank(), o2.full_rank()
    bound = cfg.failure_bound(max(len(o1.jac.rows), len(o2.jac.rows)))

    def comparison(verdict: str, witness) -> MatroidComparison:
        return MatroidComparison(
            verdict=verdict,
            witness=witness,
            ranks=(r1, r2),
            failure_bound=bound,
            prime=cfg.prime,
            trials=cfg.trials,
            seed=cfg.seed,
        )

    if r1 != r2:
        # A maximum independent set of the larger matroid exceeds the rank of
        # the smaller, so it is dependent there; no search needed.
        larger = o1 if r1 > r2 else o2
        return comparison("different", larger.lex_first_basis())
    r = r1
    if math.comb(len(o1.cols), r) > subset_cap:
        raise MatroidError(
            f"comparison would scan C({len(o1.cols)}, {r}) > {subset_cap} column sets"
        )
    first = _first_disagreeing_rset(o1, o2, r)
    if first is None:
        return comparison("equal", None)
    return comparison("different", _shrink_disagreeing(o1, o2, first))


def _first_xor_set_of_size(o1: RankOracle, o2: RankOracle, size: int) -> Optional[frozenset]:
    """Lex-first size-`size` set independent in exactly one matroid, assuming
    no smaller such set exists (prefixes are then independent in both or
    dependent in both, and the latter prune)."""
    n_cols = len(o1.cols)

    def rec(start: int, chosen: list[int], alive1, alive2) -> Optional[tuple[int, ...]]:
        for pos in range(start, n_cols - (size - len(chosen)) + 1):
            nxt1 = o1._advance(alive1, pos)
            nxt2 = o2._advance(alive2, pos)
            if bool(nxt1) != bool(nxt2):
                return tuple(chosen + [pos])
            if not nxt1 and not nxt2:
                continue
            if len(chosen) + 1 < size:
                chosen.append(pos)
                res = rec(pos + 1, chosen, nxt1, nxt2)
                chosen.pop()
                if res is not None:
                    return res
        return None

    if size == 0:
        return None
    res = rec(0, [], o1._initial_state(), o2._initial_state())
    if res is None:
        return None
    return frozenset(o1.cols[p] for p in res)


def find_distinguishing_set(
    g1: Digraph,
    g2: Digraph,
    cfg: Optional[RankOracleConfig] = None,
    *,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> Optional[frozenset[ColumnIndex]]:
    """A minimum-size column set independent in exactly one of the two
    Jacobian matroids, or None when the matroids are equal.

    Searches by increasing size starting from 1; any set found this way is
    both minimum-cardinality and inclusion-minimal.
    """
    if g1.n != g2.n:
        raise MatroidError("graphs must have the same node count")
    if g1.edges == g2.edges:
        return None
    cfg = cfg or RankOracleConfig()
    o1 = RankOracle(build_jacobian(g1), cfg)
    o2 = RankOracle(build_jacobian(g2), cfg)
    r1, r2 = o1.full_rank(), o2.full_rank()
    if r1 == r2:
        if math.comb(len(o1.cols), r1) > subset_cap:
            raise MatroidError(
                f"comparison would scan C({len(o1.cols)}, {r1}) > {subset_cap} column sets"
            )
        if _first_disagreeing_rset(o1, o2, r1) is None:
            return None
    for size in range(1, max(r1, r2) + 1):
        found = _first_xor_set_of_size(o1, o2, size)
        if found is not None:
            return found
    raise MatroidError("matroids differ but no distinguishing set found")
