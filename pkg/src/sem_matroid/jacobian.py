"""Sparse exact polynomial arithmetic and the symbolic Jacobian of the
precision-matrix parameterization K = s (I - Lambda)(I - Lambda)^T.

Rows of the Jacobian are indexed by the edge weights (lexicographic) followed
by the inverse error variance s; columns by the precision entries K_ij with
i <= j, diagonals first and off-diagonals in lexicographic order.  All
coefficients are exact rationals; floating point appears only in the
finite-difference oracle at the bottom of this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .digraph import Digraph

# A variable is ("l", k, l) for the weight of edge k->l, or ("s",) for the
# inverse error variance.  Tuple comparison gives the global variable order:
# lambda variables by (k, l), then s.
VarKey = tuple
S_KEY: VarKey = ("s",)

# A monomial maps variables to positive exponents, stored as a tuple of
# (variable, exponent) pairs sorted by variable.
Monomial = tuple


class JacobianError(ValueError):
    pass


def lam_key(k: int, l: int) -> VarKey:
    return ("l", k, l)


def _mono_cmp(a: Monomial, b: Monomial) -> int:
    """Graded lexicographic order: total degree first, then lex."""
    da = sum(e for _, e in a)
    db = sum(e for _, e in b)
    if da != db:
        return -1 if da < db else 1
    ia = ib = 0
    while ia < len(a) or ib < len(b):
        va = a[ia][0] if ia < len(a) else None
        vb = b[ib][0] if ib < len(b) else None
        if va == vb:
            ea, eb = a[ia][1], b[ib][1]
            if ea != eb:
                return 1 if ea > eb else -1
            ia += 1
            ib += 1
        elif vb is None or (va is not None and va < vb):
            # a has positive exponent on an earlier variable.
            return 1
        else:
            return -1
    return 0


_MONO_KEY = cmp_to_key(_mono_cmp)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps: dict[VarKey, int] = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_div(a: Monomial, b: Monomial) -> Optional[Monomial]:
    """a / b, or None when b does not divide a."""
    exps = dict(a)
    for v, e in b:
        have = exps.get(v, 0) - e
        if have < 0:
            return None
        if have == 0:
            del exps[v]
        else:
            exps[v] = have
    return tuple(sorted(exps.items()))


Scalar = Union[int, Fraction]


class Polynomial:
    """Sparse multivariate polynomial with exact rational coefficients.

    Immutable.  Zero coefficients are never stored, so equality of the term
    maps is equality of polynomials.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                c = Fraction(coeff)
                if c:
                    clean[mono] = c
        self.terms = clean
        self._hash: Optional[int] = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial()

    @staticmethod
    def constant(c: Scalar) -> "Polynomial":
        return Polynomial({(): c})

    @staticmethod
    def variable(var: VarKey) -> "Polynomial":
        return Polynomial({((var, 1),): 1})

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e for _, e in mono) for mono in self.terms)

    def variables(self) -> frozenset:
        return frozenset(v for mono in self.terms for v, _ in mono)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise JacobianError("zero polynomial has no leading monomial")
        return max(self.terms, key=_MONO_KEY)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            nc = terms.get(mono, Fraction(0)) + c
            if nc:
                terms[mono] = nc
            else:
                terms.pop(mono, None)
        out = Polynomial.__new__(Polynomial)
        out.terms = terms
        out._hash = None
        return out

    def __neg__(self) -> "Polynomial":
        out = Polynomial.__new__(Polynomial)
        out.terms = {m: -c for m, c in self.terms.items()}
        out._hash = None
        return out

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return Polynomial()
            out = Polynomial.__new__(Polynomial)
            out.terms = {m: coeff * c for m, coeff in self.terms.items()}
            out._hash = None
            return out
        if not isinstance(other, Polynomial):
            return NotImplemented
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(m1, m2)
                nc = terms.get(mono, Fraction(0)) + c1 * c2
                if nc:
                    terms[mono] = nc
                else:
                    terms.pop(mono, None)
        out = Polynomial.__new__(Polynomial)
        out.terms = terms
        out._hash = None
        return out

    __rmul__ = __mul__

    def divexact(self, divisor: "Polynomial") -> "Polynomial":
        """Exact division; raises if the divisor does not divide self."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return Polynomial()
        dlead = divisor.leading_monomial()
        dcoeff = divisor.terms[dlead]
        rem = dict(self.terms)
        quot: dict[Monomial, Fraction] = {}
        while rem:
            rlead = max(rem, key=_MONO_KEY)
            qmono = _mono_div(rlead, dlead)
            if qmono is None:
                raise JacobianError("inexact polynomial division")
            qcoeff = rem[rlead] / dcoeff
            quot[qmono] = quot.get(qmono, Fraction(0)) + qcoeff
            for m, c in divisor.terms.items():
                mono = _mono_mul(qmono, m)
                nc = rem.get(mono, Fraction(0)) - qcoeff * c
                if nc:
                    rem[mono] = nc
                else:
                    rem.pop(mono, None)
        return Polynomial(quot)

    def diff(self, var: VarKey) -> "Polynomial":
        """Partial derivative with respect to one variable."""
        terms: dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            exps = dict(mono)
            e = exps.get(var, 0)
            if not e:
                continue
            if e == 1:
                del exps[var]
            else:
                exps[var] = e - 1
            new_mono = tuple(sorted(exps.items()))
            nc = terms.get(new_mono, Fraction(0)) + coeff * e
            if nc:
                terms[new_mono] = nc
        return Polynomial(terms)

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, assignment: Mapping[VarKey, Scalar]) -> Fraction:
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            val = coeff
            for var, e in mono:
                if var not in assignment:
                    raise JacobianError(f"unassigned variable {render_var(var)}")
                val *= Fraction(assignment[var]) ** e
            total += val
        return total

    def evaluate_mod(self, assignment: Mapping[VarKey, int], p: int) -> int:
        """Evaluate over F_p; rational coefficients become num * den^(-1)."""
        total = 0
        for mono, coeff in self.terms.items():
            val = coeff.numerator % p
            if coeff.denominator != 1:
                val = val * pow(coeff.denominator % p, p - 2, p) % p
            for var, e in mono:
                if var not in assignment:
                    raise JacobianError(f"unassigned variable {render_var(var)}")
                val = val * pow(assignment[var], e, p) % p
            total = (total + val) % p
        return total

    def evaluate_float(self, assignment: Mapping[VarKey, float]) -> float:
        total = 0.0
        for mono, coeff in self.terms.items():
            val = float(coeff)
            for var, e in mono:
                val *= assignment[var] ** e
            total += val
        return total

    # -- rendering & dunder ---------------------------------------------------

    def __str__(self) -> str:
        return render_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({render_polynomial(self)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash


ZERO = Polynomial.zero()
ONE = Polynomial.constant(1)


def lam(k: int, l: int) -> Polynomial:
    """The edge-weight variable for edge k -> l."""
    return Polynomial.variable(lam_key(k, l))


def svar() -> Polynomial:
    """The inverse error variance variable."""
    return Polynomial.variable(S_KEY)


def render_var(var: VarKey) -> str:
    if var == S_KEY:
        return "s"
    return f"l_{var[1]}_{var[2]}"


def render_polynomial(poly: Polynomial) -> str:
    """Canonical string: terms in descending graded-lex order, s factor first
    within each term (matching the usual 2*s*l_1_2 reading)."""
    if poly.is_zero():
        return "0"
    parts: list[str] = []
    for mono in sorted(poly.terms, key=_MONO_KEY, reverse=True):
        coeff = poly.terms[mono]
        factors = []
        ordered = sorted(mono, key=lambda ve: (ve[0] != S_KEY, ve[0]))
        for var, e in ordered:
            factors.append(render_var(var) if e == 1 else f"{render_var(var)}^{e}")
        mag = abs(coeff)
        if not factors or mag != 1:
            factors.insert(0, str(mag))
        term = "*".join(factors)
        if not parts:
            parts.append(term if coeff > 0 else f"-{term}")
        else:
            parts.append(f"+ {term}" if coeff > 0 else f"- {term}")
    return " ".join(parts)


# -- Jacobian ----------------------------------------------------------------

ColumnIndex = tuple[int, int]


def column_order(n: int) -> tuple[ColumnIndex, ...]:
    """All precision entries K_ij (i <= j): diagonals first, then
    off-diagonals in lexicographic order."""
    diag = [(i, i) for i in range(1, n + 1)]
    off = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return tuple(diag + off)


def row_order(graph: Digraph) -> tuple[VarKey, ...]:
    """Edge variables in lexicographic edge order, then s."""
    return tuple(lam_key(k, l) for k, l in graph.edges) + (S_KEY,)


def render_column(col: ColumnIndex) -> str:
    return f"K{col[0]}{col[1]}"


def parse_column(text: str, n: int) -> ColumnIndex:
    """Accept K11 / K_1_1 spellings (single-digit labels; the enumeration
    guard keeps n <= 7 anyway)."""
    body = text.strip()
    if not body.startswith("K"):
        raise JacobianError(f"bad column label {text!r}")
    body = body[1:]
    if "_" in body:
        parts = body.strip("_").split("_")
    else:
        parts = list(body)
    if len(parts) != 2:
        raise JacobianError(f"bad column label {text!r}")
    try:
        i, j = int(parts[0]), int(parts[1])
    except ValueError:
        raise JacobianError(f"bad column label {text!r}") from None
    if not (1 <= i <= j <= n):
        raise JacobianError(f"column {text!r} outside 1 <= i <= j <= {n}")
    return (i, j)


@dataclass(frozen=True)
class Jacobian:
    """Symbolic Jacobian of the precision parameterization of a digraph.

    Shape is (|D| + 1) x n(n+1)/2; `rows` and `cols` carry the labels and
    `entries[r][c]` the polynomial entry.
    """

    graph: Digraph
    rows: tuple[VarKey, ...]
    cols: tuple[ColumnIndex, ...]
    entries: tuple[tuple[Polynomial, ...], ...]

    def row_position(self, row: VarKey) -> int:
        return self.rows.index(row)

    def col_position(self, col: ColumnIndex) -> int:
        try:
            return self.cols.index(col)
        except ValueError:
            raise JacobianError(f"column {col} not present") from None

    def entry(self, row: VarKey, col: ColumnIndex) -> Polynomial:
        return self.entries[self.row_position(row)][self.col_position(col)]

    def column(self, col: ColumnIndex) -> tuple[Polynomial, ...]:
        c = self.col_position(col)
        return tuple(row[c] for row in self.entries)


def build_jacobian(graph: Digraph) -> Jacobian:
    """Construct the symbolic Jacobian from the closed-form entry rules.

    For edge row (k, l):
        column K_ii is 2*s*lambda_kl when k = i, else 0;
        column K_ij (i < j) is -s when {k, l} = {i, j}, s*lambda_jl when
        k = i and (j, l) is an edge, s*lambda_il when k = j and (i, l) is an
        edge, else 0.
    For the s row:
        column K_ii is 1 + sum of lambda_il^2 over children l of i;
        column K_ij picks up -lambda for an edge between i and j plus
        lambda_il * lambda_jl summed over common children l.
    """
    s = svar()
    cols = column_order(graph.n)
    rows = row_order(graph)
    matrix: list[tuple[Polynomial, ...]] = []
    for k, l in graph.edges:
        row: list[Polynomial] = []
        for i, j in cols:
            if i == j:
                row.append(s * lam(k, l) * 2 if k == i else ZERO)
            elif {k, l} == {i, j}:
                row.append(-s)
            elif k == i and graph.has_edge(j, l):
                row.append(s * lam(j, l))
            elif k == j and graph.has_edge(i, l):
                row.append(s * lam(i, l))
            else:
                row.append(ZERO)
        matrix.append(tuple(row))
    s_row: list[Polynomial] = []
    for i, j in cols:
        if i == j:
            entry = ONE
            for l in graph.children(i):
                entry = entry + lam(i, l) * lam(i, l)
        else:
            entry = ZERO
            if graph.has_edge(i, j):
                entry = entry - lam(i, j)
            if graph.has_edge(j, i):
                entry = entry - lam(j, i)
            for l in graph.children(i) & graph.children(j):
                entry = entry + lam(i, l) * lam(j, l)
        s_row.append(entry)
    matrix.append(tuple(s_row))
    return Jacobian(graph=graph, rows=rows, cols=cols, entries=tuple(matrix))


def simplify_s_row(jac: Jacobian) -> Jacobian:
    """Replace the s row by its row-reduced form.

    The reduced row is 2 on diagonal columns, minus the edge weight on
    columns of adjacent pairs, and 0 elsewhere.  The row operation behind it
    subtracts lambda_kl/(2s) times each edge row and doubles the result; the
    intermediate multiplier has s in a denominator, so we substitute the
    closed form and assert the identity after clearing denominators:

        s * new_row  ==  2*s * old_row - sum_kl lambda_kl * edge_row_kl
    """
    graph = jac.graph
    s = svar()
    new_row: list[Polynomial] = []
    for i, j in jac.cols:
        if i == j:
            new_row.append(Polynomial.constant(2))
        elif graph.has_edge(i, j):
            new_row.append(-lam(i, j))
        elif graph.has_edge(j, i):
            new_row.append(-lam(j, i))
        else:
            new_row.append(ZERO)
    old_row = jac.entries[-1]
    for c in range(len(jac.cols)):
        acc = old_row[c] * s * 2
        for r, (k, l) in enumerate(graph.edges):
            acc = acc - lam(k, l) * jac.entries[r][c]
        if s * new_row[c] != acc:
            raise JacobianError(
                f"s-row reduction mismatch at column {jac.cols[c]}"
            )
    entries = jac.entries[:-1] + (tuple(new_row),)
    return Jacobian(graph=graph, rows=jac.rows, cols=jac.cols, entries=entries)


# -- parameter points and evaluation ------------------------------------------


@dataclass(frozen=True)
class ParamPoint:
    """An exact assignment to every edge weight plus a nonzero s."""

    lambdas: Mapping[tuple[int, int], Fraction]
    s: Fraction

    def __post_init__(self):
        object.__setattr__(
            self, "lambdas", {e: Fraction(v) for e, v in dict(self.lambdas).items()}
        )
        object.__setattr__(self, "s", Fraction(self.s))
        if self.s == 0:
            raise JacobianError("s must be nonzero")

    def assignment(self, graph: Digraph) -> dict[VarKey, Fraction]:
        out: dict[VarKey, Fraction] = {S_KEY: self.s}
        for k, l in self.lambdas:
            if not graph.has_edge(k, l):
                raise JacobianError(f"lambda_({k},{l}) is not an edge of the graph")
        for k, l in graph.edges:
            if (k, l) not in self.lambdas:
                raise JacobianError(f"unassigned variable l_{k}_{l}")
            out[lam_key(k, l)] = self.lambdas[(k, l)]
        return out


def zero_point(graph: Digraph, s: Scalar = 1) -> ParamPoint:
    return ParamPoint({e: Fraction(0) for e in graph.edges}, Fraction(s))


def random_rational_point(graph: Digraph, rng, max_num: int = 20) -> ParamPoint:
    """A random exact point with small numerators/denominators; s nonzero."""
    lambdas = {
        e: Fraction(rng.randint(-max_num, max_num), rng.randint(1, 7)) for e in graph.edges
    }
    s = Fraction(0)
    while s == 0:
        s = Fraction(rng.randint(-max_num, max_num), rng.randint(1, 7))
    return ParamPoint(lambdas, s)


def evaluate(jac: Jacobian, point: ParamPoint) -> list[list[Fraction]]:
    """Entrywise exact evaluation of the Jacobian at a parameter point."""
    assignment = point.assignment(jac.graph)
    return [[p.evaluate(assignment) for p in row] for row in jac.entries]


def precision_matrix(graph: Digraph, point: ParamPoint) -> list[list[Fraction]]:
    """K = s (I - Lambda)(I - Lambda)^T, computed exactly.

    Invertibility of I - Lambda is irrelevant here: the formula is
    polynomial and well-defined at every point.
    """
    n = graph.n
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = Fraction(1)
    for k, l in graph.edges:
        m[k - 1][l - 1] = -point.lambdas[(k, l)]
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            acc = Fraction(0)
            for t in range(n):
                acc += m[i][t] * m[j][t]
            out[i][j] = out[j][i] = point.s * acc
    return out


def precision_matrix_symbolic(graph: Digraph) -> list[list[Polynomial]]:
    """K with polynomial entries; the source of truth the Jacobian differentiates."""
    n = graph.n
    m = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = ONE
    for k, l in graph.edges:
        m[k - 1][l - 1] = -lam(k, l)
    s = svar()
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            acc = ZERO
            for t in range(n):
                if not m[i][t].is_zero() and not m[j][t].is_zero():
                    acc = acc + m[i][t] * m[j][t]
            out[i][j] = out[j][i] = s * acc
    return out


def numeric_jacobian_fd(graph: Digraph, point: ParamPoint, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of (Lambda, s) -> upper triangle of K.

    Returns the matrix in the same row/column convention as build_jacobian:
    one row per edge weight (lexicographic) plus one for s, one column per
    K_ij in the global column order.  Entries of K are quadratic in the
    parameters, so central differences are exact up to rounding.
    """
    n = graph.n
    cols = column_order(n)
    edges = list(graph.edges)
    theta0 = np.array([float(point.lambdas[e]) for e in edges] + [float(point.s)])

    def k_vec(theta: np.ndarray) -> np.ndarray:
        m = np.eye(n)
        for val, (k, l) in zip(theta, edges):
            m[k - 1, l - 1] = -val
        k_mat = theta[-1] * (m @ m.T)
        return np.array([k_mat[i - 1, j - 1] for i, j in cols])

    rows = []
    for idx in range(len(theta0)):
        plus = theta0.copy()
        minus = theta0.copy()
        plus[idx] += h
        minus[idx] -= h
        rows.append((k_vec(plus) - k_vec(minus)) / (2.0 * h))
    return np.array(rows)
