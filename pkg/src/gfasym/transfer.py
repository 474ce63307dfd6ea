"""Rational generating functions from weighted digraphs and forbidden
substrings.

A walk generating function is a resolvent entry of the weight matrix,
computed fraction-free as a cofactor over the determinant.  Substring
avoidance is handled by the connector construction: overlap matrices V
and word-weight diagonal L combine into a single rational function whose
coefficients count words by symbol composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .polycore import (
    AnalysisRefusal,
    MultiPoly,
    det_bareiss,
    parse_poly,
)
from .series_oracle import RationalGF

MAX_MATRIX = 12

_DEFAULT_VARS = ("x", "y", "z", "w")


def _minor(m: list[list[MultiPoly]], row: int, col: int) -> MultiPoly:
    n = len(m)
    if n == 1:
        return MultiPoly.const(m[0][0].vars, 1)
    sub = [[m[a][b] for b in range(n) if b != col]
           for a in range(n) if a != row]
    return det_bareiss(sub)


def adjugate(m: list[list[MultiPoly]]) -> tuple[list[list[MultiPoly]],
                                                MultiPoly]:
    """(adj(m), det(m)) with m * adj(m) = det(m) * I exactly."""
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    if n > MAX_MATRIX:
        raise AnalysisRefusal(
            "matrix-too-large",
            f"matrix size {n} exceeds the supported cap {MAX_MATRIX}")
    det = det_bareiss(m)
    adj = [[_minor(m, b, a) if (a + b) % 2 == 0 else -_minor(m, b, a)
            for b in range(n)] for a in range(n)]
    return adj, det


@dataclass
class WeightedDigraph:
    """Finite digraph with monomial edge weights.

    Every weight must be a single monomial with coefficient 1 and total
    degree at least 1, so each step consumes at least one unit and the
    walk family per monomial is finite.
    """

    vertices: tuple[str, ...]
    edges: list[tuple[str, str, MultiPoly]]
    variables: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        if not self.vertices:
            raise ValueError("need at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        if len(self.vertices) > MAX_MATRIX:
            raise AnalysisRefusal(
                "matrix-too-large",
                f"{len(self.vertices)} vertices exceed the supported cap "
                f"{MAX_MATRIX}")
        seen = set()
        tvars = None
        for a, b, w in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a!r}, {b!r}) uses unknown vertices")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a!r}, {b!r})")
            seen.add((a, b))
            if len(w.terms) != 1:
                raise ValueError("edge weights must be single monomials")
            (e, c), = w.terms.items()
            if c != 1:
                raise ValueError("edge weights must have coefficient 1")
            if sum(e) < 1:
                raise ValueError("edge weights must have positive degree")
            if tvars is None:
                tvars = w.vars
            elif w.vars != tvars:
                raise ValueError("edge weights must share one variable set")
        self.variables = tvars if tvars is not None else ("x",)

    def weight_matrix(self) -> list[list[MultiPoly]]:
        n = len(self.vertices)
        idx = {v: i for i, v in enumerate(self.vertices)}
        zero = MultiPoly.zero(self.variables)
        m = [[zero for _ in range(n)] for _ in range(n)]
        for a, b, w in self.edges:
            m[idx[a]][idx[b]] = w
        return m


def transfer_gf(g: WeightedDigraph, i: str, j: str) -> RationalGF:
    """Walk generating function from vertex i to vertex j.

    The (i, j) resolvent entry of the weight matrix A:
    (-1)^(i+j) det(I - A with row j and column i removed) / det(I - A).
    Includes the empty walk when i = j.
    """
    if i not in g.vertices or j not in g.vertices:
        raise ValueError("unknown vertex")
    ii, jj = g.vertices.index(i), g.vertices.index(j)
    a = g.weight_matrix()
    n = len(g.vertices)
    one = MultiPoly.const(g.variables, 1)
    m = [[(one if r == c else MultiPoly.zero(g.variables)) - a[r][c]
          for c in range(n)] for r in range(n)]
    num = _minor(m, jj, ii)
    if (ii + jj) % 2 == 1:
        num = -num
    den = det_bareiss(m)
    num, den = _normalize_pair(num, den)
    return RationalGF.from_polys(num, den, combinatorial=True)


def _normalize_pair(num: MultiPoly,
                    den: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    """Clear joint rational content and pin den's constant term positive."""
    if not den:
        raise ZeroDivisionError("denominator is the zero polynomial")
    coeffs = [c for c in num.terms.values()] + [c for c in den.terms.values()]
    denoms = 1
    for c in coeffs:
        denoms = denoms * c.denominator // _gcd(denoms, c.denominator)
    nums = 0
    for c in coeffs:
        nums = _gcd(nums, abs(c.numerator * denoms // c.denominator))
    scale = Fraction(denoms, nums if nums else 1)
    c0 = den.constant_term() if den.constant_term() != 0 else \
        next(iter(sorted(den.terms.items())))[1]
    if c0 < 0:
        scale = -scale
    return num.scale(scale), den.scale(scale)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass
class ForbiddenSpec:
    """A finite set of forbidden substrings over a d-letter alphabet.

    Words are symbol tuples over 0..d-1 (strings of digits accepted).
    The set must be an antichain under the factor order: no word may
    occur inside another, otherwise the shorter one subsumes it and the
    overlap construction double-counts.
    """

    alphabet: int
    words: list
    variables: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.alphabet < 1:
            raise ValueError("alphabet size must be positive")
        norm = []
        for w in self.words:
            t = tuple(int(s) for s in w)
            if not t:
                raise ValueError("words must be nonempty")
            if any(s < 0 or s >= self.alphabet for s in t):
                raise ValueError(f"word {w!r} uses symbols outside the "
                                 "alphabet")
            norm.append(t)
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate forbidden words")
        for a in norm:
            for b in norm:
                if a is not b and _is_factor(a, b):
                    raise ValueError(
                        f"word {a} occurs inside {b}; the set must be an "
                        "antichain")
        self.words = norm
        if self.variables is None:
            if self.alphabet <= len(_DEFAULT_VARS):
                self.variables = _DEFAULT_VARS[:self.alphabet]
            else:
                self.variables = tuple(f"x{i + 1}"
                                       for i in range(self.alphabet))
        else:
            self.variables = tuple(self.variables)
            if len(self.variables) != self.alphabet:
                raise ValueError("need one variable per symbol")

    def word_weight(self, word: tuple) -> MultiPoly:
        e = [0] * self.alphabet
        for s in word:
            e[s] += 1
        return MultiPoly(self.variables, {tuple(e): Fraction(1)})


def _is_factor(a: tuple, b: tuple) -> bool:
    return any(b[k:k + len(a)] == a for k in range(len(b) - len(a) + 1))


def connector_matrix(spec: ForbiddenSpec) -> tuple[list[list[MultiPoly]],
                                                   list[list[MultiPoly]]]:
    """Overlap matrix V and word-weight diagonal L.

    V[i][j] sums the weight of the unshared prefix alpha over the
    decompositions w_i = alpha beta, w_j = beta gamma where beta is a
    nonempty proper suffix of w_i matching a prefix of w_j.
    """
    n = len(spec.words)
    zero = MultiPoly.zero(spec.variables)
    V = [[zero for _ in range(n)] for _ in range(n)]
    L = [[zero for _ in range(n)] for _ in range(n)]
    for i, wi in enumerate(spec.words):
        L[i][i] = spec.word_weight(wi)
        for j, wj in enumerate(spec.words):
            acc = zero
            for k in range(1, len(wi)):
                beta = wi[k:]
                if len(beta) <= len(wj) and wj[:len(beta)] == beta:
                    acc = acc + spec.word_weight(wi[:k])
            V[i][j] = acc
    return V, L


def connector_gf(spec: ForbiddenSpec) -> RationalGF:
    """Words avoiding every forbidden substring, counted by composition.

    F = G / H with G = det(I + V) and
    H = (1 - sum of variables) G + sum of adj(I + V) entries weighted
    columnwise by L, which realizes the resolvent trace without leaving
    the polynomial ring.
    """
    V, L = connector_matrix(spec)
    n = len(spec.words)
    one = MultiPoly.const(spec.variables, 1)
    if n == 0:
        num = one
        den = one - _var_sum(spec.variables)
        return RationalGF.from_polys(num, den, combinatorial=True)
    m = [[(one if a == b else MultiPoly.zero(spec.variables)) + V[a][b]
          for b in range(n)] for a in range(n)]
    adj, det = adjugate(m)
    if not det:
        raise AnalysisRefusal(
            "singular-overlap-matrix",
            "det(I + V) is identically zero")
    h = (one - _var_sum(spec.variables)) * det
    for a in range(n):
        for b in range(n):
            h = h + adj[a][b] * L[b][b]
    num, den = _normalize_pair(det, h)
    return RationalGF.from_polys(num, den, combinatorial=True)


def _var_sum(variables: tuple[str, ...]) -> MultiPoly:
    return parse_poly(" + ".join(variables), variables)


def diag_specialize(F: RationalGF, weights: dict) -> RationalGF:
    """Specialize variables to positive constants or one shared survivor.

    ``weights`` maps every variable of F either to a positive rational
    (substituted) or to the name of the surviving variable (set equal).
    Exponents of merged variables add.
    """
    if set(weights) != set(F.variables):
        raise ValueError("weights must cover exactly the variables of F")
    survivors = {w for w in weights.values() if isinstance(w, str)}
    if len(survivors) != 1:
        raise ValueError("exactly one surviving variable name is required")
    target = survivors.pop()
    consts = {}
    for v, w in weights.items():
        if not isinstance(w, str):
            w = Fraction(w)
            if w <= 0:
                raise ValueError("constant weights must be positive")
            consts[v] = w
        elif w != target:
            raise ValueError("all symbolic weights must share one name")

    def spec(p: MultiPoly) -> MultiPoly:
        out: dict[tuple, Fraction] = {}
        for e, c in p.terms.items():
            deg = 0
            for v, k in zip(p.vars, e):
                if v in consts:
                    c = c * consts[v] ** k
                else:
                    deg += k
            key = (deg,)
            acc = out.get(key, Fraction(0)) + c
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
        return MultiPoly((target,), out)

    num = spec(F.numerator.poly) if hasattr(F.numerator, "poly") else None
    if num is None:
        raise TypeError("diag_specialize needs a polynomial numerator")
    den = spec(F.den_poly())
    num, den = _normalize_pair(num, den)
    return RationalGF.from_polys(num, den, combinatorial=F.combinatorial)
