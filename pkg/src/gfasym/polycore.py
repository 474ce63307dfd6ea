"""Exact polynomial arithmetic and certified univariate root isolation.

This module is the foundation of the package: sparse multivariate
polynomials over the rationals, a small grammar for reading them, exact
resultants via fraction-free elimination, Sturm-based real root isolation
with refinement, and a closed family of analytic expressions (polynomials,
sums, products, quotients, exponentials of polynomials) that supports
exact truncated series expansion about the origin and tolerance-controlled
local expansion about other points.

Coefficients are ``fractions.Fraction`` throughout the exact paths.  Local
expansions about non-rational centers carry float coefficients through the
same polynomial type; only those paths apply magnitude tolerances.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

Coeff = Union[Fraction, float, complex]
Exponent = tuple[int, ...]


class ParseError(ValueError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExactDivisionError(ArithmeticError):
    """Raised when a polynomial division expected to be exact is not."""


class SeriesPoleError(ArithmeticError):
    """Raised when a series expansion does not exist at the center."""


class AnalysisRefusal(Exception):
    """Typed refusal raised by analysis pipelines instead of guessing.

    ``code`` is a stable machine-readable tag, ``payload`` optional data
    (e.g. ranked candidates, reference values) for the report writer.
    """

    def __init__(self, code: str, message: str, payload: object = None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def _coerce(c: Coeff | int | str) -> Coeff:
    if isinstance(c, (Fraction, float, complex)):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c)!r}")


def _grlex_key(e: Exponent) -> tuple:
    return (sum(e), e)


class MultiPoly:
    """Sparse multivariate polynomial with a fixed ordered variable tuple.

    ``terms`` maps exponent tuples to nonzero coefficients.  Equality,
    printing and iteration are deterministic (graded lexicographic order,
    highest first).  Arithmetic requires both operands to share the same
    variable tuple; use :meth:`with_vars` to embed into a larger one.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str],
                 terms: Mapping[Exponent, Coeff | int] | None = None):
        self.vars: tuple[str, ...] = tuple(variables)
        clean: dict[Exponent, Coeff] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(k) for k in e)
                if len(e) != len(self.vars):
                    raise ValueError("exponent arity does not match variables")
                c = _coerce(c)
                if c != 0:
                    prev = clean.get(e)
                    if prev is None:
                        clean[e] = c
                    else:
                        s = prev + c
                        if s != 0:
                            clean[e] = s
                        else:
                            del clean[e]
        self.terms: dict[Exponent, Coeff] = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MultiPoly":
        return cls(variables, {})

    @classmethod
    def const(cls, variables: Sequence[str], c: Coeff | int) -> "MultiPoly":
        n = len(tuple(variables))
        return cls(variables, {(0,) * n: c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str]) -> "MultiPoly":
        variables = tuple(variables)
        i = variables.index(name)
        e = tuple(1 if j == i else 0 for j in range(len(variables)))
        return cls(variables, {e: 1})

    # -- basic protocol ------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, MultiPoly) and self.vars == other.vars
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def sorted_terms(self) -> list[tuple[Exponent, Coeff]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]),
                      reverse=True)

    def __repr__(self) -> str:
        return f"MultiPoly({self.vars!r}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    # -- structure -----------------------------------------------------

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def min_total_degree(self) -> int:
        if not self.terms:
            return -1
        return min(sum(e) for e in self.terms)

    def constant_term(self) -> Coeff:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def homogeneous_part(self, k: int) -> "MultiPoly":
        return MultiPoly(self.vars,
                         {e: c for e, c in self.terms.items() if sum(e) == k})

    def truncate_total(self, n: int) -> "MultiPoly":
        return MultiPoly(self.vars,
                         {e: c for e, c in self.terms.items() if sum(e) <= n})

    def coeffs_in(self, name: str) -> list["MultiPoly"]:
        """Coefficient polynomials of powers of ``name`` (index = power).

        Returned polynomials keep the full variable tuple with the chosen
        variable's exponent set to zero.
        """
        i = self.vars.index(name)
        d = self.degree_in(name)
        buckets: list[dict[Exponent, Coeff]] = [{} for _ in range(d + 1)]
        for e, c in self.terms.items():
            stripped = e[:i] + (0,) + e[i + 1:]
            buckets[e[i]][stripped] = c
        return [MultiPoly(self.vars, b) for b in buckets]

    def with_vars(self, variables: Sequence[str]) -> "MultiPoly":
        """Embed into a (super)set of variables, preserving names."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.vars]
        n = len(variables)
        out: dict[Exponent, Coeff] = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for src, dst in enumerate(idx):
                ne[dst] = e[src]
            out[tuple(ne)] = c
        return MultiPoly(variables, out)

    def drop_var(self, name: str) -> "MultiPoly":
        """Remove a variable that appears in no term."""
        if self.degree_in(name) > 0:
            raise ValueError(f"variable {name!r} still occurs")
        i = self.vars.index(name)
        return MultiPoly(self.vars[:i] + self.vars[i + 1:],
                         {e[:i] + e[i + 1:]: c for e, c in self.terms.items()})

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.vars, out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) - c
        return MultiPoly(self.vars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def scale(self, c: Coeff | int) -> "MultiPoly":
        c = _coerce(c)
        return MultiPoly(self.vars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out: dict[Exponent, Coeff] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.vars, out)

    def mul_truncated(self, other: "MultiPoly", n: int) -> "MultiPoly":
        self._check(other)
        out: dict[Exponent, Coeff] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 > n:
                continue
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > n:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.vars, out)

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative polynomial power")
        result = MultiPoly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def partial(self, name: str) -> "MultiPoly":
        i = self.vars.index(name)
        out: dict[Exponent, Coeff] = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = out.get(ne, 0) + c * e[i]
        return MultiPoly(self.vars, out)

    def prune(self, tol: float) -> "MultiPoly":
        """Drop coefficients of magnitude at most ``tol`` (float paths)."""
        return MultiPoly(self.vars,
                         {e: c for e, c in self.terms.items() if abs(c) > tol})

    # -- evaluation -------------------------------------------------------

    def eval(self, point: Sequence[Coeff | int]):
        """Evaluate at ``point`` (one value per variable, in order).

        Exact when the polynomial and the point are rational.
        """
        if len(point) != len(self.vars):
            raise ValueError("point arity does not match variables")
        pt = [_coerce(p) for p in point]
        total = None
        for e, c in self.sorted_terms():
            val = c
            for b, k in zip(pt, e):
                if k:
                    val = val * b ** k
            total = val if total is None else total + val
        if total is None:
            return Fraction(0)
        return total

    def eval_abs(self, point: Sequence[Coeff | int]) -> float:
        """Sum of absolute values of the evaluated terms (a scale, not a value)."""
        pt = [abs(complex(p)) for p in point]
        s = 0.0
        for e, c in self.terms.items():
            val = abs(complex(c))
            for b, k in zip(pt, e):
                if k:
                    val *= b ** k
            s += val
        return s

    def eval_partial(self, assignment: Mapping[str, Coeff | int]) -> "MultiPoly":
        """Substitute values for a subset of variables; keep the rest."""
        keep = [v for v in self.vars if v not in assignment]
        idx = {v: i for i, v in enumerate(self.vars)}
        out: dict[Exponent, Coeff] = {}
        for e, c in self.terms.items():
            val: Coeff = c
            for v, a in assignment.items():
                k = e[idx[v]]
                if k:
                    val = val * _coerce(a) ** k
            ne = tuple(e[idx[v]] for v in keep)
            out[ne] = out.get(ne, 0) + val
        return MultiPoly(keep, out)

    def compose(self, mapping: Mapping[str, "MultiPoly"]) -> "MultiPoly":
        """Substitute a polynomial for every variable.

        All images must share one variable tuple, which becomes the
        result's tuple.  Exact.
        """
        images = [mapping[v] for v in self.vars]
        tvars = images[0].vars
        for im in images:
            if im.vars != tvars:
                raise ValueError("substitution images must share variables")
        powers: list[dict[int, MultiPoly]] = [
            {0: MultiPoly.const(tvars, 1)} for _ in images]

        def power(i: int, k: int) -> MultiPoly:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        total = MultiPoly.zero(tvars)
        for e, c in self.terms.items():
            term = MultiPoly.const(tvars, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            total = total + term
        return total


# -- parsing and printing ---------------------------------------------------

_TOKEN_SYMBOLS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if ch in _TOKEN_SYMBOLS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser for the shared polynomial grammar.

    Grammar (no implicit multiplication):
        expr   := term (('+' | '-') term)*
        term   := factor ('*' factor)*
        factor := '-' factor | atom ('^' int)?
        atom   := '(' expr ')' | rational | variable
        rational := int ('/' int)?
    """

    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vars = tuple(variables)

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse(self) -> MultiPoly:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing {tok[1]!r}", tok[2])
        return p

    def expr(self) -> MultiPoly:
        p = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> MultiPoly:
        p = self.factor()
        while self.peek()[0] == "*":
            self.take()
            p = p * self.factor()
        return p

    def factor(self) -> MultiPoly:
        if self.peek()[0] == "-":
            self.take()
            return -self.factor()
        p = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("int")
            p = p ** int(tok[1])
        return p

    def atom(self) -> MultiPoly:
        tok = self.peek()
        if tok[0] == "(":
            self.take()
            p = self.expr()
            self.take(")")
            return p
        if tok[0] == "int":
            self.take()
            num = int(tok[1])
            if self.peek()[0] == "/":
                self.take()
                den_tok = self.take("int")
                den = int(den_tok[1])
                if den == 0:
                    raise ParseError("zero denominator", den_tok[2])
                return MultiPoly.const(self.vars, Fraction(num, den))
            return MultiPoly.const(self.vars, Fraction(num))
        if tok[0] == "name":
            self.take()
            if tok[1] not in self.vars:
                raise ParseError(f"unknown variable {tok[1]!r}", tok[2])
            return MultiPoly.var(tok[1], self.vars)
        raise ParseError(f"unexpected {tok[1]!r}" if tok[1] else "unexpected end",
                         tok[2])


def parse_poly(text: str, variables: Sequence[str]) -> MultiPoly:
    """Parse ``text`` over the given variables.

    Grammar: integers, rationals ``p/q``, named variables, ``+ - * ^``
    and parentheses.  Multiplication is always explicit.  Malformed input
    raises :class:`ParseError` with the offending position.
    """
    return _Parser(text, variables).parse()


def _format_coeff(c: Coeff) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return repr(c)


def format_poly(p: MultiPoly) -> str:
    """Deterministic rendering; ``parse_poly(format_poly(p), p.vars) == p``."""
    if not p.terms:
        return "0"
    chunks: list[str] = []
    for e, c in p.sorted_terms():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}"
            for v, k in zip(p.vars, e) if k > 0)
        neg = isinstance(c, (Fraction, float)) and c < 0
        mag = -c if neg else c
        if mono:
            body = mono if mag == 1 else f"{_format_coeff(mag)}*{mono}"
        else:
            body = _format_coeff(mag)
        if not chunks:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)


# -- spec-level operation aliases -------------------------------------------

def poly_arith(op: str, a: MultiPoly, b: MultiPoly | int) -> MultiPoly:
    """Ring arithmetic dispatch: op in {'add', 'sub', 'mul', 'pow'}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown op {op!r}")


def partial_derivative(p: MultiPoly, var: str) -> MultiPoly:
    """Exact partial derivative of ``p`` with respect to ``var``."""
    return p.partial(var)


def eval_poly(p: MultiPoly, point: Sequence[Coeff | int]):
    """Evaluate ``p`` at ``point``; exact on rational input."""
    return p.eval(point)


# -- exact division and resultants ------------------------------------------

def exact_div(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Exact quotient a/b; raises :class:`ExactDivisionError` otherwise."""
    if not b:
        raise ExactDivisionError("division by zero polynomial")
    if not a:
        return MultiPoly.zero(a.vars)
    a._check(b)
    eb, cb = max(b.terms.items(), key=lambda t: _grlex_key(t[0]))
    rem = dict(a.terms)
    quo: dict[Exponent, Coeff] = {}
    while rem:
        ea, ca = max(rem.items(), key=lambda t: _grlex_key(t[0]))
        de = tuple(x - y for x, y in zip(ea, eb))
        if any(k < 0 for k in de):
            raise ExactDivisionError("inexact polynomial division")
        cq = ca / cb
        quo[de] = quo.get(de, 0) + cq
        for e2, c2 in b.terms.items():
            e = tuple(x + y for x, y in zip(de, e2))
            nc = rem.get(e, 0) - cq * c2
            if nc == 0:
                rem.pop(e, None)
            else:
                rem[e] = nc
    return MultiPoly(a.vars, quo)


def det_bareiss(matrix: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    """Fraction-free determinant of a square polynomial matrix.

    Bareiss elimination with row-swap pivoting; every interior division
    is exact by construction.
    """
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    tvars = matrix[0][0].vars
    m = [[entry for entry in row] for row in matrix]
    for row in m:
        if len(row) != n:
            raise ValueError("matrix is not square")
    sign = 1
    prev = MultiPoly.const(tvars, 1)
    for k in range(n - 1):
        if not m[k][k]:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return MultiPoly.zero(tvars)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = exact_div(num, prev)
            m[i][k] = MultiPoly.zero(tvars)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """Resultant of ``p`` and ``q`` with respect to ``var``.

    Computed as the Bareiss determinant of the Sylvester matrix whose
    entries are the coefficient polynomials in the remaining variables.
    The eliminated variable no longer occurs in the result.
    """
    if not p or not q:
        return MultiPoly.zero(p.vars if p else q.vars)
    p._check(q)
    m = p.degree_in(var)
    n = q.degree_in(var)
    if m == 0 and n == 0:
        return MultiPoly.const(p.vars, 1)
    if m == 0:
        return p ** n
    if n == 0:
        return q ** m
    pc = p.coeffs_in(var)
    qc = q.coeffs_in(var)
    size = m + n
    zero = MultiPoly.zero(p.vars)
    rows: list[list[MultiPoly]] = []
    for i in range(n):
        row = [zero] * size
        for j, c in enumerate(reversed(pc)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j, c in enumerate(reversed(qc)):
            row[i + j] = c
        rows.append(row)
    return det_bareiss(rows)


# -- univariate layer ---------------------------------------------------------

UniPoly = list  # dense list of coefficients, index = power


def uni_normalize(c: Sequence[Coeff | int]) -> UniPoly:
    out = [_coerce(x) for x in c]
    while out and out[-1] == 0:
        out.pop()
    return out


def uni_from_multipoly(p: MultiPoly, var: str | None = None) -> UniPoly:
    """Dense coefficient list of an (effectively) univariate polynomial."""
    live = [v for v in p.vars if p.degree_in(v) > 0]
    if var is None:
        if len(live) > 1:
            raise ValueError(f"polynomial is not univariate: {live}")
        var = live[0] if live else (p.vars[0] if p.vars else "x")
    elif any(v != var for v in live):
        raise ValueError(f"unexpected variables {live} (wanted {var!r})")
    i = p.vars.index(var)
    d = p.degree_in(var)
    out: list[Coeff] = [Fraction(0)] * (d + 1) if d >= 0 else []
    for e, c in p.terms.items():
        out[e[i]] = c
    return uni_normalize(out)


def uni_to_multipoly(c: Sequence[Coeff | int], var: str = "x") -> MultiPoly:
    return MultiPoly((var,), {(i,): x for i, x in enumerate(c)})


def uni_degree(c: UniPoly) -> int:
    return len(c) - 1


def uni_eval(c: UniPoly, x):
    total = 0
    for a in reversed(c):
        total = total * x + a
    return total


def uni_derivative(c: UniPoly) -> UniPoly:
    return uni_normalize([c[i] * i for i in range(1, len(c))])


def uni_divmod(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly]:
    if not b:
        raise ZeroDivisionError("univariate division by zero")
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        if a[-1] == 0:
            a.pop()
            continue
        k = len(a) - len(b)
        f = a[-1] / lead
        q[k] = f
        for i, bc in enumerate(b):
            a[k + i] -= f * bc
        a.pop()
    return uni_normalize(q), uni_normalize(a)


def uni_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    a, b = uni_normalize(a), uni_normalize(b)
    while b:
        _, r = uni_divmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = [x / lead for x in a]
    return a


def uni_squarefree(c: UniPoly) -> UniPoly:
    """Square-free part c / gcd(c, c')."""
    c = uni_normalize(c)
    if uni_degree(c) < 1:
        return c
    g = uni_gcd(c, uni_derivative(c))
    if uni_degree(g) < 1:
        return c
    q, r = uni_divmod(c, g)
    if r:
        raise ExactDivisionError("gcd does not divide its polynomial")
    return q


def uni_integerize(c: UniPoly) -> UniPoly:
    """Scale a rational polynomial to primitive integer form, positive lead."""
    c = uni_normalize(c)
    if not c:
        return c
    denom = 1
    for x in c:
        denom = denom * x.denominator // math.gcd(denom, x.denominator)
    ints = [int(x * denom) for x in c]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    ints = [x // g for x in ints]
    if ints[-1] < 0:
        ints = [-x for x in ints]
    return [Fraction(x) for x in ints]


def cauchy_root_bound(c: UniPoly) -> Fraction:
    """All complex roots have modulus below this bound."""
    c = uni_normalize(c)
    if uni_degree(c) < 1:
        return Fraction(1)
    lead = abs(c[-1])
    return 1 + max(abs(x) / lead for x in c[:-1]) if len(c) > 1 else Fraction(1)


def sturm_chain(c: UniPoly) -> list[UniPoly]:
    chain = [uni_normalize(c), uni_derivative(c)]
    while chain[-1]:
        _, r = uni_divmod(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-x for x in r])
    return [p for p in chain if p]


def _sign_changes(chain: list[UniPoly], x: Fraction) -> int:
    signs = []
    for p in chain:
        v = uni_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(chain: list[UniPoly], a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots in (a, b] for a square-free chain head."""
    return _sign_changes(chain, a) - _sign_changes(chain, b)


@dataclass(frozen=True)
class IsolatingInterval:
    """Open-ended rational interval certified to contain one real root."""
    lo: Fraction
    hi: Fraction
    sign_change: bool = True

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class AlgebraicNumber:
    """A real algebraic number: defining polynomial, interval, float view."""
    poly: tuple
    interval: IsolatingInterval
    approx: float

    def __float__(self) -> float:
        return self.approx


def isolate_real_roots(p: MultiPoly | UniPoly) -> list[IsolatingInterval]:
    """Disjoint isolating intervals for every real root, sorted ascending.

    Works on the square-free part, so multiplicities collapse.  Interval
    endpoints are never roots.
    """
    c = uni_from_multipoly(p) if isinstance(p, MultiPoly) else uni_normalize(p)
    c = uni_squarefree(c)
    if uni_degree(c) < 1:
        return []
    bound = cauchy_root_bound(c) + 1
    chain = sturm_chain(c)
    out: list[IsolatingInterval] = []

    def count(a: Fraction, b: Fraction) -> int:
        return sturm_count(chain, a, b)

    def recurse(a: Fraction, b: Fraction, k: int) -> None:
        if k == 0:
            return
        if k == 1:
            out.append(IsolatingInterval(a, b))
            return
        mid = (a + b) / 2
        if uni_eval(c, mid) == 0:
            w = (b - a) / 4
            while (count(mid - w, mid + w) != 1 or uni_eval(c, mid - w) == 0
                   or uni_eval(c, mid + w) == 0):
                w /= 2
            recurse(a, mid - w, count(a, mid - w))
            out.append(IsolatingInterval(mid - w, mid + w))
            recurse(mid + w, b, count(mid + w, b))
        else:
            recurse(a, mid, count(a, mid))
            recurse(mid, b, count(mid, b))

    recurse(-bound, bound, count(-bound, bound))
    out.sort(key=lambda iv: iv.lo)
    return out


def refine_root(p: MultiPoly | UniPoly, interval: IsolatingInterval,
                tol: float = 1e-12) -> AlgebraicNumber:
    """Shrink an isolating interval below ``tol`` and polish with Newton.

    Bisection is exact rational arithmetic; the float polish never leaves
    the certified interval.
    """
    c = uni_from_multipoly(p) if isinstance(p, MultiPoly) else uni_normalize(p)
    c = uni_squarefree(c)
    lo, hi = Fraction(interval.lo), Fraction(interval.hi)
    flo = uni_eval(c, lo)
    fhi = uni_eval(c, hi)
    if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
        raise ValueError("interval is not isolating for this polynomial")
    width_goal = Fraction(tol) if tol > 0 else Fraction(1, 10 ** 12)
    while hi - lo > width_goal:
        mid = (lo + hi) / 2
        fm = uni_eval(c, mid)
        if fm == 0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = float((lo + hi) / 2)
    fc = [float(a) for a in c]
    dc = [float(a) for a in uni_derivative(c)]
    for _ in range(6):
        d = uni_eval(dc, x)
        if d == 0:
            break
        step = uni_eval(fc, x) / d
        nx = x - step
        if not (float(lo) - tol <= nx <= float(hi) + tol):
            break
        x = nx
    return AlgebraicNumber(poly=tuple(uni_integerize(c)),
                           interval=IsolatingInterval(lo, hi),
                           approx=x)


def real_roots(p: MultiPoly | UniPoly, tol: float = 1e-12) -> list[AlgebraicNumber]:
    """Isolate and refine every real root."""
    return [refine_root(p, iv, tol) for iv in isolate_real_roots(p)]


# -- analytic expressions ------------------------------------------------------

class AnalyticExpr:
    """Closed expression family: polynomials, sums, products, quotients,
    and exponentials of polynomials.

    Supports exact partial derivatives (staying inside the family), exact
    truncated series expansion about the origin, evaluation (with a local
    re-expansion fallback where a quotient's denominator nearly vanishes),
    and local expansion about arbitrary points.
    """

    vars: tuple[str, ...]

    def partial(self, var: str) -> "AnalyticExpr":
        raise NotImplementedError

    def eval(self, point: Sequence[Coeff | int]):
        raise NotImplementedError

    def eval_abs(self, point: Sequence[Coeff | int]) -> float:
        raise NotImplementedError

    def local(self, center: Sequence[Coeff | int], n: int,
              tol: float | None) -> MultiPoly:
        """Taylor expansion about ``center`` in offset variables, through
        total degree ``n``.  ``tol=None`` demands exactness."""
        raise NotImplementedError

    # shared helpers ------------------------------------------------------

    def series(self, n: int) -> MultiPoly:
        """Exact Maclaurin expansion through total degree ``n``."""
        return self.local([0] * len(self.vars), n, None)

    def eval_at(self, point: Sequence[Coeff | int]):
        return self.eval(point)

    def derivatives_at(self, point: Sequence[Coeff | int], order: int,
                       tol: float = 1e-25) -> dict[Exponent, float]:
        """All partial derivatives through total order ``order`` at ``point``.

        Computed from one local expansion, so cancellation inside
        quotients is resolved symbolically rather than by float
        subtraction.  The default tolerance sits far below any meaningful
        coefficient but above the noise floor of the high-precision
        exponential units.
        """
        loc = self.local(point, order, tol)
        out: dict[Exponent, float] = {}
        for e, c in loc.terms.items():
            f = 1
            for k in e:
                f *= math.factorial(k)
            out[e] = float(c) * f
        return out


def _exp_fraction(c0: Coeff) -> Fraction:
    """High-precision rational approximation of exp(c0).

    Keeps local expansions accurate when nearby exponential constants
    cancel (float exp would cap the quotient's accuracy near a
    denominator's zero set).
    """
    if not isinstance(c0, Fraction):
        return Fraction(math.exp(float(c0)))
    import decimal
    with decimal.localcontext() as ctx:
        ctx.prec = 40
        v = (decimal.Decimal(c0.numerator) / decimal.Decimal(c0.denominator)).exp()
    return Fraction(v)


def _shift_poly(p: MultiPoly, center: Sequence[Coeff | int]) -> MultiPoly:
    """p(center + w) as a polynomial in the offsets w (same variable names)."""
    mapping = {}
    for i, v in enumerate(p.vars):
        c = center[i]
        if isinstance(c, float):
            c = Fraction(c)
        base = MultiPoly.var(v, p.vars)
        mapping[v] = base + MultiPoly.const(p.vars, c)
    return p.compose(mapping)


@dataclass(frozen=True)
class PolyExpr(AnalyticExpr):
    poly: MultiPoly

    @property
    def vars(self) -> tuple[str, ...]:
        return self.poly.vars

    def partial(self, var: str) -> AnalyticExpr:
        return PolyExpr(self.poly.partial(var))

    def eval(self, point):
        return self.poly.eval(point)

    def eval_abs(self, point) -> float:
        return self.poly.eval_abs(point)

    def local(self, center, n, tol) -> MultiPoly:
        return _shift_poly(self.poly, center).truncate_total(n)


@dataclass(frozen=True)
class SumExpr(AnalyticExpr):
    parts: tuple[AnalyticExpr, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty sum")
        v = self.parts[0].vars
        if any(p.vars != v for p in self.parts):
            raise ValueError("summands must share variables")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.parts[0].vars

    def partial(self, var: str) -> AnalyticExpr:
        return SumExpr(tuple(p.partial(var) for p in self.parts))

    def eval(self, point):
        return sum(p.eval(point) for p in self.parts)

    def eval_abs(self, point) -> float:
        return sum(p.eval_abs(point) for p in self.parts)

    def local(self, center, n, tol) -> MultiPoly:
        total = MultiPoly.zero(self.vars)
        for p in self.parts:
            total = total + p.local(center, n, tol)
        return total


@dataclass(frozen=True)
class ProductExpr(AnalyticExpr):
    parts: tuple[AnalyticExpr, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty product")
        v = self.parts[0].vars
        if any(p.vars != v for p in self.parts):
            raise ValueError("factors must share variables")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.parts[0].vars

    def partial(self, var: str) -> AnalyticExpr:
        terms = []
        for i in range(len(self.parts)):
            parts = (self.parts[:i] + (self.parts[i].partial(var),)
                     + self.parts[i + 1:])
            terms.append(ProductExpr(parts))
        return SumExpr(tuple(terms))

    def eval(self, point):
        total = 1
        for p in self.parts:
            total = total * p.eval(point)
        return total

    def eval_abs(self, point) -> float:
        total = 1.0
        for p in self.parts:
            total *= p.eval_abs(point)
        return total

    def local(self, center, n, tol) -> MultiPoly:
        total = self.parts[0].local(center, n, tol)
        for p in self.parts[1:]:
            total = total.mul_truncated(p.local(center, n, tol), n)
        return total


@dataclass(frozen=True)
class ExpExpr(AnalyticExpr):
    """exp of a polynomial argument."""
    arg: MultiPoly

    @property
    def vars(self) -> tuple[str, ...]:
        return self.arg.vars

    def partial(self, var: str) -> AnalyticExpr:
        return ProductExpr((PolyExpr(self.arg.partial(var)), self))

    def eval(self, point):
        v = self.arg.eval(point)
        if isinstance(v, complex):
            return cmath.exp(v)
        return math.exp(float(v))

    def eval_abs(self, point) -> float:
        return math.exp(self.arg.eval_abs(point))

    def local(self, center, n, tol) -> MultiPoly:
        shifted = _shift_poly(self.arg, center)
        c0 = shifted.constant_term()
        q = shifted - MultiPoly.const(shifted.vars, c0)
        if c0 == 0:
            unit: Coeff = Fraction(1)
        elif tol is None:
            raise SeriesPoleError(
                "exact expansion needs a vanishing constant in the exponent")
        else:
            unit = _exp_fraction(c0)
        total = MultiPoly.const(shifted.vars, unit)
        power = MultiPoly.const(shifted.vars, unit)
        for k in range(1, n + 1):
            power = power.mul_truncated(q, n).scale(Fraction(1, k))
            total = total + power
        return total


def _graded_divide(num: MultiPoly, den: MultiPoly, n: int,
                   tol: float | None) -> MultiPoly:
    """Quotient of truncated expansions through total degree ``n``.

    Handles denominators vanishing at the expansion center: the quotient
    exists iff every graded step divides exactly (up to ``tol`` noise on
    float paths); otherwise :class:`SeriesPoleError` is raised.
    """
    scale = max((abs(c) for c in den.terms.values()), default=0)
    if tol is not None and scale:
        den = den.prune(tol * float(scale))
        nscale = max((abs(c) for c in num.terms.values()), default=0)
        if nscale:
            num = num.prune(tol * float(nscale))
    if not den:
        raise SeriesPoleError("denominator expands to zero")
    m = den.min_total_degree()
    lead = den.homogeneous_part(m)
    if num:
        if num.min_total_degree() < m:
            raise SeriesPoleError("denominator vanishes at the expansion "
                                  "center to higher order than the numerator")
    num_parts = [num.homogeneous_part(k) for k in range(n + m + 1)]
    den_parts = [den.homogeneous_part(k) for k in range(n + m + 1)]
    quo = MultiPoly.zero(num.vars)
    quo_parts: list[MultiPoly] = []
    for k in range(n + 1):
        target = num_parts[m + k]
        for j, qj in enumerate(quo_parts):
            target = target - qj.mul_truncated(den_parts[m + k - j], m + k)
        qk = _divide_homogeneous(target, lead, tol)
        quo_parts.append(qk)
        quo = quo + qk
    return quo


def _divide_homogeneous(target: MultiPoly, lead: MultiPoly,
                        tol: float | None) -> MultiPoly:
    """Exact division of homogeneous polynomials, with float-noise dropping."""
    if not target:
        return MultiPoly.zero(target.vars)
    if lead.total_degree() == 0:
        return target.scale(1 / lead.constant_term())
    eb, cb = max(lead.terms.items(), key=lambda t: _grlex_key(t[0]))
    rem = dict(target.terms)
    quo: dict[Exponent, Coeff] = {}
    scale = max(abs(c) for c in target.terms.values())
    while rem:
        ea, ca = max(rem.items(), key=lambda t: _grlex_key(t[0]))
        de = tuple(x - y for x, y in zip(ea, eb))
        if any(k < 0 for k in de):
            if tol is not None and abs(ca) <= tol * float(scale):
                del rem[ea]
                continue
            raise SeriesPoleError("denominator vanishes at the expansion "
                                  "center (local division is inexact)")
        cq = ca / cb
        quo[de] = quo.get(de, 0) + cq
        for e2, c2 in lead.terms.items():
            e = tuple(x + y for x, y in zip(de, e2))
            nc = rem.get(e, 0) - cq * c2
            if nc == 0 or (tol is not None and abs(nc) <= tol * float(scale) * 1e-6):
                rem.pop(e, None)
            else:
                rem[e] = nc
    return MultiPoly(target.vars, quo)


@dataclass(frozen=True)
class QuotientExpr(AnalyticExpr):
    num: AnalyticExpr
    den: AnalyticExpr

    def __post_init__(self):
        if self.num.vars != self.den.vars:
            raise ValueError("quotient parts must share variables")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.num.vars

    def partial(self, var: str) -> AnalyticExpr:
        n, d = self.num, self.den
        minus_one = PolyExpr(MultiPoly.const(self.vars, -1))
        top = SumExpr((ProductExpr((n.partial(var), d)),
                       ProductExpr((minus_one, n, d.partial(var)))))
        return QuotientExpr(top, ProductExpr((d, d)))

    def eval(self, point):
        dv = self.den.eval(point)
        scale = self.den.eval_abs(point)
        if abs(complex(dv)) > 1e-6 * (scale + 1e-300):
            return self.num.eval(point) / dv
        if any(complex(p).imag != 0 for p in point):
            raise SeriesPoleError("near-singular quotient at a complex point")
        loc = self.local(point, 0, 1e-25)
        return float(loc.constant_term())

    def eval_abs(self, point) -> float:
        dv = self.den.eval_abs(point)
        return self.num.eval_abs(point) / (dv + 1e-300)

    def local(self, center, n, tol) -> MultiPoly:
        probe = self.den.local(center, n + 4, tol)
        if tol is not None:
            scale = max((abs(c) for c in probe.terms.values()), default=0)
            if scale:
                probe = probe.prune(tol * float(scale))
        if not probe:
            raise SeriesPoleError("denominator expands to zero")
        m = probe.min_total_degree()
        num = self.num.local(center, n + m, tol)
        den = self.den.local(center, n + m, tol)
        return _graded_divide(num, den, n, tol)


def series_expand(e: AnalyticExpr | MultiPoly, n: int) -> MultiPoly:
    """Exact series expansion through total degree ``n`` about the origin.

    Quotients whose denominator vanishes at the origin are expanded by
    graded exact division when the quotient is analytic there; a genuine
    pole raises :class:`SeriesPoleError`.
    """
    if isinstance(e, MultiPoly):
        return e.truncate_total(n)
    return e.series(n)


def expr_const(variables: Sequence[str], c: Coeff | int) -> AnalyticExpr:
    return PolyExpr(MultiPoly.const(variables, c))


def expr_scale(e: AnalyticExpr, c: Coeff | int) -> AnalyticExpr:
    return ProductExpr((PolyExpr(MultiPoly.const(e.vars, c)), e))
