"""Exact coefficient oracle for generating functions of the form G/H.

Coefficients are obtained by multiplying through by the denominator and
solving the resulting recurrence in graded order, entirely over the
rationals.  The oracle is the ground truth every asymptotic prediction in
this package is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .polycore import (
    AnalyticExpr,
    Exponent,
    MultiPoly,
    PolyExpr,
    series_expand,
)


@dataclass(frozen=True)
class RationalGF:
    """A generating function numerator/denominator with metadata.

    ``combinatorial`` asserts the coefficient array is nonnegative, which
    the analysis pipelines rely on for minimality arguments; it is the
    caller's claim and is spot-checked during expansion.
    ``denominator_factors`` optionally lists polynomial factors of the
    denominator (with multiplicity via repetition); consistency with the
    denominator is verified on construction up to a constant unit.
    """

    numerator: AnalyticExpr
    denominator: AnalyticExpr
    variables: tuple[str, ...]
    combinatorial: bool = False
    denominator_factors: tuple[MultiPoly, ...] | None = None

    def __post_init__(self):
        if self.numerator.vars != self.variables:
            raise ValueError("numerator variables do not match")
        if self.denominator.vars != self.variables:
            raise ValueError("denominator variables do not match")
        h0 = self.denominator.local([0] * len(self.variables), 0, None)
        if h0.constant_term() == 0:
            raise ValueError("denominator vanishes at the origin")
        if self.denominator_factors is not None:
            depth = 20
            prod_series = MultiPoly.const(self.variables, 1)
            for f in self.denominator_factors:
                if f.vars != self.variables:
                    raise ValueError("factor variables do not match")
                prod_series = prod_series.mul_truncated(f, depth)
            den_series = series_expand(self.denominator, depth)
            c_num = den_series.constant_term()
            c_fac = prod_series.constant_term()
            if c_fac == 0:
                raise ValueError("factor product vanishes at the origin")
            unit = c_num / c_fac
            if prod_series.scale(unit).truncate_total(depth) != den_series:
                raise ValueError(
                    "denominator_factors do not multiply to the denominator")

    @classmethod
    def from_polys(cls, numerator: MultiPoly, denominator: MultiPoly,
                   combinatorial: bool = False,
                   denominator_factors: Sequence[MultiPoly] | None = None,
                   ) -> "RationalGF":
        return cls(PolyExpr(numerator), PolyExpr(denominator),
                   numerator.vars, combinatorial,
                   tuple(denominator_factors) if denominator_factors else None)

    def den_poly(self) -> MultiPoly:
        """The denominator as a polynomial, when it is one."""
        if isinstance(self.denominator, PolyExpr):
            return self.denominator.poly
        raise TypeError("denominator is not polynomial")


@dataclass
class SeriesTable:
    """Exact coefficients through a total-degree bound."""

    variables: tuple[str, ...]
    order: int
    coeffs: dict[Exponent, Fraction]

    def get(self, r: Sequence[int]) -> Fraction:
        r = tuple(int(k) for k in r)
        if sum(r) > self.order:
            raise KeyError(f"index {r} beyond expansion order {self.order}")
        if any(k < 0 for k in r):
            return Fraction(0)
        return self.coeffs.get(r, Fraction(0))

    def items_sorted(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.coeffs.items(), key=lambda t: (sum(t[0]), t[0]))


def _graded_indices(d: int, n: int) -> Iterable[Exponent]:
    for total in range(n + 1):
        yield from _compositions(total, d)


def _compositions(total: int, d: int) -> Iterable[Exponent]:
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


def expand_coefficients(F: RationalGF, n: int) -> SeriesTable:
    """All coefficients of F through total degree ``n``, exactly.

    Writing F*H = G and reading off one coefficient at a time in graded
    order gives a_r = (g_r - sum_{0<s<=r} h_s a_{r-s}) / h_0.
    """
    d = len(F.variables)
    g = series_expand(F.numerator, n)
    h = series_expand(F.denominator, n)
    h0 = h.constant_term()
    h_rest = [(e, c) for e, c in h.sorted_terms() if any(e)]
    coeffs: dict[Exponent, Fraction] = {}
    negative_seen = False
    for r in _graded_indices(d, n):
        acc = g.terms.get(r, Fraction(0))
        for e, c in h_rest:
            prev = tuple(a - b for a, b in zip(r, e))
            if any(k < 0 for k in prev):
                continue
            pc = coeffs.get(prev)
            if pc:
                acc = acc - c * pc
        val = acc / h0
        if val:
            coeffs[r] = val
            if val < 0:
                negative_seen = True
    if F.combinatorial and negative_seen:
        raise ValueError("combinatorial flag contradicted by a negative "
                         "series coefficient")
    return SeriesTable(F.variables, n, coeffs)


_TABLE_CACHE: dict[int, tuple[RationalGF, SeriesTable]] = {}


def coefficient(F: RationalGF, r: Sequence[int]) -> Fraction:
    """Exact single coefficient; reuses cached expansions when possible."""
    need = sum(int(k) for k in r)
    cached = _TABLE_CACHE.get(id(F))
    if cached is None or cached[1].order < need:
        table = expand_coefficients(F, need)
        _TABLE_CACHE[id(F)] = (F, table)
    else:
        table = cached[1]
    return table.get(r)


def relative_error_curve(F: RationalGF, term, direction: Sequence[int],
                         n_values: Sequence[int]) -> list[dict]:
    """Exact-vs-predicted comparison along ``n * direction``.

    Rows where the exact coefficient is zero report whether the predicted
    term is consistently zero instead of a relative error.
    """
    from .asymptotics import evaluate_term

    direction = tuple(int(k) for k in direction)
    need = max(n_values) * sum(direction)
    table = expand_coefficients(F, need)
    rows = []
    for n in n_values:
        r = tuple(n * k for k in direction)
        exact = table.get(r)
        approx = evaluate_term(term, r)
        if exact == 0:
            rows.append({
                "n": n, "r": r, "exact": exact, "approx": approx,
                "rel_error": None,
                "note": "exact zero" + ("" if approx == 0 else
                                        " but prediction is nonzero"),
            })
        else:
            rel = abs((approx - float(exact)) / float(exact))
            rows.append({"n": n, "r": r, "exact": exact, "approx": approx,
                         "rel_error": rel, "note": ""})
    return rows
