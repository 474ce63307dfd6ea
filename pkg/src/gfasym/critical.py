"""Critical-point location, classification, minimality certification, and
selection of contributing singularities.

The exact backend (two variables, polynomial denominator) eliminates each
variable by resultants and pairs certified real roots by residual; complex
solutions come from the same eliminants via companion-matrix root finding.
The numeric backend runs damped multistart Newton on the critical system
and works for any arity and for non-polynomial denominators through local
re-expansion.  Selection logic refuses rather than guesses: directions
outside the relevant cone, non-combinatorial inputs, and degenerate
geometry all produce typed refusals or ranked candidate lists.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .polycore import (
    AlgebraicNumber,
    AnalysisRefusal,
    AnalyticExpr,
    MultiPoly,
    PolyExpr,
    isolate_real_roots,
    real_roots,
    resultant,
    sturm_chain,
    sturm_count,
    uni_from_multipoly,
    uni_squarefree,
)
from .series_oracle import RationalGF


class PointType(Enum):
    SMOOTH = "smooth"
    MULTIPLE = "multiple"
    BAD = "bad"
    UNCLASSIFIED = "unclassified"


class Minimality(Enum):
    STRICTLY_MINIMAL = "strictly_minimal"
    MINIMAL = "minimal"
    NOT_MINIMAL = "not_minimal"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Direction:
    """A nonnegative integer direction, normalized by gcd."""

    vector: tuple[int, ...]

    def __post_init__(self):
        if not self.vector or any(k < 0 for k in self.vector) \
                or all(k == 0 for k in self.vector):
            raise ValueError("direction must be nonzero and nonnegative")

    @classmethod
    def of(cls, seq: Sequence[int]) -> "Direction":
        return cls(tuple(int(k) for k in seq))

    def reduced(self) -> tuple[int, ...]:
        g = 0
        for k in self.vector:
            g = math.gcd(g, k)
        return tuple(k // g for k in self.vector)

    def unit(self) -> tuple[float, ...]:
        s = sum(self.vector)
        return tuple(k / s for k in self.vector)


@dataclass
class CriticalPoint:
    """A located critical-system solution with analysis metadata."""

    coords: tuple[complex, ...]
    classification: PointType = PointType.UNCLASSIFIED
    minimality: Minimality = Minimality.UNKNOWN
    height: float = math.nan
    residual: float = math.nan
    exact: tuple[AlgebraicNumber, ...] | None = None
    vanishing: tuple[int, ...] = ()
    evidence: dict = field(default_factory=dict)

    def is_positive_real(self, tol: float = 1e-9) -> bool:
        return all(abs(z.imag) <= tol * (1 + abs(z.real)) and z.real > tol
                   for z in map(complex, self.coords))


def _direction_height(coords: Sequence[complex], direction: Direction) -> float:
    unit = direction.unit()
    try:
        return -sum(u * math.log(abs(complex(z)))
                    for u, z in zip(unit, coords))
    except ValueError:
        return math.nan


def _factors_of(F: RationalGF) -> tuple[MultiPoly, ...] | None:
    if F.denominator_factors is not None:
        return F.denominator_factors
    if isinstance(F.denominator, PolyExpr):
        return (F.denominator.poly,)
    return None


# -- critical system ------------------------------------------------------------

def critical_system(F: RationalGF, direction: Direction):
    """The defining equations: H = 0 and the d-1 direction constraints
    r_d z_j dH/dz_j = r_j z_d dH/dz_d."""
    r = direction.vector
    d = len(F.variables)
    if len(r) != d:
        raise ValueError("direction arity does not match variables")
    if isinstance(F.denominator, PolyExpr):
        H = F.denominator.poly
        eqs = [H]
        hd = H.partial(F.variables[-1])
        zd = MultiPoly.var(F.variables[-1], F.variables)
        for j in range(d - 1):
            zj = MultiPoly.var(F.variables[j], F.variables)
            hj = H.partial(F.variables[j])
            eqs.append((zj * hj).scale(r[-1]) - (zd * hd).scale(r[j]))
        return eqs
    from .polycore import ProductExpr, SumExpr, expr_scale
    H = F.denominator
    eqs = [H]
    hd = H.partial(F.variables[-1])
    zd = PolyExpr(MultiPoly.var(F.variables[-1], F.variables))
    for j in range(d - 1):
        zj = PolyExpr(MultiPoly.var(F.variables[j], F.variables))
        hj = H.partial(F.variables[j])
        eqs.append(SumExpr((
            expr_scale(ProductExpr((zj, hj)), r[-1]),
            expr_scale(ProductExpr((zd, hd)), -r[j]))))
    return eqs


# -- derivative tables ------------------------------------------------------------

def _poly_derivative_table(H: MultiPoly, order: int) -> dict:
    """Symbolic partials of H up to the requested total order."""
    d = len(H.vars)
    table = {(0,) * d: H}
    frontier = [(0,) * d]
    for _ in range(order):
        new = []
        for e in frontier:
            for j in range(d):
                ne = e[:j] + (e[j] + 1,) + e[j + 1:]
                if ne not in table:
                    table[ne] = table[e].partial(H.vars[j])
                    new.append(ne)
        frontier = new
    return table


def derivative_values(F_or_H, point: Sequence[complex], order: int) -> dict:
    """Partial-derivative values of the denominator at ``point``.

    Polynomial denominators are differentiated symbolically and evaluated;
    other analytic expressions are expanded locally about the point.
    """
    if isinstance(F_or_H, RationalGF):
        H = F_or_H.denominator
    else:
        H = F_or_H
    if isinstance(H, MultiPoly):
        table = _poly_derivative_table(H, order)
        is_complex = any(complex(v).imag != 0 for v in point)
        conv = complex if is_complex else float
        return {e: conv(p.eval(point)) for e, p in table.items()}
    if isinstance(H, PolyExpr):
        return derivative_values(H.poly, point, order)
    return H.derivatives_at([float(p) for p in point], order)


def _h_scale(H, point) -> float:
    try:
        return max(1.0, H.eval_abs([complex(p) for p in point])
                   if isinstance(H, MultiPoly) else H.eval_abs(point))
    except OverflowError:
        return 1.0


# -- numeric backend ---------------------------------------------------------------

def _newton_system(H, direction: Direction, z0: Sequence[float],
                   iters: int = 60, tol: float = 1e-13) -> tuple | None:
    """Damped Newton on the critical system from one start; returns
    (point, residual) on convergence."""
    r = direction.vector
    d = len(r)

    def fun_jac(z):
        dv = derivative_values(H, z, 2)

        def dpart(e):
            return dv.get(tuple(e), 0.0)

        grad = [dpart([1 if i == j else 0 for i in range(d)])
                for j in range(d)]
        f = [dpart([0] * d)]
        J = [grad[:]]
        for j in range(d - 1):
            f.append(r[-1] * z[j] * grad[j] - r[j] * z[-1] * grad[-1])
            row = []
            for k in range(d):
                e_jk = [0] * d
                e_jk[j] += 1
                e_jk[k] += 1
                e_dk = [0] * d
                e_dk[-1] += 1
                e_dk[k] += 1
                v = r[-1] * (grad[j] if k == j else 0.0) \
                    + r[-1] * z[j] * dpart(e_jk) \
                    - r[j] * (grad[-1] if k == d - 1 else 0.0) \
                    - r[j] * z[-1] * dpart(e_dk)
                row.append(v)
            J.append(row)
        return np.array(f, dtype=float), np.array(J, dtype=float)

    z = np.array(z0, dtype=float)
    try:
        f, J = fun_jac(z)
    except Exception:
        return None
    fn = np.linalg.norm(f)
    for _ in range(iters):
        scale = _h_scale(H, z)
        if fn <= tol * scale:
            return tuple(z), fn / scale
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        improved = False
        for _ in range(30):
            zn = z + lam * step
            if all(v > 0 for v in zn):
                try:
                    f2, J2 = fun_jac(zn)
                except Exception:
                    f2 = None
                if f2 is not None:
                    fn2 = np.linalg.norm(f2)
                    if fn2 < (1 - 1e-4 * lam) * fn or fn2 <= tol * scale:
                        z, f, J, fn = zn, f2, J2, fn2
                        improved = True
                        break
            lam /= 2
        if not improved:
            break
    scale = _h_scale(H, z)
    if fn <= tol * scale * 10:
        return tuple(z), fn / scale
    return None


def _numeric_solve(F: RationalGF, direction: Direction) -> list[CriticalPoint]:
    d = len(F.variables)
    H = F.den_poly() if isinstance(F.denominator, PolyExpr) else F.denominator
    per_axis = 8 if d <= 3 else 4
    grid = np.exp(np.linspace(math.log(1e-3), math.log(10.0), per_axis))
    found: list[tuple[float, ...]] = []
    residuals: list[float] = []
    for start in product(grid, repeat=d):
        hit = _newton_system(H, direction, start)
        if hit is None:
            continue
        z, res = hit
        if any(abs(v) < 1e-10 for v in z):
            continue
        dup = False
        for prev in found:
            if all(abs(a - b) <= 1e-8 * (1 + abs(b))
                   for a, b in zip(z, prev)):
                dup = True
                break
        if not dup:
            found.append(z)
            residuals.append(res)
    pts = []
    for z, res in zip(found, residuals):
        coords = tuple(float(v) for v in z)
        pts.append(CriticalPoint(coords=coords, residual=float(res),
                                 height=_direction_height(coords, direction)))
    pts.sort(key=lambda p: tuple((complex(c).real, complex(c).imag)
                                 for c in p.coords))
    return pts


# -- exact backend (two variables) ----------------------------------------------

def _pair_residual(H: MultiPoly, crit: MultiPoly, x, y) -> float:
    z = [x, y]
    s1 = max(1.0, H.eval_abs(z))
    s2 = max(1.0, crit.eval_abs(z))
    return max(abs(complex(H.eval(z))) / s1, abs(complex(crit.eval(z))) / s2)


def _polish_pair(H: MultiPoly, crit: MultiPoly, x, y, complex_ok=True):
    hx, hy = H.partial(H.vars[0]), H.partial(H.vars[1])
    cx, cy = crit.partial(H.vars[0]), crit.partial(H.vars[1])
    z = complex(x), complex(y)
    for _ in range(40):
        f = np.array([complex(H.eval(z)), complex(crit.eval(z))])
        J = np.array([[complex(hx.eval(z)), complex(hy.eval(z))],
                      [complex(cx.eval(z)), complex(cy.eval(z))]])
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            break
        z = (z[0] + step[0], z[1] + step[1])
        if max(abs(step[0]), abs(step[1])) < 1e-15 * (1 + abs(z[0]) + abs(z[1])):
            break
    if not complex_ok:
        z = (z[0].real, z[1].real)
    return z


def _exact_solve(F: RationalGF, direction: Direction) -> list[CriticalPoint]:
    if len(F.variables) != 2:
        raise AnalysisRefusal("exact-backend-arity",
                              "exact backend handles two variables")
    H = F.den_poly()
    r, s = direction.vector
    xv, yv = F.variables
    x = MultiPoly.var(xv, F.variables)
    y = MultiPoly.var(yv, F.variables)
    crit = (x * H.partial(xv)).scale(s) - (y * H.partial(yv)).scale(r)
    rx = resultant(H, crit, yv)
    ry = resultant(H, crit, xv)
    if not rx or not ry:
        raise AnalysisRefusal(
            "degenerate-critical-system",
            "the critical system has a positive-dimensional solution set")
    ux = uni_squarefree(uni_from_multipoly(rx.drop_var(yv), xv))
    uy = uni_squarefree(uni_from_multipoly(ry.drop_var(xv), yv))
    roots_x = real_roots(ux)
    roots_y = real_roots(uy)
    points: list[CriticalPoint] = []

    def push(zx, zy, exact=None):
        if abs(complex(zx)) < 1e-12 or abs(complex(zy)) < 1e-12:
            return
        res = _pair_residual(H, crit, zx, zy)
        if res > 1e-7:
            return
        px, py = (complex(v) for v in _polish_pair(H, crit, zx, zy))
        if abs(px.imag) < 1e-12 * (1 + abs(px.real)) and \
                abs(py.imag) < 1e-12 * (1 + abs(py.real)):
            coords = (float(px.real), float(py.real))
        else:
            coords = (px, py)
        for p in points:
            if all(abs(complex(a) - complex(b)) <= 1e-8 * (1 + abs(complex(b)))
                   for a, b in zip(coords, p.coords)):
                return
        points.append(CriticalPoint(
            coords=coords, exact=exact,
            residual=_pair_residual(H, crit, *coords),
            height=_direction_height(coords, direction)))

    for ax in roots_x:
        for ay in roots_y:
            push(ax.approx, ay.approx, exact=(ax, ay))
    cx = np.roots([float(c) for c in reversed(ux)])
    for zx in cx:
        real_x = abs(zx.imag) < 1e-9 * (1 + abs(zx.real))
        hy = H.eval_partial({xv: complex(zx)})
        coeffs = uni_from_multipoly(hy, yv)
        if len(coeffs) < 2:
            continue
        for zy in np.roots([complex(c) for c in reversed(coeffs)]):
            if real_x and abs(zy.imag) < 1e-9 * (1 + abs(zy.real)):
                continue  # real pairs were handled exactly above
            push(complex(zx), complex(zy))
    points.sort(key=lambda p: (not p.is_positive_real(),
                               _key_coords(p.coords)))
    return points


def _key_coords(coords):
    return tuple((round(complex(c).real, 10), round(complex(c).imag, 10))
                 for c in coords)


def solve_critical_points(F: RationalGF, direction: Direction,
                          backend: str = "auto") -> list[CriticalPoint]:
    """All located solutions of the critical system for this direction.

    ``backend='exact'`` requires a bivariate polynomial denominator and
    certifies real solutions by resultant elimination plus isolation;
    ``'numeric'`` runs damped multistart Newton; ``'auto'`` picks exact
    when available.
    """
    if backend == "auto":
        backend = ("exact" if isinstance(F.denominator, PolyExpr)
                   and len(F.variables) == 2 else "numeric")
    if backend == "exact":
        return _exact_solve(F, direction)
    if backend == "numeric":
        return _numeric_solve(F, direction)
    raise ValueError(f"unknown backend {backend!r}")


# -- classification ---------------------------------------------------------------

@dataclass
class ClassifyResult:
    kind: PointType
    vanishing: tuple[int, ...]
    log_gradients: list[list[float]]
    note: str = ""


def classify_point(F: RationalGF, point: Sequence[complex]) -> ClassifyResult:
    """Sort a variety point into smooth / multiple / bad strata.

    Uses the declared denominator factorization when present.  A multiple
    point must be a transverse intersection (log-gradient matrix of the
    vanishing factors has full rank).
    """
    factors = _factors_of(F)
    d = len(F.variables)
    if factors is None:
        dv = derivative_values(F, point, 1)
        val = dv.get((0,) * d, 0.0)
        scale = _h_scale(F.denominator, point)
        if abs(val) > 1e-8 * scale:
            raise ValueError("point does not lie on the singular variety")
        grad = [point[j] * dv[tuple(1 if i == j else 0 for i in range(d))]
                for j in range(d)]
        if max(abs(complex(g)) for g in grad) < 1e-10 * scale:
            return ClassifyResult(PointType.BAD, (0,), [grad],
                                  "vanishing log-gradient")
        return ClassifyResult(PointType.SMOOTH, (0,), [grad])
    vanishing = []
    grads = []
    for i, f in enumerate(factors):
        scale = max(1.0, f.eval_abs(point))
        if abs(complex(f.eval(point))) <= 1e-8 * scale:
            vanishing.append(i)
            grads.append([complex(point[j]) * complex(
                f.partial(F.variables[j]).eval(point))
                for j in range(d)])
    if not vanishing:
        raise ValueError("point does not lie on the singular variety")
    if len(vanishing) == 1:
        g = grads[0]
        if max(abs(v) for v in g) < 1e-10:
            return ClassifyResult(PointType.BAD, tuple(vanishing), grads,
                                  "vanishing log-gradient")
        return ClassifyResult(PointType.SMOOTH, tuple(vanishing), grads)
    m = len(vanishing)
    if m > d:
        return ClassifyResult(PointType.BAD, tuple(vanishing), grads,
                              "more sheets than variables")
    mat = np.array([[complex(v) for v in g] for g in grads])
    rank = np.linalg.matrix_rank(mat, tol=1e-8)
    if rank == m:
        return ClassifyResult(PointType.MULTIPLE, tuple(vanishing), grads)
    return ClassifyResult(PointType.BAD, tuple(vanishing), grads,
                          "non-transverse intersection")


# -- minimality --------------------------------------------------------------------

@dataclass
class MinimalityResult:
    status: Minimality
    evidence: dict = field(default_factory=dict)


def _segment_roots_exact(f: MultiPoly, z: Sequence[Fraction]) -> int:
    """Number of roots of t -> f(t*z) strictly inside (0, 1)."""
    tvars = ("t",)
    t = MultiPoly.var("t", tvars)
    mapping = {v: t.scale(c) for v, c in zip(f.vars, z)}
    q = f.compose(mapping)
    uq = uni_from_multipoly(q, "t")
    uq = uni_squarefree(uq)
    if len(uq) <= 1:
        return 0
    chain = sturm_chain(uq)
    inside = sturm_count(chain, Fraction(0), Fraction(1))
    from .polycore import uni_eval
    if uni_eval(uq, Fraction(1)) == 0:
        inside -= 1
    return inside


def _segment_roots_float(f: MultiPoly, z: Sequence[float]) -> int:
    tvars = ("t",)
    t = MultiPoly.var("t", tvars)
    mapping = {v: t.scale(Fraction(float(c))) for v, c in zip(f.vars, z)}
    q = f.compose(mapping)
    uq = uni_from_multipoly(q, "t")
    coeffs = [float(c) for c in uq]
    if len(coeffs) <= 1:
        return 0
    roots = np.roots(list(reversed(coeffs)))
    count = 0
    for root in roots:
        if abs(root.imag) < 1e-9 * (1 + abs(root.real)):
            if 1e-9 < root.real < 1 - 1e-7:
                count += 1
    return count


def _segment_clean_expr(H: AnalyticExpr, z: Sequence[float]) -> bool:
    zs = [float(v) for v in z]
    for k in range(1, 512):
        t = k / 512 * (1 - 1e-7)
        pt = [t * v for v in zs]
        val = H.eval(pt)
        scale = max(1.0, H.eval_abs(pt))
        if val <= 1e-9 * scale:
            return False
    return True


def _nonneg_series_check(F: RationalGF, depth: int = 24) -> bool:
    """Is the denominator of the form 1 - P with P having nonnegative
    coefficients?  For non-polynomial denominators the check is at a
    truncation depth and labeled as such by callers."""
    from .polycore import series_expand as _se
    if isinstance(F.denominator, PolyExpr):
        h = F.denominator.poly
    else:
        h = _se(F.denominator, depth)
    c0 = h.constant_term()
    if c0 <= 0:
        return False
    p = MultiPoly.const(h.vars, c0) - h
    return all(c >= 0 for c in p.scale(1 / c0).terms.values())


def is_minimal(F: RationalGF, point: Sequence) -> MinimalityResult:
    """Minimality of a positive variety point via the segment test.

    No denominator factor may vanish on the open segment from the origin;
    exact Sturm counting is used for rational points, float root finding
    otherwise.  Combinatorial denominators of the form 1 - P with P
    nonnegative and aperiodic upgrade a clean segment to strict
    minimality; otherwise a torus scan provides a labeled heuristic
    upgrade.
    """
    coords = [c if isinstance(c, Fraction) else complex(c) for c in point]

    def positive(c):
        if isinstance(c, Fraction):
            return c > 0
        return abs(c.imag) <= 1e-9 * (1 + abs(c.real)) and c.real > 0

    if not all(positive(c) for c in coords):
        return MinimalityResult(Minimality.UNKNOWN,
                                {"reason": "point is not positive real"})
    rationals = all(isinstance(c, Fraction) for c in coords)
    factors = _factors_of(F)
    evidence: dict = {"segment": "clean"}
    if factors is not None:
        for f in factors:
            if rationals:
                inside = _segment_roots_exact(f, coords)
                evidence["method"] = "sturm"
            else:
                inside = _segment_roots_float(
                    f, [c.real for c in map(complex, coords)])
                evidence["method"] = "float-roots"
            if inside:
                return MinimalityResult(
                    Minimality.NOT_MINIMAL,
                    {"segment": "factor vanishes inside the unit segment"})
    else:
        if not _segment_clean_expr(F.denominator,
                                   [complex(c).real for c in coords]):
            return MinimalityResult(
                Minimality.NOT_MINIMAL,
                {"segment": "denominator vanishes inside the unit segment"})
        evidence["method"] = "dense-sampling"
    if F.combinatorial and _nonneg_series_check(F):
        p_support = _one_minus_support(F)
        ap = aperiodicity_check_support(p_support, len(F.variables))
        if ap.aperiodic:
            evidence["upgrade"] = "nonnegative aperiodic denominator"
            return MinimalityResult(Minimality.STRICTLY_MINIMAL, evidence)
        evidence["lattice_index"] = ap.lattice_index
        return MinimalityResult(Minimality.MINIMAL, evidence)
    if len(F.variables) <= 3 and _torus_scan_clean(F, coords):
        evidence["upgrade"] = "torus scan (heuristic)"
        return MinimalityResult(Minimality.STRICTLY_MINIMAL, evidence)
    return MinimalityResult(Minimality.MINIMAL, evidence)


def _one_minus_support(F: RationalGF, depth: int = 24) -> list[tuple[int, ...]]:
    from .polycore import series_expand as _se
    if isinstance(F.denominator, PolyExpr):
        h = F.denominator.poly
    else:
        h = _se(F.denominator, depth)
    origin = (0,) * len(F.variables)
    return [e for e in h.terms if e != origin]


def _torus_scan_clean(F: RationalGF, coords, steps: int | None = None) -> bool:
    d = len(F.variables)
    H = F.denominator
    z = [complex(c) for c in coords]
    if steps is None:
        steps = 64 if d == 2 else 16
    angles = [2 * math.pi * k / steps for k in range(steps)]
    for thetas in product(angles, repeat=d):
        if all(abs(t) < 1e-12 for t in thetas):
            continue
        pt = [v * cmath.exp(1j * t) for v, t in zip(z, thetas)]
        try:
            val = H.eval(pt)
            scale = max(1.0, H.eval_abs(pt))
        except Exception:
            return False
        if abs(complex(val)) <= 1e-6 * scale:
            return False
    return True


# -- aperiodicity and torus companions ---------------------------------------------

@dataclass
class AperiodicityResult:
    aperiodic: bool
    lattice_index: int
    rank: int


def _integer_row_reduce(rows: list[list[int]], d: int) -> list[list[int]]:
    """Row-echelon basis of the integer lattice spanned by ``rows``."""
    basis: list[list[int]] = [list(r) for r in rows if any(r)]
    echelon: list[list[int]] = []
    col = 0
    while col < d and basis:
        live = [r for r in basis if r[col] != 0]
        rest = [r for r in basis if r[col] == 0]
        if not live:
            col += 1
            basis = rest
            continue
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            pivot = live[0]
            new_live = [pivot]
            for r in live[1:]:
                q = r[col] // pivot[col]
                nr = [a - q * b for a, b in zip(r, pivot)]
                if nr[col] != 0:
                    new_live.append(nr)
                elif any(nr):
                    rest.append(nr)
            if len(new_live) == len(live) and len(new_live) > 1:
                # all rows share the pivot value; subtract once more
                r = new_live.pop()
                nr = [a - b for a, b in zip(r, new_live[0])]
                if nr[col] != 0:
                    new_live.append(nr)
                elif any(nr):
                    rest.append(nr)
            live = new_live
        echelon.append(live[0])
        basis = rest
        col += 1
    return echelon


def aperiodicity_check_support(support: Sequence[Sequence[int]],
                               d: int) -> AperiodicityResult:
    """Does the exponent support generate the full integer lattice?

    Generators are the support vectors themselves together with pairwise
    differences (the denominator is taken in the form 1 - P, so the origin
    belongs to the configuration).  The lattice index is the product of
    the echelon pivots; index one means aperiodic.
    """
    vecs = [list(e) for e in support]
    rows = list(vecs)
    if vecs:
        base = vecs[0]
        rows.extend([[a - b for a, b in zip(v, base)] for v in vecs[1:]])
    ech = _integer_row_reduce(rows, d)
    rank = len(ech)
    if rank < d:
        return AperiodicityResult(False, 0, rank)
    idx = 1
    pivots = []
    for row in ech:
        lead = next(v for v in row if v != 0)
        pivots.append(abs(lead))
    for p in pivots:
        idx *= p
    return AperiodicityResult(idx == 1, idx, rank)


def aperiodicity_check(P: MultiPoly) -> AperiodicityResult:
    """Aperiodicity of a denominator written as H = 1 - P."""
    return aperiodicity_check_support(list(P.terms.keys()), len(P.vars))


def torus_companions(support: Sequence[Sequence[int]], d: int,
                     cap: int = 64) -> list[tuple[Fraction, ...]]:
    """All phase vectors theta (as fractions of a full turn) with
    e . theta integral for every support vector e.

    These index the points z * exp(2 pi i theta) sharing |z_j| and the
    same monomial phases.  Enumeration is capped by the lattice index.
    """
    ap = aperiodicity_check_support(support, d)
    if ap.rank < d:
        raise AnalysisRefusal("degenerate-support",
                              "support does not span the lattice")
    m = ap.lattice_index
    if m == 1:
        return [tuple(Fraction(0) for _ in range(d))]
    if m > cap:
        raise AnalysisRefusal("companion-enumeration-cap",
                              f"lattice index {m} exceeds enumeration cap")
    sols = []
    for ks in product(range(m), repeat=d):
        if all(sum(e[j] * ks[j] for j in range(d)) % m == 0
               for e in support):
            sols.append(tuple(Fraction(k, m) for k in ks))
    return sols


# -- contributing-point selection ----------------------------------------------------

@dataclass
class ContribResult:
    mode: str  # "selected" or "ranked"
    points: list[CriticalPoint]
    companions: list[tuple[Fraction, ...]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _intersection_candidates(F: RationalGF,
                             direction: Direction) -> list[CriticalPoint]:
    """Pairwise factor intersections (candidate multiple points), d = 2."""
    factors = _factors_of(F)
    if factors is None or len(factors) < 2 or len(F.variables) != 2:
        return []
    xv, yv = F.variables
    out: list[CriticalPoint] = []
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            fa, fb = factors[i], factors[j]
            if fa == fb:
                continue
            rx = resultant(fa, fb, yv)
            if not rx:
                continue
            try:
                ux = uni_squarefree(uni_from_multipoly(rx.drop_var(yv), xv))
            except ValueError:
                continue
            if len(ux) <= 1:
                continue
            for ax in real_roots(ux):
                fy = fa.eval_partial({xv: Fraction(ax.approx)})
                uy = uni_from_multipoly(fy, yv)
                if len(uy) < 2:
                    continue
                for ay in real_roots(uy):
                    pt = (ax.approx, ay.approx)
                    if any(abs(v) < 1e-12 for v in pt):
                        continue
                    sb = max(1.0, fb.eval_abs(pt))
                    if abs(float(fb.eval(pt))) > 1e-6 * sb:
                        continue
                    out.append(CriticalPoint(
                        coords=pt,
                        height=_direction_height(pt, direction),
                        residual=0.0,
                        evidence={"source": "factor-intersection"}))
    return out


def cone_membership(F: RationalGF, point: Sequence[complex],
                    vanishing: Sequence[int],
                    direction: Direction) -> tuple[str, list[float]]:
    """Position of the direction relative to the dual cone at a multiple
    point: 'interior', 'boundary', or 'outside'."""
    factors = _factors_of(F)
    d = len(F.variables)
    rows = []
    for k in vanishing:
        f = factors[k]
        rows.append([-complex(point[j]).real *
                     float(f.partial(F.variables[j]).eval(
                         [complex(p).real for p in point]))
                     for j in range(d)])
    B = np.array(rows, dtype=float).T  # columns are the generators
    target = np.array([float(v) for v in direction.vector])
    coeffs, res, *_ = np.linalg.lstsq(B, target, rcond=None)
    fit = B @ coeffs
    if np.linalg.norm(fit - target) > 1e-7 * (1 + np.linalg.norm(target)):
        return "outside", list(coeffs)
    tolc = 1e-7 * max(1.0, float(np.max(np.abs(coeffs))))
    if all(c > tolc for c in coeffs):
        return "interior", list(coeffs)
    if all(c > -tolc for c in coeffs):
        return "boundary", list(coeffs)
    return "outside", list(coeffs)


def contrib(F: RationalGF, direction: Direction,
            backend: str = "auto") -> ContribResult:
    """Contributing singularities for a direction.

    Combinatorial inputs select the minimal positive point (a transverse
    multiple point whose cone contains the direction takes precedence);
    non-combinatorial inputs return a height-ranked candidate list and
    never select silently.
    """
    candidates = solve_critical_points(F, direction, backend)
    candidates = candidates + _intersection_candidates(F, direction)
    deduped: list[CriticalPoint] = []
    for p in candidates:
        if not any(all(abs(complex(a) - complex(b)) <= 1e-7 * (1 + abs(complex(b)))
                       for a, b in zip(p.coords, q.coords))
                   for q in deduped):
            deduped.append(p)
    candidates = deduped

    for p in candidates:
        try:
            c = classify_point(F, p.coords)
            p.classification = c.kind
            p.vanishing = c.vanishing
        except ValueError:
            p.classification = PointType.UNCLASSIFIED

    if not F.combinatorial:
        ranked = sorted(
            (p for p in candidates),
            key=lambda p: (math.isnan(p.height), p.height,
                           _key_coords(p.coords)))
        for p in ranked:
            if p.is_positive_real():
                mr = is_minimal(F, p.coords)
                p.minimality = mr.status
                p.evidence.update(mr.evidence)
        return ContribResult(
            mode="ranked", points=ranked,
            notes=["input not marked combinatorial: ranked candidates only, "
                   "no contributing point is selected"])

    positive = [p for p in candidates if p.is_positive_real()]
    for p in positive:
        mr = is_minimal(F, [complex(c).real for c in p.coords])
        p.minimality = mr.status
        p.evidence.update(mr.evidence)
    minimal = [p for p in positive
               if p.minimality in (Minimality.STRICTLY_MINIMAL,
                                   Minimality.MINIMAL)]
    if not minimal:
        raise AnalysisRefusal(
            "no-minimal-point",
            "no minimal positive critical point for this direction",
            payload={"candidates": candidates})

    multiples = [p for p in minimal
                 if p.classification == PointType.MULTIPLE]
    for p in multiples:
        where, coeffs = cone_membership(F, p.coords, p.vanishing, direction)
        p.evidence["cone"] = where
        p.evidence["cone_coefficients"] = coeffs
        if where == "interior":
            return ContribResult(mode="selected", points=[p])
        if where == "boundary":
            raise AnalysisRefusal(
                "cone-boundary",
                "direction lies on the boundary of the cone at a multiple "
                "point; the smooth formula does not apply and the limit "
                "constant differs",
                payload={"point": p})

    smooth = [p for p in minimal if p.classification == PointType.SMOOTH
              and p.residual < 1e-6]
    if smooth:
        smooth.sort(key=lambda p: (p.height, _key_coords(p.coords)))
        chosen = smooth[0]
        support = _one_minus_support(F)
        try:
            comps = torus_companions(support, len(F.variables))
        except AnalysisRefusal:
            comps = [tuple(Fraction(0) for _ in F.variables)]
        return ContribResult(mode="selected", points=[chosen],
                             companions=comps)

    raise AnalysisRefusal(
        "no-contributing-point",
        "no applicable contributing point (bad or non-transverse geometry)",
        payload={"candidates": candidates})
