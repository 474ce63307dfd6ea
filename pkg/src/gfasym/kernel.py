"""Kernel-method reduction of nonnegative-height walk recursions.

A weighted step set drives the recursion a[r, s] = sum_i w_i
a[r - dx_i, s - dy_i] over the quarter lattice with seed a[0, 0] = 1.
Multiplying the generating function by the kernel polynomial of the
steps cancels everything except boundary rows, and when the kernel is
quadratic in the height variable its root branch through the origin
closes the system: the array becomes a Riordan pair, which the drift
machinery in riordan_lagrange turns into leading-term asymptotics.

Only unit descent depth and unit rise reduce to Riordan form here;
deeper kernels and boundary seeds other than a single unit mass are
out of scope, and such arrays should enter as explicit generating
functions instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .asymptotics import AsymptoticTerm
from .polycore import AnalysisRefusal, MultiPoly, real_roots
from .riordan_lagrange import ImplicitSF, SeriesFunc, riordan_leading_term

__all__ = [
    "KernelReduction",
    "StepSet",
    "kernel_gf",
    "kernel_poly",
    "small_branch",
    "walk_asymptotics",
]


@dataclass
class StepSet:
    """Weighted lattice steps (dx, dy, weight) of a height recursion.

    Each step must advance the length coordinate (dx > 0) or climb in
    place (dx = 0 with dy > 0), so the recursion is well founded.  The
    descent depth p = -min dy and the rise P = max dy must both be
    positive, otherwise the kernel never interacts with the boundary.
    Plain (dx, dy) pairs get weight 1.
    """

    steps: list[tuple]
    depth: int = field(init=False)
    rise: int = field(init=False)

    def __post_init__(self):
        cooked = []
        for step in self.steps:
            if len(step) == 2:
                dx, dy = step
                w = Fraction(1)
            else:
                dx, dy, w = step
                w = Fraction(w)
            dx, dy = int(dx), int(dy)
            if w <= 0:
                raise ValueError("step weights must be positive")
            if dx < 0 or (dx == 0 and dy <= 0):
                raise ValueError(f"step ({dx}, {dy}) does not advance")
            cooked.append((dx, dy, w))
        if not cooked:
            raise ValueError("need at least one step")
        pairs = [(dx, dy) for dx, dy, _ in cooked]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate steps")
        self.steps = cooked
        self.depth = -min(dy for _, dy, _ in cooked)
        self.rise = max(dy for _, dy, _ in cooked)
        if self.depth <= 0:
            raise ValueError("need at least one descending step")
        if self.rise <= 0:
            raise ValueError("need at least one ascending step")


def kernel_poly(E: StepSet) -> tuple[MultiPoly, MultiPoly]:
    """Cleared kernel Q(x, y) of the step set, plus its rise polynomial.

    Q is y^p (1 - sum_i w_i x^{dx_i} y^{dy_i}) scaled by the least
    common denominator of the weights, so its coefficients are
    integers.  The rise polynomial C(x) collects the weighted top-rise
    steps sum over {i : dy_i = P} of w_i x^{dx_i} without that scaling.
    """
    p = E.depth
    terms = {(0, p): Fraction(1)}
    for dx, dy, w in E.steps:
        e = (dx, dy + p)
        terms[e] = terms.get(e, Fraction(0)) - w
    m = 1
    for c in terms.values():
        m = math.lcm(m, c.denominator)
    q = MultiPoly(("x", "y"), {e: c * m for e, c in terms.items()})
    top: dict[tuple, Fraction] = {}
    for dx, dy, w in E.steps:
        if dy == E.rise:
            top[(dx,)] = top.get((dx,), Fraction(0)) + w
    return q, MultiPoly(("x",), top)


def _branch_radius(q: MultiPoly) -> float | None:
    """Smallest positive zero of the y-discriminant, or None."""
    yv = q.vars[1]
    q0, q1, q2 = q.coeffs_in(yv)
    disc = (q1 * q1 - (q2 * q0).scale(4)).drop_var(yv)
    if not disc or disc.total_degree() == 0:
        return None
    pos = [float(r) for r in real_roots(disc) if float(r) > 1e-12]
    return min(pos) if pos else None


def small_branch(Q: MultiPoly, order: int) -> tuple[list, ImplicitSF]:
    """Root branch y = xi(x) of a quadratic kernel with xi(0) = 0.

    Returns the exact truncated series of xi through x^order together
    with the implicit backend anchored at (0, 0).  The series Newton
    lift certifies Q(x, xi(x)) = O(x^(order+1)) exactly.
    """
    if len(Q.vars) != 2:
        raise ValueError("the kernel must be bivariate")
    yv = Q.vars[1]
    if Q.degree_in(yv) != 2:
        raise AnalysisRefusal(
            "kernel-not-quadratic",
            f"the kernel has degree {Q.degree_in(yv)} in {yv}; only "
            "quadratic kernels are supported")
    origin = [Fraction(0), Fraction(0)]
    if Q.eval(origin) != 0:
        raise AnalysisRefusal(
            "no-vanishing-branch",
            "no kernel root passes through the origin")
    if Q.partial(yv).eval(origin) == 0:
        raise AnalysisRefusal(
            "no-vanishing-branch",
            "the kernel root at the origin is not a simple branch")
    sf = ImplicitSF(Q, Fraction(0), radius=_branch_radius(Q))
    return sf.series(order), sf


def _strip_content(p: MultiPoly) -> MultiPoly:
    """Remove the common monomial factor and the rational content."""
    if not p:
        return p
    k = len(p.vars)
    shift = [min(e[i] for e in p.terms) for i in range(k)]
    num, den = 0, 1
    for c in p.terms.values():
        num = math.gcd(num, c.numerator)
        den = math.lcm(den, c.denominator)
    g = Fraction(num, den)
    return MultiPoly(p.vars, {
        tuple(e[i] - shift[i] for i in range(k)): c / g
        for e, c in p.terms.items()})


@dataclass
class KernelReduction:
    """Riordan form of a unit-depth, unit-rise walk array.

    The array entry is a[r, s] = [x^r] phi(x) v(x)^s.  Writing the
    weighted kernel as q2 y^2 + q1 y + q0 with univariate coefficients,
    the small branch xi pairs with the conjugate q0 / (q2 xi), and the
    row generator phi = xi / a and column generator v = C xi / a are
    algebraic branches of rearranged quadratics; all three share the
    kernel's branch-point radius.
    """

    step_set: StepSet
    kernel: MultiPoly
    descent_poly: MultiPoly
    rise_poly: MultiPoly
    xi: ImplicitSF
    phi: SeriesFunc
    v: SeriesFunc


def kernel_gf(E: StepSet) -> KernelReduction:
    """Riordan reduction F = (xi/a) / (1 - [C xi/a] y) of the walk array.

    Here a(x) collects the weighted descent steps and C(x) the weighted
    rise steps.  Needs depth p = 1 and rise P = 1; anything deeper does
    not reduce to a Riordan pair and is refused.
    """
    if E.depth != 1 or E.rise != 1:
        raise AnalysisRefusal(
            "kernel-shape-unsupported",
            f"descent depth {E.depth} and rise {E.rise} fall outside the "
            "unit-depth, unit-rise case; enter the generating function "
            "explicitly instead",
            payload={"depth": E.depth, "rise": E.rise})
    kernel, crise = kernel_poly(E)
    down: dict[tuple, Fraction] = {}
    mid: dict[tuple, Fraction] = {(0,): Fraction(1)}
    for dx, dy, w in E.steps:
        if dy == -1:
            down[(dx,)] = down.get((dx,), Fraction(0)) + w
        elif dy == 0:
            mid[(dx,)] = mid.get((dx,), Fraction(0)) - w
    apoly = MultiPoly(("x",), down)
    q1 = MultiPoly(("x",), mid)
    radius = _branch_radius(kernel)
    xi = ImplicitSF(kernel, Fraction(0), radius=radius)
    # phi = xi/a satisfies -(C a) w^2 + q1 w - 1 = 0 with phi(0) = 1,
    # and v = C xi/a satisfies -(C a) u^2 + (q1 C) u - C^2 = 0 with
    # v(0) = C(0); both keep the bounded branch, the conjugates blow up.
    xw = ("x", "w")
    w_var = MultiPoly.var("w", xw)
    ca = (crise * apoly).with_vars(xw)
    q1w = q1.with_vars(xw)
    alpha_phi = -(ca * w_var * w_var) + q1w * w_var - MultiPoly.const(xw, 1)
    xu = ("x", "u")
    u_var = MultiPoly.var("u", xu)
    cau = (crise * apoly).with_vars(xu)
    q1c = (q1 * crise).with_vars(xu)
    c2 = (crise * crise).with_vars(xu)
    alpha_v = _strip_content(-(cau * u_var * u_var) + q1c * u_var - c2)
    phi = ImplicitSF(alpha_phi, Fraction(1), radius=radius)
    v = ImplicitSF(alpha_v, crise.constant_term(), radius=radius)
    return KernelReduction(step_set=E, kernel=kernel, descent_poly=apoly,
                           rise_poly=crise, xi=xi, phi=phi, v=v)


def walk_asymptotics(E: StepSet, r: int, s: int) -> AsymptoticTerm:
    """Leading term of the walk mass ending at (r, s).

    Composes the Riordan reduction with the drift solver; the kernel's
    lattice periodicity rides along, so parity-forced zero entries
    evaluate to exactly zero.
    """
    red = kernel_gf(E)
    term = riordan_leading_term(red.phi, red.v, r, s)
    meta = dict(term.meta)
    meta["steps"] = [(dx, dy, w) for dx, dy, w in E.steps]
    return AsymptoticTerm(
        kind="kernel-walk",
        variables=term.variables,
        contributions=term.contributions,
        order_exponent=term.order_exponent,
        norm_index=term.norm_index,
        meta=meta)
