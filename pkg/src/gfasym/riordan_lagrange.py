"""Asymptotics for arrays of the form [x^r] phi(x) v(x)^s and for
coefficients extracted by inversion of f = z phi(f).

The backends wrap a univariate series three ways: explicit polynomial,
rational, or a branch of an algebraic curve followed by Newton
continuation.  Everything downstream needs only the value and two
derivatives at a positive point plus enough exact series terms to read
off the support lattice.  The drift mu = x v'/v and its dispersion
sigma2 = x dmu/dx locate and calibrate the saddle; periodic support is
handled by summing rotated companion contributions so that forced-zero
residue classes evaluate to exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .polycore import (
    AnalysisRefusal,
    MultiPoly,
    uni_derivative,
    uni_eval,
    uni_from_multipoly,
    uni_normalize,
    real_roots,
    uni_squarefree,
)
from .asymptotics import AsymptoticTerm, PointContribution, evaluate_term
from .series_oracle import RationalGF

TWO_PI = 2.0 * math.pi


# -- truncated series arithmetic (exact, dense lists, index = exponent) -----------


def _pad(a: list, n: int) -> list:
    return list(a[:n + 1]) + [Fraction(0)] * max(0, n + 1 - len(a))


def _ser_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > n:
            continue
        for j, bj in enumerate(b):
            if i + j > n:
                break
            if bj:
                out[i + j] += ai * bj
    return out


def _ser_div(a: list, b: list, n: int) -> list:
    if not b or b[0] == 0:
        raise ZeroDivisionError("series division needs a unit constant term")
    out = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        acc = a[k] if k < len(a) else Fraction(0)
        for j in range(1, min(k, len(b) - 1) + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def _ser_pow(a: list, k: int, n: int) -> list:
    out = _pad([Fraction(1)], n)
    base = _pad(a, n)
    while k:
        if k & 1:
            out = _ser_mul(out, base, n)
        k >>= 1
        if k:
            base = _ser_mul(base, base, n)
    return out


def _ser_exp(a: list, n: int) -> list:
    """exp of a series with zero constant term."""
    if a and a[0] != 0:
        raise ValueError("exp needs a series vanishing at zero")
    a = _pad(a, n)
    out = [Fraction(0)] * (n + 1)
    out[0] = Fraction(1)
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(1, m + 1):
            if a[j]:
                acc += j * a[j] * out[m - j]
        out[m] = acc / m
    return out


def _ser_compose(outer: list, inner: list, n: int) -> list:
    """outer(inner) truncated, inner vanishing at zero."""
    if inner and inner[0] != 0:
        raise ValueError("composition needs an inner series vanishing at zero")
    out = [Fraction(0)] * (n + 1)
    for c in reversed(_pad(outer, n)):
        out = _ser_mul(out, inner, n)
        out[0] += c
    return out


# -- series backends ----------------------------------------------------------------


class SeriesFunc:
    """A univariate analytic function on a real interval from 0."""

    radius: float | None = None

    def value(self, x):
        raise NotImplementedError

    def derivs(self, x):
        """(v, v', v'') at x."""
        raise NotImplementedError

    def series(self, n: int) -> list:
        """Exact Taylor coefficients through x^n."""
        raise NotImplementedError


@dataclass
class PolynomialSF(SeriesFunc):
    """v given by its coefficient list (index = exponent)."""

    coeffs: list
    radius: float | None = None

    def __post_init__(self):
        self.coeffs = uni_normalize([Fraction(c) for c in self.coeffs])

    def value(self, x):
        return uni_eval(self.coeffs, x)

    def derivs(self, x):
        d1 = uni_derivative(self.coeffs)
        d2 = uni_derivative(d1)
        return (uni_eval(self.coeffs, x), uni_eval(d1, x), uni_eval(d2, x))

    def series(self, n: int) -> list:
        return _pad(self.coeffs, n)


@dataclass
class RationalSF(SeriesFunc):
    """v = p/q with q(0) != 0."""

    num: list
    den: list
    radius: float | None = None

    def __post_init__(self):
        self.num = uni_normalize([Fraction(c) for c in self.num])
        self.den = uni_normalize([Fraction(c) for c in self.den])
        if not self.den or self.den[0] == 0:
            raise ValueError("denominator must not vanish at zero")
        if self.radius is None and len(self.den) > 1:
            poles = np.roots([float(c) for c in reversed(self.den)])
            self.radius = float(min(abs(z) for z in poles))

    def value(self, x):
        q = uni_eval(self.den, x)
        if q == 0:
            raise ZeroDivisionError("pole of the rational series function")
        return uni_eval(self.num, x) / q

    def derivs(self, x):
        p1 = uni_derivative(self.num)
        p2 = uni_derivative(p1)
        q1 = uni_derivative(self.den)
        q2 = uni_derivative(q1)
        q = uni_eval(self.den, x)
        if q == 0:
            raise ZeroDivisionError("pole of the rational series function")
        v = uni_eval(self.num, x) / q
        dv = (uni_eval(p1, x) - v * uni_eval(q1, x)) / q
        ddv = (uni_eval(p2, x) - 2 * dv * uni_eval(q1, x)
               - v * uni_eval(q2, x)) / q
        return (v, dv, ddv)

    def series(self, n: int) -> list:
        return _ser_div(_pad(self.num, n), _pad(self.den, n), n)


@dataclass
class ImplicitSF(SeriesFunc):
    """The branch of alpha(x, w) = 0 through (0, w0).

    The anchor must be a simple root in w, which keeps both Newton
    continuation along [0, x] and the series lift well posed until a
    branch point.
    """

    alpha: MultiPoly
    w0: Fraction
    radius: float | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False,
                         compare=False)

    def __post_init__(self):
        if len(self.alpha.vars) != 2:
            raise ValueError("implicit backend needs exactly two variables")
        self.w0 = Fraction(self.w0)
        self._xv, self._wv = self.alpha.vars
        self._ax = self.alpha.partial(self._xv)
        self._aw = self.alpha.partial(self._wv)
        if self.alpha.eval([Fraction(0), self.w0]) != 0:
            raise ValueError("anchor does not lie on the curve")
        if self._aw.eval([Fraction(0), self.w0]) == 0:
            raise ValueError("anchor is not a simple root in w")

    def _newton(self, x: float, w: float) -> float:
        for _ in range(80):
            f = float(self.alpha.eval([x, w]))
            fw = float(self._aw.eval([x, w]))
            if fw == 0:
                raise AnalysisRefusal(
                    "branch-tracking-failed",
                    "the branch hit a point with vanishing w-derivative")
            step = f / fw
            w -= step
            if abs(step) <= 1e-15 * (1 + abs(w)):
                return w
        raise AnalysisRefusal("branch-tracking-failed",
                              "Newton did not converge on the branch")

    def value(self, x):
        x = float(x)
        if x == 0:
            return float(self.w0)
        steps = 8
        while steps <= 1024:
            try:
                w = float(self.w0)
                for k in range(1, steps + 1):
                    w = self._newton(x * k / steps, w)
                return w
            except AnalysisRefusal:
                steps *= 4
        raise AnalysisRefusal(
            "branch-tracking-failed",
            f"could not continue the branch to x = {x}")

    def derivs(self, x):
        x = float(x)
        w = self.value(x)
        z = [x, w]
        ax = float(self._ax.eval(z))
        aw = float(self._aw.eval(z))
        axx = float(self._ax.partial(self._xv).eval(z))
        axw = float(self._ax.partial(self._wv).eval(z))
        aww = float(self._aw.partial(self._wv).eval(z))
        if aw == 0:
            raise AnalysisRefusal("branch-tracking-failed",
                                  "vanishing w-derivative at the point")
        dv = -ax / aw
        ddv = -(aw * aw * axx + ax * ax * aww - 2 * axw * ax * aw) / aw ** 3
        return (w, dv, ddv)

    def series(self, n: int) -> list:
        if n in self._cache:
            return list(self._cache[n])
        # Newton in the truncated series ring doubles the correct prefix
        # each round; the exact residual check certifies the lift.
        xi = self.alpha.vars.index(self._xv)
        wi = self.alpha.vars.index(self._wv)
        deg_w = self.alpha.degree_in(self._wv)
        w = [self.w0]
        for _ in range(max(1, math.ceil(math.log2(n + 2)) + 1)):
            w = _pad(w, n)
            wpow = [_pad([Fraction(1)], n), list(w)]
            for _ in range(deg_w - 1):
                wpow.append(_ser_mul(wpow[-1], w, n))
            num = [Fraction(0)] * (n + 1)
            den = [Fraction(0)] * (n + 1)
            for e, c in self.alpha.terms.items():
                i, j = e[xi], e[wi]
                if i > n:
                    continue
                for k, wc in enumerate(wpow[j]):
                    if i + k <= n and wc:
                        num[i + k] += c * wc
                if j >= 1:
                    for k, wc in enumerate(wpow[j - 1]):
                        if i + k <= n and wc:
                            den[i + k] += j * c * wc
            if all(c == 0 for c in num):
                break
            corr = _ser_div(num, den, n)
            w = [a - b for a, b in zip(w, corr)]
        if any(c != 0 for c in self._residual(w, n)):
            raise AnalysisRefusal("implicit-series-failed",
                                  "series Newton did not close the relation")
        self._cache[n] = list(w)
        return w

    def _residual(self, w: list, n: int) -> list:
        out = [Fraction(0)] * (n + 1)
        xi = self.alpha.vars.index(self._xv)
        wi = self.alpha.vars.index(self._wv)
        wpow = [_pad([Fraction(1)], n)]
        for _ in range(self.alpha.degree_in(self._wv)):
            wpow.append(_ser_mul(wpow[-1], w, n))
        for e, c in self.alpha.terms.items():
            i, j = e[xi], e[wi]
            if i > n:
                continue
            for k, wc in enumerate(wpow[j]):
                if i + k <= n and wc:
                    out[i + k] += c * wc
        return out


# -- drift and dispersion -----------------------------------------------------------


def mu(sf: SeriesFunc, x) -> float:
    """Logarithmic derivative x v'(x) / v(x)."""
    v, dv, _ = sf.derivs(x)
    if v == 0:
        raise ZeroDivisionError("mu undefined where v vanishes")
    return float(x) * float(dv) / float(v)


def sigma2(sf: SeriesFunc, x) -> float:
    """Dispersion x^2 v''/v + mu - mu^2 = x dmu/dx."""
    v, dv, ddv = sf.derivs(x)
    if v == 0:
        raise ZeroDivisionError("sigma2 undefined where v vanishes")
    x = float(x)
    m = x * float(dv) / float(v)
    return x * x * float(ddv) / float(v) + m - m * m


def series_support(sf: SeriesFunc, depth: int = 48) -> tuple[int, int, list]:
    """(order a, lattice gap b, support) of the series through ``depth``.

    b is the gcd of the exponent gaps above the order; a bare monomial
    reports b = 0.
    """
    coeffs = sf.series(depth)
    support = [k for k, c in enumerate(coeffs) if c != 0]
    if not support:
        raise AnalysisRefusal("zero-series",
                              f"the series vanishes to depth {depth}")
    a = support[0]
    b = 0
    for k in support[1:]:
        b = math.gcd(b, k - a)
    return a, b, support


def _class_of(support, b: int) -> int | None:
    """The unique residue class mod b of the support, or None if mixed."""
    classes = {k % b for k in support}
    if len(classes) == 1:
        return classes.pop()
    return None


def solve_mu(sf: SeriesFunc, lam: float, hi_hint: float | None = None,
             depth: int = 48) -> float:
    """The positive x with mu(x) = lam, by bracketing and Brent's method.

    The drift increases strictly from the series order a, so the root is
    unique.  A ratio at or below a is an empty direction (the array
    vanishes there); a ratio the drift never reaches before the domain
    ends (a pole, a branch point, or a polynomial's top degree) is
    refused with the reachable supremum.
    """
    a, b, support = series_support(sf, depth)
    if b == 0:
        raise AnalysisRefusal(
            "monomial-series",
            "the series is a single monomial; the drift is constant")
    lam = float(lam)
    if lam <= a + 1e-12:
        raise AnalysisRefusal(
            "empty-direction",
            f"the requested ratio {lam} does not exceed the series order "
            f"{a}; coefficients on that side vanish identically",
            payload={"side": "below-order", "vanishes": True, "order": a})
    if isinstance(sf, PolynomialSF):
        deg = len(sf.coeffs) - 1
        if lam >= deg - 1e-12:
            raise AnalysisRefusal(
                "empty-direction",
                f"the requested ratio {lam} is not below the degree {deg}; "
                "coefficients on that side vanish identically",
                payload={"side": "above-degree", "vanishes": lam > deg,
                         "degree": deg})
    lo = 1e-9
    while True:
        try:
            m_lo = mu(sf, lo)
            break
        except (ZeroDivisionError, AnalysisRefusal):
            lo *= 10
            if lo > 1e-3:
                raise AnalysisRefusal("drift-evaluation-failed",
                                      "cannot evaluate the drift near zero")
    if m_lo >= lam:
        raise AnalysisRefusal(
            "empty-direction",
            f"the drift already exceeds {lam} at x = {lo}",
            payload={"side": "below-order", "vanishes": False})
    cap = sf.radius if sf.radius is not None else math.inf
    hi = hi_hint if hi_hint is not None else min(max(4 * lo, 0.25), 0.875 * cap)
    hi_ok, m_best = lo, m_lo
    for _ in range(200):
        try:
            m_hi = mu(sf, hi)
            usable = math.isfinite(m_hi)
        except (ZeroDivisionError, AnalysisRefusal, OverflowError):
            usable = False
        if usable and m_hi > lam:
            break
        if usable:
            hi_ok, m_best = hi, m_hi
            hi = hi * 2 if hi * 2 < cap else (hi + cap) / 2
        else:
            hi = (hi_ok + hi) / 2
        if hi - hi_ok < 1e-14 * (1 + hi_ok):
            raise AnalysisRefusal(
                "empty-direction",
                f"the drift stays below {lam} on the reachable domain "
                f"(max observed {m_best})",
                payload={"side": "above-range", "vanishes": False,
                         "sup": m_best})
    else:
        raise AnalysisRefusal(
            "empty-direction",
            f"the drift stays below {lam} on the reachable domain "
            f"(max observed {m_best})",
            payload={"side": "above-range", "vanishes": False,
                     "sup": m_best})
    x0 = brentq(lambda t: mu(sf, t) - lam, hi_ok, hi,
                xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return float(x0)


# -- exact series oracles -----------------------------------------------------------


def lagrange_series(phi: SeriesFunc, psi="identity",
                    order: int = 40) -> list:
    """Exact coefficients of psi(f), f = z phi(f), through z^order.

    Fixed-point iteration in the exact truncated series ring; each round
    settles at least one more coefficient, so ``order`` rounds suffice.
    """
    pser = phi.series(order)
    if not pser or pser[0] == 0:
        raise AnalysisRefusal(
            "invalid-branching-series",
            "the branching series must have a nonzero constant term")
    f = [Fraction(0)] * (order + 1)
    for _ in range(order + 1):
        nxt = _ser_compose(pser, f, order)
        nxt = [Fraction(0)] + nxt[:order]
        if nxt == f:
            break
        f = nxt
    return _apply_outer(psi, f, order)


def inversion_coefficient(phi: SeriesFunc, psi="identity",
                          n: int = 1) -> Fraction:
    """Exact [z^n] psi(f) via the classical inversion extraction
    (1/n) [y^(n-1)] psi'(y) phi(y)^n.  Cross-checks lagrange_series.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    pn = _ser_pow(phi.series(n - 1), n, n - 1)
    dpsi = _outer_derivative_series(psi, n - 1)
    acc = Fraction(0)
    for j, c in enumerate(dpsi):
        if c:
            acc += c * pn[n - 1 - j]
    return acc / n


def _apply_outer(psi, f: list, order: int) -> list:
    if isinstance(psi, str):
        if psi == "identity":
            return f
        if psi == "sequences":
            one_minus = [Fraction(1)] + [-c for c in f[1:]]
            return _ser_div(_pad([Fraction(1)], order), one_minus, order)
        if psi == "sets":
            return _ser_exp(f, order)
        raise ValueError(f"unknown schema {psi!r}")
    return _ser_compose(psi.series(order), f, order)


def _outer_derivative_series(psi, order: int) -> list:
    if isinstance(psi, str):
        if psi == "identity":
            return _pad([Fraction(1)], order)
        if psi == "sequences":
            return _ser_pow(_ser_div([Fraction(1)], [Fraction(1),
                            Fraction(-1)], order), 2, order)
        if psi == "sets":
            return _ser_exp(_pad([Fraction(0), Fraction(1)], order), order)
        raise ValueError(f"unknown schema {psi!r}")
    coeffs = psi.series(order + 1)
    return _pad([k * c for k, c in enumerate(coeffs)][1:], order)


def riordan_coefficient(phi: SeriesFunc, v: SeriesFunc, r: int,
                        s: int) -> Fraction:
    """Exact [x^r] phi(x) v(x)^s from the series backends."""
    if r < 0 or s < 0:
        return Fraction(0)
    prod = _ser_mul(phi.series(r), _ser_pow(v.series(r), s, r), r)
    return prod[r]


# -- leading terms ------------------------------------------------------------------


def riordan_leading_term(phi: SeriesFunc, v: SeriesFunc, r: int, s: int,
                         depth: int = 48) -> AsymptoticTerm:
    """Leading term of a_{r,s} = [x^r] phi(x) v(x)^s along r/s.

    a_owner ~ phi(x0) / sqrt(2 pi s sigma2) * x0^(-r) v(x0)^s at the
    drift point mu(x0) = r/s.  When v lives on the sublattice a + b Z
    the torus companions are added so forced-zero classes evaluate to
    exactly zero; this needs phi supported on a single class mod b.
    """
    r, s = int(r), int(s)
    if s <= 0 or r <= 0:
        raise ValueError("indices must be positive")
    lam = r / s
    a, b, _ = series_support(v, depth)
    x0 = solve_mu(v, lam, depth=depth)
    sig2 = sigma2(v, x0)
    if sig2 <= 1e-12:
        raise AnalysisRefusal(
            "degenerate-variance",
            f"the drift variance degenerates at x = {x0}",
            payload={"sigma2": sig2})
    v0 = float(v.value(x0))
    phi0 = float(phi.value(x0))
    if abs(phi0) <= 1e-14:
        raise AnalysisRefusal(
            "vanishing-prefactor",
            f"the prefactor vanishes at the drift point x = {x0}")
    amp = phi0 / math.sqrt(TWO_PI * sig2)
    meta = {"x0": x0, "v0": v0, "lambda": lam, "sigma2": sig2,
            "periodicity": {"order": a, "gap": b}}
    contribs = [PointContribution((x0, 1.0 / v0), amp)]
    if b > 1:
        _, _, phi_support = series_support(phi, depth)
        c = _class_of(phi_support, b)
        if c is None:
            raise AnalysisRefusal(
                "mixed-residue-classes",
                "the prefactor mixes residue classes modulo the support "
                f"gap {b}")
        meta["periodicity"]["phi_class"] = c
        omega = complex(math.cos(TWO_PI / b), math.sin(TWO_PI / b))
        for j in range(1, b):
            w = omega ** j
            contribs.append(PointContribution(
                (x0 * w, w ** (-a) / v0), amp * w ** c))
    return AsymptoticTerm(
        kind="riordan",
        variables=("x", "y"),
        contributions=contribs,
        order_exponent=Fraction(-1, 2),
        norm_index=1,
        meta=meta)


def lagrange_univariate(phi: SeriesFunc, psi="identity",
                        n: int | None = None,
                        depth: int = 48) -> AsymptoticTerm:
    """Leading term of [z^n] psi(f) where f = z phi(f).

    At the point y0 with mu(phi; y0) = 1 the coefficient grows like
    (phi(y0)/y0)^n with constant psi'(y0) y0 / sqrt(2 pi sigma2) and
    order n^(-3/2).  When phi is a function of y^b only the n with
    b | n - 1 - c survive, c being the residue class of psi'.
    """
    a, b, _ = series_support(phi, depth)
    if a != 0:
        raise AnalysisRefusal(
            "invalid-branching-series",
            "the branching series must have a nonzero constant term")
    y0 = solve_mu(phi, 1.0, depth=depth)
    sig2 = sigma2(phi, y0)
    if sig2 <= 1e-12:
        raise AnalysisRefusal(
            "degenerate-variance",
            f"the drift variance degenerates at y = {y0}",
            payload={"sigma2": sig2})
    _check_outer_radius(psi, y0)
    phi0 = float(phi.value(y0))
    growth = phi0 / y0
    dpsi, c = _outer_derivative_and_class(psi, y0, b, depth)
    amp = dpsi * y0 / math.sqrt(TWO_PI * sig2)
    meta = {"y0": y0, "growth": growth, "sigma2": sig2,
            "periodicity": {"gap": b if b > 1 else 1}}
    contribs = [PointContribution((1.0 / growth,), amp)]
    if b > 1:
        if c is None:
            raise AnalysisRefusal(
                "mixed-residue-classes",
                "the outer derivative mixes residue classes modulo the "
                f"support gap {b}")
        meta["periodicity"]["outer_class"] = c
        omega = complex(math.cos(TWO_PI / b), math.sin(TWO_PI / b))
        for j in range(1, b):
            w = omega ** j
            contribs.append(PointContribution(
                (w / growth,), amp * w ** (c + 1)))
    term = AsymptoticTerm(
        kind="lagrange",
        variables=("z",),
        contributions=contribs,
        order_exponent=Fraction(-3, 2),
        norm_index=0,
        meta=meta)
    if n is not None:
        term.meta["n"] = int(n)
        term.meta["value"] = evaluate_term(term, (int(n),))
    return term


def _check_outer_radius(psi, y0: float):
    radius = getattr(psi, "radius", None) if not isinstance(psi, str) else \
        (1.0 if psi == "sequences" else None)
    if radius is not None and radius <= y0 + 1e-14:
        raise AnalysisRefusal(
            "outer-radius-exceeded",
            f"the outer function's radius {radius} does not exceed the "
            f"drift point y = {y0}")


def _outer_derivative_and_class(psi, y0: float, b: int,
                                depth: int) -> tuple[float, int | None]:
    if isinstance(psi, str):
        return schema_derivative(psi, y0), 0
    _, dpsi, _ = psi.derivs(y0)
    if b <= 1:
        return float(dpsi), 0
    coeffs = psi.series(depth + 1)
    support = [k - 1 for k, c in enumerate(coeffs) if k >= 1 and c != 0]
    if not support:
        return float(dpsi), 0
    return float(dpsi), _class_of(support, b)


def schema_derivative(schema: str, y0: float) -> float:
    """psi'(y0) for the named outer composition."""
    if schema == "identity":
        return 1.0
    if schema == "sequences":
        if y0 >= 1:
            raise AnalysisRefusal(
                "schema-divergence",
                "a sequence of components needs the inner value below 1")
        return 1.0 / (1.0 - y0) ** 2
    if schema == "sets":
        return math.exp(y0)
    raise ValueError(f"unknown schema {schema!r}")


def schema_constant(phi: SeriesFunc, kind: str, depth: int = 48) -> float:
    """psi'(y0) for a named outer composition at the drift point of phi.

    The ratio of [z^n] psi(f) to [z^n] f is exactly this constant, since
    both terms share growth, order, and the sqrt factor.
    """
    y0 = solve_mu(phi, 1.0, depth=depth)
    return schema_derivative(kind, y0)


def lagrange_power(phi: SeriesFunc, n: int, k: int,
                   depth: int = 48) -> AsymptoticTerm:
    """Leading term of [z^n] f^k for f = z phi(f), along k/n fixed.

    [z^n] f^k ~ lam phi(y)^n y^(k-n) / sqrt(2 pi n sigma2) at
    mu(phi; y) = 1 - lam, lam = k/n.  With phi on the lattice b Z the
    support of f is 1 + b Z and the companions force zero unless
    b | n - k.
    """
    n, k = int(n), int(k)
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    lam = k / n
    a, b, _ = series_support(phi, depth)
    if a != 0:
        raise AnalysisRefusal(
            "invalid-branching-series",
            "the branching series must have a nonzero constant term")
    y = solve_mu(phi, 1.0 - lam, depth=depth)
    sig2 = sigma2(phi, y)
    if sig2 <= 1e-12:
        raise AnalysisRefusal(
            "degenerate-variance",
            f"the drift variance degenerates at y = {y}",
            payload={"sigma2": sig2})
    phi0 = float(phi.value(y))
    amp = lam / math.sqrt(TWO_PI * sig2)
    x0 = y / phi0
    meta = {"y": y, "lambda": lam, "sigma2": sig2,
            "periodicity": {"gap": b if b > 1 else 1}}
    contribs = [PointContribution((x0, 1.0 / y), amp)]
    if b > 1:
        omega = complex(math.cos(TWO_PI / b), math.sin(TWO_PI / b))
        for j in range(1, b):
            w = omega ** j
            contribs.append(PointContribution((x0 * w, w ** (-1) / y), amp))
    return AsymptoticTerm(
        kind="lagrange-power",
        variables=("z", "u"),
        contributions=contribs,
        order_exponent=Fraction(-1, 2),
        norm_index=0,
        meta=meta)


def mean_degree_profile(phi: SeriesFunc, n: int, k: int,
                        depth: int = 48) -> dict:
    """Mean count of nodes with k children in a size-n tree of f = z phi(f).

    The cumulative array is phi_k (n-1)/k [z^(n-1)] f^k (the marked-node
    decomposition), normalized by [z^n] f.
    """
    n, k = int(n), int(k)
    if not 0 < k < n - 1:
        raise ValueError("need 0 < k < n - 1")
    phi_k = phi.series(k)[k]
    if phi_k == 0:
        return {"value": 0.0, "numerator": 0.0, "denominator": None,
                "note": "no node admits that child count"}
    num_term = lagrange_power(phi, n - 1, k, depth=depth)
    num = float(phi_k) * (n - 1) / k * evaluate_term(num_term, (n - 1, k))
    den = evaluate_term(lagrange_univariate(phi, depth=depth), (n,))
    return {"value": num / den, "numerator": num, "denominator": den,
            "y": num_term.meta["y"]}


def verify_elimination_polynomial(value: float, poly: MultiPoly | list,
                                  scale: float | None = None) -> float:
    """Relative residual of a univariate polynomial at a claimed root.

    The default scale is the largest monomial magnitude at the value, so
    the report is invariant under scaling the polynomial.
    """
    c = uni_from_multipoly(poly) if isinstance(poly, MultiPoly) \
        else uni_normalize([Fraction(q) for q in poly])
    if not c:
        raise ValueError("zero polynomial")
    value = float(value)
    resid = abs(float(uni_eval(c, value)))
    if scale is None:
        scale = max(abs(float(q)) * abs(value) ** i
                    for i, q in enumerate(c) if q != 0)
    return resid / max(float(scale), 1e-300)


# -- sliced laws of large numbers ---------------------------------------------------


def wlln_mean(F: RationalGF, slicing: str = "last_variable",
              free: str | None = None,
              riordan_v: SeriesFunc | None = None) -> dict:
    """Dominant-singularity direction data for a combinatorial array.

    Specializes the denominator to one free variable (the others at 1,
    or all equal for the simplex slicing), certifies that the minimal
    positive root dominates every other root in modulus, and returns
    the log-gradient direction vector (z_i dH/dz_i) there.  Coefficient
    index ratios concentrate on the ratios of that vector.  With a
    Riordan v the quadratic coefficients mu(v;1), sigma2(v;1) of the
    local limit law are included.
    """
    if not F.combinatorial:
        raise AnalysisRefusal(
            "not-combinatorial",
            "mean statistics need a combinatorial array")
    H = F.den_poly()
    d = len(F.variables)
    if slicing == "last_variable":
        free = free or F.variables[-1]
        if free not in F.variables:
            raise ValueError(f"unknown variable {free!r}")
        subs = {v: Fraction(1) for v in F.variables if v != free}
        uh = uni_from_multipoly(H.eval_partial(subs), free)
    elif slicing == "simplex":
        coeffs: dict[int, Fraction] = {}
        for e, c in H.terms.items():
            coeffs[sum(e)] = coeffs.get(sum(e), Fraction(0)) + c
        top = max(coeffs) if coeffs else 0
        uh = uni_normalize([coeffs.get(i, Fraction(0))
                            for i in range(top + 1)])
    else:
        raise ValueError(f"unknown slicing {slicing!r}")
    if len(uh) <= 1:
        raise AnalysisRefusal("degenerate-slice",
                              "the sliced denominator is constant")
    roots = real_roots(uni_squarefree(uh))
    positive = [float(r.approx) for r in roots if float(r.approx) > 1e-12]
    if not positive:
        raise AnalysisRefusal("no-positive-root",
                              "the sliced denominator has no positive root")
    x0 = min(positive)
    all_roots = np.roots([float(c) for c in reversed(uh)])
    moduli = sorted(abs(z) for z in all_roots)
    others = [m for m in moduli if abs(m - x0) > 1e-9 * (1 + x0)]
    tied = len(moduli) - len(others)
    if tied != 1 or (others and min(others) <= x0 * (1 + 1e-9)):
        raise AnalysisRefusal(
            "dominant-root-failure",
            "the minimal positive root does not strictly dominate",
            payload={"x0": x0, "moduli": moduli[:6]})
    dh = uni_eval(uni_derivative(uh), x0)
    if abs(float(dh)) <= 1e-12:
        raise AnalysisRefusal(
            "dominant-root-failure",
            "the dominant root is not simple",
            payload={"x0": x0})
    if slicing == "simplex":
        point = tuple(x0 for _ in range(d))
    else:
        point = tuple(x0 if v == free else 1.0 for v in F.variables)
    pt = list(point)
    direction = tuple(float(point[i]) * float(H.partial(v).eval(pt))
                      for i, v in enumerate(F.variables))
    out = {"x0": x0, "point": point, "direction": direction,
           "moduli": moduli[:6], "dominant": True}
    if riordan_v is not None:
        out["b_mu"] = mu(riordan_v, 1)
        out["b_sigma2"] = sigma2(riordan_v, 1)
    return out


def riordan_quadratic(v: SeriesFunc, r, s) -> float:
    """Local-limit quadratic (s - mu(v;1) r)^2 / sigma2(v;1)."""
    m1 = mu(v, 1)
    s1 = sigma2(v, 1)
    return (float(s) - m1 * float(r)) ** 2 / s1
