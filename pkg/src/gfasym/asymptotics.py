"""Leading-term asymptotics at contributing singularities.

Every pipeline in this package reduces to one shape: a sum of point
contributions ``amp * prod z_j^(-r_j)`` times a power of the large index.
Smooth points get the saddle-point constant from a quadratic form in
logarithmic coordinates; transverse multiple points of full codimension
get a constant amplitude from the log-coordinate Jacobian of the
vanishing factors.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import AnalysisRefusal
from .critical import (
    Direction,
    Minimality,
    PointType,
    _factors_of,
    cone_membership,
    contrib,
    derivative_values,
)
from .series_oracle import RationalGF

TWO_PI = 2.0 * math.pi


@dataclass
class PointContribution:
    """One singularity's share: amp * prod z_j^(-r_j)."""

    coords: tuple[complex, ...]
    amplitude: complex


@dataclass
class HessianData:
    """Quadratic form of the phase in logarithmic coordinates, with the
    distinguished coordinate eliminated."""

    matrix: list[list[complex]]
    det: complex
    distinguished: int


@dataclass
class AsymptoticTerm:
    """A leading-order prediction for the coefficient array.

    The predicted value at index r is

        sum_p amp_p * prod_j coords_{p,j}^(-r_j)   (real part)

    multiplied by ``r[norm_index] ** order_exponent``.  Companion points
    on the same torus are separate contributions, so lattice-forced zero
    coefficients cancel in the sum rather than needing case analysis.
    """

    kind: str
    variables: tuple[str, ...]
    contributions: list[PointContribution]
    order_exponent: Fraction
    norm_index: int
    meta: dict = field(default_factory=dict)


def evaluate_term(term: AsymptoticTerm, r: Sequence[int]) -> float:
    """Numeric value of the prediction at index ``r``.

    Sums that cancel to within 1e-12 of the contribution magnitude are
    snapped to exactly zero, so forced-zero coefficient classes compare
    cleanly against the oracle.
    """
    r = tuple(int(k) for k in r)
    if len(r) != len(term.variables):
        raise ValueError("index arity does not match the term")
    n = r[term.norm_index]
    if n <= 0 and term.order_exponent != 0:
        raise ValueError("large index must be positive")
    total = 0j
    magnitude = 0.0
    for c in term.contributions:
        g = 1.0 + 0j
        gm = 1.0
        for z, k in zip(c.coords, r):
            z = complex(z)
            g *= z ** (-k)
            gm *= abs(z) ** (-k)
        total += complex(c.amplitude) * g
        magnitude += abs(c.amplitude) * gm
    val = total.real
    if abs(val) <= 1e-12 * magnitude:
        return 0.0
    if term.order_exponent != 0:
        val *= float(n) ** float(term.order_exponent)
    return val


def _point(coords) -> list:
    out = []
    for z in coords:
        z = complex(z)
        out.append(z.real if z.imag == 0 else z)
    return out


def _numerator_value(F: RationalGF, coords) -> complex:
    return complex(F.numerator.eval(_point(coords)))


def _scaled_derivs(F: RationalGF, coords) -> dict:
    return derivative_values(F, _point(coords), 2)


def q_value(F: RationalGF, coords) -> complex:
    """The cubic combination controlling the bivariate saddle constant.

    With X = x Hx, Y = y Hy, U = x^2 Hxx, V = y^2 Hyy, W = x y Hxy:

        Q = -X Y^2 - X^2 Y - (X^2 V + Y^2 U - 2 X Y W).
    """
    if len(F.variables) != 2:
        raise ValueError("q_value is specific to two variables")
    x, y = (complex(z) for z in coords)
    dv = _scaled_derivs(F, coords)
    X = x * dv[(1, 0)]
    Y = y * dv[(0, 1)]
    U = x * x * dv[(2, 0)]
    V = y * y * dv[(0, 2)]
    W = x * y * dv[(1, 1)]
    return -X * Y * Y - X * X * Y - (X * X * V + Y * Y * U - 2 * X * Y * W)


def _w_values(F: RationalGF, coords) -> list[complex]:
    dv = _scaled_derivs(F, coords)
    d = len(F.variables)
    out = []
    for j in range(d):
        e = tuple(1 if i == j else 0 for i in range(d))
        out.append(complex(coords[j]) * dv[e])
    return out


def smooth_leading_term_2d(F: RationalGF, coords,
                           distinguished: int | None = None,
                           ) -> AsymptoticTerm:
    """Saddle-point leading term at a smooth bivariate point.

    The amplitude uses sqrt(-z_d H_d / (2 pi Q)); the large index is the
    coordinate of the distinguished variable, chosen as the one with the
    larger |z_j H_j| when not forced.
    """
    x, y = (complex(z) for z in coords)
    dv = _scaled_derivs(F, coords)
    X = x * dv[(1, 0)]
    Y = y * dv[(0, 1)]
    Q = q_value(F, coords)
    scale = max(abs(X), abs(Y), 1e-300)
    if abs(Q) <= 1e-9 * scale ** 3:
        raise AnalysisRefusal(
            "degenerate-quadratic",
            "the quadratic form at the critical point degenerates; the "
            "square-root scaling does not apply",
            payload={"Q": Q})
    idx = distinguished
    if idx is None:
        idx = 1 if abs(Y) >= abs(X) else 0
    wd = Y if idx == 1 else X
    if abs(wd) <= 1e-12 * scale:
        raise AnalysisRefusal(
            "degenerate-direction",
            "z_d H_d vanishes at the point for the distinguished variable")
    G = _numerator_value(F, coords)
    amp = G * cmath.sqrt(-wd / (TWO_PI * Q))
    return AsymptoticTerm(
        kind="smooth",
        variables=F.variables,
        contributions=[PointContribution((x, y), amp)],
        order_exponent=Fraction(-1, 2),
        norm_index=idx,
        meta={"Q": Q, "X": X, "Y": Y, "numerator": G})


def hessian_logparam(F: RationalGF, coords,
                     distinguished: int | None = None) -> HessianData:
    """Phase Hessian in log coordinates after eliminating one variable.

    Entries for i, j ranging over the non-distinguished coordinates, with
    mu_j = z_j H_j / (z_d H_d) and u_ab = z_a z_b H_ab / (z_d H_d):

        delta_ij mu_j + mu_i mu_j + u_ij - mu_i u_jd - mu_j u_id
        + mu_i mu_j u_dd.
    """
    d = len(F.variables)
    z = [complex(v) for v in coords]
    dv = _scaled_derivs(F, coords)
    w = _w_values(F, coords)
    if distinguished is None:
        distinguished = max(range(d), key=lambda j: abs(w[j]))
    wd = w[distinguished]
    if abs(wd) <= 1e-12 * max(max(abs(v) for v in w), 1e-300):
        raise AnalysisRefusal(
            "degenerate-direction",
            "z_d H_d vanishes at the point for the distinguished variable")

    def u(a: int, b: int) -> complex:
        e = [0] * d
        e[a] += 1
        e[b] += 1
        return z[a] * z[b] * dv[tuple(e)] / wd

    rest = [j for j in range(d) if j != distinguished]
    mu = {j: w[j] / wd for j in rest}
    udd = u(distinguished, distinguished)
    mat = []
    for i in rest:
        row = []
        for j in rest:
            v = mu[i] * mu[j] + u(i, j) \
                - mu[i] * u(j, distinguished) - mu[j] * u(i, distinguished) \
                + mu[i] * mu[j] * udd
            if i == j:
                v += mu[j]
            row.append(v)
        mat.append(row)
    det = complex(np.linalg.det(np.array(mat, dtype=complex))) if mat else 1.0
    return HessianData(matrix=mat, det=det, distinguished=distinguished)


def smooth_leading_term_nd(F: RationalGF, coords,
                           distinguished: int | None = None,
                           ) -> AsymptoticTerm:
    """Saddle-point leading term at a smooth point in any dimension.

    amp = (2 pi)^((1-d)/2) det(Hessian)^(-1/2) G / (-z_d H_d), with the
    large index r_d raised to -(d-1)/2.
    """
    d = len(F.variables)
    hd = hessian_logparam(F, coords, distinguished)
    w = _w_values(F, coords)
    wd = w[hd.distinguished]
    if abs(hd.det) <= 1e-9:
        raise AnalysisRefusal(
            "degenerate-quadratic",
            "the phase Hessian is singular at the critical point",
            payload={"det": hd.det})
    G = _numerator_value(F, coords)
    amp = (TWO_PI ** ((1 - d) / 2) / cmath.sqrt(hd.det)) * G / (-wd)
    return AsymptoticTerm(
        kind="smooth",
        variables=F.variables,
        contributions=[PointContribution(tuple(complex(z) for z in coords),
                                         amp)],
        order_exponent=Fraction(-(d - 1), 2),
        norm_index=hd.distinguished,
        meta={"hessian_det": hd.det, "numerator": G})


def log_jacobian(F: RationalGF, coords, vanishing: Sequence[int]):
    """Matrix z_j dH_i/dz_j of the vanishing factors at the point."""
    factors = _factors_of(F)
    if factors is None:
        raise AnalysisRefusal(
            "missing-factorization",
            "multiple-point analysis needs the denominator factors")
    z = [complex(v) for v in coords]
    rows = []
    for k in vanishing:
        f = factors[k]
        rows.append([z[j] * complex(f.partial(F.variables[j]).eval(z))
                     for j in range(len(z))])
    return rows


def multiple_point_term(F: RationalGF, coords, vanishing: Sequence[int],
                        direction: Direction | None = None,
                        ) -> AsymptoticTerm:
    """Constant-amplitude leading term at a transverse multiple point
    where the number of vanishing factors equals the dimension.

    amp = G(z) / |det(z_j dH_i/dz_j)|; no power of the index remains.
    """
    d = len(F.variables)
    if len(vanishing) != d:
        raise AnalysisRefusal(
            "unsupported-multiple-geometry",
            f"{len(vanishing)} sheets in {d} variables; only full "
            "codimension is handled")
    rows = log_jacobian(F, coords, vanishing)
    det = complex(np.linalg.det(np.array(rows, dtype=complex)))
    scale = max(max(abs(v) for row in rows for v in row), 1e-300)
    if abs(det) <= 1e-10 * scale ** d:
        raise AnalysisRefusal(
            "non-transverse",
            "the vanishing sheets are tangent at the point",
            payload={"jacobian": rows})
    G = _numerator_value(F, coords)
    meta: dict = {"log_jacobian": rows, "jacobian_det": det, "numerator": G}
    if direction is not None:
        where, coeffs = cone_membership(F, coords, vanishing, direction)
        meta["cone"] = where
        meta["cone_coefficients"] = coeffs
    amp = G / abs(det)
    return AsymptoticTerm(
        kind="multiple",
        variables=F.variables,
        contributions=[PointContribution(tuple(complex(z) for z in coords),
                                         amp)],
        order_exponent=Fraction(0),
        norm_index=d - 1,
        meta=meta)


def multiple_point_term_hessian_2d(F: RationalGF, coords) -> complex:
    """Alternative bivariate amplitude G / sqrt(-x^2 y^2 (Hxx Hyy - Hxy^2))
    from the full denominator; equals the Jacobian form at a transverse
    double point."""
    x, y = (complex(z) for z in coords)
    dv = _scaled_derivs(F, coords)
    disc = dv[(2, 0)] * dv[(0, 2)] - dv[(1, 1)] ** 2
    rad = -x * x * y * y * disc
    G = _numerator_value(F, coords)
    return G / cmath.sqrt(rad)


def _rotate(coords, theta: Sequence[Fraction]) -> tuple[complex, ...]:
    return tuple(complex(z) * cmath.exp(2j * math.pi * float(t))
                 for z, t in zip(coords, theta))


def leading_term(F: RationalGF, direction: Direction,
                 backend: str = "auto") -> AsymptoticTerm:
    """Select the contributing singularities and build the prediction.

    Combinatorial inputs only; ranked candidate lists (the
    non-combinatorial fallback) are a refusal here because no point may
    be selected silently.
    """
    res = contrib(F, direction, backend)
    if res.mode != "selected":
        raise AnalysisRefusal(
            "no-selection",
            "; ".join(res.notes) or "no contributing point was selected",
            payload={"result": res})
    p = res.points[0]
    if p.classification is PointType.MULTIPLE:
        term = multiple_point_term(F, p.coords, p.vanishing,
                                   direction=direction)
        term.meta["minimality"] = p.minimality.value
        term.meta["point_evidence"] = p.evidence
        return term
    d = len(F.variables)
    builder = smooth_leading_term_2d if d == 2 else smooth_leading_term_nd
    base = builder(F, p.coords)
    contribs = list(base.contributions)
    for theta in res.companions:
        if all(t == 0 for t in theta):
            continue
        rotated = _rotate(p.coords, theta)
        extra = builder(F, rotated, distinguished=base.norm_index)
        contribs.extend(extra.contributions)
    base.contributions = contribs
    base.meta["companions"] = [tuple(str(t) for t in theta)
                               for theta in res.companions]
    base.meta["minimality"] = p.minimality.value
    base.meta["point_evidence"] = p.evidence
    return base


def format_term(term: AsymptoticTerm) -> str:
    """One-line human-readable rendering of the prediction."""
    v = term.variables
    parts = []
    for c in term.contributions:
        grow = " * ".join(
            f"({1 / abs(complex(z)):.9g})^r{j + 1}"
            if abs(complex(z).imag) < 1e-12 * (1 + abs(complex(z)))
            and complex(z).real > 0
            else f"({complex(z):.9g})^(-r{j + 1})"
            for j, z in enumerate(c.coords))
        amp = complex(c.amplitude)
        amp_s = f"{amp.real:.9g}" if abs(amp.imag) < 1e-12 * (1 + abs(amp)) \
            else f"({amp:.9g})"
        parts.append(f"{amp_s} * {grow}")
    body = "  +  ".join(parts)
    if term.order_exponent != 0:
        body += (f"  *  r{term.norm_index + 1}^"
                 f"({term.order_exponent})")
    return f"a[r1..r{len(v)}] ~ {body}"
