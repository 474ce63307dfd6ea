"""Tests for critical-point location, classification, and selection."""

import math
from fractions import Fraction

import pytest

from gfasym.polycore import (
    AnalysisRefusal,
    ExpExpr,
    MultiPoly,
    PolyExpr,
    ProductExpr,
    QuotientExpr,
    SumExpr,
    expr_const,
    parse_poly,
)
from gfasym.critical import (
    Direction,
    Minimality,
    PointType,
    aperiodicity_check,
    classify_point,
    cone_membership,
    contrib,
    is_minimal,
    solve_critical_points,
    torus_companions,
)
from gfasym.series_oracle import RationalGF

V = ("x", "y")


def binomial_gf():
    return RationalGF.from_polys(parse_poly("1", V),
                                 parse_poly("1 - x - y", V),
                                 combinatorial=True)


def delannoy_gf():
    return RationalGF.from_polys(parse_poly("1", V),
                                 parse_poly("1 - x - y - x*y", V),
                                 combinatorial=True)


def queueing_gf():
    h1 = parse_poly("1 - 2/3*x - 1/3*y", V)
    h2 = parse_poly("1 - 1/3*x - 2/3*y", V)
    num = ExpExpr(parse_poly("x + y", V))
    den = PolyExpr(h1 * h2)
    return RationalGF(num, den, V, combinatorial=True,
                      denominator_factors=(h1, h2))


def zigzag_gf():
    return RationalGF.from_polys(
        parse_poly("1 + x*y + x^2*y^2", V),
        parse_poly("1 - x - y + x*y - x^2*y^2", V),
        combinatorial=True)


def eulerian_gf():
    px, py = parse_poly("x", V), parse_poly("y", V)
    ex, ey = ExpExpr(px), ExpExpr(py)
    neg = expr_const(V, -1)
    num_h = SumExpr((ProductExpr((PolyExpr(px), ey)),
                     ProductExpr((neg, PolyExpr(py), ex))))
    den_lin = PolyExpr(parse_poly("x - y", V))
    H = QuotientExpr(num_h, den_lin)
    G = QuotientExpr(SumExpr((ex, ProductExpr((neg, ey)))), den_lin)
    return RationalGF(G, H, V, combinatorial=True)


def test_direction_normalization():
    assert Direction((2, 4)).reduced() == (1, 2)
    with pytest.raises(ValueError):
        Direction((0, 0))
    with pytest.raises(ValueError):
        Direction((-1, 2))


def test_exact_backend_rational_point():
    pts = solve_critical_points(binomial_gf(), Direction((25, 12)),
                                backend="exact")
    assert len(pts) == 1
    x, y = (complex(c).real for c in pts[0].coords)
    assert abs(x - 25 / 37) < 1e-12
    assert abs(y - 12 / 37) < 1e-12
    assert pts[0].exact is not None


def test_exact_backend_algebraic_point():
    pts = solve_critical_points(delannoy_gf(), Direction((1, 1)),
                                backend="exact")
    positives = [p for p in pts if p.is_positive_real()]
    assert len(positives) == 1
    x, y = (complex(c).real for c in positives[0].coords)
    root = math.sqrt(2) - 1
    assert abs(x - root) < 1e-10 and abs(y - root) < 1e-10
    # the coordinate satisfies x^2 + 2x - 1 = 0
    assert abs(x * x + 2 * x - 1) < 1e-9


def test_backends_agree():
    F = delannoy_gf()
    d = Direction((1, 1))
    exact = solve_critical_points(F, d, backend="exact")
    numeric = solve_critical_points(F, d, backend="numeric")
    ep = [p for p in exact if p.is_positive_real()][0]
    np_ = [p for p in numeric if p.is_positive_real()][0]
    for a, b in zip(ep.coords, np_.coords):
        assert abs(complex(a) - complex(b)) < 1e-8


def test_classify_smooth_and_multiple():
    c = classify_point(binomial_gf(), (0.5, 0.5))
    assert c.kind is PointType.SMOOTH
    c = classify_point(queueing_gf(), (1.0, 1.0))
    assert c.kind is PointType.MULTIPLE
    assert set(c.vanishing) == {0, 1}


def test_classify_non_transverse_is_bad():
    f = parse_poly("1 - x - y", V)
    F = RationalGF.from_polys(parse_poly("1", V), f * f,
                              denominator_factors=(f, f))
    c = classify_point(F, (0.5, 0.5))
    assert c.kind is PointType.BAD


def test_classify_rejects_off_variety_point():
    with pytest.raises(ValueError):
        classify_point(binomial_gf(), (0.1, 0.1))


def test_minimality_sturm_branch():
    h1 = parse_poly("1 - x - y", V)
    h2 = parse_poly("2 - x - y", V)
    F = RationalGF.from_polys(parse_poly("1", V), h1 * h2,
                              combinatorial=True,
                              denominator_factors=(h1, h2))
    bad = is_minimal(F, (Fraction(1), Fraction(1)))
    assert bad.status is Minimality.NOT_MINIMAL
    good = is_minimal(F, (Fraction(1, 2), Fraction(1, 2)))
    assert good.status in (Minimality.MINIMAL, Minimality.STRICTLY_MINIMAL)


def test_minimality_strict_via_nonnegative_aperiodic():
    res = is_minimal(delannoy_gf(), (Fraction(2, 5), Fraction(2, 5)))
    assert res.status is Minimality.STRICTLY_MINIMAL
    assert res.evidence.get("upgrade") == "nonnegative aperiodic denominator"


def test_minimality_non_positive_point():
    res = is_minimal(binomial_gf(), (-0.5, 0.5))
    assert res.status is Minimality.UNKNOWN


def test_aperiodicity_and_lattice_index():
    ap = aperiodicity_check(parse_poly("x + y", V))
    assert ap.aperiodic and ap.lattice_index == 1
    ap = aperiodicity_check(parse_poly("x^2 + y^2", V))
    assert not ap.aperiodic and ap.lattice_index == 4


def test_torus_companions_enumeration():
    comps = torus_companions([(1, 0), (0, 1), (1, 1)], 2)
    assert comps == [(Fraction(0), Fraction(0))]
    comps = torus_companions([(2, 0), (0, 2)], 2)
    assert set(comps) == {
        (Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(1, 2)),
        (Fraction(1, 2), Fraction(0)),
        (Fraction(1, 2), Fraction(1, 2)),
    }


def test_cone_membership_cases():
    F = queueing_gf()
    pt = (1.0, 1.0)
    where, coeffs = cone_membership(F, pt, (0, 1), Direction((1, 1)))
    assert where == "interior"
    assert abs(coeffs[0] - 1) < 1e-8 and abs(coeffs[1] - 1) < 1e-8
    where, _ = cone_membership(F, pt, (0, 1), Direction((1, 2)))
    assert where == "boundary"
    where, _ = cone_membership(F, pt, (0, 1), Direction((1, 3)))
    assert where == "outside"


def test_contrib_selects_delannoy_point():
    res = contrib(delannoy_gf(), Direction((1, 1)))
    assert res.mode == "selected"
    assert len(res.points) == 1
    x, y = (complex(c).real for c in res.points[0].coords)
    root = math.sqrt(2) - 1
    assert abs(x - root) < 1e-10 and abs(y - root) < 1e-10
    assert res.companions == [(Fraction(0), Fraction(0))]


def test_contrib_multiple_point_interior():
    res = contrib(queueing_gf(), Direction((1, 1)))
    assert res.mode == "selected"
    p = res.points[0]
    assert p.classification is PointType.MULTIPLE
    assert abs(complex(p.coords[0]) - 1) < 1e-8
    assert p.evidence["cone"] == "interior"


def test_contrib_cone_boundary_refusal():
    with pytest.raises(AnalysisRefusal) as exc:
        contrib(queueing_gf(), Direction((1, 2)))
    assert exc.value.code == "cone-boundary"


def test_contrib_outside_cone_picks_smooth_point():
    res = contrib(queueing_gf(), Direction((1, 3)))
    assert res.mode == "selected"
    p = res.points[0]
    assert p.classification is PointType.SMOOTH
    assert abs(complex(p.coords[0]) - 0.75) < 1e-8
    assert abs(complex(p.coords[1]) - 1.125) < 1e-8


def test_contrib_zigzag_golden_point():
    res = contrib(zigzag_gf(), Direction((1, 1)))
    assert res.mode == "selected"
    x, y = (complex(c).real for c in res.points[0].coords)
    golden = (math.sqrt(5) - 1) / 2
    assert abs(x - golden) < 1e-10 and abs(y - golden) < 1e-10


def test_contrib_ranked_for_non_combinatorial():
    F = RationalGF.from_polys(parse_poly("3", V),
                              parse_poly("3 - 3*x - y + x^2", V))
    res = contrib(F, Direction((1, 1)))
    assert res.mode == "ranked"
    assert any("no contributing point is selected" in n for n in res.notes)
    assert res.points
    top = res.points[0]
    assert abs(complex(top.coords[0]) - 1) < 1e-8
    assert abs(complex(top.coords[1]) - 1) < 1e-8


def test_contrib_eulerian_numeric():
    res = contrib(eulerian_gf(), Direction((1, 1)), backend="numeric")
    assert res.mode == "selected"
    p = res.points[0]
    assert p.classification is PointType.SMOOTH
    assert abs(complex(p.coords[0]) - 1) < 1e-8
    assert abs(complex(p.coords[1]) - 1) < 1e-8
