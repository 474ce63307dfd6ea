"""Kernel-method walk reductions against exact lattice recursions.

Expected arrays come from the step recursion itself, run as exact
dynamic programming with Fraction weights; closed forms enter only
where the walk family has a known binomial or radical description.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfasym.asymptotics import evaluate_term
from gfasym.kernel import (StepSet, kernel_gf, kernel_poly, small_branch,
                           walk_asymptotics)
from gfasym.polycore import AnalysisRefusal, MultiPoly, parse_poly
from gfasym.riordan_lagrange import (PolynomialSF, riordan_coefficient,
                                     sigma2, verify_elimination_polynomial)

XY = ("x", "y")

DYCK = [(1, 1), (1, -1)]
MOTZKIN = [(1, 1), (1, 0), (1, -1)]
SCHROEDER = [(1, 1), (2, 0), (1, -1)]
COIN = [(0, 1, Fraction(1, 2)), (1, -1, Fraction(1, 2))]


def walk_counts(E: StepSet, rmax: int, smax: int) -> list:
    """Exact table of the height recursion with seed a[0, 0] = 1.

    Entries are reliable for s <= smax; the extra width absorbs the
    look-ahead of descending steps in earlier rows.
    """
    width = smax + E.depth * rmax + 2
    tab = [[Fraction(0)] * width for _ in range(rmax + 1)]
    tab[0][0] = Fraction(1)
    for r in range(rmax + 1):
        for s in range(width):
            if r == 0 and s == 0:
                continue
            tot = Fraction(0)
            for dx, dy, w in E.steps:
                pr, ps = r - dx, s - dy
                if pr >= 0 and 0 <= ps < width:
                    tot += w * tab[pr][ps]
            tab[r][s] = tot
    return tab


def series_residual(q: MultiPoly, ser: list) -> list:
    """Coefficients of q(x, f(x)) for a truncated series f, bivariate q."""
    n = len(ser) - 1
    powers = [[Fraction(1)] + [Fraction(0)] * n]
    for _ in range(q.degree_in(q.vars[1])):
        prev, out = powers[-1], [Fraction(0)] * (n + 1)
        for i, a in enumerate(prev):
            if a:
                for k, b in enumerate(ser):
                    if i + k <= n and b:
                        out[i + k] += a * b
        powers.append(out)
    out = [Fraction(0)] * (n + 1)
    for (i, j), c in q.terms.items():
        if i <= n:
            for k, w in enumerate(powers[j]):
                if i + k <= n and w:
                    out[i + k] += c * w
    return out


# -- step sets and kernels ----------------------------------------------------------


def test_step_set_validation():
    e = StepSet(DYCK)
    assert e.depth == 1 and e.rise == 1
    assert e.steps == [(1, 1, Fraction(1)), (1, -1, Fraction(1))]
    assert StepSet([(1, 2), (3, -1)]).rise == 2
    with pytest.raises(ValueError):
        StepSet([])
    with pytest.raises(ValueError):
        StepSet([(1, 1), (1, 1, 2), (1, -1)])
    with pytest.raises(ValueError):
        StepSet([(0, 0), (1, 1), (1, -1)])
    with pytest.raises(ValueError):
        StepSet([(0, -1), (1, 1)])
    with pytest.raises(ValueError):
        StepSet([(-1, 1), (1, -1)])
    with pytest.raises(ValueError):
        StepSet([(1, 1), (1, -1, -1)])
    with pytest.raises(ValueError):
        StepSet([(1, 1), (1, 0)])
    with pytest.raises(ValueError):
        StepSet([(1, -1), (1, 0)])


def test_kernel_poly_pins():
    q, c = kernel_poly(StepSet(DYCK))
    assert q == parse_poly("y - x*y^2 - x", XY)
    assert c == parse_poly("x", ("x",))
    q, c = kernel_poly(StepSet(MOTZKIN))
    assert q == parse_poly("y - x*y^2 - x*y - x", XY)
    assert c == parse_poly("x", ("x",))
    q, c = kernel_poly(StepSet(SCHROEDER))
    assert q == parse_poly("y - x*y^2 - x^2*y - x", XY)
    assert c == parse_poly("x", ("x",))
    q, c = kernel_poly(StepSet(COIN))
    assert q == parse_poly("2*y - y^2 - x", XY)
    assert c == MultiPoly(("x",), {(0,): Fraction(1, 2)})


def test_kernel_poly_weight_clearing():
    e = StepSet([(1, 1, Fraction(1, 3)), (2, 1, Fraction(1, 2)), (1, -1)])
    q, c = kernel_poly(e)
    assert q == parse_poly("6*y - 2*x*y^2 - 3*x^2*y^2 - 6*x", XY)
    assert c == MultiPoly(("x",), {(1,): Fraction(1, 3), (2,): Fraction(1, 2)})


# -- small branches -----------------------------------------------------------------


def test_small_branch_dyck():
    ser, xi = small_branch(parse_poly("y - x*y^2 - x", XY), 12)
    catalan = [0, 1, 0, 1, 0, 2, 0, 5, 0, 14, 0, 42, 0]
    assert ser == [Fraction(v) for v in catalan]
    # (1 - sqrt(1 - 4 x^2)) / (2x) at x = 0.3 is exactly 1/3
    assert abs(xi.value(0.3) - 1 / 3) < 1e-14
    assert abs(xi.radius - 0.5) < 1e-12


def test_small_branch_coin_walk():
    ser, xi = small_branch(parse_poly("2*y - y^2 - x", XY), 5)
    assert ser == [Fraction(0), Fraction(1, 2), Fraction(1, 8),
                   Fraction(1, 16), Fraction(5, 128), Fraction(7, 256)]
    # 1 - sqrt(1 - x) at x = 3/4
    assert abs(xi.value(0.75) - 0.5) < 1e-14
    assert abs(xi.radius - 1.0) < 1e-12


def test_small_branch_motzkin_numbers():
    ser, _ = small_branch(kernel_poly(StepSet(MOTZKIN))[0], 7)
    assert ser == [Fraction(v) for v in [0, 1, 1, 2, 4, 9, 21, 51]]


def test_small_branch_residual_closes():
    for steps in [DYCK, MOTZKIN, SCHROEDER, COIN]:
        q, _ = kernel_poly(StepSet(steps))
        ser, _ = small_branch(q, 24)
        assert all(c == 0 for c in series_residual(q, ser))


def test_small_branch_refusals():
    with pytest.raises(AnalysisRefusal) as exc:
        small_branch(parse_poly("y - x*y^3 - x", XY), 5)
    assert exc.value.code == "kernel-not-quadratic"
    with pytest.raises(AnalysisRefusal) as exc:
        small_branch(parse_poly("y - x*y^2 - x - 1", XY), 5)
    assert exc.value.code == "no-vanishing-branch"
    with pytest.raises(AnalysisRefusal) as exc:
        small_branch(parse_poly("y^2 - x", XY), 5)
    assert exc.value.code == "no-vanishing-branch"
    with pytest.raises(ValueError):
        small_branch(parse_poly("y - x*y^2 - z", ("x", "y", "z")), 5)


# -- Riordan reduction --------------------------------------------------------------


def test_kernel_gf_dyck_components():
    red = kernel_gf(StepSet(DYCK))
    catalan = [1, 0, 1, 0, 2, 0, 5, 0, 14, 0, 42]
    assert red.phi.series(10) == [Fraction(v) for v in catalan]
    assert red.v.series(9) == red.xi.series(9)
    assert red.descent_poly == parse_poly("x", ("x",))
    assert red.rise_poly == parse_poly("x", ("x",))
    # rows a_{r,s} equal [x^(r+1)] xi^(s+1)
    one = PolynomialSF([1])
    for r, s in [(6, 2), (8, 0), (9, 3)]:
        assert (riordan_coefficient(red.phi, red.v, r, s)
                == riordan_coefficient(one, red.xi, r + 1, s + 1))


def test_kernel_gf_motzkin_row():
    red = kernel_gf(StepSet(MOTZKIN))
    motzkin = [1, 1, 2, 4, 9, 21, 51, 127]
    assert red.phi.series(7) == [Fraction(v) for v in motzkin]


def test_kernel_gf_coin_walk():
    red = kernel_gf(StepSet(COIN))
    assert red.phi.series(0) == [Fraction(1)]
    assert red.v.series(0) == [Fraction(1, 2)]
    # the r = 0 column is the pure climb: mass 2^-s
    for s in range(11):
        assert riordan_coefficient(red.phi, red.v, 0, s) == Fraction(1, 2 ** s)
    # the array also reads off the branch directly: 2 [x^(r+s+1)] xi^(s+1)
    two = PolynomialSF([2])
    for r, s in [(3, 2), (5, 0), (4, 4), (7, 3)]:
        assert (riordan_coefficient(red.phi, red.v, r, s)
                == riordan_coefficient(two, red.xi, r + s + 1, s + 1))


def test_kernel_gf_shape_refusals():
    with pytest.raises(AnalysisRefusal) as exc:
        kernel_gf(StepSet([(1, 2), (1, -1)]))
    assert exc.value.code == "kernel-shape-unsupported"
    with pytest.raises(AnalysisRefusal) as exc:
        kernel_gf(StepSet([(1, 1), (1, -2)]))
    assert exc.value.code == "kernel-shape-unsupported"


def test_reduction_matches_recursion_table():
    for steps in [DYCK, MOTZKIN, SCHROEDER, COIN]:
        e = StepSet(steps)
        red = kernel_gf(e)
        tab = walk_counts(e, 18, 18)
        for r in range(19):
            for s in range(19):
                assert riordan_coefficient(red.phi, red.v, r, s) == tab[r][s]


POOL = [(1, 1), (2, 1), (1, 0), (2, 0), (1, -1), (2, -1)]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from(POOL), unique=True, max_size=4),
       st.sampled_from([(1, 1), (2, 1)]),
       st.sampled_from([(1, -1), (2, -1)]))
def test_random_unit_kernels_match_recursion(extra, up, down):
    e = StepSet(sorted(set(extra) | {up, down}))
    red = kernel_gf(e)
    tab = walk_counts(e, 10, 8)
    for r in range(11):
        for s in range(9):
            assert riordan_coefficient(red.phi, red.v, r, s) == tab[r][s]


# -- asymptotics --------------------------------------------------------------------


def test_dyck_exact_formula_oracle():
    tab = walk_counts(StepSet(DYCK), 40, 20)
    for r, s in [(10, 4), (20, 0), (40, 20), (17, 5)]:
        want = (Fraction(s + 1, r + 1) * math.comb(r + 1, (r - s) // 2)
                if (r - s) % 2 == 0 else 0)
        assert tab[r][s] == want


def test_dyck_term_accuracy_and_decay():
    exact40 = float(Fraction(21, 41) * math.comb(41, 10))
    term = walk_asymptotics(StepSet(DYCK), 40, 20)
    rel40 = abs(evaluate_term(term, (40, 20)) - exact40) / exact40
    assert rel40 < 0.03
    assert abs(rel40 - 0.0070) < 0.0010
    exact80 = float(Fraction(41, 81) * math.comb(81, 20))
    term80 = walk_asymptotics(StepSet(DYCK), 80, 40)
    rel80 = abs(evaluate_term(term80, (80, 40)) - exact80) / exact80
    assert rel80 < rel40
    assert abs(rel80 - 0.0036) < 0.0008


def test_dyck_direction_map_and_meta():
    term = walk_asymptotics(StepSet(DYCK), 40, 20)
    # the height fraction squares to (r - s) / (r + s)
    y0 = math.sqrt(1 / 3)
    assert abs(term.meta["x0"] - y0 / (1 + 1 / 3)) < 1e-12
    assert term.kind == "kernel-walk"
    assert term.meta["periodicity"] == {"order": 1, "gap": 2, "phi_class": 0}
    assert term.meta["steps"] == [(1, 1, Fraction(1)), (1, -1, Fraction(1))]
    assert term.order_exponent == Fraction(-1, 2)
    assert term.norm_index == 1


def test_parity_forced_zeros_are_exact():
    dyck = StepSet(DYCK)
    for r, s in [(41, 20), (40, 19), (39, 22)]:
        assert evaluate_term(walk_asymptotics(dyck, r, s), (r, s)) == 0.0
    schroeder = StepSet(SCHROEDER)
    assert evaluate_term(walk_asymptotics(schroeder, 37, 12), (37, 12)) == 0.0


def test_schroeder_constants():
    term = walk_asymptotics(StepSet(SCHROEDER), 36, 12)
    golden = (1 + math.sqrt(5)) / 2
    assert abs(term.meta["x0"] - (3 - math.sqrt(5)) / 2) < 1e-12
    assert abs(term.meta["v0"] - 1 / golden) < 1e-12
    gamma = term.meta["v0"] / term.meta["x0"] ** 3
    assert abs(gamma - (11 + 5 * math.sqrt(5)) / 2) < 1e-9
    assert abs(term.meta["sigma2"] - 8 * math.sqrt(5)) < 1e-9
    amp = term.contributions[0].amplitude
    assert abs(amp - golden / math.sqrt(16 * math.sqrt(5) * math.pi)) < 1e-12
    assert abs(amp - 0.1526195310) < 5e-8


def test_schroeder_underestimates():
    e = StepSet(SCHROEDER)
    tab = walk_counts(e, 72, 24)
    ex12 = float(tab[36][12])
    ap12 = evaluate_term(walk_asymptotics(e, 36, 12), (36, 12))
    rel12 = (ex12 - ap12) / ex12
    assert ap12 < ex12 and abs(rel12 - 0.029) < 0.004
    ex24 = float(tab[72][24])
    ap24 = evaluate_term(walk_asymptotics(e, 72, 24), (72, 24))
    rel24 = (ex24 - ap24) / ex24
    assert ap24 < ex24 and abs(rel24 - 0.015) < 0.003


def test_motzkin_direction_family():
    red = kernel_gf(StepSet(MOTZKIN))
    for lam in [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
                Fraction(2, 3), Fraction(3, 4)]:
        r, s = 4 * lam.denominator, 4 * lam.numerator
        term = walk_asymptotics(StepSet(MOTZKIN), r, s)
        y0 = red.xi.value(term.meta["x0"])
        lamf = float(lam)
        assert abs((1 + lamf) * y0 * y0 + lamf * y0 - (1 - lamf)) < 1e-9
        y_closed = (math.sqrt(4 - 3 * lamf ** 2) - lamf) / (2 * (1 + lamf))
        assert abs(y0 - y_closed) < 1e-9


def test_motzkin_variance_eliminant():
    red = kernel_gf(StepSet(MOTZKIN))
    term = walk_asymptotics(StepSet(MOTZKIN), 24, 12)
    y0 = red.xi.value(term.meta["x0"])
    assert abs(y0 - (math.sqrt(13) - 1) / 6) < 1e-10
    # variance of the inversion-frame series 1 + y + y^2 at the
    # direction root; its eliminant in S over the slope field
    s_val = sigma2(PolynomialSF([1, 1, 1]), y0)
    assert abs(s_val - (13 - 2 * math.sqrt(13)) / 12) < 1e-12
    m = Fraction(3, 2)
    coeffs = [3 * m ** 4 - 24 * m ** 3 + 65 * m ** 2 - 68 * m + 24,
              6 * m ** 2 - 24 * m + 16,
              Fraction(3)]
    assert verify_elimination_polynomial(s_val, coeffs) < 1e-8


def test_coin_walk_asymptotics():
    e = StepSet(COIN)
    term = walk_asymptotics(e, 30, 15)
    assert abs(term.meta["x0"] - Fraction(24, 25)) < 1e-12
    assert abs(term.meta["v0"] - Fraction(5, 6)) < 1e-12
    tab = walk_counts(e, 60, 32)
    rel1 = abs(evaluate_term(term, (30, 15)) - float(tab[30][15]))
    rel1 /= float(tab[30][15])
    assert rel1 < 0.05
    rel2 = abs(evaluate_term(walk_asymptotics(e, 60, 30), (60, 30))
               - float(tab[60][30])) / float(tab[60][30])
    assert rel2 < rel1 / 1.8

    def shape_log(r, s):
        n = 2 * r + s
        return (-n * math.log(2) + n * math.log(n) - r * math.log(r)
                - (r + s) * math.log(r + s) - 0.5 * math.log(r + s))

    c1 = evaluate_term(term, (30, 15)) * math.exp(-shape_log(30, 15))
    c2 = (evaluate_term(walk_asymptotics(e, 60, 30), (60, 30))
          * math.exp(-shape_log(60, 30)))
    assert abs(c1 / c2 - 1) < 1e-9
    amp = term.contributions[0].amplitude
    assert abs(amp * math.sqrt(3) - c1) < 1e-12
