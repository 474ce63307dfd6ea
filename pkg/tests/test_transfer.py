"""Tests for walk generating functions and substring-avoidance counting."""

import math
from collections import defaultdict
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gfasym.polycore import (
    AnalysisRefusal,
    MultiPoly,
    det_bareiss,
    parse_poly,
    uni_from_multipoly,
)
from gfasym.series_oracle import RationalGF, expand_coefficients
from gfasym.riordan_lagrange import verify_elimination_polynomial, wlln_mean
from gfasym.transfer import (
    ForbiddenSpec,
    WeightedDigraph,
    adjugate,
    connector_gf,
    connector_matrix,
    diag_specialize,
    transfer_gf,
)

F = Fraction
UVZ = ("u", "v", "z")
XY = ("x", "y")


def switching_graph() -> WeightedDigraph:
    m = lambda s: parse_poly(s, UVZ)
    return WeightedDigraph(("a", "b", "c", "d"), [
        ("a", "a", m("u*z")), ("a", "b", m("u*z")),
        ("b", "a", m("z")), ("b", "b", m("z")), ("b", "c", m("z")),
        ("c", "b", m("z")), ("c", "c", m("z")), ("c", "d", m("z")),
        ("d", "c", m("v*z")), ("d", "d", m("v*z"))])


def forbidden_pair_spec() -> ForbiddenSpec:
    return ForbiddenSpec(2, ["10101101", "1110101"], variables=XY)


def det_cofactor(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = MultiPoly.zero(m[0][0].vars)
    for k in range(n):
        if not m[0][k]:
            continue
        sub = [row[:k] + row[k + 1:] for row in m[1:]]
        term = m[0][k] * det_cofactor(sub)
        acc = acc + term if k % 2 == 0 else acc - term
    return acc


def dp_path_counts(g: WeightedDigraph, i: str, j: str, maxdeg: int) -> dict:
    idx = {v: k for k, v in enumerate(g.vertices)}
    edges = [(idx[a], idx[b], next(iter(w.terms)))
             for a, b, w in g.edges]
    zero = (0,) * len(g.variables)
    cur = {(idx[i], zero): 1}
    total = defaultdict(int)
    if i == j:
        total[zero] = 1
    while cur:
        nxt = defaultdict(int)
        for (v, e), cnt in cur.items():
            for a, b, ew in edges:
                if a != v:
                    continue
                ne = tuple(x + y for x, y in zip(e, ew))
                if sum(ne) <= maxdeg:
                    nxt[(b, ne)] += cnt
        cur = nxt
        for (v, e), cnt in cur.items():
            if v == idx[j]:
                total[e] += cnt
    return dict(total)


def brute_avoidance_counts(words, maxlen: int) -> dict:
    ws = [tuple(int(c) for c in w) for w in words]
    out = defaultdict(int)
    for n in range(maxlen + 1):
        for s in product((0, 1), repeat=n):
            hit = any(s[k:k + len(w)] == w
                      for w in ws for k in range(n - len(w) + 1))
            if not hit:
                out[(s.count(0), n - s.count(0))] += 1
    return dict(out)


# -- walk generating functions ------------------------------------------------------


def test_switching_denominator_exact():
    Fg = transfer_gf(switching_graph(), "a", "d")
    expect = parse_poly("u*z^2 + u*z^2*v - u*z - u*z^4*v + z^2*v - 2*z"
                        " - z*v + 1 + z^3*v + u*z^3", UVZ)
    assert Fg.den_poly() == expect
    sliced = Fg.den_poly().eval_partial({"u": F(1), "v": F(1)})
    factored = parse_poly("(1 - 3*z + z^2)*(1 - z - z^2)", UVZ)
    assert sliced == factored.eval_partial({"u": F(1), "v": F(1)})


def test_single_loop_and_empty_graph():
    gl = WeightedDigraph(("s",), [("s", "s", parse_poly("x", ("x",)))])
    Fl = transfer_gf(gl, "s", "s")
    assert Fl.numerator.poly == parse_poly("1", ("x",))
    assert Fl.den_poly() == parse_poly("1 - x", ("x",))
    ge = WeightedDigraph(("a", "b"), [])
    assert transfer_gf(ge, "a", "a").numerator.poly.constant_term() == 1
    assert not transfer_gf(ge, "a", "b").numerator.poly


def test_transfer_matches_dp_path_counts():
    g = switching_graph()
    for start, end in (("a", "d"), ("a", "a"), ("b", "c")):
        Fg = transfer_gf(g, start, end)
        table = expand_coefficients(Fg, 12)
        dp = dp_path_counts(g, start, end, 12)
        for e, cnt in dp.items():
            assert table.get(e) == cnt
        for e, c in table.coeffs.items():
            if c:
                assert dp.get(e, 0) == c


def test_two_state_walks_by_hand():
    m = lambda s: parse_poly(s, XY)
    g = WeightedDigraph(("p", "q"), [("p", "q", m("x")), ("q", "p", m("y"))])
    Fg = transfer_gf(g, "p", "p")
    # walks p -> p alternate x and y: 1/(1 - x y)
    assert Fg.den_poly() == parse_poly("1 - x*y", XY)
    dp = dp_path_counts(g, "p", "p", 20)
    table = expand_coefficients(Fg, 20)
    for k in range(11):
        assert table.get((k, k)) == dp.get((k, k), 0) == 1


def test_bareiss_matches_cofactor_expansion():
    g = switching_graph()
    a = g.weight_matrix()
    one = MultiPoly.const(UVZ, 1)
    m = [[(one if r == c else MultiPoly.zero(UVZ)) - a[r][c]
          for c in range(4)] for r in range(4)]
    assert det_bareiss(m) == det_cofactor(m)
    V, _ = connector_matrix(forbidden_pair_spec())
    onexy = MultiPoly.const(XY, 1)
    mv = [[(onexy if r == c else MultiPoly.zero(XY)) + V[r][c]
           for c in range(2)] for r in range(2)]
    assert det_bareiss(mv) == det_cofactor(mv)
    # a 5x5 monomial matrix with structural zeros
    vs = ("x", "y")
    entries = {}
    for r in range(5):
        for c in range(5):
            if (r + 2 * c) % 3 == 0:
                entries[(r, c)] = MultiPoly(vs, {(r % 3, c % 2): F(1)})
    m5 = [[entries.get((r, c), MultiPoly.zero(vs)) for c in range(5)]
          for r in range(5)]
    assert det_bareiss(m5) == det_cofactor(m5)


def test_digraph_validation():
    m = lambda s: parse_poly(s, ("x",))
    with pytest.raises(ValueError):
        WeightedDigraph(("a",), [("a", "a", parse_poly("2*x", ("x",)))])
    with pytest.raises(ValueError):
        WeightedDigraph(("a",), [("a", "a", parse_poly("x + x^2", ("x",)))])
    with pytest.raises(ValueError):
        WeightedDigraph(("a",), [("a", "a", parse_poly("1", ("x",)))])
    with pytest.raises(ValueError):
        WeightedDigraph(("a",), [("a", "b", m("x"))])
    with pytest.raises(AnalysisRefusal) as e:
        WeightedDigraph(tuple(f"v{k}" for k in range(13)), [])
    assert e.value.code == "matrix-too-large"


# -- substring avoidance ------------------------------------------------------------


def test_connector_matrices_for_word_pair():
    V, L = connector_matrix(forbidden_pair_spec())
    assert V[0][0] == parse_poly("x^3*y^4 + x^2*y^3", XY)
    assert V[0][1] == parse_poly("x^3*y^4", XY)
    assert V[1][0] == parse_poly("x^2*y^4 + x*y^3 + y^2", XY)
    assert V[1][1] == parse_poly("x^2*y^4", XY)
    assert L[0][0] == parse_poly("x^3*y^5", XY)
    assert L[1][1] == parse_poly("x^2*y^5", XY)
    assert not L[0][1] and not L[1][0]


def test_connector_gf_for_word_pair():
    Fc = connector_gf(forbidden_pair_spec())
    assert Fc.numerator.poly == parse_poly(
        "1 + x^2*y^3 + x^2*y^4 + x^3*y^4 - x^3*y^6", XY)
    assert Fc.den_poly() == parse_poly(
        "1 - x - y + x^2*y^3 - x^3*y^3 - x^4*y^4 - x^3*y^6 + x^4*y^6", XY)


def test_connector_counts_match_word_scan():
    spec = forbidden_pair_spec()
    table = expand_coefficients(connector_gf(spec), 14)
    brute = brute_avoidance_counts(spec.words, 14)
    for r in range(15):
        for s in range(15 - r):
            assert table.get((r, s)) == brute.get((r, s), 0)


def test_single_word_connector():
    spec = ForbiddenSpec(2, ["11"], variables=XY)
    V, L = connector_matrix(spec)
    assert V[0][0] == parse_poly("y", XY)
    Fc = connector_gf(spec)
    assert Fc.numerator.poly == parse_poly("1 + y", XY)
    assert Fc.den_poly() == parse_poly("1 - x - x*y", XY)
    diag = diag_specialize(Fc, {"x": "x", "y": "x"})
    table = expand_coefficients(diag, 12)
    fib = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377]
    for n, c in enumerate(fib):
        assert table.get((n,)) == c


def test_empty_spec_and_disjoint_words():
    empty = connector_gf(ForbiddenSpec(2, [], variables=XY))
    assert empty.numerator.poly == parse_poly("1", XY)
    assert empty.den_poly() == parse_poly("1 - x - y", XY)
    V, _ = connector_matrix(ForbiddenSpec(2, ["00", "11"], variables=XY))
    assert not V[0][1] and not V[1][0]
    assert V[0][0] == parse_poly("x", XY)
    assert V[1][1] == parse_poly("y", XY)


def test_forbidden_spec_validation():
    with pytest.raises(ValueError):
        ForbiddenSpec(2, ["0", "00"])
    with pytest.raises(ValueError):
        ForbiddenSpec(2, ["012"])
    with pytest.raises(ValueError):
        ForbiddenSpec(2, [""])
    with pytest.raises(ValueError):
        ForbiddenSpec(2, ["01", "01"])


@given(st.lists(st.text(alphabet="01", min_size=2, max_size=4),
                min_size=1, max_size=2, unique=True))
@settings(max_examples=40, deadline=None)
def test_connector_counts_random_specs(words):
    ws = [tuple(int(c) for c in w) for w in words]
    for a in ws:
        for b in ws:
            if a is not b:
                assume(not any(b[k:k + len(a)] == a
                               for k in range(len(b) - len(a) + 1)))
    spec = ForbiddenSpec(2, words, variables=XY)
    table = expand_coefficients(connector_gf(spec), 8)
    brute = brute_avoidance_counts(words, 8)
    for r in range(9):
        for s in range(9 - r):
            assert table.get((r, s)) == brute.get((r, s), 0)


def test_adjugate_identity_on_corpus_matrices():
    V, _ = connector_matrix(forbidden_pair_spec())
    one = MultiPoly.const(XY, 1)
    m = [[(one if a == b else MultiPoly.zero(XY)) + V[a][b]
          for b in range(2)] for a in range(2)]
    adj, det = adjugate(m)
    for a in range(2):
        for b in range(2):
            acc = MultiPoly.zero(XY)
            for k in range(2):
                acc = acc + m[a][k] * adj[k][b]
            assert acc == (det if a == b else MultiPoly.zero(XY))
    g = switching_graph()
    aw = g.weight_matrix()
    oneu = MultiPoly.const(UVZ, 1)
    ia = [[(oneu if r == c else MultiPoly.zero(UVZ)) - aw[r][c]
           for c in range(4)] for r in range(4)]
    adj, det = adjugate(ia)
    for a in range(4):
        for b in range(4):
            acc = MultiPoly.zero(UVZ)
            for k in range(4):
                acc = acc + ia[a][k] * adj[k][b]
            assert acc == (det if a == b else MultiPoly.zero(UVZ))


# -- specialization -----------------------------------------------------------------


def test_diag_specialize_known_slices():
    num = parse_poly("x*y*(1 - 3*x + 3*x^2 - x^3)", XY)
    den = parse_poly("1 - 4*x + 6*x^2 - 4*x^3 + x^4 - x*y + x^2*y + x^3*y"
                     " - x^4*y - x^3*y^2", XY)
    hcp = RationalGF.from_polys(num, den, combinatorial=True)
    by_row = diag_specialize(hcp, {"x": "x", "y": 1})
    assert by_row.den_poly() == parse_poly("1 - 5*x + 7*x^2 - 4*x^3", ("x",))
    binom = RationalGF.from_polys(parse_poly("1", XY),
                                  parse_poly("1 - x - y", XY),
                                  combinatorial=True)
    diag = diag_specialize(binom, {"x": "x", "y": "x"})
    assert diag.den_poly() == parse_poly("1 - 2*x", ("x",))


def test_diag_specialize_validation():
    binom = RationalGF.from_polys(parse_poly("1", XY),
                                  parse_poly("1 - x - y", XY),
                                  combinatorial=True)
    with pytest.raises(ValueError):
        diag_specialize(binom, {"x": "x"})
    with pytest.raises(ValueError):
        diag_specialize(binom, {"x": "x", "y": -1})
    with pytest.raises(ValueError):
        diag_specialize(binom, {"x": "x", "y": "t"})
    with pytest.raises(ValueError):
        diag_specialize(binom, {"x": 1, "y": 2})


# -- end-to-end switching statistics ------------------------------------------------


def scale_variable(p: MultiPoly, name: str, k: int) -> MultiPoly:
    i = p.vars.index(name)
    return MultiPoly(p.vars, {e: c * F(k) ** e[i]
                              for e, c in p.terms.items()})


def test_switching_mean_fractions():
    Fg = transfer_gf(switching_graph(), "a", "d")
    res = wlln_mean(Fg, slicing="last_variable", free="z")
    assert abs(res["x0"] - (3 - math.sqrt(5)) / 2) < 1e-12
    frac = res["direction"][0] / res["direction"][2]
    assert abs(frac - (5 - math.sqrt(5)) / 20) < 1e-12
    # doubling the multiplicity of the second switch type
    num2 = scale_variable(Fg.numerator.poly, "v", 2)
    den2 = scale_variable(Fg.den_poly(), "v", 2)
    F2 = RationalGF.from_polys(num2, den2, combinatorial=True)
    sliced = den2.eval_partial({"u": F(1), "v": F(1)})
    assert uni_from_multipoly(sliced, "z") == \
        [F(1), F(-5), F(5), F(3), F(-2)]
    res2 = wlln_mean(F2, slicing="last_variable", free="z")
    assert abs(res2["x0"] - 0.311108) < 1e-6
    frac2 = res2["direction"][0] / res2["direction"][2]
    assert abs(frac2 - 0.024) < 1e-3
    assert verify_elimination_polynomial(res2["x0"],
                                         [1, -5, 5, 3, -2]) < 1e-12
