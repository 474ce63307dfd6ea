"""Problem files, reports, and command-line entry points.

A problem file is one JSON object describing a coefficient array and
optional expected-value checks:

    {
      "schema_version": 1,
      "name": "delannoy",
      "kind": "explicit_gf",
      "variables": ["x", "y"],
      "combinatorial": true,
      "directions": [[1, 1]],
      "denominator": "1 - x - y - x*y",
      "expected": [
        {"quantity": "growth", "direction": [1, 1],
         "value": "5.82842712474619", "tolerance": 1e-12}
      ]
    }

Kinds and their payload fields:

    explicit_gf   numerator, denominator (expression trees or polynomial
                  text), optional denominator_factors
    transfer      graph {vertices, edges [[from, to, weight], ...]},
                  source, target, optional diag {var: var-or-number}
    connector     alphabet (int), words (forbidden substrings), optional
                  diag
    riordan       phi, v (series specs)
    lagrange      phi (series spec), optional psi (schema name or spec)
    kernel_walk   steps [[dx, dy], [dx, dy, "w"], ...]

Expression trees are either polynomial text in the shared grammar or
nodes {"op": "sum"|"product"|"quotient"|"exp"|"poly", ...}.  Series
specs are {"form": "poly"|"rational"|"implicit", ...}.

Reports are JSON with every float rendered as a decimal string (15
significant digits), exact values as integer or fraction strings, and a
``generated_at`` timestamp that byte-identity comparisons must exclude.
Exit codes: 0 success, 1 input error, 2 typed analysis refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from typing import Any, Sequence

from .asymptotics import AsymptoticTerm, evaluate_term, format_term
from .critical import Direction, contrib
from .kernel import StepSet, kernel_gf, walk_asymptotics
from .polycore import (
    AnalysisRefusal,
    AnalyticExpr,
    ExpExpr,
    MultiPoly,
    ParseError,
    PolyExpr,
    ProductExpr,
    QuotientExpr,
    SumExpr,
    format_poly,
    parse_poly,
    uni_to_multipoly,
)
from .riordan_lagrange import (
    ImplicitSF,
    PolynomialSF,
    RationalSF,
    SeriesFunc,
    inversion_coefficient,
    lagrange_univariate,
    riordan_coefficient,
    riordan_leading_term,
    wlln_mean,
)
from .series_oracle import (
    RationalGF,
    coefficient,
    expand_coefficients,
    relative_error_curve,
)
from .transfer import (
    ForbiddenSpec,
    WeightedDigraph,
    connector_gf,
    diag_specialize,
    transfer_gf,
)

__all__ = [
    "Problem",
    "SCHEMA_VERSION",
    "cmd_analyze",
    "cmd_corpus",
    "cmd_series",
    "cmd_verify",
    "corpus_names",
    "corpus_path",
    "load_problem",
    "main",
]

SCHEMA_VERSION = 1

KINDS = ("explicit_gf", "riordan", "lagrange", "transfer", "connector",
         "kernel_walk")

GF_KINDS = ("explicit_gf", "transfer", "connector")


class InputError(ValueError):
    """Malformed problem file, flag, or direction (exit code 1)."""


# -- number rendering ---------------------------------------------------------------


def _dec(x) -> str:
    """Deterministic decimal rendering at 15 significant digits."""
    return f"{float(x):.15g}"


def _dec_complex(z) -> Any:
    z = complex(z)
    if abs(z.imag) <= 1e-13 * (1 + abs(z.real)):
        return _dec(z.real)
    return {"re": _dec(z.real), "im": _dec(z.imag)}


def _frac_str(q: Fraction) -> str:
    return str(q)


def _parse_number(v) -> Fraction | float:
    """A check value: exact when it reads as int or fraction text."""
    if isinstance(v, bool):
        raise InputError("boolean is not a numeric value")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            try:
                return float(v)
            except ValueError:
                raise InputError(f"unreadable number {v!r}") from None
    raise InputError(f"unreadable number {v!r}")


# -- expression and series-spec decoding ---------------------------------------------


def _expr_from_json(node, variables: tuple[str, ...]) -> AnalyticExpr:
    if isinstance(node, str):
        return PolyExpr(parse_poly(node, variables))
    if not isinstance(node, dict):
        raise InputError(f"expression must be text or an object: {node!r}")
    op = node.get("op")
    if op == "poly":
        return PolyExpr(parse_poly(node["text"], variables))
    if op in ("sum", "product"):
        parts = tuple(_expr_from_json(p, variables)
                      for p in node.get("parts", []))
        if not parts:
            raise InputError(f"{op} node needs parts")
        return SumExpr(parts) if op == "sum" else ProductExpr(parts)
    if op == "quotient":
        return QuotientExpr(_expr_from_json(node["num"], variables),
                            _expr_from_json(node["den"], variables))
    if op == "exp":
        return ExpExpr(parse_poly(node["arg"], variables))
    raise InputError(f"unknown expression op {op!r}")


def _coeff_list(values) -> list[Fraction]:
    return [Fraction(str(v)) for v in values]


def _seriesfunc_from_json(node) -> SeriesFunc:
    if not isinstance(node, dict) or "form" not in node:
        raise InputError(f"series spec must be an object with a form: "
                         f"{node!r}")
    form = node["form"]
    if form == "poly":
        return PolynomialSF(_coeff_list(node["coeffs"]))
    if form == "rational":
        return RationalSF(_coeff_list(node["num"]), _coeff_list(node["den"]))
    if form == "implicit":
        variables = tuple(node.get("variables", ("x", "w")))
        if len(variables) != 2:
            raise InputError("implicit series spec needs two variables")
        alpha = parse_poly(node["alpha"], variables)
        radius = node.get("radius")
        return ImplicitSF(alpha, Fraction(str(node.get("anchor", 0))),
                          radius=None if radius is None else float(radius))
    raise InputError(f"unknown series form {form!r}")


def _psi_from_json(node):
    if node is None:
        return "identity"
    if isinstance(node, str):
        return node
    return _seriesfunc_from_json(node)


# -- problems -------------------------------------------------------------------------


@dataclass
class Problem:
    """A loaded problem file with lazily built analysis objects."""

    name: str
    kind: str
    variables: tuple[str, ...]
    combinatorial: bool
    directions: list[tuple[int, ...]]
    backend: str
    expected: list[dict]
    raw: dict
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def arity(self) -> int:
        if self.kind == "lagrange":
            return 1
        if self.kind in ("riordan", "kernel_walk"):
            return 2
        return len(self.variables)

    def gf(self) -> RationalGF:
        """The generating function for explicit, transfer, connector."""
        if "gf" in self._cache:
            return self._cache["gf"]
        raw = self.raw
        if self.kind == "explicit_gf":
            num = _expr_from_json(raw.get("numerator", "1"), self.variables)
            den = _expr_from_json(raw["denominator"], self.variables)
            factors = raw.get("denominator_factors")
            if factors is not None:
                factors = tuple(parse_poly(f, self.variables)
                                for f in factors)
            F = RationalGF(num, den, self.variables,
                           combinatorial=self.combinatorial,
                           denominator_factors=factors)
        elif self.kind == "transfer":
            g = raw["graph"]
            edges = [(e[0], e[1], parse_poly(e[2], self.variables))
                     for e in g["edges"]]
            graph = WeightedDigraph(tuple(g["vertices"]), edges)
            F = transfer_gf(graph, raw["source"], raw["target"])
            F = self._respecialize(F)
        elif self.kind == "connector":
            spec = ForbiddenSpec(int(raw["alphabet"]), list(raw["words"]),
                                 variables=self.variables)
            F = connector_gf(spec)
            F = self._respecialize(F)
        else:
            raise InputError(f"kind {self.kind!r} has no generating function")
        self._cache["gf"] = F
        return F

    def _respecialize(self, F: RationalGF) -> RationalGF:
        diag = self.raw.get("diag")
        if diag:
            F = diag_specialize(F, dict(diag))
        if F.combinatorial != self.combinatorial:
            F = RationalGF(F.numerator, F.denominator, F.variables,
                           combinatorial=self.combinatorial,
                           denominator_factors=F.denominator_factors)
        return F

    def pair(self) -> tuple[SeriesFunc, SeriesFunc]:
        """(phi, v) for the riordan kind."""
        if "pair" not in self._cache:
            self._cache["pair"] = (_seriesfunc_from_json(self.raw["phi"]),
                                   _seriesfunc_from_json(self.raw["v"]))
        return self._cache["pair"]

    def branching(self):
        """(phi, psi) for the lagrange kind."""
        if "branching" not in self._cache:
            self._cache["branching"] = (
                _seriesfunc_from_json(self.raw["phi"]),
                _psi_from_json(self.raw.get("psi")))
        return self._cache["branching"]

    def walk(self) -> StepSet:
        if "walk" not in self._cache:
            steps = []
            for s in self.raw["steps"]:
                if len(s) == 2:
                    steps.append((int(s[0]), int(s[1])))
                else:
                    steps.append((int(s[0]), int(s[1]),
                                  Fraction(str(s[2]))))
            self._cache["walk"] = StepSet(steps)
        return self._cache["walk"]

    def reduction(self):
        if "reduction" not in self._cache:
            self._cache["reduction"] = kernel_gf(self.walk())
        return self._cache["reduction"]


def load_problem(path) -> Problem:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read problem file: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"problem file is not valid JSON: {e}") from None
    return problem_from_dict(raw)


def problem_from_dict(raw: dict) -> Problem:
    if not isinstance(raw, dict):
        raise InputError("problem file must hold a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; expected one of "
                         f"{', '.join(KINDS)}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise InputError("problem needs a nonempty name")
    variables = tuple(raw.get("variables", ()))
    if kind in GF_KINDS and not variables:
        raise InputError(f"kind {kind!r} needs variables")
    directions = [_check_direction(d) for d in raw.get("directions", [])]
    expected = raw.get("expected", [])
    if not isinstance(expected, list):
        raise InputError("expected must be a list of checks")
    return Problem(name=name, kind=kind, variables=variables,
                   combinatorial=bool(raw.get("combinatorial", False)),
                   directions=directions,
                   backend=str(raw.get("backend", "auto")),
                   expected=expected, raw=raw)


def _check_direction(d) -> tuple[int, ...]:
    try:
        t = tuple(int(k) for k in d)
    except (TypeError, ValueError):
        raise InputError(f"direction {d!r} must be a list of integers") \
            from None
    if not t or any(k <= 0 for k in t):
        raise InputError(f"direction {d!r} must have positive entries")
    return t


def parse_direction(text: str) -> tuple[int, ...]:
    """r:s or r:s:t with positive integer parts."""
    parts = text.split(":")
    try:
        t = tuple(int(p) for p in parts)
    except ValueError:
        raise InputError(f"direction {text!r} is not of the form r:s[:t]") \
            from None
    if not t or any(k <= 0 for k in t):
        raise InputError(f"direction {text!r} must have positive entries")
    return t


def _resolve_direction(prob: Problem, flag: str | None) -> tuple[int, ...]:
    if flag is not None:
        d = parse_direction(flag)
    elif prob.directions:
        d = prob.directions[0]
    else:
        raise InputError("no direction given and the problem lists none")
    if len(d) != prob.arity:
        raise InputError(f"direction {d} has {len(d)} parts; "
                         f"kind {prob.kind!r} here expects {prob.arity}")
    return d


# -- analysis dispatch ----------------------------------------------------------------


def analysis_term(prob: Problem, direction: Sequence[int],
                  backend: str | None = None) -> AsymptoticTerm:
    """The leading term for one direction, dispatched on kind."""
    direction = tuple(direction)
    key = ("term", direction, backend)
    if key in prob._cache:
        return prob._cache[key]
    if prob.kind in GF_KINDS:
        term = _gf_leading_term(prob, direction, backend)
    elif prob.kind == "riordan":
        phi, v = prob.pair()
        term = riordan_leading_term(phi, v, direction[0], direction[1])
    elif prob.kind == "lagrange":
        phi, psi = prob.branching()
        term = lagrange_univariate(phi, psi, n=direction[0])
    else:
        term = walk_asymptotics(prob.walk(), direction[0], direction[1])
    prob._cache[key] = term
    return term


def _gf_leading_term(prob: Problem, direction, backend) -> AsymptoticTerm:
    from .asymptotics import leading_term

    F = prob.gf()
    chosen = backend or prob.backend
    term = leading_term(F, Direction(direction), backend=chosen)
    key = ("contrib", direction, chosen)
    if key not in prob._cache:
        prob._cache[key] = contrib(F, Direction(direction), backend=chosen)
    term.meta["contrib"] = prob._cache[key]
    return term


def exact_value(prob: Problem, index: Sequence[int]) -> Fraction:
    """Exact coefficient at one index, dispatched on kind."""
    index = tuple(int(k) for k in index)
    if prob.kind in GF_KINDS:
        return coefficient(prob.gf(), index)
    if prob.kind == "riordan":
        phi, v = prob.pair()
        return riordan_coefficient(phi, v, index[0], index[1])
    if prob.kind == "lagrange":
        phi, psi = prob.branching()
        return inversion_coefficient(phi, psi, index[0])
    red = prob.reduction()
    return riordan_coefficient(red.phi, red.v, index[0], index[1])


def error_rows(prob: Problem, term: AsymptoticTerm,
               direction: Sequence[int], n_values: Sequence[int]) -> list:
    """Exact-vs-predicted rows along n * direction."""
    if prob.kind in GF_KINDS:
        return relative_error_curve(prob.gf(), term, direction, n_values)
    rows = []
    for n in n_values:
        r = tuple(n * k for k in direction)
        exact = exact_value(prob, r)
        approx = evaluate_term(term, r)
        if exact == 0:
            rows.append({"n": n, "r": r, "exact": exact, "approx": approx,
                         "rel_error": None,
                         "note": "exact zero" + ("" if approx == 0 else
                                                 " but prediction is "
                                                 "nonzero")})
        else:
            rel = abs((approx - float(exact)) / float(exact))
            rows.append({"n": n, "r": r, "exact": exact, "approx": approx,
                         "rel_error": rel, "note": ""})
    return rows


# -- report assembly ------------------------------------------------------------------


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _min_poly_text(alg) -> str:
    return format_poly(uni_to_multipoly(list(alg.poly), "t"))


def _points_block(term: AsymptoticTerm) -> list[dict]:
    res = term.meta.get("contrib")
    certified = res.points[0] if res is not None and res.points else None
    out = []
    for k, c in enumerate(term.contributions):
        entry: dict[str, Any] = {
            "coords": [_dec_complex(z) for z in c.coords],
            "amplitude": _dec_complex(c.amplitude),
        }
        if k == 0 and certified is not None:
            if certified.exact:
                entry["min_polys"] = [_min_poly_text(a)
                                      for a in certified.exact]
            entry["classification"] = certified.classification.value
            entry["minimality"] = certified.minimality.value
        elif k > 0:
            entry["role"] = "torus companion"
        out.append(entry)
    return out


def _growth_per_step(term: AsymptoticTerm, direction) -> float:
    g = 1.0
    d = Direction(tuple(direction)).reduced()
    for z, r in zip(term.contributions[0].coords, d):
        g *= abs(complex(z)) ** (-r)
    return g


def _term_block(term: AsymptoticTerm, direction) -> dict:
    block: dict[str, Any] = {
        "classification": term.kind,
        "bases": [_dec_complex(1 / complex(z))
                  for z in term.contributions[0].coords],
        "growth_per_step": _dec(_growth_per_step(term, direction)),
        "b0": _dec_complex(term.contributions[0].amplitude),
        "order_exponent": str(term.order_exponent),
        "norm_index": term.norm_index,
        "formatted": format_term(term),
    }
    drift = {k: _dec(term.meta[k])
             for k in ("x0", "v0", "lambda", "sigma2", "y0", "growth")
             if k in term.meta}
    if drift:
        block["drift"] = drift
    if "periodicity" in term.meta:
        block["periodicity"] = term.meta["periodicity"]
    if "vanishing" in term.meta:
        block["vanishing_factors"] = list(term.meta["vanishing"])
    return block


def _verification_block(rows) -> list[dict]:
    out = []
    for row in rows:
        out.append({
            "n": row["n"],
            "index": list(row["r"]),
            "exact": _frac_str(row["exact"]),
            "approx": _dec(row["approx"]),
            "rel_error": None if row["rel_error"] is None
            else _dec(row["rel_error"]),
            "note": row["note"],
        })
    return out


def _warnings_block(prob: Problem, term: AsymptoticTerm,
                    rows, tol: float | None) -> list[str]:
    warnings = []
    res = term.meta.get("contrib")
    if res is not None and res.points:
        m = res.points[0].minimality.value
        if m not in ("strictly_minimal", "minimal"):
            warnings.append(f"minimality evidence is {m!r}")
    per = term.meta.get("periodicity")
    if per and per.get("gap", 1) > 1:
        warnings.append(f"support gap {per['gap']}: companion points "
                        "cancel forced-zero classes")
    if tol is not None:
        checked = [r for r in rows if r["rel_error"] is not None]
        if checked and checked[-1]["rel_error"] > tol:
            warnings.append(
                f"relative error {checked[-1]['rel_error']:.3g} at "
                f"n={checked[-1]['n']} exceeds --tol {tol:g}")
    return warnings


def _doubling_values(limit: int) -> list[int]:
    out, k = [], 1
    while k <= limit:
        out.append(k)
        k *= 2
    return out


def build_report(prob: Problem, direction, backend=None,
                 order: int | None = None, tol: float | None = None) -> dict:
    term = analysis_term(prob, direction, backend)
    rows = error_rows(prob, term, direction,
                      _doubling_values(order if order else 16))
    report = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _timestamp(),
        "problem": prob.name,
        "kind": prob.kind,
        "direction": list(direction),
        "backend": backend or prob.backend,
        "points": _points_block(term),
        "term": _term_block(term, direction),
        "verification": _verification_block(rows),
        "warnings": _warnings_block(prob, term, rows, tol),
    }
    return report


def refusal_report(prob_name: str | None, e: AnalysisRefusal) -> dict:
    payload = e.payload
    view: Any
    if isinstance(payload, dict):
        view = {str(k): str(v) for k, v in payload.items()}
    elif payload is None:
        view = None
    else:
        view = type(payload).__name__
    return {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _timestamp(),
        "problem": prob_name,
        "refusal": {"code": e.code, "message": str(e), "payload": view},
    }


# -- text rendering -------------------------------------------------------------------


def _render_report_text(rep: dict) -> str:
    lines = [f"problem: {rep['problem']} ({rep['kind']})",
             f"generated_at: {rep['generated_at']}",
             f"direction: {':'.join(str(k) for k in rep['direction'])}",
             f"backend: {rep['backend']}",
             f"classification: {rep['term']['classification']}"]
    for k, p in enumerate(rep["points"]):
        coords = ", ".join(c if isinstance(c, str)
                           else f"{c['re']}+{c['im']}i"
                           for c in p["coords"])
        amp = p["amplitude"]
        amp_s = amp if isinstance(amp, str) else f"{amp['re']}+{amp['im']}i"
        lines.append(f"point {k + 1}: ({coords})  amplitude {amp_s}")
        for v, mp in zip("xyzuvw", p.get("min_polys", [])):
            lines.append(f"  defining polynomial ({v}): {mp}")
    t = rep["term"]
    lines.append(f"term: {t['formatted']}")
    lines.append(f"growth per direction step: {t['growth_per_step']}")
    if "drift" in t:
        lines.append("drift data: " + ", ".join(
            f"{k}={v}" for k, v in t["drift"].items()))
    if t.get("periodicity"):
        lines.append(f"periodicity: {t['periodicity']}")
    lines.append("verification:")
    for row in rep["verification"]:
        rel = row["rel_error"] if row["rel_error"] is not None else "-"
        note = f"  ({row['note']})" if row["note"] else ""
        lines.append(f"  n={row['n']} index={tuple(row['index'])} "
                     f"exact={row['exact']} approx={row['approx']} "
                     f"rel_error={rel}{note}")
    for w in rep["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _render_refusal_text(rep: dict) -> str:
    r = rep["refusal"]
    lines = [f"problem: {rep['problem']}",
             f"generated_at: {rep['generated_at']}",
             f"refusal: {r['code']}",
             f"message: {r['message']}"]
    if r["payload"]:
        lines.append(f"payload: {r['payload']}")
    return "\n".join(lines) + "\n"


def _emit(payload: dict, text_renderer, fmt: str, out: str | None) -> None:
    if fmt == "json":
        body = json.dumps(payload, indent=2) + "\n"
    else:
        body = text_renderer(payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


# -- subcommands ----------------------------------------------------------------------


def cmd_analyze(args) -> int:
    prob = load_problem(args.problem)
    direction = _resolve_direction(prob, args.direction)
    try:
        rep = build_report(prob, direction, backend=args.backend,
                           order=args.order, tol=args.tol)
    except AnalysisRefusal as e:
        _emit(refusal_report(prob.name, e), _render_refusal_text,
              args.format, args.out)
        print(f"refused: {e.code}: {e}", file=sys.stderr)
        return 2
    _emit(rep, _render_report_text, args.format, args.out)
    return 0


def _series_rows(prob: Problem, order: int) -> list[dict]:
    if prob.kind in GF_KINDS:
        table = expand_coefficients(prob.gf(), order)
        return [{"index": list(e), "value": _frac_str(c)}
                for e, c in table.items_sorted()]
    rows = []
    if prob.kind == "lagrange":
        for n in range(order + 1):
            rows.append({"index": [n],
                         "value": _frac_str(exact_value(prob, (n,)))})
        return rows
    for total in range(order + 1):
        for s in range(total + 1):
            r = total - s
            c = exact_value(prob, (r, s))
            if c:
                rows.append({"index": [r, s], "value": _frac_str(c)})
    return rows


def _render_series_text(rep: dict) -> str:
    lines = [f"problem: {rep['problem']} ({rep['kind']})",
             f"generated_at: {rep['generated_at']}",
             f"order: {rep['order']}"]
    for row in rep["rows"]:
        lines.append(f"  {tuple(row['index'])}: {row['value']}")
    return "\n".join(lines) + "\n"


def cmd_series(args) -> int:
    prob = load_problem(args.problem)
    if args.order < 0:
        raise InputError("--order must be nonnegative")
    rep = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _timestamp(),
        "problem": prob.name,
        "kind": prob.kind,
        "order": args.order,
        "rows": _series_rows(prob, args.order),
    }
    _emit(rep, _render_series_text, args.format, args.out)
    return 0


def _render_verify_text(rep: dict) -> str:
    lines = [f"problem: {rep['problem']} ({rep['kind']})",
             f"generated_at: {rep['generated_at']}",
             f"direction: {':'.join(str(k) for k in rep['direction'])}",
             f"term: {rep['term']}"]
    for row in rep["rows"]:
        rel = row["rel_error"] if row["rel_error"] is not None else "-"
        note = f"  ({row['note']})" if row["note"] else ""
        lines.append(f"  n={row['n']} index={tuple(row['index'])} "
                     f"exact={row['exact']} approx={row['approx']} "
                     f"rel_error={rel}{note}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    prob = load_problem(args.problem)
    direction = _resolve_direction(prob, args.direction)
    limit = args.max_n // max(direction)
    if limit < 1:
        raise InputError(f"--max-n {args.max_n} admits no index along "
                         f"{':'.join(str(k) for k in direction)}")
    if limit > 1024:
        raise InputError("error curve would exceed 1024 rows")
    try:
        term = analysis_term(prob, direction, args.backend)
    except AnalysisRefusal as e:
        _emit(refusal_report(prob.name, e), _render_refusal_text,
              args.format, args.out)
        print(f"refused: {e.code}: {e}", file=sys.stderr)
        return 2
    rows = error_rows(prob, term, direction, list(range(1, limit + 1)))
    rep = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _timestamp(),
        "problem": prob.name,
        "kind": prob.kind,
        "direction": list(direction),
        "max_n": args.max_n,
        "term": format_term(term),
        "rows": _verification_block(rows),
    }
    _emit(rep, _render_verify_text, args.format, args.out)
    return 0


# -- expected-value checks and the corpus ---------------------------------------------


def _check_direction_of(prob: Problem, chk: dict) -> tuple[int, ...]:
    if "direction" in chk:
        return _check_direction(chk["direction"])
    if prob.directions:
        return prob.directions[0]
    raise InputError(f"check in {prob.name!r} names no direction")


def evaluate_check(prob: Problem, chk: dict) -> tuple[bool, str]:
    """Run one expected-value entry; (passed, description)."""
    q = chk.get("quantity")
    want = _parse_number(chk["value"])
    tol = float(chk.get("tolerance", 0))
    label = q

    if q == "coeff":
        index = tuple(int(k) for k in chk["index"])
        got = exact_value(prob, index)
        label = f"coeff{index}"
        if isinstance(want, Fraction) and tol == 0:
            ok = got == want
            return ok, f"{label}: {got} vs {want} (exact)"
        ok = abs(float(got) - float(want)) <= tol
        return ok, f"{label}: {float(got):.12g} vs {float(want):.12g}"

    if q in ("mean_ratio", "dominant_root"):
        res = wlln_mean(prob.gf(),
                        slicing=chk.get("slicing", "last_variable"),
                        free=chk.get("free"))
        if q == "dominant_root":
            got = res["x0"]
        else:
            i, j = chk.get("axes", (0, 1))
            got = res["direction"][i] / res["direction"][j]
            label = f"mean_ratio[{i}/{j}]"
        ok = abs(got - float(want)) <= tol
        return ok, f"{label}: {got:.12g} vs {float(want):.12g}"

    direction = _check_direction_of(prob, chk)
    term = analysis_term(prob, direction)
    dtext = ":".join(str(k) for k in direction)

    if q == "rel_error":
        n = int(chk["scale"])
        rows = error_rows(prob, term, direction, [n])
        rel = rows[0]["rel_error"]
        label = f"rel_error@{n}x{dtext}"
        if rel is None:
            return False, f"{label}: exact coefficient is zero"
        ok = abs(rel - float(want)) <= tol
        return ok, f"{label}: {rel:.6g} vs {float(want):.6g}"

    if q == "coord":
        axis = int(chk.get("axis", 0))
        z = complex(term.contributions[0].coords[axis])
        got = z.real
        ok = abs(z.imag) <= 1e-9 and abs(got - float(want)) <= tol
        label = f"coord[{axis}]@{dtext}"
    elif q == "amplitude":
        got = complex(term.contributions[0].amplitude).real
        ok = abs(got - float(want)) <= tol
        label = f"amplitude@{dtext}"
    elif q == "growth":
        got = _growth_per_step(term, direction)
        ok = abs(got - float(want)) <= tol
        label = f"growth@{dtext}"
    elif q == "order":
        got = float(term.order_exponent)
        ok = abs(got - float(want)) <= tol
        label = f"order@{dtext}"
    elif q in ("x0", "v0", "sigma2", "lambda", "y0"):
        if q not in term.meta:
            return False, f"{q}: not reported for kind {prob.kind!r}"
        got = float(term.meta[q])
        ok = abs(got - float(want)) <= tol
        label = f"{q}@{dtext}"
    else:
        raise InputError(f"unknown check quantity {q!r}")
    return ok, f"{label}: {got:.12g} vs {float(want):.12g}"


def corpus_names() -> list[str]:
    root = resources.files("gfasym") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir()
                  if p.name.endswith(".json"))


def corpus_path(name: str):
    path = resources.files("gfasym") / "corpus" / f"{name}.json"
    if not path.is_file():
        raise InputError(f"no corpus problem named {name!r}")
    return path


def run_corpus_problem(name: str) -> dict:
    prob = problem_from_dict(json.loads(corpus_path(name).read_text()))
    checks = []
    failed = 0
    for chk in prob.expected:
        try:
            ok, desc = evaluate_check(prob, chk)
        except AnalysisRefusal as e:
            ok, desc = False, f"{chk.get('quantity')}: refused {e.code}"
        checks.append({"passed": ok, "detail": desc})
        failed += 0 if ok else 1
    return {"name": prob.name, "passed": failed == 0,
            "checks": checks, "failed": failed}


def cmd_corpus(args) -> int:
    names = corpus_names()
    if args.list:
        body = "\n".join(names) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(body)
        else:
            sys.stdout.write(body)
        return 0
    if args.only:
        wanted = [n.strip() for spec in args.only for n in spec.split(",")]
        for n in wanted:
            corpus_path(n)
        names = [n for n in names if n in set(wanted)]
    results = [run_corpus_problem(n) for n in names]
    passed = sum(1 for r in results if r["passed"])
    if args.format == "json":
        rep = {
            "schema_version": SCHEMA_VERSION,
            "generated_at": _timestamp(),
            "results": results,
            "passed": passed,
            "total": len(results),
        }
        body = json.dumps(rep, indent=2) + "\n"
    else:
        lines = []
        for r in results:
            status = "PASS" if r["passed"] else "FAIL"
            lines.append(f"{r['name']:<20} {status}  "
                         f"{len(r['checks'])} checks")
            for c in r["checks"]:
                if not c["passed"] or args.verbose:
                    mark = "ok" if c["passed"] else "FAIL"
                    lines.append(f"    [{mark}] {c['detail']}")
        lines.append(f"{passed} of {len(results)} passed")
        body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0 if passed == len(results) else 1


# -- argument parsing -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gfasym",
        description="Leading-term asymptotics of coefficient arrays, "
                    "with exact verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the result to this path")
        p.add_argument("--format", choices=("json", "text"),
                       default="json", help="output format")

    pa = sub.add_parser("analyze",
                        help="locate singularities and build the term")
    pa.add_argument("problem", help="problem file (JSON)")
    pa.add_argument("--direction", help="direction r:s[:t]")
    pa.add_argument("--order", type=int, default=None,
                    help="largest verification multiple (doubling from 1)")
    pa.add_argument("--tol", type=float, default=None,
                    help="warn when the last verification row exceeds this")
    pa.add_argument("--backend", choices=("exact", "numeric", "auto"),
                    default=None, help="critical-point solver backend")
    common(pa)
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("series", help="exact coefficient table")
    ps.add_argument("problem")
    ps.add_argument("--order", type=int, default=10,
                    help="total-degree bound for the table")
    common(ps)
    ps.set_defaults(func=cmd_series)

    pv = sub.add_parser("verify", help="error curve along a direction")
    pv.add_argument("problem")
    pv.add_argument("--direction", help="direction r:s[:t]")
    pv.add_argument("--max-n", type=int, default=64,
                    help="largest index coordinate to reach")
    pv.add_argument("--backend", choices=("exact", "numeric", "auto"),
                    default=None)
    common(pv)
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("corpus", help="run the bundled example corpus")
    pc.add_argument("--only", action="append", default=[],
                    help="run only these names (comma separated, repeat ok)")
    pc.add_argument("--list", action="store_true",
                    help="list corpus problem names and exit")
    pc.add_argument("--verbose", action="store_true",
                    help="show passing checks too")
    common(pc)
    pc.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ParseError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
