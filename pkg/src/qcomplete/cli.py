"""Batch front end: validate model files, dispatch to the checkers, report.

Model files are JSON documents with a ``type`` discriminator; expressions
are strings in the formula grammar of :mod:`qcomplete.expr`.  Exit codes:
0 = Holds, 1 = Fails, 2 = Inconclusive, 64 = usage error, 65 = invalid
model.  Reports go to stdout in human form and, with ``--json PATH``, to a
machine-readable file; verdicts are deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import expr as ex
from .ars import (GeneratingFamily, NotBracketGeneratingError, ars_effective_potential,
                  classify_ars, det_xi, growth_vector, regularity_check)
from .criteria import (DEFAULT_SEED, CriterionVerdict, CurvatureModel, Outcome,
                       SingularPotentialModel, Stratum, check_cone, check_kwss,
                       check_main, check_measure, check_quadratic_curvature,
                       check_superquadratic_curvature)
from .effpot import BoundaryModel, PotentialFn, cone_model, effective_potential, leading_behavior
from .riccati import (QuadraticRiccatiProblem, SuperquadraticRiccatiProblem,
                      critical_datum, integrate_riccati, solve_quadratic,
                      solve_superquadratic)
from .weyl import Endpoint, classify_endpoint, classify_inverse_square

__all__ = ["main", "run", "catalog", "UnknownFixtureError", "ModelError",
           "EXIT_HOLDS", "EXIT_FAILS", "EXIT_INCONCLUSIVE", "EXIT_USAGE",
           "EXIT_INVALID_MODEL"]

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_INVALID_MODEL = 65

MODEL_TYPES = ("measure", "cone", "curvature", "kwss", "ars", "potential")


class ModelError(ValueError):
    """Invalid model file; the message names the offending field."""


class UnknownFixtureError(KeyError):
    pass


# -- model validation ------------------------------------------------------------

def _need(doc: dict, field: str, kinds, where: str = "model"):
    if field not in doc:
        raise ModelError(f"{where}: missing field '{field}'")
    value = doc[field]
    if kinds is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ModelError(f"{where}: field '{field}' must be a number")
        return float(value)
    if kinds is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ModelError(f"{where}: field '{field}' must be an integer")
        return value
    if not isinstance(value, kinds):
        raise ModelError(f"{where}: field '{field}' has the wrong type")
    return value


def _parse_expr_field(doc: dict, field: str, where: str = "model") -> ex.Expr:
    text = doc.get(field)
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return ex.const(float(text))
    if not isinstance(text, str):
        raise ModelError(f"{where}: field '{field}' must be a formula string")
    try:
        return ex.parse(text)
    except ex.ExprError as err:
        raise ModelError(f"{where}: field '{field}': {err}") from None


def _parse_box(doc: dict, field: str, length: int, where: str = "model"):
    if field not in doc or doc[field] is None:
        return None
    box = doc[field]
    if (not isinstance(box, list) or len(box) != length
            or not all(isinstance(iv, list) and len(iv) == 2 for iv in box)):
        raise ModelError(f"{where}: field '{field}' must be a list of "
                         f"{length} [lo, hi] pairs")
    out = []
    for iv in box:
        lo, hi = float(iv[0]), float(iv[1])
        if not lo < hi:
            raise ModelError(f"{where}: field '{field}' has an empty interval {iv}")
        out.append((lo, hi))
    return tuple(out)


def validate_model(doc) -> dict:
    """Check a parsed JSON document against the model schema; returns it."""
    if not isinstance(doc, dict):
        raise ModelError("model: document must be a JSON object")
    mtype = _need(doc, "type", str)
    if mtype not in MODEL_TYPES:
        raise ModelError(f"model: field 'type' must be one of {MODEL_TYPES}")
    if mtype == "measure":
        n = _need(doc, "n", int)
        if n < 1:
            raise ModelError("model: field 'n' must be >= 1")
        _need(doc, "eps", float)
        x_vars = _need(doc, "x_vars", list)
        if not all(isinstance(v, str) for v in x_vars):
            raise ModelError("model: field 'x_vars' must list variable names")
        _parse_expr_field(doc, "a")
        _parse_expr_field(doc, "phi")
        _parse_box(doc, "x_box", len(x_vars))
    elif mtype == "cone":
        if _need(doc, "n", int) < 2:
            raise ModelError("model: field 'n' must be >= 2")
        _need(doc, "alpha", float)
        _need(doc, "eps", float)
    elif mtype == "curvature":
        if _need(doc, "n", int) < 2:
            raise ModelError("model: field 'n' must be >= 2")
        regime = _need(doc, "regime", str)
        _need(doc, "eps", float)
        _need(doc, "h_eps_max", float)
        if regime == "quadratic":
            _need(doc, "a1", float)
            _need(doc, "a2", float)
        elif regime == "superquadratic":
            _need(doc, "r", float)
            _need(doc, "c1", float)
            _need(doc, "c2", float)
        else:
            raise ModelError("model: field 'regime' must be 'quadratic' or "
                             "'superquadratic'")
    elif mtype == "kwss":
        n = _need(doc, "n", int)
        strata = _need(doc, "strata", list)
        if not strata:
            raise ModelError("model: field 'strata' must be a non-empty list")
        for i, s in enumerate(strata):
            if not isinstance(s, dict):
                raise ModelError(f"model: field 'strata[{i}]' must be an object")
            k = _need(s, "k", int, where=f"strata[{i}]")
            if not 0 <= k < n:
                raise ModelError(f"strata[{i}]: field 'k' must satisfy 0 <= k < n")
            _parse_expr_field(s, "V", where=f"strata[{i}]")
        _need(doc, "eps", float)
        _need(doc, "kappa", float)
        _need(doc, "nu_bound", float)
    elif mtype == "ars":
        vars_ = _need(doc, "vars", list)
        if not vars_ or not all(isinstance(v, str) for v in vars_):
            raise ModelError("model: field 'vars' must be a non-empty list of names")
        t_var = _need(doc, "t_var", str)
        if t_var not in vars_:
            raise ModelError("model: field 't_var' must appear in 'vars'")
        fields = _need(doc, "fields", list)
        if not fields:
            raise ModelError("model: field 'fields' must be a non-empty list")
        for i, comps in enumerate(fields):
            if not isinstance(comps, list) or len(comps) != len(vars_):
                raise ModelError(f"model: field 'fields[{i}]' must list "
                                 f"{len(vars_)} component polynomials")
        _parse_box(doc, "box", len(vars_) - 1)
    else:  # potential
        _parse_expr_field(doc, "expr")
        _need(doc, "eps", float)
        x_vars = _need(doc, "x_vars", list)
        _parse_box(doc, "x_box", len(x_vars))
    return doc


# -- model construction ------------------------------------------------------------

def build_boundary_model(doc: dict) -> BoundaryModel:
    x_vars = tuple(doc["x_vars"])
    return BoundaryModel(
        dim=doc["n"],
        a=_parse_expr_field(doc, "a"),
        phi=_parse_expr_field(doc, "phi"),
        eps=float(doc["eps"]),
        x_vars=x_vars,
        x_box=_parse_box(doc, "x_box", len(x_vars)),
    )


def build_family(doc: dict) -> GeneratingFamily:
    vars_ = tuple(doc["vars"])
    field_texts = [[str(c) for c in comps] for comps in doc["fields"]]
    det_indices = doc.get("det_indices")
    return GeneratingFamily.parse(
        vars_, field_texts,
        normal_form=bool(doc.get("normal_form", False)),
        det_indices=tuple(det_indices) if det_indices else None,
        box=_parse_box(doc, "box", len(vars_) - 1),
    )


def build_kwss_model(doc: dict) -> SingularPotentialModel:
    strata = tuple(Stratum(s["k"], _parse_expr_field(s, "V", where="stratum"))
                   for s in doc["strata"])
    return SingularPotentialModel(
        dim=doc["n"], strata=strata, eps=float(doc["eps"]),
        kappa=float(doc["kappa"]), nu_bound=float(doc["nu_bound"]),
        lipschitz=float(doc["L"]) if "L" in doc else None,
    )


def build_curvature_model(doc: dict) -> CurvatureModel:
    return CurvatureModel(
        dim=doc["n"], regime=doc["regime"], eps=float(doc["eps"]),
        h_eps_max=float(doc["h_eps_max"]),
        a1=float(doc["a1"]) if "a1" in doc else None,
        a2=float(doc["a2"]) if "a2" in doc else None,
        r=float(doc["r"]) if "r" in doc else None,
        c1=float(doc["c1"]) if "c1" in doc else None,
        c2=float(doc["c2"]) if "c2" in doc else None,
    )


def dispatch_check(doc: dict, *, seed: int = DEFAULT_SEED, decades: int = 6,
                   x_samples: int = 128, eps_override: float | None = None
                   ) -> CriterionVerdict:
    """Route a validated model to its criterion."""
    mtype = doc["type"]
    scan = dict(decades=decades, x_samples=x_samples, seed=seed)
    if mtype == "measure":
        model = build_boundary_model(doc)
        if eps_override:
            model = BoundaryModel(model.dim, model.a, model.phi, eps_override,
                                  model.x_vars, model.x_box)
        return check_measure(model, **scan)
    if mtype == "cone":
        return check_cone(doc["n"], float(doc["alpha"]))
    if mtype == "curvature":
        model = build_curvature_model(doc)
        if model.regime == "quadratic":
            return check_quadratic_curvature(model)
        return check_superquadratic_curvature(model)
    if mtype == "kwss":
        return check_kwss(build_kwss_model(doc), decades=decades, seed=seed)
    if mtype == "ars":
        eps = eps_override or float(doc.get("eps", 0.5))
        return classify_ars(build_family(doc), doc["t_var"], eps=eps, **scan)
    # potential
    x_vars = tuple(doc["x_vars"])
    p = PotentialFn(_parse_expr_field(doc, "expr"), provenance="model file",
                    x_vars=x_vars)
    eps = eps_override or float(doc["eps"])
    return check_main(p, eps, _parse_box(doc, "x_box", len(x_vars)), **scan)


# -- fixtures -----------------------------------------------------------------------

_FIXTURES: dict[str, dict] = {
    # Plane with metric dx^2 + dy^2/x^2, singular on {x = 0}.
    "grushin": {
        "type": "ars", "vars": ["x", "y"], "t_var": "x",
        "fields": [["1", "0"], ["0", "x"]],
        "normal_form": True, "box": [[-1.0, 1.0]],
        "expected": "holds",
    },
    "cone-n2-a3": {
        "type": "cone", "n": 2, "alpha": 3.0, "eps": 1.0,
        "expected": "holds",
    },
    # Measure t^m (t^l + f(x))^k dt dmu with m = k = -1, l = 2, f = x^2.
    "example-4.1": {
        "type": "measure", "n": 2, "a": "-1",
        "phi": "(-1/2)*ln(t^2 + x^2)", "eps": 0.5,
        "x_vars": ["x"], "x_box": [[-1.0, 1.0]],
        "expected": "holds",
    },
    # Fields d_t and t(t^2 + x^2) d_x: non-regular, criterion still holds.
    "example-7.1": {
        "type": "ars", "vars": ["t", "x"], "t_var": "t",
        "fields": [["1", "0"], ["0", "t*(t^2 + x^2)"]],
        "normal_form": True, "box": [[-1.0, 1.0]],
        "expected": "holds",
    },
    # Volume density [t (t^2 + f)]^{-2(n-1)} with n = 2, l = 1, f = x^2.
    "example-7.2": {
        "type": "measure", "n": 3, "a": "-2",
        "phi": "-ln(t^2 + x^2)", "eps": 0.5,
        "x_vars": ["x"], "x_box": [[-1.0, 1.0]],
        "expected": "holds",
    },
    # Field realization of the n = 2 structure behind example-7.2.
    "example-7.2-fields": {
        "type": "ars", "vars": ["t", "x", "y"], "t_var": "t",
        "fields": [["1", "0", "0"], ["0", "t*(t^2 + x^2)", "0"], ["0", "t", "1"]],
        "normal_form": True, "box": [[-1.0, 1.0], [-1.0, 1.0]],
        "expected": "holds",
    },
    "example-7.3": {
        "type": "ars", "vars": ["t", "x", "y", "z"], "t_var": "t",
        "fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"],
                   ["0", "0", "1", "x^2"], ["0", "0", "0", "t^2"]],
        "normal_form": True,
        "box": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
        "expected": "holds",
    },
    "kwss-codim4": {
        "type": "kwss", "n": 5, "strata": [{"k": 1, "V": "0"}],
        "eps": 1.0, "kappa": 0.0, "nu_bound": 0.0,
        "expected": "holds",
    },
}


def catalog(name: str) -> dict:
    """Return the built-in fixture by name (a fresh validated model dict)."""
    if name not in _FIXTURES:
        raise UnknownFixtureError(
            f"unknown fixture {name!r}; available: {', '.join(sorted(_FIXTURES))}")
    doc = json.loads(json.dumps(_FIXTURES[name]))
    doc.pop("expected", None)
    return validate_model(doc)


def fixture_names() -> list[str]:
    return sorted(_FIXTURES)


def expected_verdict(name: str) -> str:
    if name not in _FIXTURES:
        raise UnknownFixtureError(name)
    return _FIXTURES[name]["expected"]


# -- reports ------------------------------------------------------------------------

def _verdict_payload(v: CriterionVerdict) -> dict:
    ev = v.evidence
    return {
        "outcome": v.outcome.value,
        "criterion": v.criterion,
        "kappa_hat": ev.kappa_hat,
        "worst_point": ev.worst_point,
        "margin": ev.margin,
        "growth_exponent": ev.growth_exponent,
        "growth_quality": ev.growth_quality,
        "note": v.note,
    }


def _print_verdict(v: CriterionVerdict):
    print(f"verdict: {v.outcome.value}   [{v.criterion}]")
    if v.evidence.kappa_hat is not None:
        print(f"  kappa_hat = {v.evidence.kappa_hat:.6g}")
    if v.evidence.margin is not None:
        print(f"  margin    = {v.evidence.margin:.6g}")
    if v.evidence.growth_exponent is not None:
        print(f"  growth    = t^-{v.evidence.growth_exponent:.3g} "
              f"(fit quality {v.evidence.growth_quality:.3g})")
    if v.evidence.worst_point:
        print(f"  worst at  {v.evidence.worst_point}")
    if v.note:
        print(f"  note: {v.note}")


def _exit_code(outcome: Outcome) -> int:
    return {Outcome.HOLDS: EXIT_HOLDS, Outcome.FAILS: EXIT_FAILS,
            Outcome.INCONCLUSIVE: EXIT_INCONCLUSIVE}[outcome]


def _emit_report(args, payload: dict):
    if getattr(args, "json", None):
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")


def _load_model(path: str) -> tuple[dict, str]:
    p = Path(path)
    if not p.exists():
        raise ModelError(f"model file {path!r} does not exist")
    blob = p.read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as err:
        raise ModelError(f"model: not valid JSON ({err})") from None
    return validate_model(doc), digest


# -- subcommands ---------------------------------------------------------------------

def _cmd_check(args) -> int:
    doc, digest = _load_model(args.model)
    t0 = time.perf_counter()
    verdict = dispatch_check(doc, seed=args.seed, decades=args.grid_decades,
                             x_samples=args.x_samples, eps_override=args.eps)
    elapsed = time.perf_counter() - t0
    print(f"model: {args.model} (type {doc['type']}, sha256 {digest[:12]})")
    _print_verdict(verdict)
    _emit_report(args, {
        "tool": "qcomplete", "version": __version__,
        "command": "check", "input": {"path": args.model, "sha256": digest},
        "seed": args.seed, "grid_decades": args.grid_decades,
        "x_samples": args.x_samples, "model_type": doc["type"],
        "verdict": _verdict_payload(verdict), "wall_clock_s": elapsed,
    })
    return _exit_code(verdict.outcome)


def _cmd_effpot(args) -> int:
    doc, digest = _load_model(args.model)
    if doc["type"] == "measure":
        model = build_boundary_model(doc)
        pot = effective_potential(model)
        x0 = {v: 0.5 * (lo + hi) for v, (lo, hi) in zip(model.x_vars, model.box())}
        eps = args.eps or model.eps
    elif doc["type"] == "cone":
        model = cone_model(doc["n"], float(doc["alpha"]), float(doc["eps"]))
        pot = effective_potential(model)
        x0 = {}
        eps = args.eps or model.eps
    elif doc["type"] == "ars":
        family = build_family(doc)
        pot = ars_effective_potential(family, doc["t_var"])
        x0 = {v: 0.5 * (lo + hi)
              for v, (lo, hi) in zip(pot.x_vars, family.x_box(doc["t_var"]))}
        eps = args.eps or 0.5
    else:
        raise ModelError("model: 'effpot' needs a measure, cone, or ars model")
    c2, kappa, quality = leading_behavior(pot, x0, eps)
    print(f"V_eff = {pot}")
    print(f"leading fit on (0, {eps}] at x0={x0}: "
          f"c2_hat={c2:.9g} kappa_hat={kappa:.9g} quality={quality:.3g}")
    _emit_report(args, {
        "tool": "qcomplete", "version": __version__, "command": "effpot",
        "input": {"path": args.model, "sha256": digest},
        "v_eff": str(pot), "c2_hat": c2, "kappa_hat": kappa, "quality": quality,
    })
    return EXIT_HOLDS


def _cmd_riccati(args) -> int:
    payload: dict = {"tool": "qcomplete", "version": __version__, "command": "riccati"}
    if args.a is not None:
        if args.m is None:
            print("riccati: --a needs --m", file=sys.stderr)
            return EXIT_USAGE
        sol = solve_quadratic(QuadraticRiccatiProblem(args.a, args.m, args.eps))
        print(f"quadratic problem: a={args.a} m={args.m} eps={args.eps}")
        print(f"  h(eps) = {sol.h(args.eps):.12g}")
        print(f"  blow-up time t* = {sol.blow_up_time:.12g}")
        print(f"  asymptote: {sol.asymptote.value} "
              f"(leading coefficient {sol.leading_coefficient:.6g})")
        t_lo = max(sol.blow_up_time * 1.05, args.t_min)
        num = integrate_riccati(lambda t: -(args.a ** 2 - 1.0) / (4.0 * t * t),
                                sol.h(args.eps), args.eps, t_lo)
        dev = max(abs(num.h(t) - sol.h(t)) / (1.0 + abs(sol.h(t)))
                  for t in _geom(t_lo, args.eps, 100))
        print(f"  numeric cross-check on [{t_lo:.3g}, {args.eps}]: "
              f"max rel deviation {dev:.3g}")
        payload.update({"kind": "quadratic", "a": args.a, "m": args.m,
                        "eps": args.eps, "h_eps": sol.h(args.eps),
                        "blow_up_time": sol.blow_up_time,
                        "asymptote": sol.asymptote.value,
                        "cross_check_deviation": dev})
    elif args.c is not None:
        if args.r is None:
            print("riccati: --c needs --r", file=sys.stderr)
            return EXIT_USAGE
        h_star = critical_datum(args.c, args.r, args.eps)
        print(f"super-quadratic problem: c={args.c} r={args.r} eps={args.eps}")
        print(f"  critical datum h* = {h_star:.12g}")
        payload.update({"kind": "superquadratic", "c": args.c, "r": args.r,
                        "eps": args.eps, "h_star": h_star})
        if args.h_eps is not None:
            sol = solve_superquadratic(
                SuperquadraticRiccatiProblem(args.c, args.r, args.eps, args.h_eps))
            print(f"  h_eps = {args.h_eps}: t* = {sol.blow_up_time:.12g}, "
                  f"{sol.asymptote.value} "
                  f"(leading coefficient {sol.leading_coefficient:.6g})")
            payload.update({"h_eps": args.h_eps,
                            "blow_up_time": sol.blow_up_time,
                            "asymptote": sol.asymptote.value})
    else:
        print("riccati: need --a/--m (quadratic) or --c/--r (super-quadratic)",
              file=sys.stderr)
        return EXIT_USAGE
    _emit_report(args, payload)
    return EXIT_HOLDS


def _geom(lo: float, hi: float, n: int):
    import math as _m
    return [lo * (hi / lo) ** (i / (n - 1)) for i in range(n)]


def _cmd_weyl(args) -> int:
    if (args.c is None) == (args.potential is None):
        print("weyl: give exactly one of --c or --potential", file=sys.stderr)
        return EXIT_USAGE
    if args.c is not None:
        result = classify_inverse_square(args.c)
        print(f"W = {args.c:g}/t^2")
    else:
        try:
            e = ex.parse(args.potential)
        except ex.ExprError as err:
            print(f"weyl: bad potential: {err}", file=sys.stderr)
            return EXIT_USAGE
        extra = ex.free_variables(e) - {"t"}
        if extra:
            print(f"weyl: potential may only use 't', got {sorted(extra)}",
                  file=sys.stderr)
            return EXIT_USAGE
        result = classify_endpoint(lambda t: ex.evaluate(e, {"t": t}), args.eps)
        print(f"W = {args.potential}")
    print(f"endpoint t=0: {result.verdict.value}")
    print(f"  exponents p1={result.p1:.6g} p2={result.p2:.6g} "
          f"(quality {result.quality:.3g})")
    if result.note:
        print(f"  note: {result.note}")
    _emit_report(args, {
        "tool": "qcomplete", "version": __version__, "command": "weyl",
        "verdict": result.verdict.value, "p1": result.p1, "p2": result.p2,
        "quality": result.quality, "note": result.note,
    })
    return {Endpoint.LIMIT_POINT: EXIT_HOLDS,
            Endpoint.LIMIT_CIRCLE: EXIT_FAILS,
            Endpoint.INCONCLUSIVE: EXIT_INCONCLUSIVE}[result.verdict]


def _cmd_ars(args) -> int:
    doc, digest = _load_model(args.model)
    if doc["type"] != "ars":
        raise ModelError("model: 'ars' subcommand needs an ars model")
    family = build_family(doc)
    t_var = doc["t_var"]
    payload: dict = {"tool": "qcomplete", "version": __version__, "command": "ars",
                     "input": {"path": args.model, "sha256": digest}}
    code = EXIT_HOLDS
    did_something = False
    if args.growth:
        if not args.point:
            print("ars: --growth needs --point", file=sys.stderr)
            return EXIT_USAGE
        point = [Fraction(p) for p in args.point.split(",")]
        try:
            gv = growth_vector(family, point, max_step=args.max_step)
            print(f"growth vector at ({args.point}): {gv}")
            payload["growth_vector"] = list(gv)
        except NotBracketGeneratingError as err:
            print(f"not bracket generating: partial {err.partial}")
            payload["growth_vector_partial"] = list(err.partial)
            code = EXIT_INCONCLUSIVE
        did_something = True
    if args.det:
        d = det_xi(family)
        print(f"det = {d}")
        payload["det"] = str(d)
        did_something = True
    if args.regular:
        reg = regularity_check(family, t_var)
        print(f"regularity: {reg.kind}"
              + (f" (k = {reg.k})" if reg.k is not None else "")
              + (f": {reg.reason}" if reg.reason else ""))
        payload["regularity"] = {"kind": reg.kind, "k": reg.k, "reason": reg.reason}
        did_something = True
    if args.classify or not did_something:
        verdict = classify_ars(family, t_var, eps=args.eps or 0.5,
                               seed=args.seed, x_samples=args.x_samples,
                               decades=args.grid_decades)
        _print_verdict(verdict)
        payload["verdict"] = _verdict_payload(verdict)
        code = _exit_code(verdict.outcome)
    _emit_report(args, payload)
    return code


def _cmd_catalog(args) -> int:
    if not args.name:
        for name in fixture_names():
            doc = catalog(name)
            print(f"{name:22} type={doc['type']:9} expected={expected_verdict(name)}")
        return EXIT_HOLDS
    doc = catalog(args.name)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.name} to {args.out}")
    else:
        print(text)
    return EXIT_HOLDS


# -- argument parsing ------------------------------------------------------------------

def _add_common(sub, json_flag=True):
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED,
                     help="seed for the x-sampler (default %(default)s)")
    sub.add_argument("--grid-decades", type=int, default=6,
                     help="decades of the boundary grid (default %(default)s)")
    sub.add_argument("--x-samples", type=int, default=128,
                     help="Latin hypercube samples per level (default %(default)s)")
    sub.add_argument("--eps", type=float, default=None,
                     help="override the boundary chart half-width")
    if json_flag:
        sub.add_argument("--json", metavar="PATH", default=None,
                         help="also write a machine-readable report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcomplete",
        description="Decide quantum-completeness criteria for non-complete "
                    "Riemannian and almost-Riemannian models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p_check = sub.add_parser("check", help="evaluate the criterion for a model file")
    p_check.add_argument("model", help="path to a JSON model file")
    _add_common(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_eff = sub.add_parser("effpot", help="print the symbolic effective potential")
    p_eff.add_argument("model", help="path to a measure, cone, or ars model")
    _add_common(p_eff)
    p_eff.set_defaults(func=_cmd_effpot)

    p_ric = sub.add_parser("riccati", help="solve the comparison problems")
    p_ric.add_argument("--a", type=float, default=None, help="quadratic exponent a > 1")
    p_ric.add_argument("--m", type=float, default=None, help="initial-datum offset")
    p_ric.add_argument("--c", type=float, default=None, help="super-quadratic strength")
    p_ric.add_argument("--r", type=float, default=None, help="super-quadratic rate r > 2")
    p_ric.add_argument("--h-eps", dest="h_eps", type=float, default=None,
                       help="initial datum at eps (super-quadratic)")
    p_ric.add_argument("--eps", type=float, default=1.0)
    p_ric.add_argument("--t-min", dest="t_min", type=float, default=1e-3)
    p_ric.add_argument("--json", metavar="PATH", default=None)
    p_ric.set_defaults(func=_cmd_riccati)

    p_weyl = sub.add_parser("weyl", help="classify the endpoint t = 0")
    p_weyl.add_argument("--c", type=float, default=None,
                        help="inverse-square strength (closed form)")
    p_weyl.add_argument("--potential", default=None,
                        help="potential W(t) as a formula (numeric oracle)")
    p_weyl.add_argument("--eps", type=float, default=1.0)
    p_weyl.add_argument("--json", metavar="PATH", default=None)
    p_weyl.set_defaults(func=_cmd_weyl)

    p_ars = sub.add_parser("ars", help="analyze an almost-Riemannian family")
    p_ars.add_argument("model", help="path to an ars model file")
    p_ars.add_argument("--growth", action="store_true")
    p_ars.add_argument("--point", default=None, help="comma-separated rational point")
    p_ars.add_argument("--max-step", dest="max_step", type=int, default=10)
    p_ars.add_argument("--det", action="store_true")
    p_ars.add_argument("--regular", action="store_true")
    p_ars.add_argument("--classify", action="store_true")
    _add_common(p_ars)
    p_ars.set_defaults(func=_cmd_ars)

    p_cat = sub.add_parser("catalog", help="list or emit built-in fixtures")
    p_cat.add_argument("name", nargs="?", default=None)
    p_cat.add_argument("--out", metavar="PATH", default=None)
    p_cat.set_defaults(func=_cmd_catalog)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Entry point returning the exit code (0 Holds, 1 Fails, 2 Inconclusive,
    64 usage error, 65 invalid model)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else 0
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.func(args)
    except ModelError as err:
        print(f"invalid model: {err}", file=sys.stderr)
        return EXIT_INVALID_MODEL
    except UnknownFixtureError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ex.ExprError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID_MODEL


def main():  # console entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
