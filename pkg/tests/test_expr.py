"""Expression layer: parsing, differentiation, evaluation, round-trips."""

import math
import random

import pytest

from qcomplete import expr as ex


def test_parse_shapes():
    e = ex.parse("t^2 + sin(x)")
    assert e.kind == "add"
    assert e.args[0].kind == "pow"
    assert e.args[1].kind == "call" and e.args[1].name == "sin"

    e = ex.parse("(a/2)*ln(t)")
    assert e.kind == "mul"
    assert e.args[0].kind == "div"
    assert e.args[1].name == "ln"


def test_parse_errors():
    with pytest.raises(ex.ParseError) as err:
        ex.parse("t^(2*l")
    assert err.value.offset == 6
    with pytest.raises(ex.UnknownFunctionError):
        ex.parse("foo(t)")
    with pytest.raises(ex.ArityError):
        ex.parse("ln(t, 2)")
    with pytest.raises(ex.ParseError):
        ex.parse("t +")
    with pytest.raises(ex.ParseError):
        ex.parse("t $ 2")


def test_precedence_and_associativity():
    assert ex.evaluate(ex.parse("2^3^2"), {}) == 512.0
    assert ex.evaluate(ex.parse("-2^2"), {}) == -4.0
    assert ex.evaluate(ex.parse("2*3+4"), {}) == 10.0
    assert ex.evaluate(ex.parse("2+3*4"), {}) == 14.0
    assert ex.evaluate(ex.parse("2-3-4"), {}) == -5.0
    assert ex.evaluate(ex.parse("x^-2"), {"x": 2.0}) == 0.25


def test_differentiate_examples():
    d = ex.differentiate(ex.parse("(a/2)*ln(t)"), "t")
    assert ex.evaluate(d, {"a": 3.0, "t": 2.0}) == 0.75
    d = ex.differentiate(ex.parse("t^3"), "t")
    assert ex.evaluate(d, {"t": 2.0}) == 12.0
    assert ex.differentiate(ex.parse("t^2"), "x") == ex.const(0.0)


def test_differentiate_abs_sign():
    d = ex.differentiate(ex.parse("abs(x)"), "x")
    assert ex.evaluate(d, {"x": -3.0}) == -1.0
    assert ex.evaluate(d, {"x": 3.0}) == 1.0
    assert ex.evaluate(d, {"x": 0.0}) == 0.0


def test_evaluate_examples():
    assert ex.evaluate(ex.parse("3/(4*t^2)"), {"t": 0.5}) == 3.0
    assert ex.evaluate(ex.parse("exp(0)+cos(0)"), {}) == 2.0
    with pytest.raises(ex.DomainError):
        ex.evaluate(ex.parse("ln(t)"), {"t": 0.0})
    with pytest.raises(ex.DomainError):
        ex.evaluate(ex.parse("1/x"), {"x": 0.0})
    with pytest.raises(ex.DomainError):
        ex.evaluate(ex.parse("x^(0-1)"), {"x": 0.0})
    with pytest.raises(ex.UnboundVariableError):
        ex.evaluate(ex.parse("x + y"), {"x": 1.0})


def test_evaluate_pure():
    e = ex.parse("sin(x)*exp(y) - x/y + x^y")
    b = {"x": 0.7, "y": 1.3}
    first = ex.evaluate(e, b)
    for _ in range(5):
        assert ex.evaluate(e, b) == first


def test_round_trip_folded_trees():
    cases = [
        "-t^2", "a/(2*t)", "(a/2)*ln(t)", "3/(4*t^2)", "(-2)^x",
        "1e-05*t", "2^3^2", "x+-y", "x*(y+z)", "sqrt(abs(t))",
        "sin(cos(exp(x)))", "t^(2*l)", "x-(y-z)",
    ]
    for s in cases:
        e = ex.fold(ex.parse(s))
        assert ex.parse(ex.to_string(e)) == e, s


_FUNCS = ["sin", "cos", "exp", "ln", "sqrt"]


def _random_expr(rng, depth):
    if depth == 0:
        if rng.random() < 0.4:
            return ex.const(round(rng.uniform(0.5, 2.0), 3))
        return ex.var(rng.choice(["x", "y"]))
    r = rng.random()
    if r < 0.55:
        op = rng.choice(["add", "sub", "mul", "div"])
        return ex.Expr(op, args=(_random_expr(rng, depth - 1),
                                 _random_expr(rng, depth - 1)))
    if r < 0.7:
        return ex.Expr("pow", args=(_random_expr(rng, depth - 1),
                                    ex.const(rng.choice([2.0, 3.0]))))
    return ex.Expr("call", name=rng.choice(_FUNCS),
                   args=(_random_expr(rng, depth - 1),))


def _fd(e, name, b, h=1e-5):
    up = dict(b)
    dn = dict(b)
    up[name] += h
    dn[name] -= h
    return (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2 * h)


def run_derivative_fuzz(n_checks=1000, seed=20240817):
    """Shared with the acceptance suite: n_checks randomized derivative
    versus central-difference comparisons at 1e-6 relative tolerance."""
    rng = random.Random(seed)
    done = 0
    worst = 0.0
    while done < n_checks:
        e = _random_expr(rng, rng.randint(1, 4))
        name = rng.choice(["x", "y"])
        b = {"x": rng.uniform(0.7, 1.3), "y": rng.uniform(0.7, 1.3)}
        try:
            d = ex.differentiate(e, name)
            exact = ex.evaluate(d, b)
            approx = _fd(e, name, b)
        except ex.DomainError:
            continue
        if not (math.isfinite(exact) and math.isfinite(approx)):
            continue
        if abs(exact) > 1e6 or abs(ex.evaluate(e, b)) > 1e6:
            continue
        rel = abs(exact - approx) / (1.0 + abs(approx))
        worst = max(worst, rel)
        assert rel < 1e-6, (ex.to_string(e), name, b, exact, approx)
        done += 1
    return done, worst


def test_derivative_vs_finite_difference():
    done, worst = run_derivative_fuzz(300)
    assert done == 300
    assert worst < 1e-6
