"""Boundary models and the symbolic effective potential."""

import math
import random

import pytest

from qcomplete import expr as ex
from qcomplete.effpot import (BoundaryModel, InvalidDimensionError,
                              NonFiniteSampleError, PotentialFn, cone_model,
                              effective_potential, leading_behavior)


def test_cone_model_exponents():
    assert cone_model(2, -1.0, 1.0).a == ex.const(-1.0)   # Grushin-type
    assert cone_model(2, 0.0, 1.0).a == ex.const(0.0)     # flat cylinder
    assert cone_model(3, 1.5, 1.0).a == ex.const(3.0)
    with pytest.raises(InvalidDimensionError):
        cone_model(1, 1.0, 1.0)
    with pytest.raises(ValueError):
        cone_model(2, 1.0, 0.0)


def test_effective_potential_constant_exponent():
    v = effective_potential(cone_model(2, -1.0, 1.0))
    assert v(0.5) == 3.0
    assert ex.to_string(v.expr) == "0.75/t^2"
    v0 = effective_potential(cone_model(2, 0.0, 1.0))
    assert v0.expr == ex.const(0.0)


def test_effective_potential_exact_dyadic_identity():
    # 4 t^2 V == a^2 - 2a exactly on a dyadic grid, for dyadic exponents.
    for n, alpha in [(2, 3.0), (2, -1.0), (3, 1.5), (4, 0.25)]:
        a = (n - 1) * alpha
        v = effective_potential(cone_model(n, alpha, 1.0))
        for j in range(0, 40):
            t = 2.0 ** -j
            assert v(t) * 4.0 * t * t == a * a - 2.0 * a


def _example_model(m=-1.0, k=-1.0, l=2, f="x^2"):
    phi = ex.parse(f"({k}/2)*ln(t^{l} + {f})")
    return BoundaryModel(dim=2, a=ex.const(m), phi=phi, eps=0.5, x_vars=("x",))


def test_effective_potential_with_correction_term():
    # V at a point, against the hand-assembled formula for
    # theta = (m/2) ln t + (k/2) ln(t^l + f).
    model = _example_model()
    v = effective_potential(model)
    t, x = 0.25, 0.3
    m, k, l, f = -1.0, -1.0, 2, x * x
    g = t ** l + f
    d1 = m / (2 * t) + k / 2 * l * t ** (l - 1) / g
    d2 = -m / (2 * t * t) + k / 2 * (l * (l - 1) * t ** (l - 2) * g
                                     - (l * t ** (l - 1)) ** 2) / (g * g)
    assert v(t, {"x": x}) == pytest.approx(d1 * d1 + d2, rel=1e-12)


def test_second_difference_agreement():
    rng = random.Random(7)
    model = _example_model()
    theta = model.theta()
    v = effective_potential(model)
    for _ in range(25):
        t = rng.uniform(model.eps / 100.0, model.eps)
        x = {"x": rng.uniform(-1.0, 1.0)}
        h = 1e-4 * t  # balances truncation against rounding in d2

        def th(tv):
            return ex.evaluate(theta, {"t": tv, **x})

        d1 = (th(t + h) - th(t - h)) / (2 * h)
        d2 = (th(t + h) - 2 * th(t) + th(t - h)) / (h * h)
        num = d1 * d1 + d2
        assert abs(v(t, x) - num) / (1.0 + abs(num)) < 1e-6


def test_reference_measure_independence():
    model = _example_model()
    shifted = BoundaryModel(dim=2, a=model.a,
                            phi=model.phi + ex.parse("x^3 - 2*x + 1"),
                            eps=model.eps, x_vars=("x",))
    v1 = effective_potential(model)
    v2 = effective_potential(shifted)
    rng = random.Random(11)
    for _ in range(40):
        t = rng.uniform(1e-4, 0.5)
        x = {"x": rng.uniform(-1.0, 1.0)}
        assert abs(v1(t, x) - v2(t, x)) < 1e-12 * (1.0 + abs(v1(t, x)))


def test_model_validation():
    with pytest.raises(ValueError):
        BoundaryModel(dim=2, a=ex.parse("y"), phi=ex.const(0.0), eps=1.0,
                      x_vars=("x",))
    with pytest.raises(ValueError):
        BoundaryModel(dim=2, a=ex.const(0.0), phi=ex.parse("t + z"), eps=1.0,
                      x_vars=("x",))
    with pytest.raises(ValueError):
        BoundaryModel(dim=2, a=ex.const(0.0), phi=ex.const(0.0), eps=1.0,
                      x_vars=("t",))


def test_leading_behavior_pure_inverse_square():
    v = effective_potential(cone_model(2, -1.0, 1.0))
    c2, kappa, quality = leading_behavior(v, eps=1.0)
    assert abs(c2 - 0.75) <= 1e-9
    assert abs(kappa) <= 1e-9
    assert quality <= 1e-9


def test_leading_behavior_zero():
    c2, kappa, quality = leading_behavior(PotentialFn(ex.const(0.0), "zero"), eps=1.0)
    assert c2 == 0.0 and kappa == 0.0 and quality == 0.0


def test_leading_behavior_with_remainder():
    # Frozen from an exact-arithmetic evaluation of the same estimator
    # (median of t^2 V on the deepest 12 levels; residual regression on the
    # coarse 25), done with Fractions at authoring time.
    p = PotentialFn(ex.parse("3/(4*t^2) - 2/t + 5"), "remainder")
    c2, kappa, quality = leading_behavior(p, eps=1.0)
    assert c2 == pytest.approx(0.75, abs=2e-10)
    assert kappa == pytest.approx(2.0, abs=2e-4)
    assert 0.9 < quality < 1.2  # the O(1) remainder is visible, not hidden


def test_leading_behavior_nonfinite():
    with pytest.raises(NonFiniteSampleError):
        leading_behavior(PotentialFn(ex.parse("ln(t - 0.5)"), "bad"), eps=1.0)
