"""Endpoint classification oracle: closed form and numerical agreement."""

import math

import pytest

from qcomplete.weyl import (Endpoint, NonFinitePotentialError,
                            classify_endpoint, classify_inverse_square)


def test_closed_form_examples():
    r = classify_inverse_square(0.75)
    assert r.verdict is Endpoint.LIMIT_POINT
    assert (r.p1, r.p2) == (1.5, -0.5)

    r = classify_inverse_square(0.0)
    assert r.verdict is Endpoint.LIMIT_CIRCLE
    assert (r.p1, r.p2) == (1.0, 0.0)

    r = classify_inverse_square(2.0)
    assert r.verdict is Endpoint.LIMIT_POINT
    assert (r.p1, r.p2) == (2.0, -1.0)


def test_closed_form_oscillatory():
    r = classify_inverse_square(-1.0)
    assert r.verdict is Endpoint.LIMIT_CIRCLE
    assert "complex" in r.note
    assert r.p1 == r.p2 == 0.5


def test_numeric_examples():
    r = classify_endpoint(lambda t: 0.75 / (t * t), 1.0)
    assert r.verdict is Endpoint.LIMIT_POINT
    assert abs(r.p2 + 0.5) < 0.05

    r = classify_endpoint(lambda t: 0.0, 1.0)
    assert r.verdict is Endpoint.LIMIT_CIRCLE

    r = classify_endpoint(lambda t: -1.0 / (t * t), 1.0)
    assert r.verdict is Endpoint.LIMIT_CIRCLE
    assert "oscillatory" in r.note


def test_numeric_agreement_grid():
    # c = 0.74 and 0.76 sit within 0.02 of the sharp threshold 3/4 and may
    # legitimately come out inconclusive; everything else must match.
    for c in (-0.2, 0.0, 0.4, 0.74, 0.76, 2.0, 6.0):
        ref = classify_inverse_square(c)
        got = classify_endpoint(lambda t, c=c: c / (t * t), 1.0)
        if abs(c - 0.75) < 0.02 and got.verdict is Endpoint.INCONCLUSIVE:
            continue
        assert got.verdict == ref.verdict, c


def test_exponent_estimates_within_tolerance():
    for c in (-0.2, 0.0, 0.4, 0.74, 0.76, 2.0, 6.0):
        ref = classify_inverse_square(c)
        got = classify_endpoint(lambda t, c=c: c / (t * t), 1.0)
        assert abs(got.p2 - ref.p2) < 0.02
        assert abs(got.p1 - ref.p1) < 0.02


def test_eps_rescaling_invariance():
    for c in (-0.2, 0.0, 0.4, 2.0, 6.0):
        verdicts = {classify_endpoint(lambda t, c=c: c / (t * t), eps).verdict
                    for eps in (0.5, 1.0, 2.0)}
        assert len(verdicts) == 1


def test_cone_zero_mode_band():
    # W = (a^2-2a)/(4 t^2) with a = (n-1) alpha, n = 2: limit point exactly
    # for alpha <= -1 or alpha >= 3.
    for alpha in (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0):
        a = alpha
        c = (a * a - 2.0 * a) / 4.0
        got = classify_endpoint(lambda t, c=c: c / (t * t), 1.0)
        want = (Endpoint.LIMIT_POINT if alpha <= -1.0 or alpha >= 3.0
                else Endpoint.LIMIT_CIRCLE)
        assert got.verdict == want, alpha


def test_guard_band_inconclusive():
    # p2(0.745) = -0.4975 sits inside the guard band above -1/2: honesty
    # beats a guess that close to the sharp threshold.
    r = classify_endpoint(lambda t: 0.745 / (t * t), 1.0)
    assert r.verdict is Endpoint.INCONCLUSIVE
    assert "guard band" in r.note


def test_kappa_term_does_not_confuse_estimate():
    # W = 3/(4t^2) - 5/t is still limit point; the 1/t term only perturbs
    # the exponent estimate at O(t).
    r = classify_endpoint(lambda t: 0.75 / (t * t) - 5.0 / t, 1.0)
    assert r.verdict is Endpoint.LIMIT_POINT
    assert abs(r.p2 + 0.5) < 0.02


def test_non_finite_potential():
    with pytest.raises(NonFinitePotentialError):
        classify_endpoint(lambda t: math.inf, 1.0)
