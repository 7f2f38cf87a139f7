"""Backward Riccati comparison problems and modified Bessel functions.

Solves the scalar Cauchy problems

    h' + h^2 - (a^2-1)/(4 t^2) = 0,   h(eps) = (1+a+m)/(2 eps)      (quadratic)
    h' + h^2 - c/t^r          = 0,   h(eps) = h_eps, r > 2     (super-quadratic)

in closed form, plus a general-purpose adaptive backward integrator used to
cross-validate them.  The super-quadratic family is expressed through the
modified Bessel functions I_nu, K_nu, implemented here from scratch (power
series for I, a symmetrized trapezoid rule on the integral representation
for K, and scaled asymptotic expansions past the overflow point).
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

__all__ = [
    "Asymptote",
    "BesselDomainError",
    "DegenerateDenominatorError",
    "BlowUpRootNotBracketedError",
    "StepUnderflowError",
    "BesselIK",
    "QuadraticRiccatiProblem",
    "SuperquadraticRiccatiProblem",
    "RiccatiSolution",
    "bessel_ik",
    "critical_datum",
    "solve_quadratic",
    "solve_superquadratic",
    "integrate_riccati",
]

OVERFLOW_Z = 700.0
BLOW_UP_THRESHOLD = 1e12


class BesselDomainError(ValueError):
    pass


class DegenerateDenominatorError(ValueError):
    pass


class BlowUpRootNotBracketedError(RuntimeError):
    pass


class StepUnderflowError(RuntimeError):
    pass


class Asymptote(Enum):
    TO_PLUS_INFINITY = "to_plus_infinity"
    TO_MINUS_INFINITY = "to_minus_infinity"
    INTERIOR_POLE = "interior_pole"


# -- modified Bessel functions ------------------------------------------------

def _inv_gamma(x: float) -> float:
    # 1/Gamma(x), with the poles at non-positive integers mapped to 0.
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _iv_series(nu: float, z: float) -> float:
    """I_nu(z) by its ascending power series (all terms positive: no
    cancellation, valid for any z that does not overflow)."""
    if nu < 0.0 and nu == math.floor(nu):
        nu = -nu
    half = 0.5 * z
    term = math.pow(half, nu) * _inv_gamma(nu + 1.0)
    total = term
    zz = half * half
    k = 1
    while k < 4000:
        term *= zz / (k * (nu + k))
        total += term
        if term <= abs(total) * 1e-18:
            break
        k += 1
    return total


def _log_cosh(y: float) -> float:
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - math.log(2.0)


def _kv_quad(nu: float, z: float) -> float:
    """K_nu(z) = int_0^inf exp(-z cosh u) cosh(nu u) du by the trapezoid
    rule.  The integrand extends to an even analytic function of u with
    double-exponential decay, so the uniform trapezoid sum converges
    superexponentially in 1/h."""
    nu = abs(nu)
    h = 1.0 / 80.0
    u_peak = math.asinh(nu / z) if nu > 0.0 else 0.0

    def log_f(u: float) -> float:
        return -z * math.cosh(u) + (_log_cosh(nu * u) if nu > 0.0 else 0.0)

    # Work relative to the peak magnitude to stay inside double range.
    log_ref = log_f(u_peak)
    total = 0.5 * math.exp(log_f(0.0) - log_ref)
    k = 1
    while True:
        u = k * h
        lf = log_f(u) - log_ref
        if u > u_peak and lf < -45.0:
            break
        total += math.exp(lf)
        k += 1
        if k > 200000:  # unreachable for z >= 1e-6
            break
    return h * total * math.exp(log_ref)


def _scaled_asymptotic_series(nu: float, z: float, signs: int) -> float:
    # sum_k (+/-)^k a_k(nu)/z^k with a_k = prod_{j<=k} (4nu^2-(2j-1)^2)/(k! 8^k)
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 40):
        term *= (mu - (2 * k - 1) ** 2) / (8.0 * k * z) * signs
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-17:
            break
    return total


class BesselIK(NamedTuple):
    """Values of I_nu, K_nu and first derivatives at z.

    When ``scaled`` is true (z past the overflow point) the fields hold
    log-scaled data instead: i = log I, i_prime = I'/I, k = log K,
    k_prime = K'/K.
    """

    i: float
    i_prime: float
    k: float
    k_prime: float
    scaled: bool = False


def bessel_ik(nu: float, z: float) -> BesselIK:
    """Modified Bessel functions I_nu(z), K_nu(z) and their derivatives.

    Derivatives use the recurrences I' = (I_{nu-1}+I_{nu+1})/2 and
    K' = -(K_{nu-1}+K_{nu+1})/2.  For z > 700 the result saturates to
    log-scaled form (see ``BesselIK``).
    """
    if z <= 0.0:
        raise BesselDomainError(f"bessel_ik requires z > 0, got {z}")
    if nu < 0.0:
        raise BesselDomainError(f"bessel_ik requires nu >= 0, got {nu}")
    if z > OVERFLOW_Z:
        log_i, ip_i, log_k, kp_k = _log_ik_asymptotic(nu, z)
        return BesselIK(log_i, ip_i, log_k, kp_k, scaled=True)
    i = _iv_series(nu, z)
    k = _kv_quad(nu, z)
    ip = 0.5 * (_iv_series(nu - 1.0, z) + _iv_series(nu + 1.0, z))
    kp = -0.5 * (_kv_quad(nu - 1.0, z) + _kv_quad(nu + 1.0, z))
    return BesselIK(i, ip, k, kp, scaled=False)


def _log_ik_asymptotic(nu: float, z: float) -> tuple[float, float, float, float]:
    si = [_scaled_asymptotic_series(m, z, -1) for m in (nu - 1.0, nu, nu + 1.0)]
    sk = [_scaled_asymptotic_series(m, z, +1) for m in (nu - 1.0, nu, nu + 1.0)]
    log_i = z - 0.5 * math.log(2.0 * math.pi * z) + math.log(si[1])
    log_k = -z + 0.5 * math.log(math.pi / (2.0 * z)) + math.log(sk[1])
    ip_over_i = 0.5 * (si[0] + si[2]) / si[1]
    kp_over_k = -0.5 * (sk[0] + sk[2]) / sk[1]
    return log_i, ip_over_i, log_k, kp_over_k


def _log_ik_ratios(nu: float, z: float) -> tuple[float, float, float, float]:
    """(log I, I'/I, log K, K'/K), valid for every z > 0."""
    b = bessel_ik(nu, z)
    if b.scaled:
        return b.i, b.i_prime, b.k, b.k_prime
    return math.log(b.i), b.i_prime / b.i, math.log(b.k), b.k_prime / b.k


# -- problem types -------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticRiccatiProblem:
    """h' + h^2 - (a^2-1)/(4t^2) = 0 with h(eps) = (1+a)/(2 eps) + m/(2 eps)."""

    a: float
    m: float
    eps: float

    def __post_init__(self):
        if not self.a > 1.0:
            raise ValueError(f"requires a > 1, got {self.a}")
        if not self.eps > 0.0:
            raise ValueError(f"requires eps > 0, got {self.eps}")


@dataclass(frozen=True)
class SuperquadraticRiccatiProblem:
    """h' + h^2 - c/t^r = 0 with h(eps) = h_eps, r > 2."""

    c: float
    r: float
    eps: float
    h_eps: float

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError(f"requires c > 0, got {self.c}")
        if not self.r > 2.0:
            raise ValueError(f"requires r > 2, got {self.r}")
        if not self.eps > 0.0:
            raise ValueError(f"requires eps > 0, got {self.eps}")

    @property
    def nu(self) -> float:
        return 1.0 / (self.r - 2.0)

    def tau(self, t: float) -> float:
        return 2.0 * self.nu * math.sqrt(self.c) * t ** (-1.0 / (2.0 * self.nu))


@dataclass(frozen=True)
class RiccatiSolution:
    """Solution on its maximal interval (blow_up_time, eps].

    ``leading_coefficient`` is the coefficient of the leading singular term
    of h at the singular end: of 1/t (quadratic) or 1/t^{r/2}
    (super-quadratic) when the blow-up time is 0, and of 1/(t - t*) at an
    interior pole.
    """

    h: Callable[[float], float]
    blow_up_time: float
    asymptote: Asymptote
    leading_coefficient: float
    note: str = ""


# -- closed forms --------------------------------------------------------------

def solve_quadratic(p: QuadraticRiccatiProblem) -> RiccatiSolution:
    """Closed-form solution of the quadratic comparison problem.

    Blow-up time satisfies (t*/eps)^a = m/(2a+m) for m > 0 and t* = 0
    otherwise; for m <= 0 the solution behaves like (1 +/- a)/(2t) near 0.
    """
    a, m, eps = p.a, p.m, p.eps
    if 2.0 * a + m == 0.0:
        raise DegenerateDenominatorError("2a + m = 0 is outside the closed form")

    if m == 0.0:
        def h(t: float) -> float:
            return (1.0 + a) / (2.0 * t)
        return RiccatiSolution(h, 0.0, Asymptote.TO_PLUS_INFINITY, (1.0 + a) / 2.0)

    def h(t: float) -> float:
        ratio = (t / eps) ** a
        num = (2.0 * a + m) * (a + 1.0) * ratio + m * (a - 1.0)
        den = (2.0 * a + m) * ratio - m
        return num / (2.0 * t * den)

    if m > 0.0:
        t_star = eps * (m / (2.0 * a + m)) ** (1.0 / a)
        return RiccatiSolution(h, t_star, Asymptote.INTERIOR_POLE, 1.0)
    return RiccatiSolution(h, 0.0, Asymptote.TO_MINUS_INFINITY, (1.0 - a) / 2.0)


def critical_datum(c: float, r: float, eps: float) -> float:
    """Critical initial datum h*_eps(c, r) separating interior blow-up from
    blow-up at t = 0 for the super-quadratic problem:

        h* = 1/(2 eps) - (sqrt(c)/eps^{r/2}) K'_nu(tau(eps))/K_nu(tau(eps)),

    with nu = 1/(r-2) and tau(t) = 2 nu sqrt(c) t^{-1/(2 nu)}.  Strictly
    increasing in c for fixed r and eps.
    """
    if not (c > 0.0 and r > 2.0 and eps > 0.0):
        raise ValueError("critical_datum requires c > 0, r > 2, eps > 0")
    nu = 1.0 / (r - 2.0)
    tau_eps = 2.0 * nu * math.sqrt(c) * eps ** (-1.0 / (2.0 * nu))
    _, _, _, kp_over_k = _log_ik_ratios(nu, tau_eps)
    return 1.0 / (2.0 * eps) - math.sqrt(c) / eps ** (r / 2.0) * kp_over_k


def solve_superquadratic(p: SuperquadraticRiccatiProblem) -> RiccatiSolution:
    """Solution of the super-quadratic problem via w = a I_nu + b K_nu.

    The solution is h(t) = 1/(2t) - (sqrt(c)/t^{r/2}) w'(tau(t))/w(tau(t)).
    Blow-up at t* = 0 iff h_eps <= h*_eps(c, r); sub-critical data give
    h(t) ~ -sqrt(c)/t^{r/2}, the critical datum gives the pure-K solution
    with h(t) ~ +sqrt(c)/t^{r/2}, and super-critical data blow up at the
    interior zero of w, located by bisection.
    """
    c, r, eps, h_eps = p.c, p.r, p.eps, p.h_eps
    nu = p.nu
    sqc = math.sqrt(c)
    tau_eps = p.tau(eps)
    log_i, ip_i, log_k, kp_k = _log_ik_ratios(nu, tau_eps)
    h_star = 1.0 / (2.0 * eps) - sqc / eps ** (r / 2.0) * kp_k
    h_tilde = 1.0 / (2.0 * eps) - sqc / eps ** (r / 2.0) * ip_i

    if abs(h_eps - h_star) <= 1e-14 * (1.0 + abs(h_star)):
        def h(t: float) -> float:
            _, _, _, kp = _log_ik_ratios(nu, p.tau(t))
            return 1.0 / (2.0 * t) - sqc / t ** (r / 2.0) * kp
        return RiccatiSolution(h, 0.0, Asymptote.TO_PLUS_INFINITY, sqc,
                               note="critical datum: pure-K solution")

    # w = -I + b K, fixed by the initial datum.
    b_ratio = (h_eps - h_tilde) / (h_eps - h_star)
    log_abs_b = (log_i - log_k) + math.log(abs(b_ratio))
    b_sign = math.copysign(1.0, b_ratio)

    def h(t: float) -> float:
        li, ipi, lk, kpk = _log_ik_ratios(nu, p.tau(t))
        rho = b_sign * math.exp(min(log_abs_b + lk - li, 700.0))
        w_ratio = (-ipi + rho * kpk) / (-1.0 + rho)
        return 1.0 / (2.0 * t) - sqc / t ** (r / 2.0) * w_ratio

    if h_eps > h_star:
        t_star = _superquadratic_pole(p, b_sign, log_abs_b)
        return RiccatiSolution(h, t_star, Asymptote.INTERIOR_POLE, 1.0)
    return RiccatiSolution(h, 0.0, Asymptote.TO_MINUS_INFINITY, -sqc)


def _superquadratic_pole(p: SuperquadraticRiccatiProblem, b_sign: float,
                         log_abs_b: float) -> float:
    # Zero of w(tau(t)) = -I + bK in (0, eps); g = log(b K/I) decreases to
    # -inf as t -> 0+, and is positive at eps for super-critical data.
    if b_sign <= 0.0:
        raise BlowUpRootNotBracketedError("super-critical datum with b <= 0")
    nu = p.nu

    def g(t: float) -> float:
        li, _, lk, _ = _log_ik_ratios(nu, p.tau(t))
        return log_abs_b + lk - li

    hi = p.eps
    if g(hi) <= 0.0:
        raise BlowUpRootNotBracketedError("w does not change sign below eps")
    lo = p.eps * 1e-3
    for _ in range(40):
        if g(lo) < 0.0:
            break
        lo *= 1e-3
    else:
        raise BlowUpRootNotBracketedError("could not bracket the zero of w")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


# -- adaptive backward integration ---------------------------------------------

_RKF45 = {
    "c": (0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5),
    "a": (
        (),
        (0.25,),
        (3.0 / 32.0, 9.0 / 32.0),
        (1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0),
        (439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0),
        (-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0),
    ),
    "b5": (16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0),
    "b4": (25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0),
}


def _rkf45_step(f, t, y, dt):
    ks = []
    for ci, row in zip(_RKF45["c"], _RKF45["a"]):
        yi = y + dt * sum(aij * kj for aij, kj in zip(row, ks))
        ks.append(f(t + ci * dt, yi))
    y5 = y + dt * sum(b * k for b, k in zip(_RKF45["b5"], ks))
    y4 = y + dt * sum(b * k for b, k in zip(_RKF45["b4"], ks))
    return y5, abs(y5 - y4)


def integrate_riccati(
    R: Callable[[float], float],
    h_eps: float,
    eps: float,
    t_min: float,
    *,
    rtol: float = 1e-10,
    nodes_per_decade: int = 200,
) -> RiccatiSolution:
    """Adaptive backward integration of h' = -h^2 - R(t) from eps to t_min.

    Declares blow-up when |h| exceeds 1e12 (the blow-up time is then the
    last reached node); raises StepUnderflowError if the step falls below
    1e-14 t without triggering the blow-up guard.  The returned evaluator
    interpolates the accepted samples with cubic Hermite pieces.
    """
    if not (t_min > 0.0 and eps > t_min):
        raise ValueError("need 0 < t_min < eps")

    def f(t: float, y: float) -> float:
        return -y * y - R(t)

    n_seg = max(2, int(math.ceil(math.log10(eps / t_min) * nodes_per_decade)))
    ratio = (t_min / eps) ** (1.0 / n_seg)
    ts = [eps, ]
    hs = [h_eps]
    fs = [f(eps, h_eps)]
    blow_up = None
    t, y = eps, h_eps
    for i in range(1, n_seg + 1):
        t_target = t_min if i == n_seg else eps * ratio ** i
        dt = t_target - t  # negative
        while t > t_target:
            hits_target = abs(dt) >= (t - t_target) * (1.0 - 1e-12)
            if hits_target:
                dt = t_target - t
            y_new, err = _rkf45_step(f, t, y, dt)
            tol = rtol * (1.0 + abs(y))
            if math.isfinite(err) and err <= tol:
                t = t_target if hits_target else t + dt
                y = y_new
                if abs(y) > BLOW_UP_THRESHOLD:
                    blow_up = t
                    break
            if err > 0.0 and math.isfinite(err):
                factor = min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
            elif err == 0.0:
                factor = 5.0
            else:
                factor = 0.2
            dt *= factor
            if abs(dt) < 1e-14 * max(t, t_min):
                raise StepUnderflowError(f"step underflow near t={t}")
        if blow_up is not None:
            ts.append(t)
            hs.append(y)
            fs.append(f(t, y))
            break
        ts.append(t)
        hs.append(y)
        fs.append(f(t, y))

    ts_asc = ts[::-1]
    hs_asc = hs[::-1]
    fs_asc = fs[::-1]

    def h_of_t(tq: float) -> float:
        tq = min(max(tq, ts_asc[0]), ts_asc[-1])
        j = bisect_left(ts_asc, tq)
        if j <= 0:
            j = 1
        if j >= len(ts_asc):
            j = len(ts_asc) - 1
        t0, t1 = ts_asc[j - 1], ts_asc[j]
        w = (tq - t0) / (t1 - t0)
        h00 = (1 + 2 * w) * (1 - w) ** 2
        h10 = w * (1 - w) ** 2
        h01 = w * w * (3 - 2 * w)
        h11 = w * w * (w - 1)
        d = t1 - t0
        return (h00 * hs_asc[j - 1] + h10 * d * fs_asc[j - 1]
                + h01 * hs_asc[j] + h11 * d * fs_asc[j])

    if blow_up is not None:
        return RiccatiSolution(h_of_t, blow_up, Asymptote.INTERIOR_POLE, 1.0,
                               note="blow-up detected by threshold")
    h_end = hs_asc[0]
    t_end = ts_asc[0]
    asym = Asymptote.TO_MINUS_INFINITY if h_end < 0.0 else Asymptote.TO_PLUS_INFINITY
    return RiccatiSolution(h_of_t, 0.0, asym, h_end * t_end,
                           note="no blow-up above t_min")
