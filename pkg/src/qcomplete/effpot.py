"""Near-boundary measure models and their effective potential.

A boundary-normal-form model describes a measure through its log-density
along the distance coordinate t:

    theta(t, x) = (a(x)/2) * ln t + phi(t, x),      0 < t <= eps,

so that the measure reads e^{2 theta} dt dmu(x).  The effective potential
is the intrinsic function

    V_eff = (d_t theta)^2 + d_t^2 theta,

computed here symbolically.  Adding any t-independent function of x to phi
leaves V_eff unchanged (the reference measure on the cross-section is
irrelevant), which is covered by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import Expr

__all__ = [
    "InvalidDimensionError",
    "NonFiniteSampleError",
    "BoundaryModel",
    "PotentialFn",
    "cone_model",
    "effective_potential",
    "leading_behavior",
]

T_VAR = "t"


class InvalidDimensionError(ValueError):
    pass


class NonFiniteSampleError(ValueError):
    """A grid evaluation returned a non-finite value or hit a domain error."""


@dataclass(frozen=True)
class BoundaryModel:
    """Boundary normal form of a measure on (0, eps] x X.

    ``a`` is the power exponent (an expression in the x-variables, or a
    constant), ``phi`` the correction term in (t, x).  ``x_box`` optionally
    gives a closed sampling interval per x-variable; it defaults to
    [-1, 1] per variable when sampling is needed.
    """

    dim: int
    a: Expr
    phi: Expr
    eps: float
    x_vars: tuple[str, ...] = ()
    x_box: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidDimensionError(f"dim must be >= 1, got {self.dim}")
        if not (self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps}")
        if T_VAR in self.x_vars:
            raise ValueError(f"{T_VAR!r} is reserved for the boundary coordinate")
        allowed_a = frozenset(self.x_vars)
        extra = ex.free_variables(self.a) - allowed_a
        if extra:
            raise ValueError(f"a(x) contains unknown variables {sorted(extra)}")
        allowed_phi = allowed_a | {T_VAR}
        extra = ex.free_variables(self.phi) - allowed_phi
        if extra:
            raise ValueError(f"phi contains unknown variables {sorted(extra)}")
        if self.x_box is not None and len(self.x_box) != len(self.x_vars):
            raise ValueError("x_box must give one interval per x-variable")

    def box(self) -> tuple[tuple[float, float], ...]:
        if self.x_box is not None:
            return self.x_box
        return tuple((-1.0, 1.0) for _ in self.x_vars)

    def theta(self) -> Expr:
        return (self.a / 2.0) * ex.Expr("call", name="ln", args=(ex.var(T_VAR),)) + self.phi


@dataclass(frozen=True)
class PotentialFn:
    """Symbolic potential in (t, x-variables) with a provenance note."""

    expr: Expr
    provenance: str
    x_vars: tuple[str, ...] = ()

    def __call__(self, t: float, x: dict[str, float] | None = None) -> float:
        bindings = {T_VAR: t}
        if x:
            bindings.update(x)
        return ex.evaluate(self.expr, bindings)

    def __str__(self):
        return ex.to_string(self.expr)


def cone_model(n: int, alpha: float, eps: float) -> BoundaryModel:
    """Model of a cone-type metric dt^2 + t^{2 alpha} h on an (n-1)-manifold.

    The Riemannian volume has power exponent a = (n-1) * alpha and no
    correction term.
    """
    if n < 2:
        raise InvalidDimensionError(f"cone model needs n >= 2, got {n}")
    if not (eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    a = (n - 1) * alpha
    return BoundaryModel(dim=n, a=ex.const(a), phi=ex.const(0.0), eps=eps)


def effective_potential(m: BoundaryModel) -> PotentialFn:
    """Symbolic V_eff = (d_t theta)^2 + d_t^2 theta for a boundary model.

    For constant a and phi with no t-dependence the result collapses to the
    closed form (a^2 - 2a) / (4 t^2).
    """
    dphi = ex.differentiate(m.phi, T_VAR)
    if m.a.kind == "const" and dphi == ex.const(0.0):
        c = (m.a.value * m.a.value - 2.0 * m.a.value) / 4.0
        if c == 0.0:
            v = ex.const(0.0)
        else:
            v = ex.const(c) / (ex.var(T_VAR) ** 2.0)
        return PotentialFn(v, provenance=_provenance(m), x_vars=m.x_vars)
    theta = m.theta()
    d1 = ex.differentiate(theta, T_VAR)
    d2 = ex.differentiate(d1, T_VAR)
    v = ex.fold(d1 * d1 + d2)
    return PotentialFn(v, provenance=_provenance(m), x_vars=m.x_vars)


def _provenance(m: BoundaryModel) -> str:
    return (f"boundary model dim={m.dim}, a={ex.to_string(m.a)}, "
            f"phi={ex.to_string(m.phi)}, eps={m.eps}")


def leading_behavior(
    p: PotentialFn,
    x0: dict[str, float] | None = None,
    eps: float = 1.0,
    levels: int = 40,
) -> tuple[float, float, float]:
    """Fit V(t, x0) ~ c2/t^2 - kappa/t on the dyadic grid t = eps * 2^-j.

    Returns (c2_hat, kappa_hat, quality) where quality is the maximum
    relative residual max_j |V_j - fit_j| / (1 + |V_j|).  The coefficients
    are extracted hierarchically, matching the asymptotic structure of the
    basis: c2 as the limit of t^2 V on the deepest levels, then kappa by
    least squares on the residual over the coarse levels, where an error in
    c2 cannot be amplified by 1/t^2.  Any remainder shows up in the quality
    figure rather than being hidden.
    """
    ts = np.array([eps * 2.0 ** (-j) for j in range(levels + 1)])
    vals = np.empty_like(ts)
    for i, t in enumerate(ts):
        try:
            vals[i] = p(float(t), x0)
        except ex.ExprError as err:
            raise NonFiniteSampleError(f"potential not evaluable at t={t}: {err}") from None
    if not np.all(np.isfinite(vals)):
        bad = ts[~np.isfinite(vals)][0]
        raise NonFiniteSampleError(f"potential non-finite at t={bad}")
    deep = min(12, len(ts))
    c2_hat = float(np.median((vals * ts ** 2.0)[-deep:]))
    coarse = slice(0, min(25, len(ts)))
    resid = (vals - c2_hat / ts ** 2.0) * ts
    basis = np.column_stack([np.ones_like(ts[coarse]), ts[coarse]])
    coef, *_ = np.linalg.lstsq(basis, resid[coarse], rcond=None)
    kappa_hat = float(-coef[0])
    fit = c2_hat / ts ** 2.0 - kappa_hat / ts
    quality = float(np.max(np.abs(vals - fit) / (1.0 + np.abs(vals))))
    return c2_hat, kappa_hat, quality
