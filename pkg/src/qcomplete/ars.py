"""Almost-Riemannian structures from polynomial generating families.

The symbolic layer is exact: polynomials carry rational coefficients, Lie
brackets and determinants are computed without rounding, and ranks are
decided by fraction-free Gaussian elimination, so growth vectors are
integer-exact.  Floating point enters only when a computed effective
potential is handed to the sampling-based criteria.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from . import expr as ex
from .criteria import CriterionVerdict, Evidence, Outcome, check_main
from .effpot import PotentialFn

__all__ = [
    "VariableMismatchError",
    "NotSquareError",
    "NotBracketGeneratingError",
    "ZNotHypersurfaceError",
    "NotNormalFormError",
    "DegenerateDensityError",
    "NonPolynomialError",
    "Poly",
    "PolyVectorField",
    "GeneratingFamily",
    "RegularityResult",
    "lie_bracket",
    "growth_vector",
    "det_xi",
    "regularity_check",
    "ars_effective_potential",
    "classify_ars",
]


class VariableMismatchError(ValueError):
    pass


class NotSquareError(ValueError):
    pass


class NotBracketGeneratingError(RuntimeError):
    def __init__(self, partial: tuple[int, ...], max_step: int):
        super().__init__(
            f"rank did not reach the dimension within {max_step} bracket steps; "
            f"partial growth vector {partial}")
        self.partial = partial


class ZNotHypersurfaceError(ValueError):
    pass


class NotNormalFormError(ValueError):
    pass


class DegenerateDensityError(ValueError):
    pass


class NonPolynomialError(ValueError):
    pass


# -- exact polynomials ---------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """Multivariate polynomial with rational coefficients.

    ``terms`` maps exponent tuples (one slot per variable, in order) to
    nonzero coefficients; it is stored sorted, so equal polynomials compare
    and hash equal.
    """

    vars: tuple[str, ...]
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    @staticmethod
    def make(vars: Sequence[str], mapping: dict[tuple[int, ...], Fraction]) -> "Poly":
        clean = {e: c for e, c in mapping.items() if c != 0}
        return Poly(tuple(vars), tuple(sorted(clean.items())))

    @staticmethod
    def const(vars: Sequence[str], c) -> "Poly":
        c = Fraction(c)
        zero = tuple(0 for _ in vars)
        return Poly.make(vars, {zero: c} if c else {})

    @staticmethod
    def variable(vars: Sequence[str], name: str) -> "Poly":
        if name not in vars:
            raise VariableMismatchError(f"{name!r} not among {tuple(vars)}")
        e = tuple(1 if v == name else 0 for v in vars)
        return Poly.make(vars, {e: Fraction(1)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "Poly"):
        if self.vars != other.vars:
            raise VariableMismatchError(f"{self.vars} vs {other.vars}")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms:
            out[e] = out.get(e, Fraction(0)) + c
        return Poly.make(self.vars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(self.vars, tuple((e, -c) for e, c in self.terms))

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly.make(self.vars, out)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if c == 0:
            return Poly.make(self.vars, {})
        return Poly(self.vars, tuple((e, c * co) for e, co in self.terms))

    def power(self, k: int) -> "Poly":
        if k < 0:
            raise NonPolynomialError("negative power")
        out = Poly.const(self.vars, 1)
        for _ in range(k):
            out = out * self
        return out

    def diff(self, name: str) -> "Poly":
        i = self.vars.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms:
            if e[i] == 0:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            out[e2] = out.get(e2, Fraction(0)) + c * e[i]
        return Poly.make(self.vars, out)

    def eval(self, point: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms:
            term = c
            for p, k in zip(point, e):
                if k:
                    term *= Fraction(p) ** k
            total += term
        return total

    def subs_zero(self, name: str) -> "Poly":
        i = self.vars.index(name)
        out = {e: c for e, c in self.terms if e[i] == 0}
        return Poly.make(self.vars, out)

    def min_degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        if self.is_zero:
            return 0
        return min(e[i] for e, _ in self.terms)

    def shift_down(self, name: str, j: int) -> "Poly":
        """Divide by name^j (every term must have degree >= j in name)."""
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms:
            if e[i] < j:
                raise ValueError(f"term not divisible by {name}^{j}")
            out[e[:i] + (e[i] - j,) + e[i + 1:]] = c
        return Poly.make(self.vars, out)

    def to_expr(self) -> ex.Expr:
        total = ex.const(0.0)
        for e, c in self.terms:
            mono = ex.const(float(c))
            for name, k in zip(self.vars, e):
                if k == 1:
                    mono = mono * ex.var(name)
                elif k > 1:
                    mono = mono * (ex.var(name) ** float(k))
            total = total + mono
        return ex.fold(total)

    @staticmethod
    def from_expr(e: ex.Expr, vars: Sequence[str]) -> "Poly":
        vars = tuple(vars)
        if e.kind == "const":
            return Poly.const(vars, Fraction(e.value))
        if e.kind == "var":
            return Poly.variable(vars, e.name)
        if e.kind == "neg":
            return -Poly.from_expr(e.args[0], vars)
        if e.kind == "add":
            return Poly.from_expr(e.args[0], vars) + Poly.from_expr(e.args[1], vars)
        if e.kind == "sub":
            return Poly.from_expr(e.args[0], vars) - Poly.from_expr(e.args[1], vars)
        if e.kind == "mul":
            return Poly.from_expr(e.args[0], vars) * Poly.from_expr(e.args[1], vars)
        if e.kind == "div":
            den = e.args[1]
            if den.kind != "const" or den.value == 0.0:
                raise NonPolynomialError("division only by nonzero constants")
            return Poly.from_expr(e.args[0], vars).scale(1 / Fraction(den.value))
        if e.kind == "pow":
            exp = e.args[1]
            if exp.kind != "const" or exp.value != int(exp.value) or exp.value < 0:
                raise NonPolynomialError("exponents must be nonnegative integers")
            return Poly.from_expr(e.args[0], vars).power(int(exp.value))
        raise NonPolynomialError(f"{e.kind} nodes are not polynomial")

    @staticmethod
    def parse(text: str, vars: Sequence[str]) -> "Poly":
        return Poly.from_expr(ex.parse(text), vars)

    def __str__(self):
        return ex.to_string(self.to_expr())


# -- polynomial vector fields ----------------------------------------------------

@dataclass(frozen=True)
class PolyVectorField:
    """Vector field sum_i components[i] d/d vars[i] with polynomial entries."""

    vars: tuple[str, ...]
    components: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.components) != len(self.vars):
            raise VariableMismatchError("component count must equal variable count")
        for c in self.components:
            if c.vars != self.vars:
                raise VariableMismatchError("component over a different variable list")

    @staticmethod
    def parse(texts: Sequence[str], vars: Sequence[str]) -> "PolyVectorField":
        vars = tuple(vars)
        return PolyVectorField(vars, tuple(Poly.parse(t, vars) for t in texts))

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def eval(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(c.eval(point) for c in self.components)

    def apply_to(self, f: Poly) -> Poly:
        out = Poly.make(self.vars, {})
        for name, comp in zip(self.vars, self.components):
            out = out + comp * f.diff(name)
        return out

    def normalized(self) -> "PolyVectorField":
        """Scale so the first nonzero coefficient is 1 (canonical ray)."""
        for comp in self.components:
            if not comp.is_zero:
                lead = comp.terms[0][1]
                return PolyVectorField(
                    self.vars, tuple(c.scale(1 / lead) for c in self.components))
        return self


def lie_bracket(x: PolyVectorField, y: PolyVectorField) -> PolyVectorField:
    """Exact Lie bracket [X, Y]^j = sum_i (X^i d_i Y^j - Y^i d_i X^j)."""
    if x.vars != y.vars:
        raise VariableMismatchError(f"{x.vars} vs {y.vars}")
    comps = tuple(x.apply_to(yj) - y.apply_to(xj)
                  for xj, yj in zip(x.components, y.components))
    return PolyVectorField(x.vars, comps)


# -- generating families -----------------------------------------------------------

@dataclass(frozen=True)
class GeneratingFamily:
    """Finite family of polynomial fields defining an almost-Riemannian
    structure; more fields than variables are allowed.

    ``det_indices`` names the n-subset used for determinant purposes when
    the family is not square; brackets and growth always use all fields.
    """

    vars: tuple[str, ...]
    fields: tuple[PolyVectorField, ...]
    normal_form: bool = False
    det_indices: tuple[int, ...] | None = None
    box: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        for f in self.fields:
            if f.vars != self.vars:
                raise VariableMismatchError("field over a different variable list")
        if self.det_indices is not None and len(self.det_indices) != len(self.vars):
            raise NotSquareError("det_indices must select one field per variable")

    @staticmethod
    def parse(vars: Sequence[str], field_texts: Sequence[Sequence[str]],
              **kwargs) -> "GeneratingFamily":
        vars = tuple(vars)
        fields = tuple(PolyVectorField.parse(t, vars) for t in field_texts)
        return GeneratingFamily(vars, fields, **kwargs)

    def x_vars(self, t_var: str) -> tuple[str, ...]:
        if t_var not in self.vars:
            raise VariableMismatchError(f"{t_var!r} not among {self.vars}")
        return tuple(v for v in self.vars if v != t_var)

    def x_box(self, t_var: str) -> tuple[tuple[float, float], ...]:
        if self.box is not None:
            return self.box
        return tuple((-1.0, 1.0) for _ in self.x_vars(t_var))


def _rank(vectors: Iterable[tuple[Fraction, ...]]) -> int:
    rows = [list(v) for v in vectors if any(c != 0 for c in v)]
    rank = 0
    col = 0
    width = len(rows[0]) if rows else 0
    while rows and col < width:
        pivot = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[0], rows[pivot] = rows[pivot], rows[0]
        lead = rows[0]
        for r in rows[1:]:
            if r[col] != 0:
                f = r[col] / lead[col]
                for i in range(col, width):
                    r[i] -= f * lead[i]
        rows = [r for r in rows[1:] if any(c != 0 for c in r)]
        rank += 1
        col += 1
    return rank


def growth_vector(family: GeneratingFamily, point: Sequence, max_step: int = 10
                  ) -> tuple[int, ...]:
    """Growth vector (k_1, ..., k_m) of the bracket flag at a point.

    k_i is the rank over the rationals of all iterated brackets of length
    at most i, evaluated at the point; the iteration stops as soon as the
    rank reaches the dimension.  Raises NotBracketGeneratingError (with the
    partial sequence) when max_step brackets do not suffice.
    """
    n = len(family.vars)
    if len(point) != n:
        raise VariableMismatchError(f"point has {len(point)} coordinates, expected {n}")
    q = tuple(Fraction(p) for p in point)
    seen: set[tuple] = set()
    basis: list[PolyVectorField] = []

    def add(f: PolyVectorField):
        if f.is_zero:
            return
        key = f.normalized().components
        if key not in seen:
            seen.add(key)
            basis.append(f)

    for f in family.fields:
        add(f)
    layer = list(basis)
    ks: list[int] = []
    for _ in range(max_step):
        k = _rank(f.eval(q) for f in basis)
        ks.append(k)
        if k == n:
            return tuple(ks)
        new_layer = []
        for y in layer:
            for x in family.fields:
                b = lie_bracket(y, x)
                before = len(basis)
                add(b)
                if len(basis) > before:
                    new_layer.append(b)
        if not new_layer:
            raise NotBracketGeneratingError(tuple(ks), max_step)
        layer = new_layer
    raise NotBracketGeneratingError(tuple(ks), max_step)


def det_xi(family: GeneratingFamily) -> Poly:
    """Exact determinant of the chosen n fields (columns) in coordinates."""
    n = len(family.vars)
    if family.det_indices is not None:
        sel = family.det_indices
    elif len(family.fields) == n:
        sel = tuple(range(n))
    else:
        raise NotSquareError(
            f"{len(family.fields)} fields over {n} variables and no det_indices")
    cols = [family.fields[i] for i in sel]
    matrix = [[cols[j].components[i] for j in range(n)] for i in range(n)]
    return _det(matrix, family.vars)


def _det(m: list[list[Poly]], vars: tuple[str, ...]) -> Poly:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = Poly.make(vars, {})
    for j in range(n):
        if m[0][j].is_zero:
            continue
        minor = [[m[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        cof = m[0][j] * _det(minor, vars)
        total = total + (cof if j % 2 == 0 else -cof)
    return total


# -- regularity ---------------------------------------------------------------------

@dataclass(frozen=True)
class RegularityResult:
    kind: str  # "regular" | "non_regular" | "inconclusive"
    k: int | None = None
    reason: str = ""
    det: Poly | None = None

    @property
    def is_regular(self) -> bool:
        return self.kind == "regular"


_GRID_POINTS_PER_VAR = 41


def _x_grid(dim: int) -> Iterable[tuple[Fraction, ...]]:
    axis = [Fraction(i, (_GRID_POINTS_PER_VAR - 1) // 2) - 1
            for i in range(_GRID_POINTS_PER_VAR)]
    if dim == 0:
        return [()]
    return product(axis, repeat=dim)


def regularity_check(family: GeneratingFamily, t_var: str) -> RegularityResult:
    """Decide regularity of the structure with singular set {t_var = 0}.

    Factors det = t^j u(t, x); the structure is reported Regular(k = j)
    when u(0, x) has no zeros on the sampling grid (exact rational
    evaluation, sign-consistency test) and no sampled point of the singular
    set is a tangency point.  Nonvanishing is certified on the grid only,
    which the reason strings record.
    """
    det = det_xi(family)
    if det.is_zero:
        return RegularityResult("non_regular", reason="determinant vanishes identically",
                                det=det)
    x_names = family.x_vars(t_var)
    j = det.min_degree_in(t_var)
    u = det.shift_down(t_var, j)
    u0 = u.subs_zero(t_var)
    t_idx = family.vars.index(t_var)

    sign = 0
    vanish_point = None
    for xs in _x_grid(len(x_names)):
        point = _assemble_point(family.vars, t_idx, Fraction(0), x_names, xs)
        val = u0.eval(point)
        if val == 0:
            vanish_point = xs
            break
        s = 1 if val > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            vanish_point = xs
            break

    if j == 0:
        if vanish_point is not None:
            raise ZNotHypersurfaceError(
                "determinant has no t factor yet vanishes on the sampled "
                f"singular set (x = {_fmt_point(vanish_point)})")
        return RegularityResult(
            "inconclusive", det=det,
            reason="determinant does not vanish on {t = 0}: the declared "
                   "singular set is not singular on the sample")

    if vanish_point is not None:
        return RegularityResult(
            "non_regular", det=det,
            reason="det = t^j u with u(0, x) vanishing near x = "
                   f"{_fmt_point(vanish_point)}: not a power of a submersion "
                   "(sample-based)")

    for xs in _x_grid(len(x_names)):
        point = _assemble_point(family.vars, t_idx, Fraction(0), x_names, xs)
        if all(f.components[t_idx].eval(point) == 0 for f in family.fields):
            return RegularityResult(
                "non_regular", det=det,
                reason=f"tangency point at x = {_fmt_point(xs)}: no field is "
                       "transversal to the singular set there")

    return RegularityResult("regular", k=j, det=det,
                            reason="det = t^k times a unit on the sampled box "
                                   "(sample-based)")


def _assemble_point(vars: tuple[str, ...], t_idx: int, t_val: Fraction,
                    x_names: tuple[str, ...], xs: Sequence[Fraction]
                    ) -> tuple[Fraction, ...]:
    by_name = dict(zip(x_names, xs))
    return tuple(t_val if i == t_idx else by_name[v]
                 for i, v in enumerate(vars))


def _fmt_point(xs: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(x) for x in xs) + ")"


# -- effective potential and classification ------------------------------------------

def _check_normal_form(family: GeneratingFamily, t_var: str):
    if not family.normal_form:
        raise NotNormalFormError("family is not flagged as boundary normal form")
    t_idx = family.vars.index(t_var)
    first = family.fields[0]
    for i, comp in enumerate(first.components):
        want = Poly.const(family.vars, 1 if i == t_idx else 0)
        if comp != want:
            raise NotNormalFormError("first field must be the unit transversal field")
    for f in family.fields[1:]:
        if not f.components[t_idx].is_zero:
            raise NotNormalFormError(
                "fields beyond the first must be tangent to the level sets")


def ars_effective_potential(family: GeneratingFamily, t_var: str) -> PotentialFn:
    """Effective potential of the volume density of a normal-form family.

    With frame determinant A(t, x), the volume is dt dx / |A| and the
    log-density is theta = -(1/2) ln A^2, giving

        V_eff = (3/4) (A_t/A)^2 - (1/2) A_tt/A.

    For A = t^j u with u(0, .) nonvanishing the leading coefficient of
    V_eff is j(j+2)/4 per 1/t^2.
    """
    _check_normal_form(family, t_var)
    det = det_xi(family)
    if det.is_zero:
        raise DegenerateDensityError("frame determinant vanishes identically")
    a_e = det.to_expr()
    at_e = det.diff(t_var).to_expr()
    att_e = det.diff(t_var).diff(t_var).to_expr()
    ratio1 = at_e / a_e
    v = ex.fold(ex.const(0.75) * ratio1 * ratio1 - ex.const(0.5) * (att_e / a_e))
    if t_var != "t":
        v = _rename_var(v, t_var, "t")
    return PotentialFn(v, provenance=f"volume density of frame det = {det}",
                       x_vars=family.x_vars(t_var))


def _rename_var(e: ex.Expr, old: str, new: str) -> ex.Expr:
    if e.kind == "var":
        return ex.var(new) if e.name == old else e
    if not e.args:
        return e
    return ex.Expr(e.kind, value=e.value, name=e.name,
                   args=tuple(_rename_var(a, old, new) for a in e.args))


def classify_ars(
    family: GeneratingFamily,
    t_var: str,
    eps: float = 0.5,
    **scan_kwargs,
) -> CriterionVerdict:
    """Quantum-completeness verdict for an almost-Riemannian structure.

    Regular structures hold outright.  Otherwise the effective potential of
    the frame volume is computed and handed to the near-boundary bound
    check; since that bound is only sufficient, a failed or unclear check
    yields Inconclusive, never Fails.
    """
    reg = regularity_check(family, t_var)
    if reg.is_regular:
        return CriterionVerdict(
            Outcome.HOLDS, "almost-Riemannian completeness",
            Evidence(margin=None, worst_point=None),
            note=f"regular structure with det = t^{reg.k} times a unit; "
                 "quantum complete")
    try:
        v = ars_effective_potential(family, t_var)
    except NotNormalFormError as err:
        return CriterionVerdict(
            Outcome.INCONCLUSIVE, "almost-Riemannian completeness",
            note=f"non-regular and not in normal form ({err}); "
                 "cannot compute the effective potential")
    verdict = check_main(v, eps, family.x_box(t_var), **scan_kwargs)
    if verdict.outcome is Outcome.HOLDS:
        return CriterionVerdict(
            Outcome.HOLDS, "almost-Riemannian completeness", verdict.evidence,
            note=f"non-regular ({reg.reason}) but the effective potential "
                 "satisfies the near-boundary bound")
    return CriterionVerdict(
        Outcome.INCONCLUSIVE, "almost-Riemannian completeness", verdict.evidence,
        note="the sufficient near-boundary bound is not satisfied "
             f"({verdict.note}); completeness undecided")
