"""Poisson, extended Poisson and Moyal brackets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .algebra import AlgebraError, GradedPolynomial, RationalFunction, SymplecticContext, Variable, VarKind
from .scalar import Scalar

__all__ = [
    "BracketKind",
    "BracketInputError",
    "pb",
    "epb",
    "moyal",
    "bidifferential_power",
    "bracket",
]

Expr = Union[GradedPolynomial, RationalFunction]

_MINUS_I = Scalar(0, -1)


class BracketInputError(AlgebraError):
    """A bracket defined on phase space received extended-space variables."""


@dataclass(frozen=True)
class BracketKind:
    tag: str
    order: int | None = None

    def __post_init__(self) -> None:
        if self.tag not in ("pb", "epb", "moyal"):
            raise ValueError(f"unknown bracket kind {self.tag!r}")
        if self.order is not None and self.order < 0:
            raise ValueError("moyal order must be >= 0")

    @property
    def effective_order(self) -> int | None:
        """Moyal truncation happens at the largest even power not above ``order``."""
        if self.order is None:
            return None
        return 2 * (self.order // 2)


def _check_phase_space(f: GradedPolynomial, what: str, permissive: bool) -> None:
    if permissive:
        return
    extra = f.kinds() - {VarKind.PHI, VarKind.HBAR}
    if extra:
        names = ", ".join(sorted(k.value for k in extra))
        raise BracketInputError(f"{what} carries non-phase-space variables ({names})")


def pb(
    F: GradedPolynomial,
    G: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    *,
    treat_extra_as_parameters: bool = False,
) -> GradedPolynomial:
    """Classical Poisson bracket ``d_a F omega^{ab} d_b G``."""
    ctx = ctx or F.ctx
    _check_phase_space(F, "pb first argument", treat_extra_as_parameters)
    _check_phase_space(G, "pb second argument", treat_extra_as_parameters)
    out = ctx.zero()
    dF = {}
    dG = {}
    for a, b, w in ctx.omega_entries:
        if a not in dF:
            dF[a] = F.derivative(Variable.phi(a))
        if b not in dG:
            dG[b] = G.derivative(Variable.phi(b))
        if dF[a] and dG[b]:
            out = out + (dF[a] * dG[b]) * w
    return out


def epb(F: Expr, G: Expr, ctx: SymplecticContext | None = None) -> Expr:
    """Extended Poisson bracket on the full graded space.

    Generated by ``{phi^a, lambda_b} = delta^a_b`` and
    ``{c^a, cbar_b} = -i delta^a_b``; the ghost sector uses right derivatives
    on the left argument and left derivatives on the right argument.
    Rational-function arguments are handled by the quotient rule.
    """
    ctx = ctx or F.ctx
    if isinstance(F, RationalFunction) or isinstance(G, RationalFunction):
        return _epb_rational(RationalFunction.lift(F), RationalFunction.lift(G), ctx)
    out = ctx.zero()
    for a in range(ctx.dim):
        phi, lam = Variable.phi(a), Variable.lam(a)
        f_phi, g_lam = F.derivative(phi), G.derivative(lam)
        if f_phi and g_lam:
            out = out + f_phi * g_lam
        f_lam, g_phi = F.derivative(lam), G.derivative(phi)
        if f_lam and g_phi:
            out = out - f_lam * g_phi
    ghost = ctx.zero()
    for a in range(ctx.dim):
        c, cb = Variable.c(a), Variable.cbar(a)
        f_c, g_cb = F.right_derivative(c), G.derivative(cb)
        if f_c and g_cb:
            ghost = ghost + f_c * g_cb
        f_cb, g_c = F.right_derivative(cb), G.derivative(c)
        if f_cb and g_c:
            ghost = ghost + f_cb * g_c
    if ghost:
        out = out + ghost * _MINUS_I
    return out


def _epb_rational(F: RationalFunction, G: RationalFunction, ctx: SymplecticContext) -> RationalFunction:
    # {fn/fd, gn/gd} by the graded Leibniz rule; denominators are even and
    # ghost-free, so the factor order below is the only sign bookkeeping needed
    fn, fd, gn, gd = F.num, F.den, G.num, G.den
    terms = RationalFunction(epb(fn, gn, ctx), fd * gd)
    if not fd.is_constant:
        terms = terms - RationalFunction(fn * epb(fd, gn, ctx), fd * fd * gd)
    if not gd.is_constant:
        terms = terms - RationalFunction(epb(fn, gd, ctx) * gn, fd * gd * gd)
    if not fd.is_constant and not gd.is_constant:
        terms = terms + RationalFunction(fn * epb(fd, gd, ctx) * gn, fd * fd * gd * gd)
    return terms


def bidifferential_power(
    F: GradedPolynomial,
    G: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    k: int = 1,
    *,
    treat_extra_as_parameters: bool = False,
) -> GradedPolynomial:
    """``sum d_{a1..ak}F omega^{a1 b1} ... omega^{ak bk} d_{b1..bk}G``."""
    ctx = ctx or F.ctx
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_phase_space(F, "first argument", treat_extra_as_parameters)
    _check_phase_space(G, "second argument", treat_extra_as_parameters)
    return _bidiff(F, G, ctx, k, {})


def _bidiff(F: GradedPolynomial, G: GradedPolynomial, ctx: SymplecticContext, k: int, memo: dict) -> GradedPolynomial:
    if F.is_zero or G.is_zero:
        return ctx.zero()
    if k == 0:
        return F * G
    key = (F, G, k)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = ctx.zero()
    for a, b, w in ctx.omega_entries:
        dF = F.derivative(Variable.phi(a))
        if not dF:
            continue
        dG = G.derivative(Variable.phi(b))
        if not dG:
            continue
        out = out + _bidiff(dF, dG, ctx, k - 1, memo) * w
    memo[key] = out
    return out


def moyal(
    F: GradedPolynomial,
    G: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    order: int | None = None,
    *,
    treat_extra_as_parameters: bool = False,
) -> GradedPolynomial:
    """Moyal bracket as the terminating sine series of the Poisson bidifferential.

    ``sum_j (-1)^j (hbar^2/4)^j / (2j+1)! P^{2j+1}(F, G)``; with ``order`` only
    the terms with ``2j <= order`` are kept.  Powers of hbar already present
    in ``F`` or ``G`` are left alone, so order 0 is always the Poisson bracket.
    """
    ctx = ctx or F.ctx
    _check_phase_space(F, "moyal first argument", treat_extra_as_parameters)
    _check_phase_space(G, "moyal second argument", treat_extra_as_parameters)
    kind = BracketKind("moyal", order)
    top = min(F.phi_degree(), G.phi_degree())
    limit = kind.effective_order
    memo: dict = {}
    out = ctx.zero()
    hbar2 = ctx.hbar**2
    j = 0
    while 2 * j + 1 <= top:
        if limit is not None and 2 * j > limit:
            break
        coef = Fraction((-1) ** j, 4**j * math.factorial(2 * j + 1))
        term = _bidiff(F, G, ctx, 2 * j + 1, memo)
        if term:
            out = out + term * hbar2**j * coef
        j += 1
    return out


def bracket(kind: BracketKind | str, F: GradedPolynomial, G: GradedPolynomial, ctx: SymplecticContext | None = None) -> GradedPolynomial:
    if isinstance(kind, str):
        kind = BracketKind(kind)
    if kind.tag == "pb":
        return pb(F, G, ctx)
    if kind.tag == "epb":
        return epb(F, G, ctx)
    return moyal(F, G, ctx, kind.order)
