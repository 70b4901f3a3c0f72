"""Lifting phase-space Hamiltonians to the extended space.

``lift_classical`` builds ``lambda_a h^a + i cbar_a d_b h^a c^b``.
``lift_moyal`` adds the hbar-series corrections
``hbar^{2j} kappa_j M_j`` with ``M_j`` the contraction of ``j+2`` copies of
``lambda_a omega^{ab}`` into the ``(j+2)``-th derivatives of ``H``.
``match_coefficients`` determines which ``kappa_j`` (if any) make the
operator form of the series reproduce Moyal evolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .algebra import AlgebraError, GradedPolynomial, SymplecticContext, Variable, VarKind
from .brackets import BracketInputError, moyal
from .scalar import Scalar, as_scalar

__all__ = [
    "LiftSeries",
    "CoefficientReport",
    "OrderMatch",
    "hamiltonian_vector_field",
    "lift_classical",
    "lift_moyal",
    "correction_term",
    "substitute_operator",
    "match_coefficients",
    "monomial_basis",
    "nominal_coefficient",
]

_I = Scalar(0, 1)
_MINUS_I = Scalar(0, -1)


def _require_phase_space(H: GradedPolynomial) -> None:
    extra = H.kinds() - {VarKind.PHI}
    if extra:
        names = ", ".join(sorted(k.value for k in extra))
        raise BracketInputError(f"Hamiltonian must depend on phase-space variables only (found {names})")


def hamiltonian_vector_field(H: GradedPolynomial, ctx: SymplecticContext | None = None) -> list[GradedPolynomial]:
    """Components ``h^a = omega^{ab} d_b H``."""
    ctx = ctx or H.ctx
    _require_phase_space(H)
    grads = [H.derivative(Variable.phi(b)) for b in range(ctx.dim)]
    h = [ctx.zero() for _ in range(ctx.dim)]
    for a, b, w in ctx.omega_entries:
        if grads[b]:
            h[a] = h[a] + grads[b] * w
    return h


def _lambda_omega(ctx: SymplecticContext) -> list[GradedPolynomial]:
    """``(lambda omega)_b = lambda_a omega^{ab}`` for every b."""
    out = [ctx.zero() for _ in range(ctx.dim)]
    for a, b, w in ctx.omega_entries:
        out[b] = out[b] + ctx.lam(a) * w
    return out


def lift_classical(H: GradedPolynomial, ctx: SymplecticContext | None = None, include_ghosts: bool = True) -> GradedPolynomial:
    ctx = ctx or H.ctx
    h = hamiltonian_vector_field(H, ctx)
    out = ctx.zero()
    for a in range(ctx.dim):
        if h[a]:
            out = out + ctx.lam(a) * h[a]
    if include_ghosts:
        ghost = ctx.zero()
        for a in range(ctx.dim):
            for b in range(ctx.dim):
                dh = h[a].derivative(Variable.phi(b))
                if dh:
                    ghost = ghost + ctx.cbar(a) * dh * ctx.c(b)
        out = out + ghost * _I
    return out


def correction_term(H: GradedPolynomial, j: int, ctx: SymplecticContext | None = None) -> GradedPolynomial:
    """``M_j``: ``j+2`` factors of ``lambda_a omega^{ab}`` contracted into ``d^{j+2} H``."""
    ctx = ctx or H.ctx
    _require_phase_space(H)
    if j < 1:
        raise ValueError("corrections start at j = 1")
    lw = _lambda_omega(ctx)
    d = ctx.dim
    out = ctx.zero()
    # symmetric contraction: sum over multisets with multinomial weights
    for combo in itertools.combinations_with_replacement(range(d), j + 2):
        deriv = H.diff(*(Variable.phi(b) for b in combo))
        if not deriv:
            continue
        weight = math.factorial(j + 2)
        for b in set(combo):
            weight //= math.factorial(combo.count(b))
        factor = ctx.one()
        for b in combo:
            factor = factor * lw[b]
        out = out + factor * deriv * weight
    return out


def nominal_coefficient(j: int) -> Fraction:
    """Nominal series weight ``1/(2j+1)!`` multiplying ``hbar^{2j} M_j``."""
    return Fraction(1, math.factorial(2 * j + 1))


@dataclass(frozen=True)
class LiftSeries:
    base: GradedPolynomial
    corrections: tuple[tuple[int, Scalar, GradedPolynomial], ...]
    truncation_order: int

    def polynomial(self) -> GradedPolynomial:
        """``base + sum_j coefficient_j hbar^{2j} M_j`` as one polynomial."""
        ctx = self.base.ctx
        out = self.base
        for j, coef, m in self.corrections:
            if m and coef:
                out = out + m * ctx.hbar ** (2 * j) * coef
        return out


def lift_moyal(
    H: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    order: int = 2,
    coefficients: Sequence[Scalar | Fraction | int] | None = None,
    include_ghosts: bool = True,
) -> LiftSeries:
    ctx = ctx or H.ctx
    if order < 0 or order % 2:
        raise ValueError("lift order must be a non-negative even integer")
    base = lift_classical(H, ctx, include_ghosts=include_ghosts)
    corrections = []
    for j in range(1, order // 2 + 1):
        if coefficients is not None:
            coef = as_scalar(coefficients[j - 1])
        else:
            coef = Scalar(nominal_coefficient(j))
        corrections.append((j, coef, correction_term(H, j, ctx)))
    return LiftSeries(base, tuple(corrections), order)


def substitute_operator(
    L: Union[LiftSeries, GradedPolynomial], rho: GradedPolynomial, ctx: SymplecticContext | None = None
) -> GradedPolynomial:
    """Read every ``lambda_a`` in ``L`` as ``-i d/dphi^a`` acting on ``rho``.

    Ghost-bearing terms of ``L`` are dropped; the remaining factors act by
    multiplication after all derivatives have been applied to ``rho``.
    """
    poly = L.polynomial() if isinstance(L, LiftSeries) else L
    ctx = ctx or poly.ctx
    extra = rho.kinds() - {VarKind.PHI, VarKind.HBAR}
    if extra:
        raise BracketInputError("rho must be a phase-space function")
    d = ctx.dim
    lam0 = d
    cache: dict[tuple[int, ...], GradedPolynomial] = {}
    out = ctx.zero()
    for (exps, ghosts), coef in poly.terms.items():
        if ghosts:
            continue
        lam = exps[lam0 : lam0 + d]
        if lam not in cache:
            r = rho
            for a, e in enumerate(lam):
                for _ in range(e):
                    r = r.derivative(Variable.phi(a))
            cache[lam] = r
        drho = cache[lam]
        if not drho:
            continue
        mult = exps[:lam0] + (0,) * d + exps[lam0 + d :]
        factor = GradedPolynomial(ctx, {(mult, ()): coef * _MINUS_I ** sum(lam)}, _trusted=True)
        out = out + factor * drho
    return out


def monomial_basis(ctx: SymplecticContext, max_degree: int, min_degree: int = 0) -> list[GradedPolynomial]:
    """All phase-space monomials with total degree in ``[min_degree, max_degree]``."""
    out = []
    d = ctx.dim
    for deg in range(min_degree, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            m = ctx.one()
            for a in combo:
                m = m * ctx.phi(a)
            out.append(m)
    return out


@dataclass
class OrderMatch:
    """Outcome of the matching equations at one power ``hbar^{2j}``."""

    j: int
    status: str  # unique | vacuous | inconsistent | underdetermined
    kappa: Scalar | None
    nominal_value: Fraction
    ratio_to_nominal: Scalar | None
    equations: int
    detail: str = ""


@dataclass
class CoefficientReport:
    hamiltonian: GradedPolynomial
    order: int
    target: str
    classical_anchor_holds: bool
    orders: list[OrderMatch] = field(default_factory=list)
    verified: bool = False
    basis_size: int = 0

    @property
    def consistent(self) -> bool:
        return self.classical_anchor_holds and all(o.status in ("unique", "vacuous") for o in self.orders)

    @property
    def kappas(self) -> list[Scalar | None]:
        return [o.kappa for o in self.orders]


def _moyal_target(H: GradedPolynomial, rho: GradedPolynomial, order: int) -> GradedPolynomial:
    # density evolution i*{H, rho}_mb == -i*{rho, H}_mb; the hbar^0 part is the
    # substituted classical lift, which pins this sign
    return moyal(rho, H, order=order) * _MINUS_I


def match_coefficients(
    H: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    order: int = 2,
    test_basis: Sequence[GradedPolynomial] | None = None,
) -> CoefficientReport:
    """Solve for ``kappa_j`` so that the substituted series equals Moyal evolution.

    At each power ``hbar^{2j}`` the only unknown is ``kappa_j``; every
    coefficient of every basis function gives one scalar equation
    ``kappa_j * a = b``.  Statuses: ``unique`` (a solution exists and is
    forced), ``vacuous`` (``M_j`` vanishes identically and nothing is left to
    match), ``inconsistent`` (no ``kappa_j`` works), ``underdetermined``
    (``M_j`` is nonzero but the basis never probes it).
    """
    ctx = ctx or H.ctx
    _require_phase_space(H)
    if order < 0 or order % 2:
        raise ValueError("order must be a non-negative even integer")
    if test_basis is None:
        test_basis = monomial_basis(ctx, order + 3)
    base = lift_classical(H, ctx, include_ghosts=False)
    targets = [_moyal_target(H, rho, order) for rho in test_basis]

    anchor = all(
        substitute_operator(base, rho, ctx) == t.hbar_coefficient(0) for rho, t in zip(test_basis, targets)
    )
    report = CoefficientReport(
        hamiltonian=H,
        order=order,
        target="-i*moyal(rho, H) = i*moyal(H, rho)",
        classical_anchor_holds=anchor,
        basis_size=len(test_basis),
    )
    kappas: list[Scalar] = []
    for j in range(1, order // 2 + 1):
        m = correction_term(H, j, ctx)
        pairs: list[tuple[Scalar, Scalar]] = []
        for rho, t in zip(test_basis, targets):
            a_poly = substitute_operator(m, rho, ctx)
            b_poly = t.hbar_coefficient(2 * j)
            for k in set(a_poly.terms) | set(b_poly.terms):
                pairs.append((a_poly.terms.get(k, Scalar(0)), b_poly.terms.get(k, Scalar(0))))
        report.orders.append(_solve_scalar(j, m, pairs))
        kappas.append(report.orders[-1].kappa or Scalar(0))

    if report.consistent:
        series = lift_moyal(H, ctx, order, coefficients=kappas, include_ghosts=False)
        report.verified = all(
            (substitute_operator(series, rho, ctx) - t).truncate_hbar(order).is_zero
            for rho, t in zip(test_basis, targets)
        )
    return report


def _solve_scalar(j: int, m: GradedPolynomial, pairs: list[tuple[Scalar, Scalar]]) -> OrderMatch:
    nominal = nominal_coefficient(j)
    n_eq = len(pairs)
    if m.is_zero:
        if any(b for _, b in pairs):
            return OrderMatch(j, "inconsistent", None, nominal, None, n_eq, "M_j vanishes but the Moyal term does not")
        return OrderMatch(j, "vacuous", None, nominal, None, n_eq, "M_j vanishes identically; any coefficient works")
    kappa = None
    for a, b in pairs:
        if a:
            kappa = b / a
            break
    if kappa is None:
        if any(b for _, b in pairs):
            return OrderMatch(j, "inconsistent", None, nominal, None, n_eq, "basis sees the Moyal term but not M_j")
        return OrderMatch(j, "underdetermined", None, nominal, None, n_eq, "test basis too small to probe M_j")
    for a, b in pairs:
        if kappa * a != b:
            return OrderMatch(
                j, "inconsistent", None, nominal, None, n_eq,
                "no single coefficient reproduces the Moyal term at this order",
            )
    return OrderMatch(j, "unique", kappa, nominal, kappa / Scalar(nominal), n_eq)
