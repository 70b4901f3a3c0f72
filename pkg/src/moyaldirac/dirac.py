"""Dirac constraint algorithm for the hbar-dependent quantisation constraints.

Primary constraints are ``phi^a + hbar omega^{ab} lambda_b`` for the momentum
indices ``a >= n``.  Preservation under the total Hamiltonian
``H~ + u_a Phi^a_(0)`` either fixes multipliers or produces new constraints;
the second-class set then defines the Dirac bracket.

"Weak" equality (on the constraint surface) is decided by explicit
substitution: each constraint is solved for one variable in which it is
linear, preferring the ``lambda`` variables, and the resulting rational
substitutions are applied in order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .algebra import (
    AlgebraError,
    GradedPolynomial,
    RationalFunction,
    SymplecticContext,
    Variable,
    VarKind,
    _monomial_gcd,
    _shift,
)
from .brackets import epb, moyal
from .lift import lift_classical
from .matrix import adjugate, det
from .scalar import Scalar

__all__ = [
    "Constraint",
    "ConstraintSet",
    "ConstraintSurface",
    "ConstraintAnalysis",
    "StageRecord",
    "EvolutionResult",
    "ComparisonReport",
    "FirstClassConstraintError",
    "MaxStagesExceeded",
    "primary_constraints",
    "consistency_iteration",
    "constraint_matrix",
    "invert_constraint_matrix",
    "dirac_bracket",
    "constrained_evolution",
    "compare_evolutions",
]

Expr = Union[GradedPolynomial, RationalFunction]


class FirstClassConstraintError(AlgebraError):
    """The constraint matrix is singular: first-class constraints are present."""


class MaxStagesExceeded(AlgebraError):
    def __init__(self, stage: int, unresolved: list[GradedPolynomial], trace: list | None = None) -> None:
        text = ", ".join(str(u) for u in unresolved)
        super().__init__(f"constraint algorithm still open after {stage} stages; unresolved: {text}")
        self.stage = stage
        self.unresolved = unresolved
        self.trace = trace or []


@dataclass
class Constraint:
    expr: GradedPolynomial
    stage: int
    index: int
    classification: str = "undetermined"


@dataclass
class ConstraintSet:
    constraints: list[Constraint] = field(default_factory=list)

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __getitem__(self, i: int) -> Constraint:
        return self.constraints[i]

    @property
    def exprs(self) -> list[GradedPolynomial]:
        return [c.expr for c in self.constraints]

    def stage(self, k: int) -> list[Constraint]:
        return [c for c in self.constraints if c.stage == k]


def primary_constraints(
    ctx: SymplecticContext,
    hbar_symbolic: bool = True,
    hbar_value: Fraction | int | None = None,
) -> ConstraintSet:
    """``phi^a + hbar omega^{ab} lambda_b`` for ``a`` in ``[n, 2n)``."""
    out = []
    for a in range(ctx.n, ctx.dim):
        expr = ctx.phi(a)
        for b in range(ctx.dim):
            w = ctx.omega[a][b]
            if w:
                expr = expr + ctx.hbar * ctx.lam(b) * w
        if not hbar_symbolic:
            if hbar_value is None:
                raise ValueError("numeric hbar requires a value")
            expr = expr.subs_value(Variable.hbar(), hbar_value)
        out.append(Constraint(expr, 0, a))
    return ConstraintSet(out)


# ---------------------------------------------------------------------------
# constraint surface


class ConstraintSurface:
    """Ordered substitutions ``v -> N/D`` solving the constraints."""

    def __init__(self, ctx: SymplecticContext) -> None:
        self.ctx = ctx
        self.substitutions: list[tuple[Variable, RationalFunction]] = []
        self.unsolved: list[GradedPolynomial] = []

    @classmethod
    def from_constraints(cls, ctx: SymplecticContext, exprs: Sequence[GradedPolynomial]) -> ConstraintSurface:
        surf = cls(ctx)
        for e in exprs:
            surf.add(e)
        return surf

    @property
    def complete(self) -> bool:
        return not self.unsolved

    def add(self, expr: GradedPolynomial) -> None:
        r = self.reduce(expr).num
        if r.is_zero:
            return
        r = _radical_content(r)
        choice = _pick_linear_variable(r, self.ctx)
        if choice is None:
            self.unsolved.append(r)
            return
        v, coef, rest = choice
        self.substitutions.append((v, RationalFunction(-rest, coef)))

    def reduce(self, expr: Expr) -> RationalFunction:
        out = RationalFunction.lift(expr, self.ctx)
        for v, val in self.substitutions:
            if out.depends_on(v):
                out = out.subs(v, val)
        return out

    def is_weakly_zero(self, expr: Expr) -> bool:
        return self.reduce(expr).is_zero

    def describe(self) -> list[tuple[str, str]]:
        return [(self.ctx.name(v), str(val)) for v, val in self.substitutions]


def _radical_content(r: GradedPolynomial) -> GradedPolynomial:
    """Replace the monomial factor of ``r`` by its radical; hbar is a nonzero parameter.

    ``p^4 = 0`` and ``p = 0`` cut out the same surface, but only the second
    can be solved by substitution.
    """
    content = _monomial_gcd([r], r.ctx.n_commuting)
    keep = [min(e, 1) for e in content]
    keep[r.ctx.hbar_slot] = 0
    drop = tuple(e - k for e, k in zip(content, keep))
    return _shift(r, drop) if any(drop) else r


def _pick_linear_variable(r: GradedPolynomial, ctx: SymplecticContext):
    """Choose a variable in which ``r`` is linear with a ghost-free coefficient.

    ``lambda`` variables are preferred so that reduced results live on phase
    space; among them the one with the smallest coefficient wins.
    """
    best = None
    for kind_rank, kind in enumerate((VarKind.LAMBDA, VarKind.PHI)):
        for a in range(ctx.dim):
            v = Variable(kind, a)
            if r.degree_in(v) != 1:
                continue
            parts = r.collect(v)
            coef = parts[1]
            if not coef.is_ghost_free:
                continue
            rank = (kind_rank, coef.degree(), len(coef), a)
            if best is None or rank < best[0]:
                best = (rank, v, coef, parts.get(0, ctx.zero()))
        if best is not None:
            break
    if best is None:
        return None
    return best[1], best[2], best[3]


# ---------------------------------------------------------------------------
# multiplier equations


@dataclass
class _Row:
    """``const + sum_b u_coef[b] u_b + sum_b xi_coef[b] xi_b = 0``."""

    u_coef: list[GradedPolynomial]
    const: GradedPolynomial
    xi_coef: list[GradedPolynomial]
    index: int

    def scaled_sub(self, s: GradedPolynomial, other: _Row, t: GradedPolynomial) -> _Row:
        """``s*self - t*other``."""
        return _Row(
            [s * x - t * y for x, y in zip(self.u_coef, other.u_coef)],
            s * self.const - t * other.const,
            [s * x - t * y for x, y in zip(self.xi_coef, other.xi_coef)],
            self.index,
        )


def _eliminate(rows: list[_Row], k: int) -> tuple[list[tuple[int, _Row]], list[_Row]]:
    """Fraction-free row echelon form; returns ``(pivots, u_free_rows)``."""
    pending = list(rows)
    pivots: list[tuple[int, _Row]] = []
    for col in range(k):
        piv = next((r for r in pending if r.u_coef[col]), None)
        if piv is None:
            continue
        pending.remove(piv)
        pending = [
            r.scaled_sub(piv.u_coef[col], piv, r.u_coef[col]) if r.u_coef[col] else r for r in pending
        ]
        pivots.append((col, piv))
    return pivots, pending


@dataclass
class Multiplier:
    """Solved multiplier ``u = value + sum_b xi_coef[b] xi_b``; ``value`` is None if free."""

    value: RationalFunction | None
    xi_coef: list[RationalFunction]


def _back_substitute(pivots: list[tuple[int, _Row]], k: int, ctx: SymplecticContext) -> list[Multiplier]:
    zero = RationalFunction(ctx.zero())
    sol: list[Multiplier | None] = [None] * k
    for col, row in reversed(pivots):
        const = RationalFunction(row.const)
        xi = [RationalFunction(x) for x in row.xi_coef]
        for c2 in range(col + 1, k):
            coef = row.u_coef[c2]
            if not coef:
                continue
            other = sol[c2]
            if other is None or other.value is None:
                continue  # free multipliers are set to zero
            const = const + RationalFunction(coef) * other.value
            xi = [x + RationalFunction(coef) * y for x, y in zip(xi, other.xi_coef)]
        piv = RationalFunction(row.u_coef[col])
        sol[col] = Multiplier(-const / piv, [-(x / piv) for x in xi])
    return [s if s is not None else Multiplier(None, [zero] * k) for s in sol]


# ---------------------------------------------------------------------------
# analysis


@dataclass
class StageRecord:
    stage: int
    index: int
    source: GradedPolynomial
    candidate: GradedPolynomial
    ghost_terms: GradedPolynomial
    outcome: str  # new_constraint | multiplier_equation | weakly_zero


@dataclass
class ConstraintAnalysis:
    ctx: SymplecticContext
    hamiltonian: GradedPolynomial
    htilde: GradedPolynomial
    psi: ConstraintSet
    C: list[list[GradedPolynomial]]
    second_class: list[int]
    C_inv: list[list[RationalFunction]] | None
    det: GradedPolynomial | None
    adj: list[list[GradedPolynomial]] | None
    multipliers: list[Multiplier]
    total_hamiltonian: RationalFunction
    surface: ConstraintSurface
    trace: list[StageRecord]
    include_ghosts: bool = False
    dynamical_multipliers: bool = False
    xi_cancels: bool | None = None
    hbar_value: Fraction | None = None

    @property
    def primaries(self) -> list[Constraint]:
        return self.psi.stage(0)

    @property
    def n_stages(self) -> int:
        return max(c.stage for c in self.psi)

    @property
    def first_class(self) -> list[int]:
        return [i for i, c in enumerate(self.psi) if c.classification == "first_class"]

    def preservation_residuals(self) -> list[RationalFunction]:
        """``{Psi, H~_T}_epb`` on the constraint surface for every constraint."""
        return [self.surface.reduce(epb(c.expr, self.total_hamiltonian, self.ctx)) for c in self.psi]


def _hbar_fixed(expr: GradedPolynomial, hbar_value: Fraction | None) -> GradedPolynomial:
    if hbar_value is None:
        return expr
    return expr.subs_value(Variable.hbar(), hbar_value)


def consistency_iteration(
    H: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    include_ghosts: bool = False,
    max_stages: int = 6,
    *,
    hbar_value: Fraction | int | None = None,
    dynamical_multipliers: bool = False,
    primary: Sequence[GradedPolynomial] | None = None,
) -> ConstraintAnalysis:
    """Run the constraint algorithm to closure and build the Dirac data.

    ``primary`` replaces the default primary constraints (for experimenting
    with hbar-series constraints).  With ``include_ghosts`` the ghost part of
    the lifted Hamiltonian is kept; ghost-bilinear pieces of each preservation
    condition are recorded in the trace and the algorithm continues on the
    bosonic part.  ``dynamical_multipliers`` starts from
    ``H~ + xi_a Phi^a_(0)`` with the ``xi_a`` carried as extra unknowns.
    """
    ctx = ctx or H.ctx
    hv = Fraction(hbar_value) if hbar_value is not None else None
    htilde_full = lift_classical(H, ctx, include_ghosts=include_ghosts)
    htilde = htilde_full.bosonic()

    if primary is None:
        prim = primary_constraints(ctx, hbar_symbolic=hv is None, hbar_value=hv).constraints
    else:
        prim = [Constraint(_hbar_fixed(e, hv), 0, ctx.n + i) for i, e in enumerate(primary)]
    constraints: list[Constraint] = list(prim)
    k = len(prim)
    trace: list[StageRecord] = []
    pivots: list[tuple[int, _Row]] = []
    frontier = list(prim)
    stage = 0

    while frontier:
        if stage >= max_stages:
            raise MaxStagesExceeded(stage, [c.expr for c in frontier], trace)
        surface = ConstraintSurface.from_constraints(ctx, [c.expr for c in constraints])
        new_rows = []
        for psi in frontier:
            full = epb(psi.expr, htilde_full, ctx)
            cand = full.bosonic()
            u_coef = [epb(psi.expr, p.expr, ctx) for p in prim]
            xi_coef = list(u_coef) if dynamical_multipliers else [ctx.zero()] * k
            rec = StageRecord(stage + 1, psi.index, psi.expr, cand, full - cand, "")
            trace.append(rec)
            new_rows.append((_Row(u_coef, cand, xi_coef, psi.index), rec))
        pivots, free_rows = _eliminate([r for _, r in pivots] + [r for r, _ in new_rows], k)
        for _, rec in new_rows:
            rec.outcome = "multiplier_equation"
        frontier = []
        for row in free_rows:
            rec = next((rc for r, rc in new_rows if r is row), None)
            expr = row.const
            if any(x for x in row.xi_coef) or surface.is_weakly_zero(expr):
                if rec is not None:
                    rec.outcome = "weakly_zero"
                continue
            c = Constraint(expr, stage + 1, row.index)
            constraints.append(c)
            frontier.append(c)
            surface.add(expr)
            if rec is not None:
                rec.outcome = "new_constraint"
        stage += 1

    surface = ConstraintSurface.from_constraints(ctx, [c.expr for c in constraints])
    multipliers = _back_substitute(pivots, k, ctx)

    # total Hamiltonian; free multipliers (first-class directions) are set to zero
    total = RationalFunction(htilde)
    for m, p in zip(multipliers, prim):
        if m.value is not None:
            total = total + m.value * p.expr
    xi_cancels = None
    if dynamical_multipliers:
        xi_cancels = True
        for b, pb_ in enumerate(prim):
            coef = RationalFunction(pb_.expr)
            for m, p in zip(multipliers, prim):
                coef = coef + m.xi_coef[b] * p.expr
            if not coef.is_zero:
                xi_cancels = False

    exprs = [c.expr for c in constraints]
    C = constraint_matrix(exprs, ctx)
    second = _second_class_subset(C, surface)
    for i, c in enumerate(constraints):
        if i in second:
            c.classification = "second_class"
        elif surface.complete and all(surface.is_weakly_zero(C[i][j]) for j in range(len(constraints))):
            c.classification = "first_class"
        else:
            c.classification = "undetermined"

    C_inv = d = adj = None
    if second:
        sub = [[C[i][j] for j in second] for i in second]
        d = det(sub)
        adj = adjugate(sub)
        C_inv = [[RationalFunction(x, d) for x in row] for row in adj]

    return ConstraintAnalysis(
        ctx=ctx,
        hamiltonian=H,
        htilde=htilde,
        psi=ConstraintSet(constraints),
        C=C,
        second_class=second,
        C_inv=C_inv,
        det=d,
        adj=adj,
        multipliers=multipliers,
        total_hamiltonian=total,
        surface=surface,
        trace=trace,
        include_ghosts=include_ghosts,
        dynamical_multipliers=dynamical_multipliers,
        xi_cancels=xi_cancels,
        hbar_value=hv,
    )


def _weakly_nonzero(x: GradedPolynomial, surface: ConstraintSurface) -> bool:
    if x.is_zero:
        return False
    try:
        return not surface.is_weakly_zero(x)
    except ZeroDivisionError:
        return True


def _second_class_subset(C: list[list[GradedPolynomial]], surface: ConstraintSurface) -> list[int]:
    """Largest index set whose principal submatrix is invertible on the surface."""
    size = len(C)
    for k in range(size - size % 2, 0, -2):
        for subset in itertools.combinations(range(size), k):
            sub = [[C[i][j] for j in subset] for i in subset]
            if _weakly_nonzero(det(sub), surface):
                return list(subset)
    return []


def constraint_matrix(psi: Union[ConstraintSet, Sequence[GradedPolynomial]], ctx: SymplecticContext | None = None) -> list[list[GradedPolynomial]]:
    exprs = psi.exprs if isinstance(psi, ConstraintSet) else list(psi)
    ctx = ctx or exprs[0].ctx
    size = len(exprs)
    C = [[ctx.zero()] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            v = epb(exprs[i], exprs[j], ctx)
            C[i][j] = v
            # bosonic constraints are even: plain antisymmetry
            C[j][i] = -v if exprs[i].parity == 0 and exprs[j].parity == 0 else epb(exprs[j], exprs[i], ctx)
        if exprs[i].parity != 0:
            C[i][i] = epb(exprs[i], exprs[i], ctx)
    return C


def invert_constraint_matrix(C: Sequence[Sequence[GradedPolynomial]]) -> list[list[RationalFunction]]:
    """Adjugate over determinant; a zero determinant signals first-class constraints."""
    if not C:
        return []
    d = det(C)
    if d.is_zero:
        raise FirstClassConstraintError(
            "constraint matrix is singular: first-class constraints present (gauge fixing is not supported)"
        )
    return [[RationalFunction(x, d) for x in row] for row in adjugate(C)]


def dirac_bracket(F: Expr, G: Expr, analysis: ConstraintAnalysis, ctx: SymplecticContext | None = None, on_shell: bool = True) -> RationalFunction:
    """``{F,G}_epb - {F,Psi_a}_epb C^{ab} {Psi_b,G}_epb`` over the second-class set.

    With ``on_shell`` the result is evaluated on the constraint surface.
    """
    ctx = ctx or analysis.ctx
    base = RationalFunction.lift(epb(F, G, ctx), ctx)
    if analysis.second_class:
        psi = [analysis.psi[i].expr for i in analysis.second_class]
        left = [RationalFunction.lift(epb(F, p, ctx), ctx) for p in psi]
        right = [RationalFunction.lift(epb(p, G, ctx), ctx) for p in psi]
        corr = RationalFunction(ctx.zero())
        for a, la in enumerate(left):
            if la.is_zero:
                continue
            for b, rb in enumerate(right):
                w = analysis.adj[a][b]
                if w and not rb.is_zero:
                    corr = corr + la * w * rb
        if not corr.is_zero:
            base = base - corr / analysis.det
    if on_shell:
        base = analysis.surface.reduce(base)
    return base


@dataclass
class EvolutionResult:
    observable: GradedPolynomial
    value: RationalFunction
    value_with_htilde: RationalFunction
    htilde_equivalence: bool

    @property
    def lambda_free(self) -> bool:
        return not any(self.value.depends_on(Variable.lam(a)) for a in range(self.observable.ctx.dim))


def constrained_evolution(F: GradedPolynomial, analysis: ConstraintAnalysis, ctx: SymplecticContext | None = None) -> EvolutionResult:
    """``{F, H~_T}_edb`` on the surface, checked against ``{F, H~}_edb``."""
    ctx = ctx or analysis.ctx
    with_total = dirac_bracket(F, analysis.total_hamiltonian, analysis, ctx)
    with_htilde = dirac_bracket(F, analysis.htilde, analysis, ctx)
    return EvolutionResult(F, with_total, with_htilde, with_total == with_htilde)


@dataclass
class ComparisonReport:
    hamiltonian: GradedPolynomial
    observable: GradedPolynomial
    order: int | None
    constrained: RationalFunction
    moyal: GradedPolynomial
    difference: RationalFunction
    lambda_content: RationalFunction
    equal: bool
    htilde_equivalence: bool
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "equal" if self.equal else "different"


def _split_lambda(r: RationalFunction) -> tuple[RationalFunction, RationalFunction]:
    ctx = r.ctx
    d = ctx.dim
    lam_slots = range(d, 2 * d)
    if any(r.den.depends_on(Variable.lam(a)) for a in range(d)):
        return RationalFunction(ctx.zero()), r
    free = {k: v for k, v in r.num.terms.items() if not any(k[0][s] for s in lam_slots)}
    bearing = {k: v for k, v in r.num.terms.items() if any(k[0][s] for s in lam_slots)}
    return (
        RationalFunction(GradedPolynomial(ctx, free), r.den),
        RationalFunction(GradedPolynomial(ctx, bearing), r.den),
    )


def compare_evolutions(
    H: GradedPolynomial,
    F: GradedPolynomial,
    ctx: SymplecticContext | None = None,
    order: int | None = None,
    analysis: ConstraintAnalysis | None = None,
) -> ComparisonReport:
    """Constrained evolution of ``F`` against its Moyal evolution ``{F, H}_mb``.

    Both are put in the convention of the classical flow ``dF/dt = {F, H}``.
    Any lambda-bearing remainder of the difference is reported separately;
    the verdict is "equal" only when both parts vanish.
    """
    ctx = ctx or H.ctx
    if analysis is None:
        analysis = consistency_iteration(H, ctx)
    ev = constrained_evolution(F, analysis, ctx)
    quantum = moyal(F, H, ctx, order)
    if analysis.hbar_value is not None:
        quantum = quantum.subs_value(Variable.hbar(), analysis.hbar_value)
    diff = ev.value - quantum
    free, bearing = _split_lambda(diff)
    notes = []
    if not bearing.is_zero:
        notes.append("difference carries lambda-dependent terms after reduction; reported in lambda_content")
    return ComparisonReport(
        hamiltonian=H,
        observable=F,
        order=order,
        constrained=ev.value,
        moyal=quantum,
        difference=free,
        lambda_content=bearing,
        equal=free.is_zero and bearing.is_zero,
        htilde_equivalence=ev.htilde_equivalence,
        notes=notes,
    )
