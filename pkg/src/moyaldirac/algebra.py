"""Exact graded polynomial algebra on extended phase space.

The commuting generators are the phase-space coordinates ``phi^a`` (``q``
then ``p``), their conjugates ``lambda_a`` and a formal ``hbar``.  The
anticommuting generators are the ghosts ``c^a`` and ``cbar_a``.  A monomial
key is a pair ``(exponents, ghosts)`` where ``exponents`` has one slot per
commuting generator and ``ghosts`` is a strictly increasing tuple of ghost
ids in the global order ``c^0 < c^1 < ... < cbar_0 < cbar_1 < ...``.
"""

from __future__ import annotations

import enum
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

from .scalar import Scalar, as_scalar

__all__ = [
    "AlgebraError",
    "ContextMismatchError",
    "VarKind",
    "Variable",
    "SymplecticContext",
    "GradedPolynomial",
    "RationalFunction",
    "Key",
]

Key = tuple[tuple[int, ...], tuple[int, ...]]
Number = Union[Scalar, int, Fraction]


class AlgebraError(ValueError):
    pass


class ContextMismatchError(AlgebraError):
    pass


class VarKind(enum.Enum):
    PHI = "phi"
    LAMBDA = "lambda"
    GHOST_C = "ghost_c"
    GHOST_CBAR = "ghost_cbar"
    HBAR = "hbar"

    @property
    def odd(self) -> bool:
        return self in (VarKind.GHOST_C, VarKind.GHOST_CBAR)


@dataclass(frozen=True, order=True)
class Variable:
    kind: VarKind
    index: int = 0

    @property
    def parity(self) -> int:
        return 1 if self.kind.odd else 0

    @classmethod
    def phi(cls, a: int) -> Variable:
        return cls(VarKind.PHI, a)

    @classmethod
    def lam(cls, a: int) -> Variable:
        return cls(VarKind.LAMBDA, a)

    @classmethod
    def c(cls, a: int) -> Variable:
        return cls(VarKind.GHOST_C, a)

    @classmethod
    def cbar(cls, a: int) -> Variable:
        return cls(VarKind.GHOST_CBAR, a)

    @classmethod
    def hbar(cls) -> Variable:
        return cls(VarKind.HBAR, 0)


def _fraction_det(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, size):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


@dataclass(frozen=True, eq=False)
class SymplecticContext:
    """Dimension ``n`` and the Poisson tensor ``omega^{ab}`` on phase space.

    Indices ``0..n-1`` are the ``q`` coordinates, ``n..2n-1`` the ``p``.
    """

    n: int
    omega: tuple[tuple[Fraction, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise AlgebraError("n must be positive")
        if not self.omega:
            object.__setattr__(self, "omega", _standard_omega(self.n))
        om = tuple(tuple(Fraction(x) for x in row) for row in self.omega)
        object.__setattr__(self, "omega", om)
        d = 2 * self.n
        if len(om) != d or any(len(row) != d for row in om):
            raise AlgebraError(f"omega must be {d}x{d}")
        for a in range(d):
            for b in range(d):
                if om[a][b] != -om[b][a]:
                    raise AlgebraError("omega must be antisymmetric")
        if _fraction_det([list(r) for r in om]) == 0:
            raise AlgebraError("omega must be invertible")

    @classmethod
    def standard(cls, n: int = 1) -> SymplecticContext:
        return cls(n)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, SymplecticContext):
            return NotImplemented
        return self.n == other.n and self.omega == other.omega

    def __hash__(self) -> int:
        return hash((self.n, self.omega))

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def n_commuting(self) -> int:
        return 4 * self.n + 1

    @property
    def hbar_slot(self) -> int:
        return 4 * self.n

    def slot(self, v: Variable) -> int:
        """Exponent slot of a commuting variable."""
        if v.kind is VarKind.PHI:
            return self._check(v.index)
        if v.kind is VarKind.LAMBDA:
            return 2 * self.n + self._check(v.index)
        if v.kind is VarKind.HBAR:
            return 4 * self.n
        raise AlgebraError(f"{v} is not a commuting variable")

    def ghost_id(self, v: Variable) -> int:
        if v.kind is VarKind.GHOST_C:
            return self._check(v.index)
        if v.kind is VarKind.GHOST_CBAR:
            return 2 * self.n + self._check(v.index)
        raise AlgebraError(f"{v} is not a ghost")

    def _check(self, a: int) -> int:
        if not 0 <= a < 2 * self.n:
            raise AlgebraError(f"index {a} out of range for n={self.n}")
        return a

    def slot_variable(self, s: int) -> Variable:
        d = 2 * self.n
        if s < d:
            return Variable.phi(s)
        if s < 2 * d:
            return Variable.lam(s - d)
        return Variable.hbar()

    def ghost_variable(self, g: int) -> Variable:
        d = 2 * self.n
        return Variable.c(g) if g < d else Variable.cbar(g - d)

    @cached_property
    def omega_entries(self) -> tuple[tuple[int, int, Fraction], ...]:
        """Nonzero ``(a, b, omega^{ab})`` triples."""
        d = self.dim
        return tuple(
            (a, b, self.omega[a][b]) for a in range(d) for b in range(d) if self.omega[a][b]
        )

    # naming -------------------------------------------------------------
    @cached_property
    def slot_names(self) -> tuple[str, ...]:
        n = self.n
        if n == 1:
            phi = ["q", "p"]
        else:
            phi = [f"q{i}" for i in range(n)] + [f"p{i}" for i in range(n)]
        return tuple(phi + [f"l_{x}" for x in phi] + ["hbar"])

    @cached_property
    def ghost_names(self) -> tuple[str, ...]:
        d = self.dim
        return tuple([f"c{a}" for a in range(d)] + [f"cb{a}" for a in range(d)])

    @cached_property
    def name_table(self) -> Mapping[str, Variable]:
        """Every accepted spelling, including the ``q0``/``p0`` aliases for n=1."""
        table: dict[str, Variable] = {}
        for s, name in enumerate(self.slot_names):
            table[name] = self.slot_variable(s)
        for g, name in enumerate(self.ghost_names):
            table[name] = self.ghost_variable(g)
        if self.n == 1:
            for alias, canon in (("q0", "q"), ("p0", "p"), ("l_q0", "l_q"), ("l_p0", "l_p")):
                table[alias] = table[canon]
        return table

    def name(self, v: Variable) -> str:
        if v.kind.odd:
            return self.ghost_names[self.ghost_id(v)]
        return self.slot_names[self.slot(v)]

    # polynomial constructors ---------------------------------------------
    def zero(self) -> GradedPolynomial:
        return GradedPolynomial(self)

    def one(self) -> GradedPolynomial:
        return self.const(1)

    def const(self, value: Number) -> GradedPolynomial:
        value = as_scalar(value)
        if not value:
            return self.zero()
        return GradedPolynomial(self, {self.unit_key: value}, _trusted=True)

    @cached_property
    def unit_key(self) -> Key:
        return ((0,) * self.n_commuting, ())

    def var(self, v: Variable | str) -> GradedPolynomial:
        if isinstance(v, str):
            try:
                v = self.name_table[v]
            except KeyError:
                raise AlgebraError(f"unknown variable {v!r}") from None
        if v.kind.odd:
            return GradedPolynomial(
                self, {((0,) * self.n_commuting, (self.ghost_id(v),)): Scalar(1)}, _trusted=True
            )
        exps = [0] * self.n_commuting
        exps[self.slot(v)] = 1
        return GradedPolynomial(self, {(tuple(exps), ()): Scalar(1)}, _trusted=True)

    def phi(self, a: int) -> GradedPolynomial:
        return self.var(Variable.phi(a))

    def lam(self, a: int) -> GradedPolynomial:
        return self.var(Variable.lam(a))

    def c(self, a: int) -> GradedPolynomial:
        return self.var(Variable.c(a))

    def cbar(self, a: int) -> GradedPolynomial:
        return self.var(Variable.cbar(a))

    @property
    def hbar(self) -> GradedPolynomial:
        return self.var(Variable.hbar())


def _standard_omega(n: int) -> tuple[tuple[Fraction, ...], ...]:
    d = 2 * n
    om = [[Fraction(0)] * d for _ in range(d)]
    for i in range(n):
        om[i][n + i] = Fraction(1)
        om[n + i][i] = Fraction(-1)
    return tuple(tuple(r) for r in om)


def _merge_ghosts(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign and canonical order of the ghost product ``a * b`` (sign 0 if nilpotent)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    inversions = 0
    for y in b:
        pos = bisect_left(a, y)
        if pos < len(a) and a[pos] == y:
            return 0, ()
        inversions += len(a) - pos
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


class GradedPolynomial:
    """Sparse polynomial in commuting and anticommuting generators.

    Values are immutable once built; every operation returns a new object.
    """

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(
        self,
        ctx: SymplecticContext,
        terms: Mapping[Key, Number] | None = None,
        *,
        _trusted: bool = False,
    ) -> None:
        self.ctx = ctx
        if _trusted:
            self.terms: dict[Key, Scalar] = dict(terms) if terms else {}
        else:
            clean: dict[Key, Scalar] = {}
            for (exps, ghosts), coef in (terms or {}).items():
                coef = as_scalar(coef)
                if not coef:
                    continue
                if len(exps) != ctx.n_commuting or any(e < 0 for e in exps):
                    raise AlgebraError(f"bad exponent vector {exps}")
                if list(ghosts) != sorted(set(ghosts)):
                    raise AlgebraError("ghost tuple must be strictly increasing")
                clean[(tuple(exps), tuple(ghosts))] = coef
            self.terms = clean
        self._hash: int | None = None

    # basic protocol -------------------------------------------------------
    def _coerce(self, other: object) -> GradedPolynomial:
        if isinstance(other, GradedPolynomial):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatchError("polynomials belong to different contexts")
            return other
        if isinstance(other, (Scalar, int, Fraction)):
            return self.ctx.const(other)
        raise TypeError(f"cannot combine GradedPolynomial with {type(other).__name__}")

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalFunction):
            return other == self
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Key, Scalar]]:
        return iter(self.sorted_terms())

    def __repr__(self) -> str:
        return f"GradedPolynomial({format_canonical(self)!r})"

    def __str__(self) -> str:
        return format_canonical(self)

    # arithmetic -------------------------------------------------------------
    def __neg__(self) -> GradedPolynomial:
        return GradedPolynomial(self.ctx, {k: -v for k, v in self.terms.items()}, _trusted=True)

    def __add__(self, other: object) -> GradedPolynomial:
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = self._coerce(other)
        out = dict(self.terms)
        for k, v in o.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = v
            else:
                s = s + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return GradedPolynomial(self.ctx, out, _trusted=True)

    __radd__ = __add__

    def __sub__(self, other: object) -> GradedPolynomial:
        if isinstance(other, RationalFunction):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other: object) -> GradedPolynomial:
        return self._coerce(other) - self

    def __mul__(self, other: object) -> GradedPolynomial:
        if isinstance(other, RationalFunction):
            return NotImplemented
        if isinstance(other, (Scalar, int, Fraction)):
            s = as_scalar(other)
            if not s:
                return self.ctx.zero()
            return GradedPolynomial(self.ctx, {k: v * s for k, v in self.terms.items()}, _trusted=True)
        o = self._coerce(other)
        out: dict[Key, Scalar] = {}
        for (ea, ga), ca in self.terms.items():
            for (eb, gb), cb in o.terms.items():
                sign, g = _merge_ghosts(ga, gb)
                if not sign:
                    continue
                k = (tuple(x + y for x, y in zip(ea, eb)), g)
                c = ca * cb
                if sign < 0:
                    c = -c
                s = out.get(k)
                if s is None:
                    out[k] = c
                else:
                    s = s + c
                    if s:
                        out[k] = s
                    else:
                        del out[k]
        return GradedPolynomial(self.ctx, out, _trusted=True)

    def __rmul__(self, other: object) -> GradedPolynomial:
        # scalars are even, so left and right scalar multiplication agree
        return self.__mul__(other)

    def __truediv__(self, other: object) -> GradedPolynomial:
        if isinstance(other, (Scalar, int, Fraction)):
            return self * (Scalar(1) / as_scalar(other))
        return NotImplemented

    def __pow__(self, k: int) -> GradedPolynomial:
        if not isinstance(k, int) or k < 0:
            raise AlgebraError("only non-negative integer powers are defined")
        out = self.ctx.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # structure ----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Key, Scalar]]:
        """Terms in the canonical total order (graded, then lex, descending)."""
        return sorted(self.terms.items(), key=lambda kv: _order_key(kv[0]))

    @property
    def is_constant(self) -> bool:
        return all(k == self.ctx.unit_key for k in self.terms)

    def constant_value(self) -> Scalar:
        return self.terms.get(self.ctx.unit_key, Scalar(0))

    @property
    def parity(self) -> int | None:
        """Grassmann parity when homogeneous, else ``None`` (zero counts as even)."""
        ps = {len(g) & 1 for (_, g) in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    @property
    def is_ghost_free(self) -> bool:
        return all(not g for (_, g) in self.terms)

    def bosonic(self) -> GradedPolynomial:
        """Drop every term carrying a ghost."""
        return GradedPolynomial(
            self.ctx, {k: v for k, v in self.terms.items() if not k[1]}, _trusted=True
        )

    def kinds(self) -> set[VarKind]:
        ctx = self.ctx
        out: set[VarKind] = set()
        for exps, ghosts in self.terms:
            for s, e in enumerate(exps):
                if e:
                    out.add(ctx.slot_variable(s).kind)
            for g in ghosts:
                out.add(ctx.ghost_variable(g).kind)
        return out

    def depends_on(self, v: Variable) -> bool:
        if v.kind.odd:
            g = self.ctx.ghost_id(v)
            return any(g in gh for (_, gh) in self.terms)
        s = self.ctx.slot(v)
        return any(exps[s] for (exps, _) in self.terms)

    def degree(self) -> int:
        """Total degree counting every generator (ghosts and hbar included)."""
        return max((sum(e) + len(g) for (e, g) in self.terms), default=-1)

    def phi_degree(self) -> int:
        d = self.ctx.dim
        return max((sum(e[:d]) for (e, _) in self.terms), default=-1)

    def lambda_degree(self) -> int:
        d = self.ctx.dim
        return max((sum(e[d : 2 * d]) for (e, _) in self.terms), default=-1)

    def degree_in(self, v: Variable) -> int:
        s = self.ctx.slot(v)
        return max((e[s] for (e, _) in self.terms), default=-1)

    def hbar_degree(self) -> int:
        s = self.ctx.hbar_slot
        return max((e[s] for (e, _) in self.terms), default=-1)

    def collect(self, v: Variable) -> dict[int, GradedPolynomial]:
        """Split by powers of a commuting variable: ``f = sum_k out[k] * v^k``."""
        s = self.ctx.slot(v)
        parts: dict[int, dict[Key, Scalar]] = {}
        for (exps, ghosts), c in self.terms.items():
            k = exps[s]
            stripped = exps[:s] + (0,) + exps[s + 1 :]
            parts.setdefault(k, {})[(stripped, ghosts)] = c
        return {k: GradedPolynomial(self.ctx, t, _trusted=True) for k, t in parts.items()}

    def hbar_coefficient(self, k: int) -> GradedPolynomial:
        return self.collect(Variable.hbar()).get(k, self.ctx.zero())

    def truncate_hbar(self, order: int) -> GradedPolynomial:
        if order < 0:
            raise AlgebraError("truncation order must be >= 0")
        s = self.ctx.hbar_slot
        return GradedPolynomial(
            self.ctx, {k: v for k, v in self.terms.items() if k[0][s] <= order}, _trusted=True
        )

    # calculus -----------------------------------------------------------
    def derivative(self, v: Variable) -> GradedPolynomial:
        """Partial derivative; ghosts use the left derivative."""
        if v.kind.odd:
            return self._ghost_derivative(v, left=True)
        s = self.ctx.slot(v)
        out: dict[Key, Scalar] = {}
        for (exps, ghosts), c in self.terms.items():
            e = exps[s]
            if e:
                out[(exps[:s] + (e - 1,) + exps[s + 1 :], ghosts)] = c * e
        return GradedPolynomial(self.ctx, out, _trusted=True)

    def right_derivative(self, v: Variable) -> GradedPolynomial:
        if v.kind.odd:
            return self._ghost_derivative(v, left=False)
        return self.derivative(v)

    def _ghost_derivative(self, v: Variable, left: bool) -> GradedPolynomial:
        g = self.ctx.ghost_id(v)
        out: dict[Key, Scalar] = {}
        for (exps, ghosts), c in self.terms.items():
            if g not in ghosts:
                continue
            pos = ghosts.index(g)
            moves = pos if left else len(ghosts) - 1 - pos
            out[(exps, ghosts[:pos] + ghosts[pos + 1 :])] = -c if moves & 1 else c
        return GradedPolynomial(self.ctx, out, _trusted=True)

    def diff(self, *vs: Variable) -> GradedPolynomial:
        out = self
        for v in vs:
            out = out.derivative(v)
        return out

    # substitution -------------------------------------------------------
    def subs_value(self, v: Variable, value: Number) -> GradedPolynomial:
        """Replace a commuting variable by an exact number."""
        s = self.ctx.slot(v)
        value = as_scalar(value)
        acc: dict[Key, Scalar] = {}
        for (exps, ghosts), c in self.terms.items():
            k = (exps[:s] + (0,) + exps[s + 1 :], ghosts)
            acc[k] = acc.get(k, Scalar(0)) + c * value ** exps[s]
        return GradedPolynomial(self.ctx, {k: c for k, c in acc.items() if c}, _trusted=True)

    def subs(self, v: Variable, value: GradedPolynomial) -> GradedPolynomial:
        """Replace a commuting variable by an even polynomial."""
        if value.parity not in (0,):
            raise AlgebraError("only even polynomials may be substituted for commuting variables")
        parts = self.collect(v)
        out = self.ctx.zero()
        for k in sorted(parts):
            out = out + parts[k] * value**k
        return out


def _order_key(key: Key) -> tuple:
    exps, ghosts = key
    return (-(sum(exps) + len(ghosts)), tuple(-e for e in exps), tuple(-1 - g for g in ghosts))


def format_canonical(f: GradedPolynomial) -> str:
    """Deterministic text form, readable back by :func:`moyaldirac.parsing.parse`."""
    if not f.terms:
        return "0"
    ctx = f.ctx
    pieces: list[str] = []
    for i, ((exps, ghosts), coef) in enumerate(f.sorted_terms()):
        factors = []
        for s, e in enumerate(exps):
            if e:
                name = ctx.slot_names[s]
                factors.append(name if e == 1 else f"{name}^{e}")
        factors.extend(ctx.ghost_names[g] for g in ghosts)
        negative = coef.re < 0 or (coef.re == 0 and coef.im < 0)
        mag = -coef if negative else coef
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
        else:
            body = str(mag)
        if i == 0:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)


# ---------------------------------------------------------------------------
# exact division over the commuting subring


def _lex_leading(terms: Mapping[Key, Scalar]) -> Key:
    return max(terms, key=lambda k: k[0])


def poly_divmod(f: GradedPolynomial, g: GradedPolynomial) -> tuple[GradedPolynomial, GradedPolynomial]:
    """Multivariate division of ``f`` by a single ghost-free ``g`` (lex order).

    With a single divisor the remainder is zero exactly when ``g`` divides ``f``.
    """
    if g.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if not g.is_ghost_free:
        raise AlgebraError("divisor must be ghost-free")
    ctx = f.ctx
    lk = _lex_leading(g.terms)
    lead_e, lead_c = lk[0], g.terms[lk]
    quot: dict[Key, Scalar] = {}
    rem: dict[Key, Scalar] = {}
    work = dict(f.terms)
    while work:
        k = max(work, key=lambda kk: (kk[0], tuple(-x for x in kk[1])))
        exps, ghosts = k
        c = work[k]
        if all(x >= y for x, y in zip(exps, lead_e)):
            qe = tuple(x - y for x, y in zip(exps, lead_e))
            qc = c / lead_c
            quot[(qe, ghosts)] = quot.get((qe, ghosts), Scalar(0)) + qc
            for (ge, _), gc in g.terms.items():
                kk = (tuple(x + y for x, y in zip(qe, ge)), ghosts)
                v = work.get(kk, Scalar(0)) - qc * gc
                if v:
                    work[kk] = v
                else:
                    work.pop(kk, None)
        else:
            rem[k] = c
            del work[k]
    q = GradedPolynomial(ctx, {k: v for k, v in quot.items() if v}, _trusted=True)
    r = GradedPolynomial(ctx, rem, _trusted=True)
    return q, r


def exact_quotient(f: GradedPolynomial, g: GradedPolynomial) -> GradedPolynomial | None:
    q, r = poly_divmod(f, g)
    return None if r else q


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """Quotient ``num/den`` with a ghost-free, nonzero denominator.

    Equality is decided by cross-multiplication.  A light normalisation is
    applied on construction: common monomial factors are cancelled, the
    denominator is made monic in lex order, and exact polynomial quotients
    collapse to ``den == 1``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: GradedPolynomial, den: GradedPolynomial | None = None, *, normalize: bool = True) -> None:
        ctx = num.ctx
        if den is None:
            den = ctx.one()
        elif den.ctx is not ctx and den.ctx != ctx:
            raise ContextMismatchError("numerator and denominator contexts differ")
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if not den.is_ghost_free:
            raise AlgebraError("denominator must be ghost-free")
        if normalize:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @property
    def ctx(self) -> SymplecticContext:
        return self.num.ctx

    @classmethod
    def lift(cls, x: object, ctx: SymplecticContext | None = None) -> RationalFunction:
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, GradedPolynomial):
            return cls(x, normalize=False)
        if ctx is None:
            raise TypeError("context required to lift a number")
        return cls(ctx.const(x), normalize=False)

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_constant

    def as_polynomial(self) -> GradedPolynomial:
        if self.den.is_constant:
            return self.num / self.den.constant_value()
        q = exact_quotient(self.num, self.den)
        if q is None:
            raise AlgebraError(f"{self} is not a polynomial")
        return q

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self) -> bool:
        return not self.num.is_zero

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (GradedPolynomial, Scalar, int, Fraction)):
            other = RationalFunction.lift(other, self.ctx)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero

    __hash__ = None  # type: ignore[assignment]

    def __neg__(self) -> RationalFunction:
        return RationalFunction(-self.num, self.den, normalize=False)

    def _lift(self, other: object) -> RationalFunction:
        return RationalFunction.lift(other, self.ctx)

    def __add__(self, other: object) -> RationalFunction:
        o = self._lift(other)
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other: object) -> RationalFunction:
        return self + (-self._lift(other))

    def __rsub__(self, other: object) -> RationalFunction:
        return self._lift(other) - self

    def __mul__(self, other: object) -> RationalFunction:
        o = self._lift(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    def __rmul__(self, other: object) -> RationalFunction:
        o = self._lift(other)
        return RationalFunction(o.num * self.num, o.den * self.den)

    def __truediv__(self, other: object) -> RationalFunction:
        o = self._lift(other)
        if o.is_zero:
            raise ZeroDivisionError("division by zero rational function")
        if not o.num.is_ghost_free:
            raise AlgebraError("cannot divide by a ghost-bearing expression")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: object) -> RationalFunction:
        return self._lift(other) / self

    def derivative(self, v: Variable) -> RationalFunction:
        if v.kind.odd:
            return RationalFunction(self.num.derivative(v), self.den)
        return RationalFunction(
            self.num.derivative(v) * self.den - self.num * self.den.derivative(v), self.den * self.den
        )

    def right_derivative(self, v: Variable) -> RationalFunction:
        if v.kind.odd:
            return RationalFunction(self.num.right_derivative(v), self.den)
        return self.derivative(v)

    def bosonic(self) -> RationalFunction:
        return RationalFunction(self.num.bosonic(), self.den)

    def truncate_hbar(self, order: int) -> RationalFunction:
        if not self.den.is_constant:
            raise AlgebraError("hbar truncation needs a polynomial")
        return RationalFunction(self.num.truncate_hbar(order), self.den)

    def subs(self, v: Variable, value: RationalFunction | GradedPolynomial) -> RationalFunction:
        """Substitute ``v -> N/D`` by homogenising both numerator and denominator."""
        value = self._lift(value)
        d = max(self.num.degree_in(v), self.den.degree_in(v), 0)
        if d == 0:
            return self
        npow = [self.ctx.one()]
        dpow = [self.ctx.one()]
        for _ in range(d):
            npow.append(npow[-1] * value.num)
            dpow.append(dpow[-1] * value.den)

        def hom(f: GradedPolynomial) -> GradedPolynomial:
            out = self.ctx.zero()
            for k, part in f.collect(v).items():
                out = out + part * npow[k] * dpow[d - k]
            return out

        den = hom(self.den)
        if den.is_zero:
            raise ZeroDivisionError(f"denominator vanishes after substituting {self.ctx.name(v)}")
        return RationalFunction(hom(self.num), den)

    def subs_value(self, v: Variable, value: Number) -> RationalFunction:
        den = self.den.subs_value(v, value)
        if den.is_zero:
            raise ZeroDivisionError("denominator vanishes after numeric substitution")
        return RationalFunction(self.num.subs_value(v, value), den)

    def depends_on(self, v: Variable) -> bool:
        return self.num.depends_on(v) or self.den.depends_on(v)

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"

    def __str__(self) -> str:
        if self.den.is_constant:
            c = self.den.constant_value()
            return format_canonical(self.num if c == 1 else self.num / c)
        return f"({format_canonical(self.num)})/({format_canonical(self.den)})"


def _monomial_gcd(polys: Iterable[GradedPolynomial], width: int) -> tuple[int, ...]:
    low: list[int] | None = None
    for f in polys:
        for exps, _ in f.terms:
            if low is None:
                low = list(exps)
            else:
                low = [min(a, b) for a, b in zip(low, exps)]
    return tuple(low) if low else (0,) * width


def _shift(f: GradedPolynomial, by: tuple[int, ...]) -> GradedPolynomial:
    return GradedPolynomial(
        f.ctx,
        {(tuple(x - y for x, y in zip(e, by)), g): c for (e, g), c in f.terms.items()},
        _trusted=True,
    )


def _normalize(num: GradedPolynomial, den: GradedPolynomial) -> tuple[GradedPolynomial, GradedPolynomial]:
    ctx = num.ctx
    if num.is_zero:
        return num, ctx.one()
    if den.is_constant:
        return num / den.constant_value(), ctx.one()
    common = _monomial_gcd((num, den), ctx.n_commuting)
    if any(common):
        num, den = _shift(num, common), _shift(den, common)
    lead = den.terms[_lex_leading(den.terms)]
    if lead != 1:
        inv = Scalar(1) / lead
        num, den = num * inv, den * inv
    if den.is_constant:
        return num, ctx.one()
    q = exact_quotient(num, den)
    if q is not None:
        return q, ctx.one()
    if num.is_ghost_free:
        q = exact_quotient(den, num)
        if q is not None:
            lead = q.terms[_lex_leading(q.terms)]
            return ctx.const(Scalar(1) / lead), q / lead
    return num, den
