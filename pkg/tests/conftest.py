from __future__ import annotations

import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from moyaldirac import GradedPolynomial, Scalar, SymplecticContext

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CTX1 = SymplecticContext.standard(1)
CTX2 = SymplecticContext.standard(2)


@pytest.fixture
def ctx():
    return CTX1


@pytest.fixture
def ctx2():
    return CTX2


def scalars(gaussian: bool = True):
    small = st.fractions(min_value=-4, max_value=4, max_denominator=4)
    if not gaussian:
        return small.map(Scalar)
    return st.tuples(small, st.sampled_from([Fraction(0)] * 3 + [Fraction(1), Fraction(-1, 2)])).map(
        lambda t: Scalar(*t)
    )


@st.composite
def polynomials(
    draw,
    ctx: SymplecticContext = CTX1,
    *,
    phi: bool = True,
    lam: bool = False,
    hbar: bool = False,
    ghosts: bool = False,
    max_terms: int = 4,
    max_exp: int = 3,
    max_degree: int | None = None,
    gaussian: bool = True,
    parity: int | None = None,
) -> GradedPolynomial:
    """Random polynomial over the requested generators."""
    d = ctx.dim
    slots: list[int] = []
    if phi:
        slots += list(range(d))
    if lam:
        slots += list(range(d, 2 * d))
    if hbar:
        slots.append(ctx.hbar_slot)
    ghost_ids = list(range(2 * d)) if ghosts else []
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = [0] * ctx.n_commuting
        budget = max_degree if max_degree is not None else 10**6
        for s in slots:
            e = draw(st.integers(0, min(max_exp, budget)))
            exps[s] = e
            budget -= e
        gs: tuple[int, ...] = ()
        if ghost_ids:
            gs = tuple(sorted(draw(st.sets(st.sampled_from(ghost_ids), max_size=3))))
        if parity is not None and len(gs) % 2 != parity:
            continue
        terms[(tuple(exps), gs)] = draw(scalars(gaussian))
    return GradedPolynomial(ctx, terms)


@st.composite
def monomials(draw, ctx: SymplecticContext = CTX1, *, ghosts: bool = True) -> GradedPolynomial:
    """Single term with unit-ish coefficient, any generators."""
    return draw(
        polynomials(ctx, lam=True, hbar=True, ghosts=ghosts, max_terms=1, max_exp=2).filter(lambda p: len(p) == 1)
    )


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
