"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line; the lines are
collected and repeated in the terminal summary.  Run directly with
``python tests/test_acceptance.py`` for just the lines.
"""

from __future__ import annotations

import json
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path


from moyaldirac import GradedPolynomial, Scalar, SymplecticContext, Variable, format_canonical, parse
from moyaldirac.brackets import epb, moyal, pb
from moyaldirac.dirac import (
    MaxStagesExceeded,
    compare_evolutions,
    consistency_iteration,
    constrained_evolution,
    dirac_bracket,
)
from moyaldirac.lift import lift_classical, lift_moyal, match_coefficients, monomial_basis, substitute_operator
from moyaldirac.report import RunConfig, build_report, comparable, to_json
from moyaldirac.wigner import (
    HermiteState,
    check_normalization,
    marginal_error,
    quantisation_rule_check,
    wavefunction_grid,
    wigner_transform,
)

CTX = SymplecticContext.standard(1)
I = Scalar(0, 1)
MINUS_I = Scalar(0, -1)
HO_TEXT = "1/2*(p^2+q^2)"
QUARTIC_TEXT = "1/2*p^2+1/4*q^4"
GOLDEN_CONFIGS = sorted((Path(__file__).parent / "golden" / "configs").glob("*.json"))

# tolerances
WIGNER_INTEGRAL_TOL = 1e-6
WIGNER_SQ_TOL = 1e-4
WIGNER_MARGINAL_TOL = 1e-6
WIGNER_ORIGIN_TOL = 1e-3
WIGNER_IDENTITY_TOL = 1e-6
WIGNER_MISMATCH_FRACTION = 0.1
WIGNER_GRID = (1025, 257)

RESULTS: list[str] = []


def record(n: int, passed: bool, detail: str) -> None:
    line = f"[criterion {n:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert passed, line


def P(text: str) -> GradedPolynomial:
    return parse(text, CTX)


def random_poly(rng: random.Random, *, lam=False, hbar=False, max_degree=4, max_terms=4) -> GradedPolynomial:
    d = CTX.dim
    slots = list(range(d)) + (list(range(d, 2 * d)) if lam else []) + ([CTX.hbar_slot] if hbar else [])
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * CTX.n_commuting
        budget = rng.randint(0, max_degree)
        for _ in range(budget):
            exps[rng.choice(slots)] += 1
        coef = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        terms[(tuple(exps), ())] = coef
    return GradedPolynomial(CTX, terms)


def random_graded(rng: random.Random) -> GradedPolynomial:
    """Homogeneous monomial-sum over all generators, including ghosts."""
    parity = rng.randint(0, 1)
    terms = {}
    for _ in range(rng.randint(1, 3)):
        exps = [0] * CTX.n_commuting
        for _ in range(rng.randint(0, 3)):
            exps[rng.randrange(2 * CTX.dim)] += 1
        k = rng.choice([parity, parity + 2]) if parity == 0 else rng.choice([1, 3])
        ghosts = tuple(sorted(rng.sample(range(2 * CTX.dim), k)))
        terms[(tuple(exps), ghosts)] = Scalar(rng.randint(-3, 3), rng.choice([0, 0, 1]))
    return GradedPolynomial(CTX, terms)


def liouville(H: GradedPolynomial, F: GradedPolynomial, a: Fraction = Fraction(1)) -> GradedPolynomial:
    """``a * dH/dp dF/dq - dH/dq dF/dp`` written out by hand."""
    q, p = Variable.phi(0), Variable.phi(1)
    return H.derivative(p) * F.derivative(q) * a - H.derivative(q) * F.derivative(p)


# --- 1 -----------------------------------------------------------------------------------


def test_criterion_01_harmonic_oscillator():
    start = time.perf_counter()
    an = consistency_iteration(P(HO_TEXT), CTX)
    basis = monomial_basis(CTX, 4)
    bad = []
    for F in basis:
        expected = P("p") * F.derivative(Variable.phi(0)) - P("q") * F.derivative(Variable.phi(1))
        if constrained_evolution(F, an).value != expected:
            bad.append(format_canonical(F))
    elapsed = time.perf_counter() - start
    record(1, not bad and elapsed < 1.0,
           f"HO edb evolution = p dF/dq - q dF/dp on {len(basis)} monomials (deg <= 4); "
           f"mismatches {bad}; {elapsed:.2f}s (limit 1s)")


# --- 2 -----------------------------------------------------------------------------------


def test_criterion_02_quartic():
    start = time.perf_counter()
    an = consistency_iteration(P(QUARTIC_TEXT), CTX)
    basis = monomial_basis(CTX, 4)
    bad = []
    for F in basis:
        expected = P("3/2*p") * F.derivative(Variable.phi(0)) - P("q^3") * F.derivative(Variable.phi(1))
        if constrained_evolution(F, an).value != expected:
            bad.append(format_canonical(F))
    elapsed = time.perf_counter() - start
    record(2, not bad and elapsed < 5.0,
           f"quartic edb evolution = 3/2 p dF/dq - q^3 dF/dp on {len(basis)} monomials; "
           f"mismatches {bad}; {elapsed:.2f}s (limit 5s)")


# --- 3 -----------------------------------------------------------------------------------


def test_criterion_03_verdicts():
    ho = P(HO_TEXT)
    an = consistency_iteration(ho, CTX)
    ho_nonzero = [format_canonical(F) for F in monomial_basis(CTX, 4)
                  if not compare_evolutions(ho, F, CTX, analysis=an).difference.is_zero]
    rep = compare_evolutions(P(QUARTIC_TEXT), P("q"), CTX)
    ok = not ho_nonzero and rep.difference == P("1/2*p") and rep.verdict == "different"
    record(3, ok, f"HO differences all 0 (nonzero: {ho_nonzero}); quartic F=q difference "
                  f"'{rep.difference}' verdict '{rep.verdict}' (expect '1/2*p', 'different')")


# --- 4 -----------------------------------------------------------------------------------


def secondary_formula(H: GradedPolynomial) -> GradedPolynomial:
    """theta(a-n)(omega^{ab} d_b H - hbar omega^{ab} lambda_e omega^{ef} d_b d_f H) for n = 1, a = p."""
    w = CTX.omega
    a = 1
    out = CTX.zero()
    for b in range(2):
        if w[a][b]:
            dbH = H.derivative(Variable.phi(b))
            out = out + dbH * w[a][b]
            for e in range(2):
                for f in range(2):
                    if w[e][f]:
                        out = out - CTX.hbar * CTX.lam(e) * dbH.derivative(Variable.phi(f)) * (w[a][b] * w[e][f])
    return out


def test_criterion_04_secondary_formula():
    rng = random.Random(4)
    mismatches = 0
    for _ in range(20):
        H = random_poly(rng, max_degree=5)
        try:
            trace = consistency_iteration(H, CTX).trace
        except MaxStagesExceeded as exc:
            trace = exc.trace
        stage1 = [r.candidate for r in trace if r.stage == 1]
        if stage1 != [secondary_formula(H)]:
            mismatches += 1
    record(4, mismatches == 0, f"stage-1 output equals the secondary-constraint formula for 20 random H "
                               f"(deg <= 5); mismatches {mismatches}")


# --- 5 -----------------------------------------------------------------------------------


def test_criterion_05_dirac_axioms():
    rng = random.Random(5)
    analyses = [consistency_iteration(P(HO_TEXT), CTX), consistency_iteration(P(QUARTIC_TEXT), CTX)]
    n = 50
    annihilation = antisymmetry = equivalence = 0
    for k in range(n):
        an = analyses[k % 2]
        F = random_poly(rng, lam=True, hbar=True, max_degree=3)
        G = random_poly(rng, lam=True, hbar=True, max_degree=3)
        if all(dirac_bracket(c.expr, F, an, on_shell=False).is_zero for c in an.psi):
            annihilation += 1
        if dirac_bracket(F, G, an, on_shell=False) == -dirac_bracket(G, F, an, on_shell=False):
            antisymmetry += 1
        obs = random_poly(rng, max_degree=4)
        ev = constrained_evolution(obs, an)
        if ev.htilde_equivalence:
            equivalence += 1
    ok = annihilation == antisymmetry == equivalence == n
    record(5, ok, f"annihilation {annihilation}/{n}, antisymmetry {antisymmetry}/{n}, "
                  f"H~_T vs H~ equivalence {equivalence}/{n}")


# --- 6 -----------------------------------------------------------------------------------


def test_criterion_06_bracket_algebra():
    rng = random.Random(6)
    d = CTX.dim
    fundamental = all(
        epb(CTX.phi(a), CTX.lam(b)) == (1 if a == b else 0)
        and epb(CTX.c(a), CTX.cbar(b)) == (MINUS_I if a == b else 0)
        for a in range(d) for b in range(d)
    )

    def s(x, y):
        return -1 if x.parity == 1 and y.parity == 1 else 1

    graded_jacobi = 0
    for _ in range(30):
        A, B, C = random_graded(rng), random_graded(rng), random_graded(rng)
        total = epb(A, epb(B, C)) * s(A, C) + epb(B, epb(C, A)) * s(B, A) + epb(C, epb(A, B)) * s(C, B)
        graded_jacobi += total.is_zero

    moyal_jacobi = 0
    for _ in range(20):
        F, G, K = (random_poly(rng, max_degree=4) for _ in range(3))
        moyal_jacobi += (moyal(F, moyal(G, K)) + moyal(G, moyal(K, F)) + moyal(K, moyal(F, G))).is_zero

    quadratic = 0
    for _ in range(20):
        A, B = random_poly(rng, max_degree=2), random_poly(rng, max_degree=4)
        quadratic += moyal(A, B) == pb(A, B)

    example = format_canonical(moyal(P("q^3"), P("p^3")))
    ok = fundamental and graded_jacobi == 30 and moyal_jacobi == 20 and quadratic == 20 and \
        example == "9*q^2*p^2 - 3/2*hbar^2"
    record(6, ok, f"epb fundamentals {fundamental}; graded Jacobi {graded_jacobi}/30; moyal Jacobi "
                  f"{moyal_jacobi}/20; moyal=pb for quadratic {quadratic}/20; moyal(q^3,p^3) = '{example}'")


# --- 7 -----------------------------------------------------------------------------------


def test_criterion_07_lift():
    rng = random.Random(7)
    flows = 0
    for _ in range(20):
        H = random_poly(rng, max_degree=5)
        Ht = lift_classical(H, CTX)
        flows += all(epb(CTX.phi(a), Ht) == pb(CTX.phi(a), H) for a in range(CTX.dim))
    ho = P(HO_TEXT)
    Ht_ho = lift_classical(ho, CTX)
    anchor = 0
    for _ in range(20):
        rho = random_poly(rng, max_degree=5)
        expected = (P("p") * rho.derivative(Variable.phi(0)) - P("q") * rho.derivative(Variable.phi(1))) * MINUS_I
        anchor += substitute_operator(Ht_ho, rho) == expected
    record(7, flows == 20 and anchor == 20,
           f"epb(phi, H~) = pb(phi, H) for {flows}/20 random H; "
           f"substitute(H~_HO, rho) = -i(p d_q - q d_p)rho for {anchor}/20 random rho")


# --- 8 -----------------------------------------------------------------------------------


def test_criterion_08_coefficients():
    start = time.perf_counter()
    H = P(QUARTIC_TEXT)
    basis = monomial_basis(CTX, 5)
    report = match_coefficients(H, CTX, 2, basis)
    (o,) = report.orders
    unique = o.status == "unique"
    # the matching target is -i*moyal(rho, H) = i*moyal(H, rho); its hbar^0 part is the
    # operator anchor of criterion 7, which fixes the sign
    equal = False
    if unique:
        series = lift_moyal(H, CTX, 2, coefficients=[o.kappa], include_ghosts=False)
        equal = all(
            (substitute_operator(series, rho) - moyal(rho, H, order=2) * MINUS_I).truncate_hbar(2).is_zero
            for rho in basis
        )
    elapsed = time.perf_counter() - start
    record(8, unique and equal and report.classical_anchor_holds and elapsed < 5.0,
           f"kappa_1 {o.status}, value {o.kappa}, ratio to 1/3! = {o.ratio_to_nominal} (reported, not asserted); "
           f"substituted series = i*moyal(H, rho) through hbar^2 on {len(basis)} basis rho: {equal}; "
           f"{elapsed:.2f}s (limit 5s)")
    # the target with the opposite sign cannot hold even at hbar^0: there the operator is -i*pb(rho, H)
    literal = all(
        (substitute_operator(lift_classical(H, CTX, include_ghosts=False), rho) - pb(rho, H) * I).is_zero
        for rho in basis
    )
    note = (f"[criterion  8] NOTE  target read as +i*moyal(rho, H) instead: hbar^0 agreement on all basis rho "
            f"= {literal} (it contradicts the operator anchor of criterion 7)")
    RESULTS.append(note)
    print(note)


# --- 9 -----------------------------------------------------------------------------------


def test_criterion_09_wigner():
    start = time.perf_counter()
    nq, np_ = WIGNER_GRID
    lines = []
    ok = True
    for hbar in (1.0, 0.1):
        for level in (0, 1):
            state = HermiteState(level, hbar)
            grid = wigner_transform(wavefunction_grid(state, nq, np_))
            norms = check_normalization(grid)
            marg = marginal_error(grid)
            qr = quantisation_rule_check(grid)
            checks = [
                norms.integral_error < WIGNER_INTEGRAL_TOL,
                abs(norms.integral_sq - 1 / (2 * math.pi * hbar)) < WIGNER_SQ_TOL,
                marg < WIGNER_MARGINAL_TOL,
                qr.residual_lhs < WIGNER_IDENTITY_TOL,
                qr.residual_rhs < WIGNER_IDENTITY_TOL,
                qr.norm_A_minus_B > WIGNER_MISMATCH_FRACTION * qr.norm_A,
            ]
            if level == 1:
                origin = grid.rho[nq // 2, np_ // 2]
                checks.append(origin < 0)
                checks.append(abs(abs(origin) - 1 / (math.pi * hbar)) < WIGNER_ORIGIN_TOL)
            ok &= all(checks)
            lines.append(
                f"hbar={hbar} n={level}: |int rho - 1|={norms.integral_error:.1e} "
                f"|int rho^2 - 1/(2 pi hbar)|={abs(norms.integral_sq - norms.expected_sq):.1e} "
                f"marginal={marg:.1e} I-={qr.residual_lhs:.1e} I+={qr.residual_rhs:.1e} "
                f"|A-B|/|A|={qr.relative_mismatch:.2f}"
            )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30.0
    record(9, ok, f"Wigner numerics on {nq}x{np_} grids, {elapsed:.1f}s (limit 30s); " + "; ".join(lines))


# --- 10 ----------------------------------------------------------------------------------


def test_criterion_10_determinism():
    differing = []
    for path in GOLDEN_CONFIGS:
        cfg = RunConfig.from_mapping(json.loads(path.read_text()))
        a = to_json(comparable(build_report(cfg)[0]))
        b = to_json(comparable(build_report(cfg)[0]))
        if a != b:
            differing.append(path.stem)
    record(10, bool(GOLDEN_CONFIGS) and not differing,
           f"{len(GOLDEN_CONFIGS)} golden configs run twice; byte-different: {differing}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
