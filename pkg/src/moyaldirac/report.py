"""Run configuration and JSON report assembly for the command-line front end.

Every ``run_*`` function returns ``(report, exit_code)``.  A report is a plain
dict whose key order is fixed; everything except ``timings`` is the
comparable section and must be byte-identical across runs of one config.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Callable, Mapping

from . import __version__
from .algebra import GradedPolynomial, RationalFunction, SymplecticContext, Variable, format_canonical
from .brackets import BracketKind, bracket
from .dirac import compare_evolutions, consistency_iteration, constrained_evolution
from .lift import hamiltonian_vector_field, lift_moyal, match_coefficients, monomial_basis, substitute_operator
from .parsing import parse
from .wigner import (
    HermiteState,
    check_normalization,
    marginal_error,
    quantisation_rule_check,
    wavefunction_grid,
    wigner_transform,
)

SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_DIVERGENCE = 0, 1, 2

COMMANDS = ("bracket", "lift", "dirac", "compare", "coeffs", "wigner")


class ConfigError(ValueError):
    pass


_SYMBOLIC = ("n", "omega", "hamiltonian", "hbar", "order", "include_ghosts", "observables")
_ECHO = {
    "bracket": ("command", "n", "omega", "kind", "F", "G", "hbar", "order"),
    "lift": ("command",) + _SYMBOLIC,
    "dirac": ("command",) + _SYMBOLIC + ("max_stages", "dynamical_multipliers"),
    "compare": ("command",) + _SYMBOLIC + ("basis_degree", "max_stages", "dynamical_multipliers"),
    "coeffs": ("command", "n", "omega", "hamiltonian", "order", "basis_degree"),
    "wigner": ("command", "hbar", "level", "nq", "np", "extent"),
}


@dataclass
class RunConfig:
    command: str
    n: int = 1
    omega: str = "standard"
    hamiltonian: str | None = None
    hbar: str = "symbolic"
    order: int | None = None
    include_ghosts: bool = False
    observables: list[str] = field(default_factory=list)
    basis_degree: int | None = None
    max_stages: int = 6
    dynamical_multipliers: bool = False
    kind: str | None = None
    F: str | None = None
    G: str | None = None
    level: int = 0
    nq: int = 1025
    np: int = 257
    extent: float | None = None
    out: str | None = None
    format: str = "json"

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**{k: v for k, v in data.items()})
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.omega != "standard":
            raise ConfigError("only the standard symplectic form is available from the command line")
        if self.hbar != "symbolic":
            value = self.hbar_fraction
            if value <= 0:
                raise ConfigError("numeric hbar must be positive")
        if self.order is not None and self.order < 0:
            raise ConfigError("order must be >= 0")
        if self.format not in ("json", "text", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.format == "csv" and self.command != "wigner":
            raise ConfigError("csv output is only available for the wigner command")
        if self.command in ("lift", "dirac", "compare", "coeffs") and not self.hamiltonian:
            raise ConfigError(f"{self.command} needs --hamiltonian")
        if self.command == "bracket" and (self.kind is None or self.F is None or self.G is None):
            raise ConfigError("bracket needs a kind and two expressions")
        if self.command == "coeffs" and self.series_order % 2:
            raise ConfigError("coeffs needs an even order")
        if self.command == "wigner":
            if self.nq < 64 or self.np < 64:
                raise ConfigError("wigner grids need at least 64 points per axis")
            if self.level < 0:
                raise ConfigError("level must be >= 0")

    @property
    def series_order(self) -> int:
        """Truncation order for lift/coeffs/moyal brackets; 2 when unset."""
        return 2 if self.order is None else self.order

    @property
    def hbar_fraction(self) -> Fraction:
        try:
            return Fraction(self.hbar)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"hbar must be 'symbolic' or a positive number, got {self.hbar!r}") from None

    @property
    def hbar_value(self) -> Fraction | None:
        return None if self.hbar == "symbolic" else self.hbar_fraction

    def echo(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in _ECHO[self.command]}


def _s(x: GradedPolynomial | RationalFunction) -> str:
    return format_canonical(x) if isinstance(x, GradedPolynomial) else str(x)


def _scalar_s(x) -> str | None:
    return None if x is None else str(x)


def _default_observables(ctx: SymplecticContext) -> list[GradedPolynomial]:
    return [ctx.phi(a) for a in range(ctx.dim)]


def _observables(cfg: RunConfig, ctx: SymplecticContext, default_degree: int | None = None) -> list[GradedPolynomial]:
    if cfg.observables:
        return [parse(o, ctx) for o in cfg.observables]
    degree = cfg.basis_degree or default_degree
    if degree:
        return monomial_basis(ctx, degree, min_degree=1)
    return _default_observables(ctx)


def run_bracket(cfg: RunConfig) -> tuple[dict, int]:
    ctx = SymplecticContext.standard(cfg.n)
    F, G = parse(cfg.F, ctx), parse(cfg.G, ctx)
    kind = BracketKind(cfg.kind, cfg.order if cfg.kind == "moyal" else None)
    value = bracket(kind, F, G, ctx)
    if cfg.hbar_value is not None:
        value = value.subs_value(Variable.hbar(), cfg.hbar_value)
    return {"kind": cfg.kind, "F": _s(F), "G": _s(G), "value": _s(value)}, EXIT_OK


def run_lift(cfg: RunConfig) -> tuple[dict, int]:
    ctx = SymplecticContext.standard(cfg.n)
    H = parse(cfg.hamiltonian, ctx)
    order = cfg.series_order - cfg.series_order % 2
    series = lift_moyal(H, ctx, order, include_ghosts=cfg.include_ghosts)
    results = {
        "hamiltonian": _s(H),
        "vector_field": [_s(h) for h in hamiltonian_vector_field(H, ctx)],
        "htilde": _s(series.base),
        "corrections": [
            {"j": j, "coefficient": str(coef), "M": _s(m)} for j, coef, m in series.corrections
        ],
        "series": _s(series.polynomial()),
    }
    if cfg.observables:
        results["operator_action"] = [
            {"rho": o, "value": _s(substitute_operator(series, parse(o, ctx), ctx))} for o in cfg.observables
        ]
    return results, EXIT_OK


def _analysis(cfg: RunConfig, ctx: SymplecticContext, H: GradedPolynomial):
    return consistency_iteration(
        H,
        ctx,
        include_ghosts=cfg.include_ghosts,
        max_stages=cfg.max_stages,
        hbar_value=cfg.hbar_value,
        dynamical_multipliers=cfg.dynamical_multipliers,
    )


def run_dirac(cfg: RunConfig) -> tuple[dict, int]:
    ctx = SymplecticContext.standard(cfg.n)
    H = parse(cfg.hamiltonian, ctx)
    an = _analysis(cfg, ctx, H)
    evolutions = []
    for F in _observables(cfg, ctx):
        ev = constrained_evolution(F, an, ctx)
        evolutions.append(
            {"observable": _s(F), "value": _s(ev.value), "htilde_equivalence": ev.htilde_equivalence}
        )
    residuals = an.preservation_residuals()
    results = {
        "hamiltonian": _s(H),
        "htilde": _s(an.htilde),
        "primary_constraints": [_s(c.expr) for c in an.primaries],
        "iteration": [
            {
                "stage": r.stage,
                "index": r.index,
                "source": _s(r.source),
                "candidate": _s(r.candidate),
                "ghost_terms": _s(r.ghost_terms),
                "outcome": r.outcome,
            }
            for r in an.trace
        ],
        "constraints": [
            {"expr": _s(c.expr), "stage": c.stage, "index": c.index, "classification": c.classification}
            for c in an.psi
        ],
        "C": [[_s(x) for x in row] for row in an.C],
        "second_class": an.second_class,
        "C_inv": [[_s(x) for x in row] for row in an.C_inv] if an.C_inv is not None else None,
        "multipliers": [_s(m.value) if m.value is not None else None for m in an.multipliers],
        "total_hamiltonian": _s(an.total_hamiltonian),
        "surface": [{"variable": v, "value": val} for v, val in an.surface.describe()],
        "evolutions": evolutions,
        "preservation_residuals": [_s(r) for r in residuals],
    }
    if an.dynamical_multipliers:
        results["xi_cancels"] = an.xi_cancels
    verdicts = {
        "stages": an.n_stages,
        "first_class_present": bool(an.first_class),
        "constraints_preserved": all(r.is_zero for r in residuals),
        "htilde_equivalence": all(e["htilde_equivalence"] for e in evolutions),
        "surface_complete": an.surface.complete,
    }
    results["verdicts"] = verdicts
    return results, EXIT_OK


def run_compare(cfg: RunConfig) -> tuple[dict, int]:
    ctx = SymplecticContext.standard(cfg.n)
    H = parse(cfg.hamiltonian, ctx)
    an = _analysis(cfg, ctx, H)
    rows = []
    for F in _observables(cfg, ctx, default_degree=4):
        rep = compare_evolutions(H, F, ctx, cfg.order, analysis=an)
        rows.append(
            {
                "observable": _s(F),
                "constrained": _s(rep.constrained),
                "moyal": _s(rep.moyal),
                "difference": _s(rep.difference),
                "lambda_content": _s(rep.lambda_content),
                "verdict": rep.verdict,
                "notes": rep.notes,
            }
        )
    equal = all(r["verdict"] == "equal" for r in rows)
    results = {
        "hamiltonian": _s(H),
        "comparisons": rows,
        "verdict": "equal" if equal else "different",
        "notes": [
            "moyal evolution is {F, H}_mb, untruncated unless an order is given",
            "agreement with an extended Moyal bracket is not checked: no definition of that bracket is available",
        ],
    }
    return results, EXIT_OK if equal else EXIT_DIVERGENCE


def run_coeffs(cfg: RunConfig) -> tuple[dict, int]:
    ctx = SymplecticContext.standard(cfg.n)
    H = parse(cfg.hamiltonian, ctx)
    degree = cfg.basis_degree if cfg.basis_degree is not None else cfg.series_order + 3
    rep = match_coefficients(H, ctx, cfg.series_order, monomial_basis(ctx, degree))
    results = {
        "hamiltonian": _s(H),
        "target": rep.target,
        "basis_size": rep.basis_size,
        "classical_anchor_holds": rep.classical_anchor_holds,
        "orders": [
            {
                "j": o.j,
                "status": o.status,
                "kappa": _scalar_s(o.kappa),
                "nominal_value": str(o.nominal_value),
                "ratio_to_nominal": _scalar_s(o.ratio_to_nominal),
                "equations": o.equations,
                "detail": o.detail,
            }
            for o in rep.orders
        ],
        "verified": rep.verified,
    }
    statuses = {o.status for o in rep.orders}
    if not rep.classical_anchor_holds or "underdetermined" in statuses:
        code = EXIT_ERROR
    elif "inconsistent" in statuses:
        code = EXIT_DIVERGENCE
    else:
        code = EXIT_OK if rep.verified else EXIT_ERROR
    return results, code


def _check(name: str, value: float, tolerance: float, passed: bool) -> dict:
    return {"name": name, "value": value, "tolerance": tolerance, "passed": bool(passed)}


def run_wigner(cfg: RunConfig, grid_sink: Callable | None = None) -> tuple[dict, int]:
    hbar = 1.0 if cfg.hbar == "symbolic" else float(cfg.hbar_fraction)
    state = HermiteState(cfg.level, hbar)
    grid = wigner_transform(wavefunction_grid(state, cfg.nq, cfg.np, extent=cfg.extent))
    norms = check_normalization(grid)
    marg = marginal_error(grid)
    qr = quantisation_rule_check(grid)
    oracle_00 = float(state.wigner([0.0], [0.0])[0, 0])
    iq, ip = int(abs(grid.q).argmin()), int(abs(grid.p).argmin())
    rho_00 = float(grid.rho[iq, ip])
    checks = [
        _check("integral", norms.integral_error, 1e-6, norms.integral_error < 1e-6),
        _check("integral_sq", norms.integral_sq_error, 1e-4, norms.integral_sq_error < 1e-4),
        _check("marginal", marg, 1e-6, marg < 1e-6),
        _check("realness", grid.imag_residue, 1e-10, grid.imag_residue < 1e-10),
        _check("rho_00_oracle", abs(rho_00 - oracle_00), 1e-3, abs(rho_00 - oracle_00) < 1e-3),
        _check("lhs_identity", qr.residual_lhs, 1e-6, qr.residual_lhs < 1e-6),
        _check("rhs_identity", qr.residual_rhs, 1e-6, qr.residual_rhs < 1e-6),
        _check("lhs_rhs_mismatch", qr.relative_mismatch, 0.1, qr.relative_mismatch > 0.1),
    ]
    if cfg.level % 2 == 1:
        checks.append(_check("negativity", rho_00, 0.0, rho_00 < 0))
    results = {
        "level": cfg.level,
        "hbar": hbar,
        "grid": {
            "nq": grid.nq,
            "np": grid.np_,
            "q_range": [float(grid.q[0]), float(grid.q[-1])],
            "p_range": [float(grid.p[0]), float(grid.p[-1])],
        },
        "integral": norms.integral,
        "integral_sq": norms.integral_sq,
        "expected_integral_sq": norms.expected_sq,
        "marginal_error": marg,
        "imag_residue": grid.imag_residue,
        "rho_00": rho_00,
        "rho_00_oracle": oracle_00,
        "quantisation": {
            "residual_lhs": qr.residual_lhs,
            "residual_rhs": qr.residual_rhs,
            "norm_A": qr.norm_A,
            "norm_B": qr.norm_B,
            "norm_A_minus_B": qr.norm_A_minus_B,
            "relative_mismatch": qr.relative_mismatch,
            "p0_slice_A": qr.p0_slice_A,
            "p0_slice_B": qr.p0_slice_B,
        },
        "checks": checks,
    }
    if grid_sink is not None:
        grid_sink(grid)
    return results, EXIT_OK if all(c["passed"] for c in checks) else EXIT_ERROR


RUNNERS = {
    "bracket": run_bracket,
    "lift": run_lift,
    "dirac": run_dirac,
    "compare": run_compare,
    "coeffs": run_coeffs,
    "wigner": run_wigner,
}


def build_report(cfg: RunConfig, **kwargs) -> tuple[dict, int]:
    """Run one command and wrap its results; errors become an ``error`` section."""
    start = time.perf_counter()
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "tool": "moyaldirac",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
    }
    try:
        results, code = RUNNERS[cfg.command](cfg, **kwargs)
        report["results"] = results
    except Exception as exc:  # reported, then mapped to exit code 1
        err: dict[str, Any] = {"type": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "offset"):
            err["offset"] = exc.offset
        report["error"] = err
        code = EXIT_ERROR
    report["exit_code"] = code
    report["timings"] = {"seconds": round(time.perf_counter() - start, 6)}
    return report, code


def comparable(report: Mapping[str, Any]) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


def _finite(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_finite(v) for v in x]
    return x


def to_json(report: Mapping[str, Any]) -> str:
    import json

    return json.dumps(_finite(report), indent=2, ensure_ascii=False) + "\n"


def to_text(report: Mapping[str, Any]) -> str:
    lines: list[str] = []

    def walk(prefix: str, x: Any) -> None:
        if isinstance(x, dict):
            for k, v in x.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(x, list) and x and isinstance(x[0], (dict, list)):
            for i, v in enumerate(x):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"{prefix}: {x}")

    walk("", _finite(dict(report)))
    return "\n".join(lines) + "\n"
