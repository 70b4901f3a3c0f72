"""Command-line entry point.

Exit codes: 0 when every asserted check passes, 2 for a documented
divergence (a ``compare`` mismatch or inconsistent coefficient matching),
1 for errors and failed checks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .report import EXIT_ERROR, ConfigError, RunConfig, build_report, to_json, to_text
from .wigner import write_csv

# flags whose value lands directly on RunConfig under the same name
_PASSTHROUGH = (
    "n", "hamiltonian", "hbar", "order", "basis_degree", "max_stages",
    "level", "nq", "np", "extent", "out", "format",
)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--n", type=int, help="degrees of freedom (default 1)")
    p.add_argument("--hamiltonian", help="Hamiltonian expression, e.g. '1/2*(p^2+q^2)'")
    p.add_argument("--hbar", help="'symbolic' (default) or a positive number such as 1/2")
    p.add_argument("--order", type=int, help="hbar truncation order (default 2)")
    p.add_argument("--ghosts", choices=("on", "off"), help="keep ghost terms in the lifted Hamiltonian")
    p.add_argument("--observables", help="comma-separated observable expressions")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "text", "csv"), help="report format (default json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moyaldirac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", help="evaluate a pb, epb or moyal bracket")
    p.add_argument("kind", choices=("pb", "epb", "moyal"))
    p.add_argument("F")
    p.add_argument("G")
    _common(p)

    p = sub.add_parser("lift", help="lift a Hamiltonian to the extended space")
    _common(p)

    for name, text in (("dirac", "run the constraint algorithm"), ("compare", "constrained vs Moyal evolution")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--max-stages", dest="max_stages", type=int)
        p.add_argument("--dynamical-multipliers", action="store_true", default=None)
        if name == "compare":
            p.add_argument("--basis-degree", dest="basis_degree", type=int,
                           help="use all monomials up to this degree when no observables are given (default 4)")

    p = sub.add_parser("coeffs", help="match the hbar-series coefficients against Moyal evolution")
    _common(p)
    p.add_argument("--basis-degree", dest="basis_degree", type=int, help="test-basis degree (default order+3)")

    p = sub.add_parser("wigner", help="Wigner-function numerics for oscillator eigenstates")
    _common(p)
    p.add_argument("--level", type=int, help="oscillator eigenstate index (default 0)")
    p.add_argument("--nq", type=int, help="q grid nodes (default 1025)")
    p.add_argument("--np", type=int, help="p grid nodes (default 257)")
    p.add_argument("--extent", type=float, help="half-width of the q grid")
    p.add_argument("--summary", help="JSON summary path for --format csv (default: <out>.json)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        if data.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {data['command']!r}, not {args.command!r}")
    data["command"] = args.command
    for key in _PASSTHROUGH:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.command == "bracket":
        data.update(kind=args.kind, F=args.F, G=args.G)
    if args.ghosts is not None:
        data["include_ghosts"] = args.ghosts == "on"
    if args.observables is not None:
        data["observables"] = [o.strip() for o in args.observables.split(",") if o.strip()]
    if getattr(args, "dynamical_multipliers", None):
        data["dynamical_multipliers"] = True
    if isinstance(data.get("hbar"), (int, float)):
        data["hbar"] = str(data["hbar"])
    try:
        return RunConfig.from_mapping(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"moyaldirac: config error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    kwargs = {}
    csv_text: list[str] = []
    if cfg.format == "csv":
        import io

        def sink(grid) -> None:
            buf = io.StringIO()
            write_csv(grid, buf)
            csv_text.append(buf.getvalue())

        kwargs["grid_sink"] = sink

    report, code = build_report(cfg, **kwargs)
    if "error" in report:
        err = report["error"]
        where = f" at offset {err['offset']}" if "offset" in err else ""
        print(f"moyaldirac: {err['type']}{where}: {err['message']}", file=sys.stderr)

    if cfg.format == "csv":
        if csv_text:
            _emit(csv_text[0], cfg.out)
        summary = getattr(args, "summary", None) or (f"{cfg.out}.json" if cfg.out else None)
        if summary:
            Path(summary).write_text(to_json(report))
        else:
            sys.stderr.write(to_json(report))
    else:
        _emit(to_json(report) if cfg.format == "json" else to_text(report), cfg.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
