"""Command-line front end.

    adapted-star validate      --config cfg.json
    adapted-star solve-r       --config cfg.json [--trunc K]
    adapted-star star F G      --config cfg.json
    adapted-star module-action F PSI --config cfg.json
    adapted-star check         --config cfg.json

F, G and PSI are names from the config's ``expressions`` table or literal
expressions.  Exit status: 0 success, 1 configuration error, 2 invariant
failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter

from . import fedosov as fed
from .checks import Harness, run_checks
from .config import ConfigDocument, ConfigError, load
from .connection import InvalidConnection, validate_connection
from .parse import render_poly
from .weyl import _key_degree, render

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


class Report:
    """An ordered list of fields, rendered as ``key: value`` lines or as JSON."""

    def __init__(self, command: str, fmt: str = "text"):
        self.fmt = fmt
        self.fields = [("command", command)]

    @property
    def is_text(self) -> bool:
        return self.fmt == "text"

    def add(self, key: str, value) -> None:
        self.fields.append((key, value))

    def as_dict(self) -> dict:
        return dict(self.fields)

    def text(self) -> str:
        lines = []
        for key, value in self.fields:
            if isinstance(value, list):
                lines.append(f"{key}:")
                for item in value:
                    lines.append("  " + (" ".join(str(v) for v in item.values()) if isinstance(item, dict) else str(item)))
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def _emit(report: Report) -> None:
    if not report.is_text:
        sys.stdout.write(json.dumps(report.as_dict(), indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(report.text())


def _error(kind: str, message: str, fmt: str, code: int) -> int:
    if fmt == "json":
        sys.stdout.write(json.dumps({"error": {"kind": kind, "message": message}}, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stderr.write(f"error[{kind}]: {message}\n")
    return code


def _header(report: Report, cfg: ConfigDocument, K: int) -> None:
    report.add("N", cfg.n)
    report.add("trunc_K", K)


def _series_fields(report: Report, series: fed.Series) -> None:
    report.add("exact_through_order", series.order)
    terms = [{"order": k, "poly": render_poly(q)} for k, q in enumerate(series.coeffs) if not q.is_zero()]
    if report.is_text:
        report.add("terms", [f"order {t['order']}: {t['poly']}" for t in terms])
    else:
        report.add("terms", terms)
    report.add("series", series.render())


def _state(cfg: ConfigDocument, K: int) -> fed.FedosovState:
    engine = cfg.engine_config(K if K != cfg.trunc_K else None)
    report = validate_connection(engine.spec, engine.ctx)
    if not report.ok:
        raise ConfigError(f"connection is not admissible: {report}")
    return fed.solve_r(engine)


def cmd_validate(cfg: ConfigDocument, K: int, args, report: Report) -> int:
    result = validate_connection(cfg.connection_spec(), cfg.ctx)
    report.add("result", str(result))
    return EXIT_OK if result.ok else EXIT_INVARIANT


def cmd_solve_r(cfg: ConfigDocument, K: int, args, report: Report) -> int:
    st = _state(cfg, K)
    _header(report, cfg, K)
    report.add("iterations", st.iterations)
    report.add("terms", len(st.r))
    profile = Counter(_key_degree(k) for k in st.r.keys())
    rows = [{"degree": d, "terms": profile[d]} for d in sorted(profile)]
    if report.is_text:
        report.add("filtration_profile", [f"degree {r['degree']}: {r['terms']} terms" for r in rows])
    else:
        report.add("filtration_profile", rows)
    report.add("r", render(st.r))
    return EXIT_OK


def cmd_star(cfg: ConfigDocument, K: int, args, report: Report) -> int:
    f, g = cfg.parse(args.f), cfg.parse(args.g)
    st = _state(cfg, K)
    report.add("f", render_poly(f))
    report.add("g", render_poly(g))
    _header(report, cfg, K)
    _series_fields(report, fed.star(f, g, st))
    return EXIT_OK


def cmd_module_action(cfg: ConfigDocument, K: int, args, report: Report) -> int:
    f, psi = cfg.parse(args.f), cfg.parse(args.psi)
    if psi.depends_on_x():
        raise ConfigError(f"leaf function {args.psi!r} must depend on p only")
    st = _state(cfg, K)
    report.add("f", render_poly(f))
    report.add("psi", render_poly(psi))
    _header(report, cfg, K)
    report.add("leaf", "(" + ", ".join(str(c) for c in cfg.leaf) + ")")
    _series_fields(report, fed.module_action(f, psi, st))
    return EXIT_OK


def cmd_check(cfg: ConfigDocument, K: int, args, report: Report) -> int:
    harness = Harness(cfg.ctx, cfg.connection_spec(), cfg.leaf_spec(), K, cfg.check, cfg.max_iter if K == cfg.trunc_K else None)
    try:
        results = run_checks(harness)
    except fed.NonConvergence as exc:
        report.add("error", str(exc))
        return EXIT_INVARIANT
    _header(report, cfg, K)
    report.add("samples", cfg.check.samples)
    report.add("seed", cfg.check.seed)
    if report.is_text:
        report.add("results", [r.line() for r in results])
    else:
        report.add("results", [{"name": r.name, "status": r.status, "cases": r.cases, "detail": r.detail} for r in results])
    failed = sum(r.status == "FAIL" for r in results)
    passed = sum(r.status == "PASS" for r in results)
    skipped = sum(r.status == "SKIP" for r in results)
    report.add("summary", f"{passed} passed, {failed} failed, {skipped} skipped")
    return EXIT_INVARIANT if failed else EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve-r": cmd_solve_r,
    "star": cmd_star,
    "module-action": cmd_module_action,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a JSON config document")
    common.add_argument("--trunc", type=int, default=None, help="override the config's trunc_K")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="adapted-star", description="Polarization-adapted Fedosov star product on a Darboux chart.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check admissibility of the connection")
    sub.add_parser("solve-r", parents=[common], help="solve the Fedosov equation and print r")
    p = sub.add_parser("star", parents=[common], help="star product of two functions")
    p.add_argument("f")
    p.add_argument("g")
    p = sub.add_parser("module-action", parents=[common], help="action of f on a leaf function psi(p)")
    p.add_argument("f")
    p.add_argument("psi")
    sub.add_parser("check", parents=[common], help="run the invariant suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format
    try:
        cfg = load(args.config)
        K = cfg.trunc_K if args.trunc is None else args.trunc
        if K < 2:
            raise ConfigError("--trunc must be at least 2")
        report = Report(args.command, fmt)
        code = COMMANDS[args.command](cfg, K, args, report)
    except (ConfigError, InvalidConnection) as exc:
        return _error("config", str(exc), fmt, EXIT_CONFIG)
    except fed.NonConvergence as exc:
        return _error("invariant", str(exc), fmt, EXIT_INVARIANT)
    _emit(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
