"""JSON run configuration: chart, truncation, connection, leaf, named expressions.

Example::

    {
      "chart": {"N": 1},
      "trunc_K": 4,
      "connection": [{"indices": [1, 1, 2], "poly": "x1 + 1/2"}],
      "leaf": {"c": ["2"]},
      "expressions": {"f": "x1*p1"}
    }

Connection entries give lowered symbols Gamma_{ijk}; permutations that are
not listed are filled in with the same polynomial, so listing two
permutations with different polynomials is how an asymmetric (invalid)
connection is written.  Rationals are "a/b" strings.  Unknown keys are
rejected.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .connection import ConnectionSpec
from .fedosov import EngineConfig
from .ideals import LeafSpec
from .parse import ParseError, parse_expression
from .ring import BasePoly, as_rational
from .weyl import ChartContext


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CheckSettings:
    """Sampling parameters for the ``check`` invariant suite."""

    samples: int = 4
    seed: int = 0
    max_degree: int = 2


@dataclass(frozen=True)
class ConnectionEntry:
    indices: tuple
    poly: str


@dataclass(frozen=True)
class ConfigDocument:
    n: int
    trunc_K: int
    connection: tuple = ()
    leaf: tuple = ()
    expressions: dict = field(default_factory=dict)
    max_iter: int | None = None
    check: CheckSettings = CheckSettings()

    @property
    def ctx(self) -> ChartContext:
        return ChartContext(self.n)

    def parse(self, src: str) -> BasePoly:
        """A named expression from the document, or else a literal expression."""
        text = self.expressions.get(src, src)
        try:
            return parse_expression(text, self.n)
        except ParseError as exc:
            raise ConfigError(f"expression {src!r}: {exc}") from None

    def connection_spec(self) -> ConnectionSpec:
        listed = {}
        for entry in self.connection:
            if entry.indices in listed:
                raise ConfigError(f"connection index triple {list(entry.indices)} listed twice")
            listed[entry.indices] = self.parse(entry.poly)
        full = dict(listed)
        for idx, q in listed.items():
            for perm in itertools.permutations(idx):
                full.setdefault(perm, q)
        return ConnectionSpec(self.n, full)

    def leaf_spec(self) -> LeafSpec:
        return LeafSpec(self.leaf)

    def engine_config(self, trunc_K: int | None = None) -> EngineConfig:
        K = self.trunc_K if trunc_K is None else trunc_K
        max_iter = self.max_iter if trunc_K is None else None
        try:
            return EngineConfig(self.ctx, self.connection_spec(), self.leaf_spec(), K, max_iter)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_TOP_KEYS = {"chart", "trunc_K", "connection", "leaf", "expressions", "max_iter", "check"}
_REQUIRED = {"chart", "trunc_K", "leaf"}


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _int(value, where: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), f"{where} must be an integer")
    return value


def _keys(obj, allowed: set, where: str) -> None:
    _expect(isinstance(obj, dict), f"{where} must be an object")
    unknown = sorted(set(obj) - allowed)
    _expect(not unknown, f"unknown key(s) in {where}: {', '.join(unknown)}")


def _rational(value, where: str):
    _expect(isinstance(value, (str, int)) and not isinstance(value, bool), f"{where} must be an exact rational string like \"1/2\"")
    try:
        return as_rational(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: not an exact rational: {value!r}") from None


def from_dict(doc) -> ConfigDocument:
    _keys(doc, _TOP_KEYS, "config")
    missing = sorted(_REQUIRED - set(doc))
    _expect(not missing, f"missing key(s) in config: {', '.join(missing)}")

    _keys(doc["chart"], {"N"}, "chart")
    _expect("N" in doc["chart"], "chart.N is required")
    n = _int(doc["chart"]["N"], "chart.N")
    _expect(n >= 1, "chart.N must be positive")
    K = _int(doc["trunc_K"], "trunc_K")
    _expect(K >= 2, "trunc_K must be at least 2")

    entries = []
    conn = doc.get("connection", [])
    _expect(isinstance(conn, list), "connection must be a list")
    for pos, item in enumerate(conn):
        where = f"connection[{pos}]"
        _keys(item, {"indices", "poly"}, where)
        _expect("indices" in item and "poly" in item, f"{where} needs indices and poly")
        idx = item["indices"]
        _expect(isinstance(idx, list) and len(idx) == 3, f"{where}.indices must be a list of three integers")
        idx = tuple(_int(i, f"{where}.indices") for i in idx)
        _expect(all(1 <= i <= 2 * n for i in idx), f"{where}.indices out of range 1..{2 * n}")
        _expect(isinstance(item["poly"], str), f"{where}.poly must be an expression string")
        entries.append(ConnectionEntry(idx, item["poly"]))

    _keys(doc["leaf"], {"c"}, "leaf")
    c = doc["leaf"].get("c")
    _expect(isinstance(c, list) and len(c) == n, f"leaf.c must list {n} rational(s)")
    leaf = tuple(_rational(v, f"leaf.c[{i}]") for i, v in enumerate(c))

    exprs = doc.get("expressions", {})
    _keys(exprs, set(exprs) if isinstance(exprs, dict) else set(), "expressions")
    for name, src in exprs.items():
        _expect(isinstance(src, str), f"expressions.{name} must be a string")

    max_iter = doc.get("max_iter")
    if max_iter is not None:
        max_iter = _int(max_iter, "max_iter")
        _expect(max_iter >= K, "max_iter must be at least trunc_K")

    settings = CheckSettings()
    if "check" in doc:
        _keys(doc["check"], {"samples", "seed", "max_degree"}, "check")
        raw = {k: _int(v, f"check.{k}") for k, v in doc["check"].items()}
        settings = CheckSettings(**raw)
        _expect(settings.samples >= 1 and settings.max_degree >= 0, "check.samples must be positive")

    out = ConfigDocument(n, K, tuple(entries), leaf, dict(exprs), max_iter, settings)
    for name in out.expressions:
        out.parse(name)
    for entry in entries:
        out.parse(entry.poly)
    return out


def load(path) -> ConfigDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)
