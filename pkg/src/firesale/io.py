"""Scenario files, balance-sheet ingestion and result serialization.

Scenario text format::

    [market]
    rate = 0.01
    market_cap = 3            # optional, defaults to the total of assets

    [banks]
    B1 = 1, 0.3               # id = assets, shortfall
    B2 = 2, 1.2

    [density]
    family = linear           # or: tabulated with knots = ... and values = ...
    alpha = 0.05

    [haircut]
    family = linear
    intercept = 0.5
    alpha = 0.05

``#`` starts a comment.  Linear curves accept an optional ``cap`` key
(default ``market_cap``).  Floats are written with ``repr`` so that
parsing an emitted scenario reproduces it exactly.
"""
from __future__ import annotations

import csv
import io as _io
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import CurveError, LinearDensity, LinearHaircut, TabulatedDensity, TabulatedHaircut
from .model import BankAccount, EquilibriumReport, MarketScenario, ScenarioError

log = logging.getLogger(__name__)

SOLVE_COLUMNS = ("bank_id", "s", "qbar", "borrowing", "regime")
EBA_COLUMNS = ("bank_id", "total_assets", "capital", "tier1_ratio")
_SECTIONS = ("market", "banks", "density", "haircut")


class ScenarioParseError(ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


class CalibrationError(ValueError):
    pass


def fmt(x) -> str:
    """Number format of every CSV: 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# scenario text ---------------------------------------------------------------


def _float(text, line, field):
    try:
        return float(text)
    except ValueError:
        raise ScenarioParseError(f"expected a number, got {text.strip()!r}", line, field) from None


def _float_list(text, line, field):
    parts = [p for p in text.split(",")]
    if any(not p.strip() for p in parts):
        raise ScenarioParseError("empty entry in list", line, field)
    return [_float(p, line, field) for p in parts]


def _curve(kind, entries, market_cap):
    """Build a density or haircut from its ``key -> (value, line)`` entries."""
    def need(key):
        if key not in entries:
            raise ScenarioParseError(f"[{kind}] is missing '{key}'", field=key)
        return entries[key]

    family, fline = need("family")
    allowed = {"linear": {"family", "alpha", "cap"}, "tabulated": {"family", "knots", "values"}}
    if family not in allowed:
        raise ScenarioParseError(f"unknown family {family!r} (linear or tabulated)", fline, "family")
    if kind == "haircut" and family == "linear":
        allowed["linear"] = allowed["linear"] | {"intercept"}
    for key, (_, line) in entries.items():
        if key not in allowed[family]:
            raise ScenarioParseError(f"unexpected key in [{kind}] for family {family}", line, key)
    try:
        if family == "linear":
            alpha = _float(*need("alpha"), "alpha")
            cap = _float(*entries["cap"], "cap") if "cap" in entries else market_cap
            if kind == "density":
                return LinearDensity(alpha, cap)
            return LinearHaircut(_float(*need("intercept"), "intercept"), alpha, cap)
        knots = _float_list(*need("knots"), "knots")
        values = _float_list(*need("values"), "values")
        cls = TabulatedDensity if kind == "density" else TabulatedHaircut
        return cls(tuple(knots), tuple(values))
    except CurveError as exc:
        raise ScenarioParseError(f"[{kind}] {exc}", fline) from None


def parse_scenario(text: str) -> MarketScenario:
    section = None
    entries = {name: {} for name in _SECTIONS if name != "banks"}
    banks = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioParseError("unterminated section header", lineno)
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ScenarioParseError(f"unknown section [{section}]", lineno)
            if section in seen:
                raise ScenarioParseError(f"duplicate section [{section}]", lineno)
            seen.add(section)
            continue
        if section is None:
            raise ScenarioParseError("content before the first section header", lineno)
        if "=" not in line:
            raise ScenarioParseError("expected 'key = value'", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ScenarioParseError("missing key before '='", lineno)
        if section == "banks":
            fields = [p.strip() for p in value.split(",")]
            if len(fields) != 2:
                raise ScenarioParseError("bank line must read 'id = assets, shortfall'", lineno, key)
            a = _float(fields[0], lineno, "assets")
            h = _float(fields[1], lineno, "shortfall")
            try:
                banks.append(BankAccount(key, a, h))
            except ScenarioError as exc:
                raise ScenarioParseError(str(exc), lineno, key) from None
            continue
        store = entries[section]
        if key in store:
            raise ScenarioParseError(f"duplicate key in [{section}]", lineno, key)
        store[key] = (value, lineno)

    for name in _SECTIONS:
        if name not in seen:
            raise ScenarioParseError(f"missing section [{name}]")
    if not banks:
        raise ScenarioParseError("at least one bank required")
    market = entries["market"]
    for key, (_, line) in market.items():
        if key not in ("rate", "market_cap"):
            raise ScenarioParseError("unexpected key in [market]", line, key)
    if "rate" not in market:
        raise ScenarioParseError("[market] is missing 'rate'", field="rate")
    rate = _float(*market["rate"], "rate")
    if "market_cap" in market:
        cap = _float(*market["market_cap"], "market_cap")
    else:
        cap = float(sum(b.assets for b in banks))
    density = _curve("density", entries["density"], cap)
    haircut = _curve("haircut", entries["haircut"], cap)
    try:
        return MarketScenario(tuple(banks), rate, density, haircut, cap)
    except ScenarioError as exc:
        raise ScenarioParseError(str(exc)) from None


def _emit_curve(kind, curve):
    out = [f"[{kind}]", f"family = {curve.family}"]
    if curve.family == "linear":
        if kind == "haircut":
            out.append(f"intercept = {curve.intercept!r}")
        out += [f"alpha = {curve.alpha!r}", f"cap = {curve.cap!r}"]
    else:
        out.append("knots = " + ", ".join(repr(x) for x in curve.knots))
        out.append("values = " + ", ".join(repr(x) for x in curve.values))
    return out


def emit_scenario(scenario: MarketScenario) -> str:
    lines = ["[market]", f"rate = {scenario.repo_rate!r}", f"market_cap = {scenario.market_cap!r}", "", "[banks]"]
    for b in scenario.banks:
        if any(c in b.id for c in "=#[],") or b.id != b.id.strip() or not b.id:
            raise ScenarioError(f"bank id {b.id!r} cannot be written to a scenario file")
        lines.append(f"{b.id} = {b.assets!r}, {b.shortfall!r}")
    lines.append("")
    lines += _emit_curve("density", scenario.density)
    lines.append("")
    lines += _emit_curve("haircut", scenario.haircut)
    return "\n".join(lines) + "\n"


def read_scenario(path) -> MarketScenario:
    return parse_scenario(Path(path).read_text())


def write_scenario(path, scenario: MarketScenario) -> None:
    atomic_write(path, emit_scenario(scenario))


# balance sheets ----------------------------------------------------------------


@dataclass(frozen=True)
class BalanceSheetRecord:
    bank_id: str
    total_assets: float
    capital: float
    tier1_ratio: float

    def __post_init__(self):
        if not self.total_assets > 0:
            raise CalibrationError(f"{self.bank_id}: total assets must be positive")
        if not 0 < self.capital < self.total_assets:
            raise CalibrationError(f"{self.bank_id}: capital must lie in (0, total assets)")
        if not 0 < self.tier1_ratio <= 1:
            raise CalibrationError(f"{self.bank_id}: tier 1 ratio must lie in (0, 1]")


@dataclass(frozen=True)
class CalibrationPolicy:
    omega: float = 0.05
    gamma: float = 0.7
    alpha: float | None = None
    market_cap: float | None = None

    def __post_init__(self):
        if not 0 < self.omega <= 1:
            raise CalibrationError(f"omega must lie in (0, 1], got {self.omega!r}")
        if not 0 < self.gamma <= 1:
            raise CalibrationError(f"gamma must lie in (0, 1], got {self.gamma!r}")


def calibrate_eba(records, policy: CalibrationPolicy | None = None) -> MarketScenario:
    """Split each balance sheet into cash and illiquid shares and set ``h = ω p̄``.

    Uses ``a = (1-R)T``, ``p̄ = T - C``; the curves are ``f = 1 - ασ`` and
    ``g = γ - ασ`` with ``α = 1/(300 M)`` unless the policy fixes it.
    """
    policy = policy or CalibrationPolicy()
    records = list(records)
    if not records:
        raise CalibrationError("no balance-sheet records")
    ids, assets, shortfalls = [], [], []
    for rec in records:
        a = (1.0 - rec.tier1_ratio) * rec.total_assets
        h = policy.omega * (rec.total_assets - rec.capital)
        if a <= 0 or h <= 0:
            log.warning("dropping bank %s: assets %.6g, shortfall %.6g", rec.bank_id, a, h)
            continue
        ids.append(rec.bank_id)
        assets.append(a)
        shortfalls.append(h)
    if not ids:
        raise CalibrationError("every bank was dropped")
    cap = float(sum(assets)) if policy.market_cap is None else float(policy.market_cap)
    alpha = 1.0 / (300.0 * cap) if policy.alpha is None else float(policy.alpha)
    try:
        return MarketScenario.linear(assets, shortfalls, 0.0, alpha, policy.gamma, market_cap=cap, ids=ids)
    except ScenarioError as exc:
        raise CalibrationError(f"policy yields an invalid scenario: {exc}") from exc


def read_eba_csv(path_or_text) -> list[BalanceSheetRecord]:
    """Records from a headered CSV (``bank_id,total_assets,capital,tier1_ratio``)."""
    if isinstance(path_or_text, (str, os.PathLike)) and "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)
    reader = csv.DictReader(_io.StringIO(text))
    missing = [c for c in EBA_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise CalibrationError(f"line 1: missing columns {', '.join(missing)}")
    out = []
    for row in reader:
        line = reader.line_num
        try:
            vals = [float(row[c]) for c in EBA_COLUMNS[1:]]
        except (TypeError, ValueError):
            raise CalibrationError(f"line {line}: non-numeric field in {row}") from None
        try:
            out.append(BalanceSheetRecord(row["bank_id"].strip(), *vals))
        except CalibrationError as exc:
            raise CalibrationError(f"line {line}: {exc}") from None
    return out


# results -----------------------------------------------------------------------


def _csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def solve_csv(scenario: MarketScenario, report: EquilibriumReport) -> str:
    rows = zip(scenario.ids, report.s, report.qbar, report.borrowing, (t.value for t in report.regime))
    return _csv_text(SOLVE_COLUMNS, rows)


def sweep_csv(rows) -> str:
    from .analytics import SWEEP_COLUMNS

    return _csv_text(SWEEP_COLUMNS, ([row[c] for c in SWEEP_COLUMNS] for row in rows))


def emit_report(scenario: MarketScenario, report: EquilibriumReport) -> str:
    out = [
        f"mechanism = {report.mechanism.value}",
        f"direction = {report.direction.value}",
        f"converged = {fmt(report.converged)}",
        f"iterations = {report.iterations}",
        f"residual = {fmt(report.residual)}",
        f"q = {fmt(report.q)}",
        f"total_liquidation = {fmt(report.s.sum())}",
        f"total_borrowing = {fmt(report.borrowing.sum())}",
        "",
        f"{'bank':<12}{'s':>16}{'qbar':>16}{'borrowing':>16}  regime",
    ]
    for i, bid in enumerate(scenario.ids):
        out.append(
            f"{bid:<12}{fmt(report.s[i]):>16}{fmt(report.qbar[i]):>16}{fmt(report.borrowing[i]):>16}  {report.regime[i].value}"
        )
    return "\n".join(out) + "\n"
