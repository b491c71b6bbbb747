"""Checks of the standing assumptions, fundamental solvency and the uniqueness condition.

Violated modelling assumptions are reported as findings; only malformed input raises
(and that already happens when the scenario is built).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import LinearDensity, LinearHaircut
from .model import MarketScenario, Mechanism
from .pricing import inverse_demand, lob_prices_batch, own_proceeds, vwap_price

GRID_POINTS = 1001


@dataclass(frozen=True)
class Finding:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings)

    def __getitem__(self, name: str) -> Finding:
        for f in self.findings:
            if f.name == name:
                return f
        raise KeyError(name)

    def failures(self) -> list[Finding]:
        return [f for f in self.findings if not f.passed]

    def __str__(self):
        return "\n".join(str(f) for f in self.findings)


@dataclass(frozen=True)
class UniquenessCheck:
    mechanism: Mechanism
    holds: bool
    lhs: float
    rhs: float
    caveat: str = ""


def _linear_pair(scenario):
    return isinstance(scenario.density, LinearDensity) and isinstance(scenario.haircut, LinearHaircut)


def _grid(cap, points=GRID_POINTS):
    return np.linspace(0.0, cap, points)


def _density_findings(scenario):
    f = scenario.density
    M = scenario.market_cap
    out = []
    if isinstance(f, LinearDensity):
        out.append(Finding("density.normalized", True, "f(0) = 1 for the linear family"))
        out.append(Finding("density.decreasing", True, f"slope -{f.alpha:.6g} < 0"))
        out.append(Finding("density.convex", True, "linear"))
        fM = 1.0 - f.alpha * M
        out.append(Finding("density.positive", fM > 0, f"f(M) = 1 - αM = {fM:.6g}"))
        return out
    x = np.asarray(f.knots)
    v = np.asarray(f.values)
    inside = x <= M * (1 + 1e-12)
    out.append(Finding("density.normalized", abs(v[0] - 1.0) < 1e-12, f"f(0) = {v[0]:.6g}"))
    slopes = f.slopes
    dec = bool(np.all(slopes < 0))
    worst = int(np.argmax(slopes))
    out.append(
        Finding(
            "density.decreasing",
            dec,
            "all segment slopes negative" if dec else f"segment {worst} has slope {slopes[worst]:.6g} >= 0",
        )
    )
    conv = bool(np.all(np.diff(slopes) >= -1e-15))
    out.append(Finding("density.convex", conv, "segment slopes nondecreasing" if conv else "slopes decrease at a knot"))
    fM = float(f.value(M))
    out.append(Finding("density.positive", fM > 0 and bool(np.all(v[inside] > 0)), f"f(M) = {fM:.6g}"))
    return out


def _haircut_findings(scenario):
    g = scenario.haircut
    M = scenario.market_cap
    out = []
    if isinstance(g, LinearHaircut):
        out.append(Finding("haircut.decreasing", True, f"slope -{g.alpha:.6g} < 0"))
        out.append(Finding("haircut.convex", True, "linear"))
    else:
        slopes = g.slopes
        out.append(Finding("haircut.decreasing", bool(np.all(slopes < 0)), "segment slopes"))
        out.append(Finding("haircut.convex", bool(np.all(np.diff(slopes) >= -1e-15)), "segment slopes nondecreasing"))
    gM = float(g.value(M))
    g0 = float(g.value(0.0))
    out.append(Finding("haircut.range", 0 < gM and g0 <= 1, f"g(0) = {g0:.6g}, g(M) = {gM:.6g}"))
    return out


def _sample_vectors(scenario, points=GRID_POINTS):
    """Liquidation vectors on the box diagonal and along every bank's axis."""
    a = scenario.assets
    t = np.linspace(0.0, 1.0, points)
    rows = [np.outer(t, a)]
    for i in range(scenario.n):
        axis = np.zeros((points, scenario.n))
        axis[:, i] = t * a[i]
        rows.append(axis)
        full = np.tile(a, (points, 1))
        full[:, i] = t * a[i]
        rows.append(full)
    return np.vstack(rows)


def separation_margin(scenario: MarketScenario, mechanism, points: int = GRID_POINTS) -> float:
    """``min_j f̄_j(s) - g(Σ s)`` over the sample grid (analytic for a linear pair)."""
    if _linear_pair(scenario) and scenario.haircut.alpha >= scenario.density.alpha:
        # f̄_j(s) >= f(Σs) and f - g is nondecreasing here, so s = 0 attains the minimum
        return 1.0 - scenario.haircut.intercept
    mech = Mechanism(mechanism)
    if mech is Mechanism.VWAP:
        S = _grid(float(scenario.assets.sum()), points)
        return float(np.min(vwap_price(S, scenario.density) - scenario.haircut.value(S)))
    S = _sample_vectors(scenario, points)
    prices = lob_prices_batch(S, scenario.density)
    return float(np.min(prices.min(axis=1) - scenario.haircut.value(S.sum(axis=1))))


def _collateral_monotone(scenario, mechanism, points):
    """``s_i f̄_i + (a_i - s_i) g(Σs)`` strictly increasing in ``s_i`` on a grid."""
    a = scenario.assets
    worst = np.inf
    where = ""
    for i in range(scenario.n):
        x = np.linspace(0.0, a[i], points)
        for frac in (0.0, 0.5, 1.0):
            s = frac * a.copy()
            others_total = float(np.delete(s, i).sum())
            cash = own_proceeds(x, i, s, scenario.density, mechanism) + (a[i] - x) * scenario.haircut.value(
                np.minimum(x + others_total, scenario.market_cap)
            )
            step = float(np.min(np.diff(cash)))
            if step < worst:
                worst = step
                where = f"bank {scenario.ids[i]} with others at {frac:g}·a"
    return worst, where


def validate_scenario(scenario: MarketScenario, points: int = GRID_POINTS) -> ValidationReport:
    findings = []
    findings += _density_findings(scenario)
    findings += _haircut_findings(scenario)
    for mech in Mechanism:
        m = separation_margin(scenario, mech, points)
        findings.append(Finding(f"separation[{mech.value}]", m > 0, f"min f̄ - g = {m:.6g}"))
    for mech in Mechanism:
        step, where = _collateral_monotone(scenario, mech, points)
        findings.append(
            Finding(f"collateral_monotone[{mech.value}]", step > 0, f"smallest grid increment {step:.3g} ({where})")
        )
    total = float(scenario.assets.sum())
    findings.append(
        Finding("market_cap", scenario.market_cap >= total * (1 - 1e-12), f"M = {scenario.market_cap:.6g}, Σa = {total:.6g}")
    )
    return ValidationReport(tuple(findings))


def fundamental_solvency(scenario: MarketScenario, mechanism) -> np.ndarray:
    """``h_i <= a_i f̄_i(a)``: shortfall covered by selling everything at worst prices."""
    a = scenario.assets
    prices = inverse_demand(a, scenario.density, mechanism)
    return scenario.shortfalls <= a * prices


def uniqueness_condition(scenario: MarketScenario, mechanism, points: int = GRID_POINTS) -> UniquenessCheck:
    """Sufficient condition for a unique clearing solution.

    ``lhs = -c M min(c1 f'(0), g'(0))`` with ``(c, c1) = (3, 1/2)`` for the
    VWAP and ``(n, n/2)`` for the LOB; ``rhs`` is the separation margin.
    """
    mech = Mechanism(mechanism)
    n = scenario.n
    c, c1 = (3.0, 0.5) if mech is Mechanism.VWAP else (float(n), n / 2.0)
    fp0 = float(scenario.density.derivative(0.0))
    gp0 = float(scenario.haircut.derivative(0.0))
    lhs = -c * scenario.market_cap * min(c1 * fp0, gp0)
    rhs = separation_margin(scenario, mech, points)
    caveat = ""
    if not np.all(fundamental_solvency(scenario, mech)):
        caveat = "not all banks are fundamentally solvent; the condition does not apply"
    return UniquenessCheck(mech, bool(lhs < rhs), float(lhs), float(rhs), caveat)
