"""Outer Picard iteration on prices and the brute-force Nash certificate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import classify_regimes, inner_equilibrium, objective, response_bounds
from .lattice import lattice_operator, relaxed_equilibrium
from .model import (
    Direction,
    EquilibriumReport,
    LiquidationVector,
    MarketScenario,
    Mechanism,
    PriceState,
)
from .pricing import haircut_value, inverse_demand


class ClearingError(RuntimeError):
    def __init__(self, message, last_iterate=None, residual=float("nan")):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class ClearingConfig:
    mechanism: Mechanism = Mechanism.VWAP
    direction: Direction = Direction.MAXIMAL
    tol: float = 1e-12
    max_iter: int = 10_000
    record_path: bool = False
    lob_route: str = "liquidations"

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.lob_route not in ("liquidations", "prices"):
            raise ValueError(f"lob_route must be 'liquidations' or 'prices', got {self.lob_route!r}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("iteration cap must be >= 1")


def price_map(s, scenario: MarketScenario, mechanism) -> PriceState:
    """Prices implied by liquidations: ``(g(Σs), f̄(s))``."""
    s = np.asarray(s, dtype=float)
    total = min(float(s.sum()), scenario.market_cap)
    return PriceState(float(haircut_value(total, scenario.haircut)), inverse_demand(s, scenario.density, mechanism))


def starting_prices(scenario: MarketScenario, mechanism, direction) -> PriceState:
    # the image of s = 0 (top) or s = a (bottom); both lie in the admissible set
    if Direction(direction) is Direction.MAXIMAL:
        return price_map(np.zeros(scenario.n), scenario, mechanism)
    return price_map(scenario.assets, scenario, mechanism)


def build_report(s, prices, scenario, config, iterations, converged, residual, path=()):
    s = np.asarray(s, dtype=float)
    borrowing = scenario.shortfalls - s * prices.qbar
    regime = classify_regimes(s, prices, scenario, config.mechanism)
    return EquilibriumReport(
        liquidations=LiquidationVector(s, residual, iterations),
        prices=prices,
        borrowing=borrowing,
        regime=regime,
        iterations=iterations,
        converged=converged,
        direction=config.direction,
        mechanism=config.mechanism,
        residual=residual,
        path=list(path),
    )


def _lattice_clearing(scenario, config):
    floor = relaxed_equilibrium(scenario)
    maximal = config.direction is Direction.MAXIMAL
    s = floor if maximal else scenario.assets.copy()
    prices = price_map(s, scenario, Mechanism.LOB)
    path = []
    if config.record_path:
        start = starting_prices(scenario, Mechanism.LOB, config.direction)
        path = [start.as_vector(), prices.as_vector()]
    change = np.inf
    for it in range(1, config.max_iter + 1):
        s = lattice_operator(s, floor, scenario)
        new = price_map(s, scenario, Mechanism.LOB)
        change = float(np.max(np.abs(new.as_vector() - prices.as_vector())))
        prices = new
        if config.record_path:
            path.append(prices.as_vector())
        if change < config.tol:
            return build_report(s, prices, scenario, config, it, True, change, path)
    raise ClearingError(
        f"lattice iteration did not converge in {config.max_iter} steps (last change {change:.3e})",
        last_iterate=prices,
        residual=change,
    )


def picard_clearing(scenario: MarketScenario, config: ClearingConfig | None = None, **kwargs) -> EquilibriumReport:
    """Maximal or minimal clearing prices by monotone iteration.

    VWAP iterates the price map from the top (or bottom) attainable prices.
    The LOB price map is not monotone, so by default the LOB climbs the
    liquidation lattice instead (see :mod:`firesale.lattice`); prices along
    that path are monotone.  ``lob_route="prices"`` selects plain price
    iteration for the LOB as well.  Keyword arguments are forwarded to
    :class:`ClearingConfig` when no config is given.
    """
    config = config or ClearingConfig(**kwargs)
    mech = config.mechanism
    if mech is Mechanism.LOB and config.lob_route == "liquidations":
        return _lattice_clearing(scenario, config)
    prices = starting_prices(scenario, mech, config.direction)
    path = [prices.as_vector()] if config.record_path else []
    s = inner_equilibrium(prices, scenario, mech).s
    change = np.inf
    for it in range(1, config.max_iter + 1):
        new = price_map(s, scenario, mech)
        change = float(np.max(np.abs(new.as_vector() - prices.as_vector())))
        prices = new
        if config.record_path:
            path.append(prices.as_vector())
        s = inner_equilibrium(prices, scenario, mech).s
        if change < config.tol:
            return build_report(s, prices, scenario, config, it, True, change, path)
    raise ClearingError(
        f"Picard iteration did not converge in {config.max_iter} steps (last change {change:.3e})",
        last_iterate=prices,
        residual=change,
    )


@dataclass(frozen=True)
class NashCertificate:
    max_improvement: float
    worst_bank: str
    per_bank: tuple


def _feasible_original(x, i, s, scenario, mechanism, slack):
    """Constraints of the game with prices re-evaluated at the deviation."""
    from .pricing import own_proceeds

    a_i = scenario.assets[i]
    h_i = scenario.shortfalls[i]
    others_total = float(np.delete(s, i).sum())
    P = own_proceeds(x, i, s, scenario.density, mechanism)
    gq = scenario.haircut.value(np.minimum(x + others_total, scenario.market_cap))
    # s <= h / f̄  <=>  s f̄ <= h;  lower bound  <=>  s f̄ + (a - s) g >= h
    return (P <= h_i + slack) & (P + (a_i - x) * gq >= h_i - slack)


def nash_certificate(
    scenario: MarketScenario,
    report: EquilibriumReport,
    grid_points: int = 1000,
    game: str = "both",
    slack: float = 1e-12,
) -> NashCertificate:
    """Largest unilateral improvement found on a deviation grid.

    ``game`` selects the price-parametrised game (constraints frozen at the
    report's prices), the original game (constraints re-evaluated at each
    deviation) or both.  An infeasible equilibrium candidate counts as an
    infinite improvement.
    """
    mech = report.mechanism
    s = report.s
    prices = report.prices
    b = response_bounds(scenario, prices)
    improvements = []
    for i in range(scenario.n):
        a_i = scenario.assets[i]
        here = float(objective(s[i], i, s, scenario, mech))
        best = 0.0
        if game in ("both", "parametrised"):
            lo, hi = (a_i, a_i) if b.insolvent[i] else (b.lower[i], b.upper[i])
            if not (lo - 1e-9 <= s[i] <= hi + 1e-9):
                best = np.inf
            else:
                grid = np.linspace(lo, hi, grid_points)
                vals = objective(grid, i, s, scenario, mech)
                best = max(best, here - float(np.min(vals)))
        if game in ("both", "original"):
            grid = np.linspace(0.0, a_i, grid_points)
            ok = _feasible_original(grid, i, s, scenario, mech, slack)
            here_ok = bool(_feasible_original(np.array([s[i]]), i, s, scenario, mech, 1e-9)[0])
            if ok.any():
                if not here_ok:
                    best = np.inf
                else:
                    vals = objective(grid[ok], i, s, scenario, mech)
                    best = max(best, here - float(np.min(vals)))
            elif abs(s[i] - a_i) > 1e-9:
                # no feasible deviation: the bank is forced to sell everything
                best = np.inf
        improvements.append(best)
    improvements = np.array(improvements)
    k = int(np.argmax(improvements))
    return NashCertificate(float(improvements[k]), scenario.ids[k], tuple(improvements))


def total_outcomes(report: EquilibriumReport) -> dict:
    return {
        "total_liquidation": float(report.s.sum()),
        "total_borrowing": float(report.borrowing.sum()),
    }
