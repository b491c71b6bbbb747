"""Domain types shared by every solver stage."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import (
    CurveError,
    DensityCurve,
    HaircutCurve,
    LinearDensity,
    LinearHaircut,
)


class ScenarioError(ValueError):
    """A scenario that cannot be solved at all (as opposed to a failed assumption)."""


class Mechanism(str, enum.Enum):
    VWAP = "vwap"
    LOB = "lob"


class Direction(str, enum.Enum):
    MAXIMAL = "maximal"
    MINIMAL = "minimal"


class Regime(str, enum.Enum):
    """Active branch of a bank's clamped best response."""

    INSOLVENT = "I_a"
    UPPER = "I_U"
    LOWER = "I_L"
    INTERIOR = "I_0"


@dataclass(frozen=True)
class BankAccount:
    id: str
    assets: float
    shortfall: float

    def __post_init__(self):
        if not np.isfinite(self.assets) or self.assets <= 0:
            raise ScenarioError(f"bank {self.id!r}: assets must be positive, got {self.assets!r}")
        if not np.isfinite(self.shortfall) or self.shortfall <= 0:
            raise ScenarioError(
                f"bank {self.id!r}: shortfall must be positive, got {self.shortfall!r}"
            )


@dataclass(frozen=True)
class MarketScenario:
    banks: tuple
    repo_rate: float
    density: DensityCurve
    haircut: HaircutCurve
    market_cap: float

    def __post_init__(self):
        banks = tuple(self.banks)
        object.__setattr__(self, "banks", banks)
        if not banks:
            raise ScenarioError("at least one bank required")
        ids = [b.id for b in banks]
        if len(set(ids)) != len(ids):
            raise ScenarioError("bank ids must be unique")
        if not np.isfinite(self.repo_rate) or self.repo_rate < 0:
            raise ScenarioError(f"repo rate must be >= 0, got {self.repo_rate!r}")
        if not self.market_cap > 0:
            raise ScenarioError(f"market cap must be positive, got {self.market_cap!r}")
        for name, curve in (("density", self.density), ("haircut", self.haircut)):
            if curve.cap < self.market_cap * (1 - 1e-12):
                raise ScenarioError(
                    f"{name} curve defined on [0, {curve.cap!r}] but market cap is {self.market_cap!r}"
                )
        if self.assets.sum() > self.curve_domain * (1 + 1e-12):
            raise ScenarioError("total assets exceed the curves' domain")

    @property
    def n(self) -> int:
        return len(self.banks)

    @property
    def ids(self) -> list[str]:
        return [b.id for b in self.banks]

    @property
    def assets(self) -> np.ndarray:
        return np.array([b.assets for b in self.banks], dtype=float)

    @property
    def shortfalls(self) -> np.ndarray:
        return np.array([b.shortfall for b in self.banks], dtype=float)

    @property
    def curve_domain(self) -> float:
        return min(self.density.cap, self.haircut.cap)

    def with_rate(self, r: float) -> "MarketScenario":
        return MarketScenario(self.banks, r, self.density, self.haircut, self.market_cap)

    @classmethod
    def linear(
        cls,
        assets: Sequence[float],
        shortfalls: Sequence[float],
        rate: float,
        alpha: float,
        intercept: float,
        haircut_alpha: float | None = None,
        market_cap: float | None = None,
        ids: Sequence[str] | None = None,
    ) -> "MarketScenario":
        """Scenario with ``f(σ) = 1 - ασ`` and ``g(s) = γ - α_g s`` (``α_g = α`` by default)."""
        assets = list(assets)
        shortfalls = list(shortfalls)
        if len(assets) != len(shortfalls):
            raise ScenarioError("assets and shortfalls differ in length")
        if ids is None:
            ids = [f"B{i + 1}" for i in range(len(assets))]
        cap = float(sum(assets)) if market_cap is None else float(market_cap)
        try:
            density = LinearDensity(alpha, cap)
            haircut = LinearHaircut(intercept, alpha if haircut_alpha is None else haircut_alpha, cap)
        except CurveError as exc:
            raise ScenarioError(str(exc)) from exc
        banks = tuple(BankAccount(str(i), float(a), float(h)) for i, a, h in zip(ids, assets, shortfalls))
        return cls(banks, float(rate), density, haircut, cap)


@dataclass(frozen=True, eq=False)
class PriceState:
    """Haircut value ``q`` and per-bank average prices ``qbar``."""

    q: float
    qbar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "qbar", np.asarray(self.qbar, dtype=float))

    def in_domain(self) -> bool:
        """Membership of the open set where ``0 < q < qbar_i <= 1`` for every bank."""
        return bool(0 < self.q <= 1 and np.all(self.qbar <= 1) and np.all(self.q < self.qbar))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.q], self.qbar])

    @classmethod
    def from_vector(cls, v) -> "PriceState":
        v = np.asarray(v, dtype=float)
        return cls(float(v[0]), v[1:].copy())


@dataclass(frozen=True, eq=False)
class LiquidationVector:
    """Per-bank sales with the residual of the fixed-point solve that produced them."""

    s: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))

    @property
    def total(self) -> float:
        return float(self.s.sum())

    def feasible(self, assets, tol: float = 1e-12) -> bool:
        return bool(np.all(self.s >= -tol) and np.all(self.s <= np.asarray(assets) + tol))


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    liquidations: LiquidationVector
    prices: PriceState
    borrowing: np.ndarray
    regime: tuple
    iterations: int
    converged: bool
    direction: Direction
    mechanism: Mechanism
    residual: float = 0.0
    path: list = field(default_factory=list, repr=False)

    @property
    def s(self) -> np.ndarray:
        return self.liquidations.s

    @property
    def q(self) -> float:
        return self.prices.q

    @property
    def qbar(self) -> np.ndarray:
        return self.prices.qbar
