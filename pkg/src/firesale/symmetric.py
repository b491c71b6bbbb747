"""Closed-form clearing for identical banks with linear curves.

Every bank holds ``a`` shares and owes ``h``; the book density is
``f(σ) = 1 - ασ`` and the haircut ``g(s) = 1/2 - αs``.  The shortfall axis
splits into four regions:

H1  liquidation only          s = h / qbar
H2  interior first-order      s = 2r/(α(1+r)(n+1))  (VWAP)  or  r/(α(1+r)n)  (LOB)
H3  maximal borrowing         s = (h - aq)/(qbar - q)
H4  insolvent                 s = a
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

from .model import MarketScenario, Mechanism


class SymmetricDomainError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricScenario:
    n: int
    a: float
    h: float
    r: float
    alpha: float

    def __post_init__(self):
        if self.n < 2:
            raise SymmetricDomainError(f"need n >= 2 banks, got {self.n}")
        if not self.a > 0:
            raise SymmetricDomainError("assets must be positive")
        if self.h < 0:
            raise SymmetricDomainError("shortfall must be nonnegative")
        if not 0 < self.r < 1 / 3:
            raise SymmetricDomainError(f"repo rate must lie in (0, 1/3), got {self.r!r}")
        lo, hi = self.alpha_window
        if not lo < self.alpha < hi:
            raise SymmetricDomainError(f"alpha={self.alpha!r} outside ({lo!r}, {hi!r})")

    @property
    def alpha_window(self) -> tuple[float, float]:
        n, a, r = self.n, self.a, self.r
        return 2 * r / ((1 + r) * (n + 1) * a), 1 / (2 * n * a)

    def to_scenario(self, rate: float | None = None) -> MarketScenario:
        return MarketScenario.linear(
            [self.a] * self.n,
            [self.h] * self.n,
            self.r if rate is None else rate,
            self.alpha,
            0.5,
            market_cap=self.n * self.a,
        )


@dataclass(frozen=True)
class SymmetricSolution:
    q: float
    qbar: float
    s: float
    region: str


def region_bounds(sym: SymmetricScenario, mechanism) -> tuple[float, float, float]:
    """Left endpoints of H2, H3 and H4 on the shortfall axis."""
    n, a, r, al = sym.n, sym.a, sym.r, sym.alpha
    k = r / (1 + r)
    h4 = a * (1 - al * n * a / 2)
    if Mechanism(mechanism) is Mechanism.VWAP:
        u = 2 * r / (al * (1 + r) * (n + 1))
        w = k * n / (n + 1)
        return u * (1 - w), u * (0.5 + w) + a * (0.5 - 2 * w), h4
    u = r / (al * (1 + r) * n)
    return u * (1 - k / 2), u / 2 * (1 + k) + a * (0.5 - k), h4


def interior_level(sym: SymmetricScenario, mechanism) -> float:
    n, r, al = sym.n, sym.r, sym.alpha
    if Mechanism(mechanism) is Mechanism.VWAP:
        return 2 * r / (al * (1 + r) * (n + 1))
    return r / (al * (1 + r) * n)


def _branch(sym, mechanism, region, h=None):
    n, a, r, al = sym.n, sym.a, sym.r, sym.alpha
    h = sym.h if h is None else h
    k = r / (1 + r)
    vwap = Mechanism(mechanism) is Mechanism.VWAP
    if region == "H1":
        root = sqrt(max(1 - 2 * al * n * h, 0.0))
        qbar = (1 + root) / 2
        return -0.5 + root, qbar, h / qbar
    if region == "H2":
        if vwap:
            return 0.5 - 2 * k * n / (n + 1), 1 - k * n / (n + 1), interior_level(sym, mechanism)
        return 0.5 - k, 1 - k / 2, interior_level(sym, mechanism)
    if region == "H3":
        root = sqrt(max(1 + 8 * al * n * (h - a) + 4 * (al * n * a) ** 2, 0.0))
        q = 1 - al * n * a - root / 2
        qbar = 1.25 - al * n * a / 2 - root / 4
        return q, qbar, (h - a * q) / (qbar - q)
    return 0.5 - al * n * a, 1 - al * n * a / 2, a


def branch_values(sym: SymmetricScenario, mechanism, region: str, h: float | None = None) -> tuple[float, float, float]:
    """``(q, qbar, s)`` of one region's formula, evaluated at ``h`` (default ``sym.h``)."""
    return _branch(sym, mechanism, region, h)


def symmetric_solve(sym: SymmetricScenario, mechanism) -> SymmetricSolution:
    b2, b3, b4 = region_bounds(sym, mechanism)
    h = sym.h
    if h < b2:
        region = "H1"
    elif h < b3:
        region = "H2"
    elif h < b4:
        region = "H3"
    else:
        region = "H4"
    q, qbar, s = _branch(sym, mechanism, region)
    return SymmetricSolution(q, qbar, s, region)
