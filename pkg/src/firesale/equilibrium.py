"""Best responses and the inner Nash equilibrium at fixed prices.

At a fixed haircut ``q`` and prices ``qbar`` bank ``i`` minimises
``s(1 - f̄_i) + r(h_i - s f̄_i)`` over ``[lower_i, upper_i]`` where
``lower_i = ((h_i - a_i q)/(qbar_i - q))^+`` and ``upper_i = h_i/qbar_i``;
a bank with ``h_i >= a_i qbar_i`` sells everything.  The objective is convex,
so the minimiser is the first-order root clamped to the bounds.

Both mechanisms reduce the joint fixed point to one scalar:

* VWAP prices depend only on the total ``S``; every unclamped bank satisfies
  ``f̂(S) + s f̂'(S) = 1/(1+r)``, so ``S`` solves ``S = Σ_i clamp_i(S)``.
* LOB first-order conditions read ``f(D_i) = 1/(1+r)`` with
  ``D_i = Σ_j min(s_j, s_i)``.  All unclamped banks therefore share one
  level ``t`` with ``Σ_i min(clamp_i(t), t) = f⁻¹(1/(1+r))``; the left side is
  piecewise linear in ``t`` and is inverted exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import LiquidationVector, MarketScenario, Mechanism, PriceState, Regime
from .pricing import lob_own_depth, own_proceeds, vwap_derivatives, vwap_price


class InnerSolverError(RuntimeError):
    def __init__(self, message, last_iterate=None, residual=float("nan")):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class PriceDomainError(ValueError):
    """Prices outside the set where ``0 < q < qbar_i <= 1``."""


@dataclass(frozen=True, eq=False)
class ResponseBounds:
    lower: np.ndarray
    upper: np.ndarray
    insolvent: np.ndarray
    raw_lower: np.ndarray


@dataclass(frozen=True)
class InteriorTarget:
    """Unclamped first-order target.

    For the VWAP ``level`` is the equilibrium total and ``s0`` the per-bank
    interior candidates; for the LOB ``depth`` is ``f⁻¹(1/(1+r))`` and
    ``level`` the liquidation shared by every interior bank.
    """

    mechanism: Mechanism
    depth: float
    level: float
    s0: tuple


def _check_prices(prices: PriceState, n: int):
    if prices.qbar.shape != (n,):
        raise PriceDomainError(f"expected {n} prices, got shape {prices.qbar.shape}")
    if not prices.in_domain():
        raise PriceDomainError(f"prices outside the admissible set: q={prices.q!r}, qbar={prices.qbar!r}")


def response_bounds(scenario: MarketScenario, prices: PriceState) -> ResponseBounds:
    a = scenario.assets
    h = scenario.shortfalls
    q, qbar = prices.q, prices.qbar
    raw = (h - a * q) / (qbar - q)
    insolvent = h >= a * qbar
    upper = np.where(insolvent, a, h / qbar)
    lower = np.where(insolvent, a, np.maximum(raw, 0.0))
    return ResponseBounds(lower, upper, insolvent, raw)


def target_depth(r: float, density) -> float:
    """LOB interior depth ``f⁻¹(1/(1+r))``; ``inf`` when the book never gets that cheap."""
    p = 1.0 / (1.0 + r)
    if p < density.value(density.cap):
        return float("inf")
    return float(density.inverse(p))


def _vwap_s0(i, s_others_total, scenario):
    """Interior root of ``1 - (1+r)(f̂(S) + s f̂'(S)) = 0`` in ``[0, a_i]``."""
    r = scenario.repo_rate
    a_i = scenario.assets[i]
    dens = scenario.density

    def foc(x):
        fh, d1, _ = vwap_derivatives(x + s_others_total, dens)
        return 1.0 - (1.0 + r) * (fh + x * d1)

    lo, hi = foc(0.0), foc(a_i)
    if lo >= 0:
        return 0.0
    if hi <= 0:
        return a_i
    return brentq(foc, 0.0, a_i, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _lob_s0(others, d_star):
    """Solve ``Σ_j min(o_j, x) + x = d_star`` (piecewise linear, increasing)."""
    if not np.isfinite(d_star):
        return float("inf")
    o = np.sort(np.asarray(others, dtype=float))
    n = o.size + 1
    bp = np.concatenate([[0.0], o])
    vals = lob_own_depth(bp, o)
    k = np.searchsorted(vals, d_star, side="left")
    if k == 0:
        return 0.0
    if k >= bp.size:
        return float(bp[-1] + (d_star - vals[-1]))
    # active slope on (bp[k-1], bp[k]) is n - (k-1)
    return float(bp[k - 1] + (d_star - vals[k - 1]) / (n - (k - 1)))


def best_response(i: int, s_minus, prices: PriceState, scenario: MarketScenario, mechanism) -> float:
    """Bank ``i``'s minimiser given the others' liquidations.

    ``s_minus`` may hold the ``n - 1`` other sales or a full vector whose
    ``i``-th entry is ignored.
    """
    mechanism = Mechanism(mechanism)
    n = scenario.n
    _check_prices(prices, n)
    s_minus = np.asarray(s_minus, dtype=float)
    others = np.delete(s_minus, i) if s_minus.size == n else s_minus
    if others.size != n - 1:
        raise ValueError(f"expected {n - 1} other liquidations, got {others.size}")
    b = response_bounds(scenario, prices)
    if b.insolvent[i]:
        return float(scenario.assets[i])
    if mechanism is Mechanism.VWAP:
        s0 = _vwap_s0(i, float(others.sum()), scenario)
    else:
        s0 = _lob_s0(others, target_depth(scenario.repo_rate, scenario.density))
    return float(max(b.lower[i], min(s0, b.upper[i])))


def _vwap_candidates(S, scenario, b):
    r = scenario.repo_rate
    fh, d1, _ = vwap_derivatives(S, scenario.density)
    cand = (1.0 / (1.0 + r) - fh) / d1
    return np.where(b.insolvent, scenario.assets, np.clip(np.maximum(cand, 0.0), b.lower, b.upper)), cand


def _inner_vwap(scenario, b):
    a = scenario.assets
    top = float(a.sum())

    def phi(S):
        return float(_vwap_candidates(S, scenario, b)[0].sum()) - S

    lo, hi = phi(0.0), phi(top)
    if lo <= 0:
        S = 0.0
    elif hi >= 0:
        S = top
    else:
        S = brentq(phi, 0.0, top, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    s, cand = _vwap_candidates(S, scenario, b)
    residual = abs(float(s.sum()) - S)
    return s, S, cand, residual


def _lob_level(scenario, b, d_star):
    """Water level ``t`` with ``Σ_i min(s_i(t), t) = d_star``."""
    a = scenario.assets
    ins = b.insolvent

    def sat(t):
        t = np.atleast_1d(t)[:, None]
        s_t = np.where(ins[None, :], a[None, :], np.clip(t, b.lower[None, :], b.upper[None, :]))
        return np.minimum(s_t, t).sum(axis=1)

    bp = np.unique(np.concatenate([[0.0], b.lower, b.upper, a[ins]]))
    vals = sat(bp)
    if not np.isfinite(d_star) or d_star > vals[-1]:
        return float("inf")
    k = int(np.searchsorted(vals, d_star, side="left"))
    if k == 0:
        return 0.0
    t0, t1 = bp[k - 1], bp[k]
    g0, g1 = vals[k - 1], vals[k]
    return float(t0 + (d_star - g0) * (t1 - t0) / (g1 - g0))


def _inner_lob(scenario, b):
    d_star = target_depth(scenario.repo_rate, scenario.density)
    t = _lob_level(scenario, b, d_star)
    s = np.where(b.insolvent, scenario.assets, np.clip(t, b.lower, b.upper))
    if np.isfinite(t):
        residual = abs(float(np.minimum(s, t).sum()) - d_star) if t > 0 else 0.0
    else:
        residual = 0.0
    return s, t, d_star, residual


def inner_equilibrium(
    prices: PriceState,
    scenario: MarketScenario,
    mechanism,
    tol: float = 1e-12,
) -> LiquidationVector:
    """Unique equilibrium liquidations of the game at fixed prices."""
    mechanism = Mechanism(mechanism)
    _check_prices(prices, scenario.n)
    b = response_bounds(scenario, prices)
    if mechanism is Mechanism.VWAP:
        s, _, _, residual = _inner_vwap(scenario, b)
    else:
        s, _, _, residual = _inner_lob(scenario, b)
    scale = max(1.0, float(scenario.assets.sum()))
    if not residual <= tol * scale * 100:
        raise InnerSolverError("inner equilibrium did not converge", s, residual)
    return LiquidationVector(s, residual, 1)


def interior_target(prices: PriceState, scenario: MarketScenario, mechanism) -> InteriorTarget:
    mechanism = Mechanism(mechanism)
    _check_prices(prices, scenario.n)
    b = response_bounds(scenario, prices)
    if mechanism is Mechanism.VWAP:
        _, S, cand, _ = _inner_vwap(scenario, b)
        return InteriorTarget(mechanism, S, S, tuple(np.broadcast_to(np.maximum(cand, 0.0), (scenario.n,)).tolist()))
    _, t, d_star, _ = _inner_lob(scenario, b)
    return InteriorTarget(mechanism, d_star, t, tuple([t] * scenario.n))


def best_response_iteration(
    prices: PriceState,
    scenario: MarketScenario,
    mechanism,
    start=None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> LiquidationVector:
    """Plain synchronous best-response iteration (reference route, slow).

    Used to cross-check the scalar reductions; not guaranteed to converge
    for strong price impact.
    """
    n = scenario.n
    s = np.zeros(n) if start is None else np.asarray(start, dtype=float).copy()
    res = np.inf
    for it in range(1, max_iter + 1):
        new = np.array([best_response(i, s, prices, scenario, mechanism) for i in range(n)])
        res = float(np.max(np.abs(new - s)))
        # damping keeps the Jacobi sweep stable when the aggregate response is steep
        s = 0.5 * (s + new)
        if res < tol:
            return LiquidationVector(new, res, it)
    raise InnerSolverError("best-response iteration hit the cap", s, res)


def equilibrium_residual(s, prices: PriceState, scenario: MarketScenario, mechanism) -> float:
    """``max_i |s_i - BR_i(s_{-i})|``."""
    s = np.asarray(s, dtype=float)
    return float(
        max(abs(s[i] - best_response(i, s, prices, scenario, mechanism)) for i in range(scenario.n))
    )


def objective(x, i: int, s, scenario: MarketScenario, mechanism):
    """Cost ``x(1 - f̄_i) + r(h_i - x f̄_i)`` of bank ``i`` selling ``x`` against ``s_{-i}``."""
    r = scenario.repo_rate
    P = own_proceeds(x, i, s, scenario.density, mechanism)
    return np.asarray(x) - (1.0 + r) * P + r * scenario.shortfalls[i]


def classify_regimes(
    s,
    prices: PriceState,
    scenario: MarketScenario,
    mechanism,
    tol: float = 1e-9,
) -> tuple:
    """Tag each bank with its active branch; bounds win ties over the interior."""
    s = np.asarray(s, dtype=float)
    b = response_bounds(scenario, prices)
    scale = np.maximum(1.0, scenario.assets)
    tags = []
    for i in range(scenario.n):
        if b.insolvent[i]:
            tags.append(Regime.INSOLVENT)
        elif abs(s[i] - b.lower[i]) <= tol * scale[i]:
            tags.append(Regime.LOWER)
        elif abs(s[i] - b.upper[i]) <= tol * scale[i]:
            tags.append(Regime.UPPER)
        else:
            tags.append(Regime.INTERIOR)
    return tuple(tags)


def unclamped_targets(s, prices: PriceState, scenario: MarketScenario, mechanism) -> np.ndarray:
    """Each bank's first-order root against the others' current sales (before clamping)."""
    mechanism = Mechanism(mechanism)
    s = np.asarray(s, dtype=float)
    out = np.empty(scenario.n)
    d_star = target_depth(scenario.repo_rate, scenario.density)
    for i in range(scenario.n):
        others = np.delete(s, i)
        if mechanism is Mechanism.VWAP:
            out[i] = _vwap_s0(i, float(others.sum()), scenario)
        else:
            out[i] = _lob_s0(others, d_star)
    return out


__all__ = [
    "InnerSolverError",
    "PriceDomainError",
    "ResponseBounds",
    "InteriorTarget",
    "response_bounds",
    "target_depth",
    "best_response",
    "inner_equilibrium",
    "interior_target",
    "best_response_iteration",
    "equilibrium_residual",
    "objective",
    "classify_regimes",
    "unclamped_targets",
    "vwap_price",
]
