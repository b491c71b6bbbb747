"""Liquidation-space route to the extremal LOB clearing solutions.

Under the LOB the map from prices to equilibrium prices need not be
monotone: when small sellers sell more, the shared interior level drops.
The clearing liquidations, however, form a lattice.  Dropping the collateral
lower bound gives a relaxed game with a unique equilibrium ``ŝ``, and the
operator

    L_i(s) = inf{x in [ŝ_i, a_i] : P_i(x, s_-i) + (a_i - x) g(x + Σ_{j≠i} s_j) >= h_i ∧ P_i(a_i, s_-i)}

is nondecreasing on ``[ŝ, a]``.  Its fixed points are exactly the clearing
liquidations, so iterating from ``ŝ`` (or from ``a``) climbs (or descends)
monotonically to the least (or greatest) one.  Prices are antitone in
liquidations, so these are the maximal (or minimal) clearing prices.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .equilibrium import target_depth
from .model import MarketScenario
from .pricing import lob_own_proceeds

_EPS = 1e-14


def relaxed_equilibrium(scenario: MarketScenario) -> np.ndarray:
    """Unique LOB equilibrium of the game without the collateral lower bound.

    All unfinished sellers consume the book at the same speed and so share
    one cumulative-proceeds curve.  A seller stops when it runs out of
    shares, when its proceeds reach its shortfall, or when the book depth
    reaches the interior target ``f⁻¹(1/(1+r))``.  Events are processed in
    time order.
    """
    a, h = scenario.assets, scenario.shortfalls
    F = scenario.density.integral
    d_star = target_depth(scenario.repo_rate, scenario.density)
    s = np.zeros(scenario.n)
    active = np.ones(scenario.n, dtype=bool)
    base = 0.0  # depth contributed by sellers that have stopped
    t0 = 0.0
    paid = 0.0  # proceeds of each active seller so far
    while active.any():
        k = int(active.sum())
        t_asset = float(a[active].min())
        t_depth = (d_star - base) / k if np.isfinite(d_star) else np.inf
        t_end = min(t_asset, t_depth)
        F0 = float(F(base + k * t0))
        need = F0 + k * (float(h[active].min()) - paid)
        if need <= F0:
            t_h = t0
        elif float(F(base + k * t_end)) >= need:
            t_h = brentq(lambda t: float(F(base + k * t)) - need, t0, t_end, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        else:
            t_h = np.inf
        t1 = max(min(t_end, t_h), t0)
        paid += (float(F(base + k * t1)) - F0) / k
        scale = max(1.0, t1)
        stop = active & ((a <= t1 + _EPS * scale) | (h <= paid + _EPS * max(1.0, paid)))
        if t1 >= t_depth - _EPS * scale:
            stop = active.copy()
        s[stop] = np.minimum(t1, a[stop])
        base += float(s[stop].sum())
        active &= ~stop
        t0 = t1
    return s


def _collateral_root(i, s, floor, scenario):
    a_i, h_i = scenario.assets[i], scenario.shortfalls[i]
    others = np.delete(s, i)
    rest = float(others.sum())
    dens, g, M = scenario.density, scenario.haircut, scenario.market_cap
    target = min(h_i, lob_own_proceeds(a_i, others, dens))

    def phi(x):
        return lob_own_proceeds(x, others, dens) + (a_i - x) * float(g.value(min(x + rest, M))) - target

    lo = float(floor)
    if phi(lo) >= 0:
        return lo
    if phi(a_i) <= 0:
        return float(a_i)
    return brentq(phi, lo, a_i, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def lattice_operator(s, floor, scenario: MarketScenario) -> np.ndarray:
    """One synchronous application of ``L`` with lower end ``floor`` (normally ``ŝ``)."""
    s = np.asarray(s, dtype=float)
    return np.array([_collateral_root(i, s, floor[i], scenario) for i in range(scenario.n)])
