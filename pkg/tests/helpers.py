"""Shared scenario builders for the test suite."""
from __future__ import annotations

import numpy as np

from firesale import (
    BalanceSheetRecord,
    BankAccount,
    LinearDensity,
    LinearHaircut,
    MarketScenario,
    SymmetricScenario,
    TabulatedDensity,
    TabulatedHaircut,
    validate_scenario,
)
from firesale.symmetric import region_bounds


def golden_scenario(rate=0.01):
    return MarketScenario.linear([1, 2], [0.3, 1.2], rate, 0.05, 0.5)


def multiplicity_scenario():
    # f̂(s) = 1 - s/4 is the average of f(σ) = 1 - σ/2; g(s) = 0.7 - s/4
    return MarketScenario.linear([1, 1], [0.6, 0.6], 0.0, 0.5, 0.7, haircut_alpha=0.25, market_cap=2)


def _convex_tabulated(rng, cap, top, drop, pieces, cls):
    # decreasing convex: negative slopes growing toward zero
    slopes = -np.sort(rng.uniform(0.2, 1.0, pieces))[::-1]
    widths = np.full(pieces, cap / pieces)
    fall = -(slopes * widths).sum()
    values = top + np.concatenate([[0.0], np.cumsum(slopes * widths)]) * drop / fall
    knots = np.concatenate([[0.0], np.cumsum(widths)])
    knots[-1] = cap
    return cls(tuple(knots), tuple(values))


def random_scenario(rng, n_max=5, tabulated=None, points=201):
    """A scenario passing :func:`validate_scenario` (redrawn until it does)."""
    while True:
        sc = _draw_scenario(rng, n_max, tabulated)
        if validate_scenario(sc, points).passed:
            return sc


def _draw_scenario(rng, n_max, tabulated):
    """A candidate scenario; it may violate the standing assumptions.

    Price impact is kept mild so the separation and collateral checks hold;
    roughly half the draws have large enough impact that the uniqueness
    condition fails.
    """
    n = int(rng.integers(1, n_max + 1))
    a = rng.uniform(0.5, 2.0, n)
    M = float(a.sum()) * rng.uniform(1.0, 1.5)
    r = float(rng.choice([0.0, rng.uniform(0.0, 0.2)]))
    gamma = rng.uniform(0.4, 0.8)
    impact = rng.uniform(0.02, 0.5)
    if tabulated is None:
        tabulated = rng.random() < 0.3
    if tabulated:
        density = _convex_tabulated(rng, M, 1.0, impact, int(rng.integers(2, 5)), TabulatedDensity)
        haircut = _convex_tabulated(rng, M, gamma, rng.uniform(impact, 2 * impact) * gamma, int(rng.integers(1, 4)), TabulatedHaircut)
    else:
        alpha = impact / M
        density = LinearDensity(alpha, M)
        haircut = LinearHaircut(gamma, alpha * rng.uniform(1.0, 2.0), M)
    # shortfalls spread across all regimes, including some insolvent banks
    h = a * rng.uniform(0.05, 1.05, n)
    banks = tuple(BankAccount(f"B{i + 1}", float(a[i]), float(h[i])) for i in range(n))
    return MarketScenario(banks, r, density, haircut, M)


def symmetric_case(rng, region, mechanism):
    """A :class:`SymmetricScenario` whose shortfall lies inside ``region``."""
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        a = rng.uniform(0.5, 2.0)
        r = rng.uniform(0.01, 0.3)
        lo = 2 * r / ((1 + r) * (n + 1) * a)
        hi = 1 / (2 * n * a)
        if lo >= hi:
            continue
        alpha = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
        sym = SymmetricScenario(n, a, 0.0, r, alpha)
        b2, b3, b4 = region_bounds(sym, mechanism)
        edges = {"H1": (0.0, b2), "H2": (b2, b3), "H3": (b3, b4), "H4": (b4, 1.2 * a)}[region]
        if edges[1] - edges[0] < 1e-3:
            continue
        h = rng.uniform(edges[0] + 0.05 * (edges[1] - edges[0]), edges[1] - 0.05 * (edges[1] - edges[0]))
        if h <= 0:
            continue
        return SymmetricScenario(n, a, h, r, alpha)
    raise RuntimeError(f"could not sample region {region}")


def eba_records(n=30, seed=7):
    """Synthetic balance sheets with EBA-like proportions (no real data ships here)."""
    rng = np.random.default_rng(seed)
    T = np.exp(rng.normal(np.log(2e5), 1.0, n))
    C = T * rng.uniform(0.03, 0.08, n)
    R = rng.uniform(0.08, 0.2, n)
    return [BalanceSheetRecord(f"EB{i:02d}", float(T[i]), float(C[i]), float(R[i])) for i in range(n)]


def stable_sensitivity_cases(rng, mechanism, count, dr=1e-6):
    """Random scenarios with a nonempty interior set whose regimes survive ``r ± dr``."""
    from firesale import Regime, RegimeTieError, picard_clearing, rate_sensitivity

    out = []
    while len(out) < count:
        sc = random_scenario(rng).with_rate(float(rng.uniform(0.02, 0.2)))
        rep = picard_clearing(sc, mechanism=mechanism)
        if Regime.INTERIOR not in rep.regime:
            continue
        try:
            rate_sensitivity(sc, rep)
        except RegimeTieError:
            continue
        shifted = [picard_clearing(sc.with_rate(sc.repo_rate + d), mechanism=mechanism).regime for d in (-dr, dr)]
        if all(t == rep.regime for t in shifted):
            out.append((sc, rep))
    return out


def relative_gap(analytic, reference):
    """Sup-norm gap relative to the reference's sup-norm."""
    a = np.atleast_1d(np.asarray(analytic, dtype=float))
    b = np.atleast_1d(np.asarray(reference, dtype=float))
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
