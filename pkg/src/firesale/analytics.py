"""Rate sweeps: one maximal clearing per (rate, mechanism) pair."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .clearing import ClearingConfig, ClearingError, picard_clearing, total_outcomes
from .equilibrium import InnerSolverError, PriceDomainError
from .model import Direction, MarketScenario, Mechanism

SWEEP_COLUMNS = ("r", "mechanism", "total_liquidation", "total_borrowing", "q", "min_qbar", "converged")


def _sweep_row(scenario: MarketScenario, r: float, mechanism: Mechanism) -> dict:
    cfg = ClearingConfig(mechanism=mechanism, direction=Direction.MAXIMAL)
    try:
        rep = picard_clearing(scenario.with_rate(r), cfg)
    except (ClearingError, InnerSolverError, PriceDomainError) as exc:
        nan = float("nan")
        return dict(r=r, mechanism=mechanism.value, total_liquidation=nan, total_borrowing=nan,
                    q=nan, min_qbar=nan, converged=False, regimes=(), error=str(exc))
    tot = total_outcomes(rep)
    return dict(
        r=r,
        mechanism=mechanism.value,
        total_liquidation=tot["total_liquidation"],
        total_borrowing=tot["total_borrowing"],
        q=rep.q,
        min_qbar=float(np.min(rep.qbar)),
        converged=rep.converged,
        regimes=tuple(t.value for t in rep.regime),
    )


def _star(args):
    return _sweep_row(*args)


def rate_sweep(scenario: MarketScenario, r_grid, mechanisms=("vwap", "lob"), workers: int = 1) -> list[dict]:
    """Rows ordered by rate, then by mechanism in the order given.

    Each row carries the :data:`SWEEP_COLUMNS` plus the per-bank ``regimes``.
    A failed clearing is recorded in its row (``converged=False`` plus an
    ``error`` message) rather than raised.  ``workers > 1`` fans rows out to
    worker processes; the row order does not depend on it.
    """
    rates = [float(r) for r in r_grid]
    if any(not r >= 0 for r in rates):
        raise ValueError("repo rates must be nonnegative")
    mechs = [Mechanism(m) for m in mechanisms]
    jobs = [(scenario, r, m) for r in rates for m in mechs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_star, jobs))
    return [_sweep_row(*job) for job in jobs]
