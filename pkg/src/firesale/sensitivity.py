"""Sensitivity of a clearing solution to the repo rate.

With every bank's regime held fixed, the clearing conditions are smooth in
``r`` and implicit differentiation gives a small linear system in the price
derivatives.  A regime tie (two branches of a best response coinciding)
makes the derivative one-sided; the analytic routes refuse such points and
:func:`finite_difference_sensitivity` can be used instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clearing import ClearingConfig, picard_clearing
from .equilibrium import response_bounds, target_depth
from .model import Direction, EquilibriumReport, MarketScenario, Mechanism, Regime
from .pricing import price_jacobian, vwap_derivatives


class SensitivityError(RuntimeError):
    pass


class RegimeTieError(SensitivityError):
    pass


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    mechanism: Mechanism
    dq_dr: float
    dqbar_dr: object  # float under VWAP, per-bank array under LOB
    ds_dr: np.ndarray
    dtotal_dr: float
    regimes: tuple
    constants: dict = field(default_factory=dict)
    fd_fallback: bool = False

    @property
    def sets(self) -> dict:
        return {reg: [i for i, t in enumerate(self.regimes) if t is reg] for reg in Regime}


def _marginal_cost(scenario, s, mechanism):
    """``1 - (1+r) ∂(s_i f̄_i)/∂s_i`` at the current liquidations."""
    r = scenario.repo_rate
    if mechanism is Mechanism.VWAP:
        fh, d1, _ = vwap_derivatives(float(s.sum()), scenario.density)
        return 1.0 - (1.0 + r) * (fh + s * d1)
    depth = np.minimum.outer(s, s).sum(axis=1)
    return 1.0 - (1.0 + r) * scenario.density.value(depth)


def _snap_ties(s, tol):
    """Collapse values closer than ``tol`` onto one representative so ties are exact."""
    out = s.copy()
    order = np.argsort(s, kind="stable")
    start = 0
    for k in range(1, len(order) + 1):
        if k == len(order) or s[order[k]] - s[order[start]] > tol:
            out[order[start:k]] = s[order[start]]
            start = k
    return out


def _strict_regimes(scenario, report, tol=1e-9):
    """Regimes of ``report`` plus the zero-clamped lower-bound flags; raises on ties."""
    mech = report.mechanism
    s = report.s
    b = response_bounds(scenario, report.prices)
    a, h = scenario.assets, scenario.shortfalls
    qbar = report.qbar
    mc = _marginal_cost(scenario, s, mech)
    ids = scenario.ids
    clamped = np.zeros(scenario.n, dtype=bool)
    for i, reg in enumerate(report.regime):
        scale = max(1.0, a[i])
        if reg is Regime.INSOLVENT:
            if abs(h[i] - a[i] * qbar[i]) <= tol * scale:
                raise RegimeTieError(f"bank {ids[i]} sits exactly at the insolvency boundary; use one-sided differences")
            continue
        gap = b.upper[i] - b.lower[i]
        if gap <= tol * scale:
            raise RegimeTieError(f"bank {ids[i]}: lower and upper bounds coincide; use one-sided differences")
        if reg is Regime.UPPER and mc[i] >= -tol:
            raise RegimeTieError(f"bank {ids[i]}: interior optimum meets the upper bound; use one-sided differences")
        if reg is Regime.LOWER:
            if abs(b.raw_lower[i]) <= tol * scale:
                raise RegimeTieError(f"bank {ids[i]}: collateral bound touches zero; use one-sided differences")
            if mc[i] <= tol:
                raise RegimeTieError(f"bank {ids[i]}: interior optimum meets the lower bound; use one-sided differences")
            clamped[i] = b.raw_lower[i] < 0
        if reg is Regime.INTERIOR and min(s[i] - b.lower[i], b.upper[i] - s[i]) <= tol * scale:
            raise RegimeTieError(f"bank {ids[i]}: interior liquidation touches a bound; use one-sided differences")
    return report.regime, clamped


def _check_report(report, mechanism):
    if report.mechanism is not mechanism:
        raise SensitivityError(f"report was computed under {report.mechanism.value}, not {mechanism.value}")
    if not report.converged:
        raise SensitivityError("report did not converge")


def sensitivity_vwap(scenario: MarketScenario, report: EquilibriumReport) -> SensitivityReport:
    """Rate derivatives for a VWAP clearing via the two scalar price equations."""
    _check_report(report, Mechanism.VWAP)
    regimes, clamped = _strict_regimes(scenario, report)
    r = scenario.repo_rate
    s = report.s
    q, qbar = report.q, float(report.qbar[0])
    a, h = scenario.assets, scenario.shortfalls
    S = float(s.sum())
    fh, d1, d2 = vwap_derivatives(S, scenario.density)
    gp = float(scenario.haircut.derivative(S))

    I0 = [i for i, t in enumerate(regimes) if t is Regime.INTERIOR]
    IL = [i for i, t in enumerate(regimes) if t is Regime.LOWER and not clamped[i]]
    IU = [i for i, t in enumerate(regimes) if t is Regime.UPPER]
    m = len(I0)
    if m:
        s0 = float(np.mean(s[I0]))
        c = (d1 + s0 * d2) / (2 * d1 + s0 * d2)
        d = -(fh + s0 * d1) / ((1 + r) * (2 * d1 + s0 * d2))
        c_t = (1 - c) / (1 + c * (m - 1))
        d_t = m * d / (1 + c * (m - 1))
    else:
        s0, c, d, c_t, d_t = float("nan"), float("nan"), float("nan"), 1.0, 0.0
    gap2 = (qbar - q) ** 2
    A = float(sum((h[i] - a[i] * qbar) / gap2 for i in IL))
    B = float(sum((h[i] - a[i] * q) / gap2 for i in IL) + sum(h[i] / qbar**2 for i in IU))

    # dq = [d̃ + c̃ A dq - c̃ B dqbar] g',  dqbar = [same] f̂'
    W = np.array([[1 - c_t * A * gp, c_t * B * gp], [-c_t * A * d1, 1 + c_t * B * d1]])
    rhs = np.array([d_t * gp, d_t * d1])
    if abs(np.linalg.det(W)) < 1e-14:
        raise SensitivityError(f"price system is singular: 1 - c̃(A g' - B f̂') = {1 - c_t * (A * gp - B * d1):.3e}")
    dq, dqbar = np.linalg.solve(W, rhs)

    ds = np.zeros(scenario.n)
    for i in IU:
        ds[i] = -h[i] / qbar**2 * dqbar
    for i in IL:
        ds[i] = (h[i] - a[i] * qbar) / gap2 * dq - (h[i] - a[i] * q) / gap2 * dqbar
    if m:
        outside = ds.sum()
        ds[I0] = d / (1 + c * (m - 1)) - c / (1 + c * (m - 1)) * outside
    constants = dict(c=c, d=d, c_tilde=c_t, d_tilde=d_t, A=A, B=B, s0=s0, W=W, b=rhs)
    return SensitivityReport(
        Mechanism.VWAP,
        float(dq),
        float(dqbar),
        ds,
        float(dq / gp),
        regimes,
        constants,
    )


def sensitivity_lob(scenario: MarketScenario, report: EquilibriumReport) -> SensitivityReport:
    """Rate derivatives for a LOB clearing from the ``(n+1)``-dimensional price system.

    Unknowns are ``x = (∂_r qbar_1, ..., ∂_r qbar_n, ∂_r q)``.  Each bank's
    ``∂_r s_i`` is affine in ``x`` (``ds = E x + e``) by its regime, and the
    price maps close the system: ``W = I - [J; g' 1ᵀ] E``, ``b = [J; g' 1ᵀ] e``
    with ``J`` the Jacobian of the book prices.
    """
    _check_report(report, Mechanism.LOB)
    regimes, clamped = _strict_regimes(scenario, report)
    r = scenario.repo_rate
    n = scenario.n
    a, h = scenario.assets, scenario.shortfalls
    q, qbar = report.q, report.qbar
    s = _snap_ties(report.s, 1e-12 * max(1.0, float(a.max())))
    S = float(s.sum())
    gp = float(scenario.haircut.derivative(S))
    dens = scenario.density

    E = np.zeros((n, n + 1))
    e = np.zeros(n)
    I0 = [i for i, t in enumerate(regimes) if t is Regime.INTERIOR]
    for i, t in enumerate(regimes):
        if t is Regime.UPPER:
            E[i, i] = -s[i] / qbar[i]
        elif t is Regime.LOWER and not clamped[i]:
            gap2 = (qbar[i] - q) ** 2
            E[i, i] = -(h[i] - a[i] * q) / gap2
            E[i, n] = (h[i] - a[i] * qbar[i]) / gap2
    c_t = float("nan")
    mult = 0
    if I0:
        level = float(s[I0[0]])
        below = [j for j in range(n) if s[j] < level]
        if any(regimes[j] is Regime.LOWER and not clamped[j] for j in below):
            raise SensitivityError("a bounded-below bank sells less than the interior level")
        mult = n - len(below)
        depth = float(np.minimum(s, level).sum())
        if not np.isfinite(target_depth(r, dens)):
            raise SensitivityError("interior target lies beyond the order book")
        c_t = -dens.value(depth) / ((1 + r) * dens.derivative(depth) * mult)
        row = -E[below].sum(axis=0) / mult
        for i in I0:
            E[i] = row
            e[i] = c_t
    J = price_jacobian(s, dens, Mechanism.LOB)
    Phi = np.vstack([J, np.full((1, n), gp)])
    W = np.eye(n + 1) - Phi @ E
    b = Phi @ e
    cond = np.linalg.cond(W)
    if not np.isfinite(cond) or cond > 1e12:
        raise SensitivityError(f"price system is singular (condition number {cond:.3e})")
    x = np.linalg.solve(W, b)
    ds = E @ x + e
    constants = dict(c_tilde=c_t, multiplicity=mult, W=W, b=b, E=E, e=e, J=J)
    return SensitivityReport(
        Mechanism.LOB,
        float(x[n]),
        x[:n].copy(),
        ds,
        float(x[n] / gp),
        regimes,
        constants,
    )


def finite_difference_sensitivity(
    scenario: MarketScenario,
    mechanism,
    dr: float = 1e-6,
    direction=Direction.MAXIMAL,
    regimes=None,
) -> SensitivityReport:
    """Central differences of the clearing solution in the repo rate."""
    mech = Mechanism(mechanism)
    cfg = ClearingConfig(mechanism=mech, direction=direction)
    r = scenario.repo_rate
    lo = max(r - dr, 0.0)
    up = picard_clearing(scenario.with_rate(r + dr), cfg)
    dn = picard_clearing(scenario.with_rate(lo), cfg)
    width = r + dr - lo
    dq = (up.q - dn.q) / width
    dqbar = (up.qbar - dn.qbar) / width
    ds = (up.s - dn.s) / width
    if regimes is None:
        regimes = picard_clearing(scenario, cfg).regime
    return SensitivityReport(mech, float(dq), dqbar, ds, float(ds.sum()), tuple(regimes), {"dr": dr}, fd_fallback=True)


def rate_sensitivity(
    scenario: MarketScenario,
    report: EquilibriumReport,
    fallback_fd: bool = False,
    dr: float = 1e-6,
) -> SensitivityReport:
    """Dispatch on the report's mechanism; on a regime tie optionally fall back to differences."""
    fn = sensitivity_vwap if report.mechanism is Mechanism.VWAP else sensitivity_lob
    try:
        return fn(scenario, report)
    except RegimeTieError:
        if not fallback_fd:
            raise
        return finite_difference_sensitivity(scenario, report.mechanism, dr, report.direction, report.regime)
