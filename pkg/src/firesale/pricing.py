"""Inverse demand under the VWAP and limit-order-book mechanisms.

The LOB consumes the book with every active seller executing at the same
speed.  Parametrising by "time" ``t`` (shares sold so far by each active
bank) the depth consumed is ``D(t) = Σ_j min(s_j, t)``, so bank ``i`` raises
``P_i = ∫_0^{s_i} f(D(t)) dt``.  Between consecutive order statistics ``D``
is linear with slope equal to the number of banks still selling, which makes
every integral below an exact difference of ``F``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import CurveError, _check_domain
from .model import Mechanism


class PricingError(ValueError):
    """Liquidations outside the order book's domain."""


@dataclass(frozen=True, eq=False)
class LobSegmentation:
    """Order-statistics segmentation of the book.

    ``boundaries[j]`` is the depth consumed once the ``j`` smallest sellers are
    done (``boundaries[0] = 0``); ``ranks`` are 1-based and tied sellers share
    the minimal rank.
    """

    permutation: np.ndarray
    boundaries: np.ndarray
    ranks: np.ndarray

    @property
    def depth(self) -> float:
        return float(self.boundaries[-1])


def vwap_price(total, density):
    """Common average price ``F(S)/S`` (1 for an empty sale)."""
    try:
        _check_domain(total, density.cap, "vwap")
    except CurveError as exc:
        raise PricingError(str(exc)) from exc
    total = np.asarray(total, dtype=float)
    safe = np.where(total > 0, total, 1.0)
    out = np.where(total > 0, density.integral(safe) / safe, 1.0)
    return out if out.ndim else float(out)


def vwap_derivatives(total: float, density) -> tuple[float, float, float]:
    """``(f̂, f̂', f̂'')`` of the VWAP price as a function of the total sale."""
    S = float(total)
    if S <= 0:
        return 1.0, 0.5 * density.derivative(0.0), density.second_derivative(0.0) / 3.0
    fh = density.integral(S) / S
    f = density.value(S)
    d1 = (f - fh) / S
    d2 = (density.derivative(S) - 2.0 * d1) / S
    return fh, d1, d2


def haircut_value(total, haircut):
    try:
        _check_domain(total, haircut.cap, "haircut")
    except CurveError as exc:
        raise PricingError(str(exc)) from exc
    return haircut.value(total)


def lob_segmentation(s) -> LobSegmentation:
    s = np.asarray(s, dtype=float)
    n = s.size
    perm = np.argsort(s, kind="stable")
    ss = s[perm]
    widths = np.diff(np.concatenate([[0.0], ss]))
    mult = n - np.arange(n)
    bounds = np.concatenate([[0.0], np.cumsum(mult * widths)])
    # minimal rank among ties
    ranks = np.searchsorted(ss, s, side="left") + 1
    return LobSegmentation(perm, bounds, ranks)


def _lob_tables(s, density):
    """Sorted values, boundaries, and cumulative per-seller proceeds at each rank."""
    s = np.asarray(s, dtype=float)
    n = s.size
    seg = lob_segmentation(s)
    d = seg.boundaries
    if d[-1] > density.cap * (1 + 1e-12):
        raise PricingError(f"book depth {d[-1]!r} exceeds the cap {density.cap!r}")
    d = np.minimum(d, density.cap)
    mult = n - np.arange(n)
    Fd = density.integral(d)
    proceeds = np.cumsum(np.diff(Fd) / mult)
    fd = density.value(d)
    # ∫_0^{s_[k]} f'(D(t)) dt, used for cross-partials
    slope_int = np.cumsum(np.diff(fd) / mult)
    return seg, proceeds, slope_int


def lob_proceeds(s, density) -> np.ndarray:
    """Cash ``s_i f̄_i(s)`` raised by every bank under the LOB."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise PricingError("negative liquidation")
    seg, proceeds, _ = _lob_tables(s, density)
    return proceeds[seg.ranks - 1]


def lob_prices(s, density) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    P = lob_proceeds(s, density)
    safe = np.where(s > 0, s, 1.0)
    return np.where(s > 0, P / safe, 1.0)


def lob_prices_batch(S, density) -> np.ndarray:
    """:func:`lob_prices` for every row of a ``(m, n)`` array at once."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    m, n = S.shape
    perm = np.argsort(S, axis=1, kind="stable")
    ss = np.take_along_axis(S, perm, axis=1)
    widths = np.diff(np.concatenate([np.zeros((m, 1)), ss], axis=1), axis=1)
    mult = n - np.arange(n)
    d = np.concatenate([np.zeros((m, 1)), np.cumsum(mult * widths, axis=1)], axis=1)
    if np.any(d[:, -1] > density.cap * (1 + 1e-12)):
        raise PricingError("book depth exceeds the cap")
    Fd = density.integral(np.minimum(d, density.cap))
    proceeds = np.cumsum(np.diff(Fd, axis=1) / mult, axis=1)
    # tied sellers sit across zero-width segments, so sorted position is as good as rank
    safe = np.where(ss > 0, ss, 1.0)
    sorted_prices = np.where(ss > 0, proceeds / safe, 1.0)
    out = np.empty_like(S)
    np.put_along_axis(out, perm, sorted_prices, axis=1)
    return out


def lob_depth(i: int, s) -> float:
    """Book depth at which bank ``i``'s last order executes: ``Σ_j min(s_j, s_i)``."""
    s = np.asarray(s, dtype=float)
    return float(np.minimum(s, s[i]).sum())


def lob_own_proceeds(x, others, density):
    """Proceeds of one bank selling ``x`` (array allowed) while the others sell ``others``."""
    o = np.sort(np.asarray(others, dtype=float))
    n = o.size + 1
    x = np.asarray(x, dtype=float)
    m_idx = np.arange(o.size + 1)
    # depth when the bank's own clock reaches o[m-1]: m smaller sellers done
    o0 = np.concatenate([[0.0], o])
    Db = np.concatenate([[0.0], np.cumsum(o)]) + (n - m_idx) * o0
    Db = np.minimum(Db, density.cap)
    active = n - m_idx  # sellers still active just after o0[m]
    Pb = np.concatenate([[0.0], np.cumsum(np.diff(density.integral(Db)) / active[:-1])])
    m = np.searchsorted(o, x, side="left")
    D = Db[m] + active[m] * (x - o0[m])
    if np.any(D > density.cap * (1 + 1e-12)):
        raise PricingError("book depth exceeds the cap")
    D = np.minimum(D, density.cap)
    out = Pb[m] + (density.integral(D) - density.integral(Db[m])) / active[m]
    return out if out.ndim else float(out)


def lob_own_depth(x, others):
    """Depth ``Σ_{j≠i} min(s_j, x) + x`` reached by one bank's marginal order."""
    o = np.asarray(others, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.minimum.outer(np.atleast_1d(x), o).sum(axis=1) + np.atleast_1d(x)
    return out if x.ndim else float(out[0])


def inverse_demand(s, density, mechanism) -> np.ndarray:
    """Per-bank average price ``f̄(s)`` under ``mechanism``."""
    s = np.asarray(s, dtype=float)
    if Mechanism(mechanism) is Mechanism.VWAP:
        return np.full(s.size, vwap_price(float(s.sum()), density))
    return lob_prices(s, density)


def own_proceeds(x, i: int, s, density, mechanism):
    """Proceeds of bank ``i`` selling ``x`` with the other entries of ``s`` fixed."""
    s = np.asarray(s, dtype=float)
    others = np.delete(s, i)
    if Mechanism(mechanism) is Mechanism.VWAP:
        x = np.asarray(x, dtype=float)
        tot = x + others.sum()
        out = x * vwap_price(tot, density)
        return out if np.ndim(out) else float(out)
    return lob_own_proceeds(x, others, density)


def price_jacobian(s, density, mechanism) -> np.ndarray:
    """``J[i, j] = ∂f̄_i/∂s_j``.

    For the LOB, tied sellers are treated as moving together, which is the
    only direction along which the book price is differentiable at a tie.
    """
    s = np.asarray(s, dtype=float)
    n = s.size
    if Mechanism(mechanism) is Mechanism.VWAP:
        _, d1, _ = vwap_derivatives(float(s.sum()), density)
        return np.full((n, n), d1)
    seg, proceeds, slope_int = _lob_tables(s, density)
    G = slope_int[seg.ranks - 1]
    D = seg.boundaries[seg.ranks]
    dP = np.where(s[None, :] < s[:, None], G[:, None] - G[None, :], 0.0)
    P = proceeds[seg.ranks - 1]
    J = np.empty((n, n))
    for i in range(n):
        if s[i] > 0:
            J[i] = dP[i] / s[i]
            J[i, i] = (density.value(D[i]) - P[i] / s[i]) / s[i]
        else:
            # one-sided limit of P(x)/x as x -> 0 with the tied group moving
            J[i] = 0.0
            m = np.count_nonzero(s >= s[i])
            J[i, i] = 0.5 * m * density.derivative(0.0)
    return J
