"""Order-book density and haircut curves.

Two families are provided for each curve: ``linear`` (closed forms) and
``tabulated`` (piecewise-linear interpolation through knots).  All accessors
accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class CurveError(ValueError):
    """Malformed curve parameters or an argument outside the curve's domain."""


def _as_float(x):
    arr = np.asarray(x, dtype=float)
    return arr if arr.ndim else float(arr)


def _check_domain(x, cap, name):
    arr = np.asarray(x, dtype=float)
    # tiny slack: sums of shares may overshoot the cap by rounding
    slack = 1e-12 * max(1.0, cap)
    if np.any(arr < -slack) or np.any(arr > cap + slack):
        raise CurveError(f"{name} argument outside [0, {cap!r}]: {x!r}")


@dataclass(frozen=True)
class LinearDensity:
    """Order-book density ``f(σ) = 1 - ασ`` on ``[0, M]``."""

    alpha: float
    cap: float
    family: str = field(default="linear", init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise CurveError(f"density slope must be positive, got {self.alpha!r}")
        if not self.cap > 0:
            raise CurveError(f"density cap must be positive, got {self.cap!r}")

    def value(self, sigma):
        return _as_float(1.0 - self.alpha * np.asarray(sigma, dtype=float))

    def derivative(self, sigma):
        return _as_float(np.full(np.shape(sigma), -self.alpha))

    def second_derivative(self, sigma):
        return _as_float(np.zeros(np.shape(sigma)))

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        return _as_float(s - 0.5 * self.alpha * s * s)

    def inverse(self, p):
        p = np.asarray(p, dtype=float)
        lo = float(self.value(self.cap))
        if np.any(p < lo - 1e-15) or np.any(p > 1.0 + 1e-15):
            raise CurveError(f"price {p!r} outside [f(M), 1] = [{lo!r}, 1]")
        return _as_float((1.0 - p) / self.alpha)


@dataclass(frozen=True)
class TabulatedDensity:
    """Piecewise-linear density through ``(knots[k], values[k])``.

    The derivative inside a segment is the segment slope (right slope at
    interior knots, left slope at the cap) and the second derivative is 0.
    ``integral`` is exact for the interpolant.  Monotonicity and convexity
    are *not* enforced here; :func:`firesale.model.validate_scenario`
    reports them.
    """

    knots: tuple
    values: tuple
    family: str = field(default="tabulated", init=False)

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.size < 2 or k.shape != v.shape:
            raise CurveError("tabulated curve needs >= 2 knots and matching values")
        if k[0] != 0.0:
            raise CurveError("first knot must be 0")
        if np.any(np.diff(k) <= 0):
            raise CurveError("knots must be strictly increasing")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @property
    def cap(self) -> float:
        return self.knots[-1]

    @property
    def _k(self):
        return np.asarray(self.knots)

    @property
    def _v(self):
        return np.asarray(self.values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self._v) / np.diff(self._k)

    def _segment(self, x):
        idx = np.searchsorted(self._k, x, side="right") - 1
        return np.clip(idx, 0, len(self.knots) - 2)

    def value(self, sigma):
        return _as_float(np.interp(sigma, self._k, self._v))

    def derivative(self, sigma):
        return _as_float(self.slopes[self._segment(np.asarray(sigma, dtype=float))])

    def second_derivative(self, sigma):
        return _as_float(np.zeros(np.shape(sigma)))

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        k, v = self._k, self._v
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(k))])
        idx = self._segment(s)
        x0 = k[idx]
        f0 = v[idx]
        dx = s - x0
        return _as_float(cum[idx] + f0 * dx + 0.5 * self.slopes[idx] * dx * dx)

    def inverse(self, p):
        v = self._v
        if np.any(np.diff(v) >= 0):
            raise CurveError("inverse requires a strictly decreasing density")
        p = np.asarray(p, dtype=float)
        if np.any(p < v[-1] - 1e-15) or np.any(p > v[0] + 1e-15):
            raise CurveError(f"price {p!r} outside [f(M), f(0)]")
        # np.interp needs increasing abscissae
        return _as_float(np.interp(p, v[::-1], self._k[::-1]))


@dataclass(frozen=True)
class LinearHaircut:
    """Collateral value per share ``g(s) = γ - α_g s`` on ``[0, M]``."""

    intercept: float
    alpha: float
    cap: float
    family: str = field(default="linear", init=False)

    def __post_init__(self):
        if not 0 < self.intercept <= 1:
            raise CurveError(f"haircut intercept must lie in (0, 1], got {self.intercept!r}")
        if not self.alpha > 0:
            raise CurveError(f"haircut slope must be positive, got {self.alpha!r}")
        if not self.cap > 0:
            raise CurveError(f"haircut cap must be positive, got {self.cap!r}")

    def value(self, s):
        return _as_float(self.intercept - self.alpha * np.asarray(s, dtype=float))

    def derivative(self, s):
        return _as_float(np.full(np.shape(s), -self.alpha))


@dataclass(frozen=True)
class TabulatedHaircut:
    """Piecewise-linear haircut curve through ``(knots[k], values[k])``."""

    knots: tuple
    values: tuple
    family: str = field(default="tabulated", init=False)

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.size < 2 or k.shape != v.shape:
            raise CurveError("tabulated curve needs >= 2 knots and matching values")
        if k[0] != 0.0:
            raise CurveError("first knot must be 0")
        if np.any(np.diff(k) <= 0):
            raise CurveError("knots must be strictly increasing")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @property
    def cap(self) -> float:
        return self.knots[-1]

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    def value(self, s):
        return _as_float(np.interp(s, self.knots, self.values))

    def derivative(self, s):
        k = np.asarray(self.knots)
        idx = np.clip(np.searchsorted(k, s, side="right") - 1, 0, len(k) - 2)
        return _as_float(self.slopes[idx])


DensityCurve = LinearDensity | TabulatedDensity
HaircutCurve = LinearHaircut | TabulatedHaircut
