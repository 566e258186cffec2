"""FLRW scale factors and the structural conditions the blow-up machinery needs.

Three backgrounds are supported. With spatial dimension n, expansion rate H and
equation-of-state-like exponent sigma:

* power-law    a(t) = a0 * (1 + n(1+sigma)H t/2)^(2/(n(1+sigma))),  sigma != -1
* exponential  a(t) = a0 * exp(H t)                                 (de Sitter)
* tabulated    monotone cubic interpolation of (t, a, adot, addot) knots

The power-law family degenerates: a is linear-in-t to a power, so it covers
static (H=0), decelerating, accelerating and contracting universes, including
finite-time "Big Rip" divergences for sigma < -1 with H > 0. The horizon T0 is
the end of the classical domain: +inf when (1+sigma)H >= 0, else the root of
1 + n(1+sigma)H t/2.

Two derived scalars gate the start time of a run: the expansion-rate threshold
|m| c (sqrt(eps(eps+4)) - eps) / (2n), and its reciprocal-per-dimension form
C_eps = 2 / (|m| c (sqrt(eps(eps+4)) - eps)), so the threshold equals
1/(n C_eps). A start time t0 is admissible when adot(t0)/a(t0) is at or below
the threshold; for m = 0 the threshold is +inf and every t0 is admissible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import NegativeTime, NoAdmissibleT0, TimeBeyondHorizon

_HORIZON_SLACK = 1e-12  # relative exclusion zone at a finite horizon


def _check_times(t: np.ndarray, horizon: float, inclusive_end: bool = False) -> None:
    if np.any(t < 0):
        raise NegativeTime(f"t = {np.min(t)} is before the initial slice t = 0")
    if math.isinf(horizon):
        return
    bad = t > horizon if inclusive_end else t >= horizon * (1.0 - _HORIZON_SLACK)
    if np.any(bad):
        raise TimeBeyondHorizon(f"t = {np.max(t)} reaches the horizon T0 = {horizon}")


def _as_eval(t, a, adot, addot, scalar: bool):
    if scalar:
        return float(a), float(adot), float(addot)
    return np.asarray(a, dtype=float), np.asarray(adot, dtype=float), np.asarray(addot, dtype=float)


@dataclass(frozen=True)
class PowerLaw:
    """Power-law scale factor; sigma = -1 is excluded (use DeSitter)."""

    sigma: float
    H: float
    a0: float = 1.0
    n: int = 1

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("n must be a positive integer")
        if self.sigma == -1.0:
            raise ValueError("sigma = -1 is the exponential family; use DeSitter")

    @property
    def _b(self) -> float:
        return 0.5 * self.n * (1.0 + self.sigma) * self.H

    @property
    def _beta(self) -> float:
        return 2.0 / (self.n * (1.0 + self.sigma))

    def horizon(self) -> float:
        if (1.0 + self.sigma) * self.H >= 0.0:
            return math.inf
        return -2.0 / (self.n * (1.0 + self.sigma) * self.H)

    def eval(self, t):
        """Return (a, adot, addot) at t; t may be a scalar or an array."""
        scalar = np.isscalar(t)
        tt = np.asarray(t, dtype=float)
        _check_times(tt, self.horizon())
        base = 1.0 + self._b * tt
        b, beta, a0, H = self._b, self._beta, self.a0, self.H
        a = a0 * base ** beta
        adot = a0 * H * base ** (beta - 1.0)
        addot = a0 * H * b * (beta - 1.0) * base ** (beta - 2.0)
        return _as_eval(tt, a, adot, addot, scalar)


@dataclass(frozen=True)
class DeSitter:
    """Exponential scale factor a0 * exp(H t); the sigma = -1 limit."""

    H: float
    a0: float = 1.0
    n: int = 1

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("n must be a positive integer")

    def horizon(self) -> float:
        return math.inf

    def eval(self, t):
        scalar = np.isscalar(t)
        tt = np.asarray(t, dtype=float)
        _check_times(tt, math.inf)
        a = self.a0 * np.exp(self.H * tt)
        return _as_eval(tt, a, self.H * a, self.H * self.H * a, scalar)


class Tabulated:
    """Scale factor from (t, a, adot, addot) knots, monotone-cubic interpolated.

    Knots must start at t = 0, be strictly increasing in t, and keep a > 0.
    The interpolant is shape-preserving (Fritsch-Carlson), applied to each of
    a, adot and addot separately. A crude consistency check compares knot
    secants of a against the averaged adot knots and rejects tables whose
    stated derivative is grossly wrong.
    """

    def __init__(self, t, a, adot, addot, n: int = 1, consistency_tol: float = 0.25):
        from scipy.interpolate import PchipInterpolator

        t = np.asarray(t, dtype=float)
        a = np.asarray(a, dtype=float)
        adot = np.asarray(adot, dtype=float)
        addot = np.asarray(addot, dtype=float)
        if t.ndim != 1 or len(t) < 4:
            raise ValueError("need at least 4 knots")
        if not (len(t) == len(a) == len(adot) == len(addot)):
            raise ValueError("knot arrays must share a length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot times must be strictly increasing")
        if t[0] < 0:
            raise NegativeTime("table must not start before t = 0")
        if np.any(a <= 0):
            raise ValueError("scale factor knots must stay positive")
        secant = np.diff(a) / np.diff(t)
        mean_rate = 0.5 * (adot[1:] + adot[:-1])
        scale = np.maximum(np.abs(mean_rate), 1e-12 * np.max(np.abs(adot) + 1.0))
        rel = np.abs(secant - mean_rate) / scale
        if np.any(rel > consistency_tol) and np.max(np.abs(mean_rate)) > 0:
            k = int(np.argmax(rel))
            raise ValueError(
                f"adot knots inconsistent with a knots near t = {t[k]:g} "
                f"(secant {secant[k]:g} vs stated {mean_rate[k]:g})"
            )
        self.n = int(n)
        self._t0, self._t1 = float(t[0]), float(t[-1])
        self._a = PchipInterpolator(t, a, extrapolate=False)
        self._adot = PchipInterpolator(t, adot, extrapolate=False)
        self._addot = PchipInterpolator(t, addot, extrapolate=False)

    def horizon(self) -> float:
        return self._t1

    def eval(self, t):
        scalar = np.isscalar(t)
        tt = np.asarray(t, dtype=float)
        if np.any(tt < self._t0):
            raise NegativeTime(f"t = {np.min(tt)} is before the first knot t = {self._t0}")
        _check_times(tt, self._t1, inclusive_end=True)
        return _as_eval(tt, self._a(tt), self._adot(tt), self._addot(tt), scalar)


ScaleFactor = Union[PowerLaw, DeSitter, Tabulated]


def hubble_rate(sf: ScaleFactor, t: float) -> float:
    """adot(t)/a(t)."""
    a, adot, _ = sf.eval(t)
    return adot / a


def t0_condition_threshold(m: float, c: float, eps: float, n: int) -> float:
    """Largest admissible adot/a at the start time; +inf for m = 0."""
    if m == 0.0:
        return math.inf
    return abs(m) * c * (math.sqrt(eps * (eps + 4.0)) - eps) / (2.0 * n)


def c_epsilon(m: float, c: float, eps: float) -> float:
    """C_eps = 2 / (|m| c (sqrt(eps(eps+4)) - eps)); +inf for m = 0."""
    if m == 0.0:
        return math.inf
    return 2.0 / (abs(m) * c * (math.sqrt(eps * (eps + 4.0)) - eps))


def check_t0_condition(sf: ScaleFactor, t0: float, m: float, c: float, eps: float):
    """Return (ok, threshold) for the start-time condition adot/a <= threshold.

    A tiny relative slack absorbs roundoff when t0 sits exactly at the
    admissibility boundary.
    """
    thr = t0_condition_threshold(m, c, eps, sf.n)
    if math.isinf(thr):
        return True, thr
    rate = hubble_rate(sf, t0)
    return rate <= thr + 1e-12 * max(1.0, abs(thr)), thr


class MinT0(NamedTuple):
    t0: float
    c_eps: float


def min_admissible_t0(sf: ScaleFactor, m: float, c: float, eps: float) -> MinT0:
    """Earliest start time satisfying the expansion-rate threshold.

    Closed-form families only. Returns 0 when the initial rate already sits at
    or below 1/(n C_eps); otherwise solves adot(t0)/a(t0) = 1/(n C_eps) for the
    power-law family (needs sigma > -1). Raises NoAdmissibleT0 when the rate
    never drops to the threshold (de Sitter with a too-fast H, or sigma < -1).
    """
    if m == 0.0:
        raise ValueError("m = 0 makes every t0 admissible; the minimum is trivially 0")
    ceps = c_epsilon(m, c, eps)
    bound = 1.0 / (sf.n * ceps)
    if isinstance(sf, Tabulated):
        raise ValueError("min_admissible_t0 supports closed-form families only")
    if isinstance(sf, DeSitter):
        if sf.H <= bound:
            return MinT0(0.0, ceps)
        raise NoAdmissibleT0(
            f"constant rate H = {sf.H} exceeds the threshold {bound} for all t0"
        )
    if sf.H <= bound:
        return MinT0(0.0, ceps)
    if sf.sigma < -1.0:
        raise NoAdmissibleT0(
            "rate grows toward the Big-Rip horizon; no start time is admissible"
        )
    t0 = 2.0 * ceps / (1.0 + sf.sigma) - 2.0 / (sf.n * (1.0 + sf.sigma) * sf.H)
    return MinT0(t0, ceps)


def check_monotone_expansion(
    sf: ScaleFactor,
    t_lo: float,
    t_hi: float,
    samples: int = 1024,
    tol_rate: float | None = None,
) -> bool:
    """True when adot >= 0 and adot^2 - addot*a >= 0 hold on [t_lo, t_hi].

    Closed-form families are decided exactly: the power-law identity
    (adot^2 - addot a)/a^2 = (n(1+sigma)H^2/2) (1 + n(1+sigma)H t/2)^(-2)
    has the sign of (1+sigma), and adot has the sign of H inside the horizon,
    so the pair holds iff H = 0, or H > 0 with sigma >= -1. Tabulated factors
    are sampled; the interval is clipped to the table's domain since the
    conditions are only ever needed up to min(T, T0).
    """
    if t_lo < 0:
        raise NegativeTime(f"t_lo = {t_lo} is before the initial slice")
    if t_hi < t_lo:
        raise ValueError("empty interval")
    if isinstance(sf, DeSitter):
        return sf.H >= 0.0
    if isinstance(sf, PowerLaw):
        if sf.H == 0.0:
            return True
        return sf.H > 0.0 and sf.sigma >= -1.0
    hi = min(t_hi, sf.horizon())
    lo = min(t_lo, hi)
    ts = np.linspace(lo, hi, samples)
    a, adot, addot = sf.eval(ts)
    if tol_rate is None:
        tol_rate = 1e-12 * max(
            np.max(np.abs(adot)), np.max(np.abs(adot) ** 2 + np.abs(addot * a)), 1.0
        )
    if np.min(adot) < -tol_rate:
        return False
    if np.min(adot * adot - addot * a) < -tol_rate:
        return False
    return True
