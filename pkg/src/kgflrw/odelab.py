"""Concavity ODE laboratory.

The blow-up certificates reduce to a scalar fact: if

    y'' <= -kappa * A * y^(1 + 1/kappa),   y(t0) = y0 > 0,  y'(t0) = y1 <= 0,

with  y0 >= (B (T - t0))^(-kappa)  and  T - t0 > pi^2 (2 kappa + 1) B / (8 kappa^2 A),

then y vanishes in finite time, no later than

    t_bound = t0 + arcsin(z0) / sqrt(III),

where I = 2 kappa^2 A / (2 kappa + 1), II = y1^2 + I y0^(2 + 1/kappa),
III = I y0^(1/kappa) and z0 = sqrt(I y0^(2 + 1/kappa) / II); the admissibility
conditions force t_bound < T. This module integrates the equality ODE (whose
vanishing time dominates every solution of the inequality), evaluates the
closed-form bound, and generates random admissible problems so the chain
t_vanish <= t_bound < T can be machine-checked in bulk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoVanishBeforeT, TooFewSamples

_REL_SLACK = 1e-12


@dataclass(frozen=True)
class ConcavityProblem:
    """One admissible instance of the scalar concavity inequality."""

    kappa: float
    A: float
    B: float
    T: float
    y0: float
    y1: float
    t0: float = 0.0
    validate: bool = True

    def __post_init__(self):
        if self.kappa <= 0 or self.A <= 0 or self.B <= 0:
            raise ValueError("kappa, A and B must be positive")
        if self.y0 <= 0:
            raise ValueError("y0 must be positive")
        if self.y1 > 0:
            raise ValueError("y1 must be nonpositive")
        if self.T <= self.t0:
            raise ValueError("T must exceed t0")
        if not self.validate:
            return
        floor = (self.B * (self.T - self.t0)) ** (-self.kappa)
        if self.y0 < floor * (1.0 - _REL_SLACK):
            raise ValueError(
                f"y0 = {self.y0} below admissible floor {floor}")
        gap = math.pi ** 2 * (2.0 * self.kappa + 1.0) * self.B / (
            8.0 * self.kappa ** 2 * self.A)
        if self.T - self.t0 <= gap * (1.0 - _REL_SLACK):
            raise ValueError(
                f"T - t0 = {self.T - self.t0} not above the window {gap}")

    @property
    def const_I(self) -> float:
        return 2.0 * self.kappa ** 2 * self.A / (2.0 * self.kappa + 1.0)

    @property
    def const_II(self) -> float:
        return self.y1 ** 2 + self.const_I * self.y0 ** (2.0 + 1.0 / self.kappa)

    @property
    def const_III(self) -> float:
        return self.const_I * self.y0 ** (1.0 / self.kappa)

    @property
    def z0(self) -> float:
        z = math.sqrt(self.const_I * self.y0 ** (2.0 + 1.0 / self.kappa)
                      / self.const_II)
        return min(z, 1.0)


def tstar_bound(prob: ConcavityProblem) -> float:
    """Closed-form upper bound on the vanishing time of the equality ODE."""
    return prob.t0 + math.asin(prob.z0) / math.sqrt(prob.const_III)


@dataclass
class ConcavitySolution:
    t_vanish: float
    t: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray


def solve_concavity(prob: ConcavityProblem, rtol: float = 1e-12,
                    t_max: float | None = None) -> ConcavitySolution:
    """Integrate y'' = -kappa A max(y,0)^(1+1/kappa) until y crosses zero.

    The equality dynamics dominate every solution of the inequality, so the
    returned vanishing time is the latest one compatible with the data.
    Raises NoVanishBeforeT if y stays positive up to t_max (default: the
    certified horizon T).
    """
    expo = 1.0 + 1.0 / prob.kappa
    coef = prob.kappa * prob.A

    def rhs(t, s):
        y, yp = s
        return [yp, -coef * max(y, 0.0) ** expo]

    def hit_zero(t, s):
        return s[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    end = prob.T if t_max is None else t_max
    sol = solve_ivp(rhs, (prob.t0, end), [prob.y0, prob.y1], method="DOP853",
                    rtol=rtol, atol=rtol * prob.y0, events=hit_zero,
                    dense_output=True)
    if not sol.success:
        raise RuntimeError(f"concavity integration failed: {sol.message}")
    if sol.t_events[0].size == 0:
        raise NoVanishBeforeT(
            f"y still {sol.y[0, -1]:.3e} at t = {sol.t[-1]}")
    t_v = float(sol.t_events[0][0])
    return ConcavitySolution(t_vanish=t_v, t=sol.t, y=sol.y[0],
                             y_prime=sol.y[1])


@dataclass
class ComparisonReport:
    """Sampled check of the first-order comparison fact: if h(t0) >= 0 and
    h' + gamma' h > 0 on the window then h > 0 after t0."""

    hypothesis_ok: bool
    conclusion_ok: bool
    min_combination: float
    min_h_after_start: float

    @property
    def ok(self) -> bool:
        return (not self.hypothesis_ok) or self.conclusion_ok


def comparison_check(t: np.ndarray, h: np.ndarray, gamma: np.ndarray,
                     tol: float = 0.0) -> ComparisonReport:
    """Finite-difference verification of the comparison principle on samples.

    Derivatives use np.gradient (second-order interior). The report separates
    a hypothesis failure (combination not positive, nothing to conclude) from
    a conclusion failure (hypothesis held yet h dipped nonpositive), so a
    failing check can be attributed.
    """
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if len(t) < 3:
        raise TooFewSamples("need at least 3 samples for derivatives")
    if h.shape != t.shape or gamma.shape != t.shape:
        raise ValueError("t, h, gamma must share a shape")
    hp = np.gradient(h, t)
    gp = np.gradient(gamma, t)
    combo = hp + gp * h
    inner = combo[1:-1]
    scale = max(np.max(np.abs(hp)), np.max(np.abs(gp * h)), 1e-300)
    hyp_ok = bool(np.all(inner > -tol * scale - 1e-14 * scale)) and h[0] >= 0.0
    h_after = h[1:]
    concl_ok = bool(np.all(h_after > -tol * max(np.max(np.abs(h)), 1e-300)))
    return ComparisonReport(
        hypothesis_ok=hyp_ok,
        conclusion_ok=concl_ok,
        min_combination=float(np.min(inner)),
        min_h_after_start=float(np.min(h_after)),
    )


def problem_from_certificate(kappa: float, A: float, B: float, T: float,
                             theta0: float, theta_prime0: float,
                             t0: float = 0.0) -> ConcavityProblem:
    """Map a trajectory certificate (theta data plus constants) to the scalar
    problem solved by y = theta^(-kappa)."""
    if theta0 <= 0:
        raise ValueError("theta(t0) must be positive")
    y0 = theta0 ** (-kappa)
    y1 = -kappa * theta_prime0 * theta0 ** (-kappa - 1.0)
    return ConcavityProblem(kappa=kappa, A=A, B=B, T=T, y0=y0, y1=y1, t0=t0)


def random_admissible_problems(count: int, seed: int = 0,
                               slack: float = 0.1) -> list[ConcavityProblem]:
    """Draw admissible problems spanning exponents, scales and start times.

    T sits (1+slack) above the admissibility window and B is inflated so the
    y0 floor holds with the same slack; every returned problem passes
    construction-time validation.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        kappa = rng.uniform(0.1, 2.0)
        A = rng.uniform(0.5, 20.0)
        y0 = rng.uniform(0.5, 3.0)
        y1 = -rng.uniform(0.0, 2.0)
        t0 = rng.uniform(0.0, 1.0)
        lead = (1.0 + slack) * math.pi ** 2 * (2.0 * kappa + 1.0) / (
            8.0 * kappa ** 2 * A)
        b_floor = math.sqrt(y0 ** (-1.0 / kappa) / lead)
        B = b_floor * (1.0 + slack) * rng.uniform(1.0, 2.0)
        T = t0 + lead * B
        out.append(ConcavityProblem(kappa=kappa, A=A, B=B, T=T,
                                    y0=y0, y1=y1, t0=t0))
    return out
