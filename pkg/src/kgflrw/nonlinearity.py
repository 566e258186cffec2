"""Power nonlinearities and the structural inequality that drives blow-up.

Two families:

* GaugeInvariantPower  f(u) = lam * |u|^(p-1) u   on complex u, p > 1
* RealAbsPower         f(u) = sign * |u|^p        on real u, p > 1, sign = +-1

Both have f(0) = 0 and the local Lipschitz growth |f(s)-f(v)| <=
C |s-v| (|s|^(p-1) + |v|^(p-1)). The potential F(u) = int_0^u f is

    F(u) = Re(lam) |u|^(p+1) / (p+1)          (gauge family, lam real)
    F(u) = sign * |u|^p u / (p+1)             (real family)

and the machinery requires a structure constant eps > 0 with

    Re(f(u) conj(u)) >= (2 + eps) F(u)   for all admissible u.

For the gauge family this pins eps <= p-1 when lam > 0 and eps >= p-1 when
lam < 0; the real family forces eps = p-1 exactly (the inequality flips sign
with u otherwise). A lam with nonzero imaginary part still defines f, but no
potential exists, so every energy-flavored operation refuses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import ComplexInputToRealNonlinearity, NonRealLambdaNoPotential

_IMAG_TOL = 1e-13  # relative imaginary tolerance for real-only inputs


class EpsRange(NamedTuple):
    """Admissible eps interval; endpoints flagged closed/open."""

    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def contains(self, eps: float, tol: float = 1e-12) -> bool:
        lo_ok = eps >= self.lo - tol if self.lo_closed else eps > self.lo
        hi_ok = eps <= self.hi + tol if self.hi_closed else eps < self.hi
        return lo_ok and hi_ok


def _validate_p(p: float) -> None:
    if not (p > 1.0):
        raise ValueError(f"exponent p must exceed 1, got {p}")


@dataclass(frozen=True)
class GaugeInvariantPower:
    """f(u) = lam |u|^(p-1) u; phase-equivariant, defined for complex u."""

    p: float
    lam: complex = 1.0
    eps: float | None = None

    def __post_init__(self):
        _validate_p(self.p)
        lam = complex(self.lam)
        if lam == 0:
            raise ValueError("lam = 0 gives the linear equation; not a valid family member")
        object.__setattr__(self, "lam", lam)
        eps = self.eps
        if eps is None:
            eps = self.p - 1.0
        if not (eps > 0.0):
            raise ValueError(f"eps must be positive, got {eps}")
        if lam.imag == 0.0:
            rng = admissible_eps_range(self)
            if not rng.contains(eps):
                raise ValueError(
                    f"eps = {eps} outside the admissible range "
                    f"[{rng.lo}, {rng.hi}] for p = {self.p}, lam = {lam.real} "
                    f"(endpoints {'closed' if rng.lo_closed else 'open'}/"
                    f"{'closed' if rng.hi_closed else 'open'})"
                )
        object.__setattr__(self, "eps", float(eps))

    @property
    def real_only(self) -> bool:
        return False

    @property
    def has_potential(self) -> bool:
        return self.lam.imag == 0.0

    def f(self, u):
        u = np.asarray(u)
        return self.lam * np.abs(u) ** (self.p - 1.0) * u

    def F(self, u):
        if not self.has_potential:
            raise NonRealLambdaNoPotential(
                "no antiderivative exists for a coupling with nonzero imaginary part"
            )
        u = np.asarray(u)
        return self.lam.real * np.abs(u) ** (self.p + 1.0) / (self.p + 1.0)


@dataclass(frozen=True)
class RealAbsPower:
    """f(u) = sign |u|^p on real data; the structure constant is pinned to p-1."""

    p: float
    sign: int = 1
    eps: float | None = None

    def __post_init__(self):
        _validate_p(self.p)
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        eps = self.eps
        if eps is None:
            eps = self.p - 1.0
        if abs(eps - (self.p - 1.0)) > 1e-12:
            raise ValueError(
                f"this family satisfies the structure inequality only at eps = p-1 = "
                f"{self.p - 1.0}, got {eps}"
            )
        object.__setattr__(self, "eps", float(eps))

    @property
    def real_only(self) -> bool:
        return True

    @property
    def has_potential(self) -> bool:
        return True

    def _real(self, u) -> np.ndarray:
        u = np.asarray(u)
        if np.iscomplexobj(u):
            scale = max(1.0, float(np.max(np.abs(u))) if u.size else 1.0)
            if u.size and float(np.max(np.abs(u.imag))) > _IMAG_TOL * scale:
                raise ComplexInputToRealNonlinearity(
                    "real-only family received data with a non-negligible imaginary part"
                )
            return u.real
        return u.astype(float) if u.dtype != float else u

    def f(self, u):
        ur = self._real(u)
        return self.sign * np.abs(ur) ** self.p

    def F(self, u):
        ur = self._real(u)
        return self.sign * np.abs(ur) ** self.p * ur / (self.p + 1.0)


Nonlinearity = Union[GaugeInvariantPower, RealAbsPower]


def admissible_eps_range(nl: Nonlinearity) -> EpsRange:
    """Admissible structure constants for the family.

    Gauge family, lam > 0: (0, p-1]. Gauge family, lam < 0: [p-1, inf).
    Real family: the single point {p-1}. Undefined for non-real lam.
    """
    if isinstance(nl, RealAbsPower):
        return EpsRange(nl.p - 1.0, nl.p - 1.0, True, True)
    if nl.lam.imag != 0.0:
        raise NonRealLambdaNoPotential(
            "structure inequality involves the potential; undefined for non-real lam"
        )
    if nl.lam.real > 0.0:
        return EpsRange(0.0, nl.p - 1.0, False, True)
    return EpsRange(nl.p - 1.0, math.inf, True, False)


def sobolev_admissible(p: float, n: int) -> bool:
    """Exponent window for local well-posedness of the flow in n dimensions.

    1 < p for n = 1, 2; additionally p < 1 + 2/(n-2) for n >= 3. This is
    informational: the blow-up certificates themselves do not need it.
    """
    if p <= 1.0:
        return False
    if n <= 2:
        return True
    return p < 1.0 + 2.0 / (n - 2.0)


@dataclass(frozen=True)
class StructureReport:
    """Outcome of the sampled structural checks."""

    n_samples: int
    max_violation_rel: float  # worst (2+eps)F - Re(f conj(u)), relative, clipped at 0
    max_chain_residual: float  # worst relative defect of d/dt F(u) = Re(f du/dt-bar)
    rel_tol: float
    chain_tol: float

    @property
    def ok(self) -> bool:
        return self.max_violation_rel <= self.rel_tol and self.max_chain_residual <= self.chain_tol


def verify_structure(
    nl: Nonlinearity,
    samples=None,
    n_samples: int = 10_000,
    rel_tol: float = 1e-12,
    fd_step: float = 1e-6,
    chain_tol: float = 1e-6,
    n_paths: int = 8,
    seed: int = 0,
) -> StructureReport:
    """Check the structure inequality on a sample cloud and the chain rule on paths.

    The inequality check evaluates Re(f(u) conj(u)) - (2+eps) F(u) pointwise and
    reports the worst violation relative to the magnitude of the two sides. The
    chain-rule check runs central differences of t -> F(u(t)) along smooth
    random paths and compares with Re(f(u) conj(du/dt)).
    """
    rng = np.random.default_rng(seed)
    if samples is None:
        mag = 10.0 ** rng.uniform(-3, 3, size=n_samples)
        if nl.real_only:
            samples = mag * rng.choice([-1.0, 1.0], size=n_samples)
        else:
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n_samples))
            samples = mag * phase
    samples = np.asarray(samples)

    Fs = nl.F(samples)
    lhs = np.real(nl.f(samples) * np.conj(samples))
    scale = np.abs(lhs) + np.abs((2.0 + nl.eps) * Fs) + 1e-300
    violation = ((2.0 + nl.eps) * Fs - lhs) / scale
    max_violation = float(max(0.0, np.max(violation)))

    worst_chain = 0.0
    for _ in range(n_paths):
        if nl.real_only:
            z0, z1, z2 = rng.normal(size=3) * rng.choice([0.1, 1.0, 10.0])
        else:
            z0, z1, z2 = (rng.normal(size=3) + 1j * rng.normal(size=3)) * rng.choice(
                [0.1, 1.0, 10.0]
            )
        w = rng.uniform(0.5, 2.0)

        def path(t):
            return z0 + z1 * np.sin(w * t) + z2 * np.cos(w * t)

        def dpath(t):
            return w * (z1 * np.cos(w * t) - z2 * np.sin(w * t))

        for t in rng.uniform(0.0, 3.0, size=16):
            fd = (nl.F(path(t + fd_step)) - nl.F(path(t - fd_step))) / (2.0 * fd_step)
            exact = np.real(nl.f(path(t)) * np.conj(dpath(t)))
            s = abs(exact) + abs(float(nl.F(path(t)))) + 1.0
            worst_chain = max(worst_chain, abs(float(fd) - float(exact)) / s)

    return StructureReport(
        n_samples=int(samples.size),
        max_violation_rel=max_violation,
        max_chain_residual=worst_chain,
        rel_tol=rel_tol,
        chain_tol=chain_tol,
    )
