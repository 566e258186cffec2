"""Energy, Nehari functional, data margins and the convexity diagnostics.

For a field u with velocity u_t on a background a(t), with mass m, wave speed
c and structure constant eps, the core scalars are

    E = 1/2 ||u_t||^2 + 1/2 c^2 a^-2 ||grad u||^2 + 1/2 m^2 c^2 ||u||^2
        - c^2 int F(u)
    I = c^2 a^-2 ||grad u||^2 + m^2 c^2 ||u||^2 - c^2 Re int conj(u) f(u)

E is non-increasing whenever adot >= 0; the exact budget is

    E(t) + int_t0^t [ n (adot/a) ||u_t||^2 + c^2 (adot/a^3) ||grad u||^2 ] = E(t0).

The structure inequality splits E against I:

    E >= 1/2 ||u_t||^2 + I/(eps+2)
         + eps/(2(eps+2)) (c^2 a^-2 ||grad u||^2 + m^2 c^2 ||u||^2),

with equality exactly when the structure inequality is pointwise tight.

Two data margins certify blow-up: rho (norm-weighted, start at t0 = 0) and
delta (velocity-weighted, any admissible t0):

    rho   = m^2 c^2 eps / (2(eps+2)) ||u0||^2      - E(0)
    delta = |m| c eps   / (2(eps+2)) Re(u0, u1)    - E(t0)

The convexity certificate tracks theta(t) = ||u||^2 + running corrections for
the expansion plus an anchor term n (T - t) (adot(t0)/a(t0)) ||u0||^2, whose
power theta^(-kappa) is concave in time. Its discriminant eta >= 0 is a
Cauchy-Schwarz combination, and zeta is the lower bound that feeds the
concavity constant. Running time-integrals use trapezoid accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import EmptyTrace, MasslessHdiag
from .field import Field, State, grad_norm_sq, inner_re, integrate_F, l2_norm_sq
from .nonlinearity import Nonlinearity
from .scale_factor import ScaleFactor


@dataclass(frozen=True)
class PhysicalParams:
    """Mass m (any real, |m| enters thresholds), wave speed c > 0, structure
    constant eps > 0, spatial dimension n."""

    m: float
    c: float
    eps: float
    n: int

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("wave speed c must be positive")
        if self.eps <= 0:
            raise ValueError("structure constant eps must be positive")
        if self.n not in (1, 2, 3):
            raise ValueError("spatial dimension must be 1, 2 or 3")

    @property
    def m_tilde(self) -> float:
        """min(1, |m|): the unit-insensitive mass used by the data classification."""
        return min(1.0, abs(self.m))

    @property
    def c_tilde(self) -> float:
        """min(1, c)."""
        return min(1.0, self.c)


def kappa_tilde_for_mode(mode: str, eps: float) -> float:
    """Weight in zeta: eps+1 for the norm-margin certificate, eps/2+1 for the
    velocity-margin one."""
    if mode == "thm1":
        return eps + 1.0
    if mode == "thm2":
        return 0.5 * eps + 1.0
    raise ValueError(f"unknown certificate mode {mode!r}")


def kappa_for_mode(mode: str, eps: float) -> float:
    """Concavity exponent: (kappa_tilde - 1)/4, i.e. eps/4 or eps/8."""
    return (kappa_tilde_for_mode(mode, eps) - 1.0) / 4.0


def energy(state: State, sf: ScaleFactor, params: PhysicalParams,
           nl: Nonlinearity | None) -> float:
    a, _, _ = sf.eval(state.t)
    c2 = params.c * params.c
    e = 0.5 * l2_norm_sq(state.v)
    e += 0.5 * c2 / (a * a) * grad_norm_sq(state.u)
    e += 0.5 * params.m * params.m * c2 * l2_norm_sq(state.u)
    if nl is not None:
        e -= c2 * integrate_F(nl, state.u)
    return e


def nehari(state: State, sf: ScaleFactor, params: PhysicalParams,
           nl: Nonlinearity | None) -> float:
    a, _, _ = sf.eval(state.t)
    c2 = params.c * params.c
    val = c2 / (a * a) * grad_norm_sq(state.u)
    val += params.m * params.m * c2 * l2_norm_sq(state.u)
    if nl is not None:
        fu = Field(state.u.grid, np.asarray(nl.f(state.u.values), dtype=np.complex128))
        val -= c2 * inner_re(fu, state.u)
    return val


def rel_E_I_gap(state: State, sf: ScaleFactor, params: PhysicalParams,
                nl: Nonlinearity | None) -> float:
    """E minus its structural lower bound; nonnegative, zero iff the structure
    inequality is pointwise tight on the data."""
    a, _, _ = sf.eval(state.t)
    c2 = params.c * params.c
    eps = params.eps
    quad = c2 / (a * a) * grad_norm_sq(state.u) + params.m * params.m * c2 * l2_norm_sq(state.u)
    bound = 0.5 * l2_norm_sq(state.v)
    bound += nehari(state, sf, params, nl) / (eps + 2.0)
    bound += eps / (2.0 * (eps + 2.0)) * quad
    return energy(state, sf, params, nl) - bound


def rho(u0: Field, u1: Field, sf: ScaleFactor, params: PhysicalParams,
        nl: Nonlinearity | None) -> float:
    """Norm-weighted data margin at t = 0."""
    mc2 = params.m * params.m * params.c * params.c
    lead = mc2 * params.eps / (2.0 * (params.eps + 2.0)) * l2_norm_sq(u0)
    return lead - energy(State(0.0, u0, u1), sf, params, nl)


def delta(u0: Field, u1: Field, t0: float, sf: ScaleFactor, params: PhysicalParams,
          nl: Nonlinearity | None) -> float:
    """Velocity-weighted data margin at t = t0."""
    lead = (abs(params.m) * params.c * params.eps / (2.0 * (params.eps + 2.0))
            * inner_re(u0, u1))
    return lead - energy(State(t0, u0, u1), sf, params, nl)


def hdiag(state: State, params: PhysicalParams, E_t0: float) -> float:
    """Growth diagnostic 2 Re(u, u_t) - 4(eps+2) E(t0) / (|m| c eps).

    Positive and exponentially growing along velocity-margin certificates.
    Undefined for m = 0.
    """
    if params.m == 0.0:
        raise MasslessHdiag("the growth diagnostic divides by |m|")
    shift = 4.0 * (params.eps + 2.0) * E_t0 / (abs(params.m) * params.c * params.eps)
    return 2.0 * inner_re(state.u, state.v) - shift


# ---------------------------------------------------------------------------
# series diagnostics over a recorded trajectory


@dataclass
class TraceArrays:
    """Columnar samples of the scalar trajectory diagnostics."""

    t: np.ndarray
    L: np.ndarray          # ||u||^2
    ut_sq: np.ndarray      # ||u_t||^2
    re_u_ut: np.ndarray    # Re(u, u_t)
    I: np.ndarray          # Nehari functional

    @classmethod
    def from_rows(cls, rows) -> "TraceArrays":
        if not rows:
            raise EmptyTrace("no samples")
        return cls(
            t=np.array([r.t for r in rows], dtype=float),
            L=np.array([r.L for r in rows], dtype=float),
            ut_sq=np.array([r.ut_sq for r in rows], dtype=float),
            re_u_ut=np.array([0.5 * r.Lp for r in rows], dtype=float),
            I=np.array([r.I for r in rows], dtype=float),
        )

    def __len__(self) -> int:
        return len(self.t)


def _rates(samples: TraceArrays, sf: ScaleFactor):
    a, adot, addot = sf.eval(samples.t)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    adot = np.atleast_1d(np.asarray(adot, dtype=float))
    addot = np.atleast_1d(np.asarray(addot, dtype=float))
    rate = adot / a
    curv = (adot * adot - addot * a) / (a * a)
    return rate, curv


def _cum(vals: np.ndarray, ts: np.ndarray) -> np.ndarray:
    if len(ts) == 1:
        return np.zeros(1)
    return cumulative_trapezoid(vals, ts, initial=0.0)


@dataclass
class ThetaSeries:
    G: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray
    theta_second: np.ndarray


def theta_accumulate(samples: TraceArrays, sf: ScaleFactor, T: float | None,
                     t0: float) -> ThetaSeries:
    """The convexity certificate quantities along a recorded trajectory.

    theta(t) = L + int_t0^t n [ (adot/a) L + G ] + n (T - t) rate(t0) L(t0),
    with G the running curvature-weighted integral of L. When no certified
    bound T exists the anchor term is dropped (diagnostic-only mode).
    theta' and theta'' use the exact differentiated forms, not finite
    differences of theta.
    """
    if len(samples) == 0:
        raise EmptyTrace("no samples")
    n = sf.n
    ts = samples.t
    rate, curv = _rates(samples, sf)
    G = _cum(curv * samples.L, ts)
    P = _cum(n * rate * samples.L, ts)
    IG = _cum(G, ts)
    R = _cum(n * rate * samples.re_u_ut, ts)
    _, adot0, _ = sf.eval(t0)
    a0, _, _ = sf.eval(t0)
    rate0 = adot0 / a0
    theta = samples.L + P + n * IG
    if T is not None:
        theta = theta + n * (T - ts) * rate0 * samples.L[0]
    theta_prime = 2.0 * samples.re_u_ut + 2.0 * R
    theta_second = 2.0 * (samples.ut_sq - samples.I)
    return ThetaSeries(G=G, theta=theta, theta_prime=theta_prime,
                       theta_second=theta_second)


def eta_series(samples: TraceArrays, sf: ScaleFactor, t0: float) -> np.ndarray:
    """Discriminant of the concavity argument; nonnegative up to roundoff.

    eta = (L + P)(||u_t||^2 + Q) - (Re(u,u_t) + R)^2 with P, Q, R the
    rate-weighted running integrals of L, ||u_t||^2 and Re(u,u_t); a
    Cauchy-Schwarz inequality in the measure (delta_now + n rate dtau).
    """
    if len(samples) == 0:
        raise EmptyTrace("no samples")
    n = sf.n
    ts = samples.t
    rate, _ = _rates(samples, sf)
    P = _cum(n * rate * samples.L, ts)
    Q = _cum(n * rate * samples.ut_sq, ts)
    R = _cum(n * rate * samples.re_u_ut, ts)
    return (samples.L + P) * (samples.ut_sq + Q) - (samples.re_u_ut + R) ** 2


def zeta_series(samples: TraceArrays, sf: ScaleFactor, kappa_tilde: float,
                t0: float) -> np.ndarray:
    """Concavity source term; bounded below by 2(eps+2) times the data margin.

    zeta = -(kt+1) ||u_t||^2 - 2 I(u) - (kt+3) Q.
    """
    if len(samples) == 0:
        raise EmptyTrace("no samples")
    n = sf.n
    ts = samples.t
    rate, _ = _rates(samples, sf)
    Q = _cum(n * rate * samples.ut_sq, ts)
    return (-(kappa_tilde + 1.0) * samples.ut_sq - 2.0 * samples.I
            - (kappa_tilde + 3.0) * Q)


# ---------------------------------------------------------------------------
# incremental accumulation for the PDE driver


class RunningIntegrals:
    """Trapezoid accumulator for the rate-weighted running integrals.

    Pushed once per accepted step. Tracks P, Q, R (rate-weighted L, ||u_t||^2,
    Re(u,u_t)), the curvature integral G and its time integral IG, the energy
    dissipation integral, and the comoving light path c int a^-1 dtau used by
    the wrap-around guard.
    """

    def __init__(self, n: int, c: float):
        self.n = n
        self.c = c
        self.P = 0.0
        self.Q = 0.0
        self.R = 0.0
        self.G = 0.0
        self.IG = 0.0
        self.dissipated = 0.0
        self.light_path = 0.0
        self._prev: dict | None = None

    def push(self, t: float, L: float, ut_sq: float, re_u_ut: float,
             grad_sq: float, a: float, adot: float, addot: float) -> None:
        n, c = self.n, self.c
        rate = adot / a
        cur = {
            "t": t,
            "p": n * rate * L,
            "q": n * rate * ut_sq,
            "r": n * rate * re_u_ut,
            "g": (adot * adot - addot * a) / (a * a) * L,
            "d": n * rate * ut_sq + c * c * adot / (a ** 3) * grad_sq,
            "w": c / a,
        }
        if self._prev is not None:
            h = t - self._prev["t"]
            half = 0.5 * h
            self.P += half * (self._prev["p"] + cur["p"])
            self.Q += half * (self._prev["q"] + cur["q"])
            self.R += half * (self._prev["r"] + cur["r"])
            g_old = self.G
            self.G += half * (self._prev["g"] + cur["g"])
            self.IG += half * (g_old + self.G)
            self.dissipated += half * (self._prev["d"] + cur["d"])
            self.light_path += half * (self._prev["w"] + cur["w"])
        self._prev = cur


@dataclass
class FunctionalSnapshot:
    """One recorded row of the trajectory diagnostics.

    The CSV trace serializes the starred subset; the rest (ut_sq, kappa, mode,
    dissipation, background values) support recomputation and the energy
    budget without re-running.
    """

    t: float
    dt: float
    L: float
    Lp: float
    E: float
    I: float
    theta: float
    theta_prime: float
    theta_second: float
    theta_negk: float
    eta: float
    zeta: float
    Hdiag: float
    wrap_margin: float
    G: float = 0.0
    ut_sq: float = 0.0
    kappa: float = math.nan
    mode: str = "none"
    e_dissipated: float = 0.0
    a: float = 1.0
    adot: float = 0.0


CSV_COLUMNS = (
    "t", "dt", "L2sq", "L2sq_prime", "E", "I", "theta", "theta_prime",
    "theta_second", "theta_negk", "eta", "zeta", "Hdiag", "wrap_margin",
)


def snapshot_csv_values(row: FunctionalSnapshot) -> tuple[float, ...]:
    return (row.t, row.dt, row.L, row.Lp, row.E, row.I, row.theta,
            row.theta_prime, row.theta_second, row.theta_negk, row.eta,
            row.zeta, row.Hdiag, row.wrap_margin)
