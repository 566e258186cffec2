"""Time integration of the damped wave system on a periodic grid.

First-order form: du/dt = v, dv/dt = -n (adot/a) v + c^2 a^-2 lap u
- m^2 c^2 u + c^2 f(u). Classical RK4 with the background evaluated at each
stage time, so homogeneous data reduce the step to the exact scalar RK4 map
(the difference-form Laplacian is bitwise zero on constants).

Step control: dt is clamped to the CFL window cfl * h * a_min / c (a_min over
the step endpoints), and a step that grows ||u|| by more than growth_tol is
rejected and retried at dt/2 until dt_min; after a stretch of accepted steps
dt regrows toward the configured value, so a transient spike (e.g. the norm
passing near zero on an oscillatory run) does not pin the step size for the
rest of the integration. Blow-up is declared when ||u||^2
reaches blowup_threshold times its initial value (reason "norm_threshold"),
when the controller is pinned at dt_min with accelerating growth
("step_collapse"), or when the state goes nonfinite ("nonfinite", in which
case the last finite state ends the trace and detected stays False).

The blow-up instant is extrapolated from the tail: near the singularity
||u||^2 scales like (t* - t)^(-4/(p-1)), so y = L^(-(p-1)/4) is asymptotically
linear and its zero crossing estimates t*. Two fit windows give an
uncertainty.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import (CflViolation, NonFiniteState, TimeBeyondHorizon,
                     TooFewSamples, WrapAroundRisk)
from .field import Field, State, grad_norm_sq, inner_re, l2_norm_sq, lap_array
from .functionals import (FunctionalSnapshot, PhysicalParams, RunningIntegrals,
                          energy, kappa_for_mode, kappa_tilde_for_mode, nehari)
from .nonlinearity import Nonlinearity
from .scale_factor import ScaleFactor

_MODES = ("auto", "thm1", "thm2", "none")


@dataclass(frozen=True)
class RunConfig:
    t0: float = 0.0
    t_end: float = 1.0
    dt: float = 1e-3
    dt_min: float = 1e-9
    record_every: int = 10
    blowup_threshold: float = 1e12
    cfl: float = 0.4
    growth_tol: float = 0.05
    seed: int = 0
    theorem_mode: str = "auto"

    def __post_init__(self):
        if self.t_end <= self.t0:
            raise ValueError("t_end must exceed t0")
        if self.t0 < 0:
            raise ValueError("t0 must be nonnegative")
        if self.dt <= 0 or self.dt_min <= 0:
            raise ValueError("dt and dt_min must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.blowup_threshold <= 1:
            raise ValueError("blowup_threshold must exceed 1")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must be in (0, 1]")
        if self.growth_tol <= 0:
            raise ValueError("growth_tol must be positive")
        if self.theorem_mode not in _MODES:
            raise ValueError(f"theorem_mode must be one of {_MODES}")


@dataclass
class BlowupInfo:
    reason: str
    t: float
    t_star: float | None = None
    t_star_uncertainty: float | None = None
    detected: bool = True


@dataclass
class Trace:
    rows: list
    blowup: BlowupInfo | None
    run_config_hash: str
    meta: dict = dc_field(default_factory=dict)


def _rhs(t, u, v, sf, params, nl, h):
    a, adot, _ = sf.eval(t)
    rate = adot / a
    c2 = params.c * params.c
    dv = (c2 / (a * a)) * lap_array(u, h)
    dv -= (params.m * params.m * c2) * u
    dv -= (params.n * rate) * v
    if nl is not None:
        dv = dv + c2 * np.asarray(nl.f(u))
    return v, dv


def _rk4(t, u, v, dt, sf, params, nl, h):
    k1u, k1v = _rhs(t, u, v, sf, params, nl, h)
    hm = 0.5 * dt
    k2u, k2v = _rhs(t + hm, u + hm * k1u, v + hm * k1v, sf, params, nl, h)
    k3u, k3v = _rhs(t + hm, u + hm * k2u, v + hm * k2v, sf, params, nl, h)
    k4u, k4v = _rhs(t + dt, u + dt * k3u, v + dt * k3v, sf, params, nl, h)
    sixth = dt / 6.0
    u_new = u + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v_new = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u_new, v_new


def cfl_limit(sf: ScaleFactor, t: float, dt: float, h: float, c: float,
              cfl: float) -> float:
    """Largest admissible step from t given the endpoint scale factors."""
    a_now, _, _ = sf.eval(t)
    a_end, _, _ = sf.eval(t + dt)
    return cfl * h * min(a_now, a_end) / c


def step(state: State, dt: float, sf: ScaleFactor, params: PhysicalParams,
         nl: Nonlinearity | None, cfl: float = 0.4) -> State:
    """Single RK4 step with CFL enforcement; raises instead of degrading."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    h = state.u.grid.spacing
    limit = cfl_limit(sf, state.t, dt, h, params.c, cfl)
    if dt > limit * (1.0 + 1e-9):
        raise CflViolation(f"dt = {dt} exceeds CFL limit {limit}")
    u_new, v_new = _rk4(state.t, state.u.values, state.v.values, dt, sf,
                        params, nl, h)
    if not (np.all(np.isfinite(u_new.view(float)))
            and np.all(np.isfinite(v_new.view(float)))):
        raise NonFiniteState(f"state nonfinite after step from t = {state.t}")
    grid = state.u.grid
    return State(state.t + dt, Field(grid, u_new), Field(grid, v_new))


def run(u0: Field, u1: Field, sf: ScaleFactor, params: PhysicalParams,
        nl: Nonlinearity | None, cfg: RunConfig, T_bound: float | None = None,
        support_radius: float | None = None, config_hash: str = "",
        mode: str = "none") -> Trace:
    """Integrate from (u0, u1) at cfg.t0 and record the diagnostic trace.

    mode selects the certificate whose exponents label the recorded theta^(-k)
    and zeta columns ("thm1", "thm2", or "none" for diagnostics without a
    certificate; with no certified T_bound the anchor term of theta is
    dropped). Localized data pass support_radius so the trace carries the
    light-cone wrap margin; the run aborts with WrapAroundRisk (partial trace
    attached) if the margin is exhausted before t_end.
    """
    if mode not in ("thm1", "thm2", "none"):
        raise ValueError("mode must be thm1, thm2 or none")
    horizon = sf.horizon()
    if cfg.t_end >= horizon:
        raise TimeBeyondHorizon(
            f"t_end = {cfg.t_end} not below the background horizon {horizon}")
    grid = u0.grid
    h = grid.spacing
    n = params.n
    if n != grid.n:
        raise ValueError("params.n must match the grid dimension")
    c2 = params.c * params.c

    L0 = l2_norm_sq(u0)
    if L0 <= 0:
        raise ValueError("initial data must be nonzero")
    state0 = State(cfg.t0, u0.copy(), u1.copy())
    E_t0 = energy(state0, sf, params, nl)
    a0, adot0, _ = sf.eval(cfg.t0)
    rate0 = adot0 / a0
    kap = kappa_for_mode(mode, params.eps) if mode != "none" else math.nan
    kt = kappa_tilde_for_mode(mode, params.eps) if mode != "none" else math.nan
    margin0 = math.inf
    if support_radius is not None:
        margin0 = grid.half_width - support_radius
        if margin0 <= 0:
            raise WrapAroundRisk(
                f"support radius {support_radius} already fills the box")

    acc = RunningIntegrals(n, params.c)
    rows: list[FunctionalSnapshot] = []
    hd_scale = math.nan
    if params.m != 0.0:
        hd_scale = 4.0 * (params.eps + 2.0) * E_t0 / (
            abs(params.m) * params.c * params.eps)

    def snapshot(state: State, dt_used: float, L, ut_sq, re_u_ut, grad_sq,
                 a, adot, addot) -> FunctionalSnapshot:
        t = state.t
        E = energy(state, sf, params, nl)
        I = nehari(state, sf, params, nl)
        theta = L + acc.P + n * acc.IG
        if T_bound is not None:
            theta += n * (T_bound - t) * rate0 * L0
        theta_p = 2.0 * re_u_ut + 2.0 * acc.R
        theta_pp = 2.0 * (ut_sq - I)
        negk = theta ** (-kap) if mode != "none" and theta > 0 else math.nan
        eta = (L + acc.P) * (ut_sq + acc.Q) - (re_u_ut + acc.R) ** 2
        zeta = (-(kt + 1.0) * ut_sq - 2.0 * I - (kt + 3.0) * acc.Q
                if mode != "none" else math.nan)
        hdg = 2.0 * re_u_ut - hd_scale if params.m != 0.0 else math.nan
        margin = margin0 - acc.light_path if math.isfinite(margin0) else math.inf
        return FunctionalSnapshot(
            t=t, dt=dt_used, L=L, Lp=2.0 * re_u_ut, E=E, I=I, theta=theta,
            theta_prime=theta_p, theta_second=theta_pp, theta_negk=negk,
            eta=eta, zeta=zeta, Hdiag=hdg, wrap_margin=margin, G=acc.G,
            ut_sq=ut_sq, kappa=kap, mode=mode, e_dissipated=acc.dissipated,
            a=a, adot=adot)

    def measure(state: State):
        L = l2_norm_sq(state.u)
        ut_sq = l2_norm_sq(state.v)
        re_u_ut = inner_re(state.u, state.v)
        grad_sq = grad_norm_sq(state.u)
        return L, ut_sq, re_u_ut, grad_sq

    state = state0
    t = cfg.t0
    L, ut_sq, re_u_ut, grad_sq = measure(state)
    a_t, adot_t, addot_t = sf.eval(t)
    acc.push(t, L, ut_sq, re_u_ut, grad_sq, a_t, adot_t, addot_t)
    rows.append(snapshot(state, 0.0, L, ut_sq, re_u_ut, grad_sq,
                         a_t, adot_t, addot_t))
    last_recorded_t = t

    dt = cfg.dt
    accepted = rejected = 0
    accept_streak = 0
    min_dt_used = dt
    tail_start = cfg.blowup_threshold * 1e-4
    floor_ratios: deque = deque(maxlen=3)
    blow: BlowupInfo | None = None
    since_record = 0
    L_prev = L
    end_tol = 1e-12 * max(1.0, abs(cfg.t_end))

    while t < cfg.t_end - end_tol and blow is None:
        dt_eff = min(dt, cfg.t_end - t)
        limit = cfl_limit(sf, t, dt_eff, h, params.c, cfg.cfl)
        if dt_eff > limit:
            dt_eff = limit
        u_new, v_new = _rk4(t, state.u.values, state.v.values, dt_eff, sf,
                            params, nl, h)
        L_new = float(np.vdot(u_new, u_new).real) * grid.cell_volume
        if not math.isfinite(L_new):
            blow = BlowupInfo(reason="nonfinite", t=t, detected=False)
            break
        ratio = math.sqrt(L_new / L_prev) if L_prev > 0 else 1.0
        at_floor = dt_eff <= cfg.dt_min
        if ratio > 1.0 + cfg.growth_tol and not at_floor:
            dt = 0.5 * dt_eff
            rejected += 1
            accept_streak = 0
            continue

        t = t + dt_eff
        state = State(t, Field(grid, u_new), Field(grid, v_new))
        accepted += 1
        accept_streak += 1
        # regrow after 4 clean accepts; 3 at-floor accepts still fit in the
        # step_collapse window before the doubling lifts dt off the floor
        if accept_streak >= 4 and dt < cfg.dt:
            dt = min(cfg.dt, 2.0 * dt)
            accept_streak = 0
        since_record += 1
        min_dt_used = min(min_dt_used, dt_eff)
        L, ut_sq, re_u_ut, grad_sq = measure(state)
        if not (math.isfinite(ut_sq) and math.isfinite(grad_sq)):
            blow = BlowupInfo(reason="nonfinite", t=t, detected=False)
            break
        a_t, adot_t, addot_t = sf.eval(t)
        acc.push(t, L, ut_sq, re_u_ut, grad_sq, a_t, adot_t, addot_t)

        in_tail = nl is not None and L >= tail_start * L0
        if since_record >= cfg.record_every or in_tail:
            rows.append(snapshot(state, dt_eff, L, ut_sq, re_u_ut, grad_sq,
                                 a_t, adot_t, addot_t))
            last_recorded_t = t
            since_record = 0

        margin = margin0 - acc.light_path
        if math.isfinite(margin0) and margin <= 0:
            partial = Trace(rows=rows, blowup=None,
                            run_config_hash=config_hash,
                            meta={"aborted": "wrap_around", "t": t,
                                  "accepted": accepted, "rejected": rejected,
                                  "min_dt": min_dt_used, "t_final": t,
                                  "reached_t_end": False, "E_t0": E_t0,
                                  "L0": L0, "rate0": rate0, "mode": mode,
                                  "kappa": kap, "kappa_tilde": kt,
                                  "T_bound": T_bound,
                                  "light_path": acc.light_path,
                                  "support_radius": support_radius})
            raise WrapAroundRisk(
                f"comoving light path crossed the support margin at t = {t}",
                trace=partial)

        if L >= cfg.blowup_threshold * L0:
            blow = BlowupInfo(reason="norm_threshold", t=t)
            break
        if at_floor and ratio > 1.0 + cfg.growth_tol:
            floor_ratios.append(ratio)
            if len(floor_ratios) == 3 and (floor_ratios[0] < floor_ratios[1]
                                           < floor_ratios[2]):
                blow = BlowupInfo(reason="step_collapse", t=t)
                break
        else:
            floor_ratios.clear()
        L_prev = L

    if last_recorded_t != t and (blow is None or blow.reason != "nonfinite"):
        a_t, adot_t, addot_t = sf.eval(t)
        L, ut_sq, re_u_ut, grad_sq = measure(state)
        rows.append(snapshot(state, dt, L, ut_sq, re_u_ut, grad_sq,
                             a_t, adot_t, addot_t))

    if blow is not None and blow.reason in ("norm_threshold", "step_collapse") \
            and nl is not None:
        try:
            t_star, unc = estimate_t_star(rows, nl.p, L0)
            blow.t_star = t_star
            blow.t_star_uncertainty = unc
        except (TooFewSamples, ValueError):
            pass

    meta = {
        "accepted": accepted,
        "rejected": rejected,
        "min_dt": min_dt_used,
        "t_final": t,
        "reached_t_end": blow is None and t >= cfg.t_end - end_tol,
        "E_t0": E_t0,
        "L0": L0,
        "rate0": rate0,
        "mode": mode,
        "kappa": kap,
        "kappa_tilde": kt,
        "T_bound": T_bound,
        "light_path": acc.light_path,
        "support_radius": support_radius,
    }
    return Trace(rows=rows, blowup=blow, run_config_hash=config_hash, meta=meta)


def estimate_t_star(rows, p: float, L0: float, tail_factor: float = 1e8,
                    max_points: int = 12) -> tuple[float, float]:
    """Extrapolate the blow-up instant from the recorded tail.

    Fits y = L^(-(p-1)/4) linearly in t over the last max_points rows with
    L >= tail_factor * L0 and returns the zero crossing, with the shift under
    a half-window refit as the uncertainty.
    """
    tail = [r for r in rows if r.L >= tail_factor * L0]
    tail = tail[-max_points:]
    if len(tail) < 4:
        raise TooFewSamples(
            f"only {len(tail)} rows above the tail threshold")
    expo = -(p - 1.0) / 4.0
    t = np.array([r.t for r in tail])
    y = np.array([r.L for r in tail]) ** expo
    slope, intercept = np.polyfit(t, y, 1)
    if slope >= 0:
        raise ValueError("tail is not decaying toward a zero crossing")
    t_full = -intercept / slope
    half = tail[len(tail) // 2:]
    th = np.array([r.t for r in half])
    yh = np.array([r.L for r in half]) ** expo
    s2, i2 = np.polyfit(th, yh, 1)
    t_half = -i2 / s2 if s2 < 0 else t_full
    return float(t_full), abs(float(t_full) - float(t_half))


# ---------------------------------------------------------------------------
# homogeneous reference solution


@dataclass
class OracleResult:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t_event: float | None
    t_star: float | None


def homogeneous_oracle(u0: complex, u1: complex, sf: ScaleFactor,
                       params: PhysicalParams, nl: Nonlinearity | None,
                       t_end: float, t0: float = 0.0, rtol: float = 1e-10,
                       cap: float = 1e10) -> OracleResult:
    """High-accuracy reference for spatially constant data.

    Integrates u'' + n (adot/a) u' + m^2 c^2 u = c^2 f(u) as a 4-real system
    with DOP853. A terminal event fires at |u| = cap; for a real escaping
    trajectory the remaining time to the singularity is the converged
    quadrature of the frozen-damping energy relation, giving t_star to far
    below the PDE tolerance.
    """
    n = params.n
    c2 = params.c * params.c
    m2c2 = params.m * params.m * c2

    def rhs(t, s):
        ur, ui, vr, vi = s
        a, adot, _ = sf.eval(t)
        rate = n * adot / a
        if nl is not None:
            fu = nl.f(np.complex128(complex(ur, ui)))
            fr, fi = fu.real, fu.imag
        else:
            fr = fi = 0.0
        return [vr, vi,
                -rate * vr - m2c2 * ur + c2 * fr,
                -rate * vi - m2c2 * ui + c2 * fi]

    def escape(t, s):
        return s[0] * s[0] + s[1] * s[1] - cap * cap

    escape.terminal = True
    escape.direction = 1

    sol = solve_ivp(rhs, (t0, t_end), [u0.real, u0.imag, u1.real, u1.imag],
                    method="DOP853", rtol=rtol, atol=rtol * max(abs(u0), 1.0),
                    events=escape, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"oracle integration failed: {sol.message}")
    u = sol.y[0] + 1j * sol.y[1]
    v = sol.y[2] + 1j * sol.y[3]
    t_event = None
    t_star = None
    if sol.t_events[0].size:
        t_event = float(sol.t_events[0][0])
        se = sol.sol(t_event)
        t_star = _oracle_tail(se, t_event, params, nl)
    return OracleResult(t=sol.t, u=u, v=v, t_event=t_event, t_star=t_star)


def _oracle_tail(s_event, t_event: float, params: PhysicalParams,
                 nl: Nonlinearity | None) -> float | None:
    """Remaining time from the escape event to the singularity."""
    if nl is None:
        return None
    ur, ui, vr, vi = s_event
    mag = math.hypot(ur, ui)
    if abs(ui) > 1e-6 * mag:
        return None  # tail formula assumes an effectively real trajectory
    sgn = 1.0 if ur >= 0 else -1.0
    w_e = sgn * ur
    wp_e = sgn * vr
    if wp_e <= 0:
        return None
    lam_eff = _effective_coupling(nl, sgn)
    if lam_eff is None or lam_eff <= 0:
        return None
    p = nl.p
    c2 = params.c * params.c
    m2c2 = params.m * params.m * c2
    coef = 2.0 * c2 * lam_eff / (p + 1.0)
    base = wp_e * wp_e - coef * w_e ** (p + 1.0) + m2c2 * w_e * w_e

    def integrand(x):
        u = w_e / x
        sq = base + coef * u ** (p + 1.0) - m2c2 * u * u
        return (w_e / (x * x)) / math.sqrt(sq)

    tail, _ = quad(integrand, 0.0, 1.0, limit=200)
    return t_event + tail


def _effective_coupling(nl: Nonlinearity, sgn: float) -> float | None:
    """Coupling of the escape direction: f(sgn*w)*sgn = lam_eff * w^p for
    w > 0, or None when the trajectory leaves the real axis."""
    from .nonlinearity import GaugeInvariantPower, RealAbsPower

    if isinstance(nl, GaugeInvariantPower):
        lam = complex(nl.lam)
        if lam.imag != 0.0:
            return None
        return lam.real
    if isinstance(nl, RealAbsPower):
        return sgn * nl.sign
    return None
