"""Blow-up certificates: who applies, what bound they certify.

Two certificates are implemented. The norm-margin certificate ("thm1") starts
at t = 0 and requires

    rho = m^2 c^2 eps / (2(eps+2)) ||u0||^2 - E(0) > 0,   Re(u0,u1) >= 0,

with an expanding background (adot >= 0 and adot^2 - addot a >= 0) up to the
certified time; it bounds the blow-up time by

    T = max{ 1, pi^2 (1 + n adot(0)/a(0)) ||u0||^2 / (eps^2 rho) }.

The velocity-margin certificate ("thm2") starts at any admissible t0 with
adot(t0)/a(t0) <= |m| c (sqrt(eps(eps+4)) - eps) / (2n) (no constraint when
m = 0) and requires

    delta = |m| c eps / (2(eps+2)) Re(u0,u1) - E(t0) > 0,
    I(u0) < 0,  Re(u0,u1) >= 0,

bounding blow-up by

    T = t0 + max[ 1, 2 pi^2 (eps+4) (1 + n adot(t0)/a(t0)) ||u0||^2
                     / (eps^2 (eps+2) delta) ].

Either bound only certifies blow-up when it fits inside the background's own
lifetime; a certificate blocked solely by that clause raises HorizonTooShort
with the partial report attached. The module also classifies data against the
four-quadrant initial-data table (using the unit-insensitive m~, c~), maps
closed-form backgrounds to the corollary cases that guarantee the background
conditions, and calibrates data amplitudes to requested margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

from .errors import CalibrationFailed, HorizonTooShort
from .field import Field, State, inner_re, l2_norm_sq
from .functionals import PhysicalParams, delta, energy, nehari, rho
from .nonlinearity import Nonlinearity
from .scale_factor import (DeSitter, PowerLaw, ScaleFactor, Tabulated,
                           c_epsilon, check_monotone_expansion,
                           check_t0_condition, hubble_rate,
                           t0_condition_threshold)

_REL = 1e-9


def theorem1_bound(L0: float, rho_val: float, eps: float, n: int,
                   rate0: float) -> float:
    """Certified bound of the norm-margin certificate (data at t = 0)."""
    if rho_val <= 0:
        raise ValueError("bound requires a positive norm margin")
    return max(1.0, math.pi ** 2 * (1.0 + n * rate0) * L0 / (eps * eps * rho_val))


def theorem2_bound(L0: float, delta_val: float, eps: float, n: int,
                   rate0: float, t0: float) -> float:
    """Certified bound of the velocity-margin certificate (data at t0)."""
    if delta_val <= 0:
        raise ValueError("bound requires a positive velocity margin")
    return t0 + max(1.0, 2.0 * math.pi ** 2 * (eps + 4.0) * (1.0 + n * rate0)
                    * L0 / (eps * eps * (eps + 2.0) * delta_val))


@dataclass
class TheoremCheck:
    """One certificate's verdict with per-condition booleans and margins."""

    name: str
    applicable: bool
    margin: float
    T_bound: float | None
    conditions: dict
    horizon_blocked: bool = False


def _re_tolerance(u0: Field, u1: Field) -> float:
    return _REL * (math.sqrt(l2_norm_sq(u0) * l2_norm_sq(u1)) + 1e-300)


def check_theorem1(u0: Field, u1: Field, sf: ScaleFactor,
                   params: PhysicalParams, nl: Nonlinearity | None) -> TheoremCheck:
    """Norm-margin certificate at t = 0.

    Raises HorizonTooShort when every hypothesis holds and only the clause
    T <= horizon fails, carrying the partial check as .report.
    """
    L0 = l2_norm_sq(u0)
    re01 = inner_re(u0, u1)
    rho_val = rho(u0, u1, sf, params, nl)
    conds = {
        "margin_positive": rho_val > 0.0,
        "re_nonneg": re01 >= -_re_tolerance(u0, u1),
    }
    horizon = sf.horizon()
    T1 = None
    if conds["margin_positive"]:
        T1 = theorem1_bound(L0, rho_val, params.eps, params.n,
                            hubble_rate(sf, 0.0))
        win_hi = min(T1, horizon)
        conds["background"] = check_monotone_expansion(sf, 0.0, win_hi)
        conds["within_horizon"] = T1 <= horizon
        if (conds["re_nonneg"] and conds["background"]
                and not conds["within_horizon"]):
            chk = TheoremCheck("thm1", False, rho_val, None, conds,
                               horizon_blocked=True)
            raise HorizonTooShort(
                f"certificate needs T = {T1:.9g} but the background "
                f"lifetime is {horizon:.9g}", report=chk)
    else:
        conds["background"] = check_monotone_expansion(sf, 0.0, horizon)
        conds["within_horizon"] = True
    applicable = all(conds.values())
    return TheoremCheck("thm1", applicable, rho_val,
                        T1 if applicable else None, conds)


def check_theorem2(u0: Field, u1: Field, t0: float, sf: ScaleFactor,
                   params: PhysicalParams, nl: Nonlinearity | None) -> TheoremCheck:
    """Velocity-margin certificate at t0; HorizonTooShort as in check_theorem1."""
    L0 = l2_norm_sq(u0)
    re01 = inner_re(u0, u1)
    delta_val = delta(u0, u1, t0, sf, params, nl)
    I0 = nehari(State(t0, u0, u1), sf, params, nl)
    ok_t0, thr = check_t0_condition(sf, t0, params.m, params.c, params.eps)
    conds = {
        "t0_condition": ok_t0,
        "margin_positive": delta_val > 0.0,
        "nehari_negative": I0 < 0.0,
        "re_nonneg": re01 >= -_re_tolerance(u0, u1),
    }
    horizon = sf.horizon()
    T2 = None
    if conds["margin_positive"]:
        T2 = theorem2_bound(L0, delta_val, params.eps, params.n,
                            hubble_rate(sf, t0), t0)
        win_hi = min(T2, horizon)
        conds["background"] = check_monotone_expansion(sf, t0, win_hi)
        conds["within_horizon"] = T2 <= horizon
        others = (conds["t0_condition"] and conds["nehari_negative"]
                  and conds["re_nonneg"] and conds["background"])
        if others and not conds["within_horizon"]:
            chk = TheoremCheck("thm2", False, delta_val, None, conds,
                               horizon_blocked=True)
            raise HorizonTooShort(
                f"certificate needs T = {T2:.9g} but the background "
                f"lifetime is {horizon:.9g}", report=chk)
    else:
        conds["background"] = check_monotone_expansion(sf, t0, horizon)
        conds["within_horizon"] = True
    applicable = all(conds.values())
    return TheoremCheck("thm2", applicable, delta_val,
                        T2 if applicable else None, conds)


def classify_table1(u0: Field, u1: Field, t0: float, sf: ScaleFactor,
                    params: PhysicalParams, nl: Nonlinearity | None) -> str:
    """Quadrant label of the initial-data table, or "none" outside its domain.

    The table lives under I(u0) < 0, Re(u0,u1) >= 0, E(t0) >= 0 and m~ > 0.
    With X = m~^2 c~^2 eps/(2(eps+2)) ||u0||^2 and Y the same constant times
    Re(u0,u1): I has X > E >= Y, II has X > E and Y > E, III has E >= X and
    Y > E, IV (open) has E >= X and E >= Y.
    """
    st = State(t0, u0, u1)
    E0 = energy(st, sf, params, nl)
    I0 = nehari(st, sf, params, nl)
    re01 = inner_re(u0, u1)
    mt, ct = params.m_tilde, params.c_tilde
    if mt == 0.0 or I0 >= 0.0 or E0 < 0.0 or re01 < -_re_tolerance(u0, u1):
        return "none"
    lead = mt * mt * ct * ct * params.eps / (2.0 * (params.eps + 2.0))
    x_big = lead * l2_norm_sq(u0) > E0
    y_big = lead * re01 > E0
    if x_big:
        return "II" if y_big else "I"
    return "III" if y_big else "IV"


@dataclass
class CorollaryCases:
    """Closed-form background coverage: which worked case of each corollary
    guarantees the background conditions (n/a when none or not closed-form)."""

    thm1_case: str
    thm2_case: str


def check_corollaries(sf: ScaleFactor, t0: float,
                      params: PhysicalParams) -> CorollaryCases:
    if isinstance(sf, Tabulated):
        return CorollaryCases("n/a", "n/a")
    if isinstance(sf, DeSitter):
        H, sigma = sf.H, -1.0
    else:
        H, sigma = sf.H, sf.sigma

    c1 = "n/a"
    if t0 == 0.0:
        if H == 0.0:
            c1 = "i"
        elif H > 0.0 and sigma >= -1.0:
            c1 = "ii"

    c2 = "n/a"
    m = params.m
    if H == 0.0:
        if t0 == 0.0:
            c2 = "i"
    elif H > 0.0 and sigma >= -1.0:
        if m == 0.0:
            if t0 == 0.0:
                c2 = "ii"
        else:
            thr = t0_condition_threshold(m, params.c, params.eps, params.n)
            if H <= thr * (1.0 + 1e-12):
                if t0 == 0.0:
                    c2 = "iii"
            elif sigma > -1.0:
                ceps = c_epsilon(m, params.c, params.eps)
                t0_req = (2.0 * ceps / (1.0 + sigma)
                          - 2.0 / (params.n * (1.0 + sigma) * H))
                if abs(t0 - t0_req) <= 1e-9 * max(1.0, abs(t0_req)):
                    c2 = "iv"
    return CorollaryCases(c1, c2)


@dataclass
class HypothesisReport:
    case_label: str
    theorem: str            # which certificates hold: thm1 | thm2 | both | none
    mode: str               # certificate driving T_bound and run exponents
    rho: float
    delta: float
    I_u0: float
    re_u0_u1: float
    E_t0: float
    L0: float
    t0_used: float
    T_bound: float | None
    corollary_case: str
    margins: dict = dc_field(default_factory=dict)
    thm1: TheoremCheck | None = None
    thm2: TheoremCheck | None = None

    def flat(self) -> dict:
        """Scalar key=value view for text and CSV emission."""
        out = {
            "case_label": self.case_label,
            "theorem": self.theorem,
            "mode": self.mode,
            "rho": self.rho,
            "delta": self.delta,
            "I_u0": self.I_u0,
            "re_u0_u1": self.re_u0_u1,
            "E_t0": self.E_t0,
            "L0": self.L0,
            "t0_used": self.t0_used,
            "T_bound": self.T_bound if self.T_bound is not None else "none",
            "corollary_case": self.corollary_case,
        }
        for key in sorted(self.margins):
            out[f"margin.{key}"] = self.margins[key]
        return out


def evaluate(u0: Field, u1: Field, t0: float, sf: ScaleFactor,
             params: PhysicalParams, nl: Nonlinearity | None,
             mode: str = "auto") -> HypothesisReport:
    """Run both certificate checks, classify the data, resolve the mode.

    mode "auto" prefers the norm-margin certificate; "thm1"/"thm2" pin one.
    HorizonTooShort propagates only when no certificate applies and at least
    one was blocked purely by the horizon clause.
    """
    if mode not in ("auto", "thm1", "thm2", "none"):
        raise ValueError(f"unknown mode {mode!r}")
    pending: HorizonTooShort | None = None

    if t0 == 0.0:
        try:
            t1 = check_theorem1(u0, u1, sf, params, nl)
        except HorizonTooShort as exc:
            pending = exc
            t1 = exc.report
    else:
        t1 = TheoremCheck("thm1", False, math.nan, None,
                          {"starts_at_zero": False})
    try:
        t2 = check_theorem2(u0, u1, t0, sf, params, nl)
    except HorizonTooShort as exc:
        pending = pending or exc
        t2 = exc.report

    if t1.applicable and t2.applicable:
        theorem = "both"
    elif t1.applicable:
        theorem = "thm1"
    elif t2.applicable:
        theorem = "thm2"
    else:
        theorem = "none"

    if theorem == "none" and pending is not None:
        raise pending

    if mode == "auto":
        resolved = "thm1" if t1.applicable else (
            "thm2" if t2.applicable else "none")
    elif mode == "thm1":
        resolved = "thm1" if t1.applicable else "none"
    elif mode == "thm2":
        resolved = "thm2" if t2.applicable else "none"
    else:
        resolved = "none"

    if resolved == "thm1":
        T_bound = t1.T_bound
    elif resolved == "thm2":
        T_bound = t2.T_bound
    elif theorem in ("thm1", "both"):
        T_bound = t1.T_bound
    elif theorem == "thm2":
        T_bound = t2.T_bound
    else:
        T_bound = None

    st = State(t0, u0, u1)
    E0 = energy(st, sf, params, nl)
    I0 = nehari(st, sf, params, nl)
    re01 = inner_re(u0, u1)
    L0 = l2_norm_sq(u0)
    case = classify_table1(u0, u1, t0, sf, params, nl)
    cors = check_corollaries(sf, t0, params)
    if resolved == "thm1":
        cor = cors.thm1_case
    elif resolved == "thm2":
        cor = cors.thm2_case
    elif theorem in ("thm1", "both"):
        cor = cors.thm1_case
    elif theorem == "thm2":
        cor = cors.thm2_case
    else:
        cor = "n/a"

    margins = {
        "thm1.rho": t1.margin,
        "thm2.delta": t2.margin,
        "thm2.nehari": I0,
        "re_u0_u1": re01,
    }
    if t1.T_bound is not None:
        margins["thm1.T_bound"] = t1.T_bound
    if t2.T_bound is not None:
        margins["thm2.T_bound"] = t2.T_bound
    rate_t0 = hubble_rate(sf, t0)
    thr = t0_condition_threshold(params.m, params.c, params.eps, params.n)
    if math.isfinite(thr):
        margins["thm2.t0_rate_slack"] = thr - rate_t0

    return HypothesisReport(
        case_label=case, theorem=theorem, mode=resolved,
        rho=t1.margin, delta=t2.margin, I_u0=I0, re_u0_u1=re01,
        E_t0=E0, L0=L0, t0_used=t0, T_bound=T_bound, corollary_case=cor,
        margins=margins, thm1=t1, thm2=t2)


def calibrate_amplitude(margin_fn: Callable[[float], float],
                        floor: float = 0.0, start: float = 1.0,
                        max_doublings: int = 60,
                        rel_tol: float = 1e-12) -> tuple[float, float]:
    """Smallest amplitude (up to rel_tol) whose margin exceeds floor.

    Evaluates margin_fn(start) first; if already above floor, start is
    returned untouched. Otherwise the amplitude doubles until the margin
    crosses, then bisection tightens the bracket and the upper end (strictly
    above floor) is returned with its margin. Raises CalibrationFailed when
    doubling never crosses, which is the honest outcome for targets that are
    structurally nonpositive.
    """
    if start <= 0:
        raise ValueError("start amplitude must be positive")
    val = margin_fn(start)
    if val > floor:
        return start, val
    lo, hi = start, start
    for _ in range(max_doublings):
        hi = 2.0 * hi
        val = margin_fn(hi)
        if val > floor:
            break
        lo = hi
    else:
        raise CalibrationFailed(
            f"margin still {val:.6g} <= {floor:.6g} at amplitude {hi:.6g}")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if margin_fn(mid) > floor:
            hi = mid
        else:
            lo = mid
    return hi, margin_fn(hi)
