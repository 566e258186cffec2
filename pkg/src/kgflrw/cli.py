"""Command line front end: check, simulate, oracle-ode, sweep.

Exit codes: 0 a certificate applies or the run completed; 2 configuration
error; 3 no certificate applies; 4 certificate blocked only by the
background's lifetime; 5 wrap-around abort (periodic images about to
contaminate the wavefront); 6 non-finite state.

All emitted text is deterministic for a given config and seed: floats are
serialized with 17 significant digits and rows end with a bare newline, so
repeated invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import Scenario, parse_config, parse_text
from .dynamics import Trace, run
from .errors import (HorizonTooShort, InvariantViolation, KGFLRWError,
                     NoVanishBeforeT, ParseError, TimeBeyondHorizon,
                     WrapAroundRisk)
from .functionals import CSV_COLUMNS, snapshot_csv_values
from .hypotheses import HypothesisReport, evaluate
from .odelab import (ConcavityProblem, problem_from_certificate,
                     random_admissible_problems, solve_concavity, tstar_bound)
from .scale_factor import hubble_rate

log = logging.getLogger("kgflrw")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_THEOREM = 3
EXIT_HORIZON = 4
EXIT_WRAP = 5
EXIT_NONFINITE = 6

_SWEEP_KEYS = ("data0.amplitude", "data1.amplitude", "scale.H",
               "scale.sigma", "nonlin.eps", "nonlin.p")

ORACLE_COLUMNS = ("kappa", "A", "B", "T", "y0", "y1", "t_vanish", "t_bound")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def report_lines(report: HypothesisReport, scenario: Scenario,
                 extra: dict | None = None) -> list[str]:
    """Flat key = value block; every line parses back via parse_report."""
    lines = [f"scenario = {scenario.name}",
             f"config_hash = {scenario.config_hash}"]
    flat = report.flat()
    if extra:
        flat.update(extra)
    lines.extend(f"{key} = {_fmt(val)}" for key, val in flat.items())
    return lines


def parse_report(text: str) -> dict:
    """Inverse of report_lines/report CSV emission for machine consumers."""
    stripped = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    stripped = [ln for ln in stripped if ln]
    if stripped and "=" not in stripped[0] and "," in stripped[0]:
        header = stripped[0].split(",")
        values = stripped[1].split(",")
        if len(header) != len(values):
            raise ParseError("header/value arity mismatch")
        pairs = zip(header, values)
    else:
        pairs = []
        for lineno, ln in enumerate(stripped, start=1):
            if "=" not in ln:
                raise ParseError("expected `key = value`", line=lineno)
            key, _, val = ln.partition("=")
            pairs.append((key.strip(), val.strip()))
    out = {}
    for key, val in pairs:
        try:
            out[key] = int(val)
        except ValueError:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def report_csv(report: HypothesisReport, scenario: Scenario,
               extra: dict | None = None) -> str:
    flat = {"scenario": scenario.name, "config_hash": scenario.config_hash}
    flat.update(report.flat())
    if extra:
        flat.update(extra)
    header = ",".join(flat.keys())
    row = ",".join(_fmt(v) for v in flat.values())
    return f"{header}\n{row}\n"


def trace_csv_text(trace: Trace) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in trace.rows:
        lines.append(",".join(format(v, ".17g")
                              for v in snapshot_csv_values(row)))
    return "\n".join(lines) + "\n"


def _evaluate_scenario(scn: Scenario) -> HypothesisReport:
    u0, u1 = scn.build_fields()
    return evaluate(u0, u1, scn.run.t0, scn.sf, scn.params, scn.nl,
                    mode=scn.run.theorem_mode)


def _run_scenario(scn: Scenario, report: HypothesisReport | None) -> Trace:
    u0, u1 = scn.build_fields()
    mode = report.mode if report is not None else "none"
    T_bound = report.T_bound if report is not None and report.mode != "none" \
        else None
    return run(u0, u1, scn.sf, scn.params, scn.nl, scn.run,
               T_bound=T_bound, support_radius=scn.wrap_support_radius(),
               config_hash=scn.config_hash, mode=mode)


def _run_summary(trace: Trace, report: HypothesisReport | None) -> dict:
    meta = trace.meta
    out = {
        "run.t_final": float(meta["t_final"]),
        "run.accepted_steps": int(meta["accepted"]),
        "run.rejected_steps": int(meta["rejected"]),
        "run.reached_t_end": str(bool(meta["reached_t_end"])).lower(),
        "blowup.detected": "false",
        "blowup.reason": "none",
    }
    bu = trace.blowup
    if bu is not None:
        out["blowup.detected"] = str(bool(bu.detected)).lower()
        out["blowup.reason"] = bu.reason
        out["blowup.t"] = float(bu.t)
        if bu.t_star is not None:
            out["blowup.t_star"] = float(bu.t_star)
            out["blowup.t_star_uncertainty"] = float(
                bu.t_star_uncertainty or 0.0)
            T = report.T_bound if report is not None else None
            if T is not None:
                out["blowup.bound_margin"] = float(T - bu.t_star)
    return out


def cmd_check(args) -> int:
    scn = parse_config(args.config)
    try:
        report = _evaluate_scenario(scn)
    except HorizonTooShort as exc:
        print(f"horizon too short: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    if args.csv:
        sys.stdout.write(report_csv(report, scn))
    else:
        sys.stdout.write("\n".join(report_lines(report, scn)) + "\n")
    return EXIT_OK if report.theorem != "none" else EXIT_NO_THEOREM


def cmd_simulate(args) -> int:
    scn = parse_config(args.config)
    out_dir = args.out or f"{scn.name}-out"
    os.makedirs(out_dir, exist_ok=True)
    report = None
    horizon_note = None
    try:
        report = _evaluate_scenario(scn)
    except HorizonTooShort as exc:
        horizon_note = str(exc)
        log.info("certificate blocked by horizon, running uncertified: %s",
                 exc)

    code = EXIT_OK
    try:
        trace = _run_scenario(scn, report)
    except WrapAroundRisk as exc:
        trace = exc.trace
        code = EXIT_WRAP
        print(f"wrap-around abort: {exc}", file=sys.stderr)
    if trace.blowup is not None and trace.blowup.reason == "nonfinite":
        code = EXIT_NONFINITE if code == EXIT_OK else code
        print("state became non-finite; trace truncated", file=sys.stderr)

    with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
        fh.write(trace_csv_text(trace))
    summary = _run_summary(trace, report)
    if horizon_note is not None:
        summary["note.horizon"] = horizon_note.replace("\n", " ")
    if report is not None:
        lines = report_lines(report, scn, extra=summary)
    else:
        lines = [f"scenario = {scn.name}",
                 f"config_hash = {scn.config_hash}"]
        lines.extend(f"{k} = {_fmt(v)}" for k, v in summary.items())
    with open(os.path.join(out_dir, "report.txt"), "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    sys.stdout.write("\n".join(lines) + "\n")
    return code


def _oracle_rows(scn: Scenario | None, n_random: int, seed: int) -> list[tuple]:
    rows = []
    problems: list[ConcavityProblem] = []
    if scn is not None:
        report = _evaluate_scenario(scn)
        if report.mode == "none":
            raise InvariantViolation(
                "odelab", "no certificate applies; nothing to derive")
        u0, _ = scn.build_fields()
        eps = scn.params.eps
        t0 = scn.run.t0
        rate0 = hubble_rate(scn.sf, t0)
        if report.mode == "thm1":
            kappa = eps / 4.0
            A = 2.0 * (eps + 2.0) * report.rho
        else:
            kappa = eps / 8.0
            A = 2.0 * (eps + 2.0) * report.delta
        L0 = report.L0
        B = (1.0 + scn.params.n * rate0) * L0
        T = report.T_bound
        theta0 = L0 + scn.params.n * (T - t0) * rate0 * L0
        theta_prime0 = 2.0 * report.re_u0_u1
        problems.append(problem_from_certificate(
            kappa, A, B, T, theta0, theta_prime0, t0=t0))
    problems.extend(random_admissible_problems(n_random, seed=seed))
    for prob in problems:
        sol = solve_concavity(prob)
        rows.append((prob.kappa, prob.A, prob.B, prob.T, prob.y0, prob.y1,
                     sol.t_vanish, tstar_bound(prob)))
    return rows


def cmd_oracle(args) -> int:
    scn = parse_config(args.config) if args.config else None
    if scn is None and args.random == 0:
        print("error: need a config or --random N", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = _oracle_rows(scn, args.random, args.seed)
    except HorizonTooShort as exc:
        print(f"horizon too short: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_THEOREM
    text = ",".join(ORACLE_COLUMNS) + "\n"
    text += "".join(",".join(format(v, ".17g") for v in row) + "\n"
                    for row in rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_axis(spec: str) -> tuple[str, np.ndarray]:
    m = re.fullmatch(r"([\w.]+)=([^:]+):([^:]+):(\d+)", spec.strip())
    if not m:
        raise ParseError(f"axis spec {spec!r} is not key=lo:hi:steps")
    key, lo, hi, steps = m.group(1), float(m.group(2)), float(m.group(3)), \
        int(m.group(4))
    if key not in _SWEEP_KEYS:
        raise ParseError(
            f"axis key {key!r} not sweepable (choose from {_SWEEP_KEYS})")
    if steps < 1:
        raise ParseError("axis needs at least one step")
    values = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    return key, values


def _override_text(text: str, key: str, value: float) -> str:
    sval = format(float(value), ".17g")
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    lines = text.splitlines()
    for i, ln in enumerate(lines):
        if pat.match(ln.split("#", 1)[0]):
            lines[i] = f"{key} = {sval}"
            break
    else:
        lines.append(f"{key} = {sval}")
    return "\n".join(lines) + "\n"


def _sweep_point(payload) -> dict:
    """One sweep point, isolated; returns a frontier row even on failure."""
    base_text, name, overrides, out_dir = payload
    row = dict(overrides)
    label = "_".join(f"{k.split('.')[-1]}{format(v, '.6g')}"
                     for k, v in overrides.items())
    row.update({"case_label": "none", "theorem": "none", "T_bound": math.nan,
                "rho": math.nan, "delta": math.nan, "t_star": math.nan,
                "margin": math.nan, "status": "ok"})
    try:
        text = base_text
        for key, val in overrides.items():
            text = _override_text(text, key, val)
        scn = parse_text(text, name=f"{name}-{label}")
        try:
            report = _evaluate_scenario(scn)
        except HorizonTooShort as exc:
            report = None
            row["status"] = "horizon_too_short"
        if report is not None:
            row.update({"case_label": report.case_label,
                        "theorem": report.theorem,
                        "rho": report.rho, "delta": report.delta})
            if report.T_bound is not None:
                row["T_bound"] = report.T_bound
        trace = _run_scenario(scn, report)
        bu = trace.blowup
        if bu is not None and bu.t_star is not None:
            row["t_star"] = bu.t_star
            if report is not None and report.T_bound is not None:
                row["margin"] = report.T_bound - bu.t_star
        point_dir = os.path.join(out_dir, label)
        os.makedirs(point_dir, exist_ok=True)
        with open(os.path.join(point_dir, "trace.csv"), "w",
                  newline="") as fh:
            fh.write(trace_csv_text(trace))
        summary = _run_summary(trace, report)
        if report is not None:
            lines = [f"{k} = {_fmt(v)}" for k, v in report.flat().items()]
        else:
            lines = []
        lines.extend(f"{k} = {_fmt(v)}" for k, v in summary.items())
        with open(os.path.join(point_dir, "report.txt"), "w",
                  newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except WrapAroundRisk:
        row["status"] = "wrap_around"
    except KGFLRWError as exc:
        row["status"] = f"error({type(exc).__name__})"
    return row


def cmd_sweep(args) -> int:
    scn = parse_config(args.config)  # validates the base point
    with open(args.config, encoding="utf-8") as fh:
        base_text = fh.read()
    axes = [_parse_axis(spec) for spec in args.axis]
    if len(axes) > 2:
        print("error: at most two axes", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or f"{scn.name}-sweep"
    os.makedirs(out_dir, exist_ok=True)

    points = [{}]
    for key, values in axes:
        points = [dict(pt, **{key: float(v)}) for pt in points
                  for v in values]
    payloads = [(base_text, scn.name, pt, out_dir) for pt in points]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]

    axis_keys = [key for key, _ in axes]
    rows.sort(key=lambda r: tuple(r[k] for k in axis_keys))
    columns = axis_keys + ["case_label", "theorem", "T_bound", "rho",
                           "delta", "t_star", "margin", "status"]
    text = ",".join(columns) + "\n"
    for row in rows:
        text += ",".join(_fmt(row[c]) for c in columns) + "\n"
    frontier = os.path.join(out_dir, "frontier.csv")
    with open(frontier, "w", newline="") as fh:
        fh.write(text)
    sys.stdout.write(text)
    n_bad = sum(1 for r in rows if r["status"] != "ok")
    log.info("sweep wrote %s (%d points, %d failed)",
             frontier, len(rows), n_bad)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kgflrw",
        description="Blow-up laboratory for semilinear waves on expanding "
                    "backgrounds")
    sub = ap.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate blow-up certificates")
    p_check.add_argument("config")
    p_check.add_argument("--csv", action="store_true",
                         help="emit a CSV header+row instead of key=value")
    p_check.set_defaults(func=cmd_check)

    p_sim = sub.add_parser("simulate", help="integrate the field and trace "
                                            "diagnostics")
    p_sim.add_argument("config")
    p_sim.add_argument("--out", default=None, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_or = sub.add_parser("oracle-ode", help="solve the concavity "
                                             "comparison ODE")
    p_or.add_argument("config", nargs="?", default=None)
    p_or.add_argument("--random", type=int, default=0, metavar="N",
                      help="append N randomized admissible problems")
    p_or.add_argument("--seed", type=int, default=0)
    p_or.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_or.set_defaults(func=cmd_oracle)

    p_sw = sub.add_parser("sweep", help="grid sweep over one or two keys")
    p_sw.add_argument("config")
    p_sw.add_argument("--axis", action="append", required=True,
                      metavar="key=lo:hi:steps")
    p_sw.add_argument("--jobs", type=int, default=1)
    p_sw.add_argument("--out", default=None, help="output directory")
    p_sw.set_defaults(func=cmd_sweep)
    return ap


def main_entry(argv=None) -> int:
    level = os.environ.get("KGFLRW_LOG", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s")
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TimeBeyondHorizon) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoVanishBeforeT as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_THEOREM
    except KGFLRWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main_entry())
