"""Numerical laboratory for blow-up of semilinear waves on expanding
cosmological backgrounds: certificate checks, field evolution with
diagnostic traces, and a concavity-ODE comparison oracle."""

from importlib import resources as _resources

from . import errors
from .config import ProfileSpec, Scenario, parse_config, parse_text
from .dynamics import (BlowupInfo, RunConfig, Trace, estimate_t_star,
                       homogeneous_oracle, run, step)
from .field import (Field, Grid, State, inner_re, integrate_F, grad_norm_sq,
                    l2_norm_sq, laplacian, make_profile, support_radius)
from .functionals import (CSV_COLUMNS, PhysicalParams, TraceArrays, delta,
                          energy, eta_series, hdiag, kappa_for_mode, nehari,
                          rho, theta_accumulate, zeta_series)
from .hypotheses import (HypothesisReport, TheoremCheck, calibrate_amplitude,
                         check_corollaries, check_theorem1, check_theorem2,
                         classify_table1, evaluate, theorem1_bound,
                         theorem2_bound)
from .nonlinearity import (GaugeInvariantPower, RealAbsPower,
                           admissible_eps_range, sobolev_admissible,
                           verify_structure)
from .odelab import (ComparisonReport, ConcavityProblem, ConcavitySolution,
                     comparison_check, problem_from_certificate,
                     random_admissible_problems, solve_concavity, tstar_bound)
from .scale_factor import (DeSitter, PowerLaw, Tabulated, c_epsilon,
                           check_monotone_expansion, check_t0_condition,
                           hubble_rate, min_admissible_t0,
                           t0_condition_threshold)

__version__ = "0.1.0"


def bundled_scenario_names() -> list[str]:
    """Names of the shipped scenario configs (pass to load_bundled_scenario)."""
    root = _resources.files(__name__) / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir()
                  if p.name.endswith(".cfg"))


def bundled_scenario_text(name: str) -> str:
    path = _resources.files(__name__) / "scenarios" / f"{name}.cfg"
    return path.read_text(encoding="utf-8")


def load_bundled_scenario(name: str) -> Scenario:
    return parse_text(bundled_scenario_text(name), name=name)
