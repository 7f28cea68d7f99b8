"""
run_experiment: RunConfig -> CSV files in the output directory.

    simulate   simulate.csv          t, x, u (one row per cell and snapshot)
    converge   converge.csv          dt, error, observed_order
    asymptote  asymptote.csv         t, scaled_L<p>... [, reference_scaled_L<p>...]
               asymptote_profile.csv x, u_split [, u_reference], u_M   (at t = T)
    verify     verify.csv            name, value, threshold, passed
"""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from timeit import default_timer
from typing import *

import numpy as np

from .abe_core import Field, Real, DomainError, cfl_max_dt, discrete_lp_norm, kernel_eval, kernel_moments, \
    rectangle_convolution
from .abe_substeps import cn_system, solve_tridiagonal, thomas_solve, cn_relaxation_substep, \
    spectral_relaxation_exact
from .abe_splitting import SplitSchedule, Trajectory, split_evolve, reference_abe_evolve, \
    self_convergence_study, log_spaced_steps
from .abe_asymptotics import ProfileSpec, decay_metric_series, self_similar_profile
from .abe_config import RunConfig
from .abe_report import StudyReport, ReportIOError, emit_csv
from .static_vars import Bunch

logger = logging.getLogger(__name__)

# verify thresholds
MASS_DRIFT_MAX = 1e-9
L2_INCREASE_MAX = 1e-12
THOMAS_BANDED_MAX = 1e-12
CN_SPECTRAL_MAX = 1e-5
SPLIT_REFERENCE_MAX = 5e-2
SPIKE_MAX = 1e-14

MAX_AUTO_DT = 0.5  # cap on the stability bound when converge builds its steps from cfl_fractions


@dataclass
class RunOutcome:
    status: int  # 0: success, 1: a verify check failed
    files: List[Path] = field(default_factory=list)
    reports: Dict[str, StudyReport] = field(default_factory=dict)


def dt_list_from_cfl(T: Real, dt_max: Real, fractions: Sequence[Real]) -> List[Real]:
    """
    Time steps dt_k <= fractions[k] * dt_max dividing T. When fractions[0] / fractions[k] is an
    integer the step count is an exact multiple of the first one, so halved fractions give halved steps.
    dt_max is capped at MAX_AUTO_DT, so every step lies in (0, 1).
    """
    if not T > 0.:
        raise DomainError("converge needs T > 0, got {0}".format(T))
    if dt_max > MAX_AUTO_DT:
        logger.info("stability bound %.6g capped at %g", dt_max, MAX_AUTO_DT)
        dt_max = MAX_AUTO_DT
    n_first = max(1, int(math.ceil(T / (fractions[0] * dt_max) - 1e-9)))
    result = []
    for f in fractions:
        ratio = fractions[0] / f
        if math.isclose(ratio, round(ratio), rel_tol=1e-12):
            n = n_first * int(round(ratio))
        else:
            n = int(math.ceil(T / (f * dt_max) - 1e-9))
        result.append(T / n)
    return result


def trajectory_report(traj: Trajectory) -> StudyReport:
    x = traj.grid.nodes()
    t_column = np.concatenate([np.full(x.size, t) for t in traj.times()])
    x_column = np.tile(x, len(traj.snapshots))
    u_column = np.concatenate([f.values for f in traj.fields()])
    return StudyReport(OrderedDict([("t", t_column), ("x", x_column), ("u", u_column)]), Bunch(**traj.meta))


def _output_dir(cfg: RunConfig, out_dir) -> Path:
    path = Path(out_dir if out_dir is not None else cfg.output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportIOError(path, e)
    return path


def _stamp(report: StudyReport, cfg: RunConfig) -> StudyReport:
    report.meta.config_hash = cfg.config_hash
    report.meta.experiment = cfg.experiment
    return report


def _simulate(cfg: RunConfig) -> Dict[str, StudyReport]:
    u0 = cfg.initial_field()
    sched = SplitSchedule.from_horizon(cfg.T, cfg.dt, cfg.record_every)
    if cfg.solver == "reference":
        traj = reference_abe_evolve(u0, cfg.params, sched, cfg.scheme)
    else:
        traj = split_evolve(u0, cfg.params, sched, cfg.scheme)
    return {"simulate.csv": trajectory_report(traj)}


def _converge(cfg: RunConfig, threads: int) -> Dict[str, StudyReport]:
    u0 = cfg.initial_field()
    if cfg.dt_list is not None:
        dt_list = list(cfg.dt_list)
    else:
        dt_list = dt_list_from_cfl(cfg.T, cfl_max_dt(cfg.params, cfg.grid, u0.max_abs()), cfg.cfl_fractions)
    logger.info("converge: dt_list = %s", ", ".join("%.6g" % dt for dt in dt_list))
    report = self_convergence_study(u0, cfg.params, cfg.T, dt_list, cfg.scheme, threads)
    return {"converge.csv": report}


def _metric_columns(traj: Trajectory, spec: ProfileSpec, p_list, prefix: str = "") \
        -> Tuple[np.ndarray, "OrderedDict[str, np.ndarray]"]:
    columns = OrderedDict()
    times = None
    for p in p_list:
        series = decay_metric_series(traj, spec, p)
        times = series.column("t")
        name = [n for n in series.columns if n != "t"][0]
        columns[prefix + name] = series.column(name)
    return times, columns


def _asymptote(cfg: RunConfig) -> Dict[str, StudyReport]:
    u0 = cfg.initial_field()
    record_at = log_spaced_steps(cfg.dt, cfg.t_first, cfg.T, cfg.n_samples)
    sched = SplitSchedule.from_horizon(cfg.T, cfg.dt, cfg.record_every, record_at)
    spec = ProfileSpec.for_params(cfg.params, u0.mass())
    logger.info("asymptote: M = %.6g, nu = %.6g, %d steps", spec.mass, spec.viscosity, sched.n_steps)

    traj = split_evolve(u0, cfg.params, sched, cfg.scheme)
    times, columns = _metric_columns(traj, spec, cfg.p_list)
    profile = OrderedDict([("x", cfg.grid.nodes()), ("u_split", traj.final().values)])
    if cfg.compare_reference:
        reference = reference_abe_evolve(u0, cfg.params, sched, cfg.scheme)
        _, reference_columns = _metric_columns(reference, spec, cfg.p_list, "reference_")
        columns.update(reference_columns)
        profile["u_reference"] = reference.final().values
    profile["u_M"] = self_similar_profile(spec, cfg.T, cfg.grid).values

    meta = Bunch(**traj.meta)
    meta.update(mass=spec.mass, viscosity=spec.viscosity)
    metrics = StudyReport(OrderedDict([("t", times)] + list(columns.items())), meta)
    return {"asymptote.csv": metrics, "asymptote_profile.csv": StudyReport(profile, Bunch(**meta))}


def _relative(value: Real, scale: Real) -> Real:
    return value / scale if scale > 0. else value


def _verify(cfg: RunConfig) -> Dict[str, StudyReport]:
    """Invariant suite on the configured data: conservation, monotonicity and oracle distances."""
    u0 = cfg.initial_field()
    params, scheme, dx = cfg.params, cfg.scheme, cfg.grid.dx
    mass_scale = max(abs(u0.mass()), discrete_lp_norm(u0, 1.))
    l2_scale = discrete_lp_norm(u0, 2.)
    checks = []  # (name, value, threshold)

    sched = SplitSchedule.from_horizon(cfg.T, cfg.dt, record_every=1)
    split = split_evolve(u0, params, sched, scheme)
    masses = np.array([f.mass() for f in split.fields()])
    checks.append(("mass_drift_split", _relative(float(np.max(np.abs(masses - masses[0]))), mass_scale),
                   MASS_DRIFT_MAX))
    l2 = np.array([discrete_lp_norm(f, 2.) for f in split.fields()])
    increase = float(np.max(np.diff(l2), initial=0.))
    checks.append(("l2_increase_split", max(0., _relative(increase, l2_scale)), L2_INCREASE_MAX))

    reference = reference_abe_evolve(u0, params, sched, scheme)
    masses = np.array([f.mass() for f in reference.fields()])
    checks.append(("mass_drift_reference", _relative(float(np.max(np.abs(masses - masses[0]))), mass_scale),
                   MASS_DRIFT_MAX))
    distance = discrete_lp_norm(split.final().with_values(split.final().values - reference.final().values), 2.)
    checks.append(("split_vs_reference", _relative(distance, l2_scale), SPLIT_REFERENCE_MAX))

    system = cn_system(u0.values, dx, cfg.dt, params.c_nu, scheme.literal_cn_denominator)
    banded = solve_tridiagonal(system, "banded")
    thomas = thomas_solve(system)
    checks.append(("thomas_vs_banded",
                   _relative(float(np.max(np.abs(thomas - banded))), float(np.max(np.abs(banded)))),
                   THOMAS_BANDED_MAX))

    step = cn_relaxation_substep(u0, params, cfg.dt, scheme.literal_cn_denominator, scheme.tridiagonal)
    exact = spectral_relaxation_exact(u0, params, cfg.dt, symbol="centered")
    checks.append(("cn_vs_spectral", _relative(discrete_lp_norm(step.with_values(step.values - exact.values), 2.),
                                               l2_scale), CN_SPECTRAL_MAX))

    j0 = cfg.grid.n_cells // 2
    spike = np.zeros(cfg.grid.n_cells)
    spike[j0] = 1.
    convolved = rectangle_convolution(params.kernel, Field(cfg.grid, spike)).values
    offsets = (np.arange(cfg.grid.n_cells) - j0) * dx
    closed_form = dx * kernel_eval(params.kernel, offsets)
    checks.append(("convolution_spike", float(np.max(np.abs(convolved - closed_form))), SPIKE_MAX))

    m0, m1, _ = kernel_moments(params.kernel)
    checks.append(("kernel_moments", max(abs(m0 - 1.), abs(m1 - 1.)), params.kernel.moment_tol))

    for name, value, threshold in checks:
        (logger.info if value <= threshold else logger.warning)(
            "verify: %-22s %.3e (threshold %.1e)", name, value, threshold)
    report = StudyReport(
        OrderedDict([("value", [c[1] for c in checks]),
                     ("threshold", [c[2] for c in checks]),
                     ("passed", [1. if c[1] <= c[2] else 0. for c in checks])]),
        Bunch(dt=cfg.dt, n_steps=sched.n_steps, scheme=split.meta.scheme),
        labels=[c[0] for c in checks])
    return {"verify.csv": report}


def run_experiment(cfg: RunConfig, out_dir=None, threads: int = 1) -> RunOutcome:
    """Runs the experiment named by cfg and writes its CSV files; solver errors propagate."""
    path = _output_dir(cfg, out_dir)
    start = default_timer()
    if cfg.experiment == "simulate":
        reports = _simulate(cfg)
    elif cfg.experiment == "converge":
        reports = _converge(cfg, threads)
    elif cfg.experiment == "asymptote":
        reports = _asymptote(cfg)
    elif cfg.experiment == "verify":
        reports = _verify(cfg)
    else:
        raise ValueError("unknown experiment: {0}".format(cfg.experiment))
    wall_time = default_timer() - start

    outcome = RunOutcome(status=0)
    for name, report in reports.items():
        report.wall_time = wall_time
        outcome.files.append(emit_csv(_stamp(report, cfg), path / name))
        outcome.reports[name] = report
    if "verify.csv" in reports and not np.all(reports["verify.csv"].column("passed") == 1.):
        outcome.status = 1
    logger.info("%s finished in %.2f s, wrote %s", cfg.experiment, wall_time,
                ", ".join(str(f) for f in outcome.files))
    return outcome
