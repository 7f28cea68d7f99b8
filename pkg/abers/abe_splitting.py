"""
Lie-Trotter driver Z^{n dt} u0 = (X^dt Y^dt)^n u0, the explicit reference solver
(rectangle-rule convolution) and the self-convergence study.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import *

import numpy as np
import xxhash

from .abe_core import Field, GridSpec, PhysicalParams, Real, Values, DomainError, StabilityError, \
    SolverAbortError, cfl_number, cfl_max_dt, discrete_kernel_mass, discrete_lp_norm, \
    _rectangle_convolution_values
from .abe_substeps import eo_flux, _burgers_step_values, _cn_step_values, _warn_boundary, CFL_SLACK
from .abe_report import StudyReport, finite_or_flag
from .static_vars import Bunch

logger = logging.getLogger(__name__)

LOG_PROGRESS_EVERY = 0  # log a progress line every N steps (0: never)

SPLIT_SCHEME = "lie-trotter eo+cn"
REFERENCE_SCHEME = "explicit eo+rectangle"


@dataclass(frozen=True)
class SchemeOptions:
    literal_cn_denominator: bool = False
    tridiagonal: str = "banded"  # or "thomas"
    mass_consistent_reference: bool = True
    enforce_cfl: bool = True


@dataclass(frozen=True)
class SplitSchedule:
    """
    dt, number of steps and which steps are stored.
    Step 0 and the last step are always stored; so are multiples of record_every and
    every index in record_at.
    """
    dt: Real
    n_steps: int
    record_every: int = 1
    record_at: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if not (0. < self.dt < 1.):
            raise DomainError("dt must lie in (0, 1), got {0}".format(self.dt))
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise DomainError("n_steps must be a nonnegative integer, got {0}".format(self.n_steps))
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise DomainError("record_every must be a positive integer, got {0}".format(self.record_every))
        object.__setattr__(self, "record_at", frozenset(int(n) for n in self.record_at))

    @staticmethod
    def from_horizon(T: Real, dt: Real, record_every: int = None, record_at: Iterable[int] = ()) \
            -> "SplitSchedule":
        """n_steps = T/dt (must be an integer up to 1e-6); dt is then snapped to T/n_steps."""
        if T < 0.:
            raise DomainError("T must be >= 0, got {0}".format(T))
        if not dt > 0.:
            raise DomainError("dt must be > 0, got {0}".format(dt))
        ratio = T / dt
        n = int(round(ratio))
        if abs(ratio - n) > 1e-6:
            raise DomainError("T={0} is not an integer multiple of dt={1}".format(T, dt))
        if n > 0:
            dt = T / n
        if record_every is None:
            record_every = max(n, 1)
        return SplitSchedule(dt, n, record_every, frozenset(record_at))

    @property
    def horizon(self) -> Real:
        return self.n_steps * self.dt

    def time(self, n: int) -> Real:
        return n * self.dt

    def is_recorded(self, n: int) -> bool:
        return n == 0 or n == self.n_steps or n % self.record_every == 0 or n in self.record_at


def log_spaced_steps(dt: Real, t_first: Real, T: Real, n_samples: int) -> FrozenSet[int]:
    """Step indices closest to n_samples logarithmically spaced times in [t_first, T]."""
    if not 0. < t_first <= T:
        raise DomainError("need 0 < t_first <= T, got t_first={0}, T={1}".format(t_first, T))
    times = np.geomspace(t_first, T, n_samples)
    return frozenset(int(round(t / dt)) for t in times)


@dataclass
class Trajectory:
    """Ordered (time, Field) snapshots plus run metadata."""
    snapshots: List[Tuple[Real, Field]]
    meta: Bunch = field(default_factory=Bunch)
    half_steps: List[Tuple[Real, Field]] = field(default_factory=list)

    def __post_init__(self):
        times = [t for t, _ in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("snapshot times must be strictly increasing")
        if self.snapshots:
            grid = self.snapshots[0][1].grid
            if any(f.grid != grid for _, f in self.snapshots + self.half_steps):
                raise DomainError("all snapshots must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.snapshots[0][1].grid

    def times(self) -> Values:
        return np.array([t for t, _ in self.snapshots])

    def fields(self) -> List[Field]:
        return [f for _, f in self.snapshots]

    def initial(self) -> Field:
        return self.snapshots[0][1]

    def final(self) -> Field:
        return self.snapshots[-1][1]

    def at(self, t: Real, tol: Real = 1e-9) -> Field:
        for time, f in self.snapshots:
            if abs(time - t) <= tol * max(1., abs(t)):
                return f
        raise KeyError("no snapshot at t={0}".format(t))

    def interpolant_at(self, t: Real, tol: Real = 1e-9) -> Field:
        """u^Delta(t) at a stored time t_n or t_{n+1/2}."""
        for time, f in self.half_steps + self.snapshots:
            if abs(time - t) <= tol * max(1., abs(t)):
                return f
        raise KeyError("u^Delta is not stored at t={0}".format(t))

    def fingerprint(self) -> str:
        h = xxhash.xxh64()
        for t, f in self.snapshots:
            h.update(repr(t).encode())
            h.update(f.values.tobytes())
        return h.hexdigest()


def _run_meta(scheme: str, params: PhysicalParams, sched: SplitSchedule, options: SchemeOptions) -> Bunch:
    return Bunch(
        scheme=scheme,
        gamma=params.gamma,
        c_nu=params.c_nu,
        kernel=params.kernel.kind,
        dt=sched.dt,
        n_steps=sched.n_steps,
        literal_cn_denominator=options.literal_cn_denominator,
        tridiagonal=options.tridiagonal,
        mass_consistent_reference=options.mass_consistent_reference,
        transport_difference="centered")


def _check_finite(values: Values, step: int, where: str):
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise SolverAbortError("non-finite value in cell {0} after the {1}".format(bad, where), step)


def _log_progress(scheme: str, n: int, sched: SplitSchedule):
    if LOG_PROGRESS_EVERY and (n % LOG_PROGRESS_EVERY == 0 or n == sched.n_steps):
        logger.info("%s: step %d / %d (t = %.6g)", scheme, n, sched.n_steps, sched.time(n))


def split_evolve(u0: Field, params: PhysicalParams, sched: SplitSchedule,
                 options: SchemeOptions = SchemeOptions(), keep_half_steps: bool = False) -> Trajectory:
    """
    Snapshot at t_n = (cn_relaxation_substep o burgers_substep)^n u0.
    keep_half_steps also stores Y^dt Z^{n dt} u0 at t_{n+1/2}.
    """
    if not params.kernel.is_exponential:
        raise DomainError("split_evolve needs the exponential kernel (local Crank-Nicolson form)")
    grid, dx, dt = u0.grid, u0.grid.dx, sched.dt
    if options.enforce_cfl and cfl_number(params, grid, u0.max_abs(), dt) > 1. + CFL_SLACK:
        raise StabilityError("dt={0} exceeds the stability bound {1:.6g} for max|u0|={2:.6g}".format(
            dt, cfl_max_dt(params, grid, u0.max_abs()), u0.max_abs()))
    snapshots = [(0., u0)]
    half_steps = []
    u = u0.values
    boundary_warned = False  # one warning per run
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(sched.n_steps):
            if not boundary_warned:
                boundary_warned = _warn_boundary(u, "split_evolve (step {0})".format(n + 1))
            half = _burgers_step_values(u, dx, dt, params.gamma)
            _check_finite(half, n + 1, "Burgers substep")
            if keep_half_steps:
                half_steps.append(((n + 0.5) * dt, Field(grid, half)))
            u = _cn_step_values(half, dx, dt, params.c_nu, options.literal_cn_denominator, options.tridiagonal)
            _check_finite(u, n + 1, "relaxation substep")
            if sched.is_recorded(n + 1):
                snapshots.append((sched.time(n + 1), Field(grid, u)))
            _log_progress(SPLIT_SCHEME, n + 1, sched)
    return Trajectory(snapshots, _run_meta(SPLIT_SCHEME, params, sched, options), half_steps)


def _reference_step_values(u: Values, dx: Real, dt: Real, params: PhysicalParams, self_weight: Real) -> Values:
    padded = np.zeros(u.size + 2)
    padded[1:-1] = u
    g = eo_flux(padded[:-1], padded[1:])
    convolution = _rectangle_convolution_values(params.kernel, u, dx)
    relaxation = convolution - self_weight * u + (padded[2:] - padded[:-2]) / (2. * dx)
    return (u - dt / dx * (g[1:] - g[:-1])
            + dt / (params.gamma * dx ** 2) * (padded[:-2] - 2. * u + padded[2:])
            + params.c_nu * dt * relaxation)


def reference_abe_evolve(u0: Field, params: PhysicalParams, sched: SplitSchedule,
                         options: SchemeOptions = SchemeOptions()) -> Trajectory:
    """
    Fully explicit scheme for the whole equation:
      u^{n+1}_j = u_j - dt/dx (flux difference) + dt/(Gamma dx^2) d2u
                  + c_nu dt [(K*u)_j - w u_j + (u_{j+1} - u_{j-1}) / (2 dx)]
    with the rectangle-rule convolution. w is the discrete kernel mass (mass consistent)
    or 1 (mass_consistent_reference=False).
    """
    grid, dx, dt = u0.grid, u0.grid.dx, sched.dt
    if options.enforce_cfl:
        if cfl_number(params, grid, u0.max_abs(), dt) > 1. + CFL_SLACK:
            raise StabilityError("dt={0} exceeds the stability bound {1:.6g}".format(
                dt, cfl_max_dt(params, grid, u0.max_abs())))
        if params.c_nu * dt > 1.:
            raise StabilityError("c_nu * dt = {0} > 1 for the explicit relaxation term".format(params.c_nu * dt))
    self_weight = discrete_kernel_mass(params.kernel, dx) if options.mass_consistent_reference else 1.
    snapshots = [(0., u0)]
    u = u0.values
    boundary_warned = False
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(sched.n_steps):
            if not boundary_warned:
                boundary_warned = _warn_boundary(u, "reference_abe_evolve (step {0})".format(n + 1))
            u = _reference_step_values(u, dx, dt, params, self_weight)
            _check_finite(u, n + 1, "explicit step")
            if sched.is_recorded(n + 1):
                snapshots.append((sched.time(n + 1), Field(grid, u)))
            _log_progress(REFERENCE_SCHEME, n + 1, sched)
    meta = _run_meta(REFERENCE_SCHEME, params, sched, options)
    meta.self_weight = self_weight
    return Trajectory(snapshots, meta)


def least_squares_slope(dts: Sequence[Real], errors: Sequence[Real]) -> Optional[Real]:
    """Slope of log(error) against log(dt); None when undefined (fewer than 2 points, or a zero error)."""
    dts = np.asarray(dts, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if dts.size < 2 or np.any(errors <= 0.) or not np.all(np.isfinite(errors)):
        return None
    slope, _ = np.polyfit(np.log(dts), np.log(errors), 1)
    return float(slope)


def local_orders(dts: Sequence[Real], errors: Sequence[Real]) -> List[Optional[Real]]:
    """Order between consecutive rows: log(e_k / e_{k+1}) / log(dt_k / dt_{k+1})."""
    result = []
    for k in range(len(dts) - 1):
        if errors[k] > 0. and errors[k + 1] > 0.:
            result.append(math.log(errors[k] / errors[k + 1]) / math.log(dts[k] / dts[k + 1]))
        else:
            result.append(None)
    return result


def self_convergence_study(u0: Field, params: PhysicalParams, T: Real, dt_list: Sequence[Real],
                           options: SchemeOptions = SchemeOptions(), threads: int = 1,
                           error_of: Callable[[Real], Real] = None) -> StudyReport:
    """
    e(dt) = || u_dt(T) - u_{dt/2}(T) ||_2 for every dt, plus the least-squares slope of log e vs log dt.
    error_of replaces the pair of runs (test seam).
    """
    dt_list = [float(dt) for dt in dt_list]
    if any(b >= a for a, b in zip(dt_list, dt_list[1:])):
        raise DomainError("dt_list must be strictly decreasing")

    def final_state(dt: Real) -> Field:
        return split_evolve(u0, params, SplitSchedule.from_horizon(T, dt), options).final()

    def pair_error(dt: Real) -> Real:
        coarse = final_state(dt)
        fine = final_state(dt / 2.)
        return discrete_lp_norm(coarse.with_values(coarse.values - fine.values), 2.)

    error_fn = error_of if error_of is not None else pair_error
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(error_fn, dt_list))
    else:
        errors = [error_fn(dt) for dt in dt_list]

    slope = least_squares_slope(dt_list, errors)
    orders = [finite_or_flag(o) for o in local_orders(dt_list, errors)] + [finite_or_flag(slope)]
    meta = Bunch(scheme=SPLIT_SCHEME, T=float(T), slope_defined=slope is not None,
                 slope=finite_or_flag(slope), norm="L2")
    for dt, e in zip(dt_list, errors):
        logger.info("self-convergence: dt=%.6g error=%.6e", dt, e)
    return StudyReport(OrderedDict([("dt", dt_list), ("error", errors), ("observed_order", orders)]), meta)
