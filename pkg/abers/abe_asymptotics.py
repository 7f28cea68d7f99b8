"""
Large-time behavior: the source-type solution u_M of the viscous Burgers equation
    u_t = (u^2/2)_x + nu u_xx,   u(0) = M delta_0
the scaled distances t^{(1-1/p)/2} ||u(t) - u_M(t)||_p, the decay envelope of ||u(t)||_p,
and the parabolic rescaling u^lambda(t, x) = lambda u(lambda^2 t, lambda x).
"""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import *

import numpy as np
import scipy.special

from .abe_core import Field, GridSpec, PhysicalParams, Real, Values, DomainError, \
    discrete_lp_norm, effective_viscosity
from .abe_report import StudyReport
from .abe_splitting import Trajectory
from .static_vars import Bunch

logger = logging.getLogger(__name__)

ENVELOPE_TRANSIENT = 0.25  # share of the samples (by count) considered as transient
ENVELOPE_GROWTH = 1.05


@dataclass(frozen=True)
class ProfileSpec:
    mass: Real
    viscosity: Real

    def __post_init__(self):
        if not math.isfinite(self.mass):
            raise DomainError("mass must be finite, got {0}".format(self.mass))
        if not (math.isfinite(self.viscosity) and self.viscosity > 0.):
            raise DomainError("viscosity must be > 0, got {0}".format(self.viscosity))

    @staticmethod
    def for_params(params: PhysicalParams, mass: Real) -> "ProfileSpec":
        """nu = 1/Gamma + c_nu m2/2 (= 1/Gamma + c_nu for the exponential kernel)."""
        return ProfileSpec(mass, effective_viscosity(params))

    @staticmethod
    def normalized(mass: Real) -> "ProfileSpec":
        """nu = 1 + m2/2 = 2: the limit of the normalized equation with the exponential kernel."""
        return ProfileSpec(mass, 2.)

    def with_viscosity(self, viscosity: Real) -> "ProfileSpec":
        return ProfileSpec(self.mass, viscosity)


def scaling_exponent(p: Real) -> Real:
    """(1/2)(1 - 1/p); 1/2 for p = inf."""
    if math.isnan(p) or p < 1.:
        raise DomainError("p must be >= 1, got {0}".format(p))
    return 0.5 if math.isinf(p) else 0.5 * (1. - 1. / p)


def profile_values(spec: ProfileSpec, t: Real, x) -> Values:
    """
    Hopf-Cole closed form, with R = M / (2 nu) and xi = x / sqrt(4 nu t):
        u_M(t, x) = sqrt(nu / (pi t)) / (exp(xi^2) / expm1(R) + erfcx(-xi) / 2)
    The mass travels towards negative x (u_t - u u_x = ... for u > 0).
    exp(xi^2) / expm1(R) is evaluated as sign(R) exp(xi^2 - log|expm1(R)|), so that large M / nu
    only overflows in the far field.
    """
    if not (t > 0. and math.isfinite(t)):
        raise DomainError("t must be > 0, got {0}".format(t))
    x = np.asarray(x, dtype=np.float64)
    if spec.mass == 0.:
        return np.zeros(x.shape)
    nu = spec.viscosity
    r = spec.mass / (2. * nu)
    log_scale = r + math.log(-math.expm1(-r)) if r > 0. else math.log(-math.expm1(r))
    xi = x / math.sqrt(4. * nu * t)
    with np.errstate(over="ignore", invalid="ignore"):
        denominator = math.copysign(1., r) * np.exp(xi ** 2 - log_scale) + 0.5 * scipy.special.erfcx(-xi)
        values = math.sqrt(nu / (math.pi * t)) / denominator
    # overflowing denominators (inf, or inf - inf when M < 0) are the far field, where u_M underflows to 0
    return np.where(np.isfinite(denominator), values, 0.)


def self_similar_profile(spec: ProfileSpec, t: Real, grid: GridSpec) -> Field:
    return Field(grid, profile_values(spec, t, grid.nodes()))


def _metric_name(p: Real) -> str:
    return "scaled_Linf" if math.isinf(p) else "scaled_L{0:g}".format(p)


def decay_metric_series(traj: Trajectory, spec: ProfileSpec, p: Real) -> StudyReport:
    """t^{(1-1/p)/2} ||u(t) - u_M(t)||_p for every snapshot with t > 0."""
    exponent = scaling_exponent(p)
    times, values = [], []
    for t, u in traj.snapshots:
        if t <= 0.:
            logger.info("decay_metric_series: snapshot at t=%g skipped (u_M is a measure there)", t)
            continue
        difference = u.with_values(u.values - profile_values(spec, t, u.grid.nodes()))
        times.append(t)
        values.append(t ** exponent * discrete_lp_norm(difference, p))
    meta = Bunch(p=float(p), mass=float(spec.mass), viscosity=float(spec.viscosity))
    return StudyReport(OrderedDict([("t", times), (_metric_name(p), values)]), meta)


def rescale_field(f: Field, lam: Real) -> Field:
    """u^lambda: values lambda f_j on the grid x_j / lambda (no interpolation)."""
    if not (lam > 0. and math.isfinite(lam)):
        raise DomainError("lambda must be > 0, got {0}".format(lam))
    grid = GridSpec(f.grid.x_min / lam, f.grid.x_max / lam, f.grid.n_cells)
    return Field(grid, lam * f.values)


def rescale_snapshot(t: Real, f: Field, lam: Real) -> Tuple[Real, Field]:
    """(t, u(t)) -> (t / lambda^2, u^lambda(t / lambda^2))."""
    return t / lam ** 2, rescale_field(f, lam)


def decay_envelope_check(traj: Trajectory, p: Real, transient: Real = ENVELOPE_TRANSIENT) -> StudyReport:
    """
    ||u(t)||_p (t + 1)^{(1-1/p)/2} and its running maximum.
    The constant C is fitted as the running maximum at the end of the transient; the run
    violates the envelope when the final running maximum exceeds ENVELOPE_GROWTH * C.
    """
    if not traj.snapshots:
        raise DomainError("empty trajectory")
    exponent = scaling_exponent(p)
    times = traj.times()
    envelope = np.array([discrete_lp_norm(u, p) for u in traj.fields()]) * (times + 1.) ** exponent
    running_max = np.maximum.accumulate(envelope)
    n_transient = max(1, int(math.ceil(transient * len(envelope))))
    fitted_c = float(running_max[n_transient - 1])
    violation = bool(running_max[-1] > ENVELOPE_GROWTH * fitted_c)
    if violation:
        logger.warning("decay envelope violated for p=%g: max %.6e > %.2f * %.6e",
                       p, running_max[-1], ENVELOPE_GROWTH, fitted_c)
    meta = Bunch(p=float(p), fitted_c=fitted_c, violation=violation)
    return StudyReport(OrderedDict([("t", times), ("envelope", envelope), ("running_max", running_max)]), meta)
