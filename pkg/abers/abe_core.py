"""
Grids, fields, physical parameters, discrete norms and the relaxation kernel.

Conventions:
  - cell-centered uniform grid, node x_j = x_min + (j + 1/2) dx
  - fields are zero outside the grid (ghost values are 0)
  - the kernel indicator is open: K(0) = 0, so the rectangle rule is strictly one-sided
"""
import math
from dataclasses import dataclass, field
from typing import *

import numpy as np
import scipy.integrate
import scipy.signal
import xxhash

__all__ = [
    "Real", "Values", "Moments", "MOMENT_TOL_ANALYTIC", "MOMENT_TOL_TABULATED",
    "DomainError", "KernelValidationError", "StabilityError", "SingularSystemError", "DomainTooSmallError",
    "SolverAbortError", "GridSpec", "Field", "KernelSpec", "PhysicalParams",
    "discrete_lp_norm", "kernel_eval", "kernel_moments", "effective_viscosity", "cfl_number", "cfl_max_dt",
    "rectangle_weights", "discrete_kernel_mass", "rectangle_convolution",
]

"""
Some type synonyms in order to make the code easier to understand
"""
Real = float
Values = np.ndarray  # float64 array, one value per cell
Moments = Tuple[float, float, float]  # (m0, m1, m2)

MOMENT_TOL_ANALYTIC = 1e-10
MOMENT_TOL_TABULATED = 1e-6


class DomainError(ValueError):
    """An argument lies outside the domain of an operation (p < 1, t <= 0, bad grid...)."""


class KernelValidationError(ValueError):
    pass


class StabilityError(RuntimeError):
    """An explicit step was asked to run with a time step above its stability bound."""


class SingularSystemError(RuntimeError):
    pass


class DomainTooSmallError(RuntimeError):
    """The periodized spectral flow could not be trusted on this grid."""


class SolverAbortError(RuntimeError):
    """A run produced a non-finite value; `step` is the index of the failing step."""

    def __init__(self, message: str, step: int):
        super().__init__("{0} (step {1})".format(message, step))
        self.step = step


@dataclass(frozen=True)
class GridSpec:
    x_min: Real
    x_max: Real
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise DomainError("x_min={0} must be < x_max={1}".format(self.x_min, self.x_max))
        if int(self.n_cells) != self.n_cells or self.n_cells < 3:
            raise DomainError("n_cells must be an integer >= 3, got {0}".format(self.n_cells))
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @staticmethod
    def from_dx(x_min: Real, x_max: Real, dx: Real) -> "GridSpec":
        """Grid of the given cell width; (x_max - x_min) / dx must be (close to) an integer."""
        n = int(round((x_max - x_min) / dx))
        if n < 3 or not math.isclose(n * dx, x_max - x_min, rel_tol=1e-9):
            raise DomainError("dx={0} does not divide [{1}, {2}]".format(dx, x_min, x_max))
        return GridSpec(x_min, x_max, n)

    @property
    def dx(self) -> Real:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> Real:
        return self.x_max - self.x_min

    def nodes(self) -> Values:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True, eq=False)
class Field:
    """
    Cell values of the solution at one time level.
    `values` is copied and made read-only on construction.
    """
    grid: GridSpec
    values: Values

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_cells,):
            raise DomainError("expected {0} values, got shape {1}".format(self.grid.n_cells, values.shape))
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @staticmethod
    def zeros(grid: GridSpec) -> "Field":
        return Field(grid, np.zeros(grid.n_cells))

    @staticmethod
    def from_function(grid: GridSpec, func: Callable[[Values], Values]) -> "Field":
        return Field(grid, func(grid.nodes()))

    def with_values(self, values: Values) -> "Field":
        return Field(self.grid, values)

    def mass(self) -> Real:
        return self.grid.dx * float(np.sum(self.values))

    def max_abs(self) -> Real:
        return float(np.max(np.abs(self.values)))

    def digest(self) -> str:
        """xxhash of the raw bytes; equal digests <=> bitwise equal values on the same grid."""
        h = xxhash.xxh64()
        h.update(repr((self.grid.x_min, self.grid.x_max, self.grid.n_cells)).encode())
        h.update(self.values.tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """
    The memory kernel of the relaxation term.

    kind == "exponential": K(z) = exp(-z) for z > 0, else 0 (moments known in closed form).
    kind == "tabulated": linear interpolation of (z, values), zero outside the open interval (z[0], z[-1]).
    """
    kind: str = "exponential"
    z: Optional[Values] = None
    values: Optional[Values] = None
    moment_tol: Real = MOMENT_TOL_ANALYTIC

    def __post_init__(self):
        if self.kind == "exponential":
            return
        if self.kind != "tabulated":
            raise KernelValidationError("unknown kernel kind: {0}".format(self.kind))
        z = np.array(self.z, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if z.ndim != 1 or z.shape != values.shape or z.size < 2:
            raise KernelValidationError("tabulated kernel needs matching 1-D abscissae and values")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(values))):
            raise KernelValidationError("tabulated kernel is not integrable (non-finite samples)")
        if np.any(np.diff(z) <= 0.):
            raise KernelValidationError("kernel abscissae must be strictly increasing")
        if np.any(values < 0.):
            raise KernelValidationError("kernel values must be nonnegative")
        z.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "values", values)
        m0, m1, _ = kernel_moments(self)
        if abs(m0 - 1.) > self.moment_tol or abs(m1 - 1.) > self.moment_tol:
            raise KernelValidationError(
                "kernel needs unit mass and first moment, got m0={0:.3e}, m1={1:.3e}".format(m0, m1))

    @staticmethod
    def exponential() -> "KernelSpec":
        return KernelSpec()

    @staticmethod
    def tabulated(z, values, moment_tol: Real = MOMENT_TOL_TABULATED) -> "KernelSpec":
        return KernelSpec("tabulated", z, values, moment_tol)

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential"

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        if self.kind != other.kind:
            return False
        return self.is_exponential or (
            np.array_equal(self.z, other.z) and np.array_equal(self.values, other.values))

    def __hash__(self):
        if self.is_exponential:
            return hash(self.kind)
        return hash((self.kind, self.z.tobytes(), self.values.tobytes()))


@dataclass(frozen=True)
class PhysicalParams:
    gamma: Real
    c_nu: Real
    kernel: KernelSpec = field(default_factory=KernelSpec.exponential)

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.):
            raise DomainError("gamma must be > 0, got {0}".format(self.gamma))
        if not (math.isfinite(self.c_nu) and self.c_nu >= 0.):
            raise DomainError("c_nu must be >= 0, got {0}".format(self.c_nu))

    @staticmethod
    def numerical_section() -> "PhysicalParams":
        """Gamma = 100, c_nu = 0.02: the reference configuration of the experiments (with dx = 0.1)."""
        return PhysicalParams(gamma=100., c_nu=0.02)

    @staticmethod
    def normalized() -> "PhysicalParams":
        """Gamma = 1, c_nu = 1: u_t - (u^2/2)_x = u_xx + K*u - u + u_x."""
        return PhysicalParams(gamma=1., c_nu=1.)


def discrete_lp_norm(f: Field, p: Real) -> Real:
    """(dx * sum |f_j|^p)^(1/p); p = inf gives max |f_j|."""
    if math.isnan(p) or p < 1.:
        raise DomainError("p must be >= 1, got {0}".format(p))
    a = np.abs(f.values)
    if math.isinf(p):
        return float(np.max(a))
    if p == 1.:
        return f.grid.dx * float(np.sum(a))
    if p == 2.:
        return math.sqrt(f.grid.dx * float(np.dot(a, a)))
    return (f.grid.dx * float(np.sum(a ** p))) ** (1. / p)


def kernel_eval(k: KernelSpec, z):
    """K(z) for a scalar or an array of abscissae."""
    z_arr = np.asarray(z, dtype=np.float64)
    if k.is_exponential:
        with np.errstate(over="ignore"):
            result = np.where(z_arr > 0., np.exp(-np.maximum(z_arr, 0.)), 0.)
    else:
        inside = (z_arr > k.z[0]) & (z_arr < k.z[-1])
        result = np.where(inside, np.interp(z_arr, k.z, k.values), 0.)
    if np.ndim(z) == 0:
        return float(result)
    return result


def kernel_moments(k: KernelSpec) -> Moments:
    """(int K, int z K, int z^2 K): closed form for the exponential kernel, trapezoid rule otherwise."""
    if k.is_exponential:
        return 1., 1., 2.
    m = [float(scipy.integrate.trapezoid(k.values * k.z ** power, k.z)) for power in range(3)]
    if not all(math.isfinite(v) for v in m) or m[0] <= 0.:
        raise KernelValidationError("kernel is not integrable with finite second moment")
    return m[0], m[1], m[2]


def effective_viscosity(params: PhysicalParams) -> Real:
    """Large-time diffusion coefficient 1/Gamma + c_nu * m2 / 2 (= 1/Gamma + c_nu for exp(-z))."""
    _, _, m2 = kernel_moments(params.kernel)
    return 1. / params.gamma + params.c_nu * m2 / 2.


def cfl_number(params: PhysicalParams, grid: GridSpec, u_max: Real, dt: Real) -> Real:
    """Left-hand side of the stability condition: u_max^2 dt/dx + (2/Gamma) dt/dx^2."""
    dx = grid.dx
    return u_max ** 2 * dt / dx + 2. / params.gamma * dt / dx ** 2


def cfl_max_dt(params: PhysicalParams, grid: GridSpec, u0_max: Real) -> Real:
    """Largest dt with cfl_number(...) == 1."""
    dx = grid.dx
    return 1. / (u0_max ** 2 / dx + 2. / (params.gamma * dx ** 2))


def rectangle_weights(k: KernelSpec, dx: Real) -> Tuple[int, Values]:
    """
    Rectangle-rule weights w_m = dx * K(m dx) of the discrete convolution
    (K*f)_j = sum_m w_m f_{j-m}.
    :return: (m_first, weights) with weights[q] belonging to m = m_first + q
    """
    if k.is_exponential:
        raise DomainError("the exponential kernel has infinite support; use rectangle_convolution")
    m_first = int(math.ceil(k.z[0] / dx))
    m_last = int(math.floor(k.z[-1] / dx))
    m = np.arange(m_first, m_last + 1)
    return m_first, dx * kernel_eval(k, m * dx)


def discrete_kernel_mass(k: KernelSpec, dx: Real) -> Real:
    """Sum of the rectangle weights; tends to m0 = 1 at first order in dx."""
    if k.is_exponential:
        a = math.exp(-dx)
        return dx * a / (1. - a)
    return float(np.sum(rectangle_weights(k, dx)[1]))


def _rectangle_convolution_values(k: KernelSpec, values: Values, dx: Real) -> Values:
    if k.is_exponential:
        # y_j = a y_{j-1} + dx a f_{j-1} with a = exp(-dx): the one-sided sum as an IIR filter
        a = math.exp(-dx)
        return scipy.signal.lfilter([0., dx * a], [1., -a], values)
    m_first, weights = rectangle_weights(k, dx)
    n = values.size
    out = np.zeros(n)
    if weights.size == 0:
        return out
    full = np.convolve(values, weights)
    idx = np.arange(n) - m_first
    valid = (idx >= 0) & (idx < full.size)
    out[valid] = full[idx[valid]]
    return out


def rectangle_convolution(k: KernelSpec, f: Field) -> Field:
    """(K*f)_j = dx * sum_{k: x_j - x_k > 0} K(x_j - x_k) f_k, with f = 0 outside the grid."""
    return f.with_values(_rectangle_convolution_values(k, f.values, f.grid.dx))
