"""
The two split flows of one time step.

Y^dt (burgers_substep): Engquist-Osher flux + centered diffusion, explicit.
X^dt (cn_relaxation_substep): Crank-Nicolson on v_t + v_tx = c_nu v_xx, one tridiagonal solve.

Both use zero ghost values outside the grid. spectral_relaxation_exact is the
Fourier oracle for X^t; it is not used by the solvers.
"""
import logging
import math
from dataclasses import dataclass
from typing import *

import numpy as np
import scipy.integrate
import scipy.linalg

from .abe_core import Field, PhysicalParams, KernelSpec, Real, Values, \
    DomainError, StabilityError, SingularSystemError, DomainTooSmallError, cfl_number
from .static_vars import static_vars

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-14
BOUNDARY_TOLERANCE = 1e-10
IMAGINARY_RESIDUE_TOLERANCE = 1e-12
CFL_SLACK = 1e-12
STATIC_CACHE_SIZE = 8  # entries kept by the band-matrix and wavenumber caches before they are cleared


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """
    lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
    lower and upper have n - 1 entries.
    """
    lower: Values
    diag: Values
    upper: Values
    rhs: Values

    def __post_init__(self):
        for name in ("lower", "diag", "upper", "rhs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        n = self.diag.size
        if n < 1 or self.rhs.shape != (n,) or self.lower.shape != (n - 1,) or self.upper.shape != (n - 1,):
            raise DomainError("inconsistent band lengths: lower={0}, diag={1}, upper={2}, rhs={3}".format(
                self.lower.shape, self.diag.shape, self.upper.shape, self.rhs.shape))

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.upper, 1) + np.diag(self.lower, -1)

    def banded(self) -> np.ndarray:
        """Matrix in the (1, 1) band storage of scipy.linalg.solve_banded."""
        ab = np.zeros((3, self.size))
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        return ab


@dataclass(frozen=True, eq=False)
class RelaxationSymbol:
    """Fourier multiplier of the relaxation flow over a duration t, sampled at frequencies xi."""
    xi: Values
    value: np.ndarray  # complex

    @staticmethod
    def evaluate(xi, params: PhysicalParams, t: Real, symbol: str = "continuous", dx: Real = None) \
            -> "RelaxationSymbol":
        """
        symbol="continuous": exp(c_nu t (K^(xi) - 1 + i xi)), = exp(-c_nu t xi^2 / (1 + i xi)) for exp(-z)
        symbol="centered": the same flow for the centered-difference operator on a grid of width dx
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        if symbol == "continuous":
            exponent = params.c_nu * t * (kernel_fourier(params.kernel, xi) - 1. + 1j * xi)
        elif symbol == "centered":
            if not params.kernel.is_exponential:
                raise DomainError("the centered symbol exists only for the exponential kernel")
            if dx is None:
                raise DomainError("the centered symbol needs dx")
            second = -4. * np.sin(xi * dx / 2.) ** 2 / dx ** 2
            first = 1j * np.sin(xi * dx) / dx
            exponent = params.c_nu * t * second / (1. + first)
        else:
            raise DomainError("unknown symbol: {0}".format(symbol))
        return RelaxationSymbol(xi, np.exp(exponent))


def kernel_fourier(k: KernelSpec, xi: Values) -> np.ndarray:
    """K^(xi) = int K(z) exp(-i xi z) dz."""
    if k.is_exponential:
        return 1. / (1. + 1j * xi)
    result = np.empty(xi.shape, dtype=np.complex128)
    chunk = 256
    for start in range(0, xi.size, chunk):
        phase = np.exp(-1j * np.outer(xi[start:start + chunk], k.z))
        result[start:start + chunk] = scipy.integrate.trapezoid(phase * k.values, k.z, axis=1)
    return result


def eo_flux(a, b):
    """Engquist-Osher flux for f(u) = -u^2/2: g(a, b) = -a(a - |a|)/4 - b(b + |b|)/4."""
    return -a * (a - np.abs(a)) / 4. - b * (b + np.abs(b)) / 4.


def _warn_boundary(values: Values, where: str) -> bool:
    """Logs a warning and returns True when an edge value exceeds BOUNDARY_TOLERANCE * max|u|."""
    scale = np.max(np.abs(values))
    edge = max(abs(values[0]), abs(values[-1]))
    if edge > BOUNDARY_TOLERANCE * scale:
        logger.warning("%s: boundary value %.3e is not negligible (max %.3e); enlarge the domain",
                       where, edge, scale)
        return True
    return False


def _burgers_step_values(u: Values, dx: Real, dt: Real, gamma: Real) -> Values:
    padded = np.zeros(u.size + 2)
    padded[1:-1] = u
    g = eo_flux(padded[:-1], padded[1:])  # g[j] = g(u_{j-1}, u_j)
    return u - dt / dx * (g[1:] - g[:-1]) + dt / (gamma * dx ** 2) * (padded[:-2] - 2. * u + padded[2:])


def check_burgers_cfl(params: PhysicalParams, u: Field, dt: Real):
    number = cfl_number(params, u.grid, u.max_abs(), dt)
    if number > 1. + CFL_SLACK:
        raise StabilityError("dt={0} violates the stability condition (cfl number {1:.6f} > 1)".format(dt, number))


def burgers_substep(u: Field, params: PhysicalParams, dt: Real) -> Field:
    """
    u^{n+1/2}_j = u_j - dt/dx (g(u_j, u_{j+1}) - g(u_{j-1}, u_j)) + dt/(Gamma dx^2) (u_{j-1} - 2u_j + u_{j+1})
    """
    if not dt > 0.:
        raise DomainError("dt must be > 0, got {0}".format(dt))
    check_burgers_cfl(params, u, dt)
    _warn_boundary(u.values, "burgers_substep")
    return u.with_values(_burgers_step_values(u.values, u.grid.dx, dt, params.gamma))


def thomas_solve(sys: TridiagonalSystem) -> Values:
    """Thomas algorithm (Gaussian elimination without pivoting on the three bands)."""
    n = sys.size
    c = np.zeros(n)
    d = np.zeros(n)
    pivot = sys.diag[0]
    if abs(pivot) <= PIVOT_TOLERANCE:
        raise SingularSystemError("zero pivot at row 0")
    if n > 1:
        c[0] = sys.upper[0] / pivot
    d[0] = sys.rhs[0] / pivot
    for i in range(1, n):
        pivot = sys.diag[i] - sys.lower[i - 1] * c[i - 1]
        if abs(pivot) <= PIVOT_TOLERANCE:
            raise SingularSystemError("zero pivot at row {0}".format(i))
        if i < n - 1:
            c[i] = sys.upper[i] / pivot
        d[i] = (sys.rhs[i] - sys.lower[i - 1] * d[i - 1]) / pivot
    x = np.zeros(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def solve_tridiagonal(sys: TridiagonalSystem, method: str = "banded") -> Values:
    """
    method="thomas": thomas_solve
    method="banded": LAPACK banded solver (partial pivoting), via scipy.linalg.solve_banded
    """
    if method == "thomas":
        return thomas_solve(sys)
    if method != "banded":
        raise DomainError("unknown tridiagonal method: {0}".format(method))
    try:
        return scipy.linalg.solve_banded((1, 1), sys.banded(), sys.rhs, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(str(e))


def cn_coefficients(dx: Real, dt: Real, c_nu: Real, literal_denominator: bool = False) -> Tuple[Real, Real]:
    """
    (s, r): s multiplies the centered x-difference of the time increment, r = c_nu dt / (2 dx^2).
    s = 1/(2 dx) for a centered first difference, s = 1/dx with literal_denominator.
    """
    s = 1. / dx if literal_denominator else 1. / (2. * dx)
    r = c_nu * dt / (2. * dx ** 2)
    return s, r


def _store(cache: dict, key, value):
    if len(cache) >= STATIC_CACHE_SIZE:
        cache.clear()
    cache[key] = value


@static_vars(cache=dict())
def _cn_banded_matrix(n: int, dx: Real, dt: Real, c_nu: Real, literal_denominator: bool) -> np.ndarray:
    statics = _cn_banded_matrix.statics
    key = (n, dx, dt, c_nu, literal_denominator)
    ab = statics.cache.get(key)
    if ab is None:
        s, r = cn_coefficients(dx, dt, c_nu, literal_denominator)
        ab = np.zeros((3, n))
        ab[0, 1:] = s - r
        ab[1, :] = 1. + 2. * r
        ab[2, :-1] = -s - r
        ab.setflags(write=False)
        _store(statics.cache, key, ab)
    return ab


def cn_system(u: Values, dx: Real, dt: Real, c_nu: Real, literal_denominator: bool = False) -> TridiagonalSystem:
    """
    The Crank-Nicolson system for u^{n+1} given u^{n+1/2} = u:
      (-s - r) x_{j-1} + (1 + 2r) x_j + (s - r) x_{j+1} = u_j + s (u_{j+1} - u_{j-1}) + r (u_{j-1} - 2u_j + u_{j+1})
    """
    n = u.size
    s, r = cn_coefficients(dx, dt, c_nu, literal_denominator)
    padded = np.zeros(n + 2)
    padded[1:-1] = u
    rhs = u + s * (padded[2:] - padded[:-2]) + r * (padded[:-2] - 2. * u + padded[2:])
    return TridiagonalSystem(
        lower=np.full(n - 1, -s - r),
        diag=np.full(n, 1. + 2. * r),
        upper=np.full(n - 1, s - r),
        rhs=rhs)


def _cn_step_values(u: Values, dx: Real, dt: Real, c_nu: Real,
                    literal_denominator: bool = False, method: str = "banded") -> Values:
    if method == "banded":
        s, r = cn_coefficients(dx, dt, c_nu, literal_denominator)
        padded = np.zeros(u.size + 2)
        padded[1:-1] = u
        rhs = u + s * (padded[2:] - padded[:-2]) + r * (padded[:-2] - 2. * u + padded[2:])
        ab = _cn_banded_matrix(u.size, dx, dt, c_nu, literal_denominator)
        try:
            return scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
        except np.linalg.LinAlgError as e:
            raise SingularSystemError(str(e))
    return solve_tridiagonal(cn_system(u, dx, dt, c_nu, literal_denominator), method)


def cn_relaxation_substep(u: Field, params: PhysicalParams, dt: Real,
                          literal_denominator: bool = False, method: str = "banded") -> Field:
    """
    Crank-Nicolson step of v_t + v_tx = c_nu v_xx (the relaxation flow of the exponential kernel).
    literal_denominator=True divides the centered difference of the increment by dx instead of 2 dx.
    """
    if not params.kernel.is_exponential:
        raise DomainError("the local Crank-Nicolson form exists only for the exponential kernel")
    if not dt > 0.:
        raise DomainError("dt must be > 0, got {0}".format(dt))
    _warn_boundary(u.values, "cn_relaxation_substep")
    return u.with_values(_cn_step_values(u.values, u.grid.dx, dt, params.c_nu, literal_denominator, method))


@static_vars(cache=dict())
def _wavenumbers(n: int, dx: Real) -> Values:
    statics = _wavenumbers.statics
    key = (n, dx)
    xi = statics.cache.get(key)
    if xi is None:
        xi = 2. * math.pi * np.fft.fftfreq(n, d=dx)
        xi.setflags(write=False)
        _store(statics.cache, key, xi)
    return xi


def spectral_relaxation_exact(u: Field, params: PhysicalParams, t: Real, symbol: str = "continuous") -> Field:
    """
    X^t u by discrete Fourier transform on the periodized grid.
    symbol="centered" gives the exact-in-time flow of the centered-difference operator instead.
    """
    if t < 0.:
        raise DomainError("t must be >= 0, got {0}".format(t))
    if t == 0.:
        return u
    n, dx = u.grid.n_cells, u.grid.dx
    multiplier = RelaxationSymbol.evaluate(_wavenumbers(n, dx), params, t, symbol, dx).value
    if n % 2 == 0:
        # +/- Nyquist share one mode: keep the Hermitian part of the symbol
        multiplier[n // 2] = multiplier[n // 2].real
    result = np.fft.ifft(np.fft.fft(u.values) * multiplier)
    scale = max(u.max_abs(), np.finfo(np.float64).tiny)
    residue = float(np.max(np.abs(result.imag))) / scale
    if residue > IMAGINARY_RESIDUE_TOLERANCE:
        raise DomainTooSmallError("imaginary residue {0:.3e} of the spectral flow".format(residue))
    _warn_boundary(result.real, "spectral_relaxation_exact")
    return u.with_values(result.real)
