"""Measure-valued solution of the neutral Kimura equation.

    p(x, t) = a(t) delta_0 + r(x, t) + b(t) delta_1,
    r(x, t) = sum_n d_n exp(-(n+1)(n+2) t) C_n^{3/2}(2x - 1),

with the boundary masses fixed by conservation of total mass and of the
first moment.

Truncation.  For a Dirac initial condition the coefficients d_n do not decay
and the partial sums of ``sum d_n`` oscillate; a literal truncation of
``b(t) = 1/2 sum d_n (1 - e^{-lambda_n t})`` then violates both conservation
laws by an amount that never decays.  The modes n > N are therefore lumped
into one tail term with the exact total weight (initial mean minus the
resolved half-sum) decaying at the slowest unresolved rate lambda_{N+1}.
This keeps b(0) = a(0) = 0 exactly and reproduces the conservation form
``b(t) = mean - 1/2 sum d_n e^{-lambda_n t}`` to within
``exp(-lambda_{N+1} t)`` for t > 0.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as poly
from scipy.interpolate import PchipInterpolator

from .quadrature import gauss_legendre
from .special_functions import (
    gegenbauer_chebyshev_coefficients,
    gegenbauer_table,
    integral_identity_const,
    integral_identity_linear,
)

ALPHA = 1.5
DEFAULT_TRUNCATION_DELTA = 60
DEFAULT_TRUNCATION_SMOOTH = 30
MASS_TOL = 1e-8
NORMALIZE_LIMIT = 1e-3


class InitialConditionError(ValueError):
    """Initial condition outside the admissible class."""


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    x0: float

    def __post_init__(self):
        if not 0.0 < self.x0 < 1.0:
            raise InitialConditionError(f"Dirac initial condition needs 0 < x0 < 1, got {self.x0!r}")


@dataclass(frozen=True)
class PolynomialDensity:
    """Density given by monomial coefficients in ascending powers of x on [0, 1]."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.coefficients:
            raise InitialConditionError("polynomial initial condition needs at least one coefficient")

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, x):
        return poly.polyval(x, self.coefficients)


@dataclass(frozen=True)
class Tabulated:
    """Sampled density on (0, 1), interpolated by a monotone-safe piecewise cubic."""

    x: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.x) != len(self.values) or len(self.x) < 2:
            raise InitialConditionError("tabulated initial condition needs >= 2 matching (x, value) pairs")
        xs = np.asarray(self.x)
        if np.any(np.diff(xs) <= 0):
            raise InitialConditionError("tabulated x must be strictly increasing")
        if xs[0] <= 0.0 or xs[-1] >= 1.0:
            raise InitialConditionError("tabulated x must lie strictly inside (0, 1)")
        if min(self.values) < 0.0:
            raise InitialConditionError("tabulated density must be nonnegative")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        interp = PchipInterpolator(self.x, self.values, extrapolate=False)
        out = interp(x)
        return np.where(np.isnan(out), 0.0, out)


InitialCondition = Union[Delta, PolynomialDensity, Tabulated]


def _panels(ic):
    if isinstance(ic, Tabulated):
        return list(zip(ic.x[:-1], ic.x[1:]))
    return [(0.0, 1.0)]


def _integrate_ic(ic, g, order):
    """Integral of ic(x) g(x) over [0, 1], exact when ic*g is a polynomial of degree < 2*order."""
    total = []
    for left, right in _panels(ic):
        rule = gauss_legendre(order, (left, right))
        total.append(rule.weights * ic(rule.nodes) * g(rule.nodes))
    return math.fsum(np.concatenate(total))


def _ic_nodes(ic, order):
    return np.concatenate([gauss_legendre(order, p).nodes for p in _panels(ic)])


def _ic_degree(ic):
    return ic.degree if isinstance(ic, PolynomialDensity) else 3


def normalize_initial_condition(ic, quad_order):
    """Check nonnegativity and unit mass; rescale if the mass is off by at most 1e-3."""
    if isinstance(ic, Delta):
        return ic
    probe = np.concatenate([_ic_nodes(ic, quad_order), np.linspace(0.0, 1.0, 257)])
    if isinstance(ic, PolynomialDensity):
        probe = probe[(probe > 0.0) & (probe < 1.0)]
    if np.min(ic(probe)) < -1e-12:
        raise InitialConditionError("initial density is negative somewhere in (0, 1)")
    mass = _integrate_ic(ic, np.ones_like, quad_order)
    if abs(mass - 1.0) <= MASS_TOL:
        return ic
    if abs(mass - 1.0) > NORMALIZE_LIMIT:
        raise InitialConditionError(f"initial mass {mass!r} is not within {NORMALIZE_LIMIT} of 1")
    if isinstance(ic, PolynomialDensity):
        return PolynomialDensity(tuple(c / mass for c in ic.coefficients))
    return Tabulated(ic.x, tuple(v / mass for v in ic.values))


# ---------------------------------------------------------------------------
# Spectral data
# ---------------------------------------------------------------------------

def eigenvalues(nmax):
    n = np.arange(nmax + 1, dtype=np.float64)
    return (n + 1.0) * (n + 2.0)


def _projection_scale(nmax):
    # inverse of the weighted norm: int_0^1 C_n(2x-1)^2 x(1-x) dx = (n+1)(n+2) / (4(2n+3))
    n = np.arange(nmax + 1, dtype=np.float64)
    return 4.0 * (2.0 * n + 3.0) / ((n + 1.0) * (n + 2.0))


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise ValueError("coefficients must be a nonempty vector")
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficients must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def truncation(self):
        return self.values.shape[0] - 1

    @property
    def even_sum(self):
        return math.fsum(self.values[::2])

    @property
    def half_sum(self):
        return 0.5 * math.fsum(self.values)


def min_quad_order(ic, truncation):
    """Smallest Gauss-Legendre order that projects ``ic`` onto N modes exactly."""
    return int(math.ceil((truncation + _ic_degree(ic)) / 2.0)) + 2


def project_coefficients(ic, truncation, quad_order=None):
    """Coefficients d_0..d_N of ``ic`` in the shifted C^{3/2} basis.

    Dirac initial conditions use the closed form
    d_n = 4(2n+3)/((n+1)(n+2)) x0(1-x0) C_n^{3/2}(2x0-1); the others are
    projected by Gauss-Legendre quadrature against the weight x(1-x).
    """
    if truncation < 0:
        raise ValueError(f"truncation must be >= 0, got {truncation}")
    scale = _projection_scale(truncation)
    if isinstance(ic, Delta):
        basis = gegenbauer_table(ALPHA, truncation, [2.0 * ic.x0 - 1.0])[:, 0]
        return SpectralCoefficients(scale * ic.x0 * (1.0 - ic.x0) * basis)
    needed = min_quad_order(ic, truncation)
    if quad_order is None:
        quad_order = needed
    if quad_order < needed:
        raise ValueError(f"quad_order {quad_order} is below the exactness requirement {needed}")
    ic = normalize_initial_condition(ic, quad_order)
    d = np.empty(truncation + 1)
    rows = []
    for left, right in _panels(ic):
        rule = gauss_legendre(quad_order, (left, right))
        x = rule.nodes
        table = gegenbauer_table(ALPHA, truncation, 2.0 * x - 1.0)
        rows.append(table * (rule.weights * ic(x) * x * (1.0 - x)))
    stacked = np.concatenate(rows, axis=1)
    for n in range(truncation + 1):
        d[n] = math.fsum(stacked[n])
    return SpectralCoefficients(scale * d)


@dataclass(frozen=True, eq=False)
class MeasureSolution:
    coefficients: SpectralCoefficients
    initial_mean: float
    initial_mass: float = 1.0
    initial_condition: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if not -1e-12 <= self.initial_mean <= self.initial_mass + 1e-12:
            raise ValueError("initial mean must lie in [0, initial mass]")

    @property
    def truncation(self):
        return self.coefficients.truncation

    @property
    def eigenvalues(self):
        return eigenvalues(self.truncation)

    @property
    def fixation_tail(self):
        """Weight of the modes beyond the truncation in b(infinity)."""
        return self.initial_mean - self.coefficients.half_sum

    @property
    def extinction_tail(self):
        d = self.coefficients.values
        alt = 0.5 * math.fsum(d[::2]) - 0.5 * math.fsum(d[1::2])
        return (self.initial_mass - self.initial_mean) - alt


def solve(ic, truncation=None, quad_order=None):
    """Build the measure solution for ``ic``."""
    if truncation is None:
        truncation = DEFAULT_TRUNCATION_DELTA if isinstance(ic, Delta) else DEFAULT_TRUNCATION_SMOOTH
    if isinstance(ic, Delta):
        coeffs = project_coefficients(ic, truncation)
        return MeasureSolution(coeffs, initial_mean=ic.x0, initial_condition=ic)
    if quad_order is None:
        quad_order = min_quad_order(ic, truncation)
    ic = normalize_initial_condition(ic, quad_order)
    coeffs = project_coefficients(ic, truncation, quad_order)
    mass = _integrate_ic(ic, np.ones_like, quad_order)
    mean = _integrate_ic(ic, lambda x: x, quad_order)
    return MeasureSolution(coeffs, initial_mean=mean, initial_mass=mass, initial_condition=ic)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _decay(sol, t):
    """exp(-lambda_n t) for n = 0..N+1, shape (len(t), N+2)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    lam = eigenvalues(sol.truncation + 1)
    return t, np.exp(-np.outer(t, lam)), -np.expm1(-np.outer(t, lam))


def _maybe_scalar(t, out):
    return float(out[0]) if np.ndim(t) == 0 else out


def interior_density(sol, x, t):
    """Truncated interior density r(x, t); x and t may be arrays (result shape (len t, len x))."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    tt, decay, _ = _decay(sol, t)
    table = gegenbauer_table(ALPHA, sol.truncation, 2.0 * x_arr - 1.0)
    out = (decay[:, :-1] * sol.coefficients.values) @ table
    if np.ndim(t) == 0 and np.ndim(x) == 0:
        return float(out[0, 0])
    if np.ndim(t) == 0:
        return out[0]
    if np.ndim(x) == 0:
        return out[:, 0]
    return out


def fixation_probability(sol, t):
    """Mass b(t) absorbed at x = 1."""
    _, _, growth = _decay(sol, t)
    d = sol.coefficients.values
    b = 0.5 * (growth[:, :-1] @ d) + sol.fixation_tail * growth[:, -1]
    return _maybe_scalar(t, b)


def extinction_probability(sol, t):
    """Mass a(t) absorbed at x = 0."""
    _, _, growth = _decay(sol, t)
    d = sol.coefficients.values
    signed = np.where(np.arange(d.shape[0]) % 2 == 0, d, -d)
    a = 0.5 * (growth[:, :-1] @ signed) + sol.extinction_tail * growth[:, -1]
    return _maybe_scalar(t, a)


def asymptotic_fixation(x0, t):
    """Two-term large-time form of b(t) for a Dirac start at x0; meaningless near t = 0."""
    return x0 - 3.0 * x0 * (1.0 - x0) * np.exp(-2.0 * np.asarray(t, dtype=np.float64))


def asymptotic_remainder(sol, t):
    """b(t) minus its two-term asymptotic form, summed without cancellation.

    Equals ``-1/2 sum_{n>=1} d_n e^{-lambda_n t}`` minus the lumped tail; for a
    Dirac start this is ``fixation_probability - asymptotic_fixation``.
    """
    _, decay, _ = _decay(sol, t)
    d = sol.coefficients.values
    rem = -0.5 * (decay[:, 1:-1] @ d[1:]) - sol.fixation_tail * decay[:, -1]
    return _maybe_scalar(t, rem)


def moment_facts(nmax):
    """Closed-form integrals over [0, 1] of C_n^{3/2}(2x-1) and x C_n^{3/2}(2x-1).

    Obtained from the [-1, 1] identities by x -> (y + 1)/2; the first is 1 for
    even n and 0 for odd n, the second is 1/2 for every n.
    """
    const = np.array([0.5 * integral_identity_const(ALPHA, n) for n in range(nmax + 1)])
    linear = np.array([0.25 * (integral_identity_linear(ALPHA, n) + integral_identity_const(ALPHA, n))
                       for n in range(nmax + 1)])
    return const, linear


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConservationReport:
    times: np.ndarray
    interior_mass: np.ndarray
    interior_mean: np.ndarray
    mass_residual: np.ndarray
    mean_residual: np.ndarray
    projection_error: Optional[float]
    min_density: np.ndarray


def interior_moments(sol, t, quad_order):
    """Quadrature values of int r and int x r over [0, 1] at each time."""
    needed = sol.truncation // 2 + 2
    if quad_order < needed:
        raise ValueError(f"quad_order {quad_order} is below the exactness requirement {needed}")
    rule = gauss_legendre(quad_order, (0.0, 1.0))
    r = interior_density(sol, rule.nodes, np.atleast_1d(t))
    mass = np.array([math.fsum(row) for row in r * rule.weights])
    mean = np.array([math.fsum(row) for row in r * (rule.weights * rule.nodes)])
    return mass, mean


def projection_error(sol, quad_order=None):
    """Weighted L2 distance between the initial density and its truncated expansion."""
    ic = sol.initial_condition
    if ic is None or isinstance(ic, Delta):
        return None
    order = quad_order or min_quad_order(ic, 2 * sol.truncation + 2)
    d = sol.coefficients.values
    pieces = []
    for left, right in _panels(ic):
        rule = gauss_legendre(order, (left, right))
        x = rule.nodes
        approx = d @ gegenbauer_table(ALPHA, sol.truncation, 2.0 * x - 1.0)
        pieces.append(rule.weights * x * (1.0 - x) * (ic(x) - approx) ** 2)
    return math.sqrt(max(math.fsum(np.concatenate(pieces)), 0.0))


def conservation_report(sol, times, quad_order=None, density_grid=201):
    """Residuals of both conservation laws with the interior moments taken by quadrature."""
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    if quad_order is None:
        quad_order = sol.truncation // 2 + 2
    if times.size == 0:
        empty = np.zeros(0)
        return ConservationReport(times, empty, empty, empty, empty, projection_error(sol), empty)
    mass, mean = interior_moments(sol, times, quad_order)
    a = np.atleast_1d(extinction_probability(sol, times))
    b = np.atleast_1d(fixation_probability(sol, times))
    grid = np.linspace(0.0, 1.0, density_grid)
    min_density = interior_density(sol, grid, times).min(axis=1)
    return ConservationReport(
        times=times,
        interior_mass=mass,
        interior_mean=mean,
        mass_residual=np.abs(a + b + mass - sol.initial_mass),
        mean_residual=np.abs(b + mean - sol.initial_mean),
        projection_error=projection_error(sol),
        min_density=min_density,
    )


def mode_residuals(nmax, grid_points=101):
    """Per-mode residual of the neutral Kimura operator, relative to the mode's scale.

    For each n the polynomial d^2/dx^2 [x(1-x) C_n(2x-1)] + lambda_n C_n(2x-1)
    is formed by exact differentiation of its Chebyshev coefficient vector
    (in y = 2x - 1 this is d^2/dy^2 [(1-y^2) C_n(y)] + lambda_n C_n(y)) and
    evaluated on a uniform x-grid.  Each residual is divided by
    max |lambda_n C_n| on the grid.
    """
    y = 2.0 * np.linspace(0.0, 1.0, grid_points) - 1.0
    one_minus_y2 = np.array([0.5, 0.0, -0.5])
    lam = eigenvalues(nmax)
    out = np.empty(nmax + 1)
    for n in range(nmax + 1):
        c = gegenbauer_chebyshev_coefficients(ALPHA, n)
        flux = cheb.chebmul(one_minus_y2, c)
        lhs = cheb.chebval(y, cheb.chebder(flux, 2))
        term = lam[n] * cheb.chebval(y, c)
        out[n] = np.max(np.abs(lhs + term)) / np.max(np.abs(term))
    return out


def pde_residual(sol, t):
    """Largest scaled per-mode residual of the neutral Kimura equation (kappa = 1)."""
    if not t > 0:
        raise ValueError("pde_residual needs t > 0")
    return float(np.max(mode_residuals(sol.truncation)))


def heterozygosity(sol, t, quad_order=None):
    """Quadrature value of int x(1-x) r(x, t) dx."""
    order = quad_order or sol.truncation // 2 + 3
    rule = gauss_legendre(order, (0.0, 1.0))
    r = interior_density(sol, rule.nodes, np.atleast_1d(t))
    w = rule.weights * rule.nodes * (1.0 - rule.nodes)
    out = np.array([math.fsum(row) for row in r * w])
    return _maybe_scalar(t, out)
