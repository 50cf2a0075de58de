"""Gegenbauer polynomials C_n^alpha and closed-form integrals over [-1, 1].

Polynomials are evaluated with the forward three-term recurrence

    n C_n = 2 x (n + alpha - 1) C_{n-1} - (n + 2 alpha - 2) C_{n-2},

starting from C_0 = 1, C_1 = 2 alpha x.  The integral identities carry a
``1/(alpha - 1)`` prefactor; everywhere it appears it is cancelled against
the matching ``2(alpha - 1)`` factor of the generalized binomial so that
alpha = 1 needs no special case.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .kernels import gegenbauer_table_kernel


class DomainError(ValueError):
    """Argument outside the region where a formula is defined."""


@dataclass(frozen=True)
class GegenbauerParam:
    alpha: float
    degree: int

    def __post_init__(self):
        _check_alpha(self.alpha)
        if int(self.degree) != self.degree or self.degree < 0:
            raise DomainError(f"degree must be a natural number, got {self.degree!r}")


@dataclass(frozen=True)
class GeneratingFunctionPoint:
    x: float
    t: float

    def __post_init__(self):
        if not -1.0 <= self.x <= 1.0:
            raise DomainError(f"x must lie in [-1, 1], got {self.x!r}")
        if not abs(self.t) < 1.0:
            raise DomainError(f"|t| must be < 1, got {self.t!r}")


def _check_alpha(alpha):
    if not alpha > -0.5:
        raise DomainError(f"alpha must exceed -1/2, got {alpha!r}")


def _check_degree(n):
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a natural number, got {n!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def gegenbauer_table(alpha, nmax, x):
    """Return ``C_k^alpha(x)`` for k = 0..nmax as an array of shape (nmax+1, len(x))."""
    _check_alpha(alpha)
    _check_degree(nmax)
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    return gegenbauer_table_kernel(float(alpha), int(nmax), x)


def gegenbauer_eval(alpha, n, x):
    """Evaluate C_n^alpha at ``x`` (scalar or array) by forward recurrence."""
    scalar = np.ndim(x) == 0
    vals = gegenbauer_table(alpha, n, np.ravel(x))[n]
    if scalar:
        return float(vals[0])
    return vals.reshape(np.shape(x))


def gegenbauer_shifted_eval(alpha, n, x):
    """Evaluate the shifted polynomial C_n^alpha(2x - 1) for x in [0, 1]."""
    return gegenbauer_eval(alpha, n, 2.0 * np.asarray(x, dtype=np.float64) - 1.0)


def gegenbauer_chebyshev_coefficients(alpha, n):
    """Chebyshev-basis coefficient vector of C_n^alpha, built by the same recurrence.

    Used wherever exact polynomial derivatives are needed; the Chebyshev basis
    keeps the coefficients well scaled up to high degree, unlike monomials.
    """
    _check_alpha(alpha)
    _check_degree(n)
    prev = np.array([1.0])
    if n == 0:
        return prev
    cur = np.array([0.0, 2.0 * alpha])
    for k in range(2, n + 1):
        nxt = cheb.chebsub(2.0 * (k + alpha - 1.0) * cheb.chebmulx(cur),
                           (k + 2.0 * alpha - 2.0) * prev) / k
        prev, cur = cur, nxt
    return cur


def ode_residual(alpha, n, x):
    """Residual of (1-x^2) y'' - (2 alpha + 1) x y' + n(n + 2 alpha) y for y = C_n^alpha."""
    c = gegenbauer_chebyshev_coefficients(alpha, n)
    x = np.asarray(x, dtype=np.float64)
    y = cheb.chebval(x, c)
    dy = cheb.chebval(x, cheb.chebder(c)) if n > 0 else np.zeros_like(x)
    d2y = cheb.chebval(x, cheb.chebder(c, 2)) if n > 1 else np.zeros_like(x)
    return (1.0 - x * x) * d2y - (2.0 * alpha + 1.0) * x * dy + n * (n + 2.0 * alpha) * y


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def generalized_binomial(beta, k):
    """Falling-factorial binomial ``beta (beta-1) ... (beta-k+1) / k!``.

    Integer ``beta >= 0`` with ``k > beta`` hits an exact zero factor.
    """
    _check_degree(k)
    out = 1.0
    for j in range(k):
        out *= (beta - j) / (j + 1)
    return out


def _even_integral_cancelled(alpha, m):
    # binom(2a+2m-2, 2m+1)/(a-1): the j = 2m factor of the product is 2(a-1),
    # so the quotient is 2 binom(2a+2m-2, 2m) / (2m+1).
    return 2.0 * generalized_binomial(2.0 * alpha + 2.0 * m - 2.0, 2 * m) / (2 * m + 1)


def integral_identity_const(alpha, n):
    """Integral of C_n^alpha over [-1, 1]; zero for odd n."""
    _check_alpha(alpha)
    _check_degree(n)
    if n % 2:
        return 0.0
    return _even_integral_cancelled(alpha, n // 2)


def integral_identity_linear(alpha, n):
    """Integral of x C_n^alpha(x) over [-1, 1]; zero for even n."""
    _check_alpha(alpha)
    _check_degree(n)
    if n % 2 == 0:
        return 0.0
    m = (n - 1) // 2
    return 2.0 * (alpha + m) / (2 * m + 3) * _even_integral_cancelled(alpha, m)


def orthogonality_norm(alpha, n):
    """Squared norm of C_n^alpha under the weight (1 - x^2)^(alpha - 1/2)."""
    _check_alpha(alpha)
    _check_degree(n)
    if alpha == 0:
        raise DomainError("orthogonality norm is undefined at alpha = 0")
    log_ratio = math.lgamma(n + 2.0 * alpha) - math.lgamma(n + 1.0) - 2.0 * math.lgamma(abs(alpha))
    return math.pi * 2.0 ** (1.0 - 2.0 * alpha) / (n + alpha) * math.exp(log_ratio)


def generating_fn_closed(x, t, alpha):
    """(1 - 2 x t + t^2)^(-alpha)."""
    _check_alpha(alpha)
    base = 1.0 - 2.0 * x * t + t * t
    if not base > 0.0:
        raise DomainError(f"1 - 2xt + t^2 must be positive, got {base!r} at x={x!r}, t={t!r}")
    return base ** (-alpha)


def _check_t(t):
    if not abs(t) < 1.0:
        raise DomainError(f"|t| must be < 1, got {t!r}")


def f_closed(alpha, t):
    """Integral of (1 - 2xt + t^2)^(-alpha) over x in [-1, 1].

    Written as ``(1-t)^g expm1(g d) / (g t)`` with ``g = 2 - 2 alpha`` and
    ``d = 2 atanh t``; the g -> 0 limit (alpha = 1) is ``d / t``, the
    logarithmic form, and nothing cancels for small t.
    """
    _check_t(t)
    if t == 0.0:
        return 2.0
    g = 2.0 - 2.0 * alpha
    d = 2.0 * math.atanh(t)
    ratio = d if g == 0.0 else math.expm1(g * d) / g
    return math.exp(g * math.log1p(-t)) * ratio / t


def f_t_derivative(alpha, t):
    """d/dt of ``f_closed(alpha, t)``, differentiated by hand.

    With g = 2 - 2 alpha, f = ((1+t)^g - (1-t)^g) / (g t), hence
    f' = ((1+t)^(g-1) + (1-t)^(g-1) - f) / t, which holds at g = 0 as well.
    """
    _check_t(t)
    if t == 0.0:
        return 0.0
    g = 2.0 - 2.0 * alpha
    return ((1.0 + t) ** (g - 1.0) + (1.0 - t) ** (g - 1.0) - f_closed(alpha, t)) / t


def xmoment_gen_closed(alpha, t):
    """Integral of x (1 - 2xt + t^2)^(-alpha) over x in [-1, 1].

    Uses ``d_t f(alpha-1, t) / (2(alpha-1)) + t f(alpha, t)``.  At alpha = 1
    the first term is 0/0; there the equivalent substitution form
    ``((1+t^2) f(1, t) - 2) / (2t)`` is used instead.
    """
    _check_t(t)
    if not alpha - 1.0 > -0.5:
        raise DomainError(f"x-moment closed form needs alpha > 1/2, got {alpha!r}")
    if t == 0.0:
        return 0.0
    if alpha == 1.0:
        return ((1.0 + t * t) * f_closed(1.0, t) - 2.0) / (2.0 * t)
    return f_t_derivative(alpha - 1.0, t) / (2.0 * (alpha - 1.0)) + t * f_closed(alpha, t)


def f_series(alpha, t, terms=30):
    """Truncated power series of ``f_closed`` in t, coefficients from the even identity."""
    return math.fsum(integral_identity_const(alpha, 2 * m) * t ** (2 * m) for m in range(terms))


def xmoment_series(alpha, t, terms=30):
    """Truncated power series of ``xmoment_gen_closed`` in t."""
    return math.fsum(integral_identity_linear(alpha, 2 * m + 1) * t ** (2 * m + 1) for m in range(terms))
