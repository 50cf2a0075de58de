"""Gauss-Legendre rules, a Gauss-Gegenbauer rule, and bisection-adaptive quadrature."""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal


class QuadratureError(ArithmeticError):
    """Raised when a rule cannot be built or an integral cannot be resolved."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    @property
    def order(self):
        return self.nodes.shape[0]


@functools.lru_cache(maxsize=None)
def _legendre_reference(m):
    """Nodes and weights on [-1, 1] by Newton iteration on the Legendre recurrence."""
    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(100):
        p_prev = np.ones_like(x)
        p = x.copy()
        for k in range(2, m + 1):
            p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        dp = m * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise QuadratureError(f"Newton iteration for {m}-point Gauss-Legendre did not converge")
    # one more derivative evaluation at the converged nodes
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = m * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # symmetrize: the iteration is run on both halves independently
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    order = np.argsort(x)
    x, w = x[order], w[order]
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(m, interval=(-1.0, 1.0)):
    """``m``-point Gauss-Legendre rule mapped affinely onto ``interval``."""
    if m < 1:
        raise ValueError(f"rule order must be at least 1, got {m}")
    a, b = map(float, interval)
    x, w = _legendre_reference(int(m))
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=a + half * (x + 1.0), weights=half * w, interval=(a, b))


def _orthonormal_values(x, b, mu0, m):
    """Orthonormal polynomials p_0..p_m and p_m' at ``x`` from the Jacobi recurrence."""
    vals = np.empty((m + 1, x.shape[0]))
    p_prev = np.zeros_like(x)
    dp_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(mu0))
    dp = np.zeros_like(x)
    vals[0] = p
    for k in range(m):
        bk = b[k - 1] if k > 0 else 0.0
        p_next = (x * p - bk * p_prev) / b[k]
        dp_next = (p + x * dp - bk * dp_prev) / b[k]
        p_prev, p, dp_prev, dp = p, p_next, dp, dp_next
        vals[k + 1] = p
    return vals, dp


@functools.lru_cache(maxsize=None)
def _gegenbauer_reference(m, alpha):
    k = np.arange(1, m + 1, dtype=np.float64)
    b = np.sqrt(k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0)))
    # total weight: Beta(1/2, alpha + 1/2)
    mu0 = math.exp(math.lgamma(0.5) + math.lgamma(alpha + 0.5) - math.lgamma(alpha + 1.0))
    x = eigh_tridiagonal(np.zeros(m), b[:-1], eigvals_only=True)
    for _ in range(100):
        vals, dp = _orthonormal_values(x, b, mu0, m)
        dx = vals[m] / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise QuadratureError(f"Newton polish for {m}-point Gauss-Gegenbauer did not converge")
    vals, _ = _orthonormal_values(x, b, mu0, m)
    w = 1.0 / np.sum(vals[:m] ** 2, axis=0)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_gegenbauer(m, alpha):
    """``m``-point Gauss rule on [-1, 1] for the weight (1 - x^2)^(alpha - 1/2).

    Nodes start from the eigenvalues of the Jacobi matrix and are polished by
    Newton on the orthonormal recurrence; weights are the inverse Christoffel
    sums.  Only the zeroth moment (a Beta integral) enters, so the rule is
    independent of the closed-form norms it is used to check.
    """
    if m < 1:
        raise ValueError(f"rule order must be at least 1, got {m}")
    if not alpha > -0.5:
        raise ValueError(f"alpha must exceed -1/2, got {alpha!r}")
    x, w = _gegenbauer_reference(int(m), float(alpha))
    return QuadratureRule(nodes=x, weights=w, interval=(-1.0, 1.0))


def _evaluate(f, x):
    y = np.asarray(f(x), dtype=np.float64)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        raise QuadratureError("integrand returned a non-finite value at a quadrature node")
    return y


def integrate(f, rule):
    """Apply ``rule`` to the vectorized integrand ``f``."""
    return math.fsum(rule.weights * _evaluate(f, rule.nodes))


def adaptive_integrate(f, interval, abs_tol, order=15, max_depth=50):
    """Integrate ``f`` over ``interval`` to absolute tolerance ``abs_tol``.

    Each panel is integrated with ``order`` and ``2*order + 1`` Gauss-Legendre
    points; their difference is the error estimate.  Panels whose estimate
    exceeds their share of the tolerance are bisected.  A panel is also
    accepted once the estimate sits at the rounding floor of its own sum,
    since bisection cannot improve on that.
    """
    if not abs_tol > 0:
        raise ValueError(f"abs_tol must be positive, got {abs_tol!r}")
    a, b = map(float, interval)
    width = b - a
    if width == 0.0:
        return 0.0
    lo_x, lo_w = _legendre_reference(order)
    hi_x, hi_w = _legendre_reference(2 * order + 1)
    eps = np.finfo(np.float64).eps

    accepted = []
    stack = [(a, b, 0)]
    while stack:
        left, right, depth = stack.pop()
        half = 0.5 * (right - left)
        mid = left + half
        lo_terms = half * lo_w * _evaluate(f, mid + half * lo_x)
        hi_terms = half * hi_w * _evaluate(f, mid + half * hi_x)
        low = math.fsum(lo_terms)
        high = math.fsum(hi_terms)
        err = abs(high - low)
        share = abs_tol * (right - left) / abs(width)
        floor = 64.0 * eps * math.fsum(np.abs(hi_terms))
        if err <= share or err <= floor:
            accepted.append(high)
            continue
        if depth + 1 > max_depth:
            raise QuadratureError(
                f"adaptive quadrature exceeded depth {max_depth} near [{left!r}, {right!r}]"
            )
        stack.append((mid, right, depth + 1))
        stack.append((left, mid, depth + 1))
    return math.fsum(accepted)
