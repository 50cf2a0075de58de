import numpy as np
import pytest

from neutral_kimura.special_functions import gegenbauer_eval


def taylor_gegenbauer(alpha, x, nmax):
    """C_n^alpha(x) for n <= nmax as Taylor coefficients of (1 - 2xt + t^2)^(-alpha).

    Expands (1 - u)^(-alpha) = sum_k binom(alpha+k-1, k) u^k with u = 2xt - t^2
    as polynomials in t.  Shares nothing with the recurrence.
    """
    from numpy.polynomial import polynomial as P

    u = np.array([0.0, 2.0 * x, -1.0])
    total = np.zeros(nmax + 1)
    power = np.array([1.0])
    coef = 1.0
    for k in range(nmax + 1):
        term = coef * power[: nmax + 1]
        total[: term.shape[0]] += term
        power = P.polymul(power, u)
        coef *= (alpha + k) / (k + 1)
    return total


@pytest.fixture
def recurrence():
    return gegenbauer_eval
