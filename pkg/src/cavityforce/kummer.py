"""Confluent hypergeometric function M(a, b, z) for complex arguments."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError

MAX_TERMS = 10_000
SERIES_RTOL = 1e-16
# largest tolerated ratio between the biggest series term and the result
CANCELLATION_LIMIT = 1e4


def kummer_series(a: complex, b: complex, z: complex, *, rtol: float = SERIES_RTOL,
                  max_terms: int = MAX_TERMS) -> tuple[complex, float]:
    """Taylor series of M(a, b, z); returns the sum and the largest term modulus.

    Stops once a term falls below ``rtol`` times the running sum and the
    term ratio has started to shrink.
    """
    b = complex(b)
    if b.imag == 0 and b.real <= 0 and b.real == int(b.real):
        raise ValueError(f"M(a, b, z) undefined for b = {b.real:g}")
    a, z = complex(a), complex(z)
    term = 1 + 0j
    total = 1 + 0j
    biggest = 1.0
    for k in range(max_terms):
        term *= (a + k) / (b + k) * z / (k + 1)
        total += term
        mag = abs(term)
        biggest = max(biggest, mag)
        if term == 0:
            return total, biggest
        if mag <= rtol * abs(total) and abs((a + k + 1) * z) < abs((b + k + 1) * (k + 2)):
            return total, biggest
    raise NumericError(f"Kummer series did not converge in {max_terms} terms "
                       f"(a={a}, b={b}, z={z})")


def kummer_ode(a: complex, b: complex, z: complex, *, rtol: float = 1e-13) -> complex:
    """M(a, b, z) by integrating Kummer's equation along the ray s z, s in [s0, 1].

    With w1 = M(s z) and w2 = M'(s z): w1' = z w2 and
    w2' = (a w1 - (b - s z) w2) / s.  The start values at small s0 come
    from the series, where it is well conditioned.
    """
    a, b, z = complex(a), complex(b), complex(z)
    if z == 0:
        return 1 + 0j
    s0 = min(0.5, 0.25 / max(abs(a * z), abs(z), 1e-300))
    w1, _ = kummer_series(a, b, s0 * z)
    m1, _ = kummer_series(a + 1, b + 1, s0 * z)
    w2 = a / b * m1

    def rhs(s, w):
        return [z * w[1], (a * w[0] - (b - s * z) * w[1]) / s]

    sol = solve_ivp(rhs, (s0, 1.0), np.array([w1, w2], dtype=complex),
                    method="DOP853", rtol=rtol, atol=rtol * 1e-3)
    if not sol.success:
        raise NumericError(f"Kummer ODE continuation failed: {sol.message}")
    return complex(sol.y[0, -1])


def kummer_m(a: complex, b: complex, z: complex) -> complex:
    """Kummer's function M(a, b, z) = sum_k (a)_k z**k / ((b)_k k!).

    The series is used when it is well conditioned; when its terms exceed
    the result by more than ``CANCELLATION_LIMIT`` (large |a z|) the value
    is obtained by ODE continuation instead.

    Raises:
        ValueError: for b a non-positive integer.
        NumericError: if the series fails to converge in 10**4 terms.
    """
    total, biggest = kummer_series(a, b, z)
    if biggest <= CANCELLATION_LIMIT * max(abs(total), 1e-300):
        return total
    return kummer_ode(a, b, z)
