"""Adaptive Gauss-Legendre quadrature.

The integrand is called with a 1-D array of abscissae and must return an
array whose *last* axis matches it, so vector-valued (and complex) integrands
are integrated in a single pass.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NumericError


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def fixed_gauss_legendre(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule mapped onto [a, b]."""
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    return 0.5 * (b + a) + half * x, half * w


def _panel(f, a, b, order):
    x, w = fixed_gauss_legendre(a, b, order)
    coarse_x, coarse_w = fixed_gauss_legendre(a, b, order // 2)
    fine = np.asarray(f(x)) @ w
    coarse = np.asarray(f(coarse_x)) @ coarse_w
    return fine, np.max(np.abs(fine - coarse))


def adaptive_gauss_legendre(f, a: float, b: float, *, atol: float = 1e-12,
                            rtol: float = 0.0, order: int = 32,
                            initial_panels: int = 4, max_panels: int = 4096):
    """Integrate ``f`` over [a, b] by bisecting panels until converged.

    Each panel is accepted once the ``order``-point and ``order // 2``-point
    rules agree to within its share of the tolerance.

    Returns:
        The integral (same shape as ``f(x)`` minus the last axis).

    Raises:
        NumericError: if ``max_panels`` is exhausted; the message carries the
            achieved error estimate.
    """
    if b == a:
        return np.zeros(np.asarray(f(np.array([a]))).shape[:-1])
    edges = np.linspace(a, b, initial_panels + 1)
    stack = [(edges[i], edges[i + 1]) for i in range(initial_panels)]
    total = 0.0
    err_total = 0.0
    length = b - a
    panels = 0
    while stack:
        lo, hi = stack.pop()
        value, err = _panel(f, lo, hi, order)
        panels += 1
        share = (hi - lo) / length
        tol = max(atol, rtol * np.max(np.abs(value))) * share
        if err <= tol or hi - lo < 1e-14 * length:
            total = total + value
            err_total += err
            continue
        if panels + len(stack) >= max_panels:
            raise NumericError(
                f"adaptive quadrature did not converge on [{a}, {b}]: "
                f"panel [{lo:.3g}, {hi:.3g}] error {err:.3e} > {tol:.3e}")
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid))
        stack.append((mid, hi))
    return total
