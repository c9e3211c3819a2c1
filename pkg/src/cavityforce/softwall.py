"""Harmonic trap whose confining length grows linearly, hbar omega = 1/L(t)**2.

In the scaled, gauge-transformed frame the problem is the fixed oscillator
``-phi''/2 + y**2 phi/2`` in tau, so the Hermite functions are exact
transitionless states with phases exp(-i (n + 1/2) tau / hbar).  The
integrals K0, K1, K2 are evaluated from coefficients with the ladder-operator
matrix elements of y, y**2 and y d/dy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError
from .hardwall import check_routes, energy_from_integrals, energy_slope_force, force_from_integrals
from .schedule import (DEFAULT_NMAX, ForceBreakdown, SpectralState, WallSchedule,
                       eval_length, scaled_time)

NORM_TOL = 1e-8
MODES = ("instantaneous", "time-averaged", "cycle-averaged")


def hermite_functions(nmax: int, y) -> np.ndarray:
    """Rows Y_0..Y_{nmax-1} at ``y`` by the normalized three-term recurrence."""
    y = np.asarray(y, dtype=float)
    out = np.empty((nmax,) + y.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * y * y)
    if nmax > 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_Y(n: int, y):
    """Normalized oscillator eigenfunction Y_n(y) = H_n(y) exp(-y**2/2) / sqrt(2**n n! sqrt(pi))."""
    if int(n) != n or n < 0:
        raise ValueError(f"Hermite index must be a non-negative integer, got {n}")
    return hermite_functions(int(n) + 1, y)[-1]


def hermite_H(n: int, z):
    """Physicists' Hermite polynomial by H_{k+1} = 2 z H_k - 2 k H_{k-1}."""
    z = np.asarray(z, dtype=float)
    h0, h1 = np.ones_like(z), 2 * z
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, 2 * z * h1 - 2 * k * h0
    return h1


@dataclass(frozen=True, eq=False)
class HermiteBasis:
    """Hermite functions with Gauss-Hermite nodes and ladder matrices.

    ``poly[n, k]`` is Y_n(x_k) exp(x_k**2/2), so integrals against the
    Gauss-Hermite weights need no exponential factors.
    """

    nmax: int
    nodes: np.ndarray
    weights: np.ndarray
    poly: np.ndarray
    Y2: np.ndarray
    YD: np.ndarray

    def integrate(self, f) -> np.ndarray:
        """int Y_n(y) Y_m(y) f(y) dy for a smooth f, as a matrix."""
        w = self.weights * f(self.nodes)
        return (self.poly * w) @ self.poly.T


def ladder_matrices(nmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """<m|y|n>, <m|y**2|n> and <m|y d/dy|n>, each exact within the truncation."""
    n = np.arange(nmax, dtype=float)
    y = np.diag(np.sqrt(n[1:] / 2), 1) + np.diag(np.sqrt(n[1:] / 2), -1)
    up2 = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2
    y2 = np.diag(n + 0.5) + np.diag(up2, 2) + np.diag(up2, -2)
    yd = -0.5 * np.eye(nmax) + np.diag(up2, 2) - np.diag(up2, -2)
    return y, y2, yd


@lru_cache(maxsize=16)
def hermite_basis(nmax: int = DEFAULT_NMAX, order: int | None = None) -> HermiteBasis:
    order = order or 2 * nmax + 64
    x, w = np.polynomial.hermite.hermgauss(order)
    poly = np.empty((nmax, order))
    poly[0] = math.pi ** -0.25
    if nmax > 1:
        poly[1] = math.sqrt(2.0) * x * poly[0]
    for n in range(1, nmax - 1):
        poly[n + 1] = math.sqrt(2.0 / (n + 1)) * x * poly[n] - math.sqrt(n / (n + 1)) * poly[n - 1]
    _, y2, yd = ladder_matrices(nmax)
    for arr in (x, w, poly, y2, yd):
        arr.setflags(write=False)
    return HermiteBasis(nmax, x, w, poly, y2, yd)


def softwall_coefficients(level: int, schedule: WallSchedule, basis: HermiteBasis | None = None
                          ) -> SpectralState:
    """c_n = int Y_l Y_n exp(-i hbar Ldot0 L0 y**2 / 2) dy by Gauss-Hermite quadrature.

    Entries with n + l odd vanish by parity and are set to zero exactly.

    Raises:
        NumericError: if the captured norm falls short of one by more than 1e-8.
    """
    if schedule.kind == "sqrt-law":
        raise DomainError("the soft-wall engine supports fixed and linear walls only")
    basis = basis or hermite_basis()
    if not 0 <= level < basis.nmax:
        raise DomainError(f"initial level {level} outside 0..{basis.nmax - 1}")
    eps = schedule.hbar * schedule.Ldot0 * schedule.L0
    x = basis.nodes
    if eps == 0:
        c = np.zeros(basis.nmax, dtype=complex)
        c[level] = 1
    else:
        c = basis.poly @ (basis.weights * basis.poly[level] * np.exp(-0.5j * eps * x * x))
        c[(np.arange(basis.nmax) + level) % 2 == 1] = 0
    deficit = 1 - float(np.sum(np.abs(c) ** 2))
    if deficit > NORM_TOL:
        raise NumericError(f"soft-wall coefficients miss {deficit:.3e} of the norm; "
                           f"raise nmax={basis.nmax} or the quadrature order")
    return SpectralState("hermite", c, int(level), NORM_TOL)


def evolve(state: SpectralState, tau: float, hbar: float = 1.0) -> SpectralState:
    n = np.arange(state.nmax)
    c = np.asarray(state.coeffs) * np.exp(-1j * (n + 0.5) * tau / hbar)
    return SpectralState(state.basis, c, state.source_level, state.truncation_tol)


def k_integrals(c, basis: HermiteBasis | None = None) -> tuple[float, complex, float]:
    """K0 = int |phi_y|**2 + y**2 |phi|**2, K1 = int y conj(phi) phi_y, K2 = int y**2 |phi|**2."""
    c = np.asarray(c, dtype=complex)
    m = c.size
    if basis is None or basis.nmax < m:
        _, y2, yd = ladder_matrices(m)
    else:
        y2, yd = basis.Y2[:m, :m], basis.YD[:m, :m]
    K0 = float(np.sum(np.abs(c) ** 2 * (2 * np.arange(m) + 1)))
    K1 = complex(np.conj(c) @ yd @ c)
    K2 = float(np.real(np.conj(c) @ y2 @ c))
    return K0, K1, K2


def expansion_corrections(level: int, eps: float, tau: float = 0.0, *, averaged: bool = True,
                          hbar: float = 1.0) -> tuple[float, float]:
    """Second-order shift of K0 and first-order Im K1 with the n != l restriction.

    K0 - (2l+1) = (eps/2)**2 (sum_{n!=l} (2n+1) <n|y**2|l>**2 - (2l+1) <l|y**4|l>)
    Im K1 = -(eps/2) sum_{n!=l} <n|y**2|l> (<l|y d|n> - <n|y d|l>) cos((n-l) tau / hbar)
    """
    size = level + 5
    _, y2, yd = ladder_matrices(size)
    y4 = (y2 @ y2)[level, level]
    n = np.arange(size)
    off = n != level
    col = y2[:, level]
    dK0 = (eps / 2) ** 2 * (float(np.sum((2 * n[off] + 1) * col[off] ** 2)) - (2 * level + 1) * y4)
    anti = yd[level, :] - yd[:, level]
    phase = np.ones(size) if averaged else np.cos((n - level) * tau / hbar)
    ImK1 = -(eps / 2) * float(np.sum((col * anti * phase)[off]))
    return dK0, ImK1


def expansion_integrals(level: int, eps: float, tau: float = 0.0, *, averaged: bool = True,
                        hbar: float = 1.0) -> tuple[float, float]:
    """Second-order K0 and first-order Im K1, see :func:`expansion_corrections`."""
    dK0, ImK1 = expansion_corrections(level, eps, tau, averaged=averaged, hbar=hbar)
    return (2 * level + 1) + dK0, ImK1


def softwall_energy_force(state: SpectralState, schedule: WallSchedule, t: float, *,
                          mode: str = "instantaneous", check: bool = True
                          ) -> tuple[float, ForceBreakdown]:
    """Energy and force at time ``t`` for coefficients ``state`` given at t = 0.

    The adiabatic part is the stationary pressure 2(l + 1/2)/L**3.  Modes:
    ``"instantaneous"`` evolves the state exactly; ``"time-averaged"`` uses
    :func:`expansion_integrals` with the cosine set to one, evaluated at L0;
    ``"cycle-averaged"`` keeps only the conserved K0, also at L0.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    hbar = schedule.hbar
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    level = state.source_level
    ref = 2 * level + 1
    adiabatic = ref / L ** 3
    L0, v0 = schedule.L0, schedule.Ldot0
    if mode == "instantaneous":
        tau = float(scaled_time(schedule, t))
        K0, K1, K2 = k_integrals(evolve(state, tau, hbar).coeffs)
        # populations are conserved exactly; take K0 from the initial moduli
        p = np.abs(np.asarray(state.coeffs)) ** 2
        K0 = float(np.sum(p * (2 * np.arange(p.size) + 1)))
        total = force_from_integrals(K0, K1.imag, L, Ldot, hbar)
        slope = energy_slope_force(K0, K1.imag, K2, L, Ldot, hbar)
        if check:
            check_routes(total, slope, label="soft-wall force")
        E = energy_from_integrals(K0, K1.imag, K2, L, Ldot, hbar)
        raw = {"K0": K0, "ImK1": K1.imag, "K2": K2, "F_slope": slope}
        return E, ForceBreakdown(adiabatic, total - adiabatic, raw)
    if mode == "time-averaged":
        dK0, ImK1 = expansion_corrections(level, hbar * v0 * L0, averaged=True, hbar=hbar)
        K0 = ref + dK0
        K2 = level + 0.5
        nonad = dK0 / L0 ** 3 + hbar * v0 * ImK1 / L0 ** 2
    else:
        p = np.abs(np.asarray(state.coeffs)) ** 2
        m = p.size
        K0 = float(np.sum(p * (2 * np.arange(m) + 1)))
        K2 = float(np.sum(p * (np.arange(m) + 0.5)))
        ImK1 = 0.0
        nonad = (K0 - ref) / L0 ** 3
    E = energy_from_integrals(K0, ImK1, K2, L, Ldot, hbar)
    return E, ForceBreakdown(adiabatic, nonad, {"K0": K0, "ImK1": ImK1, "K2": K2})
