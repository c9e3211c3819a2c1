"""Exact force for the wall law L(t) = sqrt(a t**2 + b t + c).

After scaling and the gauge phase the wave equation becomes time
independent in tau, with eigenfunctions of

    -u''/2 - (hbar B)**2 y**2 u / 8 = K u,   u(0) = u(1) = 0.

These are the real Kummer-type functions ``y Re[exp(-i hbar B y**2/4)
M(3/4 + i K/(hbar B), 3/2, i hbar B y**2/2)]``.  They are computed here by
shooting on the ODE, which stays accurate for large K where the Kummer
series cancels catastrophically.  The shooting value u(1) is proportional
to Re M(3/4 + i K/(hbar B), 3/2, i hbar B/2), so both share their roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericError, RootSearchError
from .quadrature import gauss_legendre
from .schedule import (DEFAULT_NMAX, ForceBreakdown, SpectralState, WallSchedule,
                       eval_length, scaled_time)
from .hardwall import check_routes, energy_from_integrals, energy_slope_force, force_from_integrals

PI = math.pi
ROOT_RTOL = 1e-13
BRACKET_WIDTH = 0.3
MODES = ("instantaneous", "time-averaged", "cycle-averaged")


def _kappa(hbarB) -> float:
    """(hbar B)**2 / 4 as a real number; imaginary hbar B gives a negative value."""
    hb = complex(hbarB)
    if hb.real != 0 and hb.imag != 0:
        raise DomainError(f"hbar*B must be real or purely imaginary, got {hbarB}")
    return (hb.real ** 2 - hb.imag ** 2) / 4


def _shoot(K: np.ndarray, kappa: float, y_eval=None, dense: bool = False):
    """Integrate u'' = -(2K + kappa y**2) u from u(0)=0, u'(0)=1 for every K."""
    K = np.asarray(K, dtype=float)
    m = K.size

    def rhs(y, w):
        u, du = w[:m], w[m:]
        return np.concatenate([du, -(2 * K + kappa * y * y) * u])

    w0 = np.concatenate([np.zeros(m), np.ones(m)])
    scale = 1.0 / np.sqrt(2 * K.max() + abs(kappa) + 1.0)
    sol = solve_ivp(rhs, (0.0, 1.0), w0, method="DOP853", rtol=1e-12,
                    atol=1e-15 * scale, t_eval=y_eval, dense_output=dense)
    if not sol.success:
        raise NumericError(f"shooting integration failed: {sol.message}")
    return sol


def shooting_value(K, hbarB) -> np.ndarray:
    """u_K(1) for the unnormalized solution with u(0)=0, u'(0)=1."""
    K = np.atleast_1d(np.asarray(K, dtype=float))
    sol = _shoot(K, _kappa(hbarB))
    return sol.y[:K.size, -1]


def find_roots(hbarB, nmax: int = DEFAULT_NMAX, *, rtol: float = ROOT_RTOL) -> np.ndarray:
    """Eigenvalues K_1 < ... < K_nmax of the Dirichlet problem.

    Each root is bracketed between the semiclassical midpoints
    ((n -/+ 1/2) pi)**2 / 2, clipped to +-30 % of n**2 pi**2 / 2, and refined
    by Illinois-modified false position on all levels at once.

    Raises:
        RootSearchError: if a bracket shows no sign change.
    """
    kappa = _kappa(hbarB)
    n = np.arange(1, nmax + 1, dtype=float)
    guess = (n * PI) ** 2 / 2
    if kappa == 0:
        return guess
    lo = np.maximum(((n - 0.5) * PI) ** 2 / 2, (1 - BRACKET_WIDTH) * guess)
    hi = np.minimum(((n + 0.5) * PI) ** 2 / 2, (1 + BRACKET_WIDTH) * guess)
    flo, fhi = shooting_value(lo, hbarB), shooting_value(hi, hbarB)
    bad = np.nonzero(np.sign(flo) == np.sign(fhi))[0]
    if bad.size:
        k = int(bad[0]) + 1
        raise RootSearchError(
            f"no sign change for level {k} in [{lo[k-1]:.6g}, {hi[k-1]:.6g}] at hbarB={hbarB}")
    side = np.zeros(nmax, dtype=int)
    x = 0.5 * (lo + hi)
    for _ in range(200):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if np.all(hi - lo <= rtol * x):
            break
        fx = shooting_value(x, hbarB)
        left = np.sign(fx) == np.sign(flo)
        # Illinois step: halve the stale endpoint value when one side repeats
        hi_new = np.where(left, hi, x)
        lo_new = np.where(left, x, lo)
        fhi = np.where(left, np.where(side == 1, 0.5 * fhi, fhi), fx)
        flo = np.where(left, fx, np.where(side == -1, 0.5 * flo, flo))
        side = np.where(left, 1, -1)
        lo, hi = lo_new, hi_new
        done = fx == 0
        lo = np.where(done, x, lo)
        hi = np.where(done, x, hi)
        if np.all(np.abs(fx) == 0):
            break
    else:
        raise RootSearchError(f"root refinement did not converge at hbarB={hbarB}")
    x = np.where(hi == lo, lo, x)
    if np.any(np.diff(x) <= 0):
        raise RootSearchError("Kummer roots are not strictly increasing")
    return x


def _quadrature_order(nmax: int) -> int:
    return max(256, 4 * nmax + 64)


@dataclass(frozen=True, eq=False)
class KummerBasis:
    """Normalized real eigenfunctions for one value of hbar*B.

    ``values``/``derivs`` hold phi_n and phi_n' on the cached Gauss-Legendre
    nodes of [0, 1]; ``A`` are the factors that normalize the shooting
    solutions, so phi_n'(0) = A_n > 0.  ``Y2[n, m]`` is int y**2 phi_n phi_m
    and ``D[n, m]`` is int y phi_n phi_m'.
    """

    hbarB: complex
    nmax: int
    roots: np.ndarray
    A: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    Y2: np.ndarray
    D: np.ndarray
    _dense: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def kappa(self) -> float:
        return _kappa(self.hbarB)

    def matrix(self, kernel) -> np.ndarray:
        """M[n, m] = int_0^1 phi_n(y) kernel(y) phi_m(y) dy on the cached nodes."""
        w = self.weights * kernel(self.nodes)
        return (self.values * w) @ self.values.T

    def project(self, f) -> np.ndarray:
        """<phi_n|f> for a callable f on [0, 1]."""
        return self.values @ (self.weights * f(self.nodes))


@lru_cache(maxsize=32)
def _build_basis(hbarB: complex, nmax: int) -> KummerBasis:
    order = _quadrature_order(nmax)
    x, w = gauss_legendre(order)
    nodes, weights = 0.5 * (x + 1), 0.5 * w
    kappa = _kappa(hbarB)
    if kappa == 0:
        n = np.arange(1, nmax + 1)[:, None]
        roots = (np.arange(1, nmax + 1) * PI) ** 2 / 2
        vals = math.sqrt(2) * np.sin(n * PI * nodes)
        ders = math.sqrt(2) * n * PI * np.cos(n * PI * nodes)
        A = math.sqrt(2) * PI * np.arange(1, nmax + 1, dtype=float)

        def dense(y):
            y = np.asarray(y, dtype=float)
            return np.concatenate([math.sqrt(2) * np.sin(n * PI * y),
                                   math.sqrt(2) * n * PI * np.cos(n * PI * y)])
    else:
        roots = find_roots(hbarB, nmax)
        sol = _shoot(roots, kappa, y_eval=nodes, dense=True)
        u, du = sol.y[:nmax], sol.y[nmax:]
        A = 1.0 / np.sqrt(u ** 2 @ weights)
        vals, ders = A[:, None] * u, A[:, None] * du
        raw = sol.sol

        def dense(y):
            out = raw(np.asarray(y, dtype=float))
            return np.concatenate([A[:, None] * out[:nmax], A[:, None] * out[nmax:]]) \
                if out.ndim == 2 else np.concatenate([A * out[:nmax], A * out[nmax:]])
    Y2 = (vals * weights * nodes ** 2) @ vals.T
    D = (vals * weights * nodes) @ ders.T
    for arr in (roots, A, nodes, weights, vals, ders, Y2, D):
        arr.setflags(write=False)
    return KummerBasis(complex(hbarB), nmax, roots, A, nodes, weights, vals, ders, Y2, D, dense)


def kummer_basis(hbarB, nmax: int = DEFAULT_NMAX) -> KummerBasis:
    """Build (or fetch from cache) the basis for ``hbarB`` (real, or imaginary if B**2 < 0)."""
    return _build_basis(complex(hbarB), int(nmax))


def basis_for_schedule(schedule: WallSchedule, nmax: int = DEFAULT_NMAX) -> KummerBasis:
    if schedule.kind == "fixed":
        return kummer_basis(0.0, nmax)
    return kummer_basis(schedule.hbar_B, nmax)


def basis_function(n: int, y, basis: KummerBasis):
    """phi_n(y) on [0, 1]."""
    if not 1 <= n <= basis.nmax:
        raise DomainError(f"level {n} outside 1..{basis.nmax}")
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise DomainError("basis functions live on 0 <= y <= 1")
    flat = np.atleast_1d(y).ravel()
    order = np.argsort(flat)
    out = np.empty_like(flat)
    out[order] = basis._dense(flat[order])[n - 1]
    return out.reshape(y.shape) if y.ndim else float(out[0])


@dataclass(frozen=True)
class JBarTable:
    """Overlaps of phi_n with sqrt(2) y**k sin(l pi y) for k = 0, 2, 4."""

    level: int
    J0: np.ndarray
    J2: np.ndarray
    J3: np.ndarray


def jbar_integrals(level: int, basis: KummerBasis) -> JBarTable:
    y = basis.nodes
    s = math.sqrt(2) * np.sin(level * PI * y)
    w = basis.weights
    J0 = basis.values @ (w * s)
    J2 = basis.values @ (w * y ** 2 * s)
    J3 = basis.values @ (w * y ** 4 * s)
    return JBarTable(level, J0, J2, J3)


def check_basis(schedule: WallSchedule, basis: KummerBasis) -> None:
    expect = complex(schedule.hbar_B) if schedule.kind != "fixed" else 0j
    if abs(expect - basis.hbarB) > 1e-12 * max(1.0, abs(expect)):
        raise DomainError(f"basis built for hbarB={basis.hbarB}, schedule has {expect}")


def sqrtlaw_coefficients(level: int, schedule: WallSchedule, basis: KummerBasis,
                         truncation_tol: float = 1e-6) -> SpectralState:
    """c_n(0) = sqrt(2) int_0^1 phi_n(y) sin(l pi y) exp(-i hbar L0 Ldot0 y**2 / 2) dy."""
    check_basis(schedule, basis)
    eps = schedule.hbar * schedule.L0 * schedule.Ldot0
    if eps == 0 and basis.hbarB == 0:
        c = np.zeros(basis.nmax, dtype=complex)
        c[level - 1] = 1
        return SpectralState("kummer", c, int(level), truncation_tol)
    y = basis.nodes
    init = math.sqrt(2) * np.sin(level * PI * y) * np.exp(-0.5j * eps * y * y)
    c = basis.values @ (basis.weights * init)
    return SpectralState("kummer", c, int(level), truncation_tol)


def pair_products_expansion(jbar: JBarTable, eps: float) -> np.ndarray:
    """conj(c_n') c_n to O(eps**2) from the J-bar overlaps, entry ``[n'-1, n-1]``."""
    J0, J2, J3 = jbar.J0, jbar.J2, jbar.J3
    return (np.outer(J0, J0) - 0.5j * eps * (np.outer(J0, J2) - np.outer(J2, J0))
            - eps * eps / 8 * (np.outer(J0, J3) + np.outer(J3, J0))
            + eps * eps / 4 * np.outer(J2, J2))


def evolve(state: SpectralState, basis: KummerBasis, tau: float, hbar: float = 1.0) -> SpectralState:
    c = np.asarray(state.coeffs) * np.exp(-1j * basis.roots[:state.nmax] * tau / hbar)
    return SpectralState(state.basis, c, state.source_level, state.truncation_tol)


def sqrtlaw_integrals(c, basis: KummerBasis) -> tuple[float, complex, float]:
    """I0 = int |phi_y|**2, I1 = int y conj(phi) phi_y and I2 = int y**2 |phi|**2."""
    c = np.asarray(c, dtype=complex)
    m = c.size
    Y2, D = basis.Y2, basis.D
    I2 = float(np.real(np.conj(c) @ Y2[:m, :m] @ c))
    I0 = 2 * float(np.sum(np.abs(c) ** 2 * basis.roots[:m])) + basis.kappa * I2
    I1 = complex(np.conj(c) @ D[:m, :m] @ c)
    return I0, I1, I2


def sqrtlaw_force(state: SpectralState, schedule: WallSchedule, basis: KummerBasis,
                  t: float, *, mode: str = "instantaneous", check: bool = True
                  ) -> tuple[float, ForceBreakdown]:
    """Energy and force of one state started in box level ``state.source_level``.

    ``state`` holds c_n(0); phases exp(-i K_n tau / hbar) are applied here.
    The adiabatic part is the stationary pressure (l pi)**2 / L**3.  In
    ``"cycle-averaged"`` mode (``"time-averaged"`` is accepted as a synonym)
    all cross terms average out and the non-adiabatic part is evaluated at
    L0, matching the form C Ldot0**2 / L0.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    check_basis(schedule, basis)
    hbar = schedule.hbar
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    ref = (state.source_level * PI) ** 2
    adiabatic = ref / L ** 3
    if mode == "instantaneous":
        tau = float(scaled_time(schedule, t))
        c = evolve(state, basis, tau, hbar).coeffs
        I0, I1, I2 = sqrtlaw_integrals(c, basis)
        total = force_from_integrals(I0, I1.imag, L, Ldot, hbar)
        slope = energy_slope_force(I0, I1.imag, I2, L, Ldot, hbar)
        if check:
            check_routes(total, slope, label="sqrt-law force")
        E = energy_from_integrals(I0, I1.imag, I2, L, Ldot, hbar)
        raw = {"I0": I0, "ImI1": I1.imag, "I2": I2, "F_slope": slope}
        return E, ForceBreakdown(adiabatic, total - adiabatic, raw)
    p = np.abs(np.asarray(state.coeffs)) ** 2
    m = p.size
    I2 = float(np.sum(p * np.diag(basis.Y2)[:m]))
    I0 = 2 * float(np.sum(p * basis.roots[:m])) + basis.kappa * I2
    nonad = (I0 - ref) / schedule.L0 ** 3
    E = energy_from_integrals(I0, 0.0, I2, L, Ldot, hbar)
    return E, ForceBreakdown(adiabatic, nonad, {"I0": I0, "ImI1": 0.0, "I2": I2})
