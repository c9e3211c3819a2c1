"""Brute-force Crank-Nicolson integrator for the scaled wave equation.

The box case integrates the scaled but not gauge-transformed equation

    i hbar phi_t = -phi_yy / (2 L**2) + i hbar (Ldot/L) (y d/dy + 1/2) phi

on [0, 1] with Dirichlet ends; the trap case adds y**2 phi / (2 L**2) on a
truncated line.  The dilation term is discretized as (Y D + D Y)/2 with
centred differences, an antisymmetric matrix, so every step is exactly
unitary up to round-off.  Nothing here uses the spectral engines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NumericError
from .schedule import ForceBreakdown, WallSchedule, eval_length

DEFAULT_POINTS = 2048
DEFAULT_DT = 1e-4
TRAP_HALF_WIDTH = 8.0
NORM_DRIFT_PER_TIME = 1e-10


@dataclass(frozen=True)
class OracleScenario:
    """Wall schedule, confinement (``"box"`` or ``"trap"``) and initial level."""

    kind: str
    schedule: WallSchedule
    level: int

    def __post_init__(self):
        if self.kind not in ("box", "trap"):
            raise ValueError(f"oracle kind must be 'box' or 'trap', got {self.kind!r}")
        if self.kind == "box" and self.level < 1:
            raise DomainError("box levels start at 1")
        if self.kind == "trap" and self.level < 0:
            raise DomainError("trap levels start at 0")


@dataclass(frozen=True)
class GridWavefunction:
    """Samples of the scaled (not gauge-transformed) wavefunction.

    ``grid`` includes the two boundary points, where ``values`` are zero.
    """

    kind: str
    grid: np.ndarray
    values: np.ndarray
    t: float
    level: int

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.h)


@dataclass(frozen=True)
class OracleTrajectory:
    scenario: OracleScenario
    snapshots: list
    norm_drift: float
    steps: int
    extras: dict = field(default_factory=dict)


def make_grid(kind: str, points: int) -> np.ndarray:
    """``points`` interior nodes plus the two boundary nodes."""
    if kind == "box":
        return np.linspace(0.0, 1.0, points + 2)
    return np.linspace(-TRAP_HALF_WIDTH, TRAP_HALF_WIDTH, points + 2)


def initial_profile(scenario: OracleScenario, grid: np.ndarray) -> np.ndarray:
    """Stationary level at L0 in scaled coordinates, normalized on the grid."""
    y = grid
    if scenario.kind == "box":
        v = math.sqrt(2.0) * np.sin(scenario.level * math.pi * y)
    else:
        v = _hermite_row(scenario.level, y)
    v = v.astype(complex)
    v[0] = v[-1] = 0
    return v


def _hermite_row(n: int, y):
    prev = np.zeros_like(y)
    cur = math.pi ** -0.25 * np.exp(-0.5 * y * y)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * y * cur - math.sqrt(k / (k + 1)) * prev
    return cur


def _hamiltonian_bands(kind, y, h, L, Ldot, hbar):
    """Tridiagonal H restricted to interior nodes: (lower, main, upper)."""
    yi = y[1:-1]
    kin = 1.0 / (2 * L * L * h * h)
    main = np.full(yi.size, 2 * kin, dtype=complex)
    if kind == "trap":
        main += yi * yi / (2 * L * L)
    ysum = (yi[:-1] + yi[1:]) / (4 * h)
    drive = 1j * hbar * Ldot / L
    upper = -kin + drive * ysum
    lower = -kin - drive * ysum
    return lower, main, upper


def _tridiag_apply(lower, main, upper, v):
    out = main * v
    out[:-1] += upper * v[1:]
    out[1:] += lower * v[:-1]
    return out


def integrate(scenario: OracleScenario, times, points: int = DEFAULT_POINTS,
              dt: float = DEFAULT_DT) -> OracleTrajectory:
    """Crank-Nicolson with H at the step midpoint; snapshots at ``times``.

    Raises:
        NumericError: if the discrete norm drifts by more than 1e-10 per
            unit time.
    """
    times = sorted(float(t) for t in np.atleast_1d(times))
    if times and times[0] < 0:
        raise DomainError("oracle times must be non-negative")
    sched = scenario.schedule
    if times:
        sched.check_time(times[-1])
    hbar = sched.hbar
    y = make_grid(scenario.kind, points)
    h = y[1] - y[0]
    psi = initial_profile(scenario, y)
    n0 = np.sum(np.abs(psi) ** 2) * h
    inner = psi[1:-1].copy()
    t = 0.0
    snaps = []
    steps = 0
    ab = np.zeros((3, points), dtype=complex)
    for target in times:
        nsteps = max(0, int(round((target - t) / dt)))
        for k in range(nsteps):
            step = (target - t) if k == nsteps - 1 else dt
            L, Ldot, _ = (float(v) for v in eval_length(sched, t + 0.5 * step))
            lo, mid, up = _hamiltonian_bands(scenario.kind, y, h, L, Ldot, hbar)
            a = 0.5j * step / hbar
            rhs = inner - a * _tridiag_apply(lo, mid, up, inner)
            ab[0, 1:] = a * up
            ab[1] = 1 + a * mid
            ab[2, :-1] = a * lo
            inner = solve_banded((1, 1), ab, rhs, check_finite=False)
            t += step
            steps += 1
        full = np.zeros(points + 2, dtype=complex)
        full[1:-1] = inner
        snaps.append(GridWavefunction(scenario.kind, y, full, target, scenario.level))
    drift = 0.0
    if snaps:
        drift = abs(snaps[-1].norm - n0)
        span = max(times[-1], 1.0)
        if drift > NORM_DRIFT_PER_TIME * span:
            raise NumericError(f"oracle norm drift {drift:.3e} over t={times[-1]:g}")
    return OracleTrajectory(scenario, snaps, drift, steps, {"points": points, "dt": dt})


def spectral_derivative(wf: GridWavefunction, values=None) -> np.ndarray:
    """d/dy by FFT: odd extension for the box, periodic for the trap."""
    v = wf.values if values is None else values
    h = wf.h
    if wf.kind == "box":
        ext = np.concatenate([v[:-1], -v[-1:0:-1]])
    else:
        ext = v[:-1]
    k = 2 * np.pi * np.fft.fftfreq(ext.size, d=h)
    d = np.fft.ifft(1j * k * np.fft.fft(ext))
    out = np.empty_like(v)
    out[:-1] = d[:v.size - 1]
    out[-1] = d[v.size - 1] if wf.kind == "box" else d[0]
    return out


def grid_integrals(wf: GridWavefunction, schedule: WallSchedule) -> dict:
    """I0/I1/I2 (box) or K0/K1/K2 (trap) of the gauge-transformed function."""
    L, Ldot, _ = (float(v) for v in eval_length(schedule, wf.t))
    y = wf.grid
    h = wf.h
    phi = np.exp(-0.5j * schedule.hbar * Ldot * L * y * y) * wf.values
    dphi = spectral_derivative(wf, phi)
    # trapezoid weights: phi_y need not vanish at the ends
    w = np.full(y.size, h)
    w[0] = w[-1] = 0.5 * h
    i0 = float(np.sum(w * np.abs(dphi) ** 2))
    i1 = complex(np.sum(w * y * np.conj(phi) * dphi))
    i2 = float(np.sum(w * y * y * np.abs(phi) ** 2))
    if wf.kind == "trap":
        i0 += i2
    return {"I0": i0, "I1": i1, "I2": i2, "L": L, "Ldot": Ldot}


def observables(wf: GridWavefunction, schedule: WallSchedule) -> tuple[float, ForceBreakdown]:
    """Energy and force from grid quadrature, split against the initial level."""
    g = grid_integrals(wf, schedule)
    L, Ldot, hbar = g["L"], g["Ldot"], schedule.hbar
    E = g["I0"] / (2 * L * L) + hbar * Ldot * g["I1"].imag / L + 0.5 * (hbar * Ldot) ** 2 * g["I2"]
    F = g["I0"] / L ** 3 + hbar * Ldot * g["I1"].imag / L ** 2
    if wf.kind == "box":
        ad = (wf.level * math.pi) ** 2 / L ** 3
        raw = {"I0": g["I0"], "ImI1": g["I1"].imag, "I2": g["I2"]}
    else:
        ad = (2 * wf.level + 1) / L ** 3
        raw = {"K0": g["I0"], "ImK1": g["I1"].imag, "K2": g["I2"]}
    return E, ForceBreakdown(ad, F - ad, raw)


def fidelity(wf: GridWavefunction, other) -> float:
    """|<other|wf>|**2 / (<wf|wf> <other|other>) on the grid."""
    a = np.asarray(other)
    b = wf.values
    ov = np.vdot(a, b)
    return float(abs(ov) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def exact_box_profile(coeffs_t, schedule: WallSchedule, t: float, grid) -> np.ndarray:
    """Scaled wavefunction from transitionless-state coefficients at time t."""
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    n = np.arange(1, len(coeffs_t) + 1)
    phi = (np.asarray(coeffs_t) @ (math.sqrt(2) * np.sin(np.outer(n, math.pi * grid))))
    return np.exp(0.5j * schedule.hbar * Ldot * L * grid ** 2) * phi


def exact_trap_profile(coeffs_t, schedule: WallSchedule, t: float, grid) -> np.ndarray:
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    rows = np.array([_hermite_row(k, grid) for k in range(len(coeffs_t))])
    phi = np.asarray(coeffs_t) @ rows
    return np.exp(0.5j * schedule.hbar * Ldot * L * grid ** 2) * phi
