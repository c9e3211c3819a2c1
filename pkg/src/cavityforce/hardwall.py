"""Exact hard-wall dynamics for a linearly moving wall.

The scaled, gauge-transformed wavefunction is expanded in the transitionless
states ``sqrt(2) sin(n pi y)``, whose coefficients only pick up phases
``exp(-i n**2 pi**2 tau / (2 hbar))``.  Energies and forces follow from three
coefficient bilinears I0, I1 and I2 built on the J1/J2/J3 integral tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, DomainError, TruncationError
from .quadrature import adaptive_gauss_legendre
from .schedule import (DEFAULT_NMAX, ForceBreakdown, OccupationModel,
                       SpectralState, WallSchedule, box_energy, eval_length,
                       scaled_time)

PI = math.pi
FD_STEP = 1e-5
ROUTE_RTOL = 1e-6
MODES = ("instantaneous", "time-averaged", "cycle-averaged")


def _j_closed_forms(n, l):
    n = np.asarray(n, dtype=float)
    l = np.asarray(l, dtype=float)
    diag = n == l
    sign = np.where((n + l) % 2 == 0, 1.0, -1.0)
    d = np.where(diag, 1.0, n * n - l * l)
    pi2, pi4 = PI ** 2, PI ** 4
    J1 = np.where(diag, -1.0 / (2 * n * PI), -sign * 2 * l / (-d * PI))
    J2 = np.where(diag, 1 / 3 - 1 / (2 * n * n * pi2), sign * 8 * n * l / (d * d * pi2))
    J3 = np.where(
        diag,
        1 / 5 - 1 / (n * n * pi2) + 3 / (2 * n ** 4 * pi4),
        sign * (16 * n * l / (d * d * pi2) - 192 * n * l * (n * n + l * l) / (d ** 4 * pi4)),
    )
    return J1, J2, J3


def j_integrals(n: int, l: int) -> tuple[float, float, float]:
    """Closed forms of

    J1 = 2 int_0^1 y sin(l pi y) cos(n pi y) dy,
    J2 = 2 int_0^1 y**2 sin(l pi y) sin(n pi y) dy,
    J3 = 2 int_0^1 y**4 sin(l pi y) sin(n pi y) dy.
    """
    if n < 1 or l < 1:
        raise ValueError(f"J integrals need n, l >= 1, got ({n}, {l})")
    J1, J2, J3 = _j_closed_forms(n, l)
    return float(J1), float(J2), float(J3)


@dataclass(frozen=True)
class JTable:
    """J1/J2/J3 for all (n, l) in 1..nmax; entry ``[n-1, l-1]``."""

    nmax: int
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray


@lru_cache(maxsize=16)
def j_table(nmax: int) -> JTable:
    idx = np.arange(1, nmax + 1)
    J1, J2, J3 = _j_closed_forms(idx[:, None], idx[None, :])
    for arr in (J1, J2, J3):
        arr.setflags(write=False)
    return JTable(nmax, J1, J2, J3)


def gauge_strength(schedule: WallSchedule) -> float:
    """hbar * Ldot(0) * L(0), the coefficient of the initial quadratic phase."""
    return schedule.hbar * schedule.Ldot0 * schedule.L0


@lru_cache(maxsize=256)
def _initial_coefficients(level: int, eps: float, nmax: int) -> np.ndarray:
    if eps == 0:
        c = np.zeros(nmax, dtype=complex)
        c[level - 1] = 1
        c.setflags(write=False)
        return c
    n = np.arange(1, nmax + 1)[:, None]

    def integrand(y):
        return (2.0 * np.sin(level * PI * y) * np.sin(n * PI * y)
                * np.exp(-0.5j * eps * y * y))

    c = adaptive_gauss_legendre(integrand, 0.0, 1.0, atol=1e-13, initial_panels=8)
    c.setflags(write=False)
    return c


def initial_coefficients(level: int, schedule: WallSchedule,
                         nmax: int = DEFAULT_NMAX, truncation_tol: float = 1e-6) -> SpectralState:
    """c_n(0) = 2 int_0^1 sin(l pi y) sin(n pi y) exp(-i eps y**2 / 2) dy.

    ``eps = hbar Ldot0 L0``.  Computed by adaptive quadrature of the exact
    integrand, so the only approximation is the truncation at ``nmax``.
    """
    if not 1 <= level <= nmax:
        raise DomainError(f"initial level {level} outside 1..{nmax}")
    c = _initial_coefficients(int(level), float(gauge_strength(schedule)), int(nmax))
    return SpectralState("box-sine", c, int(level), truncation_tol)


def expansion_coefficients(level: int, eps: float, nmax: int = DEFAULT_NMAX) -> np.ndarray:
    """Second-order small-eps coefficients delta - i eps/2 J2 - eps**2/8 J3."""
    jt = j_table(nmax)
    delta = (np.arange(1, nmax + 1) == level).astype(complex)
    return delta - 0.5j * eps * jt.J2[:, level - 1] - eps * eps / 8 * jt.J3[:, level - 1]


def expansion_pair_products(level: int, eps: float, nmax: int = DEFAULT_NMAX) -> np.ndarray:
    """conj(c_n') c_n to O(eps**2), entry ``[n'-1, n-1]``.

    Obtained by multiplying out :func:`expansion_coefficients`; the
    second-order J2*J2 cross term enters with a plus sign.
    """
    jt = j_table(nmax)
    d = (np.arange(1, nmax + 1) == level).astype(float)
    j2 = jt.J2[:, level - 1]
    j3 = jt.J3[:, level - 1]
    first = np.outer(d, j2) - np.outer(j2, d)
    second = -(np.outer(d, j3) + np.outer(j3, d)) / 8 + np.outer(j2, j2) / 4
    return np.outer(d, d) - 0.5j * eps * first + eps * eps * second


def transitionless_phases(nmax: int, tau, hbar: float = 1.0) -> np.ndarray:
    n = np.arange(1, nmax + 1)
    return np.exp(-0.5j * (n * PI) ** 2 * np.asarray(tau)[..., None] / hbar)


def propagate(c0, tau, hbar: float = 1.0):
    """c_n(tau) = c_n(0) exp(-i n**2 pi**2 tau / (2 hbar)); accepts a state or array."""
    if isinstance(c0, SpectralState):
        c = np.asarray(c0.coeffs) * transitionless_phases(c0.nmax, tau, hbar)
        return SpectralState(c0.basis, c, c0.source_level, c0.truncation_tol)
    c0 = np.asarray(c0, dtype=complex)
    return c0 * transitionless_phases(c0.shape[-1], tau, hbar)


@dataclass(frozen=True)
class EnergyBreakdown:
    E: float
    I0: float
    I1: complex
    I2: float

    @property
    def ImI1(self) -> float:
        return self.I1.imag


def coefficient_integrals(c, jt: JTable, populations=None) -> tuple[float, complex, float]:
    """I0 = int |phi_y|**2, I1 = int y conj(phi) phi_y, I2 = int y**2 |phi|**2.

    ``populations`` (the conserved |c_n|**2) may be passed to keep I0 free
    of the rounding that the phase factors introduce.
    """
    c = np.asarray(c, dtype=complex)
    m = c.size
    if m > jt.nmax:
        raise TruncationError(f"J table of size {jt.nmax} cannot serve {m} coefficients")
    n = np.arange(1, m + 1)
    p = np.abs(c) ** 2 if populations is None else np.asarray(populations)
    I0 = PI ** 2 * float(np.sum(p * n * n))
    # I1 = sum_{n', n} conj(c_n') c_n n pi J1(n, n')
    kernel = jt.J1[:m, :m].T * (n * PI)[None, :]
    I1 = complex(np.conj(c) @ kernel @ c)
    I2 = float(np.real(np.conj(c) @ jt.J2[:m, :m] @ c))
    return I0, I1, I2


def energy_from_integrals(I0, ImI1, I2, L, Ldot, hbar=1.0):
    """<E> = I0/(2L**2) + hbar Ldot ImI1 / L + hbar**2 Ldot**2 I2 / 2."""
    return I0 / (2 * L * L) + hbar * Ldot * ImI1 / L + 0.5 * (hbar * Ldot) ** 2 * I2


def force_from_integrals(I0, ImI1, L, Ldot, hbar=1.0):
    """Operator expectation I0/L**3 + hbar Ldot ImI1 / L**2."""
    return I0 / L ** 3 + hbar * Ldot * ImI1 / L ** 2


def energy_expectation(c, L: float, Ldot: float, jt: JTable, hbar: float = 1.0) -> EnergyBreakdown:
    coeffs = c.coeffs if isinstance(c, SpectralState) else c
    I0, I1, I2 = coefficient_integrals(coeffs, jt)
    return EnergyBreakdown(energy_from_integrals(I0, I1.imag, I2, L, Ldot, hbar), I0, I1, I2)


def energy_slope_force(I0, ImI1, I2, L, Ldot, hbar=1.0, step=FD_STEP):
    """-dE/dL by a central difference in L with the state integrals frozen."""
    h = step * L
    up = energy_from_integrals(I0, ImI1, I2, L + h, Ldot, hbar)
    down = energy_from_integrals(I0, ImI1, I2, L - h, Ldot, hbar)
    return -(up - down) / (2 * h)


def check_routes(operator_force, slope_force, rtol=ROUTE_RTOL, label="force"):
    if abs(operator_force - slope_force) > rtol * abs(operator_force):
        raise ConsistencyError(
            f"{label}: operator route {operator_force!r} vs -dE/dL route "
            f"{slope_force!r} differ beyond {rtol:g} relative")


def force_exact(state: SpectralState, L: float, Ldot: float, jt: JTable,
                hbar: float = 1.0, *, check: bool = True, populations=None) -> ForceBreakdown:
    """Force expectation of one evolved state, split against its source level.

    The adiabatic part is the stationary pressure ``(l pi)**2 / L**3`` of the
    level the state started in; the remainder is non-adiabatic.  Unless
    ``check`` is off, the operator route is compared with -dE/dL.
    """
    I0, I1, I2 = coefficient_integrals(state.coeffs, jt, populations)
    total = force_from_integrals(I0, I1.imag, L, Ldot, hbar)
    slope = energy_slope_force(I0, I1.imag, I2, L, Ldot, hbar)
    if check:
        check_routes(total, slope)
    adiabatic = PI ** 2 * state.source_level ** 2 / L ** 3
    raw = {"I0": I0, "ImI1": I1.imag, "I2": I2, "F_slope": slope}
    return ForceBreakdown(adiabatic, total - adiabatic, raw)


# --- second-order expansion path -------------------------------------------

def _offdiag_sums(level: int, nmax: int) -> tuple[float, float, float]:
    """Sums over n != level used by the expansion formulas, with 1/n**4 tails.

    Returns ``(sum n**2 J2(n,l)**2, sum n**2 l**2/(n**2-l**2)**3, tail)``.
    """
    n = np.arange(1, nmax + 1, dtype=float)
    n = n[n != level]
    l2 = float(level) ** 2
    _, J2, _ = _j_closed_forms(n, level)
    s_j2 = float(np.sum(n * n * J2 * J2))
    s_i1 = float(np.sum(n * n * l2 / (n * n - l2) ** 3))
    # n**2 J2**2 <= (64/pi**4) l**2/n**4/(1-q)**4 and the second summand
    # <= l**2/n**4/(1-q)**3, q = l**2/n**2; sum_{n>N} 1/n**4 < 1/(3 N**3)
    if nmax <= 2 * level:
        return s_j2, s_i1, math.inf
    q = l2 / nmax ** 2
    tail = (1 + 64 / PI ** 4) * l2 / (3.0 * nmax ** 3 * (1 - q) ** 4)
    return s_j2, s_i1, tail


def expansion_corrections(level: int, eps: float, tau=0.0, *, averaged: bool = True,
                          nmax: int = 20_000, hbar: float = 1.0) -> tuple[float, float]:
    """Second-order shift of I0 and first-order Im I1 for a wall started from ``level``.

    I0 - pi**2 l**2 = (pi eps / 2)**2 (sum_{n!=l} n**2 J2(n,l)**2 - l**2 J3(l,l))
    Im I1 = -eps (16/pi**2) sum_{n!=l} n**2 l**2/(n**2-l**2)**3 cos(pi**2 (l**2-n**2) tau / (2 hbar))

    With ``averaged`` the cosine is replaced by one.  The shift is returned
    on its own so that small velocities do not lose digits to cancellation.
    """
    _, _, J3ll = _j_closed_forms(level, level)
    s_j2, s_i1, tail = _offdiag_sums(level, nmax)
    if tail > 1e-10 * (abs(s_i1) + abs(s_j2)):
        raise TruncationError(f"expansion sums not converged at nmax={nmax}")
    l2 = float(level) ** 2
    dI0 = (PI * eps / 2) ** 2 * (s_j2 - l2 * float(J3ll))
    if averaged:
        ImI1 = -eps * 16 / PI ** 2 * s_i1
    else:
        n = np.arange(1, nmax + 1, dtype=float)
        n = n[n != level]
        phase = np.cos(0.5 * PI ** 2 * (l2 - n * n) * tau / hbar)
        ImI1 = -eps * 16 / PI ** 2 * float(np.sum(n * n * l2 / (n * n - l2) ** 3 * phase))
    return dI0, ImI1


def expansion_integrals(level: int, eps: float, tau=0.0, *, averaged: bool = True,
                        nmax: int = 20_000, hbar: float = 1.0) -> tuple[float, float]:
    """Second-order I0 and first-order Im I1, see :func:`expansion_corrections`."""
    dI0, ImI1 = expansion_corrections(level, eps, tau, averaged=averaged, nmax=nmax, hbar=hbar)
    return PI ** 2 * float(level) ** 2 + dI0, ImI1


def level_coefficient_exact(level: int, nmax: int = 10_000) -> tuple[float, float]:
    """Per-level non-adiabatic coefficient and an upper bound on its tail.

    (16/pi**2) sum_{m!=n} [m**2 n**2/(n**2-m**2)**3 + m**4 n**2/(m**2-n**2)**4]
    - (pi**2/4) (n**2/5 - 1/pi**2 + 3/(2 n**2 pi**2)), for hbar = 1.
    The bracket collapses to m**2 n**4/(m**2-n**2)**4, whose tail beyond
    ``nmax`` (>= 2n) is below (256/81) n**4 / (5 nmax**5).
    """
    n = float(level)
    if nmax < 2 * level:
        raise TruncationError(f"nmax={nmax} must be at least twice the level {level}")
    m = np.arange(1, nmax + 1, dtype=float)
    m = m[m != n]
    terms = m * m * n * n / (n * n - m * m) ** 3 + m ** 4 * n * n / (m * m - n * n) ** 4
    s = 16 / PI ** 2 * float(np.sum(terms))
    diag = PI ** 2 / 4 * (n * n / 5 - 1 / PI ** 2 + 3 / (2 * n * n * PI ** 4))
    tail = 16 / PI ** 2 * (256 / 81) * n ** 4 / (5 * nmax ** 5)
    return s - diag, tail


def nonadiabatic_coefficient_exact(model: OccupationModel, nmax: int = 10_000,
                                   hbar: float = 1.0, L0: float = 1.0) -> tuple[float, float]:
    """C' such that F_nonad = C' Ldot0**2 / L0 in the averaged regime.

    ``L0`` only fixes the energies entering finite-temperature weights.

    Returns:
        ``(C', tail_bound)``.

    Raises:
        TruncationError: if the tail exceeds 1e-6 |C'| or nmax is smaller
            than four times the highest occupied level.
    """
    top = model.highest_occupied(box_energy(np.arange(1, nmax + 1), L0))
    if nmax < 4 * top:
        raise TruncationError(f"nmax={nmax} must be >= 4 x highest occupied level {top}")
    weights = model.weights(box_energy(np.arange(1, top + 1), L0))
    total = 0.0
    tail = 0.0
    for level, f in zip(range(1, top + 1), weights):
        if f == 0:
            continue
        value, t = level_coefficient_exact(level, nmax)
        total += f * value
        tail += f * t
    total *= hbar ** 2
    tail *= hbar ** 2
    if tail > 1e-6 * abs(total):
        raise TruncationError(f"C' tail {tail:.3e} exceeds 1e-6 of |C'|={abs(total):.6g}")
    return total, tail


def expansion_force(level: int, schedule: WallSchedule, t: float, *,
                    averaged: bool = True, nmax: int = 20_000) -> ForceBreakdown:
    """Force of one level from the second-order expansion at time ``t``.

    With ``averaged`` the oscillating factor is one and, the averaged regime
    being t << L0/|Ldot0|, the non-adiabatic part is evaluated at L0 and
    Ldot0, i.e. it equals C' Ldot0**2 / L0 for this level.  Otherwise the
    instantaneous L(t), Ldot(t) and cosine factor are kept.
    """
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    tau = float(scaled_time(schedule, t))
    eps = gauge_strength(schedule)
    hbar = schedule.hbar
    dI0, ImI1 = expansion_corrections(level, eps, tau, averaged=averaged, nmax=nmax, hbar=hbar)
    I0 = PI ** 2 * level ** 2 + dI0
    adiabatic = PI ** 2 * level ** 2 / L ** 3
    if averaged:
        L0, v0 = schedule.L0, schedule.Ldot0
        nonad = dI0 / L0 ** 3 + hbar * v0 * ImI1 / L0 ** 2
    else:
        nonad = force_from_integrals(I0, ImI1, L, Ldot, hbar) - adiabatic
    _, J2ll, _ = j_integrals(level, level)
    E = energy_from_integrals(I0, ImI1, J2ll, L, Ldot, hbar)
    return ForceBreakdown(adiabatic, nonad, {"I0": I0, "ImI1": ImI1, "I2": J2ll, "E": E})


def diagonal_average_force(state: SpectralState, schedule: WallSchedule, t: float,
                           jt: JTable) -> ForceBreakdown:
    """Long-time average of the exact force in the averaged regime.

    Averaging over tau removes every cross term, so Im I1 averages to zero
    and only the conserved I0 is left; as in the averaged expansion the
    non-adiabatic part is taken at L0.
    """
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    p = np.abs(state.coeffs) ** 2
    n = np.arange(1, state.nmax + 1)
    I0 = PI ** 2 * float(np.sum(p * n * n))
    I2 = float(np.sum(p * np.diag(jt.J2)[:state.nmax]))
    ref = PI ** 2 * state.source_level ** 2
    nonad = (I0 - ref) / schedule.L0 ** 3
    E = energy_from_integrals(I0, 0.0, I2, L, Ldot, schedule.hbar)
    return ForceBreakdown(ref / L ** 3, nonad, {"I0": I0, "ImI1": 0.0, "I2": I2, "E": E})


# --- gas-level evaluation ----------------------------------------------------

def _occupied_levels(model: OccupationModel, L0: float, nmax: int, tol: float = 1e-14):
    n = np.arange(1, nmax + 1)
    w = model.weights(box_energy(n, L0))
    keep = w > tol
    if not model.is_zero_temperature and w[-1] > tol:
        raise TruncationError(f"occupation still {w[-1]:.3e} at level nmax={nmax}")
    return n[keep], w[keep]


def required_basis(model: OccupationModel, L0: float, nmax: int) -> int:
    top = model.highest_occupied(box_energy(np.arange(1, 4 * nmax + 1), L0))
    return max(nmax, 4 * top)


def gas_force(model: OccupationModel, schedule: WallSchedule, t: float, *,
              nmax: int = DEFAULT_NMAX, mode: str = "instantaneous",
              check: bool = True) -> tuple[float, ForceBreakdown]:
    """Energy and force of the whole gas at time ``t``.

    Each occupied initial level is evolved separately and weighted by its
    occupation.  ``mode`` is ``"instantaneous"`` (exact coefficients) or
    ``"time-averaged"`` (second-order expansion with the oscillating factor
    set to one) or ``"cycle-averaged"`` (long-time average of the exact
    force, see :func:`diagonal_average_force`).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if schedule.kind == "sqrt-law":
        raise DomainError("the exact hard-wall engine needs a fixed or linear wall")
    nb = required_basis(model, schedule.L0, nmax)
    levels, weights = _occupied_levels(model, schedule.L0, nb)
    L, Ldot, _ = (float(v) for v in eval_length(schedule, t))
    hbar = schedule.hbar
    E = ad = nonad = I0s = Im1s = I2s = slope = 0.0
    jt = j_table(nb)
    tau = float(scaled_time(schedule, t))
    for level, f in zip(levels, weights):
        if mode == "time-averaged":
            fb = expansion_force(int(level), schedule, t, averaged=True)
            e = fb.raw["E"]
        else:
            state = initial_coefficients(int(level), schedule, nb)
            if mode == "cycle-averaged":
                fb = diagonal_average_force(state, schedule, t, jt)
                e = fb.raw["E"]
            else:
                fb = force_exact(propagate(state, tau, hbar), L, Ldot, jt, hbar, check=check,
                                 populations=np.abs(state.coeffs) ** 2)
                e = energy_from_integrals(fb.raw["I0"], fb.raw["ImI1"], fb.raw["I2"], L, Ldot, hbar)
                slope += f * fb.raw["F_slope"]
        E += f * e
        ad += f * fb.adiabatic
        nonad += f * fb.non_adiabatic
        I0s += f * fb.raw["I0"]
        Im1s += f * fb.raw["ImI1"]
        I2s += f * fb.raw["I2"]
    raw = {"I0": I0s, "ImI1": Im1s, "I2": I2s}
    if mode == "instantaneous":
        raw["F_slope"] = slope
    return E, ForceBreakdown(ad, nonad, raw)


@dataclass(frozen=True)
class ExactTrajectory:
    """Energies and forces of one initial level sampled along a linear wall."""

    schedule: WallSchedule
    state: SpectralState
    times: np.ndarray
    L: np.ndarray
    E: np.ndarray
    I0: np.ndarray
    ImI1: np.ndarray
    I2: np.ndarray
    F_ad: np.ndarray
    F_nonad: np.ndarray

    @property
    def F_total(self) -> np.ndarray:
        return self.F_ad + self.F_nonad

    def coefficients_at(self, t: float) -> np.ndarray:
        tau = float(scaled_time(self.schedule, t))
        return propagate(self.state.coeffs, tau, self.schedule.hbar)


def trajectory(level: int, schedule: WallSchedule, times, nmax: int = DEFAULT_NMAX) -> ExactTrajectory:
    """Sample one transitionless-state expansion at the given times."""
    times = np.asarray(times, dtype=float)
    state = initial_coefficients(level, schedule, nmax)
    jt = j_table(nmax)
    L, Ldot, _ = eval_length(schedule, times)
    tau = scaled_time(schedule, times)
    cs = np.asarray(state.coeffs) * transitionless_phases(nmax, tau, schedule.hbar)
    n = np.arange(1, nmax + 1)
    # populations are conserved exactly, so I0 comes from the initial moduli
    I0 = np.full(len(np.atleast_1d(times)), PI ** 2 * float(np.sum(np.abs(state.coeffs) ** 2 * n * n)))
    kernel = jt.J1.T * (n * PI)[None, :]
    I1 = np.einsum("ti,ij,tj->t", np.conj(cs), kernel, cs)
    I2 = np.real(np.einsum("ti,ij,tj->t", np.conj(cs), jt.J2, cs))
    hbar = schedule.hbar
    E = energy_from_integrals(I0, I1.imag, I2, L, Ldot, hbar)
    total = force_from_integrals(I0, I1.imag, L, Ldot, hbar)
    ad = PI ** 2 * level ** 2 / L ** 3
    return ExactTrajectory(schedule, state, times, L, E, I0, I1.imag, I2, ad, total - ad)
