"""Wall schedules, scaled time, the box eigensystem and level occupations.

Units follow the hbar**2/m = 1 convention: box energies carry no hbar, while
hbar survives in the Schroedinger time derivative and in the gauge phase.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, TruncationError

DEFAULT_NMAX = 64
CONVERGENCE_RTOL = 1e-8

ScheduleKind = Literal["fixed", "linear", "sqrt-law"]


class TimeWindowWarning(UserWarning):
    """Evaluation time lies outside hbar/dE << t << L/|Ldot|."""


@dataclass(frozen=True)
class WallSchedule:
    """Cavity length law L(t).

    All three kinds are stored through the quadratic ``L**2 = a t**2 + b t + c``
    so that ``L**3 * Lddot = -B**2 / 4`` holds with ``B**2 = b**2 - 4 a c``.
    Build instances with :meth:`fixed`, :meth:`linear` or :meth:`sqrt_law`.
    """

    kind: ScheduleKind
    L0: float
    Ldot0: float
    a: float
    b: float
    c: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.L0 > 0:
            raise DomainError(f"initial length must be positive, got L0={self.L0}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def fixed(cls, L0: float, hbar: float = 1.0) -> "WallSchedule":
        return cls("fixed", float(L0), 0.0, 0.0, 0.0, float(L0) ** 2, hbar)

    @classmethod
    def linear(cls, L0: float, Ldot0: float, hbar: float = 1.0) -> "WallSchedule":
        L0, v = float(L0), float(Ldot0)
        return cls("linear", L0, v, v * v, 2.0 * L0 * v, L0 * L0, hbar)

    @classmethod
    def sqrt_law(cls, a: float, b: float, c: float, hbar: float = 1.0) -> "WallSchedule":
        if not c > 0:
            raise DomainError(f"sqrt-law needs c = L0**2 > 0, got c={c}")
        L0 = math.sqrt(c)
        return cls("sqrt-law", L0, b / (2.0 * L0), float(a), float(b), float(c), hbar)

    @property
    def B_squared(self) -> float:
        """The invariant ``b**2 - 4 a c`` (zero for fixed and linear walls)."""
        if self.kind != "sqrt-law":
            return 0.0
        return self.b * self.b - 4.0 * self.a * self.c

    @property
    def hbar_B(self) -> complex:
        """hbar*B, purely imaginary when B**2 < 0 (confining effective trap)."""
        B2 = self.B_squared
        if B2 >= 0:
            return self.hbar * math.sqrt(B2)
        return 1j * self.hbar * math.sqrt(-B2)

    def zero_crossing(self) -> float | None:
        """Earliest t > 0 with L(t) = 0, or None if the cavity never closes."""
        if self.kind == "fixed":
            return None
        if self.kind == "linear":
            return -self.L0 / self.Ldot0 if self.Ldot0 < 0 else None
        a, b, c = self.a, self.b, self.c
        if a == 0:
            return -c / b if b < 0 else None
        disc = b * b - 4 * a * c
        if disc < 0:
            return None
        sq = math.sqrt(disc)
        roots = [r for r in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)) if r > 0]
        return min(roots) if roots else None

    def check_time(self, t) -> None:
        t_max = np.max(np.atleast_1d(t))
        if np.min(np.atleast_1d(t)) < 0:
            raise DomainError("schedules are defined for t >= 0 only")
        tz = self.zero_crossing()
        if tz is not None and t_max >= tz:
            raise DomainError(
                f"L(t) reaches zero at t={tz:.12g}; requested t={t_max:.12g}")


def eval_length(schedule: WallSchedule, t):
    """Return ``(L, Ldot, Lddot)`` at time(s) ``t``.

    Extended-precision input (``np.longdouble``) is evaluated in that
    precision; anything else in float64.

    Raises:
        DomainError: if L(s) hits zero for some s in [0, t].
    """
    schedule.check_time(t)
    t = np.asarray(t)
    t = t.astype(np.result_type(t.dtype, np.float64))
    s = schedule
    if s.kind == "fixed":
        L = np.full_like(t, s.L0)
        return L, np.zeros_like(t), np.zeros_like(t)
    if s.kind == "linear":
        L = s.L0 + s.Ldot0 * t
        return L, np.full_like(t, s.Ldot0), np.zeros_like(t)
    L2 = (s.a * t + s.b) * t + s.c
    L = np.sqrt(L2)
    Ldot = (2 * s.a * t + s.b) / (2 * L)
    Lddot = -s.B_squared / (4 * L ** 3)
    return L, Ldot, Lddot


def scaled_time(schedule: WallSchedule, t):
    """tau(t) = integral_0^t ds / L(s)**2, in closed form for every kind.

    For the quadratic law the antiderivative is written as
    ``(2/B) artanh(B t / (2c + b t))`` which stays accurate as B -> 0 and
    continues to ``(2/|B|) arctan(...)`` when B**2 < 0.
    """
    schedule.check_time(t)
    t = np.asarray(t, dtype=float)
    s = schedule
    if s.kind == "fixed":
        return t / s.L0 ** 2
    if s.kind == "linear":
        return t / (s.L0 * (s.L0 + s.Ldot0 * t))
    den = 2 * s.c + s.b * t
    B2 = s.B_squared
    if B2 == 0:
        return 2 * t / den
    if B2 > 0:
        B = math.sqrt(B2)
        x = B * t / den
        return (2 / B) * _artanh_over_x(x) * x
    beta = math.sqrt(-B2)
    return (2 / beta) * np.arctan2(beta * t, den)


def _artanh_over_x(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 0.5, x)
    x2 = x * x
    return np.where(small, 1 + x2 / 3 + x2 * x2 / 5, np.arctanh(safe) / safe)


def box_energy(n, L):
    """E_n = n**2 pi**2 / (2 L**2) for the hard-wall box."""
    n = np.asarray(n)
    if np.any(n < 1):
        raise ValueError(f"box levels start at n=1, got {n}")
    return (n * np.pi) ** 2 / (2.0 * np.asarray(L, dtype=float) ** 2)


def box_eigensystem(n: int, L: float, hbar: float = 1.0) -> tuple[float, Callable]:
    """Energy and normalized profile ``sqrt(2/L) sin(n pi x / L)`` of level n."""
    if int(n) != n or n < 1:
        raise ValueError(f"box levels start at n=1, got {n}")
    if not L > 0:
        raise DomainError(f"box length must be positive, got {L}")
    k = n * math.pi / L
    norm = math.sqrt(2.0 / L)

    def profile(x):
        return norm * np.sin(k * np.asarray(x, dtype=float))

    return float(box_energy(n, L)), profile


@dataclass(frozen=True)
class OccupationModel:
    """Single-particle level occupation.

    Zero temperature fills levels 1..N by index; finite temperature uses
    Fermi-Dirac weights in the energies handed to :meth:`weights`.
    """

    mode: Literal["zero-temperature", "finite-temperature"]
    N: int = 1
    beta: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        if self.mode == "zero-temperature":
            if int(self.N) != self.N or self.N < 1:
                raise ValueError(f"particle count must be a positive integer, got {self.N}")
        elif self.mode == "finite-temperature":
            if not self.beta > 0:
                raise ValueError(f"inverse temperature must be positive, got {self.beta}")
        else:
            raise ValueError(f"unknown occupation mode {self.mode!r}")

    @classmethod
    def zero_temperature(cls, N: int) -> "OccupationModel":
        return cls("zero-temperature", N=int(N))

    @classmethod
    def fermi_dirac(cls, beta: float, mu: float) -> "OccupationModel":
        return cls("finite-temperature", beta=float(beta), mu=float(mu))

    @property
    def is_zero_temperature(self) -> bool:
        return self.mode == "zero-temperature"

    def weights(self, energies, first_index: int = 1) -> np.ndarray:
        """Weights for levels listed in ascending order starting at ``first_index``."""
        energies = np.asarray(energies, dtype=float)
        if self.is_zero_temperature:
            idx = first_index + np.arange(energies.size)
            return (idx <= self.N).astype(float)
        return fermi_dirac(energies, self.beta, self.mu)

    def highest_occupied(self, energies, first_index: int = 1, tol: float = 1e-16) -> int:
        """Largest level index whose weight exceeds ``tol``."""
        if self.is_zero_temperature:
            return self.N
        w = self.weights(energies, first_index)
        occupied = np.nonzero(w > tol)[0]
        return first_index + int(occupied[-1]) if occupied.size else first_index


def fermi_dirac(E, beta: float, mu: float):
    """1 / (exp(beta (E - mu)) + 1), written to avoid overflow."""
    x = beta * (np.asarray(E, dtype=float) - mu)
    return 0.5 * (1.0 - np.tanh(0.5 * x))


def occupation_weight(model: OccupationModel, E: float, n: int | None = None) -> float:
    """Occupation of one level; zero temperature needs the level index ``n``."""
    if model.is_zero_temperature:
        if n is None:
            raise ValueError("zero-temperature occupation is defined by level index")
        return 1.0 if n <= model.N else 0.0
    return float(fermi_dirac(E, model.beta, model.mu))


def box_weights(model: OccupationModel, L: float, nmax: int) -> np.ndarray:
    n = np.arange(1, nmax + 1)
    return model.weights(box_energy(n, L))


def adiabatic_force(model: OccupationModel, L: float, nmax: int = DEFAULT_NMAX) -> float:
    """F_ad = sum_n (n pi)**2 / L**3 f_n, with a doubling convergence check.

    Raises:
        TruncationError: if zero-temperature filling exceeds ``nmax`` or the
            finite-temperature sum still moves by more than 1e-8 relative
            after doubling ``nmax``.
    """
    if model.is_zero_temperature:
        if model.N > nmax:
            raise TruncationError(f"N={model.N} levels do not fit in nmax={nmax}")
        n = np.arange(1, model.N + 1)
        return float(np.sum((n * np.pi) ** 2)) / L ** 3

    def partial(m):
        n = np.arange(1, m + 1)
        return float(np.sum((n * np.pi) ** 2 * box_weights(model, L, m))) / L ** 3

    coarse, fine = partial(nmax), partial(2 * nmax)
    if abs(fine - coarse) > CONVERGENCE_RTOL * abs(fine):
        raise TruncationError(
            f"adiabatic force not converged at nmax={nmax}: "
            f"{coarse:.12g} vs {fine:.12g} at 2*nmax")
    return fine


def time_window(schedule: WallSchedule, model: OccupationModel,
                nmax: int = DEFAULT_NMAX) -> tuple[float, float]:
    """Interval (10 hbar/dE, 0.1 L0/|Ldot0|) in which oscillations average out.

    dE is the box level spacing above the highest occupied level at L0.
    """
    L0 = schedule.L0
    top = model.highest_occupied(box_energy(np.arange(1, nmax + 1), L0))
    dE = float(box_energy(top + 1, L0) - box_energy(top, L0))
    lo = 10.0 * schedule.hbar / dE
    v = abs(schedule.Ldot0)
    hi = math.inf if v == 0 else 0.1 * L0 / v
    return lo, hi


def check_time_window(schedule, model, t, nmax=DEFAULT_NMAX) -> bool:
    """Warn with :class:`TimeWindowWarning` when ``t`` is outside the window."""
    lo, hi = time_window(schedule, model, nmax)
    inside = lo < t < hi
    if not inside:
        warnings.warn(f"t={t:.6g} outside time window ({lo:.6g}, {hi:.6g})",
                      TimeWindowWarning, stacklevel=2)
    return inside


@dataclass(frozen=True)
class SpectralState:
    """Complex coefficients of a wavefunction over a named basis."""

    basis: Literal["box-sine", "kummer", "hermite"]
    coeffs: np.ndarray
    source_level: int
    truncation_tol: float = 1e-6

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        norm = self.norm
        if norm > 1 + 1e-10:
            raise ValueError(f"coefficient norm {norm:.15g} exceeds 1")
        if norm < 1 - self.truncation_tol:
            raise TruncationError(
                f"basis of size {c.size} captures only {norm:.12g} of the norm")

    @property
    def nmax(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True)
class ForceBreakdown:
    """Wall force split into adiabatic and non-adiabatic parts.

    ``adiabatic`` is the pressure of the initially occupied stationary levels
    at the instantaneous length; everything velocity-induced is in
    ``non_adiabatic``.  ``raw`` keeps the integrals the numbers came from.
    """

    adiabatic: float
    non_adiabatic: float
    raw: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.adiabatic + self.non_adiabatic

    def as_dict(self) -> dict:
        return {"F_ad": self.adiabatic, "F_nonad": self.non_adiabatic,
                "F_total": self.total, **self.raw}
