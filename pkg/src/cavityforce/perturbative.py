"""Perturbative force from the von Neumann equation in the adiabatic basis.

The density matrix is expanded as ``f + g1 (Ldot0/L0) + g2 (Ldot0/L0)**2``
with all level energies frozen at L0.  Sums over level pairs only involve
pairs with at least one occupied index; the remaining tail is bounded
analytically using the 1/m**4 decay of every summand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationError
from .schedule import (ForceBreakdown, OccupationModel, WallSchedule,
                       box_energy, eval_length)

PI = math.pi
OCCUPIED_TOL = 1e-16
DEFAULT_PAIR_NMAX = 4096


def gamma(l, m):
    """Adiabatic coupling (-1)**(l+m+1) 2 l m / (l**2 - m**2), zero on the diagonal."""
    l = np.asarray(l)
    m = np.asarray(m)
    if np.any(l < 1) or np.any(m < 1):
        raise ValueError("gamma needs level indices >= 1")
    diag = l == m
    sign = np.where((l + m) % 2 == 0, -1.0, 1.0)
    d = np.where(diag, 1.0, l.astype(float) ** 2 - m.astype(float) ** 2)
    out = np.where(diag, 0.0, sign * 2.0 * l * m / d)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GammaMatrix:
    """gamma(l, m) for l, m in 1..nmax; entry ``[l-1, m-1]``."""

    nmax: int
    entries: np.ndarray

    @classmethod
    def build(cls, nmax: int) -> "GammaMatrix":
        idx = np.arange(1, nmax + 1)
        g = gamma(idx[:, None], idx[None, :])
        g.setflags(write=False)
        return cls(nmax, g)


def _frozen_energies(schedule: WallSchedule, n):
    return box_energy(n, schedule.L0)


def _weights(model: OccupationModel, schedule: WallSchedule, n):
    n = np.asarray(n)
    idx = np.arange(1, int(n.max()) + 1)
    w = model.weights(box_energy(idx, schedule.L0))
    return w[n - 1]


def g1_element(n: int, m: int, t: float, schedule: WallSchedule,
               model: OccupationModel) -> complex:
    """First-order density correction solving dg/dt = (E_n-E_m)/(i hbar) g + gamma_mn (f_n - f_m).

    g1_nm = -i hbar gamma_mn (f_n - f_m) / (E_n - E_m) (1 - exp((E_n - E_m) t / (i hbar))).
    """
    if n == m:
        return 0j
    hbar = schedule.hbar
    En, Em = _frozen_energies(schedule, np.array([n, m]))
    fn, fm = _weights(model, schedule, np.array([n, m]))
    dE = En - Em
    return complex(-1j * hbar * gamma(m, n) * (fn - fm) / dE
                   * (1 - np.exp(-1j * dE * t / hbar)))


def g1_matrix(nmax: int, t: float, schedule: WallSchedule, model: OccupationModel) -> np.ndarray:
    """All g1_nm for n, m <= nmax; entry ``[n-1, m-1]``."""
    hbar = schedule.hbar
    idx = np.arange(1, nmax + 1)
    E = _frozen_energies(schedule, idx)
    f = _weights(model, schedule, idx)
    dE = E[:, None] - E[None, :]
    safe = np.where(dE == 0, 1.0, dE)
    g = (-1j * hbar * gamma(idx[None, :], idx[:, None]) * (f[:, None] - f[None, :]) / safe
         * (1 - np.exp(-1j * dE * t / hbar)))
    np.fill_diagonal(g, 0)
    return g


def _pair_grid(model: OccupationModel, schedule: WallSchedule, nmax: int):
    """Index pairs (n, m), n != m, with at least one occupied level."""
    idx = np.arange(1, nmax + 1)
    f = _weights(model, schedule, idx)
    top = int(np.nonzero(f > OCCUPIED_TOL)[0][-1]) + 1 if np.any(f > OCCUPIED_TOL) else 1
    if top > nmax // 2:
        raise TruncationError(f"occupied levels reach {top}; nmax={nmax} is too small")
    occ = idx[:top]
    n = np.concatenate([np.repeat(occ, nmax), np.repeat(idx[top:], top)])
    m = np.concatenate([np.tile(idx, top), np.tile(occ, nmax - top)])
    keep = n != m
    return n[keep], m[keep], f, top


def _tail_sum(model: OccupationModel, schedule: WallSchedule, nmax: int, power: int) -> float:
    """Bound on sum_{n occupied} f_n n**power sum_{m > nmax} (shape factor)/m**4."""
    idx = np.arange(1, nmax + 1)
    f = _weights(model, schedule, idx)
    occ = f > OCCUPIED_TOL
    n = idx[occ].astype(float)
    q = (n / nmax) ** 2
    return float(np.sum(f[occ] * n ** power * (1 + q) / (1 - q) ** 4)) / (3.0 * nmax ** 3)


def g2_diagonal(n: int, t: float, schedule: WallSchedule, model: OccupationModel,
                nmax: int = DEFAULT_PAIR_NMAX) -> tuple[float, float]:
    """Second-order diagonal correction and a bound on its truncated tail.

    g2_nn = -2 sum_l gamma_nl**2 (f_n - f_l) (hbar/(E_n - E_l))**2 (1 - cos((E_n - E_l) t / hbar)).
    """
    hbar = schedule.hbar
    l = np.arange(1, nmax + 1)
    l = l[l != n]
    E = _frozen_energies(schedule, np.concatenate([[n], l]))
    f = _weights(model, schedule, np.concatenate([[n], l]))
    dE = E[0] - E[1:]
    terms = gamma(n, l) ** 2 * (f[0] - f[1:]) * (hbar / dE) ** 2 * (1 - np.cos(dE * t / hbar))
    value = -2.0 * float(np.sum(terms))
    # gamma**2 (hbar/dE)**2 <= 16 n**2 hbar**2 L0**4 / (pi**4 l**4) for l >= 2n
    tail = 2 * 2 * 16 * n * n * (hbar * schedule.L0 ** 2 / PI ** 2) ** 2 / (3.0 * nmax ** 3)
    return value, tail


def density_matrix(t: float, schedule: WallSchedule, model: OccupationModel,
                   nmax: int = 64) -> np.ndarray:
    """rho = f + g1 (Ldot0/L0) + diag(g2) (Ldot0/L0)**2 truncated to nmax levels."""
    idx = np.arange(1, nmax + 1)
    f = _weights(model, schedule, idx)
    r = schedule.Ldot0 / schedule.L0
    g2 = np.array([g2_diagonal(int(n), t, schedule, model, nmax)[0] for n in idx])
    return np.diag(f).astype(complex) + r * g1_matrix(nmax, t, schedule, model) + r * r * np.diag(g2)


def force_matrix_element(m: int, n: int, L: float, Ldot: float, hbar: float = 1.0) -> complex:
    """<m|F|n> = (n pi)**2 / L**3 delta_mn + i hbar Ldot gamma_mn / L**2."""
    diag = (n * PI) ** 2 / L ** 3 if m == n else 0.0
    return complex(diag + 1j * hbar * Ldot * gamma(m, n) / L ** 2)


def coefficient_sum(model: OccupationModel, nmax: int = 10_000, L0: float = 1.0) -> tuple[float, float]:
    """sum_{n>m} m**2 n**2 (f_n - f_m) / (n**2 - m**2)**3 and a tail bound.

    Finite-temperature weights are evaluated at the box energies for ``L0``.
    """
    idx = np.arange(1, nmax + 1)
    f = model.weights(box_energy(idx, L0))
    occ = np.nonzero(f > OCCUPIED_TOL)[0]
    top = int(occ[-1]) + 1 if occ.size else 1
    if 2 * top > nmax:
        raise TruncationError(f"occupied levels reach {top}; nmax={nmax} is too small")
    total = 0.0
    for m in range(1, top + 1):
        n = idx[m:].astype(float)
        total += float(np.sum(m * m * n * n * (f[n.astype(int) - 1] - f[m - 1])
                              / (n * n - m * m) ** 3))
    mm = np.arange(1, top + 1, dtype=float)
    q = (mm / nmax) ** 2
    tail = float(np.sum(f[:top] * mm * mm / (1 - q) ** 3)) / (3.0 * nmax ** 3)
    return total, tail


def coefficient_C(model: OccupationModel, nmax: int = 10_000, hbar: float = 1.0,
                  L0: float = 1.0) -> tuple[float, float]:
    """C = (48 hbar**2 / pi**2) sum_{n>m} m**2 n**2 (f_n - f_m)/(n**2 - m**2)**3.

    Returns:
        ``(C, tail_bound)``.

    Raises:
        TruncationError: if the tail bound exceeds 1e-6 |C|.
    """
    s, tail = coefficient_sum(model, nmax, L0)
    scale = 48 * hbar ** 2 / PI ** 2
    C, tail = scale * s, scale * tail
    if tail > 1e-6 * abs(C):
        raise TruncationError(f"C tail {tail:.3e} exceeds 1e-6 of |C|={abs(C):.6g}")
    return C, tail


@dataclass(frozen=True)
class PerturbativeForce:
    """S1, S2, S3 and their reduced forms at one time.

    ``S2``/``S3`` are the instantaneous sums built from g1/g2.  ``S2_avg``
    and ``S3_avg`` replace the oscillating factors by their means;
    ``S2_reduced``/``S3_reduced`` use the reduced prefactors 16 and 32, whose
    sum is C Ldot0**2 / L0.
    """

    S1: float
    S2: float
    S3: float
    S2_avg: float
    S3_avg: float
    S2_reduced: float
    S3_reduced: float
    C: float
    tail: float
    extras: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.S1 + self.S2 + self.S3

    def breakdown(self, mode: str = "instantaneous") -> ForceBreakdown:
        if mode == "instantaneous":
            nonad = self.S2 + self.S3
        elif mode == "time-averaged":
            nonad = self.S2_reduced + self.S3_reduced
        elif mode == "cycle-averaged":
            nonad = self.S2_avg + self.S3_avg
        else:
            raise ValueError(f"unknown mode {mode!r}")
        raw = {"S1": self.S1, "S2": self.S2, "S3": self.S3, "S2_avg": self.S2_avg,
               "S3_avg": self.S3_avg, "S2_reduced": self.S2_reduced,
               "S3_reduced": self.S3_reduced, "C": self.C}
        return ForceBreakdown(self.S1, nonad, raw)


def perturbative_force(model: OccupationModel, schedule: WallSchedule, t: float,
                       nmax: int = DEFAULT_PAIR_NMAX, *, s1_length: str = "current",
                       rtol: float = 1e-6) -> PerturbativeForce:
    """Force expectation Tr(rho F) = S1 + S2 + S3 at time ``t``.

    ``s1_length`` selects L(t) (``"current"``) or L0 (``"initial"``) in S1.

    Raises:
        TruncationError: if the tail bound exceeds ``rtol`` |S2 + S3|.
    """
    hbar = schedule.hbar
    L0, v0 = schedule.L0, schedule.Ldot0
    L, Ldot, _ = (float(x) for x in eval_length(schedule, t))
    idx = np.arange(1, nmax + 1)
    f_all = _weights(model, schedule, idx)
    L_s1 = L if s1_length == "current" else L0
    S1 = float(np.sum((idx * PI) ** 2 * f_all)) / L_s1 ** 3

    n, m, f, top = _pair_grid(model, schedule, nmax)
    E = _frozen_energies(schedule, idx)
    dE = E[n - 1] - E[m - 1]
    df = f[n - 1] - f[m - 1]
    g2 = gamma(n, m) ** 2
    phase = 1 - np.exp(-1j * dE * t / hbar)
    r = v0 / L0
    # S2 = r sum g1_nm F_mn, with g1_nm F_mn = hbar**2 gamma**2 (f_n-f_m)/dE (1-e) Ldot/L**2
    S2 = r * hbar ** 2 * Ldot / L ** 2 * float(np.real(np.sum(g2 * df / dE * phase)))
    S2_mean = r * hbar ** 2 * Ldot / L ** 2 * float(np.sum(g2 * df / dE))
    # S3 = r**2 sum_n g2_nn (n pi)**2/L**3, g2_nn from the same ordered pairs
    w = -2 * g2 * df * (hbar / dE) ** 2
    S3 = r * r * PI ** 2 / L ** 3 * float(np.sum(n * n * w * np.real(phase)))
    S3_mean = r * r * PI ** 2 / L ** 3 * float(np.sum(n * n * w))

    s, s_tail = coefficient_sum(model, max(nmax, 4 * top), L0)
    base = hbar ** 2 * v0 ** 2 / L0 / PI ** 2
    S2_red, S3_red = 16 * base * s, 32 * base * s
    C = 48 * hbar ** 2 / PI ** 2 * s

    scale = max(1.0, (L0 / L) ** 3)
    tail = scale * hbar ** 2 * v0 ** 2 / L0 * (
        2 * 16 / PI ** 2 * _tail_sum(model, schedule, nmax, 2)
        + 2 * 64 / PI ** 2 * _tail_sum(model, schedule, nmax, 2))
    if v0 != 0 and tail > rtol * abs(S2_mean + S3_mean):
        raise TruncationError(
            f"perturbative tail {tail:.3e} exceeds {rtol:g} of |S2+S3|; raise nmax={nmax}")
    return PerturbativeForce(S1, S2, S3, S2_mean, S3_mean, S2_red, S3_red, C, tail,
                             {"top": top, "nmax": nmax})
