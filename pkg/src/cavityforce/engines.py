"""Uniform per-time evaluation of every engine, as rows of plain numbers."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import hardwall, oracle, perturbative, softwall, sqrtlaw
from .errors import DomainError
from .schedule import (DEFAULT_NMAX, OccupationModel, TimeWindowWarning, WallSchedule,
                       box_energy, eval_length, time_window)

BOX_ENGINES = ("exact", "perturbative", "sqrtlaw", "oracle")
TRAP_ENGINES = ("softwall", "oracle")
ENGINES = ("exact", "perturbative", "sqrtlaw", "softwall", "oracle")
MODES = ("instantaneous", "time-averaged", "cycle-averaged")
WEIGHT_TOL = 1e-14


@dataclass(frozen=True)
class Scenario:
    """Everything an engine needs besides the time grid.

    ``level`` pins a single initial level (weight one) and overrides the
    occupation model.  Box levels count from 1, trap levels from 0.
    """

    schedule: WallSchedule
    occupation: OccupationModel
    confinement: str = "box"
    level: int | None = None
    nmax: int = DEFAULT_NMAX
    mode: str = "instantaneous"
    oracle_points: int = oracle.DEFAULT_POINTS
    oracle_dt: float = oracle.DEFAULT_DT


def level_weights(sc: Scenario) -> list[tuple[int, float]]:
    """Initial levels and their occupations."""
    if sc.level is not None:
        return [(int(sc.level), 1.0)]
    first = 1 if sc.confinement == "box" else 0
    size = 4 * sc.nmax
    idx = np.arange(first, first + size)
    if sc.confinement == "box":
        energies = box_energy(idx, sc.schedule.L0)
    else:
        energies = (idx + 0.5) / sc.schedule.L0 ** 2
    w = sc.occupation.weights(energies, first_index=first)
    if w[-1] > WEIGHT_TOL:
        raise DomainError(f"occupation not negligible at level {idx[-1]}; raise nmax")
    return [(int(n), float(f)) for n, f in zip(idx, w) if f > WEIGHT_TOL]


def _row(engine, t, L, Ldot, E, fb):
    row = {"engine": engine, "t": float(t), "L": float(L), "Ldot": float(Ldot), "E": float(E),
           "F_ad": float(fb.adiabatic), "F_nonad": float(fb.non_adiabatic),
           "F_total": float(fb.total)}
    for k, v in fb.raw.items():
        if k in ("E",):
            continue
        row[k] = float(v)
    return row


def _accumulate(parts):
    """Weighted sum of (weight, E, ForceBreakdown) tuples."""
    E = ad = nonad = 0.0
    raw = {}
    for f, e, fb in parts:
        E += f * e
        ad += f * fb.adiabatic
        nonad += f * fb.non_adiabatic
        for k, v in fb.raw.items():
            raw[k] = raw.get(k, 0.0) + f * v
    return E, hardwall.ForceBreakdown(ad, nonad, raw)


def run_exact(sc: Scenario, times):
    if sc.confinement != "box":
        raise DomainError("the exact engine models the hard-wall box")
    rows = []
    if sc.level is None:
        for t in times:
            L, Ldot, _ = eval_length(sc.schedule, t)
            E, fb = hardwall.gas_force(sc.occupation, sc.schedule, t, nmax=sc.nmax, mode=sc.mode)
            rows.append(_row("exact", t, L, Ldot, E, fb))
        return rows
    jt = hardwall.j_table(sc.nmax)
    state = hardwall.initial_coefficients(sc.level, sc.schedule, sc.nmax)
    for t in times:
        L, Ldot, _ = (float(v) for v in eval_length(sc.schedule, t))
        if sc.mode == "time-averaged":
            fb = hardwall.expansion_force(sc.level, sc.schedule, t, averaged=True)
            E = fb.raw["E"]
        elif sc.mode == "cycle-averaged":
            fb = hardwall.diagonal_average_force(state, sc.schedule, t, jt)
            E = fb.raw["E"]
        else:
            tau = float(hardwall.scaled_time(sc.schedule, t))
            fb = hardwall.force_exact(hardwall.propagate(state, tau, sc.schedule.hbar), L, Ldot, jt,
                                      sc.schedule.hbar, populations=np.abs(state.coeffs) ** 2)
            E = hardwall.energy_from_integrals(fb.raw["I0"], fb.raw["ImI1"], fb.raw["I2"], L, Ldot,
                                               sc.schedule.hbar)
        rows.append(_row("exact", t, L, Ldot, E, fb))
    return rows


def run_perturbative(sc: Scenario, times):
    if sc.confinement != "box":
        raise DomainError("the perturbative engine models the hard-wall box")
    if sc.schedule.kind == "sqrt-law":
        raise DomainError("the perturbative engine assumes a constant wall velocity")
    model = sc.occupation if sc.level is None else _single_level_model(sc.level)
    nmax = max(sc.nmax, perturbative.DEFAULT_PAIR_NMAX)
    rows = []
    for t in times:
        L, Ldot, _ = (float(v) for v in eval_length(sc.schedule, t))
        pf = perturbative.perturbative_force(model, sc.schedule, t, nmax)
        fb = pf.breakdown(sc.mode)
        s3 = {"instantaneous": pf.S3, "time-averaged": pf.S3_reduced,
              "cycle-averaged": pf.S3_avg}[sc.mode]
        E = (pf.S1 + s3) * L / 2
        rows.append(_row("perturbative", t, L, Ldot, E, fb))
    return rows


def _single_level_model(level: int) -> OccupationModel:
    if level != 1:
        raise DomainError("the perturbative engine fills levels from the bottom; "
                          "a single pinned level must be level 1")
    return OccupationModel.zero_temperature(1)


def run_sqrtlaw(sc: Scenario, times):
    if sc.confinement != "box":
        raise DomainError("the sqrt-law engine models the hard-wall box")
    basis = sqrtlaw.basis_for_schedule(sc.schedule, sc.nmax)
    states = [(f, sqrtlaw.sqrtlaw_coefficients(n, sc.schedule, basis)) for n, f in level_weights(sc)]
    rows = []
    for t in times:
        L, Ldot, _ = eval_length(sc.schedule, t)
        parts = [(f,) + sqrtlaw.sqrtlaw_force(st, sc.schedule, basis, t, mode=sc.mode)
                 for f, st in states]
        E, fb = _accumulate(parts)
        rows.append(_row("sqrtlaw", t, L, Ldot, E, fb))
    return rows


def run_softwall(sc: Scenario, times):
    if sc.confinement != "trap":
        raise DomainError("the soft-wall engine needs confinement 'trap'")
    basis = softwall.hermite_basis(sc.nmax)
    states = [(f, softwall.softwall_coefficients(n, sc.schedule, basis)) for n, f in level_weights(sc)]
    rows = []
    for t in times:
        L, Ldot, _ = eval_length(sc.schedule, t)
        parts = [(f,) + softwall.softwall_energy_force(st, sc.schedule, t, mode=sc.mode)
                 for f, st in states]
        E, fb = _accumulate(parts)
        rows.append(_row("softwall", t, L, Ldot, E, fb))
    return rows


def run_oracle(sc: Scenario, times):
    if sc.mode != "instantaneous":
        raise DomainError("the grid oracle only produces instantaneous values")
    times = sorted(float(t) for t in times)
    per_time = [[] for _ in times]
    for n, f in level_weights(sc):
        scen = oracle.OracleScenario(sc.confinement, sc.schedule, n)
        traj = oracle.integrate(scen, times, sc.oracle_points, sc.oracle_dt)
        for i, wf in enumerate(traj.snapshots):
            per_time[i].append((f,) + oracle.observables(wf, sc.schedule))
    rows = []
    for t, parts in zip(times, per_time):
        L, Ldot, _ = eval_length(sc.schedule, t)
        E, fb = _accumulate(parts)
        rows.append(_row("oracle", t, L, Ldot, E, fb))
    return rows


RUNNERS = {"exact": run_exact, "perturbative": run_perturbative, "sqrtlaw": run_sqrtlaw,
           "softwall": run_softwall, "oracle": run_oracle}


def evaluate(engine: str, sc: Scenario, times) -> list[dict]:
    if engine not in RUNNERS:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    if sc.mode not in MODES:
        raise ValueError(f"unknown mode {sc.mode!r}; choose from {MODES}")
    return RUNNERS[engine](sc, list(times))


def window_flags(sc: Scenario, times) -> list[bool]:
    """Whether each time lies inside (10 hbar/dE, 0.1 L0/|Ldot0|)."""
    if sc.confinement == "trap":
        lo = 10 * sc.schedule.hbar * sc.schedule.L0 ** 2
        v = abs(sc.schedule.Ldot0)
        hi = math.inf if v == 0 else 0.1 * sc.schedule.L0 / v
    else:
        model = sc.occupation if sc.level is None else OccupationModel.zero_temperature(sc.level)
        lo, hi = time_window(sc.schedule, model, max(sc.nmax, 4))
    return [bool(lo < t < hi) for t in times]


def warn_outside_window(sc: Scenario, times) -> int:
    flags = window_flags(sc, times)
    bad = flags.count(False)
    if bad:
        warnings.warn(f"{bad} of {len(flags)} times lie outside the averaging window",
                      TimeWindowWarning, stacklevel=2)
    return bad
