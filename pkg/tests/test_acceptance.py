"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run alone with ``pytest -s tests/test_acceptance.py`` or ``cavityforce selftest``.
"""
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from cavityforce import OccupationModel, WallSchedule
from cavityforce import engines
from cavityforce import hardwall as hw
from cavityforce import oracle
from cavityforce import perturbative as pt
from cavityforce import softwall as sw
from cavityforce import sqrtlaw as sl
from test_hardwall import j_quad
from test_perturbative import C_REF, truncated_series_C

PI = math.pi
VELOCITIES = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2]
START = time.perf_counter()


def slope(v, f):
    return float(np.polyfit(np.log(np.abs(v)), np.log(np.abs(f)), 1)[0])


def test_criterion_1_quadratic_law(record):
    t0 = time.perf_counter()
    model = OccupationModel.zero_temperature(1)
    f = []
    for v in VELOCITIES:
        sc = engines.Scenario(WallSchedule.linear(1.0, v), model, mode="time-averaged")
        f.append(engines.evaluate("exact", sc, [1.0])[0]["F_nonad"])
    s = slope(VELOCITIES, f)
    Cp = hw.nonadiabatic_coefficient_exact(model)[0]
    pref = np.array(f) / np.square(VELOCITIES)
    took = time.perf_counter() - t0
    ok = abs(s - 2) <= 0.05 and took < 60 and np.all(pref < 0)
    record(1, ok, f"slope {s:.6f} (2 +- 0.05), F/Ldot^2 = {pref[0]:.10f} vs C' = {Cp:.10f}, "
                  f"{took:.1f}s (< 60s)")


def test_criterion_2_time_reversal(record):
    worst = 0.0
    model = OccupationModel.zero_temperature(1)
    for v in (1e-2, 5e-2):
        for mode, t in (("instantaneous", 0.0), ("time-averaged", 1.0), ("cycle-averaged", 1.0)):
            a, b = (hw.gas_force(model, WallSchedule.linear(1.0, s * v), t, mode=mode)[1].non_adiabatic
                    for s in (1, -1))
            worst = max(worst, abs(a - b) / abs(a))
            basis = sw.hermite_basis(64)
            a, b = (sw.softwall_energy_force(
                sw.softwall_coefficients(0, WallSchedule.linear(1.0, s * v), basis),
                WallSchedule.linear(1.0, s * v), t, mode=mode)[1].non_adiabatic for s in (1, -1))
            if a != b:
                worst = max(worst, abs(a - b) / abs(a))
    record(2, worst <= 1e-9, f"max relative |F(+v) - F(-v)| = {worst:.2e} (<= 1e-9), "
                             "exact and soft-wall engines")


def test_criterion_3_route_equality(record):
    s = WallSchedule.linear(1.0, 0.02)
    st = hw.initial_coefficients(1, s, 64)
    L, Ldot, _ = (float(x) for x in hw.eval_length(s, 1.0))
    tau = float(hw.scaled_time(s, 1.0))
    fb = hw.force_exact(hw.propagate(st, tau), L, Ldot, hw.j_table(64), check=False,
                        populations=np.abs(st.coeffs) ** 2)
    d_hard = abs(fb.total - fb.raw["F_slope"]) / abs(fb.total)
    sst = sw.softwall_coefficients(1, s, sw.hermite_basis(64))
    _, sb = sw.softwall_energy_force(sst, s, 1.0, check=False)
    d_soft = abs(sb.total - sb.raw["F_slope"]) / abs(sb.total)
    ok = d_hard <= 1e-6 and d_soft <= 1e-6
    record(3, ok, f"hard wall {d_hard:.2e}, soft wall {d_soft:.2e} (<= 1e-6)")


def test_criterion_4_oracle_agreement(record):
    t0 = time.perf_counter()
    s = WallSchedule.linear(1.0, 0.05)
    times = [0.25 * k for k in range(9)]
    tr = oracle.integrate(oracle.OracleScenario("box", s, 1), times, 2048, 1e-4)
    st = hw.initial_coefficients(1, s, 64)
    model = OccupationModel.zero_temperature(1)
    miss = err = 0.0
    for wf in tr.snapshots:
        c = hw.propagate(st, float(hw.scaled_time(s, wf.t))).coeffs
        miss = max(miss, 1 - oracle.fidelity(wf, oracle.exact_box_profile(c, s, wf.t, wf.grid)))
        E, _ = oracle.observables(wf, s)
        Eh, _ = hw.gas_force(model, s, wf.t)
        err = max(err, abs(E - Eh) / abs(Eh))
    took = time.perf_counter() - t0
    ok = miss <= 1e-6 and err <= 1e-4 and took < 120
    record(4, ok, f"1 - fidelity {miss:.2e} (<= 1e-6), energy {err:.2e} (<= 1e-4), "
                  f"{took:.1f}s (< 120s)")


def test_criterion_5_coefficients(record):
    Cs, Cps = [], []
    for N in (1, 2, 5):
        model = OccupationModel.zero_temperature(N)
        Cs.append(pt.coefficient_C(model)[0])
        Cps.append(hw.nonadiabatic_coefficient_exact(model)[0])
    pf = pt.perturbative_force(OccupationModel.zero_temperature(1), WallSchedule.linear(1.0, 0.02), 1.0)
    ratio = abs(pf.S3_reduced - 2 * pf.S2_reduced) / abs(pf.S3_reduced)
    oracle_C = truncated_series_C(1)
    ok = (all(c < 0 for c in Cs + Cps) and ratio <= 1e-10
          and abs(oracle_C - C_REF) < 5e-7 and abs(Cs[0] - C_REF) < 5e-7)
    record(5, ok, f"C(N=1,2,5) = {Cs[0]:.7f}, {Cs[1]:.7f}, {Cs[2]:.7f}; "
                  f"C'(N=1,2,5) = {Cps[0]:.7f}, {Cps[1]:.7f}, {Cps[2]:.7f}; "
                  f"|S3 - 2 S2|/|S3| = {ratio:.1e}; C(1) vs {C_REF} to {abs(Cs[0] - C_REF):.1e}")


def test_criterion_6_j_integrals(record):
    jt = hw.j_table(12)
    worst = 0.0
    for n in range(1, 13):
        for l in range(1, 13):
            got = (jt.J1[n - 1, l - 1], jt.J2[n - 1, l - 1], jt.J3[n - 1, l - 1])
            worst = max(worst, float(np.max(np.abs(np.subtract(got, j_quad(n, l))))))
    spots = [abs(hw.j_integrals(1, 1)[0] + 1 / (2 * PI)),
             abs(hw.j_integrals(2, 1)[1] + 16 / (9 * PI ** 2)),
             abs(hw.j_integrals(1, 1)[2] - (1 / 5 - 1 / PI ** 2 + 3 / (2 * PI ** 4)))]
    ok = worst < 1e-10 and max(spots) < 1e-14
    record(6, ok, f"max |closed - quad| = {worst:.1e} (< 1e-10), spot values to {max(spots):.1e}")


def test_criterion_7_kummer(record):
    K = sl.find_roots(1e-3, 5)
    dev = float(np.max(np.abs(K / ((np.arange(1, 6) * PI) ** 2 / 2) - 1)))
    lin = WallSchedule.linear(1.0, 1.0)
    sq = WallSchedule.sqrt_law(1.0, 2.0, 1.0)
    basis = sl.basis_for_schedule(sq, 64)
    st = sl.sqrtlaw_coefficients(1, sq, basis)
    gap = 0.0
    for t in (0.5, 1.0):
        _, fb = sl.sqrtlaw_force(st, sq, basis, t)
        _, fh = hw.gas_force(OccupationModel.zero_temperature(1), lin, t)
        gap = max(gap, abs(fb.total - fh.total) / abs(fh.total))
    f = []
    for v in VELOCITIES:
        s = WallSchedule.sqrt_law(0.0, 2 * v, 1.0)
        b = sl.basis_for_schedule(s, 32)
        f.append(sl.sqrtlaw_force(sl.sqrtlaw_coefficients(1, s, b), s, b, 1.0,
                                  mode="cycle-averaged")[1].non_adiabatic)
    k = slope(VELOCITIES, f)
    ok = dev <= 1e-3 and gap <= 1e-6 and abs(k - 2) <= 0.05
    record(7, ok, f"max |K_n/K_sc - 1| = {dev:.2e} (<= 1e-3), B^2 = 0 vs linear {gap:.1e} "
                  f"(<= 1e-6), slope {k:.6f} (2 +- 0.05)")


def test_criterion_8_soft_wall(record):
    basis = sw.hermite_basis(64)
    worst = 0.0
    for L in (0.7, 1.0, 2.3):
        s = WallSchedule.fixed(L)
        for level in range(6):
            E, _ = sw.softwall_energy_force(sw.softwall_coefficients(level, s, basis), s, 1.0)
            worst = max(worst, abs(E - (level + 0.5) / L ** 2) / ((level + 0.5) / L ** 2))
    f = []
    for v in VELOCITIES:
        s = WallSchedule.linear(1.0, v)
        f.append(sw.softwall_energy_force(sw.softwall_coefficients(0, s, basis), s, 1.0,
                                          mode="time-averaged")[1].non_adiabatic)
    c_soft = f[3] / VELOCITIES[3] ** 2
    k = slope(VELOCITIES, f)
    ok = worst <= 1e-12 and c_soft < 0 and abs(k - 2) <= 0.05
    record(8, ok, f"stationary energies to {worst:.1e} (<= 1e-12), C_soft = {c_soft:.6f} (< 0), "
                  f"slope {k:.6f} (2 +- 0.05)")


def test_criterion_9_unitarity_and_structure(record):
    # name -> (measured, budget)
    checks = {}
    st = hw.initial_coefficients(1, WallSchedule.linear(1.0, 0.2), 64)
    sst = sw.softwall_coefficients(1, WallSchedule.linear(1.0, 0.2), sw.hermite_basis(64))
    checks["box norm drift"] = (max(abs(hw.propagate(st, tau).norm - st.norm)
                                    for tau in (0.3, 7.0, 50.0)), 1e-12)
    checks["trap norm drift"] = (max(abs(sw.evolve(sst, tau).norm - sst.norm)
                                     for tau in (0.3, 7.0)), 1e-12)
    checks["initial norm deficit"] = (max(1 - st.norm, 1 - sst.norm), 1e-8)
    g = pt.GammaMatrix.build(40).entries
    checks["gamma antisymmetry"] = (float(np.max(np.abs(g + g.T))), 1e-15)
    rho = pt.density_matrix(0.7, WallSchedule.linear(1.0, 0.05), OccupationModel.zero_temperature(2),
                            nmax=48)
    checks["rho hermiticity"] = (float(np.max(np.abs(rho - rho.conj().T))), 1e-12)
    checks["rho trace"] = (abs(np.trace(rho) - 2), 1e-10)
    checks["box orthonormality"] = (max(
        abs(quad(lambda y: 2 * math.sin(n * PI * y) * math.sin(m * PI * y), 0, 1,
                 epsabs=1e-14, limit=200)[0] - (n == m))
        for n in range(1, 21) for m in range(n, 21)), 1e-10)
    y = np.linspace(-14, 14, 4001)
    rows = sw.hermite_functions(21, y)
    checks["Hermite orthonormality"] = (float(np.max(np.abs(
        np.trapezoid(rows[:, None] * rows[None, :], y, axis=2) - np.eye(21)))), 1e-10)
    kb = sl.kummer_basis(0.1, 16)
    checks["Kummer orthonormality"] = (max(
        abs(quad(lambda x: sl.basis_function(n, x, kb) * sl.basis_function(m, x, kb), 0, 1,
                 epsabs=1e-13, limit=200)[0] - (n == m))
        for n in range(1, 9) for m in range(n, 9)), 1e-8)
    total = time.perf_counter() - START
    ok = all(v <= b for v, b in checks.values()) and total < 300
    detail = ", ".join(f"{k} {v:.1e} (<= {b:g})" for k, (v, b) in checks.items())
    record(9, ok, f"{detail}; suite time {total:.0f}s (< 300s)")
