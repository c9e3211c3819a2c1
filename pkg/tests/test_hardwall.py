import math

import numpy as np
import pytest
from scipy.integrate import quad

from cavityforce import ConsistencyError, OccupationModel, TruncationError, WallSchedule
from cavityforce import hardwall as hw
from cavityforce.oracle import GridWavefunction, exact_box_profile, grid_integrals, make_grid

PI = math.pi


def j_quad(n, l):
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    J1 = 2 * quad(lambda y: y * math.sin(l * PI * y) * math.cos(n * PI * y), 0, 1, **opts)[0]
    J2 = 2 * quad(lambda y: y ** 2 * math.sin(l * PI * y) * math.sin(n * PI * y), 0, 1, **opts)[0]
    J3 = 2 * quad(lambda y: y ** 4 * math.sin(l * PI * y) * math.sin(n * PI * y), 0, 1, **opts)[0]
    return J1, J2, J3


def test_j_closed_forms_against_quadrature():
    jt = hw.j_table(12)
    for n in range(1, 13):
        for l in range(1, 13):
            q = j_quad(n, l)
            got = (jt.J1[n - 1, l - 1], jt.J2[n - 1, l - 1], jt.J3[n - 1, l - 1])
            assert np.max(np.abs(np.subtract(got, q))) < 1e-10, (n, l)


def test_j_spot_values():
    J1, _, J3 = hw.j_integrals(1, 1)
    assert J1 == pytest.approx(-1 / (2 * PI), abs=1e-15)
    assert hw.j_integrals(2, 1)[1] == pytest.approx(-16 / (9 * PI ** 2), abs=1e-15)
    assert J3 == pytest.approx(1 / 5 - 1 / PI ** 2 + 3 / (2 * PI ** 4), abs=1e-15)
    with pytest.raises(ValueError):
        hw.j_integrals(0, 1)


def test_initial_coefficients():
    s = WallSchedule.linear(1.0, 0.2)
    st = hw.initial_coefficients(1, s, 64)
    assert 0 <= 1 - st.norm < 1e-8
    for n in (1, 2, 5):
        re = quad(lambda y: 2 * math.sin(PI * y) * math.sin(n * PI * y) * math.cos(0.1 * y * y), 0, 1,
                  epsabs=1e-14)[0]
        im = quad(lambda y: -2 * math.sin(PI * y) * math.sin(n * PI * y) * math.sin(0.1 * y * y), 0, 1,
                  epsabs=1e-14)[0]
        assert abs(st.coeffs[n - 1] - complex(re, im)) < 1e-12


def test_norm_conserved_by_propagation():
    st = hw.initial_coefficients(2, WallSchedule.linear(1.0, 0.3), 64)
    for tau in (0.1, 1.0, 17.3):
        assert abs(hw.propagate(st, tau).norm - st.norm) < 1e-14


def test_route_equality_standard(standard):
    st = hw.initial_coefficients(1, standard, 64)
    L, Ldot = 1.02, 0.02
    fb = hw.force_exact(hw.propagate(st, float(hw.scaled_time(standard, 1.0))), L, Ldot, hw.j_table(64))
    assert abs(fb.total - fb.raw["F_slope"]) <= 1e-6 * abs(fb.total)
    with pytest.raises(ConsistencyError):
        hw.check_routes(1.0, 1.0 + 1e-5)


def test_energy_and_force_along_trajectory(standard):
    times = np.array([0.0, 0.5, 1.0, 2.0])
    tr = hw.trajectory(1, standard, times)
    for k, t in enumerate(times):
        E, fb = hw.gas_force(OccupationModel.zero_temperature(1), standard, t)
        assert tr.E[k] == pytest.approx(E, rel=1e-13)
        assert tr.F_nonad[k] == pytest.approx(fb.non_adiabatic, rel=1e-9, abs=1e-15)


def test_parseval_against_grid(standard):
    st = hw.initial_coefficients(1, standard, 64)
    t = 1.0
    c = hw.propagate(st, float(hw.scaled_time(standard, t)))
    I0, I1, I2 = hw.coefficient_integrals(c.coeffs, hw.j_table(64))
    y = make_grid("box", 2048)
    wf = GridWavefunction("box", y, exact_box_profile(c.coeffs, standard, t, y), t, 1)
    g = grid_integrals(wf, standard)
    assert abs(g["I0"] - I0) <= 1e-8 * I0
    assert abs(g["I2"] - I2) <= 1e-8 * I2
    assert abs(g["I1"].imag - I1.imag) <= 1e-8 * max(abs(I1), 1)


def test_conserved_i0_identity():
    # |phi_y|**2 of the gauged initial state integrates to l**2 pi**2 + eps**2 J2(l, l)
    for level, v in [(1, 0.05), (2, 0.3), (3, -0.2)]:
        s = WallSchedule.linear(1.0, v)
        eps = hw.gauge_strength(s)
        st = hw.initial_coefficients(level, s, 256)
        I0 = PI ** 2 * float(np.sum(np.abs(st.coeffs) ** 2 * np.arange(1, 257) ** 2))
        J2 = hw.j_integrals(level, level)[1]
        assert (I0 - (level * PI) ** 2) / eps ** 2 == pytest.approx(J2, rel=1e-6)
        fb = hw.diagonal_average_force(st, s, 1.0, hw.j_table(256))
        assert fb.non_adiabatic == pytest.approx(v * v * J2, rel=1e-6)


def c_prime_oracle(level, nmax=200):
    """Restricted second-order coefficient with every J from direct quadrature."""
    J = {n: j_quad(n, level) for n in range(1, nmax + 1)}
    J1_ln = {n: j_quad(level, n)[0] for n in range(1, nmax + 1)}
    J3ll = J[level][2]
    s_i0 = sum(n * n * J[n][1] ** 2 for n in J if n != level)
    s_i1 = sum(J[n][1] * (n * J[n][0] - level * J1_ln[n]) for n in J if n != level)
    return PI ** 2 / 4 * (s_i0 - level ** 2 * J3ll) - PI / 2 * s_i1


@pytest.mark.parametrize("level", [1, 2])
def test_level_coefficient_against_quadrature(level):
    value, tail = hw.level_coefficient_exact(level)
    assert tail < 1e-10
    assert value == pytest.approx(c_prime_oracle(level), rel=1e-6)


def test_c_prime_values_and_errors():
    for N, expect in [(1, -0.19715491845), (2, -1.2120274398), (5, -14.671164038)]:
        Cp, tail = hw.nonadiabatic_coefficient_exact(OccupationModel.zero_temperature(N))
        assert Cp == pytest.approx(expect, rel=1e-9) and Cp < 0 and tail < 1e-6 * abs(Cp)
    Cp2, _ = hw.nonadiabatic_coefficient_exact(OccupationModel.zero_temperature(1), hbar=0.5)
    assert Cp2 == pytest.approx(0.25 * -0.19715491845, rel=1e-9)
    with pytest.raises(TruncationError):
        hw.nonadiabatic_coefficient_exact(OccupationModel.zero_temperature(1), nmax=8)


def test_quadratic_law_time_averaged(ground):
    ratios = []
    for v in (1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2):
        _, fb = hw.gas_force(ground, WallSchedule.linear(1.0, v), 1.0, mode="time-averaged")
        ratios.append(fb.non_adiabatic / v ** 2)
    assert np.ptp(ratios) <= 0.01 * abs(np.mean(ratios))
    Cp, _ = hw.nonadiabatic_coefficient_exact(ground)
    np.testing.assert_allclose(ratios, Cp, rtol=1e-9)


def test_cycle_average_slope(ground):
    v = np.array([1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2])
    F = [hw.gas_force(ground, WallSchedule.linear(1.0, x), 1.0, mode="cycle-averaged")[1].non_adiabatic
         for x in v]
    slope = np.polyfit(np.log(v), np.log(np.abs(F)), 1)[0]
    assert abs(slope - 2) < 0.05


def test_time_reversal_at_start():
    for level, v in [(1, 0.02), (2, 0.05)]:
        F = [hw.gas_force(OccupationModel.zero_temperature(level), WallSchedule.linear(1.0, s * v), 0.0)
             [1].non_adiabatic for s in (1, -1)]
        assert abs(F[0] - F[1]) <= 1e-9 * abs(F[0])


@pytest.mark.parametrize("mode", ["time-averaged", "cycle-averaged"])
def test_time_reversal_averaged(mode):
    model = OccupationModel.zero_temperature(2)
    for v in (0.01, 0.05):
        F = [hw.gas_force(model, WallSchedule.linear(1.0, s * v), 1.0, mode=mode)[1].non_adiabatic
             for s in (1, -1)]
        assert abs(F[0] - F[1]) <= 1e-9 * abs(F[0])


def test_fixed_wall_has_no_nonadiabatic_force():
    s = WallSchedule.fixed(1.0)
    for mode in hw.MODES:
        E, fb = hw.gas_force(OccupationModel.zero_temperature(3), s, 2.0, mode=mode)
        assert fb.non_adiabatic == 0.0
        assert E == pytest.approx(14 * PI ** 2 / 2, rel=1e-14)


def test_finite_temperature_gas():
    model = OccupationModel.fermi_dirac(beta=0.2, mu=30.0)
    s = WallSchedule.linear(1.0, 0.01)
    E, fb = hw.gas_force(model, s, 0.5)
    assert abs(fb.total - fb.raw["F_slope"]) <= 1e-6 * abs(fb.total)
    n = np.arange(1, 200)
    f = model.weights((n * PI) ** 2 / 2)
    assert fb.adiabatic == pytest.approx(float(np.sum(f * (n * PI) ** 2)) / 1.005 ** 3, rel=1e-12)


def test_truncation_detected():
    with pytest.raises(TruncationError):
        hw.initial_coefficients(1, WallSchedule.linear(1.0, 40.0), 8)
