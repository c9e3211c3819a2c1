import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from cavityforce import (DomainError, OccupationModel, TruncationError, WallSchedule,
                         adiabatic_force, box_eigensystem, eval_length, occupation_weight,
                         scaled_time)
from cavityforce.schedule import TimeWindowWarning, check_time_window, time_window

SCHEDULES = [
    WallSchedule.fixed(1.3),
    WallSchedule.linear(1.0, 0.05),
    WallSchedule.linear(2.0, -0.1, hbar=0.7),
    WallSchedule.sqrt_law(0.3, 0.2, 1.0),
    WallSchedule.sqrt_law(0.0, 0.04, 1.0),
    WallSchedule.sqrt_law(1.0, 2.0, 1.0),        # B**2 = 0
    WallSchedule.sqrt_law(0.5, -0.2, 1.5),       # B**2 < 0
]


@pytest.mark.parametrize("s", SCHEDULES, ids=lambda s: f"{s.kind}-{s.a}-{s.b}")
def test_scaled_time_matches_quadrature(s):
    for t in (0.0, 0.3, 1.0, 2.5):
        q = quad(lambda u: 1 / float(eval_length(s, u)[0]) ** 2, 0, t, epsabs=1e-15, epsrel=1e-14)[0]
        tau = float(scaled_time(s, t))
        assert abs(tau - q) <= 1e-12 * max(abs(q), 1e-300) + 1e-15


@pytest.mark.parametrize("s", SCHEDULES, ids=lambda s: f"{s.kind}-{s.a}-{s.b}")
def test_second_derivative_by_central_difference(s):
    # float64 rounding alone gives ~4 ulp / h**2 ~ 4e-6 at h = 1e-5, so the
    # difference quotient is formed in extended precision
    h = np.longdouble(1e-5)
    for t in (0.2, 1.0, 2.0):
        t = np.longdouble(t)
        Lm, L0, Lp = (eval_length(s, t + d)[0] for d in (-h, 0 * h, h))
        assert abs(float((Lp - 2 * L0 + Lm) / h ** 2) - float(eval_length(s, float(t))[2])) < 1e-6


def test_sqrt_law_invariant():
    s = WallSchedule.sqrt_law(0.3, 0.2, 1.0)
    L, _, Ldd = eval_length(s, np.linspace(0, 3, 7))
    np.testing.assert_allclose(L ** 3 * Ldd, -s.B_squared / 4, rtol=1e-13)


def test_linear_is_degenerate_sqrt_law():
    lin = WallSchedule.linear(1.0, 1.0)
    sq = WallSchedule.sqrt_law(1.0, 2.0, 1.0)
    t = np.linspace(0, 2, 5)
    for a, b in zip(eval_length(lin, t), eval_length(sq, t)):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(scaled_time(lin, t), scaled_time(sq, t), rtol=1e-14)


def test_collapse_and_bad_lengths():
    with pytest.raises(DomainError):
        eval_length(WallSchedule.linear(1.0, -0.5), 2.0)
    with pytest.raises(DomainError):
        WallSchedule.linear(-1.0, 0.1)
    with pytest.raises(DomainError):
        WallSchedule.sqrt_law(0.0, 0.1, -1.0)
    with pytest.raises(DomainError):
        scaled_time(WallSchedule.fixed(1.0), -0.1)


def test_box_orthonormality():
    L = 1.7
    for n in range(1, 21):
        for m in range(n, 21):
            _, pn = box_eigensystem(n, L)
            _, pm = box_eigensystem(m, L)
            q = quad(lambda x: pn(x) * pm(x), 0, L, limit=400, epsabs=1e-14)[0]
            assert abs(q - (n == m)) < 1e-10


def test_box_energies():
    E, _ = box_eigensystem(3, 2.0)
    assert E == pytest.approx(9 * math.pi ** 2 / 8, rel=1e-15)


def test_occupations():
    zt = OccupationModel.zero_temperature(3)
    assert [occupation_weight(zt, 0.0, n) for n in range(1, 5)] == [1, 1, 1, 0]
    cold = OccupationModel.fermi_dirac(beta=1e4, mu=10.0)
    assert abs(occupation_weight(cold, 5.0) - 1) < 1e-12
    warm = OccupationModel.fermi_dirac(beta=0.3, mu=20.0)
    w = warm.weights(np.linspace(0, 200, 50))
    assert np.all(np.diff(w) <= 0) and np.all((w >= 0) & (w <= 1))
    with pytest.raises(ValueError):
        OccupationModel.zero_temperature(0)
    with pytest.raises(ValueError):
        OccupationModel.fermi_dirac(beta=-1, mu=0)


def test_adiabatic_force():
    assert adiabatic_force(OccupationModel.zero_temperature(2), 2.0) == pytest.approx(
        5 * math.pi ** 2 / 8, rel=1e-15)
    ft = OccupationModel.fermi_dirac(beta=0.5, mu=30.0)
    n = np.arange(1, 400)
    direct = float(np.sum((n * math.pi) ** 2 * ft.weights((n * math.pi) ** 2 / 2)))
    assert adiabatic_force(ft, 1.0) == pytest.approx(direct, rel=1e-10)
    with pytest.raises(TruncationError):
        adiabatic_force(OccupationModel.fermi_dirac(beta=1e-3, mu=0.0), 1.0, nmax=8)


def test_time_window():
    s = WallSchedule.linear(1.0, 0.02)
    lo, hi = time_window(s, OccupationModel.zero_temperature(1))
    assert lo == pytest.approx(10 / (1.5 * math.pi ** 2)) and hi == pytest.approx(5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_time_window(s, OccupationModel.zero_temperature(1), 1.0)
    with pytest.warns(TimeWindowWarning):
        assert not check_time_window(s, OccupationModel.zero_temperature(1), 10.0)
