import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_delay.errors import DivergenceError, InvalidParameterError, WindowError
from cavity_delay.params import DriveParams, SystemParams
from cavity_delay.timedomain import Trajectory, crosscheck, demodulate, integrate


def bare(kappa=0.2, wn=1.0):
    return SystemParams(omega_c=50.0, omega_n=wn, kappa=kappa, lam=0.0, gamma_n=0.02)


def synthetic(delta, signal, periods=16, per_period=64, t0=3.0):
    dt = 2 * math.pi / (abs(delta) * per_period)
    t = t0 + dt * np.arange(periods * per_period + 10)
    a = signal(t)
    return Trajectory(t=t, a=a.astype(complex), Q=np.zeros_like(t), Qdot=np.zeros_like(t), dt=dt)


def test_free_decay():
    sys = bare(kappa=0.2)
    d = DriveParams.from_amplitudes(0.0, 0.0, 0.5, 0.0)
    traj = integrate(sys, d, (1 + 0j, 0.0, 0.0), t_end=15 / 0.2, dt=0.01)
    expected = np.exp(-0.2 * traj.t)
    assert np.max(np.abs(np.abs(traj.a) / expected - 1)) < 1e-8


def test_free_decay_envelope_monotone_with_coupling():
    sys = SystemParams(omega_c=50.0, omega_n=1.0, kappa=0.1, lam=0.3, gamma_n=0.02)
    d = DriveParams.from_amplitudes(0.0, 0.0, 1.0, 0.0)
    traj = integrate(sys, d, (2 + 0j, 0.5, 0.0), t_end=60.0, dt=0.05)
    assert np.all(np.diff(np.abs(traj.a)) < 0)


def test_linear_cavity_steady_state_from_rest():
    sys = bare(kappa=0.2)
    d = DriveParams.from_amplitudes(1.5, 0.0, 0.7, 0.0)
    traj = integrate(sys, d, t_end=16 / 0.2, dt=0.02)
    assert traj.a[-1] == pytest.approx(1.5 / complex(0.2, 0.7), rel=1e-6)


def test_bare_probe_response_from_rest():
    sys = bare(kappa=0.2)
    Dp, Dr = 1.0, 0.15
    delta = Dp + Dr
    d = DriveParams.from_amplitudes(0.0, 1e-3, Dp, delta)
    per = 128
    dt = 2 * math.pi / (delta * per)
    steps = math.ceil(20 / 0.2 / dt) + 16 * per
    traj = integrate(sys, d, t_end=steps * dt, dt=dt)
    res = demodulate(traj, delta, 16)
    assert res.a_plus == pytest.approx(1e-3 / complex(0.2, -Dr), rel=1e-6)
    assert abs(res.a0) < 1e-9 and abs(res.a_minus) < 1e-9


def test_demodulate_exact_tones():
    res = demodulate(synthetic(0.8, lambda t: 3 + 2 * np.exp(-0.8j * t)), 0.8)
    assert res.a0 == pytest.approx(3, abs=1e-12)
    assert res.a_plus == pytest.approx(2, abs=1e-12)
    assert abs(res.a_minus) < 1e-12
    assert res.residual < 1e-12
    res = demodulate(synthetic(0.8, lambda t: 1j * np.exp(0.8j * t)), 0.8)
    assert res.a_minus == pytest.approx(1j, abs=1e-12)
    assert abs(res.a0) < 1e-12 and abs(res.a_plus) < 1e-12


@settings(max_examples=50)
@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10),
       st.complex_numbers(max_magnitude=10), st.floats(0.1, 10), st.integers(5, 20))
def test_demodulate_three_tone_exactness(c0, cp, cm, delta, periods):
    def sig(t):
        return c0 + cp * np.exp(-1j * delta * t) + cm * np.exp(1j * delta * t)

    res = demodulate(synthetic(delta, sig, periods=periods, per_period=16), delta, periods)
    for got, want in ((res.a0, c0), (res.a_plus, cp), (res.a_minus, cm)):
        assert abs(got - want) <= 1e-10 * max(1.0, abs(c0) + abs(cp) + abs(cm))


def test_demodulate_residual_sees_foreign_tone():
    res = demodulate(synthetic(1.0, lambda t: 1 + np.exp(-2j * t)), 1.0)
    assert res.residual == pytest.approx(0.5, rel=1e-9)


def test_window_errors():
    traj = synthetic(1.0, lambda t: np.ones_like(t), periods=16, per_period=64)
    with pytest.raises(WindowError, match="at least 5"):
        demodulate(traj, 1.0, periods=4)
    with pytest.raises(WindowError, match="not an integer"):
        demodulate(traj, 1.1, periods=16)
    with pytest.raises(WindowError, match="samples"):
        demodulate(traj, 1.0, periods=32)
    with pytest.raises(WindowError, match="transient"):
        demodulate(traj, 1.0, periods=16, t_min=1e6)
    with pytest.raises(WindowError):
        demodulate(traj, 0.0)


def test_divergence_detected():
    sys = SystemParams(omega_c=50.0, omega_n=1.0, kappa=0.1, lam=0.3, gamma_n=0.02)
    d = DriveParams.from_amplitudes(1.0, 0.0, 1.0, 1.0)
    with pytest.raises(DivergenceError) as info:
        integrate(sys, d, (1e200 + 0j, 0.0, 0.0), t_end=1.0, dt=0.01)
    assert info.value.t_last == 0.0


def test_step_rule_enforced():
    with pytest.raises(InvalidParameterError, match="dt"):
        integrate(bare(), DriveParams.from_amplitudes(1.0, 0.0, 5.0, 0.0), t_end=1.0, dt=0.05)


def test_rk4_order():
    sys = SystemParams(omega_c=10.0, omega_n=1.0, kappa=1.0, lam=0.0, gamma_n=0.1)
    d = DriveParams.from_amplitudes(0.0, 0.0, 2.0, 0.0)

    def final(dt):
        return integrate(sys, d, (1 + 0j, 0.0, 0.0), t_end=2.0, dt=dt).a[-1]

    ref = final(0.0125)
    ratio = abs(final(0.05) - ref) / abs(final(0.025) - ref)
    assert 12 <= ratio <= 20


def test_crosscheck_bare():
    d = DriveParams.from_amplitudes(1.0, 1e-3, 1.0, 1.0)
    rep = crosscheck(bare(kappa=0.1), d)
    assert rep.valid
    assert max(rep.err_a0, rep.err_a_plus, rep.err_a_minus) < 1e-6


def test_crosscheck_red_sideband(scaled):
    rep = crosscheck(scaled, DriveParams.from_amplitudes(2.0, 2e-3, 1.0, 1.0))
    assert rep.valid and rep.err_a_plus < 0.01
    # the mixing sideband is resolved as well
    assert rep.err_a_minus < 0.01


def test_crosscheck_flags_strong_probe(scaled):
    rep = crosscheck(scaled, DriveParams.from_amplitudes(1.0, 0.1, 1.0, 1.0), settle=200.0)
    assert not rep.valid
    assert "ratio" in rep.reason


def test_trajectory_csv(tmp_path):
    d = DriveParams.from_amplitudes(1.0, 0.0, 0.5, 0.0)
    traj = integrate(bare(), d, t_end=0.3, dt=0.1)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t_s,re_a,im_a,Q,Qdot_per_s"
    assert len(lines) == 1 + 4
    row = [float(x) for x in lines[-1].split(",")]
    assert row[1] == traj.a[-1].real and row[2] == traj.a[-1].imag
