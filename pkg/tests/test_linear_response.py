import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_delay.errors import DifferentiationError, SingularResponseError
from cavity_delay.linear_response import (Convention, group_delay, phase_slope,
                                          probe_amplitude_closed_form,
                                          probe_amplitudes_linear_system, probe_response,
                                          response_coefficients, susceptibility_eta,
                                          transmission, transmission_at)
from cavity_delay.params import DriveParams, SystemParams, make_system_params
from cavity_delay.steady_state import steady_state


def pump(device, P_nW, sign=+1, delta=None):
    Dp = sign * device.omega_n
    return DriveParams(P_p=P_nW * 1e-9, P_r=1e-15, Delta_p=Dp, delta=Dp if delta is None else delta)


def test_eta_limits():
    assert susceptibility_eta(0.0, 3.0, 0.1) == 1
    assert susceptibility_eta(3.0, 3.0, 0.1) == pytest.approx(1j * 30.0, rel=1e-14)
    assert susceptibility_eta(-3.0, 3.0, 0.1) == pytest.approx(-1j * 30.0, rel=1e-14)


def test_eta_pole():
    with pytest.raises(SingularResponseError) as info:
        susceptibility_eta(2.0, 2.0, 0.0)
    assert info.value.delta == 2.0


def test_coefficient_identities(device):
    n, delta = 1.234e6, 0.9 * device.omega_n
    c = response_coefficients(device, n, delta)
    a, wn = c.alpha, device.omega_n
    assert a == 2 * device.lam**2 / wn**2
    assert c.beta == a**2 * c.eta**2 * wn**2 * n**2
    assert c.theta == 1j * a * wn * n * (c.eta + 1)
    assert response_coefficients(device, n, 0.0).eta == 1


def test_coefficients_vanish():
    bare = SystemParams(omega_c=10, omega_n=1, kappa=0.1, lam=0.0, gamma_n=0.01)
    c = response_coefficients(bare, 5.0, 0.7)
    assert c.alpha == 0 and c.beta == 0 and c.theta == 0
    sys = replace(bare, lam=0.3)
    c0 = response_coefficients(sys, 0.0, 0.7)
    assert c0.beta == 0 and c0.theta == 0 and c0.alpha == pytest.approx(0.18)


def test_theta_quadrant_on_red_sideband(device):
    d = pump(device, 8)
    n = steady_state(device, d).n_p
    theta = response_coefficients(device, n, device.omega_n).theta
    # i (i Q_n + 1) = -Q_n + i: real part negative and dominant
    assert theta.real < 0 < theta.imag
    assert abs(theta.real) / theta.imag == pytest.approx(device.Q_n, rel=1e-6)


@pytest.mark.parametrize("Delta_r", [0.0, 0.37, -1.9])
def test_bare_closed_form(Delta_r):
    sys = SystemParams(omega_c=10, omega_n=1, kappa=0.25, lam=0.0, gamma_n=0.01)
    d = DriveParams.from_amplitudes(1.0, 0.02, 1.0, 1.0 + Delta_r)
    a = probe_amplitude_closed_form(sys, d, 4.0)
    assert a == pytest.approx(0.02 / complex(0.25, -Delta_r), rel=1e-14)


def test_transparency_suppresses_intracavity_probe(device):
    d = pump(device, 8)
    n = steady_state(device, d).n_p
    coupled = abs(probe_amplitude_closed_form(device, d, n))
    bare = abs(probe_amplitude_closed_form(replace(device, lam=0.0), d, n))
    assert coupled < 0.1 * bare


def test_linear_system_bare_has_no_mixing():
    sys = SystemParams(omega_c=10, omega_n=1, kappa=0.25, lam=0.0, gamma_n=0.01)
    d = DriveParams.from_amplitudes(1.0, 0.02, 1.0, 1.3)
    a_plus, a_minus = probe_amplitudes_linear_system(sys, d, 4.0)
    assert a_minus == 0
    assert a_plus == pytest.approx(0.02 / complex(0.25, -0.3), rel=1e-14)


def test_linear_system_is_linear(device):
    d = pump(device, 4, delta=device.omega_n * 1.00001)
    n = steady_state(device, d).n_p
    a1 = probe_amplitudes_linear_system(device, d, n)
    a2 = probe_amplitudes_linear_system(device, replace(d, P_r=4 * d.P_r), n)
    # amplitude ~ sqrt(P): 4x power doubles the probe field (up to omega_r rounding)
    for x, y in zip(a1, a2):
        assert y == pytest.approx(2 * x, rel=1e-12)


def test_bare_transmission_flux():
    sys = SystemParams(omega_c=10, omega_n=1, kappa=0.25, lam=0.0, gamma_n=0.01)
    assert transmission_at(sys, 1.0, 1.0, 0.0) == pytest.approx(-1.0, abs=1e-15)
    for Dr in (-1.0, 0.1, 2.5):
        t = transmission_at(sys, 1.0, 1.0 + Dr, 0.0)
        assert t == pytest.approx(-complex(0.25, Dr) ** 2 / (0.0625 + Dr**2), rel=1e-13)
        assert abs(t) == pytest.approx(1.0, abs=1e-14)


def test_transmission_conventions():
    sys = SystemParams(omega_c=10, omega_n=1, kappa=0.5, lam=0.0, gamma_n=0.01)
    assert transmission(sys, 0.3 + 0.1j, 2.0, "flux") == 1 - (0.3 + 0.1j) / 2.0
    assert transmission(sys, 0.3 + 0.1j, 2.0, Convention.SQRT) == 1 - (0.3 + 0.1j) / 2.0
    sys = replace(sys, kappa=2.0)
    assert transmission(sys, 1.0, 1.0, "flux") == -3.0
    assert transmission(sys, 1.0, 1.0, "sqrt") == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        transmission(sys, 1.0, 0.0)


def test_bare_group_delay(device):
    bare = replace(device, lam=0.0)
    tau = group_delay(bare, pump(bare, 8))
    assert tau == pytest.approx(2 / bare.kappa, rel=1e-6)
    assert tau == pytest.approx(0.5305e-6, rel=1e-4)


def _mp_phase_slope(sys, Dp, delta, n):
    """High-precision oracle: evaluate t_p in mpmath and differentiate its argument."""
    mpmath.mp.dps = 50
    wn, g, k = mpmath.mpf(sys.omega_n), mpmath.mpf(sys.gamma_n), mpmath.mpf(sys.kappa)
    alpha = 2 * mpmath.mpf(sys.lam) ** 2 / wn**2
    n, Dp = mpmath.mpf(n), mpmath.mpf(Dp)

    def phase(d):
        eta = wn**2 / (wn**2 - d**2 - 1j * g * d)
        theta = 1j * alpha * wn * n * (eta + 1)
        beta = alpha**2 * eta**2 * wn**2 * n**2
        ratio = 1j * (d + Dp + 1j * (k + theta)) / ((d + 1j * k) ** 2 + (theta - 1j * Dp) ** 2 + beta)
        return mpmath.arg(1 - 2 * k * ratio)

    return float(mpmath.diff(phase, mpmath.mpf(delta)))


@pytest.mark.parametrize("sign,P_nW,offset", [
    (+1, 8, 0.0), (+1, 1, 0.0), (-1, 4, 0.0), (+1, 8, 2e4),
    # weak pump: the window is about gamma_n wide
    (+1, 0.05, 0.0), (-1, 0.05, 30.0),
])
def test_phase_slope_matches_high_precision_oracle(device, sign, P_nW, offset):
    d = pump(device, P_nW, sign)
    n = steady_state(device, d).n_p
    delta = d.Delta_p + offset
    got = phase_slope(device, d.Delta_p, delta, n)
    assert got == pytest.approx(_mp_phase_slope(device, d.Delta_p, delta, n), rel=1e-6)


def test_red_sideband_delay_magnitude(device):
    tau = group_delay(device, pump(device, 1))
    assert 0.1e-3 <= tau <= 0.2e-3


def test_blue_sideband_advancement(device):
    assert group_delay(device, pump(device, 4, sign=-1)) < 0


def test_cyclic_coupling_reading_misses_reported_delay():
    # lambda = 2 pi x 250 rad/s: over the 0.5-10 nW power range the delay peaks near 6 us,
    # far from the ~0.2 ms reported at the low-power end
    sys = make_system_params(7.5e9, 6.3e6, 6.0e5, 250.0, 1e6, lambda_angular=False)
    taus = [group_delay(sys, pump(sys, p)) for p in (0.5, 1.0, 2.0, 10.0)]
    assert all(0 < t < 10e-6 for t in taus)
    # it only reaches 0.1 ms at pump powers about 30x lower
    assert group_delay(sys, pump(sys, 0.02)) > 0.1e-3


def test_delay_changes_sign_near_critical_coupling(device):
    # critical coupling near 0.0011 nW: below it the window is undercoupled and the delay flips sign
    assert group_delay(device, pump(device, 1e-3)) < 0 < group_delay(device, pump(device, 0.01))


def test_richardson_failure_reports_diagnostics(device):
    d = pump(device, 0.5)
    n = steady_state(device, d).n_p
    with pytest.raises(DifferentiationError, match="did not converge"):
        phase_slope(device, d.Delta_p, d.Delta_p, n, h=10 * device.kappa, max_halvings=0)


def test_probe_power_independence(device):
    d = pump(device, 8, delta=device.omega_n + 1e3)
    n = steady_state(device, d).n_p
    r1 = probe_response(device, d, n)
    r2 = probe_response(device, replace(d, P_r=10 * d.P_r), n)
    assert r1.t_p == r2.t_p
    assert r2.a_plus == pytest.approx(math.sqrt(10) * r1.a_plus, rel=1e-12)


@given(st.floats(1e-6, 1e3))
def test_closed_form_linear_in_probe(c):
    sys = SystemParams(omega_c=50, omega_n=1.0, kappa=0.1, lam=0.02, gamma_n=0.01)
    d = DriveParams.from_amplitudes(3.0, 1e-3, 1.0, 0.98)
    n = steady_state(sys, d).n_p
    a = probe_amplitude_closed_form(sys, d, n)
    b = probe_amplitude_closed_form(sys, replace(d, E_r=c * 1e-3), n)
    assert b == pytest.approx(c * a, rel=1e-12)


@settings(max_examples=200)
@given(st.floats(-5, 5), st.floats(0.01, 2.0), st.sampled_from([-1.0, 1.0]))
def test_bare_unitarity(Dr, kappa, sign):
    sys = SystemParams(omega_c=50, omega_n=1.0, kappa=kappa, lam=0.0, gamma_n=0.01)
    assert abs(transmission_at(sys, sign, sign + Dr * kappa, 0.0)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300)
@given(st.floats(-1, 1), st.floats(-2, 0), st.floats(-4, -1.5), st.floats(-4, -1),
       st.floats(0.5, 1.5), st.sampled_from([-1.0, 1.0]), st.floats(-3, 3), st.floats(0, 2))
def test_closed_form_matches_linear_system(lwn, lk, llam, lg, dscale, sign, dr, lE):
    wn = 10**lwn
    sys = SystemParams(omega_c=1e3 * wn, omega_n=wn, kappa=wn * 10**lk, lam=wn * 10**llam,
                       gamma_n=wn * 10**lg)
    Dp = sign * dscale * wn
    d = DriveParams.from_amplitudes(wn * 10**lE, 1.0, Dp, Dp + dr * sys.kappa)
    n = steady_state(sys, d).n_p
    a = probe_amplitude_closed_form(sys, d, n)
    b, _ = probe_amplitudes_linear_system(sys, d, n)
    assert abs(a - b) <= 1e-9 * abs(b)
