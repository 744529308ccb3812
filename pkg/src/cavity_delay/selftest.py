"""Built-in consistency checks run by ``cavity-delay selftest``."""
from __future__ import annotations

import math
import random
from dataclasses import replace

import numpy as np

from .linear_response import (group_delay, probe_amplitude_closed_form,
                              probe_amplitudes_linear_system, transmission_at)
from .params import DriveParams, SystemParams, make_system_params
from .steady_state import Stability, classify_stability, photon_number_roots
from .timedomain import crosscheck, integrate

SCALED = SystemParams(omega_c=50.0, omega_n=1.0, kappa=0.1, lam=0.01, gamma_n=0.02)
SCALED_PUMPS = (0.5, 1.0, 2.0)


def _bare():
    return make_system_params(7.5e9, 6.3e6, 6.0e5, 250.0, 1e6, lambda_angular=True)


def check_bare_unitarity():
    sys = replace(_bare(), lam=0.0)
    Dp = sys.omega_n
    grid = np.linspace(-5 * sys.kappa, 5 * sys.kappa, 1001)
    err = float(np.max(np.abs(np.abs(transmission_at(sys, Dp, Dp + grid, 0.0)) - 1.0)))
    return err <= 1e-12, f"max ||t|-1| = {err:.2e}"


def check_bare_group_delay():
    sys = replace(_bare(), lam=0.0)
    drive = DriveParams(P_p=8e-9, P_r=1e-12, Delta_p=sys.omega_n, delta=sys.omega_n)
    tau = group_delay(sys, drive)
    rel = abs(tau * sys.kappa / 2.0 - 1.0)
    return rel <= 1e-6, f"tau_g = {tau:.9e} s, relative error {rel:.1e}"


def check_cubic():
    # kappa = 1, alpha*omega_n = 1 -> lam^2 = omega_n / 2
    sys = SystemParams(omega_c=10.0, omega_n=2.0, kappa=1.0, lam=1.0, gamma_n=0.1)
    drive = DriveParams.from_amplitudes(math.sqrt(10.0), 0.0, 4.0, 4.0)
    roots = photon_number_roots(sys, drive)
    stab = [classify_stability(sys, drive, n) for n in roots]
    ok = (len(roots) == 3 and np.allclose(roots, [1, 2, 5], rtol=1e-12)
          and stab == [Stability.STABLE, Stability.UNSTABLE, Stability.STABLE])
    return ok, f"roots {['%.15g' % r for r in roots]}, {[s.value for s in stab]}"


def check_closed_form(draws=200, seed=1):
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(draws):
        wn = 10 ** rng.uniform(0, 2)
        sys = SystemParams(omega_c=1e3 * wn, omega_n=wn, kappa=wn * 10 ** rng.uniform(-2, 0),
                           lam=wn * 10 ** rng.uniform(-5, -2), gamma_n=wn * 10 ** rng.uniform(-4, -1))
        Dp = rng.choice((-1, 1)) * wn * rng.uniform(0.5, 1.5)
        drive = DriveParams.from_amplitudes(wn * 10 ** rng.uniform(0, 2), 1.0, Dp,
                                            Dp + sys.kappa * rng.uniform(-3, 3))
        n = photon_number_roots(sys, drive)[0]
        a = probe_amplitude_closed_form(sys, drive, n)
        b, _ = probe_amplitudes_linear_system(sys, drive, n)
        worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-9, f"worst relative mismatch {worst:.1e} over {draws} draws"


def check_rk4_order():
    sys = SystemParams(omega_c=10.0, omega_n=1.0, kappa=1.0, lam=0.0, gamma_n=0.1)
    drive = DriveParams.from_amplitudes(0.0, 0.0, 2.0, 0.0)
    dt = 0.05

    def final(step):
        return integrate(sys, drive, (1 + 0j, 0.0, 0.0), t_end=2.0, dt=step).a[-1]

    ref = final(dt / 4)
    ratio = abs(final(dt) - ref) / abs(final(dt / 2) - ref)
    return 12 <= ratio <= 20, f"error ratio {ratio:.2f}"


def check_time_domain():
    worst = 0.0
    ok = True
    for Dp in (1.0, -1.0):
        for Ep in SCALED_PUMPS:
            rep = crosscheck(SCALED, DriveParams.from_amplitudes(Ep, 1e-3 * Ep, Dp, Dp))
            worst = max(worst, rep.err_a_plus)
            ok = ok and rep.valid and rep.err_a_plus < 0.01
    return ok, f"worst a_plus error {worst:.1e}"


CHECKS = (
    ("bare cavity |t_p| = 1", check_bare_unitarity),
    ("bare cavity group delay = 2/kappa", check_bare_group_delay),
    ("photon-number cubic roots and stability", check_cubic),
    ("closed form vs linear system", check_closed_form),
    ("RK4 convergence order", check_rk4_order),
    ("time-domain crosscheck", check_time_domain),
)


def run_selftest(stream) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't abort the remaining checks
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok = all_ok and ok
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
    return all_ok
