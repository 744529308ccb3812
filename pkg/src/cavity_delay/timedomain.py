"""Time-domain integration of the nonlinear mean-field equations.

This is an independent check on the frequency-domain results: integrate

    da/dt   = -(i Delta_p + kappa) a + i lam a Q + E_p + E_r exp(-i delta t)
    Q'' + gamma_n Q' + omega_n^2 Q = 2 omega_n lam |a|^2

with fixed-step RK4, let transients die out, and lock-in demodulate the
cavity field at 0 and +/- delta.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidParameterError, WindowError
from .linear_response import probe_amplitudes_linear_system
from .params import DriveParams, SystemParams
from .steady_state import steady_state

STEP_RULE = 0.1
# crosscheck runs at half the allowed step: keeps the forced-tone phase error < 1e-6
CROSSCHECK_STEP = 0.05
RESIDUAL_LIMIT = 0.01
LINEAR_PROBE_RATIO = 1e-3


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    a: np.ndarray
    Q: np.ndarray
    Qdot: np.ndarray
    dt: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_s", "re_a", "im_a", "Q", "Qdot_per_s"])
            for t, a, q, qd in zip(self.t, self.a, self.Q, self.Qdot):
                writer.writerow([f"{v:.17g}" for v in (t, a.real, a.imag, q, qd)])


@dataclass(frozen=True)
class DemodulationResult:
    a0: complex
    a_plus: complex
    a_minus: complex
    residual: float


@dataclass(frozen=True)
class CrosscheckReport:
    err_a0: float
    err_a_plus: float
    err_a_minus: float
    residual: float
    valid: bool
    reason: str
    time_domain: DemodulationResult
    a0: complex
    a_plus: complex
    a_minus: complex


def integrate(sys: SystemParams, drive: DriveParams, initial=(0j, 0.0, 0.0),
              t_end: float = 1.0, dt: float = 1e-3, t0: float = 0.0) -> Trajectory:
    """Classical RK4 on (a, Q, Qdot) from ``t0`` to ``t_end`` with fixed step ``dt``.

    The number of steps is ``round((t_end - t0) / dt)``. Raises
    :class:`DivergenceError` if the state stops being finite.
    """
    kappa, lam, wn, gam = sys.kappa, sys.lam, sys.omega_n, sys.gamma_n
    Dp, delta = drive.Delta_p, drive.delta
    E_p, E_r = drive.pump_amplitude(sys), drive.probe_amplitude(sys)
    if not dt > 0:
        raise InvalidParameterError("dt", dt)
    if dt * max(wn, abs(Dp), kappa) > STEP_RULE:
        raise InvalidParameterError("dt", dt, f"dt*max(omega_n, |Delta_p|, kappa) must be <= {STEP_RULE}")
    n_steps = int(round((t_end - t0) / dt))
    if n_steps < 1:
        raise InvalidParameterError("t_end", t_end, "must exceed t0 by at least one step")

    decay = complex(kappa, Dp)
    wn2 = wn * wn
    force = 2.0 * wn * lam

    def rhs(t, a, q, v):
        da = -decay * a + 1j * lam * a * q + E_p + E_r * cmath.exp(-1j * delta * t)
        dv = -gam * v - wn2 * q + force * (a.real * a.real + a.imag * a.imag)
        return da, v, dv

    a, q, v = complex(initial[0]), float(initial[1]), float(initial[2])
    ts = np.empty(n_steps + 1)
    As = np.empty(n_steps + 1, dtype=complex)
    Qs = np.empty(n_steps + 1)
    Vs = np.empty(n_steps + 1)
    ts[0], As[0], Qs[0], Vs[0] = t0, a, q, v
    half = 0.5 * dt
    for k in range(n_steps):
        t = t0 + k * dt
        k1a, k1q, k1v = rhs(t, a, q, v)
        k2a, k2q, k2v = rhs(t + half, a + half * k1a, q + half * k1q, v + half * k1v)
        k3a, k3q, k3v = rhs(t + half, a + half * k2a, q + half * k2q, v + half * k2v)
        k4a, k4q, k4v = rhs(t + dt, a + dt * k3a, q + dt * k3q, v + dt * k3v)
        a = a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        q = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (cmath.isfinite(a) and math.isfinite(q) and math.isfinite(v)) or abs(a) > 1e150:
            raise DivergenceError(t)
        ts[k + 1], As[k + 1], Qs[k + 1], Vs[k + 1] = t0 + (k + 1) * dt, a, q, v
    return Trajectory(t=ts, a=As, Q=Qs, Qdot=Vs, dt=dt)


def demodulate(traj: Trajectory, delta: float, periods: int = 16,
               t_min: float | None = None) -> DemodulationResult:
    """Project the last ``periods`` beat periods of ``traj.a`` onto 1, exp(-i delta t), exp(+i delta t).

    The window must hold a whole number of samples, and ``t_min`` (if given)
    bounds its start from below.
    """
    if delta == 0:
        raise WindowError("delta must be nonzero to separate the sidebands")
    if periods < 5:
        raise WindowError(f"need at least 5 beat periods, got {periods}")
    span = periods * 2.0 * math.pi / abs(delta)
    m_float = span / traj.dt
    m = int(round(m_float))
    if abs(m_float - m) > 1e-6 * m_float:
        raise WindowError(f"window of {periods} periods is {m_float!r} samples, not an integer")
    if m > len(traj.t):
        raise WindowError(f"trajectory has {len(traj.t)} samples, window needs {m}")
    t = traj.t[-m:]
    if t_min is not None and t[0] < t_min:
        raise WindowError(f"window starts at t={t[0]!r}, before the transient cutoff {t_min!r}")
    a = traj.a[-m:]
    rot = np.exp(-1j * delta * t)
    a0 = a.mean()
    a_plus = (a * rot.conjugate()).mean()
    a_minus = (a * rot).mean()
    fit = a0 + a_plus * rot + a_minus * rot.conjugate()
    power = np.mean(np.abs(a) ** 2)
    residual = float(np.mean(np.abs(a - fit) ** 2) / power) if power > 0 else 0.0
    return DemodulationResult(complex(a0), complex(a_plus), complex(a_minus), min(max(residual, 0.0), 1.0))


def _rel(x, ref, floor):
    return abs(x - ref) / max(abs(ref), floor)


def crosscheck(sys: SystemParams, drive: DriveParams, periods: int = 16,
               settle: float | None = None, start: str = "steady") -> CrosscheckReport:
    """Compare demodulated time-domain tones with the frequency-domain solution.

    The default settling time is ``30 / gamma_n``; the demodulation window
    follows it. ``start="steady"`` launches from the pump-only steady state
    so only the probe switch-on transient has to decay; ``"rest"`` starts
    from zero.
    The error on ``a_minus`` is relative to ``max(|a_minus|, |a_plus|)``
    because the mixing sideband vanishes without coupling.
    """
    ss = steady_state(sys, drive)
    a_plus, a_minus = probe_amplitudes_linear_system(sys, drive, ss.n_p)
    delta = drive.delta
    if delta == 0:
        raise WindowError("delta must be nonzero")
    rate = max(sys.omega_n, abs(drive.Delta_p), sys.kappa, abs(delta))
    per_period = math.ceil(2.0 * math.pi * rate / (abs(delta) * CROSSCHECK_STEP))
    dt = 2.0 * math.pi / (abs(delta) * per_period)
    if settle is None:
        settle = 30.0 / sys.gamma_n
    n_settle = math.ceil(settle / dt)
    t_end = (n_settle + periods * per_period) * dt
    if start == "steady":
        initial = (ss.a0, ss.Q0, 0.0)
    elif start == "rest":
        initial = (0j, 0.0, 0.0)
    else:
        raise ValueError(f"unknown start {start!r}")
    traj = integrate(sys, drive, initial, t_end=t_end, dt=dt)
    td = demodulate(traj, delta, periods, t_min=n_settle * dt * (1 - 1e-12))

    reasons = []
    E_p, E_r = drive.pump_amplitude(sys), drive.probe_amplitude(sys)
    if E_r > LINEAR_PROBE_RATIO * E_p:
        reasons.append(f"probe/pump amplitude ratio {E_r / E_p if E_p else math.inf:.3g} exceeds {LINEAR_PROBE_RATIO}")
    if td.residual >= RESIDUAL_LIMIT:
        reasons.append(f"demodulation residual {td.residual:.3g} >= {RESIDUAL_LIMIT}")
    return CrosscheckReport(
        err_a0=_rel(td.a0, ss.a0, 1e-300),
        err_a_plus=_rel(td.a_plus, a_plus, 1e-300),
        err_a_minus=_rel(td.a_minus, a_minus, max(abs(a_plus), 1e-300)),
        residual=td.residual,
        valid=not reasons,
        reason="; ".join(reasons),
        time_domain=td,
        a0=ss.a0,
        a_plus=a_plus,
        a_minus=a_minus,
    )
