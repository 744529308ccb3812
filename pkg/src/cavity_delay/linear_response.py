"""Weak-probe response of the pumped system.

The probe enters at first order on top of the pump steady state. The
sideband at the probe frequency (``a_plus``) has a closed form; the full
two-sideband problem (``a_plus`` and the mixing sideband ``a_minus`` at
``2 omega_p - omega_r``) is also solved directly as a 2x2 linear system
built from the equations of motion, which doubles as a check on the closed
form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DifferentiationError, SingularResponseError
from .params import DriveParams, SystemParams
from .steady_state import SteadyState, steady_state

_DEN_GUARD = 1e-300


class Convention(str, enum.Enum):
    """How the outgoing probe is normalised.

    ``FLUX``: ``t = 1 - 2 kappa a_plus / E_r`` (dimensionless; default).
    ``SQRT``: ``t = 1 - sqrt(2 kappa) a_plus / E_r``, the unit-mixing form
    kept for comparison with the printed expression.
    """

    FLUX = "flux"
    SQRT = "sqrt"


@dataclass(frozen=True)
class ResponseCoefficients:
    eta: complex
    alpha: float
    beta: complex
    theta: complex


@dataclass(frozen=True)
class ProbeResponse:
    a_plus: complex
    a_minus: complex | None
    t_p: complex
    phase: float
    group_delay: float | None = None

    @property
    def magnitude(self) -> float:
        return abs(self.t_p)


def susceptibility_eta(delta, omega_n, gamma_n):
    """Normalised mechanical response omega_n^2 / (omega_n^2 - delta^2 - i gamma_n delta)."""
    den = omega_n**2 - delta**2 - 1j * gamma_n * delta
    if np.any(np.abs(den) <= _DEN_GUARD * omega_n**2):
        raise SingularResponseError("mechanical pole", delta=delta)
    return omega_n**2 / den


def response_coefficients(sys: SystemParams, n_p: float, delta) -> ResponseCoefficients:
    eta = susceptibility_eta(delta, sys.omega_n, sys.gamma_n)
    alpha = 2.0 * sys.lam**2 / sys.omega_n**2
    beta = alpha**2 * eta**2 * sys.omega_n**2 * n_p**2
    theta = 1j * alpha * sys.omega_n * n_p * (eta + 1)
    return ResponseCoefficients(eta=eta, alpha=alpha, beta=beta, theta=theta)


def probe_ratio(sys: SystemParams, Delta_p: float, delta, n_p: float):
    """Closed-form ``a_plus / E_r``; accepts scalar or array ``delta``."""
    c = response_coefficients(sys, n_p, delta)
    kappa = sys.kappa
    num = delta + Delta_p + 1j * (kappa + c.theta)
    den = (delta + 1j * kappa) ** 2 + (c.theta - 1j * Delta_p) ** 2 + c.beta
    if np.any(np.abs(den) <= _DEN_GUARD):
        raise SingularResponseError("vanishing response denominator", delta=delta)
    return 1j * num / den


def probe_amplitude_closed_form(sys: SystemParams, drive: DriveParams, n_p: float) -> complex:
    return probe_ratio(sys, drive.Delta_p, drive.delta, n_p) * drive.probe_amplitude(sys)


def probe_amplitudes_linear_system(sys: SystemParams, drive: DriveParams,
                                   n_p: float) -> tuple[complex, complex]:
    """Solve for ``(a_plus, a_minus)`` from the linearised equations of motion.

    Writes ``a = a0 + a+ e^{-i delta t} + a- e^{i delta t}`` and the matching
    real displacement, keeps terms linear in the probe and eliminates the
    displacement sideband through the bare mechanical response. The unknowns
    are ``a_plus`` and ``conj(a_minus)``.
    """
    kappa, lam, wn = sys.kappa, sys.lam, sys.omega_n
    delta = drive.delta
    E_r = drive.probe_amplitude(sys)
    Q0 = 2.0 * lam * n_p / wn
    detuning = drive.Delta_p - lam * Q0
    # pump field phase follows from E_p real: a0 = E_p / (kappa + i detuning)
    a0 = math.sqrt(n_p) * complex(kappa, -detuning) / abs(complex(kappa, detuning))

    mech = wn**2 - delta**2 - 1j * sys.gamma_n * delta
    if mech == 0:
        raise SingularResponseError("mechanical pole", delta=delta)
    K = 2.0 * wn * lam**2 / mech
    n = abs(a0) ** 2
    M = np.array([
        [kappa + 1j * (detuning - delta) - 1j * K * n, -1j * K * a0 * a0],
        [1j * K * (a0 * a0).conjugate(), kappa - 1j * (detuning + delta) + 1j * K * n],
    ], dtype=complex)
    if abs(np.linalg.det(M)) <= _DEN_GUARD:
        raise SingularResponseError("singular sideband system", delta=delta)
    a_plus, a_minus_conj = np.linalg.solve(M, np.array([E_r, 0.0], dtype=complex))
    return complex(a_plus), complex(a_minus_conj).conjugate()


def _transmission_from_ratio(kappa: float, ratio, convention: Convention):
    if Convention(convention) is Convention.FLUX:
        return 1.0 - 2.0 * kappa * ratio
    return 1.0 - math.sqrt(2.0 * kappa) * ratio


def transmission(sys: SystemParams, a_plus: complex, E_r: float,
                 convention: Convention | str = Convention.FLUX) -> complex:
    if E_r == 0:
        raise ValueError("probe amplitude must be nonzero")
    return _transmission_from_ratio(sys.kappa, a_plus / E_r, convention)


def transmission_at(sys: SystemParams, Delta_p: float, delta, n_p: float,
                    convention: Convention | str = Convention.FLUX):
    """Probe transmission; independent of the probe strength."""
    return _transmission_from_ratio(sys.kappa, probe_ratio(sys, Delta_p, delta, n_p), convention)


def probe_response(sys: SystemParams, drive: DriveParams, n_p: float,
                   convention: Convention | str = Convention.FLUX,
                   with_a_minus: bool = True) -> ProbeResponse:
    ratio = probe_ratio(sys, drive.Delta_p, drive.delta, n_p)
    t_p = _transmission_from_ratio(sys.kappa, ratio, convention)
    a_minus = None
    if with_a_minus:
        a_minus = probe_amplitudes_linear_system(sys, drive, n_p)[1]
    return ProbeResponse(
        a_plus=complex(ratio * drive.probe_amplitude(sys)),
        a_minus=a_minus,
        t_p=complex(t_p),
        phase=float(np.angle(t_p)),
    )


def phase_slope(sys: SystemParams, Delta_p: float, delta: float, n_p: float,
                convention: Convention | str = Convention.FLUX,
                h: float | None = None, rtol: float = 1e-3, max_halvings: int = 10) -> float:
    """d arg(t_p) / d omega_r at fixed pump, in seconds.

    Central differences at steps ``h`` and ``h/2`` must agree to ``rtol``;
    otherwise the step is halved. Returns the Richardson-extrapolated value.
    The default step is 1e-3 of the narrowest linewidth in play: the
    transparency window is only about ``gamma_n`` wide at weak pumping.
    """
    if h is None:
        width = min(sys.kappa, sys.gamma_n) if sys.lam > 0 else sys.kappa
        # never below what delta can resolve
        h = max(1e-3 * width, 1e3 * np.finfo(float).eps * abs(delta))

    def central(step):
        hi, lo = delta + step, delta - step
        if hi == lo:
            raise DifferentiationError(f"step {step!r} is below the resolution of delta={delta!r}")
        t_hi = transmission_at(sys, Delta_p, hi, n_p, convention)
        t_lo = transmission_at(sys, Delta_p, lo, n_p, convention)
        # angle of the ratio is the unwrapped phase increment for |dphi| < pi;
        # divide by the representable spacing, not the nominal 2 * step
        return float(np.angle(t_hi / t_lo)) / (hi - lo)

    history = []
    coarse = central(h)
    for _ in range(max_halvings + 1):
        fine = central(h / 2)
        history.append((h, coarse, fine))
        if abs(coarse - fine) <= rtol * abs(fine):
            return (4.0 * fine - coarse) / 3.0
        h /= 2
        coarse = fine
    detail = ", ".join(f"h={hh:.3g}: {c:.6g} vs {f:.6g}" for hh, c, f in history)
    raise DifferentiationError(f"phase derivative did not converge at delta={delta!r} ({detail})")


def group_delay(sys: SystemParams, drive: DriveParams,
                convention: Convention | str = Convention.FLUX,
                state: SteadyState | None = None) -> float:
    """Group delay of the probe evaluated at the bare cavity frequency.

    The pump (``P_p``, ``Delta_p``) is held fixed, so the photon number is
    computed once; the probe sits at ``omega_r = omega_c``, i.e.
    ``delta = Delta_p``. Positive values mean delay, negative advancement.
    """
    if state is None:
        state = steady_state(sys, drive)
    return phase_slope(sys, drive.Delta_p, drive.Delta_p, state.n_p, convention)
