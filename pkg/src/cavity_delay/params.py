"""Device and drive parameters.

Internally every frequency and rate is angular (rad/s). Conversion from
laboratory units (Hz, W) happens only in the constructors below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError

HBAR = 1.054571817e-34  # J s
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Fixed device constants, all in rad/s.

    ``kappa`` is the amplitude decay rate of the cavity field and ``gamma_n``
    the velocity damping rate of the mechanical mode. ``lam`` may be zero
    (bare cavity); the other fields must be strictly positive.
    """

    omega_c: float
    omega_n: float
    kappa: float
    lam: float
    gamma_n: float

    def __post_init__(self):
        for name in ("omega_c", "omega_n", "kappa", "gamma_n"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(name, value)
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidParameterError("lam", self.lam, "must be non-negative")

    @property
    def resolved_sideband(self) -> bool:
        return self.omega_n > self.kappa

    @property
    def alpha(self) -> float:
        """Dimensionless nonlinearity 2 lam^2 / omega_n^2."""
        return 2.0 * self.lam**2 / self.omega_n**2

    @property
    def Q_n(self) -> float:
        return self.omega_n / self.gamma_n



def make_system_params(f_c, f_n, kappa_Hz, lambda_Hz, Q_n, lambda_angular=False):
    """Build :class:`SystemParams` from laboratory-unit inputs.

    Parameters
    ----------
    f_c, f_n : float
        Cavity and mechanical resonance frequencies [Hz].
    kappa_Hz : float
        Cavity decay rate quoted as a frequency [Hz]; multiplied by 2 pi.
    lambda_Hz : float
        Coupling strength. Multiplied by 2 pi unless ``lambda_angular`` is
        set, in which case the number is taken as rad/s unchanged.
    Q_n : float
        Mechanical quality factor; ``gamma_n = omega_n / Q_n``.
    """
    for name, value in (("f_c", f_c), ("f_n", f_n), ("kappa_Hz", kappa_Hz), ("Q_n", Q_n)):
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(name, value)
    # zero coupling is allowed: it is the bare-cavity reference
    if not (math.isfinite(lambda_Hz) and lambda_Hz >= 0):
        raise InvalidParameterError("lambda_Hz", lambda_Hz, "must be non-negative")
    omega_n = TWO_PI * f_n
    lam = lambda_Hz if lambda_angular else TWO_PI * lambda_Hz
    return SystemParams(
        omega_c=TWO_PI * f_c,
        omega_n=omega_n,
        kappa=TWO_PI * kappa_Hz,
        lam=lam,
        gamma_n=omega_n / Q_n,
    )


def drive_amplitude(P, kappa, omega):
    """Field amplitude sqrt(2 P kappa / (hbar omega)) in s^-1 for power ``P`` in W."""
    if not P >= 0:
        raise InvalidParameterError("P", P, "power must be non-negative")
    if not kappa > 0:
        raise InvalidParameterError("kappa", kappa)
    if not omega > 0:
        raise InvalidParameterError("omega", omega)
    return math.sqrt(2.0 * P * kappa / (HBAR * omega))


@dataclass(frozen=True)
class DriveParams:
    """Pump and probe settings.

    ``Delta_p = omega_c - omega_p`` and ``delta = omega_r - omega_p``, both in
    rad/s. Powers are in W. For dimensionless model systems the drive
    amplitudes can be fixed directly via ``E_p``/``E_r``, bypassing the
    power conversion.
    """

    P_p: float = 0.0
    P_r: float = 0.0
    Delta_p: float = 0.0
    delta: float = 0.0
    E_p: float | None = None
    E_r: float | None = None

    def __post_init__(self):
        for name in ("P_p", "P_r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameterError(name, value, "power must be non-negative")
        for name in ("E_p", "E_r"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise InvalidParameterError(name, value, "amplitude must be non-negative")

    @classmethod
    def from_amplitudes(cls, E_p, E_r, Delta_p, delta):
        return cls(Delta_p=Delta_p, delta=delta, E_p=float(E_p), E_r=float(E_r))

    @property
    def Delta_r(self) -> float:
        """Probe-cavity detuning omega_r - omega_c."""
        return self.delta - self.Delta_p

    def omega_p(self, sys: SystemParams) -> float:
        return sys.omega_c - self.Delta_p

    def omega_r(self, sys: SystemParams) -> float:
        return sys.omega_c - self.Delta_p + self.delta

    def pump_amplitude(self, sys: SystemParams) -> float:
        if self.E_p is not None:
            return self.E_p
        return drive_amplitude(self.P_p, sys.kappa, self.omega_p(sys))

    def probe_amplitude(self, sys: SystemParams) -> float:
        if self.E_r is not None:
            return self.E_r
        return drive_amplitude(self.P_r, sys.kappa, self.omega_r(sys))
