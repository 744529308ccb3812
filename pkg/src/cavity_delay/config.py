"""Line-oriented ``key = value`` run configuration.

Missing keys take the device defaults (7.5 GHz cavity, 6.3 MHz resonator,
600 kHz linewidth, 250 coupling, Q = 1e6). Frequencies are given in the unit
named by the key; powers in nW.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, InvalidParameterError
from .linear_response import Convention
from .params import TWO_PI, DriveParams, SystemParams, make_system_params

DETUNING = "detuning"
POWER = "power"
OUTPUT_CHOICES = ("magnitude", "phase", "group_delay", "a_plus", "a_minus", "n_p")

KEYS = (
    "f_cavity_ghz", "f_mech_mhz", "kappa_khz", "lambda_hz", "lambda_angular", "q_mech",
    "pump_nw", "probe_nw", "pump_detuning", "sweep.kind", "sweep.start", "sweep.stop",
    "sweep.count", "sweep.direction", "convention", "outputs",
)

DEFAULTS = {
    "f_cavity_ghz": "7.5",
    "f_mech_mhz": "6.3",
    "kappa_khz": "600",
    "lambda_hz": "250",
    "lambda_angular": "true",
    "q_mech": "1e6",
    "pump_nw": "8",
    "probe_nw": "0.001",
    "pump_detuning": "+omega_n",
    "sweep.kind": DETUNING,
    "sweep.direction": "ascending",
    "convention": "flux",
}

_KIND_DEFAULTS = {
    # detuning range is +-3 kappa, filled in once kappa is known
    DETUNING: {"sweep.count": "601", "outputs": "magnitude,phase,n_p"},
    POWER: {"sweep.start": "0.5", "sweep.stop": "10", "sweep.count": "20",
            "outputs": "magnitude,phase,n_p,group_delay"},
}


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    start: float
    stop: float
    count: int
    convention: Convention
    outputs: tuple[str, ...]
    warnings: tuple[str, ...] = ()
    descending: bool = False

    def grid(self):
        """Grid points in walk order; ``descending`` walks stop -> start."""
        import numpy as np
        g = np.linspace(self.start, self.stop, self.count)
        return g[::-1] if self.descending else g


@dataclass(frozen=True)
class Config:
    system: SystemParams
    drive: DriveParams
    sweep: SweepSpec
    settings: dict

    def __iter__(self):
        return iter((self.system, self.drive, self.sweep))


def read_settings(text: str) -> dict:
    """Parse ``key = value`` lines into a dict, rejecting unknown or repeated keys."""
    settings = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno, key=key)
        if key in settings:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, key=key)
        settings[key] = value
    return settings


def settings_to_text(settings: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in settings.items())


def apply_overrides(settings: dict, overrides) -> dict:
    out = dict(settings)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        key = key.lower()
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        out[key] = value
    return out


def _number(settings, key, *, positive=False, nonneg=False):
    raw = settings[key]
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}", key=key) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite", key=key)
    if positive and value <= 0:
        raise ConfigError(f"{key}: out of range, must be > 0 (got {raw})", key=key)
    if nonneg and value < 0:
        raise ConfigError(f"{key}: out of range, must be >= 0 (got {raw})", key=key)
    return value


def _bool(settings, key):
    raw = settings[key].lower()
    if raw in ("true", "yes", "1"):
        return True
    if raw in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {settings[key]!r}", key=key)


def _pump_detuning(raw: str, omega_n: float) -> float:
    alias = raw.replace(" ", "").lower()
    if alias in ("+omega_n", "omega_n"):
        return omega_n
    if alias == "-omega_n":
        return -omega_n
    try:
        return TWO_PI * float(raw)
    except ValueError:
        raise ConfigError(f"pump_detuning: expected +omega_n, -omega_n or Hz, got {raw!r}",
                          key="pump_detuning") from None


def _canonical(value: float) -> str:
    return repr(float(value))


def resolve(settings: dict) -> Config:
    """Fill defaults, validate ranges and convert to internal units."""
    s = dict(DEFAULTS)
    s.update(settings)
    kind = s["sweep.kind"].lower()
    if kind not in (DETUNING, POWER):
        raise ConfigError(f"sweep.kind: expected detuning or power, got {s['sweep.kind']!r}", key="sweep.kind")
    s["sweep.kind"] = kind
    for key, value in _KIND_DEFAULTS[kind].items():
        s.setdefault(key, value)

    f_c = _number(s, "f_cavity_ghz", positive=True) * 1e9
    f_n = _number(s, "f_mech_mhz", positive=True) * 1e6
    kappa_hz = _number(s, "kappa_khz", positive=True) * 1e3
    lam = _number(s, "lambda_hz", nonneg=True)
    q = _number(s, "q_mech", positive=True)
    angular = _bool(s, "lambda_angular")
    try:
        system = make_system_params(f_c, f_n, kappa_hz, lam, q, lambda_angular=angular)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None

    if kind == DETUNING:
        span = 3.0 * kappa_hz
        s.setdefault("sweep.start", _canonical(-span))
        s.setdefault("sweep.stop", _canonical(span))

    pump = _number(s, "pump_nw", nonneg=True)
    probe = _number(s, "probe_nw", nonneg=True)
    Delta_p = _pump_detuning(s["pump_detuning"], system.omega_n)
    drive = DriveParams(P_p=pump * 1e-9, P_r=probe * 1e-9, Delta_p=Delta_p, delta=Delta_p)

    start = _number(s, "sweep.start")
    stop = _number(s, "sweep.stop")
    try:
        count = int(s["sweep.count"])
    except ValueError:
        raise ConfigError(f"sweep.count: not an integer: {s['sweep.count']!r}", key="sweep.count") from None
    if count < 2:
        raise ConfigError("sweep.count: out of range, must be >= 2", key="sweep.count")
    if not start < stop:
        raise ConfigError("sweep.start must be smaller than sweep.stop", key="sweep.start")
    if kind == POWER and start < 0:
        raise ConfigError("sweep.start: out of range, pump power must be >= 0", key="sweep.start")
    try:
        convention = Convention(s["convention"].lower())
    except ValueError:
        raise ConfigError(f"convention: expected flux or sqrt, got {s['convention']!r}", key="convention") from None
    direction = s["sweep.direction"].strip().lower()
    if direction not in ("ascending", "descending"):
        raise ConfigError(f"sweep.direction: expected ascending or descending, got {direction!r}",
                          key="sweep.direction")
    outputs = tuple(o.strip().lower() for o in s["outputs"].split(",") if o.strip())
    bad = [o for o in outputs if o not in OUTPUT_CHOICES]
    if bad:
        raise ConfigError(f"outputs: unknown column(s) {', '.join(bad)}", key="outputs")

    warnings = []
    if kind == DETUNING:
        step = TWO_PI * (stop - start) / (count - 1)
        if step > system.kappa / 50:
            warnings.append(f"detuning step {step:.6g} rad/s exceeds kappa/50; phase unwrapping may be unreliable")
    spec = SweepSpec(kind=kind, start=start, stop=stop, count=count, convention=convention,
                     outputs=outputs, warnings=tuple(warnings),
                     descending=direction == "descending")
    echo = {key: s[key] for key in KEYS}
    return Config(system=system, drive=drive, sweep=spec, settings=echo)


def parse_config(text: str, overrides=None) -> Config:
    return resolve(apply_overrides(read_settings(text), overrides))
