"""Pump-probe response of a nanomechanical resonator coupled to a microwave cavity."""

__version__ = "0.1.0"

from .params import DriveParams, SystemParams, drive_amplitude, make_system_params  # noqa: E402
from .steady_state import SteadyState, steady_state  # noqa: E402
from .linear_response import Convention, ProbeResponse, group_delay, probe_response  # noqa: E402

__all__ = [
    "Convention", "DriveParams", "ProbeResponse", "SteadyState", "SystemParams",
    "drive_amplitude", "group_delay", "make_system_params", "probe_response", "steady_state",
]
