"""Detuning and pump-power sweeps, and their CSV/JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

from . import __version__
from .config import DETUNING, POWER, Config, SweepSpec
from .errors import DifferentiationError, SingularResponseError
from .linear_response import phase_slope, probe_response
from .params import TWO_PI, DriveParams, SystemParams
from .steady_state import steady_state, track_branch

_ROW_ERRORS = (SingularResponseError, DifferentiationError)


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)


def unwrap_phase(values):
    """Remove 2 pi jumps sequentially; NaN entries are skipped and kept."""
    out = []
    prev = None
    offset = 0.0
    for v in values:
        if v is None or math.isnan(v):
            out.append(math.nan)
            continue
        if prev is not None:
            step = v - prev
            offset -= TWO_PI * round(step / TWO_PI)
        prev = v
        out.append(v + offset)
    return out


def _columns(swept: str, outputs) -> list[str]:
    cols = [swept]
    if "n_p" in outputs:
        cols.append("n_p")
    cols += ["branch", "fold"]
    if "magnitude" in outputs:
        cols.append("abs_tp")
    if "phase" in outputs:
        cols.append("phase_rad")
    if "group_delay" in outputs:
        cols.append("group_delay_s")
    if "a_plus" in outputs:
        cols += ["a_plus_re", "a_plus_im"]
    if "a_minus" in outputs:
        cols += ["a_minus_re", "a_minus_im"]
    cols.append("error")
    return cols


def _fill(row, resp, tau, outputs):
    if resp is None:
        for key in ("abs_tp", "phase_rad", "group_delay_s", "a_plus_re", "a_plus_im",
                    "a_minus_re", "a_minus_im"):
            row[key] = math.nan
        return
    row["abs_tp"] = abs(resp.t_p)
    row["phase_rad"] = resp.phase
    row["group_delay_s"] = math.nan if tau is None else tau
    row["a_plus_re"], row["a_plus_im"] = resp.a_plus.real, resp.a_plus.imag
    if resp.a_minus is not None:
        row["a_minus_re"], row["a_minus_im"] = resp.a_minus.real, resp.a_minus.imag


def _metadata(system: SystemParams, drive: DriveParams, spec: SweepSpec, settings, folds=0):
    return {
        "tool": "cavity-delay",
        "version": __version__,
        "kind": spec.kind,
        "convention": spec.convention.value,
        "direction": "descending" if spec.descending else "ascending",
        "config": dict(settings or {}),
        "system_rad_s": {
            "omega_c": system.omega_c, "omega_n": system.omega_n, "kappa": system.kappa,
            "lambda": system.lam, "gamma_n": system.gamma_n,
        },
        "resolved_sideband": system.resolved_sideband,
        "pump_detuning_rad_s": drive.Delta_p,
        "warnings": list(spec.warnings),
        "fold_events": folds,
    }


def _finish(cols, rows):
    phases = unwrap_phase([r.get("phase_rad", math.nan) for r in rows])
    for r, ph in zip(rows, phases):
        r["phase_rad"] = ph
    return [{c: r.get(c, math.nan) for c in cols} for r in rows]


def run_detuning_sweep(system: SystemParams, drive: DriveParams, spec: SweepSpec,
                       settings=None) -> SweepResult:
    """Probe response versus probe-cavity detuning at fixed pump.

    Grid values are ``Delta_r / 2 pi`` in Hz. The pump steady state is solved
    once and shared by every point.
    """
    outputs = spec.outputs
    ss = steady_state(system, drive)
    want_minus = "a_minus" in outputs
    want_tau = "group_delay" in outputs
    rows = []
    for x in spec.grid():
        x = float(x)
        delta = TWO_PI * x + drive.Delta_p
        row = {"detuning_hz": x, "n_p": ss.n_p, "branch": ss.branch, "fold": int(ss.tangency), "error": ""}
        resp = tau = None
        try:
            resp = probe_response(system, replace(drive, delta=delta), ss.n_p,
                                  spec.convention, with_a_minus=want_minus)
            if want_tau:
                tau = phase_slope(system, drive.Delta_p, delta, ss.n_p, spec.convention)
        except _ROW_ERRORS as exc:
            row["error"] = str(exc)
        _fill(row, resp, tau, outputs)
        rows.append(row)
    cols = _columns("detuning_hz", outputs)
    return SweepResult(cols, _finish(cols, rows),
                       _metadata(system, drive, spec, settings, int(ss.tangency)))


def run_power_sweep(system: SystemParams, drive: DriveParams, spec: SweepSpec,
                    settings=None) -> SweepResult:
    """Response at ``omega_r = omega_c`` versus pump power (grid in nW).

    The grid is walked in order with each steady-state solve seeded by the
    previous one, so a descending walk follows the other branch through a
    bistable region.
    """
    outputs = spec.outputs
    grid = [float(x) for x in spec.grid()]
    drives = [replace(drive, P_p=x * 1e-9, delta=drive.Delta_p) for x in grid]
    states = track_branch(system, drives)
    want_minus = "a_minus" in outputs
    want_tau = "group_delay" in outputs
    rows = []
    folds = 0
    for x, d, (ss, fold) in zip(grid, drives, states):
        folds += int(fold)
        row = {"pump_nw": x, "n_p": ss.n_p, "branch": ss.branch, "fold": int(fold), "error": ""}
        resp = tau = None
        try:
            resp = probe_response(system, d, ss.n_p, spec.convention, with_a_minus=want_minus)
            if want_tau:
                tau = phase_slope(system, d.Delta_p, d.Delta_p, ss.n_p, spec.convention)
        except _ROW_ERRORS as exc:
            row["error"] = str(exc)
        _fill(row, resp, tau, outputs)
        rows.append(row)
    cols = _columns("pump_nw", outputs)
    return SweepResult(cols, _finish(cols, rows), _metadata(system, drive, spec, settings, folds))


def run(config: Config) -> SweepResult:
    if config.sweep.kind == DETUNING:
        return run_detuning_sweep(config.system, config.drive, config.sweep, config.settings)
    if config.sweep.kind == POWER:
        return run_power_sweep(config.system, config.drive, config.sweep, config.settings)
    raise ValueError(f"unknown sweep kind {config.sweep.kind!r}")


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return "%.17g" % value


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_csv_cell(row[c]) for c in result.columns])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def to_json(result: SweepResult) -> str:
    doc = {"metadata": result.metadata, "columns": result.columns, "rows": result.rows}
    return json.dumps(_json_safe(doc), indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    return SweepResult(columns=list(doc["columns"]), rows=list(doc["rows"]), metadata=doc["metadata"])


def emit(result: SweepResult, format: str = "csv", destination=None) -> None:
    """Write ``result`` as CSV or JSON to a path, a text stream, or stdout."""
    if format == "csv":
        text = to_csv(result)
    elif format == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {format!r}")
    if destination is None:
        import sys
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
