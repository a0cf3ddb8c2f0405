"""File formats shared by every module and the command-line tool.

Complex data is stored as nested arrays of [re, im] pairs. Angular
frequencies in files are always rad/s (field names carry a _rad_s suffix);
Hz only ever appears in help text. All writers are atomic (temp file +
rename), so failed commands never leave partial outputs.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .control import ControlParams, ControlWaveform, FilterSpec
from .dynamics import Trajectory
from .spincore import QuantumState

__all__ = [
    "complex_to_pairs",
    "pairs_to_complex",
    "state_to_dict",
    "state_from_dict",
    "operator_to_dict",
    "operator_from_dict",
    "waveform_to_dict",
    "waveform_from_dict",
    "filter_to_dict",
    "filter_from_dict",
    "trajectory_to_dict",
    "trajectory_from_dict",
    "write_json",
    "read_json",
    "write_text",
    "write_csv",
]


def complex_to_pairs(arr: np.ndarray):
    arr = np.asarray(arr, dtype=complex)
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def pairs_to_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex data must be nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# states and operators


def state_to_dict(state: QuantumState) -> dict:
    return {"f": state.f, "kind": state.kind, "data": complex_to_pairs(state.data)}


def state_from_dict(obj: dict) -> QuantumState:
    try:
        kind = obj["kind"]
        data = pairs_to_complex(obj["data"])
    except KeyError as exc:
        raise ValueError(f"state object missing field {exc.args[0]!r}") from None
    state = QuantumState(kind=kind, data=data)
    if "f" in obj and abs(state.f - float(obj["f"])) > 1e-9:
        raise ValueError(f"state dimension {state.dim} inconsistent with f={obj['f']}")
    return state


def operator_to_dict(op: np.ndarray, f: float) -> dict:
    return {"f": f, "kind": "operator", "data": complex_to_pairs(op)}


def operator_from_dict(obj: dict) -> np.ndarray:
    if obj.get("kind") != "operator":
        raise ValueError("not an operator object")
    return pairs_to_complex(obj["data"])


# ---------------------------------------------------------------------------
# waveforms


def params_to_dict(params: ControlParams) -> dict:
    return {
        "larmor_rate_rad_s": params.larmor_rate,
        "nonlinear_rate_rad_s": params.nonlinear_rate,
        "beta": params.beta,
        "scattering_rate_per_s": params.scattering_rate,
        "duration_s": params.duration,
        "n_steps": params.n_steps,
    }


def params_from_dict(obj: dict) -> ControlParams:
    return ControlParams(
        larmor_rate=obj["larmor_rate_rad_s"],
        nonlinear_rate=obj["nonlinear_rate_rad_s"],
        beta=obj["beta"],
        scattering_rate=obj.get("scattering_rate_per_s"),
        duration=obj["duration_s"],
        n_steps=int(obj["n_steps"]),
    )


def filter_to_dict(filt: FilterSpec) -> dict:
    return {
        "cutoff_hz": filt.cutoff,
        "slew_limit_per_s": filt.slew_limit,
        "substeps_per_step": filt.substeps_per_step,
    }


def filter_from_dict(obj: dict) -> FilterSpec:
    return FilterSpec(
        cutoff=obj["cutoff_hz"],
        slew_limit=obj.get("slew_limit_per_s"),
        substeps_per_step=int(obj["substeps_per_step"]),
    )


def waveform_to_dict(w: ControlWaveform, filt: FilterSpec | None = None) -> dict:
    out = {"params": params_to_dict(w.params), "phis": list(map(float, w.phis))}
    if filt is not None:
        out["filter"] = filter_to_dict(filt)
    return out


def waveform_from_dict(obj: dict):
    """Returns (waveform, filter-or-None)."""
    w = ControlWaveform(phis=np.asarray(obj["phis"], dtype=float),
                        params=params_from_dict(obj["params"]))
    filt = filter_from_dict(obj["filter"]) if obj.get("filter") else None
    return w, filt


# ---------------------------------------------------------------------------
# trajectories


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "times_s": list(map(float, traj.times)),
        "states": [state_to_dict(s) for s in traj.states],
        "metrics": {k: list(map(float, v)) for k, v in traj.metrics.items()},
    }


def trajectory_from_dict(obj: dict) -> Trajectory:
    return Trajectory(
        times=np.asarray(obj["times_s"], dtype=float),
        states=[state_from_dict(s) for s in obj["states"]],
        metrics={k: np.asarray(v, dtype=float) for k, v in obj["metrics"].items()},
    )


def trajectory_csv_rows(traj: Trajectory):
    """Header and rows of the flattened metric table (time + channels)."""
    names = sorted(traj.metrics)
    header = ["time_s"] + names
    rows = []
    for i, t in enumerate(traj.times):
        rows.append([t] + [traj.metrics[k][i] for k in names])
    return header, rows


# ---------------------------------------------------------------------------
# atomic file helpers


def _atomic_write(path: str, payload: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def write_text(path: str, text: str) -> None:
    _atomic_write(path, text)


def write_csv(path: str, header, rows, comments=()) -> None:
    """CSV with '#'-prefixed self-description lines before the header."""
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(str(h) for h in header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)
