"""Command-line entry point: spinctl {ops|optimize|simulate|squeeze|stats|wigner}.

Configuration layering: built-in defaults < --config file < command-line
flags. Config files are flat JSON objects; unknown keys are rejected by
name. Every command validates its inputs, computes, and only then writes
its outputs atomically, together with a run record (runrecord.json) holding
the effective configuration, seeds, versions, and file digests. Angular
frequencies in files are always rad/s; Hz appears only in help text.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys as _sys
import time

import numpy as np

from . import __version__
from .analysis import batch_evaluate, histogram_table, synthetic_batch
from .control import (ControlParams, FilterSpec, InitialPrep, default_filter,
                      default_initial_state, target_library, target_names)
from .dynamics import (Inhomogeneity, NoiseModel, default_noise, instantaneous_ground_state,
                       propagate_with_snapshots)
from .optimize import OptimizerConfig, default_stage2_config, design_control
from .serialize import (operator_to_dict, read_json, state_from_dict,
                        trajectory_csv_rows, trajectory_to_dict, waveform_from_dict,
                        waveform_to_dict, write_csv, write_json)
from .spincore import QuantumState, build_spin_system, yield_mixed
from .squeezing import (default_ramp, default_sweep_omegas, derive_ramp_time,
                        run_adiabatic, sweep_final_field)
from .wigner import wigner_grid

RECORD_NAME = "runrecord.json"

# Flat config-file schema (all overridable by flags). Values are caster
# functions; None values in files are passed through for nullable keys.
CONFIG_KEYS = {
    "f": float,
    "larmor_rate_rad_s": float,
    "nonlinear_rate_rad_s": float,
    "beta": float,
    "duration_s": float,
    "n_steps": int,
    "cutoff_hz": float,
    "slew_limit_per_s": float,
    "substeps_per_step": int,
    "scattering_rate_per_s": float,
    "decoherence_kind": str,
    "relative_sigma": float,
    "inhomogeneity_samples": int,
    "inhomogeneity_scheme": str,
    "pumped_fraction": float,
}


class CliError(Exception):
    """User-facing command error (maps to exit status 2)."""


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        raw = read_json(path)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}") from None
    if not isinstance(raw, dict):
        raise CliError("config file must hold a flat JSON object")
    out = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise CliError(f"unknown config key {key!r}")
        out[key] = None if value is None else CONFIG_KEYS[key](value)
    return out


def _effective(config: dict, flags: dict) -> dict:
    merged = dict(config)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return merged


def _params_from(cfg: dict) -> ControlParams:
    kwargs = {}
    for key, name in (("larmor_rate_rad_s", "larmor_rate"),
                      ("nonlinear_rate_rad_s", "nonlinear_rate"),
                      ("beta", "beta"), ("duration_s", "duration"),
                      ("n_steps", "n_steps"),
                      ("scattering_rate_per_s", "scattering_rate")):
        if key in cfg:
            kwargs[name] = cfg[key]
    return ControlParams(**kwargs)


def _filter_from(cfg: dict, params: ControlParams) -> FilterSpec:
    filt = default_filter(params)
    kwargs = {"cutoff": filt.cutoff, "slew_limit": filt.slew_limit,
              "substeps_per_step": filt.substeps_per_step}
    if "cutoff_hz" in cfg:
        kwargs["cutoff"] = cfg["cutoff_hz"]
    if "slew_limit_per_s" in cfg:
        kwargs["slew_limit"] = cfg["slew_limit_per_s"]
    if "substeps_per_step" in cfg:
        kwargs["substeps_per_step"] = cfg["substeps_per_step"]
    return FilterSpec(**kwargs)


def _noise_from(cfg: dict, params: ControlParams, enabled: bool) -> NoiseModel:
    if not enabled:
        return NoiseModel.none()
    base = default_noise(params)
    inh = base.inhomogeneity
    return NoiseModel(
        scattering_rate=cfg.get("scattering_rate_per_s", base.scattering_rate),
        decoherence_kind=cfg.get("decoherence_kind", base.decoherence_kind),
        inhomogeneity=Inhomogeneity(
            relative_sigma=cfg.get("relative_sigma", inh.relative_sigma),
            n_samples=cfg.get("inhomogeneity_samples", inh.n_samples),
            scheme=cfg.get("inhomogeneity_scheme", inh.scheme),
        ))


def _resolve_target(spec_str: str, sys) -> QuantumState:
    if spec_str in target_names():
        return target_library(spec_str, sys)
    if os.path.exists(spec_str):
        return state_from_dict(read_json(spec_str))
    raise CliError(
        f"unknown target {spec_str!r}: not a library name "
        f"({', '.join(target_names())}) and no such file")


# ---------------------------------------------------------------------------
# run records


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class RunRecord:
    """Provenance for one command invocation."""

    def __init__(self, command: str, config: dict, rng_seeds=()):
        self.started = time.time()
        self.data = {
            "command": command,
            "argv": _sys.argv[1:],
            "config": config,
            "rng_seeds": list(rng_seeds),
            "versions": {
                "spinctl": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "inputs": {},
            "outputs": {},
        }
        import scipy
        self.data["versions"]["scipy"] = scipy.__version__

    def add_input(self, path: str):
        if path and os.path.exists(path):
            self.data["inputs"][path] = _digest(path)

    def add_output(self, path: str):
        self.data["outputs"][os.path.basename(path)] = _digest(path)

    def write(self, path: str):
        self.data["wall_time_s"] = time.time() - self.started
        write_json(path, self.data)


def _record_ref(record_path: str) -> str:
    return os.path.basename(record_path)


# ---------------------------------------------------------------------------
# commands


def cmd_ops(args) -> int:
    sys_ = build_spin_system(args.f)
    cfg = {"f": args.f}
    record = RunRecord("ops", cfg)
    record_path = args.out + ".runrecord.json"
    payload = {
        "f": sys_.f,
        "run_record": _record_ref(record_path),
        "operators": {
            "fx": operator_to_dict(sys_.fx, sys_.f),
            "fy": operator_to_dict(sys_.fy, sys_.f),
            "fz": operator_to_dict(sys_.fz, sys_.f),
            "fx2": operator_to_dict(sys_.fx2, sys_.f),
        },
    }
    write_json(args.out, payload)
    record.add_output(args.out)
    record.write(record_path)
    print(f"wrote {args.out}")
    return 0


def cmd_optimize(args) -> int:
    cfg = _effective(_load_config(args.config), {
        "larmor_rate_rad_s": args.larmor_rate,
        "nonlinear_rate_rad_s": args.nonlinear_rate,
        "duration_s": args.duration,
        "n_steps": args.n_steps,
        "pumped_fraction": args.pumped_fraction,
    })
    params = _params_from(cfg)
    filt = _filter_from(cfg, params)
    noise = _noise_from(cfg, params, args.noise == "on")
    sys_ = build_spin_system(cfg.get("f", 3))
    target = _resolve_target(args.target, sys_)

    stage1_cfg = OptimizerConfig(
        n_seeds=args.seeds, rng_seed=args.rng_seed,
        max_iters=args.max_iters, target_objective=args.target_yield)
    stage2_cfg = default_stage2_config(stage1_cfg)
    if args.stage2_iters is not None:
        from dataclasses import replace
        stage2_cfg = replace(stage2_cfg, max_iters=args.stage2_iters)
    prep = None
    pumped = cfg.get("pumped_fraction")
    if pumped is not None and pumped < 1.0:
        prep = InitialPrep(target=default_initial_state(sys_), pumped_fraction=pumped)

    result = design_control(target, params=params, filt=filt, noise=noise,
                            stage1_config=stage1_cfg, stage2_config=stage2_cfg,
                            prep=prep)

    record = RunRecord("optimize", {**cfg, "seeds": args.seeds,
                                    "rng_seed": args.rng_seed,
                                    "noise": args.noise},
                       rng_seeds=[args.rng_seed])
    if args.config:
        record.add_input(args.config)
    os.makedirs(args.out, exist_ok=True)
    record_path = os.path.join(args.out, RECORD_NAME)
    waveform_path = os.path.join(args.out, "waveform.json")
    result_path = os.path.join(args.out, "result.json")

    wf = waveform_to_dict(result.waveform, filt)
    wf["run_record"] = _record_ref(record_path)
    write_json(waveform_path, wf)

    def _stage(res):
        return {
            "objective": res.objective,
            "final": float(res.history[-1]),
            "iterations": res.iterations,
            "seed_index": res.seed_index,
            "converged": res.converged,
            "history": list(map(float, res.history)),
        }

    write_json(result_path, {
        "run_record": _record_ref(record_path),
        "target": args.target,
        "yield_pure_final": result.stage2.yield_pure_final,
        "yield_mixed_final": result.stage2.yield_mixed_final,
        "stage1": _stage(result.stage1),
        "stage2": _stage(result.stage2),
    })
    record.add_output(waveform_path)
    record.add_output(result_path)
    record.write(record_path)
    print(f"stage1 yield_pure={result.stage1.yield_pure_final:.6f} "
          f"stage2 yield_mixed={result.stage2.yield_mixed_final:.6f} -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    try:
        wf_obj = read_json(args.waveform)
    except FileNotFoundError:
        raise CliError(f"waveform file not found: {args.waveform}") from None
    waveform, file_filt = waveform_from_dict(wf_obj)
    params = waveform.params
    cfg = _effective(_load_config(args.config), {
        "pumped_fraction": args.pumped_fraction,
    })
    filt = file_filt or _filter_from(cfg, params)
    sys_ = build_spin_system(cfg.get("f", 3))
    use_master = args.master or (cfg.get("pumped_fraction", 1.0) < 1.0)
    noise = _noise_from(cfg, params, args.master and args.noise == "on")

    pumped = cfg.get("pumped_fraction", 1.0)
    psi0 = default_initial_state(sys_)
    if pumped < 1.0:
        from .control import prepare_initial
        state0 = prepare_initial(sys_, InitialPrep(target=psi0, pumped_fraction=pumped))
    elif use_master:
        state0 = QuantumState.mixed(psi0.density())
    else:
        state0 = psi0

    from .control import render_waveform
    drive = render_waveform(waveform, filt)
    if drive.n_samples and sys_.dim != state0.dim:
        raise CliError("state dimension does not match waveform spin system")
    traj = propagate_with_snapshots(state0, drive, params, noise, args.snapshots, sys=sys_)

    target = None
    if args.target:
        target = _resolve_target(args.target, sys_)
        traj.metrics["yield_to_target"] = np.array(
            [yield_mixed(target, s) for s in traj.states])

    record = RunRecord("simulate", {**cfg, "master": use_master, "noise": args.noise,
                                    "snapshots": args.snapshots})
    record.add_input(args.waveform)
    if args.config:
        record.add_input(args.config)
    os.makedirs(args.out, exist_ok=True)
    record_path = os.path.join(args.out, RECORD_NAME)

    traj_json = trajectory_to_dict(traj)
    traj_json["run_record"] = _record_ref(record_path)
    traj_path = os.path.join(args.out, "trajectory.json")
    write_json(traj_path, traj_json)
    record.add_output(traj_path)

    header, rows = trajectory_csv_rows(traj)
    csv_path = os.path.join(args.out, "trajectory.csv")
    comments = [
        "spinctl simulate trajectory metrics",
        "time_s in seconds; exp_*/var_* dimensionless (hbar=1)",
        "yield_to_target is the Uhlmann amplitude Tr sqrt(sqrt(rho_T) rho sqrt(rho_T))",
        f"run_record: {_record_ref(record_path)}",
    ]
    write_csv(csv_path, header, rows, comments)
    record.add_output(csv_path)

    if args.wigner:
        for i, state in enumerate(traj.states):
            grid = wigner_grid(state, args.ntheta, args.nphi)
            path = os.path.join(args.out, f"wigner_{i:02d}.csv")
            _write_grid(path, grid, traj.times[i], _record_ref(record_path))
            record.add_output(path)

    record.write(record_path)
    print(f"wrote trajectory with {args.snapshots} snapshots -> {args.out}")
    return 0


def _write_grid(path: str, grid, t: float, record_ref: str):
    rows = []
    for i, theta in enumerate(grid.theta):
        for j, phi in enumerate(grid.phi):
            rows.append([float(theta), float(phi),
                         float(grid.weights[i, j]), float(grid.w[i, j])])
    write_csv(path, ["theta", "phi", "weight", "w"], rows, [
        "spherical Wigner function W(theta, phi)",
        f"normalization: W = sqrt(d/(4 pi)) sum rho_kq Y_kq; sphere integral = Tr rho = {grid.sphere_integral():.12f}",
        f"resolution: {len(grid.theta)} x {len(grid.phi)} (Gauss-Legendre x uniform)",
        f"snapshot_time_s: {t}",
        f"run_record: {record_ref}",
    ])


def cmd_squeeze(args) -> int:
    cfg = _effective(_load_config(args.config), {
        "larmor_rate_rad_s": args.larmor_rate,
        "nonlinear_rate_rad_s": args.nonlinear_rate,
        "pumped_fraction": args.pumped_fraction,
    })
    params = _params_from(cfg)
    noise = _noise_from(cfg, params, args.noise == "on")
    sys_ = build_spin_system(cfg.get("f", 3))

    ramp = default_ramp(params)
    overrides = {}
    if args.omega_start is not None:
        overrides["omega_start"] = args.omega_start
    if args.omega_end is not None:
        overrides["omega_end"] = args.omega_end
    if args.ramp_time is not None:
        overrides["ramp_time"] = args.ramp_time
    if args.hold_time is not None:
        overrides["hold_time"] = args.hold_time
    if args.shape is not None:
        overrides["ramp_shape"] = args.shape
    if overrides:
        from dataclasses import replace
        ramp = replace(ramp, **overrides)
    if args.adiabatic_criterion is not None:
        from dataclasses import replace
        ramp = replace(ramp, ramp_time=derive_ramp_time(
            sys_, params, ramp.omega_start, ramp.omega_end, ramp.ramp_shape,
            criterion=args.adiabatic_criterion))

    if args.sweep == "default":
        omegas = default_sweep_omegas(params)
    else:
        try:
            omegas = [float(x) for x in args.sweep.split(",") if x.strip()]
        except ValueError:
            raise CliError(f"cannot parse sweep list {args.sweep!r}") from None
        if not omegas:
            raise CliError("empty sweep list")

    initial_state = None
    prep = None
    if args.initial == "ground":
        initial_state = instantaneous_ground_state(
            sys_, params, 0.0, ramp.omega_start / params.larmor_rate).state
    pumped = cfg.get("pumped_fraction")
    if pumped is not None and pumped < 1.0:
        from .squeezing import Y_AXIS
        from .spincore import stretched_state
        prep = InitialPrep(target=stretched_state(sys_, Y_AXIS, -sys_.f),
                           pumped_fraction=pumped)

    rows = sweep_final_field(sys_, params, noise, ramp, omegas,
                             prep=prep, initial_state=initial_state)

    record = RunRecord("squeeze", {**cfg, "noise": args.noise,
                                   "ramp": {
                                       "omega_start_rad_s": ramp.omega_start,
                                       "omega_end_rad_s": ramp.omega_end,
                                       "ramp_time_s": ramp.ramp_time,
                                       "hold_time_s": ramp.hold_time,
                                       "shape": ramp.ramp_shape}})
    if args.config:
        record.add_input(args.config)
    os.makedirs(args.out, exist_ok=True)
    record_path = os.path.join(args.out, RECORD_NAME)

    csv_rows = []
    for row in rows:
        if row.report is None:
            csv_rows.append([row.omega_end] + [float("nan")] * 6 + [row.error or ""])
        else:
            r = row.report
            csv_rows.append([row.omega_end, r.xi, r.xi_normalized, r.squeezing_db,
                             r.anti_squeezing_db, r.mean_spin, r.ground_state_overlap, ""])
    sweep_path = os.path.join(args.out, "sweep.csv")
    write_csv(sweep_path,
              ["omega_end_rad_s", "xi", "xi_normalized", "squeezing_db",
               "anti_squeezing_db", "mean_spin", "ground_state_overlap", "error"],
              csv_rows, [
                  "squeezing sweep vs final field (squeeze axis x, mean axis y, anti axis z)",
                  "squeezing_db = 10 log10(2 Var(Fx)/|<Fy>|), 0 dB = spin coherent state",
                  f"ramp: {ramp.ramp_shape}, omega_start={ramp.omega_start} rad/s, "
                  f"ramp_time={ramp.ramp_time} s, hold_time={ramp.hold_time} s",
                  f"run_record: {_record_ref(record_path)}",
              ])
    record.add_output(sweep_path)

    ok_rows = [r for r in rows if r.report is not None]
    if ok_rows:
        best = min(ok_rows, key=lambda r: r.report.squeezing_db)
        traj, _ = run_adiabatic(sys_, params, noise, ramp.truncated_at(best.omega_end))
        ground = instantaneous_ground_state(
            sys_, params, 0.0, best.omega_end / params.larmor_rate)
        for name, state in (("wigner_best_target.csv", ground.state),
                            ("wigner_best_final.csv", traj.final_state)):
            path = os.path.join(args.out, name)
            _write_grid(path, wigner_grid(state, args.ntheta, args.nphi),
                        traj.times[-1], _record_ref(record_path))
            record.add_output(path)
        print(f"best squeezing {best.report.squeezing_db:.2f} dB at "
              f"omega_end={best.omega_end:.1f} rad/s -> {args.out}")
    record.write(record_path)
    return 0


def cmd_stats(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(cfg)
    if args.synthetic:
        labels, targets, predicted, measured, planted = synthetic_batch(
            params, n_targets=args.n, rng_seed=args.rng_seed,
            displacement_sigma=args.sigma)
    else:
        if not args.batch_dir:
            raise CliError("need --batch-dir or --synthetic")
        labels, targets, predicted, measured = _load_batch_dir(args.batch_dir)
        planted = []

    record_cfg = {**cfg, "synthetic": bool(args.synthetic), "n": args.n,
                  "rng_seed": args.rng_seed}
    record = RunRecord("stats", record_cfg, rng_seeds=[args.rng_seed])
    batch = batch_evaluate(labels, targets, predicted, measured)

    os.makedirs(args.out, exist_ok=True)
    record_path = os.path.join(args.out, RECORD_NAME)
    tables = {
        "yields.csv": batch.values("yield_mixed"),
        "fidelities.csv": batch.values("fidelity"),
        "corrected_yields.csv": batch.values("corrected_yield"),
        "corrected_fidelities.csv": batch.values("corrected_fidelity"),
    }
    for name, values in tables.items():
        path = os.path.join(args.out, name)
        rows = histogram_table(values, n_bins=args.bins)
        write_csv(path, ["bin_left", "bin_right", "count"], rows, [
            f"histogram of {name.removesuffix('.csv')} over {len(values)} entries",
            "yield/fidelity = Uhlmann amplitude Tr sqrt(sqrt(A) B sqrt(A))",
            f"run_record: {_record_ref(record_path)}",
        ])
        record.add_output(path)

    batch_path = os.path.join(args.out, "batch.json")
    write_json(batch_path, {
        "run_record": _record_ref(record_path),
        "synthetic": bool(args.synthetic),
        "planted": planted,
        "entries": [
            {"label": e.label, "yield_mixed": e.yield_mixed, "fidelity": e.fidelity,
             "corrected_yield": e.corrected_yield,
             "corrected_fidelity": e.corrected_fidelity,
             "rotation_angle_rad": e.rotation_angle,
             "rotation_euler_zyz_rad": list(e.rotation_euler_zyz),
             "error": e.error}
            for e in batch.entries
        ],
    })
    record.add_output(batch_path)
    record.write(record_path)
    print(f"evaluated {len(labels)} entries -> {args.out}")
    return 0


def _load_batch_dir(path: str):
    if not os.path.isdir(path):
        raise CliError(f"batch directory not found: {path}")
    suffixes = (".target.json", ".predicted.json", ".measured.json")
    groups: dict = {}
    for name in sorted(os.listdir(path)):
        for suffix in suffixes:
            if name.endswith(suffix):
                label = name[: -len(suffix)]
                groups.setdefault(label, {})[suffix] = os.path.join(path, name)
    if not groups:
        raise CliError(f"no *.target/predicted/measured.json files in {path}")
    incomplete = sorted(label for label, g in groups.items() if len(g) != 3)
    if incomplete:
        raise CliError("unpaired batch entries: " + ", ".join(incomplete))
    labels, targets, predicted, measured = [], [], [], []
    for label in sorted(groups):
        g = groups[label]
        labels.append(label)
        targets.append(state_from_dict(read_json(g[".target.json"])))
        predicted.append(state_from_dict(read_json(g[".predicted.json"])))
        measured.append(state_from_dict(read_json(g[".measured.json"])))
    return labels, targets, predicted, measured


def cmd_wigner(args) -> int:
    try:
        state = state_from_dict(read_json(args.state))
    except FileNotFoundError:
        raise CliError(f"state file not found: {args.state}") from None
    grid = wigner_grid(state, args.ntheta, args.nphi)
    record = RunRecord("wigner", {"state": args.state, "ntheta": args.ntheta,
                                  "nphi": args.nphi})
    record.add_input(args.state)
    record_path = args.out + ".runrecord.json"
    _write_grid(args.out, grid, 0.0, _record_ref(record_path))
    record.add_output(args.out)
    record.write(record_path)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinctl",
        description="Quantum control toolkit for a single spin-F system.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ops", help="write spin operator matrices as JSON")
    p.add_argument("--f", type=float, required=True, help="spin quantum number")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_ops)

    p = sub.add_parser("optimize", help="two-stage control waveform design")
    p.add_argument("--target", required=True,
                   help=f"target name ({', '.join(target_names())}) or state file")
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--seeds", type=int, default=10, help="number of random seeds")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--noise", choices=("on", "off"), default="on",
                   help="stage-2 noise model")
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--stage2-iters", type=int, default=None)
    p.add_argument("--target-yield", type=float, default=None,
                   help="stop the seed search once this stage-1 yield is reached")
    p.add_argument("--pumped-fraction", type=float, default=None)
    p.add_argument("--larmor-rate", type=float, default=None,
                   help="peak Larmor rate (rad/s)")
    p.add_argument("--nonlinear-rate", type=float, default=None, help="chi (rad/s)")
    p.add_argument("--duration", type=float, default=None, help="control time (s)")
    p.add_argument("--n-steps", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="propagate a waveform and write trajectories")
    p.add_argument("--waveform", required=True, help="waveform JSON file")
    p.add_argument("--master", action="store_true",
                   help="use the master equation instead of pure-state propagation")
    p.add_argument("--noise", choices=("on", "off"), default="on",
                   help="noise model when --master is set")
    p.add_argument("--snapshots", type=int, default=2)
    p.add_argument("--pumped-fraction", type=float, default=None)
    p.add_argument("--target", default=None,
                   help="optional target (library name or file) for a yield channel")
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--wigner", action=argparse.BooleanOptionalAction, default=True,
                   help="write a Wigner grid CSV per snapshot")
    p.add_argument("--ntheta", type=int, default=64)
    p.add_argument("--nphi", type=int, default=128)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("squeeze", help="adiabatic squeezing sweep over the final field")
    p.add_argument("--sweep", default="default",
                   help='comma-separated final fields in rad/s, or "default"')
    p.add_argument("--omega-start", type=float, default=None, help="rad/s")
    p.add_argument("--omega-end", type=float, default=None,
                   help="template final field (rad/s)")
    p.add_argument("--ramp-time", type=float, default=None, help="seconds")
    p.add_argument("--hold-time", type=float, default=None, help="seconds")
    p.add_argument("--shape", choices=("exponential", "linear"), default=None)
    p.add_argument("--adiabatic-criterion", type=float, default=None,
                   help="derive ramp time from this adiabaticity bound")
    p.add_argument("--noise", choices=("on", "off"), default="on")
    p.add_argument("--initial", choices=("stretched", "ground"), default="stretched",
                   help="start from |m_y=-f> or from the exact ground state")
    p.add_argument("--pumped-fraction", type=float, default=None)
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--larmor-rate", type=float, default=None)
    p.add_argument("--nonlinear-rate", type=float, default=None)
    p.add_argument("--ntheta", type=int, default=64)
    p.add_argument("--nphi", type=int, default=128)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_squeeze)

    p = sub.add_parser("stats", help="batch yield/fidelity histograms")
    p.add_argument("--batch-dir", default=None,
                   help="directory of <label>.{target,predicted,measured}.json files")
    p.add_argument("--synthetic", action="store_true",
                   help="fabricate a synthetic batch instead of reading files")
    p.add_argument("--n", type=int, default=21, help="synthetic batch size")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.13,
                   help="synthetic displacement scale")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("wigner", help="Wigner grid CSV for a serialized state")
    p.add_argument("--state", required=True, help="state JSON file")
    p.add_argument("--ntheta", type=int, default=64)
    p.add_argument("--nphi", type=int, default=128)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_wigner)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"spinctl {args.command}: error: {exc}", file=_sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"spinctl {args.command}: error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
