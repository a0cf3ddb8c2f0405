"""Spin squeezing with a ramped y-field over the constant nonlinearity.

The protocol starts from the stretched state |m_y=-f> (the approximate ground
state of H = omega fy + chi fx^2 at large omega) and reduces the field so the
state develops squeezing of F_x at the expense of F_z. A diagonalization
oracle for the instantaneous ground state backs all adiabatic claims.

Default ramp: the depolarizing decoherence model punishes long protocols hard
(each scattering event mixes in isotropic variance), so the default template
is a fast exponential drop to a final field of a few chi followed by a hold,
which maximizes squeezing under decoherence. Slow field sweeps that track the
ground state to high fidelity are available through derive_ramp_time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import parallel_map
from .control import ControlParams, InitialPrep, RenderedDrive, prepare_initial
from .dynamics import NoiseModel, instantaneous_ground_state, propagate_with_snapshots
from .spincore import (QuantumState, SpinSystem, SqueezingResult, UndefinedSqueezingError,
                       expectation, squeezing_parameter, stretched_state, variance)

__all__ = [
    "RampSpec",
    "SqueezeReport",
    "SweepRow",
    "GroundStateXiRow",
    "run_adiabatic",
    "sweep_final_field",
    "ground_state_xi",
    "min_ground_state_xi_normalized",
    "default_ramp",
    "default_sweep_omegas",
    "derive_ramp_time",
    "render_ramp",
]

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class RampSpec:
    """Field ramp omega(t) from omega_start down to omega_end (rad/s), then an
    optional hold. omega_end may equal omega_start (constant field)."""

    omega_start: float
    omega_end: float
    ramp_time: float
    ramp_shape: str = "exponential"  # | "linear"
    hold_time: float = 0.0

    def __post_init__(self):
        if not (self.omega_start >= self.omega_end >= 0):
            raise ValueError("need omega_start >= omega_end >= 0")
        if self.ramp_time <= 0:
            raise ValueError("ramp_time must be > 0")
        if self.hold_time < 0:
            raise ValueError("hold_time must be >= 0")
        if self.ramp_shape not in ("exponential", "linear"):
            raise ValueError(f"unknown ramp shape {self.ramp_shape!r}")
        if self.ramp_shape == "exponential" and self.omega_end == 0 \
                and self.omega_start > 0:
            raise ValueError("exponential ramp cannot reach omega_end = 0; use linear")

    @property
    def duration(self) -> float:
        return self.ramp_time + self.hold_time

    def omega_at(self, t) -> np.ndarray:
        """Field profile, vectorized over t."""
        t = np.asarray(t, dtype=float)
        if self.omega_start == self.omega_end:
            return np.full_like(t, self.omega_end)
        if self.ramp_shape == "linear":
            ramped = self.omega_start + (self.omega_end - self.omega_start) \
                * np.clip(t / self.ramp_time, 0.0, 1.0)
        else:
            t_scale = self.ramp_time / math.log(self.omega_start / self.omega_end)
            ramped = self.omega_start * np.exp(-np.clip(t, 0.0, self.ramp_time) / t_scale)
        return np.where(t >= self.ramp_time, self.omega_end, ramped)

    def truncated_at(self, omega_end: float) -> "RampSpec":
        """Same sweep rate profile, stopped at a different final field."""
        if omega_end > self.omega_start:
            raise ValueError("cannot truncate above omega_start")
        tiny = 1e-9 * self.ramp_time
        if self.omega_start == omega_end:
            return replace(self, omega_end=omega_end, ramp_time=tiny)
        if self.ramp_shape == "linear":
            rate = (self.omega_start - self.omega_end) / self.ramp_time
            new_time = (self.omega_start - omega_end) / rate
        else:
            t_scale = self.ramp_time / math.log(self.omega_start / self.omega_end)
            new_time = t_scale * math.log(self.omega_start / omega_end)
        return replace(self, omega_end=omega_end, ramp_time=max(new_time, tiny))


@dataclass(frozen=True)
class SqueezeReport:
    """Squeezing figures of the final state: x is the squeezed component,
    z the anti-squeezed one, y carries the mean spin."""

    xi: float
    xi_normalized: float
    squeezing_db: float
    anti_squeezing_db: float
    mean_spin: float
    ground_state_overlap: float


def render_ramp(params: ControlParams, ramp: RampSpec,
                max_substep_angle: float = 0.05) -> RenderedDrive:
    """Sample the ramp onto a uniform fine grid as a pure-y drive.

    Midpoint sampling makes the piecewise-constant approximation second
    order in the substep length.
    """
    omega_scale = max(ramp.omega_start, params.nonlinear_rate, 1e-300)
    if ramp.omega_start > abs(params.larmor_rate) * (1 + 1e-9):
        raise ValueError("ramp exceeds the peak Larmor rate")
    dt = max_substep_angle / omega_scale
    n = max(1, math.ceil(ramp.duration / dt))
    dt = ramp.duration / n
    times = np.arange(n) * dt
    by = ramp.omega_at(times + dt / 2) / params.larmor_rate
    return RenderedDrive(times=times, bx=np.zeros(n), by=by, dt=dt)


def _squeeze_report(sys: SpinSystem, params: ControlParams, state: QuantumState,
                    omega_end: float) -> SqueezeReport:
    sq = squeezing_parameter(state, X_AXIS, Y_AXIS)
    mean = expectation(state, sys.axis_operator(Y_AXIS))
    var_z = variance(state, sys.axis_operator(Z_AXIS))
    anti_db = 10.0 * math.log10(2.0 * var_z / abs(mean))
    ground = instantaneous_ground_state(sys, params, 0.0, omega_end / params.larmor_rate)
    g = ground.state.data
    if state.is_pure:
        overlap = float(abs(np.vdot(g, state.data)) ** 2)
    else:
        overlap = float(np.real(np.vdot(g, state.data @ g)))
    return SqueezeReport(
        xi=sq.xi,
        xi_normalized=sq.xi_normalized,
        squeezing_db=sq.squeezing_db,
        anti_squeezing_db=anti_db,
        mean_spin=mean,
        ground_state_overlap=overlap,
    )


def run_adiabatic(sys: SpinSystem, params: ControlParams, noise: NoiseModel,
                  ramp: RampSpec, n_snapshots: int = 2,
                  prep: InitialPrep | None = None,
                  initial_state: QuantumState | None = None,
                  max_substep_angle: float = 0.05):
    """Propagate |m_y=-f> (or an imperfectly pumped version) through the ramp.

    Returns (trajectory, report); the report is evaluated on the final state
    with squeeze axis x and mean axis y, and the ground-state overlap is
    taken against the instantaneous Hamiltonian at omega_end.

    initial_state overrides the pumped stretched state. The stretched state
    only approximates the ground state at omega_start (relative corrections
    of order nonlinear_rate/omega_start), which caps how closely a ramp from
    it can track the instantaneous ground state; adiabatic-limit studies can
    pass the exact ground state here instead.
    """
    drive = render_ramp(params, ramp, max_substep_angle=max_substep_angle)
    if initial_state is not None:
        state0 = initial_state
    elif prep is not None:
        state0 = prepare_initial(sys, prep)
    else:
        state0 = stretched_state(sys, Y_AXIS, -sys.f)
    traj = propagate_with_snapshots(state0, drive, params, noise, n_snapshots, sys=sys)
    report = _squeeze_report(sys, params, traj.final_state, ramp.omega_end)
    return traj, report


@dataclass(frozen=True)
class SweepRow:
    omega_end: float
    report: SqueezeReport | None
    error: str | None = None


def sweep_final_field(sys: SpinSystem, params: ControlParams, noise: NoiseModel,
                      ramp_template: RampSpec, omega_end_values,
                      prep: InitialPrep | None = None,
                      initial_state: QuantumState | None = None,
                      max_substep_angle: float = 0.05) -> list:
    """run_adiabatic with the template ramp truncated at each final field.

    Per-point failures are recorded in the row and do not abort the sweep.
    """
    omegas = list(map(float, omega_end_values))
    if not omegas:
        raise ValueError("omega_end_values must be non-empty")

    def one(omega_end):
        try:
            _, report = run_adiabatic(
                sys, params, noise, ramp_template.truncated_at(omega_end),
                prep=prep, initial_state=initial_state,
                max_substep_angle=max_substep_angle)
            return SweepRow(omega_end=omega_end, report=report)
        except (UndefinedSqueezingError, ValueError) as exc:
            return SweepRow(omega_end=omega_end, report=None, error=str(exc))

    return parallel_map(one, omegas)


# ---------------------------------------------------------------------------
# ground-state oracle


@dataclass(frozen=True)
class GroundStateXiRow:
    omega: float
    xi: float
    xi_normalized: float
    squeezing_db: float
    error: str | None = None


def _ground_state(sys: SpinSystem, chi: float, omega: float) -> QuantumState:
    h = omega * sys.fy + chi * sys.fx2
    evals, evecs = np.linalg.eigh(h)
    scale = float(np.max(np.abs(evals))) or 1.0
    if evals[1] - evals[0] < 1e-9 * scale:
        raise ValueError(f"degenerate ground state at omega={omega}")
    return QuantumState.pure(evecs[:, 0])


def ground_state_xi(sys: SpinSystem, chi: float, omegas) -> list:
    """Exact-diagonalization squeezing of the ground state of
    omega fy + chi fx^2, for each omega. The oracle behind every adiabatic
    claim; undefined or degenerate points are flagged per row."""
    if chi <= 0:
        raise ValueError("chi must be > 0")
    rows = []
    for omega in map(float, omegas):
        try:
            state = _ground_state(sys, chi, omega)
            sq: SqueezingResult = squeezing_parameter(state, X_AXIS, Y_AXIS)
            rows.append(GroundStateXiRow(
                omega=omega, xi=sq.xi, xi_normalized=sq.xi_normalized,
                squeezing_db=sq.squeezing_db))
        except (UndefinedSqueezingError, ValueError) as exc:
            rows.append(GroundStateXiRow(
                omega=omega, xi=float("nan"), xi_normalized=float("nan"),
                squeezing_db=float("nan"), error=str(exc)))
    return rows


def min_ground_state_xi_normalized(sys: SpinSystem, chi: float,
                                   omega_lo: float, omega_hi: float):
    """Minimum of the oracle curve xi_normalized(omega) over a closed field
    interval, by bounded scalar minimization in log(omega).

    The curve decreases monotonically toward small fields for f=3 (it has no
    interior minimum over omega > 0), so the interval choice matters and the
    default sweep range is the documented reference.
    """
    from scipy.optimize import minimize_scalar

    if not (0 < omega_lo < omega_hi):
        raise ValueError("need 0 < omega_lo < omega_hi")

    def xi_n(log_omega):
        state = _ground_state(sys, chi, math.exp(log_omega))
        return squeezing_parameter(state, X_AXIS, Y_AXIS).xi_normalized

    res = minimize_scalar(xi_n, bounds=(math.log(omega_lo), math.log(omega_hi)),
                          method="bounded", options={"xatol": 1e-12})
    # bounded minimization never evaluates exactly at the bounds; for a
    # monotone curve the edge can win
    candidates = [(xi_n(math.log(omega_lo)), omega_lo),
                  (xi_n(math.log(omega_hi)), omega_hi),
                  (float(res.fun), math.exp(res.x))]
    best = min(candidates)
    return best[1], best[0]


# ---------------------------------------------------------------------------
# defaults and adiabaticity


def adiabaticity_measure(sys: SpinSystem, params: ControlParams, ramp: RampSpec,
                         n_grid: int = 2000) -> float:
    """max over the ramp and excited levels of |<e_j| dH/dt |e_0>| / gap_j^2
    (dimensionless; << 1 means adiabatic)."""
    t = np.linspace(0.0, ramp.ramp_time, n_grid)
    omega = ramp.omega_at(t)
    d_omega = np.gradient(omega, t)
    h = omega[:, None, None] * sys.fy + params.nonlinear_rate * sys.fx2
    evals, evecs = np.linalg.eigh(h)
    worst = 0.0
    ground = evecs[:, :, 0]
    for j in range(1, sys.dim):
        element = np.abs(np.einsum("ki,ij,kj->k", evecs[:, :, j].conj(), sys.fy, ground))
        gap = evals[:, j] - evals[:, 0]
        worst = max(worst, float(np.max(np.abs(d_omega) * element / gap ** 2)))
    return worst


def derive_ramp_time(sys: SpinSystem, params: ControlParams, omega_start: float,
                     omega_end: float, ramp_shape: str = "exponential",
                     criterion: float = 0.05) -> float:
    """Ramp time making the adiabaticity measure equal the criterion.

    The measure is proportional to 1/ramp_time at a fixed profile shape, so
    one evaluation at a reference time suffices.
    """
    ref = RampSpec(omega_start=omega_start, omega_end=omega_end,
                   ramp_time=1.0, ramp_shape=ramp_shape)
    return adiabaticity_measure(sys, params, ref) / criterion


# Default protocol template (see module docstring): near-sudden exponential
# drop, then squeezing develops during the hold at the final field. The drop
# time scale and hold are tuned against the depolarizing noise model.
DEFAULT_DROP_TIMESCALE = 5e-6
DEFAULT_HOLD_TIME = 110e-6
DEFAULT_OMEGA_END_FACTOR = 2.2  # in units of the nonlinear rate

# Default sweep grid for the final field, in units of the nonlinear rate.
DEFAULT_SWEEP_FACTORS = (0.8, 1.0, 1.25, 1.55, 1.9, 2.2, 2.6, 3.2, 4.0, 5.0, 6.4, 8.0)


def default_ramp(params: ControlParams) -> RampSpec:
    omega_start = abs(params.larmor_rate)
    omega_end = DEFAULT_OMEGA_END_FACTOR * params.nonlinear_rate
    ramp_time = DEFAULT_DROP_TIMESCALE * math.log(omega_start / omega_end)
    return RampSpec(omega_start=omega_start, omega_end=omega_end,
                    ramp_time=ramp_time, ramp_shape="exponential",
                    hold_time=DEFAULT_HOLD_TIME)


def default_sweep_omegas(params: ControlParams) -> np.ndarray:
    return params.nonlinear_rate * np.asarray(DEFAULT_SWEEP_FACTORS)
