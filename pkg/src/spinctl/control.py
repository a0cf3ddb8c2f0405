"""Control-field model: waveforms, the control Hamiltonian, hardware
filtering, initial-state preparation, and the library of named target states.

The physical drive is a magnetic field of constant magnitude rotating in the
x-y plane, described by the angle phi(t) between the field and the x axis,
piecewise constant over n_steps steps. Rendering resamples the step function
onto a fine grid and applies a first-order low-pass (and optional slew clamp)
to each Cartesian component, mimicking coil/driver bandwidth limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .spincore import QuantumState, SpinSystem, stretched_state, _phase_fixed

__all__ = [
    "ControlParams",
    "ControlWaveform",
    "FilterSpec",
    "RenderedDrive",
    "InitialPrep",
    "hamiltonian_at",
    "render_waveform",
    "lowpass_step_response",
    "slew_clamp",
    "prepare_initial",
    "target_library",
    "target_names",
    "default_params",
    "default_filter",
    "default_initial_state",
]

# Largest rotation angle per rendered substep; sets the default substep count.
MAX_SUBSTEP_ANGLE = 0.05


@dataclass(frozen=True)
class ControlParams:
    """Physical rates and timing of the control experiment (SI units).

    larmor_rate is the peak Larmor angular frequency g_f mu_B B / hbar
    (signed; the sign of g_f is absorbed here). nonlinear_rate is the
    quadratic light-shift strength chi = beta * scattering_rate.
    """

    larmor_rate: float = 2 * math.pi * 15e3
    nonlinear_rate: float = 2 * math.pi * 500.0
    beta: float = 8.2
    scattering_rate: float | None = None  # derived as chi / beta when omitted
    duration: float = 500e-6
    n_steps: int = 30

    def __post_init__(self):
        if not math.isfinite(self.larmor_rate):
            raise ValueError("larmor_rate must be finite")
        if self.nonlinear_rate < 0:
            raise ValueError("nonlinear_rate must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.scattering_rate is None:
            object.__setattr__(self, "scattering_rate", self.nonlinear_rate / self.beta)
        else:
            chi = self.scattering_rate * self.beta
            scale = max(abs(self.nonlinear_rate), 1.0)
            if abs(chi - self.nonlinear_rate) > 1e-9 * scale:
                raise ValueError(
                    "inconsistent rates: scattering_rate * beta must equal nonlinear_rate")

    def with_nonlinear_rate(self, chi: float) -> "ControlParams":
        """Copy with a rescaled nonlinearity at fixed beta (used for ensemble
        inhomogeneity sampling)."""
        return replace(self, nonlinear_rate=chi, scattering_rate=chi / self.beta)


def default_params() -> ControlParams:
    return ControlParams()


@dataclass(frozen=True)
class ControlWaveform:
    """Field-direction angles phi_i at n_steps discrete steps (radians).

    Angles are stored unwrapped; no modular reduction is applied, so the
    rendered Cartesian drive is a continuous function of each phi_i.
    """

    phis: np.ndarray
    params: ControlParams

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        if phis.ndim != 1 or len(phis) != self.params.n_steps:
            raise ValueError(
                f"waveform needs {self.params.n_steps} angles, got shape {phis.shape}")
        phis = np.array(phis)
        phis.setflags(write=False)
        object.__setattr__(self, "phis", phis)


@dataclass(frozen=True)
class FilterSpec:
    """Hardware response model applied to the Cartesian field components.

    cutoff: first-order low-pass corner frequency in Hz.
    slew_limit: max |d b / dt| per component in 1/s (None disables clamping).
    substeps_per_step: rendered samples per waveform step.
    """

    cutoff: float = 100e3
    slew_limit: float | None = None
    substeps_per_step: int = 32

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be > 0")
        if self.substeps_per_step < 1:
            raise ValueError("substeps_per_step must be >= 1")
        if self.slew_limit is not None and self.slew_limit <= 0:
            raise ValueError("slew_limit must be > 0 or None")


def default_filter(params: ControlParams) -> FilterSpec:
    """Filter with substep count chosen so each substep rotates the spin by
    at most MAX_SUBSTEP_ANGLE radians at the peak Larmor rate (falling back
    to the nonlinear rate when the field is off)."""
    rate = max(abs(params.larmor_rate), params.nonlinear_rate)
    if rate == 0:
        return FilterSpec(substeps_per_step=1)
    dt_max = MAX_SUBSTEP_ANGLE / rate
    m = math.ceil(params.duration / (params.n_steps * dt_max))
    return FilterSpec(substeps_per_step=max(1, m))


@dataclass(frozen=True)
class RenderedDrive:
    """Normalized Cartesian drive components on the uniform fine grid.

    bx, by are dimensionless (multiply by larmor_rate); times holds the start
    of each substep interval and dt its width.
    """

    times: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    dt: float

    def __post_init__(self):
        for name in ("times", "bx", "by"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.times) == len(self.bx) == len(self.by)):
            raise ValueError("times, bx, by must have equal length")
        radius = np.hypot(self.bx, self.by)
        if radius.size and radius.max() > 1 + 1e-9:
            raise ValueError(f"drive magnitude {radius.max()} exceeds 1")

    @property
    def n_samples(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt


def lowpass_step_response(u: np.ndarray, dt: float, cutoff: float) -> np.ndarray:
    """Exact sampled response of a first-order low-pass to a piecewise
    constant input (initial condition = first sample).

    The pole is mapped exactly: y_k = u_k + (y_{k-1} - u_k) exp(-2 pi fc dt),
    so a unit step relaxes as 1 - exp(-2 pi fc t) at the sample times. Linear
    in u.
    """
    u = np.asarray(u, dtype=float)
    if not np.isfinite(cutoff):
        return u.copy()
    decay = math.exp(-2 * math.pi * cutoff * dt)
    y, _ = lfilter([1.0 - decay], [1.0, -decay], u, zi=np.array([decay * u[0]]))
    return y


def lowpass_adjoint(g: np.ndarray, dt: float, cutoff: float) -> np.ndarray:
    """Transpose of the linear map in lowpass_step_response (for gradients)."""
    g = np.asarray(g, dtype=float)
    if not np.isfinite(cutoff):
        return g.copy()
    decay = math.exp(-2 * math.pi * cutoff * dt)
    acc = lfilter([1.0], [1.0, -decay], g[::-1])[::-1]
    out = (1.0 - decay) * acc
    out[0] = acc[0]  # the initial condition ties y_0 directly to u_0
    return out


def slew_clamp(bx: np.ndarray, by: np.ndarray, dt: float, limit: float):
    """Clamp per-sample increments of each component to |db| <= limit*dt,
    then rescale any sample outside the unit disk back onto it."""
    max_step = limit * dt
    out_x = np.array(bx, dtype=float)
    out_y = np.array(by, dtype=float)
    for k in range(1, len(out_x)):
        out_x[k] = out_x[k - 1] + np.clip(out_x[k] - out_x[k - 1], -max_step, max_step)
        out_y[k] = out_y[k - 1] + np.clip(out_y[k] - out_y[k - 1], -max_step, max_step)
        r = math.hypot(out_x[k], out_y[k])
        if r > 1.0:
            out_x[k] /= r
            out_y[k] /= r
    return out_x, out_y


def render_waveform(w: ControlWaveform, filt: FilterSpec) -> RenderedDrive:
    """Sample the unit-circle step function (cos phi_i, sin phi_i) on the fine
    grid and pass it through the hardware filter."""
    m = filt.substeps_per_step
    n = w.params.n_steps * m
    dt = w.params.duration / n
    ux = np.repeat(np.cos(w.phis), m)
    uy = np.repeat(np.sin(w.phis), m)
    bx = lowpass_step_response(ux, dt, filt.cutoff)
    by = lowpass_step_response(uy, dt, filt.cutoff)
    if filt.slew_limit is not None:
        bx, by = slew_clamp(bx, by, dt, filt.slew_limit)
    times = np.arange(n) * dt
    return RenderedDrive(times=times, bx=bx, by=by, dt=dt)


def hamiltonian_at(sys: SpinSystem, params: ControlParams, bx: float, by: float) -> np.ndarray:
    """Control Hamiltonian (units of hbar):
    H = larmor_rate * (bx fx + by fy) + nonlinear_rate * fx^2."""
    if abs(bx) > 1 + 1e-6 or abs(by) > 1 + 1e-6:
        raise ValueError("normalized field components must satisfy |b| <= 1")
    return params.larmor_rate * (bx * sys.fx + by * sys.fy) \
        + params.nonlinear_rate * sys.fx2


# ---------------------------------------------------------------------------
# initial-state preparation


@dataclass(frozen=True)
class InitialPrep:
    """Optically pumped initial state with imperfect pumping.

    A fraction pumped_fraction ends up in ``target``; the remainder is spread
    over the other eigenstates of the pumping-axis projection (uniformly, for
    the default rule).
    """

    target: QuantumState
    pumped_fraction: float = 1.0
    axis: tuple = (0.0, 1.0, 0.0)
    residual: str = "uniform"

    def __post_init__(self):
        if not (0.0 < self.pumped_fraction <= 1.0):
            raise ValueError("pumped_fraction must be in (0, 1]")
        if not self.target.is_pure:
            raise ValueError("pumping target must be a pure state")
        if self.residual != "uniform":
            raise ValueError(f"unknown residual rule {self.residual!r}")


def prepare_initial(sys: SpinSystem, prep: InitialPrep) -> QuantumState:
    """Density matrix p |psi0><psi0| + (1-p) * uniform mixture over the other
    2f eigenstates of the pumping-axis projection."""
    psi = prep.target.data
    rho = prep.pumped_fraction * np.outer(psi, psi.conj())
    if prep.pumped_fraction < 1.0:
        op = sys.axis_operator(prep.axis)
        _, evecs = np.linalg.eigh(op)
        overlaps = np.abs(evecs.conj().T @ psi) ** 2
        pumped_idx = int(np.argmax(overlaps))
        others = [j for j in range(sys.dim) if j != pumped_idx]
        weight = (1.0 - prep.pumped_fraction) / len(others)
        for j in others:
            rho += weight * np.outer(evecs[:, j], evecs[:, j].conj())
    rho = (rho + rho.conj().T) / 2
    return QuantumState.mixed(rho)


def default_initial_state(sys: SpinSystem) -> QuantumState:
    """Fiducial state from optical pumping: maximum projection along +y."""
    return stretched_state(sys, (0.0, 1.0, 0.0), sys.f)


# ---------------------------------------------------------------------------
# target states


def _cat_z2(sys: SpinSystem) -> QuantumState:
    if sys.f < 2:
        raise ValueError("cat_z2 needs f >= 2")
    vec = np.zeros(sys.dim, dtype=complex)
    vec[int(sys.f - 2)] = 1 / math.sqrt(2)   # m_z = +2
    vec[int(sys.f + 2)] = 1 / math.sqrt(2)   # m_z = -2
    return QuantumState.pure(vec)


def _mx2(sys: SpinSystem) -> QuantumState:
    if sys.f < 2:
        raise ValueError("mx2 needs f >= 2")
    return stretched_state(sys, (1.0, 0.0, 0.0), 2)


def _ramp_y(sys: SpinSystem) -> QuantumState:
    vec = np.zeros(sys.dim, dtype=complex)
    op = sys.axis_operator((0.0, 1.0, 0.0))
    _, evecs = np.linalg.eigh(op)  # columns ordered m = -f .. f
    for idx in range(sys.dim):
        m = idx - sys.f
        vec += m * _phase_fixed(evecs[:, idx])
    vec /= np.linalg.norm(vec)
    return QuantumState.pure(_phase_fixed(vec))


_TARGETS = {
    "cat_z2": _cat_z2,   # (|m_z=2> + |m_z=-2>)/sqrt(2)
    "mx2": _mx2,         # |m_x=2>
    "ramp_y": _ramp_y,   # sum_m m |m_y=m>, normalized
}


def target_names() -> list:
    return sorted(_TARGETS)


def target_library(name: str, sys: SpinSystem) -> QuantumState:
    """Named pure target states used throughout the control studies."""
    try:
        builder = _TARGETS[name]
    except KeyError:
        raise ValueError(
            f"unknown target {name!r}; known targets: {', '.join(target_names())}") from None
    return builder(sys)
