"""Two-stage control design.

Stage 1 maximizes the pure-state yield |<target|psi(tau)>|^2 over the N
waveform angles using an exact gradient: the derivative of each substep
propagator exp(-i H_k dt) is evaluated with the spectral (Daleckii-Krein)
formula in the eigenbasis of H_k and chained through the low-pass filter's
linear response.

Stage 2 re-optimizes the stage-1 waveform against the master-equation yield
Tr sqrt(sqrt(rho_T) rho_P sqrt(rho_T)) using central finite differences
(differentiating through the dissipative ensemble average is not worth the
complexity at ~30 parameters).

Search method: quasi-Newton (L-BFGS-B on the negated objective) by default;
``method="ascent"`` selects plain gradient ascent with a backtracking Armijo
line search. Both record the objective at every accepted iterate, so
histories are monotone non-decreasing. Stopping rules: gradient norm below
grad_tolerance, objective improvement below improvement_tolerance over
improvement_window iterations, optional target_objective, or max_iters (only
the last reports converged=False).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from ._linalg import (ordered_product, prefix_products, taylor_unitaries,
                      unitaries_from_eigensystems)
from ._parallel import parallel_map
from .control import (ControlParams, ControlWaveform, FilterSpec, InitialPrep,
                      default_filter, default_initial_state, lowpass_adjoint,
                      prepare_initial, render_waveform)
from .dynamics import NoiseModel, chi_samples
from .spincore import QuantumState, build_spin_system, yield_mixed

__all__ = [
    "LineSearch",
    "OptimizerConfig",
    "OptimizationResult",
    "DesignResult",
    "stage1_gradient",
    "stage1_optimize",
    "stage2_refine",
    "design_control",
]


@dataclass(frozen=True)
class LineSearch:
    """Backtracking (Armijo) parameters for method="ascent". After an
    accepted step the next trial step is grown by ``grow``."""

    initial_step: float = 0.5
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 50
    grow: float = 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    n_seeds: int = 10
    max_iters: int = 1000
    grad_tolerance: float = 1e-8
    improvement_window: int = 25
    improvement_tolerance: float = 1e-7
    fd_step: float = 1e-3
    line_search: LineSearch = field(default_factory=LineSearch)
    rng_seed: int = 0
    target_objective: float | None = None
    method: str = "lbfgs"  # "lbfgs" | "ascent"

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be > 0")
        if self.method not in ("lbfgs", "ascent"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class OptimizationResult:
    waveform: ControlWaveform
    yield_pure_final: float
    yield_mixed_final: float | None
    iterations: int
    seed_index: int
    converged: bool
    history: np.ndarray
    objective: str  # names the yield convention that was optimized

    def __post_init__(self):
        hist = np.asarray(self.history, dtype=float)
        if np.any(np.diff(hist) < -1e-12):
            raise ValueError("objective history must be non-decreasing")
        hist.setflags(write=False)
        object.__setattr__(self, "history", hist)


# ---------------------------------------------------------------------------
# monotone maximization drivers


def _ascend(x0, value_and_grad, value_only, config: OptimizerConfig):
    ls = config.line_search
    x = np.array(x0, dtype=float)
    val, grad = value_and_grad(x)
    history = [val]
    step = ls.initial_step
    converged = False
    for _ in range(config.max_iters):
        if config.target_objective is not None and val >= config.target_objective:
            converged = True
            break
        grad_norm_sq = float(np.dot(grad, grad))
        if math.sqrt(grad_norm_sq) < config.grad_tolerance:
            converged = True
            break
        s = step
        accepted = False
        for _ in range(ls.max_backtracks):
            trial = value_only(x + s * grad)
            if trial >= val + ls.armijo * s * grad_norm_sq:
                accepted = True
                break
            s *= ls.shrink
        if not accepted:
            converged = True  # no admissible ascent step: stationary in practice
            break
        x = x + s * grad
        step = s * ls.grow
        val, grad = value_and_grad(x)
        history.append(val)
        window = config.improvement_window
        if len(history) > window and \
                history[-1] - history[-1 - window] < config.improvement_tolerance:
            converged = True
            break
    else:
        converged = converged or False
    return x, np.array(history), converged


def _lbfgs_maximize(x0, value_and_grad, config: OptimizerConfig):
    cache = {}

    def fun(x):
        val, grad = value_and_grad(x)
        cache[x.tobytes()] = val
        if len(cache) > 8:
            cache.pop(next(iter(cache)))
        return -val, -np.asarray(grad)

    history = []
    stopped_early = []

    def callback(xk):
        val = cache.get(xk.tobytes())
        if val is None:
            val, _ = value_and_grad(xk)
        history.append(val)
        window = config.improvement_window
        if config.target_objective is not None and val >= config.target_objective:
            stopped_early.append(True)
            raise StopIteration
        if len(history) > window and \
                history[-1] - history[-1 - window] < config.improvement_tolerance:
            stopped_early.append(True)
            raise StopIteration

    res = scipy.optimize.minimize(
        fun, np.asarray(x0, dtype=float), jac=True, method="L-BFGS-B",
        callback=callback,
        options=dict(maxiter=config.max_iters, ftol=1e-16,
                     gtol=config.grad_tolerance, maxcor=20))
    x = np.asarray(res.x, dtype=float)
    final_val, _ = value_and_grad(x)
    if not history or final_val > history[-1]:
        history.append(final_val)
    # L-BFGS-B guarantees sufficient decrease per accepted iterate, but guard
    # against round-off wiggle in the recorded curve.
    history = np.maximum.accumulate(np.array(history))
    converged = bool(stopped_early) or res.status == 0
    return x, history, converged


def _maximize(x0, value_and_grad, value_only, config: OptimizerConfig):
    if config.method == "ascent":
        return _ascend(x0, value_and_grad, value_only, config)
    return _lbfgs_maximize(x0, value_and_grad, config)


# ---------------------------------------------------------------------------
# stage-1 machinery


class _Stage1Engine:
    """Precomputed context for repeated stage-1 objective/gradient calls."""

    def __init__(self, target: QuantumState, params: ControlParams, filt: FilterSpec,
                 psi0: QuantumState | None = None):
        if not target.is_pure:
            raise ValueError("stage-1 target must be a pure state")
        self.sys = build_spin_system(target.f)
        self.params = params
        self.filt = filt
        self.target = target.data
        self.psi0 = (psi0 or default_initial_state(self.sys)).data
        if len(self.psi0) != len(self.target):
            raise ValueError("initial and target state dimensions differ")
        self.m = filt.substeps_per_step
        self.n_samples = params.n_steps * self.m
        self.dt = params.duration / self.n_samples
        self.zeeman_x = params.larmor_rate * self.sys.fx
        self.zeeman_y = params.larmor_rate * self.sys.fy
        self.quad = params.nonlinear_rate * self.sys.fx2

    def _components(self, phis):
        drive = render_waveform(ControlWaveform(phis=phis, params=self.params), self.filt)
        return drive.bx, drive.by

    def _hamiltonians(self, bx, by):
        return (bx[:, None, None] * self.zeeman_x
                + by[:, None, None] * self.zeeman_y + self.quad)

    def objective(self, phis) -> float:
        bx, by = self._components(phis)
        u = ordered_product(taylor_unitaries(self._hamiltonians(bx, by), self.dt))
        return float(abs(np.vdot(self.target, u @ self.psi0)) ** 2)

    def objective_and_gradient(self, phis):
        bx, by = self._components(phis)
        dt = self.dt
        evals, evecs = np.linalg.eigh(self._hamiltonians(bx, by))
        u = unitaries_from_eigensystems(evals, evecs, dt)
        prefixes = prefix_products(u)
        u_total = prefixes[-1]
        overlap = np.vdot(self.target, u_total @ self.psi0)
        value = float(abs(overlap) ** 2)

        # forward states psi_{k-1} entering step k; costates lam_k such that
        # <target|U_total|psi0> = <lam_k|U_k|psi_{k-1}> for every k
        fwd = np.empty((self.n_samples, len(self.psi0)), dtype=complex)
        fwd[0] = self.psi0
        fwd[1:] = np.einsum("kij,j->ki", prefixes[:-1], self.psi0)
        lam = np.einsum("kij,j->ki", prefixes, u_total.conj().T @ self.target)

        # spectral derivative of exp(-i H dt): in the eigenbasis,
        # dU = Phi o (V^dag dH V), Phi_pq = -i dt e^{-i(lp+lq)dt/2} sinc((lp-lq)dt/2)
        half = np.exp(-0.5j * dt * evals)
        phi_factor = (half[:, :, None] * half[:, None, :]) * np.sinc(
            (evals[:, :, None] - evals[:, None, :]) * (dt / (2.0 * math.pi)))
        a = np.einsum("kji,kj->ki", evecs.conj(), lam)
        b = np.einsum("kji,kj->ki", evecs.conj(), fwd)
        vh = evecs.conj().transpose(0, 2, 1)
        gen = np.stack([self.sys.fx, self.sys.fy])
        rotated = vh[:, None] @ gen[None] @ evecs[:, None]  # (n, 2, d, d)
        core = np.einsum("kp,kcpq,kpq,kq->kc", a.conj(), rotated, phi_factor, b)
        scale = 2.0 * dt * self.params.larmor_rate
        g_b = scale * np.imag(np.conj(overlap) * core)  # -i folded into imag
        g_ux = lowpass_adjoint(g_b[:, 0], dt, self.filt.cutoff)
        g_uy = lowpass_adjoint(g_b[:, 1], dt, self.filt.cutoff)
        block_starts = np.arange(0, self.n_samples, self.m)
        gx = np.add.reduceat(g_ux, block_starts)
        gy = np.add.reduceat(g_uy, block_starts)
        grad = -np.sin(phis) * gx + np.cos(phis) * gy
        return value, grad


def stage1_gradient(target: QuantumState, w: ControlWaveform, filt: FilterSpec,
                    psi0: QuantumState | None = None) -> np.ndarray:
    """Exact gradient of the pure-state yield with respect to each phi_i."""
    engine = _Stage1Engine(target, w.params, filt, psi0=psi0)
    _, grad = engine.objective_and_gradient(np.asarray(w.phis, dtype=float))
    return grad


def _seed_rngs(rng_seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(rng_seed).spawn(n)]


def stage1_optimize(target: QuantumState, config: OptimizerConfig,
                    params: ControlParams | None = None,
                    filt: FilterSpec | None = None,
                    psi0: QuantumState | None = None) -> OptimizationResult:
    """Best pure-state-yield search over n_seeds random waveform seeds.

    Seeds are i.i.d. uniform(-pi, pi) angle vectors drawn deterministically
    from rng_seed. Ties between seeds break toward the lowest seed index.
    If target_objective is set, remaining seeds are skipped once one reaches
    it (seeds then run sequentially).
    """
    params = params or ControlParams()
    filt = filt or default_filter(params)
    engine = _Stage1Engine(target, params, filt, psi0=psi0)
    rngs = _seed_rngs(config.rng_seed, config.n_seeds)

    def run_seed(idx):
        phis0 = rngs[idx].uniform(-math.pi, math.pi, params.n_steps)
        phis, history, converged = _maximize(
            phis0, engine.objective_and_gradient, engine.objective, config)
        return idx, phis, history, converged

    if config.target_objective is not None:
        results = []
        for idx in range(config.n_seeds):
            out = run_seed(idx)
            results.append(out)
            if out[2][-1] >= config.target_objective:
                break
    else:
        results = parallel_map(run_seed, range(config.n_seeds))

    best = max(results, key=lambda r: (r[2][-1], -r[0]))
    idx, phis, history, converged = best
    return OptimizationResult(
        waveform=ControlWaveform(phis=phis, params=params),
        yield_pure_final=float(history[-1]),
        yield_mixed_final=None,
        iterations=len(history) - 1,
        seed_index=idx,
        converged=converged,
        history=history,
        objective="yield_pure = |<target|psi>|^2",
    )


# ---------------------------------------------------------------------------
# stage-2 machinery


class _DriveSlice:
    """View of a rendered drive restricted to a sample range, for building
    Hamiltonian stacks over a tail segment."""

    def __init__(self, drive, sample_slice):
        self.bx = drive.bx[sample_slice]
        self.by = drive.by[sample_slice]
        self.dt = drive.dt


class _Stage2Engine:
    """Master-equation yield with prefix caching for finite differences.

    A perturbation of phi_i only changes drive samples from i*M on (the
    filter is causal), so FD evaluations reuse cached prefix propagators up
    to that sample for every chi ensemble member.
    """

    def __init__(self, target: QuantumState, params: ControlParams, filt: FilterSpec,
                 noise: NoiseModel, rho0: QuantumState):
        self.sys = build_spin_system(target.f)
        self.params = params
        self.filt = filt
        self.noise = noise
        self.target = target
        self.rho0 = rho0.density()
        self.chis, self.weights = chi_samples(params, noise)
        self.m = filt.substeps_per_step
        self.n_samples = params.n_steps * self.m
        self.dt = params.duration / self.n_samples
        self.eta = math.exp(-noise.gamma * params.duration)
        self.zeeman_x = params.larmor_rate * self.sys.fx
        self.zeeman_y = params.larmor_rate * self.sys.fy
        self.quads = self.chis[:, None, None, None] * self.sys.fx2[None, None]

    def _drive(self, phis):
        return render_waveform(ControlWaveform(phis=phis, params=self.params), self.filt)

    def _units(self, drive):
        zee = (drive.bx[:, None, None] * self.zeeman_x
               + drive.by[:, None, None] * self.zeeman_y)
        return taylor_unitaries(zee[None] + self.quads, drive.dt)  # (K, n, d, d)

    def _finish(self, totals) -> float:
        finals = np.einsum("kij,jl,kml->kim", totals, self.rho0, totals.conj())
        rho = np.einsum("k,kij->ij", self.weights, finals)
        d = rho.shape[0]
        rho = self.eta * rho + (1.0 - self.eta) * (np.trace(rho).real / d) * np.eye(d)
        rho = (rho + rho.conj().T) / 2
        return yield_mixed(self.target, QuantumState.mixed(rho))

    def objective(self, phis) -> float:
        return self._finish(ordered_product(self._units(self._drive(phis))))

    def objective_with_cache(self, phis):
        units = self._units(self._drive(phis))
        prefixes = np.stack([prefix_products(units[k]) for k in range(len(self.chis))])
        return self._finish(prefixes[:, -1]), prefixes

    def objective_from_step(self, phis, first_step: int, prefixes) -> float:
        """Objective for a waveform differing from the cached one only at
        waveform steps >= first_step."""
        if first_step == 0:
            return self.objective(phis)
        drive = self._drive(phis)
        start = first_step * self.m
        zee = (drive.bx[start:, None, None] * self.zeeman_x
               + drive.by[start:, None, None] * self.zeeman_y)
        tail = ordered_product(taylor_unitaries(zee[None] + self.quads, drive.dt))
        return self._finish(tail @ prefixes[:, start - 1])

    def fd_gradient(self, phis, h: float):
        value, prefixes = self.objective_with_cache(phis)
        grad = np.empty(len(phis))
        for i in range(len(phis)):
            up = np.array(phis)
            dn = np.array(phis)
            up[i] += h
            dn[i] -= h
            f_up = self.objective_from_step(up, i, prefixes)
            f_dn = self.objective_from_step(dn, i, prefixes)
            grad[i] = (f_up - f_dn) / (2.0 * h)
        return value, grad


def stage2_refine(target: QuantumState, w0: ControlWaveform, noise: NoiseModel,
                  config: OptimizerConfig,
                  filt: FilterSpec | None = None,
                  prep: InitialPrep | None = None) -> OptimizationResult:
    """Refine a stage-1 waveform against the dissipative (Uhlmann) yield."""
    params = w0.params
    filt = filt or default_filter(params)
    sys = build_spin_system(target.f)
    if prep is None:
        rho0 = QuantumState.mixed(default_initial_state(sys).density())
    else:
        rho0 = prepare_initial(sys, prep)
    engine = _Stage2Engine(target, params, filt, noise, rho0)

    phis, history, converged = _maximize(
        np.asarray(w0.phis, dtype=float),
        lambda x: engine.fd_gradient(x, config.fd_step),
        engine.objective,
        config)
    pure_engine = _Stage1Engine(target, params, filt) if target.is_pure else None
    return OptimizationResult(
        waveform=ControlWaveform(phis=phis, params=params),
        yield_pure_final=(pure_engine.objective(phis) if pure_engine else float("nan")),
        yield_mixed_final=float(history[-1]),
        iterations=len(history) - 1,
        seed_index=-1,
        converged=converged,
        history=history,
        objective="yield_mixed = Tr sqrt(sqrt(rho_T) rho_P sqrt(rho_T))",
    )


# ---------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class DesignResult:
    stage1: OptimizationResult
    stage2: OptimizationResult

    @property
    def waveform(self) -> ControlWaveform:
        return self.stage2.waveform

    @property
    def yield_pure_final(self) -> float:
        return self.stage2.yield_pure_final

    @property
    def yield_mixed_final(self) -> float:
        return self.stage2.yield_mixed_final


def default_stage2_config(stage1_config: OptimizerConfig | None = None) -> OptimizerConfig:
    base = stage1_config or OptimizerConfig()
    return replace(base, max_iters=30, improvement_window=5,
                   improvement_tolerance=1e-6, target_objective=None)


def design_control(target: QuantumState,
                   params: ControlParams | None = None,
                   filt: FilterSpec | None = None,
                   noise: NoiseModel | None = None,
                   stage1_config: OptimizerConfig | None = None,
                   stage2_config: OptimizerConfig | None = None,
                   prep: InitialPrep | None = None) -> DesignResult:
    """Two-stage design: seed search on the pure yield, then dissipative
    refinement. Both stages' histories are kept for the run record."""
    params = params or ControlParams()
    filt = filt or default_filter(params)
    if noise is None:
        from .dynamics import default_noise
        noise = default_noise(params)
    stage1_config = stage1_config or OptimizerConfig()
    stage2_config = stage2_config or default_stage2_config(stage1_config)
    stage1 = stage1_optimize(target, stage1_config, params=params, filt=filt)
    stage2 = stage2_refine(target, stage1.waveform, noise, stage2_config,
                           filt=filt, prep=prep)
    return DesignResult(stage1=stage1, stage2=stage2)
