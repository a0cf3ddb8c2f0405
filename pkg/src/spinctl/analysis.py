"""Post-hoc evaluation: rotation correction of measured-vs-predicted states,
the Gaussian state-displacement yield-bias model, and batch statistics.

Measured density matrices sometimes come out geometrically rotated relative
to the prediction (frame/timing errors between control and readout). The
correction here searches SO(3) for the rotation maximizing the Uhlmann
fidelity and reports metrics before and after. Since real tomography data is
not available at desk scale, a synthetic batch mode fabricates Fig.3-shaped
data sets from the noise and displacement models, with planted rotation
outliers clearly labeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .spincore import (QuantumState, Rotation, _uhlmann_amplitude, build_spin_system,
                       fidelity, rotation_operator, yield_mixed)

__all__ = [
    "RotationCorrection",
    "BiasResult",
    "BatchEntry",
    "BatchRecord",
    "optimize_rotation_overlap",
    "gaussian_displacement_bias",
    "find_bias_sigma",
    "batch_evaluate",
    "synthetic_batch",
    "histogram_table",
]


@dataclass(frozen=True)
class RotationCorrection:
    rotation: Rotation
    corrected: QuantumState
    fidelity_before: float
    fidelity_after: float


def _so3_euler_grid(n_alpha=20, n_beta=11, n_gamma=20):
    """Near-uniform deterministic covering of SO(3) in z-y-z Euler angles
    (uniform alpha and gamma, uniform cos(beta))."""
    alphas = np.linspace(0.0, 2 * math.pi, n_alpha, endpoint=False)
    betas = np.arccos(np.linspace(1.0, -1.0, n_beta))
    gammas = np.linspace(0.0, 2 * math.pi, n_gamma, endpoint=False)
    return [(a, b, g) for a in alphas for b in betas for g in gammas]


class _RotationFidelity:
    """Fast fidelity(predicted, R measured R^dag) as a function of z-y-z
    Euler angles: both matrix square roots are precomputed and rotations are
    assembled from the diagonal fz phases and one fy eigenbasis."""

    def __init__(self, rho_p: np.ndarray, rho_m: np.ndarray, sys):
        from .spincore import _psd_sqrt

        self.sqrt_p = _psd_sqrt(rho_p)
        self.sqrt_m = _psd_sqrt(rho_m)
        self.m_z = np.real(np.diag(sys.fz))
        self.y_evals, self.y_evecs = np.linalg.eigh(sys.fy)

    def unitary(self, euler) -> np.ndarray:
        alpha, beta, gamma = euler
        ry = (self.y_evecs * np.exp(-1j * beta * self.y_evals)) \
            @ self.y_evecs.conj().T
        return np.exp(-1j * alpha * self.m_z)[:, None] * ry \
            * np.exp(-1j * gamma * self.m_z)[None, :]

    def value(self, euler) -> float:
        u = self.unitary(euler)
        # sqrt(U rho U^dag) = U sqrt(rho) U^dag
        core = self.sqrt_p @ u @ self.sqrt_m @ u.conj().T
        return float(min(np.sum(np.linalg.svd(core, compute_uv=False)), 1.0))


def optimize_rotation_overlap(measured: QuantumState,
                              predicted: QuantumState) -> RotationCorrection:
    """Rotation R maximizing fidelity(predicted, R measured R^dag).

    A deterministic Euler-angle grid scan (the fidelity landscape over SO(3)
    has features on the pi/(2f) scale, so a handful of starts is not enough)
    picks the best cells, each refined by a Powell coordinate search. Ties
    break toward the smallest rotation angle, and the identity is always a
    candidate, so the corrected fidelity never drops below the raw one.
    """
    if measured.dim != predicted.dim:
        raise ValueError("state dimensions differ")
    sys = build_spin_system(measured.f)
    rho_m = measured.density()
    rho_p = predicted.density()
    fid = _RotationFidelity(rho_p, rho_m, sys)
    before = fid.value((0.0, 0.0, 0.0))

    grid = _so3_euler_grid()
    values = np.array([fid.value(e) for e in grid])
    starts = [grid[i] for i in np.argsort(values)[-8:]]

    candidates = []
    for x0 in starts:
        res = scipy.optimize.minimize(
            lambda x: -fid.value(x), np.asarray(x0), method="Powell",
            options=dict(xtol=1e-10, ftol=1e-13, maxiter=600))
        candidates.append((-res.fun, Rotation.from_euler_zyz(*res.x)))

    best_fid = max(f for f, _ in candidates)
    # ties within numerical tolerance resolve to the smallest rotation angle
    tied = [rot for f, rot in candidates if f >= best_fid - 1e-9]
    rot = min(tied, key=lambda r: abs(r.angle))
    if best_fid <= before + 1e-12 or abs(rot.angle) < 1e-12:
        return RotationCorrection(
            rotation=Rotation.identity(), corrected=measured,
            fidelity_before=before, fidelity_after=before)
    u = rotation_operator(sys, rot)
    corrected_rho = u @ rho_m @ u.conj().T
    corrected_rho = (corrected_rho + corrected_rho.conj().T) / 2
    corrected = QuantumState.mixed(corrected_rho) if not measured.is_pure \
        else QuantumState.pure(u @ measured.data)
    after = _uhlmann_amplitude(rho_p, corrected.density())
    return RotationCorrection(rotation=rot, corrected=corrected,
                              fidelity_before=before, fidelity_after=max(after, before))


# ---------------------------------------------------------------------------
# Gaussian displacement bias


@dataclass(frozen=True)
class BiasResult:
    mean_yield: float
    yield_std: float
    bias: float


def _displaced_yields(psi: np.ndarray, sigma: float, normals: np.ndarray) -> np.ndarray:
    """Yields |<psi|psi'>|^2 for psi' = normalize(psi + sigma * z)."""
    displaced = psi[None, :] + sigma * normals
    norms = np.linalg.norm(displaced, axis=1)
    overlaps = displaced @ psi.conj()
    return np.abs(overlaps / norms) ** 2


def _unit_normals(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Complex Gaussians with E|z_i|^2 = 1 per component."""
    return (rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))) \
        / math.sqrt(2.0)


def gaussian_displacement_bias(state: QuantumState, sigma: float, n_samples: int,
                               rng_seed: int = 0) -> BiasResult:
    """Monte-Carlo mean yield of Gaussian-displaced copies of a pure state.

    bias = 1 - mean_yield estimates how much random state-estimation noise
    depresses reported yields.
    """
    if not state.is_pure:
        raise ValueError("displacement model is defined for pure states")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return BiasResult(mean_yield=1.0, yield_std=0.0, bias=0.0)
    rng = np.random.default_rng(rng_seed)
    yields = _displaced_yields(state.data, sigma, _unit_normals(rng, n_samples, state.dim))
    mean = float(np.mean(yields))
    return BiasResult(mean_yield=mean, yield_std=float(np.std(yields, ddof=1)),
                      bias=1.0 - mean)


def find_bias_sigma(state: QuantumState, target_bias: float = 0.10,
                    n_samples: int = 10000, rng_seed: int = 0) -> float:
    """Displacement scale sigma at which the mean yield bias equals
    target_bias, by root bracketing on common random numbers (the same
    Gaussian draws are reused for every sigma, making the curve smooth and
    the result deterministic given rng_seed)."""
    rng = np.random.default_rng(rng_seed)
    normals = _unit_normals(rng, n_samples, state.dim)
    psi = state.data

    def bias_of(sigma):
        return float(1.0 - np.mean(_displaced_yields(psi, sigma, normals)))

    lo, hi = 0.0, 1.0
    while bias_of(hi) < target_bias:
        hi *= 2.0
        if hi > 64:
            raise ValueError("target bias unreachable")
    return float(scipy.optimize.brentq(
        lambda s: bias_of(s) - target_bias, lo, hi, xtol=1e-10))


# ---------------------------------------------------------------------------
# batch statistics


@dataclass(frozen=True)
class BatchEntry:
    label: str
    yield_mixed: float
    fidelity: float
    corrected_yield: float
    corrected_fidelity: float
    rotation_angle: float
    rotation_euler_zyz: tuple
    error: str | None = None


@dataclass(frozen=True)
class BatchRecord:
    entries: tuple

    def values(self, field: str) -> np.ndarray:
        return np.array([getattr(e, field) for e in self.entries if e.error is None])


def batch_evaluate(labels, targets, predicted, measured) -> BatchRecord:
    """Per-entry yield/fidelity before and after rotation correction.

    yield compares target vs measured, fidelity compares predicted vs
    measured; the correcting rotation is fit against the predicted state and
    applied before recomputing both. Per-entry failures are recorded and the
    batch continues.
    """
    if not (len(labels) == len(targets) == len(predicted) == len(measured)):
        raise ValueError("label/target/predicted/measured arrays must align")
    entries = []
    for label, tgt, pred, meas in zip(labels, targets, predicted, measured):
        try:
            raw_yield = yield_mixed(tgt, meas)
            correction = optimize_rotation_overlap(meas, pred)
            entries.append(BatchEntry(
                label=label,
                yield_mixed=raw_yield,
                fidelity=correction.fidelity_before,
                corrected_yield=yield_mixed(tgt, correction.corrected),
                corrected_fidelity=correction.fidelity_after,
                rotation_angle=float(correction.rotation.angle),
                rotation_euler_zyz=tuple(correction.rotation.euler_zyz()),
            ))
        except (ValueError, ArithmeticError) as exc:
            entries.append(BatchEntry(
                label=label, yield_mixed=float("nan"), fidelity=float("nan"),
                corrected_yield=float("nan"), corrected_fidelity=float("nan"),
                rotation_angle=float("nan"), rotation_euler_zyz=(float("nan"),) * 3,
                error=str(exc)))
    return BatchRecord(entries=tuple(entries))


def histogram_table(values: np.ndarray, n_bins: int = 20, value_range=(0.0, 1.0)):
    """Rows (bin_left, bin_right, count) over the requested value range."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=n_bins,
                                 range=value_range)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i]))
            for i in range(len(counts))]


# ---------------------------------------------------------------------------
# synthetic measurements


def _random_pure(rng: np.random.Generator, dim: int) -> QuantumState:
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return QuantumState.pure(vec / np.linalg.norm(vec))


def synthetic_batch(params, n_targets: int = 21, rng_seed: int = 0,
                    displacement_sigma: float = 0.13,
                    planted_indices=(3, 11), planted_angle: float = 0.4,
                    pumped_fraction: float | None = None):
    """Fabricate a synthetic data set shaped like the experimental batch.

    For each random pure target, the "predicted" state is the exact
    depolarizing-channel output for an ideally controlled run; the
    "measured" state additionally suffers eigenvector-wise Gaussian
    displacement (the tomography error model). Entries in planted_indices
    are also rotated by planted_angle about a random axis, mimicking the
    outlier waveforms; their labels carry a -planted suffix.

    Returns (labels, targets, predicted, measured, planted_labels).
    """
    sys = build_spin_system(3)
    rng = np.random.default_rng(rng_seed)
    eta = math.exp(-params.scattering_rate * params.duration)
    scale = pumped_fraction if pumped_fraction is not None else 1.0

    labels, targets, predicted, measured, planted = [], [], [], [], []
    for i in range(n_targets):
        target = _random_pure(rng, sys.dim)
        rho_p = scale * eta * np.outer(target.data, target.data.conj()) \
            + (1.0 - scale * eta) * np.eye(sys.dim) / sys.dim
        pred = QuantumState.mixed(rho_p)

        evals, evecs = np.linalg.eigh(rho_p)
        rho_m = np.zeros_like(rho_p)
        for lam, vec in zip(evals, evecs.T):
            displaced = vec + displacement_sigma * _unit_normals(rng, 1, sys.dim)[0]
            displaced /= np.linalg.norm(displaced)
            rho_m += lam * np.outer(displaced, displaced.conj())
        label = f"synthetic-{i:02d}"
        if i in planted_indices:
            axis = rng.standard_normal(3)
            u = rotation_operator(sys, Rotation(axis=axis, angle=planted_angle))
            rho_m = u @ rho_m @ u.conj().T
            label += "-planted"
            planted.append(label)
        rho_m = (rho_m + rho_m.conj().T) / 2
        labels.append(label)
        targets.append(target)
        predicted.append(pred)
        measured.append(QuantumState.mixed(rho_m))
    return labels, targets, predicted, measured, planted
