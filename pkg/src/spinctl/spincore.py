"""Spin-F operator algebra, state containers, and scalar metrics.

Everything downstream (control, dynamics, optimization, squeezing, Wigner
plots) is built on the objects defined here: angular-momentum matrices for a
single spin f, pure/mixed quantum states with validity checks, geometric
rotations, and the overlap/squeezing figures of merit.

Conventions
-----------
* Basis order is m = f, f-1, ..., -f (row/column 0 corresponds to m = f).
* hbar = 1; spin operators are dimensionless.
* Global phases of constructed states are fixed by making the
  largest-magnitude amplitude real and positive, so serialized states are
  reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation as _SO3

__all__ = [
    "SpinSystem",
    "QuantumState",
    "Rotation",
    "SqueezingResult",
    "UndefinedSqueezingError",
    "build_spin_system",
    "stretched_state",
    "rotation_operator",
    "yield_pure",
    "yield_mixed",
    "fidelity",
    "squeezing_parameter",
    "lie_closure_dimension",
    "expectation",
    "variance",
]

# Eigenvalues of Hermitian products are clamped here before taking square
# roots; anything more negative is treated as an invalid state.
_PSD_CLAMP = -1e-10


class UndefinedSqueezingError(ValueError):
    """Raised when the mean spin vanishes and xi = dF/|<F>| is undefined."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinSystem:
    """Angular-momentum matrices for a single spin f (dim = 2f+1)."""

    f: float
    dim: int
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray

    @property
    def fx2(self) -> np.ndarray:
        return self.fx @ self.fx

    def axis_operator(self, axis) -> np.ndarray:
        """Return n . F for a (not necessarily normalized) 3-vector n."""
        n = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValueError("axis vector must be nonzero")
        n = n / norm
        return n[0] * self.fx + n[1] * self.fy + n[2] * self.fz


@lru_cache(maxsize=None)
def _cached_system(twice_f: int) -> SpinSystem:
    f = twice_f / 2.0
    dim = twice_f + 1
    m = np.arange(f, -f - 1, -1)  # descending: f, f-1, ..., -f
    fz = np.diag(m).astype(complex)
    # <f, m+1| F+ |f, m> = sqrt(f(f+1) - m(m+1)); superdiagonal in this basis
    fplus = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        mm = m[i + 1]
        fplus[i, i + 1] = math.sqrt(f * (f + 1) - mm * (mm + 1))
    fx = (fplus + fplus.conj().T) / 2
    fy = (fplus - fplus.conj().T) / 2j
    return SpinSystem(f=f, dim=dim, fx=_readonly(fx), fy=_readonly(fy), fz=_readonly(fz))


def build_spin_system(f) -> SpinSystem:
    """Construct fx, fy, fz for spin f from the ladder-operator formula.

    f must be a positive integer or half-integer.
    """
    twice_f = 2 * float(f)
    if twice_f <= 0 or abs(twice_f - round(twice_f)) > 1e-12:
        raise ValueError(f"f must be a positive integer or half-integer, got {f!r}")
    return _cached_system(int(round(twice_f)))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class QuantumState:
    """Pure ket or density matrix in the 2f+1 dimensional space.

    Use the ``pure``/``mixed`` classmethods; the constructor validates the
    invariants (normalization, Hermiticity, positivity) and freezes the data.
    """

    kind: str  # "pure" | "mixed"
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if self.kind == "pure":
            if data.ndim != 1:
                raise ValueError("pure state data must be a vector")
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"pure state norm {norm} deviates from 1")
        elif self.kind == "mixed":
            if data.ndim != 2 or data.shape[0] != data.shape[1]:
                raise ValueError("mixed state data must be a square matrix")
            if np.max(np.abs(data - data.conj().T)) > 1e-12:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data).real
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix trace {tr} deviates from 1")
            if np.linalg.eigvalsh(data).min() < _PSD_CLAMP:
                raise ValueError("density matrix has a negative eigenvalue")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "data", _readonly(data))

    @classmethod
    def pure(cls, amplitudes) -> "QuantumState":
        return cls("pure", np.asarray(amplitudes, dtype=complex))

    @classmethod
    def mixed(cls, rho) -> "QuantumState":
        return cls("mixed", np.asarray(rho, dtype=complex))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def f(self) -> float:
        return (self.dim - 1) / 2.0

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density(self) -> np.ndarray:
        """Density-matrix view of the state (outer product for pure kets)."""
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.asarray(self.data)


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real > 0."""
    idx = int(np.argmax(np.abs(vec)))
    pivot = vec[idx]
    if pivot == 0:
        return vec
    return vec * (pivot.conjugate() / abs(pivot))


def stretched_state(sys: SpinSystem, axis, m) -> QuantumState:
    """Eigenstate of axis.F with eigenvalue m (a spin coherent state for |m|=f)."""
    if abs(m) > sys.f + 1e-12 or abs(2 * m - round(2 * m)) > 1e-12 or \
            abs((sys.f - m) - round(sys.f - m)) > 1e-9:
        raise ValueError(f"invalid projection m={m} for f={sys.f}")
    op = sys.axis_operator(axis)
    evals, evecs = np.linalg.eigh(op)  # ascending: -f ... f
    idx = int(round(m + sys.f))
    if abs(evals[idx] - m) > 1e-9:
        raise ValueError(f"eigenvalue {evals[idx]} does not match requested m={m}")
    vec = _phase_fixed(evecs[:, idx])
    return QuantumState.pure(vec / np.linalg.norm(vec))


# ---------------------------------------------------------------------------
# rotations


@dataclass(frozen=True)
class Rotation:
    """Geometric rotation, stored as unit axis + angle (radians)."""

    axis: np.ndarray
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("rotation axis must be nonzero")
        object.__setattr__(self, "axis", _readonly(axis / norm))
        object.__setattr__(self, "angle", float(self.angle))

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(axis=np.array([0.0, 0.0, 1.0]), angle=0.0)

    @classmethod
    def from_euler_zyz(cls, alpha, beta, gamma) -> "Rotation":
        r = _SO3.from_euler("ZYZ", [alpha, beta, gamma])
        return cls._from_so3(r)

    @classmethod
    def _from_so3(cls, r: _SO3) -> "Rotation":
        rotvec = r.as_rotvec()
        angle = np.linalg.norm(rotvec)
        if angle < 1e-300:
            return cls.identity()
        return cls(axis=rotvec / angle, angle=float(angle))

    def _so3(self) -> _SO3:
        return _SO3.from_rotvec(self.angle * self.axis)

    def matrix(self) -> np.ndarray:
        """3x3 SO(3) matrix acting on spatial vectors."""
        return self._so3().as_matrix()

    def inverse(self) -> "Rotation":
        return Rotation(axis=-self.axis, angle=self.angle)

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation equal to applying ``other`` first, then ``self``."""
        return Rotation._from_so3(self._so3() * other._so3())

    def euler_zyz(self) -> tuple:
        import warnings

        with warnings.catch_warnings():
            # gimbal lock at beta = 0 or pi: scipy picks gamma = 0, which is
            # a valid representative
            warnings.simplefilter("ignore", UserWarning)
            return tuple(self._so3().as_euler("ZYZ"))


def rotation_operator(sys: SpinSystem, rot: Rotation) -> np.ndarray:
    """Unitary exp(-i * angle * axis.F) representing the rotation on spin f."""
    gen = sys.axis_operator(rot.axis)
    evals, evecs = np.linalg.eigh(gen)
    return (evecs * np.exp(-1j * rot.angle * evals)) @ evecs.conj().T


# ---------------------------------------------------------------------------
# expectation values


def expectation(state: QuantumState, op: np.ndarray) -> float:
    """<op> for a Hermitian operator (real part of the trace pairing)."""
    if state.is_pure:
        return float(np.real(np.vdot(state.data, op @ state.data)))
    return float(np.real(np.trace(op @ state.data)))


def variance(state: QuantumState, op: np.ndarray) -> float:
    mean = expectation(state, op)
    second = expectation(state, op @ op)
    return max(second - mean * mean, 0.0)


# ---------------------------------------------------------------------------
# overlap metrics


def _check_same_dim(a: QuantumState, b: QuantumState):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def yield_pure(target: QuantumState, state: QuantumState) -> float:
    """Squared overlap |<target|state>|^2 between two pure states."""
    if not (target.is_pure and state.is_pure):
        raise ValueError("yield_pure requires pure states; use yield_mixed")
    _check_same_dim(target, state)
    return float(abs(np.vdot(target.data, state.data)) ** 2)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(rho)
    if evals.min() < _PSD_CLAMP:
        raise ValueError("matrix is not positive semidefinite within tolerance")
    # zero out round-off eigenvalues so sqrt does not amplify them
    evals = np.where(evals < 1e-14 * max(evals.max(), 0.0), 0.0, evals)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def _uhlmann_amplitude(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """Tr sqrt(sqrt(a) b sqrt(a)) = sum of singular values of sqrt(a) sqrt(b).

    The singular-value form keeps round-off on zero modes linear; taking
    eigenvalues of the Hermitian product and square-rooting them would turn
    eps-sized noise into sqrt(eps)-sized errors near pure states.
    """
    sqrt_a = _psd_sqrt(rho_a)
    sqrt_b = _psd_sqrt(rho_b)
    singular = np.linalg.svd(sqrt_a @ sqrt_b, compute_uv=False)
    return float(min(np.sum(singular), 1.0))


def yield_mixed(target: QuantumState, state: QuantumState) -> float:
    """Uhlmann overlap amplitude Tr sqrt(sqrt(rho_T) rho sqrt(rho_T)).

    Pure inputs are promoted to density matrices; for a pure target this
    reduces to sqrt(<target|rho|target>).
    """
    _check_same_dim(target, state)
    return _uhlmann_amplitude(target.density(), state.density())


def fidelity(predicted: QuantumState, measured: QuantumState) -> float:
    """Uhlmann amplitude between predicted and measured states (same formula
    as yield_mixed, applied to a different pair of roles)."""
    _check_same_dim(predicted, measured)
    return _uhlmann_amplitude(predicted.density(), measured.density())


# ---------------------------------------------------------------------------
# squeezing


@dataclass(frozen=True)
class SqueezingResult:
    xi: float
    xi_normalized: float
    squeezing_db: float


def squeezing_parameter(state: QuantumState, squeeze_axis, mean_axis) -> SqueezingResult:
    """Squeezing figure of merit xi = dF_squeeze / |<F_mean>|.

    xi_normalized = xi * sqrt(2f) equals 1 for a spin coherent state aligned
    with mean_axis; squeezing_db = 10 log10(2 dF^2 / |<F_mean>|) equals 0 for
    that reference and is negative when squeezed.
    """
    sys = build_spin_system(state.f)
    mean = expectation(state, sys.axis_operator(mean_axis))
    if abs(mean) <= 1e-9:
        raise UndefinedSqueezingError(
            "mean spin projection vanishes; squeezing parameter is undefined")
    var = variance(state, sys.axis_operator(squeeze_axis))
    xi = math.sqrt(var) / abs(mean)
    return SqueezingResult(
        xi=xi,
        xi_normalized=xi * math.sqrt(2 * sys.f),
        squeezing_db=10.0 * math.log10(2.0 * var / abs(mean)),
    )


# ---------------------------------------------------------------------------
# Lie closure


def _vectorize_real(mats: np.ndarray) -> np.ndarray:
    """Map a stack of anti-Hermitian matrices to real row vectors."""
    flat = mats.reshape(mats.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def lie_closure_dimension(generators, tol: float = 1e-9) -> int:
    """Dimension of the real Lie algebra generated by the given Hermitians.

    Takes the traceless parts of i*G, then alternates commutator expansion
    with SVD rank extraction until the dimension stops growing. The rank
    tolerance is relative to the largest singular value.
    """
    mats = [np.asarray(g, dtype=complex) for g in generators]
    if not mats:
        return 0
    d = mats[0].shape[0]
    for g in mats:
        if g.shape != (d, d):
            raise ValueError("all generators must share one dimension")
        if np.max(np.abs(g - g.conj().T)) > 1e-9:
            raise ValueError("generators must be Hermitian")
    seeds = []
    for g in mats:
        x = 1j * (g - (np.trace(g) / d) * np.eye(d))
        if np.max(np.abs(x)) > 1e-12:
            seeds.append(x)
    if not seeds:
        return 0

    def extract_basis(stack: np.ndarray):
        rows = _vectorize_real(stack)
        u, s, vh = np.linalg.svd(rows, full_matrices=False)
        rank = int(np.sum(s > tol * s[0]))
        basis_rows = vh[:rank]
        n = basis_rows.shape[1] // 2
        return rank, (basis_rows[:, :n] + 1j * basis_rows[:, n:]).reshape(rank, d, d)

    rank, basis = extract_basis(np.array(seeds))
    max_dim = d * d - 1
    while rank < max_dim:
        prod = np.einsum("aij,bjk->abik", basis, basis)
        comms = (prod - prod.transpose(1, 0, 2, 3)).reshape(-1, d, d)
        stack = np.concatenate([basis, comms], axis=0)
        new_rank, new_basis = extract_basis(stack)
        if new_rank == rank:
            break
        rank, basis = new_rank, new_basis
    return rank
