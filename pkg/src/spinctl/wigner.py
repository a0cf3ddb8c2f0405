"""Spherical Wigner function of a spin state.

The density matrix is expanded on orthonormal irreducible tensor operators
T_kq (k = 0..2f, q = -k..k, Tr(T_kq^dag T_k'q') = delta delta), built by
lowering from T_kk proportional to F_+^k. The Wigner function is the
spherical-harmonic synthesis of the multipole coefficients,

    W(theta, phi) = sqrt(d / 4 pi) * sum_kq rho_kq Y_kq(theta, phi),

normalized so the sphere integral of W equals Tr(rho) (the maximally mixed
state is the constant 1/(4 pi)). Grids pair Gauss-Legendre nodes in
cos(theta) with a uniform azimuth grid, which is exact quadrature for the
band limit 2f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sph_harm_y

from .spincore import QuantumState, build_spin_system

__all__ = [
    "MultipoleDecomposition",
    "WignerGrid",
    "spherical_tensor_basis",
    "multipole_decompose",
    "reconstruct_density",
    "wigner_at",
    "wigner_grid",
    "wigner_normalization",
]


def wigner_normalization(dim: int) -> float:
    """Prefactor sqrt(d / 4 pi) making the sphere integral equal Tr(rho)."""
    return math.sqrt(dim / (4.0 * math.pi))


@lru_cache(maxsize=None)
def _tensor_basis(twice_f: int) -> tuple:
    sys = build_spin_system(twice_f / 2.0)
    dim = sys.dim
    f_plus = sys.fx + 1j * sys.fy
    f_minus = sys.fx - 1j * sys.fy
    basis = []
    for k in range(dim):
        row = np.empty((2 * k + 1, dim, dim), dtype=complex)
        top = np.linalg.matrix_power(f_plus, k)
        top = ((-1) ** k) * top / np.linalg.norm(top)
        row[2 * k] = top
        for q in range(k, -k, -1):
            # [F_-, T_kq] = sqrt((k+q)(k-q+1)) T_k,q-1
            lowered = f_minus @ row[q + k] - row[q + k] @ f_minus
            row[q - 1 + k] = lowered / math.sqrt((k + q) * (k - q + 1))
        row.setflags(write=False)
        basis.append(row)
    return tuple(basis)


def spherical_tensor_basis(f) -> tuple:
    """Orthonormal tensor operators; element [k][q+k] is T_kq (d x d)."""
    return _tensor_basis(int(round(2 * float(f))))


@dataclass(frozen=True)
class MultipoleDecomposition:
    """Coefficients rho_kq = Tr(rho T_kq^dag); entry [k][q+k] of each row."""

    f: float
    coefficients: tuple  # tuple over k of complex arrays of length 2k+1

    def coefficient(self, k: int, q: int) -> complex:
        return self.coefficients[k][q + k]


def multipole_decompose(rho: QuantumState) -> MultipoleDecomposition:
    basis = spherical_tensor_basis(rho.f)
    dm = rho.density()
    coeffs = []
    for row in basis:
        # Tr(rho T^dag) = sum_ij rho_ij conj(T_ij)
        coeffs.append(np.einsum("qij,ij->q", row.conj(), dm))
    return MultipoleDecomposition(f=rho.f, coefficients=tuple(coeffs))


def reconstruct_density(decomp: MultipoleDecomposition) -> np.ndarray:
    """Inverse of multipole_decompose (completeness check)."""
    basis = spherical_tensor_basis(decomp.f)
    dim = basis[0].shape[-1]
    rho = np.zeros((dim, dim), dtype=complex)
    for k, row in enumerate(basis):
        rho += np.einsum("q,qij->ij", decomp.coefficients[k], row)
    return rho


def wigner_at(rho: QuantumState, theta, phi) -> np.ndarray:
    """W evaluated at arbitrary angles (theta polar, phi azimuth; broadcast)."""
    decomp = multipole_decompose(rho)
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float),
                                     np.asarray(phi, dtype=float))
    flat_theta = theta.ravel()
    flat_phi = phi.ravel()
    total = np.zeros(flat_theta.shape, dtype=complex)
    for k, coeff in enumerate(decomp.coefficients):
        for q in range(-k, k + 1):
            c = coeff[q + k]
            if abs(c) < 1e-16:
                continue
            total += c * sph_harm_y(k, q, flat_theta, flat_phi)
    out = wigner_normalization(rho.dim) * np.real(total)
    return out.reshape(theta.shape)


@dataclass(frozen=True)
class WignerGrid:
    """W sampled on a Gauss-Legendre (theta) x uniform (phi) grid.

    weights are full solid-angle quadrature weights; (w * weights).sum()
    equals Tr(rho) up to quadrature round-off.
    """

    theta: np.ndarray
    phi: np.ndarray
    w: np.ndarray        # shape (n_theta, n_phi)
    weights: np.ndarray  # shape (n_theta, n_phi)
    normalization: float

    def sphere_integral(self) -> float:
        return float(np.sum(self.w * self.weights))


def wigner_grid(rho: QuantumState, n_theta: int = 64, n_phi: int = 128) -> WignerGrid:
    if n_theta < 2 or n_phi < 3:
        raise ValueError("need n_theta >= 2 and n_phi >= 3")
    nodes, gl_weights = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(nodes[::-1])
    gl_weights = gl_weights[::-1]
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    values = wigner_at(rho, theta[:, None], phi[None, :])
    weights = np.outer(gl_weights, np.full(n_phi, 2.0 * math.pi / n_phi))
    return WignerGrid(theta=theta, phi=phi, w=values, weights=weights,
                      normalization=wigner_normalization(rho.dim))
