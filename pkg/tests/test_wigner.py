import math

import numpy as np
import pytest

import spinctl as sc
from spinctl.wigner import (multipole_decompose, reconstruct_density,
                            spherical_tensor_basis, wigner_at, wigner_grid)
from conftest import random_density


@pytest.mark.parametrize("f", [1, 3])
def test_tensor_basis_orthonormal(f):
    basis = spherical_tensor_basis(f)
    flat = [basis[k][q] for k in range(len(basis)) for q in range(2 * k + 1)]
    dim = int(2 * f + 1)
    assert len(flat) == dim * dim
    gram = np.array([[np.trace(a.conj().T @ b) for b in flat] for a in flat])
    assert np.max(np.abs(gram - np.eye(dim * dim))) < 1e-12


def test_tensor_conjugation_symmetry():
    basis = spherical_tensor_basis(3)
    for k in range(7):
        for q in range(-k, k + 1):
            t_kq = basis[k][q + k]
            t_kmq = basis[k][-q + k]
            assert np.max(np.abs(t_kq.conj().T - (-1) ** q * t_kmq)) < 1e-12


def test_decomposition_normalization_and_symmetry(sys7):
    rng = np.random.default_rng(0)
    rho = random_density(rng)
    dec = multipole_decompose(rho)
    assert dec.coefficient(0, 0) == pytest.approx(1 / math.sqrt(7), abs=1e-12)
    for k in range(7):
        for q in range(-k, k + 1):
            lhs = dec.coefficient(k, -q)
            rhs = (-1) ** q * np.conj(dec.coefficient(k, q))
            assert abs(lhs - rhs) < 1e-12


def test_axially_symmetric_state_has_q0_only(sys7):
    rho = sc.QuantumState.mixed(np.diag([1.0, 0, 0, 0, 0, 0, 0]).astype(complex))
    dec = multipole_decompose(rho)
    for k in range(7):
        for q in range(-k, k + 1):
            if q != 0:
                assert abs(dec.coefficient(k, q)) < 1e-14


def test_roundtrip_reconstruction(sys7):
    rng = np.random.default_rng(1)
    for _ in range(5):
        rho = random_density(rng)
        dec = multipole_decompose(rho)
        assert np.max(np.abs(reconstruct_density(dec) - rho.data)) <= 1e-10


def test_maximally_mixed_constant(sys7):
    rho = sc.QuantumState.mixed(np.eye(7) / 7)
    grid = wigner_grid(rho, 16, 32)
    assert np.allclose(grid.w, 1 / (4 * math.pi), atol=1e-12)
    assert grid.sphere_integral() == pytest.approx(1.0, abs=1e-12)


def test_sphere_integral_default_resolution(sys7):
    rng = np.random.default_rng(2)
    rho = random_density(rng)
    grid = wigner_grid(rho, 64, 128)
    assert abs(grid.sphere_integral() - 1.0) < 1e-6


def test_cat_state_fourfold_symmetry(sys7):
    cat = sc.target_library("cat_z2", sys7)
    rho = sc.QuantumState.mixed(cat.density())
    rng = np.random.default_rng(3)
    theta = rng.uniform(0.1, math.pi - 0.1, 25)
    phi = rng.uniform(0, 2 * math.pi, 25)
    assert np.max(np.abs(wigner_at(rho, theta, phi)
                         - wigner_at(rho, theta, phi + math.pi / 2))) < 1e-9
    dec = multipole_decompose(rho)
    for k in range(7):
        for q in range(-k, k + 1):
            if q % 4 != 0:
                assert abs(dec.coefficient(k, q)) < 1e-12


def test_rotational_covariance(sys7):
    rng = np.random.default_rng(4)
    rho = random_density(rng)
    rot = sc.Rotation(axis=rng.standard_normal(3), angle=0.9)
    u = sc.rotation_operator(sys7, rot)
    rotated = sc.QuantumState.mixed(u @ rho.data @ u.conj().T)
    theta = rng.uniform(0.05, math.pi - 0.05, 30)
    phi = rng.uniform(0, 2 * math.pi, 30)
    points = np.stack([np.sin(theta) * np.cos(phi),
                       np.sin(theta) * np.sin(phi), np.cos(theta)])
    back = rot.matrix().T @ points
    theta_b = np.arccos(np.clip(back[2], -1, 1))
    phi_b = np.arctan2(back[1], back[0])
    assert np.max(np.abs(wigner_at(rotated, theta, phi)
                         - wigner_at(rho, theta_b, phi_b))) < 1e-6


def test_linearity_of_mixtures(sys7):
    rng = np.random.default_rng(5)
    a, b = random_density(rng), random_density(rng)
    mix = sc.QuantumState.mixed(0.3 * a.data + 0.7 * b.data)
    theta = rng.uniform(0.1, math.pi - 0.1, 20)
    phi = rng.uniform(0, 2 * math.pi, 20)
    lhs = wigner_at(mix, theta, phi)
    rhs = 0.3 * wigner_at(a, theta, phi) + 0.7 * wigner_at(b, theta, phi)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_moment_recovers_expectation(sys7):
    # integral of W cos(theta) equals <F_z> times a constant fixed by the
    # k=1 tensor normalization: kappa = sqrt(d/3) / ||fz||_F
    rng = np.random.default_rng(6)
    rho = random_density(rng)
    grid = wigner_grid(rho, 64, 128)
    integral = float(np.sum(grid.w * grid.weights * np.cos(grid.theta)[:, None]))
    kappa = math.sqrt(rho.dim / 3.0) / np.linalg.norm(sys7.fz)
    assert integral == pytest.approx(kappa * sc.expectation(rho, sys7.fz), abs=1e-6)


def test_grid_resolution_validation(sys7):
    rho = sc.QuantumState.mixed(np.eye(7) / 7)
    with pytest.raises(ValueError):
        wigner_grid(rho, 1, 32)
    with pytest.raises(ValueError):
        wigner_grid(rho, 8, 2)
