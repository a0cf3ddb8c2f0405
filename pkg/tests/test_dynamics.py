import math

import numpy as np
import pytest

import spinctl as sc
from spinctl.dynamics import chi_samples, substep_eigensystems
from spinctl._linalg import unitaries_from_eigensystems
from conftest import random_waveform


def zero_drive(duration, n):
    dt = duration / n
    return sc.RenderedDrive(times=np.arange(n) * dt, bx=np.zeros(n),
                            by=np.zeros(n), dt=dt)


def rk4_schrodinger(psi0, drive, params, sys, refine=10):
    """Independent fixed-step RK4 integration of the piecewise-constant drive."""
    psi = np.array(psi0, dtype=complex)
    h_step = drive.dt / refine
    for k in range(drive.n_samples):
        h = sc.hamiltonian_at(sys, params, drive.bx[k], drive.by[k])
        rhs = lambda v: -1j * (h @ v)
        for _ in range(refine):
            k1 = rhs(psi)
            k2 = rhs(psi + 0.5 * h_step * k1)
            k3 = rhs(psi + 0.5 * h_step * k2)
            k4 = rhs(psi + h_step * k3)
            psi = psi + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def rk4_master(rho0, drive, params, sys, gamma, chi=None, refine=10):
    """Independent RK4 integration of d rho/dt = -i[H, rho] - gamma (rho - I/d)."""
    p = params if chi is None else params.with_nonlinear_rate(chi)
    rho = np.array(rho0, dtype=complex)
    d = rho.shape[0]
    eye = np.eye(d)
    h_step = drive.dt / refine
    for k in range(drive.n_samples):
        h = sc.hamiltonian_at(sys, p, drive.bx[k], drive.by[k])

        def rhs(r):
            out = -1j * (h @ r - r @ h)
            if gamma:
                out = out - gamma * (r - np.trace(r) * eye / d)
            return out

        for _ in range(refine):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * h_step * k1)
            k3 = rhs(rho + 0.5 * h_step * k2)
            k4 = rhs(rho + h_step * k3)
            rho = rho + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


# ---------------------------------------------------------------------------
# pure propagation


def test_eigenstate_invariant_under_aligned_field(sys7):
    # chi = 0, constant phi = 0: |m_x=3> only picks up a global phase
    params = sc.ControlParams(nonlinear_rate=0.0, duration=100e-6, n_steps=4)
    filt = sc.default_filter(params)
    w = sc.ControlWaveform(phis=np.zeros(4), params=params)
    drive = sc.render_waveform(w, filt)
    psi0 = sc.stretched_state(sys7, (1, 0, 0), 3)
    out = sc.propagate_pure(psi0, drive, params)
    assert abs(np.vdot(psi0.data, out.data)) == pytest.approx(1.0, abs=1e-10)


def test_pure_twisting_phases(sys7, params):
    # larmor off: amplitudes on |m_x=m> acquire exp(-i chi m^2 t) exactly
    rng = np.random.default_rng(0)
    drive = zero_drive(params.duration, 100)
    vec = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    _, evecs = np.linalg.eigh(sys7.fx)  # columns m = -3..3
    vec /= np.linalg.norm(vec)
    psi0 = sc.QuantumState.pure(evecs @ (evecs.conj().T @ vec))
    out = sc.propagate_pure(psi0, drive, params)
    amps_in = evecs.conj().T @ psi0.data
    amps_out = evecs.conj().T @ out.data
    for idx, m in enumerate(range(-3, 4)):
        phase = np.exp(-1j * params.nonlinear_rate * m * m * params.duration)
        assert abs(amps_out[idx] - phase * amps_in[idx]) < 1e-10


def test_pure_against_rk4_oracle(sys7, params, filt):
    rng = np.random.default_rng(42)
    w = random_waveform(rng, params)
    drive = sc.render_waveform(w, filt)
    psi0 = sc.default_initial_state(sys7)
    ours = sc.propagate_pure(psi0, drive, params).data
    oracle = rk4_schrodinger(psi0.data, drive, params, sys7)
    assert np.linalg.norm(ours - oracle) < 1e-6


def test_substep_unitarity(sys7, params, filt):
    rng = np.random.default_rng(1)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    evals, evecs = substep_eigensystems(sys7, params, drive)
    units = unitaries_from_eigensystems(evals, evecs, drive.dt)
    defect = np.matmul(units.conj().transpose(0, 2, 1), units) - np.eye(7)
    assert np.max(np.abs(defect)) < 1e-10


def test_energy_conserved_constant_drive(sys7, params):
    filt = sc.FilterSpec(cutoff=math.inf, substeps_per_step=32)
    w = sc.ControlWaveform(phis=np.full(params.n_steps, 0.4), params=params)
    drive = sc.render_waveform(w, filt)
    h = sc.hamiltonian_at(sys7, params, drive.bx[0], drive.by[0])
    psi0 = sc.default_initial_state(sys7)
    e0 = sc.expectation(psi0, h)
    e1 = sc.expectation(sc.propagate_pure(psi0, drive, params), h)
    assert e1 == pytest.approx(e0, rel=1e-8)


# ---------------------------------------------------------------------------
# master equation


def test_master_closed_system_matches_pure(sys7, params, filt):
    rng = np.random.default_rng(2)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    psi0 = sc.default_initial_state(sys7)
    pure = sc.propagate_pure(psi0, drive, params)
    mixed = sc.propagate_master(psi0, drive, params, sc.NoiseModel.none())
    assert np.max(np.abs(mixed.density() - pure.density())) < 1e-8


def test_depolarizing_closed_form(sys7):
    # H = 0: squared fidelity to the initial pure state decays as
    # (1 - 1/d) exp(-gamma t) + 1/d
    params = sc.ControlParams(nonlinear_rate=0.0, duration=2e-3, n_steps=10)
    gamma = 800.0
    noise = sc.NoiseModel(scattering_rate=gamma)
    psi0 = sc.default_initial_state(sys7)
    for n in (3, 17):
        drive = zero_drive(params.duration, n)
        rho = sc.propagate_master(psi0, drive, params, noise)
        expected = (1 - 1 / 7) * math.exp(-gamma * params.duration) + 1 / 7
        value = sc.yield_mixed(psi0, rho) ** 2
        assert value == pytest.approx(expected, abs=1e-12)


def test_master_against_rk4_oracle(sys7, params, filt):
    rng = np.random.default_rng(3)
    w = random_waveform(rng, params)
    drive = sc.render_waveform(w, filt)
    noise = sc.NoiseModel(scattering_rate=params.scattering_rate)
    psi0 = sc.default_initial_state(sys7)
    ours = sc.propagate_master(psi0, drive, params, noise).data
    oracle = rk4_master(psi0.density(), drive, params, sys7, noise.gamma)
    assert np.max(np.abs(ours - oracle)) < 1e-6


def test_master_ensemble_average_against_oracle(sys7, params, filt):
    rng = np.random.default_rng(4)
    w = random_waveform(rng, params)
    drive = sc.render_waveform(w, filt)
    noise = sc.NoiseModel(
        scattering_rate=params.scattering_rate,
        inhomogeneity=sc.Inhomogeneity(relative_sigma=0.05, n_samples=3))
    ours = sc.propagate_master(sc.default_initial_state(sys7), drive, params, noise).data
    chis, weights = chi_samples(params, noise)
    rho0 = sc.default_initial_state(sys7).density()
    oracle = sum(w_ * rk4_master(rho0, drive, params, sys7, noise.gamma, chi=c)
                 for c, w_ in zip(chis, weights))
    assert np.max(np.abs(ours - oracle)) < 1e-6


def test_master_trace_and_positivity(sys7, params, filt):
    rng = np.random.default_rng(5)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    noise = sc.default_noise(params)
    rho = sc.propagate_master(sc.default_initial_state(sys7), drive, params, noise)
    assert np.trace(rho.data).real == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.eigvalsh(rho.data).min() >= -1e-8


def test_depolarization_contracts_toward_identity(sys7):
    params = sc.ControlParams(nonlinear_rate=0.0, duration=1e-3, n_steps=4)
    noise = sc.NoiseModel(scattering_rate=1000.0)
    psi0 = sc.default_initial_state(sys7)
    eye7 = np.eye(7) / 7
    dists = []
    for duration in (2e-4, 5e-4, 1e-3, 2e-3):
        p = sc.ControlParams(nonlinear_rate=0.0, duration=duration, n_steps=4)
        rho = sc.propagate_master(psi0, zero_drive(duration, 8), p, noise)
        dists.append(np.linalg.norm(rho.data - eye7))
    assert all(b < a + 1e-12 for a, b in zip(dists, dists[1:]))


def test_halving_integration_step_is_inert(sys7, params, filt):
    # the per-sample step is the exact solution for the piecewise-constant
    # drive, so splitting each sample in two must reproduce the same state
    rng = np.random.default_rng(6)
    w = random_waveform(rng, params)
    drive = sc.render_waveform(w, filt)
    halved = sc.RenderedDrive(
        times=np.repeat(drive.times, 2), bx=np.repeat(drive.bx, 2),
        by=np.repeat(drive.by, 2), dt=drive.dt / 2)
    noise = sc.default_noise(params)
    psi0 = sc.default_initial_state(sys7)
    a = sc.propagate_master(psi0, drive, params, noise).data
    b = sc.propagate_master(psi0, halved, params, noise).data
    assert np.max(np.abs(a - b)) < 4e-6  # exactness: round-off only


def test_sigma_zero_independent_of_sample_count(sys7, params, filt):
    rng = np.random.default_rng(7)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    psi0 = sc.default_initial_state(sys7)
    outs = []
    for k in (1, 5):
        noise = sc.NoiseModel(scattering_rate=params.scattering_rate,
                              inhomogeneity=sc.Inhomogeneity(0.0, k))
        outs.append(sc.propagate_master(psi0, drive, params, noise).data)
    assert np.max(np.abs(outs[0] - outs[1])) < 1e-12


def test_equal_weight_scheme_runs(sys7, params, filt):
    rng = np.random.default_rng(8)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    noise = sc.NoiseModel(
        scattering_rate=0.0, decoherence_kind="none",
        inhomogeneity=sc.Inhomogeneity(0.03, 5, "equal-weight"))
    rho = sc.propagate_master(sc.default_initial_state(sys7), drive, params, noise)
    assert np.trace(rho.data).real == pytest.approx(1.0, abs=1e-10)
    chis, weights = chi_samples(params, noise)
    assert np.allclose(weights, 0.2)
    assert chis.mean() == pytest.approx(params.nonlinear_rate, rel=1e-3)


# ---------------------------------------------------------------------------
# snapshots


def test_snapshots_endpoints(sys7, params, filt):
    rng = np.random.default_rng(9)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    psi0 = sc.default_initial_state(sys7)
    noise = sc.default_noise(params)
    traj = sc.propagate_with_snapshots(psi0, drive, params, noise, 2)
    assert len(traj.states) == 2
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(params.duration, rel=1e-12)
    assert np.max(np.abs(traj.states[0].data - psi0.density())) < 1e-12
    one_shot = sc.propagate_master(psi0, drive, params, noise)
    assert np.max(np.abs(traj.final_state.data - one_shot.data)) < 1e-9


def test_snapshots_times_strictly_increasing(sys7, params, filt):
    rng = np.random.default_rng(10)
    drive = sc.render_waveform(random_waveform(rng, params), filt)
    traj = sc.propagate_with_snapshots(
        sc.default_initial_state(sys7), drive, params, sc.NoiseModel.none(), 7)
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.states) == 7
    assert "exp_fz" in traj.metrics and len(traj.metrics["exp_fz"]) == 7


def test_snapshots_require_two(sys7, params, filt):
    drive = sc.render_waveform(
        sc.ControlWaveform(phis=np.zeros(params.n_steps), params=params), filt)
    with pytest.raises(ValueError):
        sc.propagate_with_snapshots(
            sc.default_initial_state(sys7), drive, params, sc.NoiseModel.none(), 1)


def test_larmor_precession_trace(sys7):
    # chi = 0, constant field along x, |m_y=f> start: <F_z> = f sin(omega t)
    # and <F_y> = f cos(omega t) (Heisenberg: d<F_z>/dt = omega <F_y>)
    params = sc.ControlParams(nonlinear_rate=0.0, duration=100e-6, n_steps=10)
    filt = sc.FilterSpec(cutoff=math.inf, substeps_per_step=16)
    w = sc.ControlWaveform(phis=np.zeros(10), params=params)
    drive = sc.render_waveform(w, filt)
    traj = sc.propagate_with_snapshots(
        sc.default_initial_state(sys7), drive, params, sc.NoiseModel.none(), 9)
    assert np.allclose(traj.metrics["exp_fz"],
                       3 * np.sin(params.larmor_rate * traj.times), atol=1e-8)
    assert np.allclose(traj.metrics["exp_fy"],
                       3 * np.cos(params.larmor_rate * traj.times), atol=1e-8)


# ---------------------------------------------------------------------------
# instantaneous ground state


def test_ground_state_zeeman_limit(sys7):
    params = sc.ControlParams(nonlinear_rate=0.0)
    res = sc.instantaneous_ground_state(sys7, params, 0.0, 1.0)
    expected = sc.stretched_state(sys7, (0, 1, 0), -3)
    assert abs(np.vdot(expected.data, res.state.data)) == pytest.approx(1.0, abs=1e-12)
    assert res.gap == pytest.approx(abs(params.larmor_rate), rel=1e-12)


def test_ground_state_pure_twisting(sys7, params):
    res = sc.instantaneous_ground_state(sys7, params, 0.0, 0.0)
    expected = sc.stretched_state(sys7, (1, 0, 0), 0)
    assert abs(np.vdot(expected.data, res.state.data)) == pytest.approx(1.0, abs=1e-12)
    assert res.gap == pytest.approx(params.nonlinear_rate, rel=1e-12)


def test_ground_state_matches_dense_diagonalization(sys7, params):
    import scipy.linalg
    h = sc.hamiltonian_at(sys7, params, 0.0, 0.2)
    evals, evecs = scipy.linalg.eigh(h)
    res = sc.instantaneous_ground_state(sys7, params, 0.0, 0.2)
    assert abs(np.vdot(evecs[:, 0], res.state.data)) ** 2 > 1 - 1e-10
    assert res.gap == pytest.approx(evals[1] - evals[0], rel=1e-12)


def test_ground_state_degenerate_flagged(sys7):
    params = sc.ControlParams(nonlinear_rate=0.0)
    with pytest.raises(sc.DegenerateGroundStateError):
        sc.instantaneous_ground_state(sys7, params, 0.0, 0.0)  # H = 0
