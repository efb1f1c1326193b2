import math

import numpy as np
import pytest
import scipy.linalg

from conftest import THETAS, random_density, random_model
from spinbath.bath import ModelParams, bath_spectrum, zero_temperature_index
from spinbath.dynamics import (
    QubitChannel,
    Trajectory,
    apply_channel,
    build_channel,
    closed_evolution,
    dephasing_factor,
    evolve,
    frame_rotation,
    lab_qubit_hamiltonian,
    mode_hamiltonian,
    mode_unitary,
    mode_unitary_riccati,
    rotating_frame_spectrum,
)
from spinbath.errors import ContractError, PreconditionError
from spinbath.qubit import (
    SIGMA_X,
    SIGMA_Z,
    density_violations,
    herm2_exp,
    purity,
    trace_distance,
)


class TestModeHamiltonian:
    def test_resonant_shift(self):
        np.testing.assert_array_equal(mode_hamiltonian(0.75, 1.5, 0.3), 0.3 * SIGMA_X)

    def test_dephasing_generator(self):
        np.testing.assert_array_equal(mode_hamiltonian(1.2, 0.4, 0.0), 1.0 * SIGMA_Z)

    def test_eigenvalues(self):
        np.testing.assert_allclose(np.linalg.eigvalsh(mode_hamiltonian(1.0, 0.0, 3.0)),
                                   [-math.sqrt(10), math.sqrt(10)], atol=1e-15)

    def test_stack(self):
        h = mode_hamiltonian(np.array([0.0, 1.0]), 0.0, 2.0)
        assert h.shape == (2, 2, 2)
        np.testing.assert_array_equal(np.trace(h, axis1=1, axis2=2), 0)


class TestModeUnitary:
    def test_dephasing_is_diagonal(self):
        p = ModelParams((1.0, 0.3), (0.2, -0.4), alpha=0.0, beta=0.5)
        s = bath_spectrum(p)
        t = 1.7
        u = mode_unitary(s, t, p)
        for i in range(len(s)):
            np.testing.assert_allclose(
                u[i], np.diag([np.exp(-1j * s.Eplus[i] * t), np.exp(-1j * s.Eminus[i] * t)]),
                atol=1e-14)

    def test_uncoupled_bath_phase_times_qubit(self):
        p = ModelParams((1.0, -0.7), (0.0, 0.0), alpha=0.6, beta=0.2)
        s = bath_spectrum(p)
        t = 2.3
        ubar = herm2_exp(mode_hamiltonian(0.2, 0.0, 0.6), t)
        for i, u in enumerate(mode_unitary(s, t, p)):
            np.testing.assert_allclose(u, np.exp(-1j * s.Omega[i] * t) * ubar, atol=1e-14)

    def test_zero_time(self, rng):
        p = random_model(rng, 3)
        u = mode_unitary(bath_spectrum(p), 0.0, p)
        np.testing.assert_array_equal(u, np.broadcast_to(np.eye(2), u.shape))

    def test_single_index(self, rng):
        p = random_model(rng, 3)
        s = bath_spectrum(p)
        np.testing.assert_array_equal(mode_unitary(s, 0.8, p, index=5),
                                      mode_unitary(s, 0.8, p)[5])

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_matches_riccati_assembly_and_expm(self, rng, n):
        for _ in range(5):
            p = random_model(rng, n)
            s = bath_spectrum(p)
            t = rng.uniform(0, 10)
            u = mode_unitary(s, t, p)
            np.testing.assert_allclose(mode_unitary_riccati(s, t, p), u, atol=1e-12)
            for i in range(len(s)):
                h = mode_hamiltonian(s.E[i], 0.0, p.alpha)
                ref = np.exp(-1j * s.Omega[i] * t) * scipy.linalg.expm(-1j * h * t)
                np.testing.assert_allclose(u[i], ref, atol=1e-12)
            np.testing.assert_allclose(u @ np.swapaxes(u.conj(), 1, 2),
                                       np.broadcast_to(np.eye(2), u.shape), atol=1e-12)


class TestChannel:
    def test_zero_time_identity(self, rng):
        p = random_model(rng, 4)
        ch = build_channel(0.0, p)
        rho = random_density(rng)
        np.testing.assert_allclose(ch.apply(rho), rho, atol=1e-15)

    @pytest.mark.parametrize("theta", THETAS)
    def test_invariants(self, rng, theta):
        for n in range(1, 7):
            p = random_model(rng, n, theta)
            ch = build_channel(rng.uniform(0, 10), p)
            assert abs(ch.weights.sum() - 1) <= 1e-10
            u = ch.unitaries
            np.testing.assert_allclose(u @ np.swapaxes(u.conj(), 1, 2),
                                       np.broadcast_to(np.eye(2), u.shape), atol=1e-12)
            a, b = ch.completeness()
            np.testing.assert_allclose(a, np.eye(2), atol=1e-12)
            np.testing.assert_allclose(b, np.eye(2), atol=1e-12)
            out = ch.apply(random_density(rng))
            v = density_violations(out)
            assert v["trace"] <= 1e-12 and v["hermiticity"] <= 1e-12
            assert v["min_eigenvalue"] >= -1e-10

    def test_frame_rotation(self):
        p = ModelParams((1.0,), (0.1,), alpha=0.2, omega_drive=0.8)
        np.testing.assert_allclose(build_channel(1.5, p).frame_rotation,
                                   np.diag([np.exp(-0.6j), np.exp(0.6j)]), atol=1e-15)

    def test_unital(self, rng):
        p = random_model(rng, 5)
        np.testing.assert_allclose(build_channel(3.1, p).apply(np.eye(2) / 2), np.eye(2) / 2,
                                   atol=1e-15)

    def test_hamming_equals_enumeration(self, rng):
        for theta in THETAS:
            p = ModelParams.uniform_bath(8, 0.9, 0.35, alpha=0.7, beta=-0.4,
                                         omega_drive=1.3, theta=theta)
            rho = random_density(rng)
            for t in (0.3, 2.0, 7.5):
                a = build_channel(t, p, use_hamming=True).apply(rho)
                b = build_channel(t, p, use_hamming=False).apply(rho)
                np.testing.assert_allclose(a, b, atol=1e-12)
                assert len(build_channel(t, p, use_hamming=True)) == 9

    def test_zero_temperature_single_conjugation(self, rng):
        p = random_model(rng, 4, theta=math.inf)
        t = 2.2
        spec = rotating_frame_spectrum(p, mode="enumerate")
        ground = zero_temperature_index(p)
        w = frame_rotation(t, p.omega_drive) @ mode_unitary(spec, t, p, index=ground)
        rho = random_density(rng)
        out = build_channel(t, p).apply(rho)
        np.testing.assert_allclose(out, w @ rho @ w.conj().T, atol=1e-12)
        assert purity(out) == pytest.approx(purity(rho), abs=1e-12)

    def test_purity_non_increasing(self, rng):
        for _ in range(40):
            p = random_model(rng, rng.integers(1, 6), theta=rng.choice([0.0, 0.5, 2.0]))
            rho = random_density(rng)
            out = build_channel(rng.uniform(0, 10), p).apply(rho)
            assert purity(out) <= purity(rho) + 1e-12

    def test_kraus_form_agrees(self, rng):
        p = random_model(rng, 3)
        ch = build_channel(1.1, p)
        rho = random_density(rng)
        k = ch.kraus_operators()
        np.testing.assert_allclose(np.einsum("kij,jl,kml->im", k, rho, k.conj()),
                                   apply_channel(ch, rho), atol=1e-14)


class TestEvolve:
    def test_trajectory_shape_and_scalars(self, rng):
        p = random_model(rng, 3)
        times = np.linspace(0, 5, 11)
        tr = evolve(p, random_density(rng), times)
        assert len(tr) == 11 and tr.states.shape == (11, 2, 2)
        np.testing.assert_allclose(tr.scalars["coherence"], np.abs(tr.states[:, 0, 1]))
        np.testing.assert_allclose(tr.scalars["purity"], purity(tr.states))

    @pytest.mark.parametrize("theta", THETAS)
    def test_matches_kraus_channel_path(self, rng, theta):
        for n in (1, 4):
            p = random_model(rng, n, theta)
            rho = random_density(rng)
            times = np.linspace(0, 10, 15)
            states = evolve(p, rho, times).states
            for t, s in zip(times, states):
                np.testing.assert_allclose(s, apply_channel(build_channel(t, p), rho),
                                           atol=1e-13)

    def test_grid_validation(self, rng):
        p = random_model(rng, 2)
        rho = np.eye(2) / 2
        with pytest.raises(PreconditionError):
            evolve(p, rho, [0.0, 1.0, 1.0])
        with pytest.raises(PreconditionError):
            evolve(p, rho, [0.0, np.nan])
        with pytest.raises(PreconditionError):
            Trajectory([1.0, 0.0], np.zeros((2, 2, 2)))

    def test_single_point_at_zero_echoes_state(self, rng):
        rho = random_density(rng)
        tr = evolve(random_model(rng, 2), rho, [0.0])
        np.testing.assert_allclose(tr.states[0], rho, atol=1e-15)

    def test_dephasing_keeps_populations(self, rng):
        for theta in THETAS:
            p = random_model(rng, 5, theta).replace(alpha=0.0)
            rho = random_density(rng)
            tr = evolve(p, rho, np.linspace(0, 10, 40))
            assert np.max(np.abs(tr.states[:, 0, 0] - rho[0, 0])) <= 1e-12
            assert np.max(np.abs(tr.states[:, 1, 1] - rho[1, 1])) <= 1e-12

    def test_dephasing_independent_of_drive_frequency(self, rng):
        p = random_model(rng, 4).replace(alpha=0.0, omega_drive=0.0)
        rho = random_density(rng)
        times = np.linspace(0, 10, 30)
        a = evolve(p, rho, times).states
        b = evolve(p.replace(omega_drive=5.0), rho, times).states
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_uncoupled_bath_matches_floquet(self, rng):
        for _ in range(10):
            p = random_model(rng, 3).replace(g_n=(0.0, 0.0, 0.0))
            rho = random_density(rng)
            times = np.linspace(0, 10, 25)
            states = evolve(p, rho, times).states
            for t, s in zip(times, states):
                u = closed_evolution(t, p)
                np.testing.assert_allclose(s, u @ rho @ u.conj().T, atol=1e-12)

    def test_small_alpha_continuity(self, rng):
        p = random_model(rng, 4).replace(alpha=0.0)
        rho = random_density(rng)
        times = np.linspace(0, 10, 50)
        a = evolve(p, rho, times).states
        b = evolve(p.replace(alpha=1e-6), rho, times).states
        assert np.max(trace_distance(a, b)) <= 1e-4

    def test_not_a_semigroup(self, rng):
        p = ModelParams((1.0, 0.6, -0.8), (0.3, 0.5, 0.2), alpha=0.7, beta=0.4,
                        omega_drive=0.0, theta=0.0)
        rho = random_density(rng)
        t = 1.3
        once = build_channel(2 * t, p).apply(rho)
        twice = build_channel(t, p).apply(build_channel(t, p).apply(rho))
        assert np.linalg.norm(once - twice) > 1e-6


class TestDephasingFactor:
    def test_zero_time(self, rng):
        assert dephasing_factor(0.0, random_model(rng, 4)) == pytest.approx(1.0, abs=1e-15)

    def test_single_spin_cosine(self):
        g = 0.37
        p = ModelParams((1.3,), (g,), theta=0.0)
        t = np.linspace(0, 20, 101)
        np.testing.assert_allclose(dephasing_factor(t, p), np.cos(2 * g * t), atol=1e-15)

    def test_bounded(self, rng):
        p = random_model(rng, 6, theta=0.7)
        assert np.all(np.abs(dephasing_factor(np.linspace(0, 50, 200), p)) <= 1 + 1e-15)

    def test_matches_coherence_of_trajectory(self, rng):
        p = random_model(rng, 5, theta=1.0).replace(alpha=0.0)
        rho = random_density(rng)
        times = np.linspace(0, 10, 20)
        tr = evolve(p, rho, times)
        # lab-frame coherence: the frame phase cancels exp(i w t) from beta_eff
        np.testing.assert_allclose(tr.states[:, 0, 1], dephasing_factor(times, p) * rho[0, 1],
                                   atol=1e-12)

    def test_recurrence_period(self, rng):
        g = 0.45
        p = ModelParams.uniform_bath(7, 1.1, g, beta=0.3, theta=0.8)
        t = np.linspace(0, 5, 30)
        np.testing.assert_allclose(np.abs(dephasing_factor(t + np.pi / g, p)),
                                   np.abs(dephasing_factor(t, p)), atol=1e-12)

    def test_hamming_path(self):
        p = ModelParams.uniform_bath(9, 1.1, 0.2, beta=0.3, theta=0.8)
        t = np.linspace(0, 5, 7)
        np.testing.assert_allclose(dephasing_factor(t, p, use_hamming=True),
                                   dephasing_factor(t, p, use_hamming=False), atol=1e-12)


class TestClosedEvolution:
    def test_rejects_coupling(self):
        with pytest.raises(ContractError):
            closed_evolution(1.0, ModelParams((1.0,), (0.1,)))

    def test_zero_time(self):
        p = ModelParams((1.0,), (0.0,), alpha=0.3, beta=0.2, omega_drive=1.0)
        np.testing.assert_allclose(closed_evolution(0.0, p), np.eye(2), atol=1e-16)

    def test_static_field(self):
        p = ModelParams((1.0,), (0.0,), alpha=0.3, beta=0.2, omega_drive=0.0)
        h = lab_qubit_hamiltonian(0.0, 0.3, 0.2, 0.0)
        np.testing.assert_allclose(closed_evolution(1.9, p), scipy.linalg.expm(-1j * h * 1.9),
                                   atol=1e-14)

    def test_quarter_period(self):
        b0, w = 0.8, 0.6
        p = ModelParams((1.0,), (0.0,), alpha=b0, beta=0.0, omega_drive=w)
        z = np.array([b0, 0.0, -w / 2])
        r = np.linalg.norm(z)
        t = np.pi / (2 * r)
        sigma_n = (z[0] * SIGMA_X + z[2] * SIGMA_Z) / r
        np.testing.assert_allclose(closed_evolution(t, p),
                                   frame_rotation(t, w) @ (-1j * sigma_n), atol=1e-15)

    def test_schroedinger_equation(self, rng):
        for _ in range(10):
            a, b, w = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 4)
            p = ModelParams((1.0,), (0.0,), alpha=a, beta=b, omega_drive=w)
            t, h = rng.uniform(0, 10), 1e-6
            du = (closed_evolution(t + h, p) - closed_evolution(t - h, p)) / (2 * h)
            resid = 1j * du - lab_qubit_hamiltonian(t, a, b, w) @ closed_evolution(t, p)
            assert np.linalg.norm(resid) <= 1e-6


def test_qubit_channel_is_plain_data():
    ch = QubitChannel(np.array([1.0]), np.eye(2)[None].astype(complex), np.eye(2))
    np.testing.assert_array_equal(ch.apply(np.diag([0.3, 0.7])), np.diag([0.3, 0.7]))
