import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetem import apc, jones
from qnetem.errors import EmulatorError

from oracles import born_joint_probabilities


def rng(seed=0):
    return np.random.default_rng(seed)


angle_st = st.floats(-math.pi, math.pi, allow_nan=False)


class TestCorrectionUnitary:
    def test_zero_angles_identity(self):
        u = apc.correction_unitary([0, 0, 0, 0])
        assert jones.distance_up_to_phase(u, jones.IDENTITY) < 1e-12

    def test_single_stage_matches_retarder(self):
        u = apc.correction_unitary([0.7, 0, 0, 0])
        assert np.allclose(u, jones.retarder_z(0.7))
        u = apc.correction_unitary([0, 0.7, 0, 0])
        assert np.allclose(u, jones.retarder_x(0.7))

    def test_stage_order(self):
        want = (
            jones.retarder_x(0.4)
            @ jones.retarder_z(0.3)
            @ jones.retarder_x(0.2)
            @ jones.retarder_z(0.1)
        )
        assert np.allclose(apc.correction_unitary([0.1, 0.2, 0.3, 0.4]), want)

    @settings(max_examples=100, deadline=None)
    @given(a0=angle_st, a1=angle_st, a2=angle_st, a3=angle_st)
    def test_always_unitary(self, a0, a1, a2, a3):
        assert jones.is_unitary(apc.correction_unitary([a0, a1, a2, a3]))

    def test_rejects_wrong_arity(self):
        with pytest.raises(ValueError):
            apc.correction_unitary([0.1, 0.2, 0.3])


class TestEulerZXZ:
    def test_reconstruction_oracle(self):
        g = rng(1)
        for _ in range(100):
            u = jones.haar_unitary(g)
            alpha, beta, gamma = apc.euler_zxz(u)
            rebuilt = jones.retarder_z(alpha) @ jones.retarder_x(beta) @ jones.retarder_z(gamma)
            assert jones.distance_up_to_phase(rebuilt, u) < 1e-6

    def test_diagonal_case(self):
        alpha, beta, gamma = apc.euler_zxz(jones.retarder_z(0.9))
        rebuilt = jones.retarder_z(alpha) @ jones.retarder_x(beta) @ jones.retarder_z(gamma)
        assert jones.distance_up_to_phase(rebuilt, jones.retarder_z(0.9)) < 1e-6

    def test_antidiagonal_case(self):
        u = np.array([[0, 1j], [1j, 0]], dtype=complex)  # Rx(pi) up to phase
        alpha, beta, gamma = apc.euler_zxz(u)
        rebuilt = jones.retarder_z(alpha) @ jones.retarder_x(beta) @ jones.retarder_z(gamma)
        assert jones.distance_up_to_phase(rebuilt, u) < 1e-6


class TestInverseAngles:
    def test_cancels_rotation(self):
        g = rng(2)
        for _ in range(50):
            r = jones.haar_unitary(g)
            angles = apc.inverse_angles(r)
            residual = apc.correction_unitary(angles) @ r
            assert jones.distance_up_to_phase(residual, jones.IDENTITY) < 1e-6
            assert apc.born_error(r, angles) < 1e-9


class TestBornError:
    def test_aligned_channel_is_errorless(self):
        assert apc.born_error(jones.IDENTITY, np.zeros(4)) < 1e-12

    def test_real_rotation_rect_basis(self):
        theta = 0.1
        err = apc.born_error(jones.rotation(theta), np.zeros(4), bases=(apc.BASIS_RECT,))
        assert abs(err - math.sin(theta) ** 2) < 1e-12

    def test_matches_projector_oracle(self):
        g = rng(3)
        for _ in range(25):
            r = jones.haar_unitary(g)
            angles = g.uniform(-math.pi, math.pi, 4)
            residual = apc.correction_unitary(angles) @ r
            state = jones.apply_arm(apc._PSI_PLUS, residual, "a")
            total = 0.0
            for theta_a, theta_b in apc.BASES_BOTH:
                p = born_joint_probabilities(state, theta_a, theta_b)
                total += p[(0, 0)] + p[(1, 1)]
            assert abs(apc.born_error(r, angles) - total / 2) < 1e-12


class TestErrorSignal:
    def test_counts_equal_outcomes(self):
        bits_a = np.array([0, 1, 0, 1] * 10)
        bits_b = np.array([1, 0, 0, 1] * 10)
        assert apc.error_signal(bits_a, bits_b) == 0.5

    def test_starved_below_threshold(self):
        with pytest.raises(EmulatorError) as e:
            apc.error_signal(np.zeros(19, int), np.ones(19, int))
        assert e.value.code == "E_STARVED"
        assert apc.error_signal(np.zeros(20, int), np.ones(20, int)) == 0.0


class TestSampledProbe:
    def test_mean_matches_born(self):
        g = rng(4)
        r = jones.rotation(0.3)
        probe = apc.sampled_probe(r, 1000, g)
        draws = np.array([probe(np.zeros(4)) for _ in range(300)])
        exact = apc.born_error(r, np.zeros(4))
        sd = math.sqrt(exact * (1 - exact) / 1000) / math.sqrt(300)
        assert abs(draws.mean() - exact) < 5 * sd

    def test_starved_probe_rejected(self):
        with pytest.raises(EmulatorError) as e:
            apc.sampled_probe(jones.IDENTITY, 19, rng(5))
        assert e.value.code == "E_STARVED"


class TestStabilize:
    def test_warm_start_returns_immediately(self):
        r = jones.haar_unitary(rng(6))
        res = apc.stabilize(apc.noiseless_probe(r), initial_angles=apc.inverse_angles(r))
        assert res.converged and res.evaluations == 1

    def test_noiseless_convergence(self):
        g = rng(7)
        ok = 0
        for _ in range(25):
            r = jones.haar_unitary(g)
            res = apc.stabilize(apc.noiseless_probe(r), target=0.02, max_evals=500)
            if res.converged:
                assert res.error <= 0.02
                assert apc.born_error(r, res.angles) <= 0.02
                ok += 1
        assert ok >= 24

    def test_shot_noise_convergence(self):
        g = rng(8)
        ok = 0
        for _ in range(20):
            r = jones.haar_unitary(g)
            probe = apc.sampled_probe(r, 2000, g)
            res = apc.stabilize(probe, target=0.02, max_evals=500)
            if apc.born_error(r, res.angles) <= 0.05:
                ok += 1
        assert ok >= 18

    def test_respects_eval_budget(self):
        r = jones.haar_unitary(rng(9))
        res = apc.stabilize(apc.noiseless_probe(r), target=0.0, max_evals=40)
        assert res.evaluations <= 40


class TestDrift:
    def test_zero_rate_is_identity(self):
        r = jones.rotation(0.2)
        assert np.allclose(apc.apply_drift(r, 0.0, 1.0, rng(0)), r)

    def test_stays_unitary(self):
        g = rng(10)
        u = jones.IDENTITY
        for _ in range(100):
            u = apc.apply_drift(u, 0.05, 1.0, g)
            assert jones.is_unitary(u)

    def test_diffusive_growth(self):
        # distance from identity after 100 steps dwarfs a single step
        singles, walks = [], []
        for seed in range(30):
            g = rng(100 + seed)
            u1 = apc.apply_drift(jones.IDENTITY, 0.02, 1.0, g)
            singles.append(jones.distance_up_to_phase(u1, jones.IDENTITY))
            u = jones.IDENTITY
            for _ in range(100):
                u = apc.apply_drift(u, 0.02, 1.0, g)
            walks.append(jones.distance_up_to_phase(u, jones.IDENTITY))
        assert np.mean(walks) > 3 * np.mean(singles)

    def test_deterministic_for_seed(self):
        a = apc.apply_drift(jones.IDENTITY, 0.1, 2.0, rng(11))
        b = apc.apply_drift(jones.IDENTITY, 0.1, 2.0, rng(11))
        assert np.array_equal(a, b)


class TestClosedLoop:
    def test_tracking_under_drift(self):
        g = rng(12)
        rotation = jones.haar_unitary(g)
        res = apc.stabilize(apc.noiseless_probe(rotation), target=0.005, max_evals=1000)
        angles = res.angles
        held = 0
        steps = 50
        for _ in range(steps):
            rotation = apc.apply_drift(rotation, 0.02, 1.0, g)
            res = apc.stabilize(
                apc.noiseless_probe(rotation),
                initial_angles=angles,
                target=0.005,
                max_evals=200,
            )
            angles = res.angles
            if apc.born_error(rotation, angles) <= 0.02:
                held += 1
        assert held >= int(0.9 * steps)
