import json
import math

import numpy as np
import pytest

from qnetem import optics, qkd
from qnetem.errors import EmulatorError

from oracles import binary_entropy, binomial_bounds, born_joint_probabilities


def rng(seed=0):
    return np.random.default_rng(seed)


def delivered_stream(n_pairs=60_000, seed=1, extra_b_ps=0, loss_a_db=0.0):
    """Entangled pair stream as an instantiation would deliver it."""
    g = rng(seed)
    src = optics.BiphotonSource("s", pair_rate_hz=float(n_pairs))
    raw = optics.generate_pairs(src, 1.0, g)
    stream = optics.prepare(raw, optics.ENTANGLED, g)
    if loss_a_db:
        path = optics.make_link(loss_a_db, 0.0)
        stream = optics.propagate(stream, path, "a", g, ps_per_m=0)
    if extra_b_ps:
        stream.time_b_ps = stream.time_b_ps + extra_b_ps
    return stream, g


def perfect_detector():
    return optics.DetectorModel(
        efficiency=1.0, dark_rate_hz=0.0, jitter_ps=30, dead_ps=0, channel_count=4
    )


class TestRateFormula:
    def test_reference_point(self):
        # floor(1e4 * (1 - 2*h2(0.05))) evaluated against the independent oracle
        want = math.floor(1e4 * (1 - 2 * binary_entropy(0.05)))
        assert want == 4272
        assert qkd.final_length(10_000, 0.05) == want

    def test_zero_error_keeps_everything(self):
        assert qkd.final_length(777, 0.0) == 777

    def test_monotone_decreasing(self):
        fracs = [qkd.final_length(10_000, q) for q in np.linspace(0.0, 0.10, 11)]
        assert all(a > b for a, b in zip(fracs, fracs[1:]))

    def test_negative_rate_clamps_to_zero(self):
        assert qkd.final_length(10_000, 0.25) == 0


class TestSift:
    def test_all_kept_when_bases_agree(self):
        out = qkd.sift([0, 1, 0], [0, 1, 0], [1, 0, 1], [0, 1, 0])
        assert len(out) == 3
        assert out.key_a.tolist() == [1, 0, 1]
        assert out.key_b.tolist() == [1, 0, 1]  # flipped from anti-correlated bits

    def test_nothing_kept_when_complementary(self):
        out = qkd.sift([0, 1], [1, 0], [0, 0], [0, 0])
        assert len(out) == 0

    def test_kept_fraction_binomial(self):
        g = rng(2)
        n = 10_000
        ba, bb = g.integers(0, 2, n), g.integers(0, 2, n)
        out = qkd.sift(ba, bb, np.zeros(n, int), np.zeros(n, int))
        lo, hi = binomial_bounds(n, 0.5)
        assert lo <= len(out) <= hi


class TestEstimateQber:
    def test_identical_strings(self):
        g = rng(3)
        key = g.integers(0, 2, 1000)
        est = qkd.estimate_qber(key, key.copy(), 0.3, g)
        assert est.qber == 0.0
        assert est.key_a.shape[0] == 1000 - est.disclosed.shape[0]

    def test_random_pairs_near_half(self):
        g = rng(4)
        a, b = g.integers(0, 2, 20_000), g.integers(0, 2, 20_000)
        est = qkd.estimate_qber(a, b, 0.5, g)
        k = est.disclosed.shape[0]
        assert abs(est.qber - 0.5) <= 4 * math.sqrt(0.25 / k)

    def test_disclosed_removed(self):
        g = rng(5)
        key = np.arange(100) % 2
        est = qkd.estimate_qber(key, key.copy(), 0.1, g)
        assert est.key_a.shape[0] == est.key_b.shape[0] == 100 - len(est.disclosed)
        assert len(np.intersect1d(est.disclosed, est.disclosed)) == len(est.disclosed)

    def test_empty_rejected(self):
        with pytest.raises(EmulatorError) as e:
            qkd.estimate_qber([], [], 0.5, rng(6))
        assert e.value.code == "E_EMPTY"


class TestReconcile:
    @pytest.mark.parametrize("q", [0.01, 0.05, 0.10])
    def test_corrects_injected_errors(self, q):
        g = rng(7)
        n = 4000
        key_a = g.integers(0, 2, n).astype(np.uint8)
        flips = g.random(n) < q
        key_b = key_a ^ flips
        fixed, disclosed = qkd.reconcile(key_a, key_b, q, g)
        assert np.array_equal(fixed, key_a)
        assert disclosed > 0

    def test_identical_input_discloses_little(self):
        g = rng(8)
        key = g.integers(0, 2, 1000).astype(np.uint8)
        fixed, disclosed = qkd.reconcile(key, key.copy(), 0.0, g)
        assert np.array_equal(fixed, key)
        assert disclosed <= 1  # single whole-block parity check


class TestToeplitzHash:
    def test_matches_explicit_matrix(self):
        g = rng(9)
        n, m = 40, 17
        key = g.integers(0, 2, n)
        d = g.integers(0, 2, m + n - 1)
        T = np.zeros((m, n), dtype=int)
        for i in range(m):
            for j in range(n):
                T[i, j] = d[n - 1 + i - j]
        want = (T @ key) % 2
        got = qkd.toeplitz_hash(key, m, d)
        assert np.array_equal(got, want)

    def test_linear_over_xor(self):
        g = rng(10)
        n, m = 200, 80
        a, b = g.integers(0, 2, n), g.integers(0, 2, n)
        d = g.integers(0, 2, m + n - 1)
        lhs = qkd.toeplitz_hash(a ^ b, m, d)
        rhs = qkd.toeplitz_hash(a, m, d) ^ qkd.toeplitz_hash(b, m, d)
        assert np.array_equal(lhs, rhs)


class TestDistill:
    def test_error_free_keys_pass_through_full_length(self):
        g = rng(11)
        key = g.integers(0, 2, 3000).astype(np.uint8)
        out = qkd.distill(key, key.copy(), 0.0, g)
        assert out.length == 3000
        assert np.array_equal(out.key_a, out.key_b)

    def test_length_formula_at_five_percent(self):
        g = rng(12)
        n = 10_000
        key_a = g.integers(0, 2, n).astype(np.uint8)
        key_b = key_a ^ (g.random(n) < 0.05)
        out = qkd.distill(key_a, key_b, 0.05, g)
        assert out.length == 4272
        assert np.array_equal(out.key_a, out.key_b)

    def test_abort_at_threshold(self):
        g = rng(13)
        key = g.integers(0, 2, 100)
        for q in (0.11, 0.12, 0.3):
            with pytest.raises(EmulatorError) as e:
                qkd.distill(key, key.copy(), q, g)
            assert e.value.code == "E_ABORT_QBER"

    def test_monobit_balance(self):
        g = rng(14)
        key = g.integers(0, 2, 8000).astype(np.uint8)
        out = qkd.distill(key, key.copy(), 0.02, g)
        m = out.length
        assert abs(out.key_a.mean() - 0.5) <= 4 * math.sqrt(0.25 / m)

    def test_deterministic_for_seed(self):
        key = rng(15).integers(0, 2, 500).astype(np.uint8)
        out1 = qkd.distill(key, key.copy(), 0.01, rng(42))
        out2 = qkd.distill(key, key.copy(), 0.01, rng(42))
        assert np.array_equal(out1.key_a, out2.key_a)


class TestRelay:
    def test_single_hub_publishes_xor(self):
        g = rng(16)
        k1, k2 = g.integers(0, 2, 64, dtype=np.uint8), g.integers(0, 2, 64, dtype=np.uint8)
        derived, messages = qkd.relay_key(k1, [], k2)
        assert len(messages) == 1
        assert np.array_equal(messages[0], k1 ^ k2)
        assert np.array_equal(derived, k1)

    def test_three_hop_chain_bit_exact(self):
        g = rng(17)
        keys = [g.integers(0, 2, 128, dtype=np.uint8) for _ in range(4)]
        derived, messages = qkd.relay_key(keys[0], keys[1:3], keys[3])
        assert np.array_equal(derived, keys[0])
        # XOR-chain oracle: folding every message into the far key telescopes
        acc = keys[3].copy()
        for m in messages:
            acc ^= m
        assert np.array_equal(acc, keys[0])

    def test_no_single_message_reveals_key(self):
        g = rng(18)
        keys = [g.integers(0, 2, 256, dtype=np.uint8) for _ in range(4)]
        _, messages = qkd.relay_key(keys[0], keys[1:3], keys[3])
        for m in messages:
            assert not np.array_equal(m, keys[0])

    def test_length_mismatch(self):
        with pytest.raises(EmulatorError) as e:
            qkd.relay_key(np.zeros(8, np.uint8), [np.zeros(7, np.uint8)], np.zeros(8, np.uint8))
        assert e.value.code == "E_LENGTH"


class TestRunBbm92:
    def test_noiseless_anticorrelated(self):
        stream, g = delivered_stream(seed=20)
        session = qkd.run_bbm92(stream, perfect_detector(), perfect_detector(), 1.0, 4000, g)
        sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
        assert len(sifted) > 1500
        assert np.array_equal(sifted.key_a, sifted.key_b)  # zero errors

    def test_blocked_arm_times_out(self):
        stream, g = delivered_stream(n_pairs=20_000, seed=21, loss_a_db=200.0)
        with pytest.raises(EmulatorError) as e:
            qkd.run_bbm92(stream, perfect_detector(), perfect_detector(), 1.0, 100, g)
        assert e.value.code == "E_TIMEOUT"

    def test_self_calibrates_path_delay(self):
        stream, g = delivered_stream(seed=22, extra_b_ps=3_000_000)
        session = qkd.run_bbm92(stream, perfect_detector(), perfect_detector(), 1.0, 2000, g)
        assert abs(session.offset_ps - 3_000_000) < 500
        sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
        assert np.array_equal(sifted.key_a, sifted.key_b)

    def test_misaligned_basis_qber_matches_born(self):
        theta = math.radians(10)
        stream, g = delivered_stream(n_pairs=80_000, seed=23)
        session = qkd.run_bbm92(
            stream,
            perfect_detector(),
            perfect_detector(),
            1.0,
            8000,
            g,
            analyzers_b=(theta, -math.pi / 4),
        )
        sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
        est = qkd.estimate_qber(sifted.key_a, sifted.key_b, 0.5, g)
        state = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
        p = born_joint_probabilities(state, 0.0, theta)
        rect_err = p[(0, 0)] + p[(1, 1)]
        q_born = rect_err / 2  # diagonal basis stays aligned
        assert abs(q_born - math.sin(theta) ** 2 / 2) < 1e-12
        k = est.disclosed.shape[0]
        sd = math.sqrt(q_born * (1 - q_born) / k)
        assert abs(est.qber - q_born) <= 4 * sd

    def test_same_seed_same_transcript(self):
        docs = []
        for _ in range(2):
            stream, g = delivered_stream(n_pairs=30_000, seed=24)
            session = qkd.run_bbm92(stream, perfect_detector(), perfect_detector(), 1.0, 1000, g)
            sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
            est = qkd.estimate_qber(sifted.key_a, sifted.key_b, 0.25, g)
            out = qkd.distill(est.key_a, est.key_b, est.qber, g)
            docs.append(qkd.transcript_json(qkd.transcript(session, sifted, est, out)))
        assert docs[0] == docs[1]


class TestTranscript:
    def test_fields_and_no_key_material(self):
        stream, g = delivered_stream(n_pairs=30_000, seed=25)
        session = qkd.run_bbm92(stream, perfect_detector(), perfect_detector(), 1.0, 1000, g)
        sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
        est = qkd.estimate_qber(sifted.key_a, sifted.key_b, 0.25, g)
        out = qkd.distill(est.key_a, est.key_b, est.qber, g)
        doc = json.loads(qkd.transcript_json(qkd.transcript(session, sifted, est, out)))
        assert doc["format"] == "qkd-transcript.v1"
        assert len(doc["bases_a"]) == 1000
        assert doc["n_sifted"] == len(sifted)
        assert doc["final_length"] == out.length
        assert doc["key_digest"] == qkd.key_digest(out.key_a)
        key_str = "".join(str(int(b)) for b in out.key_a)
        assert key_str not in json.dumps(doc)

    def test_end_to_end_rate_drops_with_misalignment(self):
        lengths = {}
        for theta_deg in (0, 12):
            stream, g = delivered_stream(n_pairs=60_000, seed=26)
            session = qkd.run_bbm92(
                stream,
                perfect_detector(),
                perfect_detector(),
                1.0,
                5000,
                g,
                analyzers_b=(math.radians(theta_deg), -math.pi / 4),
            )
            sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
            est = qkd.estimate_qber(sifted.key_a, sifted.key_b, 0.3, g)
            out = qkd.distill(est.key_a, est.key_b, est.qber, g)
            lengths[theta_deg] = out.length / est.key_a.shape[0]
        assert lengths[12] < lengths[0]
