import numpy as np
import pytest

from sparsefactors import (
    fdr_power,
    pooled_fdr_power,
    rmse_c,
    rotation_q,
    trace_stat_f,
    trace_stat_lambda,
)
from sparsefactors.metrics import ReplicationRecord, aggregate


class TestTraceStats:
    def test_same_matrix_gives_one(self):
        f0 = np.random.default_rng(0).normal(size=(40, 3))
        assert trace_stat_f(f0, f0) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_spans_give_zero(self):
        f0 = np.zeros((10, 2))
        f0[:5, 0] = 1.0
        f0[:5, 1] = np.arange(5) - 2.0
        fh = np.zeros((10, 2))
        fh[5:, 0] = 1.0
        fh[5:, 1] = np.arange(5.0)
        assert trace_stat_f(f0, fh) == pytest.approx(0.0, abs=1e-10)

    def test_invariant_to_invertible_mixing(self):
        rng = np.random.default_rng(1)
        f0 = rng.normal(size=(30, 3))
        m = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        assert trace_stat_f(f0, f0 @ m) == pytest.approx(1.0, abs=1e-10)

    def test_lambda_variant_matches_f_variant(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(25, 2))
        b = rng.normal(size=(25, 2))
        assert trace_stat_lambda(a, b) == pytest.approx(trace_stat_f(a, b), abs=1e-14)

    def test_value_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.normal(size=(15, 2))
            b = rng.normal(size=(15, 2))
            v = trace_stat_f(a, b)
            assert -1e-10 <= v <= 1.0 + 1e-10

    def test_singular_estimate_rejected(self):
        f0 = np.random.default_rng(4).normal(size=(10, 2))
        with pytest.raises(ValueError):
            trace_stat_f(f0, np.zeros((10, 2)))


class TestRmseC:
    def test_identical(self):
        c = np.random.default_rng(5).normal(size=(6, 7))
        assert rmse_c(c, c) == 0.0

    def test_unit_shift(self):
        c = np.random.default_rng(6).normal(size=(5, 5))
        assert rmse_c(c, c + 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_epsilon_sign_matrix(self):
        rng = np.random.default_rng(7)
        c = rng.normal(size=(8, 9))
        signs = rng.choice([-1.0, 1.0], size=(8, 9))
        eps = 0.037
        assert rmse_c(c, c + eps * signs) == pytest.approx(eps, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            rmse_c(np.zeros((2, 2)), np.zeros((2, 3)))


class TestFdrPower:
    def test_perfect_recovery(self):
        assert fdr_power({1, 2, 3}, {1, 2, 3}) == (0.0, 1.0)

    def test_empty_estimate(self):
        assert fdr_power({1, 2}, set()) == (0.0, 0.0)

    def test_empty_truth(self):
        fdp, power = fdr_power(set(), {4, 5})
        assert fdp == 1.0 and power == 0.0

    def test_hand_case(self):
        fdp, power = fdr_power({1, 2, 3, 4}, {3, 4, 5, 6})
        assert fdp == pytest.approx(0.5)
        assert power == pytest.approx(0.5)

    def test_pooled_reduces_to_single_factor(self):
        s, sh = {1, 2, 3}, {2, 3, 9}
        assert pooled_fdr_power([s], [sh], 10) == fdr_power(s, sh)

    def test_pooled_counts_cells(self):
        fdp, power = pooled_fdr_power([{1}, {1, 2}], [{1}, {3}], 5)
        # truth cells: (0,1),(1,1),(1,2); estimate cells: (0,1),(1,3)
        assert fdp == pytest.approx(0.5)
        assert power == pytest.approx(1.0 / 3.0)


class TestRotationQ:
    def test_identity_alignment(self):
        rng = np.random.default_rng(8)
        t = 64
        q_mat, _ = np.linalg.qr(rng.normal(size=(t, 2)))
        f0 = np.sqrt(t) * q_mat  # F0'F0/T = I by construction
        q, summary = rotation_q(f0, f0)
        assert np.max(np.abs(q - np.eye(2))) < 1e-10
        assert summary["min_singular_value"] == pytest.approx(1.0, abs=1e-10)
        assert summary["lower_abs"] == {(2, 1): pytest.approx(0.0, abs=1e-12)}

    def test_alpha_passthrough(self):
        f = np.random.default_rng(9).normal(size=(20, 2))
        _, summary = rotation_q(f, f, alpha=(0.9, 0.6))
        assert summary["alpha"] == [0.9, 0.6]


class TestAggregate:
    def test_exact_fold(self):
        recs = [
            ReplicationRecord(rep=0, r_hat={"wz": 3}, tr_f=0.9, fdr=(0.1,), power=(0.8,),
                              alpha_hat=(0.85,), sym_diff=(0.2,)),
            ReplicationRecord(rep=1, r_hat={"wz": 2}, tr_f=0.7, fdr=(0.3,), power=(0.6,),
                              alpha_hat=(0.75,), sym_diff=(0.4,)),
        ]
        agg = aggregate(recs, true_r=3, alpha=(0.8,))
        assert agg["r_hat"]["wz"]["bias"] == pytest.approx(-0.5)
        assert agg["r_hat"]["wz"]["rmse"] == pytest.approx(np.sqrt(0.5))
        assert agg["mean_tr_f"] == pytest.approx(0.8)
        assert agg["fdr"] == [pytest.approx(0.2)]
        assert agg["power"] == [pytest.approx(0.7)]
        assert agg["alpha_hat"][0]["bias"] == pytest.approx(0.0, abs=1e-12)
        assert agg["median_sym_diff"] == [pytest.approx(0.3)]

    def test_failed_reps_are_counted_not_fatal(self):
        recs = [
            ReplicationRecord(rep=0, r_hat={"wz": 3}),
            ReplicationRecord(rep=1, error="RuntimeError: boom"),
        ]
        agg = aggregate(recs, true_r=3, alpha=(0.9, 0.7, 0.6))
        assert agg["failed"] == 1
        assert agg["r_hat"]["wz"]["mean"] == 3.0
