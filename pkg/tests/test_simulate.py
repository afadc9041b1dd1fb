import numpy as np
import pytest

from sparsefactors import (
    Panel,
    SimConfig,
    gen_errors,
    gen_factors,
    gen_loadings,
    pc_fit,
    run_replications,
    simulate_panel,
    standardize,
)
from sparsefactors.simulate import support_size


class TestGenFactors:
    def test_shape_and_determinism(self):
        f1 = gen_factors(50, 3, (1, 0, 0))
        f2 = gen_factors(50, 3, (1, 0, 0))
        assert f1.shape == (50, 3)
        assert np.array_equal(f1, f2)
        assert not np.array_equal(f1, gen_factors(50, 3, (2, 0, 0)))

    def test_ar1_moments(self):
        f = gen_factors(100_000, 1, (42,))
        var = f[:, 0].var()
        assert abs(var - 4.0 / 3.0) < 0.03 * (4.0 / 3.0)
        ac1 = np.corrcoef(f[1:, 0], f[:-1, 0])[0, 1]
        assert abs(ac1 - 0.5) < 0.03 * 0.5

    def test_follower_covariance_matches_closed_form(self):
        f = gen_factors(100_000, 2, (43,))
        # cov(F2, F1) = 0.64 * var(F1) = 0.64 * 4/3
        cov = np.cov(f[:, 1], f[:, 0])[0, 1]
        assert abs(cov - 0.64 * 4.0 / 3.0) < 0.03
        assert abs(f[:, 1].var() - (0.64**2 * 4.0 / 3.0 + 1.0)) < 0.05

    def test_burn_in_validation(self):
        with pytest.raises(ValueError):
            gen_factors(10, 1, (0,), burn_in=10)


class TestGenLoadings:
    def test_exact_support_sizes(self):
        lam, sup = gen_loadings(200, (0.9, 0.7), (7, 1))
        assert [len(s) for s in sup] == [117, 40]
        assert support_size(200, 0.75) == 53
        assert support_size(200, 0.6) == 24
        for k, s in enumerate(sup):
            nz = set(np.nonzero(lam[:, k])[0].tolist())
            assert nz == set(s)

    def test_full_strength_loads_everyone(self):
        lam, sup = gen_loadings(30, (1.0,), (8, 1))
        assert len(sup[0]) == 30
        assert np.all(lam[:, 0] != 0)

    def test_contiguous_ranges_used_verbatim(self):
        lam, sup = gen_loadings(
            200, (0.9, 0.7), (9, 1), support_mode="contiguous",
            ranges=((0, 117), (96, 136)),
        )
        assert sup[0] == frozenset(range(0, 117))
        assert sup[1] == frozenset(range(96, 136))

    def test_contiguous_size_mismatch_rejected(self):
        with pytest.raises(ValueError, match="expected"):
            gen_loadings(200, (0.9,), (10, 1), support_mode="contiguous", ranges=((0, 100),))

    def test_nonzero_entries_are_standard_normal(self):
        vals = []
        for rep in range(300):
            lam, sup = gen_loadings(100, (0.8,), (11, rep))
            vals.extend(lam[list(sup[0]), 0].tolist())
        vals = np.array(vals)
        assert abs(vals.mean()) < 0.03
        assert abs(vals.var() - 1.0) < 0.05


class TestGenErrors:
    def test_block_structure_at_n8(self):
        e, blocks = gen_errors(8, 50, (12, 2))
        assert e.shape == (8, 50)
        assert len(blocks) == 2
        sizes = [b.shape[0] for _, b in blocks]
        assert sizes == [4, 4]
        # floor(8^0.3) = 1 correlated block
        toeplitz_count = sum(1 for _, b in blocks if not np.array_equal(b, np.eye(4)))
        assert toeplitz_count == 1

    def test_remainder_block_is_identity(self):
        _, blocks = gen_errors(10, 20, (13, 2))
        starts = [s for s, _ in blocks]
        assert starts == [0, 4, 8]
        assert blocks[-1][1].shape == (2, 2)
        assert np.array_equal(blocks[-1][1], np.eye(2))

    def test_unit_variance(self):
        e, _ = gen_errors(8, 50_000, (14, 2))
        assert np.max(np.abs(e.var(axis=1) - 1.0)) < 0.05

    def test_identity_block_coordinates_uncorrelated(self):
        e, blocks = gen_errors(16, 50_000, (15, 2))
        identity_rows = [s for s, b in blocks if np.array_equal(b, np.eye(b.shape[0]))]
        i, j = identity_rows[0], identity_rows[1] if len(identity_rows) > 1 else identity_rows[0] + 1
        c = np.corrcoef(e[i], e[j])[0, 1]
        assert abs(c) < 0.02

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            gen_errors(3, 10, (0, 0))


class TestSimulatePanel:
    def test_same_seed_is_bit_identical(self):
        cfg = SimConfig(N=40, T=30, r=2, alpha=(0.9, 0.7), seed=99)
        p1, t1 = simulate_panel(cfg)
        p2, t2 = simulate_panel(cfg)
        assert np.array_equal(p1.values, p2.values)
        assert np.array_equal(t1.F0, t2.F0)
        assert np.array_equal(t1.Lambda0, t2.Lambda0)
        assert t1.supports0 == t2.supports0

    def test_different_seeds_differ(self):
        cfg_a = SimConfig(N=40, T=30, r=2, alpha=(0.9, 0.7), seed=1)
        cfg_b = SimConfig(N=40, T=30, r=2, alpha=(0.9, 0.7), seed=2)
        pa, _ = simulate_panel(cfg_a)
        pb, _ = simulate_panel(cfg_b)
        assert np.linalg.norm(pa.values - pb.values) > 0

    def test_truth_composition(self):
        cfg = SimConfig(N=24, T=40, r=3, alpha=(0.9, 0.75, 0.6), seed=5)
        panel, truth = simulate_panel(cfg)
        assert np.array_equal(truth.C0, truth.Lambda0 @ truth.F0.T)
        for k, s in enumerate(truth.supports0):
            assert len(s) == support_size(24, cfg.alpha[k])
            off = [i for i in range(24) if i not in s]
            assert np.all(truth.Lambda0[off, k] == 0.0)

    def test_standardized_mode_invariants(self):
        cfg = SimConfig(N=32, T=60, r=2, alpha=(0.9, 0.7), seed=6, standardize=True)
        panel, truth = simulate_panel(cfg)
        assert panel.standardized
        assert np.max(np.abs(panel.values.mean(axis=1))) < 1e-10
        assert np.max(np.abs(panel.values.var(axis=1, ddof=1) - 1.0)) < 1e-8
        assert truth.standardized
        # scale/location undo the standardization: the raw panel has the raw truth inside
        raw = panel.values * truth.scale[:, None] + truth.loc[:, None]
        raw_again = (raw - raw.mean(axis=1, keepdims=True)) / raw.std(axis=1, ddof=1, keepdims=True)
        assert np.max(np.abs(raw_again - panel.values)) < 1e-10
        cfg_raw = SimConfig(N=32, T=60, r=2, alpha=(0.9, 0.7), seed=6, standardize=False)
        panel_raw, _ = simulate_panel(cfg_raw)
        assert np.max(np.abs(raw - panel_raw.values)) < 1e-10

    def test_zero_noise_variant_recovers_common_component(self):
        f0 = gen_factors(80, 2, (21, 0))
        # factor 1 loads every unit so no series is constant in the noise-free panel
        lam0, _ = gen_loadings(40, (1.0, 0.7), (21, 1))
        c0 = lam0 @ f0.T
        panel = standardize(Panel(c0, [f"s{i}" for i in range(40)],
                                  [f"t{j}" for j in range(80)]))
        fit = pc_fit(panel, 2)
        c0_std = (c0 - c0.mean(axis=1, keepdims=True)) / c0.std(axis=1, ddof=1, keepdims=True)
        assert np.max(np.abs(fit.common - c0_std)) < 1e-6


class TestRunReplications:
    def test_single_replication_equals_its_record(self):
        cfg = SimConfig(N=40, T=40, r=2, alpha=(0.9, 0.7), seed=3)
        report = run_replications(cfg, 1, rmax=4)
        rec = report.per_rep[0]
        agg = report.aggregates
        assert agg["r_hat"]["wz"]["mean"] == rec.r_hat["wz"]
        assert agg["mean_tr_f"] == pytest.approx(rec.tr_f)
        assert agg["fdr"] == [pytest.approx(v) for v in rec.fdr]

    def test_worker_count_does_not_change_report(self):
        import json

        cfg = SimConfig(N=36, T=36, r=2, alpha=(0.9, 0.7), seed=17)
        r1 = run_replications(cfg, 8, rmax=4, workers=1)
        r2 = run_replications(cfg, 8, rmax=4, workers=2)
        assert json.dumps(r1.to_json(), sort_keys=True) == json.dumps(r2.to_json(), sort_keys=True)

    def test_replication_failures_are_recorded_not_raised(self, monkeypatch):
        import sparsefactors.simulate as sim

        real = sim._replicate_inner

        def flaky(config, rep, tasks, rmax, c_mult, rec):
            if rep == 1:
                raise RuntimeError("boom")
            return real(config, rep, tasks, rmax, c_mult, rec)

        monkeypatch.setattr(sim, "_replicate_inner", flaky)
        cfg = SimConfig(N=36, T=36, r=2, alpha=(0.9, 0.7), seed=4)
        report = run_replications(cfg, 3, rmax=4)
        assert report.aggregates["failed"] == 1
        assert report.per_rep[1].error == "RuntimeError: boom"

    def test_tasks_subset(self):
        cfg = SimConfig(N=40, T=40, r=2, alpha=(0.9, 0.7), seed=8)
        report = run_replications(cfg, 2, tasks={"wz"}, rmax=4)
        assert set(report.per_rep[0].r_hat) == {"wz"}
        assert report.per_rep[0].tr_f is None
        with pytest.raises(ValueError, match="unknown tasks"):
            run_replications(cfg, 1, tasks={"nope"})


class TestSimConfigValidation:
    def test_alpha_must_be_nonincreasing(self):
        with pytest.raises(ValueError, match="nonincreasing"):
            SimConfig(N=40, T=40, r=2, alpha=(0.7, 0.9), seed=0)

    def test_alpha_range(self):
        with pytest.raises(ValueError, match="0.5"):
            SimConfig(N=40, T=40, r=1, alpha=(0.4,), seed=0)

    def test_contiguous_requires_ranges(self):
        with pytest.raises(ValueError, match="contiguous"):
            SimConfig(N=40, T=40, r=1, alpha=(0.9,), seed=0, support_mode="contiguous")

    def test_roundtrip_dict(self):
        cfg = SimConfig(N=40, T=30, r=2, alpha=(0.9, 0.7), seed=12,
                        support_mode="contiguous", contiguous_ranges=((0, 27), (5, 18)))
        assert SimConfig.from_dict(cfg.to_dict()) == cfg


class TestHeavyTails:
    def test_error_kurtosis_matches_t5(self):
        e, blocks = gen_errors(8, 100_000, (777, 0))
        identity_rows = [s for s, b in blocks if np.array_equal(b, np.eye(b.shape[0]))]
        x = e[identity_rows[0]]
        kurt = float(np.mean(x**4) / np.mean(x**2) ** 2)
        assert abs(kurt - 9.0) <= 0.15 * 9.0


class TestContiguousRotationScenario:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_q21_small_relative_to_q22(self):
        # two overlapping contiguous supports, strengths (0.9, 0.7): the
        # estimated-to-true alignment is nearly upper triangular
        from sparsefactors import pc_fit, rotation_q

        q21, q22 = [], []
        for rep in range(40):
            cfg = SimConfig(
                N=200, T=200, r=2, alpha=(0.9, 0.7), seed=161 + rep,
                support_mode="contiguous", contiguous_ranges=((0, 117), (96, 136)),
            )
            panel, truth = simulate_panel(cfg)
            fit = pc_fit(panel, 2)
            q, _ = rotation_q(fit.factors, truth.F0)
            q21.append(abs(q[1, 0]))
            q22.append(abs(q[1, 1]))
        assert np.median(q21) < 0.5 * np.median(q22)
