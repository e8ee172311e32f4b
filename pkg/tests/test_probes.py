import numpy as np
import pytest

from bnconvex import (CompactSvd, TrainConfig, TruncationSpec, center,
                      compact_svd, direction_trend, gradient_identity_probe,
                      init_network, make_rng, singular_direction_similarity,
                      train_gd, truncate_data, write_similarity_csv)
from bnconvex.errors import DimensionError


class TestTruncationSpec:
    def test_exactly_one_selector(self):
        with pytest.raises(DimensionError):
            TruncationSpec()
        with pytest.raises(DimensionError):
            TruncationSpec(k=2, variance_target=0.9)
        with pytest.raises(DimensionError):
            TruncationSpec(k=0)
        with pytest.raises(DimensionError):
            TruncationSpec(variance_target=1.5)

    def test_variance_rule_example(self):
        # sigma = (3, 1): 9/10 < 0.95 so k = 2
        assert TruncationSpec(variance_target=0.95).resolve_k(
            np.array([3.0, 1.0])) == 2
        assert TruncationSpec(variance_target=0.9).resolve_k(
            np.array([3.0, 1.0])) == 1

    def test_variance_rule_matches_brute_force(self):
        rng = make_rng(0)
        for _ in range(20):
            sigma = np.sort(rng.uniform(0.1, 5.0, int(rng.integers(2, 8))))[::-1]
            target = float(rng.uniform(0.05, 1.0))
            total = np.sum(sigma ** 2)
            brute = next(k for k in range(1, len(sigma) + 1)
                         if np.sum(sigma[:k] ** 2) / total >= target - 1e-15)
            assert TruncationSpec(variance_target=target).resolve_k(sigma) == brute


class TestTruncateData:
    def test_full_rank_round_trip(self):
        rng = make_rng(1)
        x = rng.standard_normal((7, 4)) + 2.0
        svd = compact_svd(center(x))
        out = truncate_data(x, TruncationSpec(k=svd.rank))
        np.testing.assert_allclose(out, x, atol=1e-10)

    def test_tail_energy_identity(self):
        rng = make_rng(2)
        for _ in range(5):
            x = rng.standard_normal((8, 5)) * rng.uniform(0.5, 3.0)
            svd = compact_svd(center(x))
            for k in range(1, svd.rank):
                g = truncate_data(x, TruncationSpec(k=k))
                resid = np.linalg.norm(center(x) - center(g))
                expected = np.sqrt(np.sum(svd.sigma[k:] ** 2))
                assert resid == pytest.approx(expected, rel=1e-9)

    def test_constructed_spectrum(self):
        # centered data with sigma = (3, 1): k=1 leaves residual 1
        rng = make_rng(3)
        raw = rng.standard_normal((6, 2))
        q1 = np.linalg.qr(raw - raw.mean(axis=0))[0]  # orthonormal, mean-free
        x = 3.0 * np.outer(q1[:, 0], [1, 0]) + 1.0 * np.outer(q1[:, 1], [0, 1])
        g = truncate_data(x, TruncationSpec(k=1))
        assert np.linalg.norm(center(x) - center(g)) == pytest.approx(1.0, rel=1e-9)

    def test_rank_of_result(self):
        rng = make_rng(4)
        x = rng.standard_normal((9, 6))
        g = truncate_data(x, TruncationSpec(k=2))
        assert compact_svd(center(g)).rank == 2

    def test_means_preserved(self):
        rng = make_rng(5)
        x = rng.standard_normal((7, 3)) + 10.0
        g = truncate_data(x, TruncationSpec(k=1))
        np.testing.assert_allclose(g.mean(axis=0), x.mean(axis=0), atol=1e-12)

    def test_k_above_rank_rejected(self):
        rng = make_rng(6)
        x = rng.standard_normal((5, 3))
        with pytest.raises(DimensionError):
            truncate_data(x, TruncationSpec(k=4))


class TestGradientIdentityProbe:
    def test_prewhitened_data(self):
        # data whose centered part has all singular values 1: the two hidden
        # updates coincide outright
        rng = make_rng(7)
        q = np.linalg.qr(rng.standard_normal((9, 3)))[0]
        q = q - q.mean(axis=0)
        x = q @ np.linalg.qr(rng.standard_normal((3, 3)))[0].T
        svd = compact_svd(center(x))
        x = x / svd.sigma[0]  # normalize scale; spectrum nearly flat already
        net = init_network("fc_pre_bn", 3, 4, 1, rng)
        rep = gradient_identity_probe(x, rng.standard_normal((9, 1)), net)
        assert rep.max_rel_error <= 1e-10

    def test_random_instances(self):
        rng = make_rng(8)
        for _ in range(10):
            n = int(rng.integers(5, 21))
            d = int(rng.integers(2, 11))
            m = int(rng.integers(1, 9))
            x = rng.standard_normal((n, d))
            y = rng.standard_normal((n, 1))
            net = init_network("fc_pre_bn", d, m, 1, rng)
            rep = gradient_identity_probe(x, y, net)
            assert rep.max_rel_error <= 1e-10
            assert rep.gamma_exact and rep.alpha_exact and rep.w2_exact
            assert rep.forward_gap <= 1e-12

    def test_degenerate_unit_skipped(self):
        rng = make_rng(9)
        x = rng.standard_normal((6, 3))
        net = init_network("fc_pre_bn", 3, 3, 1, rng)
        net.hidden.w[:, 1] = 0.0
        net.hidden.gamma[1] = 0.0  # keep the forward well-defined
        rep = gradient_identity_probe(x, rng.standard_normal((6, 1)), net)
        assert rep.skipped_units == [1]
        assert np.isnan(rep.per_unit_rel_error[1])
        assert rep.max_rel_error <= 1e-10

    def test_wrong_arch_rejected(self):
        rng = make_rng(10)
        net = init_network("fc_post_bn", 3, 2, 1, rng)
        with pytest.raises(DimensionError):
            gradient_identity_probe(rng.standard_normal((5, 3)),
                                    rng.standard_normal((5, 1)), net)


class TestDirectionSimilarity:
    def setup_method(self):
        rng = make_rng(11)
        self.x = rng.standard_normal((8, 4))
        self.svd = compact_svd(center(self.x))
        self.w = rng.standard_normal((4, 5))

    def test_self_similarity(self):
        rep = singular_direction_similarity(self.w, self.w, self.svd)
        np.testing.assert_allclose(rep.cosines, 1.0, atol=1e-12)
        assert np.all(rep.defined)

    def test_antipodal(self):
        rep = singular_direction_similarity(-self.w, self.w, self.svd)
        np.testing.assert_allclose(rep.cosines, -1.0, atol=1e-12)

    def test_perturbation_locality(self):
        # perturbing only along v_1 leaves the other directions' cosines at 1
        delta = np.outer(self.svd.v[:, 0], make_rng(12).standard_normal(5))
        rep = singular_direction_similarity(self.w + 0.5 * delta, self.w, self.svd)
        np.testing.assert_allclose(rep.cosines[1:], 1.0, atol=1e-12)
        assert rep.cosines[0] < 1.0 - 1e-9

    def test_zero_projection_flagged(self):
        w0 = np.zeros_like(self.w)
        rep = singular_direction_similarity(w0, self.w, self.svd)
        assert not np.any(rep.defined)
        assert not np.any(np.isnan(rep.cosines))

    def test_csv_emission(self, tmp_path):
        rep = singular_direction_similarity(self.w, self.w, self.svd)
        path = tmp_path / "sim.csv"
        write_similarity_csv(rep, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "direction,sigma,cosine"
        assert len(lines) == 1 + self.svd.rank


class TestDriftTrend:
    def test_trend_reported_after_training(self):
        # directional statement only: reported as a statistic, not asserted
        rng = make_rng(13)
        n, d, m = 20, 6, 10
        x = rng.standard_normal((n, d)) * np.linspace(3.0, 0.3, d)
        y = rng.standard_normal((n, 1))
        net = init_network("fc_pre_bn", d, m, 1, rng)
        log = train_gd(net, x, y, TrainConfig(beta=1e-3, lr=1e-2, epochs=150, seed=0))
        svd = compact_svd(center(x))
        rep = singular_direction_similarity(log.network.hidden.w, net.hidden.w, svd)
        trend = direction_trend(rep)
        assert set(trend) == {"high_sigma_mean", "low_sigma_mean", "low_minus_high"}
        assert np.isfinite(trend["low_minus_high"])

    def test_identity_sigma_report(self):
        # whitened-coordinate drift uses identity right-singular directions
        rng = make_rng(14)
        q = rng.standard_normal((4, 6))
        svd = CompactSvd(np.zeros((5, 4)), np.ones(4), np.eye(4), 4)
        rep = singular_direction_similarity(q, q, svd)
        np.testing.assert_allclose(rep.cosines, 1.0)
