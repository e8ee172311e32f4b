import numpy as np
import pytest

from bnconvex import (TrainConfig, bn_apply, closed_form_deep_last_two,
                      closed_form_postbn, closed_form_scalar,
                      closed_form_vector_onehot, deep_forward_activations,
                      dual_optimal_scalar, forward, init_network, make_rng,
                      objective, onehot_objective_value, pseudo_inverse,
                      train_gd)
from bnconvex.errors import DimensionError
from bnconvex.networks import BnLayerParams, DeepBnNetwork


def rel_gap(res):
    return abs(res.primal_objective - res.dual_objective) / (
        1 + abs(res.dual_objective))


def regime_betas(y):
    """One beta per dual regime of the sign-split label norms."""
    zp = np.linalg.norm(np.maximum(y, 0))
    zm = np.linalg.norm(np.maximum(-y, 0))
    lo, hi = min(zp, zm), max(zp, zm)
    out = [0.5 * lo if lo > 0 else 0.5 * hi, 2.0 * hi + 1.0]
    if lo < hi:
        out.append(0.5 * (lo + hi))
    return [b for b in out if b > 0]


class TestDualOptimalScalar:
    def test_case_inactive(self):
        np.testing.assert_allclose(dual_optimal_scalar([1.0, -1.0], 3.0),
                                   [1.0, -1.0])

    def test_case_both_active(self):
        np.testing.assert_allclose(dual_optimal_scalar([1.0, -1.0], 0.1),
                                   [0.1, -0.1], atol=1e-15)

    def test_zero_labels(self):
        np.testing.assert_array_equal(dual_optimal_scalar(np.zeros(3), 0.5),
                                      np.zeros(3))

    def test_feasibility_bound(self):
        rng = make_rng(0)
        for _ in range(20):
            y = rng.standard_normal(6)
            beta = float(rng.uniform(0.05, 3.0))
            v = dual_optimal_scalar(y, beta)
            assert np.linalg.norm(np.maximum(v, 0)) <= beta + 1e-12
            assert np.linalg.norm(np.maximum(-v, 0)) <= beta + 1e-12


class TestClosedFormScalar:
    def test_identity_example(self):
        res = closed_form_scalar(np.eye(2), [1.0, -1.0], 0.1)
        assert res.primal_objective == pytest.approx(0.19, abs=1e-12)
        assert res.network.width == 2
        assert res.regime_case == "both_active"

    def test_inactive_regime(self):
        rng = make_rng(1)
        x = rng.standard_normal((3, 5))
        y = rng.standard_normal(3)
        beta = 2.0 * max(np.linalg.norm(np.maximum(y, 0)),
                         np.linalg.norm(np.maximum(-y, 0)))
        res = closed_form_scalar(x, y, beta)
        assert res.network.width == 0
        assert res.primal_objective == pytest.approx(0.5 * float(y @ y))
        np.testing.assert_allclose(res.v_star, y)
        assert res.regime_case == "inactive"

    def test_one_sided_labels(self):
        rng = make_rng(2)
        x = rng.standard_normal((4, 6))
        y = np.abs(rng.standard_normal(4))
        res = closed_form_scalar(x, y, 0.5 * np.linalg.norm(y))
        assert res.regime_case == "positive_only"
        assert res.network.width == 1

    def test_strong_duality_all_regimes(self):
        rng = make_rng(3)
        seen = set()
        for _ in range(15):
            n = int(rng.integers(3, 9))
            x = rng.standard_normal((n, n + 2))
            y = rng.standard_normal(n)
            for beta in regime_betas(y):
                res = closed_form_scalar(x, y, beta)
                seen.add(res.regime_case)
                assert rel_gap(res) <= 1e-9
        assert {"both_active", "inactive"} <= seen

    def test_theta_normalization(self):
        rng = make_rng(4)
        x = rng.standard_normal((5, 7))
        res = closed_form_scalar(x, rng.standard_normal(5), 0.2)
        ga = res.network.hidden.gamma ** 2 + res.network.hidden.alpha ** 2
        np.testing.assert_allclose(ga, 1.0, atol=1e-12)

    def test_exact_tie_keeps_zero_weight_unit(self):
        # beta equal to one side's norm: that unit stays with output weight 0
        y = np.array([3.0, -4.0, 0.0])
        res = closed_form_scalar(np.eye(3), y, 3.0)
        assert res.network.width == 2
        w2 = np.sort(res.network.w2.ravel())
        np.testing.assert_allclose(w2, [-1.0, 0.0], atol=1e-12)
        assert res.duality_gap <= 1e-12

    def test_preconditions(self):
        rng = make_rng(5)
        with pytest.raises(DimensionError):
            closed_form_scalar(rng.standard_normal((5, 3)), rng.standard_normal(5), 0.1)
        x = rng.standard_normal((4, 6))
        x[1] = x[0]  # row-rank deficient
        with pytest.raises(DimensionError):
            closed_form_scalar(x, rng.standard_normal(4), 0.1)

    def test_construction_forms_agree_in_bn_output(self):
        # X^+ z and X^+ (z - min z) produce the same BN output: BN ignores
        # the mean shift of the pre-activation
        rng = make_rng(6)
        x = rng.standard_normal((4, 6))
        y = rng.standard_normal(4)
        z = np.maximum(y, 0)
        pinv = pseudo_inverse(x)
        a = bn_apply(x, pinv @ z, 0.7, -0.2)
        b = bn_apply(x, pinv @ (z - z.min()), 0.7, -0.2)
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_dominates_gd_restarts(self):
        rng = make_rng(7)
        n, d = 5, 7
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n)
        beta = 0.3
        res = closed_form_scalar(x, y, beta)
        for s in range(20):
            net0 = init_network("fc_pre_bn", d, 8, 1, make_rng(500 + s))
            log = train_gd(net0, x, y[:, None],
                           TrainConfig(beta=beta, lr=2e-2, epochs=400, seed=s))
            assert res.primal_objective <= log.objective[-1] + 1e-6


class TestClosedFormVectorOnehot:
    def test_identity_example(self):
        res = closed_form_vector_onehot(np.eye(3), np.eye(3), 0.5)
        assert res.primal_objective == pytest.approx(1.125, abs=1e-12)
        assert res.dual_objective == pytest.approx(1.125, abs=1e-12)
        assert res.network.width == 3

    def test_large_beta_all_inactive(self):
        n = 4
        y = np.eye(n)
        res = closed_form_vector_onehot(np.eye(n), y, np.sqrt(n) + 1.0)
        assert res.network.width == 0
        assert res.primal_objective == pytest.approx(0.5 * np.sum(y ** 2))

    def test_per_class_threshold(self):
        # class counts (2, 1): beta between 1 and sqrt(2) keeps one class
        y = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        x = np.eye(3)
        res = closed_form_vector_onehot(x, y, 1.2)
        assert res.network.width == 1
        assert res.primal_objective == pytest.approx(
            onehot_objective_value(y, 1.2), rel=1e-12)

    def test_objective_formula(self):
        rng = make_rng(8)
        n, c = 6, 3
        labels = rng.integers(0, c, n)
        y = (labels[:, None] == np.arange(c)).astype(float)
        x = rng.standard_normal((n, n + 3))
        for beta in (0.3, 1.3, 3.0):
            res = closed_form_vector_onehot(x, y, beta)
            assert res.primal_objective == pytest.approx(
                onehot_objective_value(y, beta), rel=1e-10)
            assert rel_gap(res) <= 1e-9

    def test_rejects_non_onehot(self):
        x = np.eye(3)
        with pytest.raises(DimensionError):
            closed_form_vector_onehot(x, np.full((3, 2), 0.5), 0.1)
        bad = np.array([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(DimensionError):
            closed_form_vector_onehot(x, bad, 0.1)


class TestClosedFormDeep:
    def test_identity_activations_reduce(self):
        y = make_rng(9).standard_normal(4)
        a = closed_form_deep_last_two(np.eye(4), y, 0.2)
        b = closed_form_scalar(np.eye(4), y, 0.2)
        assert a.primal_objective == pytest.approx(b.primal_objective, rel=1e-12)

    def test_wide_random_stack(self):
        rng = make_rng(10)
        n = 6
        x = rng.standard_normal((n, 3))
        layers = [BnLayerParams(rng.standard_normal((3, 12)), np.ones(12),
                                np.zeros(12)),
                  BnLayerParams(rng.standard_normal((12, 10)), np.ones(10),
                                np.zeros(10))]
        deep = DeepBnNetwork(layers, rng.standard_normal((10, 1)))
        a_pre = deep_forward_activations(deep, x, 1)
        y = rng.standard_normal(n)
        res = closed_form_deep_last_two(a_pre, y, 0.25)
        assert rel_gap(res) <= 1e-9
        # the recovered unit weights act on the penultimate activations
        assert objective(res.network, a_pre, y[:, None], 0.0) == pytest.approx(
            0.5 * float(np.sum((forward(res.network, a_pre) - y[:, None]) ** 2)))

    def test_vector_mode(self):
        rng = make_rng(11)
        n, c = 5, 2
        a_pre = rng.standard_normal((n, n + 2))
        labels = rng.integers(0, c, n)
        y = (labels[:, None] == np.arange(c)).astype(float)
        res = closed_form_deep_last_two(a_pre, y, 0.4, vector_mode=True)
        assert rel_gap(res) <= 1e-9

    def test_big_beta_zero_layer(self):
        rng = make_rng(12)
        a_pre = rng.standard_normal((4, 6))
        y = rng.standard_normal(4)
        res = closed_form_deep_last_two(a_pre, y, 100.0)
        assert res.network.width == 0
        assert res.primal_objective == pytest.approx(0.5 * float(y @ y))

    def test_rank_deficient_rejected(self):
        rng = make_rng(13)
        a = rng.standard_normal((5, 8))
        a[2] = a[0]
        with pytest.raises(DimensionError):
            closed_form_deep_last_two(a, rng.standard_normal(5), 0.1)


class TestClosedFormPostbn:
    def test_identity_example(self):
        res = closed_form_postbn(np.eye(2), [1.0, -1.0], 0.5)
        np.testing.assert_allclose(res.network.hidden.w[:, 0], [2.0, 0.0],
                                   atol=1e-12)
        assert res.network.w2[0, 0] == pytest.approx(np.sqrt(2) - 0.5)
        assert res.network.hidden.gamma[0] == pytest.approx(1.0)
        assert res.network.hidden.alpha[0] == pytest.approx(0.0, abs=1e-15)
        assert rel_gap(res) <= 1e-9

    def test_big_beta_zero_output(self):
        rng = make_rng(14)
        x = rng.standard_normal((3, 4))
        y = rng.standard_normal(3)
        res = closed_form_postbn(x, y, 2.0 * np.linalg.norm(y))
        assert np.all(res.network.w2 == 0.0)
        assert res.primal_objective == pytest.approx(0.5 * float(y @ y))
        assert rel_gap(res) <= 1e-9

    def test_constant_labels(self):
        rng = make_rng(15)
        x = rng.standard_normal((4, 5))
        res = closed_form_postbn(x, np.full(4, 2.5), 1.0)
        assert res.network.hidden.gamma[0] == pytest.approx(0.0, abs=1e-15)
        assert res.network.hidden.alpha[0] == pytest.approx(1.0)
        pred = forward(res.network, x)
        # the prediction lives on the constant direction
        assert np.ptp(pred) == pytest.approx(0.0, abs=1e-12)
        assert rel_gap(res) <= 1e-9

    def test_zero_labels(self):
        res = closed_form_postbn(np.eye(3), np.zeros(3), 0.5)
        assert res.network.width == 0
        assert res.primal_objective == 0.0

    def test_strong_duality_random(self):
        rng = make_rng(16)
        for _ in range(10):
            n = int(rng.integers(3, 7))
            x = rng.standard_normal((n, n + 2))
            y = rng.standard_normal(n)
            for beta in (0.3 * np.linalg.norm(y), 1.7 * np.linalg.norm(y)):
                assert rel_gap(closed_form_postbn(x, y, beta)) <= 1e-9
