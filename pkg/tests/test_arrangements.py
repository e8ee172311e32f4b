import numpy as np
import pytest

from bnconvex import (arrangement_bound, enumerate_arrangements, make_rng,
                      sample_arrangements, tight_arrangement_bound)
from bnconvex.errors import CapacityError


def masks_set(arr_set):
    return {tuple(a.mask.astype(int)) for a in arr_set.arrangements}


class TestBounds:
    def test_n2_r1(self):
        assert arrangement_bound(2, 1) == pytest.approx(2 * np.e)

    def test_n4_r2(self):
        assert arrangement_bound(4, 2) == pytest.approx(4 * (3 * np.e / 2) ** 2)
        assert arrangement_bound(4, 2) == pytest.approx(66.5014, abs=5e-3)

    def test_tight_bound_values(self):
        assert tight_arrangement_bound(4, 2) == 8
        assert tight_arrangement_bound(2, 1) == 2
        assert tight_arrangement_bound(6, 4) == 2 * (1 + 5 + 10 + 10)

    def test_tight_below_loose(self):
        for n in range(2, 12):
            for r in range(1, min(n, 5)):
                assert tight_arrangement_bound(n, r) <= arrangement_bound(n, r) + 1e-9

    def test_invalid_dims(self):
        with pytest.raises(ValueError):
            arrangement_bound(1, 1)
        with pytest.raises(ValueError):
            arrangement_bound(4, 0)
        with pytest.raises(ValueError):
            tight_arrangement_bound(4, 5)


class TestEnumerate:
    def test_two_opposite_rows(self):
        s = enumerate_arrangements(np.array([[1.0], [-1.0]]))
        assert s.exhaustive
        assert masks_set(s) == {(1, 0), (0, 1)}
        assert len(s) <= tight_arrangement_bound(2, 1)

    def test_generic_4x2(self):
        rng = make_rng(17)
        s = enumerate_arrangements(rng.standard_normal((4, 2)))
        assert len(s) == 8

    def test_duplicate_rows_coalesce(self):
        rng = make_rng(18)
        x = rng.standard_normal((4, 2))
        x[3] = x[1]
        s = enumerate_arrangements(x)
        for a in s.arrangements:
            assert a.mask[1] == a.mask[3]
        assert len(s) < 8  # strictly below the generic count

    def test_witnesses_validate(self):
        rng = make_rng(19)
        for trial in range(5):
            x = rng.standard_normal((6, 3))
            s = enumerate_arrangements(x)
            for a in s.arrangements:
                assert a.validates(x)

    def test_count_respects_tight_bound(self):
        rng = make_rng(20)
        for n, d in ((5, 2), (6, 3), (8, 2)):
            x = rng.standard_normal((n, d))
            s = enumerate_arrangements(x)
            assert len(s) <= tight_arrangement_bound(n, s.source_dims[1])

    def test_masks_distinct(self):
        rng = make_rng(21)
        s = enumerate_arrangements(rng.standard_normal((7, 3)))
        assert len(masks_set(s)) == len(s)

    def test_zero_matrix_single_pattern(self):
        s = enumerate_arrangements(np.zeros((3, 2)))
        assert masks_set(s) == {(1, 1, 1)}

    def test_capacity_guards(self):
        rng = make_rng(22)
        with pytest.raises(CapacityError):
            enumerate_arrangements(rng.standard_normal((21, 2)))
        with pytest.raises(CapacityError):
            enumerate_arrangements(rng.standard_normal((8, 5)))

    def test_rank_deficient_embedding(self):
        # rank-2 data embedded in 5 columns enumerates like its 2-d core
        rng = make_rng(23)
        core = rng.standard_normal((5, 2))
        lift = rng.standard_normal((2, 5))
        s = enumerate_arrangements(core @ lift)
        s_core = enumerate_arrangements(core)
        assert masks_set(s) == masks_set(s_core)


class TestSample:
    def test_single_draw(self):
        rng_ref = np.random.Generator(np.random.Philox(key=77))
        x = make_rng(1).standard_normal((5, 3))
        g = rng_ref.standard_normal((1, 3))
        s = sample_arrangements(x, 1, seed=77)
        assert len(s) == 1
        np.testing.assert_array_equal(s.arrangements[0].mask, (x @ g[0]) >= 0)
        np.testing.assert_array_equal(s.arrangements[0].witness, g[0])

    def test_seed_determinism(self):
        x = make_rng(2).standard_normal((6, 2))
        a = sample_arrangements(x, 500, seed=5)
        b = sample_arrangements(x, 500, seed=5)
        assert len(a) == len(b)
        for u, v in zip(a.arrangements, b.arrangements):
            np.testing.assert_array_equal(u.mask, v.mask)
            np.testing.assert_array_equal(u.witness, v.witness)

    def test_not_exhaustive_flag(self):
        x = make_rng(3).standard_normal((4, 2))
        assert sample_arrangements(x, 10, seed=0).exhaustive is False

    def test_sampled_subset_of_enumerated(self):
        rng = make_rng(24)
        x = rng.standard_normal((5, 2))
        enum = enumerate_arrangements(x)
        samp = sample_arrangements(x, 10_000, seed=11)
        assert masks_set(samp) <= masks_set(enum)

    def test_high_count_converges_to_exhaustive(self):
        rng = make_rng(25)
        for n in (4, 6, 8):
            x = rng.standard_normal((n, 2))
            enum = enumerate_arrangements(x)
            samp = sample_arrangements(x, 100_000, seed=n)
            assert masks_set(samp) == masks_set(enum)

    def test_witnesses_validate(self):
        x = make_rng(4).standard_normal((7, 3))
        s = sample_arrangements(x, 300, seed=9)
        for a in s.arrangements:
            assert a.validates(x)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            sample_arrangements(np.eye(2), 0, seed=0)
