import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskmono import (
    Dataset,
    InvalidSplitError,
    InvalidSubsampleError,
    LossKind,
    child_seed,
    draw_disjoint_pair,
    draw_subsample,
    evaluate_loss,
    split_train_test,
)


def make_data(n, p=3, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))


class TestDataset:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((4, 2)), np.zeros(3))

    def test_non_finite_rejected(self):
        X = np.zeros((3, 2))
        X[0, 0] = np.nan
        with pytest.raises(ValueError):
            Dataset(X, np.zeros(3))
        y = np.zeros(3)
        y[1] = np.inf
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), y)

    def test_arrays_are_immutable(self):
        data = make_data(5)
        with pytest.raises(ValueError):
            data.features[0, 0] = 1.0

    def test_csv_roundtrip(self, tmp_path):
        data = make_data(6, p=4, seed=1)
        path = tmp_path / "d.csv"
        data.to_csv(path)
        back = Dataset.from_csv(path)
        np.testing.assert_array_equal(back.features, data.features)
        np.testing.assert_array_equal(back.response, data.response)


class TestSplit:
    def test_sizes_and_partition(self):
        data = make_data(10)
        train, test, plan = split_train_test(data, 2, seed=7)
        assert train.n == 8 and test.n == 2
        union = np.union1d(plan.train_indices, plan.test_indices)
        np.testing.assert_array_equal(union, np.arange(10))

    def test_full_test_rejected(self):
        data = make_data(5)
        with pytest.raises(InvalidSplitError):
            split_train_test(data, 5, seed=0)
        with pytest.raises(InvalidSplitError):
            split_train_test(data, 0, seed=0)

    def test_determinism(self):
        data = make_data(20)
        _, _, p1 = split_train_test(data, 6, seed=42)
        _, _, p2 = split_train_test(data, 6, seed=42)
        np.testing.assert_array_equal(p1.train_indices, p2.train_indices)
        np.testing.assert_array_equal(p1.test_indices, p2.test_indices)

    @settings(deadline=None, max_examples=50)
    @given(n=st.integers(2, 40), seed=st.integers(0, 2**32))
    def test_partition_property(self, n, seed):
        data = make_data(n, p=2, seed=1)
        n_te = max(1, n // 3)
        _, _, plan = split_train_test(data, n_te, seed)
        assert plan.test_indices.size == n_te
        assert np.intersect1d(plan.train_indices, plan.test_indices).size == 0
        assert plan.train_indices.size + plan.test_indices.size == n


class TestSubsample:
    def test_k_equals_n_returns_whole_dataset(self):
        data = make_data(8)
        sub = draw_subsample(data, 8, seed=3)
        np.testing.assert_array_equal(sub.features, data.features)
        np.testing.assert_array_equal(sub.response, data.response)

    def test_determinism(self):
        data = make_data(8)
        a = draw_subsample(data, 3, seed=1)
        b = draw_subsample(data, 3, seed=1)
        np.testing.assert_array_equal(a.features, b.features)

    def test_out_of_range_rejected(self):
        data = make_data(8)
        for k in (0, 9):
            with pytest.raises(InvalidSubsampleError):
                draw_subsample(data, k, seed=0)

    def test_row_frequencies_uniform(self):
        # each row should appear with frequency k/n up to a 3-sigma binomial band
        n, k, draws = 12, 4, 600
        data = make_data(n)
        counts = np.zeros(n)
        for s in range(draws):
            sub = draw_subsample(data, k, seed=s)
            for row in sub.response:
                counts[np.where(data.response == row)[0][0]] += 1
        expected = draws * k / n
        band = 3 * np.sqrt(draws * (k / n) * (1 - k / n))
        assert np.all(np.abs(counts - expected) <= band)


class TestDisjointPair:
    def test_partition_of_distinct_rows(self):
        data = make_data(10)
        d1, d2 = draw_disjoint_pair(data, 6, 4, seed=5)
        merged = np.concatenate([d1.response, d2.response])
        assert np.unique(merged).size == 10

    def test_empty_second_set(self):
        data = make_data(10)
        d1, d2 = draw_disjoint_pair(data, 6, 0, seed=5)
        assert d1.n == 6 and d2.n == 0

    def test_overflow_rejected(self):
        data = make_data(10)
        with pytest.raises(InvalidSubsampleError):
            draw_disjoint_pair(data, 8, 4, seed=0)


class TestLoss:
    @pytest.mark.parametrize("y,yhat,want", [(3, 3, 0), (2, 0, 4), (-1, 1, 4)])
    def test_squared_error_values(self, y, yhat, want):
        assert evaluate_loss(LossKind.SQUARED_ERROR, y, yhat) == want

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            evaluate_loss(LossKind.SQUARED_ERROR, np.nan, 0.0)

    @settings(deadline=None, max_examples=100)
    @given(
        y=st.floats(-1e6, 1e6, allow_nan=False),
        delta=st.one_of(st.just(0.0), st.floats(1e-9, 1e6), st.floats(-1e6, -1e-9)),
    )
    def test_nonnegative_zero_iff_equal(self, y, delta):
        yhat = y + delta  # offsets this size square without underflow
        loss = evaluate_loss(LossKind.SQUARED_ERROR, y, yhat)
        assert loss >= 0
        assert (loss == 0) == (y == yhat)


class TestChildSeed:
    def test_stable_and_distinct(self):
        a = child_seed(1, "bag", 0)
        assert a == child_seed(1, "bag", 0)
        assert a != child_seed(1, "bag", 1)
        assert a != child_seed(2, "bag", 0)
        assert a != child_seed(1, "pair", 0)

    def test_fits_in_63_bits(self):
        for i in range(100):
            assert 0 <= child_seed(12345, "t", i) < 2**63
