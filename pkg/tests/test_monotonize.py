import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskmono import (
    BaseProcedure,
    ConfigError,
    Dataset,
    MonotonizeConfig,
    bagged_ingredient,
    child_seed,
    one_step,
    one_step_grid,
    onestep_ingredient,
    zero_step,
    zero_step_grid,
)
from riskmono.monotonize import NULL_INDEX, onestep_ingredient_closed_form

from conftest import random_dataset


class TestGrids:
    def test_zero_step_grid_matches_published_setup(self):
        # n = 1000, n_te = 100, block 50: 16 candidates, sizes 850 down to 100
        grid = zero_step_grid(1000, 100, 50)
        xis = [xi for xi, _ in grid]
        sizes = [k for _, k in grid]
        assert xis == list(range(1, 17))
        assert sizes[0] == 850 and sizes[-1] == 100
        assert all(k == 900 - 50 * xi for xi, k in grid)

    def test_one_step_grid_matches_published_setup(self):
        # n = 500, n_te = 80, block 42: xi1 ranges over {2, ..., 8}
        grid = one_step_grid(500, 80, 42)
        xi1s = sorted({xi1 for xi1, *_ in grid})
        assert xi1s == list(range(2, 9))
        for xi1, xi2, n1, n2 in grid:
            assert 0 <= xi2 < xi1
            assert n1 == 420 - 42 * xi1 and n2 == 42 * xi2

    def test_empty_grid_raises_with_sizes(self):
        with pytest.raises(ConfigError, match="n_tr=90"):
            zero_step_grid(100, 10, 50)
        with pytest.raises(ConfigError):
            one_step_grid(100, 10, 30)

    @settings(deadline=None, max_examples=60)
    @given(
        n=st.integers(30, 3000),
        te_frac=st.floats(0.05, 0.3),
        block_frac=st.floats(0.01, 0.2),
    )
    def test_grid_arithmetic_invariants(self, n, te_frac, block_frac):
        n_te = max(1, int(te_frac * n))
        block = max(1, int(block_frac * n))
        n_tr = n - n_te
        try:
            zgrid = zero_step_grid(n, n_te, block)
        except ConfigError:
            zgrid = None
        if zgrid is not None:
            sizes = [k for _, k in zgrid]
            assert all(k >= 1 for k in sizes)
            assert sorted(sizes, reverse=True) == sizes
            assert all(k == n_tr - xi * block for xi, k in zgrid)
        try:
            ogrid = one_step_grid(n, n_te, block)
        except ConfigError:
            return
        for _, _, n1, n2 in ogrid:
            assert n1 >= 1 and n1 + n2 <= n_tr

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            MonotonizeConfig(M=0, block=10)
        with pytest.raises(ConfigError):
            MonotonizeConfig()  # neither block nor nu
        with pytest.raises(ConfigError):
            MonotonizeConfig(block=10, nu=0.5)
        cfg = MonotonizeConfig(nu=0.5)
        assert cfg.resolve_block(100) == 10


class TestBaggedIngredient:
    def test_single_draw_equals_plain_fit(self, rng):
        data, _ = random_dataset(rng, 20, 4)
        base = BaseProcedure.mn2ls()
        bag = bagged_ingredient(base, data, 12, M=1, seed=5)
        from riskmono.core import draw_subsample

        sub = draw_subsample(data, 12, child_seed(5, "bag", 0))
        np.testing.assert_array_equal(bag.coefficients, base.fit(sub).coefficients)

    def test_full_size_subsample_is_degenerate(self, rng):
        data, _ = random_dataset(rng, 15, 3)
        base = BaseProcedure.mn2ls()
        bag = bagged_ingredient(base, data, data.n, M=4, seed=6)
        np.testing.assert_allclose(
            bag.coefficients, base.fit(data).coefficients, atol=1e-12
        )

    def test_two_draws_average_exactly(self, rng):
        data, _ = random_dataset(rng, 25, 4)
        base = BaseProcedure.mn2ls()
        bag = bagged_ingredient(base, data, 15, M=2, seed=7)
        from riskmono.core import draw_subsample

        parts = [
            base.fit(draw_subsample(data, 15, child_seed(7, "bag", j))).coefficients
            for j in (0, 1)
        ]
        np.testing.assert_allclose(bag.coefficients, np.mean(parts, axis=0), atol=1e-12)


class TestOnestepIngredient:
    def test_empty_second_set_returns_base_fit(self, rng):
        data, _ = random_dataset(rng, 10, 3)
        base = BaseProcedure.mn2ls()
        out = onestep_ingredient(base, data, None)
        np.testing.assert_array_equal(out.coefficients, base.fit(data).coefficients)

    def test_zero_residuals_mean_zero_adjustment(self, rng):
        # pilot interpolates d2 exactly -> adjustment vanishes
        beta0 = rng.standard_normal(5)
        X2 = rng.standard_normal((4, 5))
        d1 = Dataset(np.eye(5), beta0)  # mn2ls recovers beta0 exactly
        d2 = Dataset(X2, X2 @ beta0)
        out = onestep_ingredient(BaseProcedure.mn2ls(), d1, d2)
        np.testing.assert_allclose(out.coefficients, beta0, atol=1e-9)

    def test_matches_closed_form_representation(self, rng):
        base = BaseProcedure.mn2ls()
        for _ in range(20):
            n1 = int(rng.integers(3, 20))
            n2 = int(rng.integers(2, 15))
            p = int(rng.integers(2, 25))
            d1, _ = random_dataset(rng, n1, p)
            d2, _ = random_dataset(rng, n2, p)
            direct = onestep_ingredient(base, d1, d2).coefficients
            closed = onestep_ingredient_closed_form(base, d1, d2).coefficients
            assert np.max(np.abs(direct - closed)) < 1e-8


class TestZeroStep:
    def test_noiseless_recovery_selects_zero_risk(self, rng):
        beta0 = rng.standard_normal(3)
        data, _ = random_dataset(rng, 120, 3, sigma=0.0, beta0=beta0)
        cfg = MonotonizeConfig(block=20, n_te=20, seed=11)
        table, pred = zero_step(data, BaseProcedure.mn2ls(), cfg)
        assert table.selected_value() < 1e-18
        np.testing.assert_allclose(pred.coefficients, beta0, atol=1e-7)

    def test_null_candidate_bounds_selected_estimate(self, rng):
        # pure noise with p close to n: selection can't do worse than null
        X = rng.standard_normal((60, 55))
        data = Dataset(X, rng.standard_normal(60))
        cfg = MonotonizeConfig(block=8, n_te=12, include_null=True, seed=12)
        table, _ = zero_step(data, BaseProcedure.mn2ls(), cfg)
        assert table.selected_value() <= table.estimates()[NULL_INDEX]

    def test_reproducible(self, rng):
        data, _ = random_dataset(rng, 80, 10)
        cfg = MonotonizeConfig(block=10, n_te=16, seed=13)
        t1, p1 = zero_step(data, BaseProcedure.mn2ls(), cfg)
        t2, p2 = zero_step(data, BaseProcedure.mn2ls(), cfg)
        assert t1.estimates() == t2.estimates()
        np.testing.assert_array_equal(p1.coefficients, p2.coefficients)


class TestOneStep:
    def test_candidates_contain_zero_step_ingredients(self, rng):
        data, _ = random_dataset(rng, 90, 8)
        cfg = MonotonizeConfig(block=10, n_te=18, seed=14)
        ztable, _ = zero_step(data, BaseProcedure.mn2ls(), cfg)
        otable, _ = one_step(data, BaseProcedure.mn2ls(), cfg)
        zest = ztable.estimates()
        oest = otable.estimates()
        shared = [xi for xi in zest if xi != NULL_INDEX and xi >= 2]
        assert shared, "expected overlapping grid indices"
        for xi in shared:
            assert oest[(xi, 0)] == zest[xi]

    def test_superset_gives_no_worse_selection(self, rng):
        # holds whenever zero-step does not select its xi=1 candidate, which
        # one-step's grid (xi1 >= 2) lacks; low SNR favors deep subsampling
        beta0 = rng.standard_normal(120) / np.sqrt(120)
        data, _ = random_dataset(rng, 90, 120, beta0=beta0)
        cfg = MonotonizeConfig(block=10, n_te=18, seed=15)
        ztable, _ = zero_step(data, BaseProcedure.mn2ls(), cfg)
        otable, _ = one_step(data, BaseProcedure.mn2ls(), cfg)
        assert ztable.selected != 1
        assert otable.selected_value() <= ztable.selected_value()

    def test_reproducible(self, rng):
        data, _ = random_dataset(rng, 70, 9)
        cfg = MonotonizeConfig(block=10, n_te=14, seed=16)
        t1, _ = one_step(data, BaseProcedure.mn2ls(), cfg)
        t2, _ = one_step(data, BaseProcedure.mn2ls(), cfg)
        assert t1.estimates() == t2.estimates()
