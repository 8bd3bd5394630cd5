import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isobayes.datasets import generate_dataset
from isobayes.errors import DataError, TableRangeError
from isobayes.grid import GridSpec, RegressionDataset, bin_index, compute_bin_stats
from isobayes.immersion import ImmersionKind
from isobayes.intervals import (CredibleInterval, ImmersionDraws, Sided, ZbTable,
                                coverage_of_level, credible_interval, find_table,
                                immersion_draws_at, read_zb_tables, recalibrate_level,
                                shipped_tables, write_zb_tables)
from isobayes.posterior import FixedVariance, PriorSpec, fit_posterior


def beta_table(kind=1, a=2.0, b=5.0, beta=(1,)):
    """A smooth, strictly increasing CDF on [0, 1] (regularized incomplete beta)."""
    from scipy.stats import beta as beta_dist

    z = np.linspace(0, 1, 1001)
    return ZbTable(kind, beta, z, beta_dist.cdf(z, a, b))


class TestCredibleInterval:
    def test_type7_example(self):
        ci = credible_interval(np.arange(1.0, 101.0), 0.90)
        assert ci.lower == pytest.approx(5.95, abs=1e-12)
        assert ci.upper == pytest.approx(95.05, abs=1e-12)

    def test_near_one_spans_range(self):
        v = np.random.default_rng(0).standard_normal(500)
        ci = credible_interval(v, 1 - 1e-12)
        assert ci.lower == pytest.approx(v.min()) and ci.upper == pytest.approx(v.max())

    def test_constant_draws(self):
        ci = credible_interval(np.full(10, 3.5), 0.95)
        assert (ci.lower, ci.upper, ci.length) == (3.5, 3.5, 0.0)

    def test_one_sided(self):
        ci = credible_interval(np.arange(1.0, 101.0), 0.90, "upper_one_sided")
        assert ci.lower == -np.inf and ci.upper == pytest.approx(90.1)

    def test_errors(self):
        with pytest.raises(ValueError):
            credible_interval(np.array([]), 0.9)
        with pytest.raises(ValueError):
            credible_interval(np.ones(3), 1.0)
        with pytest.raises(ValueError):
            CredibleInterval(2.0, 1.0, 0.9, None, ())

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.98), st.floats(0.001, 0.019))
    def test_width_nondecreasing_in_credibility(self, seed, c, dc):
        v = np.random.default_rng(seed).standard_normal(300)
        assert credible_interval(v, c).length <= credible_interval(v, c + dc).length + 1e-12

    def test_carries_kind_and_point(self):
        draws = ImmersionDraws(np.arange(5.0), ImmersionKind.LOWER, (0.5,))
        ci = credible_interval(draws, 0.5)
        assert ci.kind is ImmersionKind.LOWER and ci.x0 == (0.5,) and ci.contains(2.0)

    def test_sided_parse(self):
        assert Sided.parse("two") is Sided.TWO_SIDED
        assert Sided.parse("upper_one_sided") is Sided.UPPER_ONE_SIDED
        with pytest.raises(ValueError):
            Sided.parse("lower")


class TestImmersionDraws:
    def test_noiseless_concentrates(self):
        grid = GridSpec((4, 4))
        g = (np.arange(4) + 0.5) / 4
        x = np.array([(a, b) for a in g for b in g] * 3)
        y = x[:, 0] + 2 * x[:, 1]
        data = RegressionDataset(x, y)
        prior = PriorSpec(np.zeros(grid.shape), np.full(grid.shape, np.inf), FixedVariance(1e-14))
        d = immersion_draws_at(data, grid, prior, (0.6, 0.4), "average", 200,
                               np.random.default_rng(0))
        cell = tuple(j - 1 for j in bin_index((0.6, 0.4), grid))
        truth = compute_bin_stats(data, grid).means[cell]
        assert np.max(np.abs(d.values - truth)) < 1e-5

    def test_seed_determinism_and_average(self):
        data = generate_dataset("f3", 80, 0.5, np.random.default_rng(1))
        grid = GridSpec((4, 4))
        prior = PriorSpec.default(grid)
        a = immersion_draws_at(data, grid, prior, (0.5, 0.5), "average", 64, np.random.default_rng(3))
        b = immersion_draws_at(data, grid, prior, (0.5, 0.5), "average", 64, np.random.default_rng(3))
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.values, (a.lower + a.upper) / 2)

    def test_immersion_narrower_than_unrestricted(self):
        # f2 at n=200, sigma=0.1, J = ceil(n^(1/4) log10 n)
        rng = np.random.default_rng(2024)
        data = generate_dataset("f2", 200, 0.1, rng)
        J = int(np.ceil(200 ** 0.25 * np.log10(200)))
        grid = GridSpec((J, J))
        prior = PriorSpec.default(grid)
        d = immersion_draws_at(data, grid, prior, (0.5, 0.5), "average", 2000, rng)
        params = fit_posterior(data, compute_bin_stats(data, grid), prior)
        cell = tuple(j - 1 for j in bin_index((0.5, 0.5), grid))
        unrestricted_sd = np.sqrt(params.sigma2 * params.var_scale[cell])
        assert abs(np.median(d.values) - 1.0) < 0.1
        assert d.values.std() < unrestricted_sd

    def test_rejects_single_draw(self):
        data = generate_dataset("f1", 20, 1.0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            immersion_draws_at(data, GridSpec((2, 2)), PriorSpec.default(GridSpec((2, 2))),
                               (0.5, 0.5), "lower", 1, np.random.default_rng(0))


class TestZbTable:
    def test_validation(self):
        z = np.linspace(0, 1, 5)
        with pytest.raises(ValueError):
            ZbTable(1, (1,), z, np.array([0, 0.5, 0.4, 0.9, 1.0]))
        with pytest.raises(ValueError):
            ZbTable(4, (1,), z, z)
        with pytest.raises(ValueError):
            ZbTable(1, (1,), z[::-1], z)

    def test_from_samples_integer_grid(self):
        # counts out of 200; 190/200 = 0.95 exactly, which float rounding would miss
        t = ZbTable.from_samples(np.array([190, 191, 100]), 1, (1,), n_inner=200)
        assert t.cdf_at(0.95) == pytest.approx(2 / 3)
        assert t.cdf_at(0.5) == pytest.approx(1 / 3)
        assert t.z.size == 1001 and t.cdf[-1] == 1.0

    def test_range_errors(self):
        t = ZbTable.identity()
        with pytest.raises(TableRangeError):
            t.cdf_at(1.5)
        bounded = ZbTable(1, (1,), np.array([0.0, 1.0]), np.array([0.2, 0.9]))
        with pytest.raises(TableRangeError):
            bounded.quantile(0.95)

    def test_quantile_atom_at_zero(self):
        t = ZbTable.from_samples(np.array([0, 0, 5, 10]), 1, (1,), n_inner=10)
        assert t.cdf[0] == 0.5 and t.quantile(0.25) == 0.0 and t.quantile(0.5) == 0.0

    def test_quantile_inverts_cdf(self):
        t = beta_table()
        for p in (0.01, 0.3, 0.5, 0.9, 0.99):
            assert t.cdf_at(t.quantile(p)) == pytest.approx(p, abs=1e-12)

    def test_mc_standard_error(self):
        t = ZbTable.from_samples(np.arange(100) % 10, 1, (1,), n_inner=10, meta={"n_outer": 100})
        assert t.mc_standard_error(0.5) == pytest.approx(np.sqrt(0.6 * 0.4 / 100))
        with pytest.raises(ValueError):
            ZbTable.identity().mc_standard_error(0.5)


class TestRecalibration:
    @pytest.mark.parametrize("sided", ["two_sided_equal_tail", "upper_one_sided"])
    @pytest.mark.parametrize("kind", [1, 3])
    def test_identity_table_is_fixed_point(self, sided, kind):
        t = ZbTable.identity(kind=kind)
        for target in (0.8, 0.9, 0.95):
            assert recalibrate_level(target, t, sided) == pytest.approx(target, abs=1e-9)

    @pytest.mark.parametrize("sided", ["two_sided_equal_tail", "upper_one_sided"])
    def test_round_trip(self, sided):
        t = beta_table(a=5.0, b=1.5)
        for target in (0.8, 0.9, 0.95):
            c = recalibrate_level(target, t, sided)
            assert coverage_of_level(c, t, sided) == pytest.approx(target, abs=1e-9)

    def test_kind3_closed_form(self):
        from scipy.stats import beta as beta_dist

        z = np.linspace(0, 1, 1001)
        t = ZbTable(3, (1, 1), z, beta_dist.cdf(z, 3.0, 3.0))
        c = recalibrate_level(0.95, t)
        assert c == pytest.approx(1 - 2 * t.quantile(0.025), abs=1e-12)
        assert coverage_of_level(c, t) == pytest.approx(0.95, abs=1e-3)
        assert coverage_of_level(0.5, t, "upper_one_sided") == pytest.approx(0.5)

    def test_out_of_support(self):
        t = ZbTable(1, (1,), np.array([0.0, 1.0]), np.array([0.0, 0.5]))
        with pytest.raises(TableRangeError):
            recalibrate_level(0.9, t)
        with pytest.raises(TableRangeError):
            recalibrate_level(1.0, ZbTable.identity())


class TestTableFiles:
    def test_round_trip(self, tmp_path):
        tabs = [beta_table(kind=1), beta_table(kind=3, beta=(3, 1))]
        path = tmp_path / "t.csv"
        write_zb_tables(tabs, path)
        assert path.read_text().splitlines()[0] == "kind,d,beta,z,cdf"
        assert "3,2,3-1,0.5," in path.read_text()
        back = read_zb_tables(path)
        assert len(back) == 2
        for a, b in zip(tabs, back):
            assert (a.kind, a.beta) == (b.kind, b.beta)
            assert np.array_equal(a.cdf, b.cdf)
            assert np.allclose(a.z, b.z, atol=1e-12)

    def test_bad_rows(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("kind,d,beta,z,cdf\n1,1,1,0,0\n1,2,1,0.5,0.5\n")
        with pytest.raises(DataError, match=":3:"):
            read_zb_tables(p)
        p.write_text("kind,beta,z,cdf\n")
        with pytest.raises(DataError, match="header"):
            read_zb_tables(p)

    def test_find_table(self):
        tabs = [beta_table(kind=1), beta_table(kind=2)]
        assert find_table(2, (1,), tabs).kind == 2
        with pytest.raises(TableRangeError):
            find_table(3, (1,), tabs)


# Checks of the bundled tables against reference values and their structural properties.
# Tolerances are Monte Carlo sized: 5000 outer draws (d=1) and 2000 (d=2).

SHIPPED = [(1, (1,)), (1, (3,)), (1, (5,)), (1, (1, 1)), (1, (3, 1)), (1, (3, 3))]


@pytest.fixture(scope="module")
def tables():
    return shipped_tables()


class TestShippedTables:
    def test_all_present(self, tables):
        for _, beta in SHIPPED:
            for kind in (1, 2, 3):
                find_table(kind, beta, tables)

    def test_reference_values(self, tables):
        t1 = find_table(1, (1,), tables)
        assert coverage_of_level(0.95, t1, "upper_one_sided") == pytest.approx(0.965, abs=0.015)
        assert recalibrate_level(0.90, t1, "upper_one_sided") == pytest.approx(0.878, abs=0.02)
        t3 = find_table(3, (1, 1), tables)
        assert coverage_of_level(0.90, t3, "upper_one_sided") == pytest.approx(0.927, abs=0.03)
        assert recalibrate_level(0.95, t3) == pytest.approx(0.918, abs=0.02)

    @pytest.mark.parametrize("beta", [b for _, b in SHIPPED])
    def test_recalibrated_below_target(self, tables, beta):
        step = 0.001
        for kind in (1, 2, 3):
            t = find_table(kind, beta, tables)
            for target in (0.90, 0.95):
                for sided in ("two_sided_equal_tail", "upper_one_sided"):
                    assert recalibrate_level(target, t, sided) < target + step

    @pytest.mark.parametrize("beta", [b for _, b in SHIPPED])
    def test_duality_and_symmetry(self, tables, beta):
        t1, t2, t3 = (find_table(k, beta, tables) for k in (1, 2, 3))
        n = 5000 if len(beta) == 1 else 2000
        for z in (0.3, 0.5, 0.7, 0.9):
            # same simulation run, so kinds 1 and 2 are correlated; 5 SE bound is loose
            f1, f2 = t1.cdf_at(z), t2.cdf_at(1 - z - 0.001)
            se = np.sqrt(f1 * (1 - f1) / n + f2 * (1 - f2) / n)
            assert abs(f1 - (1 - f2)) <= 5 * se + 0.002
            g, h = t3.cdf_at(z), t3.cdf_at(1 - z - 0.001)
            se3 = np.sqrt(2 * g * (1 - g) / n)
            assert abs(g - (1 - h)) <= 5 * se3 + 0.002
