import math

import pytest

from cinegaze.errors import InputError, UndefinedValueError
from cinegaze.stats import (betainc, f_sf, one_way_anova, pearson,
                            t_sf_two_sided, welch_t_test)

from oracles import (anova_oracle, betainc_quadrature, f_p_oracle,
                     pearson_oracle, pooled_t_oracle, t_p_two_sided_oracle,
                     welch_oracle)


class TestIncompleteBeta:
    def test_endpoints(self):
        assert betainc(2.0, 3.0, 0.0) == 0.0
        assert betainc(2.0, 3.0, 1.0) == 1.0

    def test_against_quadrature(self):
        points = [(0.5, 0.5, 0.3), (1.5, 0.5, 0.9), (10, 0.5, 0.99), (3, 1, 0.5),
                  (2.5, 7.5, 0.1), (50, 0.5, 0.999), (0.5, 25, 0.01), (14, 9, 0.62)]
        for a, b, x in points:
            assert betainc(a, b, x) == pytest.approx(betainc_quadrature(a, b, x), abs=1e-10)

    def test_closed_form_power(self):
        # I_x(a, 1) = x^a
        assert betainc(3.0, 1.0, 0.5) == pytest.approx(0.125, abs=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(InputError):
            betainc(0.0, 1.0, 0.5)
        with pytest.raises(InputError):
            betainc(1.0, 1.0, 1.5)


class TestTailProbabilities:
    def test_tails_match_numeric_integration(self):
        # 20 (df, statistic) points across t and F tails
        t_points = [(1, 0.5), (2, 1.0), (5, 2.0), (10, 0.1), (10, 3.5),
                    (30, 2.0), (100, 1.96), (7, 4.2), (3, 0.7), (60, 0.0)]
        for df, t in t_points:
            assert t_sf_two_sided(t, df) == pytest.approx(
                t_p_two_sided_oracle(t, df), abs=1e-8)
        f_points = [(1, 4, 2.0), (2, 6, 3.0), (3, 12, 1.5), (5, 40, 2.2),
                    (8, 8, 0.5), (2, 30, 10.0), (6, 20, 1.0), (4, 4, 7.3),
                    (1, 100, 3.84), (12, 60, 2.5)]
        for df1, df2, f in f_points:
            assert f_sf(f, df1, df2) == pytest.approx(
                f_p_oracle(f, df1, df2), abs=1e-8)

    def test_p_in_unit_interval(self, rng):
        for _ in range(200):
            t = float(rng.normal(0, 5))
            df = int(rng.integers(1, 200))
            p = t_sf_two_sided(t, df)
            assert 0.0 <= p <= 1.0

    def test_p_monotone_in_statistic(self):
        ts = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
        ps = [t_sf_two_sided(t, 12) for t in ts]
        assert ps == sorted(ps, reverse=True)
        fs = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0]
        pfs = [f_sf(f, 3, 20) for f in fs]
        assert pfs == sorted(pfs, reverse=True)


class TestPearson:
    def test_exact_positive_line(self):
        x = [0.3, 1.7, 2.2, 5.9, 8.8]
        r, p = pearson(x, [2.0 * v + 1.0 for v in x])
        assert r == 1.0
        assert p == 0.0

    def test_exact_negative_line(self):
        x = [0.3, 1.7, 2.2, 5.9, 8.8]
        r, p = pearson(x, [-v for v in x])
        assert r == -1.0
        assert p == 0.0

    def test_fixed_pairs_against_textbook_formula(self):
        x = [1.0, 2.0, 4.0, 4.5, 7.0, 9.0]
        y = [2.1, 2.9, 5.2, 4.9, 8.1, 9.4]
        r, p = pearson(x, y)
        assert r == pytest.approx(0.9937375737840181, abs=1e-12)
        assert p == pytest.approx(5.870417330627341e-05, abs=1e-12)
        r_ref, p_ref = pearson_oracle(x, y)
        assert r == pytest.approx(r_ref, abs=1e-12)
        assert p == pytest.approx(p_ref, abs=1e-8)

    def test_constant_series_undefined(self):
        with pytest.raises(UndefinedValueError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_short_rejected(self):
        with pytest.raises(InputError):
            pearson([1.0, 2.0], [1.0, 2.0])


class TestAnova:
    def test_identical_means_give_f_zero(self):
        res = one_way_anova([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]])
        assert res.f == 0.0
        assert res.p == 1.0

    def test_hand_computed_sums_of_squares(self):
        # groups [1,2,3],[2,3,4],[3,4,5]: ssb=6, ssw=6, F=3, p=I_.5(3,1)=1/8
        res = one_way_anova([[1.0, 2, 3], [2.0, 3, 4], [3.0, 4, 5]])
        assert res.f == pytest.approx(3.0, abs=1e-12)
        assert res.p == pytest.approx(0.125, abs=1e-12)
        assert (res.df_between, res.df_within) == (2, 6)
        f_ref, p_ref = anova_oracle([[1.0, 2, 3], [2.0, 3, 4], [3.0, 4, 5]])
        assert res.f == pytest.approx(f_ref, abs=1e-12)
        assert res.p == pytest.approx(p_ref, abs=1e-8)

    def test_f_equals_t_squared_with_two_groups(self, rng):
        for _ in range(100):
            a = list(rng.normal(0, 1, int(rng.integers(2, 12))))
            b = list(rng.normal(0.5, 2, int(rng.integers(2, 12))))
            res = one_way_anova([a, b])
            t, p_t = pooled_t_oracle(a, b)
            assert res.f == pytest.approx(t * t, abs=1e-9)
            assert res.p == pytest.approx(p_t, abs=1e-8)

    def test_group_size_validation(self):
        with pytest.raises(InputError):
            one_way_anova([[1.0, 2.0], [3.0]])
        with pytest.raises(InputError):
            one_way_anova([[1.0, 2.0]])

    def test_zero_within_variance(self):
        res = one_way_anova([[1.0, 1.0], [2.0, 2.0]])
        assert math.isinf(res.f)
        assert res.p == 0.0

    def test_no_variance_at_all_undefined(self):
        with pytest.raises(UndefinedValueError):
            one_way_anova([[1.0, 1.0], [1.0, 1.0]])

    def test_group_names_recorded(self):
        res = one_way_anova([[1.0, 2.0], [2.0, 3.0]], names=["Static", "Pan"])
        assert res.group_names == ("Static", "Pan")
        assert res.group_sizes == (2, 2)


class TestWelch:
    def test_identical_samples(self):
        a = [1.0, 2.0, 3.5, 0.5]
        t, p = welch_t_test(a, list(a))
        assert t == 0.0
        assert p == 1.0

    def test_well_separated_samples(self, rng):
        a = list(rng.normal(0, 1, 30))
        b = list(rng.normal(100, 1, 30))
        _, p = welch_t_test(a, b)
        assert p < 1e-10

    def test_fixed_samples_against_textbook_formula(self):
        a = [12.1, 14.3, 11.8, 13.0, 12.6]
        b = [15.2, 16.8, 14.9, 15.5, 17.1]
        t, p = welch_t_test(a, b)
        assert t == pytest.approx(-5.0566295172465185, abs=1e-12)
        assert p == pytest.approx(0.0009815329659140842, abs=1e-12)
        t_ref, df_ref, p_ref = welch_oracle(a, b)
        assert t == pytest.approx(t_ref, abs=1e-12)
        assert df_ref == pytest.approx(7.998958486879408, abs=1e-9)
        assert p == pytest.approx(p_ref, abs=1e-8)

    def test_degenerate_variances_undefined(self):
        with pytest.raises(UndefinedValueError):
            welch_t_test([2.0, 2.0], [3.0, 3.0])

    def test_short_samples_rejected(self):
        with pytest.raises(InputError):
            welch_t_test([1.0], [2.0, 3.0])
