"""Tests for the series container, differencing, and splitting."""

import numpy as np
import pytest

from agforecast.series import (
    DifferencedSeries,
    TimeSeries,
    difference,
    integrate,
    prefix_subsets,
    train_test_split,
)


class TestTimeSeries:
    def test_basic_construction(self):
        s = TimeSeries([1.0, 2.0, 3.0], dates=("2019-01-02", "2019-01-03", "2019-01-04"))
        assert len(s) == 3
        assert s.values.dtype == np.float64

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, np.nan])
        with pytest.raises(ValueError):
            TimeSeries([1.0, np.inf])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TimeSeries([])

    def test_rejects_misaligned_dates(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, 2.0], dates=("2019-01-02",))

    def test_rejects_non_increasing_dates(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, 2.0], dates=("2019-01-03", "2019-01-02"))
        with pytest.raises(ValueError):
            TimeSeries([1.0, 2.0], dates=("2019-01-02", "2019-01-02"))

    def test_values_are_immutable(self):
        s = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_slice_carries_dates(self):
        s = TimeSeries([1.0, 2.0, 3.0], dates=("a", "b", "c"))
        sub = s.slice(1, 3)
        assert sub.dates == ("b", "c")
        np.testing.assert_array_equal(sub.values, [2.0, 3.0])


class TestDifference:
    def test_first_difference(self):
        d = difference(TimeSeries([1.0, 3.0, 6.0, 10.0]), 1)
        np.testing.assert_array_equal(d.values, [2.0, 3.0, 4.0])
        np.testing.assert_array_equal(d.anchors, [1.0])

    def test_zero_difference_is_identity(self):
        s = TimeSeries([5.0, 7.0, 9.0])
        d = difference(s, 0)
        np.testing.assert_array_equal(d.values, s.values)
        assert d.anchors.size == 0

    def test_second_difference(self):
        d = difference(TimeSeries([1.0, 3.0, 6.0, 10.0]), 2)
        np.testing.assert_array_equal(d.values, [1.0, 1.0])
        np.testing.assert_array_equal(d.anchors, [1.0, 3.0])

    def test_order_too_large(self):
        with pytest.raises(ValueError):
            difference(TimeSeries([1.0, 2.0]), 2)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            difference(TimeSeries([1.0, 2.0]), -1)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        for d in (1, 2):
            s1 = rng.standard_normal(40)
            s2 = rng.standard_normal(40)
            a, b = 2.5, -1.25
            lhs = difference(TimeSeries(a * s1 + b * s2), d)
            r1 = difference(TimeSeries(s1), d)
            r2 = difference(TimeSeries(s2), d)
            np.testing.assert_allclose(lhs.values, a * r1.values + b * r2.values,
                                       atol=1e-12)
            np.testing.assert_allclose(lhs.anchors, a * r1.anchors + b * r2.anchors,
                                       atol=1e-12)


class TestIntegrate:
    def test_cumulative_sum(self):
        d = DifferencedSeries(values=np.array([2.0, 3.0, 4.0]), order_d=1,
                              anchors=np.array([1.0]))
        np.testing.assert_array_equal(integrate(d).values, [1.0, 3.0, 6.0, 10.0])

    def test_empty_result_forbidden(self):
        with pytest.raises(ValueError):
            integrate(DifferencedSeries(values=np.array([]), order_d=0,
                                        anchors=np.array([])))

    def test_anchor_order_mismatch(self):
        with pytest.raises(ValueError):
            DifferencedSeries(values=np.array([1.0]), order_d=2,
                              anchors=np.array([1.0]))

    def test_round_trip_random_walk(self):
        rng = np.random.default_rng(7)
        walk = TimeSeries(np.cumsum(rng.standard_normal(214)))
        for d in (1, 2):
            back = integrate(difference(walk, d))
            assert np.max(np.abs(back.values - walk.values)) <= 1e-12

    def test_round_trip_property(self):
        rng = np.random.default_rng(11)
        for trial in range(50):
            n = int(rng.integers(3, 60))
            s = TimeSeries(rng.normal(scale=10.0, size=n))
            for d in (0, 1, 2):
                if d >= n:
                    continue
                back = integrate(difference(s, d))
                assert np.max(np.abs(back.values - s.values)) <= 1e-12


class TestTrainTestSplit:
    def test_floor_rule(self):
        s = TimeSeries(np.arange(235, dtype=float))
        train, test = train_test_split(s, 0.91)
        assert len(train) == 213
        assert len(test) == 22
        np.testing.assert_array_equal(np.concatenate([train.values, test.values]),
                                      s.values)

    def test_even_split(self):
        train, test = train_test_split(TimeSeries(np.arange(10.0)), 0.5)
        assert len(train) == 5 and len(test) == 5

    def test_degenerate_split(self):
        with pytest.raises(ValueError):
            train_test_split(TimeSeries([1.0, 2.0]), 0.99)

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            train_test_split(TimeSeries([1.0, 2.0, 3.0]), 1.0)
        with pytest.raises(ValueError):
            train_test_split(TimeSeries([1.0, 2.0, 3.0]), 0.0)


class TestPrefixSubsets:
    def test_week_prefixes(self):
        test = TimeSeries(np.arange(21.0))
        subs = prefix_subsets(test, [7, 14, 21])
        assert [len(s) for s in subs] == [7, 14, 21]

    def test_single_point(self):
        subs = prefix_subsets(TimeSeries(np.arange(5.0)), [1])
        assert len(subs) == 1 and len(subs[0]) == 1

    def test_not_increasing(self):
        with pytest.raises(ValueError):
            prefix_subsets(TimeSeries(np.arange(10.0)), [7, 5])

    def test_overflow(self):
        with pytest.raises(ValueError):
            prefix_subsets(TimeSeries(np.arange(5.0)), [7])

    def test_nesting(self):
        test = TimeSeries(np.random.default_rng(3).standard_normal(30))
        subs = prefix_subsets(test, [3, 9, 27])
        for small, big in zip(subs, subs[1:]):
            np.testing.assert_array_equal(big.values[:len(small)], small.values)
