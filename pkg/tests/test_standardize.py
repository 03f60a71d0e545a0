import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gane.standardize import RunningStats, std_apply, std_merge, std_update, std_update_batch


def test_single_sample():
    s = std_update(RunningStats.empty(2), [2.0, -2.0])
    assert s.count == 1
    assert np.array_equal(s.mean, [2.0, -2.0]) and np.array_equal(s.m2, [0.0, 0.0])


def test_two_samples_population_variance():
    s = std_update(std_update(RunningStats.empty(1), [1.0]), [3.0])
    assert s.mean[0] == 2.0 and s.variance[0] == 1.0


def test_apply_cold_start_is_zero():
    assert not std_apply(RunningStats.empty(3), [5.0, -1.0, 2.0]).any()


def test_apply_standardizes():
    s = RunningStats(4, np.array([2.0]), np.array([16.0]))  # variance 4
    assert std_apply(s, [4.0])[0] == 1.0


def test_apply_constant_dimension_is_zero_not_nan():
    s = std_update(std_update(RunningStats.empty(1), [3.0]), [3.0])
    assert std_apply(s, [3.0])[0] == 0.0
    assert np.isfinite(std_apply(s, [4.0])[0])


def test_merge_identity_and_count():
    a = std_update_batch(RunningStats.empty(2), np.arange(10.0).reshape(5, 2))
    assert std_merge(a, RunningStats.empty(2)) == a
    assert std_merge(RunningStats.empty(2), a) == a
    b = std_update_batch(RunningStats.empty(2), np.ones((3, 2)))
    assert std_merge(a, b).count == 8


def test_sequential_vs_merge_consistency():
    a, b = np.array([1.5, -0.5]), np.array([0.25, 4.0])
    seq = std_update(std_update(RunningStats.empty(2), a), b)
    par = std_merge(std_update(RunningStats.empty(2), a), std_update(RunningStats.empty(2), b))
    assert seq.count == par.count
    assert np.max(np.abs(seq.mean - par.mean)) < 1e-12


def test_merge_matches_sequential_oracle(rng):
    x = rng.normal(3.0, 2.0, size=(20_000, 3))
    seq = RunningStats.empty(3)
    for row in x:
        seq = std_update(seq, row)
    left = std_update_batch(RunningStats.empty(3), x[:10_000])
    right = std_update_batch(RunningStats.empty(3), x[10_000:])
    merged = std_merge(left, right)
    assert merged.count == seq.count
    assert np.all(np.abs(merged.mean - seq.mean) <= 1e-9 * np.abs(seq.mean))
    assert np.all(np.abs(merged.m2 - seq.m2) <= 1e-9 * seq.m2)
    # brute-force oracle
    assert np.allclose(merged.mean, x.mean(axis=0), rtol=1e-12)
    assert np.allclose(merged.variance, x.var(axis=0), rtol=1e-9)


def test_applied_outputs_converge_to_unit_scale(rng):
    x = rng.uniform(-3, 11, size=(100_000, 2))
    s = std_update_batch(RunningStats.empty(2), x)
    z = std_apply(s, x)
    n = x.shape[0]
    assert np.all(np.abs(z.mean(axis=0)) < 3 / np.sqrt(n))
    # standard error of the sample variance of a uniform variable is ~ sqrt(0.8 / n)
    assert np.all(np.abs(z.var(axis=0) - 1.0) < 3 * np.sqrt(0.8 / n))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        std_update(RunningStats.empty(2), [1.0])
    with pytest.raises(ValueError):
        std_merge(RunningStats.empty(2), RunningStats.empty(3))


def test_serialization_round_trip(rng):
    s = std_update_batch(RunningStats.empty(4), rng.normal(size=(50, 4)))
    back, end = RunningStats.from_bytes(s.to_bytes())
    assert back == s and end == len(s.to_bytes())


blocks = arrays(np.float64, st.tuples(st.integers(1, 20), st.just(2)),
                elements=st.floats(-1e3, 1e3))


@settings(max_examples=60, deadline=None)
@given(a=blocks, b=blocks, c=blocks)
def test_merge_associative(a, b, c):
    sa, sb, sc = (std_update_batch(RunningStats.empty(2), x) for x in (a, b, c))
    left = std_merge(std_merge(sa, sb), sc)
    right = std_merge(sa, std_merge(sb, sc))
    assert left.count == right.count
    assert np.allclose(left.mean, right.mean, rtol=1e-9, atol=1e-9)
    assert np.allclose(left.m2, right.m2, rtol=1e-7, atol=1e-6)
    assert np.all(left.m2 >= 0)


@settings(max_examples=60, deadline=None)
@given(x=arrays(np.float64, st.tuples(st.integers(1, 30), st.just(3)), elements=st.floats(-1e6, 1e6)))
def test_apply_never_nonfinite(x):
    s = std_update_batch(RunningStats.empty(3), x)
    assert np.all(np.isfinite(std_apply(s, x)))
