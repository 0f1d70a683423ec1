import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavaoi.sensing import (InfeasibleError, SensingParams, cycle_success_prob, min_repetitions,
                            sample_success, single_attempt_prob)

SP = SensingParams()


def test_single_attempt_examples():
    assert single_attempt_prob(0.0, SP) == 1.0
    assert single_attempt_prob(100.0, SP) == pytest.approx(math.exp(-1), abs=1e-5)
    assert single_attempt_prob(80.0, SP) == pytest.approx(single_attempt_prob(40.0, SP) ** 2)


def test_cycle_success_examples():
    assert cycle_success_prob(0.5, 7) == pytest.approx(0.9921875)
    assert cycle_success_prob(1.0, 4) == 1.0
    assert cycle_success_prob(0.37, 1) == pytest.approx(0.37)


def test_min_repetitions_examples():
    assert min_repetitions(0.5, 0.99) == 7
    assert min_repetitions(0.1, 0.9) == 22
    assert min_repetitions(0.95, 0.9) == 1


def test_min_repetitions_zero_probability_is_infeasible():
    with pytest.raises(InfeasibleError):
        min_repetitions(0.0, 0.9)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(1e-3, 1 - 1e-6))
def test_min_repetitions_is_minimal(p, p_th):
    w = min_repetitions(p, p_th)
    assert cycle_success_prob(p, w) >= p_th
    assert w == 1 or cycle_success_prob(p, w - 1) < p_th


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 50))
def test_success_monotone_in_attempts(p, w):
    assert cycle_success_prob(p, w + 1) >= cycle_success_prob(p, w)


def test_sampling_edges_and_mean():
    rng = np.random.default_rng(0)
    assert sample_success(1.0, rng) and not sample_success(0.0, rng)
    draws = [sample_success(0.3, rng) for _ in range(100_000)]
    assert np.mean(draws) == pytest.approx(0.3, abs=0.01)


def test_data_volume_scales_with_attempts():
    assert SP.data_bits(3) == pytest.approx(3 * SP.data_per_attempt)
