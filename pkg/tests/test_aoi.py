import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavaoi.aoi import (EXPECTED, SAMPLED, AoiLedger, SequencingError, UpdateRecord, aoi_gain,
                        approx_age_before_update, exact_age_before_update, expected_total_aoi, replay,
                        total_aoi, trace_rows)


def rec(task, completion, sense_end, P, success=None):
    return UpdateRecord(task, 0, 0, sense_end, completion, completion, 1, P, success)


def test_ticks_from_zero():
    led = AoiLedger(2, 10).run_to(5)
    np.testing.assert_array_equal(led.ages[:, 5], [5, 5])


def test_never_updated_total_is_triangular():
    T = 37
    assert total_aoi(AoiLedger(1, T).run_to(T)) == T * (T + 1) / 2


def test_update_recursion_examples():
    led = AoiLedger(1, 30).run_to(20)
    led.ages[0, 19] = 19.0
    led.apply_update(0, rec(1, 20, 15, 0.8))
    assert led.ages[0, 20] == pytest.approx(0.8 * 5 + 0.2 * 20)
    led = AoiLedger(1, 30).run_to(10)
    led.apply_update(0, rec(1, 10, 6, 1.0))
    assert led.ages[0, 10] == 4
    led = AoiLedger(1, 30).run_to(10)
    led.apply_update(0, rec(1, 10, 6, 0.0))
    assert led.ages[0, 10] == 10


def test_sampled_with_zero_probability_is_tick_only(rng):
    T = 50
    led = replay(1, T, [rec(1, 20, 10, 0.0), rec(1, 40, 30, 0.0)], SAMPLED, rng)
    assert total_aoi(led) == T * (T + 1) / 2


def test_out_of_order_updates_rejected():
    led = AoiLedger(1, 10).run_to(3)
    with pytest.raises(SequencingError):
        led.apply_update(0, rec(1, 5, 2, 1.0))
    with pytest.raises(SequencingError):
        led.tick(5)


def test_gain_examples():
    assert aoi_gain(100, 100, 0, 10, 1.0, 20).aoi_gain == 0
    g = aoi_gain(0, 100, 0, 10, 1.0, 20)
    assert (g.aoi_gain, g.avg_gain) == (1000, 50)


def test_total_linearity():
    T = 40
    one = total_aoi(replay(1, T, [rec(1, 12, 5, 0.7)]))
    two = total_aoi(replay(2, T, [rec(1, 12, 5, 0.7), rec(2, 12, 5, 0.7)]))
    assert two == pytest.approx(2 * one)
    assert total_aoi(AoiLedger(3, T)) == 0


updates = st.lists(st.tuples(st.integers(1, 3), st.integers(2, 200), st.integers(1, 30),
                             st.floats(0.0, 1.0)), max_size=12)


@settings(max_examples=150, deadline=None)
@given(updates)
def test_closed_form_matches_ledger(ups):
    T = 200
    seen, recs, tuples = set(), [], []
    for task, c, back, P in ups:
        if (task, c) in seen:
            continue
        seen.add((task, c))
        e = max(0, c - back)
        recs.append(rec(task, c, e, P))
        tuples.append((task, c, e, P))
    assert expected_total_aoi(3, T, tuples) == pytest.approx(total_aoi(replay(3, T, recs)), rel=1e-12)


def test_telescoped_reduction_identity():
    """Total reduction = sum_k P_k (e_k - E[last end]) (T + 1 - c_k)."""
    T = 300
    ups = [(1, 50, 30, 0.9), (1, 120, 100, 0.8), (1, 260, 240, 0.95)]
    last, red = 0.0, 0.0
    for _, c, e, P in ups:
        red += P * (e - last) * (T + 1 - c)
        last = P * e + (1 - P) * last
    assert T * (T + 1) / 2 - expected_total_aoi(1, T, ups) == pytest.approx(red)


def test_exact_vs_approximate_age_term():
    ends = [100, 220, 330]
    for P in (0.99, 0.995, 0.999):
        probs = [P] * 3
        exact = exact_age_before_update(ends, probs)
        approx = approx_age_before_update(ends)
        assert abs(exact - approx) / exact <= 2 * (1 - P)


def test_expected_ledger_is_mean_of_sampled():
    T = 120
    recs = [rec(1, 40, 20, 0.6), rec(1, 90, 70, 0.5), rec(2, 60, 30, 0.3)]
    expected = total_aoi(replay(2, T, recs))
    rng = np.random.default_rng(7)
    samples = [total_aoi(replay(2, T, recs, SAMPLED, rng)) for _ in range(4000)]
    assert abs(np.mean(samples) - expected) <= 4 * np.std(samples) / np.sqrt(len(samples))


def test_trace_rows_shape_and_events():
    led = replay(2, 5, [rec(1, 3, 1, 1.0)])
    rows = trace_rows(led, {(3, 1): "update_done"})
    assert len(rows) == 2 * 6
    assert (3, 1, 2.0, "update_done") in rows
    assert all(r[3] == "none" for r in rows if (r[0], r[1]) != (3, 1))
