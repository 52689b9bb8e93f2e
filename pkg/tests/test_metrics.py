"""Log-derived measurements, each checked against hand-computed traces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intero.core import UsageError
from intero.metrics import (
    abstention_scores,
    calibration,
    exploration_stats,
    g_tau_correlation,
    internal_variance,
    recovery_time,
    reliability,
    safety_adjusted_return,
    shift_windows,
    summarize,
    violation_stats,
)


def rec(step=0, **kw):
    """One full log record with quiet defaults."""
    base = dict(
        step=step, episode=0, state=0, action=0, r_task=0.0, r_shaped=0.0,
        v_energy=0.5, c_h=0.0, margin=1.0, g=0.0, w_h=0.3, w_a=0.3, w_e=0.4,
        shielded=0, abstained=0, ig_ext=0.0, ig_int=0.0, r_e=0.0,
        event_perturb=0, event_shift=0, pred_prob=0.5, soft_violation=0,
        g_feat_boundary=0.0, g_feat_entropy=0.0, g_feat_pe=0.0,
        g_feat_violation=0.0, tau_effective=0.2, pred_top_prob=0.5,
        pred_top_hit=0, pred_top_prob_int=0.5, pred_top_hit_int=0,
        energy_cost=0.01, fault=0,
    )
    base.update(kw)
    return base


def trace(*viol, **kw):
    return [rec(step=i, soft_violation=v, **kw) for i, v in enumerate(viol)]


def test_violation_stats_hand_trace():
    records = [
        rec(0), rec(1, soft_violation=1, c_h=0.4),
        rec(2, soft_violation=1, c_h=0.2), rec(3),
    ]
    out = violation_stats(records)
    assert out["rate"] == pytest.approx(0.5)
    assert out["mean_severity"] == pytest.approx(0.3)
    assert violation_stats([rec(0)])["mean_severity"] == 0.0
    with pytest.raises(UsageError):
        violation_stats([])


def test_recovery_time_basic():
    records = trace(0, 0, 1, 1, 1, 0, 0, 0, 0, 0)
    assert recovery_time(records, [2], window=3) == [3]
    # a single clean step followed by a relapse doesn't count as recovery
    osc = trace(0, 0, 1, 1, 1, 0, 1, 0, 0, 0)
    assert recovery_time(osc, [2], window=2) == [5]
    assert recovery_time(osc, [2], window=3) == [5]


def test_recovery_time_tail_and_sentinel():
    # a violation-free tail shorter than the window still counts
    records = trace(0, 0, 0, 0, 0, 0, 0, 0, 1, 0)
    assert recovery_time(records, [8], window=5) == [1]
    # never recovering yields the steps remaining in the episode
    stuck = trace(1, 1, 1, 1, 1)
    assert recovery_time(stuck, [1], window=2) == [4]


def test_recovery_time_stays_inside_episode():
    records = trace(1, 1, 1, 1, 0, 0, 0, 0)
    for i, r in enumerate(records):
        r["episode"] = 0 if i < 4 else 1
    # episode 0 never recovers; the clean episode-1 tail must not count
    assert recovery_time(records, [0], window=2) == [4]


def test_recovery_time_validation():
    records = trace(0, 0, 0)
    with pytest.raises(UsageError):
        recovery_time(records, [7], window=2)
    with pytest.raises(UsageError):
        recovery_time(records, [0], window=0)


def test_internal_variance():
    records = [rec(i, v_energy=x) for i, x in enumerate([0.2, 0.4, 0.6])]
    out = internal_variance(records, ("energy",))
    assert out["energy"] == pytest.approx(np.var([0.2, 0.4, 0.6]))


def test_reliability_and_calibration_hand_binned():
    records = [
        rec(0, pred_top_prob=0.95, pred_top_hit=1),
        rec(1, pred_top_prob=0.95, pred_top_hit=0),
        rec(2, pred_top_prob=0.55, pred_top_hit=1),
        rec(3, pred_top_prob=0.05, pred_top_hit=0),
    ]
    rel = reliability(records)
    assert rel["bin_count"][9] == 2 and rel["bin_count"][5] == 1
    assert rel["bin_conf"][9] == pytest.approx(0.95)
    assert rel["bin_acc"][9] == pytest.approx(0.5)
    cal = calibration(records)
    assert cal["ece"] == pytest.approx((2 * 0.45 + 1 * 0.45 + 1 * 0.05) / 4)
    assert cal["mce"] == pytest.approx(0.45)
    assert calibration([]) is None
    assert reliability([]) is None


@settings(max_examples=60)
@given(
    data=st.lists(
        st.tuples(st.floats(min_value=0.0, max_value=1.0), st.booleans()),
        min_size=1, max_size=60,
    )
)
def test_ece_bounds_and_mce_dominates(data):
    records = [rec(i, pred_top_prob=p, pred_top_hit=int(h))
               for i, (p, h) in enumerate(data)]
    cal = calibration(records)
    assert 0.0 <= cal["ece"] <= 1.0
    assert cal["mce"] >= cal["ece"] - 1e-12


def test_shift_windows_edges():
    records = [rec(i, event_shift=f) for i, f in enumerate([1, 1, 0, 0, 1, 0, 1])]
    assert shift_windows(records) == [(0, 2), (4, 5), (6, 7)]
    assert shift_windows([rec(0)]) == []


def test_abstention_scores():
    flags = [0, 1, 1, 0, 0, 1, 1, 0]
    abst = [0, 1, 0, 1, 0, 0, 0, 0]
    records = [rec(i, event_shift=f, abstained=a)
               for i, (f, a) in enumerate(zip(flags, abst))]
    out = abstention_scores(records)
    # 2 abstentions, 1 inside a window; window 1 hit, window 2 missed
    assert out["precision"] == pytest.approx(0.5)
    assert out["recall"] == pytest.approx(0.5)
    none_out = abstention_scores([rec(0), rec(1)])
    assert none_out["precision"] is None and none_out["recall"] is None


def test_exploration_stats():
    records = [
        rec(0, state=3, ig_ext=0.2, ig_int=0.1, c_h=0.0, energy_cost=0.0),
        rec(1, state=4, ig_ext=0.1, ig_int=0.0, c_h=0.5, energy_cost=0.02),
        rec(2, state=3, r_task=5.0),
        rec(3, state=3, r_task=5.0),
    ]
    out = exploration_stats(records, state_count=10, lambda_h=2.0,
                            cost_floor=0.01, goal_threshold=5.0)
    assert out["coverage"] == pytest.approx(0.2)
    want = (0.2 + 0.1 + 0.1) / (0.01 + (1.0 + 0.02) + 0.01 + 0.01)
    assert out["ig_per_cost"] == pytest.approx(want)
    # first goal arrival only, reported as a step number
    assert out["steps_to_goal"] == 2
    # goal never reached: sentinel is the record count
    out = exploration_stats(records[:3], 10, 2.0, 0.01, goal_threshold=9.0)
    assert out["steps_to_goal"] == 3
    with pytest.raises(UsageError):
        exploration_stats([], 10, 2.0, 0.01)


def test_safety_adjusted_return():
    records = [
        rec(0, r_task=1.0), rec(1, soft_violation=1),
        rec(2, r_task=1.0, soft_violation=1), rec(3),
    ]
    assert safety_adjusted_return(records, 1.0) == pytest.approx(0.0)
    assert safety_adjusted_return(records, 0.5) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        safety_adjusted_return(records, -0.5)


def test_g_tau_correlation():
    records = [rec(i, g=g, tau_effective=t)
               for i, (g, t) in enumerate([(0.0, 0.4), (1.0, 0.3), (2.0, 0.2)])]
    assert g_tau_correlation(records) == pytest.approx(-1.0)
    flat = [rec(i, g=1.0, tau_effective=0.2) for i in range(3)]
    assert g_tau_correlation(flat) is None


def test_summarize_emits_the_full_key_set():
    records = trace(0, 1, 0, 0)
    out = summarize(records, dim_names=("energy",), state_count=5,
                    lambda_h=1.0, cost_floor=0.01, event_steps=[1],
                    recovery_window=2, safety_penalty=1.0, goal_threshold=1.0)
    want = {
        "violation_rate", "violation_mean_severity", "recovery_times",
        "recovery_time_mean", "internal_variance_energy", "ece", "mce",
        "ece_internal", "mce_internal", "abstention_precision",
        "abstention_recall", "abstention_count", "coverage", "ig_per_cost",
        "steps_to_goal", "safety_adjusted_return", "g_tau_correlation",
        "shield_activations", "shield_faults", "task_return",
    }
    assert set(out) == want
    assert out["recovery_times"] == [1]
    assert out["recovery_time_mean"] == 1.0


def test_summarize_round_trips_through_csv(tmp_path):
    from intero.harness import read_records, record_columns, write_records

    rng = np.random.default_rng(11)
    records = []
    for i in range(40):
        records.append(rec(
            step=i, state=int(rng.integers(5)), action=int(rng.integers(3)),
            r_task=float(np.round(rng.uniform(0, 2), 6)),
            v_energy=float(np.round(rng.uniform(0, 1), 6)),
            c_h=float(np.round(rng.uniform(0, 0.5), 6)),
            soft_violation=int(rng.random() < 0.3),
            abstained=int(rng.random() < 0.1),
            event_shift=int(10 <= i < 20),
            pred_top_prob=float(np.round(rng.uniform(0, 1), 6)),
            pred_top_hit=int(rng.random() < 0.5),
            g=float(np.round(rng.uniform(0, 2), 6)),
            tau_effective=float(np.round(rng.uniform(0.05, 0.4), 6)),
        ))
    kw = dict(dim_names=("energy",), state_count=5, lambda_h=1.5,
              cost_floor=0.01, event_steps=[12], recovery_window=4)
    direct = summarize(records, **kw)
    path = tmp_path / "records.csv"
    write_records(path, record_columns(("energy",)), records)
    reread = summarize(read_records(path), **kw)
    assert reread == direct
