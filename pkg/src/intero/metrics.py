"""Run-log measurements: violation and recovery statistics, calibration,
abstention scoring, exploration efficiency, and safety-adjusted return.

Every function here is a pure function of parsed log records (dicts keyed by
column name), so anything computed in-run can be recomputed bit-for-bit from
the persisted CSV.
"""

from __future__ import annotations

import numpy as np

from .core import UsageError


def _col(records, key) -> np.ndarray:
    return np.asarray([r[key] for r in records], dtype=float)


def violation_stats(records) -> dict:
    """Soft-bound violation rate and mean homeostatic cost while violating."""
    if not records:
        raise UsageError("violation_stats needs at least one record")
    viol = _col(records, "soft_violation") > 0
    c_h = _col(records, "c_h")
    rate = float(viol.mean())
    severity = float(c_h[viol].mean()) if viol.any() else 0.0
    return {"rate": rate, "mean_severity": severity}


def recovery_time(records, event_steps, window: int = 10) -> list:
    """Steps from each event until the internal state holds inside soft
    bounds for `window` consecutive steps.

    The search stays inside the event's episode (internal state resets
    between episodes); a violation-free tail shorter than the window still
    counts as recovered. Never recovering yields the sentinel: the number of
    steps remaining in the episode.
    """
    if window < 1:
        raise UsageError("recovery window must be >= 1")
    steps = _col(records, "step").astype(int)
    episodes = _col(records, "episode").astype(int)
    clean = _col(records, "soft_violation") == 0
    out = []
    for t_p in event_steps:
        idx = int(np.searchsorted(steps, t_p))
        if idx >= len(records) or steps[idx] != t_p:
            raise UsageError(f"event step {t_p} not present in the log")
        ep = episodes[idx]
        end = idx
        while end < len(records) and episodes[end] == ep:
            end += 1
        found = None
        for i in range(idx, end):
            if clean[i:min(i + window, end)].all():
                found = i - idx
                break
        out.append(found if found is not None else end - idx)
    return out


def internal_variance(records, dim_names) -> dict:
    """Population variance (n divisor) of each internal dimension."""
    return {
        dim: float(np.var(_col(records, f"v_{dim}"))) for dim in dim_names
    }


def reliability(records, n_bins: int = 10, prob_key: str = "pred_top_prob",
                hit_key: str = "pred_top_hit"):
    """Equal-width confidence binning of top-outcome predictions.

    Returns per-bin mean confidence, empirical accuracy, and count (zeros
    for empty bins), or None when no records carry predictions."""
    rows = [r for r in records if r.get(prob_key) is not None]
    if not rows:
        return None
    conf = _col(rows, prob_key)
    hit = _col(rows, hit_key)
    bins = np.clip((conf * n_bins).astype(int), 0, n_bins - 1)
    bin_conf, bin_acc, bin_count = [], [], []
    for j in range(n_bins):
        in_bin = bins == j
        count = int(in_bin.sum())
        bin_count.append(count)
        bin_conf.append(float(conf[in_bin].mean()) if count else 0.0)
        bin_acc.append(float(hit[in_bin].mean()) if count else 0.0)
    return {"bin_conf": bin_conf, "bin_acc": bin_acc, "bin_count": bin_count}


def calibration(records, n_bins: int = 10, prob_key: str = "pred_top_prob",
                hit_key: str = "pred_top_hit"):
    """Expected and maximum calibration error of top-outcome predictions.

    Confidence is the model's top predictive probability; accuracy is whether
    that outcome occurred. Returns None when no records carry predictions.
    """
    rel = reliability(records, n_bins, prob_key, hit_key)
    if rel is None:
        return None
    n = sum(rel["bin_count"])
    ece = 0.0
    mce = 0.0
    for conf, acc, count in zip(rel["bin_conf"], rel["bin_acc"], rel["bin_count"]):
        if not count:
            continue
        gap = abs(acc - conf)
        ece += count / n * gap
        mce = max(mce, gap)
    return {"ece": float(ece), "mce": float(mce)}


def shift_windows(records) -> list:
    """Contiguous index ranges where the environment flags a shift."""
    flags = _col(records, "event_shift") > 0
    windows = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        elif not f and start is not None:
            windows.append((start, i))
            start = None
    if start is not None:
        windows.append((start, len(flags)))
    return windows


def abstention_scores(records) -> dict:
    """Abstentions scored as predictions of ground-truth shift windows."""
    abstained = _col(records, "abstained") > 0
    shifted = _col(records, "event_shift") > 0
    windows = shift_windows(records)
    precision = (
        float((abstained & shifted).sum() / abstained.sum()) if abstained.any() else None
    )
    recall = (
        float(np.mean([abstained[a:b].any() for a, b in windows])) if windows else None
    )
    return {"precision": precision, "recall": recall}


def exploration_stats(records, state_count: int, lambda_h: float,
                      cost_floor: float, goal_threshold: float = 1.0) -> dict:
    """Coverage, information gain per unit cost, and time to first goal."""
    if not records:
        raise UsageError("exploration_stats needs at least one record")
    states = {int(r["state"]) for r in records}
    ig = _col(records, "ig_ext") + _col(records, "ig_int")
    cost = np.maximum(
        _col(records, "c_h") * lambda_h + _col(records, "energy_cost"), cost_floor
    )
    r_task = _col(records, "r_task")
    goal_hits = np.flatnonzero(r_task >= goal_threshold)
    steps_to_goal = (
        int(records[goal_hits[0]]["step"]) if goal_hits.size else len(records)
    )
    return {
        "coverage": float(len(states) / state_count),
        "ig_per_cost": float(ig.sum() / cost.sum()),
        "steps_to_goal": steps_to_goal,
    }


def safety_adjusted_return(records, penalty: float) -> float:
    """Task return minus a penalty per soft-violating step."""
    if penalty < 0:
        raise UsageError("safety penalty must be nonnegative")
    viol = _col(records, "soft_violation") > 0
    return float(_col(records, "r_task").sum() - penalty * viol.sum())


def g_tau_correlation(records):
    """Pearson correlation between threat signal and effective temperature;
    the sign is the cheap check that threat actually modulates sampling."""
    g = _col(records, "g")
    tau = _col(records, "tau_effective")
    if g.std() == 0 or tau.std() == 0:
        return None
    return float(np.corrcoef(g, tau)[0, 1])


def summarize(
    records,
    *,
    dim_names,
    state_count: int,
    lambda_h: float,
    cost_floor: float,
    event_steps=(),
    recovery_window: int = 10,
    safety_penalty: float = 1.0,
    goal_threshold: float = 1.0,
) -> dict:
    """The full flat metrics map persisted as metrics.json."""
    out = {}
    vs = violation_stats(records)
    out["violation_rate"] = vs["rate"]
    out["violation_mean_severity"] = vs["mean_severity"]
    rec = recovery_time(records, event_steps, recovery_window)
    out["recovery_times"] = [int(x) for x in rec]
    out["recovery_time_mean"] = float(np.mean(rec)) if rec else None
    for dim, var in internal_variance(records, dim_names).items():
        out[f"internal_variance_{dim}"] = var
    cal = calibration(records)
    out["ece"] = cal["ece"] if cal else None
    out["mce"] = cal["mce"] if cal else None
    cal_int = calibration(records, prob_key="pred_top_prob_int",
                          hit_key="pred_top_hit_int")
    out["ece_internal"] = cal_int["ece"] if cal_int else None
    out["mce_internal"] = cal_int["mce"] if cal_int else None
    ab = abstention_scores(records)
    out["abstention_precision"] = ab["precision"]
    out["abstention_recall"] = ab["recall"]
    out["abstention_count"] = int((_col(records, "abstained") > 0).sum())
    ex = exploration_stats(records, state_count, lambda_h, cost_floor, goal_threshold)
    out["coverage"] = ex["coverage"]
    out["ig_per_cost"] = ex["ig_per_cost"]
    out["steps_to_goal"] = ex["steps_to_goal"]
    out["safety_adjusted_return"] = safety_adjusted_return(records, safety_penalty)
    out["g_tau_correlation"] = g_tau_correlation(records)
    out["shield_activations"] = int((_col(records, "shielded") > 0).sum())
    out["shield_faults"] = int((_col(records, "fault") > 0).sum())
    out["task_return"] = float(_col(records, "r_task").sum())
    return out
