"""Experiment orchestration: the per-step wiring of all modules, run
persistence, and the factorial ablation driver.

A run writes three artifacts into its directory — config.json (canonical
echo), records.csv (one row per step, fixed column order and number
formatting), metrics.json (computed from the re-parsed CSV, so recomputing
from disk reproduces it exactly). Determinism contract: (config, seed,
mask) fixes every output byte.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import allostat as al
from . import arbiter as ar
from . import enact as en
from . import homeostat as ho
from . import metrics as me
from .config import ExperimentConfig, from_dict, load_experiment
from .core import AugmentedState, ConfigError, RngStream, ViabilityVector
from .core import apply_internal_dynamics, hard_violation, soft_violation, viability_margin
from .envs import make_env
from .learner import QTable, bin_viability
from .world_model import DirichletModel

log = logging.getLogger("intero")

FULL_MASK_LABEL = "HAE"

_GOAL_THRESHOLDS = {"viability_grid": 1.0, "drift_bandit": 1.0, "costly_maze": 5.0}
SAFETY_PENALTY = 1.0

_INT_COLUMNS = {
    "step", "episode", "state", "action", "shielded", "abstained",
    "event_perturb", "event_shift", "soft_violation",
    "pred_top_hit", "pred_top_hit_int", "fault",
}


@dataclass(frozen=True)
class Mask:
    """Which regulatory modules are live; the shield is always on."""

    h: bool = True
    a: bool = True
    e: bool = True

    @property
    def label(self) -> str:
        return ("H" if self.h else "-") + ("A" if self.a else "-") + ("E" if self.e else "-")

    @staticmethod
    def from_label(label: str) -> "Mask":
        if len(label) != 3:
            raise ValueError(f"mask label must have 3 characters, got {label!r}")
        return Mask(label[0] == "H", label[1] == "A", label[2] == "E")


ALL_MASKS = tuple(
    Mask(h, a, e) for h, a, e in itertools.product((True, False), repeat=3)
)


def record_columns(dim_names) -> list:
    cols = ["step", "episode", "state", "action", "r_task", "r_shaped"]
    cols += [f"v_{d}" for d in dim_names]
    cols += [
        "c_h", "margin", "g", "w_h", "w_a", "w_e", "shielded", "abstained",
        "ig_ext", "ig_int", "r_e", "event_perturb", "event_shift", "pred_prob",
        "soft_violation", "g_feat_boundary", "g_feat_entropy", "g_feat_pe",
        "g_feat_violation", "tau_effective", "pred_top_prob", "pred_top_hit",
        "pred_top_prob_int", "pred_top_hit_int", "energy_cost", "fault",
    ]
    return cols


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def write_records(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def read_records(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        out = []
        for raw in reader:
            rec = {}
            for col, cell in zip(columns, raw):
                rec[col] = int(cell) if col in _INT_COLUMNS else float(cell)
            out.append(rec)
    return out


def realized_event_steps(rows: list) -> list:
    """Perturbation onsets as global record indices: rising edges of the
    event_perturb flag (the schedule replays every episode, and episodes may
    end early, so onsets are read off the trace rather than the schedule)."""
    steps = []
    for i, r in enumerate(rows):
        if not r["event_perturb"]:
            continue
        if i == 0 or not rows[i - 1]["event_perturb"] \
                or rows[i - 1]["episode"] != r["episode"]:
            steps.append(r["step"])
    return steps


# ----------------------------------------------------------------------
# the run loop

def run_experiment(
    cfg: ExperimentConfig,
    seed: int,
    outdir,
    mask: Mask = Mask(),
    baseline: str | None = None,
) -> Path:
    """Execute one run and persist it; returns the run directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if baseline not in (None, "random"):
        raise ValueError(f"unknown baseline {baseline!r}")

    env = make_env(cfg.env_kind, cfg.env_cfg, cfg.perturbations, cfg.drift_changes)
    bounds = cfg.bounds
    if bounds.n != len(env.dim_names):
        raise ConfigError(
            f"bounds describe {bounds.n} dims but env {cfg.env_kind} has "
            f"{len(env.dim_names)} ({', '.join(env.dim_names)})"
        )

    lambda_h = cfg.homeostat.lambda_h if mask.h else 0.0
    v_bins = cfg.learner_v_bins if mask.h else 1
    hcfg = ho.HomeostatConfig(lambda_h, cfg.homeostat.tau_min,
                              cfg.homeostat.tau_max, cfg.homeostat.mode)
    tau_mid = 0.5 * (hcfg.tau_min + hcfg.tau_max)
    acfg = cfg.allostat
    ecfg = cfg.enact
    arbcfg = cfg.arbiter

    model = DirichletModel(
        n_states=env.state_count,
        n_actions=env.action_count,
        n_dims=len(env.dim_names),
        prior=cfg.model_prior,
        pe_beta=cfg.model_pe_beta,
        drift_edges=cfg.model_drift_edges,
    )
    qtable = QTable(env.action_count, cfg.learner_alpha, cfg.learner_gamma_task)
    rng_policy = RngStream(seed, "policy")
    rng_allostat = RngStream(seed, "allostat")
    rng_dynamics = RngStream(seed, "dynamics")

    def binner(vec: ViabilityVector) -> tuple:
        return bin_viability(vec, bounds, v_bins)

    def base_tau(vec: ViabilityVector) -> float:
        return ho.temperature(vec, bounds, hcfg) if mask.h else tau_mid

    def rollout_policy(aug: AugmentedState, vec: ViabilityVector) -> np.ndarray:
        return ho.softmax_probs(qtable.q_row(aug), base_tau(vec))

    zeros = np.zeros(env.action_count)
    columns = record_columns(env.dim_names)
    rows = []
    pending = None
    global_step = 0

    for episode in range(cfg.episodes):
        state, init_v = env.reset(cfg.env_seed + 100003 * seed + episode)
        v = ViabilityVector(init_v, env.dim_names)
        for _ in range(cfg.episode_len):
            aug = AugmentedState(state, binner(v))
            if pending is not None:
                model.observe(*pending)
                pending = None

            q_row = qtable.q_row(aug)
            tau = base_tau(v)
            margin = viability_margin(v, bounds)
            c_h = ho.homeostatic_cost(v, bounds)

            if mask.a and baseline is None:
                signal = al.estimate_g(aug, v, rollout_policy, model, bounds,
                                       acfg, rng_allostat, binner)
                out = al.modulate(signal, acfg)
                threat = al.threat_vector(aug, v, model, bounds, acfg.feature_weights)
                r_a = -threat
                penalties = out.risk_penalty(threat)
                tau_eff = tau * out.tau_multiplier
                bonus = out.info_seek_bonus
                abstain = out.abstain
                g_val, g_feat = signal.g, signal.per_feature
            else:
                signal = al.AllostaticSignal(0.0, np.zeros(al.N_FEATURES), 0, 0)
                r_a = zeros
                penalties = None
                tau_eff = tau
                bonus = 0.0
                abstain = False
                g_val, g_feat = 0.0, signal.per_feature

            if mask.e and baseline is None:
                r_e = en.exploration_channel(aug, v, model, bounds, ecfg, lambda_h)
            else:
                r_e = zeros

            uncertainty = min(max(model.pe_ema, 0.0), 1.0)
            recovery = env.recovery_actions(state)

            if baseline == "random":
                weights = ar.ArbitrationWeights(1.0, 0.0, 0.0, True) \
                    if hard_violation(v, bounds) else ar.ArbitrationWeights(0.0, 0.0, 1.0, False)
                pool = sorted(recovery) if weights.shielded else list(range(env.action_count))
                action = int(pool[rng_policy.generator().integers(len(pool))])
                tau_eff = tau_mid
                abstained = False
            else:
                weights = ar.compute_weights(v, bounds, signal, uncertainty,
                                             arbcfg, info_seek_bonus=bonus)
                if weights.shielded:
                    tau_eff = hcfg.tau_min
                abstained = abstain
                if abstain and env.defer_action is not None and not weights.shielded:
                    action = env.defer_action
                else:
                    action = ar.select_action(
                        q_row, r_a, r_e, weights, tau_eff,
                        np.ones(env.action_count, dtype=bool), rng_policy,
                        recovery=sorted(recovery), tau_min=hcfg.tau_min,
                        penalties=penalties,
                    )

            probs, _ = model.predict(aug, action)
            top = int(np.argmax(probs))
            drift_pred = model.drift_predictive(aug, action)
            top_int = int(np.argmax(drift_pred))
            ig_ext = model.expected_info_gain(aug, action)
            ig_int = model.expected_info_gain_internal(aug, action)
            r_e_chosen = float(r_e[action])

            result = env.step(action, v)
            r_shaped = ho.shaped_reward(result.r_task, v, bounds, hcfg)
            realized_bin = model.drift_bin_index(result.drift)
            v_next = apply_internal_dynamics(v, result.drift, cfg.noise,
                                             rng_dynamics, bounds)
            aug_next = AugmentedState(result.state, binner(v_next))
            if baseline is None:
                qtable.td_update(aug, action, r_shaped, aug_next)
            pending = (aug, action, result.state, result.drift)

            row = {
                "step": global_step,
                "episode": episode,
                "state": state,
                "action": action,
                "r_task": result.r_task,
                "r_shaped": r_shaped,
                "c_h": c_h,
                "margin": margin,
                "g": g_val,
                "w_h": weights.w_h,
                "w_a": weights.w_a,
                "w_e": weights.w_e,
                "shielded": weights.shielded,
                "abstained": abstained,
                "ig_ext": ig_ext,
                "ig_int": ig_int,
                "r_e": r_e_chosen,
                "event_perturb": result.perturb,
                "event_shift": result.shift,
                "pred_prob": float(probs[result.state]),
                "soft_violation": soft_violation(v, bounds),
                "g_feat_boundary": float(g_feat[0]),
                "g_feat_entropy": float(g_feat[1]),
                "g_feat_pe": float(g_feat[2]),
                "g_feat_violation": float(g_feat[3]),
                "tau_effective": tau_eff,
                "pred_top_prob": float(probs[top]),
                "pred_top_hit": top == result.state,
                "pred_top_prob_int": float(drift_pred[top_int]),
                "pred_top_hit_int": top_int == realized_bin,
                "energy_cost": float(env.energy_costs[action]),
                "fault": False,
            }
            for dim, val in zip(env.dim_names, v.values):
                row[f"v_{dim}"] = float(val)
            bad = [k for k, x in row.items() if not np.isfinite(float(x))]
            if bad:
                raise RuntimeError(
                    f"non-finite value in column(s) {bad} at step {global_step}"
                )
            rows.append(row)

            v = v_next
            state = result.state
            global_step += 1
        log.info("episode %d/%d done (%s seed %d)", episode + 1, cfg.episodes,
                 mask.label, seed)

    if pending is not None:
        model.observe(*pending)

    echo = {
        "config": cfg.raw,
        "mask": mask.label,
        "seed": seed,
        "baseline": baseline,
        "env_kind": cfg.env_kind,
        "dim_names": list(env.dim_names),
        "state_count": env.state_count,
        "lambda_h": lambda_h,
        "cost_floor": ecfg.cost_floor,
        "event_steps": realized_event_steps(rows),
        "recovery_window": cfg.recovery_window,
        "goal_threshold": _GOAL_THRESHOLDS[cfg.env_kind],
    }
    with open(outdir / "config.json", "w") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
        fh.write("\n")

    write_records(outdir / "records.csv", columns, rows)
    records = read_records(outdir / "records.csv")
    summary = me.summarize(
        records,
        dim_names=env.dim_names,
        state_count=env.state_count,
        lambda_h=lambda_h,
        cost_floor=ecfg.cost_floor,
        event_steps=echo["event_steps"],
        recovery_window=cfg.recovery_window,
        safety_penalty=SAFETY_PENALTY,
        goal_threshold=echo["goal_threshold"],
    )
    with open(outdir / "metrics.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(outdir / "model.json", "w") as fh:
        json.dump(model.snapshot(), fh, sort_keys=True)
        fh.write("\n")
    with open(outdir / "qtable.json", "w") as fh:
        json.dump(qtable.snapshot(), fh, sort_keys=True)
        fh.write("\n")
    return outdir


# ----------------------------------------------------------------------
# ablation driver

def _ablate_worker(payload):
    raw, seed, outdir, label = payload
    try:
        cfg = from_dict(raw)
        run_experiment(cfg, seed, outdir, Mask.from_label(label))
        return (label, seed, None)
    except Exception as exc:  # noqa: BLE001 — partial failures are recorded
        return (label, seed, f"{type(exc).__name__}: {exc}")


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    return float(np.mean(vals)), float(np.std(vals))


def ablate(cfg: ExperimentConfig, n_seeds: int, outdir, jobs: int = 1) -> Path:
    """Run all 8 module masks across seeds; write summary and dominance tables."""
    if n_seeds < 2:
        raise ValueError("ablation needs at least 2 seeds")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    payloads = []
    for mask in ALL_MASKS:
        for seed in range(n_seeds):
            rundir = outdir / f"{mask.label}_s{seed}"
            payloads.append((cfg.raw, seed, rundir, mask.label))

    failures = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for label, seed, err in pool.map(_ablate_worker, payloads):
                if err:
                    failures.append((label, seed, err))
                    log.error("run %s seed %d failed: %s", label, seed, err)
    else:
        for payload in payloads:
            label, seed, err = _ablate_worker(payload)
            if err:
                failures.append((label, seed, err))
                log.error("run %s seed %d failed: %s", label, seed, err)

    per_mask = {}
    metric_names = []
    for mask in ALL_MASKS:
        rows = {}
        for seed in range(n_seeds):
            path = outdir / f"{mask.label}_s{seed}" / "metrics.json"
            if not path.exists():
                continue
            with open(path) as fh:
                rows[seed] = json.load(fh)
        per_mask[mask.label] = rows
        for m in rows.values():
            for name in m:
                if name not in metric_names and not isinstance(m[name], list):
                    metric_names.append(name)

    env_kind = cfg.env_kind
    with open(outdir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["env", "mask"]
        for name in metric_names:
            header += [f"{name}_mean", f"{name}_std"]
        writer.writerow(header)
        for mask in ALL_MASKS:
            rows = per_mask[mask.label]
            line = [env_kind, mask.label]
            for name in metric_names:
                mean, std = _mean_std([m.get(name) for m in rows.values()])
                line += ["" if mean is None else _fmt(mean),
                         "" if std is None else _fmt(std)]
            writer.writerow(line)

    full = per_mask[FULL_MASK_LABEL]
    with open(outdir / "dominance.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["env", "mask", "full_mean", "reduced_mean",
                         "mean_diff", "win_fraction", "full_dominates"])
        for mask in ALL_MASKS:
            if mask.label == FULL_MASK_LABEL:
                continue
            reduced = per_mask[mask.label]
            paired = [
                (full[s]["safety_adjusted_return"], reduced[s]["safety_adjusted_return"])
                for s in sorted(set(full) & set(reduced))
            ]
            if not paired:
                writer.writerow([env_kind, mask.label, "", "", "", "", ""])
                continue
            f_mean = float(np.mean([p[0] for p in paired]))
            r_mean = float(np.mean([p[1] for p in paired]))
            wins = float(np.mean([p[0] > p[1] for p in paired]))
            writer.writerow([
                env_kind, mask.label, _fmt(f_mean), _fmt(r_mean),
                _fmt(f_mean - r_mean), _fmt(wins), int(f_mean > r_mean),
            ])

    if failures:
        with open(outdir / "failures.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["mask", "seed", "error"])
            for label, seed, err in failures:
                writer.writerow([label, seed, err])
    return outdir


def setup_logging():
    level = os.environ.get("INTERO_LOG_LEVEL", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ValueError(
            f"INTERO_LOG_LEVEL must be one of {sorted(levels)}, got {level!r}"
        )
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


__all__ = [
    "Mask", "ALL_MASKS", "FULL_MASK_LABEL", "run_experiment", "ablate",
    "read_records", "write_records", "record_columns", "realized_event_steps",
    "load_experiment", "setup_logging",
]
