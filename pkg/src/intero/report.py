"""Post-hoc reporting: metric tables and self-contained vector plots.

Reads whatever run directories exist under the given path and emits
report.md plus four SVG figures. Regeneration from the same inputs is
byte-identical: fixed SVG hash salt, no embedded timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from . import metrics as me  # noqa: E402
from .core import UsageError  # noqa: E402
from .harness import FULL_MASK_LABEL, read_records  # noqa: E402

plt.rcParams["svg.hashsalt"] = "intero"
plt.rcParams["figure.figsize"] = (7.0, 4.0)

_SVG_META = {"Date": None}

CALIBRATION_NOTE = (
    "Calibration target: a prediction counts as correct when the model's "
    "top-probability outcome occurred. This is one concrete choice among "
    "several reasonable ones; every calibration number below uses it."
)


def _find_runs(runs_dir: Path) -> list:
    if (runs_dir / "records.csv").exists():
        return [runs_dir]
    runs = sorted(
        d for d in runs_dir.iterdir()
        if d.is_dir() and (d / "records.csv").exists() and (d / "metrics.json").exists()
    )
    return runs


def _load_run(run_dir: Path) -> dict:
    with open(run_dir / "config.json") as fh:
        echo = json.load(fh)
    with open(run_dir / "metrics.json") as fh:
        m = json.load(fh)
    return {"dir": run_dir, "echo": echo, "metrics": m}


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return format(x, ".4g")
    return str(x)


# ----------------------------------------------------------------------
# figures

def plot_v_trajectories(records, echo, path: Path):
    dims = echo["dim_names"]
    bounds = echo["config"]["bounds"]
    fig, axes = plt.subplots(len(dims), 1, sharex=True, squeeze=False)
    steps = [r["step"] for r in records]
    for i, dim in enumerate(dims):
        ax = axes[i][0]
        vals = [r[f"v_{dim}"] for r in records]
        ax.axhspan(bounds["soft_lo"][i], bounds["soft_hi"][i],
                   color="tab:green", alpha=0.15, lw=0)
        ax.axhline(bounds["hard_lo"][i], color="tab:red", ls="--", lw=0.8)
        ax.axhline(bounds["hard_hi"][i], color="tab:red", ls="--", lw=0.8)
        ax.plot(steps, vals, lw=0.9, color="tab:blue")
        for t in echo.get("event_steps", []):
            ax.axvline(t, color="tab:orange", lw=0.7, alpha=0.7)
        ax.set_ylabel(dim)
    for a, b in me.shift_windows(records):
        for row in axes:
            row[0].axvspan(records[a]["step"], records[b - 1]["step"] + 1,
                           color="tab:purple", alpha=0.08, lw=0)
    axes[-1][0].set_xlabel("step")
    fig.suptitle("internal state with soft band, hard limits, events")
    _save(fig, path)


def plot_signals(records, path: Path):
    steps = [r["step"] for r in records]
    fig, (ax_g, ax_w) = plt.subplots(2, 1, sharex=True)
    ax_g.plot(steps, [r["g"] for r in records], lw=0.9, color="tab:red")
    ax_g.set_ylabel("threat signal g")
    for key, color in (("w_h", "tab:blue"), ("w_a", "tab:orange"), ("w_e", "tab:green")):
        ax_w.plot(steps, [r[key] for r in records], lw=0.9, label=key, color=color)
    ax_w.set_ylim(-0.05, 1.05)
    ax_w.set_ylabel("arbitration weights")
    ax_w.set_xlabel("step")
    ax_w.legend(loc="upper right", fontsize=8)
    fig.suptitle("anticipatory signal and channel weights")
    _save(fig, path)


def plot_reliability(records, path: Path, n_bins: int = 10):
    rel = me.reliability(records, n_bins)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot([0, 1], [0, 1], color="grey", ls="--", lw=0.8)
    if rel is not None:
        centers = [(j + 0.5) / n_bins for j in range(n_bins)]
        width = 1.0 / n_bins
        ax.bar(centers, rel["bin_acc"], width=width * 0.9, color="tab:blue",
               alpha=0.8, label="empirical accuracy")
        ax.plot(centers, rel["bin_conf"], "o-", color="tab:orange", ms=3,
                lw=0.9, label="mean confidence")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("predicted probability of top outcome")
    ax.set_ylabel("observed frequency")
    ax.legend(loc="upper left", fontsize=8)
    fig.suptitle("reliability diagram (external transitions)")
    _save(fig, path)


def plot_ablation_returns(runs_dir: Path, runs, path: Path):
    labels, means = [], []
    summary = runs_dir / "summary.csv"
    if summary.exists():
        with open(summary, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                cell = row.get("safety_adjusted_return_mean", "")
                labels.append(row["mask"])
                means.append(float(cell) if cell else np.nan)
    else:
        grouped: dict = {}
        for run in runs:
            grouped.setdefault(run["echo"].get("mask", "?"), []).append(
                run["metrics"].get("safety_adjusted_return")
            )
        for label in sorted(grouped):
            vals = [v for v in grouped[label] if v is not None]
            labels.append(label)
            means.append(float(np.mean(vals)) if vals else np.nan)
    fig, ax = plt.subplots()
    colors = ["tab:blue" if lb == FULL_MASK_LABEL else "tab:grey" for lb in labels]
    ax.bar(range(len(labels)), means, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_ylabel("mean safety-adjusted return")
    fig.suptitle("return adjusted for violations, by module mask")
    _save(fig, path)


# ----------------------------------------------------------------------
# report

def _metric_table(runs) -> list:
    names = []
    for run in runs:
        for name, val in run["metrics"].items():
            if not isinstance(val, list) and name not in names:
                names.append(name)
    lines = ["| metric | " + " | ".join(
        f"{r['echo'].get('mask', '?')}_s{r['echo'].get('seed', '?')}" for r in runs
    ) + " |"]
    lines.append("|" + "---|" * (len(runs) + 1))
    for name in names:
        cells = [_fmt(r["metrics"].get(name)) for r in runs]
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    return lines


def _dominance_section(runs_dir: Path) -> list:
    path = runs_dir / "dominance.csv"
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    lines = ["", "## Full agent vs reduced variants", ""]
    lines.append("| mask | full mean | reduced mean | diff | win fraction | full dominates |")
    lines.append("|---|---|---|---|---|---|")
    failed = []
    for row in rows:
        lines.append(
            f"| {row['mask']} | {row['full_mean']} | {row['reduced_mean']} | "
            f"{row['mean_diff']} | {row['win_fraction']} | {row['full_dominates']} |"
        )
        if row["full_dominates"] not in ("1", ""):
            failed.append(row["mask"])
        if row["full_dominates"] == "":
            failed.append(f"{row['mask']} (missing runs)")
    if failed:
        lines.append("")
        lines.append(
            "**Dominance does not hold** for: " + ", ".join(sorted(set(failed)))
            + ". The full agent's mean safety-adjusted return failed to exceed "
            "these variants; that is a substantive negative result, not a "
            "harness failure."
        )
    else:
        lines.append("")
        lines.append(
            "The full agent's mean safety-adjusted return exceeds every "
            "reduced variant on this configuration."
        )
    return lines


def _criteria_section(runs) -> list:
    """The four operational criteria, each mapped to measured quantities."""
    by_mask = {r["echo"].get("mask"): r for r in runs}
    ref = by_mask.get(FULL_MASK_LABEL, runs[0])
    m = ref["metrics"]
    corr = m.get("g_tau_correlation")
    modulation = (
        "not measurable (constant signal or temperature)"
        if corr is None
        else f"correlation(g, tau) = {_fmt(corr)} "
        + ("(cooler sampling under threat)" if corr < 0 else "(warmer sampling under threat)")
    )
    return [
        "",
        "## Operational criteria",
        "",
        f"Reference run: `{ref['dir'].name}`.",
        "",
        "1. **Internal state estimation** — drift-model calibration: "
        f"ECE {_fmt(m.get('ece_internal'))}, MCE {_fmt(m.get('mce_internal'))}.",
        "2. **Viability regulation** — violation rate "
        f"{_fmt(m.get('violation_rate'))}, mean recovery time "
        f"{_fmt(m.get('recovery_time_mean'))} steps.",
        f"3. **Uncertainty-sensitive modulation** — {modulation}.",
        "4. **Internally modulated goal adjustment** — "
        f"{_fmt(m.get('abstention_count'))} abstentions, "
        f"{_fmt(m.get('shield_activations'))} shield activations, "
        f"{_fmt(m.get('shield_faults'))} shield faults.",
    ]


def report(runs_dir) -> Path:
    """Emit report.md and the four standard figures; returns the report path."""
    runs_dir = Path(runs_dir)
    if not runs_dir.is_dir():
        raise UsageError(f"not a directory: {runs_dir}")
    run_dirs = _find_runs(runs_dir)
    if not run_dirs:
        raise UsageError(f"no completed runs under {runs_dir}")
    runs = [_load_run(d) for d in run_dirs]

    primary = next(
        (r for r in runs if r["echo"].get("mask") == FULL_MASK_LABEL), runs[0]
    )
    records = read_records(primary["dir"] / "records.csv")

    out = runs_dir if runs_dir != primary["dir"] else runs_dir
    plot_v_trajectories(records, primary["echo"], out / "v_trajectories.svg")
    plot_signals(records, out / "signals.svg")
    plot_reliability(records, out / "reliability.svg")
    plot_ablation_returns(runs_dir, runs, out / "ablation_returns.svg")

    lines = ["# Run report", ""]
    lines.append(f"Runs analyzed: {len(runs)} (under `{runs_dir}`).")
    lines.append("")
    lines.append(CALIBRATION_NOTE)
    lines.append("")
    lines.append("## Metrics")
    lines.append("")
    lines += _metric_table(runs[:12])
    if len(runs) > 12:
        lines.append("")
        lines.append(f"(first 12 of {len(runs)} runs shown; see summary.csv)")
    lines += _criteria_section(runs)
    lines += _dominance_section(runs_dir)
    lines += [
        "",
        "## Figures",
        "",
        "- `v_trajectories.svg` — internal state vs bounds, with events",
        "- `signals.svg` — threat signal and arbitration weights",
        "- `reliability.svg` — calibration of transition predictions",
        "- `ablation_returns.svg` — safety-adjusted return by mask",
        "",
    ]
    path = out / "report.md"
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    return path
