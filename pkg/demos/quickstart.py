"""Run a short grid experiment and read the results back.

This walks the whole loop once: load a config, run it, and pull the
headline numbers out of the persisted artifacts. Everything the run
produced lives under out/quickstart afterwards -- records.csv is the
full step log, metrics.json the derived summary.

Usage: python demos/quickstart.py
"""

import copy
import json
from pathlib import Path

from intero.config import from_dict, load_experiment
from intero.harness import run_experiment

ROOT = Path(__file__).resolve().parent.parent

cfg = load_experiment(ROOT / "configs" / "grid.toml")

# trim the shipped config so this finishes in a few seconds
raw = copy.deepcopy(cfg.raw)
raw["env"]["episodes"] = 3
raw["env"]["episode_len"] = 150
cfg = from_dict(raw)

out = run_experiment(cfg, seed=0, outdir=ROOT / "out" / "quickstart")
print(f"run artifacts in {out}/")

metrics = json.loads((out / "metrics.json").read_text())
print()
print(f"task return             {metrics['task_return']:8.2f}")
print(f"safety-adjusted return  {metrics['safety_adjusted_return']:8.2f}")
print(f"soft-violation rate     {metrics['violation_rate']:8.3f}")
print(f"mean recovery time      {metrics['recovery_time_mean']:8.1f} steps")
print(f"shield activations      {metrics['shield_activations']:8d}")
print(f"state coverage          {metrics['coverage']:8.3f}")

# the threat signal should cool sampling: correlation(g, tau) < 0
corr = metrics["g_tau_correlation"]
print(f"corr(threat, temp)      {corr:8.3f}"
      + ("  (threat cools the policy)" if corr and corr < 0 else ""))

print()
print("next: python -m intero.cli report --runs", out)
