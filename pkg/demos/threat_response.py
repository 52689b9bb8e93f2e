"""How the anticipatory channel reacts as the internal state degrades.

A tiny hand-built world: action 0 bleeds energy, action 1 is neutral.
We slide the energy level from comfortable to nearly violating and watch
the threat estimate g rise, the sampling temperature cool, and -- close
to the edge -- the abstention flag trip.

Usage: python demos/threat_response.py
"""

import numpy as np

from intero.allostat import AllostatConfig, estimate_g, modulate
from intero.core import (
    AugmentedState,
    RngStream,
    ViabilityBounds,
    ViabilityVector,
    viability_margin,
)
from intero.learner import bin_viability
from intero.world_model import DirichletModel

bounds = ViabilityBounds(
    soft_lo=[0.3], soft_hi=[0.7], hard_lo=[0.0], hard_hi=[1.0],
    weight_lo=[0.3], weight_hi=[0.3], rho=[1.0],
)

# teach the model what each action does to the body, at every energy bin,
# so the threat sweep below reflects boundary proximity rather than ignorance
model = DirichletModel(n_states=2, n_actions=2, n_dims=1, prior=0.5)
for b in range(3):
    for _ in range(25):
        model.observe(AugmentedState(0, (b,)), 0, 1, [-0.15])  # risky
        model.observe(AugmentedState(0, (b,)), 1, 0, [0.0])    # safe
        model.observe(AugmentedState(1, (b,)), 0, 0, [-0.15])
        model.observe(AugmentedState(1, (b,)), 1, 1, [0.0])

cfg = AllostatConfig(horizon=3, gamma_allo=0.8, n_rollouts=1500,
                     abstain_threshold=2.5, risk_coeff=0.5)
binner = lambda vec: bin_viability(vec, bounds, 3)  # noqa: E731
policy = lambda aug, vec: np.full(2, 0.5)  # noqa: E731

print(f"{'energy':>8} {'margin':>8} {'threat g':>10} "
      f"{'tau mult':>9} {'abstain':>8}")
for energy in (0.50, 0.40, 0.30, 0.20, 0.10):
    v = ViabilityVector([energy], ("energy",))
    sig = estimate_g(AugmentedState(0, binner(v)), v, policy, model, bounds,
                     cfg, RngStream(7, "demo"), binner)
    out = modulate(sig, cfg)
    print(f"{energy:8.2f} {viability_margin(v, bounds):8.2f} {sig.g:10.3f} "
          f"{out.tau_multiplier:9.3f} {str(out.abstain):>8}")

print()
print("closer to the bound: larger g, cooler sampling, finally abstention.")
