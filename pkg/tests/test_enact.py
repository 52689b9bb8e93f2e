"""Information gain per internal cost: the exploration value channel."""

import numpy as np
import pytest

from intero.core import AugmentedState, ConfigError, UsageError, ViabilityVector
from intero.enact import (
    EnactConfig,
    exploration_channel,
    exploration_score,
    intrinsic_value,
    predicted_cost,
)
from intero.homeostat import homeostatic_cost
from intero.core import advance_mean
from intero.world_model import DirichletModel

S = AugmentedState


@pytest.fixture
def model2():
    m = DirichletModel(n_states=2, n_actions=3, n_dims=1, prior=0.5)
    # action 0 heavily sampled with a harmless drift, action 1 lightly
    # sampled with a harsh one, action 2 untouched
    for _ in range(25):
        m.observe(S(0, (0,)), 0, 1, [0.0])
    for _ in range(2):
        m.observe(S(0, (0,)), 1, 0, [-0.25])
    return m


def test_config_validation():
    EnactConfig(0.0)
    with pytest.raises(ConfigError):
        EnactConfig(-0.5)
    with pytest.raises(ConfigError):
        EnactConfig(1.0, cost_floor=0.0)


def test_intrinsic_value_composition(model2, bounds1, v_mid):
    cfg = EnactConfig(lambda_e=3.0)
    st = S(0, (0,))
    for a in range(3):
        want = model2.expected_info_gain(st, a) \
            + 3.0 * model2.expected_info_gain_internal(st, a)
        assert intrinsic_value(st, v_mid, a, model2, bounds1, cfg) == pytest.approx(want)
    # lambda_e = 0 leaves the external term only
    cfg0 = EnactConfig(lambda_e=0.0)
    assert intrinsic_value(st, v_mid, 1, model2, bounds1, cfg0) == pytest.approx(
        model2.expected_info_gain(st, 1)
    )


def test_unvisited_action_is_most_informative(model2, bounds1, v_mid):
    cfg = EnactConfig(lambda_e=1.0)
    st = S(0, (0,))
    vals = [intrinsic_value(st, v_mid, a, model2, bounds1, cfg) for a in range(3)]
    assert vals[2] > vals[1] > vals[0]


def test_predicted_cost_uses_mean_drift(model2, bounds1):
    st = S(0, (0,))
    v = ViabilityVector([0.45], ("e",))
    # action 0 drifts by 0: successor stays in band, cost 0
    assert predicted_cost(st, v, 0, model2, bounds1, lambda_h=2.0) == 0.0
    # action 1 drifts by -0.25: successor at 0.2 is below soft_lo
    want = 2.0 * homeostatic_cost(advance_mean(v, [-0.25], bounds1), bounds1)
    assert predicted_cost(st, v, 1, model2, bounds1, lambda_h=2.0) == pytest.approx(want)
    assert want > 0


def test_score_divides_by_floored_cost(model2, bounds1, v_mid):
    cfg = EnactConfig(lambda_e=1.0, cost_floor=0.05)
    st = S(0, (0,))
    iv = intrinsic_value(st, v_mid, 2, model2, bounds1, cfg)
    assert exploration_score(st, v_mid, 2, model2, bounds1, cfg, 0.0) \
        == pytest.approx(iv / 0.05)
    assert exploration_score(st, v_mid, 2, model2, bounds1, cfg, 0.5) \
        == pytest.approx(iv / 0.5)
    with pytest.raises(UsageError):
        exploration_score(st, v_mid, 2, model2, bounds1, cfg, -0.1)
    with pytest.raises(UsageError):
        exploration_score(st, v_mid, 2, model2, bounds1, cfg, float("inf"))


def test_channel_matches_per_action_scores(model2, bounds1):
    cfg = EnactConfig(lambda_e=2.0)
    st = S(0, (0,))
    v = ViabilityVector([0.4], ("e",))
    ch = exploration_channel(st, v, model2, bounds1, cfg, lambda_h=1.5)
    assert ch.shape == (3,)
    for a in range(3):
        cost = predicted_cost(st, v, a, model2, bounds1, 1.5)
        assert ch[a] == pytest.approx(
            exploration_score(st, v, a, model2, bounds1, cfg, cost)
        )


def test_costly_action_is_discounted(model2, bounds1):
    """Equal ignorance, unequal predicted cost: the cheap action wins."""
    m = DirichletModel(n_states=2, n_actions=2, n_dims=1, prior=0.5)
    for _ in range(4):
        m.observe(S(0, (0,)), 0, 1, [0.0])      # cheap: no drift
        m.observe(S(0, (0,)), 1, 1, [-0.3])     # dear: dives below soft_lo
    v = ViabilityVector([0.5], ("e",))
    ch = exploration_channel(S(0, (0,)), v, m, bounds1,
                             EnactConfig(lambda_e=1.0), lambda_h=2.0)
    assert ch[0] > ch[1]
