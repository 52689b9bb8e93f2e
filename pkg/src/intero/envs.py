"""Three desk-scale environments exercising the three regulatory stressors.

* viability_grid — a foraging gridworld where staying alive (energy, thermal
  load) competes with task reward, under scheduled perturbations.
* drift_bandit — a non-stationary bandit with payout distributions that move
  at change points, for calibration and abstention behavior.
* costly_maze — two rooms behind hidden doors, a costly probe action that
  disambiguates them, and one room with noisy internal dynamics, for
  cost-aware exploration.

Environments own their internal randomness (one seeded stream) and are
deterministic given (seed, action history). They emit a per-step internal
drift vector; the run loop — not the environment — integrates it into the
agent's internal state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, RngStream, UsageError, ViabilityVector

PERTURBATION_KINDS = ("energy_drain_spike", "sensor_noise_burst", "resource_lockout")
DRIFT_KINDS = ("abrupt", "gradual")


# ----------------------------------------------------------------------
# schedules

@dataclass(frozen=True)
class PerturbationEvent:
    step: int
    kind: str
    magnitude: float
    duration: int

    def __post_init__(self):
        if self.step < 0:
            raise ConfigError("perturbation step must be >= 0")
        if self.kind not in PERTURBATION_KINDS:
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if not (np.isfinite(self.magnitude) and self.magnitude >= 0):
            raise ConfigError("perturbation magnitude must be nonnegative")
        if int(self.duration) != self.duration or self.duration < 1:
            raise ConfigError("perturbation duration must be >= 1")

    def active(self, t: int) -> bool:
        return self.step <= t < self.step + self.duration


@dataclass(frozen=True)
class PerturbationSchedule:
    events: tuple[PerturbationEvent, ...] = ()

    def __post_init__(self):
        events = tuple(self.events)
        steps = [e.step for e in events]
        if steps != sorted(steps) or len(set(steps)) != len(steps):
            raise ConfigError("perturbation steps must be strictly increasing")
        object.__setattr__(self, "events", events)

    def active(self, t: int, kind: str | None = None):
        return [e for e in self.events if e.active(t) and (kind is None or e.kind == kind)]


@dataclass(frozen=True)
class DriftChange:
    step: int
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.step < 0:
            raise ConfigError("drift change step must be >= 0")
        if self.kind not in DRIFT_KINDS:
            raise ConfigError(f"unknown drift kind {self.kind!r}")


@dataclass(frozen=True)
class DriftSchedule:
    change_points: tuple[DriftChange, ...] = ()

    def __post_init__(self):
        cps = tuple(self.change_points)
        steps = [c.step for c in cps]
        if steps != sorted(steps) or len(set(steps)) != len(steps):
            raise ConfigError("drift change steps must be strictly increasing")
        object.__setattr__(self, "change_points", cps)


def parse_perturbations(raw) -> PerturbationSchedule:
    """Build a schedule from config records [{step, kind, magnitude, duration}]."""
    events = []
    for rec in raw or []:
        try:
            events.append(
                PerturbationEvent(
                    int(rec["step"]), str(rec["kind"]),
                    float(rec.get("magnitude", 0.0)), int(rec.get("duration", 1)),
                )
            )
        except KeyError as exc:
            raise ConfigError(f"perturbation event missing key {exc}") from None
    return PerturbationSchedule(tuple(events))


def parse_drift_changes(raw) -> DriftSchedule:
    cps = []
    for rec in raw or []:
        try:
            extra = {k: v for k, v in rec.items() if k not in ("step", "kind")}
            cps.append(DriftChange(int(rec["step"]), str(rec["kind"]), extra))
        except KeyError as exc:
            raise ConfigError(f"drift change missing key {exc}") from None
    return DriftSchedule(tuple(cps))


# ----------------------------------------------------------------------
# shared step interface

@dataclass(frozen=True)
class StepResult:
    state: int
    r_task: float
    drift: np.ndarray
    perturb: bool = False
    shift: bool = False


class Env:
    """Shared environment interface; see module docstring for instances."""

    action_count: int
    state_count: int
    dim_names: tuple[str, ...]
    energy_costs: np.ndarray
    defer_action: int | None = None

    def reset(self, seed: int) -> tuple[int, np.ndarray]:
        """Start an episode; returns (initial state id, initial internal values)."""
        raise NotImplementedError

    def step(self, action: int, v: ViabilityVector) -> StepResult:
        raise NotImplementedError

    def recovery_actions(self, state: int) -> frozenset:
        raise NotImplementedError

    def _check_action(self, action: int):
        if not (0 <= action < self.action_count):
            raise UsageError(f"action {action} out of range [0, {self.action_count})")

    def _audit_recovery(self):
        for s in range(self.state_count):
            if not self.recovery_actions(s):
                raise ConfigError(f"state {s} has no recovery action")


# ----------------------------------------------------------------------
# viability_grid

UP, DOWN, LEFT, RIGHT, STAY, EAT, DASH = range(7)
_MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1), STAY: (0, 0)}

_GRID_DEFAULTS = dict(
    size=7,
    start=[0, 0],
    goal=[6, 6],
    food=[[1, 5], [5, 1]],
    hazards=[[3, 2], [3, 3], [3, 4]],
    init_v=[0.8, 0.0],
    dash=False,
    eat_gain=0.3,
)


class ViabilityGrid(Env):
    """Foraging gridworld over v = (energy, thermal).

    Energy drains a little every step and is restored by eating at a food
    cell; thermal load builds on hazard cells and decays toward zero
    elsewhere. Task reward is paid on each fresh arrival at the goal cell.
    The optional dash action covers two steps toward the goal at a steep
    energy price.
    """

    dim_names = ("energy", "thermal")

    def __init__(self, cfg: dict, perturbations: PerturbationSchedule = PerturbationSchedule(),
                 drift_schedule: DriftSchedule = DriftSchedule()):
        c = dict(_GRID_DEFAULTS)
        c.update(cfg or {})
        self.size = int(c["size"])
        if self.size < 3:
            raise ConfigError("grid size must be at least 3")
        self.start = self._cell(c["start"])
        self.base_goal = self._cell(c["goal"])
        self.goal = self.base_goal
        self.base_food = tuple(self._cell(f) for f in c["food"])
        self.hazards = frozenset(self._cell(h) for h in c["hazards"])
        if not self.base_food:
            raise ConfigError("grid needs at least one food cell")
        if not self.hazards:
            raise ConfigError("grid needs at least one hazard cell")
        self.init_values = np.asarray(c["init_v"], dtype=float)
        if self.init_values.shape != (2,):
            raise ConfigError("grid init_v must have 2 entries (energy, thermal)")
        self.dash_enabled = bool(c["dash"])
        self.eat_gain = float(c["eat_gain"])
        if self.eat_gain <= 0:
            raise ConfigError("grid eat_gain must be positive")
        self.action_count = 7 if self.dash_enabled else 6
        self.state_count = self.size * self.size
        costs = [0.01] * 6 + ([0.08] if self.dash_enabled else [])
        self.energy_costs = np.asarray(costs)
        self.perturbations = perturbations
        self.drift_schedule = drift_schedule
        self.reset(0)

    def _cell(self, rc) -> tuple[int, int]:
        r, c = int(rc[0]), int(rc[1])
        if not (0 <= r < int(self.size) and 0 <= c < int(self.size)):
            raise ConfigError(f"cell {rc} outside the {self.size}x{self.size} grid")
        return (r, c)

    def _id(self, cell) -> int:
        return cell[0] * self.size + cell[1]

    def reset(self, seed: int) -> tuple[int, np.ndarray]:
        self._gen = RngStream(seed, "env:viability_grid").generator()
        self.pos = self.start
        self.food = set(self.base_food)
        self.goal = self.base_goal
        self.t = 0
        self._pending_changes = list(self.drift_schedule.change_points)
        return self._id(self.pos), self.init_values.copy()

    def recovery_actions(self, state: int) -> frozenset:
        r, c = divmod(int(state), self.size)
        if not self.food:
            return frozenset({EAT})
        best = min(abs(r - fr) + abs(c - fc) for fr, fc in self.food)
        acts = {EAT}
        for a, (dr, dc) in _MOVES.items():
            if a == STAY:
                continue
            nr, nc = r + dr, c + dc
            if 0 <= nr < self.size and 0 <= nc < self.size:
                d = min(abs(nr - fr) + abs(nc - fc) for fr, fc in self.food)
                if d < best:
                    acts.add(a)
        return frozenset(acts)

    def _apply_drift_changes(self):
        while self._pending_changes and self._pending_changes[0].step <= self.t:
            change = self._pending_changes.pop(0)
            new_goal = change.params.get("goal")
            if new_goal is not None:
                self.goal = self._cell(new_goal)
            new_food = change.params.get("food")
            if new_food is not None:
                self.food = {self._cell(f) for f in new_food}
            elif new_goal is None:
                # relocate each food cell to a fresh non-hazard, non-goal cell
                free = [
                    (r, c)
                    for r in range(self.size)
                    for c in range(self.size)
                    if (r, c) not in self.hazards and (r, c) != self.goal
                ]
                picks = self._gen.choice(len(free), size=len(self.food), replace=False)
                self.food = {free[int(i)] for i in picks}

    def step(self, action: int, v: ViabilityVector) -> StepResult:
        self._check_action(action)
        self._apply_drift_changes()
        active = self.perturbations.active(self.t)
        prev = self.pos
        r, c = self.pos

        if action in _MOVES:
            dr, dc = _MOVES[action]
            nr, nc = r + dr, c + dc
            if 0 <= nr < self.size and 0 <= nc < self.size:
                self.pos = (nr, nc)
        elif action == DASH and self.dash_enabled:
            for _ in range(2):
                rr, cc = self.pos
                gr, gc = self.goal
                if abs(gr - rr) >= abs(gc - cc) and gr != rr:
                    step_to = (rr + (1 if gr > rr else -1), cc)
                elif gc != cc:
                    step_to = (rr, cc + (1 if gc > cc else -1))
                else:
                    break
                self.pos = step_to

        locked = any(e.kind == "resource_lockout" for e in active)
        energy = -0.01
        if action == DASH and self.dash_enabled:
            energy = -0.08
        if action == EAT and self.pos in self.food and not locked:
            energy += self.eat_gain
        for e in active:
            if e.kind == "energy_drain_spike":
                energy -= e.magnitude

        thermal_now = float(v.values[1])
        if self.pos in self.hazards:
            thermal = 0.1
        else:
            thermal = -min(0.05, max(thermal_now, 0.0))

        r_task = 1.0 if (self.pos == self.goal and prev != self.goal) else 0.0

        reported = self._id(self.pos)
        for e in active:
            if e.kind == "sensor_noise_burst" and self._gen.random() < e.magnitude:
                rr, cc = self.pos
                neighbors = [
                    (rr + dr, cc + dc)
                    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
                    if 0 <= rr + dr < self.size and 0 <= cc + dc < self.size
                ]
                reported = self._id(neighbors[int(self._gen.integers(len(neighbors)))])

        self.t += 1
        return StepResult(
            state=reported,
            r_task=r_task,
            drift=np.array([energy, thermal]),
            perturb=bool(active),
            shift=False,
        )


# ----------------------------------------------------------------------
# drift_bandit

_BANDIT_DEFAULTS = dict(
    arms=6,
    payout_levels=[0.0, 0.5, 1.0],
    shift_window=50,
    init_v=[1.0, 0.0],
)


class DriftBandit(Env):
    """Non-stationary bandit over v = (energy, wear).

    Pulls cost energy and build wear; the defer action is free and lets wear
    recover. The external state is the last payout level, so the transition
    model's predictive per arm is exactly its payout distribution — which is
    re-randomized at drift change points, opening ground-truth shift windows
    for abstention scoring.
    """

    dim_names = ("energy", "wear")

    def __init__(self, cfg: dict, perturbations: PerturbationSchedule = PerturbationSchedule(),
                 drift_schedule: DriftSchedule = DriftSchedule()):
        c = dict(_BANDIT_DEFAULTS)
        c.update(cfg or {})
        self.arms = int(c["arms"])
        if self.arms < 2:
            raise ConfigError("bandit needs at least 2 arms")
        self.levels = tuple(float(x) for x in c["payout_levels"])
        if len(self.levels) < 2:
            raise ConfigError("bandit needs at least 2 payout levels")
        self.shift_window = int(c["shift_window"])
        if self.shift_window < 1:
            raise ConfigError("bandit shift_window must be >= 1")
        self.init_values = np.asarray(c["init_v"], dtype=float)
        if self.init_values.shape != (2,):
            raise ConfigError("bandit init_v must have 2 entries (energy, wear)")
        self.action_count = self.arms + 1
        self.defer_action = self.arms
        self.state_count = len(self.levels)
        self.energy_costs = np.asarray([0.02] * self.arms + [0.0])
        self.perturbations = perturbations
        self.drift_schedule = drift_schedule
        self.reset(0)

    def reset(self, seed: int) -> tuple[int, np.ndarray]:
        self._gen = RngStream(seed, "env:drift_bandit").generator()
        self.t = 0
        self.state = 0
        self.payout = self._draw_payouts()
        self._old_payout = self.payout.copy()
        self._blend_until = 0
        self._blend_span = 1
        self._pending = list(self.drift_schedule.change_points)
        self._shift_until = 0
        return self.state, self.init_values.copy()

    def _draw_payouts(self) -> np.ndarray:
        # sparse concentration: most arms land near one payout level, so a
        # redraw at a change point moves the distribution far enough to show
        # up in prediction error
        alpha = np.full(len(self.levels), 0.2)
        return self._gen.dirichlet(alpha, size=self.arms)

    def _current_payout(self, arm: int) -> np.ndarray:
        if self.t < self._blend_until:
            # gradual change: linear blend from old to new parameters
            frac = 1.0 - (self._blend_until - self.t) / self._blend_span
            return (1.0 - frac) * self._old_payout[arm] + frac * self.payout[arm]
        return self.payout[arm]

    def _apply_changes(self):
        while self._pending and self._pending[0].step <= self.t:
            change = self._pending.pop(0)
            self._old_payout = np.array([self._current_payout(a) for a in range(self.arms)])
            self.payout = self._draw_payouts()
            if change.kind == "gradual":
                span = int(change.params.get("span", 200))
                if span < 1:
                    raise ConfigError("gradual drift span must be >= 1")
                self._blend_span = span
                self._blend_until = self.t + span
            else:
                self._blend_until = 0
            self._shift_until = change.step + self.shift_window

    def recovery_actions(self, state: int) -> frozenset:
        return frozenset({self.defer_action})

    def step(self, action: int, v: ViabilityVector) -> StepResult:
        self._check_action(action)
        self._apply_changes()
        active = self.perturbations.active(self.t)
        locked = any(e.kind == "resource_lockout" for e in active)

        if action == self.defer_action:
            wear_now = max(float(v.values[1]), 0.0)
            drift = np.array([0.0, -min(0.05, wear_now)])
            r_task = 0.0
        else:
            probs = self._current_payout(action)
            level = 0 if locked else int(self._gen.choice(len(self.levels), p=probs))
            self.state = level
            r_task = self.levels[level]
            drift = np.array([-0.02, 0.01])

        for e in active:
            if e.kind == "energy_drain_spike":
                drift = drift + np.array([-e.magnitude, 0.0])

        reported = self.state
        for e in active:
            if e.kind == "sensor_noise_burst" and self._gen.random() < e.magnitude:
                reported = int(self._gen.integers(self.state_count))

        shift = self.t < self._shift_until
        self.t += 1
        return StepResult(reported, r_task, drift, bool(active), shift)


# ----------------------------------------------------------------------
# costly_maze

PROBE = 5

_MAZE_DEFAULTS = dict(
    rows=4,
    cols=9,
    wall_col=4,
    doors=[[1, 4], [2, 4]],
    start=[3, 0],
    goal=[0, 8],
    charger=[0, 0],
    noise_levels=[-0.06, 0.0, 0.06],
    init_v=[0.9],
    probe_cost=0.08,
)


class CostlyMaze(Env):
    """Two rooms split by a wall with two candidate doors, one of them open
    (seed-dependent), over v = (energy,).

    Ordinary moves cost a little energy; the probe action costs a lot and
    answers "is the nearest door open?" by landing in a dedicated echo state
    (any action then returns to the probed-from cell). Room B's floor adds a
    zero-mean random term to energy drift, so its internal dynamics stay
    worth learning long after room A's are known. A charger cell refills
    energy on stay; the goal cell pays task reward on each arrival.
    """

    dim_names = ("energy",)

    def __init__(self, cfg: dict, perturbations: PerturbationSchedule = PerturbationSchedule(),
                 drift_schedule: DriftSchedule = DriftSchedule()):
        c = dict(_MAZE_DEFAULTS)
        c.update(cfg or {})
        self.rows, self.cols = int(c["rows"]), int(c["cols"])
        self.wall_col = int(c["wall_col"])
        if not (0 < self.wall_col < self.cols - 1):
            raise ConfigError("maze wall_col must be interior")
        self.doors = tuple((int(r), int(cc)) for r, cc in c["doors"])
        if len(self.doors) != 2 or any(cc != self.wall_col for _, cc in self.doors):
            raise ConfigError("maze needs exactly 2 door cells on the wall column")
        self.noise_levels = tuple(float(x) for x in c["noise_levels"])
        if len(self.noise_levels) < 2:
            raise ConfigError("maze noise_levels must offer at least 2 outcomes")
        self.init_values = np.asarray(c["init_v"], dtype=float)
        if self.init_values.shape != (1,):
            raise ConfigError("maze init_v must have 1 entry (energy)")
        self.probe_cost = float(c["probe_cost"])
        if self.probe_cost <= 0:
            raise ConfigError("maze probe_cost must be positive")

        self.walls = frozenset(
            (r, self.wall_col) for r in range(self.rows)
            if (r, self.wall_col) not in self.doors
        )
        self.cells = [
            (r, cc) for r in range(self.rows) for cc in range(self.cols)
            if (r, cc) not in self.walls
        ]
        self._cell_id = {cell: i for i, cell in enumerate(self.cells)}
        self.start = self._require_cell(c["start"])
        self.goal = self._require_cell(c["goal"])
        self.charger = self._require_cell(c["charger"])
        self.n_cells = len(self.cells)
        # echo states, two per door: (door index, closed/open)
        self.state_count = self.n_cells + 4
        self.action_count = 6
        self.energy_costs = np.asarray([0.01] * 5 + [self.probe_cost])
        self.perturbations = perturbations
        self.drift_schedule = drift_schedule
        self.room_b_cells = frozenset(
            cell for cell in self.cells if cell[1] > self.wall_col
        )
        # provisional door so recovery audits work pre-reset; the first real
        # reset draws the run's door
        self.open_door = self.doors[0]
        self._door_locked = False
        self._dist = self._distances_to(self.charger)
        self._gen = RngStream(0, "env:costly_maze").generator()
        self.pos = self.start
        self.in_echo: int | None = None
        self.return_pos = self.start
        self.t = 0

    def _require_cell(self, rc) -> tuple[int, int]:
        cell = (int(rc[0]), int(rc[1]))
        if cell not in self._cell_id:
            raise ConfigError(f"cell {rc} is a wall or outside the maze")
        return cell

    def _echo_id(self, door: int, is_open: bool) -> int:
        return self.n_cells + 2 * door + (1 if is_open else 0)

    def reset(self, seed: int) -> tuple[int, np.ndarray]:
        self._gen = RngStream(seed, "env:costly_maze").generator()
        # the open door is a structural fact of this maze: drawn once, on the
        # first reset, then held for the life of the instance so that what
        # probing reveals stays true across episodes
        if not self._door_locked:
            self.open_door = self.doors[int(self._gen.integers(2))]
            self._dist = self._distances_to(self.charger)
            self._door_locked = True
        self.pos = self.start
        self.in_echo = None
        self.return_pos = self.start
        self.t = 0
        return self._cell_id[self.pos], self.init_values.copy()

    def _passable(self, cell) -> bool:
        r, cc = cell
        if not (0 <= r < self.rows and 0 <= cc < self.cols):
            return False
        if cell in self.walls:
            return False
        if cell in self.doors and cell != self.open_door:
            return False
        return True

    def _distances_to(self, target) -> dict:
        dist = {target: 0}
        queue = deque([target])
        while queue:
            cell = queue.popleft()
            r, cc = cell
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                nxt = (r + dr, cc + dc)
                if self._passable(nxt) and nxt not in dist:
                    dist[nxt] = dist[cell] + 1
                    queue.append(nxt)
        return dist

    def recovery_actions(self, state: int) -> frozenset:
        if state >= self.n_cells:
            return frozenset(range(self.action_count))
        cell = self.cells[state]
        if cell == self.charger:
            return frozenset({STAY})
        here = self._dist.get(cell)
        if here is None:
            return frozenset({STAY})
        acts = set()
        for a, (dr, dc) in _MOVES.items():
            if a == STAY:
                continue
            nxt = (cell[0] + dr, cell[1] + dc)
            if self._passable(nxt) and self._dist.get(nxt, np.inf) < here:
                acts.add(a)
        return frozenset(acts) if acts else frozenset({STAY})

    def _nearest_door(self, cell) -> int:
        gaps = [abs(cell[0] - d[0]) + abs(cell[1] - d[1]) for d in self.doors]
        return int(np.argmin(gaps))

    def step(self, action: int, v: ViabilityVector) -> StepResult:
        self._check_action(action)
        active = self.perturbations.active(self.t)

        if self.in_echo is not None:
            # any action steps back out of the echo to where the probe happened
            self.pos = self.return_pos
            self.in_echo = None
            self.t += 1
            return StepResult(self._cell_id[self.pos], 0.0, np.array([-0.01]),
                              bool(active), False)

        prev = self.pos
        energy = -0.01
        if action in _MOVES:
            dr, dc = _MOVES[action]
            nxt = (prev[0] + dr, prev[1] + dc)
            if self._passable(nxt):
                self.pos = nxt
        elif action == PROBE:
            energy = -self.probe_cost
            door = self._nearest_door(prev)
            self.return_pos = prev
            self.in_echo = self._echo_id(door, self.doors[door] == self.open_door)

        if action == STAY and self.pos == self.charger:
            energy += 0.2
        if self.in_echo is None and self.pos in self.room_b_cells:
            energy += self.noise_levels[int(self._gen.integers(len(self.noise_levels)))]
        for e in active:
            if e.kind == "energy_drain_spike":
                energy -= e.magnitude

        r_task = 5.0 if (self.in_echo is None and self.pos == self.goal
                         and prev != self.goal) else 0.0

        state = self.in_echo if self.in_echo is not None else self._cell_id[self.pos]
        self.t += 1
        return StepResult(state, r_task, np.array([energy]), bool(active), False)


# ----------------------------------------------------------------------

ENV_KINDS = {
    "viability_grid": ViabilityGrid,
    "drift_bandit": DriftBandit,
    "costly_maze": CostlyMaze,
}


def make_env(kind: str, cfg: dict, perturbations: PerturbationSchedule,
             drift_schedule: DriftSchedule) -> Env:
    try:
        ctor = ENV_KINDS[kind]
    except KeyError:
        raise ConfigError(
            f"env.kind must be one of {sorted(ENV_KINDS)}, got {kind!r}"
        ) from None
    env = ctor(cfg, perturbations, drift_schedule)
    env._audit_recovery()
    return env
