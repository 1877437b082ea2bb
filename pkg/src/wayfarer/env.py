"""Episode mechanics: waypoint sampling, observations, reward, and timing.

An episode starts with a queue of waypoints. The reward is always linked
to the queue's *current* waypoint: it pays the velocity of approach toward
that goal minus a quadratic energy penalty. Reaching a waypoint (entering
an axis-aligned box of half-widths ``bx``/``by`` around it) advances the
queue and extends the episode deadline, so a full episode of m waypoints
may last up to ``t_ep + m * t_inc`` seconds.

Training-style queues:

* ``single-point`` -- every waypoint is the perimeter center (10, 10).
* ``random-waypoints`` -- waypoints drawn i.i.d. uniform over the square
  training perimeter (default [7.5, 12.5]^2).

Information styles control what the policy observes beyond proprioception
and pose: nothing, four per-episode noise values, or the scaled
coordinates of the current and next waypoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sim import (
    ANT,
    POINT_MASS,
    ACTION_DIMS,
    AgentState,
    DynamicsParams,
    step_dynamics,
    zero_state,
)

SINGLE_POINT = "single-point"
RANDOM_WAYPOINTS = "random-waypoints"
TRAINING_STYLES = (SINGLE_POINT, RANDOM_WAYPOINTS)

STATE_ONLY = "state-only"
STATE_NOISE = "state-noise"
STATE_GOAL = "state-goal"
INFO_STYLES = (STATE_ONLY, STATE_NOISE, STATE_GOAL)

TIMEOUT = "timeout"
ALL_WAYPOINTS_REACHED = "all-waypoints-reached"

CENTER_GOAL = (10.0, 10.0)

# proprioception + pose block lengths
_BASE_OBS_DIM = {ANT: 25, POINT_MASS: 10}

_TIME_EPS = 1e-9  # guards t > deadline against float accumulation in t = n*dt


def observation_dim(kind: str, info_style: str) -> int:
    base = _BASE_OBS_DIM[kind]
    return base if info_style == STATE_ONLY else base + 4


@dataclass
class TrainingPerimeter:
    """Square region waypoints are sampled from during training."""

    center: tuple[float, float] = CENTER_GOAL
    half_extent: float = 2.5

    def __post_init__(self) -> None:
        if not self.half_extent > 0:
            raise ValueError(f"half_extent must be > 0, got {self.half_extent}")

    @property
    def low(self) -> tuple[float, float]:
        return (self.center[0] - self.half_extent, self.center[1] - self.half_extent)

    @property
    def high(self) -> tuple[float, float]:
        return (self.center[0] + self.half_extent, self.center[1] + self.half_extent)

    def contains(self, x: float, y: float) -> bool:
        lo, hi = self.low, self.high
        return lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]


@dataclass
class GoalQueue:
    """Ordered waypoints with the index of the currently active goal."""

    waypoints: list[tuple[float, float]]
    current_index: int = 0

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("goal queue needs at least one waypoint")
        if not 0 <= self.current_index <= len(self.waypoints):
            raise ValueError("current_index out of range")

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def exhausted(self) -> bool:
        return self.current_index >= len(self.waypoints)

    def current(self) -> tuple[float, float]:
        """Active goal; once exhausted this stays at the last waypoint."""
        return self.waypoints[min(self.current_index, len(self.waypoints) - 1)]

    def upcoming(self) -> tuple[float, float]:
        """Waypoint after the active one (duplicates the last at the end)."""
        return self.waypoints[min(self.current_index + 1, len(self.waypoints) - 1)]

    def advance(self) -> None:
        if self.exhausted:
            raise ValueError("cannot advance an exhausted goal queue")
        self.current_index += 1

    def goal_block(self) -> tuple[float, float, float, float]:
        """(current x, current y, next x, next y), unscaled."""
        cur, nxt = self.current(), self.upcoming()
        return (cur[0], cur[1], nxt[0], nxt[1])


@dataclass
class EpisodeClock:
    """Elapsed time and the deadline extension rule.

    The deadline starts at ``t_ep`` and grows by ``t_inc`` per waypoint
    reached, so ``deadline - t_ep == t_inc * waypoints_reached`` always.
    Time is reconstructed as ``steps * dt`` each step to avoid drift.
    """

    t_ep: float = 10.0
    t_inc: float = 10.0
    t: float = 0.0
    deadline: float = 10.0
    steps: int = 0

    def reset(self) -> None:
        self.t = 0.0
        self.deadline = self.t_ep
        self.steps = 0

    def tick(self, dt: float) -> None:
        self.steps += 1
        self.t = self.steps * dt

    def extend(self) -> None:
        self.deadline += self.t_inc

    @property
    def expired(self) -> bool:
        return self.t > self.deadline + _TIME_EPS


@dataclass
class RewardWeights:
    w_energy: float = 0.005
    hit_bonus: float = 0.0

    def __post_init__(self) -> None:
        if self.w_energy < 0 or self.hit_bonus < 0:
            raise ValueError("reward weights must be non-negative")


@dataclass
class EpisodeConfig:
    """Everything an episode needs: agent, goals, reward, and timing."""

    agent_kind: str = ANT
    training_style: str = RANDOM_WAYPOINTS
    info_style: str = STATE_GOAL
    m_waypoints: int = 4
    boundary: tuple[float, float] = (1.0, 1.0)
    perimeter: TrainingPerimeter = field(default_factory=TrainingPerimeter)
    reward: RewardWeights = field(default_factory=RewardWeights)
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    t_ep: float = 10.0
    t_inc: float = 10.0
    pos_scale: float = 0.1
    vel_scale: float = 0.3

    def __post_init__(self) -> None:
        if self.agent_kind not in (ANT, POINT_MASS):
            raise ValueError(f"unknown agent kind {self.agent_kind!r}")
        if self.training_style not in TRAINING_STYLES:
            raise ValueError(f"unknown training style {self.training_style!r}")
        if self.info_style not in INFO_STYLES:
            raise ValueError(f"unknown info style {self.info_style!r}")
        if self.m_waypoints < 1:
            raise ValueError("m_waypoints must be >= 1")
        if not (self.boundary[0] > 0 and self.boundary[1] > 0):
            raise ValueError("boundary thresholds must be > 0")

    @property
    def observation_dim(self) -> int:
        return observation_dim(self.agent_kind, self.info_style)

    @property
    def action_dim(self) -> int:
        return ACTION_DIMS[self.agent_kind]

    @property
    def max_steps(self) -> int:
        horizon = self.t_ep + self.m_waypoints * self.t_inc
        return int(round(horizon / self.dynamics.dt))


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    hit: bool
    done: bool
    done_reason: str | None = None


def sample_waypoints(perimeter: TrainingPerimeter, m: int, rng: np.random.Generator) -> GoalQueue:
    """m i.i.d. uniform waypoints inside the perimeter square."""
    if m < 1:
        raise ValueError("need at least one waypoint")
    lo, hi = perimeter.low, perimeter.high
    pts = rng.uniform(low=lo, high=hi, size=(m, 2))
    return GoalQueue(waypoints=[(float(x), float(y)) for x, y in pts])


def single_point_queue(m: int) -> GoalQueue:
    """m copies of the perimeter-center goal (10, 10)."""
    if m < 1:
        raise ValueError("need at least one waypoint")
    return GoalQueue(waypoints=[CENTER_GOAL] * m)


def check_waypoint_hit(
    pos: tuple[float, float], goal: tuple[float, float], bx: float, by: float
) -> bool:
    """True iff |px-gx| < bx and |py-gy| < by (strict on both axes)."""
    px, py = pos
    gx, gy = goal
    if not all(math.isfinite(v) for v in (px, py, gx, gy, bx, by)):
        raise ValueError("hit test requires finite inputs")
    return abs(px - gx) < bx and abs(py - gy) < by


def _dist(state: AgentState, goal: tuple[float, float]) -> float:
    return math.hypot(state.body.x - goal[0], state.body.y - goal[1])


def reward(
    prev: AgentState,
    nxt: AgentState,
    action: np.ndarray,
    goal: tuple[float, float],
    weights: RewardWeights,
    dt: float,
    hit: bool,
) -> float:
    """Velocity of approach toward the goal, minus the energy penalty.

    R = (d_prev - d_next) / dt - w_energy * sum(a^2) (+ hit bonus).
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    v_g = (_dist(prev, goal) - _dist(nxt, goal)) / dt
    penalty = weights.w_energy * float(np.sum(np.square(action)))
    r = v_g - penalty
    if hit:
        r += weights.hit_bonus
    return r


def build_observation(
    state: AgentState,
    goals: GoalQueue,
    style: str,
    noise: np.ndarray | None = None,
    pos_scale: float = 0.1,
    vel_scale: float = 0.3,
) -> np.ndarray:
    """Assemble the flat observation vector for the given info style.

    Ant layout: [q(8), qdot(8)*vel, (x,y,z)*pos, (vx,vy,vz)*vel,
    (roll,pitch,yaw)] = 25 elements. Point-mass: [(x,y)*pos, (vx,vy)*vel,
    yaw, yaw_rate, 0, 0, 0, 0] = 10 elements. The goal style appends the
    scaled current and next waypoint; the noise style appends the four
    per-episode noise values.
    """
    if style not in INFO_STYLES:
        raise ValueError(f"unknown info style {style!r}")
    if (noise is not None) != (style == STATE_NOISE):
        raise ValueError("noise must be supplied iff the info style is state-noise")

    b = state.body
    if state.kind == ANT:
        j = state.joints
        assert j is not None
        parts = [
            j.q,
            j.qdot * vel_scale,
            np.array([b.x, b.y, b.z]) * pos_scale,
            np.array([b.vx, b.vy, b.vz]) * vel_scale,
            np.array([b.roll, b.pitch, b.yaw]),
        ]
    else:
        parts = [
            np.array([b.x, b.y]) * pos_scale,
            np.array([b.vx, b.vy]) * vel_scale,
            np.array([b.yaw, b.yaw_rate, 0.0, 0.0, 0.0, 0.0]),
        ]

    if style == STATE_GOAL:
        parts.append(np.asarray(goals.goal_block()) * pos_scale)
    elif style == STATE_NOISE:
        parts.append(np.asarray(noise, dtype=float))

    obs = np.concatenate(parts)
    if not np.all(np.isfinite(obs)):
        raise ValueError("observation contains non-finite entries")
    return obs


class WaypointEnv:
    """Single episodic environment instance (one writer, seeded at reset).

    ``terminate_on_timeout`` / ``terminate_on_exhaustion`` exist for the
    live teleoperation session, which keeps stepping past both events;
    training and evaluation leave them on.
    """

    def __init__(
        self,
        config: EpisodeConfig,
        terminate_on_timeout: bool = True,
        terminate_on_exhaustion: bool = True,
    ):
        self.config = config
        self.terminate_on_timeout = terminate_on_timeout
        self.terminate_on_exhaustion = terminate_on_exhaustion
        self.state: AgentState = zero_state(config.agent_kind)
        self.goals: GoalQueue = single_point_queue(1)
        self.clock = EpisodeClock(t_ep=config.t_ep, t_inc=config.t_inc)
        self.noise: np.ndarray | None = None
        self.done = False
        self.done_reason: str | None = None

    def reset(
        self,
        rng: np.random.Generator,
        waypoints: list[tuple[float, float]] | None = None,
    ) -> np.ndarray:
        """Start a fresh episode; ``waypoints`` overrides the sampled queue."""
        cfg = self.config
        self.state = zero_state(cfg.agent_kind)
        if waypoints is not None:
            self.goals = GoalQueue(waypoints=[(float(x), float(y)) for x, y in waypoints])
        elif cfg.training_style == SINGLE_POINT:
            self.goals = single_point_queue(cfg.m_waypoints)
        else:
            self.goals = sample_waypoints(cfg.perimeter, cfg.m_waypoints, rng)
        self.clock = EpisodeClock(t_ep=cfg.t_ep, t_inc=cfg.t_inc)
        self.clock.reset()
        self.noise = rng.uniform(-1.0, 1.0, size=4) if cfg.info_style == STATE_NOISE else None
        self.done = False
        self.done_reason = None
        return self.observation()

    def observation(self) -> np.ndarray:
        cfg = self.config
        return build_observation(
            self.state, self.goals, cfg.info_style, self.noise, cfg.pos_scale, cfg.vel_scale
        )

    @property
    def waypoints_reached(self) -> int:
        return self.goals.current_index

    def retask(self, waypoints: list[tuple[float, float]]) -> None:
        """Replace the goal queue mid-episode and re-base the deadline."""
        self.goals = GoalQueue(waypoints=[(float(x), float(y)) for x, y in waypoints])
        self.clock.deadline = self.clock.t + self.clock.t_ep
        self.done = False
        self.done_reason = None

    def step(self, action: np.ndarray) -> StepResult:
        """Apply one action; reward is linked to the pre-hit current goal."""
        if self.done:
            raise RuntimeError("cannot step a finished episode; call reset() first")
        cfg = self.config
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)

        prev = self.state
        self.state = step_dynamics(prev, a, cfg.dynamics)

        goal = self.goals.current()
        hit = False
        if not self.goals.exhausted:
            hit = check_waypoint_hit(
                self.state.position(), goal, cfg.boundary[0], cfg.boundary[1]
            )
        r = reward(prev, self.state, a, goal, cfg.reward, cfg.dynamics.dt, hit)
        if hit:
            self.goals.advance()
            self.clock.extend()
        self.clock.tick(cfg.dynamics.dt)

        if self.goals.exhausted and self.terminate_on_exhaustion:
            self.done = True
            self.done_reason = ALL_WAYPOINTS_REACHED
        elif self.clock.expired and self.terminate_on_timeout:
            self.done = True
            self.done_reason = TIMEOUT

        return StepResult(
            observation=self.observation(),
            reward=r,
            hit=hit,
            done=self.done,
            done_reason=self.done_reason,
        )
