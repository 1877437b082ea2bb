"""Surrogate locomotion dynamics.

Two agent kinds share one planar state layout:

* ``ant-proxy`` -- an 8-joint quadruped stand-in. Each leg has a hip joint
  (even index) and a knee joint (odd index). A backward hip stroke produces
  forward thrust, gated by a sigmoid "stance" factor of the knee angle, so
  locomotion requires coordinated oscillation and turning requires
  left/right asymmetry. Legs 0,1 are the left side, legs 2,3 the right.
* ``point-mass`` -- a 2-control reference agent driven directly by a
  bounded acceleration command.

The body moves in the xy-plane; z, roll and pitch are held constant and
exist only so the observation layout matches the full 3-D pose. All
functions here are pure and deterministic: identical inputs produce
bit-identical outputs, so many environments can step concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

ANT = "ant-proxy"
POINT_MASS = "point-mass"
AGENT_KINDS = (ANT, POINT_MASS)

N_JOINTS = 8
N_LEGS = 4
BODY_Z = 0.75

# action vector length per agent kind
ACTION_DIMS = {ANT: 8, POINT_MASS: 2}


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass
class BodyState:
    """Planar body pose and velocity (z, roll, pitch frozen)."""

    x: float = 0.0
    y: float = 0.0
    z: float = BODY_Z
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    yaw_rate: float = 0.0

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass
class JointState:
    """8 joint angles and angular velocities; hip = q[2i], knee = q[2i+1]."""

    q: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    qdot: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))

    def copy(self) -> "JointState":
        return JointState(q=self.q.copy(), qdot=self.qdot.copy())


@dataclass
class AgentState:
    kind: str
    body: BodyState
    joints: JointState | None = None

    def copy(self) -> "AgentState":
        return AgentState(
            kind=self.kind,
            body=replace(self.body),
            joints=self.joints.copy() if self.joints is not None else None,
        )

    def position(self) -> tuple[float, float]:
        return (self.body.x, self.body.y)


@dataclass
class DynamicsParams:
    """Surrogate dynamics constants. All must be strictly positive.

    dt          control timestep (s), at most 0.1
    tau_max     joint drive gain (rad/s^2 per unit action)
    k_d         joint damping (1/s)
    c_f         stroke thrust gain (N per rad/s of backward hip speed)
    c_t         differential yaw gain (N*m per N of right-left thrust)
    m           body mass (kg)
    inertia     yaw inertia (kg*m^2)
    k_drag      linear drag (N*s/m)
    k_rot       rotational drag (N*m*s)
    a_max       point-mass acceleration gain (m/s^2)
    sigma_stance  width of the knee stance sigmoid (rad)
    """

    dt: float = 0.05
    tau_max: float = 20.0
    k_d: float = 4.0
    c_f: float = 10.0
    c_t: float = 0.2
    m: float = 1.0
    inertia: float = 0.2
    k_drag: float = 0.5
    k_rot: float = 0.4
    a_max: float = 2.0
    sigma_stance: float = 0.2

    def __post_init__(self) -> None:
        for name in (
            "dt", "tau_max", "k_d", "c_f", "c_t", "m",
            "inertia", "k_drag", "k_rot", "a_max", "sigma_stance",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"dynamics parameter {name} must be finite and > 0, got {value!r}")
        if self.dt > 0.1:
            raise ValueError(f"dt must be in (0, 0.1], got {self.dt}")


def zero_state(kind: str) -> AgentState:
    """Agent at the origin with zero velocities and all joints at rest."""
    if kind not in AGENT_KINDS:
        raise ValueError(f"unknown agent kind {kind!r}, expected one of {AGENT_KINDS}")
    joints = JointState() if kind == ANT else None
    return AgentState(kind=kind, body=BodyState(), joints=joints)


def stroke_forces(joints: JointState, params: DynamicsParams) -> tuple[float, float]:
    """Forward thrust and yaw torque generated by the current leg motion.

    Per leg i: thrust_i = c_f * max(0, -qdot[2i]) * stance_i, where
    stance_i = 1 / (1 + exp(q[2i+1] / sigma_stance)). Only backward hip
    strokes (qdot < 0) with the knee planted (q < 0) push effectively.
    The yaw torque is the right-minus-left thrust imbalance scaled by c_t.
    """
    hip_vel = joints.qdot[0::2]
    knee_ang = joints.q[1::2]
    stance = 1.0 / (1.0 + np.exp(knee_ang / params.sigma_stance))
    thrust = params.c_f * np.maximum(0.0, -hip_vel) * stance
    forward = float(np.sum(thrust))
    yaw_torque = float(params.c_t * (thrust[2] + thrust[3] - thrust[0] - thrust[1]))
    return forward, yaw_torque


def _check_finite(state: AgentState, action: np.ndarray) -> None:
    if not np.all(np.isfinite(action)):
        raise ValueError("action contains non-finite components")
    b = state.body
    if not all(math.isfinite(v) for v in (b.x, b.y, b.vx, b.vy, b.yaw, b.yaw_rate)):
        raise ValueError("body state contains non-finite components")
    if state.joints is not None:
        if not (np.all(np.isfinite(state.joints.q)) and np.all(np.isfinite(state.joints.qdot))):
            raise ValueError("joint state contains non-finite components")


def step_dynamics(state: AgentState, action: np.ndarray, params: DynamicsParams) -> AgentState:
    """Advance the agent one timestep with semi-implicit (velocity-first) Euler.

    Action components are clamped to [-1, 1] before use. For the ant proxy
    the joints integrate first (with a hard clamp of q to [-1, 1]; a
    clamped joint loses its velocity), then the updated legs generate the
    stroke forces that accelerate the body along its pre-step heading.
    """
    action = np.asarray(action, dtype=float)
    expected = ACTION_DIMS[state.kind]
    if action.shape != (expected,):
        raise ValueError(f"{state.kind} expects action shape ({expected},), got {action.shape}")
    _check_finite(state, action)
    a = np.clip(action, -1.0, 1.0)

    dt = params.dt
    body = state.body

    if state.kind == POINT_MASS:
        ax = params.a_max * a[0] - params.k_drag * body.vx
        ay = params.a_max * a[1] - params.k_drag * body.vy
        vx = body.vx + ax * dt
        vy = body.vy + ay * dt
        new_body = replace(
            body,
            vx=vx,
            vy=vy,
            x=body.x + vx * dt,
            y=body.y + vy * dt,
        )
        return AgentState(kind=state.kind, body=new_body, joints=None)

    joints = state.joints
    assert joints is not None
    qddot = params.tau_max * a - params.k_d * joints.qdot
    qdot = joints.qdot + qddot * dt
    q = joints.q + qdot * dt
    clamped = (q < -1.0) | (q > 1.0)
    q = np.clip(q, -1.0, 1.0)
    qdot = np.where(clamped, 0.0, qdot)
    new_joints = JointState(q=q, qdot=qdot)

    force, torque = stroke_forces(new_joints, params)
    heading = (math.cos(body.yaw), math.sin(body.yaw))
    ax = (force * heading[0] - params.k_drag * body.vx) / params.m
    ay = (force * heading[1] - params.k_drag * body.vy) / params.m
    vx = body.vx + ax * dt
    vy = body.vy + ay * dt

    yaw_acc = (torque - params.k_rot * body.yaw_rate) / params.inertia
    yaw_rate = body.yaw_rate + yaw_acc * dt
    yaw = wrap_angle(body.yaw + yaw_rate * dt)

    new_body = replace(
        body,
        x=body.x + vx * dt,
        y=body.y + vy * dt,
        vx=vx,
        vy=vy,
        yaw=yaw,
        yaw_rate=yaw_rate,
    )
    return AgentState(kind=state.kind, body=new_body, joints=new_joints)
