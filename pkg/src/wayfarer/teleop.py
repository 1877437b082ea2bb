"""Live rollout server: telemetry out, delayed waypoint commands in.

The session is the single writer of simulation state. Clients connect
over a WebSocket and receive newline-delimited JSON state messages every
``telemetry_every`` simulation steps; they send command messages
(set_waypoints, reset, pause, resume) the same way.

Link latency is simulated: set_waypoints and reset mature only after
``delay_ms`` of *simulated* time has passed since receipt, so pausing
the simulation also freezes in-flight commands. Pause and resume act
immediately; a delayed resume could never mature while the clock it
waits on is frozen.

By default a session never auto-terminates: operators keep retasking the
agent, and both the episode timeout and queue exhaustion merely flag the
telemetry ``done`` field. With ``strict_clock`` the training rules apply
and finished episodes roll over into fresh ones.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from starlette.applications import Starlette
from starlette.responses import HTMLResponse
from starlette.routing import Mount, Route, WebSocketRoute
from starlette.staticfiles import StaticFiles
from starlette.websockets import WebSocket, WebSocketDisconnect

from .env import WaypointEnv
from .nn import mlp_forward
from .sim import ANT
from .trainer import Checkpoint

COMMAND_TYPES = ("set_waypoints", "reset", "pause", "resume")
TELEMETRY_EVERY = 2


class CommandError(ValueError):
    """Malformed inbound message; the session replies and carries on."""


def parse_command(text: str) -> dict:
    """One JSON line -> validated command dict."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(msg, dict):
        raise CommandError("command must be a JSON object")
    kind = msg.get("type")
    if kind not in COMMAND_TYPES:
        raise CommandError(f"unknown command type {kind!r}")
    if kind == "set_waypoints":
        raw = msg.get("waypoints")
        if not isinstance(raw, list) or not raw:
            raise CommandError("set_waypoints needs a non-empty waypoint list")
        waypoints = []
        for i, item in enumerate(raw):
            if (
                not isinstance(item, (list, tuple))
                or len(item) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in item)
            ):
                raise CommandError(f"waypoint {i} must be an [x, y] pair")
            x, y = float(item[0]), float(item[1])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise CommandError(f"waypoint {i} must be finite")
            waypoints.append((x, y))
        return {"type": kind, "waypoints": waypoints}
    return {"type": kind}


@dataclass(order=True)
class _PendingCommand:
    mature_at: float
    seq: int
    command: dict = field(compare=False)


class TeleopSession:
    """Deterministic simulation core behind the network layer.

    ``step()`` advances one simulation step (unless paused) and returns a
    telemetry dict on cadence steps, so the command-delay and retasking
    semantics are testable without any networking.
    """

    def __init__(
        self,
        checkpoint: Checkpoint,
        delay_ms: float = 0.0,
        strict_clock: bool = False,
        seed: int = 0,
        telemetry_every: int = TELEMETRY_EVERY,
    ):
        if delay_ms < 0:
            raise ValueError("delay_ms must be >= 0")
        if telemetry_every < 1:
            raise ValueError("telemetry_every must be >= 1")
        self.checkpoint = checkpoint
        self.delay_s = delay_ms / 1000.0
        self.strict_clock = strict_clock
        self.telemetry_every = telemetry_every
        self.rng = np.random.default_rng(seed)
        self.env = WaypointEnv(
            checkpoint.episode,
            terminate_on_timeout=strict_clock,
            terminate_on_exhaustion=strict_clock,
        )
        self.env.reset(self.rng)
        self.sim_time = 0.0  # continuous across episodes, frozen while paused
        self.step_count = 0
        self.tick = 0
        self.paused = False
        self.episode_count = 0
        self._pending: list[_PendingCommand] = []
        self._seq = 0

    @property
    def dt(self) -> float:
        return self.env.config.dynamics.dt

    def submit(self, command: dict) -> dict:
        """Accept a validated command; returns the ack payload.

        Pause and resume take effect immediately. Anything else matures
        after the simulated link delay and is applied between steps.
        """
        kind = command["type"]
        if kind == "pause":
            self.paused = True
            return {"type": "ack", "command": kind, "effective_t": self.sim_time}
        if kind == "resume":
            self.paused = False
            return {"type": "ack", "command": kind, "effective_t": self.sim_time}
        mature_at = self.sim_time + self.delay_s
        self._pending.append(_PendingCommand(mature_at, self._seq, command))
        self._seq += 1
        return {"type": "ack", "command": kind, "effective_t": mature_at}

    def _apply(self, command: dict) -> None:
        kind = command["type"]
        if kind == "set_waypoints":
            self.env.retask(command["waypoints"])
        elif kind == "reset":
            self.env.reset(self.rng)
            self.episode_count += 1

    def _apply_mature(self) -> None:
        due = [p for p in self._pending if p.mature_at <= self.sim_time + 1e-12]
        if not due:
            return
        self._pending = [p for p in self._pending if p not in due]
        for p in sorted(due):
            self._apply(p.command)

    def pending_count(self) -> int:
        return len(self._pending)

    def step(self) -> dict | None:
        """One simulation step; telemetry dict on cadence steps, else None."""
        if self.paused:
            return None
        self._apply_mature()
        if self.env.done:
            # strict clock only: the episode ended by the training rules
            self.env.reset(self.rng)
            self.episode_count += 1
        obs = self.env.observation()
        action, _ = mlp_forward(self.checkpoint.policy, obs)
        self.env.step(action)
        self.sim_time += self.dt
        self.step_count += 1
        if self.step_count % self.telemetry_every == 0:
            return self.telemetry()
        return None

    def telemetry(self) -> dict:
        """Build (and count) one state message from the current sim state."""
        self.tick += 1
        env = self.env
        b = env.state.body
        joints = []
        if env.config.agent_kind == ANT and env.state.joints is not None:
            joints = [float(q) for q in env.state.joints.q]
        return {
            "type": "state",
            "tick": self.tick,
            "t": env.clock.t,
            "pose": {"x": b.x, "y": b.y, "yaw": b.yaw},
            "joints": joints,
            "goals": [[x, y] for x, y in env.goals.waypoints],
            "current_index": env.goals.current_index,
            "waypoints_reached": env.waypoints_reached,
            "done": env.done or env.goals.exhausted,
        }

    def hello(self) -> dict:
        """Connection preamble describing the arena and link parameters."""
        cfg = self.env.config
        return {
            "type": "hello",
            "agent_kind": cfg.agent_kind,
            "delay_ms": self.delay_s * 1000.0,
            "dt": self.dt,
            "telemetry_every": self.telemetry_every,
            "perimeter": {
                "center": list(cfg.perimeter.center),
                "half_extent": cfg.perimeter.half_extent,
            },
            "boundary": list(cfg.boundary),
            "strict_clock": self.strict_clock,
        }


def _encode(msg: dict) -> str:
    return json.dumps(msg) + "\n"


def create_app(
    checkpoint: Checkpoint,
    delay_ms: float = 0.0,
    strict_clock: bool = False,
    seed: int = 0,
    console_dir: str | Path | None = None,
    speed: float = 1.0,
) -> Starlette:
    """Starlette app: `/ws` telemetry/command socket, `/` console bundle.

    ``speed`` scales wall-clock pacing only (simulated time is untouched);
    tests run the loop far faster than real time.
    """
    if speed <= 0:
        raise ValueError("speed must be > 0")
    session = TeleopSession(checkpoint, delay_ms, strict_clock, seed)
    clients: set[WebSocket] = set()

    async def broadcast(message: dict) -> None:
        text = _encode(message)
        for ws in list(clients):
            try:
                await ws.send_text(text)
            except Exception:
                clients.discard(ws)

    async def sim_loop() -> None:
        interval = session.dt / speed
        while True:
            telemetry = session.step()
            if telemetry is not None:
                await broadcast(telemetry)
            await asyncio.sleep(interval)

    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        await ws.send_text(_encode(session.hello()))
        await ws.send_text(_encode(session.telemetry()))
        clients.add(ws)
        try:
            while True:
                text = await ws.receive_text()
                for line in text.splitlines():
                    if not line.strip():
                        continue
                    try:
                        command = parse_command(line)
                    except CommandError as exc:
                        await ws.send_text(_encode({"type": "error", "message": str(exc)}))
                        continue
                    await ws.send_text(_encode(session.submit(command)))
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)

    routes: list = [WebSocketRoute("/ws", ws_endpoint)]
    if console_dir is not None and Path(console_dir).is_dir():
        routes.append(Mount("/", app=StaticFiles(directory=str(console_dir), html=True)))
    else:
        async def placeholder(_request):
            return HTMLResponse(
                "<html><body><h1>wayfarer teleop</h1>"
                "<p>No console bundle found. Connect a client to <code>/ws</code> "
                "for newline-delimited JSON telemetry.</p></body></html>"
            )

        routes.append(Route("/", placeholder))

    @contextlib.asynccontextmanager
    async def lifespan(_app):
        task = asyncio.create_task(sim_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = Starlette(routes=routes, lifespan=lifespan)
    app.state.session = session
    return app


def serve(
    checkpoint: Checkpoint,
    host: str = "127.0.0.1",
    port: int = 8000,
    delay_ms: float = 0.0,
    strict_clock: bool = False,
    seed: int = 0,
    console_dir: str | Path | None = None,
) -> None:
    """Blocking entry point used by the CLI serve command."""
    import uvicorn

    app = create_app(checkpoint, delay_ms, strict_clock, seed, console_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
