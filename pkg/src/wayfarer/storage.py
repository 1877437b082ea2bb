"""JSON persistence for configs and checkpoints.

Everything is UTF-8 JSON: configs are a single nested document mirroring
the TrainConfig tree, checkpoints add the network parameters with each
weight matrix flattened row-major. Floats rely on the shortest
round-trip decimal representation, so load(save(c)) reproduces every
parameter bit-for-bit.

Config parsing is strict: unknown keys are rejected and every diagnostic
names the offending field by dotted path.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .env import EpisodeConfig, RewardWeights, TrainingPerimeter
from .nn import GaussianHead, LayerDims, MlpParams
from .sim import DynamicsParams
from .trainer import Checkpoint, TrainConfig, variant

CHECKPOINT_FORMAT = "wayfarer-checkpoint"
CHECKPOINT_VERSION = 1


class ConfigError(ValueError):
    """Config document rejected; message names the field by dotted path."""


class CheckpointError(ValueError):
    """Checkpoint document malformed or from an unsupported version."""


class _Node:
    """One level of a document being parsed; tracks consumed keys."""

    def __init__(self, doc: Any, path: str):
        if not isinstance(doc, dict):
            raise ConfigError(f"{path or 'document'} must be an object, got {type(doc).__name__}")
        self.doc = doc
        self.path = path
        self.seen: set[str] = set()

    def _at(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def take(self, key: str, default: Any) -> Any:
        self.seen.add(key)
        return self.doc.get(key, default)

    def child(self, key: str) -> "_Node | None":
        self.seen.add(key)
        if key not in self.doc:
            return None
        return _Node(self.doc[key], self._at(key))

    def number(self, key: str, default: float) -> float:
        v = self.take(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{self._at(key)} must be a number")
        return float(v)

    def integer(self, key: str, default: int) -> int:
        v = self.take(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{self._at(key)} must be an integer")
        return v

    def string(self, key: str, default: str) -> str:
        v = self.take(key, default)
        if not isinstance(v, str):
            raise ConfigError(f"{self._at(key)} must be a string")
        return v

    def pair(self, key: str, default: tuple[float, float]) -> tuple[float, float]:
        v = self.take(key, list(default))
        if (
            not isinstance(v, (list, tuple))
            or len(v) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)
        ):
            raise ConfigError(f"{self._at(key)} must be a pair of numbers")
        return (float(v[0]), float(v[1]))

    def int_list(self, key: str, default: list[int] | None) -> list[int] | None:
        v = self.take(key, default)
        if v is None:
            return None
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
            raise ConfigError(f"{self._at(key)} must be a list of integers")
        return list(v)

    def finish(self) -> None:
        unknown = set(self.doc) - self.seen
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"unknown key {self._at(name)!r}")


def _parse_dynamics(node: _Node | None) -> DynamicsParams:
    d = DynamicsParams()
    if node is None:
        return d
    kwargs = {
        name: node.number(name, getattr(d, name))
        for name in (
            "dt",
            "tau_max",
            "k_d",
            "c_f",
            "c_t",
            "m",
            "inertia",
            "k_drag",
            "k_rot",
            "a_max",
            "sigma_stance",
        )
    }
    node.finish()
    try:
        return DynamicsParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{node.path}: {exc}") from exc


def _parse_episode(node: _Node | None, training_style: str, info_style: str) -> EpisodeConfig:
    defaults = EpisodeConfig()
    if node is None:
        return EpisodeConfig(training_style=training_style, info_style=info_style)

    # styles are determined by the variant; a stored value must agree
    for key, expected in (("training_style", training_style), ("info_style", info_style)):
        stored = node.string(key, expected)
        if stored != expected:
            raise ConfigError(
                f"{node.path}.{key} is {stored!r} but the variant implies {expected!r}"
            )

    perimeter_node = node.child("perimeter")
    if perimeter_node is None:
        perimeter = TrainingPerimeter()
    else:
        center = perimeter_node.pair("center", TrainingPerimeter().center)
        half = perimeter_node.number("half_extent", TrainingPerimeter().half_extent)
        perimeter_node.finish()
        try:
            perimeter = TrainingPerimeter(center=center, half_extent=half)
        except ValueError as exc:
            raise ConfigError(f"{perimeter_node.path}: {exc}") from exc

    reward_node = node.child("reward")
    if reward_node is None:
        reward = RewardWeights()
    else:
        w = reward_node.number("w_energy", RewardWeights().w_energy)
        b = reward_node.number("hit_bonus", RewardWeights().hit_bonus)
        reward_node.finish()
        try:
            reward = RewardWeights(w_energy=w, hit_bonus=b)
        except ValueError as exc:
            raise ConfigError(f"{reward_node.path}: {exc}") from exc

    dynamics = _parse_dynamics(node.child("dynamics"))
    kwargs = dict(
        agent_kind=node.string("agent_kind", defaults.agent_kind),
        training_style=training_style,
        info_style=info_style,
        m_waypoints=node.integer("m_waypoints", defaults.m_waypoints),
        boundary=node.pair("boundary", defaults.boundary),
        perimeter=perimeter,
        reward=reward,
        dynamics=dynamics,
        t_ep=node.number("t_ep", defaults.t_ep),
        t_inc=node.number("t_inc", defaults.t_inc),
        pos_scale=node.number("pos_scale", defaults.pos_scale),
        vel_scale=node.number("vel_scale", defaults.vel_scale),
    )
    node.finish()
    try:
        return EpisodeConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{node.path}: {exc}") from exc


def parse_train_config(doc: Any) -> TrainConfig:
    """Nested document -> TrainConfig; missing fields take documented defaults."""
    node = _Node(doc, "")
    defaults = TrainConfig()
    variant_id = node.integer("variant_id", defaults.variant_id)
    try:
        v = variant(variant_id)
    except ValueError as exc:
        raise ConfigError(f"variant_id: {exc}") from exc

    episode = _parse_episode(node.child("episode"), v.training_style, v.info_style)
    kwargs = dict(
        variant_id=variant_id,
        episode=episode,
        n_iterations=node.integer("n_iterations", defaults.n_iterations),
        episodes_per_batch=node.integer("episodes_per_batch", defaults.episodes_per_batch),
        gamma=node.number("gamma", defaults.gamma),
        policy_lr=node.number("policy_lr", defaults.policy_lr),
        value_lr=node.number("value_lr", defaults.value_lr),
        entropy_coef=node.number("entropy_coef", defaults.entropy_coef),
        seed=node.integer("seed", defaults.seed),
        policy_hidden=node.int_list("policy_hidden", defaults.policy_hidden),
        value_hidden=node.int_list("value_hidden", defaults.value_hidden),
        n_workers=node.integer("n_workers", defaults.n_workers),
        checkpoint_every=node.integer("checkpoint_every", defaults.checkpoint_every),
    )
    node.finish()
    try:
        return TrainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def train_config_document(config: TrainConfig) -> dict:
    e = config.episode
    return {
        "variant_id": config.variant_id,
        "n_iterations": config.n_iterations,
        "episodes_per_batch": config.episodes_per_batch,
        "gamma": config.gamma,
        "policy_lr": config.policy_lr,
        "value_lr": config.value_lr,
        "entropy_coef": config.entropy_coef,
        "seed": config.seed,
        "policy_hidden": config.policy_hidden,
        "value_hidden": config.value_hidden,
        "n_workers": config.n_workers,
        "checkpoint_every": config.checkpoint_every,
        "episode": {
            "agent_kind": e.agent_kind,
            "training_style": e.training_style,
            "info_style": e.info_style,
            "m_waypoints": e.m_waypoints,
            "boundary": list(e.boundary),
            "t_ep": e.t_ep,
            "t_inc": e.t_inc,
            "pos_scale": e.pos_scale,
            "vel_scale": e.vel_scale,
            "perimeter": {
                "center": list(e.perimeter.center),
                "half_extent": e.perimeter.half_extent,
            },
            "reward": {"w_energy": e.reward.w_energy, "hit_bonus": e.reward.hit_bonus},
            "dynamics": {
                "dt": e.dynamics.dt,
                "tau_max": e.dynamics.tau_max,
                "k_d": e.dynamics.k_d,
                "c_f": e.dynamics.c_f,
                "c_t": e.dynamics.c_t,
                "m": e.dynamics.m,
                "inertia": e.dynamics.inertia,
                "k_drag": e.dynamics.k_drag,
                "k_rot": e.dynamics.k_rot,
                "a_max": e.dynamics.a_max,
                "sigma_stance": e.dynamics.sigma_stance,
            },
        },
    }


def load_config(path: str | Path) -> TrainConfig:
    try:
        with Path(path).open(encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_train_config(doc)


def _write_json(doc: dict, path: Path) -> None:
    """Write atomically so a crash never leaves a truncated document."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_config(config: TrainConfig, path: str | Path) -> Path:
    path = Path(path)
    _write_json(train_config_document(config), path)
    return path


def _mlp_document(params: MlpParams) -> dict:
    return {
        "input": params.dims.input,
        "hidden": list(params.dims.hidden),
        "output": params.dims.output,
        "weights": [w.reshape(-1).tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def _parse_mlp(doc: Any, name: str) -> MlpParams:
    if not isinstance(doc, dict):
        raise CheckpointError(f"{name} must be an object")
    try:
        dims = LayerDims(doc["input"], list(doc["hidden"]), doc["output"])
        flat_weights = doc["weights"]
        flat_biases = doc["biases"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{name} is missing network fields: {exc}") from exc
    pairs = dims.pairs()
    if len(flat_weights) != len(pairs) or len(flat_biases) != len(pairs):
        raise CheckpointError(f"{name} has {len(flat_weights)} weight blocks, expected {len(pairs)}")
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(pairs):
        w = np.asarray(flat_weights[i], dtype=float)
        b = np.asarray(flat_biases[i], dtype=float)
        if w.size != fan_out * fan_in or b.size != fan_out:
            raise CheckpointError(
                f"{name} layer {i}: expected {fan_out}x{fan_in} weights and "
                f"{fan_out} biases, got {w.size} and {b.size}"
            )
        weights.append(w.reshape(fan_out, fan_in))
        biases.append(b)
    return MlpParams(dims=dims, weights=weights, biases=biases)


def checkpoint_document(checkpoint: Checkpoint) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "iteration": checkpoint.iteration,
        "config": train_config_document(checkpoint.config),
        "policy": _mlp_document(checkpoint.policy),
        "log_std": checkpoint.head.log_std.tolist(),
        "value": _mlp_document(checkpoint.value),
    }


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    path = Path(path)
    _write_json(checkpoint_document(checkpoint), path)
    return path


def parse_checkpoint(doc: Any) -> Checkpoint:
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint document must be an object")
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not a {CHECKPOINT_FORMAT} document")
    version = doc.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version!r} (supported: {CHECKPOINT_VERSION})"
        )
    config = parse_train_config(doc.get("config", {}))
    policy = _parse_mlp(doc.get("policy"), "policy")
    value = _parse_mlp(doc.get("value"), "value")
    log_std = np.asarray(doc.get("log_std"), dtype=float)
    if log_std.shape != (config.episode.action_dim,):
        raise CheckpointError(
            f"log_std has shape {log_std.shape}, expected ({config.episode.action_dim},)"
        )
    iteration = doc.get("iteration", 0)
    if isinstance(iteration, bool) or not isinstance(iteration, int) or iteration < 0:
        raise CheckpointError("iteration must be a non-negative integer")
    if policy.dims.input != config.episode.observation_dim:
        raise CheckpointError(
            f"policy input {policy.dims.input} does not match the episode "
            f"observation size {config.episode.observation_dim}"
        )
    return Checkpoint(
        config=config,
        policy=policy,
        head=GaussianHead(log_std=log_std),
        value=value,
        iteration=iteration,
    )


def load_checkpoint(path: str | Path) -> Checkpoint:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"checkpoint not found: {p}")
    try:
        with p.open(encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        return parse_checkpoint(doc)
    except ConfigError as exc:
        raise CheckpointError(f"{p}: bad embedded config: {exc}") from exc
