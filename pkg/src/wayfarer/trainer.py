"""Advantage policy-gradient training over the five policy variants.

Each iteration collects a batch of complete episodes (fresh waypoints per
episode), computes discounted returns and a learned-baseline advantage,
and applies one REINFORCE update with entropy regularization via Adam.

Determinism contract: every episode's randomness comes from a generator
seeded by (config seed, iteration, episode index), so batches are
bit-identical regardless of how episodes are scheduled across workers,
and a fixed config yields a bit-identical checkpoint.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .env import (
    RANDOM_WAYPOINTS,
    SINGLE_POINT,
    STATE_GOAL,
    STATE_NOISE,
    STATE_ONLY,
    EpisodeConfig,
    WaypointEnv,
)
from .nn import (
    GaussianHead,
    Gradients,
    LayerDims,
    MlpParams,
    init_params,
    log_prob_grad,
    mlp_backward,
    mlp_forward,
    sample_action,
)
from .sim import ANT, POINT_MASS

METRICS_HEADER = [
    "iteration",
    "env_steps",
    "mean_return",
    "mean_episode_len",
    "mean_waypoints",
    "policy_loss",
    "value_loss",
    "entropy",
]

# paper-scale network for the ant, desk-scale for the reference point-mass
DEFAULT_POLICY_HIDDEN = {ANT: [128] * 6, POINT_MASS: [64, 64]}
DEFAULT_VALUE_HIDDEN = [64, 64]
LOG_STD_INIT = -0.5


class TrainerError(RuntimeError):
    """Raised when an update produces unusable (non-finite) gradients."""


@dataclass(frozen=True)
class PolicyVariant:
    id: int
    training_style: str
    info_style: str


VARIANTS = {
    1: PolicyVariant(1, SINGLE_POINT, STATE_ONLY),
    2: PolicyVariant(2, RANDOM_WAYPOINTS, STATE_ONLY),
    3: PolicyVariant(3, RANDOM_WAYPOINTS, STATE_NOISE),
    4: PolicyVariant(4, SINGLE_POINT, STATE_GOAL),
    5: PolicyVariant(5, RANDOM_WAYPOINTS, STATE_GOAL),
}


def variant(variant_id: int) -> PolicyVariant:
    if variant_id not in VARIANTS:
        raise ValueError(f"variant must be in 1..5, got {variant_id}")
    return VARIANTS[variant_id]


@dataclass
class TrainConfig:
    variant_id: int = 5
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    n_iterations: int = 500
    episodes_per_batch: int = 8
    gamma: float = 0.99
    policy_lr: float = 3e-4
    value_lr: float = 1e-3
    entropy_coef: float = 0.01
    seed: int = 0
    policy_hidden: list[int] | None = None
    value_hidden: list[int] = field(default_factory=lambda: list(DEFAULT_VALUE_HIDDEN))
    n_workers: int = 1
    checkpoint_every: int = 100

    def __post_init__(self) -> None:
        variant(self.variant_id)
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.policy_lr <= 0 or self.value_lr <= 0:
            raise ValueError("learning rates must be > 0")
        if self.episodes_per_batch < 1:
            raise ValueError("episodes_per_batch must be >= 1")
        if self.n_iterations < 0:
            raise ValueError("n_iterations must be >= 0")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")

    def policy_dims(self) -> LayerDims:
        hidden = self.policy_hidden
        if hidden is None:
            hidden = DEFAULT_POLICY_HIDDEN[self.episode.agent_kind]
        return LayerDims(self.episode.observation_dim, list(hidden), self.episode.action_dim)

    def value_dims(self) -> LayerDims:
        return LayerDims(self.episode.observation_dim, list(self.value_hidden), 1)


def make_train_config(variant_id: int, agent_kind: str = ANT, **overrides) -> TrainConfig:
    """TrainConfig with the episode wired up for the given policy variant."""
    v = variant(variant_id)
    episode_kwargs = overrides.pop("episode_kwargs", {})
    episode = EpisodeConfig(
        agent_kind=agent_kind,
        training_style=v.training_style,
        info_style=v.info_style,
        **episode_kwargs,
    )
    return TrainConfig(variant_id=variant_id, episode=episode, **overrides)


@dataclass
class RolloutBatch:
    """Flat per-step records grouped by episode and time-ordered within each."""

    obs: np.ndarray  # (n, obs_dim)
    actions: np.ndarray  # (n, act_dim), pre-clamp samples
    log_probs: np.ndarray  # (n,)
    rewards: np.ndarray  # (n,)
    episode_ids: np.ndarray  # (n,) int
    step_index: np.ndarray  # (n,) int
    ep_returns: np.ndarray  # (episodes,)
    ep_lengths: np.ndarray  # (episodes,) int
    ep_waypoints: np.ndarray  # (episodes,) int
    # filled by compute_returns_advantages
    returns: np.ndarray | None = None
    advantages: np.ndarray | None = None
    value_targets: np.ndarray | None = None
    return_mean: float = 0.0
    return_std: float = 1.0

    def __len__(self) -> int:
        return self.obs.shape[0]


@dataclass
class Checkpoint:
    """Self-contained policy bundle: evaluation needs nothing else."""

    config: TrainConfig
    policy: MlpParams
    head: GaussianHead
    value: MlpParams
    iteration: int = 0

    @property
    def variant_id(self) -> int:
        return self.config.variant_id

    @property
    def episode(self) -> EpisodeConfig:
        return self.config.episode

    @property
    def seed(self) -> int:
        return self.config.seed

    def copy(self) -> "Checkpoint":
        return Checkpoint(
            config=self.config,
            policy=self.policy.copy(),
            head=self.head.copy(),
            value=self.value.copy(),
            iteration=self.iteration,
        )

    def policy_mean(self, obs: np.ndarray) -> np.ndarray:
        out, _ = mlp_forward(self.policy, obs)
        return out


def init_checkpoint(config: TrainConfig) -> Checkpoint:
    root = np.random.SeedSequence(config.seed)
    policy_ss, value_ss = root.spawn(2)
    policy = init_params(config.policy_dims(), np.random.default_rng(policy_ss))
    value = init_params(config.value_dims(), np.random.default_rng(value_ss))
    head = GaussianHead(log_std=np.full(config.episode.action_dim, LOG_STD_INIT))
    return Checkpoint(config=config, policy=policy, head=head, value=value, iteration=0)


# any object with reset(rng) -> obs, step(action) -> StepResult, and a
# waypoints_reached attribute can stand in for WaypointEnv here
EnvFactory = Callable[[EpisodeConfig], WaypointEnv]


def _default_env_factory(episode: EpisodeConfig) -> WaypointEnv:
    return WaypointEnv(episode)


def episode_seed(seed: int, iteration: int, episode_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((seed, iteration, episode_index))


def rollout_episode(
    policy: MlpParams,
    head: GaussianHead,
    episode: EpisodeConfig,
    seed_key: tuple[int, int, int],
    env_factory: EnvFactory = _default_env_factory,
) -> dict:
    """One complete stochastic episode under a (seed, iteration, index) key."""
    rng = np.random.default_rng(episode_seed(*seed_key))
    env = env_factory(episode)
    obs = env.reset(rng)
    obs_rows, act_rows, logp_rows, reward_rows = [], [], [], []
    done = False
    while not done:
        mean, _ = mlp_forward(policy, obs)
        action, logp = sample_action(mean, head, rng)
        result = env.step(action)
        obs_rows.append(obs)
        act_rows.append(action)
        logp_rows.append(logp)
        reward_rows.append(result.reward)
        obs = result.observation
        done = result.done
    return {
        "obs": np.asarray(obs_rows),
        "actions": np.asarray(act_rows),
        "log_probs": np.asarray(logp_rows),
        "rewards": np.asarray(reward_rows),
        "waypoints": env.waypoints_reached,
    }


def collect_rollouts(
    checkpoint: Checkpoint,
    config: TrainConfig,
    iteration: int,
    env_factory: EnvFactory = _default_env_factory,
    pool: ProcessPoolExecutor | None = None,
) -> RolloutBatch:
    """episodes_per_batch complete episodes, identical for any worker count."""
    keys = [(config.seed, iteration, ep) for ep in range(config.episodes_per_batch)]
    if pool is not None:
        futures = [
            pool.submit(rollout_episode, checkpoint.policy, checkpoint.head, config.episode, k)
            for k in keys
        ]
        episodes = [f.result() for f in futures]
    else:
        episodes = [
            rollout_episode(checkpoint.policy, checkpoint.head, config.episode, k, env_factory)
            for k in keys
        ]

    obs = np.concatenate([e["obs"] for e in episodes])
    actions = np.concatenate([e["actions"] for e in episodes])
    log_probs = np.concatenate([e["log_probs"] for e in episodes])
    rewards = np.concatenate([e["rewards"] for e in episodes])
    lengths = np.array([len(e["rewards"]) for e in episodes], dtype=int)
    episode_ids = np.repeat(np.arange(len(episodes)), lengths)
    step_index = np.concatenate([np.arange(n) for n in lengths])
    return RolloutBatch(
        obs=obs,
        actions=actions,
        log_probs=log_probs,
        rewards=rewards,
        episode_ids=episode_ids,
        step_index=step_index,
        ep_returns=np.array([float(np.sum(e["rewards"])) for e in episodes]),
        ep_lengths=lengths,
        ep_waypoints=np.array([e["waypoints"] for e in episodes], dtype=int),
    )


def discounted_returns(rewards: np.ndarray, gamma: float) -> np.ndarray:
    out = np.empty_like(rewards, dtype=float)
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


def compute_returns_advantages(
    batch: RolloutBatch, gamma: float, value: MlpParams
) -> RolloutBatch:
    """Annotate per-step returns, baseline advantages, and value targets.

    The value net regresses batch-normalized returns (targets scaled to
    roughly unit range), and its denormalized prediction serves as the
    baseline; advantages are then whitened per batch.
    """
    if len(batch) == 0:
        raise ValueError("cannot annotate an empty batch")
    returns = np.empty(len(batch))
    start = 0
    for n in batch.ep_lengths:
        returns[start : start + n] = discounted_returns(batch.rewards[start : start + n], gamma)
        start += n

    mean_g = float(np.mean(returns))
    std_g = float(np.std(returns))
    scale = max(std_g, 1e-8)

    v_out, _ = mlp_forward(value, batch.obs)
    baseline = mean_g + scale * v_out[:, 0]
    adv = returns - baseline
    adv = (adv - np.mean(adv)) / (np.std(adv) + 1e-8)

    batch.returns = returns
    batch.value_targets = (returns - mean_g) / scale
    batch.advantages = adv
    batch.return_mean = mean_g
    batch.return_std = scale
    return batch


class Adam:
    """Adaptive moment estimation over a list of parameter arrays."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g
            m_hat = self.m[i] / bias1
            v_hat = self.v[i] / bias2
            out.append(p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return out


@dataclass
class OptState:
    policy: Adam
    log_std: Adam
    value: Adam


def init_opt_state(config: TrainConfig) -> OptState:
    return OptState(
        policy=Adam(config.policy_lr),
        log_std=Adam(config.policy_lr),
        value=Adam(config.value_lr),
    )


def _split_params(flat: list[np.ndarray], like: MlpParams) -> MlpParams:
    n = len(like.weights)
    return MlpParams(dims=like.dims, weights=flat[:n], biases=flat[n:])


def _check_gradients(grads: Gradients, context: str) -> None:
    for arr in (*grads.weights, *grads.biases):
        if not np.all(np.isfinite(arr)):
            raise TrainerError(f"non-finite gradient in {context}")


def update(
    checkpoint: Checkpoint, batch: RolloutBatch, opt: OptState
) -> tuple[Checkpoint, dict]:
    """One REINFORCE-with-baseline step; returns the new checkpoint and metrics."""
    if batch.advantages is None or batch.value_targets is None:
        raise ValueError("batch must be annotated by compute_returns_advantages first")
    config = checkpoint.config
    n = len(batch)
    adv = batch.advantages

    # policy gradient through the mean head
    means, cache = mlp_forward(checkpoint.policy, batch.obs)
    d_mean, d_log_std_per = log_prob_grad(means, checkpoint.head, batch.actions)
    gout = -(adv[:, None] * d_mean) / n
    pol_grads = mlp_backward(checkpoint.policy, cache, gout)
    _check_gradients(pol_grads, "policy network")

    entropy = checkpoint.head.entropy()
    g_log_std = -np.sum(adv[:, None] * d_log_std_per, axis=0) / n - config.entropy_coef
    if not np.all(np.isfinite(g_log_std)):
        raise TrainerError("non-finite gradient in gaussian head")

    # value regression on normalized returns
    v_out, v_cache = mlp_forward(checkpoint.value, batch.obs)
    v_err = v_out[:, 0] - batch.value_targets
    value_loss = float(np.mean(v_err**2))
    val_grads = mlp_backward(checkpoint.value, v_cache, (2.0 * v_err / n)[:, None])
    _check_gradients(val_grads, "value network")

    new_policy = _split_params(
        opt.policy.step(checkpoint.policy.arrays(), [*pol_grads.weights, *pol_grads.biases]),
        checkpoint.policy,
    )
    new_log_std = opt.log_std.step([checkpoint.head.log_std], [g_log_std])[0]
    new_head = GaussianHead(log_std=new_log_std)
    new_head.clamp()
    new_value = _split_params(
        opt.value.step(checkpoint.value.arrays(), [*val_grads.weights, *val_grads.biases]),
        checkpoint.value,
    )

    policy_loss = float(-np.mean(batch.log_probs * adv) - config.entropy_coef * entropy)
    metrics = {
        "mean_return": float(np.mean(batch.ep_returns)),
        "mean_episode_len": float(np.mean(batch.ep_lengths)),
        "mean_waypoints": float(np.mean(batch.ep_waypoints)),
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy,
    }
    new_ckpt = Checkpoint(
        config=config,
        policy=new_policy,
        head=new_head,
        value=new_value,
        iteration=checkpoint.iteration + 1,
    )
    return new_ckpt, metrics


class MetricsWriter:
    """Append-only CSV history with the fixed training-metrics header."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("w", newline="") as f:
            csv.writer(f).writerow(METRICS_HEADER)

    def append(self, iteration: int, env_steps: int, metrics: dict) -> None:
        row = [iteration, env_steps] + [metrics[k] for k in METRICS_HEADER[2:]]
        with self.path.open("a", newline="") as f:
            csv.writer(f).writerow(row)


def train(
    config: TrainConfig,
    env_factory: EnvFactory = _default_env_factory,
    out_dir: str | Path | None = None,
    metrics_path: str | Path | None = None,
    checkpoint_writer: Callable[[Checkpoint], None] | None = None,
    progress: Callable[[int, dict], None] | None = None,
) -> Checkpoint:
    """Run the collect/annotate/update loop for config.n_iterations.

    With ``out_dir`` set, writes ``metrics.csv`` plus periodic and final
    checkpoints under ``out_dir/checkpoints/``; the explicit hooks
    override the corresponding default.
    """
    if out_dir is not None:
        out = Path(out_dir)
        if metrics_path is None:
            metrics_path = out / "metrics.csv"
        if checkpoint_writer is None:
            from . import storage  # deferred: storage imports this module

            def checkpoint_writer(ckpt: Checkpoint) -> None:
                path = out / "checkpoints" / f"ckpt_{ckpt.iteration:06d}.json"
                storage.save_checkpoint(ckpt, path)
                storage.save_checkpoint(ckpt, out / "checkpoints" / "latest.json")

    checkpoint = init_checkpoint(config)
    opt = init_opt_state(config)
    writer = MetricsWriter(metrics_path) if metrics_path else None
    env_steps = 0

    pool = None
    if config.n_workers > 1:
        pool = ProcessPoolExecutor(max_workers=config.n_workers)
    try:
        for it in range(config.n_iterations):
            batch = collect_rollouts(checkpoint, config, it, env_factory, pool)
            batch = compute_returns_advantages(batch, config.gamma, checkpoint.value)
            checkpoint, metrics = update(checkpoint, batch, opt)
            env_steps += len(batch)
            if writer is not None:
                writer.append(checkpoint.iteration, env_steps, metrics)
            if progress is not None:
                progress(checkpoint.iteration, metrics)
            if (
                checkpoint_writer is not None
                and config.checkpoint_every > 0
                and checkpoint.iteration % config.checkpoint_every == 0
            ):
                checkpoint_writer(checkpoint)
    finally:
        if pool is not None:
            pool.shutdown()

    if checkpoint_writer is not None:
        checkpoint_writer(checkpoint)
    return checkpoint
