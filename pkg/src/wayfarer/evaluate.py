"""Checkpoint evaluation: fixed test cases, success ratios, trajectories.

A trial runs one episode whose waypoints come from the test case instead
of the training sampler, through the exact same environment code paths
used in training (same hit test, same clock law). Success means every
waypoint of the case was reached before the rolling deadline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .env import WaypointEnv
from .nn import mlp_forward, sample_action
from .trainer import Checkpoint

TRAJECTORY_HEADER = ["t", "x", "y", "yaw", "current_goal_x", "current_goal_y", "waypoints_reached"]
REPORT_HEADER = ["case", "trials", "successes", "ratio"]


@dataclass(frozen=True)
class TestCase:
    name: str
    waypoints: tuple[tuple[float, float], ...]
    trials: int = 10

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("a test case needs at least one waypoint")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")


@dataclass
class TrialResult:
    success: bool
    waypoints_reached: int
    time_to_each: list[float]
    # rows (t, x, y, yaw, current_goal_x, current_goal_y, waypoints_reached)
    trajectory: list[tuple[float, float, float, float, float, float, int]]
    total_reward: float = 0.0


@dataclass
class SuccessReport:
    case: TestCase
    results: list[TrialResult] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.results)

    @property
    def successes(self) -> int:
        return sum(1 for r in self.results if r.success)

    @property
    def ratio(self) -> float:
        if not self.results:
            raise ValueError("report has no trials")
        return self.successes / self.trials


_SINGLE_POINTS = [(10, 10), (14, 14), (12, 8), (8, 12), (13, 7), (7, 13), (6, 6)]
_TWO_POINT_FIRST = [(7, 7), (7, 12), (12, 7)]


def builtin_suite(trials: int = 10) -> list[TestCase]:
    """Seven single-point goals plus three two-point paths ending at (14,14).

    Goals outside the training square are intentional: they probe how far
    the policy generalizes beyond where its waypoints were ever sampled.
    """
    cases = [
        TestCase(f"goto_{x}_{y}", ((float(x), float(y)),), trials) for x, y in _SINGLE_POINTS
    ]
    cases += [
        TestCase(
            f"via_{x}_{y}_to_14_14", ((float(x), float(y)), (14.0, 14.0)), trials
        )
        for x, y in _TWO_POINT_FIRST
    ]
    return cases


def _validate_checkpoint(checkpoint: Checkpoint) -> None:
    dims = checkpoint.policy.dims
    episode = checkpoint.episode
    if dims.input != episode.observation_dim or dims.output != episode.action_dim:
        raise ValueError(
            f"checkpoint policy is {dims.input}->{dims.output} but the episode "
            f"config implies {episode.observation_dim}->{episode.action_dim}"
        )


def run_trial(
    checkpoint: Checkpoint,
    test_case: TestCase,
    rng: np.random.Generator,
    deterministic: bool = False,
) -> TrialResult:
    """One episode on the case's waypoints, recording the full trajectory."""
    _validate_checkpoint(checkpoint)
    env = WaypointEnv(checkpoint.episode)
    env.reset(rng, waypoints=list(test_case.waypoints))

    def snapshot() -> tuple[float, float, float, float, float, float, int]:
        b = env.state.body
        gx, gy = env.goals.current()
        return (env.clock.t, b.x, b.y, b.yaw, gx, gy, env.waypoints_reached)

    trajectory = [snapshot()]
    time_to_each: list[float] = []
    total_reward = 0.0
    # episode self-terminates; the cap only guards against a broken clock
    step_cap = env.config.max_steps + 2
    obs = env.observation()
    for _ in range(step_cap):
        mean, _ = mlp_forward(checkpoint.policy, obs)
        if deterministic:
            action = mean
        else:
            action, _ = sample_action(mean, checkpoint.head, rng)
        result = env.step(action)
        total_reward += result.reward
        if result.hit:
            time_to_each.append(env.clock.t)
        trajectory.append(snapshot())
        obs = result.observation
        if result.done:
            break
    else:
        raise RuntimeError("episode failed to terminate within the clock horizon")

    reached = env.waypoints_reached
    return TrialResult(
        success=reached == len(test_case.waypoints),
        waypoints_reached=reached,
        time_to_each=time_to_each,
        trajectory=trajectory,
        total_reward=total_reward,
    )


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, trial_index)))


def success_ratio(
    checkpoint: Checkpoint,
    test_case: TestCase,
    seed: int = 0,
    deterministic: bool = False,
) -> SuccessReport:
    """Repeat the case over independently seeded trials and tally successes."""
    if test_case.trials == 0:
        raise ValueError("cannot compute a ratio over zero trials")
    results = [
        run_trial(checkpoint, test_case, trial_rng(seed, t), deterministic)
        for t in range(test_case.trials)
    ]
    return SuccessReport(case=test_case, results=results)


def case_seed(seed: int, case_index: int) -> int:
    """Decorrelate per-case trial streams from one evaluation seed."""
    return int(np.random.SeedSequence((seed, case_index)).generate_state(1, np.uint64)[0])


def evaluate_suite(
    checkpoint: Checkpoint,
    cases: list[TestCase] | None = None,
    seed: int = 0,
    deterministic: bool = False,
    trials: int | None = None,
    traj_dir: str | Path | None = None,
) -> list[SuccessReport]:
    """success_ratio over each case; optionally export every trial trajectory."""
    if cases is None:
        cases = builtin_suite()
    if trials is not None:
        cases = [replace(c, trials=trials) for c in cases]
    reports = []
    for i, case in enumerate(cases):
        report = success_ratio(checkpoint, case, case_seed(seed, i), deterministic)
        if traj_dir is not None:
            for t, result in enumerate(report.results):
                export_trajectory(result, Path(traj_dir) / f"{case.name}_trial{t:02d}.csv")
        reports.append(report)
    return reports


def export_trajectory(result: TrialResult, destination: str | Path) -> Path:
    """Write the per-step trajectory CSV (first row is the t=0 start state)."""
    path = Path(destination)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TRAJECTORY_HEADER)
            for t, x, y, yaw, gx, gy, reached in result.trajectory:
                writer.writerow(
                    [f"{t:.6g}", f"{x:.9g}", f"{y:.9g}", f"{yaw:.9g}", gx, gy, reached]
                )
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc
    return path


def write_reports(reports: list[SuccessReport], destination: str | Path) -> Path:
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_HEADER)
        for r in reports:
            writer.writerow([r.case.name, r.trials, r.successes, f"{r.ratio:.4g}"])
    return path


def format_report_table(reports: list[SuccessReport]) -> str:
    """Human-readable summary printed by the CLI alongside the CSV."""
    width = max(len("case"), *(len(r.case.name) for r in reports)) if reports else 4
    lines = [f"{'case':<{width}}  trials  successes  ratio"]
    for r in reports:
        lines.append(f"{r.case.name:<{width}}  {r.trials:>6}  {r.successes:>9}  {r.ratio:>5.2f}")
    return "\n".join(lines)
