"""Command-line front end: train, eval, serve, inspect.

Exit codes are a stable contract: 0 success, 1 usage or configuration
error, 2 runtime failure. The default seed comes from WAYFARER_SEED when
set, otherwise 0; an explicit --seed always wins.

Output directory layout (train and eval share --out, default ./out):

    out/checkpoints/ckpt_NNNNNN.json   periodic + final checkpoints
    out/checkpoints/latest.json        copy of the newest checkpoint
    out/config.json                    resolved training configuration
    out/metrics.csv                    per-iteration training history
    out/reports.csv                    evaluation success ratios
    out/traj/                          per-trial trajectory CSVs
    out/plots/                         rendered figures for the above
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluate, storage, teleop, trainer
from .sim import ANT, POINT_MASS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(ValueError):
    """Bad flags or bad input files; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here reserves
    # 2 for runtime failures, so route them through UsageError instead
    def error(self, message):  # noqa: A002 - argparse signature
        raise UsageError(message)


def default_seed() -> int:
    raw = os.environ.get("WAYFARER_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"WAYFARER_SEED must be an integer, got {raw!r}") from None


def parse_waypoints(text: str) -> list[tuple[float, float]]:
    """'x1,y1;x2,y2' -> [(x1, y1), (x2, y2)]"""
    points = []
    for i, chunk in enumerate(text.split(";")):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise UsageError(f"waypoint {i}: expected 'x,y', got {chunk!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise UsageError(f"waypoint {i}: non-numeric coordinate in {chunk!r}") from None
    if not points:
        raise UsageError("waypoint list is empty")
    return points


def _out_dirs(out: str) -> dict[str, Path]:
    root = Path(out)
    return {
        "root": root,
        "checkpoints": root / "checkpoints",
        "traj": root / "traj",
        "plots": root / "plots",
    }


def cmd_train(args: argparse.Namespace) -> int:
    if args.config:
        config = storage.load_config(args.config)
    else:
        config = trainer.make_train_config(args.variant or 5, agent_kind=args.agent or ANT)

    overrides = {}
    if args.variant is not None and args.config:
        overrides["variant_id"] = args.variant
    if args.iterations is not None:
        overrides["n_iterations"] = args.iterations
    if args.episodes_per_batch is not None:
        overrides["episodes_per_batch"] = args.episodes_per_batch
    if args.seed is not None:
        overrides["seed"] = args.seed
    else:
        overrides["seed"] = default_seed()
    if args.policy_lr is not None:
        overrides["policy_lr"] = args.policy_lr
    if args.value_lr is not None:
        overrides["value_lr"] = args.value_lr
    if args.entropy_coef is not None:
        overrides["entropy_coef"] = args.entropy_coef
    if args.workers is not None:
        overrides["n_workers"] = args.workers
    if args.checkpoint_every is not None:
        overrides["checkpoint_every"] = args.checkpoint_every
    try:
        if args.config and (args.agent or (args.variant is not None)):
            # flag overrides on top of a config file rebuild the episode
            episode = replace(
                config.episode,
                agent_kind=args.agent or config.episode.agent_kind,
                training_style=trainer.variant(
                    overrides.get("variant_id", config.variant_id)
                ).training_style,
                info_style=trainer.variant(
                    overrides.get("variant_id", config.variant_id)
                ).info_style,
            )
            overrides["episode"] = episode
        config = replace(config, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    dirs = _out_dirs(args.out)
    dirs["checkpoints"].mkdir(parents=True, exist_ok=True)
    storage.save_config(config, dirs["root"] / "config.json")

    stride = max(1, config.n_iterations // 20)

    def progress(iteration: int, metrics: dict) -> None:
        if iteration % stride == 0 or iteration == config.n_iterations:
            print(
                f"[iter {iteration:>5}] return={metrics['mean_return']:8.2f} "
                f"waypoints={metrics['mean_waypoints']:.2f} "
                f"entropy={metrics['entropy']:.2f}",
                flush=True,
            )

    print(
        f"training variant {config.variant_id} on {config.episode.agent_kind} "
        f"for {config.n_iterations} iterations (seed {config.seed})"
    )
    trainer.train(config, out_dir=dirs["root"], progress=progress)
    print(f"final checkpoint: {dirs['checkpoints'] / 'latest.json'}")

    if config.n_iterations > 0:
        from . import plots

        curve = plots.plot_training_curves(
            dirs["root"] / "metrics.csv", dirs["plots"] / "training.png"
        )
        print(f"training curves: {curve}")
    return EXIT_OK


def _load_checkpoint(path: str) -> trainer.Checkpoint:
    try:
        return storage.load_checkpoint(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    except storage.CheckpointError as exc:
        raise UsageError(str(exc)) from exc


def cmd_eval(args: argparse.Namespace) -> int:
    ckpt = _load_checkpoint(args.checkpoint)
    seed = args.seed if args.seed is not None else default_seed()

    if args.waypoints:
        waypoints = tuple(parse_waypoints(args.waypoints))
        name = "custom_" + "_".join(f"{x:g}x{y:g}" for x, y in waypoints)
        cases = [evaluate.TestCase(name, waypoints, args.trials or 10)]
    elif args.suite == "builtin":
        cases = evaluate.builtin_suite(args.trials or 10)
    else:
        raise UsageError(f"unknown suite {args.suite!r}")

    dirs = _out_dirs(args.out)
    traj_dir = Path(args.export_traj) if args.export_traj else dirs["traj"]
    reports = evaluate.evaluate_suite(
        ckpt, cases, seed=seed, deterministic=args.deterministic, traj_dir=traj_dir
    )
    print(evaluate.format_report_table(reports))
    report_path = evaluate.write_reports(reports, dirs["root"] / "reports.csv")
    print(f"reports: {report_path}")

    if not args.no_plots:
        from . import plots

        paths = plots.plot_suite(reports, ckpt.episode, dirs["plots"])
        print(f"figures: {paths[0].parent} ({len(paths)} files)")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    ckpt = _load_checkpoint(args.checkpoint)
    seed = args.seed if args.seed is not None else default_seed()
    console_dir = args.console_dir
    if console_dir is None and Path("frontend/dist").is_dir():
        console_dir = "frontend/dist"
    if console_dir is not None and not Path(console_dir).is_dir():
        raise UsageError(f"console directory not found: {console_dir}")
    print(f"serving ws://{args.host}:{args.port}/ws (delay {args.command_delay_ms} ms)")
    if console_dir:
        print(f"console: http://{args.host}:{args.port}/ from {console_dir}")
    try:
        teleop.serve(
            ckpt,
            host=args.host,
            port=args.port,
            delay_ms=args.command_delay_ms,
            strict_clock=args.strict_clock,
            seed=seed,
            console_dir=console_dir,
        )
    except OSError as exc:
        raise RuntimeError(f"cannot bind {args.host}:{args.port}: {exc}") from exc
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    ckpt = _load_checkpoint(args.checkpoint)
    e = ckpt.episode
    policy_params = sum(w.size for w in ckpt.policy.weights) + sum(
        b.size for b in ckpt.policy.biases
    )
    value_params = sum(w.size for w in ckpt.value.weights) + sum(
        b.size for b in ckpt.value.biases
    )
    hidden = "x".join(str(h) for h in ckpt.policy.dims.hidden)
    print(f"checkpoint: {args.checkpoint}")
    print(f"  variant:     {ckpt.variant_id} ({e.training_style} / {e.info_style})")
    print(f"  agent:       {e.agent_kind}")
    print(f"  iteration:   {ckpt.iteration}")
    print(f"  seed:        {ckpt.seed}")
    print(f"  observation: {e.observation_dim}  action: {e.action_dim}")
    print(f"  policy:      {e.observation_dim}-{hidden}-{e.action_dim} ({policy_params} params)")
    print(f"  value:       {value_params} params")
    lo, hi = float(ckpt.head.log_std.min()), float(ckpt.head.log_std.max())
    print(f"  log_std:     [{lo:.3f}, {hi:.3f}]")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="wayfarer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_train = sub.add_parser("train", help="train a policy variant")
    p_train.add_argument("--config", help="JSON training config; flags override it")
    p_train.add_argument("--variant", type=int, choices=range(1, 6), help="policy variant 1..5")
    p_train.add_argument("--agent", choices=[ANT, POINT_MASS])
    p_train.add_argument("--iterations", type=int)
    p_train.add_argument("--episodes-per-batch", type=int)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--policy-lr", type=float)
    p_train.add_argument("--value-lr", type=float)
    p_train.add_argument("--entropy-coef", type=float)
    p_train.add_argument("--workers", type=int)
    p_train.add_argument("--checkpoint-every", type=int)
    p_train.add_argument("--out", default="out")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("checkpoint")
    p_eval.add_argument("--suite", default="builtin", help="test suite name (builtin)")
    p_eval.add_argument("--waypoints", help="custom path 'x1,y1;x2,y2' instead of a suite")
    p_eval.add_argument("--trials", type=int)
    p_eval.add_argument("--deterministic", action="store_true", help="use the policy mean")
    p_eval.add_argument("--seed", type=int)
    p_eval.add_argument("--export-traj", help="directory for per-trial trajectory CSVs")
    p_eval.add_argument("--no-plots", action="store_true")
    p_eval.add_argument("--out", default="out")
    p_eval.set_defaults(func=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the live teleoperation server")
    p_serve.add_argument("checkpoint")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--command-delay-ms", type=float, default=0.0)
    p_serve.add_argument("--strict-clock", action="store_true")
    p_serve.add_argument("--seed", type=int)
    p_serve.add_argument("--console-dir", help="static bundle directory (default frontend/dist)")
    p_serve.set_defaults(func=cmd_serve)

    p_inspect = sub.add_parser("inspect", help="summarize a checkpoint file")
    p_inspect.add_argument("checkpoint")
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, storage.ConfigError, storage.CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failures keep a distinct exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
