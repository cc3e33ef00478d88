"""Operator command line: train, eval, sweep, replay, validate-config."""

import argparse
import os
import sys

from .checkpoint import CheckpointError
from .config import ConfigError, config_to_text, load_config
from .logs import ReplayMismatch, read_records, replay_record, TRACE_HEADER
from .run import eval_run, sweep_run, train_run

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2        # argparse's own code for bad flags
EXIT_CONFIG = 3
EXIT_CHECKPOINT = 4
EXIT_LOG = 5


def _fail(code: int, kind: str, message: str) -> int:
    line = str(message).replace("\n", " ")
    print(f'error code={code} kind={kind} msg="{line}"', file=sys.stderr)
    return code


def _parse_sets(pairs: list[str]) -> dict:
    from .config import parse_overrides_text
    return parse_overrides_text("\n".join(pairs))


def _load_cfg(args, require_file: bool = False):
    overrides = _parse_sets(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    path = getattr(args, "config", None)
    if require_file and path is not None and not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    return load_config(path, overrides)


def _add_common(p, with_seed: bool = True):
    p.add_argument("--config", help="config file (defaults when omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    if with_seed:
        p.add_argument("--seed", type=int, help="master seed (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perchrl",
        description="Ceiling-perching lab: train, evaluate and sweep the "
                    "event-triggered landing policy.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy and write run artifacts")
    _add_common(p)
    p.add_argument("--out", required=True, help="output run directory")
    p.add_argument("--episodes", type=int, help="override sac.episodes")
    p.add_argument("--workers", type=int, default=1,
                   help="accepted for symmetry; training is single-threaded")
    p.add_argument("--checkpoint-every", type=int, default=500)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="repeated attempts at one condition")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--v", type=float, required=True, help="launch speed, m/s")
    p.add_argument("--phi", type=float, required=True,
                   help="flight angle, deg (90 = vertical)")
    p.add_argument("--n", type=int, default=30, help="attempts")
    p.add_argument("--deterministic", action="store_true",
                   help="use head means instead of sampling")
    p.add_argument("--out", help="optional directory for the episode log")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="landing-rate map over the (V, phi) grid")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--trials", type=int, help="override sweep.trials")
    p.add_argument("--deterministic", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-simulate a logged episode")
    p.add_argument("--log", required=True, help="episodes.jsonl path")
    p.add_argument("--index", type=int, required=True,
                   help="episode index within the log")
    p.add_argument("--config",
                   help="run config (default: config.cfg next to the log)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", help="trace CSV path (default: stdout)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate-config", help="check a config and exit")
    _add_common(p, with_seed=False)
    p.set_defaults(func=cmd_validate)

    return parser


def cmd_train(args) -> int:
    overrides = _parse_sets(args.set or [])
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.episodes is not None:
        overrides["sac.episodes"] = args.episodes
    cfg = load_config(args.config, overrides)

    progress = None
    if not args.quiet:
        def progress(ep, reward, rolling):
            print(f"episode {ep + 1}: reward {reward:.3f} "
                  f"rolling {rolling:.3f}", flush=True)

    learner, stats = train_run(cfg, args.out,
                               checkpoint_every=args.checkpoint_every,
                               progress=progress)
    last = stats.rolling_mean[-1] if stats.rolling_mean else 0.0
    print(f"trained {len(stats.episode)} episodes, "
          f"rolling mean reward {last:.3f}, artifacts in {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = None
    if args.config is not None or args.set:
        cfg = _load_cfg(args)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    summary = eval_run(args.checkpoint, args.v, args.phi, args.n, seed,
                       cfg=cfg, deterministic=args.deterministic,
                       out_dir=args.out)
    print(f"eval v={args.v} phi={args.phi} n={summary['n']} "
          f"four_leg={summary['four_leg']} two_leg={summary['two_leg']} "
          f"zero={summary['zero']} body_contact={summary['body_contact']} "
          f"mean_reward={summary['mean_reward']:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = None
    if args.config is not None or args.set:
        cfg = _load_cfg(args)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    rate_map, records = sweep_run(args.checkpoint, args.out, seed, cfg=cfg,
                                  workers=args.workers, trials=args.trials,
                                  deterministic=args.deterministic)
    mean_rate = float(rate_map.success_rate.mean())
    print(f"sweep over {rate_map.grid.n_cells} cells x "
          f"{rate_map.grid.trials} trials: mean four-leg rate "
          f"{mean_rate:.3f}, artifacts in {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    if not os.path.exists(args.log):
        raise ReplayMismatch(f"log not found: {args.log}")
    cfg_path = args.config
    if cfg_path is None:
        cfg_path = os.path.join(os.path.dirname(os.path.abspath(args.log)),
                                "config.cfg")
    overrides = _parse_sets(args.set or [])
    cfg = load_config(cfg_path, overrides)

    records = read_records(args.log)
    matches = [r for r in records if r["episode"] == args.index]
    if not matches:
        raise ReplayMismatch(
            f"episode index {args.index} not present in {args.log}")
    result, rows = replay_record(matches[0], cfg, collect_trace=True)

    lines = [TRACE_HEADER] + rows
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    out = result.outcome
    print(f"replay episode {args.index}: n_legs={out.n_legs} "
          f"body_contact={out.body_contact} reward={result.reward.total:.4f} "
          "(matches log)", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_cfg(args, require_file=True)
    print(f"config ok ({len(config_to_text(cfg).splitlines())} lines resolved)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        return _fail(EXIT_CONFIG, "config", err)
    except CheckpointError as err:
        return _fail(EXIT_CHECKPOINT, "checkpoint", err)
    except ReplayMismatch as err:
        return _fail(EXIT_LOG, "log", err)
    except Exception as err:  # pragma: no cover - defensive catch-all
        return _fail(EXIT_INTERNAL, type(err).__name__, err)


if __name__ == "__main__":
    sys.exit(main())
