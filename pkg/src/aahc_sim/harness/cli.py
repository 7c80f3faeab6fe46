"""Command-line entry point: train, evaluate, sweep, selfcheck."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from ..agents.evaluate import evaluate, random_policy
from . import config as config_mod
from . import runner, selfcheck

# flag -> config key; every other key is reachable through --set
FLAG_KEYS = {
    "algo": "run.algo",
    "scenario": "scenario.name",
    "seeds": "run.seeds",
    "steps": "hyper.total_steps",
    "out": "run.out_dir",
    "episodes": "run.eval_episodes",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--algo", choices=config_mod.ALGOS)
    p.add_argument("--scenario", help="M-N, e.g. 3-4")
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--steps", type=int, help="total environment steps")
    p.add_argument("--out", help="output directory")
    p.add_argument("--episodes", type=int, help="evaluation episodes")
    p.add_argument("--wall-clock", action="store_true", help="record wall-clock time in metrics")


def _resolve(args) -> config_mod.ResolvedConfig:
    overrides = list(args.set)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{key}={value}")
    if getattr(args, "wall_clock", False):
        overrides.append("run.record_wall_clock=true")
    return config_mod.load(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aahc-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("train", help="train one algorithm over the configured seeds")
    _add_config_flags(p)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint or the random baseline")
    _add_config_flags(p)
    p.add_argument("--checkpoint", help="checkpoint written by train")
    p.add_argument("--json", action="store_true", help="print the KPI record as JSON")

    p = sub.add_parser("sweep", help="train several algorithms over several seeds")
    _add_config_flags(p)
    p.add_argument("--algos", default="aahc,iterl,ctrl,random", help="comma-separated algorithms")

    p = sub.add_parser("selfcheck", help="run the built-in oracle checks")
    return parser


def cmd_train(args) -> int:
    cfg = _resolve(args)
    return runner.run_experiment(cfg)


def cmd_evaluate(args) -> int:
    if args.checkpoint:
        trainer, cfg, _ = runner.trainer_from_checkpoint(args.checkpoint)
        episodes = args.episodes or cfg.run.eval_episodes
        seed = int(args.seeds.split(",")[0]) if args.seeds else cfg.run.seeds[0]
        policy, scenario = trainer.policy(), cfg.scenario
    else:
        cfg = _resolve(args)
        if cfg.run.algo != "random":
            print("error: evaluate needs --checkpoint unless --algo random", file=sys.stderr)
            return 2
        episodes, seed = cfg.run.eval_episodes, cfg.run.seeds[0]
        policy, scenario = random_policy(cfg.scenario, seed), cfg.scenario
    record = evaluate(policy, scenario, episodes, seed)
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        for k, v in record.items():
            print(f"{k}={v:.6g}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve(args)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in config_mod.ALGOS:
            print(f"error: unknown algorithm {a!r}", file=sys.stderr)
            return 2
    return runner.sweep(cfg, algos)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.verb == "train":
            return cmd_train(args)
        if args.verb == "evaluate":
            return cmd_evaluate(args)
        if args.verb == "sweep":
            return cmd_sweep(args)
        return selfcheck.run()
    except (config_mod.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
