"""Multi-seed train / evaluate / summarise driver."""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import replace

from ..agents.evaluate import KPI_KEYS, evaluate, random_policy
from ..agents.trainers import TRAINERS
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ResolvedConfig, parse_text
from .metrics import MetricsWriter, row_from_cycle

log = logging.getLogger(__name__)

SUMMARY_KEYS = KPI_KEYS + ("mean_ru", "mean_rd", "mean_rg")


def _paths(out_dir: str, algo: str, seed: int) -> tuple[str, str]:
    stem = os.path.join(out_dir, f"{algo}_seed{seed}")
    return stem + ".metrics.csv", stem + ".ckpt"


def train_one(cfg: ResolvedConfig, seed: int, out_dir: str) -> tuple[dict, object]:
    """Train one seed, streaming metrics and writing a checkpoint; returns (eval KPIs, trainer)."""
    run = cfg.run
    metrics_path, ckpt_path = _paths(out_dir, run.algo, seed)
    with MetricsWriter(metrics_path) as writer:
        if run.algo == "random":
            return evaluate(random_policy(cfg.scenario, seed), cfg.scenario, run.eval_episodes, seed), None
        trainer = TRAINERS[run.algo](cfg.scenario, cfg.hyper, seed)
        trainer.train(on_cycle=lambda s: writer.write(
            row_from_cycle(run.algo, cfg.scenario_name, seed, s, run.record_wall_clock)))
    meta = {"algo": run.algo, "scenario": cfg.scenario_name, "seed": seed,
            "env_step": trainer.env_steps, "config": cfg.to_text()}
    save_checkpoint(ckpt_path, trainer.param_sets(), meta)
    return evaluate(trainer.policy(), cfg.scenario, run.eval_episodes, seed), trainer


def trainer_from_checkpoint(path: str):
    sets, meta = load_checkpoint(path)
    cfg = parse_text(meta["config"], f"{path}:meta.config")
    trainer = TRAINERS[meta["algo"]](cfg.scenario, cfg.hyper, int(meta["seed"]))
    trainer.load_param_sets(sets)
    trainer.env_steps = int(meta["env_step"])
    return trainer, cfg, meta


def summarize(records: list[dict]) -> dict[str, tuple[float, float]]:
    """Per-key mean and sample standard deviation (0 for one seed)."""
    out = {}
    n = len(records)
    for key in SUMMARY_KEYS:
        vals = [r[key] for r in records]
        mean = math.fsum(vals) / n
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
        out[key] = (mean, math.sqrt(var))
    return out


def write_summary(path: str, algo: str, scenario: str, per_seed: dict[int, dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("algo", "scenario", "seed") + SUMMARY_KEYS)
        for seed, rec in per_seed.items():
            w.writerow([algo, scenario, seed] + ["%.17g" % rec[k] for k in SUMMARY_KEYS])
        if per_seed:
            stats = summarize(list(per_seed.values()))
            w.writerow([algo, scenario, "mean"] + ["%.17g" % stats[k][0] for k in SUMMARY_KEYS])
            w.writerow([algo, scenario, "std"] + ["%.17g" % stats[k][1] for k in SUMMARY_KEYS])


def run_experiment(cfg: ResolvedConfig) -> int:
    """Train and evaluate every seed; returns a process exit status."""
    run = cfg.run
    os.makedirs(run.out_dir, exist_ok=True)
    with open(os.path.join(run.out_dir, f"{run.algo}.config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_text())
    per_seed, failed = {}, []
    for seed in run.seeds:
        try:
            rec, _ = train_one(cfg, seed, run.out_dir)
        except Exception as exc:  # isolate per-seed failures
            log.error("seed %d failed: %s: %s", seed, type(exc).__name__, exc)
            failed.append(seed)
            continue
        per_seed[seed] = rec
        log.info("seed %d: %s", seed, " ".join(f"{k}={rec[k]:.6g}" for k in SUMMARY_KEYS))
    write_summary(os.path.join(run.out_dir, f"{run.algo}.summary.csv"), run.algo, cfg.scenario_name, per_seed)
    return 1 if failed else 0


def sweep(cfg: ResolvedConfig, algos) -> int:
    status = 0
    for algo in algos:
        status |= run_experiment(replace(cfg, run=replace(cfg.run, algo=algo)))
    return status
