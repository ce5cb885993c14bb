"""
Command-line entry point.

    orbitpnp dynamics-check | train | bench | simulate  [--config PATH] [--seed N] [--out DIR]

Exit codes: 0 success, 1 config/parse/validation or usage failure, 2 a
dynamics check failed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

from .allocation import (
    EvalReport,
    QPolicy,
    evaluate_seeds,
    fifo_assign,
    greedy_rule_search,
    read_q_table_csv,
    spt_assign,
    train_q_policy,
    write_q_table_csv,
)
from .checks import run_checks
from .config import Config, parse_config
from .errors import ConfigError, MissingPolicy, UnknownPolicy
from .sim import Event, run_episode, write_events_csv

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2

REPORT_COLUMNS = ["check", "max_error", "threshold", "passed"]
CURVE_COLUMNS = ["episode", "epsilon", "transfer_rate", "reward_total", "total_fuel", "retrieved"]
BENCH_COLUMNS = ["policy", "n", "mean_transfer_rate", "std_transfer_rate", "mean_reward",
                 "std_reward", "mean_fuel", "std_fuel"]
BENCH_SEED_COLUMNS = ["policy", "seed", "transfer_rate", "reward_total", "total_fuel", "retrieved", "elapsed"]
METRIC_COLUMNS = ["policy", "seed", "retrieved", "total", "transfer_rate", "elapsed", "total_fuel",
                  "penalty", "reward_total"]
POLICY_NAMES = ("fifo", "spt", "greedy", "q")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _out_dir(config: Config) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def with_seed(config: Config, seed: Optional[int]) -> Config:
    """Apply a ``--seed`` override: shifts the seed list and the training seed."""
    if seed is None:
        return config
    seeds = tuple(seed + i for i in range(len(config.seeds)))
    alloc = dataclasses.replace(config.allocation, train_seed=seed)
    return dataclasses.replace(config, seeds=seeds, allocation=alloc)


# -- commands ---------------------------------------------------------------

def cmd_dynamics_check(config: Config, seed: int = 0) -> int:
    results = run_checks(config.chains, seed)
    _write_csv(_out_dir(config) / "dynamics_report.csv", REPORT_COLUMNS,
               [[r.name, repr(r.max_error), repr(r.threshold), str(r.passed).lower()] for r in results])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  max_error={r.max_error:.3e}  threshold={r.threshold:.1e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def train(config: Config) -> QPolicy:
    return train_q_policy(config.env(), config.allocation.hyper(), config.allocation.train_seed)


def cmd_train(config: Config) -> int:
    q = train(config)
    out = _out_dir(config)
    write_q_table_csv(out / "q_table.csv", q)
    hyper = config.allocation.hyper()
    _write_csv(out / "training_curve.csv", CURVE_COLUMNS, [
        [i, repr(hyper.epsilon(i)), repr(m.transfer_rate), repr(m.reward_total), repr(m.total_fuel),
         m.retrieved_count]
        for i, m in enumerate(q.curve)])
    print(f"trained {len(q.curve)} episodes, {len(q.q_table)} table entries -> {out / 'q_table.csv'}")
    return EXIT_OK


def improvement(q_mean: float, best_heuristic_mean: float) -> Optional[float]:
    """Relative gain of the Q-policy; ``None`` when the baseline is not positive."""
    if best_heuristic_mean > 0.0:
        return (q_mean - best_heuristic_mean) / best_heuristic_mean
    return None


def _summary_row(name: str, rep: EvalReport) -> list:
    return [name, rep.n, repr(rep.mean_transfer_rate), repr(rep.std_transfer_rate), repr(rep.mean_reward),
            repr(rep.std_reward), repr(rep.mean_fuel), repr(rep.std_fuel)]


def _q_policy(config: Config, q_table: Optional[str], allow_train: bool) -> QPolicy:
    if q_table is not None:
        return read_q_table_csv(q_table)
    if not allow_train:
        raise MissingPolicy("no Q-table given (--q-table) and inline training disabled (--no-train)")
    return train(config)


def cmd_bench(config: Config, q_table: Optional[str] = None, skip_q: bool = False,
              allow_train: bool = True, workers: int = 1) -> int:
    env = config.env()
    greedy = greedy_rule_search(env, n_mc=config.allocation.n_mc, seed=config.seeds[0])
    policies = [("fifo", fifo_assign), ("spt", spt_assign), (f"greedy[{greedy.name}]", greedy)]
    if not skip_q:
        policies.append(("q", _q_policy(config, q_table, allow_train)))

    reports = [(name, evaluate_seeds(p, env, config.seeds, workers)) for name, p in policies]
    rows = [_summary_row(name, rep) for name, rep in reports]
    if not skip_q:
        heuristics = reports[:3]
        best_name, best = max(heuristics, key=lambda nr: nr[1].mean_transfer_rate)
        gain = improvement(reports[3][1].mean_transfer_rate, best.mean_transfer_rate)
        rows.append([f"improvement_vs_{best_name}", "", "" if gain is None else repr(gain),
                     "", "", "", "", ""])

    out = _out_dir(config)
    _write_csv(out / "bench.csv", BENCH_COLUMNS, rows)
    _write_csv(out / "bench_seeds.csv", BENCH_SEED_COLUMNS, [
        [name, s, repr(m.transfer_rate), repr(m.reward_total), repr(m.total_fuel), m.retrieved_count,
         f"{m.elapsed:.6f}"]
        for name, rep in reports for s, m in zip(rep.seeds, rep.episodes)])
    for row in rows:
        print(",".join(str(x) for x in row))
    return EXIT_OK


def make_policy(config: Config, name: str, q_table: Optional[str] = None):
    if name == "fifo":
        return fifo_assign
    if name == "spt":
        return spt_assign
    if name == "greedy":
        return greedy_rule_search(config.env(), n_mc=config.allocation.n_mc, seed=config.seeds[0])
    if name == "q":
        return _q_policy(config, q_table, True)
    raise UnknownPolicy(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")


def cmd_simulate(config: Config, policy_name: str, q_table: Optional[str] = None) -> int:
    policy = make_policy(config, policy_name, q_table)
    seed = config.seeds[0]
    log: list[Event] = []
    m = run_episode(config.env().make_world(seed), policy, config.horizon, log=log)
    out = _out_dir(config)
    write_events_csv(out / "events.csv", log)
    _write_csv(out / "metrics.csv", METRIC_COLUMNS, [[
        policy_name, seed, m.retrieved_count, m.total_debris, repr(m.transfer_rate), f"{m.elapsed:.6f}",
        repr(m.total_fuel), repr(m.penalty_accum), repr(m.reward_total)]])
    print(f"{policy_name}: retrieved {m.retrieved_count}/{m.total_debris} in {m.elapsed:.1f} s, "
          f"reward {m.reward_total:.4f}")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbitpnp", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override the seed list start and training seed")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        return p

    common(sub.add_parser("dynamics-check", help="run the dynamics invariant suite"))
    common(sub.add_parser("train", help="train the Q-policy"))
    bench = common(sub.add_parser("bench", help="compare heuristics and the Q-policy"))
    bench.add_argument("--q-table", help="trained Q-table CSV (otherwise trains inline)")
    bench.add_argument("--no-train", action="store_true", help="fail instead of training inline")
    bench.add_argument("--skip-q", action="store_true", help="evaluate heuristics only")
    bench.add_argument("--workers", type=int, default=1, help="parallel episode workers")
    sim = common(sub.add_parser("simulate", help="run one logged episode"))
    sim.add_argument("--policy", default="fifo", help=f"one of {', '.join(POLICY_NAMES)}")
    sim.add_argument("--q-table", help="Q-table CSV for --policy q")
    return parser


def load(args) -> Config:
    config = parse_config(args.config) if args.config else Config()
    config = with_seed(config, args.seed)
    if args.out:
        config = dataclasses.replace(config, output_dir=args.out)
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load(args)
        if args.command == "dynamics-check":
            return cmd_dynamics_check(config, args.seed or 0)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "bench":
            return cmd_bench(config, args.q_table, args.skip_q, not args.no_train, args.workers)
        return cmd_simulate(config, args.policy, args.q_table)
    except (ConfigError, FileNotFoundError, MissingPolicy, UnknownPolicy) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
