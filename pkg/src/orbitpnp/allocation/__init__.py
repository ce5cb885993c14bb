"""Task-allocation policies, their evaluation, and the exhaustive oracle."""

from .env import EnvSpec
from .heuristics import Rule, RulePolicy, fifo_assign, greedy_rule_search, processing_time, spt_assign
from .montecarlo import EvalReport, evaluate_seeds, monte_carlo_eval, write_report_csv
from .oracle import SequencePolicy, brute_force_optimal, enumerate_plans
from .qlearning import (
    QHyper,
    QPolicy,
    StateKey,
    q_update,
    read_q_table_csv,
    train_q_policy,
    write_q_table_csv,
)

__all__ = [
    "EnvSpec", "EvalReport", "QHyper", "QPolicy", "Rule", "RulePolicy", "SequencePolicy",
    "StateKey", "brute_force_optimal", "enumerate_plans", "evaluate_seeds", "fifo_assign",
    "greedy_rule_search", "monte_carlo_eval", "processing_time", "q_update",
    "read_q_table_csv", "spt_assign", "train_q_policy", "write_q_table_csv",
    "write_report_csv",
]
