"""Rule-based task selection (FIFO, SPT) and greedy search over rule mixes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ..debris import DebrisItem
from ..sim import RobotState, World, grasp_duration, world_reachable
from .env import EnvSpec
from .montecarlo import monte_carlo_eval

MAX_SWEEPS = 10


class Rule(enum.Enum):
    FIFO = "fifo"
    SPT = "spt"


def processing_time(world: World, robot: RobotState, item: DebrisItem) -> float:
    """Straight-line travel + grasp + transport time at ``max_speed``."""
    s = robot.spec.max_speed
    to_item = math.hypot(item.position[0] - robot.position[0], item.position[1] - robot.position[1])
    to_bin = math.hypot(world.disposal[0] - item.position[0], world.disposal[1] - item.position[1])
    return to_item / s + grasp_duration(robot.spec, item, world.params) + to_bin / s


def _fifo_pick(world, robot, pending, taken) -> Optional[int]:
    for item in pending:
        if item.id not in taken and world_reachable(world, robot, item):
            return item.id
    return None


def _spt_pick(world, robot, pending, taken) -> Optional[int]:
    best = None
    for item in pending:
        if item.id in taken or not world_reachable(world, robot, item):
            continue
        key = (processing_time(world, robot, item), item.id)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def _pending_by_id(world: World) -> list[DebrisItem]:
    return sorted(world.pending(), key=lambda d: d.id)


def fifo_assign(world: World) -> dict[int, Optional[int]]:
    """Each available robot, in id order, takes the lowest-id reachable Pending item."""
    pending = _pending_by_id(world)
    taken: set[int] = set()
    out: dict[int, Optional[int]] = {}
    for robot in world.robots:
        if not robot.available:
            continue
        pick = _fifo_pick(world, robot, pending, taken)
        out[robot.id] = pick
        if pick is not None:
            taken.add(pick)
    return out


def spt_assign(world: World) -> dict[int, Optional[int]]:
    """
    Shortest-processing-time matching: all (robot, item) pairs are ranked by
    estimated processing time, ties by item id then robot id, and taken
    greedily.
    """
    pending = _pending_by_id(world)
    robots = [r for r in world.robots if r.available]
    pairs = []
    for robot in robots:
        for item in pending:
            if world_reachable(world, robot, item):
                pairs.append((processing_time(world, robot, item), item.id, robot.id))
    pairs.sort()
    out: dict[int, Optional[int]] = {r.id: None for r in robots}
    taken: set[int] = set()
    for _, did, rid in pairs:
        if out[rid] is None and did not in taken:
            out[rid] = did
            taken.add(did)
    return out


@dataclass(frozen=True)
class RulePolicy:
    """One rule per robot (ordered like ``world.robots``); robots pick in id order."""

    rules: tuple[Rule, ...]

    def __call__(self, world: World) -> dict[int, Optional[int]]:
        if len(self.rules) != len(world.robots):
            raise ValueError(f"{len(self.rules)} rules for {len(world.robots)} robots")
        pending = _pending_by_id(world)
        taken: set[int] = set()
        out: dict[int, Optional[int]] = {}
        for robot, rule in zip(world.robots, self.rules):
            if not robot.available:
                continue
            pick = (_fifo_pick if rule is Rule.FIFO else _spt_pick)(world, robot, pending, taken)
            out[robot.id] = pick
            if pick is not None:
                taken.add(pick)
        return out

    @property
    def name(self) -> str:
        return "+".join(r.value for r in self.rules)


def greedy_rule_search(env: EnvSpec, rules: Sequence[Rule] = (Rule.FIFO, Rule.SPT),
                       n_mc: int = 5, seed: int = 0) -> RulePolicy:
    """
    Coordinate ascent over per-robot rules on the Monte-Carlo mean reward.

    Starts from all-FIFO (or the first rule when FIFO is not offered) and
    sweeps robots in id order, keeping a rule only when it strictly improves
    the mean. All candidates are scored on the same seeds.
    """
    rules = tuple(rules)
    n = len(env.robots)
    start = Rule.FIFO if Rule.FIFO in rules else rules[0]
    current = (start,) * n
    cache: dict[tuple[Rule, ...], float] = {}

    def score(combo: tuple[Rule, ...]) -> float:
        if combo not in cache:
            cache[combo] = monte_carlo_eval(RulePolicy(combo), env, n_mc, seed).mean_reward
        return cache[combo]

    for _ in range(MAX_SWEEPS):
        changed = False
        for i in range(n):
            best = current
            for rule in rules:
                cand = current[:i] + (rule,) + current[i + 1:]
                if score(cand) > score(best):
                    best = cand
            if best != current:
                current = best
                changed = True
        if not changed:
            break
    return RulePolicy(current)
