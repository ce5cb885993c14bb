"""Exhaustive optimal allocation for small instances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from ..debris import DebrisState
from ..errors import InstanceTooLarge
from ..sim import World, run_episode

MAX_PENDING = 6
MAX_ROBOTS = 2


@dataclass
class SequencePolicy:
    """Scripted policy: each robot works through its own ordered item list."""

    sequences: dict[int, Sequence[int]]

    def __post_init__(self):
        self._cursor = {rid: 0 for rid in self.sequences}

    def __call__(self, world: World) -> dict[int, Optional[int]]:
        states = {d.id: d.state for d in world.field.items}
        out: dict[int, Optional[int]] = {}
        for robot in world.robots:
            if not robot.available:
                continue
            seq = self.sequences.get(robot.id, ())
            i = self._cursor.get(robot.id, 0)
            while i < len(seq) and states[seq[i]] is not DebrisState.PENDING:
                i += 1
            if i < len(seq):
                out[robot.id] = seq[i]
                i += 1
            else:
                out[robot.id] = None
            self._cursor[robot.id] = i
        return out


def enumerate_plans(robot_ids: Sequence[int], items: Sequence[int]) -> Iterator[dict[int, tuple[int, ...]]]:
    """
    Every way to give each item to one robot or to nobody, with every order
    of each robot's share.
    """
    owners = list(robot_ids) + [None]
    for owner_of in itertools.product(owners, repeat=len(items)):
        shares = {rid: [d for d, o in zip(items, owner_of) if o == rid] for rid in robot_ids}
        for orders in itertools.product(*(itertools.permutations(shares[r]) for r in robot_ids)):
            yield dict(zip(robot_ids, orders))


def brute_force_optimal(world: World, horizon: float) -> tuple[dict[int, tuple[int, ...]], float]:
    """
    Best per-robot retrieval sequences by exhaustive simulation.

    Enumerates every ordered subset split of the Pending items between the
    robots (leaving items out is allowed), plays each plan with
    :class:`SequencePolicy` from a copy of ``world``, and returns the plan with
    the highest ``reward_total`` (first found wins ties) and that reward.
    """
    items = sorted(d.id for d in world.field.items if d.state is DebrisState.PENDING)
    if len(items) > MAX_PENDING or len(world.robots) > MAX_ROBOTS:
        raise InstanceTooLarge(
            f"exhaustive search supports <= {MAX_PENDING} items and <= {MAX_ROBOTS} robots")
    robot_ids = [r.id for r in world.robots]
    best_plan: dict[int, tuple[int, ...]] = {rid: () for rid in robot_ids}
    best_value = -float("inf")
    for plan in enumerate_plans(robot_ids, items):
        value = run_episode(world.copy(), SequencePolicy(plan), horizon).reward_total
        if value > best_value:
            best_plan, best_value = plan, value
    return best_plan, best_value
