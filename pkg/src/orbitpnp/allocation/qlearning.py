"""
Tabular Q-learning over a coarse world abstraction.

A decision is taken for one available robot (the *actor*) at a time. The
state key records the actor, every robot's cell on an ``N x N`` grid over
the field region, which robots are busy, and how many Pending items remain
(bucketed 0 / 1 / 2-3 / 4+). Actions pick the 1st, 2nd or 3rd nearest
reachable Pending item, or nothing.

Assignments span many simulator steps, so learning is semi-Markov: a
transition opens when a robot decides and closes at that robot's next
decision (or at episode end), collecting +1 if its item was retrieved,
minus the fuel weight times fuel burnt and minus acceleration penalties.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from ..debris import DebrisItem, Region
from ..errors import InvalidHyper
from ..rng import XorShift64Star, derive_seed
from ..sim import EpisodeMetrics, Event, RobotState, World, run_episode, world_reachable
from .env import EnvSpec

N_CANDIDATES = 3
NONE_ACTION = N_CANDIDATES
N_ACTIONS = N_CANDIDATES + 1


class StateKey(NamedTuple):
    actor: int
    cells: tuple[int, ...]
    busy: tuple[int, ...]
    pending_bucket: int


def pending_bucket(n: int) -> int:
    if n <= 1:
        return n
    return 2 if n <= 3 else 3


def cell_index(region: Region, pos, grid: int) -> int:
    ix = int(math.floor((pos[0] - region.min[0]) / region.width * grid))
    iy = int(math.floor((pos[1] - region.min[1]) / region.height * grid))
    ix = min(max(ix, 0), grid - 1)
    iy = min(max(iy, 0), grid - 1)
    return iy * grid + ix


def candidates(world: World, robot: RobotState, taken: set[int]) -> list[DebrisItem]:
    """Up to three reachable Pending items, nearest first (ties by id)."""
    scored = []
    for item in world.pending():
        if item.id in taken or not world_reachable(world, robot, item):
            continue
        d = math.hypot(item.position[0] - robot.position[0], item.position[1] - robot.position[1])
        scored.append((d, item.id, item))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [t[2] for t in scored[:N_CANDIDATES]]


Chooser = Callable[[RobotState, StateKey, int], int]


def decide(world: World, grid: int, choose: Chooser) -> dict[int, Optional[int]]:
    """Sequential per-robot decisions; a choice is visible to later actors."""
    region = world.field.region
    cells = tuple(cell_index(region, r.position, grid) for r in world.robots)
    busy = [0 if r.available else 1 for r in world.robots]
    n_pending = len(world.pending())
    taken: set[int] = set()
    out: dict[int, Optional[int]] = {}
    for idx, robot in enumerate(world.robots):
        if not robot.available:
            continue
        cands = candidates(world, robot, taken)
        if not cands:
            out[robot.id] = None
            continue
        key = StateKey(idx, cells, tuple(busy), pending_bucket(n_pending - len(taken)))
        a = choose(robot, key, len(cands))
        if a < len(cands):
            out[robot.id] = cands[a].id
            taken.add(cands[a].id)
            busy[idx] = 1
        else:
            out[robot.id] = None
    return out


@dataclass
class QPolicy:
    q_table: dict[tuple[StateKey, int], float] = field(default_factory=dict)
    grid: int = 4
    epsilon: float = 0.0
    learning_rate: float = 0.1
    discount: float = 0.95
    curve: list[EpisodeMetrics] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidHyper("epsilon must lie in [0, 1]")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvalidHyper("learning_rate must lie in (0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise InvalidHyper("discount must lie in [0, 1)")
        if self.grid < 1:
            raise InvalidHyper("grid must be at least 1")

    def value(self, key: StateKey, action: int) -> float:
        return self.q_table.get((key, action), 0.0)

    def best_value(self, key: StateKey) -> float:
        return max(self.value(key, a) for a in range(N_ACTIONS))

    def greedy_action(self, key: StateKey, n_candidates: int) -> int:
        valid = list(range(n_candidates)) + [NONE_ACTION]
        best = valid[0]
        for a in valid[1:]:
            if self.value(key, a) > self.value(key, best):
                best = a
        return best

    def __call__(self, world: World) -> dict[int, Optional[int]]:
        return decide(world, self.grid, lambda robot, key, n: self.greedy_action(key, n))


def q_update(q: QPolicy, s: StateKey, a: int, r: float, s_next: StateKey | None,
             terminal: bool) -> QPolicy:
    """One tabular update in place; returns ``q`` for chaining."""
    target = r
    if not terminal and s_next is not None:
        target += q.discount * q.best_value(s_next)
    lr = q.learning_rate
    q.q_table[(s, a)] = (1.0 - lr) * q.value(s, a) + lr * target
    return q


@dataclass(frozen=True)
class QHyper:
    episodes: int = 300
    learning_rate: float = 0.1
    discount: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    grid: int = 4
    # greedy-policy checkpointing; eval_every=0 keeps the final table
    eval_every: int = 10
    eval_episodes: int = 5

    def __post_init__(self):
        if self.eval_every < 0 or self.eval_episodes < 1:
            raise InvalidHyper("eval_every must be >= 0 and eval_episodes >= 1")
        if self.episodes < 1:
            raise InvalidHyper("episodes must be at least 1")
        for name in ("epsilon_start", "epsilon_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidHyper(f"{name} must lie in [0, 1]")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvalidHyper("learning_rate must lie in (0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise InvalidHyper("discount must lie in [0, 1)")
        if self.grid < 1:
            raise InvalidHyper("grid must be at least 1")

    def epsilon(self, episode: int) -> float:
        if self.episodes == 1:
            return self.epsilon_start
        frac = episode / (self.episodes - 1)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


class _Open:
    __slots__ = ("key", "action", "reward", "fuel", "penalty")

    def __init__(self, key, action, robot: RobotState):
        self.key, self.action, self.reward = key, action, 0.0
        self.fuel, self.penalty = robot.fuel_used, robot.penalty

    def collect(self, robot: RobotState, fuel_weight: float) -> float:
        return (self.reward - fuel_weight * (robot.fuel_used - self.fuel)
                - (robot.penalty - self.penalty))


def train_q_policy(env: EnvSpec, hyper: QHyper = QHyper(), seed: int = 0) -> QPolicy:
    """
    Epsilon-greedy Q-learning over episodes of ``env``.

    Episode ``e`` uses the field seeded by ``derive_seed(seed, 1, e)`` and an
    exploration rate decaying linearly from ``epsilon_start`` to
    ``epsilon_end``.

    Every ``eval_every`` episodes (and after the last one) the greedy policy
    is scored by its mean reward on ``eval_episodes`` held-out fields seeded
    by ``derive_seed(seed, 2, j)``; the best-scoring table is returned, the
    later one on ties. The returned policy acts greedily and its ``curve``
    holds the metrics of every training episode.
    """
    q = QPolicy(grid=hyper.grid, learning_rate=hyper.learning_rate, discount=hyper.discount)
    rng = XorShift64Star(derive_seed(seed, 0x51))
    fuel_weight = env.params.fuel_weight
    eval_seeds = [derive_seed(seed, 2, j) for j in range(hyper.eval_episodes)]
    best_table, best_score = None, -math.inf

    for ep in range(hyper.episodes):
        eps = hyper.epsilon(ep)
        world = env.make_world(derive_seed(seed, 1, ep))
        open_: dict[int, _Open] = {}

        def choose(robot: RobotState, key: StateKey, n_cands: int) -> int:
            if eps > 0.0 and rng.random() < eps:
                valid = list(range(n_cands)) + [NONE_ACTION]
                a = valid[rng.randbelow(len(valid))]
            else:
                a = q.greedy_action(key, n_cands)
            prev = open_.get(robot.id)
            if prev is not None:
                q_update(q, prev.key, prev.action, prev.collect(robot, fuel_weight), key, False)
            open_[robot.id] = _Open(key, a, robot)
            return a

        def credit(_world: World, events: list[Event]) -> None:
            for e in events:
                if e.kind == "retrieved" and e.robot_id in open_:
                    open_[e.robot_id].reward += 1.0

        m = run_episode(world, lambda w: decide(w, q.grid, choose), env.horizon, on_step=credit)
        for robot in world.robots:
            tr = open_.get(robot.id)
            if tr is not None:
                q_update(q, tr.key, tr.action, tr.collect(robot, fuel_weight), None, True)
        q.curve.append(m)

        last = ep == hyper.episodes - 1
        if hyper.eval_every and ((ep + 1) % hyper.eval_every == 0 or last):
            score = sum(run_episode(env.make_world(s), q, env.horizon).reward_total
                        for s in eval_seeds) / len(eval_seeds)
            if score >= best_score:
                best_table, best_score = dict(q.q_table), score
    if best_table is not None:
        q.q_table = best_table
    return q


def write_q_table_csv(path, q: QPolicy) -> None:
    """One row per (state, action) entry, sorted for byte-stable output."""
    entries = sorted(q.q_table.items(), key=lambda kv: (tuple(kv[0][0]), kv[0][1]))
    n = max((len(k.cells) for (k, _), _ in entries), default=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["grid", "actor"] + [f"cell_{i}" for i in range(n)]
                   + [f"busy_{i}" for i in range(n)] + ["pending_bucket", "action", "value"])
        for (key, a), v in entries:
            w.writerow([q.grid, key.actor, *key.cells, *key.busy, key.pending_bucket, a, repr(v)])


def read_q_table_csv(path, **kwargs) -> QPolicy:
    """Load a table written by :func:`write_q_table_csv`; ``kwargs`` go to :class:`QPolicy`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = (len(header) - 5) // 2
    grid = int(body[0][0]) if body else kwargs.pop("grid", 4)
    kwargs.pop("grid", None)
    q = QPolicy(grid=grid, **kwargs)
    for row in body:
        vals = [int(x) for x in row[:-1]]
        key = StateKey(vals[1], tuple(vals[2:2 + n]), tuple(vals[2 + n:2 + 2 * n]), vals[2 + 2 * n])
        q.q_table[(key, vals[3 + 2 * n])] = float(row[-1])
    return q
