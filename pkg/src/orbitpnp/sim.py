"""
Time-stepped multi-robot pick-and-place world.

Robots are planar free-flyers that track a braking-limited velocity profile
(cruise at ``max_speed``, decelerate no faster than ``max_accel``) toward
their current target. A retrieval runs Transit -> Grasping -> Transporting
-> Idle and the debris item follows Pending -> Claimed -> Grasped ->
Retrieved. Fuel is the accumulated delta-v ``sum(|a| * dt)``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional

from .debris import DebrisField, DebrisItem, DebrisState, Point
from .errors import (
    AssignmentError,
    DoubleClaim,
    DuplicateRobot,
    EmptyRobots,
    InvalidDt,
    InvalidHorizon,
    UnavailableDebris,
    UnknownDebris,
    UnknownRobot,
)

TIME_EPS = 1e-9


class Phase(enum.Enum):
    IDLE = "idle"
    TRANSIT = "transit"
    GRASPING = "grasping"
    TRANSPORTING = "transporting"


@dataclass(frozen=True)
class RobotSpec:
    id: int
    start_position: Point
    max_speed: float = 1.0
    max_accel: float = 0.5
    workspace_radius: float = math.inf
    grasp_time: float = 2.0
    fuel_budget: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "start_position",
                           (float(self.start_position[0]), float(self.start_position[1])))
        for name in ("max_speed", "max_accel", "workspace_radius", "fuel_budget"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"robot {self.id}: {name} must be positive")
        if self.grasp_time < 0.0:
            raise ValueError(f"robot {self.id}: grasp_time must be non-negative")


@dataclass
class RobotState:
    spec: RobotSpec
    position: Point
    velocity: Point = (0.0, 0.0)
    fuel_used: float = 0.0
    penalty: float = 0.0
    phase: Phase = Phase.IDLE
    assigned_debris: Optional[int] = None
    grasp_timer: float = 0.0
    out_of_fuel: bool = False

    @property
    def id(self) -> int:
        return self.spec.id

    @property
    def available(self) -> bool:
        """Idle and still able to move."""
        return self.phase is Phase.IDLE and not self.out_of_fuel

    @property
    def fuel_left(self) -> float:
        return max(self.spec.fuel_budget - self.fuel_used, 0.0)


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.1
    grasp_tol: float = 0.05
    release_tol: float = 0.1
    fuel_weight: float = 0.01
    accel_penalty_weight: float = 1.0
    # extra grasp seconds per rad/s of tumble
    tumble_grasp_time: float = 0.5

    def __post_init__(self):
        if not self.dt > 0.0:
            raise InvalidDt(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class Event:
    clock: float
    robot_id: Optional[int]
    kind: str
    debris_id: Optional[int]


@dataclass
class World:
    robots: list[RobotState]
    field: DebrisField
    disposal: Point
    params: SimParams = field(default_factory=SimParams)
    steps: int = 0
    penalty_accum: float = 0.0
    horizon: float = math.inf

    @property
    def dt(self) -> float:
        return self.params.dt

    @property
    def clock(self) -> float:
        return self.steps * self.params.dt

    @property
    def time_left(self) -> float:
        return self.horizon - self.clock

    def robot(self, robot_id: int) -> RobotState:
        for r in self.robots:
            if r.id == robot_id:
                return r
        raise UnknownRobot(f"no robot with id {robot_id}")

    def pending(self) -> list[DebrisItem]:
        return [d for d in self.field.items if d.state is DebrisState.PENDING]

    def counts(self) -> dict[DebrisState, int]:
        out = {s: 0 for s in DebrisState}
        for d in self.field.items:
            out[d.state] += 1
        return out

    def retrieved_count(self) -> int:
        return sum(1 for d in self.field.items if d.state is DebrisState.RETRIEVED)

    def copy(self) -> "World":
        return World([replace(r) for r in self.robots], self.field.copy(), self.disposal,
                     self.params, self.steps, self.penalty_accum, self.horizon)

    def snapshot(self) -> dict:
        """JSON-serialisable view for debugging."""
        return {
            "clock": self.clock,
            "disposal": list(self.disposal),
            "penalty_accum": self.penalty_accum,
            "robots": [{
                "id": r.id, "position": list(r.position), "velocity": list(r.velocity),
                "fuel_used": r.fuel_used, "phase": r.phase.value,
                "assigned_debris": r.assigned_debris, "out_of_fuel": r.out_of_fuel,
            } for r in self.robots],
            "debris": [{
                "id": d.id, "position": list(d.position), "state": d.state.value,
            } for d in self.field.items],
        }


@dataclass(frozen=True)
class EpisodeMetrics:
    retrieved_count: int
    total_debris: int
    transfer_rate: float
    elapsed: float
    total_fuel: float
    penalty_accum: float
    reward_total: float


Assignments = Mapping[int, Optional[int]]
Policy = Callable[[World], Assignments]


def world_init(robots: Iterable[RobotSpec], fld: DebrisField, disposal: Point,
               dt: float | None = None, params: SimParams | None = None) -> World:
    """Fresh world: clock 0, robots Idle at their start positions, debris Pending.

    ``dt`` overrides the step of ``params`` (default 0.1 s).
    """
    robots = list(robots)
    if not robots:
        raise EmptyRobots("at least one robot is required")
    ids = [r.id for r in robots]
    if len(set(ids)) != len(ids):
        raise DuplicateRobot(f"duplicate robot ids in {ids}")
    params = params or SimParams()
    if dt is not None:
        params = replace(params, dt=dt)
    fld = fld.copy()
    for d in fld.items:
        d.state = DebrisState.PENDING
    states = [RobotState(spec, spec.start_position) for spec in sorted(robots, key=lambda s: s.id)]
    return World(states, fld, (float(disposal[0]), float(disposal[1])), params)


def grasp_duration(robot: RobotSpec, debris: DebrisItem, params: SimParams) -> float:
    return robot.grasp_time + params.tumble_grasp_time * abs(debris.tumble_rate)


def _validate(world: World, assignments: Assignments, debris: dict[int, DebrisItem]) -> None:
    seen: dict[int, int] = {}
    for rid, did in assignments.items():
        robot = world.robot(rid)
        if did is None:
            continue
        if did not in debris:
            raise UnknownDebris(f"no debris with id {did}")
        if did in seen:
            raise DoubleClaim(f"debris {did} assigned to robots {seen[did]} and {rid}")
        seen[did] = rid
        item = debris[did]
        if robot.assigned_debris == did and item.state is not DebrisState.PENDING:
            continue
        if robot.assigned_debris is not None:
            raise AssignmentError(f"robot {rid} is busy with debris {robot.assigned_debris}")
        if robot.out_of_fuel:
            raise AssignmentError(f"robot {rid} is out of fuel")
        if item.state is DebrisState.CLAIMED:
            raise DoubleClaim(f"debris {did} is already claimed")
        if item.state is not DebrisState.PENDING:
            raise UnavailableDebris(f"debris {did} is {item.state.value}")


def _command(robot: RobotState, target: Point, target_vel: Point, dt: float) -> Point:
    """Acceleration that tracks a braking-limited approach to a moving target."""
    spec = robot.spec
    dx, dy = target[0] - robot.position[0], target[1] - robot.position[1]
    dist = math.hypot(dx, dy)
    if dist > 0.0:
        speed = min(spec.max_speed, math.sqrt(2.0 * spec.max_accel * dist), dist / dt)
        vx = target_vel[0] + dx / dist * speed
        vy = target_vel[1] + dy / dist * speed
    else:
        vx, vy = target_vel
    norm = math.hypot(vx, vy)
    if norm > spec.max_speed:
        vx, vy = vx * spec.max_speed / norm, vy * spec.max_speed / norm
    ax, ay = (vx - robot.velocity[0]) / dt, (vy - robot.velocity[1]) / dt
    mag = math.hypot(ax, ay)
    if mag > spec.max_accel:
        ax, ay = ax * spec.max_accel / mag, ay * spec.max_accel / mag
    return ax, ay


def step(world: World, assignments: Assignments | None = None,
         accel_overrides: Mapping[int, Point] | None = None) -> tuple[World, list[Event]]:
    """
    Advance ``world`` in place by one ``dt`` and return it with the events.

    ``assignments`` maps robot ids to debris ids (or None) and only affects
    Idle robots; restating a robot's current claim is a no-op.
    ``accel_overrides`` adds an external acceleration to a robot's command,
    which is what the excess-acceleration penalty measures.
    """
    p = world.params
    dt = p.dt
    debris = world.field.by_id()
    assignments = assignments or {}
    _validate(world, assignments, debris)
    t_next = (world.steps + 1) * dt
    events: list[Event] = []

    for robot in world.robots:
        did = assignments.get(robot.id)
        if did is not None and robot.phase is Phase.IDLE:
            debris[did].state = DebrisState.CLAIMED
            robot.phase = Phase.TRANSIT
            robot.assigned_debris = did
            events.append(Event(t_next, robot.id, "claimed", did))

    for d in world.field.items:
        if d.state in (DebrisState.PENDING, DebrisState.CLAIMED):
            d.position = (d.position[0] + d.drift_velocity[0] * dt,
                          d.position[1] + d.drift_velocity[1] * dt)

    for robot in world.robots:
        spec = robot.spec
        if robot.out_of_fuel:
            continue
        item = debris.get(robot.assigned_debris) if robot.assigned_debris is not None else None
        if robot.phase in (Phase.TRANSIT, Phase.GRASPING):
            ax, ay = _command(robot, item.position, item.drift_velocity, dt)
        elif robot.phase is Phase.TRANSPORTING:
            ax, ay = _command(robot, world.disposal, (0.0, 0.0), dt)
        else:
            ax, ay = _command(robot, robot.position, (0.0, 0.0), dt)
        if accel_overrides and robot.id in accel_overrides:
            ox, oy = accel_overrides[robot.id]
            ax, ay = ax + ox, ay + oy
        mag = math.hypot(ax, ay)
        if mag * dt > robot.fuel_left:
            scale = robot.fuel_left / (mag * dt)
            ax, ay, mag = ax * scale, ay * scale, mag * scale
        excess = mag - spec.max_accel
        if excess > 1e-9 * spec.max_accel:
            pen = p.accel_penalty_weight * excess * excess
            robot.penalty += pen
            world.penalty_accum += pen
        robot.fuel_used += mag * dt
        vx, vy = robot.velocity[0] + ax * dt, robot.velocity[1] + ay * dt
        robot.velocity = (vx, vy)
        robot.position = (robot.position[0] + vx * dt, robot.position[1] + vy * dt)

        if robot.phase is Phase.TRANSIT:
            gap = math.hypot(item.position[0] - robot.position[0], item.position[1] - robot.position[1])
            if gap <= item.size + p.grasp_tol + TIME_EPS:
                robot.phase = Phase.GRASPING
                robot.grasp_timer = 0.0
                events.append(Event(t_next, robot.id, "arrived", item.id))
        elif robot.phase is Phase.GRASPING:
            robot.grasp_timer += dt
            if robot.grasp_timer >= grasp_duration(spec, item, p) - TIME_EPS:
                item.state = DebrisState.GRASPED
                robot.phase = Phase.TRANSPORTING
                item.position = robot.position
                events.append(Event(t_next, robot.id, "grasped", item.id))
        elif robot.phase is Phase.TRANSPORTING:
            item.position = robot.position
            gap = math.hypot(world.disposal[0] - robot.position[0], world.disposal[1] - robot.position[1])
            if gap <= p.release_tol + TIME_EPS:
                item.state = DebrisState.RETRIEVED
                robot.phase = Phase.IDLE
                robot.assigned_debris = None
                events.append(Event(t_next, robot.id, "retrieved", item.id))

        if robot.fuel_left <= 1e-12:
            robot.out_of_fuel = True
            robot.velocity = (0.0, 0.0)
            events.append(Event(t_next, robot.id, "out_of_fuel", robot.assigned_debris))
            if robot.phase in (Phase.TRANSIT, Phase.GRASPING):
                item.state = DebrisState.PENDING
                robot.assigned_debris = None
                events.append(Event(t_next, robot.id, "aborted", item.id))
            # a grasped item stays attached to the stranded robot
            robot.phase = Phase.IDLE

    world.steps += 1
    return world, events


def _intercept_time(rel: Point, drift: Point, speed: float) -> float:
    """Earliest ``t >= 0`` with ``|rel + drift * t| == speed * t`` (inf if none)."""
    c = rel[0] * rel[0] + rel[1] * rel[1]
    if c == 0.0:
        return 0.0
    a = speed * speed - (drift[0] * drift[0] + drift[1] * drift[1])
    b = rel[0] * drift[0] + rel[1] * drift[1]
    # a t^2 - 2 b t - c = 0
    if abs(a) < 1e-15:
        return -c / (2.0 * b) if b < 0.0 else math.inf
    disc = b * b + a * c
    if disc < 0.0:
        return math.inf
    root = math.sqrt(disc)
    roots = sorted(t for t in ((b - root) / a, (b + root) / a) if t >= 0.0)
    return roots[0] if roots else math.inf


def round_trip_estimate(robot: RobotState, debris: DebrisItem, disposal: Point,
                        params: SimParams) -> tuple[float, float, Point]:
    """
    ``(time, delta_v, intercept_point)`` of a constant-speed round trip:
    intercept the drifting item at ``max_speed``, grasp, then carry it
    straight to ``disposal``. Delta-v counts the four velocity changes.
    """
    spec = robot.spec
    s = spec.max_speed
    rel = (debris.position[0] - robot.position[0], debris.position[1] - robot.position[1])
    t1 = _intercept_time(rel, debris.drift_velocity, s)
    if math.isinf(t1):
        return math.inf, math.inf, debris.position
    P = (debris.position[0] + debris.drift_velocity[0] * t1,
         debris.position[1] + debris.drift_velocity[1] * t1)
    v = robot.velocity
    if t1 > 0.0:
        v1 = ((P[0] - robot.position[0]) / t1, (P[1] - robot.position[1]) / t1)
    else:
        v1 = v
    u = debris.drift_velocity
    L2 = math.hypot(disposal[0] - P[0], disposal[1] - P[1])
    t2 = L2 / s
    v2 = ((disposal[0] - P[0]) / t2, (disposal[1] - P[1]) / t2) if t2 > 0.0 else (0.0, 0.0)
    dv = (math.hypot(v1[0] - v[0], v1[1] - v[1]) + math.hypot(u[0] - v1[0], u[1] - v1[1])
          + math.hypot(v2[0] - u[0], v2[1] - u[1]) + math.hypot(v2[0], v2[1]))
    return t1 + grasp_duration(spec, debris, params) + t2, dv, P


def reachable(robot: RobotState, debris: DebrisItem, horizon_remaining: float,
              disposal: Point, params: SimParams | None = None) -> bool:
    """True iff the round trip fits the remaining fuel, time and workspace."""
    if robot.out_of_fuel:
        return False
    params = params or SimParams()
    t, dv, P = round_trip_estimate(robot, debris, disposal, params)
    if math.isinf(t):
        return False
    start = robot.spec.start_position
    if math.hypot(P[0] - start[0], P[1] - start[1]) > robot.spec.workspace_radius:
        return False
    return t <= horizon_remaining + TIME_EPS and dv <= robot.fuel_left + TIME_EPS


def world_reachable(world: World, robot: RobotState, debris: DebrisItem) -> bool:
    return reachable(robot, debris, world.time_left, world.disposal, world.params)


def metrics(world: World) -> EpisodeMetrics:
    total = len(world.field.items)
    retrieved = world.retrieved_count()
    fuel = sum(r.fuel_used for r in world.robots)
    reward = retrieved - world.params.fuel_weight * fuel - world.penalty_accum
    return EpisodeMetrics(retrieved, total, retrieved / max(total, 1), world.clock, fuel,
                          world.penalty_accum, reward)


def _quiescent(world: World) -> bool:
    """Nothing can change any more without a new assignment."""
    for r in world.robots:
        if not r.out_of_fuel and (r.phase is not Phase.IDLE or r.velocity != (0.0, 0.0)):
            return False
    for d in world.field.items:
        if d.state is DebrisState.PENDING and d.drift_velocity != (0.0, 0.0):
            return False
    return True


def run_episode(world: World, policy: Policy, horizon: float,
                log: list[Event] | None = None,
                on_step: Callable[[World, list[Event]], None] | None = None) -> EpisodeMetrics:
    """
    Roll ``policy`` out until ``horizon`` seconds pass or all debris is
    retrieved. The policy is queried whenever a robot is available and
    Pending debris exists; the episode also ends early once the world is
    quiescent and the policy declines to assign anything.
    """
    if not horizon > 0.0:
        raise InvalidHorizon(f"horizon must be positive, got {horizon}")
    world.horizon = horizon
    total = len(world.field.items)
    if log is not None:
        log.append(Event(world.clock, None, "episode_start", None))
    while world.clock < horizon - TIME_EPS and world.retrieved_count() < total:
        assignments: dict[int, Optional[int]] = {}
        if any(r.available for r in world.robots) and world.pending():
            proposed = policy(world)
            assignments = {rid: did for rid, did in proposed.items()
                           if did is not None and world.robot(rid).available}
        if not assignments and _quiescent(world):
            break
        _, events = step(world, assignments)
        if log is not None:
            log.extend(events)
        if on_step is not None:
            on_step(world, events)
    if log is not None:
        log.append(Event(world.clock, None, "episode_end", None))
    return metrics(world)


EVENT_COLUMNS = ["clock", "robot_id", "event", "debris_id"]


def _opt(x) -> str:
    return "" if x is None else str(x)


def write_events_csv(path, events: Iterable[Event]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow([f"{e.clock:.6f}", _opt(e.robot_id), e.kind, _opt(e.debris_id)])
