"""
YAML experiment configuration with a strict schema.

Every key is optional; omitted keys take the defaults below, which describe
the two-robot dense-cluster benchmark. Unknown keys are rejected so that a
typo never silently falls back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .checks import default_chains
from .debris import FieldKind, FieldSpec, Region
from .errors import ConfigError, OrbitPnPError, ParseError, ValidationError
from .rnea import ChainModel
from .sim import RobotSpec, SimParams
from .allocation.env import EnvSpec
from .allocation.qlearning import QHyper

DEFAULT_ROBOTS = (
    RobotSpec(0, (2.0, 2.0), max_speed=1.0, max_accel=0.5, grasp_time=2.0, fuel_budget=200.0),
    RobotSpec(1, (38.0, 2.0), max_speed=1.0, max_accel=0.5, grasp_time=2.0, fuel_budget=200.0),
)


@dataclass(frozen=True)
class AllocationConfig:
    episodes: int = 300
    learning_rate: float = 0.1
    discount: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    grid: int = 4
    n_mc: int = 5
    train_seed: int = 0

    def hyper(self) -> QHyper:
        return QHyper(self.episodes, self.learning_rate, self.discount,
                      self.epsilon_start, self.epsilon_end, self.grid)


@dataclass(frozen=True)
class Config:
    robots: tuple[RobotSpec, ...] = DEFAULT_ROBOTS
    field_spec: FieldSpec = field(default_factory=FieldSpec)
    region: Region = field(default_factory=lambda: Region((0.0, 0.0), (40.0, 40.0)))
    disposal: tuple[float, float] = (20.0, 2.0)
    params: SimParams = field(default_factory=SimParams)
    horizon: float = 300.0
    allocation: AllocationConfig = field(default_factory=AllocationConfig)
    chains: dict[str, ChainModel] = field(default_factory=default_chains)
    seeds: tuple[int, ...] = tuple(range(10))
    output_dir: str = "out"

    @property
    def dt(self) -> float:
        return self.params.dt

    def env(self) -> EnvSpec:
        return EnvSpec(self.robots, self.region, self.disposal, self.field_spec, self.horizon, self.params)


# -- schema helpers ---------------------------------------------------------

TOP_KEYS = {"robots", "field", "region", "disposal", "dt", "horizon", "grasp_tol", "release_tol",
            "fuel_weight", "accel_penalty_weight", "tumble_grasp_time", "allocation",
            "dynamics", "seeds", "output_dir"}
ROBOT_KEYS = {"id", "start", "max_speed", "max_accel", "workspace_radius", "grasp_time", "fuel_budget"}
FIELD_KEYS = {"kind", "count", "r_min", "k", "nx", "ny", "jitter", "clusters", "cluster_std",
              "cluster_r_min", "size", "tumbling", "drift_speed_max", "tumble_rate_max"}
ALLOC_KEYS = set(AllocationConfig.__dataclass_fields__)
CHAIN_KEYS = {"name", "gravity", "links"}
LINK_KEYS = {"mass", "com", "rot_inertia", "friction", "axis", "offset_rotation", "offset_translation"}


def _strict(data: Any, allowed: set[str], where: str) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(where or "<root>", "expected a mapping")
    unknown = sorted(str(k) for k in data if k not in allowed)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ParseError(f"unknown field {prefix}{unknown[0]!r}; allowed: {', '.join(sorted(allowed))}")
    return data


def _number(data: dict, key: str, default, where: str, *, positive=False, nonneg=False,
            integer=False, unit=False):
    name = f"{where}.{key}" if where else key
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"expected a number, got {value!r}")
    if integer and not float(value).is_integer():
        raise ValidationError(name, f"expected an integer, got {value!r}")
    value = int(value) if integer else float(value)
    if not math.isfinite(value) and not (value == math.inf and key == "workspace_radius"):
        raise ValidationError(name, "must be finite")
    if positive and not value > 0:
        raise ValidationError(name, f"must be positive, got {value}")
    if nonneg and value < 0:
        raise ValidationError(name, f"must be non-negative, got {value}")
    if unit and not 0.0 <= value <= 1.0:
        raise ValidationError(name, f"must lie in [0, 1], got {value}")
    return value


def _point(value, name: str, dim: int = 2) -> tuple[float, ...]:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected {dim} numbers") from None
    if arr.shape != (dim,) or not np.all(np.isfinite(arr)):
        raise ValidationError(name, f"expected {dim} finite numbers, got {value!r}")
    return tuple(float(x) for x in arr)


def _robots(data, defaults) -> tuple[RobotSpec, ...]:
    if data is None:
        return defaults
    if not isinstance(data, list) or not data:
        raise ValidationError("robots", "expected a non-empty list")
    out, seen = [], set()
    for i, rd in enumerate(data):
        where = f"robots[{i}]"
        rd = _strict(rd, ROBOT_KEYS, where)
        rid = _number(rd, "id", i, where, integer=True, nonneg=True)
        if rid in seen:
            raise ValidationError(f"{where}.id", f"duplicate robot id {rid}")
        seen.add(rid)
        if "start" not in rd:
            raise ValidationError(f"{where}.start", "required")
        out.append(RobotSpec(
            rid, _point(rd["start"], f"{where}.start"),
            max_speed=_number(rd, "max_speed", 1.0, where, positive=True),
            max_accel=_number(rd, "max_accel", 0.5, where, positive=True),
            workspace_radius=_number(rd, "workspace_radius", math.inf, where, positive=True),
            grasp_time=_number(rd, "grasp_time", 2.0, where, nonneg=True),
            fuel_budget=_number(rd, "fuel_budget", 200.0, where, positive=True),
        ))
    return tuple(out)


def _field(data) -> FieldSpec:
    fd = _strict(data, FIELD_KEYS, "field")
    d = FieldSpec()
    kind = fd.get("kind", d.kind.value)
    try:
        kind = FieldKind(kind)
    except ValueError:
        raise ValidationError("field.kind", f"unknown kind {kind!r}; expected one of "
                              + ", ".join(k.value for k in FieldKind)) from None
    tumbling = fd.get("tumbling", d.tumbling)
    if not isinstance(tumbling, bool):
        raise ValidationError("field.tumbling", "expected true or false")
    w = "field"
    values = dict(
        kind=kind, tumbling=tumbling,
        count=_number(fd, "count", d.count, w, integer=True, nonneg=True),
        r_min=_number(fd, "r_min", d.r_min, w, positive=True),
        k=_number(fd, "k", d.k, w, integer=True, positive=True),
        nx=_number(fd, "nx", d.nx, w, integer=True, positive=True),
        ny=_number(fd, "ny", d.ny, w, integer=True, positive=True),
        jitter=_number(fd, "jitter", d.jitter, w, nonneg=True),
        clusters=_number(fd, "clusters", d.clusters, w, integer=True, nonneg=True),
        cluster_std=_number(fd, "cluster_std", d.cluster_std, w, positive=True),
        cluster_r_min=_number(fd, "cluster_r_min", d.cluster_r_min, w, positive=True),
        size=_number(fd, "size", d.size, w, positive=True),
        drift_speed_max=_number(fd, "drift_speed_max", d.drift_speed_max, w, nonneg=True),
        tumble_rate_max=_number(fd, "tumble_rate_max", d.tumble_rate_max, w, nonneg=True),
    )
    if values["jitter"] >= 0.5:
        raise ValidationError("field.jitter", "must be below 0.5")
    try:
        return FieldSpec(**values)
    except OrbitPnPError as exc:
        raise ValidationError("field", str(exc)) from None


def _region(data) -> Region:
    if data is None:
        return Config().region
    rd = _strict(data, {"min", "max"}, "region")
    lo = _point(rd.get("min", (0.0, 0.0)), "region.min")
    hi = _point(rd.get("max", (40.0, 40.0)), "region.max")
    if not (hi[0] > lo[0] and hi[1] > lo[1]):
        raise ValidationError("region", "max must exceed min on both axes")
    return Region(lo, hi)


def _allocation(data) -> AllocationConfig:
    ad = _strict(data, ALLOC_KEYS, "allocation")
    d, w = AllocationConfig(), "allocation"
    cfg = AllocationConfig(
        episodes=_number(ad, "episodes", d.episodes, w, integer=True, positive=True),
        learning_rate=_number(ad, "learning_rate", d.learning_rate, w, positive=True),
        discount=_number(ad, "discount", d.discount, w, nonneg=True),
        epsilon_start=_number(ad, "epsilon_start", d.epsilon_start, w, unit=True),
        epsilon_end=_number(ad, "epsilon_end", d.epsilon_end, w, unit=True),
        grid=_number(ad, "grid", d.grid, w, integer=True, positive=True),
        n_mc=_number(ad, "n_mc", d.n_mc, w, integer=True, positive=True),
        train_seed=_number(ad, "train_seed", d.train_seed, w, integer=True, nonneg=True),
    )
    if cfg.learning_rate > 1.0:
        raise ValidationError("allocation.learning_rate", "must lie in (0, 1]")
    if cfg.discount >= 1.0:
        raise ValidationError("allocation.discount", "must lie in [0, 1)")
    return cfg


def _chains(data) -> dict[str, ChainModel]:
    if data is None:
        return default_chains()
    dd = _strict(data, {"chains"}, "dynamics")
    chains = dd.get("chains")
    if chains is None:
        return default_chains()
    if not isinstance(chains, list) or not chains:
        raise ValidationError("dynamics.chains", "expected a non-empty list")
    out: dict[str, ChainModel] = {}
    for i, cd in enumerate(chains):
        where = f"dynamics.chains[{i}]"
        cd = _strict(cd, CHAIN_KEYS, where)
        name = str(cd.get("name", f"chain{i}"))
        if name in out:
            raise ValidationError(f"{where}.name", f"duplicate chain name {name!r}")
        links = cd.get("links")
        if not isinstance(links, list) or not links:
            raise ValidationError(f"{where}.links", "expected a non-empty list")
        for j, ld in enumerate(links):
            lw = f"{where}.links[{j}]"
            ld = _strict(ld, LINK_KEYS, lw)
            _number(ld, "mass", None, lw, positive=True)
            _number(ld, "friction", 0.0, lw, nonneg=True)
            if "rot_inertia" not in ld:
                raise ValidationError(f"{lw}.rot_inertia", "required")
        try:
            out[name] = ChainModel.from_dict(cd)
        except (OrbitPnPError, ValueError, TypeError) as exc:
            raise ValidationError(where, str(exc)) from None
    return out


def _seeds(data) -> tuple[int, ...]:
    if data is None:
        return Config().seeds
    if not isinstance(data, list) or not data:
        raise ValidationError("seeds", "expected a non-empty list of integers")
    for s in data:
        if isinstance(s, bool) or not isinstance(s, int) or s < 0:
            raise ValidationError("seeds", f"expected non-negative integers, got {s!r}")
    return tuple(data)


def config_from_dict(data: dict | None) -> Config:
    """Validate an already-parsed mapping into a :class:`Config`."""
    data = _strict(data, TOP_KEYS, "")
    d = SimParams()
    params = SimParams(
        dt=_number(data, "dt", d.dt, "", positive=True),
        grasp_tol=_number(data, "grasp_tol", d.grasp_tol, "", nonneg=True),
        release_tol=_number(data, "release_tol", d.release_tol, "", nonneg=True),
        fuel_weight=_number(data, "fuel_weight", d.fuel_weight, "", nonneg=True),
        accel_penalty_weight=_number(data, "accel_penalty_weight", d.accel_penalty_weight, "", nonneg=True),
        tumble_grasp_time=_number(data, "tumble_grasp_time", d.tumble_grasp_time, "", nonneg=True),
    )
    region = _region(data.get("region"))
    output_dir = data.get("output_dir", Config.output_dir)
    if not isinstance(output_dir, str) or not output_dir:
        raise ValidationError("output_dir", "expected a non-empty string")
    return Config(
        robots=_robots(data.get("robots"), DEFAULT_ROBOTS),
        field_spec=_field(data.get("field")),
        region=region,
        disposal=_point(data.get("disposal", Config.disposal), "disposal"),
        params=params,
        horizon=_number(data, "horizon", Config.horizon, "", positive=True),
        allocation=_allocation(data.get("allocation")),
        chains=_chains(data.get("dynamics")),
        seeds=_seeds(data.get("seeds")),
        output_dir=output_dir,
    )


def parse_config(path) -> Config:
    """Load and validate a YAML config file.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ParseError: malformed YAML (with line/column) or an unknown key.
        ValidationError: a value is out of range; ``.field`` names it.
    """
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{path}: invalid YAML{where}: {getattr(exc, 'problem', exc)}") from None
    if data is not None and not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        if isinstance(exc, ParseError):
            raise ParseError(f"{path}: {exc}") from None
        raise
