from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

from ..debris import DebrisField, FieldSpec, Point, Region, make_field
from ..sim import RobotSpec, SimParams, World, world_init

FieldSource = Union[FieldSpec, DebrisField, Callable[[int], DebrisField]]


@dataclass(frozen=True)
class EnvSpec:
    """Everything needed to build a seeded episode.

    ``field`` is either a :class:`FieldSpec` (regenerated per seed), a fixed
    :class:`DebrisField`, or any callable ``seed -> DebrisField``.
    """

    robots: tuple[RobotSpec, ...]
    region: Region
    disposal: Point
    field: FieldSource
    horizon: float = 300.0
    params: SimParams = field(default_factory=SimParams)

    def make_field(self, seed: int) -> DebrisField:
        if isinstance(self.field, FieldSpec):
            return make_field(self.field, self.region, seed)
        if isinstance(self.field, DebrisField):
            return self.field.copy()
        return self.field(seed)

    def make_world(self, seed: int) -> World:
        return world_init(self.robots, self.make_field(seed), self.disposal, params=self.params)
