"""Planar debris-field generation: Poisson disk, jittered grid and clusters."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .errors import InvalidFieldSpec, InvalidGrid, InvalidRadius, InvalidRegion
from .rng import XorShift64Star, derive_seed

Point = tuple[float, float]


@dataclass(frozen=True)
class Region:
    min: Point
    max: Point

    def __post_init__(self):
        lo = (float(self.min[0]), float(self.min[1]))
        hi = (float(self.max[0]), float(self.max[1]))
        if not (lo[0] < hi[0] and lo[1] < hi[1]):
            raise InvalidRegion(f"region min {lo} must be below max {hi} componentwise")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def width(self) -> float:
        return self.max[0] - self.min[0]

    @property
    def height(self) -> float:
        return self.max[1] - self.min[1]

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, p: Point) -> bool:
        return self.min[0] <= p[0] <= self.max[0] and self.min[1] <= p[1] <= self.max[1]


class DebrisState(enum.Enum):
    PENDING = "pending"
    CLAIMED = "claimed"
    GRASPED = "grasped"
    RETRIEVED = "retrieved"


@dataclass
class DebrisItem:
    id: int
    position: Point
    drift_velocity: Point = (0.0, 0.0)
    tumble_rate: float = 0.0
    size: float = 0.3
    state: DebrisState = DebrisState.PENDING

    def __post_init__(self):
        if not self.size > 0.0:
            raise InvalidFieldSpec("debris size must be positive")


@dataclass
class DebrisField:
    items: list[DebrisItem]
    region: Region

    def __post_init__(self):
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise InvalidFieldSpec("debris ids must be unique")

    def copy(self) -> "DebrisField":
        return DebrisField([replace(it) for it in self.items], self.region)

    def by_id(self) -> dict[int, DebrisItem]:
        return {it.id: it for it in self.items}


class FieldKind(enum.Enum):
    POISSON_DISK = "poisson_disk"
    GRID = "grid"
    DENSE_CLUSTER = "dense_cluster"
    DISPERSED = "dispersed"


@dataclass(frozen=True)
class FieldSpec:
    """Parameters of a debris distribution.

    ``count`` is the target number of items for the Poisson, cluster and
    dispersed kinds (0 keeps every Poisson sample); ``nx``/``ny`` size the
    grid. ``clusters=0`` draws between 1 and 3 cluster centres from the seed.
    """

    kind: FieldKind = FieldKind.DENSE_CLUSTER
    count: int = 20
    r_min: float = 1.0
    k: int = 30
    nx: int = 3
    ny: int = 3
    jitter: float = 0.0
    clusters: int = 0
    cluster_std: float = 3.0
    cluster_r_min: float = 0.5
    size: float = 0.3
    tumbling: bool = False
    drift_speed_max: float = 0.0
    tumble_rate_max: float = 0.5

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, FieldKind) else FieldKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.count < 0:
            raise InvalidFieldSpec("count must be non-negative")
        for name in ("r_min", "size", "cluster_std", "cluster_r_min"):
            if not getattr(self, name) > 0.0:
                raise InvalidFieldSpec(f"{name} must be positive")
        if self.drift_speed_max < 0.0 or self.tumble_rate_max < 0.0:
            raise InvalidFieldSpec("drift_speed_max and tumble_rate_max must be non-negative")
        if self.tumbling and self.tumble_rate_max <= 0.0:
            raise InvalidFieldSpec("tumbling fields need tumble_rate_max > 0")
        if self.clusters < 0 or self.k < 1:
            raise InvalidFieldSpec("clusters must be >= 0 and k >= 1")


def poisson_disk_sample(region: Region, r_min: float, k: int = 30, seed: int = 0) -> list[Point]:
    """
    Maximal Poisson-disk point set by active-list dart throwing.

    Candidates are drawn uniformly (by area) in the annulus ``[r, 2r]`` around
    a random active point; a point retires after ``k`` consecutive misses and
    the loop ends when no active point remains. Every pair of returned points
    is at least ``r_min`` apart.
    """
    if not r_min > 0.0 or not math.isfinite(r_min):
        raise InvalidRadius(f"r_min must be positive and finite, got {r_min}")
    if k < 1:
        raise InvalidRadius("k must be at least 1")
    rng = XorShift64Star(derive_seed(seed, 0x9D15C))
    cell = r_min / math.sqrt(2.0)
    gw = int(math.ceil(region.width / cell)) + 1
    gh = int(math.ceil(region.height / cell)) + 1
    grid: dict[tuple[int, int], int] = {}
    r2 = r_min * r_min
    x0, y0 = region.min

    def cell_of(p: Point) -> tuple[int, int]:
        return int((p[0] - x0) / cell), int((p[1] - y0) / cell)

    def fits(p: Point) -> bool:
        cx, cy = cell_of(p)
        for ix in range(max(cx - 2, 0), min(cx + 3, gw)):
            for iy in range(max(cy - 2, 0), min(cy + 3, gh)):
                j = grid.get((ix, iy))
                if j is not None:
                    q = points[j]
                    if (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 < r2:
                        return False
        return True

    first = (rng.uniform(region.min[0], region.max[0]), rng.uniform(region.min[1], region.max[1]))
    points: list[Point] = [first]
    grid[cell_of(first)] = 0
    active = [0]
    while active:
        slot = rng.randbelow(len(active))
        base = points[active[slot]]
        for _ in range(k):
            rad = math.sqrt(rng.uniform(r2, 4.0 * r2))
            ang = rng.uniform(0.0, 2.0 * math.pi)
            cand = (base[0] + rad * math.cos(ang), base[1] + rad * math.sin(ang))
            if region.contains(cand) and fits(cand):
                points.append(cand)
                grid[cell_of(cand)] = len(points) - 1
                active.append(len(points) - 1)
                break
        else:
            active[slot] = active[-1]
            active.pop()
    return points


def grid_sample(region: Region, nx: int, ny: int, jitter: float = 0.0, seed: int = 0) -> list[Point]:
    """Cell centres of an ``nx`` x ``ny`` grid, x varying fastest, each
    displaced by up to ``jitter`` times half the cell size per axis."""
    if nx < 1 or ny < 1:
        raise InvalidGrid(f"grid must be at least 1x1, got {nx}x{ny}")
    if not 0.0 <= jitter < 0.5:
        raise InvalidGrid(f"jitter must lie in [0, 0.5), got {jitter}")
    rng = XorShift64Star(derive_seed(seed, 0x6B1D))
    cw, ch = region.width / nx, region.height / ny
    out = []
    for j in range(ny):
        for i in range(nx):
            x = region.min[0] + (i + 0.5) * cw
            y = region.min[1] + (j + 0.5) * ch
            if jitter > 0.0:
                x += rng.uniform(-1.0, 1.0) * jitter * cw / 2.0
                y += rng.uniform(-1.0, 1.0) * jitter * ch / 2.0
            out.append((x, y))
    return out


def _subsample(points: list[Point], count: int, rng: XorShift64Star) -> list[Point]:
    if count <= 0 or len(points) <= count:
        return points
    idx = list(range(len(points)))
    rng.shuffle(idx)
    return [points[i] for i in sorted(idx[:count])]


def _dispersed(region: Region, spec: FieldSpec, seed: int) -> list[Point]:
    count = max(spec.count, 1)
    r = math.sqrt(region.width * region.height / count)
    while True:
        pts = poisson_disk_sample(region, r, spec.k, seed)
        if len(pts) >= count:
            return pts
        r *= 0.9


def _clustered(region: Region, spec: FieldSpec, rng: XorShift64Star) -> list[Point]:
    n_centres = spec.clusters or 1 + rng.randbelow(3)
    margin_x = min(spec.cluster_std, region.width / 4.0)
    margin_y = min(spec.cluster_std, region.height / 4.0)
    centres = [(rng.uniform(region.min[0] + margin_x, region.max[0] - margin_x),
                rng.uniform(region.min[1] + margin_y, region.max[1] - margin_y))
               for _ in range(n_centres)]
    r2 = spec.cluster_r_min ** 2
    pts: list[Point] = []
    attempts = 0
    while len(pts) < spec.count and attempts < 1000 * max(spec.count, 1):
        c = centres[attempts % n_centres]
        attempts += 1
        p = (rng.normal(c[0], spec.cluster_std), rng.normal(c[1], spec.cluster_std))
        if not region.contains(p):
            continue
        if any((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 < r2 for q in pts):
            continue
        pts.append(p)
    return pts


def make_field(spec: FieldSpec, region: Region, seed: int) -> DebrisField:
    """Generate a debris field; a pure function of ``(spec, region, seed)``."""
    rng = XorShift64Star(derive_seed(seed, 0xF1E1D))
    if spec.kind is FieldKind.GRID:
        pts = grid_sample(region, spec.nx, spec.ny, spec.jitter, seed)
    elif spec.kind is FieldKind.POISSON_DISK:
        pts = _subsample(poisson_disk_sample(region, spec.r_min, spec.k, seed), spec.count, rng)
    elif spec.kind is FieldKind.DISPERSED:
        pts = _subsample(_dispersed(region, spec, seed), spec.count, rng)
    else:
        pts = _clustered(region, spec, rng)
    motion = rng.child(1)
    items = []
    for i, p in enumerate(pts):
        drift, tumble = (0.0, 0.0), 0.0
        if spec.tumbling:
            speed = motion.uniform(0.0, spec.drift_speed_max)
            heading = motion.uniform(0.0, 2.0 * math.pi)
            drift = (speed * math.cos(heading), speed * math.sin(heading))
            sign = 1.0 if motion.random() < 0.5 else -1.0
            tumble = sign * motion.uniform(0.1, 1.0) * spec.tumble_rate_max
        items.append(DebrisItem(i, p, drift, tumble, spec.size))
    return DebrisField(items, region)


def mean_nearest_neighbor(points: Iterable[Point]) -> float:
    pts = list(points)
    if len(pts) < 2:
        return float("nan")
    total = 0.0
    for i, p in enumerate(pts):
        total += min(math.hypot(p[0] - q[0], p[1] - q[1]) for j, q in enumerate(pts) if j != i)
    return total / len(pts)


FIELD_COLUMNS = ["id", "x", "y", "vx", "vy", "tumble_rate", "size"]


def write_field_csv(path, fld: DebrisField) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELD_COLUMNS)
        for it in fld.items:
            w.writerow([it.id, repr(it.position[0]), repr(it.position[1]),
                        repr(it.drift_velocity[0]), repr(it.drift_velocity[1]),
                        repr(it.tumble_rate), repr(it.size)])


def read_field_csv(path, region: Region) -> DebrisField:
    """Load a field written by :func:`write_field_csv`; all items come back Pending."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FIELD_COLUMNS:
            raise InvalidFieldSpec(f"expected columns {FIELD_COLUMNS}, got {reader.fieldnames}")
        items = [DebrisItem(int(r["id"]), (float(r["x"]), float(r["y"])),
                            (float(r["vx"]), float(r["vy"])), float(r["tumble_rate"]),
                            float(r["size"]))
                 for r in reader]
    return DebrisField(items, region)
