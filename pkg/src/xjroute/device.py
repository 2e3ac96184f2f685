"""Digitised X-junction grid: positions, one-way lanes and gate zones.

Coordinates are ``(row, col)`` integers with rows growing downwards.  Junction
centre ``(i, j)`` sits at ``(i * R, j * R)``; the ``R - 1`` positions between
two neighbouring centres belong to the lane joining them.  Perimeter junctions
own one outer arm of ``R // 2`` positions ending in an exterior gate zone.
Interior junctions own an off-lane pocket holding their gate zone, plus two
waiting slots: the two lane positions that feed into the junction centre.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

Coord = tuple[int, int]


class Direction(Enum):
    RIGHT = (0, 1)
    DOWN = (1, 0)
    LEFT = (0, -1)
    UP = (-1, 0)

    @property
    def delta(self) -> Coord:
        return self.value


# fixed tie-break order at decision points
DIRECTION_ORDER = (Direction.RIGHT, Direction.DOWN, Direction.LEFT, Direction.UP)
_DELTA_TO_DIR = {d.delta: d for d in Direction}


class LayoutError(ValueError):
    """Invalid device parameters or a query outside the device."""


@dataclass(frozen=True)
class GateZone:
    id: int
    coordinate: Coord
    kind: str  # "interior" | "exterior"
    adjacent_junction: Coord
    waiting_slots: tuple[Coord, ...] = ()

    @property
    def targets(self) -> tuple[Coord, ...]:
        """Where assigned ions travel to before combining."""
        return self.waiting_slots if self.kind == "interior" else (self.coordinate,)


def horizontal_lane_directions(m: int) -> list[Direction]:
    dirs = [Direction.RIGHT if i % 2 == 0 else Direction.LEFT for i in range(m)]
    # bottom lane closes the clockwise perimeter
    dirs[-1] = Direction.LEFT
    return dirs


def vertical_lane_directions(m: int) -> list[Direction]:
    dirs = [Direction.UP if j % 2 == 0 else Direction.DOWN for j in range(m)]
    dirs[-1] = Direction.DOWN
    return dirs


def _arm_direction(i: int, j: int, m: int) -> Direction:
    if i == 0:
        return Direction.UP
    if i == m - 1:
        return Direction.DOWN
    if j == 0:
        return Direction.LEFT
    return Direction.RIGHT


@dataclass(frozen=True, eq=False)
class DeviceLayout:
    device_size: int
    resolution: int
    positions: tuple[Coord, ...]
    h_lanes: tuple[Direction, ...]
    v_lanes: tuple[Direction, ...]
    gate_zones: tuple[GateZone, ...]
    junction_centres: frozenset[Coord]
    index: dict[Coord, int] = field(repr=False)
    succ: tuple[tuple[int, ...], ...] = field(repr=False)
    pred: tuple[tuple[int, ...], ...] = field(repr=False)
    neighbours: tuple[tuple[int, ...], ...] = field(repr=False)
    arm_of: dict[int, int] = field(repr=False)  # arm position index -> zone id
    pocket_of: dict[int, int] = field(repr=False)  # pocket index -> zone id
    _cache: dict = field(default_factory=dict, repr=False)

    # -- basic queries -------------------------------------------------
    @property
    def n_positions(self) -> int:
        return len(self.positions)

    @property
    def lanes(self) -> dict[tuple[str, int], Direction]:
        out = {("h", i): d for i, d in enumerate(self.h_lanes)}
        out.update({("v", j): d for j, d in enumerate(self.v_lanes)})
        return out

    @property
    def interior_zones(self) -> list[GateZone]:
        return [z for z in self.gate_zones if z.kind == "interior"]

    @property
    def exterior_zones(self) -> list[GateZone]:
        return [z for z in self.gate_zones if z.kind == "exterior"]

    def idx(self, c: Coord) -> int:
        try:
            return self.index[tuple(c)]
        except KeyError:
            raise LayoutError(f"{c} is not a position of this device") from None

    def is_centre(self, c: Coord) -> bool:
        return tuple(c) in self.junction_centres

    def is_lane(self, c: Coord) -> bool:
        r, col = c
        rr = self.resolution
        span = (self.device_size - 1) * rr
        on_h = r % rr == 0 and 0 <= r <= span and 0 <= col <= span
        on_v = col % rr == 0 and 0 <= col <= span and 0 <= r <= span
        return on_h or on_v

    def zone_targets(self, zone_id: int) -> tuple[int, ...]:
        return tuple(self.index[c] for c in self.gate_zones[zone_id].targets)

    # -- distance fields -----------------------------------------------
    def distance_field(self, targets: Sequence[int], directed: bool = True) -> list[int]:
        """Distance (in positions) from every position to the nearest target.

        Unreachable positions get -1.  Results are memoised per layout.
        """
        key = (tuple(sorted(targets)), directed)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        back = self.pred if directed else self.neighbours
        dist = [-1] * self.n_positions
        queue = deque()
        for t in key[0]:
            dist[t] = 0
            queue.append(t)
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for v in back[u]:
                if dist[v] < 0:
                    dist[v] = du
                    queue.append(v)
        self._cache[key] = dist
        return dist

    def zone_field(self, zone_id: int, directed: bool = True) -> list[int]:
        return self.distance_field(self.zone_targets(zone_id), directed)

    def to_json(self) -> str:
        return json.dumps(
            {
                "device_size": self.device_size,
                "resolution": self.resolution,
                "positions": [list(p) for p in self.positions],
                "lanes": {
                    "horizontal": [d.name.lower() for d in self.h_lanes],
                    "vertical": [d.name.lower() for d in self.v_lanes],
                },
                "gate_zones": [
                    {
                        "id": z.id,
                        "coordinate": list(z.coordinate),
                        "kind": z.kind,
                        "adjacent_junction": list(z.adjacent_junction),
                        "waiting_slots": [list(s) for s in z.waiting_slots],
                    }
                    for z in self.gate_zones
                ],
            },
            sort_keys=True,
        )


def build_layout(m: int, r: int = 7) -> DeviceLayout:
    """Build the M x M X-junction device at resolution R."""
    if not isinstance(m, int) or m < 2:
        raise LayoutError(f"device size must be an integer >= 2, got {m!r}")
    if not isinstance(r, int) or r < 3:
        raise LayoutError(f"resolution must be an integer >= 3, got {r!r}")

    span = (m - 1) * r
    h_dirs = horizontal_lane_directions(m)
    v_dirs = vertical_lane_directions(m)
    arm_len = r // 2

    coords: list[Coord] = []
    seen: set[Coord] = set()

    def add(c: Coord) -> None:
        if c not in seen:
            seen.add(c)
            coords.append(c)

    for i in range(m):
        for x in range(span + 1):
            add((i * r, x))
    for j in range(m):
        for y in range(span + 1):
            add((y, j * r))

    centres = frozenset((i * r, j * r) for i in range(m) for j in range(m))
    edges: list[tuple[Coord, Coord]] = []
    for i, d in enumerate(h_dirs):
        for x in range(span):
            a, b = (i * r, x), (i * r, x + 1)
            edges.append((a, b) if d is Direction.RIGHT else (b, a))
    for j, d in enumerate(v_dirs):
        for y in range(span):
            a, b = (y, j * r), (y + 1, j * r)
            edges.append((a, b) if d is Direction.DOWN else (b, a))

    zones: list[GateZone] = []
    arm_cells: dict[Coord, int] = {}
    pockets: dict[Coord, int] = {}
    for i in range(m):
        for j in range(m):
            centre = (i * r, j * r)
            zid = len(zones)
            if i in (0, m - 1) or j in (0, m - 1):
                dy, dx = _arm_direction(i, j, m).delta
                arm = [(centre[0] + k * dy, centre[1] + k * dx) for k in range(1, arm_len + 1)]
                prev = centre
                for c in arm:
                    add(c)
                    arm_cells[c] = zid
                    edges.append((prev, c))
                    edges.append((c, prev))
                    prev = c
                zones.append(GateZone(zid, arm[-1], "exterior", centre))
            else:
                h_in = (centre[0], centre[1] - h_dirs[i].delta[1])
                v_in = (centre[0] - v_dirs[j].delta[0], centre[1])
                pocket = (centre[0] + 1, centre[1] + 1)
                add(pocket)
                pockets[pocket] = zid
                zones.append(GateZone(zid, pocket, "interior", centre, (h_in, v_in)))

    index = {c: k for k, c in enumerate(coords)}
    succ: list[list[int]] = [[] for _ in coords]
    pred: list[list[int]] = [[] for _ in coords]
    for a, b in edges:
        succ[index[a]].append(index[b])
        pred[index[b]].append(index[a])

    def dir_key(a: int, b: int) -> int:
        ca, cb = coords[a], coords[b]
        return DIRECTION_ORDER.index(_DELTA_TO_DIR[(cb[0] - ca[0], cb[1] - ca[1])])

    succ_t = tuple(tuple(sorted(s, key=lambda b, a=a: dir_key(a, b))) for a, s in enumerate(succ))
    pred_t = tuple(tuple(p) for p in pred)
    nbrs = tuple(
        tuple(sorted(set(s) | set(p), key=lambda b, a=a: dir_key(a, b)))
        for a, (s, p) in enumerate(zip(succ, pred))
    )
    return DeviceLayout(
        device_size=m,
        resolution=r,
        positions=tuple(coords),
        h_lanes=tuple(h_dirs),
        v_lanes=tuple(v_dirs),
        gate_zones=tuple(zones),
        junction_centres=centres,
        index=index,
        succ=succ_t,
        pred=pred_t,
        neighbours=nbrs,
        arm_of={index[c]: z for c, z in arm_cells.items()},
        pocket_of={index[c]: z for c, z in pockets.items()},
    )


def lane_direction(layout: DeviceLayout, coordinate: Coord) -> Direction | frozenset[Direction]:
    """Allowed travel direction at a lane position.

    Junction centres are decision points and return the set of exit
    directions of the two lanes crossing there.
    """
    c = tuple(coordinate)
    if c not in layout.index or not layout.is_lane(c):
        raise LayoutError(f"{c} is not a lane position")
    rr = layout.resolution
    row, col = c
    if layout.is_centre(c):
        return frozenset((layout.h_lanes[row // rr], layout.v_lanes[col // rr]))
    if row % rr == 0:
        return layout.h_lanes[row // rr]
    return layout.v_lanes[col // rr]


def shortest_directed_distance(
    layout: DeviceLayout, start: Coord, goal: Coord, directed: bool = True
) -> int:
    """Positions travelled on the shortest path; ``directed=False`` ignores lanes."""
    a, b = layout.idx(start), layout.idx(goal)
    d = layout.distance_field((b,), directed)[a]
    if d < 0:
        raise LayoutError(f"{goal} unreachable from {start}; layout is malformed")
    return d


def perimeter_cycle(layout: DeviceLayout) -> list[Coord]:
    """Follow lane priority around the outside from the top-left centre."""
    span = (layout.device_size - 1) * layout.resolution
    start = (0, 0)
    cycle = [start]
    cur = start
    while True:
        nxt = [
            layout.positions[b]
            for b in layout.succ[layout.index[cur]]
            if layout.is_lane(layout.positions[b])
            and (layout.positions[b][0] in (0, span) or layout.positions[b][1] in (0, span))
        ]
        if len(nxt) != 1:
            raise LayoutError(f"perimeter is not a simple cycle at {cur}")
        cur = nxt[0]
        if cur == start:
            return cycle
        cycle.append(cur)


def junction_home_positions(layout: DeviceLayout, centre: Coord) -> list[Coord]:
    """Lane positions owned by a junction, nearest to its centre first."""
    rr = layout.resolution
    reach = (rr - 1) // 2 if rr % 2 == 0 else rr // 2
    out: list[tuple[int, int, Coord]] = []
    for k, d in enumerate(DIRECTION_ORDER):
        dy, dx = d.delta
        for s in range(1, reach + 1):
            c = (centre[0] + s * dy, centre[1] + s * dx)
            if c in layout.index and layout.is_lane(c):
                out.append((s, k, c))
    # even R leaves the midpoint of each edge to the lower junction
    if rr % 2 == 0:
        for k, d in enumerate(DIRECTION_ORDER[:2]):
            dy, dx = d.delta
            c = (centre[0] + rr // 2 * dy, centre[1] + rr // 2 * dx)
            if c in layout.index and layout.is_lane(c):
                out.append((rr // 2, k, c))
    out.sort()
    return [c for _, _, c in out]


def initial_positions(layout: DeviceLayout, density: int) -> list[Coord]:
    """Spread ``density`` ions per junction around each centre.

    Ions are numbered junction by junction in row-major order.
    """
    if density < 1:
        raise LayoutError("density must be >= 1")
    out: list[Coord] = []
    m, rr = layout.device_size, layout.resolution
    for i in range(m):
        for j in range(m):
            homes = junction_home_positions(layout, (i * rr, j * rr))
            if len(homes) < density:
                raise LayoutError(
                    f"junction {(i, j)} has room for {len(homes)} ions, asked for {density}"
                )
            out.extend(homes[:density])
    return out


def reachable_from(layout: DeviceLayout, start: Coord) -> set[Coord]:
    """Plain directed BFS, independent of the memoised distance fields."""
    seen = {layout.idx(start)}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v in layout.succ[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return {layout.positions[k] for k in seen}


def iter_lane_positions(layout: DeviceLayout) -> Iterable[Coord]:
    return (c for c in layout.positions if layout.is_lane(c))
