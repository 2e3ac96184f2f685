"""Discrete-time routing engines on an X-junction device.

Two engines share one world state:

``lane``
    Lane-priority routing.  Every ion is evaluated once per time step in
    ascending id order and takes the first applicable action of:
    combine with its partner, a lane-ignoring hop between the two waiting
    slots of an interior junction, a lane-following move toward its target.
    Ions only enter a junction centre when they can leave it next step.
``swap``
    Shortest undirected paths; blocked ions exchange places with the blocker
    (a positional swap) at a time penalty.

The lower bound is computed per round from the undirected distance of the
furthest ion, i.e. shortest paths with free swaps.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .device import Coord, DeviceLayout, initial_positions
from .workload import DepthOneCircuit, assign_pairs, random_matching

ENGINES = ("lane_priority", "swap_based", "lower_bound")
PENALTY_MODES = ("global", "per_ion")

TraceFn = Callable[[dict], None]


def default_step_cap(layout: DeviceLayout) -> int:
    return 50 * layout.resolution * layout.device_size


@dataclass(slots=True)
class Ion:
    id: int
    position: int
    destination: tuple[int, ...] = ()
    paired_with: int | None = None
    is_combined: bool = False
    waiting_interior: bool = False
    junction_passes: int = 0
    swaps: int = 0
    zone: int | None = None
    field: list[int] | None = None
    interior: bool = False
    busy_until: int = -1
    moved_at: int = -1
    entered_from: int = -1
    before_combine: int = -1
    stuck: int = 0

    @property
    def has_destination(self) -> bool:
        return self.zone is not None


@dataclass
class RoutingRun:
    engine: str
    steps_raw: int
    resolution: int
    converged: bool
    round_count: int
    lower_bound_raw: int
    junction_passes: list[int] = field(default_factory=list)
    swaps: list[int] = field(default_factory=list)
    swap_events: int = 0
    zone_kinds: list[str] = field(default_factory=list)
    violations: int = 0
    penalty_raw: float = 0.0

    @property
    def time_raw(self) -> float:
        return self.steps_raw + self.penalty_raw

    @property
    def tau(self) -> float:
        return self.time_raw / self.resolution

    @property
    def lower_bound_tau(self) -> float:
        return self.lower_bound_raw / self.resolution

    @property
    def swaps_per_qubit(self) -> float:
        """Mean of the per-ion swap counters (each event counts for both ions)."""
        n = len(self.swaps)
        return sum(self.swaps) / n if n else 0.0


class World:
    """Mutable state of one routing run.  Not shared between workers."""

    def __init__(
        self,
        layout: DeviceLayout,
        circuit: DepthOneCircuit,
        positions: Sequence[Coord],
        engine: str = "lane_priority",
        swap_penalty: float = 0.5,
        trace: TraceFn | None = None,
        check: bool = False,
        penalty_mode: str = "global",
    ):
        if engine not in ("lane_priority", "swap_based"):
            raise ValueError(f"unknown engine {engine!r}")
        if penalty_mode not in PENALTY_MODES:
            raise ValueError(f"unknown penalty mode {penalty_mode!r}")
        if len(positions) != circuit.n:
            raise ValueError("need one starting position per qubit")
        self.layout = layout
        self.circuit = circuit
        self.engine = engine
        self.penalty_mode = penalty_mode
        self.swap_time = swap_penalty * layout.resolution
        # per-ion mode: steps both swapped ions sit out after the swap
        self.swap_cost = math.ceil(self.swap_time - 1e-9) if penalty_mode == "per_ion" else 0
        self.penalty_raw = 0.0
        self.swap_steps = 0
        self._swapped = False
        self.trace = trace
        self.check = check
        n_pos = layout.n_positions
        self.occ = [-1] * n_pos
        self.ions = [Ion(k, layout.idx(c)) for k, c in enumerate(positions)]
        for ion in self.ions:
            if self.occ[ion.position] != -1:
                raise ValueError(f"two ions start at {layout.positions[ion.position]}")
            self.occ[ion.position] = ion.id
        self.requests = [-10] * n_pos
        self.is_centre = [c in layout.junction_centres for c in layout.positions]
        self.step = 0
        self.swap_events = 0
        self.violations = 0
        self.active_zones: set[int] = set()
        self._arm_cells: dict[int, list[int]] = {}
        for p, z in layout.arm_of.items():
            self._arm_cells.setdefault(z, []).append(p)
        # arm cell -> neighbour one step nearer the centre
        self._inward: dict[int, int] = {}
        centre_field = {}
        for z, cells in self._arm_cells.items():
            c = layout.idx(layout.gate_zones[z].adjacent_junction)
            centre_field[z] = layout.distance_field((c,), directed=False)
        for p, z in layout.arm_of.items():
            f = centre_field[z]
            self._inward[p] = next(q for q in layout.neighbours[p] if f[q] == f[p] - 1)
        self._pending: list[int] = []
        self._interior_at = {
            layout.idx(z.adjacent_junction): z.id for z in layout.interior_zones
        }

    # -- round bookkeeping ---------------------------------------------
    def coords(self) -> list[Coord]:
        return [self.layout.positions[ion.position] for ion in self.ions]

    def begin_round(self, round_map: dict[int, int]) -> None:
        lay = self.layout
        directed = self.engine == "lane_priority"
        for ion in self.ions:
            ion.zone = None
            ion.field = None
            ion.destination = (ion.position,)
            ion.paired_with = None
            ion.is_combined = False
            ion.waiting_interior = False
            ion.interior = False
            ion.stuck = 0
        self.active_zones = set(round_map.values())
        self._pending = []
        for p, z in round_map.items():
            a, b = self.circuit.pairs[p]
            zone = lay.gate_zones[z]
            fld = lay.zone_field(z, directed=directed)
            for me, other in ((a, b), (b, a)):
                ion = self.ions[me]
                ion.zone = z
                ion.field = fld
                ion.destination = lay.zone_targets(z)
                ion.paired_with = other
                ion.interior = zone.kind == "interior"
            self._pending.append(p)

    def round_lower_bound(self) -> int:
        best = 0
        for ion in self.ions:
            if ion.zone is not None:
                d = self.layout.zone_field(ion.zone, directed=False)[ion.position]
                best = max(best, d)
        return best

    def round_done(self) -> bool:
        return all(self.ions[self.circuit.pairs[p][0]].is_combined for p in self._pending)

    def separate(self) -> None:
        """Split combined pairs after the gate.

        Each ion goes back where it combined from; if another ion has taken
        that spot since, it lands on the nearest free lane position instead.
        """
        for p in self._pending:
            for q in self.circuit.pairs[p]:
                ion = self.ions[q]
                if self.occ[ion.position] == q:
                    self.occ[ion.position] = -1
        for p in self._pending:
            for q in self.circuit.pairs[p]:
                ion = self.ions[q]
                ion.position = self._landing(ion.before_combine)
                ion.is_combined = False
                ion.entered_from = -1
                self.occ[ion.position] = ion.id

    def _landing(self, start: int) -> int:
        lay = self.layout
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            if self.occ[u] == -1 and (u == start or not (self.is_centre[u] or u in lay.arm_of)):
                return u
            for v in lay.neighbours[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        raise RuntimeError("device is full; nowhere to separate onto")

    # -- primitives ----------------------------------------------------
    def _emit(self, ion: Ion, action: str) -> None:
        if self.trace is not None:
            self.trace(
                {
                    "step": self.step,
                    "ion": ion.id,
                    "position": list(self.layout.positions[ion.position]),
                    "action": action,
                }
            )

    def _relocate(self, ion: Ion, q: int) -> None:
        p = ion.position
        if self.is_centre[p] and ion.entered_from != q:
            ion.junction_passes += 1
        if self.is_centre[q]:
            ion.entered_from = p
        ion.position = q
        ion.moved_at = self.step

    def _move(self, ion: Ion, q: int, action: str = "move") -> None:
        self.occ[ion.position] = -1
        self._relocate(ion, q)
        self.occ[q] = ion.id
        self._emit(ion, action)

    def _combine_exterior(self, ion: Ion, q: int) -> None:
        partner = self.ions[ion.paired_with]
        ion.before_combine = ion.position
        partner.before_combine = partner.position
        self.occ[ion.position] = -1
        self._relocate(ion, q)
        ion.is_combined = partner.is_combined = True
        self._emit(ion, "combine")

    def _centre_free(self, ion: Ion) -> bool:
        return self.occ[self._centre_of(ion)] == -1

    def _can_combine_interior(self, ion: Ion, partner: Ion) -> bool:
        """``ion`` sits in a waiting slot; is its partner close enough?

        The partner must be in the other slot or one step from this one, and
        both must be free to act this step.  The pair reaches the pocket
        through the junction centre, which therefore has to be empty or
        hold the partner.
        """
        if not self._partner_ready(ion, partner):
            return False
        return self.occ[self._centre_of(ion)] in (-1, partner.id)

    def _partner_ready(self, ion: Ion, partner: Ion) -> bool:
        if partner.is_combined or partner.moved_at == self.step or partner.busy_until >= self.step:
            return False
        q = partner.position
        return ion.field[q] == 0 or q in self.layout.neighbours[ion.position]

    def _centre_of(self, ion: Ion) -> int:
        return self.layout.idx(self.layout.gate_zones[ion.zone].adjacent_junction)

    def _combine_interior(self, ion: Ion, partner: Ion) -> None:
        pocket = self.layout.idx(self.layout.gate_zones[ion.zone].coordinate)
        for x in (ion, partner):
            x.before_combine = x.position
            self.occ[x.position] = -1
            # into the pocket by way of the centre crosses the junction
            x.junction_passes += 1
            x.position = pocket
            x.moved_at = self.step
            x.is_combined = True
            x.waiting_interior = False
        self.occ[pocket] = min(ion.id, partner.id)
        self._emit(ion, "combine")

    def _hop(self, ion: Ion, other: int) -> None:
        """Waiting-slot to waiting-slot through the centre, ignoring lanes."""
        self.occ[ion.position] = -1
        ion.position = other
        ion.moved_at = self.step
        ion.junction_passes += 1
        self.occ[other] = ion.id
        self._emit(ion, "hop")

    def _arm_blocked(self, ion: Ion, q: int) -> bool:
        z = self.layout.arm_of.get(q)
        if z is None or self.layout.arm_of.get(ion.position) == z:
            return False
        mates = (ion.id, ion.paired_with)
        return any(self.occ[c] not in (-1, *mates) for c in self._arm_cells[z])

    def _enterable(self, ion: Ion, q: int) -> bool:
        """True if ``ion`` may step onto free position ``q`` under lane rules."""
        if self._arm_blocked(ion, q):
            return False
        if not self.is_centre[q]:
            return True
        # never stall inside a junction centre
        f = ion.field
        succ = self.layout.succ[q]
        if f is None:
            return any(
                self.occ[r] == -1 and r not in self.layout.arm_of for r in succ
            )
        want = f[q] - 1
        for r in succ:
            if f[r] != want:
                continue
            o = self.occ[r]
            if o == -1 and not self._arm_blocked(ion, r):
                return True
            if o == ion.paired_with and want == 0 and not ion.interior:
                return True
        return False

    def _request(self, ion: Ion, q: int) -> None:
        """Ask whoever holds ``q`` to clear it.

        A free centre that ``ion`` may not enter is blocked by its exits, so
        the request passes through to them.
        """
        if self.occ[q] != -1 or not self.is_centre[q]:
            self.requests[q] = self.step
            return
        f = ion.field
        for r in self.layout.succ[q]:
            if r in self.layout.arm_of or self.occ[r] == -1:
                continue
            if f is None or f[r] == f[q] - 1:
                self.requests[r] = self.step

    # -- lane-priority engine ------------------------------------------
    def _lane_ion(self, ion: Ion) -> None:
        if ion.zone is None:
            self._lane_idle(ion)
            return
        f = ion.field
        p = ion.position
        d = f[p]
        partner = self.ions[ion.paired_with]
        if d == 0:
            if ion.interior:
                if self._can_combine_interior(ion, partner):
                    self._combine_interior(ion, partner)
                    return
                ion.waiting_interior = True
                if self.requests[p] >= self.step - 1:
                    other = next(s for s in ion.destination if s != p)
                    if self.occ[other] == -1 and self._centre_free(ion):
                        self._hop(ion, other)
                    elif self.occ[other] != ion.paired_with:
                        self.requests[other] = self.step
            return
        blocked = -1
        for q in self.layout.succ[p]:
            if f[q] != d - 1:
                continue
            o = self.occ[q]
            if o == -1:
                if self._enterable(ion, q):
                    self._move(ion, q)
                    return
            elif o == ion.paired_with and f[q] == 0 and not ion.interior:
                self._combine_exterior(ion, q)
                return
            if blocked < 0:
                blocked = q
        if blocked >= 0:
            self._request(ion, blocked)

    def _lane_idle(self, ion: Ion) -> None:
        p = ion.position
        z = self.layout.arm_of.get(p)
        if z is not None:
            if z in self.active_zones:
                q = self._inward[p]
                if self.occ[q] == -1 and self._enterable(ion, q):
                    self._move(ion, q, "evacuate")
                    ion.destination = (q,)
                else:
                    self._request(ion, q)
            return
        if not (self.is_centre[p] or self.requests[p] >= self.step - 1):
            return
        for q in self.layout.succ[p]:
            if q in self.layout.arm_of or self.occ[q] != -1:
                continue
            if self._enterable(ion, q):
                self._move(ion, q, "yield")
                ion.destination = (q,)
                return
        for q in self.layout.succ[p]:
            if q not in self.layout.arm_of:
                self._request(ion, q)
                return

    # -- swap-based engine ---------------------------------------------
    def _swap_ion(self, ion: Ion) -> None:
        if ion.busy_until >= self.step:
            return
        if ion.zone is None:
            self._swap_idle(ion)
            return
        f = ion.field
        p = ion.position
        d = f[p]
        partner = self.ions[ion.paired_with]
        if d == 0:
            if ion.interior:
                if self._can_combine_interior(ion, partner):
                    self._combine_interior(ion, partner)
                    return
                ion.waiting_interior = True
                centre = self._centre_of(ion)
                o = self.occ[centre]
                if o != -1 and self._partner_ready(ion, partner):
                    # clear a stationary ion out of the way into the pocket
                    other = self.ions[o]
                    if other.zone is None and self._swappable(ion, other, p, centre):
                        self._swap(ion, other)
            return
        if ion.interior and p == self._centre_of(ion) and not partner.is_combined:
            g = partner.field[partner.position]
            if g == 0 and self._can_combine_interior(partner, ion):
                self._combine_interior(ion, partner)
                return
            if g <= 1:
                return  # hold the centre until the partner steps into a slot
        cands = [q for q in self.layout.neighbours[p] if f[q] == d - 1]
        for q in cands:
            o = self.occ[q]
            if o == -1:
                self._move(ion, q)
                ion.stuck = 0
                return
            if o == ion.paired_with and f[q] == 0 and not ion.interior:
                self._combine_exterior(ion, q)
                return
        for q in cands:
            other = self.ions[self.occ[q]]
            if self._swappable(ion, other, p, q):
                self._swap(ion, other)
                ion.stuck = 0
                return
        ion.stuck += 1

    def _swap_idle(self, ion: Ion) -> None:
        """Idle ions stay put, except out of the centre of an active interior zone."""
        z = self._interior_at.get(ion.position)
        if z is None or z not in self.active_zones:
            return
        for q in self.layout.neighbours[ion.position]:
            if self.occ[q] == -1 and q not in self.layout.arm_of:
                self._move(ion, q, "evacuate")
                ion.destination = (q,)
                return

    def _swappable(self, ion: Ion, other: Ion, p: int, q: int) -> bool:
        if other.is_combined or other.busy_until >= self.step or other.moved_at == self.step:
            return False
        if other.id == ion.paired_with:
            return False
        if ion.stuck >= self.layout.resolution:
            return True
        g = other.field
        if g is None:
            return True  # idle ions are stationary
        if g[q] == 0:
            return True  # parked at its own target
        return g[p] < g[q]  # head-on: the swap helps both

    def _swap(self, a: Ion, b: Ion) -> None:
        pa, pb = a.position, b.position
        self._relocate(a, pb)
        self._relocate(b, pa)
        self.occ[pa], self.occ[pb] = b.id, a.id
        for x in (a, b):
            x.swaps += 1
            x.busy_until = self.step + self.swap_cost
            x.waiting_interior = False
        self.swap_events += 1
        self._swapped = True
        self._emit(a, "swap")
        self._emit(b, "swap")

    # -- stepping --------------------------------------------------------
    def advance(self) -> None:
        """One time step: evaluate every ion once in ascending id order."""
        self.step += 1
        self._swapped = False
        handler = self._lane_ion if self.engine == "lane_priority" else self._swap_ion
        for ion in self.ions:
            if ion.is_combined or ion.moved_at == self.step:
                continue
            handler(ion)
        if self._swapped:
            self.swap_steps += 1
            if self.penalty_mode == "global":
                # the whole device waits for the slowest operation of the step
                self.penalty_raw += self.swap_time
        if self.check:
            self._validate()

    def _validate(self) -> None:
        seen: dict[int, list[int]] = {}
        for ion in self.ions:
            seen.setdefault(ion.position, []).append(ion.id)
        for pos, ids in seen.items():
            if len(ids) == 1:
                continue
            a, b = ids[0], ids[1] if len(ids) == 2 else -1
            ok = (
                len(ids) == 2
                and self.ions[a].paired_with == b
                and self.ions[a].is_combined
                and self.ions[b].is_combined
            )
            if not ok:
                self.violations += 1
        # conservation: one occupancy entry per ion, one per combined pair
        combined = sum(ion.is_combined for ion in self.ions) // 2
        held = sum(o != -1 for o in self.occ)
        if held != len(self.ions) - combined:
            self.violations += 1
        for ion in self.ions:
            if self.occ[ion.position] not in (ion.id, ion.paired_with):
                self.violations += 1

    def run_round(self, cap: int) -> bool:
        start = self.step
        while not self.round_done():
            if self.step - start >= cap:
                return False
            self.advance()
        return True


def _run(
    engine: str,
    layout: DeviceLayout,
    circuit: DepthOneCircuit | None,
    density: int,
    seed: int | None,
    step_cap: int | None,
    positions: Sequence[Coord] | None,
    swap_penalty: float,
    trace: TraceFn | None,
    check: bool,
    penalty_mode: str = "global",
) -> RoutingRun:
    if positions is None:
        positions = initial_positions(layout, density)
    if circuit is None:
        circuit = random_matching(len(positions), seed)
    cap = default_step_cap(layout) if step_cap is None else step_cap
    if cap <= 0:
        raise ValueError("step_cap must be positive")
    world = World(layout, circuit, positions, engine, swap_penalty, trace, check, penalty_mode)
    pending = list(range(len(circuit.pairs)))
    lb_raw = 0
    rounds = 0
    converged = True
    kinds = ["none"] * circuit.n
    while pending:
        plan = assign_pairs(
            layout, circuit, world.coords(), pending, directed=engine == "lane_priority"
        )
        rnd = plan.rounds[0]
        world.begin_round(rnd)
        for p, z in rnd.items():
            for q in circuit.pairs[p]:
                kinds[q] = layout.gate_zones[z].kind
        lb_raw += world.round_lower_bound()
        rounds += 1
        if not world.run_round(cap - world.step):
            converged = False
            break
        done = set(rnd)
        pending = [p for p in pending if p not in done]
        if pending:
            world.separate()
    return RoutingRun(
        engine=engine,
        steps_raw=world.step,
        resolution=layout.resolution,
        converged=converged,
        round_count=rounds,
        lower_bound_raw=lb_raw,
        junction_passes=[ion.junction_passes for ion in world.ions],
        swaps=[ion.swaps for ion in world.ions],
        swap_events=world.swap_events,
        zone_kinds=kinds,
        violations=world.violations,
        penalty_raw=world.penalty_raw,
    )


def run_lane_priority(
    layout: DeviceLayout,
    circuit: DepthOneCircuit | None = None,
    density: int = 2,
    seed: int | None = None,
    step_cap: int | None = None,
    *,
    positions: Sequence[Coord] | None = None,
    trace: TraceFn | None = None,
    check: bool = False,
) -> RoutingRun:
    """Route one depth-1 circuit with lane-priority routing."""
    return _run("lane_priority", layout, circuit, density, seed, step_cap, positions, 0.0, trace, check)


def run_swap_based(
    layout: DeviceLayout,
    circuit: DepthOneCircuit | None = None,
    density: int = 2,
    seed: int | None = None,
    swap_penalty: float = 0.5,
    step_cap: int | None = None,
    *,
    positions: Sequence[Coord] | None = None,
    trace: TraceFn | None = None,
    check: bool = False,
    penalty_mode: str = "global",
) -> RoutingRun:
    """Route one depth-1 circuit along shortest paths, swapping to decongest.

    ``swap_penalty`` is in junction-to-junction units.  With
    ``penalty_mode="global"`` every time step containing a swap is
    lengthened by the penalty; ``"per_ion"`` instead parks the two swapped
    ions for the penalty while everyone else keeps moving.
    """
    if swap_penalty < 0:
        raise ValueError("swap penalty must be non-negative")
    return _run(
        "swap_based", layout, circuit, density, seed, step_cap, positions, swap_penalty, trace,
        check, penalty_mode,
    )


def lower_bound(
    layout: DeviceLayout,
    circuit: DepthOneCircuit,
    assignment=None,
    ion_positions: Sequence[Coord] | None = None,
) -> float:
    """Furthest ion's undirected distance to its zone, in junction units.

    Rounds after the first are costed from the same starting positions,
    so for multi-round plans this is a bound on each round's routing.
    """
    if ion_positions is None:
        ion_positions = initial_positions(layout, circuit.n // layout.device_size**2)
    if assignment is None:
        assignment = assign_pairs(layout, circuit, ion_positions)
    total = 0
    for rnd in assignment.rounds:
        best = 0
        for p, z in rnd.items():
            f = layout.zone_field(z, directed=False)
            for q in circuit.pairs[p]:
                best = max(best, f[layout.idx(ion_positions[q])])
        total += best
    return total / layout.resolution
