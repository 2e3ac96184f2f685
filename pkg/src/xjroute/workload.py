"""Random depth-1 circuits and greedy pair-to-gate-zone assignment."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import Coord, DeviceLayout


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class DepthOneCircuit:
    n: int
    pairs: tuple[tuple[int, int], ...]
    seed: int | None = None

    def __post_init__(self):
        seen = [q for p in self.pairs for q in p]
        if len(set(seen)) != len(seen) or any(not 0 <= q < self.n for q in seen):
            raise WorkloadError("pairs must be disjoint qubit ids in range")

    @property
    def is_perfect(self) -> bool:
        return 2 * len(self.pairs) == self.n

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "pairs": [list(p) for p in self.pairs], "seed": self.seed})

    @classmethod
    def from_json(cls, text: str) -> "DepthOneCircuit":
        d = json.loads(text)
        return cls(int(d["n"]), tuple((int(a), int(b)) for a, b in d["pairs"]), d.get("seed"))


def random_matching(n: int, seed: int | None = None) -> DepthOneCircuit:
    """Uniform random perfect matching on ``n`` qubits.

    A uniform permutation cut into consecutive pairs is uniform over
    matchings, since every matching is hit by the same number of
    permutations.
    """
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
        raise WorkloadError(f"qubit count must be a positive even integer, got {n!r}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(int(n))
    pairs = []
    for k in range(0, n, 2):
        a, b = int(perm[k]), int(perm[k + 1])
        pairs.append((min(a, b), max(a, b)))
    pairs.sort()
    return DepthOneCircuit(int(n), tuple(pairs), seed)


@dataclass
class Assignment:
    """Pair-to-zone mapping, one dict per shuttling round."""

    rounds: list[dict[int, int]]  # pair index -> zone id
    destinations: dict[int, tuple[Coord, ...]] = field(default_factory=dict)

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def zone_of(self, pair_index: int) -> int:
        for rnd in self.rounds:
            if pair_index in rnd:
                return rnd[pair_index]
        raise KeyError(pair_index)


def expected_rounds(n_pairs: int, n_zones: int) -> int:
    return math.ceil(n_pairs / n_zones) if n_pairs else 0


def assign_pairs(
    layout: DeviceLayout,
    circuit: DepthOneCircuit,
    ion_positions: Sequence[Coord],
    pair_indices: Sequence[int] | None = None,
    directed: bool = True,
) -> Assignment:
    """Greedy nearest-available-zone assignment in ascending pair order.

    Cost of a zone is the summed distance of both ions, lane-respecting
    unless ``directed`` is false.  When
    pairs outnumber zones the leftovers spill into later rounds; every round
    is costed from ``ion_positions``.
    """
    if len(ion_positions) != circuit.n:
        raise WorkloadError("need one position per qubit")
    todo = list(range(len(circuit.pairs))) if pair_indices is None else sorted(pair_indices)
    zones = layout.gate_zones
    fields = [layout.zone_field(z.id, directed=directed) for z in zones]
    pos_idx = [layout.idx(c) for c in ion_positions]

    rounds: list[dict[int, int]] = []
    destinations: dict[int, tuple[Coord, ...]] = {}
    while todo:
        free = [True] * len(zones)
        rnd: dict[int, int] = {}
        rest = []
        for p in todo:
            a, b = circuit.pairs[p]
            best, best_cost = -1, None
            for z in range(len(zones)):
                if not free[z]:
                    continue
                f = fields[z]
                cost = f[pos_idx[a]] + f[pos_idx[b]]
                if best_cost is None or cost < best_cost:
                    best, best_cost = z, cost
            if best < 0:
                rest.append(p)
                continue
            free[best] = False
            rnd[p] = best
            destinations[a] = destinations[b] = zones[best].targets
        rounds.append(rnd)
        todo = rest
    paired = {q for p in circuit.pairs for q in p}
    for q in range(circuit.n):
        if q not in paired:
            destinations[q] = (tuple(ion_positions[q]),)
    return Assignment(rounds, destinations)
