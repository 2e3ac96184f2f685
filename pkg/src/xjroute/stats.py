"""Monte-Carlo ensembles over random depth-1 circuits and the fits on top.

Iteration ``i`` of an ensemble routes the circuit drawn with seed
``base_seed + i``, so any single ensemble point can be regenerated.
Iterations are grouped into fixed-size chunks whose partial summaries are
merged pairwise in chunk order; the result is bit-identical whatever the
number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .device import build_layout
from .routing import ENGINES, lower_bound, run_lane_priority, run_swap_based
from .workload import random_matching

CHUNK = 25
CSV_COLUMNS = (
    "M", "N", "density", "engine", "swap_penalty", "iters",
    "mean_tau", "std_tau", "mean_passes", "std_passes", "mean_swaps", "failures",
)


@dataclass
class RunningStats:
    """Welford accumulator; ``merge`` uses the parallel update of Chan et al."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    def extend(self, xs: Iterable[float]) -> "RunningStats":
        for x in xs:
            self.push(float(x))
        return self

    def merge(self, other: "RunningStats") -> "RunningStats":
        if other.n == 0:
            return RunningStats(self.n, self.mean, self.m2)
        if self.n == 0:
            return RunningStats(other.n, other.mean, other.m2)
        n = self.n + other.n
        d = other.mean - self.mean
        mean = self.mean + d * other.n / n
        m2 = self.m2 + other.m2 + d * d * self.n * other.n / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(max(self.variance, 0.0))


def merge_all(parts: Sequence):
    """Pairwise (tree) merge, which keeps rounding error logarithmic."""
    parts = list(parts)
    if not parts:
        return RunningStats()
    while len(parts) > 1:
        nxt = [parts[k].merge(parts[k + 1]) for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass(frozen=True)
class EnsembleParams:
    m: int
    engine: str = "lane_priority"
    density: int = 2
    swap_penalty: float = 0.5
    resolution: int = 7
    penalty_mode: str = "global"
    check: bool = False  # validate occupancy every step (slower)
    step_cap: int | None = None  # None: routing.default_step_cap

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; pick from {ENGINES}")
        if self.step_cap is not None and self.step_cap < 1:
            raise ValueError("step_cap must be positive")

    @property
    def n(self) -> int:
        return self.density * self.m * self.m


@dataclass
class _Partial:
    tau: RunningStats = field(default_factory=RunningStats)
    passes: RunningStats = field(default_factory=RunningStats)
    swaps: RunningStats = field(default_factory=RunningStats)
    lower: RunningStats = field(default_factory=RunningStats)
    hist: dict[str, Counter] = field(
        default_factory=lambda: {"interior": Counter(), "exterior": Counter(), "none": Counter()}
    )
    taus: list[float] = field(default_factory=list)
    failures: int = 0
    violations: int = 0
    below_bound: int = 0
    rounds: Counter = field(default_factory=Counter)

    def merge(self, other: "_Partial") -> "_Partial":
        return _Partial(
            self.tau.merge(other.tau),
            self.passes.merge(other.passes),
            self.swaps.merge(other.swaps),
            self.lower.merge(other.lower),
            {k: self.hist[k] + other.hist[k] for k in self.hist},
            self.taus + other.taus,
            self.failures + other.failures,
            self.violations + other.violations,
            self.below_bound + other.below_bound,
            self.rounds + other.rounds,
        )


@dataclass
class EnsembleResult:
    params: EnsembleParams
    iterations: int
    base_seed: int
    mean_tau: float
    std_tau: float
    mean_junction_passes: float
    std_junction_passes: float
    mean_swaps_per_qubit: float
    std_swaps_per_qubit: float
    mean_lower_bound: float
    pass_histogram: dict[str, dict[int, int]]
    taus: list[float]
    failures: int = 0
    violations: int = 0
    below_bound: int = 0
    round_counts: dict[int, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def max_passes(self) -> int:
        seen = [k for h in self.pass_histogram.values() for k, v in h.items() if v]
        return max(seen, default=0)

    def pass_tail(self, threshold: int) -> float:
        """Fraction of ion observations with at least ``threshold`` passes."""
        total = hi = 0
        for h in self.pass_histogram.values():
            for k, v in h.items():
                total += v
                if k >= threshold:
                    hi += v
        return hi / total if total else 0.0

    def csv_row(self) -> dict:
        p = self.params
        return {
            "M": p.m, "N": p.n, "density": p.density, "engine": p.engine,
            "swap_penalty": p.swap_penalty, "iters": self.iterations,
            "mean_tau": self.mean_tau, "std_tau": self.std_tau,
            "mean_passes": self.mean_junction_passes, "std_passes": self.std_junction_passes,
            "mean_swaps": self.mean_swaps_per_qubit, "failures": self.failures,
        }

    def histogram_json(self) -> dict:
        return {
            "M": self.params.m,
            "N": self.n,
            "engine": self.params.engine,
            "iters": self.iterations,
            "passes": {
                kind: {str(k): v for k, v in sorted(h.items())}
                for kind, h in self.pass_histogram.items()
                if kind != "none"
            },
        }


def _run_chunk(args: tuple[EnsembleParams, int, int]) -> _Partial:
    params, first_seed, count = args
    layout = build_layout(params.m, params.resolution)
    part = _Partial()
    for seed in range(first_seed, first_seed + count):
        circuit = random_matching(params.n, seed)
        if params.engine == "lower_bound":
            t = lower_bound(layout, circuit)
            part.tau.push(t)
            part.lower.push(t)
            part.taus.append(t)
            continue
        if params.engine == "lane_priority":
            run = run_lane_priority(
                layout, circuit, params.density, step_cap=params.step_cap, check=params.check
            )
        else:
            run = run_swap_based(
                layout, circuit, params.density, swap_penalty=params.swap_penalty,
                step_cap=params.step_cap, penalty_mode=params.penalty_mode, check=params.check,
            )
        part.rounds[run.round_count] += 1
        part.violations += run.violations
        if not run.converged:
            part.failures += 1
            continue
        part.tau.push(run.tau)
        part.taus.append(run.tau)
        part.lower.push(run.lower_bound_tau)
        part.swaps.push(run.swaps_per_qubit)
        if run.tau < run.lower_bound_tau - 1e-12:
            part.below_bound += 1
        for count_, kind in zip(run.junction_passes, run.zone_kinds):
            part.passes.push(count_)
            part.hist[kind][count_] += 1
    return part


def run_ensemble(
    params: EnsembleParams, iterations: int = 300, base_seed: int = 0, jobs: int = 1
) -> EnsembleResult:
    """Route ``iterations`` random circuits at one parameter point."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    chunks = [
        (params, base_seed + s, min(CHUNK, iterations - s)) for s in range(0, iterations, CHUNK)
    ]
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    tot = merge_all(parts)
    hist = {k: dict(sorted(v.items())) for k, v in tot.hist.items() if v or k != "none"}
    return EnsembleResult(
        params=params,
        iterations=iterations,
        base_seed=base_seed,
        mean_tau=tot.tau.mean,
        std_tau=tot.tau.std,
        mean_junction_passes=tot.passes.mean,
        std_junction_passes=tot.passes.std,
        mean_swaps_per_qubit=tot.swaps.mean,
        std_swaps_per_qubit=tot.swaps.std,
        mean_lower_bound=tot.lower.mean,
        pass_histogram=hist,
        taus=tot.taus,
        failures=tot.failures,
        violations=tot.violations,
        below_bound=tot.below_bound,
        round_counts=dict(sorted((k, v) for k, v in tot.rounds.items() if v)),
    )


def sweep(
    ms: Iterable[int], engine: str = "lane_priority", iterations: int = 300, base_seed: int = 0,
    jobs: int = 1, **kw,
) -> list[EnsembleResult]:
    return [
        run_ensemble(EnsembleParams(m, engine, **kw), iterations, base_seed, jobs) for m in ms
    ]


# -- fits ---------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    """``y = slope * x + intercept`` with OLS standard errors."""

    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    x_label: str = "x"

    def __call__(self, x):
        return self.slope * np.asarray(x) + self.intercept


def fit_linear(points: Sequence[tuple[float, float]], x_label: str = "x") -> FitResult:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("need at least 3 (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ValueError("all x values are equal; slope is undefined")
    res = sps.linregress(x, y)
    # an exact line gives nan-free but possibly tiny negative-rounded errors
    se_a = float(res.stderr) if np.isfinite(res.stderr) else 0.0
    se_b = float(res.intercept_stderr) if np.isfinite(res.intercept_stderr) else 0.0
    return FitResult(float(res.slope), float(res.intercept), abs(se_a), abs(se_b), x_label)


def fit_tau(results: Sequence[EnsembleResult], x: str = "M") -> FitResult:
    return fit_linear([(_x(r, x), r.mean_tau) for r in results], x)


def fit_pass_counts(results: Sequence[EnsembleResult]) -> FitResult:
    return fit_linear([(math.sqrt(r.n), r.mean_junction_passes) for r in results], "sqrtN")


def fit_swap_counts(results: Sequence[EnsembleResult]) -> FitResult:
    return fit_linear([(math.sqrt(r.n), r.mean_swaps_per_qubit) for r in results], "sqrtN")


def _x(r: EnsembleResult, x: str) -> float:
    if x == "M":
        return float(r.params.m)
    if x == "sqrtN":
        return math.sqrt(r.n)
    raise ValueError(f"unknown abscissa {x!r}")


def odd_even_check(results: Sequence[EnsembleResult], odd_ms: Sequence[int] = (3, 5, 7)) -> dict:
    """Does each odd size sit above the midpoint of its even neighbours?"""
    by_m = {r.params.m: r.mean_tau for r in results}
    out = {}
    for m in odd_ms:
        if not {m - 1, m, m + 1} <= by_m.keys():
            raise ValueError(f"need sizes {m - 1}, {m}, {m + 1} for the check at {m}")
        out[m] = by_m[m] > 0.5 * (by_m[m - 1] + by_m[m + 1])
    return out


# -- output ---------------------------------------------------------------


def write_csv(results: Sequence[EnsembleResult], path_or_file) -> None:
    """Write one row per ensemble to a path or an open text stream."""
    if hasattr(path_or_file, "write"):
        w = csv.DictWriter(path_or_file, fieldnames=CSV_COLUMNS)
        w.writeheader()
        w.writerows(r.csv_row() for r in results)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(results, fh)


def write_histograms(results: Sequence[EnsembleResult], path) -> None:
    with open(path, "w") as fh:
        json.dump([r.histogram_json() for r in results], fh, indent=1)


def params_dict(params: EnsembleParams) -> dict:
    return asdict(params)
