"""Effective error per depth-1 layer, achievable depth and native quantum volume.

For the shuttling device one depth-1 layer costs a gate error, decoherence
over the time spent routing plus one combine and one separate, and a loss
probability per junction crossing::

    eps_eff = eps_gate + (1 - exp(-t / c)) + X_count * x_loss
    t = tau(N) * t_shuttle + t_combine + t_separate

A square-grid superconducting device pays for connectivity in extra layers of
native two-qubit gates instead, so its per-layer error is scaled by the depth
overhead ``max(1, 2.77 sqrt(N) - 4.53)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class ErrorModelParams:
    epsilon_gate: float = 1e-3
    t_shuttle: float = 114e-6  # s per junction-to-junction shuttle
    coherence_c: float = 2.13  # s
    x_loss: float = 1e-5  # per junction pass
    t_combine: float = 80e-6
    t_separate: float = 80e-6

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v < 0:
                raise ValueError(f"{f.name} must be a finite non-negative number, got {v!r}")
        if self.epsilon_gate > 1 or self.x_loss > 1:
            raise ValueError("epsilon_gate and x_loss are probabilities")
        if self.coherence_c == 0:
            raise ValueError("coherence_c must be positive")

    @classmethod
    def from_json(cls, path) -> "ErrorModelParams":
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown parameter(s) {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_gate_error(self, eps: float) -> "ErrorModelParams":
        return replace(self, epsilon_gate=eps)


# -- connectivity cost models ---------------------------------------------


@dataclass(frozen=True)
class ConnectivityCostModel:
    """Per-layer connectivity cost as a function of qubit number.

    ``tau`` and ``x_count`` are shuttle time (junction units) and junction
    passes per ion; ``overhead`` is the native-layer multiplier of a
    swap-network device.  ``support`` bounds the N where the model is valid.
    """

    variant: str
    tau: Callable[[float], float] | None = None
    x_count: Callable[[float], float] | None = None
    overhead: Callable[[float], float] | None = None
    support: tuple[float, float] = (2, math.inf)

    def check(self, n: float) -> None:
        lo, hi = self.support
        if not lo <= n <= hi:
            raise ValueError(f"N={n} outside the {self.variant} model support [{lo}, {hi}]")


def all_to_all() -> ConnectivityCostModel:
    return ConnectivityCostModel("all_to_all")


def trapped_ion_analytic(
    tau_slope: float = 1.3, tau_icpt: float = 2.0, x_slope: float = 0.4, x_icpt: float = 2.0
) -> ConnectivityCostModel:
    return ConnectivityCostModel(
        "trapped_ion_analytic",
        tau=lambda n: tau_slope * math.sqrt(n) + tau_icpt,
        x_count=lambda n: x_slope * math.sqrt(n) + x_icpt,
    )


def trapped_ion_empirical(results: Sequence) -> ConnectivityCostModel:
    """Interpolate measured ensembles (``stats.EnsembleResult``) in sqrt(N)."""
    pts = sorted((r.n, r.mean_tau, r.mean_junction_passes) for r in results)
    if len(pts) < 2:
        raise ValueError("need ensembles at two or more sizes")
    ns, taus, passes = (np.array(c, dtype=float) for c in zip(*pts))
    xs = np.sqrt(ns)
    return ConnectivityCostModel(
        "trapped_ion_empirical",
        tau=lambda n: float(np.interp(math.sqrt(n), xs, taus)),
        x_count=lambda n: float(np.interp(math.sqrt(n), xs, passes)),
        support=(float(ns[0]), float(ns[-1])),
    )


def superconducting_grid(slope: float = 2.77, icpt: float = -4.53) -> ConnectivityCostModel:
    return ConnectivityCostModel(
        "superconducting_grid", overhead=lambda n: max(1.0, slope * math.sqrt(n) + icpt)
    )


COST_MODELS = {
    "all_to_all": all_to_all,
    "trapped_ion": trapped_ion_analytic,
    "superconducting": superconducting_grid,
}


# -- error terms ----------------------------------------------------------


def epsilon_deco(t: float, c: float) -> float:
    if c <= 0:
        raise ValueError("coherence time must be positive")
    if t < 0:
        raise ValueError("time must be non-negative")
    return -math.expm1(-t / c)


def connectivity_time(params: ErrorModelParams, n: float, model: ConnectivityCostModel) -> float:
    """Seconds per depth-1 layer spent on routing, combining and separating."""
    return model.tau(n) * params.t_shuttle + params.t_combine + params.t_separate


def epsilon_eff_trapped_ion(
    params: ErrorModelParams, n: float, model: ConnectivityCostModel | None = None
) -> float:
    model = trapped_ion_analytic() if model is None else model
    model.check(n)
    t = connectivity_time(params, n, model)
    return params.epsilon_gate + epsilon_deco(t, params.coherence_c) + model.x_count(n) * params.x_loss


def epsilon_eff_superconducting(epsilon_gate: float, n: float, model=None) -> float:
    if n < 2:
        raise ValueError("need at least two qubits")
    model = superconducting_grid() if model is None else model
    return epsilon_gate * model.overhead(n)


def epsilon_eff(params: ErrorModelParams, n: float, model: ConnectivityCostModel) -> float:
    if model.variant == "all_to_all":
        return params.epsilon_gate
    if model.variant == "superconducting_grid":
        return epsilon_eff_superconducting(params.epsilon_gate, n, model)
    return epsilon_eff_trapped_ion(params, n, model)


def achievable_depth(n: float, eps: float) -> float:
    """Layers before one error is expected; ``inf`` for an error-free device."""
    if n <= 0:
        raise ValueError("qubit number must be positive")
    if eps < 0:
        raise ValueError("error rate must be non-negative")
    return math.inf if eps == 0 else 1.0 / (n * eps)


# -- quantum volume ----------------------------------------------------------


@dataclass(frozen=True)
class QVResult:
    sqrt_qv: float
    n: int
    depth: float

    @property
    def qv(self) -> float:
        return self.sqrt_qv**2


def default_n_range() -> range:
    return range(2, 2049, 2)


def qv_native(
    params: ErrorModelParams,
    model: ConnectivityCostModel,
    n_range: Iterable[int] | None = None,
    self_consistent: bool = False,
) -> QVResult:
    """Max over N of min(N, D(N)); the QV itself is the square.

    Ties in the maximum go to the smallest N, so the answer does not depend
    on the enumeration order.  With ``self_consistent`` only self-consistent sizes
    count: a depth-limited N must equal the square root of QV rounded up to
    an even integer.
    """
    ns = sorted(set(int(n) for n in (default_n_range() if n_range is None else n_range)))
    if not ns:
        raise ValueError("empty N range")
    lo, hi = model.support
    ns = [n for n in ns if lo <= n <= hi]
    if not ns:
        raise ValueError(f"no N in range inside model support {model.support}")
    best = None
    for n in ns:
        d = achievable_depth(n, epsilon_eff(params, n, model))
        if self_consistent and d < n and even_ceil(d) != n:
            continue
        v = min(n, d)
        if best is None or v > best.sqrt_qv:
            best = QVResult(v, n, d)
    if best is None:
        raise ValueError("no self-consistent qubit number in range")
    return best


def even_ceil(x: float) -> int:
    k = math.ceil(x)
    return k + (k % 2)


ARCHITECTURES = ("all_to_all", "trapped_ion", "trapped_ion_10c", "superconducting")


def architecture(name: str, params: ErrorModelParams) -> tuple[ErrorModelParams, ConnectivityCostModel]:
    """Named architecture curves; ``trapped_ion_10c`` has 10x coherence."""
    if name == "trapped_ion_10c":
        return replace(params, coherence_c=params.coherence_c * 10), trapped_ion_analytic()
    if name not in COST_MODELS:
        raise ValueError(f"unknown architecture {name!r}; pick from {ARCHITECTURES}")
    return params, COST_MODELS[name]()


def sweep(
    epsilons: Sequence[float],
    params: ErrorModelParams | None = None,
    archs: Sequence[str] = ARCHITECTURES,
    self_consistent: bool = True,
    n_range: Iterable[int] | None = None,
) -> list[dict]:
    params = ErrorModelParams() if params is None else params
    ns = list(default_n_range() if n_range is None else n_range)
    rows = []
    for eps in epsilons:
        for name in archs:
            p, model = architecture(name, params.with_gate_error(eps))
            res = qv_native(p, model, ns, self_consistent=self_consistent)
            rows.append(
                {
                    "epsilon_gate": eps,
                    "inv_epsilon": 1.0 / eps if eps else math.inf,
                    "architecture": name,
                    "sqrt_qv": res.sqrt_qv,
                    "argmax_N": res.n,
                    "depth": res.depth,
                }
            )
    return rows


SWEEP_COLUMNS = ("epsilon_gate", "inv_epsilon", "architecture", "sqrt_qv", "argmax_N", "depth")


def write_sweep_csv(rows: Sequence[dict], path_or_file) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.DictWriter(path_or_file, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        w.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_sweep_csv(rows, fh)
