"""Command-line entry point: ``xjroute simulate | qv | decompose``.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 a run did not
converge and ``--strict`` was given.  Outputs without an explicit ``--out``
go to ``$XJROUTE_OUT_DIR`` (default: the working directory).  Every output
file starts with the resolved configuration so the run can be repeated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import decomp, errormodel, stats
from .device import build_layout
from .routing import run_lane_priority, run_swap_based
from .workload import random_matching

log = logging.getLogger("xjroute")

ENGINE_ALIASES = {
    "lane": "lane_priority",
    "lane_priority": "lane_priority",
    "swap": "swap_based",
    "swap_based": "swap_based",
    "lower-bound": "lower_bound",
    "lower_bound": "lower_bound",
}
OUT_ENV = "XJROUTE_OUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_STRICT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_m_range(text: str) -> list[int]:
    """``"2..12"`` (inclusive) or a comma list ``"3,5,7"``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad M range {text!r}; use LO..HI or a,b,c") from None


def _out_path(arg: str | None, default_name: str) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUT_ENV, ".")) / default_name


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _header(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True) + "\n"


@dataclass
class RunConfig:
    command: str
    options: dict

    def echo(self) -> dict:
        return {"command": self.command, **self.options}


# -- simulate ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    ms = args.m_range if args.m_range else [args.m]
    if not ms or any(m is None or m < 2 for m in ms):
        raise UsageError("give --m or --m-range with sizes >= 2")
    engines = [ENGINE_ALIASES[e] for e in (args.engine or ["lane"])]
    penalties = args.swap_penalty or [0.5]
    cfg = RunConfig(
        "simulate",
        {
            "m": ms, "r": args.r, "density": args.density, "engines": engines,
            "swap_penalty": penalties, "penalty_mode": args.penalty_mode,
            "iters": args.iters, "seed": args.seed, "step_cap": args.step_cap,
        },
    )
    results = []
    for engine in engines:
        for pen in penalties if engine == "swap_based" else [0.0]:
            for m in ms:
                params = stats.EnsembleParams(
                    m, engine, args.density, pen, args.r, args.penalty_mode,
                    step_cap=args.step_cap,
                )
                res = stats.run_ensemble(params, args.iters, args.seed, args.jobs)
                log.info(
                    "M=%d %s penalty=%s tau=%.3f +- %.3f failures=%d",
                    m, engine, pen, res.mean_tau, res.std_tau, res.failures,
                )
                results.append(res)
    out = _out_path(args.out, f"simulate.{args.format}")
    if args.format == "json":
        payload = {
            "config": cfg.echo(),
            "rows": [r.csv_row() for r in results],
            "histograms": [r.histogram_json() for r in results],
        }
        _write(out, json.dumps(payload, indent=1))
    else:
        buf = io.StringIO()
        stats.write_csv(results, buf)
        _write(out, _header(cfg.echo()) + buf.getvalue())
    if args.hist:
        payload = {"config": cfg.echo(), "histograms": [r.histogram_json() for r in results]}
        Path(args.hist).write_text(json.dumps(payload, indent=1))
    if args.trace:
        _write_trace(args, ms[0], engines[0], penalties[0], cfg)
    print(out)
    failures = sum(r.failures for r in results)
    if failures:
        log.warning("%d run(s) hit the step cap", failures)
        if args.strict:
            return EXIT_STRICT
    return EXIT_OK


def _write_trace(args, m: int, engine: str, penalty: float, cfg: RunConfig) -> None:
    """Per-step ion moves of the first iteration, one JSON object per line."""
    layout = build_layout(m, args.r)
    circuit = random_matching(args.density * m * m, args.seed)
    with open(args.trace, "w") as fh:
        fh.write(json.dumps({"config": cfg.echo(), "circuit": json.loads(circuit.to_json())}) + "\n")

        def emit(event: dict) -> None:
            fh.write(json.dumps(event) + "\n")

        if engine == "swap_based":
            run_swap_based(
                layout, circuit, args.density, swap_penalty=penalty, trace=emit,
                penalty_mode=args.penalty_mode,
            )
        else:
            run_lane_priority(layout, circuit, args.density, trace=emit)


# -- qv ---------------------------------------------------------------------


class _Row:
    def __init__(self, n, mean_tau, mean_passes):
        self.n, self.mean_tau, self.mean_junction_passes = n, mean_tau, mean_passes


def _read_ensemble_csv(path: str) -> list[_Row]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = [
        _Row(int(r["N"]), float(r["mean_tau"]), float(r["mean_passes"]))
        for r in csv.DictReader(lines)
        if r["engine"] == "lane_priority"
    ]
    if len(rows) < 2:
        raise UsageError(f"{path}: need lane-priority rows at two or more sizes")
    return rows


PARAM_FLAGS = ("t_shuttle", "coherence_c", "x_loss", "t_combine", "t_separate")


def _error_params(args) -> errormodel.ErrorModelParams:
    """JSON file first, then any explicit flags on top."""
    try:
        params = (
            errormodel.ErrorModelParams.from_json(args.params)
            if args.params
            else errormodel.ErrorModelParams()
        )
        overrides = {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None}
        return replace(params, **overrides)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad error-model parameters: {exc}") from None


def cmd_qv(args) -> int:
    params = _error_params(args)
    if not (0 < args.eps_min <= args.eps_max <= 1):
        raise UsageError("need 0 < --eps-min <= --eps-max <= 1")
    eps = np.geomspace(args.eps_max, args.eps_min, args.points) if args.points > 1 else [args.eps_max]
    archs = args.arch or list(errormodel.ARCHITECTURES)
    ns = range(2, args.n_max + 1, 2)
    rows = errormodel.sweep([float(e) for e in eps], params, archs, self_consistent=not args.plain, n_range=ns)
    if args.empirical:
        model = errormodel.trapped_ion_empirical(_read_ensemble_csv(args.empirical))
        for e in eps:
            res = errormodel.qv_native(params.with_gate_error(float(e)), model, ns, self_consistent=not args.plain)
            rows.append(
                {
                    "epsilon_gate": float(e), "inv_epsilon": 1 / float(e),
                    "architecture": "trapped_ion_empirical", "sqrt_qv": res.sqrt_qv,
                    "argmax_N": res.n, "depth": res.depth,
                }
            )
    cfg = RunConfig(
        "qv",
        {
            "params": params.to_dict(), "eps_min": args.eps_min, "eps_max": args.eps_max,
            "points": args.points, "architectures": archs, "n_max": args.n_max,
            "self_consistent": not args.plain, "empirical": args.empirical,
        },
    )
    out = _out_path(args.out, f"qv.{args.format}")
    if args.format == "json":
        _write(out, json.dumps({"config": cfg.echo(), "rows": rows}, indent=1))
    else:
        buf = io.StringIO()
        errormodel.write_sweep_csv(rows, buf)
        _write(out, _header(cfg.echo()) + buf.getvalue())
    print(out)
    return EXIT_OK


# -- decompose ----------------------------------------------------------------


def _load_unitary(args) -> tuple[np.ndarray, str]:
    if args.random is not None:
        from scipy.stats import unitary_group

        return unitary_group.rvs(4, random_state=args.random), f"haar:{args.random}"
    source = args.unitary
    if source is None:
        raise UsageError("give a preset, a JSON matrix, a file, or --random SEED")
    path = Path(source)
    text = path.read_text() if path.is_file() else source
    if text.lstrip().startswith("["):
        return decomp.unitary_from_json(text), "json"
    return decomp.preset(text), text


def cmd_decompose(args) -> int:
    try:
        u, label = _load_unitary(args)
    except (decomp.DecompositionError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if not decomp.is_unitary(u):
        resid = float(np.linalg.norm(u @ u.conj().T - np.eye(4), 2))
        print(f"input is not unitary: |U U^dag - I| = {resid:.3e}", file=sys.stderr)
        return EXIT_RUNTIME
    circ = decomp.decompose_su4(u)
    resid = decomp.phase_aligned_distance(u, decomp.evaluate_circuit(circ))
    payload = {
        "config": {"command": "decompose", "input": label},
        "ms_count": circ.ms_count,
        "single_qubit_count": circ.single_qubit_count,
        "residual": resid,
        **json.loads(circ.to_json()),
    }
    text = json.dumps(payload, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    print(circ.describe(), file=sys.stderr)
    print(f"residual {resid:.3e}", file=sys.stderr)
    return EXIT_OK if resid < args.tol else EXIT_RUNTIME


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p = _Parser(prog="xjroute", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="routing ensembles -> CSV")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--m", type=int, help="device size M (M x M junctions)")
    g.add_argument("--m-range", type=parse_m_range, help="sizes, e.g. 2..12 or 3,5,7")
    s.add_argument("--r", type=int, default=7, help="positions between junction centres")
    s.add_argument("--density", type=int, default=2, help="ions per junction")
    s.add_argument("--engine", action="append", choices=sorted(ENGINE_ALIASES), help="repeatable")
    s.add_argument("--swap-penalty", type=float, action="append", help="junction units; repeatable")
    s.add_argument("--penalty-mode", choices=("global", "per_ion"), default="global")
    s.add_argument("--iters", type=int, default=300)
    s.add_argument("--seed", type=int, default=0, help="iteration i uses seed+i")
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.add_argument("--out", help="output path")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--hist", help="also write pass histograms as JSON here")
    s.add_argument("--trace", help="write a JSON-lines trace of the first iteration here")
    s.add_argument("--step-cap", type=int, help="raw steps per run (default 50 R M)")
    s.add_argument("--strict", action="store_true", help="exit 3 if any run fails to converge")
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("qv", parents=[common], help="native quantum volume sweep -> CSV")
    q.add_argument("--params", help="JSON file with error-model parameters")
    q.add_argument("--eps-min", type=float, default=1e-4)
    q.add_argument("--eps-max", type=float, default=1e-2)
    q.add_argument("--points", type=int, default=41)
    q.add_argument("--arch", action="append", choices=errormodel.ARCHITECTURES, help="repeatable")
    q.add_argument("--n-max", type=int, default=2048)
    q.add_argument("--empirical", help="simulate CSV to use as the trapped-ion cost model too")
    q.add_argument("--plain", action="store_true", help="plain max over N, not the even-N rule")
    for k in PARAM_FLAGS:
        q.add_argument("--" + k.replace("_", "-"), dest=k, type=float, help="seconds" if k.startswith(("t_", "coh")) else "per pass")
    q.add_argument("--out", help="output path")
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.set_defaults(func=cmd_qv)

    d = sub.add_parser("decompose", parents=[common], help="two-qubit unitary -> Rx/Ry/MS circuit")
    d.add_argument("unitary", nargs="?", help=f"preset {decomp.PRESETS}, JSON matrix, or file")
    d.add_argument("--random", type=int, metavar="SEED", help="Haar-random input instead")
    d.add_argument("--tol", type=float, default=1e-9)
    d.add_argument("--out", help="JSON path (default stdout)")
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    if getattr(args, "iters", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("xjroute: error: --iters and --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"xjroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"xjroute: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
