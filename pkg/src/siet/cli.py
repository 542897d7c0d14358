"""Command line: ``siet run <spec>`` and ``siet verify <spec>``.

Exit codes: 0 success, 1 solver non-convergence or failed probe,
2 infeasible constraints (wins over 1), 4 invalid spec.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._ascent import DEFAULT_CONFIG
from .gaussian import gaussian_capacity_energy
from .multicast import InfeasibleConstraintError, solve, upper_bound_min_individual
from .oracle import GridSpec, concavity_probe, domain_convexity_probe, grid_capacity_energy, product_capacity_n2
from .segmentation import optimize_capacity, optimize_loss, scan
from .specfile import ProblemSpec, SpecError, load_spec, spec_hash

EXIT_OK, EXIT_NONCONVERGED, EXIT_INFEASIBLE, EXIT_BADSPEC = 0, 1, 2, 4
OUT_ENV = "SIET_OUT"
DEFAULT_OUT = "siet-out"

log = logging.getLogger("siet")

__all__ = ["fmt", "emit_plot_data", "run_task", "main"]


def fmt(x) -> str:
    """12 significant digits, '.' decimal point, no negative zero."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _receivers(idx) -> str:
    return ";".join(str(i + 1) for i in idx)


def emit_plot_data(curve) -> str:
    """Columns ``B, C, I_1..I_L`` for a list of multicast solutions on a common-B sweep."""
    if not curve:
        raise ValueError("empty curve")
    L = len(curve[0].per_channel_mi)
    header = ["B", "C"] + [f"I_{i + 1}" for i in range(L)]
    rows = [[s.constraints[0], s.value, *s.per_channel_mi] for s in curve]
    return _table(header, rows)


# --- tasks ---------------------------------------------------------------------


class _Run:
    def __init__(self, spec: ProblemSpec, threads: int):
        self.spec = spec
        self.threads = max(1, threads)
        self.files = {}
        self.meta = {"iterations": 0, "points": 0, "all_converged": True, "infeasible_points": 0}
        self.code = EXIT_OK

    def infeasible(self, exc):
        print(f"error: {exc}", file=sys.stderr)
        self.meta["infeasible_points"] += 1
        self.code = max(self.code, EXIT_INFEASIBLE)

    def nonconverged(self, what):
        print(f"warning: solver did not converge at {what}", file=sys.stderr)
        self.meta["all_converged"] = False
        self.code = max(self.code, EXIT_NONCONVERGED)


def _solve_many(spec, points, threads):
    from concurrent.futures import ThreadPoolExecutor

    def one(B):
        try:
            return solve(spec.problem(B), DEFAULT_CONFIG)
        except InfeasibleConstraintError as exc:
            return exc

    if threads <= 1:
        return [one(B) for B in points]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(one, points))


def _curve_task(run: _Run):
    spec = run.spec
    L = len(spec.channels)
    points = spec.constraints.points(L)
    per_receiver = spec.constraints.kind == "vector"
    n = spec.build_channels()[0].input_size
    header = ([f"B_{i + 1}" for i in range(L)] if per_receiver else ["B"]) + ["C"]
    header += [f"q_{x}" for x in range(n)] + [f"I_{i + 1}" for i in range(L)]
    header += ["active", "converged", "gap"]
    rows, ok = [], []
    for B, sol in zip(points, _solve_many(spec, points, run.threads)):
        if isinstance(sol, InfeasibleConstraintError):
            run.infeasible(sol)
            continue
        run.meta["points"] += 1
        run.meta["iterations"] += sol.iterations
        if not sol.converged:
            run.nonconverged(f"B={B.tolist()}")
        lead = list(B) if per_receiver else [B[0]]
        rows.append(lead + [sol.value, *sol.optimizer.probs, *sol.per_channel_mi, _receivers(sol.active_set), sol.converged, sol.gap_estimate])
        ok.append(sol)
    run.files["curve.csv"] = _table(header, rows)
    if ok and not per_receiver:
        run.files["plot.csv"] = emit_plot_data(ok)


def _gaussian_task(run: _Run):
    spec = run.spec
    rows, dist, plot = [], [], []
    for B in spec.constraints.scalars():
        try:
            sol = gaussian_capacity_energy(spec.gaussian(B), spec.options.grid_size)
        except InfeasibleConstraintError as exc:
            run.infeasible(exc)
            continue
        run.meta["points"] += 1
        run.meta["iterations"] += sol.iterations
        if not sol.kkt.passed:
            run.nonconverged(f"B={B} (KKT violation {sol.kkt.max_violation:.3g})")
        F = sol.cdf.compact(1e-9)
        rows.append([B, spec.options.peak, sol.value, sol.kkt.lam, sol.kkt.max_violation, sol.kkt.J_value, sol.kkt.passed, F.support.size])
        dist += [[B, x, m] for x, m in zip(F.support, F.masses)]
        plot.append([B, sol.value])
    run.files["curve.csv"] = _table(["B", "P", "C", "lambda", "kkt_violation", "J", "kkt_passed", "mass_points"], rows)
    run.files["input.csv"] = _table(["B", "x", "mass"], dist)
    run.files["plot.csv"] = _table(["B", "C"], plot)


def _segment_task(run: _Run):
    spec = run.spec
    L, K = len(spec.channels), spec.options.K
    rows = []
    for B in spec.constraints.points(L):
        table = scan(spec.problem(B), K, DEFAULT_CONFIG, run.threads)
        pick = optimize_capacity if spec.options.objective == "capacity" else optimize_loss
        try:
            winner, _ = pick(None, K, table=table)
        except InfeasibleConstraintError as exc:
            run.infeasible(exc)
            continue
        run.meta["points"] += 1
        if not all(sc.converged for _, sc in table if sc is not None):
            run.nonconverged(f"B={B.tolist()}")
        lead = B[0] if spec.constraints.kind != "vector" else ";".join(fmt(b) for b in B)
        for s, sc in table:
            if sc is None:
                rows.append([lead, str(s), "infeasible", "", "", "", 0])
                continue
            rows.append([lead, str(s), sc.c_q, sc.max_loss, ";".join(fmt(c) for c in sc.per_group_capacity),
                         ";".join(fmt(d) for d in sc.per_group_loss), s == winner])
    run.files["segments.csv"] = _table(["B", "partition", "C_Q", "max_loss", "group_capacity", "group_loss", "winner"], rows)


_ORACLE_STEP = {2: 1e-4, 3: 2e-3, 4: 2e-2}


def _verify_task(run: _Run):
    """Oracle probes on the spec's problem; every probe is a pass/fail row."""
    spec = run.spec
    rows = []

    def probe(name, value, tol, passed=None):
        passed = value <= tol if passed is None else passed
        rows.append([name, value, tol, passed])
        if not passed:
            print(f"probe failed: {name} = {value:.6g} (tol {tol:g})", file=sys.stderr)
            run.code = max(run.code, EXIT_NONCONVERGED)

    if spec.task == "gaussian" or not spec.channels:
        for B in spec.constraints.scalars():
            sol = gaussian_capacity_energy(spec.gaussian(B), spec.options.grid_size)
            probe(f"kkt B={fmt(B)}", sol.kkt.max_violation, 1e-4)
        run.files["verify.csv"] = _table(["probe", "value", "tolerance", "passed"], rows)
        return

    L = len(spec.channels)
    points = spec.constraints.points(L)
    sols = _solve_many(spec, points, run.threads)
    feasible = [(B, s) for B, s in zip(points, sols) if not isinstance(s, InfeasibleConstraintError)]
    for B, s in zip(points, sols):
        if isinstance(s, InfeasibleConstraintError):
            run.infeasible(s)
    prob0 = spec.problem(points[0])
    n = prob0.input_size
    step = _ORACLE_STEP.get(n)
    for B, sol in feasible:
        label = ";".join(fmt(b) for b in B) if spec.constraints.kind == "vector" else fmt(B[0])
        run.meta["points"] += 1
        probe(f"converged B={label}", 0.0 if sol.converged else 1.0, 0.0)
        prob = spec.problem(B)
        if step is not None:
            g = grid_capacity_energy(prob, GridSpec(step, n))
            probe(f"solver >= grid oracle B={label}", max(0.0, g.value - sol.value), 1e-6)
            probe(f"solver - grid oracle B={label}", abs(sol.value - g.value), 1e-3)
        probe(f"compound upper bound B={label}", max(0.0, sol.value - upper_bound_min_individual(prob)), 1e-6)
    if spec.constraints.kind == "grid" and len(feasible) >= 3:
        Bs = np.array([B[0] for B, _ in feasible])
        Cs = np.array([s.value for _, s in feasible])
        probe("concavity", concavity_probe(Bs, Cs), 1e-6)
        probe("non-increasing", float(max(0.0, np.max(np.diff(Cs)))), 1e-9)
    ok = domain_convexity_probe(prob0, 200, 0)
    probe("energy domain convexity (200 trials)", 0.0 if ok else 1.0, 0.0)
    if L == 1 and n == 2 and spec.constraints.kind != "vector":
        picks = [feasible[i] for i in sorted({0, len(feasible) // 2, len(feasible) - 1})] if feasible else []
        for B, sol in picks:
            r = product_capacity_n2(spec.problem(B), float(B[0]), 2e-3)
            probe(f"two-letter / 2 vs C1 B={fmt(B[0])}", abs(r.value / 2 - sol.value), 5e-3)
    run.files["verify.csv"] = _table(["probe", "value", "tolerance", "passed"], rows)


_TASKS = {"pp": _curve_task, "multicast": _curve_task, "gaussian": _gaussian_task, "segment": _segment_task, "verify": _verify_task}


def run_task(spec: ProblemSpec, out_dir, threads: int = 1, task: str = None) -> int:
    """Run ``spec`` (or override its task), write output files, return the exit code."""
    task = task or spec.task
    run = _Run(spec, threads)
    _TASKS[task](run)
    meta = {
        "tool": "siet",
        "version": __version__,
        "task": task,
        "spec_sha256": spec_hash(spec),
        "solver": asdict(DEFAULT_CONFIG),
        "output_digits": 12,
        **run.meta,
        "exit_code": run.code,
        "files": sorted(run.files),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in run.files.items():
        (out / name).write_text(text, encoding="utf-8")
    (out / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return run.code


def _parser():
    p = argparse.ArgumentParser(prog="siet", description="Capacity-energy functions for information and energy multicast.")
    p.add_argument("--version", action="version", version=f"siet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run the task named in the spec"), ("verify", "run oracle probes on the spec's problem")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("spec", help="YAML problem spec")
        s.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        s.add_argument("--threads", type=int, default=1, help="worker threads for independent solves")
        s.add_argument("--verbose", "-v", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spec = load_spec(args.spec)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (SpecError, OSError) as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_BADSPEC
    out = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    t0 = time.perf_counter()
    code = run_task(spec, out, args.threads, "verify" if args.command == "verify" else None)
    log.info("wrote %s in %.2f s (exit %d)", out, time.perf_counter() - t0, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
