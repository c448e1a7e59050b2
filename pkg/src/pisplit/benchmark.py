"""Benchmark matrices over (instance, algorithm) cells with aggregation.

Each cell is a parameter tuple (fused lasso: N, K, kappa; tomography: size,
angles, detectors); a cell runs `reps` instances, each seeded from
SeedSequence([master_seed, cell_index, rep]) so results do not depend on
execution order or the worker count.  Failures inside a run are recorded on
the report rather than raised, so a long matrix survives a bad cell.

Timings are genuinely nondeterministic, so they are quarantined: aggregate
rows carry avg_time_s, while everything else in the CSV/JSON outputs is a
pure function of the flags and the master seed.
"""

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import fused_lasso, tomography
from .reporting import RunReport
from .splitting import SolverConfig

__all__ = [
    "SCHEMA_VERSION",
    "BenchmarkInterrupted",
    "cell_seed",
    "run_benchmark",
    "aggregate_reports",
    "write_runs_csv",
    "write_aggregate_csv",
    "write_aggregate_json",
]

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_FUSED_SOLVERS = {
    "mtpd": fused_lasso.mtpd_solve,
    "cmtpd": fused_lasso.cmtpd_solve,
    "fhrb": fused_lasso.fhrb_fused_solve,
    "condat-vu": fused_lasso.condat_vu_fused_solve,
}

AGGREGATE_COLUMNS = ["algo", "N", "K", "kappa", "reps", "avg_iters",
                     "avg_time_s", "avg_objective", "failures"]

RUN_COLUMNS = ["cell", "algo", "rep", "seed", "iterations", "time_s",
               "objective", "rel_error", "converged", "psnr"]


def cell_seed(master_seed, cell_index, rep):
    """Deterministic per-run seed, independent of execution order."""
    return int(np.random.SeedSequence(
        [int(master_seed), int(cell_index), int(rep)]).generate_state(1)[0])


def _fused_cell_id(cell):
    return "N%d-K%d-kappa%g" % (cell["N"], cell["K"], cell["kappa"])


def _tomo_cell_id(cell):
    return "size%d-angles%d-det%d" % (cell["size"], cell["angles"],
                                      cell["detectors"])


def _failed_report(algorithm, seed, cell_id, rep, exc):
    logger.error("run failed (%s, cell %s, rep %d): %s",
                 algorithm, cell_id, rep, exc)
    return RunReport(algorithm=algorithm, iterations=0, elapsed_s=0.0,
                     objective=float("nan"), rel_error=float("inf"),
                     gamma=float("nan"), seed=seed, converged=False,
                     cell=cell_id, rep=rep)


def _run_fused_cell(cell, cell_index, reps, algorithms, master_seed,
                    tol, max_iters, gammas, trace_dir, image_dir=None,
                    force=False):
    out = []
    cid = _fused_cell_id(cell)
    for rep in range(reps):
        seed = cell_seed(master_seed, cell_index, rep)
        inst = fused_lasso.gen_fused_lasso(
            N=cell["N"], K=cell["K"], kappa=cell["kappa"], seed=seed)
        for algo in algorithms:
            traced = trace_dir is not None and algo in trace_dir[1]
            obj_fn = None
            if traced:
                n = inst.n
                obj_fn = lambda v, inst=inst, n=n: fused_lasso.objective(
                    inst, v[:n])
            cfg = SolverConfig(gamma=gammas.get(algo), max_iters=max_iters,
                               tol=tol, seed=seed, force=force,
                               objective_fn=obj_fn)
            try:
                report, trace = _FUSED_SOLVERS[algo](inst, cfg)
            except Exception as exc:  # recorded, not fatal
                out.append(_failed_report(algo, seed, cid, rep, exc))
                continue
            report.cell = cid
            report.rep = rep
            if traced:
                trace.to_csv("%s/trace-%s-%s-rep%d.csv"
                             % (trace_dir[0], cid, algo, rep))
            out.append(report)
        logger.info("cell %s rep %d done", cid, rep)
    return out


def _run_tomo_cell(cell, cell_index, reps, algorithms, master_seed,
                   tol, max_iters, gammas, trace_dir, image_dir=None,
                   force=False):
    out = []
    cid = _tomo_cell_id(cell)
    geometry = cell.get("geometry") or tomography.TomoGeometry()
    for rep in range(reps):
        seed = cell_seed(master_seed, cell_index, rep)
        inst = tomography.make_tomo_instance(
            size=cell["size"], n_angles=cell["angles"],
            detectors=cell["detectors"], geometry=geometry, seed=seed,
            noise_scale=cell.get("noise_scale", 1e3))
        if image_dir is not None and rep == 0:
            tomography.write_pgm("%s/phantom-%s.pgm" % (image_dir, cid),
                                 inst.x_ref.reshape(inst.h, inst.w))
        for algo in algorithms:
            traced = trace_dir is not None and algo in trace_dir[1]
            obj_fn = None
            if traced:
                n = inst.h * inst.w
                obj_fn = lambda v, inst=inst, n=n: tomography.tomo_objective(
                    inst, v[:n])
            cfg = SolverConfig(gamma=gammas.get(algo), max_iters=max_iters,
                               tol=tol, seed=seed, force=force,
                               objective_fn=obj_fn)
            try:
                report, trace = tomography.tomo_solve(inst, algo, cfg)
            except Exception as exc:
                out.append(_failed_report(algo, seed, cid, rep, exc))
                continue
            report.cell = cid
            report.rep = rep
            if traced:
                trace.to_csv("%s/trace-%s-%s-rep%d.csv"
                             % (trace_dir[0], cid, algo, rep))
            if image_dir is not None and rep == 0:
                tomography.write_pgm(
                    "%s/recon-%s-%s.pgm" % (image_dir, cid, algo),
                    trace.solution.reshape(inst.h, inst.w))
            out.append(report)
        logger.info("cell %s rep %d done", cid, rep)
    return out


_CELL_RUNNERS = {"fused-lasso": _run_fused_cell, "tomography": _run_tomo_cell}


class BenchmarkInterrupted(Exception):
    """Raised on Ctrl-C with the reports finished so far attached."""

    def __init__(self, reports):
        super().__init__("benchmark interrupted")
        self.reports = reports


def _dispatch(args):
    family, cell, cell_index, reps, algorithms, master_seed, tol, max_iters, \
        gammas, trace_dir, image_dir, force = args
    return _CELL_RUNNERS[family](cell, cell_index, reps, algorithms,
                                 master_seed, tol, max_iters, gammas,
                                 trace_dir, image_dir, force)


def run_benchmark(family, cells, reps, algorithms, tol=None, max_iters=None,
                  master_seed=0, gammas=None, jobs=1, trace_dir=None,
                  image_dir=None, force=False):
    """Run every (cell, rep, algorithm) combination; returns flat reports.

    family is "fused-lasso" or "tomography"; defaults follow the family
    (tol 1e-6 / cap 50000, or tol 1e-8 / cap 10000).  gammas maps algorithm
    ids to step overrides (None entries auto-select).  jobs > 1 runs cells
    in separate processes; trace_dir is (directory, set of algorithm ids)
    enabling per-run trace CSVs, image_dir (tomography only) collects
    phantom and first-rep reconstruction images.  Ctrl-C raises
    BenchmarkInterrupted carrying the completed cells' reports.
    """
    if family not in _CELL_RUNNERS:
        raise ValueError("unknown benchmark family %r" % family)
    if tol is None:
        tol = 1e-6 if family == "fused-lasso" else 1e-8
    if max_iters is None:
        max_iters = 50000 if family == "fused-lasso" else 10000
    gammas = gammas or {}
    if not algorithms:
        return []
    tasks = [(family, cell, i, reps, list(algorithms), master_seed, tol,
              max_iters, gammas, trace_dir, image_dir, force)
             for i, cell in enumerate(cells)]
    done = []
    try:
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for chunk in pool.map(_dispatch, tasks):
                    done.extend(chunk)
        else:
            for t in tasks:
                done.extend(_dispatch(t))
    except KeyboardInterrupt:
        raise BenchmarkInterrupted(done)
    return done


def aggregate_reports(reports, cells, family):
    """Per (cell, algorithm) averages in the aggregate schema.

    Failed runs are excluded from the averages and counted in `failures`;
    tomography rows leave kappa empty and use pixel/ray counts for N and K.
    """
    rows = []
    by_key = {}
    for r in reports:
        by_key.setdefault((r.cell, r.algorithm), []).append(r)
    for cell in cells:
        if family == "fused-lasso":
            cid = _fused_cell_id(cell)
            n, k, kappa = cell["N"], cell["K"], repr(float(cell["kappa"]))
        else:
            cid = _tomo_cell_id(cell)
            n = cell["size"] * cell["size"]
            k = cell["angles"] * cell["detectors"]
            kappa = ""
        for algo in sorted({a for c, a in by_key if c == cid}):
            grp = by_key[(cid, algo)]
            good = [r for r in grp if not np.isnan(r.objective)]
            failures = len(grp) - len(good)
            rows.append({
                "algo": algo,
                "N": n,
                "K": k,
                "kappa": kappa,
                "reps": len(grp),
                "avg_iters": (repr(float(np.mean([r.iterations for r in good])))
                              if good else ""),
                "avg_time_s": (repr(float(np.mean([r.elapsed_s for r in good])))
                               if good else ""),
                "avg_objective": (repr(float(np.mean([r.objective for r in good])))
                                  if good else ""),
                "failures": failures,
            })
    return rows


def write_runs_csv(reports, path):
    """One row per run; objective uses repr for lossless round-trips."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(RUN_COLUMNS)
        for r in reports:
            out.writerow([
                r.cell, r.algorithm, r.rep, r.seed, r.iterations,
                repr(r.elapsed_s), repr(r.objective), repr(r.rel_error),
                int(r.converged), "" if r.psnr is None else repr(r.psnr)])


def write_aggregate_csv(rows, path):
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS)
        out.writeheader()
        out.writerows(rows)


def write_aggregate_json(rows, path):
    with open(path, "w") as fh:
        json.dump({"schema_version": SCHEMA_VERSION, "rows": rows}, fh,
                  indent=1, sort_keys=True)
        fh.write("\n")
