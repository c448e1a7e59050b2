"""Benchmark grid: seeding, report aggregation, file formats, interrupts."""

import csv
import json
import math

import numpy as np
import pytest

from pisplit import (BenchmarkInterrupted, aggregate_reports, cell_seed,
                     run_benchmark)
from pisplit import benchmark
from pisplit.benchmark import (AGGREGATE_COLUMNS, RUN_COLUMNS, SCHEMA_VERSION,
                               write_aggregate_csv, write_aggregate_json,
                               write_runs_csv)

FUSED_CELL = {"N": 30, "K": 20, "kappa": 0.1}
TOMO_CELL = {"size": 8, "angles": 6, "detectors": 8}


def test_cell_seed_frozen_values():
    assert cell_seed(0, 0, 0) == 2968811710
    assert cell_seed(7, 2, 5) == 3212762053
    assert cell_seed(123, 1, 0) == 447839439
    assert cell_seed(0, 0, 0) == cell_seed(0, 0, 0)
    seeds = {cell_seed(0, c, r) for c in range(4) for r in range(4)}
    assert len(seeds) == 16


def test_empty_algorithm_list_and_bad_family():
    assert run_benchmark("fused-lasso", [FUSED_CELL], 1, []) == []
    with pytest.raises(ValueError, match="family"):
        run_benchmark("sudoku", [FUSED_CELL], 1, ["mtpd"])


def _fused_reports(reps=2):
    return run_benchmark("fused-lasso", [FUSED_CELL], reps, ["mtpd", "fhrb"],
                         tol=1e-6, max_iters=30000)


def test_fused_grid_reports_and_determinism():
    reports = _fused_reports()
    assert len(reports) == 4
    for r in reports:
        assert r.cell == "N30-K20-kappa0.1"
        assert r.seed == cell_seed(0, 0, r.rep)
        assert r.converged
    again = _fused_reports()
    for a, b in zip(reports, again):
        assert (a.cell, a.algorithm, a.rep, a.seed) == \
            (b.cell, b.algorithm, b.rep, b.seed)
        assert a.iterations == b.iterations
        assert a.objective == b.objective
        assert a.rel_error == b.rel_error
        assert a.gamma == b.gamma


def test_aggregate_schema():
    reports = _fused_reports()
    rows = aggregate_reports(reports, [FUSED_CELL], "fused-lasso")
    assert [r["algo"] for r in rows] == ["fhrb", "mtpd"]
    for row in rows:
        assert list(row.keys()) == AGGREGATE_COLUMNS
        assert row["N"] == 30 and row["K"] == 20
        assert row["kappa"] == repr(0.1)
        assert row["reps"] == 2 and row["failures"] == 0
        assert float(row["avg_iters"]) > 0
        assert float(row["avg_objective"]) > 0
    mt = [r for r in reports if r.algorithm == "mtpd"]
    want = float(np.mean([r.iterations for r in mt]))
    assert float(rows[1]["avg_iters"]) == want


def test_failed_runs_are_counted_not_fatal():
    reports = run_benchmark("fused-lasso", [FUSED_CELL], 2, ["mtpd"],
                            tol=1e-6, max_iters=100,
                            gammas={"mtpd": 5.0})
    assert len(reports) == 2
    for r in reports:
        assert not r.converged
        assert math.isnan(r.objective) and math.isinf(r.rel_error)
    rows = aggregate_reports(reports, [FUSED_CELL], "fused-lasso")
    assert rows[0]["failures"] == 2
    assert rows[0]["avg_iters"] == "" and rows[0]["avg_objective"] == ""


def test_runs_csv_round_trip(tmp_path):
    reports = _fused_reports(reps=1)
    path = tmp_path / "runs.csv"
    write_runs_csv(reports, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0].keys()) == RUN_COLUMNS
    assert len(rows) == len(reports)
    for row, rep in zip(rows, reports):
        assert row["cell"] == rep.cell and row["algo"] == rep.algorithm
        assert int(row["iterations"]) == rep.iterations
        assert float(row["objective"]) == rep.objective
        assert float(row["rel_error"]) == rep.rel_error
        assert row["converged"] == "1" and row["psnr"] == ""


def test_tomography_family_outputs(tmp_path):
    trace_dir = tmp_path / "traces"
    trace_dir.mkdir()
    reports = run_benchmark("tomography", [TOMO_CELL], 1, ["mtpd"],
                            tol=1e-6, max_iters=300,
                            trace_dir=(str(trace_dir), {"mtpd"}),
                            image_dir=str(tmp_path))
    assert len(reports) == 1
    assert reports[0].psnr is not None and np.isfinite(reports[0].psnr)
    rows = aggregate_reports(reports, [TOMO_CELL], "tomography")
    assert rows[0]["N"] == 64 and rows[0]["K"] == 48
    assert rows[0]["kappa"] == ""
    cid = "size8-angles6-det8"
    assert (tmp_path / ("phantom-%s.pgm" % cid)).exists()
    assert (tmp_path / ("recon-%s-mtpd.pgm" % cid)).exists()
    trace = trace_dir / ("trace-%s-mtpd-rep0.csv" % cid)
    first = trace.read_text().split("\n", 1)[0]
    assert first == "iter,residual,objective,elapsed_ms"


def test_interrupt_preserves_finished_cells(monkeypatch):
    real = benchmark._FUSED_SOLVERS["mtpd"]
    calls = []

    def flaky(inst, cfg):
        calls.append(inst.seed)
        if len(calls) > 1:
            raise KeyboardInterrupt
        return real(inst, cfg)

    monkeypatch.setitem(benchmark._FUSED_SOLVERS, "mtpd", flaky)
    cells = [FUSED_CELL, {"N": 25, "K": 15, "kappa": 0.1}]
    with pytest.raises(BenchmarkInterrupted) as ei:
        run_benchmark("fused-lasso", cells, 1, ["mtpd"], tol=1e-6,
                      max_iters=20000)
    assert len(ei.value.reports) == 1
    assert ei.value.reports[0].cell == "N30-K20-kappa0.1"


def test_aggregate_file_writers(tmp_path):
    reports = _fused_reports(reps=1)
    rows = aggregate_reports(reports, [FUSED_CELL], "fused-lasso")
    cpath = tmp_path / "aggregate.csv"
    write_aggregate_csv(rows, cpath)
    header = cpath.read_text().split("\n", 1)[0].replace("\r", "")
    assert header == ",".join(AGGREGATE_COLUMNS)
    jpath = tmp_path / "aggregate.json"
    write_aggregate_json(rows, jpath)
    blob = jpath.read_text()
    assert blob.endswith("\n")
    data = json.loads(blob)
    assert data["schema_version"] == SCHEMA_VERSION
    assert data["rows"] == rows
