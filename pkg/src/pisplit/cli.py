"""Command-line driver: benchmark matrices, validation suites, outputs.

Subcommands:

  bench-random   fused-lasso matrix over N x K x kappa cells
  bench-ct       tomography reconstructions with PSNR and PGM images
  validate       seeded property suites (Moreau, reductions, step sizes, ...)

All randomness flows from --seed; CSV/JSON outputs are byte-identical for
identical flags and seed except for timing fields, and wall-clock metadata
is isolated in run_meta.json.  Exit codes: 0 success, 1 runtime failure,
2 usage error.  The SPLITTING_LOG environment variable sets the log level.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional

from . import __version__
from .benchmark import (SCHEMA_VERSION, BenchmarkInterrupted,
                        aggregate_reports, run_benchmark, write_aggregate_csv,
                        write_aggregate_json, write_runs_csv)
from .splitting import validate_step_size
from .tomography import TomoGeometry
from .validate import SUITES, run_all

__all__ = ["RunConfig", "main"]

logger = logging.getLogger(__name__)

ALGORITHMS = ("mtpd", "cmtpd", "fhrb", "condat-vu")

# nominal (beta, zeta) per family for pre-validating --gamma overrides of
# the kernel-lifted methods; the baselines depend on the instance and are
# checked inside the solvers
_LIFTED_CONSTANTS = {
    "fused-lasso": (2.0, 5.0),
    "tomography": (math.sqrt(8.0), 1.0),
}


@dataclass
class RunConfig:
    """Parsed invocation; round-trips losslessly through JSON."""

    subcommand: str
    params: Dict
    algorithms: List[str]
    reps: int
    tol: float
    max_iters: int
    seed: int
    out: Optional[str]
    trace: List[str] = field(default_factory=list)
    gammas: Dict[str, float] = field(default_factory=dict)
    force: bool = False
    jobs: int = 1

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _parse_int_list(text):
    return [int(tok) for tok in text.split(",") if tok]


def _parse_float_list(text):
    return [float(tok) for tok in text.split(",") if tok]


def _parse_algos(text):
    algos = [tok.strip() for tok in text.split(",") if tok.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise argparse.ArgumentTypeError(
                "unknown algorithm %r (choose from %s)"
                % (a, ", ".join(ALGORITHMS)))
    return algos


def _parse_gammas(text):
    """'0.1' applies to all algorithms; 'mtpd=0.1,cmtpd=0.05' is per-id."""
    text = text.strip()
    if "=" not in text:
        return {"*": float(text)}
    out = {}
    for tok in text.split(","):
        name, _, val = tok.partition("=")
        name = name.strip()
        if name not in ALGORITHMS:
            raise argparse.ArgumentTypeError("unknown algorithm %r" % name)
        out[name] = float(val)
    return out


def _resolve_gammas(raw, algorithms):
    if "*" in raw:
        return {a: raw["*"] for a in algorithms}
    return dict(raw)


def _check_gammas(family, gammas, force):
    """Refuse inadmissible overrides of the lifted methods up front."""
    beta, zeta = _LIFTED_CONSTANTS[family]
    for algo, g in gammas.items():
        if algo not in ("mtpd", "cmtpd"):
            continue
        chk = validate_step_size(algo, beta, zeta, g)
        if not chk.accepted:
            msg = ("--gamma %g inadmissible for %s (supremum %g)"
                   % (g, algo, chk.supremum))
            if not force:
                print("error: %s (use --force to override)" % msg,
                      file=sys.stderr)
                return False
            logger.warning("%s; continuing under --force", msg)
    return True


def _add_common(sub, default_tol, default_iters):
    sub.add_argument("--algos", type=_parse_algos,
                     default=list(ALGORITHMS),
                     help="comma-separated algorithm ids (default: all)")
    sub.add_argument("--reps", type=int, default=1,
                     help="instances per cell (default 1)")
    sub.add_argument("--tol", type=float, default=default_tol)
    sub.add_argument("--max-iters", type=int, default=default_iters)
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--trace", type=_parse_algos, default=[],
                     help="emit per-iteration trace CSVs for these ids")
    sub.add_argument("--gamma", type=_parse_gammas, default={},
                     help="step override: VALUE or id=VALUE[,id=VALUE...]")
    sub.add_argument("--force", action="store_true",
                     help="run even with inadmissible step overrides")
    sub.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="parallel cells (default: available cores)")


def _write_outputs(out, reports, cells, family, config, elapsed_s,
                   interrupted):
    rows = aggregate_reports(reports, cells, family)
    write_runs_csv(reports, os.path.join(out, "runs.csv"))
    write_aggregate_csv(rows, os.path.join(out, "aggregate.csv"))
    write_aggregate_json(rows, os.path.join(out, "aggregate.json"))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": elapsed_s,
        "interrupted": interrupted,
        "config": json.loads(config.to_json()),
    }
    with open(os.path.join(out, "run_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote %d run(s) across %d cell(s) to %s%s"
          % (len(reports), len(cells), out,
             " (partial: interrupted)" if interrupted else ""))


def _run_family(family, cells, args, params, image_dir=None):
    gammas = _resolve_gammas(args.gamma, args.algos)
    if not _check_gammas(family, gammas, args.force):
        return 2
    out = args.out
    os.makedirs(out, exist_ok=True)
    config = RunConfig(
        subcommand="bench-random" if family == "fused-lasso" else "bench-ct",
        params=params, algorithms=list(args.algos), reps=args.reps,
        tol=args.tol, max_iters=args.max_iters, seed=args.seed, out=out,
        trace=list(args.trace), gammas=gammas, force=args.force,
        jobs=args.jobs)
    trace_dir = (out, set(args.trace)) if args.trace else None
    t0 = time.perf_counter()
    interrupted = False
    try:
        reports = run_benchmark(
            family, cells, args.reps, args.algos, tol=args.tol,
            max_iters=args.max_iters, master_seed=args.seed, gammas=gammas,
            jobs=args.jobs, trace_dir=trace_dir, image_dir=image_dir,
            force=args.force)
    except BenchmarkInterrupted as stop:
        reports = stop.reports
        interrupted = True
    _write_outputs(out, reports, cells, family, config,
                   time.perf_counter() - t0, interrupted)
    return 1 if interrupted else 0


def cmd_bench_random(args):
    """Fused-lasso benchmark matrix; cells are the N x K x kappa product."""
    cells = [{"N": n, "K": k, "kappa": kp}
             for n in args.N for k in args.K for kp in args.kappa]
    params = {"N": args.N, "K": args.K, "kappa": args.kappa}
    return _run_family("fused-lasso", cells, args, params)


def cmd_bench_ct(args):
    """Tomography benchmark; writes PSNR reports plus phantom/recon PGMs."""
    geometry = TomoGeometry(kind=args.geometry, sod=args.sod, sid=args.sid,
                            span_deg=args.span)
    cells = [{"size": s, "angles": args.angles, "detectors": args.detectors,
              "geometry": geometry, "noise_scale": args.noise_scale}
             for s in args.size]
    params = {"size": args.size, "angles": args.angles,
              "detectors": args.detectors, "geometry": args.geometry,
              "sod": args.sod, "sid": args.sid, "span": args.span,
              "noise_scale": args.noise_scale}
    return _run_family("tomography", cells, args, params, image_dir=args.out)


def cmd_validate(args):
    """Run property suites; exit 0 only when every suite passes."""
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_all(seed=args.seed, iters=args.iters, names=names)
    width = max(len(n) for n in results)
    ok_all = True
    for name, (ok, detail) in results.items():
        ok_all &= ok
        print("%-*s  %s  %s" % (width, name, "pass" if ok else "FAIL", detail))
    return 0 if ok_all else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pisplit",
        description="Benchmarks and validation for partial-inverse "
                    "splitting solvers.")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    br = sub.add_parser("bench-random",
                        help="fused-lasso benchmark matrix")
    br.add_argument("--N", type=_parse_int_list, default=[400],
                    help="comma-separated primal sizes")
    br.add_argument("--K", type=_parse_int_list, default=[200],
                    help="comma-separated data sizes")
    br.add_argument("--kappa", type=_parse_float_list, default=[0.1],
                    help="comma-separated scale factors")
    br.add_argument("--out", required=True, help="output directory")
    _add_common(br, default_tol=1e-6, default_iters=50000)
    br.set_defaults(handler=cmd_bench_random)

    bc = sub.add_parser("bench-ct", help="tomography benchmark")
    bc.add_argument("--size", type=_parse_int_list, default=[32],
                    help="comma-separated phantom sides")
    bc.add_argument("--angles", type=int, default=60)
    bc.add_argument("--detectors", type=int, default=48)
    bc.add_argument("--geometry", choices=("parallel", "fan"),
                    default="parallel")
    bc.add_argument("--sod", type=float, default=800.0,
                    help="source-object distance (fan)")
    bc.add_argument("--sid", type=float, default=1200.0,
                    help="source-image distance (fan)")
    bc.add_argument("--span", type=float, default=180.0,
                    help="angular span in degrees")
    bc.add_argument("--noise-scale", type=float, default=1e3,
                    help="expected Poisson counts at the sinogram maximum")
    bc.add_argument("--out", default="ct-results", help="output directory")
    _add_common(bc, default_tol=1e-8, default_iters=10000)
    bc.set_defaults(handler=cmd_bench_ct)

    va = sub.add_parser("validate", help="run the property suites")
    va.add_argument("--suite", choices=["all"] + sorted(SUITES),
                    default="all")
    va.add_argument("--iters", type=int, default=None,
                    help="override per-suite sample count")
    va.add_argument("--seed", type=int, default=0)
    va.set_defaults(handler=cmd_validate)
    return parser


def main(argv=None):
    level = os.environ.get("SPLITTING_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 1
    except Exception as exc:
        logger.exception("run failed")
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
