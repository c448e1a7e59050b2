"""Run summaries shared by the experiment drivers and the benchmark CLI."""

from dataclasses import asdict, dataclass
from typing import Optional

__all__ = ["RunReport", "report_from_trace"]


@dataclass
class RunReport:
    """One solver run: identity, effort, and quality at the stopping point.

    rel_error is the relative iterate change at the final step; psnr is
    filled only by the tomography family.
    """

    algorithm: str
    iterations: int
    elapsed_s: float
    objective: float
    rel_error: float
    gamma: float
    seed: int
    converged: bool
    psnr: Optional[float] = None
    cell: Optional[str] = None
    rep: Optional[int] = None

    def as_dict(self):
        return asdict(self)


def report_from_trace(algorithm, trace, objective, seed, psnr=None):
    """Condense a SolverTrace into a RunReport."""
    return RunReport(
        algorithm=algorithm,
        iterations=trace.iterations,
        elapsed_s=(trace.elapsed_ms[-1] / 1e3) if trace.elapsed_ms else 0.0,
        objective=float(objective),
        rel_error=float(trace.residuals[-1]) if trace.residuals else float("inf"),
        gamma=float(trace.gamma),
        seed=int(seed),
        converged=trace.status == "converged",
        psnr=psnr)
