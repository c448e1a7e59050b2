"""Single-inclusion splitting solvers over a subspace constraint.

Solves 0 in Ax + Bx + Cx + N_V(x) where A is maximally monotone (given by
its resolvent), B is beta-Lipschitz, C is 1/zeta-cocoercive and N_V is the
normal cone of a closed subspace V.  The two primary methods activate B once
per iteration through a partial-inverse reformulation:

  frpib_solve   forward-reflected partial-inverse backward iteration
  fpisdr_solve  forward partial-inverse shadow-Douglas-Rachford iteration

plus the V = H baselines (fhrb_solve, fsdr_solve) and a Condat-Vu
primal-dual baseline for composite objectives.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linalg import as_vector, check_finite, operator_norm_estimate
from .operators import prox_conjugate

__all__ = [
    "ProblemSpec",
    "SolverConfig",
    "SolverTrace",
    "StepSizeCheck",
    "STEP_GUARD_BAND",
    "step_size_frpib_max",
    "step_size_fsdr_max",
    "validate_step_size",
    "frpib_solve",
    "fpisdr_solve",
    "fhrb_solve",
    "fsdr_solve",
    "condat_vu_solve",
]

logger = logging.getLogger(__name__)

# Admissible step regions are open; validation excludes a thin relative band
# below the supremum so boundary values (where the convergence hypotheses
# carry no quantitative content) are rejected.
STEP_GUARD_BAND = 1e-4

RESIDUAL_FLOOR = 1e-12


@dataclass
class ProblemSpec:
    """Operator bundle for 0 in Ax + Bx + Cx + N_V(x).

    a : ResolventOp for A; b : Lipschitz ForwardOp (constant beta, 0 encodes
    B = 0); c : cocoercive ForwardOp (constant zeta, 0 encodes C = 0);
    v : SubspaceProjector for V.
    """

    a: object
    b: object
    c: object
    v: object = None

    @property
    def beta(self):
        return self.b.lipschitz

    @property
    def zeta(self):
        return self.c.cocoercivity_inverse


@dataclass
class SolverConfig:
    """Run parameters shared by all solvers.

    The stopping rule is fixed: relative iterate change
    ||z_{n+1} - z_n|| / max(||z_{n+1}||, 1e-12) <= tol, where z is the
    solver's driving variable (x for the baselines, x + gamma*y for the
    partial-inverse methods; the two coincide when V = H).  gamma = None
    lets experiment drivers fill in their default step; the core solvers
    require an explicit value.
    """

    gamma: Optional[float] = None
    max_iters: int = 1000
    tol: float = 1e-6
    seed: int = 0
    record_iterates: bool = False
    objective_fn: Optional[Callable] = None
    force: bool = False


class SolverTrace:
    """Per-iteration history plus the final primal/dual pair."""

    def __init__(self, algorithm, gamma):
        self.algorithm = algorithm
        self.gamma = gamma
        self.residuals = []
        self.objectives = []
        self.elapsed_ms = []
        self.iterates = []
        self.x = None
        self.y = None
        self.status = "budget-exhausted"

    @property
    def iterations(self):
        return len(self.residuals)

    def record(self, x, residual, elapsed_ms, objective=None, keep_iterate=False):
        self.residuals.append(float(residual))
        self.elapsed_ms.append(float(elapsed_ms))
        self.objectives.append(None if objective is None else float(objective))
        if keep_iterate:
            self.iterates.append(np.array(x, dtype=float, copy=True))

    def finish(self, x, y, tol):
        self.x = np.asarray(x, dtype=float)
        self.y = None if y is None else np.asarray(y, dtype=float)
        check_finite(self.x, "final iterate")
        self.status = ("converged"
                       if self.residuals and self.residuals[-1] <= tol
                       else "budget-exhausted")
        return self

    def to_csv(self, path):
        """Write one row per iteration: iter, residual, objective, elapsed_ms."""
        with open(path, "w") as fh:
            fh.write("iter,residual,objective,elapsed_ms\n")
            for i, (r, o, e) in enumerate(zip(self.residuals, self.objectives,
                                              self.elapsed_ms)):
                obj = "" if o is None else repr(o)
                fh.write("%d,%r,%s,%r\n" % (i, r, obj, e))


# ---------------------------------------------------------------------------
# step-size policies


def step_size_frpib_max(beta, zeta):
    """Supremum 2/(4*beta + zeta) of the admissible region; open above."""
    if beta < 0 or zeta < 0:
        raise ValueError("constants must be nonnegative")
    if beta == 0 and zeta == 0:
        return math.inf
    return 2.0 / (4.0 * beta + zeta)


def step_size_fsdr_max(beta, zeta):
    """Positive root of 2/3 - (2*beta + zeta)*t - beta^2*zeta*t^3.

    The cubic is strictly decreasing for t > 0, so the root is unique;
    admissible steps lie strictly below it.  zeta = 0 returns 1/(3*beta)
    exactly and beta = 0 returns 2/(3*zeta); the root is otherwise bracketed
    in [0, 2/(3*(2*beta+zeta))] and bisected to relative width 1e-12.
    """
    if beta < 0 or zeta < 0:
        raise ValueError("constants must be nonnegative")
    if beta == 0 and zeta == 0:
        return math.inf
    if zeta == 0:
        return 1.0 / (3.0 * beta)
    if beta == 0:
        return 2.0 / (3.0 * zeta)

    def cubic(t):
        return 2.0 / 3.0 - (2.0 * beta + zeta) * t - beta * beta * zeta * t ** 3

    lo, hi = 0.0, 2.0 / (3.0 * (2.0 * beta + zeta))
    # cubic(lo) = 2/3 > 0 and cubic(hi) < 0 by construction
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cubic(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


@dataclass
class StepSizeCheck:
    accepted: bool
    supremum: float
    margin: float


_FRPIB_RULE = {"frpib", "fhrb", "mtpd"}
_FSDR_RULE = {"fpisdr", "fsdr", "cmtpd"}


def validate_step_size(algorithm, beta, zeta, gamma):
    """Check gamma against the admissible region of the named algorithm.

    Returns the admissible supremum and the relative margin
    (supremum - gamma)/supremum.  Acceptance requires the margin to exceed
    STEP_GUARD_BAND: the regions are open, so values at (or within round-off
    of) the boundary are rejected.
    """
    if algorithm in _FRPIB_RULE:
        sup = step_size_frpib_max(beta, zeta)
    elif algorithm in _FSDR_RULE:
        sup = step_size_fsdr_max(beta, zeta)
    else:
        raise ValueError("unknown algorithm id %r" % algorithm)
    if gamma <= 0:
        return StepSizeCheck(False, sup, 1.0)
    if math.isinf(sup):
        return StepSizeCheck(True, sup, math.inf)
    margin = (sup - gamma) / sup
    return StepSizeCheck(margin > STEP_GUARD_BAND, sup, margin)


def _require_step(algorithm, beta, zeta, gamma, force=False):
    if gamma is None:
        raise ValueError("no step size set for %s" % algorithm)
    chk = validate_step_size(algorithm, beta, zeta, gamma)
    if not chk.accepted:
        msg = ("step size %g inadmissible for %s (supremum %g, margin %.3g)"
               % (gamma, algorithm, chk.supremum, chk.margin))
        if not force:
            raise ValueError(msg)
        logger.warning("%s; proceeding under force", msg)
    return chk


def _into_v(proj, v, name):
    v = as_vector(v)
    pv = np.asarray(proj.project(v), dtype=float)
    if np.linalg.norm(pv - v) > 1e-12 * (1.0 + np.linalg.norm(v)):
        logger.warning("%s was outside V and has been projected in", name)
    return pv


def _into_v_perp(proj, v, name):
    v = as_vector(v)
    pv = np.asarray(proj.complement(v), dtype=float)
    if np.linalg.norm(pv - v) > 1e-12 * (1.0 + np.linalg.norm(v)):
        logger.warning("%s was outside V-perp and has been projected in", name)
    return pv


def _residual(x_new, x_old):
    return float(np.linalg.norm(x_new - x_old)
                 / max(np.linalg.norm(x_new), RESIDUAL_FLOOR))


# ---------------------------------------------------------------------------
# solvers


def frpib_solve(p, cfg, x0, x_prev=None, y0=None):
    """Forward-reflected partial-inverse backward iteration.

    Per iteration (one B call, one C call, one resolvent, two projections):

        w_n = B x_n
        u_n = x_n + g y_n - g P_V(2 w_n - w_{n-1} + C x_n)
        p_n = J_{gA} u_n
        x_{n+1} = P_V p_n
        y_{n+1} = y_n - (p_n - x_{n+1}) / g

    x0, x_prev are projected into V (with a logged warning if they moved)
    and y0 into V-perp; w_{-1} = B x_{-1}.  Requires g below
    step_size_frpib_max(beta, zeta).

    Stopping measures the relative change of z_n = x_n + g y_n, the
    variable the fixed-point iteration actually contracts; the x part alone
    can stall for long stretches while the dual still moves.  x in V and
    y in V-perp, so at V = H this is exactly the x change.
    """
    _require_step("frpib", p.beta, p.zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    proj = p.v.project
    x = _into_v(p.v, x0, "x0")
    xm = x.copy() if x_prev is None else _into_v(p.v, x_prev, "x_prev")
    y = np.zeros_like(x) if y0 is None else _into_v_perp(p.v, y0, "y0")
    w_prev = np.asarray(p.b.evaluate(xm), dtype=float)
    z = x + g * y

    trace = SolverTrace("frpib", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(p.b.evaluate(x), dtype=float)
        u = x + g * y - g * np.asarray(
            proj(2.0 * w - w_prev + np.asarray(p.c.evaluate(x), dtype=float)),
            dtype=float)
        pn = np.asarray(p.a.evaluate(g, u), dtype=float)
        x_new = np.asarray(proj(pn), dtype=float)
        y = y - (pn - x_new) / g
        w_prev = w
        z_new = x_new + g * y
        res = _residual(z_new, z)
        z = z_new
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(x, y, cfg.tol)


def fpisdr_solve(p, cfg, x0, x_prev=None, y0=None):
    """Forward partial-inverse shadow-Douglas-Rachford iteration.

    Per iteration:

        w_n = B x_n
        p_n = J_{gA}(x_n + g y_n - g P_V(w_n + C x_n))
        x_{n+1} = P_V p_n - g (P_V w_n - P_V w_{n-1})
        y_{n+1} = y_n - (p_n - P_V p_n) / g

    The dual update subtracts the V-perp part of p_n, which keeps y_n in
    V-perp and makes the V = H run coincide with fsdr_solve.  Requires g
    below step_size_fsdr_max(beta, zeta).  Stopping measures the relative
    change of z_n = x_n + g y_n, as in frpib_solve.
    """
    _require_step("fpisdr", p.beta, p.zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    proj = p.v.project
    x = _into_v(p.v, x0, "x0")
    xm = x.copy() if x_prev is None else _into_v(p.v, x_prev, "x_prev")
    y = np.zeros_like(x) if y0 is None else _into_v_perp(p.v, y0, "y0")
    m_prev = np.asarray(proj(np.asarray(p.b.evaluate(xm), dtype=float)), dtype=float)
    z = x + g * y

    trace = SolverTrace("fpisdr", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(p.b.evaluate(x), dtype=float)
        m = np.asarray(proj(w), dtype=float)
        u = x + g * y - g * (m + np.asarray(
            proj(np.asarray(p.c.evaluate(x), dtype=float)), dtype=float))
        pn = np.asarray(p.a.evaluate(g, u), dtype=float)
        pv = np.asarray(proj(pn), dtype=float)
        x_new = pv - g * (m - m_prev)
        y = y - (pn - pv) / g
        m_prev = m
        z_new = x_new + g * y
        res = _residual(z_new, z)
        z = z_new
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(x, y, cfg.tol)


def fhrb_solve(p, cfg, x0, x_prev=None):
    """Forward-half-reflected backward baseline (V = H).

        x_{n+1} = J_{gA}(x_n - g (2 B x_n - B x_{n-1} + C x_n))

    One B evaluation per iteration through the stored w.
    """
    _require_step("fhrb", p.beta, p.zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    x = as_vector(x0)
    xm = x.copy() if x_prev is None else as_vector(x_prev)
    w_prev = np.asarray(p.b.evaluate(xm), dtype=float)

    trace = SolverTrace("fhrb", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(p.b.evaluate(x), dtype=float)
        x_new = np.asarray(p.a.evaluate(
            g, x - g * (2.0 * w - w_prev + np.asarray(p.c.evaluate(x), dtype=float))),
            dtype=float)
        w_prev = w
        res = _residual(x_new, x)
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(x, None, cfg.tol)


def fsdr_solve(p, cfg, x0, x_prev=None):
    """Forward shadow-Douglas-Rachford baseline (V = H).

        x_{n+1} = J_{gA}(x_n - g (B + C) x_n) - g (B x_n - B x_{n-1})

    Step sizes live in the cubic region of step_size_fsdr_max.
    """
    _require_step("fsdr", p.beta, p.zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    x = as_vector(x0)
    xm = x.copy() if x_prev is None else as_vector(x_prev)
    w_prev = np.asarray(p.b.evaluate(xm), dtype=float)

    trace = SolverTrace("fsdr", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(p.b.evaluate(x), dtype=float)
        x_new = np.asarray(p.a.evaluate(
            g, x - g * (w + np.asarray(p.c.evaluate(x), dtype=float))),
            dtype=float) - g * (w - w_prev)
        w_prev = w
        res = _residual(x_new, x)
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(x, None, cfg.tol)


def condat_vu_baseline_steps(op_norm, rho, safety=0.999):
    """Balanced tau = sigma under tau*(sigma*||L||^2 + rho/2) <= safety."""
    if op_norm == 0 and rho == 0:
        return 1.0, 1.0
    if op_norm == 0:
        t = 2.0 * safety / rho
        return t, t
    t = (-rho / 2.0 + math.sqrt(rho * rho / 4.0 + 4.0 * safety * op_norm ** 2)) \
        / (2.0 * op_norm ** 2)
    return t, t


def condat_vu_solve(f_prox, g_prox, h_grad, L, cfg, tau=None, sigma=None,
                    x0=None, u0=None):
    """Condat-Vu primal-dual baseline for min f(x) + g(Lx) + h(x).

        x_{n+1} = prox_{tau f}(x_n - tau (grad h(x_n) + L* u_n))
        u_{n+1} = prox_{sigma g*}(u_n + sigma L (2 x_{n+1} - x_n))

    g_prox is the prox of g itself; the conjugate prox is obtained through
    the Moreau decomposition.  Admissibility requires
    tau * (sigma * ||L||^2 + rho/2) < 1 with rho the Lipschitz constant of
    grad h; when tau, sigma are omitted a balanced pair is chosen under that
    bound with a 0.999 safety factor.
    """
    rho = h_grad.lipschitz
    op_norm = operator_norm_estimate(L, 200, cfg.seed)
    if tau is None or sigma is None:
        tau, sigma = condat_vu_baseline_steps(op_norm, rho)
    if tau <= 0 or sigma <= 0 or tau * (sigma * op_norm ** 2 + rho / 2.0) >= 1.0:
        msg = ("inadmissible Condat-Vu step sizes (tau=%g, sigma=%g)"
               % (tau, sigma))
        if not cfg.force:
            raise ValueError(msg)
        logger.warning("%s; proceeding under force", msg)
    x = np.zeros(L.cols) if x0 is None else as_vector(x0)
    u = np.zeros(L.rows) if u0 is None else as_vector(u0)

    trace = SolverTrace("condat-vu", tau)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        grad = np.asarray(h_grad.evaluate(x), dtype=float)
        x_new = np.asarray(f_prox.evaluate(
            tau, x - tau * (grad + np.asarray(L.adjoint(u), dtype=float))),
            dtype=float)
        u = prox_conjugate(g_prox, sigma,
                           u + sigma * np.asarray(L.forward(2.0 * x_new - x),
                                                  dtype=float))
        res = _residual(x_new, x)
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(x, u, cfg.tol)
