"""Solver paths for box-constrained TV-regularized least squares.

All experiment families minimize, over a box {lo <= x <= hi},

    (alpha1/2) ||M x - z||^2 + alpha2 ||G x||_1

with G a discrete gradient.  The kernel-lifted methods rewrite the data
term through the graph subspace V = ker(T), T(x, s) = M x - s, so the
M-dependent Lipschitz constant leaves the step-size bound:

  mtpd   frpib on the lifted pair, gamma = 0.999 * 2/(4||G|| + alpha1)
  cmtpd  fpisdr on the lifted pair, cubic step region in ||G|| and alpha1
  fhrb   product-space baseline without lifting, step shrinking as
         alpha1 ||M||^2
  condat-vu  primal-dual baseline on the unlifted problem

Each lifted method has a generic path (instantiating the composite
product-space solvers) and an optimized path (flattened recurrence with the
factorization cache); the two must coincide iterate for iterate.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .linalg import LinearMap, SpdSolveCache, operator_norm_estimate
from .multivariate import composite_frpib, composite_fpisdr
from .operators import (ForwardOp, ResolventOp, box_project, box_prox,
                        kernel_projector, l1_prox, lifted_difference_map)
from .splitting import (ProblemSpec, SolverConfig, SolverTrace, _require_step,
                        _residual, condat_vu_solve, fhrb_solve,
                        step_size_frpib_max, step_size_fsdr_max)

__all__ = [
    "TvlsqProblem",
    "tv_objective",
    "mtpd_step_size",
    "cmtpd_step_size",
    "fhrb_step_size",
    "mtpd_run",
    "cmtpd_run",
    "fhrb_run",
    "condat_vu_run",
]

SAFETY = 0.999


@dataclass
class TvlsqProblem:
    """One box-constrained TV least-squares instance.

    grad_norm is the operator-norm bound of the gradient map used by the
    step-size rules (2 for 1-D chains, sqrt(8) for 2-D images); the true
    norm is slightly smaller, so bound-based steps stay admissible.
    """

    M: LinearMap
    z: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    grad: LinearMap
    grad_norm: float
    alpha1: float
    alpha2: float

    @property
    def n(self):
        return self.M.cols

    @property
    def k(self):
        return self.M.rows


def tv_objective(prob, x):
    """(alpha1/2) ||M x - z||^2 + alpha2 ||G x||_1."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(prob.M.forward(x), dtype=float) - prob.z
    return float(0.5 * prob.alpha1 * np.dot(r, r)
                 + prob.alpha2 * np.abs(np.asarray(prob.grad.forward(x),
                                                   dtype=float)).sum())


def mtpd_step_size(prob):
    """0.999 * 2/(4 ||G|| + alpha1)."""
    return SAFETY * step_size_frpib_max(prob.grad_norm, prob.alpha1)


def cmtpd_step_size(prob):
    """0.999 times the positive root of
    2/3 - (2||G|| + alpha1) g - ||G||^2 alpha1 g^3."""
    return SAFETY * step_size_fsdr_max(prob.grad_norm, prob.alpha1)


def fhrb_step_size(prob, m_norm):
    """0.999 * 2/(4 ||G|| + alpha1 ||M||^2)."""
    return SAFETY * step_size_frpib_max(prob.grad_norm,
                                        prob.alpha1 * m_norm ** 2)


def _lifted_pieces(prob):
    n, k = prob.n, prob.k

    def f_eval(g, v):
        v = np.asarray(v, dtype=float)
        return np.concatenate([box_project(v[:n], prob.lo, prob.hi), v[n:]])

    f_prox = ResolventOp(f_eval, descriptor="box-on-x-block")

    def h_eval(v):
        v = np.asarray(v, dtype=float)
        return np.concatenate([np.zeros(n), prob.alpha1 * (v[n:] - prob.z)])

    h_grad = ForwardOp(h_eval, lipschitz=prob.alpha1,
                       cocoercivity_inverse=prob.alpha1,
                       descriptor="lsq-on-s-block")

    G = prob.grad

    def L_fwd(v):
        return np.asarray(G.forward(np.asarray(v, dtype=float)[:n]), dtype=float)

    def L_adj(u):
        return np.concatenate([np.asarray(G.adjoint(u), dtype=float),
                               np.zeros(k)])

    L = LinearMap(G.rows, n + k, L_fwd, L_adj)
    V = kernel_projector(lifted_difference_map(prob.M))
    return f_prox, l1_prox(prob.alpha2), h_grad, L, V


def _fill_gamma(cfg, gamma):
    if cfg.gamma is not None:
        return cfg
    return replace(cfg, gamma=gamma)


def mtpd_run(prob, cfg, use_generic=False):
    """Kernel-lifted frpib run; returns the trace over the lifted primal.

    trace.solution holds the box-projected x block.
    """
    cfg = _fill_gamma(cfg, mtpd_step_size(prob))
    if use_generic:
        f_prox, g_prox, h_grad, L, V = _lifted_pieces(prob)
        trace = composite_frpib(f_prox, g_prox, h_grad, L, V, cfg)
    else:
        trace = _mtpd_optimized(prob, cfg)
    trace.solution = box_project(trace.x[:prob.n], prob.lo, prob.hi)
    return trace


def cmtpd_run(prob, cfg, use_generic=False):
    """Kernel-lifted fpisdr run; layout as mtpd_run."""
    cfg = _fill_gamma(cfg, cmtpd_step_size(prob))
    if use_generic:
        f_prox, g_prox, h_grad, L, V = _lifted_pieces(prob)
        trace = composite_fpisdr(f_prox, g_prox, h_grad, L, V, cfg)
    else:
        trace = _cmtpd_optimized(prob, cfg)
    trace.solution = box_project(trace.x[:prob.n], prob.lo, prob.hi)
    return trace


def _mtpd_optimized(prob, cfg):
    """Flattened kernel-lifted frpib recurrence.

    Primal pair (x, s) with s tracking M x on V; conjugate prox of the
    l1 dual is the interval clamp.  Two cache solves per iteration.
    """
    _require_step("mtpd", prob.grad_norm, prob.alpha1, cfg.gamma, cfg.force)
    g = cfg.gamma
    n = prob.n
    a1, a2 = prob.alpha1, prob.alpha2
    M, G = prob.M, prob.grad
    cache = SpdSolveCache(M)

    x = np.zeros(n)
    s = np.zeros(prob.k)
    y1 = np.zeros(n)
    y2 = np.zeros(prob.k)
    u = np.zeros(G.rows)
    w1x_prev = np.asarray(G.adjoint(u), dtype=float)
    w2_prev = -np.asarray(G.forward(x), dtype=float)
    # stopping variable of the lifted run: (x + g y1, s + g y2, u)
    z = np.concatenate([x + g * y1, s + g * y2, u])

    trace = SolverTrace("mtpd", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w1x = np.asarray(G.adjoint(u), dtype=float)
        w2 = -np.asarray(G.forward(x), dtype=float)
        # q = P_V(2 w1 - w1_prev + grad h): x-part a, s-part c
        a = 2.0 * w1x - w1x_prev
        c = a1 * (s - prob.z)
        qx = cache.solve(a + np.asarray(M.adjoint(c), dtype=float))
        qs = np.asarray(M.forward(qx), dtype=float)
        p1 = box_project(x + g * y1 - g * qx, prob.lo, prob.hi)
        p2 = s + g * y2 - g * qs
        u = np.clip(u - g * (2.0 * w2 - w2_prev), -a2, a2)
        xt = cache.solve(p1 + np.asarray(M.adjoint(p2), dtype=float))
        st = np.asarray(M.forward(xt), dtype=float)
        y1 = y1 - (p1 - xt) / g
        y2 = y2 - (p2 - st) / g
        w1x_prev, w2_prev = w1x, w2
        z_new = np.concatenate([xt + g * y1, st + g * y2, u])
        res = _residual(z_new, z)
        z = z_new
        x, s = xt, st
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(np.concatenate([x, s]), res,
                     (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(np.concatenate([x, s]), np.concatenate([y1, y2]),
                        cfg.tol)


def _cmtpd_optimized(prob, cfg):
    """Flattened kernel-lifted fpisdr recurrence (three cache solves)."""
    _require_step("cmtpd", prob.grad_norm, prob.alpha1, cfg.gamma, cfg.force)
    g = cfg.gamma
    n = prob.n
    a1, a2 = prob.alpha1, prob.alpha2
    M, G = prob.M, prob.grad
    cache = SpdSolveCache(M)

    def project(a, c):
        xt = cache.solve(a + np.asarray(M.adjoint(c), dtype=float))
        return xt, np.asarray(M.forward(xt), dtype=float)

    x = np.zeros(n)
    s = np.zeros(prob.k)
    y1 = np.zeros(n)
    y2 = np.zeros(prob.k)
    u = np.zeros(G.rows)
    m1_prev = project(np.asarray(G.adjoint(u), dtype=float), np.zeros(prob.k))
    w2_prev = -np.asarray(G.forward(x), dtype=float)
    z = np.concatenate([x + g * y1, s + g * y2, u])

    trace = SolverTrace("cmtpd", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w1x = np.asarray(G.adjoint(u), dtype=float)
        w2 = -np.asarray(G.forward(x), dtype=float)
        m1 = project(w1x, np.zeros(prob.k))
        c1 = project(np.zeros(n), a1 * (s - prob.z))
        p1 = box_project(x + g * y1 - g * (m1[0] + c1[0]), prob.lo, prob.hi)
        p2 = s + g * y2 - g * (m1[1] + c1[1])
        pv = project(p1, p2)
        x_new = pv[0] - g * (m1[0] - m1_prev[0])
        s_new = pv[1] - g * (m1[1] - m1_prev[1])
        y1 = y1 - (p1 - pv[0]) / g
        y2 = y2 - (p2 - pv[1]) / g
        u = np.clip(u - g * w2, -a2, a2) - g * (w2 - w2_prev)
        m1_prev, w2_prev = m1, w2
        z_new = np.concatenate([x_new + g * y1, s_new + g * y2, u])
        res = _residual(z_new, z)
        z = z_new
        x, s = x_new, s_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(np.concatenate([x, s]), res,
                     (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if res <= cfg.tol:
            break
    return trace.finish(np.concatenate([x, s]), np.concatenate([y1, y2]),
                        cfg.tol)


def fhrb_run(prob, cfg, m_norm=None):
    """Product-space baseline on the pair (x, u) without kernel lifting.

    A clamps blockwise (box on x, l1-conjugate interval on u), B is the skew
    gradient coupling with beta = ||G||, C carries the full data-term
    gradient with zeta = alpha1 ||M||^2.  trace.solution holds the x block.
    """
    n = prob.n
    a1, a2 = prob.alpha1, prob.alpha2
    M, G = prob.M, prob.grad
    if m_norm is None:
        m_norm = operator_norm_estimate(M, 200, cfg.seed)
    cfg = _fill_gamma(cfg, fhrb_step_size(prob, m_norm))
    r = G.rows

    def a_eval(g, v):
        v = np.asarray(v, dtype=float)
        return np.concatenate([box_project(v[:n], prob.lo, prob.hi),
                               np.clip(v[n:], -a2, a2)])

    def b_eval(v):
        v = np.asarray(v, dtype=float)
        return np.concatenate([np.asarray(G.adjoint(v[n:]), dtype=float),
                               -np.asarray(G.forward(v[:n]), dtype=float)])

    def c_eval(v):
        v = np.asarray(v, dtype=float)
        grad = a1 * np.asarray(
            M.adjoint(np.asarray(M.forward(v[:n]), dtype=float) - prob.z),
            dtype=float)
        return np.concatenate([grad, np.zeros(r)])

    bundle = ProblemSpec(
        a=ResolventOp(a_eval, descriptor="box-x-interval-u"),
        b=ForwardOp(b_eval, lipschitz=prob.grad_norm, descriptor="skew-grad"),
        c=ForwardOp(c_eval, cocoercivity_inverse=a1 * m_norm ** 2,
                    descriptor="lsq-grad"))
    trace = fhrb_solve(bundle, cfg, np.zeros(n + r))
    trace.solution = trace.x[:n]
    trace.m_norm = m_norm
    return trace


def condat_vu_run(prob, cfg, m_norm=None):
    """Condat-Vu baseline: f = box indicator, g = alpha2 l1, h = data term.

    cfg.gamma, when set, is used as the common value of tau and sigma.
    """
    a1 = prob.alpha1
    M = prob.M
    if m_norm is None:
        m_norm = operator_norm_estimate(M, 200, cfg.seed)

    f_prox = box_prox(prob.lo, prob.hi)
    g_prox = l1_prox(prob.alpha2)

    def h_eval(x):
        x = np.asarray(x, dtype=float)
        return a1 * np.asarray(
            M.adjoint(np.asarray(M.forward(x), dtype=float) - prob.z),
            dtype=float)

    h_grad = ForwardOp(h_eval, lipschitz=a1 * m_norm ** 2,
                       descriptor="lsq-grad")
    trace = condat_vu_solve(f_prox, g_prox, h_grad, prob.grad, cfg,
                            tau=cfg.gamma, sigma=cfg.gamma)
    trace.solution = trace.x
    trace.m_norm = m_norm
    return trace
