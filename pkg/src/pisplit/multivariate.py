"""Product-space solvers: multivariate primal-dual, composite, consensus.

The blockwise recurrences here are hand-specialized; ``stacked_problem`` and
``consensus_stacked_problem`` build the equivalent single-inclusion operator
bundles on the product space so the generic solvers in ``splitting`` can be
run as independent oracles against the block implementations.
"""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .linalg import as_vector
from .operators import (ForwardOp, ResolventOp, SubspaceProjector,
                        identity_projector, resolvent_of_inverse, zero_forward)
from .splitting import (ProblemSpec, SolverTrace, _require_step, _residual,
                        frpib_solve, fpisdr_solve)

__all__ = [
    "MultiProblemSpec",
    "ConsensusSpec",
    "lifted_constants",
    "stacked_problem",
    "consensus_stacked_problem",
    "frpib_multi_solve",
    "fpisdr_multi_solve",
    "composite_frpib",
    "composite_fpisdr",
    "consensus_frpib_solve",
    "consensus_fpisdr_solve",
]


def _split(vec, dims):
    out = []
    at = 0
    for d in dims:
        out.append(vec[at:at + d])
        at += d
    return out


def _join(blocks):
    return np.concatenate([np.asarray(b, dtype=float) for b in blocks])


@dataclass
class MultiProblemSpec:
    """Block description of the coupled inclusion

        0 in A_i x_i + sum_j L*_{i,j} (M_j par N_j par D_j)(sum_i L_{i,j} x_i)
             + B_i(x_1..x_I) + C_i x_i + N_{V_i} x_i.

    primal_dims / dual_dims fix the block sizes.  ``L[i][j]`` maps primal
    block i into dual block j (None encodes a zero coupling).  ``b`` acts on
    the stacked primal vector with Lipschitz constant beta-tilde; dual blocks
    carry N_j^{-1} (nu_j-Lipschitz) and D_j^{-1} (1/delta_j-cocoercive,
    declared through cocoercivity_inverse = delta_j).
    """

    primal_dims: List[int]
    dual_dims: List[int]
    a_list: List[ResolventOp]
    m_list: List[ResolventOp]
    L: List[List[Optional[object]]]
    c_list: Optional[List[ForwardOp]] = None
    v_list: Optional[List[SubspaceProjector]] = None
    b: Optional[ForwardOp] = None
    n_inv_list: Optional[List[ForwardOp]] = None
    d_inv_list: Optional[List[ForwardOp]] = None

    def __post_init__(self):
        I, J = len(self.primal_dims), len(self.dual_dims)
        if len(self.a_list) != I or len(self.m_list) != J:
            raise ValueError("operator list lengths must match block counts")
        if len(self.L) != I or any(len(row) != J for row in self.L):
            raise ValueError("L must be an I x J nested list")
        if self.c_list is None:
            self.c_list = [zero_forward() for _ in range(I)]
        if self.v_list is None:
            self.v_list = [identity_projector() for _ in range(I)]
        if self.b is None:
            self.b = zero_forward()
        if self.n_inv_list is None:
            self.n_inv_list = [zero_forward() for _ in range(J)]
        if self.d_inv_list is None:
            self.d_inv_list = [zero_forward() for _ in range(J)]

    @property
    def counts(self):
        return len(self.primal_dims), len(self.dual_dims)


def _coupling_norm(Lij):
    if Lij is None:
        return 0.0
    return float(np.linalg.norm(Lij.to_dense(), 2))


def lifted_constants(spec):
    """Constants of the stacked inclusion.

    ell = sum_j (sum_i ||L_{i,j}||)^2, beta = max(beta-tilde, nu_j) +
    sqrt(ell), zeta = max(zeta_i, delta_j).  sqrt(ell) upper-bounds the norm
    of the stacked skew coupling.
    """
    I, J = spec.counts
    ell = 0.0
    for j in range(J):
        col = sum(_coupling_norm(spec.L[i][j]) for i in range(I))
        ell += col * col
    nu = max((op.lipschitz for op in spec.n_inv_list), default=0.0)
    beta = max(spec.b.lipschitz, nu) + math.sqrt(ell)
    zeta_primal = max((op.cocoercivity_inverse for op in spec.c_list), default=0.0)
    delta = max((op.cocoercivity_inverse for op in spec.d_inv_list), default=0.0)
    return ell, beta, max(zeta_primal, delta)


def _apply_L_adjoint(spec, u_blocks, i):
    out = np.zeros(spec.primal_dims[i])
    for j, u in enumerate(u_blocks):
        Lij = spec.L[i][j]
        if Lij is not None:
            out += np.asarray(Lij.adjoint(u), dtype=float)
    return out


def _apply_L_forward(spec, x_blocks, j):
    out = np.zeros(spec.dual_dims[j])
    for i, x in enumerate(x_blocks):
        Lij = spec.L[i][j]
        if Lij is not None:
            out += np.asarray(Lij.forward(x), dtype=float)
    return out


def stacked_problem(spec):
    """Single-inclusion operator bundle on the product space.

    Stacks primal blocks then dual blocks.  The skew coupling follows the
    saddle convention (+L* u into primal rows, -L x into dual rows), the
    resolvent applies J_{gamma A_i} on primal and J_{gamma M_j^{-1}} on dual
    blocks, and the projector acts per primal block with identities on the
    duals.  Returns (ProblemSpec, dims) with dims the full block-size list.
    """
    I, J = spec.counts
    dims = list(spec.primal_dims) + list(spec.dual_dims)
    n_primal = len(spec.primal_dims)
    ell, beta, zeta = lifted_constants(spec)

    def a_eval(g, v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        out = [spec.a_list[i].evaluate(g, blocks[i]) for i in range(I)]
        out += [resolvent_of_inverse(spec.m_list[j], g, blocks[n_primal + j])
                for j in range(J)]
        return _join(out)

    def b_eval(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        xs, us = blocks[:n_primal], blocks[n_primal:]
        bx = _split(np.asarray(spec.b.evaluate(_join(xs)), dtype=float),
                    spec.primal_dims)
        out = [bx[i] + _apply_L_adjoint(spec, us, i) for i in range(I)]
        out += [np.asarray(spec.n_inv_list[j].evaluate(us[j]), dtype=float)
                - _apply_L_forward(spec, xs, j) for j in range(J)]
        return _join(out)

    def c_eval(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        out = [np.asarray(spec.c_list[i].evaluate(blocks[i]), dtype=float)
               for i in range(I)]
        out += [np.asarray(spec.d_inv_list[j].evaluate(blocks[n_primal + j]),
                           dtype=float) for j in range(J)]
        return _join(out)

    def project(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        out = [np.asarray(spec.v_list[i].project(blocks[i]), dtype=float)
               for i in range(I)]
        out += [np.asarray(b, dtype=float).copy() for b in blocks[n_primal:]]
        return _join(out)

    bundle = ProblemSpec(
        a=ResolventOp(a_eval, descriptor="stacked-blocks"),
        b=ForwardOp(b_eval, lipschitz=beta, descriptor="stacked-skew"),
        c=ForwardOp(c_eval, cocoercivity_inverse=zeta, descriptor="stacked-cocoercive"),
        v=SubspaceProjector(project, descriptor="stacked-subspace"))
    return bundle, dims


def _multi_initials(spec, x0, x_prev, y0, u0, u_prev):
    I, J = spec.counts
    xs = ([np.zeros(d) for d in spec.primal_dims] if x0 is None
          else [as_vector(b) for b in x0])
    xs = [np.asarray(spec.v_list[i].project(xs[i]), dtype=float) for i in range(I)]
    if x_prev is None:
        xms = [x.copy() for x in xs]
    else:
        xms = [np.asarray(spec.v_list[i].project(as_vector(b)), dtype=float)
               for i, b in enumerate(x_prev)]
    ys = ([np.zeros(d) for d in spec.primal_dims] if y0 is None
          else [np.asarray(spec.v_list[i].complement(as_vector(b)), dtype=float)
                for i, b in enumerate(y0)])
    us = ([np.zeros(d) for d in spec.dual_dims] if u0 is None
          else [as_vector(b) for b in u0])
    if u_prev is None:
        ums = [u.copy() for u in us]
    else:
        ums = [as_vector(b) for b in u_prev]
    return xs, xms, ys, us, ums


def _forward_terms(spec, xs, us):
    I, J = spec.counts
    bx = _split(np.asarray(spec.b.evaluate(_join(xs)), dtype=float),
                spec.primal_dims)
    w1 = [bx[i] + _apply_L_adjoint(spec, us, i) for i in range(I)]
    w2 = [np.asarray(spec.n_inv_list[j].evaluate(us[j]), dtype=float)
          - _apply_L_forward(spec, xs, j) for j in range(J)]
    return w1, w2


def frpib_multi_solve(spec, cfg, x0=None, x_prev=None, y0=None, u0=None,
                      u_prev=None):
    """Blockwise forward-reflected partial-inverse iteration.

    Primal blocks follow the frpib recurrence with reflected coupling terms
    w1_i = B_i x + sum_j L*_{i,j} u_j; dual blocks run the same scheme on
    M_j^{-1} (through the operator Moreau identity) with forward terms
    w2_j = N_j^{-1} u_j - sum_i L_{i,j} x_i and cocoercive part D_j^{-1}.
    Returns (primal_trace, dual_trace); stopping is driven by the primal
    residual.
    """
    I, J = spec.counts
    ell, beta, zeta = lifted_constants(spec)
    _require_step("frpib", beta, zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    xs, xms, ys, us, ums = _multi_initials(spec, x0, x_prev, y0, u0, u_prev)
    w1_prev, w2_prev = _forward_terms(spec, xms, ums)
    z = np.concatenate([_join([xs[i] + g * ys[i] for i in range(I)]),
                        _join(us)])

    tp = SolverTrace("frpib-multi", g)
    td = SolverTrace("frpib-multi-dual", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w1, w2 = _forward_terms(spec, xs, us)
        xs_new, ys_new = [], []
        for i in range(I):
            ci = np.asarray(spec.c_list[i].evaluate(xs[i]), dtype=float)
            ui = xs[i] + g * ys[i] - g * np.asarray(
                spec.v_list[i].project(2.0 * w1[i] - w1_prev[i] + ci), dtype=float)
            pi = np.asarray(spec.a_list[i].evaluate(g, ui), dtype=float)
            xi = np.asarray(spec.v_list[i].project(pi), dtype=float)
            ys_new.append(ys[i] - (pi - xi) / g)
            xs_new.append(xi)
        us_new = []
        for j in range(J):
            dj = np.asarray(spec.d_inv_list[j].evaluate(us[j]), dtype=float)
            uj = us[j] - g * (2.0 * w2[j] - w2_prev[j] + dj)
            us_new.append(resolvent_of_inverse(spec.m_list[j], g, uj))
        w1_prev, w2_prev = w1, w2
        # same stopping variable as the stacked single-inclusion run:
        # z = (x_i + g y_i, u_j); dual blocks carry no multiplier.
        z_new = np.concatenate(
            [_join([xs_new[i] + g * ys_new[i] for i in range(I)]),
             _join(us_new)])
        res_p = _residual(z_new, z)
        res_d = _residual(_join(us_new), _join(us)) if J else 0.0
        z = z_new
        xs, ys, us = xs_new, ys_new, us_new
        now = (time.perf_counter() - t0) * 1e3
        tp.record(_join(xs), res_p, now, keep_iterate=cfg.record_iterates)
        td.record(_join(us), res_d, now, keep_iterate=cfg.record_iterates)
        if res_p <= cfg.tol:
            break
    tp.finish(_join(xs), _join(ys), cfg.tol)
    td.finish(_join(us) if J else np.zeros(0), None, cfg.tol)
    tp.blocks = xs
    td.blocks = us
    return tp, td


def fpisdr_multi_solve(spec, cfg, x0=None, x_prev=None, y0=None, u0=None,
                       u_prev=None):
    """Blockwise forward partial-inverse shadow-DR iteration.

    The difference correction enters inside the primal projections,
    x_i <- P_{V_i}(p_i - g (w1_i - w1_i[prev])), and after the dual
    resolvent; the dual certificate update removes the V_i-perp part of p_i.
    """
    I, J = spec.counts
    ell, beta, zeta = lifted_constants(spec)
    _require_step("fpisdr", beta, zeta, cfg.gamma, cfg.force)
    g = cfg.gamma
    xs, xms, ys, us, ums = _multi_initials(spec, x0, x_prev, y0, u0, u_prev)
    w1_prev, w2_prev = _forward_terms(spec, xms, ums)
    m_prev = [np.asarray(spec.v_list[i].project(w1_prev[i]), dtype=float)
              for i in range(I)]
    z = np.concatenate([_join([xs[i] + g * ys[i] for i in range(I)]),
                        _join(us)])

    tp = SolverTrace("fpisdr-multi", g)
    td = SolverTrace("fpisdr-multi-dual", g)
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w1, w2 = _forward_terms(spec, xs, us)
        m1 = [np.asarray(spec.v_list[i].project(w1[i]), dtype=float)
              for i in range(I)]
        xs_new, ys_new = [], []
        for i in range(I):
            ci = np.asarray(spec.c_list[i].evaluate(xs[i]), dtype=float)
            ui = xs[i] + g * ys[i] - g * (m1[i] + np.asarray(
                spec.v_list[i].project(ci), dtype=float))
            pi = np.asarray(spec.a_list[i].evaluate(g, ui), dtype=float)
            pvi = np.asarray(spec.v_list[i].project(pi), dtype=float)
            xs_new.append(pvi - g * (m1[i] - m_prev[i]))
            ys_new.append(ys[i] - (pi - pvi) / g)
        us_new = []
        for j in range(J):
            dj = np.asarray(spec.d_inv_list[j].evaluate(us[j]), dtype=float)
            uj = us[j] - g * (w2[j] + dj)
            us_new.append(resolvent_of_inverse(spec.m_list[j], g, uj)
                          - g * (w2[j] - w2_prev[j]))
        w2_prev = w2
        m_prev = m1
        z_new = np.concatenate(
            [_join([xs_new[i] + g * ys_new[i] for i in range(I)]),
             _join(us_new)])
        res_p = _residual(z_new, z)
        res_d = _residual(_join(us_new), _join(us)) if J else 0.0
        z = z_new
        xs, ys, us = xs_new, ys_new, us_new
        now = (time.perf_counter() - t0) * 1e3
        tp.record(_join(xs), res_p, now, keep_iterate=cfg.record_iterates)
        td.record(_join(us), res_d, now, keep_iterate=cfg.record_iterates)
        if res_p <= cfg.tol:
            break
    tp.finish(_join(xs), _join(ys), cfg.tol)
    td.finish(_join(us) if J else np.zeros(0), None, cfg.tol)
    tp.blocks = xs
    td.blocks = us
    return tp, td


def _composite_spec(f_prox, g_prox, h_grad, L, V):
    return MultiProblemSpec(
        primal_dims=[L.cols], dual_dims=[L.rows],
        a_list=[f_prox], m_list=[g_prox], L=[[L]],
        c_list=[h_grad], v_list=[V])


def composite_frpib(f_prox, g_prox, h_grad, L, V, cfg, x0=None, x_prev=None,
                    y0=None, u0=None, u_prev=None):
    """Composite-minimization instantiation: min over V of f + h + g(L().

    Single primal block (A = subdifferential of f, C = grad h) coupled to a
    single dual block (M = subdifferential of g) through L; the dual
    resolvent is the conjugate prox.  Step region ]0, 2/(4||L|| + rho)[.
    Returns the primal trace with the final dual point attached as
    ``trace.dual_u``.
    """
    spec = _composite_spec(f_prox, g_prox, h_grad, L, V)
    tp, td = frpib_multi_solve(
        spec, cfg,
        x0=None if x0 is None else [x0],
        x_prev=None if x_prev is None else [x_prev],
        y0=None if y0 is None else [y0],
        u0=None if u0 is None else [u0],
        u_prev=None if u_prev is None else [u_prev])
    tp.dual_u = td.x
    return tp


def composite_fpisdr(f_prox, g_prox, h_grad, L, V, cfg, x0=None, x_prev=None,
                     y0=None, u0=None, u_prev=None):
    """Shadow-DR flavor of composite_frpib; cubic step region
    2/3 - (2||L|| + rho) g - ||L||^2 rho g^3 > 0."""
    spec = _composite_spec(f_prox, g_prox, h_grad, L, V)
    tp, td = fpisdr_multi_solve(
        spec, cfg,
        x0=None if x0 is None else [x0],
        x_prev=None if x_prev is None else [x_prev],
        y0=None if y0 is None else [y0],
        u0=None if u0 is None else [u0],
        u_prev=None if u_prev is None else [u_prev])
    tp.dual_u = td.x
    return tp


# ---------------------------------------------------------------------------
# consensus solvers


@dataclass
class ConsensusSpec:
    """Sum-of-operators problem 0 in sum_k A_k x + Bx + Cx.

    weights must be positive and sum to 1 (default uniform); resolvents of
    A_k / omega_k are exact rescalings J_{(gamma/omega_k) A_k}, which is why
    every ResolventOp must accept arbitrary positive steps.
    """

    a_list: List[ResolventOp]
    weights: Optional[np.ndarray] = None
    b: Optional[ForwardOp] = None
    c: Optional[ForwardOp] = None

    def __post_init__(self):
        K = len(self.a_list)
        if K < 1:
            raise ValueError("need at least one operator")
        if self.weights is None:
            self.weights = np.full(K, 1.0 / K)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (K,) or np.any(self.weights <= 0):
            raise ValueError("weights must be positive, one per operator")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if self.b is None:
            self.b = zero_forward()
        if self.c is None:
            self.c = zero_forward()


def _consensus_initials(spec, x0, x_prev, y0):
    K = len(spec.a_list)
    x = as_vector(x0)
    xm = x.copy() if x_prev is None else as_vector(x_prev)
    if y0 is None:
        ys = [np.zeros_like(x) for _ in range(K)]
    else:
        ys = [as_vector(b) for b in y0]
        lift = sum(w * y for w, y in zip(spec.weights, ys))
        if np.linalg.norm(lift) > 1e-10 * (1.0 + max(np.linalg.norm(y) for y in ys)):
            raise ValueError("initial multipliers must satisfy "
                             "sum_k omega_k y0^k = 0")
    return x, xm, ys


def consensus_frpib_solve(spec, cfg, x0, x_prev=None, y0=None):
    """Weighted consensus frpib iteration.

        q_n = x_n - g (2 w_n - w_{n-1} + C x_n),    w_n = B x_n
        p_n^k = J_{(g/omega_k) A_k}(g y_n^k + q_n)
        x_{n+1} = sum_k omega_k p_n^k
        y_{n+1}^k = y_n^k - (p_n^k - x_{n+1}) / g

    The weighted multiplier sum is conserved (zero) along the run.
    """
    _require_step("frpib", spec.b.lipschitz, spec.c.cocoercivity_inverse,
                  cfg.gamma, cfg.force)
    g = cfg.gamma
    x, xm, ys = _consensus_initials(spec, x0, x_prev, y0)
    w_prev = np.asarray(spec.b.evaluate(xm), dtype=float)
    z = np.concatenate([x + g * yk for yk in ys])

    trace = SolverTrace("consensus-frpib", g)
    mult_hist = []
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(spec.b.evaluate(x), dtype=float)
        q = x - g * (2.0 * w - w_prev + np.asarray(spec.c.evaluate(x), dtype=float))
        ps = [np.asarray(a.evaluate(g / wk, g * yk + q), dtype=float)
              for a, wk, yk in zip(spec.a_list, spec.weights, ys)]
        x_new = sum(wk * pk for wk, pk in zip(spec.weights, ps))
        ys = [yk - (pk - x_new) / g for yk, pk in zip(ys, ps)]
        w_prev = w
        z_new = np.concatenate([x_new + g * yk for yk in ys])
        res = _residual(z_new, z)
        z = z_new
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if cfg.record_iterates:
            mult_hist.append(np.stack(ys))
        if res <= cfg.tol:
            break
    trace.finish(x, _join(ys), cfg.tol)
    trace.multipliers = ys
    trace.multiplier_history = mult_hist
    return trace


def consensus_fpisdr_solve(spec, cfg, x0, x_prev=None, y0=None):
    """Weighted consensus shadow-DR iteration.

        q_n = x_n - g (w_n + C x_n)
        p_n^k = J_{(g/omega_k) A_k}(g y_n^k + q_n)
        x_{n+1} = sum_k omega_k p_n^k - g (w_n - w_{n-1})
        y_{n+1}^k = y_n^k - (p_n^k - sum_j omega_j p_n^j) / g
    """
    _require_step("fpisdr", spec.b.lipschitz, spec.c.cocoercivity_inverse,
                  cfg.gamma, cfg.force)
    g = cfg.gamma
    x, xm, ys = _consensus_initials(spec, x0, x_prev, y0)
    w_prev = np.asarray(spec.b.evaluate(xm), dtype=float)
    z = np.concatenate([x + g * yk for yk in ys])

    trace = SolverTrace("consensus-fpisdr", g)
    mult_hist = []
    t0 = time.perf_counter()
    for _ in range(cfg.max_iters):
        w = np.asarray(spec.b.evaluate(x), dtype=float)
        q = x - g * (w + np.asarray(spec.c.evaluate(x), dtype=float))
        ps = [np.asarray(a.evaluate(g / wk, g * yk + q), dtype=float)
              for a, wk, yk in zip(spec.a_list, spec.weights, ys)]
        avg = sum(wk * pk for wk, pk in zip(spec.weights, ps))
        x_new = avg - g * (w - w_prev)
        ys = [yk - (pk - avg) / g for yk, pk in zip(ys, ps)]
        w_prev = w
        z_new = np.concatenate([x_new + g * yk for yk in ys])
        res = _residual(z_new, z)
        z = z_new
        x = x_new
        obj = None if cfg.objective_fn is None else cfg.objective_fn(x)
        trace.record(x, res, (time.perf_counter() - t0) * 1e3, obj,
                     keep_iterate=cfg.record_iterates)
        if cfg.record_iterates:
            mult_hist.append(np.stack(ys))
        if res <= cfg.tol:
            break
    trace.finish(x, _join(ys), cfg.tol)
    trace.multipliers = ys
    trace.multiplier_history = mult_hist
    return trace


def consensus_stacked_problem(spec, dim):
    """Operator bundle on the K-fold product carrying the omega-weighted
    inner product.

    Resolvents rescale per block (J_{(g/omega_k) A_k}), B and C act
    blockwise, and the projector averages with the weights:
    P(z)_k = sum_j omega_j z_j, which is the orthogonal projector onto the
    diagonal in the omega-product and is self-adjoint there.
    """
    K = len(spec.a_list)
    dims = [dim] * K

    def a_eval(g, v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        return _join([spec.a_list[k].evaluate(g / spec.weights[k], blocks[k])
                      for k in range(K)])

    def b_eval(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        return _join([np.asarray(spec.b.evaluate(b), dtype=float)
                      for b in blocks])

    def c_eval(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        return _join([np.asarray(spec.c.evaluate(b), dtype=float)
                      for b in blocks])

    def project(v):
        blocks = _split(np.asarray(v, dtype=float), dims)
        avg = sum(w * b for w, b in zip(spec.weights, blocks))
        return _join([avg] * K)

    bundle = ProblemSpec(
        a=ResolventOp(a_eval, descriptor="consensus-blocks"),
        b=ForwardOp(b_eval, lipschitz=spec.b.lipschitz,
                    descriptor="consensus-b"),
        c=ForwardOp(c_eval, cocoercivity_inverse=spec.c.cocoercivity_inverse,
                    descriptor="consensus-c"),
        v=SubspaceProjector(project, descriptor="weighted-diagonal"))
    return bundle, dims
