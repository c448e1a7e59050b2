"""Seeded property suites over the operator and solver contracts.

Each suite draws its own randomness from the given seed, checks one family
of identities at a fixed tolerance, and returns (passed, detail).  The
suites back both the `validate` CLI subcommand and the test suite, so a
failure seen in CI reproduces from the printed seed.
"""

import math

import numpy as np

from .linalg import LinearMap, adjoint_gap, operator_norm_estimate
from .multivariate import (ConsensusSpec, MultiProblemSpec, ProblemSpec,
                           consensus_frpib_solve, consensus_fpisdr_solve,
                           lifted_constants, stacked_problem)
from .operators import (affine_forward, affine_resolvent, box_prox,
                        discrete_gradient_1d, discrete_gradient_2d,
                        identity_projector, l1_prox,
                        partial_inverse_resolvent, prox_conjugate,
                        span_projector)
from .splitting import (SolverConfig, fhrb_solve, frpib_solve, fpisdr_solve,
                        fsdr_solve, step_size_frpib_max, step_size_fsdr_max,
                        validate_step_size)

__all__ = ["SUITES", "run_suite", "run_all"]


def _rand_spd_affine(rng, n, monotone_shift=0.5):
    """Random monotone affine operator x -> A0 x + a (A0 + A0^T >= 0)."""
    Q = rng.standard_normal((n, n))
    skew = rng.standard_normal((n, n))
    A0 = Q @ Q.T / n + monotone_shift * np.eye(n) + (skew - skew.T) / 2.0
    a = rng.standard_normal(n)
    return A0, a


def _rand_subspace(rng, n, dim):
    basis = rng.standard_normal((n, dim))
    return span_projector(basis)


def suite_moreau(seed=0, iters=200):
    """Conjugate-prox identities against independent closed forms.

    The l1 conjugate prox must equal the interval clamp, and the prox plus
    the scaled conjugate prox must reassemble the input; box proxes are
    certified through the subgradient inequality of the indicator.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(iters):
        n = int(rng.integers(1, 12))
        alpha = float(rng.uniform(0.1, 3.0))
        g = float(rng.uniform(0.05, 5.0))
        v = rng.standard_normal(n) * 3.0
        f = l1_prox(alpha)
        clip = np.clip(v, -alpha, alpha)
        worst = max(worst, float(np.max(np.abs(
            prox_conjugate(f, g, v) - clip))))
        # reassembly: prox_{g f}(v) + g * prox_{f*/g}(v/g) = v
        p = np.asarray(f.evaluate(g, v), dtype=float)
        conj = prox_conjugate(f, 1.0 / g, v / g)
        worst = max(worst, float(np.max(np.abs(p + g * conj - v))))
        lo = -np.abs(rng.standard_normal(n)) - 0.1
        hi = np.abs(rng.standard_normal(n)) + 0.1
        b = box_prox(lo, hi)
        q = np.asarray(b.evaluate(g, v), dtype=float)
        # (v - q)/g must sit in the normal cone at q: <(v-q)/g, y-q> <= 0
        for _ in range(5):
            y = rng.uniform(lo, hi)
            if float(np.dot((v - q) / g, y - q)) > 1e-10:
                return False, "box normal-cone certificate violated"
    return worst <= 1e-10, "max deviation %.3g" % worst


def suite_firm_nonexpansive(seed=0, iters=200):
    """<Jx - Jy, x - y> >= ||Jx - Jy||^2 for sampled resolvents."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(iters):
        n = int(rng.integers(2, 10))
        A0, a = _rand_spd_affine(rng, n)
        res = [l1_prox(float(rng.uniform(0.1, 2.0))),
               box_prox(-np.abs(rng.standard_normal(n)),
                        np.abs(rng.standard_normal(n))),
               affine_resolvent(A0, a)]
        g = float(rng.uniform(0.05, 4.0))
        x = rng.standard_normal(n) * 2.0
        y = rng.standard_normal(n) * 2.0
        for J in res:
            jx = np.asarray(J.evaluate(g, x), dtype=float)
            jy = np.asarray(J.evaluate(g, y), dtype=float)
            gap = float(np.dot(jx - jy, x - y) - np.dot(jx - jy, jx - jy))
            worst = min(worst, gap)
    return worst >= -1e-10, "worst firmness gap %.3g" % worst


def suite_adjoint(seed=0, iters=50):
    """adjoint_gap on dense random maps and both gradient stencils."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(iters):
        r = int(rng.integers(1, 12))
        c = int(rng.integers(1, 12))
        worst = max(worst, adjoint_gap(
            LinearMap.from_matrix(rng.standard_normal((r, c))),
            samples=20, seed=int(rng.integers(2 ** 31))))
    worst = max(worst, adjoint_gap(discrete_gradient_1d(17), samples=50, seed=seed))
    worst = max(worst, adjoint_gap(discrete_gradient_2d(6, 9), samples=50, seed=seed))
    return worst <= 1e-10, "max adjoint gap %.3g" % worst


def suite_projector(seed=0, iters=100):
    """Idempotence, self-adjointness and complement of span projectors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(iters):
        n = int(rng.integers(2, 12))
        dim = int(rng.integers(1, n + 1))
        P = _rand_subspace(rng, n, dim)
        x = rng.standard_normal(n) * 2.0
        y = rng.standard_normal(n) * 2.0
        px = np.asarray(P.project(x), dtype=float)
        worst = max(worst, float(np.max(np.abs(P.project(px) - px))))
        worst = max(worst, abs(float(np.dot(px, y) - np.dot(x, P.project(y)))))
        worst = max(worst, float(np.max(np.abs(P.complement(x) - (x - px)))))
    return worst <= 1e-10, "max projector defect %.3g" % worst


def suite_partial_inverse(seed=0, iters=1000):
    """Resolvent identity of the partial inverse on random subspaces.

    J_{(gA)_V} u = 2 P_V J_{gA} u - J_{gA} u + u - P_V u must be firmly
    nonexpansive and must reduce to J_{gA} at V = H and to Id - J_{gA} at
    V = {0}; the reduction cases use explicit projectors.
    """
    rng = np.random.default_rng(seed)
    n = 10
    worst = 0.0
    for k in range(iters):
        A0, a = _rand_spd_affine(rng, n)
        ops = [l1_prox(1.0), box_prox(-np.ones(n), np.ones(n)),
               affine_resolvent(A0, a)]
        J = ops[k % 3]
        g = float(rng.uniform(0.1, 3.0))
        dim = int(rng.integers(1, n + 1))
        P = _rand_subspace(rng, n, dim)
        u = rng.standard_normal(n) * 2.0
        v = rng.standard_normal(n) * 2.0
        pu = np.asarray(partial_inverse_resolvent(J, P, g, u), dtype=float)
        pv = np.asarray(partial_inverse_resolvent(J, P, g, v), dtype=float)
        gap = float(np.dot(pu - pv, u - v) - np.dot(pu - pv, pu - pv))
        if gap < -1e-10:
            return False, "partial-inverse resolvent not firm at sample %d" % k
        ju = np.asarray(J.evaluate(g, u), dtype=float)
        direct = (2.0 * np.asarray(P.project(ju), dtype=float) - ju
                  + u - np.asarray(P.project(u), dtype=float))
        worst = max(worst, float(np.max(np.abs(pu - direct))))
    full = span_projector(np.eye(n))
    zero = span_projector(np.zeros((n, 1)))
    u = rng.standard_normal(n)
    J = l1_prox(1.0)
    ju = np.asarray(J.evaluate(1.0, u), dtype=float)
    worst = max(worst, float(np.max(np.abs(
        partial_inverse_resolvent(J, full, 1.0, u) - ju))))
    worst = max(worst, float(np.max(np.abs(
        partial_inverse_resolvent(J, zero, 1.0, u) - (u - ju)))))
    return worst <= 1e-10, "max identity deviation %.3g" % worst


def _affine_problem(rng, n, with_v=True):
    A0, a = _rand_spd_affine(rng, n)
    B0 = rng.standard_normal((n, n)) / math.sqrt(n)
    C0q = rng.standard_normal((n, max(1, n // 2))) / math.sqrt(n)
    C0 = C0q @ C0q.T + 0.1 * np.eye(n)
    c0 = rng.standard_normal(n)
    beta = float(np.linalg.norm(B0, 2))
    zeta = float(np.linalg.norm(C0, 2))
    p = ProblemSpec(
        a=affine_resolvent(A0, a),
        b=affine_forward(B0, lipschitz=beta),
        c=affine_forward(C0, c0, cocoercivity_inverse=zeta),
        v=identity_projector() if with_v else None)
    return p, beta, zeta


def suite_reduction(seed=0, iters=100):
    """V = H collapses the partial-inverse methods onto their baselines."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(3, 8))
        p, beta, zeta = _affine_problem(rng, n)
        x0 = rng.standard_normal(n)
        g1 = 0.9 * step_size_frpib_max(beta, zeta)
        cfg1 = SolverConfig(gamma=g1, max_iters=iters, tol=0.0,
                            record_iterates=True)
        ta = frpib_solve(p, cfg1, x0)
        tb = fhrb_solve(p, cfg1, x0)
        for xa, xb in zip(ta.iterates, tb.iterates):
            worst = max(worst, float(np.max(np.abs(xa - xb))))
        g2 = 0.9 * step_size_fsdr_max(beta, zeta)
        cfg2 = SolverConfig(gamma=g2, max_iters=iters, tol=0.0,
                            record_iterates=True)
        tc = fpisdr_solve(p, cfg2, x0)
        td = fsdr_solve(p, cfg2, x0)
        for xc, xd in zip(tc.iterates, td.iterates):
            worst = max(worst, float(np.max(np.abs(xc - xd))))
    return worst <= 1e-14, "max iterate gap %.3g" % worst


def suite_step_size(seed=0, iters=100):
    """Closed forms, the cubic root, and the documented admissibility calls."""
    ok = abs(step_size_frpib_max(2.0, 5.0) - 2.0 / 13.0) <= 1e-15
    root = step_size_fsdr_max(2.0, 5.0)
    ok = ok and abs(root - 0.0732) <= 5e-4
    ok = ok and validate_step_size("frpib", 2.0, 5.0, 0.1537).accepted
    ok = ok and not validate_step_size("fsdr", 2.0, 5.0, 0.0732).accepted
    ok = ok and validate_step_size("fsdr", 2.0, 5.0, 0.999 * root).accepted
    rng = np.random.default_rng(seed)
    for _ in range(iters):
        beta = float(rng.uniform(0.05, 10.0))
        zeta = float(rng.uniform(0.05, 10.0))
        lam = 2.0 / (9.0 * beta + 3.0 * zeta)
        val = 2.0 / 3.0 - (2.0 * beta + zeta) * lam - beta ** 2 * zeta * lam ** 3
        ok = ok and val > 0.0
    return ok, "frpib sup(2,5)=%.6f, fsdr root(2,5)=%.6f" % (2.0 / 13.0, root)


def suite_consensus(seed=0, iters=500):
    """Weighted multiplier conservation along both consensus solvers."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for K in (2, 3):
        n = 6
        w = rng.uniform(0.2, 1.0, K)
        w /= w.sum()
        ops = []
        for _ in range(K):
            A0, a = _rand_spd_affine(rng, n)
            ops.append(affine_resolvent(A0, a))
        spec = ConsensusSpec(a_list=ops, weights=w)
        cfg = SolverConfig(gamma=0.5, max_iters=iters, tol=0.0)
        for solver in (consensus_frpib_solve, consensus_fpisdr_solve):
            trace = solver(spec, cfg, rng.standard_normal(n))
            lift = sum(wk * yk for wk, yk in zip(w, trace.multipliers))
            worst = max(worst, float(np.max(np.abs(lift))))
    return worst <= 1e-10, "max weighted multiplier sum %.3g" % worst


def suite_lifted_constants(seed=0, iters=20):
    """sqrt(ell) dominates the power-iteration norm of the stacked coupling."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(iters):
        I = int(rng.integers(1, 4))
        J = int(rng.integers(1, 4))
        pdims = [int(rng.integers(2, 6)) for _ in range(I)]
        ddims = [int(rng.integers(2, 6)) for _ in range(J)]
        L = [[(LinearMap.from_matrix(rng.standard_normal((ddims[j], pdims[i])))
               if rng.random() > 0.25 else None) for j in range(J)]
             for i in range(I)]
        spec = MultiProblemSpec(
            primal_dims=pdims, dual_dims=ddims,
            a_list=[l1_prox(1.0) for _ in range(I)],
            m_list=[l1_prox(1.0) for _ in range(J)],
            L=L)
        ell, beta, zeta = lifted_constants(spec)
        bundle, dims = stacked_problem(spec)
        total = sum(dims)

        def skew_only(v):
            # B and the N parts are zero here, so b is the coupling alone
            return np.asarray(bundle.b.evaluate(v), dtype=float)

        Lstack = LinearMap(total, total, skew_only,
                           lambda v: -skew_only(v))
        est = operator_norm_estimate(Lstack, iters=300,
                                     seed=int(rng.integers(2 ** 31)))
        worst = max(worst, est - math.sqrt(ell))
    return worst <= 1e-6, "max (||L_stacked|| - sqrt(ell)) = %.3g" % worst


SUITES = {
    "moreau": suite_moreau,
    "firm": suite_firm_nonexpansive,
    "adjoint": suite_adjoint,
    "projector": suite_projector,
    "partial-inverse": suite_partial_inverse,
    "reduction": suite_reduction,
    "step-size": suite_step_size,
    "consensus": suite_consensus,
    "lifted-constants": suite_lifted_constants,
}


def run_suite(name, seed=0, iters=None):
    """Run one suite; iters = None keeps its default sample count."""
    fn = SUITES[name]
    return fn(seed=seed) if iters is None else fn(seed=seed, iters=iters)


def run_all(seed=0, iters=None, names=None):
    """Run the named suites (default all); returns {name: (ok, detail)}."""
    picked = list(SUITES) if names is None else list(names)
    return {name: run_suite(name, seed=seed, iters=iters) for name in picked}
