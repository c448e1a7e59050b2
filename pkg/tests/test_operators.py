"""Resolvents, projectors, and the partial-inverse resolvent identity.

The partial-inverse checks verify the defining graph inclusion directly:
(x, u - x) belongs to the graph of the V-partial inverse of gamma*A exactly
when s = P x + (Id-P)(u-x) and t = P(u-x) + (Id-P) x satisfy t in gamma*A(s),
so membership is tested per operator without going through the resolvent
composition being validated.
"""

import numpy as np
import pytest

from pisplit import (LinearMap, affine_forward, affine_resolvent, box_project,
                     box_prox, discrete_gradient_1d, discrete_gradient_2d,
                     identity_projector, inner, kernel_projector, l1_prox,
                     lifted_difference_map, make_operator, operator_norm_estimate,
                     partial_inverse_resolvent, point_prox, prox_conjugate,
                     register_operator, registry_keys, resolvent_of_inverse,
                     soft_threshold, span_projector, zero_forward, zero_prox)


def _dense_projector(P, n):
    cols = []
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        cols.append(np.asarray(P.project(e.copy()), dtype=float))
        e[j] = 0.0
    return np.stack(cols, axis=1)


def _projector_contract(P, n, rng, tol=1e-10):
    for _ in range(20):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        pu = np.asarray(P.project(u), dtype=float)
        assert np.linalg.norm(P.project(pu) - pu) <= tol
        gap = abs(inner(pu, v) - inner(u, np.asarray(P.project(v), dtype=float)))
        assert gap <= tol * (1.0 + np.linalg.norm(u) * np.linalg.norm(v))
        a = rng.standard_normal()
        lin = np.asarray(P.project(a * u + v), dtype=float)
        assert np.linalg.norm(lin - (a * pu + P.project(v))) <= tol * (1 + abs(a))
        np.testing.assert_allclose(P.complement(u), u - pu, atol=tol)


# ---------------------------------------------------------------------------
# proxes


def test_soft_threshold_hand_values():
    np.testing.assert_allclose(soft_threshold([3.0, -0.5, 0.0], 1.0),
                               [2.0, 0.0, 0.0])
    x = np.array([1.0, -2.0, 0.3])
    np.testing.assert_allclose(soft_threshold(x, 0.0), x)
    np.testing.assert_allclose(soft_threshold([-2.0], 2.0), [0.0])
    with pytest.raises(ValueError):
        soft_threshold(x, -0.1)


def test_box_project_hand_and_oracle():
    x = np.array([0.2, -0.3])
    np.testing.assert_allclose(box_project(x, -1.0, 1.0), x)
    np.testing.assert_allclose(box_project([5.0], [-1.0], [1.0]), [1.0])
    with pytest.raises(ValueError):
        box_project(x, 1.0, -1.0)
    # oracle: the minimizer of (t - x_i)^2 over [lo_i, hi_i] is one of
    # lo_i, hi_i, x_i, so compare against the best candidate per coordinate
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.standard_normal(6) * 2
        lo = rng.uniform(-1.5, 0.0, 6)
        hi = rng.uniform(0.0, 1.5, 6)
        got = box_project(x, lo, hi)
        for i in range(6):
            cands = [lo[i], hi[i]] + ([x[i]] if lo[i] <= x[i] <= hi[i] else [])
            best = min(cands, key=lambda t: (t - x[i]) ** 2)
            assert abs(got[i] - best) <= 1e-14


def test_prox_conjugate_dual_pairs():
    v = np.array([1.5, -0.2, 0.7])
    # f = 0: conjugate is the indicator of {0}
    np.testing.assert_allclose(prox_conjugate(zero_prox(), 0.8, v),
                               np.zeros(3), atol=1e-15)
    # f = indicator of {0}: conjugate is the zero function
    np.testing.assert_allclose(prox_conjugate(point_prox(np.zeros(3)), 0.8, v), v)
    # f = alpha*l1: conjugate prox is the interval projection
    alpha = 0.6
    np.testing.assert_allclose(prox_conjugate(l1_prox(alpha), 2.5, v),
                               np.clip(v, -alpha, alpha), atol=1e-15)
    with pytest.raises(ValueError):
        prox_conjugate(zero_prox(), 0.0, v)


def test_moreau_identity_sampled():
    rng = np.random.default_rng(1)
    lo, hi = -0.4 * np.ones(5), 0.9 * np.ones(5)
    for f in (l1_prox(0.7), box_prox(lo, hi), zero_prox()):
        for _ in range(40):
            g = float(rng.uniform(0.1, 3.0))
            v = rng.standard_normal(5) * 2
            # prox_{gamma f}(v) + gamma prox_{f*/gamma}(v/gamma) = v
            decomp = (np.asarray(f.evaluate(g, v), dtype=float)
                      + g * np.asarray(prox_conjugate(f, 1.0 / g, v / g),
                                       dtype=float))
            np.testing.assert_allclose(decomp, v, atol=1e-12)


def test_point_prox_and_affine_resolvent():
    c = np.array([2.0, -1.0])
    np.testing.assert_allclose(point_prox(c).evaluate(0.3, np.ones(2)), c)
    # oracle: direct dense solve of (Id + g A0) p = v - g a
    rng = np.random.default_rng(2)
    A0 = rng.standard_normal((4, 4))
    A0 = A0 @ A0.T + 0.1 * np.eye(4)
    a = rng.standard_normal(4)
    res = affine_resolvent(A0, a)
    for _ in range(10):
        g = float(rng.uniform(0.05, 2.0))
        v = rng.standard_normal(4)
        want = np.linalg.solve(np.eye(4) + g * A0, v - g * a)
        np.testing.assert_allclose(res.evaluate(g, v), want, atol=1e-10)
    with pytest.raises(ValueError):
        affine_resolvent(np.array([[0.0, 2.0], [0.0, -1.0]]))


def test_firm_nonexpansiveness_sampled():
    rng = np.random.default_rng(3)
    A0 = rng.standard_normal((5, 5))
    ops = [l1_prox(0.8), box_prox(-np.ones(5), np.ones(5)),
           affine_resolvent(A0 @ A0.T), point_prox(np.zeros(5)), zero_prox()]
    for op in ops:
        for _ in range(40):
            g = float(rng.uniform(0.1, 2.0))
            u = rng.standard_normal(5)
            v = rng.standard_normal(5)
            ju = np.asarray(op.evaluate(g, u), dtype=float)
            jv = np.asarray(op.evaluate(g, v), dtype=float)
            d = ju - jv
            assert np.dot(d, d) <= inner(d, u - v) + 1e-10


def test_forward_op_contracts():
    rng = np.random.default_rng(4)
    A0 = rng.standard_normal((4, 4))
    op = affine_forward(A0)
    for _ in range(30):
        u, v = rng.standard_normal(4), rng.standard_normal(4)
        lhs = np.linalg.norm(op.evaluate(u) - op.evaluate(v))
        assert lhs <= (op.lipschitz + 1e-9) * np.linalg.norm(u - v)
    # symmetric PSD map: 1/zeta-cocoercive with zeta = lambda_max
    S = A0 @ A0.T
    zeta = float(np.linalg.eigvalsh(S).max())
    cop = affine_forward(S, cocoercivity_inverse=zeta)
    for _ in range(30):
        u, v = rng.standard_normal(4), rng.standard_normal(4)
        t = cop.evaluate(u) - cop.evaluate(v)
        assert inner(u - v, t) >= (1.0 / zeta - 1e-9) * np.dot(t, t)
    z = zero_forward()
    np.testing.assert_allclose(z.evaluate(np.ones(3)), np.zeros(3))
    with pytest.raises(ValueError):
        affine_forward(A0, lipschitz=-1.0)


def test_resolvent_gamma_validation():
    with pytest.raises(ValueError):
        l1_prox(1.0)(0.0, np.ones(2))


# ---------------------------------------------------------------------------
# resolvent of the inverse


def test_resolvent_of_inverse_identity_map():
    # oracle: Id^{-1} = Id, so J_{gamma Id} v = v / (1 + gamma)
    ident = affine_resolvent(np.eye(3))
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = float(rng.uniform(0.1, 3.0))
        v = rng.standard_normal(3)
        np.testing.assert_allclose(resolvent_of_inverse(ident, g, v),
                                   v / (1.0 + g), atol=1e-12)


def test_resolvent_of_inverse_point_and_l1():
    v = np.array([0.3, -2.0])
    # N_{{0}} has resolvent 0; its inverse is the zero operator
    np.testing.assert_allclose(
        resolvent_of_inverse(point_prox(np.zeros(2)), 0.7, v), v)
    # oracle: brute-force 1-D inversion of the subdifferential of |.|
    res = l1_prox(1.0)
    grid = np.linspace(-3.0, 3.0, 6001)
    for g in (0.5, 1.0, 2.0):
        for v0 in (-2.3, -0.4, 0.0, 0.9, 1.7):
            got = float(resolvent_of_inverse(res, g, np.array([v0]))[0])
            # violation of v0 - x in g * (d|.|)^{-1}(x) over the grid
            t = (v0 - grid) / g
            viol = np.where(np.abs(grid) < 1.0 - 1e-9, np.abs(t),
                            np.where(np.abs(np.abs(grid) - 1.0) <= 1e-9,
                                     np.maximum(0.0, -t * np.sign(grid)),
                                     np.inf))
            # clamp grid ends where the set is empty
            best = grid[int(np.argmin(viol))]
            assert abs(got - best) <= 2e-3


# ---------------------------------------------------------------------------
# partial inverse


def test_partial_inverse_resolvent_extreme_subspaces():
    rng = np.random.default_rng(6)
    res = l1_prox(1.0)
    full = identity_projector()
    zero = span_projector(np.zeros((4, 1)))
    for _ in range(25):
        g = float(rng.uniform(0.2, 2.0))
        u = rng.standard_normal(4) * 2
        j = np.asarray(res.evaluate(g, u), dtype=float)
        np.testing.assert_allclose(
            partial_inverse_resolvent(res, full, g, u), j, atol=1e-14)
        np.testing.assert_allclose(
            partial_inverse_resolvent(res, zero, g, u), u - j, atol=1e-14)
    with pytest.raises(ValueError):
        partial_inverse_resolvent(res, full, 0.0, np.ones(4))


def _l1_membership(s, t, g, alpha=1.0):
    """Distance of t from g * subdifferential of alpha*l1 at s."""
    on = np.abs(s) > 1e-9
    viol = np.where(on, np.abs(t - g * alpha * np.sign(s)),
                    np.maximum(np.abs(t) - g * alpha, 0.0))
    return float(np.max(viol))


def test_partial_inverse_grid_oracle_2d():
    # A = subdifferential of the l1 norm on R^2, V = span{(1,1)}; the grid
    # minimizes the inclusion violation of (x, u - x) at 1e-4 resolution
    P = span_projector(np.ones((2, 1)))
    Pm = _dense_projector(P, 2)
    Qm = np.eye(2) - Pm
    res = l1_prox(1.0)
    g = 0.7
    rng = np.random.default_rng(7)

    def violation(xx, yy, u, band):
        sx = Pm[0, 0] * xx + Pm[0, 1] * yy + Qm[0, 0] * (u[0] - xx) + Qm[0, 1] * (u[1] - yy)
        sy = Pm[1, 0] * xx + Pm[1, 1] * yy + Qm[1, 0] * (u[0] - xx) + Qm[1, 1] * (u[1] - yy)
        tx = Pm[0, 0] * (u[0] - xx) + Pm[0, 1] * (u[1] - yy) + Qm[0, 0] * xx + Qm[0, 1] * yy
        ty = Pm[1, 0] * (u[0] - xx) + Pm[1, 1] * (u[1] - yy) + Qm[1, 0] * xx + Qm[1, 1] * yy
        out = 0.0
        for s, t in ((sx, tx), (sy, ty)):
            on = np.abs(s) > band
            out = out + np.where(on, np.abs(t - g * np.sign(s)),
                                 np.maximum(np.abs(t) - g, 0.0))
        return out

    for _ in range(3):
        u = rng.uniform(-1.5, 1.5, 2)
        got = partial_inverse_resolvent(res, P, g, u)
        # the returned point satisfies the inclusion
        assert float(violation(got[0], got[1], u, 1e-9)) <= 1e-10
        # coarse pass, then refine around the argmin; the zero band of the
        # subdifferential test scales with the grid step
        ax = np.linspace(-2.5, 2.5, 1001)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        V = violation(X, Y, u, 2e-2)
        i, j = np.unravel_index(np.argmin(V), V.shape)
        cx, cy = ax[i], ax[j]
        fx = np.linspace(cx - 0.05, cx + 0.05, 1001)
        fy = np.linspace(cy - 0.05, cy + 0.05, 1001)
        X, Y = np.meshgrid(fx, fy, indexing="ij")
        V = violation(X, Y, u, 5e-4)
        i, j = np.unravel_index(np.argmin(V), V.shape)
        assert abs(got[0] - fx[i]) <= 5e-3 and abs(got[1] - fy[j]) <= 5e-3


def test_partial_inverse_inclusion_random_subspaces():
    # smaller-sample version of the acceptance identity check
    rng = np.random.default_rng(8)
    n = 10
    lo, hi = -0.8 * np.ones(n), 0.6 * np.ones(n)
    A0 = rng.standard_normal((n, n))
    A0 = A0 @ A0.T + 0.2 * np.eye(n)
    a0 = rng.standard_normal(n)
    for _ in range(60):
        k = int(rng.integers(1, n))
        P = span_projector(rng.standard_normal((n, k)))
        Pd = _dense_projector(P, n)
        g = float(rng.uniform(0.2, 2.0))
        u = rng.standard_normal(n) * 1.5
        for kind in ("l1", "box", "affine"):
            res = {"l1": l1_prox(1.0), "box": box_prox(lo, hi),
                   "affine": affine_resolvent(A0, a0)}[kind]
            x = partial_inverse_resolvent(res, P, g, u)
            s = Pd @ x + (u - x) - Pd @ (u - x)
            t = Pd @ (u - x) + x - Pd @ x
            if kind == "affine":
                viol = np.linalg.norm(t - g * (A0 @ s + a0))
            elif kind == "l1":
                viol = _l1_membership(s, t, g)
            else:
                inside = (s > lo + 1e-9) & (s < hi - 1e-9)
                at_lo = np.abs(s - lo) <= 1e-9
                viol = float(np.max(np.where(
                    inside, np.abs(t),
                    np.where(at_lo, np.maximum(t, 0.0),
                             np.maximum(-t, 0.0)))))
                # s itself must live in the box
                viol = max(viol, float(np.max(np.abs(box_project(s, lo, hi) - s))))
            assert viol <= 1e-10 * (1.0 + np.linalg.norm(u))


# ---------------------------------------------------------------------------
# projectors


def test_span_projector_properties_and_degenerate_bases():
    rng = np.random.default_rng(9)
    P = span_projector(rng.standard_normal((8, 3)))
    _projector_contract(P, 8, rng)
    # rank-deficient basis: duplicated column spans the same plane
    b = rng.standard_normal((6, 1))
    P2 = span_projector(np.hstack([b, 2 * b]))
    want = b @ b.T / float(b[:, 0] @ b[:, 0])
    np.testing.assert_allclose(_dense_projector(P2, 6), want, atol=1e-12)
    # all-zero basis projects onto {0}
    Pz = span_projector(np.zeros((5, 2)))
    np.testing.assert_allclose(Pz.project(np.ones(5)), np.zeros(5), atol=1e-15)


def test_kernel_projector_lifted_difference():
    rng = np.random.default_rng(10)
    # M = Id: P(a, b) = ((a+b)/2, (a+b)/2)
    P = kernel_projector(lifted_difference_map(LinearMap.from_matrix(np.eye(3))))
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    out = P.project(np.concatenate([a, b]))
    np.testing.assert_allclose(out[:3], (a + b) / 2.0, atol=1e-12)
    np.testing.assert_allclose(out[3:], (a + b) / 2.0, atol=1e-12)
    # pairs (x, Mx) are fixed points
    M = rng.standard_normal((8, 5))
    T = lifted_difference_map(LinearMap.from_matrix(M))
    P = kernel_projector(T)
    x = rng.standard_normal(5)
    v = np.concatenate([x, M @ x])
    np.testing.assert_allclose(P.project(v), v, atol=1e-10)
    # oracle: orthonormal null-space basis of the dense [M, -I] matrix
    dense = np.hstack([M, -np.eye(8)])
    _, _, Vt = np.linalg.svd(dense)
    null = Vt[8:].T  # 13 - rank(8) = 5 columns
    want = null @ null.T
    np.testing.assert_allclose(_dense_projector(P, 13), want, atol=1e-10)
    _projector_contract(P, 13, rng)


def test_kernel_projector_generic_fallback():
    rng = np.random.default_rng(11)
    T = LinearMap.from_matrix(rng.standard_normal((3, 7)))
    P = kernel_projector(T)
    _projector_contract(P, 7, rng)
    for _ in range(10):
        v = rng.standard_normal(7)
        # projected vectors live in ker T
        assert np.linalg.norm(T.forward(P.project(v))) <= 1e-10


def test_identity_projector():
    rng = np.random.default_rng(12)
    P = identity_projector()
    v = rng.standard_normal(4)
    np.testing.assert_allclose(P.project(v), v)
    np.testing.assert_allclose(P.complement(v), np.zeros(4))


# ---------------------------------------------------------------------------
# difference maps


def test_discrete_gradient_1d():
    G = discrete_gradient_1d(3)
    np.testing.assert_allclose(G.forward([1.0, 2.0, 4.0]), [1.0, 2.0])
    np.testing.assert_allclose(G.forward(np.full(3, 0.7)), np.zeros(2))
    dense = G.to_dense()
    np.testing.assert_allclose(dense, [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
    rng = np.random.default_rng(13)
    u = rng.standard_normal(2)
    np.testing.assert_allclose(G.adjoint(u), dense.T @ u, atol=1e-14)
    with pytest.raises(ValueError):
        discrete_gradient_1d(1)


def test_discrete_gradient_2d_adjoint_and_norm():
    G = discrete_gradient_2d(5, 4)
    assert G.shape == (5 * 3 + 4 * 4, 20)
    dense = G.to_dense()
    rng = np.random.default_rng(14)
    for _ in range(10):
        x = rng.standard_normal(20)
        u = rng.standard_normal(G.rows)
        np.testing.assert_allclose(G.forward(x), dense @ x, atol=1e-12)
        np.testing.assert_allclose(G.adjoint(u), dense.T @ u, atol=1e-12)
    assert operator_norm_estimate(G, iters=300) <= np.sqrt(8.0) + 1e-9
    # constant image sits in the kernel
    np.testing.assert_allclose(G.forward(np.ones(20)), np.zeros(G.rows))


# ---------------------------------------------------------------------------
# registry


def test_registry_round_trip():
    keys = registry_keys()
    for k in ("l1", "box", "zero", "point", "affine"):
        assert k in keys
    op = make_operator("l1", alpha=0.3)
    np.testing.assert_allclose(op.evaluate(1.0, np.array([1.0, -0.1])),
                               soft_threshold([1.0, -0.1], 0.3))
    with pytest.raises(KeyError):
        make_operator("no-such-op")
    name = "test-custom-op"
    if name not in registry_keys():
        register_operator(name, lambda: zero_prox())
    with pytest.raises(KeyError):
        register_operator(name, lambda: zero_prox())
    assert make_operator(name).descriptor == "zero"
