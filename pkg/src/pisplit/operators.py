"""Monotone-operator vocabulary: resolvents, forward operators, projectors.

Resolvents are single-valued maps v -> J_{gamma A} v evaluated at arbitrary
positive step sizes, which makes scaled operators (A/omega, conjugates,
inverses) exact rewrites instead of approximations.
"""

import numpy as np

from .linalg import LinearMap, SpdSolveCache, as_vector

__all__ = [
    "ResolventOp",
    "ForwardOp",
    "SubspaceProjector",
    "soft_threshold",
    "box_project",
    "prox_conjugate",
    "resolvent_of_inverse",
    "kernel_projector",
    "lifted_difference_map",
    "partial_inverse_resolvent",
    "discrete_gradient_1d",
    "discrete_gradient_2d",
    "identity_projector",
    "span_projector",
    "l1_prox",
    "box_prox",
    "zero_prox",
    "point_prox",
    "affine_resolvent",
    "zero_forward",
    "affine_forward",
    "register_operator",
    "make_operator",
    "registry_keys",
]


class ResolventOp:
    """Resolvent provider: ``evaluate(gamma, v)`` computes J_{gamma A} v.

    ``descriptor`` names the operator in the registry so experiment configs
    can reference it.  Implementations must accept every gamma > 0 and must
    not cache mutable state between evaluations.
    """

    def __init__(self, evaluate, descriptor="anonymous"):
        self.evaluate = evaluate
        self.descriptor = descriptor

    def __call__(self, gamma, v):
        if gamma <= 0:
            raise ValueError("resolvent step must be positive")
        return self.evaluate(gamma, v)


class ForwardOp:
    """Single-valued forward operator with declared constants.

    ``lipschitz`` is the Lipschitz constant beta (0 encodes the zero
    operator's constant or an undeclared bound); ``cocoercivity_inverse`` is
    zeta such that the operator is 1/zeta-cocoercive (0 means not declared).
    """

    def __init__(self, evaluate, lipschitz=0.0, cocoercivity_inverse=0.0,
                 descriptor="anonymous"):
        if lipschitz < 0 or cocoercivity_inverse < 0:
            raise ValueError("operator constants must be nonnegative")
        self.evaluate = evaluate
        self.lipschitz = float(lipschitz)
        self.cocoercivity_inverse = float(cocoercivity_inverse)
        self.descriptor = descriptor

    def __call__(self, v):
        return self.evaluate(v)


class SubspaceProjector:
    """Orthogonal projector onto a closed subspace V."""

    def __init__(self, project, descriptor="anonymous"):
        self.project = project
        self.descriptor = descriptor

    def __call__(self, v):
        return self.project(v)

    def complement(self, v):
        """P_{V-perp} v = v - P_V v."""
        v = np.asarray(v, dtype=float)
        return v - np.asarray(self.project(v), dtype=float)


# ---------------------------------------------------------------------------
# prox / projection library


def soft_threshold(x, alpha):
    """Componentwise shrinkage sign(x_i) * max(|x_i| - alpha, 0).

    Equals the prox of alpha * l1-norm.  alpha = 0 returns x unchanged
    (continuity of the prox in its parameter).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    x = np.asarray(x, dtype=float)
    if alpha == 0:
        return x.copy()
    return np.sign(x) * np.maximum(np.abs(x) - alpha, 0.0)


def box_project(x, lo, hi):
    """Componentwise clamp of x into [lo, hi]."""
    x = np.asarray(x, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), x.shape)
    if np.any(lo > hi):
        raise ValueError("box bounds must satisfy lo <= hi componentwise")
    return np.minimum(np.maximum(x, lo), hi)


def prox_conjugate(f_prox, gamma, v):
    """prox of gamma * f-conjugate via the Moreau decomposition.

    prox_{gamma f*}(v) = v - gamma * prox_{f/gamma}(v / gamma).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    v = np.asarray(v, dtype=float)
    return v - gamma * np.asarray(f_prox.evaluate(1.0 / gamma, v / gamma), dtype=float)


def resolvent_of_inverse(m_res, gamma, v):
    """J_{gamma M^{-1}}(v) = v - gamma * J_{M/gamma}(v / gamma).

    The operator-level Moreau identity; for subdifferentials it coincides
    with prox_conjugate.
    """
    return prox_conjugate(m_res, gamma, v)


def lifted_difference_map(M):
    """T(x, w) = M x - w on the stacked space of pairs (x, w).

    ker T is the graph subspace {(x, Mx)}; kernel_projector recognizes maps
    built here and projects through the (Id + M*M) solve cache.
    """
    K, N = M.rows, M.cols

    def fwd(v):
        v = np.asarray(v, dtype=float)
        return np.asarray(M.forward(v[:N]), dtype=float) - v[N:]

    def adj(y):
        y = np.asarray(y, dtype=float)
        return np.concatenate([np.asarray(M.adjoint(y), dtype=float), -y])

    T = LinearMap(K, N + K, fwd, adj)
    T.lifted_source = M
    return T


def kernel_projector(T):
    """Orthogonal projector onto ker T.

    For a lifted difference map T(x, w) = M x - w the projector is

        P(a, b) = (xt, M xt),  xt = (Id + M*M)^{-1} (a + M* b),

    computed through an SpdSolveCache factored once.  For any other map the
    projector falls back to a dense pseudo-inverse, which also absorbs rank
    deficiency.
    """
    M = getattr(T, "lifted_source", None)
    if M is not None:
        N = M.cols
        cache = SpdSolveCache(M)

        def project(v):
            v = np.asarray(v, dtype=float)
            xt = cache.solve(v[:N] + np.asarray(M.adjoint(v[N:]), dtype=float))
            return np.concatenate([xt, np.asarray(M.forward(xt), dtype=float)])

        return SubspaceProjector(project, descriptor="ker(Mx-w)")

    dense = T.to_dense()
    pinvT = np.linalg.pinv(dense)

    def project(v):
        v = np.asarray(v, dtype=float)
        return v - pinvT @ (dense @ v)

    return SubspaceProjector(project, descriptor="ker(T)")


def identity_projector():
    """Projector onto the whole space (V = H)."""
    return SubspaceProjector(lambda v: np.asarray(v, dtype=float).copy(),
                             descriptor="identity")


def span_projector(basis):
    """Projector onto the span of the given (not necessarily orthonormal)
    column vectors."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape[0] < B.shape[1]:
        B = B.T
    # SVD instead of plain QR so rank-deficient (or all-zero) bases yield a
    # projector onto the actual span rather than onto arbitrary directions.
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    if s.size and s[0] > 0:
        Q = U[:, s > s[0] * max(B.shape) * np.finfo(float).eps]
    else:
        Q = U[:, :0]

    def project(v):
        v = np.asarray(v, dtype=float)
        return Q @ (Q.T @ v)

    return SubspaceProjector(project, descriptor="span")


def partial_inverse_resolvent(a_res, P, gamma, u):
    """Resolvent of the partial inverse of gamma*A with respect to V.

    Computed from the resolvent of A through

        J_{(gamma A)_V}(u) = 2 P_V J_{gamma A} u - J_{gamma A} u + u - P_V u.

    Reduces to J_{gamma A} when V is the whole space and to the resolvent of
    the inverse (Id - J_{gamma A}) when V = {0}.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    u = np.asarray(u, dtype=float)
    p = np.asarray(a_res.evaluate(gamma, u), dtype=float)
    return 2.0 * np.asarray(P.project(p), dtype=float) - p + u - np.asarray(P.project(u), dtype=float)


def discrete_gradient_1d(n):
    """Forward-difference map x -> (x_{i+1} - x_i) with n - 1 rows."""
    if n < 2:
        raise ValueError("need n >= 2")

    def fwd(x):
        return np.diff(np.asarray(x, dtype=float))

    def adj(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(n)
        out[:-1] -= u
        out[1:] += u
        return out

    return LinearMap(n - 1, n, fwd, adj)


def discrete_gradient_2d(h, w):
    """Stacked horizontal and vertical forward differences of an h x w image.

    Images are flattened row-major; the output stacks h*(w-1) horizontal
    differences followed by (h-1)*w vertical ones.  The spectral norm is
    bounded by sqrt(8).
    """
    if h < 2 or w < 2:
        raise ValueError("need h, w >= 2")
    rows = h * (w - 1) + (h - 1) * w

    def fwd(x):
        img = np.asarray(x, dtype=float).reshape(h, w)
        dh = np.diff(img, axis=1).ravel()
        dv = np.diff(img, axis=0).ravel()
        return np.concatenate([dh, dv])

    def adj(u):
        u = np.asarray(u, dtype=float)
        dh = u[: h * (w - 1)].reshape(h, w - 1)
        dv = u[h * (w - 1):].reshape(h - 1, w)
        out = np.zeros((h, w))
        out[:, :-1] -= dh
        out[:, 1:] += dh
        out[:-1, :] -= dv
        out[1:, :] += dv
        return out.ravel()

    return LinearMap(rows, h * w, fwd, adj)


# ---------------------------------------------------------------------------
# registered operator factories


def l1_prox(alpha=1.0):
    """Resolvent of the subdifferential of alpha * l1-norm."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return ResolventOp(lambda g, v: soft_threshold(v, g * alpha),
                       descriptor="l1(alpha=%g)" % alpha)


def box_prox(lo, hi):
    """Resolvent of the box normal cone (projection, step-independent)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return ResolventOp(lambda g, v: box_project(v, lo, hi), descriptor="box")


def zero_prox():
    """Resolvent of the zero operator (identity map)."""
    return ResolventOp(lambda g, v: np.asarray(v, dtype=float).copy(),
                       descriptor="zero")


def point_prox(c):
    """Resolvent of the normal cone of the singleton {c} (constant map)."""
    c = as_vector(c)
    return ResolventOp(lambda g, v: c.copy(), descriptor="point")


def affine_resolvent(A0, a=None):
    """Resolvent of the affine operator x -> A0 x + a.

    Requires A0 + A0^T positive semidefinite so the operator is monotone;
    each evaluation solves (Id + gamma A0) p = v - gamma a.
    """
    A0 = np.asarray(A0, dtype=float)
    n = A0.shape[0]
    a = np.zeros(n) if a is None else as_vector(a)
    sym = 0.5 * (A0 + A0.T)
    if np.linalg.eigvalsh(sym).min() < -1e-10:
        raise ValueError("affine operator is not monotone")
    eye = np.eye(n)

    def evaluate(g, v):
        return np.linalg.solve(eye + g * A0, np.asarray(v, dtype=float) - g * a)

    return ResolventOp(evaluate, descriptor="affine")


def zero_forward():
    """Forward operator that is identically zero."""
    return ForwardOp(lambda v: np.zeros_like(np.asarray(v, dtype=float)),
                     lipschitz=0.0, cocoercivity_inverse=0.0, descriptor="zero")


def affine_forward(A0, a=None, lipschitz=None, cocoercivity_inverse=0.0):
    """Forward operator x -> A0 x + a with derived or declared constants."""
    A0 = np.asarray(A0, dtype=float)
    n = A0.shape[1]
    a = np.zeros(A0.shape[0]) if a is None else as_vector(a)
    if lipschitz is None:
        lipschitz = float(np.linalg.norm(A0, 2))

    def evaluate(v):
        return A0 @ np.asarray(v, dtype=float) + a

    return ForwardOp(evaluate, lipschitz=lipschitz,
                     cocoercivity_inverse=cocoercivity_inverse, descriptor="affine")


_REGISTRY = {
    "l1": l1_prox,
    "box": box_prox,
    "zero": zero_prox,
    "point": point_prox,
    "affine": affine_resolvent,
}


def register_operator(key, factory):
    """Register a resolvent factory under a descriptor key."""
    if key in _REGISTRY:
        raise KeyError("operator key already registered: %r" % key)
    _REGISTRY[key] = factory


def make_operator(key, **params):
    """Instantiate a registered operator by descriptor key."""
    try:
        factory = _REGISTRY[key]
    except KeyError:
        raise KeyError("unknown operator key %r; known: %s"
                       % (key, ", ".join(sorted(_REGISTRY)))) from None
    return factory(**params)


def registry_keys():
    return sorted(_REGISTRY)
