"""Dense vector and linear-map primitives shared by the whole solver stack.

Vectors are plain 1-D numpy float64 arrays.  Linear operators carry their
shape and an explicit adjoint so adjoint-consistency is testable for every
map the package ships (gradients, Radon projectors, stacked composites).
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse import issparse

__all__ = [
    "as_vector",
    "check_finite",
    "inner",
    "LinearMap",
    "identity_map",
    "zero_map",
    "operator_norm_estimate",
    "adjoint_gap",
    "SpdSolveCache",
    "spd_solve",
]


def as_vector(x):
    """Coerce ``x`` to a contiguous 1-D float64 array."""
    v = np.asarray(x, dtype=float).ravel()
    if v.size < 1:
        raise ValueError("vectors must have dimension >= 1")
    return v


def check_finite(x, what="vector"):
    """Raise if ``x`` contains NaN or Inf; return ``x`` unchanged."""
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("non-finite entries in %s" % what)
    return x


def inner(a, b):
    """Euclidean inner product of two equal-length vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch: %s vs %s" % (a.shape, b.shape))
    return float(np.dot(a.ravel(), b.ravel()))


class LinearMap:
    """Shape-carrying linear operator with an explicit adjoint.

    Parameters
    ----------
    rows, cols : int
        Output and input dimensions.
    forward : callable
        Maps vectors of length ``cols`` to vectors of length ``rows``.
    adjoint : callable
        Maps vectors of length ``rows`` to vectors of length ``cols``.
    matrix : ndarray or scipy sparse matrix, optional
        Concrete representation when available; factorization caches use it
        instead of re-materializing the operator column by column.
    """

    def __init__(self, rows, cols, forward, adjoint, matrix=None):
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be positive")
        self.rows = int(rows)
        self.cols = int(cols)
        self.forward = forward
        self.adjoint = adjoint
        self.matrix = matrix

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __call__(self, x):
        return self.forward(x)

    @classmethod
    def from_matrix(cls, A):
        """Wrap a dense or sparse matrix as a LinearMap."""
        if issparse(A):
            A = A.tocsr()
            rows, cols = A.shape
            return cls(rows, cols, lambda x: A @ x, lambda y: A.T @ y, matrix=A)
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = A.shape
        return cls(rows, cols, lambda x: A @ x, lambda y: A.T @ y, matrix=A)

    def to_dense(self):
        """Materialize the operator as a dense array."""
        if self.matrix is not None:
            return self.matrix.toarray() if issparse(self.matrix) else np.asarray(self.matrix, dtype=float)
        cols = []
        e = np.zeros(self.cols)
        for j in range(self.cols):
            e[j] = 1.0
            cols.append(np.asarray(self.forward(e.copy()), dtype=float))
            e[j] = 0.0
        return np.stack(cols, axis=1)


def identity_map(n):
    return LinearMap(n, n, lambda x: np.asarray(x, dtype=float).copy(),
                     lambda y: np.asarray(y, dtype=float).copy())


def zero_map(rows, cols):
    return LinearMap(rows, cols, lambda x: np.zeros(rows), lambda y: np.zeros(cols))


def operator_norm_estimate(L, iters=200, seed=0):
    """Estimate the spectral norm of ``L`` by power iteration on L*L.

    Starts from a seeded random vector, runs ``iters`` normalized
    applications of L*L, and returns the square root of the final Rayleigh
    quotient.  The estimate is monotone nondecreasing in ``iters`` and never
    exceeds the true norm beyond round-off.

    Parameters
    ----------
    L : LinearMap
    iters : int
        Number of power steps, at least 1.
    seed : int
        Seed for the starting vector.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(L.cols)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    v /= nv
    for _ in range(iters):
        w = np.asarray(L.adjoint(L.forward(v)), dtype=float)
        nw = np.linalg.norm(w)
        if nw == 0:
            # v is in the kernel of L*L; the map restricted to the sampled
            # direction is zero
            return 0.0
        v = w / nw
    return float(np.linalg.norm(L.forward(v)))


def adjoint_gap(L, samples=100, seed=0):
    """Largest relative adjoint-consistency defect over seeded random pairs.

    Returns max |<Lx, y> - <x, L*y>| / (1 + ||x|| ||y||).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(L.cols)
        y = rng.standard_normal(L.rows)
        lhs = inner(np.asarray(L.forward(x), dtype=float), y)
        rhs = inner(x, np.asarray(L.adjoint(y), dtype=float))
        gap = abs(lhs - rhs) / (1.0 + np.linalg.norm(x) * np.linalg.norm(y))
        worst = max(worst, gap)
    return worst


class SpdSolveCache:
    """Cholesky cache for systems (Id + M*M) x = v.

    The Gram matrix is factored once, on whichever side is smaller: directly
    as Id_N + M^T M when N <= K, otherwise through the Woodbury identity

        (Id_N + M^T M)^{-1} v = v - M^T (Id_K + M M^T)^{-1} M v

    so a K x K factorization suffices when the row count K is the smaller
    dimension.
    """

    def __init__(self, M):
        self.source = M
        A = M.matrix if M.matrix is not None else M.to_dense()
        K, N = M.rows, M.cols
        self._woodbury = K < N
        if self._woodbury:
            gram = A @ A.T
        else:
            gram = A.T @ A
        if issparse(gram):
            gram = gram.toarray()
        gram = np.asarray(gram, dtype=float)
        gram[np.diag_indices_from(gram)] += 1.0
        self._factor = cho_factor(gram, lower=True)

    def solve(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.source.cols,):
            raise ValueError("expected a vector of length %d" % self.source.cols)
        if self._woodbury:
            t = cho_solve(self._factor,
                          np.asarray(self.source.forward(v), dtype=float))
            return v - np.asarray(self.source.adjoint(t), dtype=float)
        return cho_solve(self._factor, v)


def spd_solve(cache, v):
    """Solve (Id + M*M) x = v through a prebuilt SpdSolveCache."""
    return cache.solve(v)
