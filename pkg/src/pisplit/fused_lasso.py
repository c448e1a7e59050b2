"""Constrained fused-lasso least squares: instances, solvers, optimality.

The model problem is

    minimize (alpha1/2) ||M x - z||^2 + alpha2 ||D x||_1
    subject to eta0 <= x <= eta1

with D the forward-difference map.  Instances draw M with uniform entries
scaled by kappa, Gaussian data z, and uniform box edges; the draw order
(M, z, eta0, eta1) is fixed so seeds identify instances across versions.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .linalg import LinearMap, as_vector
from .operators import discrete_gradient_1d
from .reporting import report_from_trace
from .splitting import SolverConfig
from .tvlsq import (TvlsqProblem, cmtpd_run, condat_vu_run, fhrb_run,
                    mtpd_run, tv_objective)

__all__ = [
    "FusedLassoInstance",
    "gen_fused_lasso",
    "objective",
    "mtpd_solve",
    "cmtpd_solve",
    "fhrb_fused_solve",
    "condat_vu_fused_solve",
    "kkt_residual",
    "save_instance",
    "load_instance",
]

_BLOB_MAGIC = b"PISPLIT\x00"
_BLOB_VERSION = 1

DEFAULT_MAX_ITERS = 50000
DEFAULT_TOL = 1e-6


@dataclass
class FusedLassoInstance:
    """One random instance; eta0 <= eta1 is enforced on construction."""

    M: LinearMap
    z: np.ndarray
    eta0: np.ndarray
    eta1: np.ndarray
    alpha1: float = 5.0
    alpha2: float = 0.5
    kappa: float = 0.1
    seed: int = 0

    def __post_init__(self):
        self.z = as_vector(self.z)
        self.eta0 = as_vector(self.eta0)
        self.eta1 = as_vector(self.eta1)
        if np.any(self.eta0 > self.eta1):
            raise ValueError("box edges must satisfy eta0 <= eta1")

    @property
    def n(self):
        return self.M.cols

    @property
    def k(self):
        return self.M.rows


def gen_fused_lasso(N=1200, K=1000, kappa=0.1, seed=0, alpha1=5.0, alpha2=0.5):
    """Draw an instance: M = kappa * U(0,1)^{K x N}, z standard normal,
    eta0 uniform in [-1.5, 0], eta1 uniform in [0, 1.5].

    The draw order is fixed (M, z, eta0, eta1) so a seed pins the instance.
    """
    rng = np.random.default_rng(seed)
    mat = kappa * rng.random((K, N))
    z = rng.standard_normal(K)
    eta0 = rng.uniform(-1.5, 0.0, N)
    eta1 = rng.uniform(0.0, 1.5, N)
    return FusedLassoInstance(M=LinearMap.from_matrix(mat), z=z,
                              eta0=eta0, eta1=eta1, alpha1=alpha1,
                              alpha2=alpha2, kappa=kappa, seed=seed)


def _problem(inst):
    return TvlsqProblem(M=inst.M, z=inst.z, lo=inst.eta0, hi=inst.eta1,
                        grad=discrete_gradient_1d(inst.n), grad_norm=2.0,
                        alpha1=inst.alpha1, alpha2=inst.alpha2)


def objective(inst, x):
    """(alpha1/2) ||M x - z||^2 + alpha2 ||D x||_1."""
    return tv_objective(_problem(inst), x)


def _default_cfg(inst, cfg):
    if cfg is None:
        return SolverConfig(max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL,
                            seed=inst.seed)
    return cfg


def _finish(name, inst, trace):
    report = report_from_trace(name, trace, objective(inst, trace.solution),
                               inst.seed)
    return report, trace


def mtpd_solve(inst, cfg=None, use_generic=False):
    """Kernel-lifted frpib solver.

    The optimized path reproduces the flattened recurrence and must agree
    with the generic composite instantiation iterate for iterate; both take
    the default step 0.999 * 2/(8 + alpha1).  Returns (report, trace);
    trace.solution is feasible by construction (final clamp before the
    kernel projection, then a closing box projection).
    """
    trace = mtpd_run(_problem(inst), _default_cfg(inst, cfg),
                     use_generic=use_generic)
    return _finish("mtpd", inst, trace)


def cmtpd_solve(inst, cfg=None, use_generic=False):
    """Kernel-lifted shadow-DR solver; default step is 0.999 times the
    positive root of 2/3 - (4 + alpha1) g - 4 alpha1 g^3."""
    trace = cmtpd_run(_problem(inst), _default_cfg(inst, cfg),
                      use_generic=use_generic)
    return _finish("cmtpd", inst, trace)


def fhrb_fused_solve(inst, cfg=None):
    """Product-space baseline without kernel lifting; its step bound
    2/(8 + alpha1 ||M||^2) collapses as the data matrix grows."""
    trace = fhrb_run(_problem(inst), _default_cfg(inst, cfg))
    return _finish("fhrb", inst, trace)


def condat_vu_fused_solve(inst, cfg=None):
    """Primal-dual baseline on the unlifted problem."""
    trace = condat_vu_run(_problem(inst), _default_cfg(inst, cfg))
    return _finish("condat-vu", inst, trace)


def kkt_residual(inst, x, zero_tol=None):
    """Norm of the best stationarity certificate at x.

    Splits D x into active entries (fixed subgradient sign(D x)) and
    near-zero entries, picks the free subgradient coordinates in [-1, 1] by
    bounded least squares, then cancels whatever the box normal cone can
    absorb at active bounds.  The result upper-bounds the distance from 0 to
    the subdifferential of the objective plus the normal cone, so small
    values certify near-optimality.  Raises ValueError on infeasible x.
    """
    x = as_vector(x)
    if x.shape != inst.eta0.shape:
        raise ValueError("point has wrong dimension")
    slack = 1e-8 * (1.0 + np.abs(inst.eta0) + np.abs(inst.eta1))
    if np.any(x < inst.eta0 - slack) or np.any(x > inst.eta1 + slack):
        raise ValueError("point violates the box constraints")

    grad_map = discrete_gradient_1d(inst.n)
    g0 = inst.alpha1 * np.asarray(
        inst.M.adjoint(np.asarray(inst.M.forward(x), dtype=float) - inst.z),
        dtype=float)
    t = np.asarray(grad_map.forward(x), dtype=float)
    if zero_tol is None:
        # flat segments of an iterate sit near zero only to solver
        # precision, a few orders above machine eps; classify generously and
        # let the bounded fit pick the actual subgradient.
        zero_tol = 1e-3 * max(1.0, float(np.abs(t).max())) if t.size else 0.0
    free = np.abs(t) <= zero_tol
    s_fixed = np.where(free, 0.0, np.sign(t))
    r = g0 + inst.alpha2 * np.asarray(grad_map.adjoint(s_fixed), dtype=float)

    # One joint bounded least squares over the remaining degrees of
    # freedom: subgradient entries for near-zero gradient components live in
    # [-1, 1], normal-cone slacks at active bounds are one-sided.
    at_lo = x <= inst.eta0 + slack
    at_hi = x >= inst.eta1 - slack
    blocks, lob, hib = [], [], []
    if np.any(free):
        blocks.append(inst.alpha2 * grad_map.to_dense().T[:, free])
        lob.extend([-1.0] * int(free.sum()))
        hib.extend([1.0] * int(free.sum()))
    eye = np.eye(inst.n)
    for i in np.flatnonzero(at_lo | at_hi):
        blocks.append(eye[:, i:i + 1])
        lob.append(-np.inf if at_lo[i] else 0.0)
        hib.append(np.inf if at_hi[i] else 0.0)
    if not blocks:
        return float(np.linalg.norm(r))
    design = np.hstack(blocks)
    fit = lsq_linear(design, -r, bounds=(np.array(lob), np.array(hib)))
    return float(np.linalg.norm(r + design @ fit.x))


def save_instance(inst, path):
    """Write a JSON descriptor at path plus a binary blob alongside it.

    The blob starts with an 8-byte magic and a version word; the matrix is
    stored column-major, vectors follow in file order.  The descriptor
    records offsets, shapes and dtypes so readers need no other convention.
    """
    path = str(path)
    blob_path = path[:-5] + ".bin" if path.endswith(".json") else path + ".bin"
    mat = inst.M.to_dense()
    arrays = [
        ("M", np.asfortranarray(mat), "F"),
        ("z", inst.z, "C"),
        ("eta0", inst.eta0, "C"),
        ("eta1", inst.eta1, "C"),
    ]
    entries = {}
    offset = 0
    chunks = []
    for name, arr, order in arrays:
        raw = arr.astype("<f8").tobytes(order=order)
        entries[name] = {"offset": offset, "shape": list(arr.shape),
                         "dtype": "<f8", "order": order}
        chunks.append(raw)
        offset += len(raw)
    with open(blob_path, "wb") as fh:
        fh.write(_BLOB_MAGIC)
        fh.write(struct.pack("<I", _BLOB_VERSION))
        for raw in chunks:
            fh.write(raw)
    desc = {
        "format": "pisplit-instance",
        "version": _BLOB_VERSION,
        "kind": "fused-lasso",
        "n": inst.n,
        "k": inst.k,
        "alpha1": inst.alpha1,
        "alpha2": inst.alpha2,
        "kappa": inst.kappa,
        "seed": inst.seed,
        "blob": blob_path.rsplit("/", 1)[-1],
        "arrays": entries,
    }
    with open(path, "w") as fh:
        json.dump(desc, fh, indent=1)
        fh.write("\n")


def load_instance(path):
    """Inverse of save_instance; validates magic and version."""
    path = str(path)
    with open(path) as fh:
        desc = json.load(fh)
    if desc.get("format") != "pisplit-instance":
        raise ValueError("not an instance descriptor: %s" % path)
    if desc.get("version") != _BLOB_VERSION:
        raise ValueError("unsupported instance version %r" % desc.get("version"))
    base = path.rsplit("/", 1)[0] if "/" in path else "."
    with open(base + "/" + desc["blob"], "rb") as fh:
        blob = fh.read()
    if blob[:len(_BLOB_MAGIC)] != _BLOB_MAGIC:
        raise ValueError("bad blob magic")
    (ver,) = struct.unpack_from("<I", blob, len(_BLOB_MAGIC))
    if ver != _BLOB_VERSION:
        raise ValueError("blob version mismatch")
    head = len(_BLOB_MAGIC) + 4

    def pull(name):
        e = desc["arrays"][name]
        count = int(np.prod(e["shape"])) if e["shape"] else 1
        flat = np.frombuffer(blob, dtype=e["dtype"], count=count,
                             offset=head + e["offset"])
        return np.array(flat, dtype=float).reshape(e["shape"], order=e["order"])

    return FusedLassoInstance(
        M=LinearMap.from_matrix(pull("M")), z=pull("z"), eta0=pull("eta0"),
        eta1=pull("eta1"), alpha1=float(desc["alpha1"]),
        alpha2=float(desc["alpha2"]), kappa=float(desc["kappa"]),
        seed=int(desc["seed"]))
