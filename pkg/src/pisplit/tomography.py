"""Desk-scale computed tomography: phantom, projector, noise, metrics.

The projector traces each ray through the pixel grid and stores exact
chord lengths (Siddon traversal), assembled as a sparse CSR matrix whose
adjoint is plain back-projection.  Parallel-beam geometry is the default;
the fan-beam layout (point source at 800 length units from the object
center, detector array at 1200) sits behind the geometry flag.

Reconstruction reuses the TV least-squares solvers with the 2-D gradient:

    minimize (alpha1/2) ||M x - z||^2 + alpha2 ||G x||_1,  0 <= x <= 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .linalg import LinearMap
from .operators import discrete_gradient_2d
from .reporting import report_from_trace
from .splitting import SolverConfig
from .tvlsq import (TvlsqProblem, cmtpd_run, condat_vu_run, fhrb_run,
                    mtpd_run, tv_objective)

__all__ = [
    "TomoGeometry",
    "TomoInstance",
    "shepp_logan",
    "radon_projector",
    "poisson_sinogram",
    "psnr",
    "make_tomo_instance",
    "tomo_objective",
    "tomo_solve",
    "write_pgm",
]

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 10000
DEFAULT_TOL = 1e-8

# Modified head phantom: one row per ellipse, columns are additive
# intensity, semi-axis a (x), semi-axis b (y), center x, center y, rotation
# in degrees.  Coordinates live in the unit disk [-1, 1]^2.
_PHANTOM_ELLIPSES = np.array([
    [1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0],
    [-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0],
    [-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0],
    [-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0],
    [0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0],
    [0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0],
    [0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0],
    [0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0],
    [0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0],
    [0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0],
])


def shepp_logan(n):
    """n x n head phantom, flattened row-major, values clamped to [0, 1].

    Pixel centers sample the ten-ellipse table; row 0 is the top of the
    image (y = +1 edge).  Intended for n >= 16; smaller sides alias badly.
    """
    n = int(n)
    if n < 2:
        raise ValueError("side must be at least 2")
    coords = (np.arange(n) + 0.5) * 2.0 / n - 1.0
    xg, yg = np.meshgrid(coords, -coords)
    img = np.zeros((n, n))
    for amp, a, b, cx, cy, deg in _PHANTOM_ELLIPSES:
        phi = math.radians(deg)
        c, s = math.cos(phi), math.sin(phi)
        xr = (xg - cx) * c + (yg - cy) * s
        yr = -(xg - cx) * s + (yg - cy) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += amp
    return np.clip(img, 0.0, 1.0).ravel()


@dataclass
class TomoGeometry:
    """Acquisition layout.

    kind is "parallel" or "fan"; distances are in pixel-size units
    (source-object 800, source-image 1200 mirror the reference layout).
    span_deg is the angular range swept by the view angles.
    """

    kind: str = "parallel"
    sod: float = 800.0
    sid: float = 1200.0
    span_deg: float = 180.0
    detector_span: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("parallel", "fan"):
            raise ValueError("geometry kind must be 'parallel' or 'fan'")
        if self.kind == "fan" and not 0 < self.sod < self.sid:
            raise ValueError("fan geometry needs 0 < sod < sid")
        if self.span_deg <= 0:
            raise ValueError("angular span must be positive")


def _siddon(p0, p1, h, w):
    """Chord lengths of the segment p0 -> p1 through the unit-pixel grid.

    The grid occupies [0, w] x [0, h] with pixel (i, j) = [j, j+1] x [i, i+1].
    Returns (flat pixel indices, lengths); both empty if the segment misses.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    seg = float(np.hypot(d[0], d[1]))
    if seg == 0.0:
        return np.empty(0, dtype=np.intp), np.empty(0)

    a_lo, a_hi = 0.0, 1.0
    for ax, extent in ((0, w), (1, h)):
        if d[ax] != 0.0:
            t0 = (0.0 - p0[ax]) / d[ax]
            t1 = (extent - p0[ax]) / d[ax]
            lo, hi = (t0, t1) if t0 <= t1 else (t1, t0)
            a_lo = max(a_lo, lo)
            a_hi = min(a_hi, hi)
        elif not 0.0 <= p0[ax] <= extent:
            return np.empty(0, dtype=np.intp), np.empty(0)
    if a_hi <= a_lo:
        return np.empty(0, dtype=np.intp), np.empty(0)

    cuts = [np.array([a_lo, a_hi])]
    for ax, extent in ((0, w), (1, h)):
        if d[ax] != 0.0:
            t = (np.arange(extent + 1) - p0[ax]) / d[ax]
            cuts.append(t[(t > a_lo) & (t < a_hi)])
    alphas = np.unique(np.concatenate(cuts))
    mids = 0.5 * (alphas[:-1] + alphas[1:])
    lengths = np.diff(alphas) * seg
    cols = np.clip(np.floor(p0[0] + mids * d[0]).astype(np.intp), 0, w - 1)
    rows = np.clip(np.floor(p0[1] + mids * d[1]).astype(np.intp), 0, h - 1)
    keep = lengths > 0.0
    return rows[keep] * w + cols[keep], lengths[keep]


def _ray_endpoints(geometry, angles, detectors, h, w):
    """Yield (p0, p1) per ray in grid coordinates, detector-major per angle."""
    cx, cy = w / 2.0, h / 2.0
    if geometry.kind == "parallel":
        span = geometry.detector_span or float(max(h, w))
        pitch = span / detectors
        offsets = (np.arange(detectors) + 0.5) * pitch - span / 2.0
        reach = 0.5 * math.hypot(h, w) + 1.0
        for theta in angles:
            dx, dy = math.cos(theta), math.sin(theta)
            px, py = -dy, dx
            for o in offsets:
                ox, oy = cx + px * o, cy + py * o
                yield (ox - dx * reach, oy - dy * reach), \
                      (ox + dx * reach, oy + dy * reach)
    else:
        mag = geometry.sid / geometry.sod
        # 1.5 x the magnified side covers the grid diagonal (factor sqrt(2))
        span = geometry.detector_span or mag * float(max(h, w)) * 1.5
        pitch = span / detectors
        offsets = (np.arange(detectors) + 0.5) * pitch - span / 2.0
        for theta in angles:
            dx, dy = math.cos(theta), math.sin(theta)
            sx = cx - dx * geometry.sod
            sy = cy - dy * geometry.sod
            dcx = sx + dx * geometry.sid
            dcy = sy + dy * geometry.sid
            px, py = -dy, dx
            for o in offsets:
                yield (sx, sy), (dcx + px * o, dcy + py * o)


def radon_projector(h, w, angles, detectors, geometry=None):
    """Sparse ray-driven projector: rows are rays, entries chord lengths.

    Rows are ordered angle-major (all detectors of angle 0 first); the
    adjoint is the transpose, i.e. unfiltered back-projection.  Pixels are
    unit squares; fan-beam rays start at the point source and stop at their
    detector cell.
    """
    h, w = int(h), int(w)
    if h < 2 or w < 2:
        raise ValueError("image must be at least 2 x 2")
    detectors = int(detectors)
    if detectors < 1:
        raise ValueError("need at least one detector")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        raise ValueError("need at least one angle")
    geometry = geometry or TomoGeometry()

    data, indices, indptr = [], [], [0]
    for p0, p1 in _ray_endpoints(geometry, angles, detectors, h, w):
        idx, lengths = _siddon(p0, p1, h, w)
        order = np.argsort(idx)
        indices.append(idx[order])
        data.append(lengths[order])
        indptr.append(indptr[-1] + idx.size)
    mat = sparse.csr_matrix(
        (np.concatenate(data) if data else np.empty(0),
         np.concatenate(indices) if indices else np.empty(0, dtype=np.intp),
         np.array(indptr)),
        shape=(angles.size * detectors, h * w))
    return LinearMap.from_matrix(mat)


def poisson_sinogram(clean, scale, seed=0):
    """Poisson draw with mean scale * clean, rescaled back by 1/scale.

    Negative inputs are clamped to zero first (count logged); larger scales
    mean lower relative noise.
    """
    clean = np.asarray(clean, dtype=float)
    if scale <= 0:
        raise ValueError("scale must be positive")
    neg = int(np.count_nonzero(clean < 0))
    if neg:
        logger.warning("clamped %d negative sinogram entries to zero", neg)
        clean = np.maximum(clean, 0.0)
    rng = np.random.default_rng(seed)
    return rng.poisson(scale * clean).astype(float) / scale


def psnr(x, ref):
    """10 log10(peak^2 / MSE) with peak = max(ref); inf when x == ref."""
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if x.shape != ref.shape:
        raise ValueError("shapes must match")
    peak = float(ref.max())
    if peak <= 0:
        raise ValueError("reference peak must be positive")
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


@dataclass
class TomoInstance:
    """Phantom, projector and noisy sinogram for one reconstruction run."""

    h: int
    w: int
    projector: LinearMap
    x_ref: np.ndarray
    z: np.ndarray
    geometry: TomoGeometry
    n_angles: int
    detectors: int
    alpha1: float = 1.0
    alpha2: float = 0.01
    noise_scale: float = 1e3
    seed: int = 0

    def __post_init__(self):
        if self.z.shape != (self.n_angles * self.detectors,):
            raise ValueError("sinogram length must be angles * detectors")


def make_tomo_instance(size=32, n_angles=60, detectors=48, geometry=None,
                       seed=0, alpha1=1.0, alpha2=0.01, noise_scale=1e3):
    """Phantom + projector + Poisson-noisy sinogram with the desk defaults."""
    geometry = geometry or TomoGeometry()
    angles = np.linspace(0.0, math.radians(geometry.span_deg), n_angles,
                         endpoint=False)
    proj = radon_projector(size, size, angles, detectors, geometry)
    x_ref = shepp_logan(size)
    clean = np.asarray(proj.forward(x_ref), dtype=float)
    # noise_scale is a dose level: expected photon counts at the sinogram
    # maximum.  poisson_sinogram wants counts per unit line integral.
    peak = float(clean.max())
    per_unit = noise_scale / peak if peak > 0 else noise_scale
    z = poisson_sinogram(clean, per_unit, seed)
    return TomoInstance(h=size, w=size, projector=proj, x_ref=x_ref, z=z,
                        geometry=geometry, n_angles=n_angles,
                        detectors=detectors, alpha1=alpha1, alpha2=alpha2,
                        noise_scale=noise_scale, seed=seed)


def _problem(inst):
    n = inst.h * inst.w
    return TvlsqProblem(M=inst.projector, z=inst.z, lo=np.zeros(n),
                        hi=np.ones(n), grad=discrete_gradient_2d(inst.h, inst.w),
                        grad_norm=math.sqrt(8.0), alpha1=inst.alpha1,
                        alpha2=inst.alpha2)


def tomo_objective(inst, x):
    """(alpha1/2) ||M x - z||^2 + alpha2 ||G x||_1 with the 2-D gradient."""
    return tv_objective(_problem(inst), x)


_RUNNERS = {
    "mtpd": mtpd_run,
    "cmtpd": cmtpd_run,
    "fhrb": fhrb_run,
    "condat-vu": condat_vu_run,
}


def write_pgm(path, image, maxval=65535):
    """Binary 16-bit portable graymap (P5, big-endian samples).

    image is a 2-D array; values are clipped to [0, 1] before quantization.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval must be in [1, 65535]")
    scaled = np.round(np.clip(img, 0.0, 1.0) * maxval)
    data = scaled.astype(">u2" if maxval > 255 else "u1")
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (img.shape[1], img.shape[0], maxval))
        fh.write(data.tobytes())


def tomo_solve(inst, algorithm, cfg=None):
    """Reconstruct with one algorithm; report includes PSNR against the
    phantom.  Returns (report, trace); trace.solution is the image vector."""
    if algorithm not in _RUNNERS:
        raise ValueError("unknown algorithm id %r" % algorithm)
    if cfg is None:
        cfg = SolverConfig(max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL,
                           seed=inst.seed)
    trace = _RUNNERS[algorithm](_problem(inst), cfg)
    report = report_from_trace(algorithm, trace,
                               tomo_objective(inst, trace.solution), inst.seed,
                               psnr=psnr(trace.solution, inst.x_ref))
    return report, trace
