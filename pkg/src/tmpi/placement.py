"""Per-tile depth plane placement.

Given a tile's depth samples and per-pixel confidence weights, predict the
few plane depths that best represent the tile: confidence-weighted k-means
with deterministic quantile seeding plus jittered restarts, a
linear-in-disparity baseline, and depth discretization against the placed
planes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

__all__ = [
    "ClusterResult",
    "estimate_confidence",
    "linear_disparity_planes",
    "weighted_kmeans",
    "place_planes",
    "discretize",
    "reconstruction_error",
]

DEFAULT_MAX_ITER = 50
DEFAULT_TOL = 1e-5
DEFAULT_RESTARTS = 4
# centers closer than this (relative) collapse to a single plane
_MERGE_RTOL = 1e-9


def _as_array(x) -> np.ndarray:
    return np.asarray(getattr(x, "data", x))


@dataclass(frozen=True)
class ClusterResult:
    """Placed planes plus the per-pixel assignment that produced them."""

    planes: np.ndarray   # strictly increasing depths, shape (k,), k <= n
    labels: np.ndarray   # int array, same shape as the input samples
    iterations: int
    inertia: float


def estimate_confidence(depth, window: int = 5, scale: float | None = None) -> np.ndarray:
    """Down-weight depth samples that disagree with their local median.

    confidence = exp(-|depth - median| / scale). Smooth regions score ~1,
    isolated speckle outliers score near 0. When scale is None it defaults
    to 5% of the raster's depth range (or 1 if the raster is constant).
    """
    d = _as_array(depth).astype(np.float64)
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if scale is None:
        span = float(d.max() - d.min())
        scale = 0.05 * span if span > 0 else 1.0
    if scale <= 0:
        raise ValueError("scale must be positive")
    med = median_filter(d, size=window, mode="nearest")
    return np.exp(-np.abs(d - med) / scale).astype(np.float32)


def linear_disparity_planes(d_min: float, d_max: float, n: int) -> np.ndarray:
    """n plane depths equally spaced in disparity between d_min and d_max."""
    if d_min <= 0 or d_max <= 0:
        raise ValueError("depths must be positive")
    if d_max < d_min:
        raise ValueError("d_max must be >= d_min")
    if n < 1:
        raise ValueError("need at least one plane")
    if n == 1 or d_min == d_max:
        return _dedup_planes(np.full(n, 0.5 * (d_min + d_max)))
    disp = np.linspace(1.0 / d_min, 1.0 / d_max, n)
    return np.sort(1.0 / disp)


def _weighted_quantile_centers(d: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Centers at the (j + 0.5)/n weighted quantiles of the samples."""
    order = np.argsort(d, kind="stable")
    ds, ws = d[order], w[order]
    cum = np.cumsum(ws)
    mid = (cum - 0.5 * ws) / cum[-1]
    q = (np.arange(n) + 0.5) / n
    return np.interp(q, mid, ds)


def _kmeanspp_centers(d: np.ndarray, w: np.ndarray, n: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Weighted k-means++ seeding over the distinct sample values."""
    vals, inv = np.unique(d, return_inverse=True)
    wv = np.bincount(inv, weights=w, minlength=len(vals))
    if wv.sum() <= 0:
        wv = np.ones_like(wv)
    probs = wv / wv.sum()
    centers = [vals[rng.choice(len(vals), p=probs)]]
    for _ in range(1, min(n, len(vals))):
        d2 = np.min((vals[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        p = wv * d2
        if p.sum() <= 0:
            break
        centers.append(vals[rng.choice(len(vals), p=p / p.sum())])
    return np.sort(np.array(centers))


# above this many distinct values the exact DP seeding is skipped
_DP_LIMIT = 64


def _dp_centers(d: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Globally optimal 1-D weighted k-means centers via interval DP.

    Optimal 1-D clusters are contiguous in sorted order, so the optimum is
    a min-cost partition into at most n intervals. O(n * N^2); only used
    for small distinct-value counts.
    """
    vals, inv = np.unique(d, return_inverse=True)
    wv = np.bincount(inv, weights=w, minlength=len(vals))
    N = len(vals)
    cw = np.concatenate([[0.0], np.cumsum(wv)])
    cwd = np.concatenate([[0.0], np.cumsum(wv * vals)])
    cwd2 = np.concatenate([[0.0], np.cumsum(wv * vals * vals)])

    def cost(a, b):  # interval [a, b)
        sw = cw[b] - cw[a]
        if sw <= 0:
            return 0.0
        swd = cwd[b] - cwd[a]
        return (cwd2[b] - cwd2[a]) - swd * swd / sw

    k_max = min(n, N)
    best = np.full((k_max + 1, N + 1), np.inf)
    split = np.zeros((k_max + 1, N + 1), dtype=int)
    best[0, 0] = 0.0
    for k in range(1, k_max + 1):
        for i in range(k, N + 1):
            for j in range(k - 1, i):
                c = best[k - 1, j] + cost(j, i)
                if c < best[k, i]:
                    best[k, i] = c
                    split[k, i] = j
    centers = []
    i = N
    for k in range(k_max, 0, -1):
        j = split[k, i]
        sw = cw[i] - cw[j]
        centers.append((cwd[i] - cwd[j]) / sw if sw > 0 else vals[j:i].mean())
        i = j
    return np.sort(np.array(centers))


def _dedup_planes(centers: np.ndarray) -> np.ndarray:
    """Sort and merge centers that coincide, keeping strict increase."""
    c = np.sort(np.asarray(centers, dtype=np.float64))
    keep = [c[0]]
    for v in c[1:]:
        if v - keep[-1] > _MERGE_RTOL * max(1.0, abs(v)):
            keep.append(v)
    return np.array(keep)


def weighted_kmeans(depths, weights, n: int,
                    max_iter: int = DEFAULT_MAX_ITER,
                    tol: float = DEFAULT_TOL,
                    init: np.ndarray | None = None) -> ClusterResult:
    """Lloyd iterations on 1-D samples with per-sample weights.

    Assignment goes to the nearest center (ties to the lower index); the
    update step moves each center to the weighted mean of its members.
    Stops when the max relative center motion drops below tol. Empty
    clusters are dropped from the result, so the returned plane count can
    be smaller than n.
    """
    d = _as_array(depths).astype(np.float64)
    w = _as_array(weights).astype(np.float64)
    if d.shape != w.shape:
        raise ValueError("depths and weights must have the same shape")
    if n < 1:
        raise ValueError("need at least one cluster")
    flat_d, flat_w = d.ravel(), w.ravel()
    if flat_w.sum() <= 0:
        raise ValueError("weights sum to zero")
    if np.any(flat_d <= 0):
        raise ValueError("depth samples must be positive")

    if init is None:
        centers = _weighted_quantile_centers(flat_d, flat_w, n)
    else:
        centers = np.sort(np.asarray(init, dtype=np.float64))
    centers = np.unique(centers)

    # zero-weight samples still get labels but are excluded from all sums,
    # so adding them to an input cannot perturb the centers even in the
    # last bit (summation grouping stays identical)
    pos = flat_w > 0
    pd, pw = flat_d[pos], flat_w[pos]

    labels = np.zeros(flat_d.shape, dtype=np.intp)
    inertia = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        pdist2 = (pd[:, None] - centers[None, :]) ** 2
        plabels = np.argmin(pdist2, axis=1)
        prev_inertia = inertia
        inertia = float(np.sum(pw * pdist2[np.arange(len(pd)), plabels]))
        assert inertia <= prev_inertia + 1e-9 * max(1.0, abs(prev_inertia)) \
            if np.isfinite(prev_inertia) else True, "inertia increased"
        new_centers = centers.copy()
        for k in range(len(centers)):
            members = plabels == k
            wk = pw[members].sum()
            if wk > 0:
                new_centers[k] = np.sum(pw[members] * pd[members]) / wk
        motion = np.max(np.abs(new_centers - centers) / np.maximum(np.abs(centers), 1e-30))
        centers = new_centers
        if motion < tol:
            break

    # final assignment of every sample against the converged centers
    pdist2 = (pd[:, None] - centers[None, :]) ** 2
    plabels = np.argmin(pdist2, axis=1)
    inertia = float(np.sum(pw * pdist2[np.arange(len(pd)), plabels]))
    labels = np.argmin((flat_d[:, None] - centers[None, :]) ** 2, axis=1)

    # drop clusters with no (positively weighted) members and coincident
    # centers, renumber labels
    occupied = np.unique(plabels)
    centers = _dedup_planes(centers[occupied])
    labels = np.argmin(np.abs(flat_d[:, None] - centers[None, :]), axis=1)
    return ClusterResult(planes=centers, labels=labels.reshape(d.shape),
                         iterations=iterations, inertia=inertia)


def place_planes(tile_depth, tile_conf, n: int,
                 restarts: int = DEFAULT_RESTARTS,
                 seed: int = 0,
                 max_iter: int = DEFAULT_MAX_ITER,
                 tol: float = DEFAULT_TOL) -> ClusterResult:
    """Best-of-restarts weighted k-means for one tile.

    The first run seeds centers at weighted quantiles; subsequent runs use
    seeded k-means++ jitter. On tiles with few distinct depths one extra
    run is seeded with the exact interval-DP optimum, so micro instances
    always reach the global minimum. Deterministic for a given seed.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    d = _as_array(tile_depth)
    w = _as_array(tile_conf)
    flat_d = d.ravel().astype(np.float64)
    flat_w = w.ravel().astype(np.float64)
    rng = np.random.default_rng(seed)
    inits = [None]
    if len(np.unique(flat_d)) <= _DP_LIMIT:
        inits.append(_dp_centers(flat_d, flat_w, n))
    while len(inits) < restarts:
        inits.append(_kmeanspp_centers(flat_d, flat_w, n, rng))
    best = None
    for init in inits:
        result = weighted_kmeans(d, w, n, max_iter=max_iter, tol=tol, init=init)
        if best is None or result.inertia < best.inertia - 1e-15:
            best = result
    return best


def discretize(tile_depth, result: ClusterResult) -> np.ndarray:
    """Replace every depth sample by its assigned plane depth."""
    return result.planes[result.labels].astype(np.float64)


def reconstruction_error(original, discretized) -> float:
    """Mean absolute depth error of a discretization."""
    a = _as_array(original).astype(np.float64)
    b = _as_array(discretized).astype(np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))
