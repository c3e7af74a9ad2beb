"""Landmark selection for the low-rank range-kernel approximation.

``kmeans_landmarks`` (k-means++ seeding, then Lloyd iterations) is the
primary strategy; ``uniform_landmarks`` samples rows without replacement
as a baseline. All randomness flows from NumPy's PCG64 generator seeded
by the caller, so both are reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_ITER = 50


@dataclass(frozen=True)
class LandmarkSet:
    """Centroids plus each point's nearest-centroid assignment.

    ``quant_error`` is the summed squared distance of every point to its
    assigned centroid; ``errors`` records it after each assignment step
    (non-increasing across Lloyd iterations).
    """

    centroids: np.ndarray   # (m0, dim)
    assignment: np.ndarray  # (m,) int64, ties broken toward the smallest index
    quant_error: float
    errors: tuple[float, ...] = ()

    @property
    def count(self) -> int:
        return self.centroids.shape[0]


def _assign(
    points: np.ndarray, centroids: np.ndarray, exact: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    if exact:
        # differenced distances: exactly zero for coincident points, no
        # cancellation; used for the final reported assignment
        d2 = np.empty((points.shape[0], centroids.shape[0]))
        for j in range(centroids.shape[0]):
            diff = points - centroids[j]
            d2[:, j] = (diff * diff).sum(axis=1)
    else:
        # fast inner-loop form |p|^2 - 2 p.c + |c|^2; tiny negatives from
        # cancellation are clipped
        d2 = (
            (points * points).sum(axis=1)[:, None]
            - 2.0 * points @ centroids.T
            + (centroids * centroids).sum(axis=1)[None, :]
        )
    assignment = np.argmin(d2, axis=1)
    nearest = np.maximum(d2[np.arange(points.shape[0]), assignment], 0.0)
    return assignment.astype(np.int64), nearest


def _plus_plus_init(points: np.ndarray, m0: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    centroids = np.empty((m0, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(m)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, m0):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(m, p=d2 / total)
        else:
            idx = rng.integers(m)
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans_landmarks(
    points: np.ndarray,
    m0: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LandmarkSet:
    """Cluster ``points`` into ``m0`` groups; the centroids are the landmarks.

    k-means++ initialization, Lloyd iterations until assignments stabilize
    or ``max_iter`` is reached. Empty clusters are reseeded with the point
    farthest from its current centroid. Deterministic given
    (points, m0, seed).
    """
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    m = points.shape[0]
    if m0 < 1 or m0 > m:
        raise ValueError(f"m0 must be in [1, {m}], got {m0}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(points, m0, rng)

    dim = points.shape[1]
    errors: list[float] = []
    prev: np.ndarray | None = None
    for _ in range(max_iter):
        assignment, nearest = _assign(points, centroids)
        errors.append(float(nearest.sum()))
        if prev is not None and np.array_equal(assignment, prev):
            break
        prev = assignment

        counts = np.bincount(assignment, minlength=m0)
        sums = np.empty((m0, dim), dtype=np.float64)
        for d in range(dim):
            sums[:, d] = np.bincount(assignment, weights=points[:, d], minlength=m0)
        occupied = counts > 0
        centroids[occupied] = sums[occupied] / counts[occupied, None]
        if not occupied.all():
            taken = nearest.copy()
            for j in np.flatnonzero(~occupied):
                idx = int(np.argmax(taken))
                centroids[j] = points[idx]
                taken[idx] = -1.0

    # reported assignment/error use the exact distance form so coincident
    # points land at exactly zero
    assignment, nearest = _assign(points, centroids, exact=True)
    return LandmarkSet(
        centroids=centroids,
        assignment=assignment,
        quant_error=float(nearest.sum()),
        errors=tuple(errors),
    )


def uniform_landmarks(points: np.ndarray, m0: int, seed: int = 0) -> LandmarkSet:
    """Pick ``m0`` rows uniformly without replacement as landmarks."""
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    m = points.shape[0]
    if m0 < 1 or m0 > m:
        raise ValueError(f"m0 must be in [1, {m}], got {m0}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(m, size=m0, replace=False)
    centroids = points[idx].copy()
    assignment, nearest = _assign(points, centroids, exact=True)
    e = float(nearest.sum())
    return LandmarkSet(
        centroids=centroids,
        assignment=assignment,
        quant_error=e,
        errors=(e,),
    )
