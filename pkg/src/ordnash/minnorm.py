"""Minimum-norm point in the convex hull of finitely many points.

Gilbert-style Frank-Wolfe iteration with pairwise (away) steps and exact line
search.  Pairwise steps give linear convergence on polytopes, which matters
here because hull-membership decisions compare the final norm against
thresholds as small as 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MinNormResult", "min_norm_point"]


@dataclass(frozen=True)
class MinNormResult:
    point: np.ndarray  # the (near-)minimum-norm point of the hull
    gap: float  # final Frank-Wolfe dual gap <z, z - p_s>
    iters: int
    converged: bool


def min_norm_point(
    points,
    *,
    rel_gap: float = 1e-12,
    abs_gap: float = 1e-24,
    norm_stop: float = 1e-12,
    max_iters: int = 50_000,
) -> MinNormResult:
    """Minimize ||z|| over z in conv(points).

    Stops when the dual gap certifies near-optimality (``rel_gap`` relative to
    ||z||^2, floored by ``abs_gap``), when ||z|| falls below ``norm_stop``
    (zero is in the hull for every practical purpose), or when rounding stalls
    progress.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise ValueError("min_norm_point needs at least one point")
    m = pts.shape[0]

    start = int(np.argmin(np.einsum("ij,ij->i", pts, pts)))
    weights = np.zeros(m)
    weights[start] = 1.0
    z = pts[start].copy()

    stall = 0
    best_sq = float(z @ z)
    gap = float("inf")
    for it in range(1, max_iters + 1):
        sq = float(z @ z)
        if np.sqrt(sq) <= norm_stop:
            return MinNormResult(z, 0.0, it, True)
        scores = pts @ z
        fw = int(np.argmin(scores))
        gap = sq - float(scores[fw])
        if gap <= max(abs_gap, rel_gap * sq):
            return MinNormResult(z, gap, it, True)

        support = np.flatnonzero(weights > 0)
        away = int(support[np.argmax(scores[support])])
        direction = pts[fw] - pts[away]
        denom = float(direction @ direction)
        if denom <= 0.0:
            return MinNormResult(z, gap, it, True)
        step = (float(scores[away]) - float(scores[fw])) / denom
        step = min(step, float(weights[away]))
        if step <= 0.0:
            return MinNormResult(z, gap, it, True)
        weights[fw] += step
        weights[away] -= step
        if weights[away] < 1e-16:
            weights[away] = 0.0
        z += step * direction

        # Rounding can stall the gap above the target; give up after a quiet
        # stretch and report the best certificate we have.
        if sq < best_sq - 1e-18:
            best_sq = sq
            stall = 0
        else:
            stall += 1
            if stall >= 256:
                return MinNormResult(z, gap, it, False)
        if it % 1024 == 0:
            z = weights @ pts  # shed accumulated drift

    return MinNormResult(z, gap, max_iters, False)
