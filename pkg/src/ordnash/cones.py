"""Normal directions of strict upper contour sets.

Three mechanisms produce elements of the normal cone of a player's strict
upper contour set at the current point:

* ``gradient_normal_direction`` -- the normalized negative utility gradient,
  by central finite differences (valid for concave utilities);
* ``polyhedral_normal_generators`` -- active-row normals when the contour set
  is an open polyhedron;
* ``sampled_separating_direction`` -- a separator recovered from an inner
  sample of the contour set via the minimum-norm point of the sample hull.

The empty contour set has normal cone equal to the whole space; that case is
flagged with the ``FULL_SPACE`` provenance instead of a direction list.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .errors import (
    EvaluationError,
    GameFormatError,
    InteriorPointError,
    SeparatorError,
)
from .minnorm import min_norm_point
from .model import (
    Block,
    CoordinateOrder,
    GameSpec,
    HalfspaceContour,
    PlayerId,
    Profile,
    UtilityPreference,
    evaluate_contour_rows,
)

__all__ = [
    "Provenance",
    "Direction",
    "ConeGenerators",
    "gradient_normal_direction",
    "polyhedral_normal_generators",
    "contour_polyhedron",
    "sampled_separating_direction",
    "cone_membership",
    "zero_in_hull",
]

_UNIT_TOL = 1e-12


class Provenance(str, Enum):
    """How a cone element was obtained."""

    GRADIENT = "gradient"
    POLYHEDRAL = "polyhedral"
    SAMPLED = "sampled"
    FULL_SPACE = "full-space"


@dataclass(frozen=True)
class Direction:
    """A unit direction (or the distinguished zero direction) for one player."""

    player: PlayerId
    vector: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))
        norm = float(np.linalg.norm(self.vector))
        if norm != 0.0 and abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(
                f"direction must be unit or zero, got norm {norm!r}"
            )

    @classmethod
    def unit(cls, player: PlayerId, vector) -> "Direction":
        arr = np.asarray(vector, dtype=np.float64)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(player, tuple(arr / norm))

    @classmethod
    def zero(cls, player: PlayerId, dim: int) -> "Direction":
        return cls(player, (0.0,) * dim)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vector, dtype=np.float64)

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.vector)


@dataclass(frozen=True)
class ConeGenerators:
    """A finite generator set for (part of) a normal cone."""

    player: PlayerId
    directions: tuple[Direction, ...]
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        for d in self.directions:
            if d.player != self.player:
                raise ValueError(
                    f"generator for player {d.player} in a set for player {self.player}"
                )


def gradient_normal_direction(
    game: GameSpec,
    player: PlayerId,
    x: Profile,
    *,
    step: float = 1e-6,
    gtol: float = 1e-10,
) -> Direction | None:
    """Normalized negative own-gradient of the utility, or None when flat.

    Central differences with the given step.  For a concave utility the
    returned direction lies in the normal cone of the strict upper contour
    set at ``x``.  Returns None when the gradient norm is at most ``gtol``.
    """
    pref = game.players[player].preference
    if not isinstance(pref, UtilityPreference):
        raise GameFormatError(
            f"player {player} has no utility; gradient direction undefined"
        )
    dim = game.dims[player]
    sl = game.own_slice(player)
    base = x.stacked
    batch = np.tile(base, (2 * dim, 1))
    for k in range(dim):
        batch[2 * k, sl.start + k] += step
        batch[2 * k + 1, sl.start + k] -= step
    values = np.asarray(pref.fn(batch), dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise EvaluationError(
            f"utility expression {pref.expr!r} non-finite near {base.tolist()}"
        )
    grad = (values[0::2] - values[1::2]) / (2.0 * step)
    norm = float(np.linalg.norm(grad))
    if norm <= gtol:
        return None
    return Direction.unit(player, -grad)


def _normalize_rows(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scale rows to unit normals; returns (a, b, keep) with zero rows dropped."""
    norms = np.linalg.norm(a, axis=1)
    keep = norms > 1e-15
    scale = np.where(keep, norms, 1.0)
    return a / scale[:, None], b / scale, keep


def _strictly_feasible(a: np.ndarray, b: np.ndarray, margin: float = 1e-9) -> bool:
    """Is the open polyhedron {y : a y < b} nonempty (with unit-normal rows)?"""
    if a.shape[0] == 0:
        return True
    dim = a.shape[1]
    # max t subject to a y + t <= b, t <= 1; strictly feasible iff optimum > 0.
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    a_ub = np.hstack([a, np.ones((a.shape[0], 1))])
    result = linprog(
        c,
        A_ub=a_ub,
        b_ub=b,
        bounds=[(None, None)] * dim + [(None, 1.0)],
        method="highs",
    )
    if result.status != 0:
        return False
    return float(result.x[-1]) > margin


def polyhedral_normal_generators(
    rows: tuple[np.ndarray, np.ndarray],
    xblock: Block,
    *,
    atol: float = 1e-9,
    assume_nonempty: bool = False,
) -> ConeGenerators:
    """Normal-cone generators of an open polyhedron {y : A y < b} at ``xblock``.

    Rows at (or beyond) their boundary at ``xblock`` contribute their outward
    normals, ordered by row index.  An empty polyhedron yields the full-space
    flag with no directions.  A point strictly inside every row is an error:
    the normal cone there is trivial.
    """
    a_raw, b_raw = (np.asarray(v, dtype=np.float64) for v in rows)
    a_raw = np.atleast_2d(a_raw)
    point = xblock.array
    if a_raw.shape[1] != point.size:
        raise GameFormatError(
            f"contour rows have {a_raw.shape[1]} columns, block has {point.size}"
        )
    a, b, keep = _normalize_rows(a_raw, b_raw)
    # A zero row 0 y < b is vacuous for b > 0 and kills the set for b <= 0.
    if np.any(~keep & (b_raw <= 0.0)):
        return ConeGenerators(xblock.player, (), Provenance.FULL_SPACE)
    a, b = a[keep], b[keep]
    if a.shape[0] == 0:
        raise InteriorPointError(
            "contour polyhedron is the whole space; interior point has trivial cone"
        )
    if not assume_nonempty and not _strictly_feasible(a, b):
        return ConeGenerators(xblock.player, (), Provenance.FULL_SPACE)
    slack = a @ point - b
    active = slack >= -atol
    if not np.any(active):
        raise InteriorPointError(
            "point is strictly inside the contour set; interior point has trivial cone"
        )
    directions = tuple(
        Direction.unit(xblock.player, a[i]) for i in np.flatnonzero(active)
    )
    return ConeGenerators(xblock.player, directions, Provenance.POLYHEDRAL)


def contour_polyhedron(
    game: GameSpec, player: PlayerId, x: Profile
) -> tuple[np.ndarray, np.ndarray] | None:
    """Rows (A, b) with U = {y : A y < b} when the contour set is polyhedral.

    CoordinateOrder contours are the open dominance orthant; HalfspaceContour
    rows are evaluated at ``x``.  Returns None for other preference variants.
    """
    pref = game.players[player].preference
    if isinstance(pref, CoordinateOrder):
        own = x.block(player).array
        return -np.eye(own.size), -own
    if isinstance(pref, HalfspaceContour):
        return evaluate_contour_rows(game, player, x)
    return None


def sampled_separating_direction(
    samples,
    xblock: Block,
    *,
    norm_tol: float = 1e-9,
) -> Direction | None:
    """Separator from an inner sample of a convex contour set.

    Computes the minimum-norm point z of conv{y - x} over the samples and
    returns the unit direction -z/||z||.  Returns None when there are no
    samples (the empirical contour set is empty).  Raises
    :class:`SeparatorError` when ||z|| falls below ``norm_tol``: the hull of
    the samples already surrounds the point, so no separator exists.
    """
    if isinstance(samples, np.ndarray):
        pts = np.atleast_2d(samples.astype(np.float64, copy=False))
    else:
        rows = [s.array if isinstance(s, Block) else np.asarray(s, float) for s in samples]
        if not rows:
            return None
        pts = np.vstack(rows)
    if pts.shape[0] == 0:
        return None
    diffs = pts - xblock.array
    result = min_norm_point(diffs)
    norm = float(np.linalg.norm(result.point))
    if norm < norm_tol:
        raise SeparatorError(
            f"no separator found: sample hull reaches within {norm:.3e} of the point"
        )
    return Direction.unit(xblock.player, -result.point)


def cone_membership(
    direction: Direction,
    samples,
    xblock: Block,
    tol: float = 1e-7,
) -> bool:
    """Does ``direction`` make a nonpositive (within tol) product with every sample offset?"""
    if isinstance(samples, np.ndarray):
        pts = np.atleast_2d(samples.astype(np.float64, copy=False))
    else:
        rows = [s.array if isinstance(s, Block) else np.asarray(s, float) for s in samples]
        if not rows:
            return True
        pts = np.vstack(rows)
    if pts.shape[0] == 0:
        return True
    offsets = pts - xblock.array
    return bool(np.all(offsets @ direction.array <= tol))


def zero_in_hull(generators, *, threshold: float = 1e-9) -> bool:
    """Is the zero vector in the convex hull of the generator directions?"""
    if isinstance(generators, ConeGenerators):
        vectors = [d.array for d in generators.directions]
    else:
        vectors = [
            g.array if isinstance(g, Direction) else np.asarray(g, dtype=np.float64)
            for g in generators
        ]
    if not vectors:
        return False
    result = min_norm_point(np.vstack(vectors))
    return float(np.linalg.norm(result.point)) <= threshold
