"""Game model: players, ordinal preferences, and constraint maps.

A game couples per-player strategy boxes with an ordinal preference for each
player and a constraint map that may tie players together.  Preferences enter
only through their strict part: ``strictly_prefers(game, p, y, x)`` answers
whether player ``p`` strictly prefers deviating to own-block ``y`` while the
rivals stay at ``x``.  Everything downstream (normal cones, the solver, the
verifier) is built on that single predicate and on the feasible-region map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .errors import (
    EvaluationError,
    GameFormatError,
    ProfileError,
)
from .expressions import Expr, compile_expression, parse_expression

__all__ = [
    "PlayerId",
    "Block",
    "Profile",
    "UtilityPreference",
    "CoordinateOrder",
    "TrivialZero",
    "ContourRow",
    "HalfspaceContour",
    "ThresholdBand",
    "PreferenceSpec",
    "BoxOnly",
    "SharedLinear",
    "ConstraintMapSpec",
    "PlayerSpec",
    "GameSpec",
    "FeasibleRegion",
    "ValidationIssue",
    "assemble_profile",
    "split_profile",
    "strictly_prefers",
    "strict_upper_mask",
    "feasible_region",
    "upper_contour_sample",
    "sample_contour",
    "validate_spec",
]

PlayerId = int

_FEAS_TOL = 1e-9


def _as_float_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Block:
    """One player's strategy block."""

    player: PlayerId
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _as_float_tuple(self.values))
        if self.player < 0:
            raise ValueError(f"player index must be nonnegative, got {self.player}")
        if len(self.values) == 0:
            raise ValueError("block must have at least one coordinate")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError(f"block entries must be finite, got {self.values}")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Profile:
    """A full strategy profile, one block per player in player order."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for position, block in enumerate(self.blocks):
            if block.player != position:
                raise ProfileError(
                    f"blocks must be ordered by player; found player {block.player} "
                    f"at position {position}"
                )

    @cached_property
    def stacked(self) -> np.ndarray:
        return np.concatenate([b.array for b in self.blocks])

    def block(self, player: PlayerId) -> Block:
        return self.blocks[player]

    def rivals(self, player: PlayerId) -> np.ndarray:
        """All other blocks, concatenated in player order."""
        parts = [b.array for i, b in enumerate(self.blocks) if i != player]
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def with_block(self, player: PlayerId, values: Sequence[float]) -> "Profile":
        blocks = list(self.blocks)
        blocks[player] = Block(player, _as_float_tuple(values))
        return Profile(tuple(blocks))


@dataclass(frozen=True)
class UtilityPreference:
    """Strict preference by utility comparison: y beats x iff theta(y) > theta(x).

    ``expr`` is an arithmetic expression over the profile coordinates x1..xn.
    """

    expr: str

    @cached_property
    def parsed(self) -> Expr:
        return parse_expression(self.expr)

    @cached_property
    def fn(self):
        return compile_expression(self.parsed)


@dataclass(frozen=True)
class CoordinateOrder:
    """Componentwise order on the own block; strict part is all-coordinates-strict."""


@dataclass(frozen=True)
class TrivialZero:
    """Total indifference: the strict part is empty."""


@dataclass(frozen=True)
class ContourRow:
    """One open halfspace a(x) . y < b(x) of a contour polyhedron.

    ``coeffs`` has one expression per own-block coordinate and ``offset`` is
    the right-hand side, all in the profile variables x1..xn.
    """

    coeffs: tuple[str, ...]
    offset: str

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(str(c) for c in self.coeffs))
        object.__setattr__(self, "offset", str(self.offset))

    @cached_property
    def parsed_coeffs(self) -> tuple[Expr, ...]:
        return tuple(parse_expression(c) for c in self.coeffs)

    @cached_property
    def parsed_offset(self) -> Expr:
        return parse_expression(self.offset)


@dataclass(frozen=True)
class HalfspaceContour:
    """Strict upper contour set given directly as an open polyhedron."""

    rows: tuple[ContourRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValueError("HalfspaceContour needs at least one row")


@dataclass(frozen=True)
class ThresholdBand:
    """Two-coordinate relation: (a, b) weakly beats (x, y) iff a >= 0 and b >= y.

    The strict part is the asymmetric part of that relation.  Only defined for
    games whose profiles have exactly two coordinates.
    """


PreferenceSpec = Union[
    UtilityPreference, CoordinateOrder, TrivialZero, HalfspaceContour, ThresholdBand
]


@dataclass(frozen=True)
class BoxOnly:
    """Constraints decouple: each player moves freely in the own box."""


@dataclass(frozen=True)
class SharedLinear:
    """Shared rows A x <= b restricting each player with rivals held fixed."""

    a: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(_as_float_tuple(row) for row in self.a))
        object.__setattr__(self, "b", _as_float_tuple(self.b))
        if len(self.a) != len(self.b):
            raise ValueError(
                f"constraint rows ({len(self.a)}) and offsets ({len(self.b)}) disagree"
            )
        if len(self.a) == 0:
            raise ValueError("SharedLinear needs at least one row")

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.a, dtype=np.float64)

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.array(self.b, dtype=np.float64)


ConstraintMapSpec = Union[BoxOnly, SharedLinear]


@dataclass(frozen=True)
class PlayerSpec:
    """Dimension, box, and preference of one player."""

    dim: int
    box: tuple[tuple[float, float], ...]
    preference: PreferenceSpec

    def __post_init__(self):
        object.__setattr__(
            self, "box", tuple((float(lo), float(hi)) for lo, hi in self.box)
        )
        if self.dim < 1:
            raise ValueError(f"player dimension must be positive, got {self.dim}")
        if len(self.box) != self.dim:
            raise ValueError(
                f"box has {len(self.box)} intervals for a {self.dim}-dimensional block"
            )
        for lo, hi in self.box:
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"box bounds must be finite, got ({lo}, {hi})")


@dataclass(frozen=True)
class GameSpec:
    """Immutable description of a complete game."""

    players: tuple[PlayerSpec, ...]
    constraints: ConstraintMapSpec = field(default_factory=BoxOnly)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        if not self.players:
            raise ValueError("a game needs at least one player")

    @property
    def n_players(self) -> int:
        return len(self.players)

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.players)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.cumsum((0,) + self.dims[:-1]))

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def own_slice(self, player: PlayerId) -> slice:
        start = self.offsets[player]
        return slice(start, start + self.dims[player])

    @cached_property
    def box_lo(self) -> np.ndarray:
        return np.array([lo for p in self.players for lo, _ in p.box])

    @cached_property
    def box_hi(self) -> np.ndarray:
        return np.array([hi for p in self.players for _, hi in p.box])

    def player_box(self, player: PlayerId) -> tuple[np.ndarray, np.ndarray]:
        sl = self.own_slice(player)
        return self.box_lo[sl], self.box_hi[sl]


@dataclass
class FeasibleRegion:
    """Box intersected with halfspaces; the feasible set of one player.

    Emptiness is reported through :attr:`is_empty`, never raised from the
    constructor, so callers can surface degenerate constraint maps as data.
    """

    lo: np.ndarray
    hi: np.ndarray
    normals: np.ndarray  # shape (k, dim); k may be zero
    offsets: np.ndarray  # shape (k,)
    forced_empty: bool = False

    def contains(self, point: np.ndarray, tol: float = _FEAS_TOL) -> bool:
        y = np.asarray(point, dtype=np.float64)
        if self.forced_empty:
            return False
        if np.any(y < self.lo - tol) or np.any(y > self.hi + tol):
            return False
        if self.normals.size:
            slack = self.normals @ y - self.offsets
            if np.any(slack > tol * np.maximum(1.0, np.abs(self.offsets))):
                return False
        return True

    def contains_many(self, points: np.ndarray, tol: float = _FEAS_TOL) -> np.ndarray:
        """Vectorized :meth:`contains` over rows of an (m, dim) array."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.forced_empty:
            return np.zeros(pts.shape[0], dtype=bool)
        mask = np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)
        if self.normals.size:
            slack = pts @ self.normals.T - self.offsets
            mask &= np.all(
                slack <= tol * np.maximum(1.0, np.abs(self.offsets)), axis=1
            )
        return mask

    @cached_property
    def is_empty(self) -> bool:
        if self.forced_empty or np.any(self.lo > self.hi):
            return True
        if self.normals.size == 0:
            return False
        result = linprog(
            c=np.zeros(self.lo.size),
            A_ub=self.normals,
            b_ub=self.offsets,
            bounds=list(zip(self.lo, self.hi)),
            method="highs",
        )
        return result.status != 0


@dataclass(frozen=True)
class ValidationIssue:
    """One problem found by :func:`validate_spec`."""

    code: str
    message: str
    player: PlayerId | None = None


def assemble_profile(game: GameSpec, blocks: Sequence[Block]) -> Profile:
    """Assemble per-player blocks into a profile, validating coverage and dims."""
    seen: dict[int, Block] = {}
    for block in blocks:
        if block.player in seen:
            raise ProfileError(f"duplicate block for player {block.player}")
        if block.player >= game.n_players:
            raise ProfileError(
                f"player {block.player} out of range for a {game.n_players}-player game"
            )
        seen[block.player] = block
    missing = [p for p in range(game.n_players) if p not in seen]
    if missing:
        raise ProfileError(f"missing block for player(s) {missing}")
    for player, block in seen.items():
        if block.dim != game.dims[player]:
            raise ProfileError(
                f"player {player} block has dimension {block.dim}, "
                f"expected {game.dims[player]}"
            )
    return Profile(tuple(seen[p] for p in range(game.n_players)))


def split_profile(game: GameSpec, vector: Sequence[float]) -> Profile:
    """Split a stacked vector into a profile (inverse of ``Profile.stacked``)."""
    flat = np.asarray(vector, dtype=np.float64).ravel()
    if flat.size != game.total_dim:
        raise ProfileError(
            f"vector has {flat.size} coordinates, game has {game.total_dim}"
        )
    blocks = tuple(
        Block(p, tuple(flat[game.own_slice(p)])) for p in range(game.n_players)
    )
    return Profile(blocks)


def _batch_profiles(game: GameSpec, player: PlayerId, own: np.ndarray, x: Profile) -> np.ndarray:
    """Stacked profiles (m, n) equal to x with the own block replaced row-wise."""
    own = np.atleast_2d(np.asarray(own, dtype=np.float64))
    batch = np.tile(x.stacked, (own.shape[0], 1))
    batch[:, game.own_slice(player)] = own
    return batch


def _utility_values(pref: UtilityPreference, batch: np.ndarray) -> np.ndarray:
    values = pref.fn(batch)
    values = np.broadcast_to(np.asarray(values, dtype=np.float64), batch.shape[:-1])
    if not np.all(np.isfinite(values)):
        raise EvaluationError(
            f"utility expression {pref.expr!r} evaluated to a non-finite value"
        )
    return values


def evaluate_contour_rows(
    game: GameSpec, player: PlayerId, x: Profile
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate HalfspaceContour rows at profile ``x``: arrays (A, b) with A y < b."""
    pref = game.players[player].preference
    if not isinstance(pref, HalfspaceContour):
        raise GameFormatError("player preference has no contour rows")
    point = x.stacked
    a_rows = []
    b_vals = []
    for row in pref.rows:
        coeffs = [float(np.asarray(c.evaluate(point))) for c in row.parsed_coeffs]
        offset = float(np.asarray(row.parsed_offset.evaluate(point)))
        if not all(np.isfinite(coeffs)) or not np.isfinite(offset):
            raise EvaluationError("contour row evaluated to a non-finite value")
        a_rows.append(coeffs)
        b_vals.append(offset)
    return np.array(a_rows), np.array(b_vals)


def _threshold_band_weak(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    # (a, b) weakly beats (x, y) iff a >= 0 and b >= y, on two-coordinate profiles.
    return (z[..., 0] >= 0.0) & (z[..., 1] >= w[..., 1])


def strict_upper_mask(
    game: GameSpec, player: PlayerId, candidates: np.ndarray, x: Profile
) -> np.ndarray:
    """Vectorized strict preference: which candidate own-blocks beat ``x``.

    ``candidates`` is an (m, dim) array of own blocks for ``player``; returns a
    boolean array of length m.
    """
    own = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if own.shape[1] != game.dims[player]:
        raise ProfileError(
            f"candidates have dimension {own.shape[1]}, "
            f"player {player} has dimension {game.dims[player]}"
        )
    pref = game.players[player].preference

    if isinstance(pref, TrivialZero):
        return np.zeros(own.shape[0], dtype=bool)

    if isinstance(pref, CoordinateOrder):
        current = x.block(player).array
        return np.all(own > current, axis=1)

    if isinstance(pref, UtilityPreference):
        batch = _batch_profiles(game, player, own, x)
        base = _utility_values(pref, x.stacked[None, :])[0]
        return _utility_values(pref, batch) > base

    if isinstance(pref, HalfspaceContour):
        a, b = evaluate_contour_rows(game, player, x)
        return np.all(own @ a.T < b, axis=1)

    if isinstance(pref, ThresholdBand):
        if game.total_dim != 2:
            raise GameFormatError(
                "ThresholdBand preference requires a two-coordinate game"
            )
        batch = _batch_profiles(game, player, own, x)
        base = np.broadcast_to(x.stacked, batch.shape)
        forward = _threshold_band_weak(batch, base)
        backward = _threshold_band_weak(base, batch)
        return forward & ~backward

    raise GameFormatError(f"unknown preference variant {type(pref).__name__}")


def strictly_prefers(
    game: GameSpec, player: PlayerId, deviation, x: Profile
) -> bool:
    """Does ``player`` strictly prefer own-block ``deviation`` over staying at ``x``?"""
    if isinstance(deviation, Block):
        deviation = deviation.array
    mask = strict_upper_mask(game, player, np.atleast_2d(deviation), x)
    return bool(mask[0])


def feasible_region(
    game: GameSpec, player: PlayerId, rivals: Sequence[float]
) -> FeasibleRegion:
    """Feasible set of ``player`` with the rivals fixed at ``rivals``.

    ``rivals`` concatenates the other players' blocks in player order.
    """
    rivals = np.asarray(rivals, dtype=np.float64).ravel()
    expected = game.total_dim - game.dims[player]
    if rivals.size != expected:
        raise ProfileError(
            f"rivals vector has {rivals.size} coordinates, expected {expected}"
        )
    lo, hi = game.player_box(player)
    if isinstance(game.constraints, BoxOnly):
        return FeasibleRegion(lo.copy(), hi.copy(), np.empty((0, lo.size)), np.empty(0))

    shared = game.constraints
    sl = game.own_slice(player)
    rival_cols = np.ones(game.total_dim, dtype=bool)
    rival_cols[sl] = False
    a_own = shared.matrix[:, sl]
    b_eff = shared.rhs - shared.matrix[:, rival_cols] @ rivals

    normals = []
    offsets = []
    forced_empty = False
    for a_row, b_row in zip(a_own, b_eff):
        if np.max(np.abs(a_row)) <= 1e-15:
            # Row does not involve this player; rivals alone decide it.
            if b_row < -_FEAS_TOL:
                forced_empty = True
            continue
        normals.append(a_row)
        offsets.append(b_row)
    normals_arr = np.array(normals) if normals else np.empty((0, lo.size))
    offsets_arr = np.array(offsets) if offsets else np.empty(0)
    return FeasibleRegion(lo.copy(), hi.copy(), normals_arr, offsets_arr, forced_empty)


def sample_contour(
    game: GameSpec,
    player: PlayerId,
    x: Profile,
    count: int,
    seed: int,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
    max_attempts: int | None = None,
) -> list[Block]:
    """Seeded rejection sample of the strict upper contour set over ``bounds``.

    Returns up to ``count`` accepted points in draw order; fewer (possibly
    none) when the contour set misses the sampling box or is thin.
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    if bounds is None:
        lo, hi = game.player_box(player)
    else:
        lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    if count == 0:
        return []
    attempts = max_attempts if max_attempts is not None else max(20 * count, 2000)
    rng = np.random.default_rng(seed)
    draws = rng.uniform(lo, hi, size=(attempts, lo.size))
    mask = strict_upper_mask(game, player, draws, x)
    accepted = draws[mask][:count]
    return [Block(player, tuple(row)) for row in accepted]


def upper_contour_sample(
    game: GameSpec, player: PlayerId, x: Profile, count: int, seed: int
) -> list[Block]:
    """Sample the strict upper contour set restricted to the player's box."""
    return sample_contour(game, player, x, count, seed)


def _probe_profiles(game: GameSpec, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo, hi = game.box_lo, game.box_hi
    width = np.where(hi > lo, hi - lo, 1.0)
    return rng.uniform(0.0, 1.0, size=(count, game.total_dim)) * width + lo


def validate_spec(game: GameSpec, probe_count: int = 16, seed: int = 0) -> list[ValidationIssue]:
    """Check a game for structural problems; issues are returned, not raised."""
    issues: list[ValidationIssue] = []
    n = game.total_dim

    for idx, spec in enumerate(game.players):
        for lo, hi in spec.box:
            if lo >= hi:
                issues.append(
                    ValidationIssue(
                        "empty-interval",
                        f"player {idx} box interval [{lo}, {hi}] is empty",
                        idx,
                    )
                )
        pref = spec.preference
        if isinstance(pref, UtilityPreference):
            issues.extend(_validate_expression(pref.expr, n, idx, "utility"))
        elif isinstance(pref, HalfspaceContour):
            for row_idx, row in enumerate(pref.rows):
                if len(row.coeffs) != spec.dim:
                    issues.append(
                        ValidationIssue(
                            "row-arity",
                            f"player {idx} contour row {row_idx} has "
                            f"{len(row.coeffs)} coefficients for a {spec.dim}-dimensional block",
                            idx,
                        )
                    )
                for text in (*row.coeffs, row.offset):
                    issues.extend(
                        _validate_expression(text, n, idx, f"contour row {row_idx}")
                    )
        elif isinstance(pref, ThresholdBand) and n != 2:
            issues.append(
                ValidationIssue(
                    "threshold-band-arity",
                    f"ThresholdBand needs a two-coordinate game, this one has {n}",
                    idx,
                )
            )

    if isinstance(game.constraints, SharedLinear):
        if game.constraints.matrix.shape[1] != n:
            issues.append(
                ValidationIssue(
                    "constraint-arity",
                    f"constraint rows have {game.constraints.matrix.shape[1]} "
                    f"columns, game has {n} coordinates",
                )
            )

    if issues:
        return issues  # probing needs a structurally sound game

    # Sampling probe: catch non-finite utilities and contour rows that break
    # irreflexivity (the current point strictly inside its own contour set).
    probes = _probe_profiles(game, probe_count, seed)
    for idx, spec in enumerate(game.players):
        pref = spec.preference
        if not isinstance(pref, (UtilityPreference, HalfspaceContour)):
            continue
        for row in probes:
            profile = split_profile(game, row)
            own = profile.block(idx).array
            try:
                if strictly_prefers(game, idx, own, profile):
                    issues.append(
                        ValidationIssue(
                            "irreflexivity",
                            f"player {idx} strictly prefers a point to itself "
                            f"at profile {np.round(row, 6).tolist()}",
                            idx,
                        )
                    )
                    break
            except EvaluationError as err:
                issues.append(ValidationIssue("non-finite", str(err), idx))
                break
    return issues


def _validate_expression(
    text: str, total_dim: int, player: PlayerId, where: str
) -> list[ValidationIssue]:
    from .errors import ExpressionError

    try:
        expr = parse_expression(text)
    except ExpressionError as err:
        return [
            ValidationIssue(
                "bad-expression", f"player {player} {where}: {err}", player
            )
        ]
    out_of_range = sorted(i for i in expr.variables() if i >= total_dim)
    if out_of_range:
        names = ", ".join(f"x{i + 1}" for i in out_of_range)
        return [
            ValidationIssue(
                "unknown-variable",
                f"player {player} {where} references {names} but the game has "
                f"{total_dim} coordinates",
                player,
            )
        ]
    return []
