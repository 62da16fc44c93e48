"""Independent certification of candidate equilibria and solver output.

Everything here re-derives its verdict from the game definition alone:
grid search over feasible deviations (``check_gne_grid``, ``brute_force_gne``),
exact linear minimization of the variational inequality margin
(``check_svip``), executable forms of the two bridge properties between
variational solutions and equilibria, and a numeric lower-hemicontinuity
probe for contour maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cones import Direction, sampled_separating_direction
from .errors import GridBudgetError, InfeasiblePointError, SeparatorError
from .model import (
    BoxOnly,
    GameSpec,
    PlayerId,
    Profile,
    SharedLinear,
    TrivialZero,
    UtilityPreference,
    feasible_region,
    sample_contour,
    split_profile,
    strict_upper_mask,
)
from .solver import SolverConfig, project_feasible, solve_svip

__all__ = [
    "Certificate",
    "grid_coordinates",
    "player_grid",
    "check_gne_grid",
    "check_svip",
    "brute_force_gne",
    "theorem1_property",
    "theorem2_property",
    "lhc_probe",
]

_GRID_BUDGET = 10_000_000
_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    """Outcome of one verification; ``witness`` explains failures."""

    kind: str  # one of: gne-grid, svip, theorem1, theorem2, lhc
    passed: bool
    resolution: float | None
    witness: object | None
    detail: str


def grid_coordinates(lo: float, hi: float, h: float) -> np.ndarray:
    """Lattice lo, lo+h, ... clipped into [lo, hi]; includes hi when h divides."""
    if h <= 0:
        raise ValueError(f"grid step must be positive, got {h}")
    span = hi - lo
    n = int(np.floor(span / h + 1e-9))
    pts = lo + h * np.arange(n + 1)
    if abs(pts[-1] - hi) <= 1e-9 * max(1.0, abs(hi), h):
        pts[-1] = hi
    return pts


def player_grid(game: GameSpec, player: PlayerId, h: float) -> np.ndarray:
    """All grid points of one player's box, shape (m, dim), last axis fastest."""
    lo, hi = game.player_box(player)
    axes = [grid_coordinates(l, u, h) for l, u in zip(lo, hi)]
    total = int(np.prod([a.size for a in axes]))
    if total > _GRID_BUDGET:
        raise GridBudgetError(
            f"player grid would have {total} points, budget is {_GRID_BUDGET}"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _require_feasible(game: GameSpec, x: Profile):
    regions = []
    for player in range(game.n_players):
        region = feasible_region(game, player, x.rivals(player))
        if not region.contains(x.block(player).array):
            raise InfeasiblePointError(
                f"player {player} block {x.block(player).values} violates its "
                f"feasible set; cannot certify an infeasible point"
            )
        regions.append(region)
    return regions


def check_gne_grid(game: GameSpec, x: Profile, h: float) -> Certificate:
    """Search the deviation grid of every player for a strict improvement.

    Passes when no feasible grid deviation is strictly preferred.  The witness
    on failure is ``(player, deviation)`` for the first improving grid point
    in grid order.
    """
    regions = _require_feasible(game, x)
    for player in range(game.n_players):
        candidates = player_grid(game, player, h)
        feasible = regions[player].contains_many(candidates)
        if not np.any(feasible):
            continue
        pool = candidates[feasible]
        better = strict_upper_mask(game, player, pool, x)
        if np.any(better):
            first = pool[int(np.argmax(better))]
            return Certificate(
                kind="gne-grid",
                passed=False,
                resolution=h,
                witness=(player, tuple(float(v) for v in first)),
                detail=(
                    f"player {player} strictly prefers grid deviation "
                    f"{np.round(first, 12).tolist()}"
                ),
            )
    return Certificate(
        kind="gne-grid",
        passed=True,
        resolution=h,
        witness=None,
        detail=f"no improving feasible deviation on the step-{h} grid",
    )


def _box_linear_min(lo: np.ndarray, hi: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.where(g > 0, lo, hi)


def _polytope_vertices(
    lo: np.ndarray, hi: np.ndarray, normals: np.ndarray, offsets: np.ndarray
) -> np.ndarray:
    """Vertices of {lo <= y <= hi, normals y <= offsets} by basis enumeration."""
    dim = lo.size
    rows = [np.vstack([np.eye(dim), -np.eye(dim), normals])]
    rhs = [np.concatenate([hi, -lo, offsets])]
    a_all = np.vstack(rows)
    b_all = np.concatenate(rhs)
    vertices = []
    scale = np.maximum(1.0, np.abs(b_all))
    for combo in itertools.combinations(range(a_all.shape[0]), dim):
        a_sq = a_all[list(combo)]
        if abs(np.linalg.det(a_sq)) < 1e-12:
            continue
        v = np.linalg.solve(a_sq, b_all[list(combo)])
        if np.all(a_all @ v <= b_all + 1e-9 * scale):
            vertices.append(v)
    return np.array(vertices) if vertices else np.empty((0, dim))


def _exact_linear_min(
    region, g: np.ndarray, fallback: np.ndarray
) -> tuple[float, np.ndarray]:
    """Minimize <g, y> over a feasible region; exact for the supported shapes."""
    if region.normals.shape[0] == 0:
        y = _box_linear_min(region.lo, region.hi, g)
        return float(g @ y), y
    if region.lo.size <= 3 and region.normals.shape[0] <= 4:
        vertices = _polytope_vertices(region.lo, region.hi, region.normals, region.offsets)
        if vertices.shape[0] == 0:
            return float(g @ fallback), fallback
        values = vertices @ g
        best = int(np.argmin(values))
        return float(values[best]), vertices[best]
    # Projected subgradient fallback for shapes outside the exact path.
    y = fallback.copy()
    best_y = y.copy()
    best_val = float(g @ y)
    step = float(np.max(region.hi - region.lo))
    for _ in range(200):
        y = project_feasible(region, y - step * g)
        val = float(g @ y)
        if val < best_val:
            best_val, best_y = val, y.copy()
        step *= 0.9
    return best_val, best_y


def check_svip(game: GameSpec, x: Profile, operator_value, tol: float = 1e-6) -> Certificate:
    """Exact variational-inequality check of a point and operator value.

    Normalizes the stacked operator value to unit norm, then computes
    m = min over feasible y of <g, y - x>, player by player.  Passes when
    m >= -tol.  A zero operator value passes vacuously.
    """
    regions = _require_feasible(game, x)
    if isinstance(operator_value, (list, tuple)) and operator_value and isinstance(
        operator_value[0], Direction
    ):
        g = np.concatenate([d.array for d in operator_value])
    else:
        g = np.asarray(operator_value, dtype=np.float64).ravel()
    if g.size != game.total_dim:
        raise ValueError(
            f"operator value has {g.size} coordinates, game has {game.total_dim}"
        )
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        return Certificate(
            kind="svip",
            passed=True,
            resolution=None,
            witness=None,
            detail="zero operator value: inequality holds vacuously",
        )
    g = g / norm

    margin = 0.0
    minimizer = np.empty(game.total_dim)
    for player, region in enumerate(regions):
        sl = game.own_slice(player)
        own = x.stacked[sl]
        value, y = _exact_linear_min(region, g[sl], own)
        margin += value - float(g[sl] @ own)
        minimizer[sl] = y
    passed = margin >= -tol
    witness = None
    if not passed:
        witness = {
            "margin": margin,
            "minimizer": [float(v) for v in minimizer],
        }
    return Certificate(
        kind="svip",
        passed=passed,
        resolution=None,
        witness=witness,
        detail=f"margin {margin:.6e} against tolerance {tol:.1e}",
    )


def _profile_axes(game: GameSpec, h: float) -> list[np.ndarray]:
    axes = []
    for lo, hi in zip(game.box_lo, game.box_hi):
        axes.append(grid_coordinates(float(lo), float(hi), h))
    total = 1
    for a in axes:
        total *= a.size
    if total > _GRID_BUDGET:
        raise GridBudgetError(
            f"profile grid would have {total} points, budget is {_GRID_BUDGET}"
        )
    return axes


def _feasible_tensor(game: GameSpec, axes: list[np.ndarray]) -> np.ndarray | None:
    """Boolean tensor over the profile grid for shared constraints, else None."""
    if isinstance(game.constraints, BoxOnly):
        return None
    shared: SharedLinear = game.constraints
    shape = tuple(a.size for a in axes)
    slack = np.full(shape + (shared.rhs.size,), -shared.rhs, dtype=np.float64)
    for coord, axis in enumerate(axes):
        reshape = [1] * len(axes)
        reshape[coord] = axis.size
        slack += shared.matrix[:, coord] * axis.reshape(reshape + [1])
    tol = _FEAS_TOL * np.maximum(1.0, np.abs(shared.rhs))
    return np.all(slack <= tol, axis=-1)


def _utility_tensor(
    game: GameSpec, player: PlayerId, axes: list[np.ndarray]
) -> np.ndarray:
    """Utility values over the whole profile grid, evaluated in chunks."""
    shape = tuple(a.size for a in axes)
    pref = game.players[player].preference
    grids = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([grid.ravel() for grid in grids], axis=1)
    out = np.empty(flat.shape[0])
    chunk = 1 << 20
    for start in range(0, flat.shape[0], chunk):
        out[start : start + chunk] = pref.fn(flat[start : start + chunk])
    if not np.all(np.isfinite(out)):
        from .errors import EvaluationError

        raise EvaluationError(
            f"utility of player {player} is non-finite on the grid"
        )
    return out.reshape(shape)


def _own_axes_span(game: GameSpec, player: PlayerId) -> tuple[int, ...]:
    sl = game.own_slice(player)
    return tuple(range(sl.start, sl.stop))


def brute_force_gne(game: GameSpec, h: float) -> list[tuple[Profile, Certificate]]:
    """Enumerate all grid equilibria: no feasible grid deviation improves.

    Exhaustive over the profile lattice of step ``h`` (budget-guarded).  The
    utility/box family is evaluated tensor-wise; other preference variants go
    through the generic strict-preference oracle.
    """
    axes = _profile_axes(game, h)
    feasible = _feasible_tensor(game, axes)
    shape = tuple(a.size for a in axes)

    all_utility = all(
        isinstance(p.preference, UtilityPreference) for p in game.players
    )
    if all_utility:
        equilibrium = (
            feasible.copy()
            if feasible is not None
            else np.ones(shape, dtype=bool)
        )
        for player in range(game.n_players):
            values = _utility_tensor(game, player, axes)
            if feasible is not None:
                values = np.where(feasible, values, -np.inf)
            own_axes = _own_axes_span(game, player)
            best = values.max(axis=own_axes, keepdims=True)
            # A strictly larger feasible value along the own axes means the
            # player can improve; equality (including ties) does not.
            equilibrium &= ~(values < best)
        coords = np.argwhere(equilibrium)
    else:
        coords = _generic_equilibria(game, axes, feasible)

    results = []
    for idx in coords:
        vector = np.array([axes[k][i] for k, i in enumerate(idx)])
        profile = split_profile(game, vector)
        cert = Certificate(
            kind="gne-grid",
            passed=True,
            resolution=h,
            witness=None,
            detail=f"grid equilibrium at resolution {h}",
        )
        results.append((profile, cert))
    return results


def _generic_equilibria(
    game: GameSpec, axes: list[np.ndarray], feasible: np.ndarray | None
) -> np.ndarray:
    shape = tuple(a.size for a in axes)
    total = int(np.prod(shape))
    equilibrium = np.ones(shape, dtype=bool)
    if feasible is not None:
        equilibrium &= feasible
    for player in range(game.n_players):
        if isinstance(game.players[player].preference, TrivialZero):
            continue  # nothing is ever strictly preferred
        own_axes = _own_axes_span(game, player)
        own_sizes = [shape[a] for a in own_axes]
        own_points = np.stack(
            [m.ravel() for m in np.meshgrid(*[axes[a] for a in own_axes], indexing="ij")],
            axis=1,
        )
        rival_axes = [a for a in range(len(shape)) if a not in own_axes]
        rival_iter = itertools.product(*[range(shape[a]) for a in rival_axes]) if rival_axes else [()]
        for rival_idx in rival_iter:
            for own_flat, own in enumerate(own_points):
                idx = _merge_index(own_flat, own_sizes, own_axes, rival_idx, rival_axes)
                if not equilibrium[idx]:
                    continue
                profile_vec = np.array(
                    [axes[k][i] for k, i in enumerate(idx)], dtype=np.float64
                )
                profile = split_profile(game, profile_vec)
                region = feasible_region(game, player, profile.rivals(player))
                pool_mask = region.contains_many(own_points)
                if not np.any(pool_mask):
                    continue
                better = strict_upper_mask(
                    game, player, own_points[pool_mask], profile
                )
                if np.any(better):
                    equilibrium[idx] = False
    if total and feasible is None and equilibrium.all() and any(
        not isinstance(p.preference, TrivialZero) for p in game.players
    ):
        pass  # nothing special: every point can legitimately be an equilibrium
    return np.argwhere(equilibrium)


def _merge_index(own_flat, own_sizes, own_axes, rival_idx, rival_axes):
    own_multi = np.unravel_index(own_flat, own_sizes) if own_sizes else ()
    idx = [0] * (len(own_axes) + len(rival_axes))
    for axis, value in zip(own_axes, own_multi):
        idx[axis] = int(value)
    for axis, value in zip(rival_axes, rival_idx):
        idx[axis] = int(value)
    return tuple(idx)


def theorem1_property(
    games: Sequence[GameSpec], cfg: SolverConfig, h: float
) -> Certificate:
    """Converged solutions with all-nonzero selections must verify as grid equilibria.

    Solutions with a zero component fall outside the nonzero-selection
    operator and are skipped (counted).  Detail format:
    ``C solutions checked: games=A converged=B zero_selection=D failures=E``.
    """
    converged = checked = zero_selection = failures = 0
    witness = None
    for index, game in enumerate(games):
        solution = solve_svip(game, cfg)
        if not solution.converged:
            continue
        converged += 1
        if any(d.is_zero for d in solution.operator_value):
            zero_selection += 1
            continue
        cert = check_gne_grid(game, solution.point, h)
        checked += 1
        if not cert.passed:
            failures += 1
            if witness is None:
                witness = {"game": index, "grid_witness": cert.witness}
    detail = (
        f"{checked} solutions checked: games={len(games)} converged={converged} "
        f"zero_selection={zero_selection} failures={failures}"
    )
    return Certificate(
        kind="theorem1",
        passed=failures == 0,
        resolution=h,
        witness=witness,
        detail=detail,
    )


def _inflated_bounds(game: GameSpec, player: PlayerId) -> tuple[np.ndarray, np.ndarray]:
    # Contour sets at equilibria live outside the strategy box; sample wider.
    lo, hi = game.player_box(player)
    width = hi - lo
    return lo - width, hi + width


def theorem2_property(
    games: Sequence[GameSpec],
    h: float,
    tol: float = 1e-6,
    *,
    sample_count: int = 1000,
    seed: int = 0,
) -> Certificate:
    """Every grid equilibrium must admit a separator certifying the inequality.

    Separators are built per player from contour samples over an inflated box
    and stacked.  An equilibrium whose contour set yields no sample at all has
    no separator (the convexity/closure hypotheses fail there); that counts as
    a failure.  A sample hull that surrounds the point is recorded as
    inconclusive instead.  Detail format:
    ``games=A equilibria=B certified=C no_separator=D inconclusive=E failures=F``.
    """
    equilibria = certified = no_separator = inconclusive = failures = 0
    witness = None
    for index, game in enumerate(games):
        for profile, _ in brute_force_gne(game, h):
            equilibria += 1
            directions = []
            empty_contour = False
            hull_reaches = False
            for player in range(game.n_players):
                samples = sample_contour(
                    game,
                    player,
                    profile,
                    sample_count,
                    seed,
                    bounds=_inflated_bounds(game, player),
                )
                if not samples:
                    empty_contour = True
                    break
                try:
                    d = sampled_separating_direction(samples, profile.block(player))
                except SeparatorError:
                    hull_reaches = True
                    break
                directions.append(d)
            if empty_contour:
                no_separator += 1
                if witness is None:
                    witness = {
                        "game": index,
                        "equilibrium": [float(v) for v in profile.stacked],
                        "reason": "empty strict upper contour: no separator exists",
                    }
                continue
            if hull_reaches:
                inconclusive += 1
                continue
            cert = check_svip(game, profile, directions, tol)
            if cert.passed:
                certified += 1
            else:
                failures += 1
                if witness is None:
                    witness = {
                        "game": index,
                        "equilibrium": [float(v) for v in profile.stacked],
                        "svip_witness": cert.witness,
                    }
    detail = (
        f"games={len(games)} equilibria={equilibria} certified={certified} "
        f"no_separator={no_separator} inconclusive={inconclusive} failures={failures}"
    )
    return Certificate(
        kind="theorem2",
        passed=failures == 0 and no_separator == 0,
        resolution=h,
        witness=witness,
        detail=detail,
    )


def lhc_probe(
    contour: Callable[[float], tuple[float, float] | None],
    base_points: Iterable[float],
    directions: Iterable[float],
    steps: Sequence[float],
    tol: float = 1e-6,
    samples_per_base: int = 5,
) -> Certificate:
    """Falsification probe for lower hemicontinuity of an interval-valued map.

    For every base parameter x with contour(x) nonempty, every sampled point
    y in contour(x), and every approach direction, the distances from y to
    contour(x + s * direction) along the shrinking steps s must trend down
    (no increase beyond ``tol``) and end at most ``tol`` at the smallest step
    (an empty contour counts as infinite distance).  The probe can only
    falsify; passing is evidence, not proof.
    """
    steps = sorted((float(s) for s in steps), reverse=True)
    if not steps or steps[-1] <= 0:
        raise ValueError("steps must be positive")
    final_step = steps[-1]
    checks = 0
    for base in base_points:
        interval = contour(float(base))
        if interval is None:
            continue  # empty contour imposes no condition at the base point
        lo, hi = float(interval[0]), float(interval[1])
        window_hi = min(hi, lo + 4.0)
        ys = np.linspace(lo, window_hi, samples_per_base)
        for direction in directions:
            probes = [contour(float(base) + s * float(direction)) for s in steps]
            for y in ys:
                checks += 1
                distances = [
                    np.inf
                    if probe is None
                    else max(probe[0] - y, y - probe[1], 0.0)
                    for probe in probes
                ]
                trending = all(
                    not (nxt > prev + tol)
                    for prev, nxt in zip(distances, distances[1:])
                )
                if distances[-1] <= tol and trending:
                    continue
                final = distances[-1]
                witness = {
                    "base": float(base),
                    "point": float(y),
                    "direction": float(direction),
                    "steps": list(steps),
                    "distances": [
                        None if np.isinf(d) else float(d) for d in distances
                    ],
                }
                return Certificate(
                    kind="lhc",
                    passed=False,
                    resolution=final_step,
                    witness=witness,
                    detail=(
                        f"point {y:.6g} of contour({base:.6g}) is unreachable "
                        f"along direction {direction:+g}: final distance "
                        f"{'inf' if np.isinf(final) else format(final, '.3e')} "
                        f"at step {final_step:g}"
                    ),
                )
    return Certificate(
        kind="lhc",
        passed=True,
        resolution=final_step,
        witness=None,
        detail=f"no lower-hemicontinuity violation in {checks} probes",
    )
