"""Acceptance suite: ten end-to-end criteria, one test and verdict line each.

Each test prints ``ACCEPTANCE CRITERION n: PASS/FAIL`` and asserts the
verdict, so a plain ``pytest -v`` run shows one line per criterion.  Command
replays for the determinism criterion reuse the first run of each command.
"""

import json
import re
import time

import numpy as np
import pytest
from click.testing import CliRunner

from ordnash.cli import _LHC_BASES, _LHC_DIRECTIONS, _LHC_STEPS, main
from ordnash.cones import cone_membership, zero_in_hull
from ordnash.corpus import (
    example_coordinate_pref,
    example_lhc_remark,
    example_trivial_pref,
    quadratic_equilibrium,
    random_concave_quadratic,
)
from ordnash.model import (
    CoordinateOrder,
    GameSpec,
    PlayerSpec,
    sample_contour,
    split_profile,
)
from ordnash.solver import SolverConfig, selection_T, solve_svip
from ordnash.verify import (
    brute_force_gne,
    check_gne_grid,
    check_svip,
    lhc_probe,
)

# First-run report cache keyed by command line, shared with criterion 10.
_FIRST_RUNS: dict[tuple, str] = {}

_COMMANDS = {
    1: ("examples", "--name", "trivial-pref", "--run"),
    2: ("examples", "--name", "coordinate-pref", "--run"),
    3: (
        "theorems", "--suite", "t1", "--instances", "50",
        "--restarts", "4", "--grid", "0.02",
    ),
    4: ("theorems", "--suite", "t2", "--instances", "20", "--grid", "0.05"),
    5: (
        "theorems", "--suite", "existence", "--instances", "100",
        "--grid", "0.05",
    ),
}


def _invoke(args):
    result = CliRunner().invoke(main, list(args))
    assert result.exception is None or isinstance(
        result.exception, SystemExit
    ), result.output
    return result


def _first_run(criterion):
    args = _COMMANDS[criterion]
    if args not in _FIRST_RUNS:
        result = _invoke(args)
        _FIRST_RUNS[args] = result.stdout
    return _FIRST_RUNS[args]


def _strip_wall_time(text):
    return "\n".join(
        line for line in text.splitlines() if '"wall_time_s"' not in line
    )


def _verdict(number, label, passed, info=""):
    status = "PASS" if passed else "FAIL"
    suffix = f" ({info})" if info else ""
    line = f"ACCEPTANCE CRITERION {number}: {status} - {label}{suffix}"
    print(line)
    assert passed, line


def test_criterion_01_trivial_counterexample():
    started = time.monotonic()
    game = example_trivial_pref()
    origin = split_profile(game, [0.0, 0.0])

    gne = check_gne_grid(game, origin, 0.05)
    rng = np.random.default_rng(42)
    all_fail = True
    worst_margin = -np.inf
    for _ in range(64):
        direction = rng.normal(size=2)
        direction /= np.linalg.norm(direction)
        cert = check_svip(game, origin, direction, tol=1e-6)
        if cert.passed:
            all_fail = False
            break
        worst_margin = max(worst_margin, cert.witness["margin"])
    elapsed = time.monotonic() - started

    report = json.loads(_first_run(1))
    passed = (
        gne.passed
        and all_fail
        and worst_margin <= -0.01
        and elapsed < 1.0
        and report["exit_code"] == 0
    )
    _verdict(
        1,
        "indifferent players: grid equilibrium, no separating direction",
        passed,
        f"worst margin {worst_margin:.3f}, {elapsed:.2f}s",
    )


def test_criterion_02_coordinate_example():
    started = time.monotonic()
    game = example_coordinate_pref()

    solution = solve_svip(game)
    near_corner = solution.converged and bool(
        np.max(np.abs(solution.point.stacked - 1.0)) <= 1e-6
    )

    equilibria = brute_force_gne(game, 0.1)
    unique_corner = [tuple(p.stacked) for p, _ in equilibria] == [(1.0, 1.0)]

    rng = np.random.default_rng(42)
    constant_selection = True
    for _ in range(100):
        x = split_profile(game, rng.uniform(-0.95, 0.95, 2))
        sel = selection_T(game, x)
        constant_selection &= bool(
            np.array_equal(sel.stacked, [-1.0, -1.0])
        )
    elapsed = time.monotonic() - started

    report = json.loads(_first_run(2))
    passed = (
        near_corner
        and unique_corner
        and constant_selection
        and elapsed < 5.0
        and report["exit_code"] == 0
    )
    _verdict(
        2,
        "componentwise order: corner solution, unique grid equilibrium, "
        "constant selection",
        passed,
        f"{elapsed:.2f}s",
    )


def test_criterion_03_solver_solutions_are_grid_equilibria():
    started = time.monotonic()
    output = _first_run(3)
    elapsed = time.monotonic() - started

    report = json.loads(output)
    cert = report["certificates"][0]
    match = re.search(r"converged=(\d+)", cert["detail"])
    converged = int(match.group(1)) if match else 0
    failures = "failures=0" in cert["detail"]

    passed = (
        report["exit_code"] == 0
        and cert["passed"]
        and converged >= 45
        and failures
        and elapsed < 60.0
    )
    _verdict(
        3,
        "50 seeded concave quadratic games, converged nonzero-selection "
        "solutions certify on the 0.02 grid",
        passed,
        f"converged {converged}/50, {elapsed:.1f}s",
    )


def test_criterion_04_grid_equilibria_admit_separators():
    started = time.monotonic()
    output = _first_run(4)
    elapsed = time.monotonic() - started

    report = json.loads(output)
    main_cert, counter = report["certificates"]
    passed = (
        report["exit_code"] == 0
        and main_cert["passed"]
        and "failures=0" in main_cert["detail"]
        and "no_separator=0" in main_cert["detail"]
        and counter["expected_failure"] is True
        and counter["passed"] is False
        and elapsed < 120.0
    )
    equilibria = re.search(r"equilibria=(\d+)", main_cert["detail"])
    _verdict(
        4,
        "20 monotone concave games: every grid equilibrium certified by a "
        "sampled separator at tol 1e-6",
        passed,
        f"{equilibria.group(1) if equilibria else '?'} equilibria, "
        f"{elapsed:.1f}s",
    )


def test_criterion_05_existence_on_hypothesis_instances():
    started = time.monotonic()
    output = _first_run(5)
    elapsed = time.monotonic() - started

    report = json.loads(output)
    cert = report["certificates"][0]
    passed = (
        report["exit_code"] == 0
        and cert["passed"]
        and "100/100 instances" in cert["detail"]
        and elapsed < 600.0
    )
    _verdict(
        5,
        "100 seeded instances each have at least one grid equilibrium at "
        "h=0.05",
        passed,
        f"{elapsed:.1f}s",
    )


def test_criterion_06_solver_brute_force_and_analytic_agree():
    h = 0.05
    budget = h * np.sqrt(2.0) + 1e-9
    cfg = SolverConfig(restarts=4)
    disagreements = []
    for i in range(20):
        seed = 100 + i
        kwargs = {"max_coupling": 0.3, "nonnegative_coupling": True}
        game = random_concave_quadratic(seed, **kwargs)
        analytic = quadratic_equilibrium(seed, **kwargs)
        solution = solve_svip(game, cfg)
        grid_points = [p.stacked for p, _ in brute_force_gne(game, h)]
        ok = (
            solution.converged
            and bool(grid_points)
            and np.linalg.norm(solution.point.stacked - analytic) <= budget
            and all(
                np.linalg.norm(g - analytic) <= budget
                and np.linalg.norm(g - solution.point.stacked) <= budget
                for g in grid_points
            )
        )
        if not ok:
            disagreements.append(seed)
    passed = not disagreements
    _verdict(
        6,
        "solver, grid enumeration, and analytic equilibrium pairwise agree "
        "within h*sqrt(2)",
        passed,
        f"disagreeing seeds {disagreements}" if disagreements else "20/20",
    )


def _two_block_coordinate_game():
    box = ((-1.0, 1.0), (-1.0, 1.0))
    return GameSpec(
        players=(
            PlayerSpec(2, box, CoordinateOrder()),
            PlayerSpec(2, box, CoordinateOrder()),
        )
    )


def test_criterion_07_emitted_directions_lie_in_sampled_cones():
    quad_pool = [random_concave_quadratic(7000 + i) for i in range(40)]
    coordinate_scalar = example_coordinate_pref()
    coordinate_blocks = _two_block_coordinate_game()
    band_game = example_lhc_remark()[2]

    rng = np.random.default_rng(20240817)
    trials = 10_000
    emitted = 0
    violations = 0
    for t in range(trials):
        family = t % 4
        if family == 0:
            game = quad_pool[int(rng.integers(len(quad_pool)))]
        elif family == 1:
            game = coordinate_scalar
        elif family == 2:
            game = coordinate_blocks
        else:
            game = band_game
        coords = rng.uniform(game.box_lo, game.box_hi)
        x = split_profile(game, coords)
        trial_seed = int(rng.integers(1 << 31))
        sel = selection_T(game, x, sample_seed=trial_seed)
        for player, direction in enumerate(sel.directions):
            if direction.is_zero:
                continue
            emitted += 1
            fresh = sample_contour(
                game, player, x, count=1000, seed=trial_seed + 1
            )
            if not cone_membership(
                direction, fresh, x.block(player), tol=1e-7
            ):
                violations += 1
    passed = violations == 0 and emitted >= 10_000
    _verdict(
        7,
        "10,000 trials: every emitted normal direction passes a fresh "
        "1000-point membership check at tol 1e-7",
        passed,
        f"{emitted} directions, {violations} violations",
    )


_SIMPLEX_RESOLUTION = 80
_ORACLE_BAND = 0.15


def _simplex_weights(k, resolution=_SIMPLEX_RESOLUTION):
    """All grid weight vectors of length k summing to 1, step 1/resolution."""
    if k == 1:
        return np.array([[1.0]])
    grids = np.meshgrid(*[np.arange(resolution + 1)] * (k - 1), indexing="ij")
    head = np.stack([g.ravel() for g in grids], axis=1)
    keep = head.sum(axis=1) <= resolution
    head = head[keep]
    tail = resolution - head.sum(axis=1, keepdims=True)
    return np.hstack([head, tail]) / resolution


def _grid_hull_min(generators, weight_cache):
    pts = np.atleast_2d(np.asarray(generators, dtype=float))
    k = pts.shape[0]
    if k not in weight_cache:
        weight_cache[k] = _simplex_weights(k)
    combos = weight_cache[k] @ pts
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", combos, combos))))


def _surrounding_case(rng, k):
    """k unit vectors in the plane whose hull contains zero exactly."""
    while True:
        gens = rng.normal(size=(k - 1, 2))
        gens /= np.linalg.norm(gens, axis=1, keepdims=True)
        weights = rng.uniform(0.2, 1.0, size=k - 1)
        pull = weights @ gens
        if np.linalg.norm(pull) >= 0.2:
            closer = -pull / np.linalg.norm(pull)
            return np.vstack([gens, closer])


def _one_sided_case(rng, k):
    """k unit vectors within 68 degrees of a common axis: hull misses zero."""
    axis = rng.normal(size=2)
    axis /= np.linalg.norm(axis)
    normal = np.array([-axis[1], axis[0]])
    angles = rng.uniform(-1.19, 1.19, size=k)
    return np.outer(np.cos(angles), axis) + np.outer(np.sin(angles), normal)


def test_criterion_08_hull_membership_matches_simplex_oracle():
    rng = np.random.default_rng(31337)
    weight_cache = {}
    mismatches = 0
    in_cases = out_cases = 0
    for case in range(1000):
        style = case % 4
        if style == 0:
            k = int(rng.integers(1, 5))
            gens = (
                rng.uniform(0.2, 1.0, size=(k, 1))
                * rng.choice([-1.0, 1.0], size=(k, 1))
            )
        elif style in (1, 2):
            k = int(rng.integers(1, 5))
            gens = _one_sided_case(rng, k)
        else:
            k = int(rng.integers(2, 5))
            gens = _surrounding_case(rng, k)
        oracle_says_in = _grid_hull_min(gens, weight_cache) <= _ORACLE_BAND
        found = zero_in_hull(list(gens))
        if found != oracle_says_in:
            mismatches += 1
        if oracle_says_in:
            in_cases += 1
        else:
            out_cases += 1
    passed = mismatches == 0 and in_cases >= 200 and out_cases >= 200
    _verdict(
        8,
        "zero_in_hull matches the simplex-grid oracle on 1000 generator "
        "sets (size <= 4, dimensions 1-2)",
        passed,
        f"{in_cases} containing, {out_cases} missing, "
        f"{mismatches} mismatches",
    )


def test_criterion_09_hemicontinuity_probe_outcomes():
    lhc_map, non_lhc_map, _ = example_lhc_remark()
    vanishing = lhc_probe(lhc_map, _LHC_BASES, _LHC_DIRECTIONS, _LHC_STEPS)
    boundary = lhc_probe(non_lhc_map, _LHC_BASES, _LHC_DIRECTIONS, _LHC_STEPS)
    right_witness = (
        not boundary.passed
        and boundary.witness["base"] == 0.0
        and boundary.witness["direction"] == 1.0
    )
    passed = vanishing.passed and right_witness
    _verdict(
        9,
        "interval map probe: vanishing-at-boundary map passes, "
        "boundary-value map fails at base 0",
        passed,
    )


def test_criterion_10_reports_are_deterministic():
    mismatched = []
    for criterion in sorted(_COMMANDS):
        first = _strip_wall_time(_first_run(criterion))
        replay = _strip_wall_time(_invoke(_COMMANDS[criterion]).stdout)
        if first != replay:
            mismatched.append(criterion)
    passed = not mismatched
    _verdict(
        10,
        "criteria 1-5 command replays are byte-identical modulo wall time",
        passed,
        f"criteria {mismatched} differ" if mismatched else "5/5 identical",
    )
