"""Command-line interface: solve, verify, theorem suites, bundled examples.

Every command emits one JSON report (stdout or ``--out``) and exits with
0 when all checks pass, 2 when a check was run and failed, and 1 on errors
(malformed files, infeasible points, invalid flags).
"""

from __future__ import annotations

import time

import click
import numpy as np

from . import __version__
from .corpus import (
    EXAMPLES,
    example_lhc_remark,
    example_trivial_pref,
    monotone_concave_instance,
    quadratic_equilibrium,
    random_concave_quadratic,
)
from .errors import OrdnashError
from .gamefile import game_digest, load_game, save_game
from .model import split_profile, upper_contour_sample, validate_spec
from .report import (
    build_report,
    certificate_payload,
    emit_report,
    solution_payload,
)
from .solver import SolverConfig, selection_T, solve_svip
from .verify import (
    Certificate,
    brute_force_gne,
    check_gne_grid,
    check_svip,
    lhc_probe,
    theorem1_property,
    theorem2_property,
)

_LHC_BASES = (-0.75, -0.5, -0.25, -0.1, 0.0, 0.5)
_LHC_DIRECTIONS = (1.0, -1.0)
_LHC_STEPS = (0.32, 0.16, 0.08, 0.04, 0.02, 0.01)


def _solver_options(command):
    for option in reversed(
        [
            click.option("--step", default=0.1, show_default=True, help="projected step size"),
            click.option("--tol", default=1e-8, show_default=True, help="residual tolerance"),
            click.option("--max-iters", default=10_000, show_default=True, help="iteration cap per restart"),
            click.option("--restarts", default=16, show_default=True, help="multistart count"),
            click.option("--seed", default=42, show_default=True, help="random seed"),
        ]
    ):
        command = option(command)
    return command


@click.group()
@click.version_option(__version__, prog_name="ordnash")
def main():
    """Ordinal-preference game solver and verifier."""


def _finish(command, arguments, *, seed, digest, solution, certificates,
            warnings, error, exit_code, started, out):
    report = build_report(
        command,
        arguments,
        seed=seed,
        game_digest=digest,
        solution=solution,
        certificates=certificates,
        warnings=warnings,
        error=error,
        exit_code=exit_code,
        wall_time_s=time.monotonic() - started,
    )
    emit_report(report, out)
    if error is not None:
        click.echo(error, err=True)
    raise SystemExit(exit_code)


def _validated_game(path):
    game = load_game(path)
    issues = validate_spec(game)
    if issues:
        summary = "; ".join(f"{i.code}: {i.message}" for i in issues)
        raise OrdnashError(f"invalid game: {summary}")
    return game


def _solver_config(step, tol, max_iters, restarts, seed):
    try:
        return SolverConfig(
            step=step, tol=tol, max_iters=max_iters, restarts=restarts, seed=seed
        )
    except ValueError as err:
        raise OrdnashError(f"invalid solver options: {err}") from err


@main.command()
@click.argument("file", type=str)
@_solver_options
@click.option("--grid", default=0.05, show_default=True, help="certification grid step")
@click.option("--out", default=None, type=str, help="report path (default stdout)")
def solve(file, step, tol, max_iters, restarts, seed, grid, out):
    """Solve the variational problem for FILE and certify the result."""
    started = time.monotonic()
    arguments = {
        "file": file,
        "step": step,
        "tol": tol,
        "max_iters": max_iters,
        "restarts": restarts,
        "seed": seed,
        "grid": grid,
    }
    try:
        game = _validated_game(file)
        cfg = _solver_config(step, tol, max_iters, restarts, seed)
        solution = solve_svip(game, cfg)
        cert = check_gne_grid(game, solution.point, grid)
        warnings = []
        if any(d.is_zero for d in solution.operator_value):
            warnings.append("degenerate: empty strict preference")
        exit_code = 0 if (solution.converged and cert.passed) else 2
        _finish(
            "solve",
            arguments,
            seed=seed,
            digest=game_digest(game),
            solution=solution_payload(solution),
            certificates=[certificate_payload(cert)],
            warnings=warnings,
            error=None,
            exit_code=exit_code,
            started=started,
            out=out,
        )
    except OrdnashError as err:
        _finish(
            "solve", arguments, seed=seed, digest=None, solution=None,
            certificates=[], warnings=[], error=str(err), exit_code=1,
            started=started, out=out,
        )


@main.command()
@click.argument("file", type=str)
@click.option("--point", required=True, help="comma-separated profile coordinates")
@click.option("--grid", default=0.05, show_default=True, help="certification grid step")
@click.option("--out", default=None, type=str, help="report path (default stdout)")
def verify(file, point, grid, out):
    """Certify a candidate equilibrium point for FILE on a deviation grid."""
    started = time.monotonic()
    arguments = {"file": file, "point": point, "grid": grid}
    try:
        game = _validated_game(file)
        try:
            values = [float(tok) for tok in point.split(",")]
        except ValueError as err:
            raise OrdnashError(f"cannot parse --point {point!r}: {err}") from err
        profile = split_profile(game, values)
        cert = check_gne_grid(game, profile, grid)
        _finish(
            "verify",
            arguments,
            seed=None,
            digest=game_digest(game),
            solution=None,
            certificates=[certificate_payload(cert)],
            warnings=[],
            error=None,
            exit_code=0 if cert.passed else 2,
            started=started,
            out=out,
        )
    except OrdnashError as err:
        _finish(
            "verify", arguments, seed=None, digest=None, solution=None,
            certificates=[], warnings=[], error=str(err), exit_code=1,
            started=started, out=out,
        )


@main.command()
@click.option(
    "--suite",
    type=click.Choice(["t1", "t2", "existence"]),
    required=True,
    help="which theorem suite to run",
)
@click.option("--instances", default=20, show_default=True, help="seeded instance count")
@_solver_options
@click.option("--grid", default=0.05, show_default=True, help="grid resolution h")
@click.option("--out", default=None, type=str, help="report path (default stdout)")
def theorems(suite, instances, step, tol, max_iters, restarts, seed, grid, out):
    """Run a batch property suite over seeded corpus instances."""
    started = time.monotonic()
    arguments = {
        "suite": suite,
        "instances": instances,
        "step": step,
        "tol": tol,
        "max_iters": max_iters,
        "restarts": restarts,
        "seed": seed,
        "grid": grid,
    }
    try:
        if instances < 1:
            raise OrdnashError(f"--instances must be at least 1, got {instances}")
        certificates = []
        warnings = []
        if suite == "t1":
            cfg = _solver_config(step, tol, max_iters, restarts, seed)
            games = [random_concave_quadratic(seed + i) for i in range(instances)]
            cert = theorem1_property(games, cfg, grid)
            certificates.append(certificate_payload(cert))
            passed = cert.passed
        elif suite == "t2":
            games = [monotone_concave_instance(seed + i) for i in range(instances)]
            cert = theorem2_property(games, grid)
            certificates.append(certificate_payload(cert))
            # Bundled counterexample: trivial preferences break the closure
            # hypothesis, so its equilibria must fail to produce separators.
            counter = theorem2_property([example_trivial_pref()], 0.5)
            certificates.append(certificate_payload(counter, expected_failure=True))
            if counter.passed:
                warnings.append(
                    "counterexample unexpectedly produced separators for all equilibria"
                )
            passed = cert.passed and not counter.passed
        else:
            with_equilibrium = 0
            witness = None
            for i in range(instances):
                game = random_concave_quadratic(seed + i, nonnegative_coupling=True)
                if brute_force_gne(game, grid):
                    with_equilibrium += 1
                elif witness is None:
                    witness = {"instance": i, "seed": seed + i}
            cert = Certificate(
                kind="gne-grid",
                passed=with_equilibrium == instances,
                resolution=grid,
                witness=witness,
                detail=(
                    f"{with_equilibrium}/{instances} instances have a grid "
                    f"equilibrium at resolution {grid}"
                ),
            )
            certificates.append(certificate_payload(cert))
            passed = cert.passed
        _finish(
            "theorems",
            arguments,
            seed=seed,
            digest=None,
            solution=None,
            certificates=certificates,
            warnings=warnings,
            error=None,
            exit_code=0 if passed else 2,
            started=started,
            out=out,
        )
    except OrdnashError as err:
        _finish(
            "theorems", arguments, seed=seed, digest=None, solution=None,
            certificates=[], warnings=[], error=str(err), exit_code=1,
            started=started, out=out,
        )


def _run_trivial_pref(game, seed):
    certificates = []
    ok = True
    issues = validate_spec(game)
    ok &= not issues

    rng = np.random.default_rng(seed)
    # Empty strict preference: no sampled profile yields any contour point.
    empty_everywhere = True
    for _ in range(16):
        profile = split_profile(game, rng.uniform(-1.0, 1.0, game.total_dim))
        for player in range(game.n_players):
            if upper_contour_sample(game, player, profile, 200, seed):
                empty_everywhere = False
    ok &= empty_everywhere

    origin = split_profile(game, np.zeros(game.total_dim))
    gne = check_gne_grid(game, origin, 0.05)
    certificates.append(certificate_payload(gne))
    ok &= gne.passed

    worst = -np.inf
    failed_all = True
    for _ in range(64):
        direction = rng.normal(size=game.total_dim)
        direction /= np.linalg.norm(direction)
        cert = check_svip(game, origin, direction, tol=1e-6)
        if cert.passed:
            failed_all = False
            worst = 0.0
        else:
            worst = max(worst, float(cert.witness["margin"]))
    ok &= failed_all and worst <= -0.01
    certificates.append(
        certificate_payload(
            Certificate(
                kind="svip",
                passed=False,
                resolution=None,
                witness=None,
                detail=(
                    "64/64 sampled unit operator values fail at (0,0); "
                    f"largest margin {worst:.6e}"
                ),
            ),
            expected_failure=True,
        )
    )
    warnings = ["degenerate: empty strict preference"]
    return ok, certificates, warnings


def _run_coordinate_pref(game, seed):
    certificates = []
    equilibria = brute_force_gne(game, 0.5)
    points = [tuple(p.stacked) for p, _ in equilibria]
    ok = points == [(1.0, 1.0)]
    certificates.append(
        certificate_payload(
            Certificate(
                kind="gne-grid",
                passed=ok,
                resolution=0.5,
                witness=None if ok else {"equilibria": [list(p) for p in points]},
                detail=f"grid equilibria at h=0.5: {[list(p) for p in points]}",
            )
        )
    )

    solution = solve_svip(game, SolverConfig(seed=seed))
    top = np.ones(game.total_dim)
    near = bool(np.max(np.abs(solution.point.stacked - top)) <= 1e-6)
    ok &= solution.converged and near
    certificates.append(
        certificate_payload(
            Certificate(
                kind="svip",
                passed=solution.converged and near,
                resolution=None,
                witness=None,
                detail=(
                    f"solver point {solution.point.stacked.tolist()} within 1e-06 "
                    f"of (1, 1): {near}"
                ),
            )
        )
    )

    rng = np.random.default_rng(seed)
    constant = True
    for _ in range(100):
        profile = split_profile(game, rng.uniform(-0.95, 0.95, game.total_dim))
        sel = selection_T(game, profile)
        constant &= bool(np.array_equal(sel.stacked, -np.ones(game.total_dim)))
    ok &= constant
    certificates.append(
        certificate_payload(
            Certificate(
                kind="svip",
                passed=constant,
                resolution=None,
                witness=None,
                detail="operator selection is (-1, -1) at 100 interior profiles",
            )
        )
    )
    return ok, certificates, []


def _run_lhc_remark(seed):
    lhc_map, non_lhc_map, _ = example_lhc_remark()
    passing = lhc_probe(lhc_map, _LHC_BASES, _LHC_DIRECTIONS, _LHC_STEPS)
    failing = lhc_probe(non_lhc_map, _LHC_BASES, _LHC_DIRECTIONS, _LHC_STEPS)
    ok = passing.passed and not failing.passed
    certificates = [
        certificate_payload(passing),
        certificate_payload(failing, expected_failure=True),
    ]
    return ok, certificates, []


def _run_quadratic(game, seed):
    certificates = []
    cfg = SolverConfig(seed=seed)
    t1 = theorem1_property([game], cfg, 0.02)
    certificates.append(certificate_payload(t1))
    ok = t1.passed

    analytic = quadratic_equilibrium(seed)
    solution = solve_svip(game, cfg)
    tol = 0.05 * np.sqrt(2.0)
    solver_close = bool(np.linalg.norm(solution.point.stacked - analytic) <= tol)
    equilibria = brute_force_gne(game, 0.05)
    grid_close = bool(equilibria) and all(
        np.linalg.norm(p.stacked - analytic) <= tol for p, _ in equilibria
    )
    ok &= solution.converged and solver_close and grid_close
    certificates.append(
        certificate_payload(
            Certificate(
                kind="gne-grid",
                passed=solver_close and grid_close,
                resolution=0.05,
                witness=None,
                detail=(
                    f"analytic point {analytic.tolist()}; solver and "
                    f"{len(equilibria)} grid equilibria within h*sqrt(2)"
                ),
            )
        )
    )
    return ok, certificates, []


def _run_arrow_debreu(game, seed):
    certificates = []
    solution = solve_svip(game, SolverConfig(seed=seed))
    total = float(np.sum(solution.point.stacked))
    feasible = total <= 1.0 + 1e-9
    cert = check_gne_grid(game, solution.point, 0.02)
    certificates.append(certificate_payload(cert))
    ok = solution.converged and feasible and cert.passed

    equilibria = brute_force_gne(game, 0.05)
    on_line = bool(equilibria) and all(
        abs(float(np.sum(p.stacked)) - 1.0) <= 0.05 + 1e-9 for p, _ in equilibria
    )
    ok &= on_line
    certificates.append(
        certificate_payload(
            Certificate(
                kind="gne-grid",
                passed=on_line,
                resolution=0.05,
                witness=None,
                detail=(
                    f"{len(equilibria)} grid equilibria all satisfy "
                    "x1 + x2 = 1 within h"
                ),
            )
        )
    )
    return ok, certificates, []


@main.command()
@click.option(
    "--name",
    type=click.Choice(sorted(EXAMPLES)),
    required=True,
    help="bundled example to build",
)
@click.option("--run", "run_checks", is_flag=True, help="run the example's canonical checks")
@click.option("--dump", default=None, type=str, help="write the problem file here")
@click.option("--seed", default=42, show_default=True, help="random seed for checks")
@click.option("--out", default=None, type=str, help="report path (default stdout)")
def examples(name, run_checks, dump, seed, out):
    """Build a bundled example; optionally dump it or run its checks."""
    started = time.monotonic()
    arguments = {
        "name": name,
        "run": run_checks,
        "dump": dump,
        "seed": seed,
    }
    try:
        game = EXAMPLES[name]()
        warnings = []
        certificates = []
        ok = True
        if dump is not None:
            save_game(game, dump)
        if run_checks:
            if name == "trivial-pref":
                ok, certificates, warnings = _run_trivial_pref(game, seed)
            elif name == "coordinate-pref":
                ok, certificates, warnings = _run_coordinate_pref(game, seed)
            elif name == "lhc-remark":
                ok, certificates, warnings = _run_lhc_remark(seed)
            elif name == "quadratic":
                ok, certificates, warnings = _run_quadratic(game, seed)
            else:
                ok, certificates, warnings = _run_arrow_debreu(game, seed)
        _finish(
            "examples",
            arguments,
            seed=seed,
            digest=game_digest(game),
            solution=None,
            certificates=certificates,
            warnings=warnings,
            error=None,
            exit_code=0 if ok else 2,
            started=started,
            out=out,
        )
    except OrdnashError as err:
        _finish(
            "examples", arguments, seed=seed, digest=None, solution=None,
            certificates=[], warnings=[], error=str(err), exit_code=1,
            started=started, out=out,
        )


if __name__ == "__main__":
    main()
