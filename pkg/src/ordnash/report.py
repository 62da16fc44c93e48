"""Report assembly and rendering for the command-line interface.

Reports are JSON documents with a fixed key order, so two runs with the same
inputs and seed produce byte-identical text except for the wall-time field
(which is deliberately placed last).
"""

from __future__ import annotations

import json
import sys
from typing import Any

import numpy as np

from . import __version__
from .gamefile import atomic_write_text
from .solver import SvipSolution
from .verify import Certificate

__all__ = [
    "jsonify",
    "solution_payload",
    "certificate_payload",
    "build_report",
    "render_report",
    "emit_report",
]


def jsonify(value: Any) -> Any:
    """Coerce numpy scalars/arrays and tuples into plain JSON-ready data."""
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else repr(v)
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, np.ndarray):
        return [jsonify(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonify(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonify(v) for k, v in value.items()}
    return value


def solution_payload(solution: SvipSolution) -> dict:
    """Solver output as plain data; the iteration trace is omitted."""
    return {
        "point": jsonify(solution.point.stacked),
        "operator_value": [
            {"player": d.player, "vector": jsonify(d.array)}
            for d in solution.operator_value
        ],
        "provenance": [p.value for p in solution.provenance],
        "residual": jsonify(solution.residual),
        "iters": solution.iters,
        "converged": solution.converged,
        "restart": solution.restart,
    }


def certificate_payload(cert: Certificate, expected_failure: bool = False) -> dict:
    payload = {
        "kind": cert.kind,
        "passed": cert.passed,
        "resolution": jsonify(cert.resolution),
        "witness": jsonify(cert.witness),
        "detail": cert.detail,
    }
    if expected_failure:
        payload["expected_failure"] = True
    return payload


def build_report(
    command: str,
    arguments: dict,
    *,
    seed: int | None,
    game_digest: str | None,
    solution: dict | None,
    certificates: list[dict],
    warnings: list[str],
    error: str | None,
    exit_code: int,
    wall_time_s: float,
) -> dict:
    """Assemble the report document; key order here is the wire order."""
    return {
        "command": command,
        "arguments": jsonify(arguments),
        "version": __version__,
        "seed": seed,
        "game_digest": game_digest,
        "solution": solution,
        "certificates": certificates,
        "warnings": list(warnings),
        "error": error,
        "exit_code": exit_code,
        "wall_time_s": round(float(wall_time_s), 6),
    }


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def emit_report(report: dict, out: str | None) -> None:
    """Write the rendered report to ``out`` (atomic) or standard output."""
    text = render_report(report)
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)
