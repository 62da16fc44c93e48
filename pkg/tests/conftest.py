"""Shared game builders for the test suite."""

import pytest

from ordnash.model import (
    ContourRow,
    GameSpec,
    HalfspaceContour,
    PlayerSpec,
    SharedLinear,
    UtilityPreference,
)

UNIT_BOX = ((-1.0, 1.0),)


def make_pull_to_half_rival():
    """Two scalar players, each pulled toward half the rival's value.

    Unique equilibrium at the origin; best responses are x1 = 0.5*x2 and
    x2 = 0.5*x1.
    """
    return GameSpec(
        players=(
            PlayerSpec(1, UNIT_BOX, UtilityPreference("-(x1-0.5*x2)^2")),
            PlayerSpec(1, UNIT_BOX, UtilityPreference("-(x2-0.5*x1)^2")),
        )
    )


def make_halfspace_orthant():
    """Scalar two-player game whose contour sets are open rays above the rival."""
    rows = (ContourRow(coeffs=("-1",), offset="-x2"),)
    rows_other = (ContourRow(coeffs=("-1",), offset="-x1"),)
    return GameSpec(
        players=(
            PlayerSpec(1, UNIT_BOX, HalfspaceContour(rows)),
            PlayerSpec(1, UNIT_BOX, HalfspaceContour(rows_other)),
        )
    )


def make_budget_pair():
    """Two scalar players sharing the budget row x1 + x2 <= 1 on [0, 1]^2."""
    return GameSpec(
        players=(
            PlayerSpec(1, ((0.0, 1.0),), UtilityPreference("-(x1-0.9)^2")),
            PlayerSpec(1, ((0.0, 1.0),), UtilityPreference("-(x2-0.8)^2")),
        ),
        constraints=SharedLinear(a=((1.0, 1.0),), b=(1.0,)),
    )


@pytest.fixture
def pull_game():
    return make_pull_to_half_rival()


@pytest.fixture
def budget_game():
    return make_budget_pair()
