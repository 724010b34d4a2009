"""Shared fixtures for linkshadows tests."""

import logging

import pytest

from linkshadows.diagram_core import Diagram, torus_shadow
from linkshadows.fixtures import load_fixture


def relabel(d: Diagram, perm: list[int], shifts: list[int]) -> Diagram:
    """Renumber crossings by ``perm`` and rotate each rotation by ``shifts[v]`` positions."""

    def moved(p: int) -> int:
        v, i = p >> 2, p & 3
        return 4 * perm[v] + (i + shifts[v]) % 4

    mate = [0] * (4 * d.n)
    for p in range(4 * d.n):
        mate[moved(p)] = moved(d.mate[p])
    return Diagram.from_ports(mate)


@pytest.fixture
def logger():
    """Create a test logger."""
    return logging.getLogger("test")


@pytest.fixture
def knot932():
    """The nine-crossing example shadow."""
    return load_fixture("knot932").diagram


@pytest.fixture
def figure_eight():
    """The figure-eight knot shadow."""
    return load_fixture("figure_eight").diagram


@pytest.fixture
def trefoil():
    """The (3,2) torus shadow."""
    return torus_shadow(3)
