"""Shadows shipped with the package, addressable by name."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .diagram_core import Diagram
from .diagram_io import parse_diagram_file

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class Fixture:
    name: str
    diagram: Diagram
    notes: str
    path: Path


def fixture_names() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.ld"))


def load_fixture(name: str) -> Fixture:
    """Load a shipped fixture.

    Args:
        name: File stem, e.g. ``"knot932"``.

    Raises:
        KeyError: If no fixture has that name.
    """
    path = FIXTURE_DIR / f"{name}.ld"
    if not path.is_file():
        raise KeyError(f"no fixture named {name!r}; available: {', '.join(fixture_names())}")
    notes = " ".join(
        line.lstrip("#").strip() for line in path.read_text().splitlines() if line.startswith("#")
    )
    return Fixture(name, parse_diagram_file(path), notes, path)


def resolve_diagram(source: str) -> Diagram:
    """A diagram from a file path, or from a fixture name when no such file exists."""
    path = Path(source)
    if path.is_file():
        return parse_diagram_file(path)
    if source in fixture_names():
        return load_fixture(source).diagram
    raise FileNotFoundError(f"{source} is neither a file nor a fixture name")
