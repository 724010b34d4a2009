"""Reading and writing diagrams, traces and catalogs."""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any

from .diagram_core import CanonicalCode, Diagram, build_diagram
from .errors import DiagramError, DiagramSyntaxError, FormatError
from .orbit_enumeration import Catalog, replay_witness
from .reduction_pipeline import ReductionTrace

logger = logging.getLogger(__name__)

HEADER = "linkdiagram 1"


# =============================================================================
# Diagram text format
# =============================================================================


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def parse_diagram_text(text: str) -> Diagram:
    """Parse diagram text format v1.

    ``linkdiagram 1``, then ``vertices N``, then one ``v: d0 d1 d2 d3`` line per vertex in order.
    Blank lines are skipped and ``#`` starts a comment.

    Raises:
        DiagramSyntaxError: With the line and column of the first malformed token.
        DiagramError: If the rotations do not form a valid shadow.
    """
    lines = [(number, _strip(raw)) for number, raw in enumerate(text.splitlines(), start=1)]
    lines = [(number, line) for number, line in lines if line.strip()]
    last = len(text.splitlines()) + 1

    if not lines:
        raise DiagramSyntaxError(f"expected '{HEADER}'", last)
    number, line = lines[0]
    if line.strip() != HEADER:
        raise DiagramSyntaxError(f"expected '{HEADER}', got {line.strip()!r}", number, 1)
    if len(lines) < 2:
        raise DiagramSyntaxError("expected 'vertices N'", last)

    number, line = lines[1]
    words = line.split()
    if len(words) != 2 or words[0] != "vertices":
        raise DiagramSyntaxError(f"expected 'vertices N', got {line.strip()!r}", number, 1)
    try:
        count = int(words[1])
    except ValueError:
        column = line.index(words[1]) + 1
        raise DiagramSyntaxError(f"vertex count {words[1]!r} is not an integer", number, column) from None
    if count < 1:
        raise DiagramSyntaxError(f"vertex count must be positive, got {count}", number, line.index(words[1]) + 1)

    body = lines[2:]
    if len(body) < count:
        raise DiagramSyntaxError(f"expected {count} vertex lines, found {len(body)}", last)
    if len(body) > count:
        raise DiagramSyntaxError(f"unexpected line after {count} vertices", body[count][0], 1)

    rotations = []
    for v, (number, line) in enumerate(body):
        label, colon, rest = line.partition(":")
        if not colon:
            raise DiagramSyntaxError("expected 'v: d0 d1 d2 d3'", number, 1)
        if label.strip() != str(v):
            raise DiagramSyntaxError(f"expected vertex {v}, got {label.strip()!r}", number, 1)
        darts = []
        for match in re.finditer(r"\S+", rest):
            try:
                darts.append(int(match.group()))
            except ValueError:
                column = len(label) + 2 + match.start()
                raise DiagramSyntaxError(f"dart {match.group()!r} is not an integer", number, column) from None
        if len(darts) != 4:
            raise DiagramSyntaxError(f"vertex {v} lists {len(darts)} darts, expected 4", number, len(label) + 2)
        rotations.append(darts)
    return build_diagram(rotations)


def parse_diagram_file(path: str | Path) -> Diagram:
    """Read a diagram file.

    Raises:
        DiagramSyntaxError, DiagramError: As :func:`parse_diagram_text`.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    try:
        return parse_diagram_text(path.read_text())
    except (DiagramSyntaxError, DiagramError) as e:
        logger.debug(f"{path}: {e}")
        raise


def write_diagram(d: Diagram, path: str | Path) -> None:
    Path(path).write_text(d.render())


def export_dot(d: Diagram, path: str | Path | None = None) -> str:
    """Render ``d`` as an undirected DOT multigraph.

    Each node carries its rotation as a comment and each edge is labelled with its dart pair, so the
    output is the same for the same diagram on every run.

    Args:
        d: The diagram.
        path: Where to write the text, if anywhere.

    Returns:
        The DOT text.
    """
    out = ["graph shadow {", "  node [shape=circle];"]
    for v, rotation in enumerate(d.rotations):
        out.append(f"  v{v} [label=\"{v}\"];  // rotation: {' '.join(str(x) for x in rotation)}")
    for p in range(4 * d.n):
        q = d.mate[p]
        if p < q:
            a, b = d.dart_at(p), d.dart_at(q)
            out.append(f"  v{p >> 2} -- v{q >> 2} [label=\"{a}/{b}\"];")
    out.append("}")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# =============================================================================
# Traces
# =============================================================================


def _dump(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_trace(trace: ReductionTrace, path: str | Path) -> None:
    """Write a trace as JSON lines with sorted keys."""
    Path(path).write_text("".join(_dump(record) + "\n" for record in trace.to_records()))


def read_trace(path: str | Path) -> ReductionTrace:
    """Read a trace written by :func:`write_trace`.

    Raises:
        FormatError: On a line that is not JSON or records that do not form a trace.
    """
    records = []
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}, line {number}: {e.msg}") from e
    return ReductionTrace.from_records(records)


# =============================================================================
# Catalogs
# =============================================================================


def catalog_paths(directory: str | Path, n: int) -> tuple[Path, Path]:
    directory = Path(directory)
    return directory / f"orbit-{n}.codes", directory / f"orbit-{n}.witness.jsonl"


def save_catalog(catalog: Catalog, directory: str | Path) -> tuple[Path, Path]:
    """Write ``orbit-<n>.codes`` (sorted code lines) and ``orbit-<n>.witness.jsonl``.

    Returns:
        The two paths written.
    """
    codes_path, witness_path = catalog_paths(directory, catalog.n)
    codes_path.parent.mkdir(parents=True, exist_ok=True)
    ordered = catalog.sorted_codes()
    codes_path.write_text("".join(f"{code}\n" for code in ordered))
    lines = [
        _dump(
            {
                "code": str(code),
                "path": [[op, list(operand)] for op, operand in catalog.witness.get(code, ())],
            }
        )
        for code in ordered
    ]
    meta = {
        "n": catalog.n,
        "partial": catalog.partial,
        "record": "catalog",
        "reflection_folded": catalog.reflection_folded,
        "size": len(ordered),
    }
    witness_path.write_text(_dump(meta) + "\n" + "".join(line + "\n" for line in lines))
    logger.info(f"wrote {len(ordered)} codes to {codes_path}")
    return codes_path, witness_path


def _read_witnesses(path: Path) -> tuple[dict[str, Any], list[tuple[str, tuple[tuple[str, tuple[int, ...]], ...]]]]:
    meta: dict[str, Any] = {}
    witnesses = []
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            if record.get("record") == "catalog":
                meta = record
                continue
            steps = tuple((str(op), tuple(int(x) for x in operand)) for op, operand in record["path"])
            CanonicalCode.parse(record["code"])
            witnesses.append((str(record["code"]), steps))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"{path}, line {number}: {e}") from e
    return meta, witnesses


def load_catalog(path: str | Path, replay: bool = False) -> Catalog:
    """Load a catalog from its ``.codes`` file, with witnesses when the sidecar exists.

    Args:
        path: The ``orbit-<n>.codes`` file.
        replay: Rebuild the representative diagrams by replaying the witness paths.

    Raises:
        FormatError: On an unparsable line, codes of mixed size or a witness for an unknown code.
    """
    path = Path(path)
    witness_path = path.with_name(path.name.removesuffix(".codes") + ".witness.jsonl")
    meta, witnesses = _read_witnesses(witness_path) if witness_path.exists() else ({}, [])
    folded = bool(meta.get("reflection_folded", True))

    codes = set()
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            codes.add(CanonicalCode.parse(line, folded))
        except ValueError as e:
            raise FormatError(f"{path}, line {number}: {e}") from e
    sizes = {code.n for code in codes}
    if len(sizes) > 1:
        raise FormatError(f"{path} mixes codes for n in {sorted(sizes)}")
    n = sizes.pop() if sizes else int(meta.get("n", 0))
    catalog = Catalog(n, codes, partial=bool(meta.get("partial", False)), reflection_folded=folded)

    for text, steps in witnesses:
        code = CanonicalCode.parse(text, folded)
        if code not in codes:
            raise FormatError(f"{witness_path}: witness for {text!r}, which is not in {path.name}")
        catalog.witness[code] = steps
    if replay:
        for code, steps in catalog.witness.items():
            catalog.representatives[code] = replay_witness(catalog.n, steps)
    logger.debug(f"loaded {len(codes)} codes for n={n} from {path}")
    return catalog
