"""Reduction of a prime shadow to the torus shadow by T and OTS moves.

The pipeline works on two levels at once. At the diagram level it keeps the shadow ``D`` together with
a partition of its crossings into *blocks*, each block a 2-braid. Contracting every block to a single
crossing gives the condensation-level graph ``G``. Each condensation round of ``G`` is mirrored by
merging block pairs in ``D`` (turning a block when its ends face the wrong way), and each ots on ``G``
is mirrored by a short T/OTS sequence on the three blocks of the triangle. Every mirrored step is
checked against its graph-level counterpart by canonical code before the pipeline moves on.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import networkx as nx

from .diagram_core import (
    CanonicalCode,
    Diagram,
    canonical_code,
    component_count,
    is_reduced,
    isomorphism,
    torus_shadow,
    validate,
)
from .errors import (
    FormatError,
    LabelNormalizationImpossible,
    LinkShadowError,
    MirrorMismatch,
    NotAdjacentInCondensation,
    NotAligned,
    NotLoner,
    NotPrime,
    NotReduced,
    PipelineError,
    SearchExhausted,
)
from .rewrite_moves import (
    MoveResult,
    apply_OTS,
    apply_T,
    bigon_between,
    condensation_round,
    condense,
    contract_blocks,
    region_ots,
    round_pairs,
    turn_tangle,
)
from .tangle_analysis import (
    Group,
    TwoRegion,
    chain_internal_ports,
    find_groups,
    find_ots_triangles,
    find_two_regions,
    locate_subgroup,
    make_tangle,
    minimize_two_region,
    ots_triangle_on,
    subgroup,
)

TRACE_FORMAT = 1

Block = tuple[int, ...]
Operation = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class MoveRecord:
    """One replayable move.

    Attributes:
        op: ``"T"`` or ``"OTS"``.
        operand: ``(group index, start, length)`` for T, the three crossings for OTS.
        components_before: Component count before the move.
        components_after: Component count after the move.
        step_index: Position of the move in its trace.
        code_after: Orientation-preserving canonical code of the result.
    """

    op: str
    operand: tuple[int, ...]
    components_before: int
    components_after: int
    step_index: int
    code_after: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "record": "move",
            "op": self.op,
            "operand": list(self.operand),
            "components_before": self.components_before,
            "components_after": self.components_after,
            "step_index": self.step_index,
            "code_after": self.code_after,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MoveRecord:
        return cls(
            op=data["op"],
            operand=tuple(data["operand"]),
            components_before=data["components_before"],
            components_after=data["components_after"],
            step_index=data["step_index"],
            code_after=data["code_after"],
        )


@dataclass(frozen=True)
class Checkpoint:
    """The condensation-level graph after one condensation round.

    Attributes:
        phase: Condensation phase (0 before the first ots phase).
        round: Round within the phase; round 0 is the input itself.
        after_move: Number of moves applied when the checkpoint was taken.
        vertex_count: Crossings of the condensation-level graph.
        code: Its reflection-folded canonical code.
        condensed: True when the graph has no 2-group left.
    """

    phase: int
    round: int
    after_move: int
    vertex_count: int
    code: str
    condensed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "phase": self.phase,
            "round": self.round,
            "after_move": self.after_move,
            "vertex_count": self.vertex_count,
            "code": self.code,
            "condensed": self.condensed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Checkpoint:
        return cls(**{key: data[key] for key in ("phase", "round", "after_move", "vertex_count", "code", "condensed")})


@dataclass
class ReductionTrace:
    """Moves taking a shadow to the torus shadow, with condensation checkpoints."""

    n: int
    initial_code: CanonicalCode
    moves: list[MoveRecord] = field(default_factory=list)
    checkpoints: list[Checkpoint] = field(default_factory=list)
    final_code: CanonicalCode | None = None

    @property
    def condensation_counts(self) -> list[int]:
        return [c.vertex_count for c in self.checkpoints]

    def to_records(self) -> list[dict[str, Any]]:
        """Header, one record per move, footer."""
        records: list[dict[str, Any]] = [
            {"record": "header", "format": TRACE_FORMAT, "n": self.n, "initial_code": str(self.initial_code)}
        ]
        records.extend(move.to_dict() for move in self.moves)
        records.append(
            {
                "record": "footer",
                "final_code": str(self.final_code) if self.final_code is not None else None,
                "checkpoints": [c.to_dict() for c in self.checkpoints],
            }
        )
        return records

    @classmethod
    def from_records(cls, records: Sequence[dict[str, Any]]) -> ReductionTrace:
        """Rebuild a trace from its records.

        Raises:
            FormatError: If the header or footer is missing or the format version is unknown.
        """
        if len(records) < 2 or records[0].get("record") != "header" or records[-1].get("record") != "footer":
            raise FormatError("a trace needs a header record first and a footer record last")
        header, footer = records[0], records[-1]
        if header.get("format") != TRACE_FORMAT:
            raise FormatError(f"unsupported trace format {header.get('format')!r}")
        try:
            moves = []
            for record in records[1:-1]:
                if record.get("record") != "move":
                    raise FormatError(f"unexpected record type {record.get('record')!r}")
                moves.append(MoveRecord.from_dict(record))
            final = footer.get("final_code")
            return cls(
                n=header["n"],
                initial_code=CanonicalCode.parse(header["initial_code"]),
                moves=moves,
                checkpoints=[Checkpoint.from_dict(c) for c in footer.get("checkpoints", [])],
                final_code=CanonicalCode.parse(final) if final is not None else None,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed trace record: {e}") from e


@dataclass
class VerificationReport:
    """Outcome of replaying a trace. Never raises; every failed check is listed."""

    steps_checked: int = 0
    failures: list[str] = field(default_factory=list)
    failed_step: int | None = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, step: int | None, message: str) -> None:
        if step is not None and self.failed_step is None:
            self.failed_step = step
        self.failures.append(message if step is None else f"step {step}: {message}")


@dataclass
class _Run:
    """Working state: the diagram, its blocks (sorted by smallest crossing) and the moves so far."""

    diagram: Diagram
    blocks: list[Block]
    moves: list[MoveRecord] = field(default_factory=list)

    def graph(self) -> Diagram:
        return block_graph(self.diagram, self.blocks)

    def index_of(self, crossings: Iterable[int]) -> int:
        wanted = frozenset(crossings)
        for index, block in enumerate(self.blocks):
            if frozenset(block) == wanted:
                return index
        raise PipelineError(f"crossings {sorted(wanted)} are not a block")


@dataclass(frozen=True)
class _Draft:
    """A tentative diagram with its blocks and the moves that produced it, not yet recorded."""

    diagram: Diagram
    blocks: tuple[Block, ...]
    ops: tuple[Operation, ...] = ()


# =============================================================================
# Helpers
# =============================================================================


def block_graph(d: Diagram, blocks: Sequence[Block]) -> Diagram:
    """Contract every block (a 2-braid in chain order) to one crossing.

    Only the bigon edges between consecutive chain crossings are swallowed. Vertex ``i`` of the result
    is ``blocks[i]`` when ``blocks`` is sorted by smallest crossing.
    """
    internal: set[int] = set()
    for block in blocks:
        if len(block) > 1:
            internal |= chain_internal_ports(d, block)
    return contract_blocks(d, blocks, internal)


def normalize_labels(groups: Sequence[Block]) -> tuple[Block, Block, Block]:
    """Rotate the three groups of a triangle into (A, B, C).

    With at least two odd groups, B and C are odd; otherwise the odd group, if any, is B. Among the
    admissible rotations the one whose smallest crossings read lexicographically first wins.

    Raises:
        LabelNormalizationImpossible: If no rotation qualifies.
    """
    if len(groups) != 3:
        raise LabelNormalizationImpossible(f"a triangle has three groups, got {len(groups)}")
    odd = sum(len(g) % 2 for g in groups)

    def admissible(rotation: Sequence[Block]) -> bool:
        if odd >= 2:
            return len(rotation[1]) % 2 == 1 and len(rotation[2]) % 2 == 1
        if odd == 1:
            return len(rotation[1]) % 2 == 1
        return True

    rotations = [tuple(groups[i:]) + tuple(groups[:i]) for i in range(3)]
    valid = [r for r in rotations if admissible(r)]
    if not valid:
        raise LabelNormalizationImpossible(f"no rotation of sizes {[len(g) for g in groups]} qualifies")
    best = min(valid, key=lambda r: tuple(min(g) for g in r))
    return best[0], best[1], best[2]


def _chain_of(graph: nx.Graph, members: set[int]) -> tuple[Block, bool] | None:
    """The crossings of a bigon component in chain order, and whether the chain closes up."""
    sub = graph.subgraph(members)
    if len(members) == 1:
        return (next(iter(members)),), False
    degrees = dict(sub.degree())
    if any(deg > 2 for deg in degrees.values()):
        return None
    ends = sorted(v for v, deg in degrees.items() if deg == 1)
    if len(ends) not in (0, 2):
        return None
    chain = [ends[0] if ends else min(members)]
    while len(chain) < len(members):
        chain.append(next(w for w in sorted(sub.neighbors(chain[-1])) if len(chain) < 2 or w != chain[-2]))
    return tuple(chain), not ends


def match_partition(
    d: Diagram,
    crossings: Iterable[int],
    others: Sequence[Block],
    target: CanonicalCode,
    pieces: int = 3,
) -> list[Block] | None:
    """Split ``crossings`` into ``pieces`` 2-braids so the block graph has the target code.

    The bigon chains of ``d`` inside ``crossings`` are cut at every combination of places that leaves
    exactly ``pieces`` pieces; a closed chain is opened at each of its gaps in turn. ``others`` are kept
    as they are. The code is compared with the folding of ``target``.

    Returns:
        The full sorted block list, or ``None`` when no split matches.
    """
    members = set(crossings)
    graph = nx.Graph()
    graph.add_nodes_from(members)
    for p, _ in d.bigons:
        u, w = p >> 2, d.mate[p] >> 2
        if u in members and w in members:
            graph.add_edge(u, w)
    found = []
    for component in nx.connected_components(graph):
        chain = _chain_of(graph, component)
        if chain is None:
            return None
        found.append(chain)
    if len(found) > pieces:
        return None
    openings = [
        [chain[k:] + chain[:k] for k in range(len(chain))] if closed else [chain] for chain, closed in found
    ]
    for chains in itertools.product(*openings):
        gaps = [(ci, k) for ci, chain in enumerate(chains) for k in range(1, len(chain))]
        for cuts in itertools.combinations(gaps, pieces - len(chains)):
            parts: list[Block] = []
            for ci, chain in enumerate(chains):
                points = [0, *sorted(k for cj, k in cuts if cj == ci), len(chain)]
                parts.extend(chain[s:e] for s, e in zip(points, points[1:]))
            blocks = sorted([*others, *parts], key=min)
            try:
                contracted = block_graph(d, blocks)
            except LinkShadowError:
                continue
            if canonical_code(contracted, target.reflection_folded) == target:
                return blocks
    return None


def _joined_chain(d: Diagram, first: Block, second: Block) -> Block | None:
    """The 2-braid formed by two blocks whose facing ends bound a bigon, if any."""
    for left in (first, first[::-1]):
        for right in (second, second[::-1]):
            if bigon_between(d, left[-1], right[0]) is None:
                continue
            chain = left + right
            internal = chain_internal_ports(d, chain)
            if 4 * len(chain) - len(internal) == 4:
                return chain
    return None


def replay_move(d: Diagram, record: MoveRecord) -> MoveResult:
    """Apply one recorded move to ``d``.

    Raises:
        PipelineError: For an unknown operation or a group index out of range.
    """
    if record.op == "T":
        index, start, length = record.operand
        groups = find_groups(d)
        if not 0 <= index < len(groups):
            raise PipelineError(f"group index {index} out of range (diagram has {len(groups)} groups)")
        return apply_T(d, subgroup(groups[index], start, length))
    if record.op == "OTS":
        return apply_OTS(d, record.operand)
    raise PipelineError(f"unknown operation {record.op!r}")


def _operand_crossings(d: Diagram, record: MoveRecord) -> tuple[int, ...]:
    if record.op == "T":
        index, start, length = record.operand
        return subgroup(find_groups(d)[index], start, length).crossings
    return tuple(record.operand)


# =============================================================================
# Pipeline
# =============================================================================


class ReductionPipeline:
    """Drives the reduction of one shadow at a time.

    Args:
        logger: Logger for phase progress.
        depth_cap: Depth limit of the graph-level emptying search.
        state_cap: State limit of the graph-level emptying search.
        tots_depth_cap: Depth limit of the diagram-level mirroring search.
        tots_state_cap: State limit of the diagram-level mirroring search.
    """

    def __init__(
        self,
        logger: logging.Logger,
        depth_cap: int = 64,
        state_cap: int = 20000,
        tots_depth_cap: int = 14,
        tots_state_cap: int = 20000,
    ):
        self.logger = logger
        self.depth_cap = depth_cap
        self.state_cap = state_cap
        self.tots_depth_cap = tots_depth_cap
        self.tots_state_cap = tots_state_cap

    # ------------------------------------------------------------------
    # Move bookkeeping
    # ------------------------------------------------------------------

    def _record(self, run: _Run, op: str, operand: tuple[int, ...], result: MoveResult) -> None:
        record = MoveRecord(
            op=op,
            operand=operand,
            components_before=result.components_before,
            components_after=result.components_after,
            step_index=len(run.moves),
            code_after=str(canonical_code(result.diagram, fold_reflection=False)),
        )
        run.moves.append(record)
        run.diagram = result.diagram
        self.logger.debug(f"move {record.step_index}: {op} {list(operand)}, components {result.components_after}")

    def _turn(self, run: _Run, crossings: Block) -> None:
        operand = locate_subgroup(run.diagram, crossings)
        self._record(run, "T", operand, apply_T(run.diagram, Group(tuple(crossings), maximal=False)))

    def _ots(self, run: _Run, vertices: Iterable[int]) -> None:
        triple = tuple(sorted(vertices))
        self._record(run, "OTS", triple, apply_OTS(run.diagram, triple))

    def _apply_ops(self, run: _Run, ops: Sequence[Operation]) -> None:
        for op, crossings in ops:
            if op == "T":
                self._turn(run, crossings)
            else:
                self._ots(run, crossings)

    def _checkpoint(self, trace: ReductionTrace, run: _Run, graph: Diagram, phase: int, round_no: int) -> None:
        checkpoint = Checkpoint(
            phase=phase,
            round=round_no,
            after_move=len(run.moves),
            vertex_count=graph.n,
            code=str(canonical_code(graph)),
            condensed=not graph.bigons,
        )
        trace.checkpoints.append(checkpoint)
        self.logger.info(f"phase {phase} round {round_no}: condensation has {graph.n} crossings")

    # ------------------------------------------------------------------
    # Condensation mirroring
    # ------------------------------------------------------------------

    def _merge_pair(self, run: _Run, i: int, j: int, closing: bool = False) -> Block:
        """Turn blocks ``i`` and ``j`` as needed so they form one 2-braid; returns the merged chain.

        With ``closing`` the two blocks make up the whole diagram and must close into the torus braid.
        """
        first, second = run.blocks[i], run.blocks[j]
        options: list[tuple[Block, ...]] = [()]
        turnable = [b for b in (first, second) if len(b) > 1]
        options.extend((b,) for b in turnable)
        if len(turnable) == 2:
            options.append((first, second))
        for turns in options:
            trial = run.diagram
            for block in turns:
                trial = turn_tangle(trial, make_tangle(trial, block))
            if closing:
                groups = find_groups(trial)
                chain: Block | None = groups[0].crossings if len(groups) == 1 and groups[0].cyclic else None
            else:
                chain = _joined_chain(trial, first, second)
            if chain is None:
                continue
            for block in turns:
                self._turn(run, block)
            if turns:
                self.logger.debug(f"merged {list(first)} and {list(second)} after {len(turns)} turn(s)")
            return chain
        raise NotAdjacentInCondensation(f"blocks {list(first)} and {list(second)} cannot be merged into one group")

    def _condensation_step(self, run: _Run) -> bool:
        """Mirror one condensation round of the block graph; False when it has no 2-group."""
        graph = run.graph()
        expected = condensation_round(graph)
        if expected is None:
            return False
        closing = graph.n == 2 and graph.multiplicity(0, 1) == 4
        pairs = [(0, 1)] if closing else round_pairs(graph)
        merged: dict[int, Block] = {}
        for i, j in pairs:
            merged[i] = self._merge_pair(run, i, j, closing)
            merged[j] = ()
        run.blocks = sorted(
            [merged[k] for k in merged if merged[k]] + [b for k, b in enumerate(run.blocks) if k not in merged],
            key=min,
        )
        if canonical_code(run.graph(), fold_reflection=False) != canonical_code(expected, fold_reflection=False):
            raise MirrorMismatch("merged blocks do not contract to the next condensation round")
        return True

    def _condense_phase(self, run: _Run, trace: ReductionTrace, phase: int) -> Diagram:
        round_no = 0
        while self._condensation_step(run):
            round_no += 1
            self._checkpoint(trace, run, run.graph(), phase, round_no)
        return run.graph()

    def merge_adjacent_groups(
        self, d: Diagram, g1: Group | Block, g2: Group | Block
    ) -> tuple[Diagram, list[MoveRecord]]:
        """Turn one or both of two groups so that they become a single group.

        Raises:
            NotAdjacentInCondensation: If the groups do not bound a bigon once contracted.
        """
        run = self._run_on_groups(d)
        first = g1.crossings if isinstance(g1, Group) else tuple(g1)
        second = g2.crossings if isinstance(g2, Group) else tuple(g2)
        i, j = run.index_of(first), run.index_of(second)
        graph = run.graph()
        if i == j or bigon_between(graph, i, j) is None:
            raise NotAdjacentInCondensation(f"groups {list(first)} and {list(second)} do not form a 2-group")
        closing = graph.n == 2 and graph.multiplicity(0, 1) == 4
        self._merge_pair(run, i, j, closing)
        return run.diagram, run.moves

    @staticmethod
    def _run_on_groups(d: Diagram) -> _Run:
        groups = find_groups(d)
        if any(g.cyclic for g in groups):
            raise NotAdjacentInCondensation("a torus shadow is already a single group")
        return _Run(d, sorted((g.crossings for g in groups), key=min))

    # ------------------------------------------------------------------
    # Graph-level emptying
    # ------------------------------------------------------------------

    def choose_region(self, g: Diagram) -> TwoRegion:
        """A minimal 2-region with the fewest boundary vertices."""
        minimal: dict[frozenset[int], TwoRegion] = {}
        for candidate in find_two_regions(g):
            region = minimize_two_region(g, candidate)
            minimal.setdefault(region.vertices, region)
        return min(minimal.values(), key=TwoRegion.sort_key)

    def empty_minimal_region(
        self, g: Diagram, r: TwoRegion, block_sizes: Sequence[int] | None = None
    ) -> list[tuple[int, int, int]]:
        """Graph-level ots moves after which ``g`` contains a 2-group.

        Greedy first, preferring triangles with more edges on the region boundary and then triangles
        over more single-crossing blocks; then breadth-first search over region states, and finally
        over every ots-triangle of the graph.

        Raises:
            SearchExhausted: If every search runs out of depth or states.
        """
        if g.bigons:
            return []
        sizes = list(block_sizes) if block_sizes is not None else [1] * g.n
        plan = self._greedy_emptying(g, r, sizes)
        if plan is None:
            self.logger.warning(f"greedy emptying of a {len(r.vertices)}-crossing region failed, searching")
            plan = self._search_emptying(g, r, restrict=True)
        if plan is None:
            self.logger.warning("region-restricted search failed, searching over all ots-triangles")
            plan = self._search_emptying(g, r, restrict=False)
        if plan is None:
            raise SearchExhausted(f"no ots sequence within {self.depth_cap} moves produces a 2-group")
        return plan

    def _greedy_emptying(self, g: Diagram, r: TwoRegion, sizes: Sequence[int]) -> list[tuple[int, int, int]] | None:
        seen = {canonical_code(g, fold_reflection=False)}
        graph, region = g, r
        plan: list[tuple[int, int, int]] = []
        for _ in range(self.depth_cap):
            options = []
            for triangle in find_ots_triangles(graph):
                if not set(triangle.vertices) <= region.vertices:
                    continue
                try:
                    result = region_ots(graph, region, triangle)
                except LinkShadowError:
                    continue
                loners = sum(1 for v in triangle.vertices if sizes[v] == 1)
                options.append(((-result.case, -loners, triangle.vertices), result))
            options.sort(key=lambda option: option[0])
            for (_, _, vertices), result in options:
                code = canonical_code(result.diagram, fold_reflection=False)
                if code in seen:
                    continue
                seen.add(code)
                plan.append(vertices)
                if result.diagram.bigons:
                    return plan
                graph, region = result.diagram, result.region  # type: ignore[assignment]
                break
            else:
                return None
        return None

    def _search_emptying(self, g: Diagram, r: TwoRegion, restrict: bool) -> list[tuple[int, int, int]] | None:
        queue: deque[tuple[Diagram, TwoRegion, list[tuple[int, int, int]]]] = deque([(g, r, [])])
        seen = {canonical_code(g, fold_reflection=False)}
        while queue:
            graph, region, plan = queue.popleft()
            if len(plan) >= self.depth_cap:
                continue
            for triangle in find_ots_triangles(graph):
                if restrict:
                    if not set(triangle.vertices) <= region.vertices:
                        continue
                    try:
                        step = region_ots(graph, region, triangle)
                    except LinkShadowError:
                        continue
                    after, after_region = step.diagram, step.region
                else:
                    after, after_region = apply_OTS(graph, triangle).diagram, region
                if after.bigons:
                    return [*plan, triangle.vertices]
                code = canonical_code(after, fold_reflection=False)
                if code in seen:
                    continue
                if len(seen) >= self.state_cap:
                    self.logger.warning(f"emptying search stopped at {self.state_cap} states")
                    return None
                seen.add(code)
                queue.append((after, after_region, [*plan, triangle.vertices]))  # type: ignore[list-item]
        return None

    # ------------------------------------------------------------------
    # Diagram-level mirroring of one ots
    # ------------------------------------------------------------------

    def _slide(self, d: Diagram, x: int, y: int, chain: Block) -> tuple[Diagram, list[Operation]] | None:
        """Move the edge between loners ``x`` and ``y`` across every crossing of ``chain`` in turn."""
        for turned in (False, True):
            if turned and len(chain) == 1:
                break
            start = turn_tangle(d, make_tangle(d, chain)) if turned else d
            prefix: list[Operation] = [("T", chain)] if turned else []
            for order in (chain, chain[::-1]):
                current = start
                ops = list(prefix)
                previous: tuple[int, ...] = (x, y, order[0])
                if ots_triangle_on(current, previous) is None:
                    continue
                current = apply_OTS(current, previous).diagram
                ops.append(("OTS", tuple(sorted(previous))))
                for c in order[1:]:
                    following = [
                        t.vertices
                        for t in find_ots_triangles(current)
                        if c in t.vertices and len(set(t.vertices) & set(previous)) == 2
                    ]
                    if not following:
                        break
                    previous = following[0]
                    current = apply_OTS(current, previous).diagram
                    ops.append(("OTS", previous))
                else:
                    return current, ops
        return None

    def _constructive(self, d: Diagram, labels: Sequence[Block]) -> tuple[Diagram, list[Operation]] | None:
        loners = [b[0] for b in labels if len(b) == 1]
        if len(loners) == 3:
            triple = tuple(sorted(loners))
            if ots_triangle_on(d, triple) is None:
                return None
            return apply_OTS(d, triple).diagram, [("OTS", triple)]
        if len(loners) == 2:
            chain = next(b for b in labels if len(b) > 1)
            return self._slide(d, loners[0], loners[1], chain)
        return None

    def _construct(self, draft: _Draft, triangle: Sequence[Block]) -> tuple[_Draft, list[Block]] | None:
        """Mirror the ots of three blocks of ``draft`` by peeling; returns the new draft and the new blocks.

        Two or three loners are handled directly. Otherwise a group with more than one crossing is taken
        apart from the end facing the triangle: its end crossing goes through the ots with the other two
        blocks, and each following crossing goes through the ots-triangle it then forms with two of the
        blocks just produced. The result is accepted only when its block graph is the ots of the input.
        """
        graph = block_graph(draft.diagram, draft.blocks)
        indices = [draft.blocks.index(block) for block in triangle]
        ots = ots_triangle_on(graph, indices)
        if ots is None:
            return None
        target = canonical_code(apply_OTS(graph, ots).diagram, fold_reflection=False)
        members = {v for block in triangle for v in block}
        others = [b for b in draft.blocks if b not in triangle]
        loners = sum(1 for block in triangle if len(block) == 1)
        if loners >= 2:
            built = self._constructive(draft.diagram, triangle)
            if built is None:
                return None
            blocks = match_partition(built[0], members, others, target)
            if blocks is None:
                return None
            result: _Draft | None = _Draft(built[0], tuple(blocks), draft.ops + tuple(built[1]))
        else:
            # peeled crossings join the odd group B, or C when B is even
            a, b, c = normalize_labels(triangle)
            absorber, other = (b, c) if len(b) % 2 else (c, b)
            preferred = sorted([1, len(a) + len(absorber) - 1, len(other)])
            result = None
            for group in (block for block in triangle if len(block) > 1):
                partners = [block for block in triangle if block != group]
                built = self._peel(draft, group, partners, (members, others, target))
                if built is None:
                    continue
                if result is None:
                    result = built
                if sorted(len(block) for block in built.blocks if block not in others) == preferred:
                    result = built
                    break
        if result is None:
            return None
        return result, [b for b in result.blocks if b not in others]

    def _peel(
        self,
        draft: _Draft,
        rest: Block,
        partners: Sequence[Block],
        goal: tuple[set[int], list[Block], CanonicalCode],
    ) -> _Draft | None:
        """Send the crossings of ``rest`` through the triangle one end crossing at a time."""
        members, others, target = goal
        if not rest:
            blocks = match_partition(draft.diagram, members, others, target)
            return None if blocks is None else replace(draft, blocks=tuple(blocks))
        kept = [b for b in draft.blocks if b != rest]
        for turned in (False, True):
            if turned and len(rest) == 1:
                break
            diagram = turn_tangle(draft.diagram, make_tangle(draft.diagram, rest)) if turned else draft.diagram
            ops = draft.ops + ((("T", rest),) if turned else ())
            splits = [((rest[0],), rest[1:])]
            if len(rest) > 1:
                splits.append(((rest[-1],), rest[:-1]))
            for end, remainder in splits:
                blocks = tuple(sorted([*kept, end, *([remainder] if remainder else [])], key=min))
                try:
                    graph = block_graph(diagram, blocks)
                except LinkShadowError:
                    continue
                index = blocks.index(end)
                allowed = {blocks.index(p) for p in partners}
                for ots in find_ots_triangles(graph):
                    if index not in ots.vertices or not set(ots.vertices) - {index} <= allowed:
                        continue
                    step = self._construct(_Draft(diagram, blocks, ops), [blocks[v] for v in ots.vertices])
                    if step is None:
                        continue
                    done = self._peel(step[0], remainder, step[1], goal)
                    if done is not None:
                        return done
        return None

    def _neighbours(self, d: Diagram, members: set[int]) -> Iterable[tuple[Operation, Diagram]]:
        for group in find_groups(d):
            if group.cyclic:
                continue
            inside = [v for v in group.crossings if v in members]
            if len(inside) < 2:
                continue
            for start in range(group.size):
                for length in range(2, group.size - start + 1):
                    crossings = group.crossings[start : start + length]
                    if not set(crossings) <= members:
                        continue
                    try:
                        tangle = make_tangle(d, crossings)
                    except LinkShadowError:
                        continue
                    if tangle.m == 4:
                        yield ("T", crossings), turn_tangle(d, tangle)
        for triangle in find_ots_triangles(d):
            if set(triangle.vertices) <= members:
                yield ("OTS", triangle.vertices), turn_tangle(d, make_tangle(d, triangle.vertices))

    def _search_mirror(
        self, d: Diagram, members: set[int], others: list[Block], target: CanonicalCode
    ) -> tuple[list[Operation], list[Block]]:
        queue: deque[tuple[Diagram, list[Operation]]] = deque([(d, [])])
        seen = {d.rotations}
        while queue:
            current, ops = queue.popleft()
            blocks = match_partition(current, members, others, target)
            if blocks is not None:
                return ops, blocks
            if len(ops) >= self.tots_depth_cap:
                continue
            for op, after in self._neighbours(current, members):
                if after.rotations in seen:
                    continue
                if len(seen) >= self.tots_state_cap:
                    raise SearchExhausted(f"mirroring search stopped at {self.tots_state_cap} states")
                seen.add(after.rotations)
                queue.append((after, [*ops, op]))
        raise SearchExhausted(f"no T/OTS sequence within {self.tots_depth_cap} moves mirrors the ots")

    def _mirror_ots(
        self,
        run: _Run,
        graph: Diagram,
        triangle: Sequence[int],
        labels: tuple[Block, Block, Block] | None = None,
    ) -> None:
        """Replace the three blocks of a graph-level ots-triangle so the block graph follows the ots."""
        ots = ots_triangle_on(graph, triangle)
        if ots is None:
            raise NotAligned(f"blocks {sorted(triangle)} do not form an ots-triangle")
        target = canonical_code(apply_OTS(graph, ots).diagram, fold_reflection=False)
        face_order = [p >> 2 for p in ots.face_ports]
        if labels is None:
            labels = normalize_labels([run.blocks[i] for i in face_order])
        members = {v for block in labels for v in block}
        others = [b for k, b in enumerate(run.blocks) if k not in face_order]

        built = self._construct(_Draft(run.diagram, tuple(run.blocks)), labels)
        if built is not None:
            draft = built[0]
            self._apply_ops(run, draft.ops)
            run.blocks = list(draft.blocks)
            self.logger.debug(f"mirrored ots on {sizes_of(labels)} constructively in {len(draft.ops)} moves")
        else:
            self.logger.warning(f"no construction mirrors the ots on groups of sizes {sizes_of(labels)}, searching")
            ops, blocks = self._search_mirror(run.diagram, members, others, target)
            self._apply_ops(run, ops)
            run.blocks = blocks
        if canonical_code(run.graph(), fold_reflection=False) != target:
            raise MirrorMismatch(f"mirrored ots on groups of sizes {sizes_of(labels)} missed its target")

    def _ots_phase(self, run: _Run, graph: Diagram) -> None:
        region = self.choose_region(graph)
        plan = self.empty_minimal_region(graph, region, [len(b) for b in run.blocks])
        self.logger.info(f"emptying a {len(region.vertices)}-crossing 2-region with {len(plan)} ots move(s)")
        planned = graph
        for triangle in plan:
            actual = run.graph()
            mapping = isomorphism(planned, actual)
            if mapping is None:
                raise MirrorMismatch("block graph drifted away from the planned ots sequence")
            self._mirror_ots(run, actual, [mapping[v] for v in triangle])
            planned = apply_OTS(planned, triangle).diagram
        if canonical_code(run.graph(), fold_reflection=False) != canonical_code(planned, fold_reflection=False):
            raise MirrorMismatch("block graph does not match the graph after the ots phase")

    def _triangle_run(
        self, d: Diagram, a: Group | Block, b: Group | Block, c: Group | Block
    ) -> tuple[_Run, Diagram, list[int], list[Block]]:
        run = self._run_on_groups(d)
        labels = [x.crossings if isinstance(x, Group) else tuple(x) for x in (a, b, c)]
        indices = [run.index_of(x) for x in labels]
        graph = run.graph()
        if ots_triangle_on(graph, indices) is None:
            raise NotAligned(f"groups {labels} do not form an ots-triangle in the condensation")
        return run, graph, indices, [run.blocks[i] for i in indices]

    def loner_ots_sequence(
        self, d: Diagram, a: Group | Block, b: Group | Block, c: Group | Block
    ) -> tuple[Diagram, list[MoveRecord]]:
        """Mirror the ots of a triangle of groups whose first group is a loner.

        Raises:
            NotLoner: If ``a`` has more than one crossing.
            NotAligned: If the groups do not form an ots-triangle once contracted.
        """
        run, graph, indices, labels = self._triangle_run(d, a, b, c)
        if len(labels[0]) != 1:
            raise NotLoner(f"group {list(labels[0])} has {len(labels[0])} crossings")
        self._mirror_ots(run, graph, indices, (labels[0], labels[1], labels[2]))
        return run.diagram, run.moves

    def group_ots_sequence(
        self, d: Diagram, a: Group | Block, b: Group | Block, c: Group | Block
    ) -> tuple[Diagram, list[MoveRecord]]:
        """Mirror the ots of a triangle of groups of any sizes, labels normalized by parity.

        Raises:
            NotAligned: If the groups do not form an ots-triangle once contracted.
        """
        run, graph, indices, _ = self._triangle_run(d, a, b, c)
        self._mirror_ots(run, graph, indices)
        return run.diagram, run.moves

    # ------------------------------------------------------------------
    # Whole reduction
    # ------------------------------------------------------------------

    def reduce(self, d: Diagram) -> ReductionTrace:
        """Reduce ``d`` to the torus shadow with the same crossing count.

        Raises:
            NotReduced, NotPrime: For inputs outside the scope of the reduction.
            SearchExhausted, MirrorMismatch: When a phase cannot be completed.
        """
        if d.n < 2 or not is_reduced(d):
            raise NotReduced("the reduction needs a loop-free shadow with at least two crossings")
        if not validate(d).prime:
            raise NotPrime("the reduction needs a 3-edge-connected shadow")
        run = _Run(d, [(v,) for v in range(d.n)])
        trace = ReductionTrace(d.n, canonical_code(d))
        self._checkpoint(trace, run, d, 0, 0)
        phase = 0
        try:
            while True:
                graph = self._condense_phase(run, trace, phase)
                if graph.n == 1:
                    break
                self._ots_phase(run, graph)
                phase += 1
        except LinkShadowError as e:
            self.logger.error(f"reduction failed after {len(run.moves)} moves: {e}", exc_info=True)
            raise
        final = canonical_code(run.diagram)
        if final != canonical_code(torus_shadow(d.n)):
            raise MirrorMismatch("the reduction ended away from the torus shadow")
        trace.moves = run.moves
        trace.final_code = final
        self.logger.info(f"reduced {d.n}-crossing shadow in {len(run.moves)} moves over {phase + 1} phase(s)")
        return trace


def sizes_of(blocks: Iterable[Block]) -> list[int]:
    return [len(b) for b in blocks]


def reduce_to_torus(d: Diagram, logger: logging.Logger | None = None, **caps: int) -> ReductionTrace:
    """Reduce ``d`` with a default pipeline; ``caps`` are passed to :class:`ReductionPipeline`."""
    return ReductionPipeline(logger or logging.getLogger(__name__), **caps).reduce(d)


# =============================================================================
# Verification
# =============================================================================


def verify_trace(initial: Diagram, trace: ReductionTrace) -> VerificationReport:
    """Replay a trace and check every recorded fact about it."""
    report = VerificationReport()
    n = initial.n
    if trace.n != n:
        report.fail(None, f"trace is for {trace.n} crossings, diagram has {n}")
    if canonical_code(initial) != trace.initial_code:
        report.fail(None, "initial code does not match the diagram")
    counts = trace.condensation_counts
    if any(later >= earlier for earlier, later in zip(counts, counts[1:])):
        report.fail(None, f"condensation counts are not strictly decreasing: {counts}")

    pending = sorted(trace.checkpoints, key=lambda c: c.after_move)

    def check_checkpoints(current: Diagram, done: int) -> None:
        while pending and pending[0].after_move <= done:
            checkpoint = pending.pop(0)
            name = f"{checkpoint.phase}.{checkpoint.round}"
            if checkpoint.condensed:
                if str(canonical_code(condense(current))) != checkpoint.code:
                    report.fail(done, f"condensation differs from checkpoint {name}")
                continue
            try:
                target = CanonicalCode.parse(checkpoint.code)
                size = target.n
            except (ValueError, IndexError):
                report.fail(done, f"checkpoint {name} has an unreadable code")
                continue
            if size != checkpoint.vertex_count:
                report.fail(done, f"checkpoint {name} code is for {size} crossings, not {checkpoint.vertex_count}")
            elif match_partition(current, range(n), [], target, pieces=checkpoint.vertex_count) is None:
                report.fail(done, f"no 2-braid blocks of the diagram contract to checkpoint {name}")

    current = initial
    check_checkpoints(current, 0)
    for index, record in enumerate(trace.moves):
        if record.step_index != index:
            report.fail(index, f"record numbered {record.step_index} found at position {index}")
            break
        if record.components_before != component_count(current):
            found = component_count(current)
            report.fail(index, f"components before: recorded {record.components_before}, found {found}")
        try:
            result = replay_move(current, record)
        except LinkShadowError as e:
            report.fail(index, f"{record.op} {list(record.operand)} cannot be replayed: {e}")
            break
        after = result.diagram
        if after.n != n:
            report.fail(index, f"crossing count changed to {after.n}")
        flags = validate(after)
        if not (flags.reduced and flags.prime):
            report.fail(index, f"result is not reduced and prime: {flags.as_dict()}")
        if record.components_after != result.components_after:
            report.fail(index, f"components after: recorded {record.components_after}, found {result.components_after}")
        if str(canonical_code(after, fold_reflection=False)) != record.code_after:
            report.fail(index, "result code does not match the record")
        current = after
        report.steps_checked += 1
        check_checkpoints(current, index + 1)

    final = canonical_code(current)
    if trace.final_code is None or final != trace.final_code:
        report.fail(None, "final code does not match the replayed diagram")
    if final != canonical_code(torus_shadow(n)):
        report.fail(None, "replay does not end at the torus shadow")
    return report


def compose_traces(d1: Diagram, first: ReductionTrace, d2: Diagram, second: ReductionTrace) -> list[MoveRecord]:
    """Moves taking ``d1`` to a diagram isomorphic to ``d2``.

    The first trace is followed to the torus shadow, then the second is walked backwards. Turning the
    same crossings twice only rotates them in place, so each backward move repeats the forward operand,
    transported onto the current diagram by an isomorphism.

    Raises:
        MirrorMismatch: If the two traces do not meet at isomorphic torus shadows.
    """
    records: list[MoveRecord] = []
    current = d1
    for record in first.moves:
        result = replay_move(current, record)
        records.append(replace(record, step_index=len(records)))
        current = result.diagram

    states = [d2]
    for record in second.moves:
        states.append(replay_move(states[-1], record).diagram)
    for i in range(len(second.moves) - 1, -1, -1):
        mapping = isomorphism(states[i + 1], current)
        if mapping is None:
            raise MirrorMismatch(f"backward step {i} does not meet the forward path")
        crossings = tuple(mapping[v] for v in _operand_crossings(states[i], second.moves[i]))
        if second.moves[i].op == "T":
            operand = locate_subgroup(current, crossings)
            result = apply_T(current, Group(crossings, maximal=False))
        else:
            operand = tuple(sorted(crossings))
            result = apply_OTS(current, operand)
        records.append(
            MoveRecord(
                op=second.moves[i].op,
                operand=operand,
                components_before=result.components_before,
                components_after=result.components_after,
                step_index=len(records),
                code_after=str(canonical_code(result.diagram, fold_reflection=False)),
            )
        )
        current = result.diagram
    return records
