"""Local rewrites of shadows: tangle turns, the T and OTS operators, collapse and condensation."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .diagram_core import Diagram, component_count, g_zero
from .errors import (
    BadIncidence,
    BadSize,
    CyclicGroup,
    MoveError,
    NotFullProper,
    NotOtsTriangle,
    NotTwoGroup,
    TriangleNotInRegion,
    TriangleTouchesTwoGroup,
)
from .tangle_analysis import (
    Group,
    GroupClass,
    MinimalLoop,
    OtsTriangle,
    Tangle,
    TwoRegion,
    boundary_order,
    classify_group,
    group_tangle,
    loop_from_vertices,
    make_tangle,
    ots_triangle_on,
    region_from_vertices,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MoveResult:
    """Outcome of one T or OTS application.

    Attributes:
        diagram: The rewritten diagram.
        components_before: Component count of the input.
        components_after: Component count of the output, recomputed from it.
        class_before: Classification of the operated group (None for OTS).
        class_after: Classification of the same crossings afterwards (None for OTS).
    """

    diagram: Diagram
    components_before: int
    components_after: int
    class_before: GroupClass | None = None
    class_after: GroupClass | None = None

    @property
    def delta(self) -> int:
        return self.components_after - self.components_before

    @property
    def kind_transitions(self) -> str:
        if self.class_before is None or self.class_after is None:
            return ""
        before, after = self.class_before, self.class_after
        return f"{before.kind}/{before.sign}/{before.parity} -> {after.kind}/{after.sign}/{after.parity}"


@dataclass(frozen=True)
class TurnPrediction:
    delta: int
    kind_after: str
    sign_after: str


@dataclass(frozen=True)
class RegionOtsResult:
    """A whole-graph ots together with the region it leaves behind.

    Attributes:
        diagram: The graph after the ots.
        region: The updated 2-region or minimal loop.
        case: 1, 2 or 3 for zero, one or two triangle edges on the region boundary.
    """

    diagram: Diagram
    region: TwoRegion | MinimalLoop
    case: int


# =============================================================================
# Turns
# =============================================================================


def turn_tangle(d: Diagram, t: Tangle) -> Diagram:
    """Re-attach every incident dart of a 4- or 6-tangle to the outside dart one position further on.

    The shadow inside the tangle is untouched; only the pairing of its incident ports with the outside
    changes, so vertex ids and rotation positions carry over to the result.

    Raises:
        BadIncidence: If the tangle does not have 4 or 6 incident darts.
    """
    if t.m not in (4, 6):
        raise BadIncidence(f"only 4- and 6-tangles can be turned, this one has {t.m} incident darts")
    mate = list(d.mate)
    ends = t.incident_ports
    outside = [d.mate[p] for p in ends]
    for i, p in enumerate(ends):
        q = outside[(i + 1) % t.m]
        mate[p] = q
        mate[q] = p
    return Diagram.from_ports(mate)


def apply_T(d: Diagram, g: Group) -> MoveResult:
    """Turn the 4-tangle of a group or subgroup.

    Raises:
        CyclicGroup: For the closed 2-braid of a torus shadow.
        BadIncidence: If the crossings do not form a 4-tangle.
    """
    if g.cyclic:
        raise CyclicGroup("the closed 2-braid of a torus shadow cannot be turned")
    tangle = group_tangle(d, g)
    if tangle.m != 4:
        raise BadIncidence(f"group {list(g.crossings)} has {tangle.m} incident darts, expected 4")
    before = classify_group(d, g)
    result = turn_tangle(d, tangle)
    after = classify_group(result, Group(g.crossings, maximal=False))
    move = MoveResult(result, component_count(d), component_count(result), before, after)
    logger.debug(f"T on {list(g.crossings)}: {move.kind_transitions}, components {move.delta:+d}")
    return move


def apply_OTS(d: Diagram, o: OtsTriangle | Iterable[int]) -> MoveResult:
    """Turn the 6-tangle of an ots-triangle.

    Raises:
        NotOtsTriangle: If the three crossings do not bound an ots-triangle face of ``d``.
    """
    vertices = o.vertices if isinstance(o, OtsTriangle) else tuple(o)
    triangle = ots_triangle_on(d, vertices) if len(set(vertices)) == 3 else None
    if triangle is None:
        raise NotOtsTriangle(f"crossings {sorted(vertices)} do not bound an ots-triangle")
    result = turn_tangle(d, make_tangle(d, triangle.vertices))
    logger.debug(f"OTS on {list(triangle.vertices)}")
    return MoveResult(result, component_count(d), component_count(result))


def turn_scenario(d: Diagram, g: Group) -> TurnPrediction:
    """Predict the effect of T on ``g`` from its classification alone."""
    cls = classify_group(d, g)
    if cls.parity == "odd":
        if cls.kind == "link" or cls.sign == "not_applicable":
            return TurnPrediction(0, cls.kind, cls.sign)
        return TurnPrediction(0, "component", "negative" if cls.sign == "positive" else "positive")
    if cls.kind == "link":
        return TurnPrediction(-1, "component", "negative")
    if cls.sign == "negative":
        return TurnPrediction(1, "link", "not_applicable")
    return TurnPrediction(0, "component", "positive")


# =============================================================================
# Contraction
# =============================================================================


def contract_blocks(
    d: Diagram,
    blocks: Sequence[Iterable[int]],
    internal: Iterable[int] | None = None,
) -> Diagram:
    """Replace each block of crossings by a single crossing.

    Args:
        d: The diagram.
        blocks: Disjoint crossing sets; crossings in no block stay on their own.
        internal: Ports whose edges are swallowed by the blocks. Defaults to every edge with both ends in
            the same block. Edges between crossings of one block that are not internal become loops.

    Returns:
        The contracted diagram. New vertices are numbered by the smallest crossing they contain, and
        each new rotation is the block's boundary order starting from its smallest incident port. A
        single block holding every crossing contracts to G0.

    Raises:
        NotFullProper: If a block does not have exactly four incident darts on one face.
    """
    block_of = list(range(d.n))
    members: dict[int, list[int]] = {v: [v] for v in range(d.n)}
    for block in blocks:
        vs = sorted(set(block))
        if not vs:
            continue
        if len(vs) == d.n:
            return g_zero()
        for v in vs:
            d.check_vertex(v)
            del members[block_of[v]]
        for v in vs:
            block_of[v] = vs[0]
        members[vs[0]] = vs
    mate = d.mate
    if internal is None:
        swallowed = frozenset(
            p for p in range(d.num_darts) if block_of[p >> 2] == block_of[mate[p] >> 2] and p >> 2 != mate[p] >> 2
        )
    else:
        swallowed = frozenset(internal)

    new_port: dict[int, int] = {}
    for index, key in enumerate(sorted(members)):
        vs = members[key]
        incident = [4 * v + i for v in vs for i in range(4) if 4 * v + i not in swallowed]
        if len(incident) != 4:
            raise NotFullProper(f"block {vs} has {len(incident)} incident darts, expected 4")
        order = boundary_order(d, min(incident), swallowed) if len(vs) > 1 else incident
        if len(order) != 4:
            raise NotFullProper(f"incident darts of block {vs} lie on more than one face")
        for position, p in enumerate(order):
            new_port[p] = 4 * index + position
    contracted = [0] * (4 * len(members))
    for p, q in new_port.items():
        contracted[q] = new_port[mate[p]]
    return Diagram.from_ports(contracted)


def bigon_between(d: Diagram, u: int, w: int) -> tuple[int, int] | None:
    for p, q in d.bigons:
        if {p >> 2, d.mate[p] >> 2} == {u, w}:
            return p, q
    return None


def collapse_two_group(d: Diagram, g: Group | Sequence[int]) -> Diagram:
    """Merge the two crossings of a 2-group, removing the edges of one bigon between them.

    Raises:
        NotTwoGroup: If the operand is not two crossings bounding a bigon.
    """
    crossings = tuple(g.crossings) if isinstance(g, Group) else tuple(g)
    if len(crossings) != 2 or crossings[0] == crossings[1]:
        raise NotTwoGroup(f"a 2-group has two distinct crossings, got {list(crossings)}")
    u, w = crossings
    bigon = bigon_between(d, u, w)
    if bigon is None:
        raise NotTwoGroup(f"crossings {u} and {w} do not bound a bigon")
    p, q = bigon
    return contract_blocks(d, [crossings], internal=(p, q, d.mate[p], d.mate[q]))


def expand_crossing(d: Diagram, v: int, k: int) -> Diagram:
    """Replace crossing ``v`` by a 2-braid of ``k`` crossings, undoing ``k - 1`` collapses.

    ``v`` becomes the first crossing of the chain and the new crossings get ids ``n .. n + k - 2``. The
    four darts of ``v`` are handed, in rotation order, to the four end darts of the chain.

    Raises:
        BadSize: If ``k < 1``.
    """
    d.check_vertex(v)
    if k < 1:
        raise BadSize(f"a chain needs at least one crossing, got {k}")
    if k == 1:
        return d
    chain = [v, *range(d.n, d.n + k - 1)]
    ends = (4 * chain[0] + 1, 4 * chain[0] + 2, 4 * chain[-1] + 3, 4 * chain[-1])
    moved = {4 * v + i: ends[i] for i in range(4)}
    mate = list(d.mate) + [0] * (4 * (k - 1))
    for i in range(4):
        a = ends[i]
        b = moved.get(d.mate[4 * v + i], d.mate[4 * v + i])
        mate[a], mate[b] = b, a
    for u, w in zip(chain, chain[1:]):
        mate[4 * u], mate[4 * w + 1] = 4 * w + 1, 4 * u
        mate[4 * u + 3], mate[4 * w + 2] = 4 * w + 2, 4 * u + 3
    return Diagram.from_ports(mate)


def round_pairs(d: Diagram) -> list[tuple[int, int]]:
    """Vertex-disjoint 2-groups for one condensation round, picked greedily by sorted vertex pair."""
    pairs = sorted({(min(p >> 2, d.mate[p] >> 2), max(p >> 2, d.mate[p] >> 2)) for p, _ in d.bigons})
    used: set[int] = set()
    chosen = []
    for u, w in pairs:
        if u in used or w in used:
            continue
        used.update((u, w))
        chosen.append((u, w))
    return chosen


def condensation_round(d: Diagram) -> Diagram | None:
    """Collapse a maximal set of vertex-disjoint 2-groups.

    Returns:
        The next diagram, or ``None`` when ``d`` has no 2-group left.
    """
    if d.n == 1:
        return None
    if d.n == 2 and d.multiplicity(0, 1) == 4:
        return g_zero()
    chosen = round_pairs(d)
    if not chosen:
        return None
    return contract_blocks(d, chosen)


def condensation_rounds(d: Diagram) -> list[Diagram]:
    """The input followed by every condensation round; the last entry is the condensation."""
    rounds = [d]
    while (nxt := condensation_round(rounds[-1])) is not None:
        rounds.append(nxt)
    logger.debug(f"condensation vertex counts: {[r.n for r in rounds]}")
    return rounds


def condense(d: Diagram) -> Diagram:
    """Fixed point of 2-group collapse: a graph without 2-groups, or G0."""
    return condensation_rounds(d)[-1]


# =============================================================================
# Region-level ots
# =============================================================================


def region_ots(d: Diagram, r: TwoRegion | MinimalLoop, o: OtsTriangle | Iterable[int]) -> RegionOtsResult:
    """Apply an ots inside a 2-region (or minimal loop) and carry the region along.

    A triangle crossing stays in the region exactly when, after the move, one of its legs reaches a
    region crossing outside the triangle. The updated vertex set is re-checked against the definition.

    Raises:
        TriangleNotInRegion: If a triangle crossing lies outside the region.
        TriangleTouchesTwoGroup: If a triangle edge borders a 2-group.
        NotOtsTriangle: If the crossings do not bound an ots-triangle face.
        MoveError: If the result is no longer a 2-region (minimal loop).
    """
    vertices = tuple(sorted(o.vertices if isinstance(o, OtsTriangle) else o))
    if not set(vertices) <= r.vertices:
        raise TriangleNotInRegion(f"triangle {list(vertices)} is not inside the region")
    for i, u in enumerate(vertices):
        for w in vertices[i + 1 :]:
            if d.multiplicity(u, w) >= 2:
                raise TriangleTouchesTwoGroup(f"triangle edge {u}-{w} borders a 2-group")
    triangle = ots_triangle_on(d, vertices)
    if triangle is None:
        raise NotOtsTriangle(f"crossings {list(vertices)} do not bound an ots-triangle")
    case = 1 + sum(1 for e in triangle.triangle_edges if e in r.boundary_edges)

    result = apply_OTS(d, triangle).diagram
    others = r.vertices - set(vertices)
    kept = set(others)
    for t in vertices:
        if any(w in others for w in result.neighbors(t)):
            kept.add(t)
    region: TwoRegion | MinimalLoop | None
    if isinstance(r, MinimalLoop):
        region = loop_from_vertices(result, kept)
    else:
        region = region_from_vertices(result, kept)
    if region is None:
        raise MoveError(f"crossings {sorted(kept)} no longer form a region after the ots")
    logger.debug(f"region ots case {case}: {len(r.vertices)} -> {len(region.vertices)} crossings")
    return RegionOtsResult(result, region, case)
