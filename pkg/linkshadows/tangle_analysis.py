"""Substructures of a shadow: tangles, groups, ots-triangles, 2-regions and minimal loops."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Literal

import networkx as nx

from .diagram_core import Diagram, is_reduced, port_next, port_opposite, to_multigraph, validate
from .errors import (
    BadSize,
    CyclicGroupHasNoEnds,
    NotComponentCrossing,
    NotFullProper,
    NotPrime,
    NotReduced,
    SubgroupRangeError,
    TangleError,
)

logger = logging.getLogger(__name__)

Kind = Literal["link", "component"]
Sign = Literal["positive", "negative", "not_applicable"]


@dataclass(frozen=True)
class Tangle:
    """An induced connected substructure whose incident darts all lie on one face.

    Attributes:
        vertices: The crossings of the tangle.
        incident_ports: Ports of the incident darts, counterclockwise along the edge face.
        incident_darts: The same darts by id.
    """

    vertices: frozenset[int]
    incident_ports: tuple[int, ...]
    incident_darts: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.incident_ports)


@dataclass(frozen=True)
class Group:
    """A 2-braid: crossings joined in sequence by bigons.

    Attributes:
        crossings: Crossings in chain order.
        cyclic: True only for the closed 2-braid of a torus shadow.
        maximal: False for subgroups.
        end_ports: Ports of the four end darts in boundary order (empty when cyclic).
    """

    crossings: tuple[int, ...]
    cyclic: bool = False
    maximal: bool = True
    end_ports: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return len(self.crossings)

    @property
    def is_loner(self) -> bool:
        return len(self.crossings) == 1

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.crossings)


@dataclass(frozen=True)
class GroupClass:
    kind: Kind
    sign: Sign
    parity: Literal["even", "odd"]


@dataclass(frozen=True)
class OtsTriangle:
    """A facial 3-cycle whose vertex pairs are each joined by a single edge.

    Attributes:
        vertices: The three crossings, sorted.
        face_ports: The triangle face as a port walk.
        triangle_edges: Edge ids of the three cycle edges.
        external_ports: The six remaining ports in boundary order.
        external_darts: The same six darts by id.
    """

    vertices: tuple[int, int, int]
    face_ports: tuple[int, int, int]
    triangle_edges: tuple[int, int, int]
    external_ports: tuple[int, ...]
    external_darts: tuple[int, ...]


@dataclass(frozen=True)
class TwoRegion:
    """A boundary cycle plus interior, with two degree-2 base vertices.

    Attributes:
        vertices: All vertices of the region.
        boundary_cycle: Vertices of the boundary cycle C, starting at the first base vertex.
        base_vertices: The two degree-2 vertices (p, q).
        interior_vertices: Vertices strictly inside C.
        boundary_edges: Edge ids along C.
    """

    vertices: frozenset[int]
    boundary_cycle: tuple[int, ...]
    base_vertices: tuple[int, ...]
    interior_vertices: frozenset[int]
    boundary_edges: frozenset[int]

    @property
    def is_two_group(self) -> bool:
        return not self.interior_vertices and len(self.boundary_cycle) == 2

    @property
    def boundary_paths(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """The two paths from p to q along C."""
        cycle = self.boundary_cycle
        q_index = cycle.index(self.base_vertices[1])
        forward = cycle[: q_index + 1]
        backward = (cycle[0],) + tuple(reversed(cycle[q_index:]))
        return forward, backward

    def sort_key(self) -> tuple:
        cycle = tuple(sorted(self.boundary_cycle))
        return (len(cycle), len(self.vertices), cycle, tuple(sorted(self.vertices)))


@dataclass(frozen=True)
class MinimalLoop:
    """A boundary cycle plus interior with a single degree-2 base vertex.

    Attributes:
        vertices: All vertices of the loop subgraph.
        boundary_cycle: Vertices of C, starting at the base vertex.
        base_vertex: The degree-2 vertex.
        interior_vertices: Vertices strictly inside C.
        boundary_edges: Edge ids along C.
        trivial: True for a single vertex carrying a loop edge.
    """

    vertices: frozenset[int]
    boundary_cycle: tuple[int, ...]
    base_vertex: int
    interior_vertices: frozenset[int]
    boundary_edges: frozenset[int]
    trivial: bool = False

    @property
    def base_vertices(self) -> tuple[int, ...]:
        return (self.base_vertex,)


# =============================================================================
# Tangles
# =============================================================================


def boundary_order(d: Diagram, start: int, internal: set[int] | frozenset[int]) -> list[int]:
    """Walk the edge face of a substructure from one incident port.

    Args:
        d: The diagram.
        start: An incident port (not in ``internal``).
        internal: Ports whose edges belong to the substructure.

    Returns:
        Incident ports in counterclockwise order around the substructure, beginning with ``start``.
    """
    mate = d.mate
    order = [start]
    p = start
    for _ in range(d.num_darts + 1):
        q = port_next(p)
        while q in internal:
            q = port_next(mate[q])
        if q == start:
            return order
        order.append(q)
        p = q
    raise TangleError(f"boundary walk from port {start} did not close")


def make_tangle(d: Diagram, vertices: Iterable[int]) -> Tangle:
    """The tangle induced by a vertex set.

    Raises:
        NotFullProper: If the set is empty or everything, the induced subgraph is disconnected, or
            the incident darts are spread over more than one face.
    """
    vs = frozenset(vertices)
    for v in vs:
        d.check_vertex(v)
    if not vs or len(vs) == d.n:
        raise NotFullProper(f"a tangle needs between 1 and {d.n - 1} crossings, got {len(vs)}")
    if not nx.is_connected(to_multigraph(d).subgraph(vs)):
        raise NotFullProper(f"crossings {sorted(vs)} do not induce a connected subgraph")
    mate = d.mate
    ports = [4 * v + i for v in sorted(vs) for i in range(4)]
    internal = frozenset(p for p in ports if mate[p] >> 2 in vs)
    incident = [p for p in ports if p not in internal]
    order = boundary_order(d, incident[0], internal)
    if len(order) != len(incident):
        raise NotFullProper(f"incident darts of {sorted(vs)} lie on more than one face")
    assert len(order) % 2 == 0, "incidence count of a tangle is even"
    return Tangle(vs, tuple(order), tuple(d.dart_at(p) for p in order))


# =============================================================================
# Groups
# =============================================================================


def _bigon_graph(d: Diagram) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(d.n))
    for p, _ in d.bigons:
        graph.add_edge(p >> 2, d.mate[p] >> 2)
    return graph


def chain_internal_ports(d: Diagram, crossings: tuple[int, ...], cyclic: bool = False) -> frozenset[int]:
    """Ports of the bigon edges joining consecutive crossings of a chain."""
    mate = d.mate
    links = list(zip(crossings, crossings[1:]))
    if cyclic and len(crossings) > 2:
        links.append((crossings[-1], crossings[0]))
    internal: set[int] = set()
    for u, w in links:
        for i in range(4):
            p = 4 * u + i
            if mate[p] >> 2 == w:
                internal.add(p)
                internal.add(mate[p])
    return frozenset(internal)


def _end_ports(d: Diagram, crossings: tuple[int, ...]) -> tuple[int, ...]:
    internal = chain_internal_ports(d, crossings)
    incident = [4 * v + i for v in crossings for i in range(4) if 4 * v + i not in internal]
    return tuple(boundary_order(d, min(incident), internal))


def find_groups(d: Diagram) -> list[Group]:
    """Partition the crossings into maximal 2-braids, loners included.

    Groups are ordered by their smallest crossing. A chain is listed from its end with the smaller
    id; the closed braid of a torus shadow starts at crossing 0 and heads to its smaller neighbour.
    """
    if d.n == 2 and d.multiplicity(0, 1) == 4:
        return [Group((0, 1), cyclic=True)]
    graph = _bigon_graph(d)
    groups = []
    for members in nx.connected_components(graph):
        sub = graph.subgraph(members)
        if any(deg > 2 for _, deg in sub.degree()):
            raise TangleError(f"crossings {sorted(members)} do not form a 2-braid")
        if len(members) > 2 and all(deg == 2 for _, deg in sub.degree()):
            first = min(members)
            chain = [first, min(sub.neighbors(first))]
            while len(chain) < len(members):
                chain.append(next(w for w in sub.neighbors(chain[-1]) if w != chain[-2]))
            groups.append(Group(tuple(chain), cyclic=True))
            continue
        ends = sorted(v for v, deg in sub.degree() if deg <= 1)
        chain = [ends[0]]
        while len(chain) < len(members):
            chain.append(next(w for w in sub.neighbors(chain[-1]) if len(chain) < 2 or w != chain[-2]))
        crossings = tuple(chain)
        groups.append(Group(crossings, end_ports=_end_ports(d, crossings)))
    groups.sort(key=lambda g: min(g.crossings))
    return groups


def group_containing(d: Diagram, v: int, groups: list[Group] | None = None) -> tuple[int, Group]:
    """Index and maximal group of crossing ``v``."""
    for index, group in enumerate(groups if groups is not None else find_groups(d)):
        if v in group.crossings:
            return index, group
    raise TangleError(f"crossing {v} is in no group")


def subgroup(g: Group, start: int, length: int) -> Group:
    """Contiguous 2-braid inside a group (cyclically contiguous for the closed braid).

    Raises:
        SubgroupRangeError: For an empty range or one that leaves the group.
    """
    if length < 1:
        raise SubgroupRangeError(f"subgroup length must be positive, got {length}")
    if g.cyclic:
        if not 0 <= start < g.size or length >= g.size:
            raise SubgroupRangeError(f"range ({start}, {length}) is not a proper arc of the closed braid")
        crossings = tuple(g.crossings[(start + i) % g.size] for i in range(length))
    else:
        if start < 0 or start + length > g.size:
            raise SubgroupRangeError(f"range ({start}, {length}) leaves a group of size {g.size}")
        crossings = g.crossings[start : start + length]
    return Group(crossings, cyclic=False, maximal=False)


def locate_subgroup(d: Diagram, crossings: Iterable[int], groups: list[Group] | None = None) -> tuple[int, int, int]:
    """Express a 2-braid as ``(group index, start, length)`` against the maximal groups of ``d``."""
    wanted = frozenset(crossings)
    groups = groups if groups is not None else find_groups(d)
    index, group = group_containing(d, min(wanted), groups)
    size = group.size
    for start in range(size):
        span = {group.crossings[(start + i) % size] for i in range(len(wanted))}
        if span == wanted and (group.cyclic or start + len(wanted) <= size):
            return index, start, len(wanted)
    raise TangleError(f"crossings {sorted(wanted)} are not a contiguous part of one group")


def group_tangle(d: Diagram, g: Group) -> Tangle:
    """The 4-tangle of a (sub)group."""
    if g.cyclic:
        raise CyclicGroupHasNoEnds("the closed 2-braid of a torus shadow has no end darts")
    return make_tangle(d, g.crossings)


def _exit_ports(d: Diagram, component: int) -> set[int]:
    """Ports through which one traversal of ``component`` leaves its crossings."""
    strands = d.strand_of_port
    start = strands.index(component)
    exits = set()
    p = start
    while True:
        exits.add(p)
        p = port_opposite(d.mate[p])
        if p == start:
            return exits


def classify_group(d: Diagram, g: Group) -> GroupClass:
    """Kind, sign and parity of a (sub)group.

    The sign compares the directions in which one traversal of the component runs along the two
    edges of a bigon of the group; it does not depend on which way the component is traversed.
    """
    strands = d.strand_of_port
    first = g.crossings[0]
    kind: Kind = "link" if strands[4 * first] != strands[4 * first + 1] else "component"
    parity: Literal["even", "odd"] = "even" if g.size % 2 == 0 else "odd"
    sign: Sign = "not_applicable"
    if kind == "component" and g.size >= 2:
        second = g.crossings[1]
        along = [4 * first + i for i in range(4) if d.mate[4 * first + i] >> 2 == second][:2]
        exits = _exit_ports(d, strands[4 * first])
        sign = "positive" if (along[0] in exits) == (along[1] in exits) else "negative"
    return GroupClass(kind, sign, parity)


# =============================================================================
# Triangles
# =============================================================================


def find_ots_triangles(d: Diagram) -> list[OtsTriangle]:
    """Degree-3 faces whose three vertex pairs are each joined by exactly one edge."""
    triangles = []
    for walk in d.face_ports:
        if len(walk) != 3:
            continue
        vertices = sorted(p >> 2 for p in walk)
        if len(set(vertices)) != 3:
            continue
        if any(d.multiplicity(u, w) != 1 for u, w in itertools.combinations(vertices, 2)):
            continue
        tangle = make_tangle(d, vertices)
        triangles.append(
            OtsTriangle(
                vertices=(vertices[0], vertices[1], vertices[2]),
                face_ports=(walk[0], walk[1], walk[2]),
                triangle_edges=tuple(sorted(d.dart_at(p) // 2 for p in walk)),  # type: ignore[arg-type]
                external_ports=tangle.incident_ports,
                external_darts=tangle.incident_darts,
            )
        )
    triangles.sort(key=lambda t: t.vertices)
    return triangles


def ots_triangle_on(d: Diagram, vertices: Iterable[int]) -> OtsTriangle | None:
    wanted = tuple(sorted(vertices))
    for triangle in find_ots_triangles(d):
        if triangle.vertices == wanted:
            return triangle
    return None


# =============================================================================
# 2-regions and minimal loops
# =============================================================================


@dataclass(frozen=True)
class _Shape:
    cycle: tuple[int, ...]
    bases: tuple[int, ...]
    interior: frozenset[int]
    edges: frozenset[int]


def _region_shape(d: Diagram, vertices: frozenset[int]) -> _Shape | None:
    """Boundary structure of a vertex set, or ``None`` when it has no well-formed outer face."""
    mate = d.mate
    ports = [4 * v + i for v in vertices for i in range(4)]
    internal = {p for p in ports if mate[p] >> 2 in vertices}
    leaving = len(ports) - len(internal)
    if not internal or not leaving:
        return None
    if len(vertices) > 1 and not nx.is_connected(to_multigraph(d).subgraph(vertices)):
        return None
    degree = {v: sum(1 for i in range(4) if 4 * v + i in internal) for v in vertices}
    seen: set[int] = set()
    for start in sorted(internal):
        if start in seen:
            continue
        walk = []
        corners = 0
        p = start
        while p not in seen:
            seen.add(p)
            walk.append(p)
            q = port_next(mate[p])
            while q not in internal:
                corners += 1
                q = port_next(q)
            p = q
        if corners != leaving:
            continue
        cycle = [p >> 2 for p in walk]
        if len(set(cycle)) != len(cycle):
            return None
        on_cycle = set(cycle)
        bases = [v for v in cycle if degree[v] == 2]
        if any(degree[v] not in (2, 3) for v in cycle):
            return None
        if any(degree[v] != 4 for v in vertices - on_cycle):
            return None
        if bases:
            shift = cycle.index(bases[0])
            cycle = cycle[shift:] + cycle[:shift]
            walk = walk[shift:] + walk[:shift]
        edges = frozenset(d.dart_at(p) // 2 for p in walk)
        return _Shape(tuple(cycle), tuple(bases), frozenset(vertices - on_cycle), edges)
    return None


def region_from_vertices(d: Diagram, vertices: Iterable[int]) -> TwoRegion | None:
    """The 2-region on exactly this vertex set, if the definitional predicate holds."""
    vs = frozenset(vertices)
    if len(vs) < 2:
        return None
    shape = _region_shape(d, vs)
    if shape is None or len(shape.bases) != 2:
        return None
    return TwoRegion(vs, shape.cycle, shape.bases, shape.interior, shape.edges)


def loop_from_vertices(d: Diagram, vertices: Iterable[int]) -> MinimalLoop | None:
    """The minimal loop on exactly this vertex set, if the definitional predicate holds."""
    vs = frozenset(vertices)
    shape = _region_shape(d, vs) if len(vs) >= 2 else None
    if shape is None or len(shape.bases) != 1:
        return None
    return MinimalLoop(vs, shape.cycle, shape.bases[0], shape.interior, shape.edges)


def is_two_region(d: Diagram, vertices: Iterable[int]) -> bool:
    return region_from_vertices(d, vertices) is not None


def _side_of_curve(d: Diagram, steps: list[tuple[int, int]], left: bool) -> frozenset[int]:
    """Vertices on one side of a simple closed curve, the curve included.

    Args:
        steps: For every curve vertex, the (arriving port, leaving port) pair in traversal order.
        left: Take the side counterclockwise from each leaving port.
    """
    on_curve = {p >> 2 for p, _ in steps}
    seeds = []
    for arrive, leave in steps:
        first, last = (leave, arrive) if left else (arrive, leave)
        q = port_next(first)
        while q != last:
            seeds.append(d.mate[q] >> 2)
            q = port_next(q)
    region = set(on_curve)
    stack = [v for v in seeds if v not in region]
    while stack:
        v = stack.pop()
        if v in region:
            continue
        region.add(v)
        stack.extend(w for w in d.neighbors(v) if w not in region)
    return frozenset(region)


def _strand_walk(d: Diagram, port: int) -> list[tuple[int, int]]:
    """Successive (arriving port, leaving port) pairs along a strand, starting by leaving ``port``."""
    steps = []
    p = port
    for _ in range(d.num_darts):
        arrive = d.mate[p]
        p = port_opposite(arrive)
        steps.append((arrive, p))
    return steps


def _curve_from(d: Diagram, a: int, b: int) -> list[tuple[int, int]] | None:
    """Closed curve formed by two strands leaving one crossing until they first meet."""
    v = a >> 2
    walk_a = _strand_walk(d, a)
    walk_b = _strand_walk(d, b)
    seen_a = {v: -1}
    seen_b = {v: -1}
    for k in range(len(walk_a)):
        for walk, mine, other in ((walk_a, seen_a, seen_b), (walk_b, seen_b, seen_a)):
            w = walk[k][0] >> 2
            if w in mine:
                return None
            mine[w] = k
            if w in other and w != v:
                ka, kb = seen_a[w], seen_b[w]
                # v -> w along a, then w -> v backwards along b
                steps = [(b, a)]
                steps.extend(walk_a[i] for i in range(ka))
                steps.append((walk_a[ka][0], walk_b[kb][0]))
                for i in range(kb - 1, -1, -1):
                    arrive, leave = walk_b[i]
                    steps.append((leave, arrive))
                return steps
    return None


def _scan_subsets(d: Diagram, vertices: frozenset[int], proper: bool) -> list[TwoRegion]:
    found = []
    limit = len(vertices) - 1 if proper else len(vertices)
    for size in range(2, limit + 1):
        for subset in itertools.combinations(sorted(vertices), size):
            region = region_from_vertices(d, subset)
            if region is not None:
                found.append(region)
    return found


def _require_reduced_prime(d: Diagram) -> None:
    if d.n < 2:
        raise BadSize("2-regions need at least two crossings")
    if not is_reduced(d):
        raise NotReduced("2-regions are defined on loop-free diagrams")
    if not validate(d).prime:
        raise NotPrime("2-regions are defined on 3-edge-connected diagrams")


def find_two_regions(d: Diagram) -> list[TwoRegion]:
    """Candidate 2-regions traced from every crossing and every adjacent pair of darts.

    The two strands leaving a crossing through adjacent darts are followed until they meet; the
    closed curve they form bounds two candidate regions, and every candidate passing the 2-region
    predicate is kept. Results are sorted smallest first.

    Raises:
        NotReduced, NotPrime: For diagrams outside the scope of the definition.
    """
    _require_reduced_prime(d)
    regions: dict[frozenset[int], TwoRegion] = {}
    for port in range(d.num_darts):
        steps = _curve_from(d, port, port_next(port))
        if steps is None:
            continue
        for left in (True, False):
            side = _side_of_curve(d, steps, left)
            if side in regions or len(side) == d.n:
                continue
            region = region_from_vertices(d, side)
            if region is not None:
                regions[side] = region
    if not regions:
        logger.debug("strand tracing produced no 2-region, scanning vertex subsets")
        for region in _scan_subsets(d, frozenset(range(d.n)), proper=True):
            regions.setdefault(region.vertices, region)
    return sorted(regions.values(), key=TwoRegion.sort_key)


def two_regions_within(d: Diagram, vertices: Iterable[int]) -> list[TwoRegion]:
    """Every 2-region whose vertex set lies inside ``vertices`` (exhaustive)."""
    return _scan_subsets(d, frozenset(vertices), proper=False)


def minimize_two_region(d: Diagram, r: TwoRegion) -> TwoRegion:
    """A minimal 2-region contained in ``r``, certified by scanning every proper vertex subset."""
    inner = _scan_subsets(d, r.vertices, proper=True)
    if not inner:
        return r
    smallest = min(len(region.vertices) for region in inner)
    return min((region for region in inner if len(region.vertices) == smallest), key=TwoRegion.sort_key)


def is_minimal(d: Diagram, r: TwoRegion) -> bool:
    return not _scan_subsets(d, r.vertices, proper=True)


def component_circuit(d: Diagram, v: int) -> list[tuple[int, int]]:
    """(arriving port, leaving port) pairs from leaving ``v`` at position 0 until ``v`` is reached again."""
    d.check_vertex(v)
    steps = []
    for arrive, leave in _strand_walk(d, 4 * v):
        steps.append((arrive, leave))
        if arrive >> 2 == v:
            return steps
    raise TangleError(f"strand from crossing {v} never returns")


def find_minimal_loop(d: Diagram, v: int) -> MinimalLoop:
    """A minimal loop whose boundary is a subwalk of the component circuit based at ``v``.

    Raises:
        NotComponentCrossing: If the two strands through ``v`` lie in different components.
    """
    d.check_vertex(v)
    strands = d.strand_of_port
    if strands[4 * v] != strands[4 * v + 1]:
        raise NotComponentCrossing(f"crossing {v} is a link crossing")
    for i in range(4):
        if d.mate[4 * v + i] >> 2 == v:
            edges = frozenset({d.dart_at(4 * v + i) // 2})
            return MinimalLoop(frozenset({v}), (v,), v, frozenset(), edges, trivial=True)

    walk = [(-1, 4 * v)] + component_circuit(d, v)
    first_visit: dict[int, int] = {}
    for k, (arrive, _) in enumerate(walk):
        u = (walk[k][1] >> 2) if k == 0 else arrive >> 2
        if u in first_visit:
            i = first_visit[u]
            leave_base = walk[i][1]
            steps = [(arrive, leave_base)] + walk[i + 1 : k]
            for left in (True, False):
                loop = loop_from_vertices(d, _side_of_curve(d, steps, left))
                if loop is not None and loop.base_vertex == u:
                    return loop
            raise TangleError(f"closed subwalk at crossing {u} bounds no minimal loop")
        first_visit[u] = k
    raise TangleError(f"component circuit from crossing {v} has no closed subwalk")
