"""Shadows of alternating link diagrams as rotation systems.

A shadow is a connected 4-regular plane multigraph. Each crossing lists its four darts in
counterclockwise order, and darts ``2e`` and ``2e + 1`` are the two ends of edge ``e``.

Most algorithms work on *ports* rather than darts: port ``4 * v + i`` is position ``i`` of the
rotation of vertex ``v``. Tangle turns only change which ports are paired, so a port keeps
addressing the same place of the same crossing across a whole sequence of moves, while dart ids are
renumbered into normal form by :meth:`Diagram.from_ports`.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import networkx as nx

from .errors import (
    BadSize,
    Disconnected,
    DuplicateDart,
    NonPlanar,
    UnknownVertex,
    UnpairedDart,
    WrongDegree,
)

logger = logging.getLogger(__name__)

Rotation = tuple[int, int, int, int]


def port_next(port: int) -> int:
    """Port one step counterclockwise around the same vertex."""
    return (port & ~3) | ((port + 1) & 3)


def port_prev(port: int) -> int:
    """Port one step clockwise around the same vertex."""
    return (port & ~3) | ((port + 3) & 3)


def port_opposite(port: int) -> int:
    """Port where a strand entering at ``port`` leaves the crossing."""
    return port ^ 2


@dataclass(frozen=True)
class Diagram:
    """A 4-regular plane multigraph given by its rotation system.

    Attributes:
        rotations: Per vertex, its four darts in counterclockwise order.

    Instances are immutable; derived structure (port pairing, faces, strands) is computed lazily
    and cached on first use.
    """

    rotations: tuple[Rotation, ...]

    @property
    def n(self) -> int:
        """Crossing count."""
        return len(self.rotations)

    @property
    def num_edges(self) -> int:
        return 2 * self.n

    @property
    def num_darts(self) -> int:
        return 4 * self.n

    @classmethod
    def from_ports(cls, mate: Sequence[int]) -> Diagram:
        """Build a diagram in normal form from a port pairing.

        Edges are numbered in order of first appearance while scanning ports ``0, 1, 2, ...``; the
        first port of an edge receives the even dart. No planarity or connectivity check is made:
        callers that need one use :func:`build_diagram` or :func:`validate`.

        Args:
            mate: ``mate[p]`` is the port paired with port ``p``; its length must be a multiple of 4.

        Returns:
            The normal-form diagram.

        Raises:
            UnpairedDart: If the pairing is not a fixed-point-free involution.
        """
        size = len(mate)
        if size % 4:
            raise WrongDegree(f"port count {size} is not a multiple of 4")
        darts = [-1] * size
        edge = 0
        for p in range(size):
            if darts[p] >= 0:
                continue
            q = mate[p]
            if q == p or mate[q] != p:
                raise UnpairedDart(f"port {p} is not properly paired")
            darts[p] = 2 * edge
            darts[q] = 2 * edge + 1
            edge += 1
        rotations = tuple(tuple(darts[4 * v : 4 * v + 4]) for v in range(size // 4))
        return cls(rotations)  # type: ignore[arg-type]

    @cached_property
    def dart_port(self) -> tuple[int, ...]:
        """``dart_port[d]`` is the port holding dart ``d``."""
        ports = [0] * self.num_darts
        for v, rotation in enumerate(self.rotations):
            for i, dart in enumerate(rotation):
                ports[dart] = 4 * v + i
        return tuple(ports)

    @cached_property
    def mate(self) -> tuple[int, ...]:
        """``mate[p]`` is the port at the other end of the edge leaving port ``p``."""
        ports = self.dart_port
        return tuple(ports[self.rotations[p >> 2][p & 3] ^ 1] for p in range(self.num_darts))

    def dart_at(self, port: int) -> int:
        return self.rotations[port >> 2][port & 3]

    def vertex_of(self, dart: int) -> int:
        return self.dart_port[dart] >> 2

    @staticmethod
    def partner(dart: int) -> int:
        return dart ^ 1

    def rot_next(self, dart: int) -> int:
        return self.dart_at(port_next(self.dart_port[dart]))

    def opposite(self, dart: int) -> int:
        return self.dart_at(port_opposite(self.dart_port[dart]))

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise UnknownVertex(f"vertex {v} not in 0..{self.n - 1}")

    @cached_property
    def face_ports(self) -> tuple[tuple[int, ...], ...]:
        """Face walks as port cycles; the walk leaving port ``p`` continues at ``next(mate[p])``."""
        mate = self.mate
        seen = bytearray(self.num_darts)
        faces = []
        for start in range(self.num_darts):
            if seen[start]:
                continue
            walk = []
            p = start
            while not seen[p]:
                seen[p] = 1
                walk.append(p)
                p = port_next(mate[p])
            faces.append(tuple(walk))
        return tuple(faces)

    @cached_property
    def port_face(self) -> tuple[int, ...]:
        """Index into :attr:`face_ports` of the face each port starts."""
        owner = [0] * self.num_darts
        for index, walk in enumerate(self.face_ports):
            for p in walk:
                owner[p] = index
        return tuple(owner)

    @cached_property
    def strand_of_port(self) -> tuple[int, ...]:
        """Component index of every port under straight-through continuation."""
        mate = self.mate
        component = [-1] * self.num_darts
        count = 0
        for start in range(self.num_darts):
            if component[start] >= 0:
                continue
            p = start
            while component[p] < 0:
                component[p] = count
                q = mate[p]
                component[q] = count
                p = port_opposite(q)
            count += 1
        return tuple(component)

    @cached_property
    def bigons(self) -> tuple[tuple[int, int], ...]:
        """Bigon faces between two distinct crossings, as port pairs ``(p, q)`` with ``p < q``.

        ``p`` and ``q`` are the two ports of one end crossing; their mates sit at the other.
        """
        result = []
        for walk in self.face_ports:
            if len(walk) != 2:
                continue
            p, q = walk
            if p >> 2 == q >> 2:
                continue
            result.append((p, q) if p < q else (q, p))
        return tuple(sorted(result))

    def multiplicity(self, u: int, w: int) -> int:
        """Number of edges joining ``u`` and ``w`` (a loop counts once per edge)."""
        count = 0
        for i in range(4):
            if self.mate[4 * u + i] >> 2 == w:
                count += 1
        return count // 2 if u == w else count

    def neighbors(self, v: int) -> list[int]:
        """Vertices at the far end of the four ports of ``v``, in rotation order."""
        return [self.mate[4 * v + i] >> 2 for i in range(4)]

    def render(self) -> str:
        """Diagram text format v1."""
        lines = ["linkdiagram 1", f"vertices {self.n}"]
        for v, rotation in enumerate(self.rotations):
            lines.append(f"{v}: " + " ".join(str(d) for d in rotation))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ComponentMap:
    """Link components of a shadow.

    Attributes:
        component_of: ``component_of[d]`` is the component index of dart ``d``.
        count: Number of link components.
    """

    component_of: tuple[int, ...]
    count: int


@dataclass(frozen=True)
class ValidationReport:
    four_regular: bool
    connected: bool
    planar: bool
    reduced: bool
    prime: bool

    @property
    def ok(self) -> bool:
        return all((self.four_regular, self.connected, self.planar, self.reduced, self.prime))

    def as_dict(self) -> dict[str, bool]:
        return {
            "four_regular": self.four_regular,
            "connected": self.connected,
            "planar": self.planar,
            "reduced": self.reduced,
            "prime": self.prime,
        }


@dataclass(frozen=True, order=True)
class CanonicalCode:
    """Isomorphism-class identity of a shadow.

    Attributes:
        code: Crossing count followed by the minimal breadth-first encoding.
        reflection_folded: Whether mirror images were identified.
    """

    code: tuple[int, ...]
    reflection_folded: bool = True

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.code)

    @classmethod
    def parse(cls, text: str, reflection_folded: bool = True) -> CanonicalCode:
        return cls(tuple(int(x) for x in text.split()), reflection_folded)

    @property
    def n(self) -> int:
        return self.code[0]


@dataclass(frozen=True)
class Labeling:
    """The relabeling that realizes a canonical code.

    Attributes:
        code: The canonical code.
        vertex_number: ``vertex_number[v]`` is the canonical index of vertex ``v``.
        start: Rotation position of each vertex that canonical position 0 refers to.
        orientation: +1, or -1 when the mirror image attained the minimum.
    """

    code: CanonicalCode
    vertex_number: tuple[int, ...]
    start: tuple[int, ...]
    orientation: int

    def canonical_port(self, port: int) -> int:
        v, i = port >> 2, port & 3
        return 4 * self.vertex_number[v] + ((i - self.start[v]) * self.orientation) % 4


# =============================================================================
# Construction
# =============================================================================


def build_diagram(
    rotations: Iterable[Sequence[int]],
    involution: Iterable[tuple[int, int]] | None = None,
) -> Diagram:
    """Build and validate a diagram.

    Args:
        rotations: Per vertex, four dart ids in counterclockwise order.
        involution: Optional dart pairs. When omitted the ``2e <-> 2e + 1`` convention applies and
            dart ids are kept as given; otherwise darts are renumbered into normal form.

    Returns:
        A diagram that is 4-regular, connected and planar.

    Raises:
        DuplicateDart, UnpairedDart, WrongDegree, Disconnected, NonPlanar: On the first violated
            invariant.
    """
    rows = [tuple(r) for r in rotations]
    seen: set[int] = set()
    for v, rotation in enumerate(rows):
        for dart in rotation:
            if dart in seen:
                raise DuplicateDart(f"dart {dart} listed twice (again at vertex {v})")
            if dart < 0:
                raise UnpairedDart(f"dart {dart} is negative")
            seen.add(dart)
        if len(rotation) != 4:
            raise WrongDegree(f"vertex {v} has {len(rotation)} darts")
    if not rows:
        raise BadSize("a diagram needs at least one crossing")

    if involution is None:
        if seen != set(range(len(seen))):
            missing = min(set(range(len(seen))) - seen)
            raise UnpairedDart(f"dart ids are not contiguous; dart {missing} is missing")
        diagram = Diagram(tuple(rows))  # type: ignore[arg-type]
    else:
        pair_of: dict[int, int] = {}
        for a, b in involution:
            for dart in (a, b):
                if dart in pair_of:
                    raise DuplicateDart(f"dart {dart} paired twice")
            if a == b:
                raise UnpairedDart(f"dart {a} is paired with itself")
            pair_of[a] = b
            pair_of[b] = a
        unpaired = seen - pair_of.keys()
        if unpaired:
            raise UnpairedDart(f"dart {min(unpaired)} has no partner")
        stray = pair_of.keys() - seen
        if stray:
            raise UnpairedDart(f"dart {min(stray)} is paired but not in any rotation")
        port_of = {dart: 4 * v + i for v, rotation in enumerate(rows) for i, dart in enumerate(rotation)}
        mate = [port_of[pair_of[rows[p >> 2][p & 3]]] for p in range(4 * len(rows))]
        diagram = Diagram.from_ports(mate)

    if not is_connected(diagram):
        raise Disconnected(f"diagram with {diagram.n} crossings is not connected")
    faces = len(diagram.face_ports)
    if diagram.n - diagram.num_edges + faces != 2:
        raise NonPlanar(f"V - E + F = {diagram.n} - {diagram.num_edges} + {faces} != 2")
    return diagram


def torus_shadow(n: int) -> Diagram:
    """Shadow of the (n,2) torus link: n crossings closed up into one 2-braid.

    Vertex ``i`` has rotation ``[upper-out, upper-in, lower-in, lower-out]``; the upper and lower
    edges from ``i`` to ``i + 1`` bound a bigon.

    Raises:
        BadSize: If ``n < 2``.
    """
    if n < 2:
        raise BadSize(f"torus shadow needs n >= 2, got {n}")
    mate = [0] * (4 * n)
    for i in range(n):
        j = (i + 1) % n
        upper_out, upper_in = 4 * i, 4 * j + 1
        lower_out, lower_in = 4 * i + 3, 4 * j + 2
        mate[upper_out], mate[upper_in] = upper_in, upper_out
        mate[lower_out], mate[lower_in] = lower_in, lower_out
    return Diagram.from_ports(mate)


def g_zero() -> Diagram:
    """The single crossing with two loops, the condensation of every torus shadow."""
    return Diagram(((0, 1, 2, 3),))


def mirror(d: Diagram) -> Diagram:
    """Reflect the plane by reversing every rotation (position 0 stays in place)."""
    return Diagram(tuple((r[0], r[3], r[2], r[1]) for r in d.rotations))


def connected_sum(d1: Diagram, d2: Diagram) -> Diagram:
    """Join two shadows by cutting the edge of dart 0 in each and reconnecting the loose ends.

    The two ways of reconnecting are tried in turn and the planar one is returned. The result has
    a 2-edge cut between the summands.
    """
    offset = 4 * d1.n
    base = list(d1.mate) + [q + offset for q in d2.mate]
    p1, q1 = d1.dart_port[0], d1.dart_port[1]
    p2, q2 = d2.dart_port[0] + offset, d2.dart_port[1] + offset
    for a, b in (((p1, p2), (q1, q2)), ((p1, q2), (q1, p2))):
        mate = list(base)
        for x, y in (a, b):
            mate[x], mate[y] = y, x
        candidate = Diagram.from_ports(mate)
        if candidate.n - candidate.num_edges + len(candidate.face_ports) == 2:
            return candidate
    raise NonPlanar("neither reconnection of the summands is planar")


# =============================================================================
# Queries
# =============================================================================


def faces(d: Diagram) -> list[tuple[int, ...]]:
    """Face walks as cyclic dart sequences; every dart lies on exactly one walk."""
    return [tuple(d.dart_at(p) for p in walk) for walk in d.face_ports]


def to_multigraph(d: Diagram) -> nx.MultiGraph:
    """Underlying multigraph, one keyed edge per diagram edge."""
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(d.n))
    for e in range(d.num_edges):
        graph.add_edge(d.vertex_of(2 * e), d.vertex_of(2 * e + 1), key=e)
    return graph


def is_connected(d: Diagram) -> bool:
    return nx.is_connected(to_multigraph(d))


def is_reduced(d: Diagram) -> bool:
    """True when no edge is a loop."""
    return all(d.mate[p] >> 2 != p >> 2 for p in range(d.num_darts))


def is_simple(d: Diagram) -> bool:
    """True when there are neither loops nor parallel edges."""
    for v in range(d.n):
        ends = d.neighbors(v)
        if v in ends or len(set(ends)) != 4:
            return False
    return True


def edge_connectivity_at_least(d: Diagram, k: int) -> bool:
    """Whether removing any fewer than ``k`` edges leaves the graph connected.

    Exhaustive over all edge subsets of size ``< k``; intended for desk-scale diagrams.
    """
    graph = to_multigraph(d)
    edges = [(d.vertex_of(2 * e), d.vertex_of(2 * e + 1), e) for e in range(d.num_edges)]
    for size in range(k):
        for cut in itertools.combinations(edges, size):
            remaining = graph.copy()
            remaining.remove_edges_from(cut)
            if not nx.is_connected(remaining):
                logger.debug(f"edge cut {[e for _, _, e in cut]} disconnects the diagram")
                return False
    return True


def validate(d: Diagram) -> ValidationReport:
    """Report the five structural flags of a diagram independently."""
    four_regular = all(len(r) == 4 for r in d.rotations)
    connected = is_connected(d)
    planar = d.n - d.num_edges + len(d.face_ports) == 2
    return ValidationReport(
        four_regular=four_regular,
        connected=connected,
        planar=planar,
        reduced=is_reduced(d),
        prime=connected and edge_connectivity_at_least(d, 3),
    )


def strand_components(d: Diagram) -> ComponentMap:
    """Partition the darts into link components by straight-through continuation."""
    by_port = d.strand_of_port
    component_of = [0] * d.num_darts
    for p, c in enumerate(by_port):
        component_of[d.dart_at(p)] = c
    count = max(by_port) + 1 if by_port else 0
    return ComponentMap(tuple(component_of), count)


def component_count(d: Diagram) -> int:
    return max(d.strand_of_port) + 1


def crossing_kind(d: Diagram, v: int) -> str:
    """``"link"`` when the two strands through ``v`` lie in different components, else ``"component"``."""
    d.check_vertex(v)
    strands = d.strand_of_port
    return "link" if strands[4 * v] != strands[4 * v + 1] else "component"


# =============================================================================
# Canonical codes
# =============================================================================


def _encode(
    d: Diagram, root: int, orientation: int, best: list[int] | None
) -> tuple[list[int], list[int], list[int]] | None:
    """Breadth-first encoding from ``root``; ``None`` as soon as it exceeds ``best``."""
    mate = d.mate
    number = [-1] * d.n
    start = [0] * d.n
    order = [root >> 2]
    number[root >> 2] = 0
    start[root >> 2] = root & 3
    code: list[int] = []
    tight = best is not None
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        base = 4 * v
        for j in range(4):
            q = mate[base + ((start[v] + orientation * j) & 3)]
            w = q >> 2
            if number[w] < 0:
                number[w] = len(order)
                start[w] = q & 3
                order.append(w)
            value = 4 * number[w] + (((q & 3) - start[w]) * orientation & 3)
            if tight:
                other = best[len(code)]  # type: ignore[index]
                if value > other:
                    return None
                if value < other:
                    tight = False
            code.append(value)
    if len(order) != d.n:
        raise Disconnected("canonical codes are defined for connected diagrams only")
    return code, number, start


def canonical_labeling(d: Diagram, fold_reflection: bool = True) -> Labeling:
    """Minimal breadth-first encoding over every root port and orientation, with its relabeling."""
    best: list[int] | None = None
    chosen: tuple[list[int], list[int], int] | None = None
    orientations = (1, -1) if fold_reflection else (1,)
    for orientation in orientations:
        for root in range(d.num_darts):
            result = _encode(d, root, orientation, best)
            if result is None:
                continue
            code, number, start = result
            if best is None or code < best:
                best = code
                chosen = (number, start, orientation)
    assert best is not None and chosen is not None
    number, start, orientation = chosen
    return Labeling(
        code=CanonicalCode((d.n, *best), fold_reflection),
        vertex_number=tuple(number),
        start=tuple(start),
        orientation=orientation,
    )


def canonical_code(d: Diagram, fold_reflection: bool = True) -> CanonicalCode:
    """Isomorphism-class code; equal codes mean isomorphic plane graphs."""
    return canonical_labeling(d, fold_reflection).code


def is_isomorphic(d1: Diagram, d2: Diagram, fold_reflection: bool = True) -> bool:
    if d1.n != d2.n:
        return False
    return canonical_code(d1, fold_reflection) == canonical_code(d2, fold_reflection)


def isomorphism(d1: Diagram, d2: Diagram) -> list[int] | None:
    """Orientation-preserving vertex map from ``d1`` onto ``d2``, or ``None`` if not isomorphic."""
    if d1.n != d2.n:
        return None
    first = canonical_labeling(d1, fold_reflection=False)
    second = canonical_labeling(d2, fold_reflection=False)
    if first.code != second.code:
        return None
    target_of_number = [0] * d2.n
    for v, number in enumerate(second.vertex_number):
        target_of_number[number] = v
    return [target_of_number[number] for number in first.vertex_number]
