"""The T/OTS orbit of the torus shadow, and an independent exhaustive generator to check it against."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field

from .diagram_core import (
    CanonicalCode,
    Diagram,
    canonical_code,
    edge_connectivity_at_least,
    port_next,
    torus_shadow,
)
from .errors import BadSize, DepthLimitHit, LinkShadowError, MismatchedSize, SizeTooLarge
from .reduction_pipeline import MoveRecord, replay_move
from .rewrite_moves import apply_OTS, apply_T
from .tangle_analysis import find_groups, find_ots_triangles, subgroup

Step = tuple[str, tuple[int, ...]]


@dataclass
class Catalog:
    """Shadows reached from the torus shadow, one per canonical code.

    Attributes:
        n: Crossing count.
        codes: Canonical codes of the members.
        witness: For each code, the moves from ``torus_shadow(n)`` to its representative.
        representatives: The diagram each witness path ends at (not persisted).
        partial: True when the search stopped at its depth limit.
        reflection_folded: Whether codes identify mirror images.
    """

    n: int
    codes: set[CanonicalCode] = field(default_factory=set)
    witness: dict[CanonicalCode, tuple[Step, ...]] = field(default_factory=dict)
    representatives: dict[CanonicalCode, Diagram] = field(default_factory=dict)
    partial: bool = False
    reflection_folded: bool = True

    def sorted_codes(self) -> list[CanonicalCode]:
        return sorted(self.codes)

    def __len__(self) -> int:
        return len(self.codes)


@dataclass
class CatalogDiff:
    n: int
    only_in_orbit: list[CanonicalCode]
    only_in_reference: list[CanonicalCode]

    @property
    def empty(self) -> bool:
        return not self.only_in_orbit and not self.only_in_reference

    @property
    def size(self) -> int:
        return len(self.only_in_orbit) + len(self.only_in_reference)


def successors(d: Diagram) -> Iterator[tuple[Step, Diagram]]:
    """Every single T (on a subgroup of two or more crossings) and OTS applicable to ``d``.

    T on a single crossing only rotates it in place and is left out.
    """
    for index, group in enumerate(find_groups(d)):
        for start in range(group.size):
            longest = group.size - 1 if group.cyclic else group.size - start
            for length in range(2, longest + 1):
                try:
                    result = apply_T(d, subgroup(group, start, length))
                except LinkShadowError:
                    continue
                yield ("T", (index, start, length)), result.diagram
    for triangle in find_ots_triangles(d):
        yield ("OTS", triangle.vertices), apply_OTS(d, triangle).diagram


def replay_witness(n: int, path: tuple[Step, ...]) -> Diagram:
    """The diagram a witness path leads to from ``torus_shadow(n)``."""
    current = torus_shadow(n)
    for i, (op, operand) in enumerate(path):
        current = replay_move(current, MoveRecord(op, operand, 0, 0, i, "")).diagram
    return current


class OrbitEnumerator:
    """Breadth-first closure of the torus shadow under T and OTS.

    Args:
        logger: Logger for per-level progress.
        depth_limit: Number of breadth-first levels to expand, or ``None`` for no limit.
        reflection_fold: Identify mirror images.
    """

    def __init__(self, logger: logging.Logger, depth_limit: int | None = None, reflection_fold: bool = True):
        self.logger = logger
        self.depth_limit = depth_limit
        self.reflection_fold = reflection_fold

    def enumerate(self, n: int, strict: bool = False) -> Catalog:
        """Close ``torus_shadow(n)`` under every applicable move.

        Args:
            n: Crossing count, at least 3.
            strict: Raise instead of returning a partial catalog when the depth limit is hit.

        Raises:
            BadSize: If ``n < 3``.
            DepthLimitHit: With ``strict`` when unexpanded shadows remain at the depth limit.
        """
        if n < 3:
            raise BadSize(f"orbit enumeration needs n >= 3, got {n}")
        seed = torus_shadow(n)
        code = canonical_code(seed, self.reflection_fold)
        catalog = Catalog(n, {code}, {code: ()}, {code: seed}, reflection_folded=self.reflection_fold)
        frontier = [code]
        depth = 0
        while frontier:
            if self.depth_limit is not None and depth >= self.depth_limit:
                catalog.partial = True
                message = f"orbit of n={n} stopped at depth {depth} with {len(frontier)} shadows unexpanded"
                self.logger.warning(message)
                if strict:
                    raise DepthLimitHit(message)
                break
            found = []
            for current in frontier:
                for step, result in successors(catalog.representatives[current]):
                    code = canonical_code(result, self.reflection_fold)
                    if code in catalog.codes:
                        continue
                    catalog.codes.add(code)
                    catalog.witness[code] = (*catalog.witness[current], step)
                    catalog.representatives[code] = result
                    found.append(code)
            depth += 1
            frontier = sorted(found)
            self.logger.info(f"orbit n={n}: depth {depth}, {len(catalog.codes)} shadows, {len(frontier)} new")
        return catalog

    def closure_violations(self, catalog: Catalog) -> list[tuple[CanonicalCode, Step]]:
        """Moves leading out of the catalog; empty for a closed orbit."""
        violations = []
        for code in catalog.sorted_codes():
            d = catalog.representatives.get(code) or replay_witness(catalog.n, catalog.witness[code])
            for step, result in successors(d):
                if canonical_code(result, catalog.reflection_folded) not in catalog.codes:
                    violations.append((code, step))
        return violations


def enumerate_orbit(
    n: int, depth_limit: int | None = None, reflection_fold: bool = True, logger: logging.Logger | None = None
) -> Catalog:
    return OrbitEnumerator(logger or logging.getLogger(__name__), depth_limit, reflection_fold).enumerate(n)


# =============================================================================
# Exhaustive generation
# =============================================================================


class ShadowGenerator:
    """Every loop-free, 3-edge-connected 4-regular plane map with ``n`` vertices.

    Maps are grown from vertex 0 in breadth-first order: the first unpaired port is joined either to
    port 0 of a new vertex or to another unpaired port on the same partial face, which keeps every
    partial map planar. Loops are never formed and, for ``n >= 3``, no pair of vertices is joined by
    three edges. Each completed map is reduced to its canonical code and checked for primeness once.

    Args:
        logger: Logger for progress.
        max_n: Largest crossing count accepted.
        reflection_fold: Identify mirror images.
    """

    def __init__(self, logger: logging.Logger, max_n: int = 8, reflection_fold: bool = True):
        self.logger = logger
        self.max_n = max_n
        self.reflection_fold = reflection_fold

    def generate(self, n: int) -> set[CanonicalCode]:
        """Canonical codes of all prime reduced shadows with ``n`` crossings.

        Raises:
            SizeTooLarge: If ``n`` exceeds ``max_n``.
            BadSize: If ``n < 2``.
        """
        if n > self.max_n:
            raise SizeTooLarge(f"brute-force generation is capped at n={self.max_n}, got {n}")
        if n < 2:
            raise BadSize(f"a reduced shadow needs at least two crossings, got {n}")
        self._n = n
        self._mate = [-1] * (4 * n)
        self._count = 1
        self._multiplicity: dict[tuple[int, int], int] = {}
        self._accepted: set[CanonicalCode] = set()
        self._rejected: set[CanonicalCode] = set()
        self._leaves = 0
        self._extend(0)
        self.logger.info(
            f"brute force n={n}: {self._leaves} rooted maps, {len(self._accepted)} prime reduced shadows"
        )
        return set(self._accepted)

    def _same_face(self, p: int) -> list[int]:
        """Unpaired ports met walking the partial face that starts at unpaired port ``p``."""
        mate = self._mate
        found = []
        q = port_next(p)
        while q != p:
            if mate[q] < 0:
                found.append(q)
                q = port_next(q)
            else:
                q = port_next(mate[q])
        return found

    def _pair(self, p: int, q: int) -> None:
        self._mate[p], self._mate[q] = q, p
        key = (min(p, q) >> 2, max(p, q) >> 2)
        self._multiplicity[key] = self._multiplicity.get(key, 0) + 1

    def _unpair(self, p: int, q: int) -> None:
        self._mate[p] = self._mate[q] = -1
        key = (min(p, q) >> 2, max(p, q) >> 2)
        self._multiplicity[key] -= 1

    def _extend(self, start: int) -> None:
        mate = self._mate
        p = start
        limit = 4 * self._count
        while p < limit and mate[p] >= 0:
            p += 1
        if p == limit:
            if self._count == self._n:
                self._complete()
            return
        if self._count < self._n:
            v = self._count
            self._count += 1
            self._pair(p, 4 * v)
            self._extend(p + 1)
            self._unpair(p, 4 * v)
            self._count -= 1
        cap = 2 if self._n >= 3 else 4
        for q in self._same_face(p):
            if q >> 2 == p >> 2:
                continue
            key = (min(p, q) >> 2, max(p, q) >> 2)
            if self._multiplicity.get(key, 0) >= cap:
                continue
            self._pair(p, q)
            self._extend(p + 1)
            self._unpair(p, q)

    def _complete(self) -> None:
        self._leaves += 1
        d = Diagram.from_ports(self._mate)
        code = canonical_code(d, self.reflection_fold)
        if code in self._accepted or code in self._rejected:
            return
        if edge_connectivity_at_least(d, 3):
            self._accepted.add(code)
            self.logger.debug(f"new shadow {code}")
        else:
            self._rejected.add(code)


def brute_force_shadows(
    n: int, max_n: int = 8, reflection_fold: bool = True, logger: logging.Logger | None = None
) -> set[CanonicalCode]:
    return ShadowGenerator(logger or logging.getLogger(__name__), max_n, reflection_fold).generate(n)


def compare_catalogs(a: Catalog, b: Catalog | set[CanonicalCode]) -> CatalogDiff:
    """Symmetric difference between an orbit catalog and a reference set of codes.

    Raises:
        MismatchedSize: If the reference is for a different crossing count.
    """
    reference = b.codes if isinstance(b, Catalog) else set(b)
    if isinstance(b, Catalog) and b.n != a.n:
        raise MismatchedSize(f"cannot compare catalogs for n={a.n} and n={b.n}")
    stray = sorted(c for c in reference if c.n != a.n)
    if stray:
        raise MismatchedSize(f"reference holds a code for n={stray[0].n}, catalog is for n={a.n}")
    return CatalogDiff(a.n, sorted(a.codes - reference), sorted(reference - a.codes))
