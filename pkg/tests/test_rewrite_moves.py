"""Tests for rewrite_moves."""

import functools
import itertools
import logging

import pytest

from linkshadows.diagram_core import canonical_code, g_zero, is_simple, torus_shadow, validate
from linkshadows.errors import (
    BadIncidence,
    BadSize,
    CyclicGroup,
    LinkShadowError,
    NotComponentCrossing,
    NotOtsTriangle,
    NotTwoGroup,
)
from linkshadows.orbit_enumeration import brute_force_shadows, enumerate_orbit
from linkshadows.reduction_pipeline import ReductionPipeline
from linkshadows.rewrite_moves import (
    apply_OTS,
    apply_T,
    collapse_two_group,
    condensation_rounds,
    condense,
    contract_blocks,
    expand_crossing,
    region_ots,
    round_pairs,
    turn_scenario,
    turn_tangle,
)
from linkshadows.tangle_analysis import (
    Group,
    classify_group,
    find_groups,
    find_minimal_loop,
    find_ots_triangles,
    find_two_regions,
    is_two_region,
    loop_from_vertices,
    make_tangle,
    subgroup,
)

SWEEP_SIZES = [3, 4, 5, pytest.param(6, marks=pytest.mark.slow)]


@functools.cache
def all_shadows(n):
    """One diagram for every shadow in the orbit of the torus shadow with ``n`` crossings."""
    return tuple(enumerate_orbit(n).representatives.values())


def turnable(d):
    """Every 2-braid of ``d`` that T accepts, arcs of a closed braid included."""
    for group in find_groups(d):
        if group.cyclic:
            yield from (subgroup(group, s, k) for s in range(group.size) for k in range(1, group.size))
        else:
            yield from (subgroup(group, s, k) for s in range(group.size) for k in range(1, group.size - s + 1))


def region_outcomes(d, regions):
    """Every region ots that applies inside one of ``regions``, as (region, result) pairs."""
    for region in regions:
        for triangle in find_ots_triangles(d):
            if not set(triangle.vertices) <= region.vertices:
                continue
            try:
                yield region, region_ots(d, region, triangle)
            except LinkShadowError:
                continue


class TestTangleTurning:
    """Tests for T."""

    def test_figure_eight_group_gains_component(self, figure_eight):
        """Test turning an even negative component group splits off a component."""
        group = find_groups(figure_eight)[0]
        result = apply_T(figure_eight, group)
        assert result.components_before == 1
        assert result.components_after == 2
        assert result.delta == 1
        assert result.class_after.kind == "link"

    def test_link_group_loses_component(self):
        """Test turning an even link group joins the two components."""
        d = torus_shadow(4)
        result = apply_T(d, subgroup(find_groups(d)[0], 0, 2))
        assert (result.components_before, result.components_after) == (2, 1)
        assert result.class_after.kind == "component"
        assert result.class_after.sign == "negative"

    def test_trefoil_arc_keeps_shadow(self, trefoil):
        """Test turning an even positive component group gives the mirror trefoil."""
        result = apply_T(trefoil, subgroup(find_groups(trefoil)[0], 0, 2))
        assert result.delta == 0
        assert canonical_code(result.diagram) == canonical_code(trefoil)
        assert result.class_after.sign == "positive"

    def test_turn_twice_is_identity(self, knot932):
        """Test T applied twice to the same crossings restores the shadow."""
        for group in find_groups(knot932):
            once = apply_T(knot932, group).diagram
            twice = apply_T(once, Group(group.crossings, maximal=False)).diagram
            assert canonical_code(twice, fold_reflection=False) == canonical_code(knot932, fold_reflection=False)

    def test_structure_preserved(self, knot932):
        """Test every T keeps the crossing count, reducedness and primeness."""
        for group in find_groups(knot932):
            result = apply_T(knot932, group).diagram
            assert result.n == 9
            assert validate(result).ok

    def test_scenario_prediction(self, knot932, figure_eight):
        """Test the predicted component change and classification match the turn."""
        for d in (knot932, figure_eight, torus_shadow(6)):
            for group in find_groups(d):
                candidates = [group] if not group.cyclic else [subgroup(group, 0, k) for k in range(1, group.size)]
                for g in candidates:
                    predicted = turn_scenario(d, g)
                    result = apply_T(d, g)
                    assert predicted.delta == result.delta
                    assert predicted.kind_after == result.class_after.kind
                    assert predicted.sign_after == result.class_after.sign

    def test_cyclic_group_rejected(self, trefoil):
        """Test the closed braid cannot be turned."""
        with pytest.raises(CyclicGroup):
            apply_T(trefoil, find_groups(trefoil)[0])

    def test_six_tangle_rejected(self, knot932):
        """Test two crossings joined by one edge are not a 4-tangle."""
        with pytest.raises(BadIncidence):
            apply_T(knot932, Group((0, 2), maximal=False))

    def test_loner_turn_keeps_diagram(self, knot932):
        """Test turning a single crossing only rotates it in place."""
        for group in find_groups(knot932):
            if group.is_loner:
                result = apply_T(knot932, group)
                assert result.delta == 0
                assert canonical_code(result.diagram, fold_reflection=False) == canonical_code(
                    knot932, fold_reflection=False
                )

    @pytest.mark.parametrize("n", range(3, 9))
    def test_torus_arc_turn_gives_torus(self, n):
        """Test turning all but one crossing of the closed braid gives the torus shadow up to reflection."""
        d = torus_shadow(n)
        result = apply_T(d, subgroup(find_groups(d)[0], 0, n - 1))
        assert canonical_code(result.diagram) == canonical_code(d)

    def test_six_tangle_turn_can_break_primeness(self, knot932):
        """Test turning a full 6-tangle may leave a shadow that is not prime."""
        primeness = []
        for size in (2, 3):
            for crossings in itertools.combinations(range(knot932.n), size):
                try:
                    tangle = make_tangle(knot932, crossings)
                except LinkShadowError:
                    continue
                if tangle.m == 6:
                    primeness.append(validate(turn_tangle(knot932, tangle)).prime)
        assert False in primeness


class TestOtsTriangleTurning:
    """Tests for OTS."""

    def test_each_triangle_creates_two_group(self, knot932):
        """Test every ots on the condensation produces a bigon and keeps the structure."""
        g = condense(knot932)
        for triangle in find_ots_triangles(g):
            result = apply_OTS(g, triangle).diagram
            assert result.bigons
            assert result.n == g.n
            assert validate(result).ok

    def test_ots_twice_is_identity(self, knot932):
        """Test OTS applied twice to the same triangle restores the shadow."""
        g = condense(knot932)
        for triangle in find_ots_triangles(g):
            once = apply_OTS(g, triangle).diagram
            twice = apply_OTS(once, triangle.vertices).diagram
            assert canonical_code(twice) == canonical_code(g)

    def test_not_a_triangle(self, trefoil):
        """Test crossings that do not bound an ots-triangle are rejected."""
        with pytest.raises(NotOtsTriangle):
            apply_OTS(trefoil, (0, 1, 2))
        with pytest.raises(NotOtsTriangle):
            apply_OTS(trefoil, (0, 0, 1))


class TestCondensation:
    """Tests for collapse and condensation."""

    @pytest.mark.parametrize("n", range(2, 13))
    def test_torus_condenses_to_g_zero(self, n):
        """Test every torus shadow condenses to one crossing with two loops."""
        assert condense(torus_shadow(n)) == g_zero()

    def test_knot932_rounds(self, knot932):
        """Test the nine-crossing shadow condenses 9 -> 7 -> 6."""
        assert [d.n for d in condensation_rounds(knot932)] == [9, 7, 6]
        assert not condense(knot932).bigons

    def test_figure_eight_condenses(self, figure_eight):
        """Test both 2-groups collapse in one round, then the (2,2) torus collapses."""
        rounds = condensation_rounds(figure_eight)
        assert [d.n for d in rounds] == [4, 2, 1]
        assert round_pairs(figure_eight) and len(round_pairs(figure_eight)) == 2

    def test_collapse_gives_trefoil(self, figure_eight):
        """Test collapsing one 2-group of the figure-eight leaves the trefoil shadow."""
        result = collapse_two_group(figure_eight, find_groups(figure_eight)[0])
        assert result.n == 3
        assert validate(result).prime
        assert canonical_code(result) == canonical_code(torus_shadow(3))

    def test_collapse_needs_bigon(self, knot932):
        """Test crossings without a bigon between them cannot be collapsed."""
        with pytest.raises(NotTwoGroup):
            collapse_two_group(knot932, (0, 2))
        with pytest.raises(NotTwoGroup):
            collapse_two_group(knot932, (0, 1, 2))

    def test_contract_everything(self, knot932):
        """Test contracting all crossings gives G0."""
        assert contract_blocks(knot932, [range(9)]) == g_zero()

    def test_condensed_has_no_two_groups(self, knot932):
        """Test a condensation is simple unless it is G0."""
        g = condense(knot932)
        assert all(g.multiplicity(u, w) <= 1 for u in range(g.n) for w in range(u + 1, g.n))


class TestExpansion:
    """Tests for expanding a crossing into a chain."""

    def test_expand_then_collapse(self, knot932):
        """Test collapsing an expanded crossing gives back the shadow."""
        g = condense(knot932)
        expanded = expand_crossing(g, 2, 2)
        assert expanded.n == 7
        assert validate(expanded).ok
        assert canonical_code(collapse_two_group(expanded, (2, 6))) == canonical_code(g)

    def test_expand_into_chain(self, knot932):
        """Test a three-crossing expansion forms one group of three."""
        g = condense(knot932)
        expanded = expand_crossing(g, 0, 3)
        assert expanded.n == 8
        sizes = sorted(group.size for group in find_groups(expanded))
        assert sizes == [1, 1, 1, 1, 1, 3]

    def test_expand_single_is_noop(self, trefoil):
        """Test k = 1 leaves the diagram alone."""
        assert expand_crossing(trefoil, 1, 1) == trefoil

    def test_expand_bad_size(self, trefoil):
        """Test k < 1 is rejected."""
        with pytest.raises(BadSize):
            expand_crossing(trefoil, 0, 0)


class TestRegionOts:
    """Tests for ots inside a 2-region or a minimal loop."""

    CASE_DELTAS = {1: 0, 2: -1, 3: -2}

    def test_vertex_deltas(self):
        """Test region size changes by exactly 0, -1 and -2 for cases 1, 2 and 3."""
        seen = set()
        for n in (5, 6, 7):
            for d in all_shadows(n):
                for region, result in region_outcomes(d, find_two_regions(d)):
                    assert len(result.region.vertices) - len(region.vertices) == self.CASE_DELTAS[result.case]
                    assert is_two_region(result.diagram, result.region.vertices)
                    seen.add(result.case)
        assert {1, 2} <= seen

    def test_interior_triangle_keeps_size(self):
        """Test an ots with no triangle edge on the boundary keeps every region crossing."""
        region, result = next(
            (region, result)
            for n in (5, 6, 7)
            for d in all_shadows(n)
            for region, result in region_outcomes(d, find_two_regions(d))
            if result.case == 1
        )
        assert result.region.vertices == region.vertices
        assert len(result.region.base_vertices) == 2

    def test_one_boundary_edge_drops_one_crossing(self):
        """Test an ots with one triangle edge on the boundary pushes one crossing out."""
        region, result = next(
            (region, result)
            for n in (5, 6, 7)
            for d in all_shadows(n)
            for region, result in region_outcomes(d, find_two_regions(d))
            if result.case == 2
        )
        assert len(result.region.vertices) == len(region.vertices) - 1
        assert result.region.vertices < region.vertices

    def test_minimal_loop_deltas(self, knot932):
        """Test an ots inside a minimal loop keeps a minimal loop with the same case deltas."""
        seen = []
        for d in (knot932, *all_shadows(6), *all_shadows(7)):
            loops = []
            for v in range(d.n):
                try:
                    loop = find_minimal_loop(d, v)
                except NotComponentCrossing:
                    continue
                if not loop.trivial and loop not in loops:
                    loops.append(loop)
            for loop, result in region_outcomes(d, loops):
                assert len(result.region.vertices) - len(loop.vertices) == self.CASE_DELTAS[result.case]
                assert loop_from_vertices(result.diagram, result.region.vertices) is not None
                seen.append(result.case)
        assert seen

    def test_minimal_region_of_condensation(self, knot932):
        """Test the region chosen by the pipeline on the octahedron accepts some ots."""
        g = condense(knot932)
        region = ReductionPipeline(logging.getLogger("test")).choose_region(g)
        outcomes = list(region_outcomes(g, [region]))
        assert outcomes
        for _, result in outcomes:
            assert len(result.region.vertices) - len(region.vertices) == self.CASE_DELTAS[result.case]


@pytest.mark.parametrize("n", SWEEP_SIZES)
class TestMoveLawsOverAllShadows:
    """The move laws checked on every prime reduced shadow of a given size."""

    def test_sweep_covers_every_shadow(self, n):
        """Test the swept diagrams are exactly the exhaustively generated shadows."""
        assert {canonical_code(d) for d in all_shadows(n)} == brute_force_shadows(n)

    def test_turn_twice_restores(self, n):
        """Test T applied twice to any 2-braid gives back the oriented code."""
        for d in all_shadows(n):
            before = canonical_code(d, fold_reflection=False)
            for group in turnable(d):
                once = apply_T(d, group).diagram
                twice = apply_T(once, Group(group.crossings, maximal=False)).diagram
                assert canonical_code(twice, fold_reflection=False) == before

    def test_ots_twice_restores(self, n):
        """Test OTS applied twice to any ots-triangle gives back the oriented code."""
        for d in all_shadows(n):
            before = canonical_code(d, fold_reflection=False)
            for triangle in find_ots_triangles(d):
                twice = apply_OTS(apply_OTS(d, triangle).diagram, triangle.vertices).diagram
                assert canonical_code(twice, fold_reflection=False) == before

    def test_moves_keep_structure(self, n):
        """Test every T and OTS result has n crossings and is reduced and prime."""
        for d in all_shadows(n):
            results = [apply_T(d, g).diagram for g in turnable(d)]
            results += [apply_OTS(d, t).diagram for t in find_ots_triangles(d)]
            for result in results:
                assert result.n == n
                assert validate(result).ok

    def test_turn_laws(self, n):
        """Test odd groups keep their kind, even groups toggle it except positive component groups."""
        for d in all_shadows(n):
            for group in turnable(d):
                before = classify_group(d, group)
                result = apply_T(d, group)
                predicted = turn_scenario(d, group)
                assert result.delta == predicted.delta
                assert result.class_after.kind == predicted.kind_after
                assert result.class_after.parity == before.parity
                if before.parity == "odd":
                    assert result.delta == 0
                    assert result.class_after.kind == before.kind
                elif before.kind == "link":
                    assert (result.delta, result.class_after.kind) == (-1, "component")
                elif before.sign == "negative":
                    assert (result.delta, result.class_after.kind) == (1, "link")
                else:
                    assert (result.delta, result.class_after.kind, result.class_after.sign) == (
                        0,
                        "component",
                        "positive",
                    )

    def test_condensation_is_simple_or_g_zero(self, n):
        """Test condensing any shadow leaves a simple graph or G0."""
        for d in all_shadows(n):
            g = condense(d)
            assert g == g_zero() or is_simple(g)
