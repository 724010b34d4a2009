"""Tests for reduction_pipeline."""

import logging
from dataclasses import replace

import pytest

from linkshadows.diagram_core import canonical_code, connected_sum, g_zero, torus_shadow, validate
from linkshadows.errors import (
    LabelNormalizationImpossible,
    NotAdjacentInCondensation,
    NotAligned,
    NotLoner,
    NotPrime,
    NotReduced,
)
from linkshadows.fixtures import load_fixture
from linkshadows.reduction_pipeline import (
    ReductionPipeline,
    ReductionTrace,
    block_graph,
    compose_traces,
    match_partition,
    normalize_labels,
    reduce_to_torus,
    replay_move,
    verify_trace,
)
from linkshadows.rewrite_moves import apply_OTS, apply_T, bigon_between, condense, expand_crossing, round_pairs
from linkshadows.tangle_analysis import classify_group, find_groups, find_ots_triangles, group_containing, subgroup


@pytest.fixture
def pipeline(logger):
    """Create a ReductionPipeline instance."""
    return ReductionPipeline(logger)


@pytest.fixture(scope="module")
def knot932_trace():
    """One reduction of the nine-crossing shadow, shared by the module."""
    return reduce_to_torus(load_fixture("knot932").diagram, logging.getLogger("test"))


@pytest.fixture
def octahedron(knot932):
    """The 6-crossing condensation of the nine-crossing shadow."""
    return condense(knot932)


def expand_triangle(graph, sizes):
    """Expand the crossings of the first ots-triangle of ``graph`` to chains of the given sizes."""
    triangle = find_ots_triangles(graph)[0]
    d = graph
    for v, k in zip(triangle.vertices, sizes):
        d = expand_crossing(d, v, k)
    return triangle, d, [group_containing(d, v)[1].crossings for v in triangle.vertices]


def triangle_blocks(graph, triangle, result, groups):
    """The blocks of ``result`` that replace the triangle once its ots is mirrored, or None."""
    others = [(v,) for v in range(graph.n) if v not in triangle.vertices]
    target = canonical_code(apply_OTS(graph, triangle).diagram, fold_reflection=False)
    blocks = match_partition(result, [v for g in groups for v in g], others, target)
    return None if blocks is None else [b for b in blocks if b not in others]


class TestLabels:
    """Tests for triangle label normalization."""

    def test_two_odd_groups(self):
        """Test B and C are the odd groups when two are odd."""
        assert normalize_labels([(1,), (2, 3), (4, 5, 6)]) == ((2, 3), (4, 5, 6), (1,))

    def test_one_odd_group(self):
        """Test the single odd group becomes B."""
        assert normalize_labels([(1,), (2, 3), (4, 5)]) == ((4, 5), (1,), (2, 3))

    def test_all_even_keeps_smallest_first(self):
        """Test ties are broken by smallest crossings."""
        assert normalize_labels([(4, 5), (0, 1), (2, 3)]) == ((0, 1), (2, 3), (4, 5))

    def test_wrong_count(self):
        """Test a triangle needs three groups."""
        with pytest.raises(LabelNormalizationImpossible):
            normalize_labels([(0,), (1,)])


class TestBlocks:
    """Tests for block contraction and partition matching."""

    def test_group_blocks_give_first_round(self, knot932):
        """Test contracting the maximal groups gives the 7-crossing round."""
        blocks = sorted((g.crossings for g in find_groups(knot932)), key=min)
        assert block_graph(knot932, blocks).n == 7

    def test_match_partition_recovers_chain(self, octahedron):
        """Test an expanded crossing is matched back as one block."""
        a, b, c = find_ots_triangles(octahedron)[0].vertices
        n = octahedron.n
        d = expand_crossing(octahedron, c, 3)
        others = [(v,) for v in range(n) if v not in (a, b, c)]
        target = canonical_code(octahedron, fold_reflection=False)
        blocks = match_partition(d, [a, b, c, n, n + 1], others, target)
        assert blocks is not None
        assert (c, n, n + 1) in blocks
        assert len(blocks) == n


class TestMergeAdjacentGroups:
    """Tests for merging two groups into one."""

    def test_merge_first_round_pair(self, pipeline, knot932):
        """Test two groups adjacent in the condensation become one group."""
        blocks = sorted((g.crossings for g in find_groups(knot932)), key=min)
        i, j = round_pairs(block_graph(knot932, blocks))[0]
        merged, moves = pipeline.merge_adjacent_groups(knot932, blocks[i], blocks[j])
        assert merged.n == 9
        assert validate(merged).ok
        assert all(move.op == "T" for move in moves)
        _, group = group_containing(merged, blocks[i][0])
        assert set(group.crossings) >= set(blocks[i]) | set(blocks[j])

    def test_merge_non_adjacent(self, pipeline, knot932):
        """Test groups with no bigon between them in the condensation are rejected."""
        blocks = sorted((g.crossings for g in find_groups(knot932)), key=min)
        graph = block_graph(knot932, blocks)
        i, j = next((i, j) for i in range(7) for j in range(i + 1, 7) if bigon_between(graph, i, j) is None)
        with pytest.raises(NotAdjacentInCondensation):
            pipeline.merge_adjacent_groups(knot932, blocks[i], blocks[j])

    def test_merge_on_torus(self, pipeline, trefoil):
        """Test a torus shadow has nothing to merge."""
        with pytest.raises(NotAdjacentInCondensation):
            pipeline.merge_adjacent_groups(trefoil, (0,), (1,))


class TestTriangleSequences:
    """Tests for mirroring an ots on groups."""

    def test_three_loners(self, pipeline, octahedron):
        """Test three loners need a single OTS."""
        triangle = find_ots_triangles(octahedron)[0]
        a, b, c = ((v,) for v in triangle.vertices)
        result, moves = pipeline.loner_ots_sequence(octahedron, a, b, c)
        assert [m.op for m in moves] == ["OTS"]
        expected = apply_OTS(octahedron, triangle).diagram
        assert canonical_code(result) == canonical_code(expected)

    def test_two_loners_and_a_chain(self, pipeline, octahedron):
        """Test sliding across a group of three mirrors the graph-level ots."""
        triangle = find_ots_triangles(octahedron)[0]
        a, b, c = triangle.vertices
        d = expand_crossing(octahedron, c, 3)
        _, chain = group_containing(d, c)
        result, moves = pipeline.loner_ots_sequence(d, (a,), (b,), chain.crossings)
        assert [m.op for m in moves].count("OTS") == 3
        assert result.n == 8
        assert validate(result).ok
        expected = apply_OTS(octahedron, triangle).diagram
        assert canonical_code(condense(result)) == canonical_code(condense(expected))

    def test_group_sequence(self, pipeline, octahedron):
        """Test a triangle with a 2-group is mirrored."""
        triangle = find_ots_triangles(octahedron)[0]
        a, b, c = triangle.vertices
        d = expand_crossing(octahedron, a, 2)
        _, pair = group_containing(d, a)
        result, moves = pipeline.group_ots_sequence(d, pair.crossings, (b,), (c,))
        assert moves
        assert validate(result).ok
        expected = apply_OTS(octahedron, triangle).diagram
        assert canonical_code(condense(result)) == canonical_code(condense(expected))

    @pytest.mark.parametrize("sizes", [(2, 1, 2), (2, 2, 1)])
    def test_group_sizes_after_ots(self, pipeline, octahedron, sizes):
        """Test two 2-groups and a loner leave groups of sizes 1, a+b-1 and c on the triangle."""
        triangle, d, groups = expand_triangle(octahedron, sizes)
        result, _ = pipeline.group_ots_sequence(d, *groups)
        blocks = triangle_blocks(octahedron, triangle, result, groups)
        assert blocks is not None
        assert sorted(len(b) for b in blocks) == [1, 2, 2]

    @pytest.mark.parametrize("sizes", [(1, 1, 5), (2, 2, 2), (1, 3, 3), (3, 3, 3), (4, 1, 4), (2, 3, 4)])
    def test_groups_of_any_size_are_constructed(self, pipeline, octahedron, sizes, caplog):
        """Test larger groups are mirrored by construction without falling back to the search."""
        triangle, d, groups = expand_triangle(octahedron, sizes)
        result, moves = pipeline.group_ots_sequence(d, *groups)
        assert moves
        assert validate(result).ok
        assert triangle_blocks(octahedron, triangle, result, groups) is not None
        assert not [r for r in caplog.records if r.levelno >= logging.WARNING]

    @pytest.mark.slow
    def test_twelve_crossing_expansion_reduces(self, octahedron):
        """Test the octahedron with a triangle of three 3-groups reduces and verifies."""
        _, d, _ = expand_triangle(octahedron, (3, 3, 3))
        assert d.n == 12
        trace = reduce_to_torus(d, logging.getLogger("test"))
        assert trace.final_code == canonical_code(torus_shadow(12))
        assert verify_trace(d, trace).ok

    def test_first_group_must_be_loner(self, pipeline, octahedron):
        """Test the loner sequence rejects a group in first position."""
        a, b, c = find_ots_triangles(octahedron)[0].vertices
        d = expand_crossing(octahedron, c, 3)
        _, chain = group_containing(d, c)
        with pytest.raises(NotLoner):
            pipeline.loner_ots_sequence(d, chain.crossings, (a,), (b,))

    def test_not_a_triangle(self, pipeline, octahedron):
        """Test three groups that do not bound an ots-triangle are rejected."""
        far = next(v for v in range(1, 6) if octahedron.multiplicity(0, v) == 0)
        other = next(v for v in range(1, 6) if v != far)
        with pytest.raises(NotAligned):
            pipeline.loner_ots_sequence(octahedron, (0,), (far,), (other,))


class TestReduce:
    """Tests for the whole reduction."""

    def test_knot932_checkpoints(self, knot932_trace):
        """Test the condensation goes through 9, 7, 6, 3, 2 and 1 crossings."""
        assert knot932_trace.condensation_counts == [9, 7, 6, 3, 2, 1]
        assert knot932_trace.final_code == canonical_code(torus_shadow(9))

    def test_knot932_link_group_merge(self, knot932, knot932_trace):
        """Test the phase after the ots moves turns a link group and joins two components."""
        moves = knot932_trace.moves
        first_ots = next(k for k, m in enumerate(moves) if m.op == "OTS")
        current = knot932
        joins = []
        for index, record in enumerate(moves):
            if index > first_ots and record.op == "T":
                group_index, start, length = record.operand
                group = subgroup(find_groups(current)[group_index], start, length)
                if record.components_before == 2 and record.components_after == 1:
                    joins.append(classify_group(current, group).kind)
            current = replay_move(current, record).diagram
        assert "link" in joins

    def test_knot932_closes_with_one_turn(self, knot932_trace):
        """Test a single T separates the 2-crossing round from the torus shadow."""
        before, last = knot932_trace.checkpoints[-2:]
        between = knot932_trace.moves[before.after_move : last.after_move]
        assert [m.op for m in between] == ["T"]

    def test_knot932_moves_keep_structure(self, knot932, knot932_trace):
        """Test every intermediate shadow has nine crossings and stays prime and reduced."""
        current = knot932
        for index, record in enumerate(knot932_trace.moves):
            assert record.step_index == index
            current = replay_move(current, record).diagram
            assert current.n == 9
            assert validate(current).ok

    def test_knot932_trace_verifies(self, knot932, knot932_trace):
        """Test the trace passes verification."""
        report = verify_trace(knot932, knot932_trace)
        assert report.ok, report.failures
        assert report.steps_checked == len(knot932_trace.moves)

    @pytest.mark.parametrize("name", ["figure_eight", "torus4", "torus5"])
    def test_small_fixtures(self, pipeline, name):
        """Test small shadows reduce and verify."""
        d = load_fixture(name).diagram
        trace = pipeline.reduce(d)
        assert trace.final_code == canonical_code(torus_shadow(d.n))
        assert verify_trace(d, trace).ok

    def test_torus_needs_no_moves(self, pipeline):
        """Test a torus shadow condenses without any move."""
        trace = pipeline.reduce(torus_shadow(5))
        assert trace.moves == []
        assert trace.condensation_counts == [5, 3, 2, 1]

    def test_rejects_non_prime(self, pipeline, trefoil):
        """Test a connected sum is outside the scope of the reduction."""
        with pytest.raises(NotPrime):
            pipeline.reduce(connected_sum(trefoil, trefoil))

    def test_rejects_non_reduced(self, pipeline):
        """Test G0 is outside the scope of the reduction."""
        with pytest.raises(NotReduced):
            pipeline.reduce(g_zero())


class TestVerifyTrace:
    """Tests for trace verification and tamper detection."""

    def test_deleted_record(self, knot932, knot932_trace):
        """Test removing a move is detected."""
        moves = list(knot932_trace.moves)
        del moves[len(moves) // 2]
        report = verify_trace(knot932, replace(knot932_trace, moves=moves))
        assert not report.ok
        assert report.failed_step is not None

    def test_forged_component_count(self, knot932, knot932_trace):
        """Test a forged component count is detected."""
        moves = list(knot932_trace.moves)
        moves[0] = replace(moves[0], components_after=moves[0].components_after + 1)
        report = verify_trace(knot932, replace(knot932_trace, moves=moves))
        assert not report.ok
        assert report.failed_step == 0

    def test_forged_intermediate_checkpoint(self, knot932, knot932_trace):
        """Test an intermediate checkpoint is compared against the replayed diagram."""
        checkpoints = list(knot932_trace.checkpoints)
        k = next(k for k, c in enumerate(checkpoints) if c.vertex_count == 7)
        assert not checkpoints[k].condensed
        checkpoints[k] = replace(checkpoints[k], code=str(canonical_code(torus_shadow(7))))
        report = verify_trace(knot932, replace(knot932_trace, checkpoints=checkpoints))
        assert not report.ok
        assert any("contract to checkpoint" in failure for failure in report.failures)

    def test_unreadable_checkpoint(self, knot932, knot932_trace):
        """Test a checkpoint code that does not parse is reported."""
        checkpoints = list(knot932_trace.checkpoints)
        checkpoints[1] = replace(checkpoints[1], code="not a code")
        assert not verify_trace(knot932, replace(knot932_trace, checkpoints=checkpoints)).ok

    def test_wrong_diagram(self, figure_eight, knot932_trace):
        """Test a trace does not verify against another shadow."""
        assert not verify_trace(figure_eight, knot932_trace).ok

    def test_records_round_trip(self, knot932_trace):
        """Test a trace survives conversion to records."""
        records = knot932_trace.to_records()
        assert records[0]["record"] == "header"
        assert records[-1]["record"] == "footer"
        assert ReductionTrace.from_records(records) == knot932_trace


def test_compose_traces(knot932, knot932_trace):
    """Test two traces compose into a path between their shadows."""
    target = apply_T(knot932, find_groups(knot932)[0]).diagram
    moves = compose_traces(knot932, knot932_trace, target, reduce_to_torus(target))
    current = knot932
    for record in moves:
        current = replay_move(current, record).diagram
    assert canonical_code(current) == canonical_code(target)
