"""Command-line front end for the linkshadows toolkit."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence

from .config import ToolkitConfig, load_config
from .diagram_core import canonical_code, component_count, crossing_kind, strand_components, validate
from .diagram_io import export_dot, read_trace, save_catalog, write_diagram, write_trace
from .errors import LinkShadowError
from .fixtures import fixture_names, load_fixture, resolve_diagram
from .orbit_enumeration import OrbitEnumerator, ShadowGenerator, compare_catalogs
from .reduction_pipeline import ReductionPipeline, verify_trace
from .rewrite_moves import apply_OTS, apply_T, condensation_rounds
from .tangle_analysis import classify_group, find_groups, find_ots_triangles, find_two_regions, subgroup

Handler = Callable[[argparse.Namespace, ToolkitConfig, logging.Logger], int]


def cmd_validate(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    """Print the structural flags of a diagram; fails unless every flag holds."""
    report = validate(resolve_diagram(args.diagram))
    for key, value in report.as_dict().items():
        print(f"{key:10s} {'yes' if value else 'no'}")
    return 0 if report.ok else 1


def cmd_components(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    d = resolve_diagram(args.diagram)
    components = strand_components(d)
    print(f"components: {component_count(d)}")
    for v, rotation in enumerate(d.rotations):
        strands = sorted({components.component_of[dart] for dart in rotation})
        print(f"  crossing {v}: {crossing_kind(d, v)} crossing on components {strands}")
    return 0


def cmd_groups(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    d = resolve_diagram(args.diagram)
    for index, group in enumerate(find_groups(d)):
        cls = classify_group(d, group)
        shape = "cyclic " if group.cyclic else ""
        crossings = " ".join(str(v) for v in group.crossings)
        print(f"group {index}: {shape}{group.size} [{crossings}] {cls.parity} {cls.kind} {cls.sign}")
    return 0


def cmd_condense(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    rounds = condensation_rounds(resolve_diagram(args.diagram))
    print("rounds: " + " -> ".join(str(g.n) for g in rounds))
    print(f"code: {canonical_code(rounds[-1], not args.no_reflection_fold)}")
    if args.out:
        write_diagram(rounds[-1], args.out)
    return 0


def cmd_apply(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    """Apply one T (group index, start, length) or OTS (three crossings)."""
    d = resolve_diagram(args.diagram)
    if args.op == "T":
        index, start, length = args.operand
        groups = find_groups(d)
        if not 0 <= index < len(groups):
            raise LinkShadowError(f"group index {index} out of range (diagram has {len(groups)} groups)")
        result = apply_T(d, subgroup(groups[index], start, length))
    else:
        result = apply_OTS(d, args.operand)
    print(f"components: {result.components_before} -> {result.components_after}")
    print(f"code: {canonical_code(result.diagram, not args.no_reflection_fold)}")
    if args.out:
        write_diagram(result.diagram, args.out)
    else:
        sys.stdout.write(result.diagram.render())
    return 0


def _pipeline(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> ReductionPipeline:
    caps = config.search_caps()
    if getattr(args, "depth_cap", None) is not None:
        caps["depth_cap"] = args.depth_cap
    return ReductionPipeline(logger, **caps)


def cmd_reduce(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    d = resolve_diagram(args.diagram)
    trace = _pipeline(args, config, logger).reduce(d)
    print("condensation: " + " ".join(str(c) for c in trace.condensation_counts))
    print(f"moves: {len(trace.moves)}")
    print(f"final: {trace.final_code}")
    if args.trace:
        write_trace(trace, args.trace)
        logger.info(f"Trace written to {args.trace}")
    return 0


def cmd_verify(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    report = verify_trace(resolve_diagram(args.diagram), read_trace(args.trace))
    for failure in report.failures:
        print(f"FAIL {failure}")
    print(f"{'ok' if report.ok else 'failed'}: {report.steps_checked} steps checked")
    return 0 if report.ok else 1


def cmd_orbit(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    fold = config.reflection_fold and not args.no_reflection_fold
    depth = args.depth_cap if args.depth_cap is not None else config.orbit_depth_limit
    catalog = OrbitEnumerator(logger, depth, fold).enumerate(args.n)
    print(f"orbit n={args.n}: {len(catalog)} shadows{' (partial)' if catalog.partial else ''}")
    if args.out:
        codes_path, _ = save_catalog(catalog, args.out)
        print(f"catalog: {codes_path}")
    if not args.oracle:
        return 0
    reference = ShadowGenerator(logger, config.brute_force_max_n, fold).generate(args.n)
    diff = compare_catalogs(catalog, reference)
    if diff.empty:
        print("orbit == brute force")
        return 0
    for code in diff.only_in_orbit:
        print(f"only in orbit: {code}")
    for code in diff.only_in_reference:
        print(f"only in brute force: {code}")
    print(f"orbit != brute force ({diff.size} differences)")
    return 1


def cmd_canon(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    fold = config.reflection_fold and not args.no_reflection_fold
    print(canonical_code(resolve_diagram(args.diagram), fold))
    return 0


def cmd_export_dot(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    text = export_dot(resolve_diagram(args.diagram), args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_regions(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    d = resolve_diagram(args.diagram)
    regions = find_two_regions(d)
    for region in regions:
        cycle = " ".join(str(v) for v in region.boundary_cycle)
        inside = " ".join(str(v) for v in sorted(region.interior_vertices)) or "-"
        print(f"region bases {region.base_vertices}: cycle [{cycle}] interior [{inside}]")
    if regions:
        chosen = _pipeline(args, config, logger).choose_region(d)
        print(f"minimal: [{' '.join(str(v) for v in sorted(chosen.vertices))}]")
    print(f"ots-triangles: {len(find_ots_triangles(d))}")
    return 0


def cmd_fixtures(args: argparse.Namespace, config: ToolkitConfig, logger: logging.Logger) -> int:
    for name in fixture_names():
        fixture = load_fixture(name)
        print(f"{name:14s} n={fixture.diagram.n:<3d} {fixture.notes}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkshadows", description="T/OTS tools for alternating link shadows")
    parser.add_argument("--config", help="Configuration file path (default: ./linkshadows.json if present)")
    parser.add_argument("--log-level", help="Logging level (default: from config, else INFO)")

    subparsers = parser.add_subparsers(dest="command", required=True, help="Commands")

    def add(name: str, func: Handler, help_text: str, diagram: bool = True) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        if diagram:
            sub.add_argument("diagram", help="Diagram file or fixture name")
        sub.set_defaults(func=func)
        return sub

    add("validate", cmd_validate, "Check a diagram's structural flags")
    add("components", cmd_components, "Count link components and classify crossings")
    add("groups", cmd_groups, "List maximal groups with parity, kind and sign")

    sub = add("condense", cmd_condense, "Collapse 2-groups round by round")
    sub.add_argument("--out", help="Write the condensation to this file")
    sub.add_argument("--no-reflection-fold", action="store_true", help="Distinguish mirror images")

    sub = add("apply", cmd_apply, "Apply a single T or OTS")
    sub.add_argument("op", choices=["T", "OTS"], help="Operation")
    sub.add_argument("operand", type=int, nargs="+", help="T: group start length; OTS: three crossings")
    sub.add_argument("--out", help="Write the result to this file instead of stdout")
    sub.add_argument("--no-reflection-fold", action="store_true", help="Distinguish mirror images")

    sub = add("reduce", cmd_reduce, "Reduce a shadow to the torus shadow")
    sub.add_argument("--trace", help="Write the move trace (JSON lines) here")
    sub.add_argument("--depth-cap", type=int, help="Depth cap of the region emptying search")

    sub = add("verify", cmd_verify, "Replay and check a trace")
    sub.add_argument("trace", help="Trace file written by 'reduce --trace'")

    sub = add("orbit", cmd_orbit, "Enumerate the orbit of the torus shadow", diagram=False)
    sub.add_argument("n", type=int, help="Crossing count")
    sub.add_argument("--oracle", action="store_true", help="Compare against exhaustive generation")
    sub.add_argument("--depth-cap", type=int, help="Breadth-first levels to expand")
    sub.add_argument("--out", help="Directory for orbit-<n>.codes and orbit-<n>.witness.jsonl")
    sub.add_argument("--no-reflection-fold", action="store_true", help="Distinguish mirror images")

    sub = add("canon", cmd_canon, "Print the canonical code")
    sub.add_argument("--no-reflection-fold", action="store_true", help="Distinguish mirror images")

    sub = add("export-dot", cmd_export_dot, "Export a diagram as DOT")
    sub.add_argument("out", nargs="?", help="Output file (default: stdout)")

    add("regions", cmd_regions, "List 2-regions and the chosen minimal one")

    add("fixtures", cmd_fixtures, "List shipped fixtures", diagram=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "apply" and len(args.operand) != 3:
        what = "a group index, a start and a length" if args.op == "T" else "three crossings"
        parser.error(f"apply {args.op} takes {what}, got {len(args.operand)} operand(s)")

    # Setup logging first so we can log errors during config loading
    logging.basicConfig(
        level=getattr(logging, (args.log_level or "INFO").upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logger = logging.getLogger(__name__)

    try:
        config = load_config(args.config, logger)
    except (OSError, LinkShadowError) as e:
        logger.error(f"Failed to load configuration: {e}")
        return 1
    if args.log_level is None:
        logging.getLogger().setLevel(getattr(logging, config.log_level.upper(), logging.INFO))

    try:
        return int(args.func(args, config, logger))
    except (LinkShadowError, OSError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        return 1


if __name__ == "__main__":
    sys.exit(main())
