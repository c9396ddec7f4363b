"""Command-line driver: spec file in, ranked folding report out.

Exit codes: 0 success with at least one sequence, 2 valid input but no
feasible sequence (or an --explain sequence that fails), 3 spec validation
failure, 4 subset cap exceeded with the naive fallback declined.

Set CARTONFOLD_LOG=debug|info|warning to control log verbosity.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .collision import (
    ObstacleSet,
    SweepParams,
    collision_check,
    grasp_side,
    n_sweep_samples,
)
from .metrics import (
    RankedReport,
    RankingPolicy,
    SequenceScore,
    StateMetricsCache,
    score_and_rank,
)
from .model import (
    JointVector,
    KinematicTree,
    SpecValidationError,
    build_tree,
    forward_kinematics,
    load_spec,
)
from .planner import DEFAULT_SUBSET_CAP, enumerate_sequences

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_SEQUENCES = 2
EXIT_SPEC_INVALID = 3
EXIT_LIMIT = 4


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs."""

    spec_path: str
    fmt: str = "table"
    top: int | None = 20  # None means all
    mode: str = "memoized"
    tolerance_angle_deg: float | None = None
    penetration_mm: float | None = None
    support_mm: float | None = None
    dump_dir: str | None = None
    explain: tuple[int, ...] | None = None
    subset_cap: int = DEFAULT_SUBSET_CAP
    no_naive_fallback: bool = False


def _f6(value: float) -> float:
    """Round through fixed 6-decimal text so emitted numbers are reproducible."""
    return float(f"{value:.6f}")


def _apply_overrides(spec, config: RunConfig):
    if config.tolerance_angle_deg is not None:
        spec = replace(spec, tolerance_angle=math.radians(config.tolerance_angle_deg))
    if config.penetration_mm is not None:
        spec = replace(spec, penetration_tolerance=config.penetration_mm)
    if config.support_mm is not None:
        spec = replace(spec, support_tolerance=config.support_mm)
    spec.validate()
    return spec


def format_table(report: RankedReport, top: int | None) -> str:
    rows = report.rows if top is None else report.rows[:top]
    lines = [
        f"policy: {' > '.join(report.policy.criteria)}   "
        f"(showing {len(rows)} of {len(report.rows)} sequences)",
        f"{'rank':>4}  {'sequence':<28} {'volume_mm3':>16} {'maxdim_mm':>12} {'naf':>4}",
    ]
    for rank, row in enumerate(rows, start=1):
        seq = "[" + ", ".join(str(j) for j in row.sequence.order) + "]"
        lines.append(
            f"{rank:>4}  {seq:<28} {row.c_vol:>16.1f} {row.c_dim:>12.1f} {row.c_aerial:>4}"
        )
    return "\n".join(lines) + "\n"


def format_csv(report: RankedReport, top: int | None) -> str:
    rows = report.rows if top is None else report.rows[:top]
    lines = ["sequence,volume_mm3,maxdim_mm,naf"]
    for row in rows:
        seq = "-".join(str(j) for j in row.sequence.order)
        lines.append(f"{seq},{row.c_vol:.6f},{row.c_dim:.6f},{row.c_aerial}")
    return "\n".join(lines) + "\n"


def _row_payload(row: SequenceScore) -> dict:
    return {
        "sequence": list(row.sequence.order),
        "volume_mm3": _f6(row.c_vol),
        "maxdim_mm": _f6(row.c_dim),
        "naf": row.c_aerial,
        "per_step": [
            {
                "joint": step.joint,
                "volume_mm3": _f6(step.volume),
                "maxdim_mm": _f6(step.max_dim),
                "aerial": step.aerial,
            }
            for step in row.per_step
        ],
    }


def format_structured(report: RankedReport, top: int | None, mode: str) -> str:
    rows = report.rows if top is None else report.rows[:top]
    payload = {
        "policy": list(report.policy.criteria),
        "mode": mode,
        "sequence_count": len(report.rows),
        "rows": [_row_payload(row) for row in rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def _state_record(tree: KinematicTree, folded: frozenset, joint: int | None, aerial):
    # Full float precision here: renderers and the replay invariant need the
    # dumped angles and poses to agree to machine accuracy.
    theta = JointVector.from_folded(tree, folded)
    poses = forward_kinematics(tree, theta)
    from .geometry import world_aabb

    box = world_aabb([p.solid for p in poses])
    return {
        "joint": joint,
        "aerial": aerial,
        "theta_rad": {str(pid): theta.angle(pid) for pid in tree.ids},
        "panels": [
            {
                "id": p.panel_id,
                "rotation": [list(map(float, row)) for row in p.pose.rotation],
                "translation": [float(v) for v in p.pose.translation],
                "center": [float(v) for v in p.center],
                "half_extents": [float(v) for v in p.solid.half_extents],
            }
            for p in poses
        ],
        "aabb": {
            "min": [float(v) for v in box.min],
            "max": [float(v) for v in box.max],
        },
    }


def dump_states(tree: KinematicTree, rows, directory: str) -> None:
    """One JSON file per reported sequence with a record for every state.

    Records 0 .. k-1 carry the state before each fold plus that fold's joint
    and aerial flag; a final record holds the fully folded pose. Feeding any
    record's theta back through forward kinematics reproduces its poses.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for rank, row in enumerate(rows, start=1):
        steps = []
        for t, ((state, joint), metrics) in enumerate(
            zip(row.sequence.prefixes(), row.per_step)
        ):
            record = _state_record(tree, state.folded, joint, metrics.aerial)
            record["t"] = t
            steps.append(record)
        final = _state_record(tree, frozenset(row.sequence.order), None, None)
        final["t"] = len(row.sequence.order)
        steps.append(final)
        payload = {"sequence": list(row.sequence.order), "steps": steps}
        path = out / f"sequence_{rank:04d}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def explain(config: RunConfig, sequence=None, out=None) -> int:
    """Replay one sequence step by step and print a trace.

    ``sequence`` defaults to the one carried in the config.
    """
    out = out or sys.stdout
    try:
        spec = _apply_overrides(load_spec(config.spec_path), config)
    except (SpecValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC_INVALID
    tree = build_tree(spec)
    params = SweepParams.from_spec(spec)
    obstacles = ObstacleSet.from_spec(spec)
    sequence = tuple(sequence) if sequence is not None else (config.explain or ())

    if sorted(sequence) != sorted(tree.foldable_ids):
        print(
            "error: sequence must order all foldable joints "
            f"{sorted(tree.foldable_ids)}, got {list(sequence)}",
            file=sys.stderr,
        )
        return EXIT_NO_SEQUENCES

    cache = StateMetricsCache(tree)
    folded: frozenset = frozenset()
    for step, joint in enumerate(sequence, start=1):
        if not collision_check(tree, folded, joint, params, obstacles):
            print(
                f"sequence invalid: step {step} (fold joint {joint}) collides",
                file=out,
            )
            return EXIT_NO_SEQUENCES
        box, min_z = cache.state(folded)
        subtree_min = min(min_z[pid] for pid in tree.subtree_ids(joint))
        aerial = subtree_min > spec.support_tolerance
        if spec.gripper is not None:
            side = grasp_side(tree, folded, joint, spec.gripper, params, obstacles).value
        else:
            side = "n/a"
        print(
            f"step {step}: fold joint {joint} | cc_samples={n_sweep_samples(tree, joint, params)} "
            f"| aerial={'yes' if aerial else 'no'} | volume={box.volume:.1f} mm^3 "
            f"| maxdim={box.max_extent:.1f} mm | grasp={side}",
            file=out,
        )
        folded = folded | {joint}
    print(f"sequence valid: {len(sequence)} steps", file=out)
    return EXIT_OK


def run(config: RunConfig, out=None) -> int:
    """Enumerate, rank and report; returns the process exit code."""
    out = out or sys.stdout
    try:
        spec = _apply_overrides(load_spec(config.spec_path), config)
        tree = build_tree(spec)
    except (SpecValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC_INVALID

    if config.explain is not None:
        return explain(config, out=out)

    params = SweepParams.from_spec(spec)
    obstacles = ObstacleSet.from_spec(spec)

    k = len(tree.foldable_ids)
    if config.mode == "memoized" and k > config.subset_cap and config.no_naive_fallback:
        print(
            f"error: {k} foldable joints exceed the subset cap {config.subset_cap} "
            "and the naive fallback was declined",
            file=sys.stderr,
        )
        return EXIT_LIMIT

    diag_stream = io.StringIO()
    sequences = enumerate_sequences(
        tree,
        params,
        obstacles,
        mode=config.mode,
        subset_cap=config.subset_cap,
        diagnostics=diag_stream,
    )
    for line in diag_stream.getvalue().splitlines():
        logger.info("planner %s", line)

    report = score_and_rank(
        tree,
        sequences,
        RankingPolicy(tuple(spec.ranking)),
        spec.support_tolerance,
    )

    if config.fmt == "table":
        out.write(format_table(report, config.top))
    elif config.fmt == "csv":
        out.write(format_csv(report, config.top))
    else:
        out.write(format_structured(report, config.top, config.mode))

    if config.dump_dir is not None:
        rows = report.rows if config.top is None else report.rows[: config.top]
        dump_states(tree, rows, config.dump_dir)

    if not report.rows:
        logger.warning("no feasible folding sequence found")
        return EXIT_NO_SEQUENCES
    return EXIT_OK


def _parse_top(text: str) -> int | None:
    if text == "all":
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("--top must be a positive integer or 'all'")
    return value


def _parse_sequence(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sequence {text!r}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cartonfold",
        description="Enumerate and rank collision-free folding sequences for a carton spec.",
    )
    parser.add_argument("--spec", required=True, help="path to the carton-spec YAML file")
    parser.add_argument(
        "--format", choices=("table", "csv", "structured"), default="table",
        help="report format (structured = JSON)",
    )
    parser.add_argument(
        "--top", type=_parse_top, default=20, metavar="N|all",
        help="how many ranked sequences to report (default 20)",
    )
    parser.add_argument("--mode", choices=("naive", "memoized"), default="memoized")
    parser.add_argument("--tolerance-angle-deg", type=float, default=None,
                        help="override the sweep sampling granularity")
    parser.add_argument("--penetration-mm", type=float, default=None,
                        help="override the crease-contact penetration tolerance")
    parser.add_argument("--support-mm", type=float, default=None,
                        help="override the aerial-fold support tolerance")
    parser.add_argument("--dump-states", metavar="DIR", default=None,
                        help="write per-step pose dumps for the reported sequences")
    parser.add_argument("--explain", type=_parse_sequence, default=None, metavar="I,J,K",
                        help="trace one sequence step by step instead of enumerating")
    parser.add_argument("--subset-cap", type=int, default=DEFAULT_SUBSET_CAP,
                        help="joint count above which the memo table is not built")
    parser.add_argument("--no-naive-fallback", action="store_true",
                        help="fail (exit 4) instead of falling back to naive mode")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("CARTONFOLD_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    config = RunConfig(
        spec_path=args.spec,
        fmt=args.format,
        top=args.top,
        mode=args.mode,
        tolerance_angle_deg=args.tolerance_angle_deg,
        penetration_mm=args.penetration_mm,
        support_mm=args.support_mm,
        dump_dir=args.dump_states,
        explain=args.explain,
        subset_cap=args.subset_cap,
        no_naive_fallback=args.no_naive_fallback,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
