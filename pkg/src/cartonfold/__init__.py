"""Fold-sequence planning for hinged rigid-panel cartons.

Model a flat carton as a kinematic tree of panels, enumerate every
collision-free folding order with a backtracking search, and rank the
results by how friendly they are to simple folding hardware.
"""

from .geometry import Aabb, OrientedBox, Transform, obb_intersect, rotate_about_axis, world_aabb
from .model import (
    CartonSpec,
    GripperSpec,
    JointVector,
    KinematicTree,
    PanelPose,
    PanelSpec,
    SpecValidationError,
    build_tree,
    forward_kinematics,
    load_spec,
    parse_spec,
    serialize_spec,
)
from .collision import (
    GraspSide,
    ObstacleSet,
    SweepParams,
    collision_check,
    grasp_side,
    sweep_angles,
)
from .planner import (
    FoldSequence,
    FoldState,
    PlannerError,
    action_space,
    enumerate_sequences,
    feasible_subsets,
    transition,
)
from .metrics import (
    RankedReport,
    RankingPolicy,
    SequenceScore,
    StepMetrics,
    bounding_volume,
    is_aerial,
    max_dimension,
    score_and_rank,
    score_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "CartonSpec",
    "FoldSequence",
    "FoldState",
    "GraspSide",
    "GripperSpec",
    "JointVector",
    "KinematicTree",
    "ObstacleSet",
    "OrientedBox",
    "PanelPose",
    "PanelSpec",
    "PlannerError",
    "RankedReport",
    "RankingPolicy",
    "SequenceScore",
    "SpecValidationError",
    "StepMetrics",
    "SweepParams",
    "Transform",
    "action_space",
    "bounding_volume",
    "build_tree",
    "collision_check",
    "enumerate_sequences",
    "feasible_subsets",
    "forward_kinematics",
    "grasp_side",
    "is_aerial",
    "load_spec",
    "max_dimension",
    "obb_intersect",
    "parse_spec",
    "rotate_about_axis",
    "score_and_rank",
    "score_sequence",
    "serialize_spec",
    "sweep_angles",
    "transition",
    "world_aabb",
]
