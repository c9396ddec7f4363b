"""Hardware-compatibility scoring and lexicographic ranking of sequences.

Each sequence of k folds visits states S_0 (nothing folded) through S_k
(everything folded). The three criteria accumulate over the intermediate
states t = 0 .. k-1 only; the final state is deliberately excluded from
every sum, matching the summation bounds of the cost definitions:

* volume: product of the world-aligned bounding-box extents at S_t,
* max dimension: largest of those extents at S_t,
* aerial: 1 when the fold leaving S_t starts off the workbench.

A fold is aerial when the lowest corner of its moving subtree sits more
than the support tolerance above the table at the start of the motion.
Lower is better for all criteria.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .geometry import Aabb, world_aabb
from .model import KinematicTree, forward_kinematics
from .planner import FoldSequence, FoldState, action_space

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT_TOLERANCE = 1.0

_CRITERIA = ("aerial", "maxdim", "volume")


@dataclass(frozen=True)
class RankingPolicy:
    """Ordered list of criteria, applied lexicographically, all ascending."""

    criteria: tuple[str, ...] = ("aerial", "maxdim")

    def __post_init__(self):
        if not self.criteria:
            raise ValueError("ranking policy needs at least one criterion")
        if len(set(self.criteria)) != len(self.criteria):
            raise ValueError("ranking criteria must not repeat")
        for crit in self.criteria:
            if crit not in _CRITERIA:
                raise ValueError(f"unknown criterion {crit!r}, expected one of {_CRITERIA}")


class StateMetricsCache:
    """Bounding boxes and per-panel support heights, memoized per fold state.

    Many sequences revisit the same folded subsets; the cache keeps scoring
    linear in the number of distinct states instead of total steps.
    """

    def __init__(self, tree: KinematicTree):
        self.tree = tree
        self._states: dict[frozenset, tuple[Aabb, dict[int, float]]] = {}

    def state(self, folded: frozenset) -> tuple[Aabb, dict[int, float]]:
        entry = self._states.get(folded)
        if entry is None:
            poses = forward_kinematics(
                self.tree, FoldState(folded).joint_vector(self.tree)
            )
            box = world_aabb([p.solid for p in poses])
            min_z = {p.panel_id: float(p.solid.corners()[:, 2].min()) for p in poses}
            entry = (box, min_z)
            self._states[folded] = entry
        return entry


def state_aabb(tree: KinematicTree, state: FoldState) -> Aabb:
    """World-aligned bounding box of every panel solid at the state's angles."""
    poses = forward_kinematics(tree, state.joint_vector(tree))
    return world_aabb([p.solid for p in poses])


def bounding_volume(tree: KinematicTree, state: FoldState) -> float:
    """V(S): product of the three bounding-box extents, mm^3."""
    return state_aabb(tree, state).volume


def max_dimension(tree: KinematicTree, state: FoldState) -> float:
    """MaxDim(S): largest bounding-box extent, mm."""
    return state_aabb(tree, state).max_extent


def is_aerial(
    tree: KinematicTree,
    state_before: FoldState,
    joint: int,
    support_tolerance: float = DEFAULT_SUPPORT_TOLERANCE,
) -> bool:
    """Whether folding ``joint`` starts without workbench support.

    Tests the moving subtree at the fold's start pose: if its lowest panel
    corner is more than ``support_tolerance`` above z = 0, nothing rests on
    the table and the fold is aerial.
    """
    if joint not in action_space(tree, state_before):
        raise ValueError(f"joint {joint} is not available in this state")
    poses = forward_kinematics(tree, state_before.joint_vector(tree))
    by_id = {p.panel_id: p for p in poses}
    min_z = min(
        by_id[pid].solid.corners()[:, 2].min() for pid in tree.subtree_ids(joint)
    )
    return bool(min_z > support_tolerance)


@dataclass(frozen=True)
class StepMetrics:
    """Per-state measurements taken just before one fold executes."""

    joint: int
    volume: float
    max_dim: float
    aerial: bool


@dataclass(frozen=True)
class SequenceScore:
    """A sequence with its per-step breakdown and accumulated criteria."""

    sequence: FoldSequence
    per_step: tuple[StepMetrics, ...]

    @property
    def c_vol(self) -> float:
        return sum(step.volume for step in self.per_step)

    @property
    def c_dim(self) -> float:
        return sum(step.max_dim for step in self.per_step)

    @property
    def c_aerial(self) -> int:
        return sum(1 for step in self.per_step if step.aerial)

    def key(self, policy: RankingPolicy):
        values = {"aerial": self.c_aerial, "maxdim": self.c_dim, "volume": self.c_vol}
        return tuple(values[c] for c in policy.criteria) + (self.sequence.order,)


def score_sequence(
    tree: KinematicTree,
    sequence: FoldSequence,
    support_tolerance: float = DEFAULT_SUPPORT_TOLERANCE,
    cache: StateMetricsCache | None = None,
) -> SequenceScore:
    """Measure every intermediate state S_0 .. S_{k-1} of one sequence."""
    if cache is None:
        cache = StateMetricsCache(tree)
    steps = []
    for state, joint in sequence.prefixes():
        box, min_z = cache.state(state.folded)
        subtree_min = min(min_z[pid] for pid in tree.subtree_ids(joint))
        steps.append(
            StepMetrics(
                joint=joint,
                volume=box.volume,
                max_dim=box.max_extent,
                aerial=bool(subtree_min > support_tolerance),
            )
        )
    return SequenceScore(sequence=sequence, per_step=tuple(steps))


@dataclass(frozen=True)
class RankedReport:
    """Sequences sorted ascending-lexicographically under a policy."""

    policy: RankingPolicy
    rows: tuple[SequenceScore, ...]

    def __len__(self) -> int:
        return len(self.rows)


def score_and_rank(
    tree: KinematicTree,
    sequences,
    policy: RankingPolicy = RankingPolicy(),
    support_tolerance: float = DEFAULT_SUPPORT_TOLERANCE,
) -> RankedReport:
    """Score all sequences and sort them under the policy.

    Ties after all criteria fall back to the sequence order tuple itself, so
    the report is a total order independent of input ordering. An empty
    input produces an empty report.
    """
    cache = StateMetricsCache(tree)
    scores = [score_sequence(tree, seq, support_tolerance, cache) for seq in sequences]
    if not scores:
        logger.warning("score_and_rank called with no sequences; report is empty")
    scores.sort(key=lambda s: s.key(policy))
    return RankedReport(policy=policy, rows=tuple(scores))
