"""Exhaustive enumeration of collision-free folding sequences.

The search walks the decision tree of fold actions depth first, expanding
joints in ascending id order and backtracking whenever the swept collision
check rejects an action. A state is fully determined by the set of already
folded joints (every action drives its joint all the way to the final
angle), which licenses the memoized mode: each distinct (subset, joint)
collision check runs at most once, and the enumerated sequence set is
exactly the naive one.

Everything here is a pure function of immutable inputs; memo entries are
idempotent, so recomputation (or a racing writer) can never change a
result, and output order is canonical regardless of evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .collision import (
    ObstacleSet,
    StateGeometryCache,
    SweepParams,
    collision_check,
    n_sweep_samples,
)
from .model import JointVector, KinematicTree

DEFAULT_SUBSET_CAP = 20


class PlannerError(ValueError):
    """The planning problem itself is malformed (e.g. nothing to fold)."""


@dataclass(frozen=True)
class FoldState:
    """Carton state: the set of completed folds (joint angles follow from it)."""

    folded: frozenset[int]

    @classmethod
    def initial(cls) -> "FoldState":
        return cls(frozenset())

    def joint_vector(self, tree: KinematicTree) -> JointVector:
        return JointVector.from_folded(tree, self.folded)

    def is_final(self, tree: KinematicTree) -> bool:
        return self.folded == frozenset(tree.foldable_ids)


@dataclass(frozen=True)
class FoldSequence:
    """A complete ordering of all foldable joints, with sweep evidence.

    ``cc_samples[t]`` is the number of swept samples the collision check
    evaluated when step ``t`` was validated.
    """

    order: tuple[int, ...]
    cc_samples: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.order)

    def prefixes(self):
        """FoldState before each step: S_0, S_1, ..., S_{k-1}."""
        done: set[int] = set()
        for joint in self.order:
            yield FoldState(frozenset(done)), joint
            done.add(joint)


def action_space(tree: KinematicTree, state: FoldState) -> list[int]:
    """Unfolded foldable joints, ascending; empty exactly at the final state."""
    return [j for j in sorted(tree.foldable_ids) if j not in state.folded]


def transition(tree: KinematicTree, state: FoldState, joint: int) -> FoldState:
    """Fold one joint to its final angle; all other joints keep their state."""
    if joint not in tree.foldable_ids:
        raise ValueError(f"joint {joint} is not a foldable joint")
    if joint in state.folded:
        raise ValueError(f"joint {joint} is already folded")
    return FoldState(state.folded | {joint})


@dataclass
class SearchDiagnostics:
    """Counters for one enumeration run, serializable as key=value lines."""

    mode: str = ""
    nodes_expanded: int = 0
    cc_calls: int = 0
    cc_cache_hits: int = 0
    pruned: int = 0
    dead_ends: int = 0
    sequences: int = 0

    def lines(self) -> list[str]:
        return [
            f"mode={self.mode}",
            f"nodes_expanded={self.nodes_expanded}",
            f"cc_calls={self.cc_calls}",
            f"cc_cache_hits={self.cc_cache_hits}",
            f"pruned={self.pruned}",
            f"dead_ends={self.dead_ends}",
            f"sequences={self.sequences}",
        ]


def enumerate_sequences(
    tree: KinematicTree,
    params: SweepParams,
    obstacles: ObstacleSet,
    mode: str = "memoized",
    subset_cap: int = DEFAULT_SUBSET_CAP,
    diagnostics=None,
) -> list[FoldSequence]:
    """All orderings of the foldable joints whose every step is collision free.

    Depth-first backtracking over fold actions, children in ascending joint
    id order, so the output order is deterministic. ``mode`` selects whether
    collision verdicts are recomputed per tree edge (``naive``) or shared
    across edges that reach the same folded subset (``memoized``); both
    modes return identical sequence lists. ``diagnostics``, when given, is a
    text stream receiving one key=value line per counter.
    """
    if mode not in ("naive", "memoized"):
        raise ValueError(f"mode must be 'naive' or 'memoized', got {mode!r}")
    foldable = sorted(tree.foldable_ids)
    if not foldable:
        raise PlannerError("carton has no foldable joints, nothing to enumerate")
    if mode == "memoized" and len(foldable) > subset_cap:
        warnings.warn(
            f"{len(foldable)} foldable joints exceed the subset cap {subset_cap}; "
            "falling back to naive mode",
            stacklevel=2,
        )
        mode = "naive"

    diag = SearchDiagnostics(mode=mode)
    geometry = StateGeometryCache(tree)
    memo: dict[tuple[frozenset, int], bool] = {}
    sample_counts = {j: n_sweep_samples(tree, j, params) for j in foldable}

    def feasible(folded: frozenset, joint: int) -> bool:
        if mode == "memoized":
            key = (folded, joint)
            verdict = memo.get(key)
            if verdict is None:
                verdict = collision_check(tree, folded, joint, params, obstacles, geometry)
                memo[key] = verdict
                diag.cc_calls += 1
            else:
                diag.cc_cache_hits += 1
            return verdict
        diag.cc_calls += 1
        return collision_check(tree, folded, joint, params, obstacles, geometry)

    sequences: list[FoldSequence] = []
    order: list[int] = []

    def dfs(folded: frozenset) -> None:
        diag.nodes_expanded += 1
        if len(order) == len(foldable):
            sequences.append(
                FoldSequence(tuple(order), tuple(sample_counts[j] for j in order))
            )
            diag.sequences += 1
            return
        advanced = False
        for joint in foldable:
            if joint in folded:
                continue
            if feasible(folded, joint):
                advanced = True
                order.append(joint)
                dfs(folded | {joint})
                order.pop()
            else:
                diag.pruned += 1
        if not advanced:
            diag.dead_ends += 1

    dfs(frozenset())

    if diagnostics is not None:
        for line in diag.lines():
            diagnostics.write(line + "\n")
    return sequences


def feasible_subsets(
    tree: KinematicTree,
    params: SweepParams,
    obstacles: ObstacleSet,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> dict[frozenset[int], dict[int, bool]]:
    """Full fold-feasibility table over every subset of the foldable joints.

    Entry ``table[F][j]`` is the collision_check verdict for folding joint
    ``j`` out of state ``F``. The table has 2^k rows, hence the cap.
    """
    foldable = sorted(tree.foldable_ids)
    if not foldable:
        raise PlannerError("carton has no foldable joints")
    if len(foldable) > subset_cap:
        raise PlannerError(
            f"{len(foldable)} foldable joints exceed the subset cap {subset_cap}"
        )
    geometry = StateGeometryCache(tree)
    table: dict[frozenset[int], dict[int, bool]] = {}
    for mask in range(1 << len(foldable)):
        subset = frozenset(j for bit, j in enumerate(foldable) if mask >> bit & 1)
        table[subset] = {
            j: collision_check(tree, subset, j, params, obstacles, geometry)
            for j in foldable
            if j not in subset
        }
    return table
