"""
Enumerating and ranking folding sequences
=========================================

Backtracking depth-first search over fold actions finds every ordering of
the foldable joints whose steps are all collision free. The sequences are
then ranked lexicographically: fewest aerial folds first, cumulative
bounding-box measures as tie breakers.
"""

import io
import sys
from pathlib import Path

from cartonfold import (
    ObstacleSet,
    RankingPolicy,
    SweepParams,
    enumerate_sequences,
    feasible_subsets,
    score_and_rank,
)
from cartonfold.model import build_tree, load_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"

# Three independent flaps: nothing can collide, so all 3! orderings appear.
spec = load_spec(SPECS / "three_flaps.yaml")
tree = build_tree(spec)
params, obstacles = SweepParams.from_spec(spec), ObstacleSet.from_spec(spec)

diag = io.StringIO()
sequences = enumerate_sequences(tree, params, obstacles, diagnostics=diag)
print("three_flaps orderings:", [s.order for s in sequences])
print("search diagnostics:")
print("  " + "\n  ".join(diag.getvalue().splitlines()))

# The blocking pair: the cover's overhang bars the drop leaf's arc, so only
# the leaf-first ordering survives.
spec = load_spec(SPECS / "blocking_pair.yaml")
tree = build_tree(spec)
params, obstacles = SweepParams.from_spec(spec), ObstacleSet.from_spec(spec)
print("\nblocking_pair orderings:",
      [s.order for s in enumerate_sequences(tree, params, obstacles)])

# The full feasibility table behind the memoized search: one verdict per
# (folded subset, next joint) pair.
table = feasible_subsets(tree, params, obstacles)
for subset in sorted(table, key=lambda s: (len(s), sorted(s))):
    shown = "{" + ", ".join(map(str, sorted(subset))) + "}"
    print(f"  folded {shown:<8} -> {table[subset]}")

# Ranking: score each sequence over its intermediate states and sort.
spec = load_spec(SPECS / "three_flaps.yaml")
tree = build_tree(spec)
sequences = enumerate_sequences(
    tree, SweepParams.from_spec(spec), ObstacleSet.from_spec(spec)
)
report = score_and_rank(tree, sequences, RankingPolicy(("aerial", "maxdim")))
print("\nranked three_flaps sequences:")
print(f"{'sequence':<14} {'volume_mm3':>12} {'maxdim_mm':>10} {'naf':>4}")
for row in report.rows:
    print(f"{str(list(row.sequence.order)):<14} {row.c_vol:>12.1f} "
          f"{row.c_dim:>10.1f} {row.c_aerial:>4}")
