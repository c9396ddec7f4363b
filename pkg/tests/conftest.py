from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from cartonfold.collision import ObstacleSet, SweepParams
from cartonfold.model import CartonSpec, PanelSpec, build_tree, load_spec
from cartonfold.planner import enumerate_sequences

SPEC_DIR = Path(__file__).resolve().parent.parent / "specs"

SHIPPED_SPECS = (
    "three_flaps.yaml",
    "blocking_pair.yaml",
    "obstructed_flap.yaml",
    "case_study_tray.yaml",
)


@pytest.fixture(scope="session")
def spec_dir() -> Path:
    return SPEC_DIR


@pytest.fixture(scope="session")
def case_study():
    spec = load_spec(SPEC_DIR / "case_study_tray.yaml")
    return spec, build_tree(spec)


@pytest.fixture(scope="session")
def case_study_sequences(case_study):
    spec, tree = case_study
    return enumerate_sequences(
        tree, SweepParams.from_spec(spec), ObstacleSet.from_spec(spec), mode="memoized"
    )


@pytest.fixture(scope="session")
def blocking_pair():
    spec = load_spec(SPEC_DIR / "blocking_pair.yaml")
    return spec, build_tree(spec)


@pytest.fixture(scope="session")
def three_flaps():
    spec = load_spec(SPEC_DIR / "three_flaps.yaml")
    return spec, build_tree(spec)


def free_flap_spec(k: int, flap_height: float = 50.0) -> CartonSpec:
    """Base with k flaps so far apart that no ordering can ever collide.

    Flaps sit on the edges of a huge square base with generous insets;
    every one of the k! orderings is collision free by construction.
    """
    side = 600.0
    t = 2.0
    edges = [
        # (anchor, crease_dir) per base edge, flap extending outward
        ((10.0, side, 0.0), (1.0, 0.0, 0.0)),     # north
        ((side - 10.0, 0.0, 0.0), (-1.0, 0.0, 0.0)),  # south
        ((0.0, 10.0, 0.0), (0.0, 1.0, 0.0)),      # west
        ((side, side - 10.0, 0.0), (0.0, -1.0, 0.0)),  # east
    ]
    if not 1 <= k <= len(edges):
        raise ValueError(f"k must be between 1 and {len(edges)}")
    panels = [PanelSpec(id=1, parent=None, dims=(side, side, t))]
    for i in range(k):
        anchor, direction = edges[i]
        panels.append(
            PanelSpec(
                id=i + 2,
                parent=1,
                dims=(flap_height, side - 20.0, t),
                crease_anchor=anchor,
                crease_dir=direction,
                theta_init=0.0,
                theta_final=np.pi / 2.0,
            )
        )
    from cartonfold.geometry import Transform

    return CartonSpec(
        panels=tuple(panels),
        root_pose=Transform(np.eye(3), (0.0, 0.0, t / 2.0)),
        table_plane=True,
        penetration_tolerance=1.05,
    )
