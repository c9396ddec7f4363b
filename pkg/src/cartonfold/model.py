"""Carton description, validation, kinematic tree and forward kinematics.

A carton is a tree of hinged rectangular panels. Each non-root panel is
attached to its parent by a crease: a revolute axis fixed in the parent's
local frame. The panel local frame convention is:

* origin at the crease anchor,
* local X along the crease direction,
* local Y from the crease into the panel,
* local Z the panel normal,
* the slab occupies ``[0, w] x [0, h] x [-t/2, +t/2]``,
* positive joint angle rotates +Y toward +Z (right-hand rule about +X).

At angle zero a child panel is coplanar with its parent (child Z equals
the parent normal projected orthogonal to the crease).

Carton-spec file format (YAML, degrees and millimeters at the boundary):

.. code-block:: yaml

    panels:
      - {id: 1, parent: 2, dims_mm: [h, w, t],
         crease_anchor_mm: [x, y, z], crease_dir: [x, y, z],
         theta_init_deg: 0, theta_final_deg: 90}
      - {id: 2, parent: null, dims_mm: [h, w, t]}   # exactly one root
    root_pose: {translation_mm: [x, y, z], rpy_deg: [roll, pitch, yaw]}
    environment:                  # static obstacles, world frame
      - {name: table, half_space: true}             # z = 0 table half-space
      - {name: post, center_mm: [x, y, z], dims_mm: [dx, dy, dz],
         rpy_deg: [r, p, y]}
    gripper: {dims_mm: [x, y, z], standoff_mm: 5}   # optional
    planner: {tolerance_angle_deg: 5, penetration_tolerance_mm: 0.1,
              support_tolerance_mm: 1.0}
    ranking: [aerial, maxdim]

Panels may carry an optional ``name`` and an optional explicit ``foldable``
flag; a panel whose initial and final angles coincide is static.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .geometry import OrientedBox, Transform, rotation_matrix

ANGLE_SLACK = 1e-9

DEFAULT_TOLERANCE_ANGLE_DEG = 5.0
DEFAULT_PENETRATION_TOLERANCE_MM = 0.1
DEFAULT_SUPPORT_TOLERANCE_MM = 1.0
DEFAULT_RANKING = ("aerial", "maxdim")

RANKING_CRITERIA = ("aerial", "maxdim", "volume")


class SpecValidationError(ValueError):
    """A carton description violates the format or a structural invariant."""


def _unit(vec, what: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.shape != (3,):
        raise SpecValidationError(f"{what} must be a 3-vector")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > 1e-6:
        raise SpecValidationError(f"{what} must be a unit vector, |v| = {norm:.9f}")
    return arr / norm


@dataclass(frozen=True)
class PanelSpec:
    """One rigid panel and the crease attaching it to its parent."""

    id: int
    parent: int | None
    dims: tuple[float, float, float]  # (height, width, thickness)
    crease_anchor: tuple[float, float, float] | None = None
    crease_dir: tuple[float, float, float] | None = None
    theta_init: float = 0.0
    theta_final: float = 0.0
    name: str = ""
    foldable_flag: bool | None = None

    def __post_init__(self):
        if self.id < 1:
            raise SpecValidationError(f"panel id must be >= 1, got {self.id}")
        h, w, t = self.dims
        if not (h > 0.0 and w > 0.0 and t > 0.0):
            raise SpecValidationError(
                f"panel {self.id}: dims (h, w, t) must be positive, got {self.dims}"
            )
        if self.parent is None:
            if self.theta_init != 0.0 or self.theta_final != 0.0:
                raise SpecValidationError(
                    f"panel {self.id}: the root panel is fixed, its angles must be 0"
                )
        else:
            if self.crease_anchor is None or self.crease_dir is None:
                raise SpecValidationError(
                    f"panel {self.id}: non-root panels need crease_anchor and crease_dir"
                )
            _unit(self.crease_dir, f"panel {self.id} crease_dir")
        if self.foldable_flag is True and self.theta_init == self.theta_final:
            raise SpecValidationError(
                f"panel {self.id}: marked foldable but theta_init == theta_final"
            )

    @property
    def height(self) -> float:
        return self.dims[0]

    @property
    def width(self) -> float:
        return self.dims[1]

    @property
    def thickness(self) -> float:
        return self.dims[2]

    @property
    def foldable(self) -> bool:
        return self.parent is not None and self.theta_init != self.theta_final


@dataclass(frozen=True)
class GripperSpec:
    """Suction-tool footprint used for grasp-side advisories."""

    dims: tuple[float, float, float]
    standoff: float = 0.0

    def __post_init__(self):
        if not all(d > 0.0 for d in self.dims):
            raise SpecValidationError(f"gripper dims must be positive, got {self.dims}")
        if self.standoff < 0.0:
            raise SpecValidationError("gripper standoff must be >= 0")


@dataclass(frozen=True)
class CartonSpec:
    """Validated declarative description of a carton and its workcell."""

    panels: tuple[PanelSpec, ...]
    root_pose: Transform = field(default_factory=Transform.identity)
    environment: tuple[OrientedBox, ...] = ()
    table_plane: bool = True
    gripper: GripperSpec | None = None
    tolerance_angle: float = math.radians(DEFAULT_TOLERANCE_ANGLE_DEG)
    penetration_tolerance: float = DEFAULT_PENETRATION_TOLERANCE_MM
    support_tolerance: float = DEFAULT_SUPPORT_TOLERANCE_MM
    ranking: tuple[str, ...] = DEFAULT_RANKING

    def __post_init__(self):
        object.__setattr__(self, "panels", tuple(sorted(self.panels, key=lambda p: p.id)))
        self.validate()

    def validate(self) -> None:
        if not self.panels:
            raise SpecValidationError("carton must contain at least one panel")
        ids = [p.id for p in self.panels]
        seen: set[int] = set()
        for pid in ids:
            if pid in seen:
                raise SpecValidationError(f"duplicate panel id {pid}")
            seen.add(pid)
        roots = [p for p in self.panels if p.parent is None]
        if len(roots) != 1:
            raise SpecValidationError(
                f"exactly one root panel (parent: null) required, found {len(roots)}"
            )
        by_id = {p.id: p for p in self.panels}
        for panel in self.panels:
            if panel.parent is not None and panel.parent not in by_id:
                raise SpecValidationError(
                    f"panel {panel.id} references unknown parent {panel.parent}"
                )
        # Walk to the root from every panel; revisiting a panel means a cycle.
        for panel in self.panels:
            trail: set[int] = set()
            node = panel
            while node.parent is not None:
                if node.id in trail:
                    raise SpecValidationError(
                        f"cycle in parent links involving panel {node.id}"
                    )
                trail.add(node.id)
                node = by_id[node.parent]
        if self.tolerance_angle <= 0.0:
            raise SpecValidationError("tolerance_angle must be positive")
        if self.penetration_tolerance < 0.0:
            raise SpecValidationError("penetration_tolerance must be >= 0")
        if self.support_tolerance < 0.0:
            raise SpecValidationError("support_tolerance must be >= 0")
        if not self.ranking:
            raise SpecValidationError("ranking must list at least one criterion")
        if len(set(self.ranking)) != len(self.ranking):
            raise SpecValidationError("ranking criteria must not repeat")
        for crit in self.ranking:
            if crit not in RANKING_CRITERIA:
                raise SpecValidationError(
                    f"unknown ranking criterion {crit!r}, expected one of {RANKING_CRITERIA}"
                )

    @property
    def root(self) -> PanelSpec:
        return next(p for p in self.panels if p.parent is None)

    def panel(self, panel_id: int) -> PanelSpec:
        for p in self.panels:
            if p.id == panel_id:
                return p
        raise KeyError(f"no panel with id {panel_id}")


def _mount_rotation(crease_dir: np.ndarray, panel_id: int) -> np.ndarray:
    """Child-frame axes (columns) in the parent frame at joint angle zero."""
    x_axis = crease_dir
    z_axis = np.array([0.0, 0.0, 1.0]) - x_axis[2] * x_axis
    norm = float(np.linalg.norm(z_axis))
    if norm < 1e-9:
        raise SpecValidationError(
            f"panel {panel_id}: crease_dir may not be parallel to the parent normal"
        )
    z_axis = z_axis / norm
    y_axis = np.cross(z_axis, x_axis)
    return np.column_stack([x_axis, y_axis, z_axis])


@dataclass(frozen=True)
class KinematicTree:
    """Carton spec plus derived parent/child structure and connectivity.

    ``connectivity[i, j] == 1`` exactly when panel ``ids[i]`` is a (transitive)
    ancestor of panel ``ids[j]``: folding joint i moves panel j.
    """

    spec: CartonSpec
    ids: tuple[int, ...]
    root_id: int
    children: dict[int, tuple[int, ...]]
    connectivity: np.ndarray
    topo_order: tuple[int, ...]
    foldable_ids: tuple[int, ...]
    panels_by_id: dict[int, PanelSpec]
    mounts: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]
    subtrees: dict[int, tuple[int, ...]]

    def index(self, panel_id: int) -> int:
        return self.ids.index(panel_id)

    def panel(self, panel_id: int) -> PanelSpec:
        return self.panels_by_id[panel_id]

    def subtree_ids(self, panel_id: int) -> tuple[int, ...]:
        """The panel and all its descendants, in topological order."""
        return self.subtrees[panel_id]

    def is_ancestor(self, ancestor_id: int, panel_id: int) -> bool:
        return bool(self.connectivity[self.index(ancestor_id), self.index(panel_id)])


def build_tree(spec: CartonSpec) -> KinematicTree:
    """Derive adjacency, topological order and the connectivity matrix."""
    spec.validate()
    ids = tuple(p.id for p in spec.panels)
    by_id = {p.id: p for p in spec.panels}
    children: dict[int, list[int]] = {pid: [] for pid in ids}
    root_id = spec.root.id
    for panel in spec.panels:
        if panel.parent is not None:
            children[panel.parent].append(panel.id)
    for pid in ids:
        children[pid].sort()

    topo: list[int] = []
    stack = [root_id]
    while stack:
        node = stack.pop(0)
        topo.append(node)
        stack.extend(children[node])
    if len(topo) != len(ids):
        raise SpecValidationError("panel graph is not a single connected tree")

    n = len(ids)
    index = {pid: i for i, pid in enumerate(ids)}
    connectivity = np.zeros((n, n), dtype=np.int8)
    for panel in spec.panels:
        node = panel
        while node.parent is not None:
            connectivity[index[node.parent], index[panel.id]] = 1
            node = by_id[node.parent]
    connectivity.setflags(write=False)

    mounts = {}
    for panel in spec.panels:
        if panel.parent is None:
            continue
        axis = _unit(panel.crease_dir, f"panel {panel.id} crease_dir")
        anchor = np.asarray(panel.crease_anchor, dtype=float)
        mounts[panel.id] = (anchor, axis, _mount_rotation(axis, panel.id))

    topo_rank = {pid: i for i, pid in enumerate(topo)}
    subtrees = {}
    for pid in ids:
        members = [pid]
        stack = list(children[pid])
        while stack:
            node = stack.pop()
            members.append(node)
            stack.extend(children[node])
        subtrees[pid] = tuple(sorted(members, key=topo_rank.__getitem__))

    foldable = tuple(pid for pid in ids if by_id[pid].foldable)
    return KinematicTree(
        spec=spec,
        ids=ids,
        root_id=root_id,
        children={pid: tuple(kids) for pid, kids in children.items()},
        connectivity=connectivity,
        topo_order=tuple(topo),
        foldable_ids=foldable,
        panels_by_id=by_id,
        mounts=mounts,
        subtrees=subtrees,
    )


@dataclass(frozen=True)
class JointVector:
    """Joint angle per panel id; the root entry is fixed at zero."""

    angles: dict[int, float]

    def angle(self, panel_id: int) -> float:
        return self.angles[panel_id]

    @classmethod
    def flat(cls, tree: KinematicTree) -> "JointVector":
        return cls({p.id: p.theta_init for p in tree.spec.panels})

    @classmethod
    def from_folded(cls, tree: KinematicTree, folded) -> "JointVector":
        """Binary fold model: folded joints sit at theta_final, the rest at theta_init."""
        folded = set(folded)
        return cls(
            {
                p.id: (p.theta_final if p.id in folded else p.theta_init)
                for p in tree.spec.panels
            }
        )

    def replace(self, panel_id: int, angle: float) -> "JointVector":
        angles = dict(self.angles)
        angles[panel_id] = angle
        return JointVector(angles)


@dataclass(frozen=True)
class PanelPose:
    """World placement of one panel at a given joint vector."""

    panel_id: int
    pose: Transform
    center: np.ndarray
    solid: OrientedBox


def _check_angle(panel: PanelSpec, value: float) -> None:
    lo = min(panel.theta_init, panel.theta_final) - ANGLE_SLACK
    hi = max(panel.theta_init, panel.theta_final) + ANGLE_SLACK
    if not (lo <= value <= hi):
        raise ValueError(
            f"theta for panel {panel.id} out of range: {value!r} not within "
            f"[{panel.theta_init!r}, {panel.theta_final!r}]"
        )


def panel_pose_from_frame(panel: PanelSpec, frame: Transform) -> PanelPose:
    """Panel pose record given the world transform of its local frame."""
    h, w, t = panel.dims
    local_center = np.array([w / 2.0, h / 2.0, 0.0])
    center = frame.apply(local_center)
    solid = OrientedBox(
        Transform(frame.rotation, center), np.array([w / 2.0, h / 2.0, t / 2.0])
    )
    return PanelPose(panel_id=panel.id, pose=frame, center=center, solid=solid)


def forward_kinematics(tree: KinematicTree, theta: JointVector) -> list[PanelPose]:
    """Panel poses for a joint vector, ordered by panel id.

    Each child frame is the parent frame composed with the crease rotation:
    rotate by theta about the crease axis anchored in the parent frame, then
    place the child's zero-angle frame.
    """
    spec = tree.spec
    frames: dict[int, Transform] = {}
    for pid in tree.topo_order:
        panel = tree.panels_by_id[pid]
        value = theta.angle(pid)
        _check_angle(panel, value)
        if panel.parent is None:
            frames[pid] = spec.root_pose
            continue
        anchor, axis, mount = tree.mounts[pid]
        local = Transform(rotation_matrix(axis, value) @ mount, anchor)
        frames[pid] = frames[panel.parent] @ local
    return [panel_pose_from_frame(tree.panels_by_id[pid], frames[pid]) for pid in tree.ids]


# ---------------------------------------------------------------------------
# File format


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise SpecValidationError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _vec(mapping: dict, key: str, where: str, default=None):
    if key not in mapping:
        if default is None:
            raise SpecValidationError(f"{where}: missing required key {key!r}")
        return np.asarray(default, dtype=float)
    value = np.asarray(mapping[key], dtype=float)
    if value.shape != (3,):
        raise SpecValidationError(f"{where}: {key} must be a 3-element list")
    return value


def _rpy_matrix(rpy_deg) -> np.ndarray:
    roll, pitch, yaw = (math.radians(v) for v in rpy_deg)
    rx = rotation_matrix(np.array([1.0, 0.0, 0.0]), roll)
    ry = rotation_matrix(np.array([0.0, 1.0, 0.0]), pitch)
    rz = rotation_matrix(np.array([0.0, 0.0, 1.0]), yaw)
    return rz @ ry @ rx


def _panel_from_mapping(entry: dict) -> PanelSpec:
    if not isinstance(entry, dict):
        raise SpecValidationError("each panel entry must be a mapping")
    pid = int(_require(entry, "id", "panel"))
    where = f"panel {pid}"
    parent = entry.get("parent")
    parent = None if parent is None else int(parent)
    dims = _vec(entry, "dims_mm", where)
    kwargs = {}
    if parent is not None:
        kwargs["crease_anchor"] = tuple(_vec(entry, "crease_anchor_mm", where))
        kwargs["crease_dir"] = tuple(_vec(entry, "crease_dir", where))
        kwargs["theta_init"] = math.radians(float(_require(entry, "theta_init_deg", where)))
        kwargs["theta_final"] = math.radians(float(_require(entry, "theta_final_deg", where)))
    elif "theta_init_deg" in entry or "theta_final_deg" in entry:
        init = math.radians(float(entry.get("theta_init_deg", 0.0)))
        final = math.radians(float(entry.get("theta_final_deg", 0.0)))
        kwargs["theta_init"] = init
        kwargs["theta_final"] = final
    return PanelSpec(
        id=pid,
        parent=parent,
        dims=tuple(dims),
        name=str(entry.get("name", "")),
        foldable_flag=entry.get("foldable"),
        **kwargs,
    )


def _environment_from_mapping(entries) -> tuple[tuple[OrientedBox, ...], bool]:
    boxes: list[OrientedBox] = []
    table = False
    if entries is None:
        return (), False
    if not isinstance(entries, list):
        raise SpecValidationError("environment must be a list of obstacle entries")
    for i, entry in enumerate(entries):
        where = f"environment[{i}]"
        if not isinstance(entry, dict):
            raise SpecValidationError(f"{where}: must be a mapping")
        if entry.get("half_space"):
            table = True
            continue
        center = _vec(entry, "center_mm", where)
        dims = _vec(entry, "dims_mm", where)
        rot = _rpy_matrix(entry.get("rpy_deg", (0.0, 0.0, 0.0)))
        boxes.append(OrientedBox.from_center(center, dims, rot))
    return tuple(boxes), table


def spec_from_mapping(data: dict) -> CartonSpec:
    """Build a validated CartonSpec from parsed file data."""
    if not isinstance(data, dict):
        raise SpecValidationError("carton spec must be a mapping at the top level")
    raw_panels = _require(data, "panels", "spec")
    if not isinstance(raw_panels, list) or not raw_panels:
        raise SpecValidationError("panels must be a non-empty list")
    panels = tuple(_panel_from_mapping(entry) for entry in raw_panels)

    pose_map = data.get("root_pose") or {}
    root_pose = Transform(
        _rpy_matrix(pose_map.get("rpy_deg", (0.0, 0.0, 0.0))),
        _vec(pose_map, "translation_mm", "root_pose", default=(0.0, 0.0, 0.0)),
    )

    environment, table = _environment_from_mapping(data.get("environment"))

    gripper = None
    if data.get("gripper") is not None:
        gmap = data["gripper"]
        gripper = GripperSpec(
            dims=tuple(_vec(gmap, "dims_mm", "gripper")),
            standoff=float(gmap.get("standoff_mm", 0.0)),
        )

    planner = data.get("planner") or {}
    ranking = data.get("ranking") or list(DEFAULT_RANKING)
    if not isinstance(ranking, list):
        raise SpecValidationError("ranking must be a list of criteria")

    return CartonSpec(
        panels=panels,
        root_pose=root_pose,
        environment=environment,
        table_plane=table,
        gripper=gripper,
        tolerance_angle=math.radians(
            float(planner.get("tolerance_angle_deg", DEFAULT_TOLERANCE_ANGLE_DEG))
        ),
        penetration_tolerance=float(
            planner.get("penetration_tolerance_mm", DEFAULT_PENETRATION_TOLERANCE_MM)
        ),
        support_tolerance=float(
            planner.get("support_tolerance_mm", DEFAULT_SUPPORT_TOLERANCE_MM)
        ),
        ranking=tuple(str(c) for c in ranking),
    )


def parse_spec(document: str) -> CartonSpec:
    """Parse and validate a carton-spec document (YAML text)."""
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise SpecValidationError(f"carton spec is not valid YAML: {exc}") from exc
    return spec_from_mapping(data)


def load_spec(path) -> CartonSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


def _rotation_to_rpy_deg(rot: np.ndarray) -> list[float]:
    # Inverse of _rpy_matrix (ZYX convention); gimbal-locked poses pick yaw = 0.
    pitch = -math.asin(max(-1.0, min(1.0, float(rot[2, 0]))))
    if abs(abs(rot[2, 0]) - 1.0) < 1e-12:
        roll = math.atan2(-float(rot[1, 2]), float(rot[1, 1]))
        yaw = 0.0
    else:
        roll = math.atan2(float(rot[2, 1]), float(rot[2, 2]))
        yaw = math.atan2(float(rot[1, 0]), float(rot[0, 0]))
    return [math.degrees(roll), math.degrees(pitch), math.degrees(yaw)]


def serialize_spec(spec: CartonSpec) -> str:
    """Write a spec back to the document format; parse(serialize(s)) == s."""
    panels = []
    for p in spec.panels:
        entry: dict = {"id": p.id}
        if p.name:
            entry["name"] = p.name
        entry["parent"] = p.parent
        entry["dims_mm"] = [float(v) for v in p.dims]
        if p.parent is not None:
            entry["crease_anchor_mm"] = [float(v) for v in p.crease_anchor]
            entry["crease_dir"] = [float(v) for v in p.crease_dir]
            entry["theta_init_deg"] = math.degrees(p.theta_init)
            entry["theta_final_deg"] = math.degrees(p.theta_final)
        if p.foldable_flag is not None:
            entry["foldable"] = p.foldable_flag
        panels.append(entry)

    environment: list[dict] = []
    if spec.table_plane:
        environment.append({"name": "table", "half_space": True})
    for box in spec.environment:
        environment.append(
            {
                "center_mm": [float(v) for v in box.center],
                "dims_mm": [float(v) for v in 2.0 * box.half_extents],
                "rpy_deg": _rotation_to_rpy_deg(box.pose.rotation),
            }
        )

    data: dict = {
        "panels": panels,
        "root_pose": {
            "translation_mm": [float(v) for v in spec.root_pose.translation],
            "rpy_deg": _rotation_to_rpy_deg(spec.root_pose.rotation),
        },
        "environment": environment,
        "planner": {
            "tolerance_angle_deg": math.degrees(spec.tolerance_angle),
            "penetration_tolerance_mm": spec.penetration_tolerance,
            "support_tolerance_mm": spec.support_tolerance,
        },
        "ranking": list(spec.ranking),
    }
    if spec.gripper is not None:
        data["gripper"] = {
            "dims_mm": [float(v) for v in spec.gripper.dims],
            "standoff_mm": spec.gripper.standoff,
        }
    return yaml.safe_dump(data, sort_keys=False)
