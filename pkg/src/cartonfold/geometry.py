"""Rigid-body transforms and box-overlap primitives.

All lengths are millimeters, all angles radians. Values are immutable
after construction (backing arrays are write-protected), so they can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHONORMAL_TOL = 1e-9

# Padding added to |R_a^T R_b| in the SAT cross-axis tests. Near-parallel
# edge pairs produce near-zero axes; the padding keeps them from reporting
# a phantom separation (equivalent to skipping the degenerate axis).
_SAT_EPS = 1e-12


def _as_vec3(value, name: str = "vector") -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Transform:
    """Proper rigid transform: ``p_world = rotation @ p_local + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got shape {rot.shape}")
        err = np.abs(rot.T @ rot - np.eye(3)).max()
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"rotation is not orthonormal (max deviation {err:.3e})")
        if np.linalg.det(rot) < 0.0:
            raise ValueError("rotation must be proper (det = +1), got a reflection")
        object.__setattr__(self, "rotation", _frozen(rot))
        object.__setattr__(self, "translation", _frozen(_as_vec3(self.translation, "translation")))

    @classmethod
    def identity(cls) -> "Transform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation) -> "Transform":
        return cls(np.eye(3), translation)

    def compose(self, other: "Transform") -> "Transform":
        """Return ``self @ other`` (apply ``other`` first, then ``self``)."""
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "Transform") -> "Transform":
        return self.compose(other)

    def apply(self, points) -> np.ndarray:
        """Map local points (shape (3,) or (n, 3)) into the parent frame."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "Transform":
        rot_inv = self.rotation.T
        return Transform(rot_inv, -rot_inv @ self.translation)


def rotation_matrix(axis_dir: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis (right-hand rule)."""
    kx, ky, kz = axis_dir
    k_cross = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    sin_a, cos_a = np.sin(angle), np.cos(angle)
    return np.eye(3) + sin_a * k_cross + (1.0 - cos_a) * (k_cross @ k_cross)


def rotation_matrices(axis_dir: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Vectorised Rodrigues formula: one (3, 3) matrix per angle."""
    kx, ky, kz = axis_dir
    k_cross = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    angles = np.asarray(angles, dtype=float)
    sin_a = np.sin(angles)[:, None, None]
    cos_a = np.cos(angles)[:, None, None]
    return np.eye(3) + sin_a * k_cross + (1.0 - cos_a) * (k_cross @ k_cross)


def rotate_about_axis(point_on_axis, axis_dir, angle: float) -> Transform:
    """Transform rotating by ``angle`` about the line through ``point_on_axis``
    along unit vector ``axis_dir``. Every point on the axis is fixed.
    """
    point = _as_vec3(point_on_axis, "point_on_axis")
    axis = _as_vec3(axis_dir, "axis_dir")
    norm = np.linalg.norm(axis)
    if abs(norm - 1.0) > ORTHONORMAL_TOL:
        raise ValueError(f"axis_dir must be a unit vector, |axis| = {norm!r}")
    rot = rotation_matrix(axis, angle)
    return Transform(rot, point - rot @ point)


_CORNER_SIGNS = np.array(
    [
        [-1, -1, -1],
        [+1, -1, -1],
        [-1, +1, -1],
        [+1, +1, -1],
        [-1, -1, +1],
        [+1, -1, +1],
        [-1, +1, +1],
        [+1, +1, +1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class OrientedBox:
    """Box spanning ``[-h, +h]`` per axis of its pose frame (h = half_extents)."""

    pose: Transform
    half_extents: np.ndarray

    def __post_init__(self):
        half = _as_vec3(self.half_extents, "half_extents")
        if not np.all(half > 0.0):
            raise ValueError(f"half_extents must be strictly positive, got {half}")
        object.__setattr__(self, "half_extents", _frozen(half))

    @classmethod
    def from_center(cls, center, dims, rotation=None) -> "OrientedBox":
        """Box from full dimensions centered at ``center``."""
        rot = np.eye(3) if rotation is None else rotation
        return cls(Transform(rot, center), np.asarray(dims, dtype=float) / 2.0)

    @property
    def center(self) -> np.ndarray:
        return self.pose.translation

    @property
    def axes(self) -> np.ndarray:
        """World directions of the box axes, one per column."""
        return self.pose.rotation

    def corners(self) -> np.ndarray:
        """All 8 corner vertices in world coordinates, shape (8, 3)."""
        return self.pose.apply(_CORNER_SIGNS * self.half_extents)


@dataclass(frozen=True)
class Aabb:
    """World-axis-aligned bounding box."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = _as_vec3(self.min, "min")
        hi = _as_vec3(self.max, "max")
        if np.any(lo > hi):
            raise ValueError(f"Aabb min must be <= max componentwise, got {lo} > {hi}")
        object.__setattr__(self, "min", _frozen(lo))
        object.__setattr__(self, "max", _frozen(hi))

    @property
    def extents(self) -> np.ndarray:
        return self.max - self.min

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    @property
    def max_extent(self) -> float:
        return float(self.extents.max())


def world_aabb(boxes) -> Aabb:
    """Tightest world-aligned box containing every corner of every input box."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("world_aabb requires at least one box")
    corners = np.vstack([box.corners() for box in boxes])
    return Aabb(corners.min(axis=0), corners.max(axis=0))


def _pack_boxes(boxes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack boxes into (centers, rotations, half_extents) arrays."""
    centers = np.stack([b.center for b in boxes])
    rots = np.stack([b.pose.rotation for b in boxes])
    halves = np.stack([b.half_extents for b in boxes])
    return centers, rots, halves


def sat_overlap_matrix(
    centers_a: np.ndarray,
    rots_a: np.ndarray,
    halves_a: np.ndarray,
    centers_b: np.ndarray,
    rots_b: np.ndarray,
    halves_b: np.ndarray,
    clearance: float = 0.0,
) -> np.ndarray:
    """Pairwise separating-axis test between two batches of oriented boxes.

    Returns a boolean (n_a, n_b) matrix, True where the boxes (each grown by
    ``clearance / 2`` per face; negative clearance shrinks them) overlap on
    all 15 candidate axes. Touching configurations count as overlapping.
    """
    ha = np.maximum(halves_a + clearance / 2.0, 0.0)
    hb = np.maximum(halves_b + clearance / 2.0, 0.0)

    # Everything below is expressed in each A-box frame.
    rel = np.einsum("aji,abj->abi", rots_a, centers_b[None, :, :] - centers_a[:, None, :])
    basis = np.einsum("aji,bjk->abik", rots_a, rots_b)
    abs_basis = np.abs(basis) + _SAT_EPS

    separated = np.zeros(rel.shape[:2], dtype=bool)

    # Face axes of A.
    reach_b = np.einsum("abik,bk->abi", abs_basis, hb)
    separated |= np.any(np.abs(rel) > ha[:, None, :] + reach_b, axis=-1)

    # Face axes of B.
    rel_b = np.einsum("abik,abi->abk", basis, rel)
    reach_a = np.einsum("abik,ai->abk", abs_basis, ha)
    separated |= np.any(np.abs(rel_b) > reach_a + hb[None, :, :], axis=-1)

    # Cross-product axes A_i x B_j.
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            dist = np.abs(rel[:, :, i2] * basis[:, :, i1, j] - rel[:, :, i1] * basis[:, :, i2, j])
            radius = (
                ha[:, None, i1] * abs_basis[:, :, i2, j]
                + ha[:, None, i2] * abs_basis[:, :, i1, j]
                + hb[None, :, j1] * abs_basis[:, :, i, j2]
                + hb[None, :, j2] * abs_basis[:, :, i, j1]
            )
            separated |= dist > radius

    return ~separated


def obb_intersect(a: OrientedBox, b: OrientedBox, clearance: float = 0.0) -> bool:
    """True when the boxes, each inflated by ``clearance / 2``, overlap.

    A negative clearance acts as a penetration allowance: the boxes must
    interpenetrate by more than ``|clearance|`` before this reports True.
    """
    ca, ra, hha = _pack_boxes([a])
    cb, rb, hhb = _pack_boxes([b])
    return bool(sat_overlap_matrix(ca, ra, hha, cb, rb, hhb, clearance)[0, 0])
