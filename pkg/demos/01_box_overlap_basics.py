"""
Rigid transforms and box overlap
================================

The geometric kernel everything else stands on: millimeter transforms,
oriented boxes, the separating-axis overlap test, and world-aligned
bounding boxes.
"""

import numpy as np

from cartonfold import OrientedBox, Transform, obb_intersect, rotate_about_axis, world_aabb

# A transform that folds things 90 degrees about the line x-axis through
# (0, 5, 0). Points on the axis stay put, everything else swings around it.
fold = rotate_about_axis(point_on_axis=(0, 5, 0), axis_dir=(1, 0, 0), angle=np.pi / 2)
print("fold applied to (0, 10, 0):", fold.apply((0, 10, 0)))
print("fold applied to (3, 5, 0): ", fold.apply((3, 5, 0)), "(on the axis, fixed)")

# Two quarter turns compose into the half turn.
half = fold @ fold
print("double fold of (0, 10, 0): ", half.apply((0, 10, 0)))

# Oriented boxes: a pose plus half extents. Two 2 mm-wide cubes.
a = OrientedBox.from_center((0, 0, 0), dims=(2, 2, 2))
b = OrientedBox.from_center((1.9, 0, 0), dims=(2, 2, 2))
c = OrientedBox.from_center((2.05, 0, 0), dims=(2, 2, 2))

print("\noverlapping cubes:   ", obb_intersect(a, b))
print("separated by 0.05 mm:", obb_intersect(a, c))
print("same, 0.2 mm margin: ", obb_intersect(a, c, clearance=0.2))

# Negative clearance tolerates shallow interpenetration; panels that share
# a hinge always touch, so the collision module leans on this.
print("0.05 mm deep, eps=0.1:", obb_intersect(
    a, OrientedBox.from_center((1.95, 0, 0), dims=(2, 2, 2)), clearance=-0.1
))

# World-aligned bounding box of a rotated panel: a 45 degree spin grows the
# footprint by sqrt(2).
from cartonfold.geometry import rotation_matrix

panel = OrientedBox.from_center(
    (0, 0, 0), dims=(100, 100, 2),
    rotation=rotation_matrix(np.array([0.0, 0.0, 1.0]), np.pi / 4),
)
box = world_aabb([panel])
print("\nrotated panel extents:", np.round(box.extents, 3))
print("volume:", round(box.volume, 1), "mm^3")
