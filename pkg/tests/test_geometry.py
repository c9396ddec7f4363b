from __future__ import annotations

import numpy as np
import pytest

from cartonfold.geometry import (
    Aabb,
    OrientedBox,
    Transform,
    obb_intersect,
    rotate_about_axis,
    rotation_matrix,
    world_aabb,
)

from .oracles import sampled_overlap, sampling_band


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_box(rng: np.random.Generator, spread: float = 4.0) -> OrientedBox:
    return OrientedBox(
        Transform(random_rotation(rng), rng.uniform(-spread, spread, size=3)),
        rng.uniform(0.25, 1.5, size=3),
    )


class TestTransform:
    def test_identity_composition_is_neutral(self):
        rng = np.random.default_rng(7)
        t = Transform(random_rotation(rng), rng.normal(size=3))
        for composed in (Transform.identity() @ t, t @ Transform.identity()):
            np.testing.assert_allclose(composed.rotation, t.rotation, atol=1e-15)
            np.testing.assert_allclose(composed.translation, t.translation, atol=1e-15)

    def test_composition_associative(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b, c = (
                Transform(random_rotation(rng), rng.normal(size=3)) for _ in range(3)
            )
            left = (a @ b) @ c
            right = a @ (b @ c)
            np.testing.assert_allclose(left.rotation, right.rotation, atol=1e-9)
            np.testing.assert_allclose(left.translation, right.translation, atol=1e-9)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(13)
        t = Transform(random_rotation(rng), rng.normal(size=3))
        pts = rng.normal(size=(10, 3))
        np.testing.assert_allclose(t.inverse().apply(t.apply(pts)), pts, atol=1e-12)

    def test_rejects_non_orthonormal_rotation(self):
        with pytest.raises(ValueError, match="orthonormal"):
            Transform(np.eye(3) * 1.001, np.zeros(3))

    def test_rejects_reflection(self):
        with pytest.raises(ValueError, match="proper"):
            Transform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))


class TestRotateAboutAxis:
    def test_zero_angle_is_identity(self):
        t = rotate_about_axis((0, 0, 0), (1, 0, 0), 0.0)
        np.testing.assert_allclose(t.rotation, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(t.translation, np.zeros(3), atol=1e-15)

    def test_quarter_turn_about_z(self):
        t = rotate_about_axis((0, 0, 0), (0, 0, 1), np.pi / 2)
        np.testing.assert_allclose(t.apply((1, 0, 0)), (0, 1, 0), atol=1e-12)

    def test_half_turn_about_offset_axis(self):
        # Reflection of (0,10,0) through the line y=5, z=0 lands at the origin.
        t = rotate_about_axis((0, 5, 0), (1, 0, 0), np.pi)
        np.testing.assert_allclose(t.apply((0, 10, 0)), (0, 0, 0), atol=1e-12)
        # Same result as composing two quarter turns about the same axis.
        quarter = rotate_about_axis((0, 5, 0), (1, 0, 0), np.pi / 2)
        np.testing.assert_allclose(
            (quarter @ quarter).apply((0, 10, 0)), (0, 0, 0), atol=1e-12
        )

    def test_axis_points_stay_fixed(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            point = rng.normal(size=3)
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            t = rotate_about_axis(point, axis, rng.uniform(-np.pi, np.pi))
            on_axis = point + rng.normal() * axis
            np.testing.assert_allclose(t.apply(on_axis), on_axis, atol=1e-9)

    def test_non_unit_axis_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            rotate_about_axis((0, 0, 0), (1, 1, 0), 0.5)


class TestObbIntersect:
    def test_disjoint_unit_cubes(self):
        a = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        b = OrientedBox.from_center((3, 0, 0), (2, 2, 2))
        assert obb_intersect(a, b, 0.0) is False

    def test_coincident_boxes(self):
        a = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        assert obb_intersect(a, a, 0.0) is True

    def test_clearance_band(self):
        a = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        near = OrientedBox.from_center((1.9, 0, 0), (2, 2, 2))
        apart = OrientedBox.from_center((2.05, 0, 0), (2, 2, 2))
        assert obb_intersect(a, near, 0.0) is True
        assert obb_intersect(a, apart, 0.0) is False
        assert obb_intersect(a, apart, 0.2) is True

    def test_negative_clearance_is_penetration_allowance(self):
        a = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        shallow = OrientedBox.from_center((1.95, 0, 0), (2, 2, 2))  # 0.05 deep
        deep = OrientedBox.from_center((1.5, 0, 0), (2, 2, 2))      # 0.5 deep
        assert obb_intersect(a, shallow, -0.1) is False
        assert obb_intersect(a, deep, -0.1) is True

    def test_symmetry(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            a, b = random_box(rng), random_box(rng)
            clearance = float(rng.choice([0.0, 0.1, 0.4]))
            assert obb_intersect(a, b, clearance) == obb_intersect(b, a, clearance)

    def test_matches_point_sampling_oracle(self):
        # Disagreements are tolerated only when the configuration is within
        # the sampling band of touching: nudging the clearance by two bands
        # must flip the SAT verdict there.
        rng = np.random.default_rng(42)
        checked = disagreements = 0
        for _ in range(1000):
            a, b = random_box(rng), random_box(rng)
            clearance = float(rng.choice([0.0, 0.0, 0.25]))
            sat = obb_intersect(a, b, clearance)
            oracle = sampled_overlap(a, b, clearance)
            checked += 1
            if sat != oracle:
                disagreements += 1
                band = 2.0 * sampling_band(a, b)
                assert obb_intersect(a, b, clearance + band) is True
                assert obb_intersect(a, b, clearance - band) is False
        assert checked == 1000
        assert disagreements < checked * 0.1


class TestWorldAabb:
    def test_single_axis_aligned_cube(self):
        box = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        aabb = world_aabb([box])
        np.testing.assert_allclose(aabb.min, (-1, -1, -1))
        np.testing.assert_allclose(aabb.max, (1, 1, 1))

    def test_rotated_square_grows_by_sqrt2(self):
        rot = rotation_matrix(np.array([0.0, 0.0, 1.0]), np.pi / 4)
        box = OrientedBox.from_center((0, 0, 0), (2, 2, 2), rot)
        np.testing.assert_allclose(
            world_aabb([box]).extents, (2 * np.sqrt(2), 2 * np.sqrt(2), 2), atol=1e-12
        )

    def test_two_disjoint_cubes_hull(self):
        a = OrientedBox.from_center((0, 0, 0), (2, 2, 2))
        b = OrientedBox.from_center((10, 0, 0), (2, 2, 2))
        aabb = world_aabb([a, b])
        np.testing.assert_allclose(aabb.min, (-1, -1, -1))
        np.testing.assert_allclose(aabb.max, (11, 1, 1))

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            world_aabb([])

    def test_monotone_under_additional_boxes(self):
        rng = np.random.default_rng(5)
        boxes = [random_box(rng)]
        previous = world_aabb(boxes)
        for _ in range(20):
            boxes.append(random_box(rng))
            current = world_aabb(boxes)
            assert np.all(current.min <= previous.min + 1e-12)
            assert np.all(current.max >= previous.max - 1e-12)
            previous = current

    def test_min_above_max_rejected(self):
        with pytest.raises(ValueError, match="componentwise"):
            Aabb((0, 0, 0), (-1, 1, 1))
