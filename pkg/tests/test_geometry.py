import math

import numpy as np
import pytest

from owltamp.geometry import (
    Aabb, Pose6, box_at_pose, rotation_matrix, rotated_half_extents, wrap_angle,
)


def test_wrap_angle_into_range():
    for a in (-9.0, -math.pi, -1.0, 0.0, 1.0, math.pi, 9.0, 100.0):
        w = wrap_angle(a)
        assert -math.pi <= w <= math.pi
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)


def test_pose_normalizes_angles_and_rejects_nan():
    p = Pose6(0, 0, 0, roll=4.0, pitch=-4.0, yaw=2 * math.pi)
    assert -math.pi <= p.roll <= math.pi
    assert -math.pi <= p.pitch <= math.pi
    assert abs(p.yaw) < 1e-9
    with pytest.raises(ValueError):
        Pose6(float("nan"), 0, 0)


def _corner_hull(half, roll, pitch, yaw):
    """Independent oracle: axis-aligned hull from the 8 rotated corners."""
    r = rotation_matrix(roll, pitch, yaw)
    corners = []
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                corners.append(r @ np.array([sx * half[0], sy * half[1], sz * half[2]]))
    corners = np.array(corners)
    return corners.max(axis=0)


def test_rotated_half_extents_matches_corner_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(200):
        half = rng.uniform(0.01, 0.2, size=3)
        rpy = rng.uniform(-math.pi, math.pi, size=3)
        got = rotated_half_extents(half, *rpy)
        want = _corner_hull(half, *rpy)
        assert np.allclose(got, want, atol=1e-12)


def test_yawed_cube_extents():
    # A unit cube yawed 45 degrees spans sqrt(2)/2 per side in x and y.
    got = rotated_half_extents((0.5, 0.5, 0.5), 0.0, 0.0, math.pi / 4)
    assert math.isclose(got[0], math.sqrt(2) / 2, rel_tol=1e-12)
    assert math.isclose(got[1], math.sqrt(2) / 2, rel_tol=1e-12)
    assert math.isclose(got[2], 0.5, rel_tol=1e-12)


def test_aabb_basics():
    box = Aabb.from_center((0, 0, 0), (0.5, 0.5, 0.5))
    assert box.lower == (-0.5, -0.5, -0.5)
    assert box.upper == (0.5, 0.5, 0.5)
    assert box.contains_point((0.5, 0.5, 0.5))
    assert not box.contains_point((0.51, 0, 0))
    with pytest.raises(ValueError):
        Aabb((1, 0, 0), (0, 1, 1))


def test_aabb_overlap_convention():
    a = Aabb((0, 0, 0), (1, 1, 1))
    b = Aabb((2, 0, 0), (3, 1, 1))
    assert not a.overlaps(b)
    touching = Aabb((1.0, 0, 0), (2, 1, 1))
    assert not a.overlaps(touching, tol=0.0)
    nudged = Aabb((0.9999, 0, 0), (2, 1, 1))
    assert a.overlaps(nudged, tol=0.0)
    assert not a.overlaps(nudged, tol=1e-3)


def test_box_at_pose_translates():
    box = box_at_pose(Pose6(1, 2, 3), (0.1, 0.2, 0.3))
    assert np.allclose(box.center, (1, 2, 3))
    assert np.allclose(box.half_extents, (0.1, 0.2, 0.3))
