from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from builders import frame_from, place

from headeval.fixtures import _base_points, build_fixture_topology
from headeval.geometry import (
    DegenerateFaceError,
    eyebrow_distance,
    interocular_distance,
    lip_pair_distances,
    lip_vertical_distances,
    mouth_openness,
)


@pytest.fixture(scope="module")
def topo():
    return build_fixture_topology()


class TestInterocular:
    def test_axis_aligned_distance(self, topo):
        frame = frame_from(place(topo))
        assert interocular_distance(frame, topo) == pytest.approx(60.0)

    def test_translation_invariance(self, topo):
        pts = place(topo)
        d0 = interocular_distance(frame_from(pts), topo)
        d1 = interocular_distance(frame_from(pts + np.array([50.0, 30.0])), topo)
        assert d1 == pytest.approx(d0, abs=1e-12)

    def test_scaling_doubles_distance(self, topo):
        pts = place(topo)
        assert interocular_distance(frame_from(2.0 * pts), topo) == pytest.approx(120.0)

    def test_coincident_eyes_raise(self, topo):
        frame = frame_from(place(topo, left_eye=(130.0, 200.0), right_eye=(130.0, 200.0)))
        with pytest.raises(DegenerateFaceError):
            interocular_distance(frame, topo)


class TestMouthOpenness:
    def test_direct_formula(self, topo):
        frame = frame_from(place(topo, upper_lip_y=300.0, lower_lip_y=320.0))
        assert mouth_openness(frame, topo) == pytest.approx(20.0 / 60.0)

    def test_closed_mouth_is_zero(self, topo):
        frame = frame_from(place(topo, upper_lip_y=310.0, lower_lip_y=310.0))
        assert mouth_openness(frame, topo) == 0.0

    def test_uniform_scaling_cancels(self, topo):
        pts = place(topo)
        o0 = mouth_openness(frame_from(pts), topo)
        o1 = mouth_openness(frame_from(3.0 * pts), topo)
        assert o1 == pytest.approx(o0, rel=1e-12)


class TestLipPairDistances:
    def test_three_four_five_triangle(self, topo):
        single_pair = dataclasses.replace(
            topo, lip_pair_set=((topo.lip_indices[0], topo.lip_indices[20]),)
        )
        pts = place(topo)
        pts[topo.lip_indices[0]] = (0.0, 0.0)
        pts[topo.lip_indices[20]] = (3.0, 4.0)
        assert lip_pair_distances(frame_from(pts), single_pair).tolist() == [5.0]

    def test_rotation_invariance(self, topo):
        pts = place(topo)
        theta = math.radians(30.0)
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        d0 = lip_pair_distances(frame_from(pts), topo)
        d1 = lip_pair_distances(frame_from(pts @ rot.T + 7.0), topo)
        assert np.allclose(d0, d1, rtol=1e-9, atol=1e-9)

    def test_matches_all_pairs_brute_force(self, topo):
        rng = np.random.default_rng(5)
        pts = place(topo) + rng.normal(0, 3, size=(topo.total_points, 2))
        got = lip_pair_distances(frame_from(pts), topo)
        expected = [
            math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
            for a, b in topo.lip_pair_set
        ]
        assert np.allclose(got, expected, rtol=1e-12, atol=1e-12)


class TestLipVertical:
    def test_zero_gaps(self, topo):
        frame = frame_from(place(topo, upper_lip_y=310.0, lower_lip_y=310.0))
        assert lip_vertical_distances(frame, topo) == 0.0

    def test_equal_gaps_formula(self, topo):
        # All three stability pairs see the same 6 px vertical gap; d_io = 60.
        frame = frame_from(place(topo, upper_lip_y=307.0, lower_lip_y=313.0))
        assert lip_vertical_distances(frame, topo) == pytest.approx(0.1)

    def test_scale_invariance(self, topo):
        pts = place(topo)
        v0 = lip_vertical_distances(frame_from(pts), topo)
        v1 = lip_vertical_distances(frame_from(0.5 * pts), topo)
        assert v1 == pytest.approx(v0, rel=1e-12)


class TestEyebrowDistance:
    def test_direct_formula(self, topo):
        frame = frame_from(place(topo, brow_offset=12.0))
        assert eyebrow_distance(frame, topo) == pytest.approx(12.0 / 60.0)

    def test_coincident_brows_and_eyes(self, topo):
        frame = frame_from(place(topo, brow_offset=0.0))
        assert eyebrow_distance(frame, topo) == 0.0

    def test_translation_invariance(self, topo):
        pts = place(topo)
        e0 = eyebrow_distance(frame_from(pts), topo)
        e1 = eyebrow_distance(frame_from(pts + np.array([-20.0, 45.0])), topo)
        assert e1 == pytest.approx(e0, abs=1e-12)


class TestInvarianceBattery:
    def test_rigid_transforms_preserve_distances(self, topo):
        rng = np.random.default_rng(17)
        for _ in range(20):
            pts = _base_points() + np.array([320.0, 240.0])
            pts = pts + rng.normal(0, 2, size=pts.shape)
            theta = rng.uniform(0, 2 * math.pi)
            rot = np.array([[math.cos(theta), -math.sin(theta)],
                            [math.sin(theta), math.cos(theta)]])
            shift = rng.uniform(-100, 100, size=2)
            moved = pts @ rot.T + shift
            d0 = interocular_distance(frame_from(pts), topo)
            d1 = interocular_distance(frame_from(moved), topo)
            assert d1 == pytest.approx(d0, rel=1e-9)
            p0 = lip_pair_distances(frame_from(pts), topo)
            p1 = lip_pair_distances(frame_from(moved), topo)
            assert np.allclose(p0, p1, rtol=1e-9, atol=1e-9)

    def test_scale_and_translation_preserve_normalized_measures(self, topo):
        rng = np.random.default_rng(23)
        for _ in range(20):
            pts = _base_points() + np.array([320.0, 240.0])
            pts = pts + rng.normal(0, 2, size=pts.shape)
            scale = rng.uniform(0.3, 4.0)
            shift = rng.uniform(-50, 50, size=2)
            moved = scale * pts + shift
            for fn in (mouth_openness, lip_vertical_distances, eyebrow_distance):
                v0 = fn(frame_from(pts), topo)
                v1 = fn(frame_from(moved), topo)
                assert v1 == pytest.approx(v0, rel=1e-9, abs=1e-12), fn.__name__

    def test_outputs_non_negative(self, topo):
        rng = np.random.default_rng(29)
        for _ in range(20):
            pts = place(topo) + rng.normal(0, 4, size=(topo.total_points, 2))
            frame = frame_from(pts)
            assert interocular_distance(frame, topo) > 0
            assert mouth_openness(frame, topo) >= 0
            assert lip_vertical_distances(frame, topo) >= 0
            assert eyebrow_distance(frame, topo) >= 0
            assert np.all(lip_pair_distances(frame, topo) >= 0)
