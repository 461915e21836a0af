import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bendsim.errors import InvalidInputError
from bendsim.kinematics import joint_positions
from bendsim.reconstruction import (
    SensorFrame,
    curvature_profile,
    fit_reference_chain,
    frame_to_joint_angles,
    max_deviation,
    segment_frame,
    select_order,
    spline_through,
    wrap_angle,
)
from bendsim.synthetic import chain_frame, straight_frame

from helpers import random_chain

# Frozen oracle: max radial deviation of the natural spline through 6
# equally spaced nodes on a 0.1 m-radius semicircle, from a dense
# 200001-point parameter scan (stable to ~1e-12 across grid choices).
SEMICIRCLE_SPLINE_DEVIATION = 0.001975315001362263


def semicircle_nodes(radius=0.1, count=6):
    th = np.linspace(0.0, math.pi, count)
    # CCW from the origin heading +Y, center at (-radius, 0).
    return np.column_stack([radius * np.cos(th) - radius,
                            radius * np.sin(th)])


def arc_frame(radius, span, count, ccw=True, time=0.0):
    t = np.linspace(0.0, span, count)
    sign = 1.0 if ccw else -1.0
    return SensorFrame(
        time,
        np.column_stack([sign * (radius * np.cos(t) - radius),
                         radius * np.sin(t)]),
    )


class TestSegmentFrame:
    def test_five_collinear_points(self):
        pts = np.column_stack([np.zeros(5), np.arange(5) * 0.001])
        nodes = segment_frame(SensorFrame(0.0, pts), 2)
        np.testing.assert_array_equal(nodes, pts[[0, 2, 4]])

    def test_212_points_at_sensor_spacing(self):
        pts = np.column_stack([np.zeros(212), np.arange(212) * 0.0008])
        frame = SensorFrame(0.0, pts)
        nodes = segment_frame(frame, 5)
        np.testing.assert_array_equal(nodes, pts[[0, 42, 84, 127, 169, 211]])

    def test_maximal_order_keeps_every_point(self):
        pts = np.column_stack([np.zeros(7), np.arange(7) * 0.01])
        nodes = segment_frame(SensorFrame(0.0, pts), 6)
        np.testing.assert_array_equal(nodes, pts)

    def test_too_many_nodes_rejected(self):
        pts = np.column_stack([np.zeros(5), np.arange(5) * 0.01])
        with pytest.raises(InvalidInputError):
            segment_frame(SensorFrame(0.0, pts), 5)

    def test_small_frames_rejected(self):
        pts = np.column_stack([np.zeros(3), np.arange(3) * 0.01])
        with pytest.raises(InvalidInputError):
            segment_frame(SensorFrame(0.0, pts), 2)

    def test_nodes_strictly_ordered_on_uneven_spacing(self, rng):
        for _ in range(20):
            gaps = rng.uniform(0.0001, 0.01, 30)
            y = np.concatenate([[0.0], np.cumsum(gaps)])
            frame = SensorFrame(0.0, np.column_stack([np.zeros(31), y]))
            for n in (2, 5, 12, 30):
                nodes = segment_frame(frame, n)
                assert np.all(np.diff(nodes[:, 1]) > 0.0)
                assert np.array_equal(nodes[0], frame.points[0])
                assert np.array_equal(nodes[-1], frame.points[-1])


class TestFitReferenceChain:
    def test_straight_reference(self):
        frame = straight_frame(length=0.17)
        chain = fit_reference_chain(frame, 5)
        np.testing.assert_allclose(chain.offsets, 0.0, atol=1e-12)
        assert chain.total_length == pytest.approx(0.17, abs=1e-12)

    def test_circular_arc_equal_offsets(self):
        # 101 samples at equal arc spacing: chord fractions land exactly
        # on sample indices, so nodes subtend equal arcs.
        span = 0.5 * math.pi
        frame = arc_frame(0.1, span, 101)
        chain = fit_reference_chain(frame, 5)
        np.testing.assert_allclose(chain.offsets[1:], span / 5, atol=1e-9)
        assert chain.offsets[0] == pytest.approx(span / 10, abs=1e-9)

    def test_reference_nodes_reproduced_at_rest(self, rng):
        for _ in range(5):
            gen = random_chain(rng, 4)
            q = rng.uniform(-0.4, 0.4, 4)
            frame = SensorFrame(0.0, joint_positions(gen, q))
            chain = fit_reference_chain(frame, 4)
            np.testing.assert_allclose(
                joint_positions(chain, np.zeros(4)), frame.points, atol=1e-9
            )

    def test_zero_masses(self):
        chain = fit_reference_chain(straight_frame(), 3)
        assert np.all(chain.masses == 0.0)


class TestFrameToJointAngles:
    def test_reference_frame_gives_zero(self):
        frame = arc_frame(0.1, 0.4 * math.pi, 81)
        chain = fit_reference_chain(frame, 5)
        q = frame_to_joint_angles(frame, chain)
        assert np.abs(q).max() < 1e-9

    def test_wrap_convention(self):
        assert wrap_angle(math.radians(190)) == pytest.approx(
            math.radians(-170), abs=1e-12
        )
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)

    @settings(max_examples=20)
    @given(st.data())
    def test_recovers_generating_angles(self, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        ref_chain = random_chain(rng, 5)
        q_star = rng.uniform(-0.6, 0.6, 5)
        # Frame whose points are exactly the chain's joints: nodes hit
        # them exactly, so recovery is limited only by arithmetic.
        frame = SensorFrame(0.0, joint_positions(ref_chain, q_star))
        q = frame_to_joint_angles(frame, ref_chain)
        np.testing.assert_allclose(q, q_star, atol=1e-6)

    def test_recovers_from_dense_sampling(self, bench_geometry):
        from bendsim.dynamics import build_chain

        chain = build_chain(bench_geometry, 5)
        q_star = np.array([0.3, 0.25, 0.2, 0.28, 0.22])
        frame = chain_frame(chain, q_star)
        q = frame_to_joint_angles(frame, chain)
        # Dense resampling moves nodes by up to half the 0.8 mm spacing.
        np.testing.assert_allclose(q, q_star, atol=0.05)


class TestSplineThrough:
    def test_collinear_nodes_reproduce_the_line(self):
        nodes = np.column_stack([np.zeros(4), np.array([0.0, 0.04, 0.1,
                                                        0.17])])
        curve = spline_through(nodes)
        s = np.linspace(curve.s_min, curve.s_max, 500)
        pts = curve.evaluate(s)
        np.testing.assert_allclose(pts[:, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(pts[:, 1], s, atol=1e-12)

    def test_interpolates_knots(self):
        nodes = semicircle_nodes()
        curve = spline_through(nodes)
        np.testing.assert_allclose(curve.evaluate(curve.knots), nodes,
                                   atol=1e-12)

    def test_c2_continuity_at_interior_knots(self):
        curve = spline_through(semicircle_nodes())
        # Evaluate the two adjacent interval polynomials at the shared
        # knot: value, slope and second derivative must agree.
        for j in range(1, len(curve.knots) - 1):
            h = curve.knots[j] - curve.knots[j - 1]
            for coeffs in (curve.coeffs_x, curve.coeffs_y):
                a3, a2, a1, a0 = coeffs[:, j - 1]
                b3, b2, b1, b0 = coeffs[:, j]
                left = (
                    ((a3 * h + a2) * h + a1) * h + a0,
                    (3 * a3 * h + 2 * a2) * h + a1,
                    6 * a3 * h + 2 * a2,
                )
                right = (b0, b1, 2 * b2)
                np.testing.assert_allclose(left, right, atol=1e-9)
        # Natural end conditions: vanishing second derivative.
        np.testing.assert_allclose(
            curve.derivative(curve.s_min, 2), 0.0, atol=1e-9
        )
        np.testing.assert_allclose(
            curve.derivative(curve.s_max, 2), 0.0, atol=1e-9
        )

    def test_semicircle_deviation_frozen_oracle(self):
        curve = spline_through(semicircle_nodes())
        s = np.linspace(curve.s_min, curve.s_max, 200001)
        pts = curve.evaluate(s)
        dev = np.abs(np.hypot(pts[:, 0] + 0.1, pts[:, 1]) - 0.1).max()
        assert dev == pytest.approx(SEMICIRCLE_SPLINE_DEVIATION, abs=1e-9)

    def test_too_few_nodes_rejected(self):
        with pytest.raises(InvalidInputError):
            spline_through(np.array([[0.0, 0.0], [0.0, 0.1]]))

    def test_coincident_nodes_rejected(self):
        with pytest.raises(InvalidInputError):
            spline_through(np.array([[0.0, 0.0], [0.0, 0.1], [0.0, 0.1],
                                     [0.0, 0.2]]))


class TestMaxDeviation:
    def test_points_on_curve_give_zero(self):
        curve = spline_through(semicircle_nodes())
        s = np.linspace(curve.s_min, curve.s_max, 40)
        frame = SensorFrame(0.0, curve.evaluate(s))
        mx, mean = max_deviation(curve, frame)
        assert mx < 1e-9 and mean < 1e-9

    def test_straight_frame_vs_own_spline(self):
        frame = straight_frame(length=0.17, spacing=0.01)
        nodes = segment_frame(frame, 2)
        mx, mean = max_deviation(spline_through(nodes), frame)
        assert mx < 1e-9 and mean < 1e-9

    def test_matches_brute_force_scan(self):
        # Semicircle frame at the sensor spacing vs its 5-segment spline.
        arc_count = int(round(math.pi * 0.1 / 0.0008)) + 1
        frame = arc_frame(0.1, math.pi, arc_count)
        curve = spline_through(segment_frame(frame, 5))
        mx, mean = max_deviation(curve, frame)
        grid = np.linspace(curve.s_min, curve.s_max,
                           int((curve.s_max - curve.s_min) / 1e-5) + 2)
        samples = curve.evaluate(grid)
        d = np.sqrt(
            ((frame.points[:, None, :] - samples[None, :, :]) ** 2).sum(-1)
        ).min(axis=1)
        assert mx == pytest.approx(d.max(), abs=1e-6)
        assert mean == pytest.approx(d.mean(), abs=1e-6)

    def test_max_at_least_mean(self, rng):
        for _ in range(10):
            chain = random_chain(rng, 5)
            frame = chain_frame(chain, rng.uniform(-0.3, 0.3, 5),
                                spacing=0.002)
            mx, mean = max_deviation(
                spline_through(segment_frame(frame, 3)), frame
            )
            assert mx >= mean >= 0.0


class TestSelectOrder:
    def test_straight_frames_choose_minimum(self):
        frames = [straight_frame(time=t) for t in (0.0, 0.5, 1.0)]
        report = select_order(frames, range(2, 6), 0.001)
        assert report.chosen_n == 2
        assert report.threshold_met
        for c in report.candidates:
            assert c.max_error >= c.mean_error >= 0.0
            assert c.max_error < 1e-9

    def test_monotone_improvement_on_nested_node_sets(self):
        # 33 uniform arc samples: n in {2,4,8,16,32} gives nested nodes.
        frame = arc_frame(0.1, 0.6 * math.pi, 33)
        errors = []
        for n in (2, 4, 8, 16, 32):
            mx, _ = max_deviation(spline_through(segment_frame(frame, n)),
                                  frame)
            errors.append(mx)
        assert all(b <= a + 1e-15 for a, b in zip(errors, errors[1:]))

    def test_threshold_not_met_flag(self):
        frame = arc_frame(0.1, math.pi, 200)
        report = select_order([frame], [2, 3], 1e-9)
        assert not report.threshold_met
        assert report.chosen_n == 3  # argmin of max error

    def test_empty_frames_rejected(self):
        with pytest.raises(InvalidInputError):
            select_order([], [2, 3], 0.003)

    def test_report_candidate_lookup(self):
        frames = [straight_frame()]
        report = select_order(frames, [2, 4], 0.01)
        assert report.candidate(4).n == 4
        with pytest.raises(KeyError):
            report.candidate(3)


class TestCurvatureProfile:
    def test_straight_line_zero(self):
        profile = curvature_profile(straight_frame(spacing=0.01))
        np.testing.assert_array_equal(profile[:, 1], 0.0)

    def test_dense_circle_recovers_curvature(self):
        for radius in (0.02, 0.05, 0.1):
            count = max(int(round(1.2 * math.pi * radius / 0.0008)) + 1, 12)
            frame = arc_frame(radius, 1.2 * math.pi, count)
            profile = curvature_profile(frame)
            np.testing.assert_allclose(profile[:, 1], 1.0 / radius,
                                       rtol=0.01)

    def test_semicircle_curvature_magnitude(self):
        count = int(round(math.pi * 0.1 / 0.0008)) + 1
        ccw = curvature_profile(arc_frame(0.1, math.pi, count, ccw=True))
        np.testing.assert_allclose(ccw[:, 1], 10.0, atol=0.1)
        cw = curvature_profile(arc_frame(0.1, math.pi, count, ccw=False))
        np.testing.assert_allclose(cw[:, 1], -10.0, atol=0.1)

    def test_arc_length_column_is_cumulative_chord(self):
        frame = straight_frame(spacing=0.01, length=0.1)
        profile = curvature_profile(frame)
        np.testing.assert_allclose(profile[:, 0],
                                   frame.chord_lengths[1:-1], atol=1e-15)

    def test_too_few_points_rejected(self):
        pts = np.column_stack([np.zeros(4), np.arange(4) * 0.01])
        with pytest.raises(InvalidInputError):
            curvature_profile(SensorFrame(0.0, pts))


class TestSensorFrame:
    def test_invariants(self):
        with pytest.raises(InvalidInputError):
            SensorFrame(-1.0, np.zeros((5, 2)))
        with pytest.raises(InvalidInputError):
            SensorFrame(0.0, np.array([[0.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(InvalidInputError):
            SensorFrame(0.0, np.array([[0.0, 0.0]]))

    def test_chord_lengths(self):
        frame = straight_frame(length=0.1688, spacing=0.0008)
        assert len(frame) == 212
        assert frame.chord_lengths[-1] == pytest.approx(0.1688, abs=1e-12)
