"""Synthetic generation, perturbations, MAPE, stream file round trips."""

import io

import numpy as np
import pytest

from logsigrnn import (
    SkeletonSequence,
    StreamParseError,
    TimedPath,
    digit_polyline,
    gen_synthetic,
    load_streams,
    log_signature,
    mape,
    perturb_drop,
    perturb_insert,
    save_streams,
    upsample_linear,
)
from logsigrnn.datasets import LabeledStreamSet


class TestGeneration:
    def test_empty_count(self):
        data = gen_synthetic(0, seed=0)
        assert len(data) == 0

    def test_deterministic_under_seed(self):
        a = gen_synthetic(10, seed=5)
        b = gen_synthetic(10, seed=5)
        assert np.array_equal(a.labels, b.labels)
        for s1, s2 in zip(a.samples, b.samples):
            assert np.array_equal(s1.times, s2.times)
            assert np.array_equal(s1.points, s2.points)

    def test_seeds_differ(self):
        a = gen_synthetic(10, seed=5)
        b = gen_synthetic(10, seed=6)
        assert any(
            s1.num_samples != s2.num_samples or not np.array_equal(s1.points, s2.points)
            for s1, s2 in zip(a.samples, b.samples)
        )

    def test_lengths_within_range(self):
        data = gen_synthetic(30, seed=1, length_range=(20, 120))
        lengths = [s.num_samples for s in data.samples]
        assert min(lengths) >= 20 and max(lengths) <= 120

    def test_orientation_signs_differ(self):
        # noiseless clockwise vs counterclockwise circles: the signed-area
        # coordinate (word 12) has opposite signs
        cw = gen_synthetic(6, seed=2, classes=("circle_cw",), noise=0.0)
        ccw = gen_synthetic(6, seed=2, classes=("circle_ccw",), noise=0.0)
        for s in cw.samples:
            assert log_signature(s, 2)[2] < 0.0
        for s in ccw.samples:
            assert log_signature(s, 2)[2] > 0.0

    def test_requires_classes(self):
        with pytest.raises(ValueError, match="class"):
            gen_synthetic(3, classes=())

    def test_skeleton_layout(self):
        data = gen_synthetic(4, seed=3, layout="skeleton", joints=4)
        skel = data.samples[0]
        assert isinstance(skel, SkeletonSequence)
        assert skel.num_joints == 4
        assert skel.adjacency is not None


class TestDrop:
    def test_zero_rate_is_identity(self):
        p = digit_polyline()
        q = perturb_drop(p, 0.0, 0)
        assert q.num_samples == p.num_samples

    def test_kept_count(self):
        p = TimedPath(np.linspace(0, 1, 10), np.random.default_rng(0).normal(size=(10, 2)))
        q = perturb_drop(p, 0.5, 0)
        assert q.num_samples == 5

    def test_endpoints_survive(self):
        rng = np.random.default_rng(1)
        p = TimedPath(np.linspace(0, 1, 30), rng.normal(size=(30, 2)))
        q = perturb_drop(p, 0.9, 7)
        assert q.times[0] == p.times[0] and q.times[-1] == p.times[-1]
        assert np.array_equal(q.points[0], p.points[0])
        assert np.array_equal(q.points[-1], p.points[-1])

    def test_degree_one_invariant_to_roundoff(self):
        # endpoints survive, so the total increment only sees resummation
        rng = np.random.default_rng(2)
        p = TimedPath(np.linspace(0, 1, 40), rng.normal(size=(40, 2)))
        q = perturb_drop(p, 0.5, 3)
        assert np.max(np.abs(log_signature(q, 1) - log_signature(p, 1))) <= 1e-13

    def test_survivor_timestamps_unchanged(self):
        p = digit_polyline()
        q = perturb_drop(p, 0.3, 11)
        assert np.isin(q.times, p.times).all()

    def test_rate_bounds(self):
        with pytest.raises(ValueError, match="rate"):
            perturb_drop(digit_polyline(), 1.0, 0)


class TestInsert:
    def test_zero_rate_is_identity(self):
        p = digit_polyline()
        assert perturb_insert(p, 0.0, 0).num_samples == p.num_samples

    def test_count_grows(self):
        p = digit_polyline()  # n = 53
        q = perturb_insert(p, 0.4, 5)
        assert q.num_samples == 53 + 21

    def test_log_signature_exactly_preserved(self):
        rng = np.random.default_rng(3)
        p = TimedPath(np.linspace(0, 1, 25), rng.normal(size=(25, 2)))
        for rate in (0.2, 0.5, 0.9):
            q = perturb_insert(p, rate, rng)
            assert np.max(np.abs(log_signature(q, 3) - log_signature(p, 3))) <= 1e-12

    def test_timestamps_remain_strict(self):
        p = digit_polyline()
        q = perturb_insert(p, 0.8, 9)
        assert np.all(np.diff(q.times) > 0)


class TestUpsample:
    def test_factor_one_is_identity(self):
        p = digit_polyline()
        assert upsample_linear(p, 1) is p

    def test_two_point_path(self):
        p = TimedPath([0.0, 1.0], [[0.0], [2.0]])
        q = upsample_linear(p, 2)
        assert np.allclose(q.times, [0.0, 0.5, 1.0])
        assert np.allclose(q.points[:, 0], [0.0, 1.0, 2.0])

    def test_length_formula(self):
        p = digit_polyline()
        q = upsample_linear(p, 4)
        assert q.num_samples == 4 * (p.num_samples - 1) + 1

    def test_log_signature_invariant(self):
        p = digit_polyline()
        ref = log_signature(p, 3)
        for k in (2, 3, 8):
            assert np.max(np.abs(log_signature(upsample_linear(p, k), 3) - ref)) <= 1e-12

    def test_bad_factor(self):
        with pytest.raises(ValueError, match="factor"):
            upsample_linear(digit_polyline(), 0)


class TestMape:
    def test_identical_vectors(self):
        assert mape([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_arithmetic(self):
        assert mape([1.0, 2.0], [1.1, 1.8]) == pytest.approx(0.1)

    def test_reference_asymmetry(self):
        assert mape([1.0], [2.0]) != mape([2.0], [1.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            mape([1.0], [1.0, 2.0])


class TestStreamFiles:
    def test_round_trip_exact(self):
        data = gen_synthetic(5, seed=4)
        buf = io.StringIO()
        save_streams(data, buf)
        buf.seek(0)
        back = load_streams(buf)
        assert back.class_names == data.class_names
        assert np.array_equal(back.labels, data.labels)
        for s1, s2 in zip(data.samples, back.samples):
            assert np.array_equal(s1.times, s2.times)
            assert np.array_equal(s1.points, s2.points)

    def test_skeleton_round_trip(self):
        data = gen_synthetic(3, seed=5, layout="skeleton", joints=3)
        buf = io.StringIO()
        save_streams(data, buf)
        buf.seek(0)
        back = load_streams(buf)
        for s1, s2 in zip(data.samples, back.samples):
            assert np.array_equal(s1.frames, s2.frames)
            assert np.array_equal(s1.adjacency, s2.adjacency)

    def test_empty_file_is_empty_set(self):
        back = load_streams(io.StringIO(""))
        assert len(back) == 0

    def test_non_increasing_timestamps_rejected(self):
        record = (
            '{"kind": "path", "label": 0, "n": 2, "d": 1, '
            '"times": [1.0, 0.5], "points": [[0.0], [1.0]]}'
        )
        with pytest.raises(StreamParseError, match="line 1"):
            load_streams(io.StringIO(record + "\n"))

    def test_shape_mismatch_rejected(self):
        record = (
            '{"kind": "path", "label": 0, "n": 3, "d": 1, '
            '"times": [0.0, 1.0], "points": [[0.0], [1.0]]}'
        )
        with pytest.raises(StreamParseError, match="declared"):
            load_streams(io.StringIO(record + "\n"))

    def test_invalid_json_rejected_with_line(self):
        with pytest.raises(StreamParseError, match="line 2"):
            load_streams(io.StringIO('{"kind": "header", "classes": []}\n{oops\n'))

    def test_file_path_round_trip(self, tmp_path):
        data = gen_synthetic(3, seed=6)
        target = tmp_path / "streams.jsonl"
        save_streams(data, str(target))
        back = load_streams(str(target))
        assert len(back) == 3

    def test_labels_validated(self):
        with pytest.raises(ValueError, match="label"):
            LabeledStreamSet([digit_polyline()], [7], ("a", "b"))


class TestDigitPolyline:
    def test_shape_and_determinism(self):
        p = digit_polyline()
        assert p.num_samples == 53 and p.width == 2
        q = digit_polyline()
        assert np.array_equal(p.points, q.points)
