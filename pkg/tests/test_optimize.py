"""Count-difference metric, accuracy, threshold sweep and method comparison."""

import numpy as np
import pytest

from cellflood.core import PipelineParams, RgbImage
from cellflood.optimize import (GroundTruthCentroids, GroundTruthStates, accuracy,
                                compare_segmenters, load_ground_truth,
                                sample_labels, segmentation_param_sweep,
                                threshold_sweep, w_metric)
from cellflood.synth import gaussian_blobs

from oracles import brute_accuracy


class TestWMetric:
    def test_identical_counts_zero(self):
        assert w_metric([3, 1, 4], [3, 1, 4]) == 0.0

    def test_hand_computed(self):
        assert w_metric([10, 5], [8, 6]) == 5.0

    def test_symmetric(self):
        a, b = [7, 2, 9], [1, 3, 4]
        assert w_metric(a, b) == w_metric(b, a)

    def test_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.integers(0, 30, 6)
            b = rng.integers(0, 30, 6)
            w = w_metric(a, b)
            assert w >= 0
            assert (w == 0) == bool((a == b).all())

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            w_metric([1, 2], [1, 2, 3])


class TestAccuracy:
    def test_all_correct(self):
        truth = GroundTruthStates.from_pairs([(1, 1), (2, 2), (3, 1)])
        assert accuracy({1: 1, 2: 2, 3: 1}, truth) == 1.0

    def test_45_45_of_100(self):
        truth = GroundTruthStates.from_pairs(
            [(i, 2) for i in range(50)] + [(i, 1) for i in range(50, 100)])
        predicted = {}
        for i in range(50):
            predicted[i] = 2 if i < 45 else 1  # 45 TP, 5 FN
        for i in range(50, 100):
            predicted[i] = 1 if i < 95 else 2  # 45 TN, 5 FP
        assert accuracy(predicted, truth) == 0.9

    def test_all_wrong(self):
        truth = GroundTruthStates.from_pairs([(1, 1), (2, 2)])
        assert accuracy({1: 2, 2: 1}, truth) == 0.0

    def test_positive_class_designation_invariant(self):
        rng = np.random.default_rng(1)
        truth = GroundTruthStates.from_pairs(
            [(i, int(s)) for i, s in enumerate(rng.integers(1, 3, 40))])
        predicted = {i: int(s) for i, s in enumerate(rng.integers(1, 3, 40))}
        assert accuracy(predicted, truth, positive_state=1) == \
            accuracy(predicted, truth, positive_state=2)

    def test_matches_confusion_matrix_identity(self):
        rng = np.random.default_rng(2)
        truth_pairs = [(i, int(s)) for i, s in enumerate(rng.integers(1, 3, 60))]
        predicted = {i: int(s) for i, s in enumerate(rng.integers(1, 3, 60))}
        truth = GroundTruthStates.from_pairs(truth_pairs)
        pairs = [(predicted[i], s) for i, s in truth_pairs]
        assert accuracy(predicted, truth) == pytest.approx(brute_accuracy(pairs))

    def test_missing_prediction(self):
        truth = GroundTruthStates.from_pairs([(1, 1), (9, 2)])
        with pytest.raises(ValueError, match="label 9"):
            accuracy({1: 1}, truth)


class TestGroundTruthTypes:
    def test_state_validation(self):
        with pytest.raises(ValueError, match="state must be 1 or 2"):
            GroundTruthStates.from_pairs([(7, 3)])

    def test_duplicate_label(self):
        with pytest.raises(ValueError, match="duplicate"):
            GroundTruthStates.from_pairs([(1, 1), (1, 2)])

    def test_centroid_bounds(self):
        gt = GroundTruthCentroids.from_pairs([(10.0, 20.0)])
        gt.validate_bounds(32, 32)
        with pytest.raises(ValueError, match="outside"):
            gt.validate_bounds(8, 8)


class TestLoadGroundTruth:
    def test_centroids(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("x,y\n12.5,40.0\n3,4\n")
        gt = load_ground_truth(p)
        assert isinstance(gt, GroundTruthCentroids)
        assert gt.points == ((12.5, 40.0), (3.0, 4.0))

    def test_states(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("label,state\n1,1\n2,2\n")
        gt = load_ground_truth(p)
        assert isinstance(gt, GroundTruthStates)
        assert gt.entries == ((1, 1), (2, 2))

    def test_header_only(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("x,y\n")
        gt = load_ground_truth(p)
        assert gt.points == ()

    def test_bad_state_value(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("label,state\n7,3\n")
        with pytest.raises(ValueError, match="state must be 1 or 2"):
            load_ground_truth(p)

    def test_unknown_header(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="unknown ground-truth header"):
            load_ground_truth(p)


class TestThresholdSweep:
    def test_separable_gap_midpoint(self):
        # state 1 above the gap (f > 1.0), state 2 below (f < 0.6)
        f = {1: 0.2, 2: 0.4, 3: 0.6, 4: 1.0, 5: 1.3, 6: 1.7}
        truth = GroundTruthStates.from_pairs(
            [(1, 2), (2, 2), (3, 2), (4, 1), (5, 1), (6, 1)])
        res = threshold_sweep(f, truth, (0.0, 2.0), steps=201)
        assert res.optimal_accuracy == 1.0
        # any threshold in [0.6, 1.0) scores 1.0: plateau midpoint near 0.8
        assert res.optimal_threshold == pytest.approx(0.795, abs=0.01)
        at = np.searchsorted(res.thresholds, res.optimal_threshold)
        assert res.accuracies[at - 1] == 1.0

    def test_single_truth_object_binary_accuracy(self):
        f = {1: 0.7}
        truth = GroundTruthStates.from_pairs([(1, 1)])
        res = threshold_sweep(f, truth, (0.0, 2.0), steps=21)
        assert set(np.unique(res.accuracies)) <= {0.0, 1.0}

    @pytest.mark.filterwarnings("ignore:.*maximal-accuracy plateaus.*")
    def test_accuracies_match_independent_confusion(self):
        rng = np.random.default_rng(3)
        f = {i: float(v) for i, v in enumerate(rng.uniform(0, 2, 50))}
        states = [(i, 2 if f[i] > 1.1 else 1) for i in f]
        rng.shuffle(states)
        truth = GroundTruthStates.from_pairs(states)
        res = threshold_sweep(f, truth, (0.0, 2.0), steps=41, positive_state=2)
        for t, a in zip(res.thresholds, res.accuracies):
            pairs = [((1 if f[i] > t else 2), s) for i, s in truth.entries]
            assert a == pytest.approx(brute_accuracy(pairs))

    def test_multiple_plateaus_warns_and_takes_lowest(self):
        f = {1: 0.5, 2: 1.5}
        truth = GroundTruthStates.from_pairs([(1, 1), (2, 2)])
        # truth is inverted relative to f, so accuracy is 0.5 at thresholds
        # inside (0.5, 1.5] and .5 outside... construct a genuine two-plateau
        # case instead: two objects where mid thresholds are wrong
        f = {1: 0.2, 2: 0.8, 3: 1.4}
        truth = GroundTruthStates.from_pairs([(1, 2), (2, 1), (3, 2)])
        with pytest.warns(UserWarning, match="plateaus"):
            res = threshold_sweep(f, truth, (0.0, 2.0), steps=21)
        assert res.n_plateaus > 1
        assert res.optimal_threshold < 0.8

    def test_validation(self):
        f = {1: 0.5, 2: 1.0}
        truth = GroundTruthStates.from_pairs([(1, 1), (2, 2)])
        with pytest.raises(ValueError, match="steps"):
            threshold_sweep(f, truth, (0.0, 2.0), steps=1)
        with pytest.raises(ValueError, match="lo < hi"):
            threshold_sweep(f, truth, (2.0, 0.0), steps=10)
        with pytest.raises(ValueError, match="no f value"):
            threshold_sweep({1: 0.5}, truth, (0.0, 2.0), steps=10)


class TestSampleLabels:
    def test_seeded_and_without_replacement(self):
        labels = list(range(100, 200))
        a = sample_labels(labels, 10, seed=4)
        b = sample_labels(labels, 10, seed=4)
        assert a == b
        assert len(set(a)) == 10
        assert sample_labels(labels, 10, seed=5) != a

    def test_too_many(self):
        with pytest.raises(ValueError):
            sample_labels([1, 2], 3, seed=0)


class TestCompareSegmenters:
    def params(self):
        return PipelineParams(background_size=25, median_size=3,
                              gaussian_radius=3.0, min_area=10, max_area=4000,
                              min_signal=0.05)

    def test_blank_image(self):
        img = RgbImage(np.zeros((48, 48, 3)))
        res = compare_segmenters(img, self.params())
        assert res.otsu_cc.n_objects == 0
        assert res.custom.n_objects == 0

    def test_naive_oversegments_noisy_image(self):
        sample = gaussian_blobs(width=160, height=160, n_blobs=12, seed=6)
        res = compare_segmenters(sample.image, self.params())
        assert res.naive_watershed.n_objects > res.custom.n_objects

    def test_clean_blobs_all_methods_agree(self):
        sample = gaussian_blobs(width=192, height=192, n_blobs=10, seed=7,
                                noise=False, gradient=0.0, touching_fraction=0.0,
                                radius_range=(6.0, 9.0))
        res = compare_segmenters(sample.image, self.params())
        assert res.custom.n_objects == 10
        assert res.otsu_cc.n_objects == 10
        assert res.naive_watershed.n_objects >= 10


class TestParamSweep:
    def test_best_point_minimizes_w(self):
        sample = gaussian_blobs(width=128, height=128, n_blobs=8, seed=8,
                                noise=False, gradient=0.0, touching_fraction=0.0,
                                radius_range=(5.0, 8.0))
        truth = GroundTruthCentroids.from_pairs(sample.centers)
        base = PipelineParams(background_size=25, median_size=3,
                              gaussian_radius=3.0, min_area=10, max_area=4000,
                              min_signal=0.05)
        res = segmentation_param_sweep(
            sample.image, base, {"min_area": [10, 400]}, truth, axis="y",
            n_bins=8)
        ws = dict((tuple(o.items()), w) for o, w in res.points)
        assert res.best_w == min(ws.values())
        # min_area 400 kills every blob, so the small setting must win
        assert res.best_overrides == {"min_area": 10}
