#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Başarım Ölçütleri Testleri
--------------------------
Bu modül, SCR, RMS hız hatası, rapor tabloları ve kazanç eğrilerini test eder.
"""

import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_allclose

# Src dizinini Python yoluna ekle
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

import metrics
import engine
from engine import ImageSequence
from errors import InvalidArgumentError
from kernels import FilterParams, Velocity, freq_response
from scenesim import TargetTrajectory
from velocity import VelocityField


def fixed_trajectory(frames, center):
    return TargetTrajectory(centers=np.tile(center, (frames, 1)), radius=12.0,
                            tangential_speed=0.0, start_angle=0.0, psf_sigma=1.0,
                            psf_cutoff=2.0, amplitude=1.0)


class TestSCR(unittest.TestCase):
    """Sinyal/kargaşa oranını test eden sınıf"""

    def setUp(self):
        data = np.ones((3, 16, 16))
        data[:, 6:8, 5:7] = 3.0
        self.seq = ImageSequence(data=data)
        self.trajectory = fixed_trajectory(3, (5.3, 6.7))

    def test_ratio(self):
        # pay 9, payda (252 + 4 * 9) / 256
        self.assertAlmostEqual(metrics.scr_ratio(self.seq, self.trajectory), 8.0)
        self.assertAlmostEqual(metrics.scr(self.seq, self.trajectory), 10 * np.log10(8.0))

    def test_masked_frames_skipped(self):
        mask = np.ones(self.seq.data.shape, dtype=bool)
        mask[0, 7, 6] = False
        seq = ImageSequence(data=self.seq.data.copy(), mask=mask)
        seq.data[0, 6:8, 5:7] = 100.0
        seq.data[0, 7, 6] = 3.0
        # Yalnızca 1 ve 2 numaralı kareler paya katılır
        numerator = 9.0
        denominator = np.mean(seq.data[mask] ** 2)
        self.assertAlmostEqual(metrics.scr_ratio(seq, self.trajectory), numerator / denominator)

    def test_errors(self):
        with self.assertRaises(InvalidArgumentError):
            metrics.scr_ratio(self.seq, self.trajectory, mask=np.zeros((3, 16, 16), dtype=bool))
        with self.assertRaises(InvalidArgumentError):
            metrics.scr_ratio(self.seq, fixed_trajectory(3, (40.0, 3.0)))
        with self.assertRaises(InvalidArgumentError):
            metrics.scr_ratio(self.seq, fixed_trajectory(2, (5.3, 6.7)))

    def test_db_limits(self):
        self.assertEqual(metrics.to_db(0.0), metrics.SCR_FLOOR_DB)
        self.assertEqual(metrics.to_db(np.inf), metrics.SCR_CEILING_DB)
        self.assertEqual(metrics.to_db(1e30), metrics.SCR_CEILING_DB)
        self.assertAlmostEqual(metrics.to_db(10.0), 10.0)

    def test_zero_clutter(self):
        data = np.zeros((1, 8, 8))
        data[0, 2:4, 2:4] = 1.0
        seq = ImageSequence(data=data)
        mask = np.zeros(data.shape, dtype=bool)
        mask[0, 2:4, 2:4] = True
        mask[0, 6, 6] = True
        trajectory = fixed_trajectory(1, (2.5, 2.5))
        self.assertAlmostEqual(metrics.scr(seq, trajectory, mask), 10 * np.log10(5 / 4))
        self.assertEqual(metrics.to_db(metrics.scr_ratio(ImageSequence(data=np.zeros((1, 8, 8))),
                                                         trajectory)), metrics.SCR_FLOOR_DB)

    def test_intensity_scale_invariance(self):
        rng = np.random.default_rng(11)
        data = rng.normal(size=(3, 16, 16))
        ratio = metrics.scr_ratio(ImageSequence(data=data), self.trajectory)
        for scale in (0.01, -3.0, 250.0):
            scaled = metrics.scr_ratio(ImageSequence(data=scale * data), self.trajectory)
            self.assertAlmostEqual(scaled / ratio, 1.0, places=10)

    def test_aggregate(self):
        self.assertAlmostEqual(metrics.aggregate_scr_db([1.0, 3.0]), 10 * np.log10(2.0))
        with self.assertRaises(InvalidArgumentError):
            metrics.aggregate_scr_db([])


class TestVelocityError(unittest.TestCase):

    def test_rms(self):
        shape = (2, 4, 4)
        truth = VelocityField.constant(shape, Velocity(1.0, 0.0))
        pred = VelocityField.constant(shape, Velocity(1.0, 1.0))
        self.assertEqual(metrics.velocity_error_sums(pred, truth), (32.0, 32))
        self.assertAlmostEqual(metrics.rms_velocity_error(pred, truth), 1.0)

    def test_masked_pixels_ignored(self):
        shape = (1, 2, 2)
        truth = VelocityField.constant(shape, Velocity(0.0, 0.0))
        mask = np.array([[[True, False], [False, False]]])
        pred = VelocityField(vx=np.full(shape, 3.0), vy=np.full(shape, 4.0), mask=mask)
        self.assertAlmostEqual(metrics.rms_velocity_error(pred, truth), 5.0)

    def test_errors(self):
        truth = VelocityField.constant((1, 2, 2), Velocity(0.0, 0.0))
        with self.assertRaises(InvalidArgumentError):
            metrics.rms_velocity_error(VelocityField.empty((1, 2, 2)), truth)
        with self.assertRaises(InvalidArgumentError):
            metrics.rms_velocity_error(VelocityField.empty((1, 2, 3)), truth)

    def test_block_center_truth(self):
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        layout = engine.make_layout((32, 32, 8), params)
        z, y, x = np.meshgrid(np.arange(8), np.arange(32), np.arange(32), indexing="ij")
        truth = VelocityField(vx=x.astype(float), vy=0.5 * y, mask=np.ones((8, 32, 32), dtype=bool))
        out = metrics.block_center_truth(truth, layout)
        # İlk bloğun analiz merkezi (7.5, 7.5), sentez bloğu 6..9
        assert_allclose(out.vx[3:5, 6:10, 6:10], 7.5)
        assert_allclose(out.vy[3:5, 6:10, 6:10], 3.75)
        self.assertAlmostEqual(out.vx[3, 6, 10], 11.5)
        # Kapsam dışı değişmez
        self.assertEqual(out.vx[0, 0, 0], 0.0)
        self.assertEqual(out.vx[3, 3, 31], 31.0)
        assert_allclose(truth.vx[3, 6, 6:10], [6, 7, 8, 9])

        truth.mask[3:5, 7:9, 7:9] = False
        out = metrics.block_center_truth(truth, layout)
        self.assertFalse(out.mask[3:5, 6:10, 6:10].any())
        self.assertTrue(out.mask[3:5, 6:10, 10:14].all())
        with self.assertRaises(InvalidArgumentError):
            metrics.block_center_truth(VelocityField.empty((8, 32, 16)), layout)


class TestReport(unittest.TestCase):
    """Veri kümesi başına ve toplu rapor satırları"""

    def test_aggregates(self):
        rows = [
            metrics.DatasetMetrics("tf_0001", "TF", 1, scr_ratio=1.0, error_sum=4.0, error_count=1),
            metrics.DatasetMetrics("tf_0002", "TF", 2, scr_ratio=3.0, error_sum=0.0, error_count=1),
        ]
        report = metrics.build_report(rows, "3D_SAT")
        self.assertAlmostEqual(report.aggregate_scr_db, 10 * np.log10(2.0))
        # Havuzlanmış RMS, küme RMS'lerinin ortalamasından (1.0) farklıdır
        self.assertAlmostEqual(report.aggregate_rms, np.sqrt(2.0))
        self.assertAlmostEqual(rows[0].rms_velocity_error, 2.0)

        frame = report.to_frame()
        self.assertEqual(list(frame.columns), metrics.REPORT_COLUMNS)
        self.assertEqual(len(frame), 3)
        last = frame.iloc[-1]
        self.assertEqual(last["dataset"], metrics.AGGREGATE_ROW)
        self.assertEqual(last["seed"], -1)
        self.assertEqual(last["scenario"], "")
        self.assertAlmostEqual(last["rms_velocity_error"], np.sqrt(2.0))

    def test_missing_values(self):
        report = metrics.MetricsReport("RAW", [metrics.DatasetMetrics("tu_0001", "TU", 1)])
        self.assertIsNone(report.aggregate_scr_db)
        self.assertIsNone(report.aggregate_rms)
        frame = report.to_frame()
        self.assertTrue(np.isnan(frame["scr_db"]).all())

    def test_empty(self):
        frame = metrics.MetricsReport("RAW").to_frame()
        self.assertEqual(len(frame), 0)
        self.assertEqual(list(frame.columns), metrics.REPORT_COLUMNS)


class TestGainCurve(unittest.TestCase):
    """Öngörü hatası filtresinin kuramsal kazancı"""

    def setUp(self):
        self.params = FilterParams.from_table(16, 8, 4, 2, 3, 4)

    def test_matched_on_bin_is_cancelled(self):
        v = Velocity(0.75, 0.5)
        E = metrics.pef_error_response(self.params, (8, 8, 4), v, np.array([1 / 16, 3 / 16]),
                                       np.array([-2 / 16]), v)
        self.assertEqual(E.shape, (2, 1))
        assert_allclose(E, 0.0, atol=1e-9)

    def test_consistent_with_frequency_response(self):
        """1 - E = sqrt(M) * Q(f) * exp(j2pi f.m̂)"""
        v_filter = Velocity(1.0, -0.5)
        v_input = Velocity(0.4, 0.9)
        msyn = (9, 6, 3)
        fx = np.array([0.021, -0.13])
        fy = np.array([0.07, 0.18, -0.3])
        E = metrics.pef_error_response(self.params, msyn, v_filter, fx, fy, v_input)
        FX, FY = np.meshgrid(fx, fy, indexing="ij")
        FZ = -v_input.vx * FX - v_input.vy * FY
        Q = freq_response((FX, FY, FZ), self.params, msyn, v_filter)
        phase = np.exp(2j * np.pi * (FX * msyn[0] + FY * msyn[1] + FZ * msyn[2]))
        assert_allclose(1.0 - E, np.sqrt(2048) * Q * phase, atol=1e-10)

    def test_band_grid(self):
        fx, fy = metrics.band_grid(self.params, metrics.CLUTTER, oversample=2)
        self.assertEqual(fx.size, 13)
        self.assertAlmostEqual(fx.max(), 3 / 16)
        fx, _ = metrics.band_grid(self.params, metrics.TARGET, oversample=2)
        self.assertAlmostEqual(fx.max(), 4 / 16)
        with self.assertRaises(InvalidArgumentError):
            metrics.band_grid(self.params, "noise")

    def test_mismatch_reduces_attenuation(self):
        v = Velocity(1.0, 0.0)
        curve = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.CLUTTER, metrics.ANGLE,
                                   [0.0, 90.0], oversample=4)
        self.assertEqual(list(curve.columns), ["mismatch", "gain_db"])
        self.assertLess(curve["gain_db"][0], curve["gain_db"][1])
        target = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.TARGET, metrics.ANGLE,
                                    [0.0], oversample=4)
        self.assertGreater(target["gain_db"][0], curve["gain_db"][0])

    def test_sweeps_agree_at_zero(self):
        v = Velocity(0.5, 0.5)
        msyn_set = [(8, 8, 4), (9, 9, 4)]
        angle = metrics.gain_curve(self.params, msyn_set, v, metrics.CLUTTER, metrics.ANGLE, [0.0],
                                   oversample=2)
        speed = metrics.gain_curve(self.params, msyn_set, v, metrics.CLUTTER, metrics.SPEED, [0.0],
                                   oversample=2)
        assert_allclose(angle["gain_db"], speed["gain_db"])
        with self.assertRaises(InvalidArgumentError):
            metrics.gain_curve(self.params, msyn_set, v, metrics.CLUTTER, "phase", [0.0])

    def test_pointwise_matches_grid(self):
        v_filter = Velocity(1.0, 0.0)
        v_input = Velocity(0.7, 0.3)
        fx = np.array([-0.1, 0.02, 0.15])
        fy = np.array([0.05, -0.12])
        grid = metrics.pef_error_response(self.params, (8, 8, 4), v_filter, fx, fy, v_input)
        FX, FY = np.meshgrid(fx, fy, indexing="ij")
        points = metrics.pef_error_at(self.params, (8, 8, 4), v_filter, FX, FY, v_input)
        assert_allclose(points, grid.ravel(), atol=1e-12)

    def test_passage_grid(self):
        fx, fy, group = metrics.passage_grid(self.params, metrics.CLUTTER, Velocity(0.0, 0.0),
                                             oversample=2)
        self.assertEqual(fx.size, 169)
        self.assertTrue(np.all(group == 0))
        fx, fy, group = metrics.passage_grid(self.params, metrics.CLUTTER,
                                             Velocity(np.cos(0.3), np.sin(0.3)), oversample=4)
        self.assertTrue(np.all(np.abs(fx) <= 3 / 16 + 1e-12))
        self.assertTrue(np.all(np.abs(fy) <= 3 / 16 + 1e-12))
        self.assertGreater(np.unique(group).size, 1)
        # Aynı gruptaki noktaların hareket yönündeki izdüşümü ortaktır
        along = fx * np.cos(0.3) + fy * np.sin(0.3)
        for g in np.unique(group):
            self.assertLess(np.ptp(along[group == g]), 1e-12)

    def test_clutter_attenuation_by_synthesis_sample(self):
        v = Velocity(1.0, 0.0)
        gains = {
            m: metrics.gain_curve(self.params, [(m, m, 4)], v, metrics.CLUTTER, metrics.ANGLE,
                                  [0.0], oversample=4)["gain_db"][0]
            for m in (8, 9, 11, 13)
        }
        for m in (8, 9):
            self.assertGreater(-gains[m], 26.0)
            self.assertLess(-gains[m], 32.0)
        self.assertLess(abs(gains[8] - gains[9]), 1.0)
        self.assertLess(abs(gains[11] - gains[8]), 3.0)
        loss = gains[13] - gains[8]
        self.assertGreater(loss, 11.5)
        self.assertLess(loss, 18.0)

    def test_clutter_attenuation_under_mismatch(self):
        v = Velocity(1.0, 0.0)
        matched = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.CLUTTER, metrics.ANGLE,
                                     [0.0], oversample=4)["gain_db"][0]
        angle = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.CLUTTER, metrics.ANGLE,
                                   [15.0, 90.0], oversample=4)["gain_db"]
        speed = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.CLUTTER, metrics.SPEED,
                                   [-0.25, 0.25], oversample=4)["gain_db"]
        for gain in speed:
            self.assertGreater(-gain, 15.0)
            self.assertLess(-gain, 21.0)
        self.assertGreater(-angle[0], 18.0)
        self.assertLess(-angle[0], 24.0)
        self.assertGreater(angle[0] - matched, 3.0)
        self.assertGreater(angle[1], -5.0)

    def test_target_attenuation(self):
        v = Velocity(1.0, 0.0)
        curve = metrics.gain_curve(self.params, [(8, 8, 4), (9, 9, 4)], v, metrics.TARGET,
                                   metrics.ANGLE, [0.0, 90.0, 180.0], oversample=4)
        matched, orthogonal, opposite = curve["gain_db"]
        self.assertGreater(-matched, 6.0)
        self.assertLess(-matched, 10.0)
        self.assertLess(-orthogonal, 3.0)
        self.assertLess(-opposite, 3.0)
        self.assertGreater(-orthogonal, -1.0)

    def test_stationary_input(self):
        v = Velocity(1.0, 0.0)
        curve = metrics.gain_curve(self.params, [(8, 8, 4)], v, metrics.CLUTTER, metrics.SPEED,
                                   [-1.0], oversample=2)
        self.assertTrue(np.isfinite(curve["gain_db"][0]))


if __name__ == "__main__":
    unittest.main()
