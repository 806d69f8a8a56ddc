#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Filtre Tasarımı Testleri
------------------------
Bu modül, Dirichlet çekirdeğini, taban fonksiyonlarını ve örnek/frekans alanı
katsayılarını test eder.
"""

import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_allclose

# Src dizinini Python yoluna ekle
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from errors import InvalidArgumentError
from kernels import (
    CENTERED, FilterParams, Velocity, apply_sample_domain, basis_g, design_entry, dirichlet,
    estimate_coeffs, freq_coeffs, freq_response, sample_coeffs, synthesis_indices,
    transform_coeffs, window_grid
)


def dirichlet_sum(a, A):
    """Simetrik kosinüs toplamı; A çiftse k yarım tamsayıdır"""
    k = np.arange(A) - (A - 1) / 2.0
    return np.mean(np.cos(2.0 * np.pi * np.multiply.outer(np.asarray(a, dtype=float), k)), axis=-1)


def translating_block(params, v, components, n=(40, 40, 20)):
    """Eşleşen hızla öteleme yapan kutu üstü kosinüslerin gecikme indeksli bloğu"""
    Mx, My, Mz = params.M
    mx, my, mz = window_grid(params)
    block = np.zeros(params.M)
    for kx, ky, phase in components:
        fx, fy = kx / Mx, ky / My
        fz = -v.vx * fx - v.vy * fy
        block += np.cos(2 * np.pi * (fx * (n[0] - mx) + fy * (n[1] - my) + fz * (n[2] - mz)) + phase)
    return block


class TestDirichlet(unittest.TestCase):
    """Periyodik sinc fonksiyonunu test eden sınıf"""

    def test_matches_cosine_sum(self):
        """Tekil olmayan noktalarda kosinüs toplamına eşitlik"""
        a = np.linspace(-1.3, 1.7, 41) + 0.013
        for A in (1, 4, 5, 7, 16):
            assert_allclose(dirichlet(a, A), dirichlet_sum(a, A), atol=1e-12)

    def test_singular_points(self):
        """Tamsayı noktalarda limit değerleri"""
        self.assertAlmostEqual(dirichlet(0.0, 7), 1.0)
        self.assertAlmostEqual(dirichlet(2.0, 7), 1.0)
        self.assertAlmostEqual(dirichlet(1.0, 4), -1.0)
        self.assertAlmostEqual(dirichlet(-3.0, 16), -1.0)
        self.assertAlmostEqual(dirichlet(2.0, 16), 1.0)
        assert_allclose(dirichlet(np.arange(-3, 4), 5), np.ones(7))

    def test_scalar_and_array(self):
        self.assertIsInstance(dirichlet(0.25, 5), float)
        self.assertEqual(dirichlet(np.zeros((2, 3)), 5).shape, (2, 3))

    def test_integer_shift_parity(self):
        """Tamsayı kaydırma: A çiftse (-1)^alpha işaret değişimi, A tekse değişmez"""
        a = np.array([-0.47, -0.2, 0.0, 0.031, 0.25, 0.5, 0.77])
        for A in range(2, 10):
            sign = -1.0 if A % 2 == 0 else 1.0
            for alpha in (1, 2, 3):
                expected = sign ** alpha * dirichlet(a, A)
                assert_allclose(dirichlet(a + alpha, A), expected, atol=1e-12)
                assert_allclose(dirichlet(a - alpha, A), expected, atol=1e-12)

    def test_invalid_degree(self):
        with self.assertRaises(InvalidArgumentError):
            dirichlet(0.5, 0)


class TestFilterParams(unittest.TestCase):
    """Filtre parametre doğrulamasını test eden sınıf"""

    def test_from_table(self):
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4, label="3D_SAT")
        self.assertEqual(params.M, (16, 16, 8))
        self.assertEqual(params.Msyn, (4, 4, 2))
        self.assertEqual(params.B, (3, 3, 4))
        self.assertEqual(params.W, (7, 7))
        self.assertEqual(params.total, 2048)
        self.assertTrue(params.temporal_full_band)
        self.assertFalse(params.is_2d)
        assert_allclose(params.delta, [7.5, 7.5, 3.5])

    def test_two_dimensional(self):
        params = FilterParams.from_table(32, 1, 8, 1, 6, 0)
        self.assertTrue(params.is_2d)
        self.assertEqual(synthesis_indices(params)[0], (12, 12, 0))

    def test_rejects_invalid(self):
        """W >= M, tek sentez uzunluğu, eş merkezli olmayan blok ve negatif bant"""
        cases = [
            dict(M=(8, 8, 4), Msyn=(2, 2, 2), B=(4, 4, 2)),
            dict(M=(16, 16, 8), Msyn=(3, 3, 2), B=(3, 3, 4)),
            dict(M=(15, 15, 8), Msyn=(4, 4, 2), B=(3, 3, 4)),
            dict(M=(16, 16, 8), Msyn=(4, 4, 2), B=(-1, 3, 4)),
            dict(M=(16, 16, 8), Msyn=(4, 4, 2), B=(3, 3, 5)),
            dict(M=(16, 16, 8), Msyn=(20, 4, 2), B=(3, 3, 4)),
        ]
        for case in cases:
            with self.assertRaises(InvalidArgumentError):
                FilterParams(**case)

    def test_centered_requires_odd(self):
        with self.assertRaises(InvalidArgumentError):
            FilterParams(M=(16, 16, 8), Msyn=(4, 4, 2), B=(3, 3, 4), indexing=CENTERED)
        params = FilterParams(M=(9, 9, 5), Msyn=(1, 1, 1), B=(2, 2, 2), indexing=CENTERED)
        assert_allclose(params.delta, [0.0, 0.0, 0.0])
        self.assertEqual(synthesis_indices(params), [(0, 0, 0)])

    def test_synthesis_indices(self):
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        indices = synthesis_indices(params)
        self.assertEqual(len(indices), 32)
        self.assertEqual(indices[0], (6, 6, 3))
        self.assertEqual(indices[-1], (9, 9, 4))


class TestCoefficients(unittest.TestCase):
    """Analiz denklemi ve katsayı tasarımını test eden sınıf"""

    def setUp(self):
        self.params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        self.v = Velocity(0.5, -0.25)

    def test_basis_norm(self):
        """Taban bileşenlerinin genliği 1/sqrt(M)"""
        mx, my, mz = window_grid(self.params)
        g = basis_g((mx, my, mz), 2 / 16, -1 / 16, self.v, self.params.M)
        assert_allclose(np.abs(g), 1.0 / np.sqrt(2048))
        self.assertIsInstance(basis_g((1, 2, 3), 0.1, 0.2, self.v, self.params.M), complex)

    def test_estimate_single_component(self):
        """Tek bileşenin gerçel kısmı iki eşlenik katsayıya ayrılır"""
        beta0 = 1.5 - 0.75j
        mx, my, mz = window_grid(self.params)
        block = np.real(beta0 * np.conj(basis_g((mx, my, mz), 1 / 16, 0.0, self.v, self.params.M)))
        coeffs = estimate_coeffs(block, self.v, self.params)
        self.assertEqual(coeffs.beta.shape, (7, 7))
        assert_allclose(coeffs.at(1, 0), beta0 / 2, atol=1e-9)
        assert_allclose(coeffs.at(-1, 0), np.conj(beta0) / 2, atol=1e-9)
        others = coeffs.beta.copy()
        others[4, 3] = 0
        others[2, 3] = 0
        assert_allclose(others, 0, atol=1e-9)
        with self.assertRaises(InvalidArgumentError):
            coeffs.at(4, 0)

    def test_estimate_matches_direct_sum(self):
        """Rastgele blokta katsayılar, taban fonksiyonlarıyla doğrudan toplama eşit"""
        rng = np.random.default_rng(11)
        block = rng.standard_normal(self.params.M)
        mx, my, mz = window_grid(self.params)
        coeffs = estimate_coeffs(block, self.v, self.params)
        for kx in range(-3, 4):
            for ky in range(-3, 4):
                g = basis_g((mx, my, mz), kx / 16, ky / 16, self.v, self.params.M)
                assert_allclose(coeffs.at(kx, ky), np.sum(g * block), atol=1e-9)

    def test_estimate_shape_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            estimate_coeffs(np.zeros((16, 16, 4)), self.v, self.params)

    def test_unit_dc_gain(self):
        """Katsayıların toplamı, her hız ve sentez noktası için 1"""
        for v in (Velocity(0, 0), Velocity(1.75, -0.5), Velocity(-0.3, 1.1)):
            for msyn in ((6, 6, 3), (9, 8, 4), (7.5, 7.5, 3.5)):
                self.assertAlmostEqual(float(np.sum(sample_coeffs(self.params, msyn, v))), 1.0,
                                       places=10)

    def test_zero_velocity_is_separable_in_time(self):
        """Sıfır hızda katsayılar zaman ekseninde sabittir"""
        H = sample_coeffs(self.params, (7, 7, 3), Velocity(0.0, 0.0))
        assert_allclose(H, np.repeat(H[:, :, :1], 8, axis=2), atol=1e-15)

    def test_annihilation_sample_domain(self):
        """Bant içi, eşleşen hızlı arka plan tam olarak öngörülür"""
        components = [(1, 0, 0.3), (2, -3, 1.1), (-3, 1, 2.0), (0, 2, -0.7)]
        for v in (Velocity(0.5, -0.25), Velocity(1.3, 0.7)):
            block = translating_block(self.params, v, components)
            for msyn in ((6, 6, 3), (9, 7, 4), (2, 13, 0)):
                H = sample_coeffs(self.params, msyn, v)
                self.assertAlmostEqual(apply_sample_domain(block, H), block[msyn], places=9)

    def test_apply_shape_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            apply_sample_domain(np.zeros((16, 16, 8)), np.zeros((16, 16, 4)))


class TestFrequencyResponse(unittest.TestCase):
    """Analitik frekans yanıtı ile DFT katsayıları arasındaki tutarlılık"""

    def test_freq_coeffs_match_dft(self):
        """Kenar indeksleme: kapalı biçimli katsayılar, H'nin birimsel DFT'sine eşit"""
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        for v, msyn in ((Velocity(0.5, -0.25), (6, 7, 3)), (Velocity(1.37, 0.61), (9, 9, 4))):
            H = sample_coeffs(params, msyn, v)
            assert_allclose(freq_coeffs(params, msyn, v), transform_coeffs(H, params), atol=1e-10)

    def test_freq_coeffs_centered(self):
        params = FilterParams(M=(9, 9, 5), Msyn=(1, 1, 1), B=(2, 2, 2), indexing=CENTERED)
        v = Velocity(-0.8, 0.45)
        H = sample_coeffs(params, (0, 0, 0), v)
        assert_allclose(freq_coeffs(params, (0, 0, 0), v), transform_coeffs(H, params), atol=1e-10)

    def test_zero_velocity_closed_form(self):
        """v = 0: bant içinde genlik 1/sqrt(M) ve yalnızca kz = 0, bant dışında sıfır"""
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        msyn = (6, 7, 3)
        Hf = freq_coeffs(params, msyn, Velocity(0.0, 0.0))
        expected = np.zeros((16, 16, 8), dtype=complex)
        for kx in range(-3, 4):
            for ky in range(-3, 4):
                phase = np.exp(-2j * np.pi * (kx * msyn[0] + ky * msyn[1]) / 16)
                expected[kx % 16, ky % 16, 0] = phase / np.sqrt(2048)
        assert_allclose(Hf, expected, atol=1e-12)

    def test_centered_origin_is_real(self):
        """Merkezli tek boyutlu pencerede m̂ = 0 için yanıt gerçeldir"""
        params = FilterParams(M=(9, 9, 5), Msyn=(1, 1, 1), B=(2, 2, 2), indexing=CENTERED)
        Hf = freq_coeffs(params, (0, 0, 0), Velocity(-0.8, 0.45))
        self.assertGreater(np.max(np.abs(Hf.real)), 1e-3)
        assert_allclose(Hf.imag, 0.0, atol=1e-12)

    def test_linear_phase_at_window_center(self):
        """Pencere merkezinde sentez: faz kaydırması sonrası yanıt gerçel"""
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        v = Velocity(0.75, -1.25)
        freqs = [(0.031, -0.07, 0.11), (0.2, 0.013, -0.4), (-0.33, 0.41, 0.27)]
        center = (7.5, 7.5, 3.5)
        for f in freqs:
            shifted = freq_response(f, params, center, v) * np.exp(
                2j * np.pi * (f[0] * center[0] + f[1] * center[1] + f[2] * center[2]))
            self.assertLess(abs(shifted.imag), 1e-10)

        off = (9, 9, 4)
        worst = max(abs((freq_response(f, params, off, v) * np.exp(
            2j * np.pi * (f[0] * off[0] + f[1] * off[1] + f[2] * off[2]))).imag) for f in freqs)
        self.assertGreater(worst, 1e-6)

    def test_response_is_dtft(self):
        """Kutular arası frekanslarda Q(f) = DTFT(H)/sqrt(M)"""
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        v = Velocity(0.75, -1.25)
        msyn = (8, 6, 4)
        H = sample_coeffs(params, msyn, v)
        mx, my, mz = window_grid(params)
        for f in ((0.031, -0.07, 0.11), (0.2, 0.013, -0.4)):
            dtft = np.sum(H * np.exp(-2j * np.pi * (f[0] * mx + f[1] * my + f[2] * mz)))
            assert_allclose(freq_response(f, params, msyn, v), dtft / np.sqrt(2048), atol=1e-10)

    def test_response_broadcasts(self):
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        fx = np.linspace(-0.5, 0.5, 5)[:, None]
        fy = np.linspace(-0.5, 0.5, 3)[None, :]
        out = freq_response((fx, fy, 0.0), params, (7, 7, 3), Velocity(0, 0))
        self.assertEqual(out.shape, (5, 3))
        self.assertIsInstance(freq_response((0.0, 0.0, 0.0), params, (7, 7, 3), Velocity(0, 0)),
                              complex)

    def test_design_entry(self):
        params = FilterParams.from_table(16, 8, 4, 2, 3, 4)
        entry = design_entry(params, (6, 6, 3), Velocity(1, 0.5))
        self.assertEqual(entry.msyn_origin, (6, 6, 3))
        self.assertEqual(entry.H.shape, (16, 16, 8))
        assert_allclose(entry.Hf, transform_coeffs(entry.H, params), atol=1e-10)


if __name__ == "__main__":
    unittest.main()
