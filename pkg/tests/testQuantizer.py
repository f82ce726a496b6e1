"""Тесты для пакета quantizer: схемы, кодирование, CR и формат провода."""
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
from quantizer import (QuantKind, QuantScheme, compression_rate, dequantize, from_bytes, half_scheme, int4_scheme,
                       int8_scheme, parse_scheme, quantize, roundtrip_fidelity, to_bytes)
from quantizer.codec import _codes
from tensors import DenseTensor, Precision, fidelity, round_to_half


def gaussian(seed, n=1 << 14):
    return DenseTensor.from_array(np.random.default_rng(seed).standard_normal(n), ["x"])


def gaussian_complex(seed, n=1 << 13):
    rng = np.random.default_rng(seed)
    return DenseTensor.from_array(rng.standard_normal(n) + 1j * rng.standard_normal(n), ["x"])


class TestScheme(unittest.TestCase):
    def test_presets(self):
        self.assertEqual((half_scheme().q_min, half_scheme().q_max, half_scheme().group), (-6.65e4, 6.65e4, None))
        self.assertFalse(half_scheme().round)
        self.assertEqual((int8_scheme().q_min, int8_scheme().q_max, int8_scheme().exp), (-128, 127, 0.2))
        self.assertEqual((int4_scheme().q_min, int4_scheme().q_max, int4_scheme().group), (0, 15, 128))

    def test_parse(self):
        cases = {
            "none": None,
            "": None,
            "half": "half",
            "INT8": "int8",
            "int4": "int4:128",
            "int4:64": "int4:64",
        }
        for text, name in cases.items():
            with self.subTest(text=text):
                s = parse_scheme(text)
                self.assertEqual(None if s is None else s.name, name)
        self.assertIsNone(parse_scheme(None))

    def test_parse_errors(self):
        for text in ("int2", "int4:", "int4:0", "float"):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    parse_scheme(text)

    def test_invalid_scheme(self):
        with self.assertRaises(ValueError):
            QuantScheme(QuantKind.INT8, 5, 5)
        with self.assertRaises(ValueError):
            QuantScheme(QuantKind.INT4, -1, 15)
        with self.assertRaises(ValueError):
            QuantScheme(QuantKind.INT8, -128, 127, exp=0)


class TestQuantize(unittest.TestCase):
    def test_int4_exact_group(self):
        t = DenseTensor.from_array(np.array([0.0, 15.0]), ["x"])
        q = quantize(t, int4_scheme(2))
        np.testing.assert_array_equal(_codes(q), [0, 15])
        np.testing.assert_allclose(q.scales, [1.0])
        np.testing.assert_allclose(q.zeros, [0.0])
        np.testing.assert_allclose(dequantize(q).data, [0.0, 15.0])

    def test_int8_extremes(self):
        t = DenseTensor.from_array(np.array([-1.0, 1.0]), ["x"])
        q = quantize(t, int8_scheme())
        np.testing.assert_array_equal(_codes(q), [-128, 127])
        np.testing.assert_allclose(q.scales, [127.5])
        np.testing.assert_allclose(q.zeros, [-0.5])

    def test_constant_tensor_exact(self):
        t = DenseTensor.from_array(np.full(4, 0.75), ["x"])
        for scheme in (int8_scheme(), int4_scheme(), int4_scheme(2)):
            with self.subTest(scheme=scheme.name):
                q = quantize(t, scheme)
                np.testing.assert_array_equal(_codes(q), [scheme.q_min] * 4)
                np.testing.assert_array_equal(dequantize(q).data, t.data)
                self.assertAlmostEqual(roundtrip_fidelity(t, scheme), 1.0, places=12)

    def test_tiny_span_group(self):
        t = DenseTensor.from_array(np.array([0.0, 1e-39, -1.0, 1.0]), ["x"])
        for scheme in (int4_scheme(2), QuantScheme(QuantKind.INT8, -128, 127, exp=1.0, group=2)):
            with self.subTest(scheme=scheme.name):
                q = quantize(t, scheme)
                self.assertTrue(np.all(np.isfinite(q.scales)) and np.all(np.isfinite(q.zeros)))
                self.assertEqual(q.scales[0], 0.0)
                codes = _codes(q)
                self.assertTrue(np.all(codes >= scheme.q_min) and np.all(codes <= scheme.q_max))
                out = dequantize(q).data
                self.assertTrue(np.all(np.isfinite(out)))
                np.testing.assert_allclose(out[:2], [0.0, 0.0], rtol=0, atol=1e-30)
                np.testing.assert_allclose(out[2:], [-1.0, 1.0], atol=0.1)

    def test_half_is_rounding(self):
        t = gaussian(0, 1000)
        np.testing.assert_array_equal(dequantize(quantize(t, half_scheme())).data, round_to_half(t.data))

    def test_codes_in_range(self):
        for scheme in (int8_scheme(), int4_scheme(), int4_scheme(7)):
            with self.subTest(scheme=scheme.name):
                codes = _codes(quantize(gaussian(1, 999), scheme))
                self.assertTrue(np.all(codes >= scheme.q_min) and np.all(codes <= scheme.q_max))

    def test_shape_and_modes_kept(self):
        t = DenseTensor.from_array(np.arange(24, dtype=complex).reshape(2, 3, 4) * (1 + 1j), ["a", "b", "c"])
        out = dequantize(quantize(t, int4_scheme(16)))
        self.assertEqual(out.labels, ("a", "b", "c"))
        self.assertEqual(out.shape, (2, 3, 4))
        self.assertFalse(out.is_real)

    def test_nonfinite_rejected(self):
        t = DenseTensor.from_array(np.array([1.0, np.nan]), ["x"])
        with self.assertRaises(ValueError):
            quantize(t, int8_scheme())

    def test_idempotent(self):
        for scheme in (half_scheme(), int4_scheme()):
            with self.subTest(scheme=scheme.name):
                q = quantize(gaussian_complex(2, 512), scheme)
                again = quantize(dequantize(q), scheme)
                self.assertEqual(again.payload, q.payload)

    def test_sign_symmetry(self):
        scheme = QuantScheme(QuantKind.INT8, -127, 127, exp=1.0)
        t = gaussian(3, 1024)
        neg = DenseTensor(t.modes, -t.data, t.precision)
        np.testing.assert_allclose(dequantize(quantize(neg, scheme)).data,
                                   -dequantize(quantize(t, scheme)).data, rtol=0, atol=1e-12)

    def test_corrupt_payload(self):
        q = quantize(gaussian(4, 256), int4_scheme())
        broken = from_bytes(to_bytes(q)[:-3])
        with self.assertRaises(ValueError):
            dequantize(broken)
        with self.assertRaises(ValueError):
            from_bytes(b"\x00\x01")


class TestCompressionRate(unittest.TestCase):
    def test_rates(self):
        n = 1 << 16
        t = gaussian(5, n)
        self.assertAlmostEqual(compression_rate(quantize(t, half_scheme())), 100 * (2 * n + 8) / (4 * n))
        self.assertAlmostEqual(compression_rate(quantize(t, int8_scheme())), 100 * (n + 8) / (4 * n))
        self.assertEqual(compression_rate(quantize(t, int4_scheme())), 14.0625)

    def test_rate_independent_of_values(self):
        a = compression_rate(quantize(gaussian(6, 4096), int4_scheme(64)))
        b = compression_rate(quantize(DenseTensor.from_array(np.zeros(4096), ["x"]), int4_scheme(64)))
        self.assertEqual(a, b)

    def test_complex_counts_both_parts(self):
        q = quantize(gaussian_complex(7, 1024), int4_scheme())
        self.assertEqual(q.n_real, 2048)
        self.assertEqual(q.n_groups, 16)
        self.assertEqual(compression_rate(q), 14.0625)


class TestFidelity(unittest.TestCase):
    def test_int4_floor(self):
        for seed in range(20):
            with self.subTest(seed=seed):
                self.assertGreaterEqual(roundtrip_fidelity(gaussian(seed), int4_scheme()), 0.95)

    def test_smaller_groups_better(self):
        wins = sum(roundtrip_fidelity(gaussian(seed), int4_scheme(64))
                   >= roundtrip_fidelity(gaussian(seed), int4_scheme(256)) for seed in range(50))
        self.assertGreaterEqual(wins, 40)

    def test_representable_half(self):
        t = DenseTensor.from_array(np.array([0.5, -2.0, 1024.0, 0.0]), ["x"])
        self.assertAlmostEqual(roundtrip_fidelity(t, half_scheme()), 1.0, places=12)


class TestWireFormat(unittest.TestCase):
    def test_bytes_roundtrip(self):
        t = gaussian_complex(8, 300).astype(Precision.CHALF)
        q = quantize(t, int4_scheme())
        back = from_bytes(to_bytes(q), t.labels)
        self.assertEqual(back.scheme, q.scheme)
        self.assertEqual(back.shape, q.shape)
        self.assertEqual(back.payload, q.payload)
        self.assertIs(back.precision, Precision.CHALF)
        np.testing.assert_array_equal(dequantize(back).data, dequantize(q).data)

    def test_header_not_in_rate(self):
        q = quantize(gaussian(9, 1024), int4_scheme())
        self.assertGreater(len(to_bytes(q)), q.nbytes)
        self.assertAlmostEqual(fidelity(dequantize(from_bytes(to_bytes(q), ["x"])), dequantize(q)), 1.0, places=12)


if __name__ == '__main__':
    unittest.main(verbosity=2)
