import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from qnet.datasets import (BINARY, GRAYSCALE, ImageDataset, generate_dataset, load_dataset, load_images,
                           save_dataset, save_images)
from qnet.exceptions import MalformedFile, MissingArtifact, Unsatisfiable, UnsupportedFormat


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()


class GenerateDatasetTestCase(SimpleTestCase):
    def test_deterministic_per_seed(self):
        first = generate_dataset(25, 4, seed=42)
        second = generate_dataset(25, 4, seed=42)
        assert_array_equal(first.pixels, second.pixels)
        self.assertEqual(first.M, 25)
        self.assertEqual(first.N, 16)

    def test_binary_images_are_distinct_and_nonzero(self):
        pixels = generate_dataset(25, 4, seed=42).pixels
        self.assertTrue(np.all((pixels == 0) | (pixels == 1)))
        self.assertTrue(np.all(pixels.sum(axis=1) > 0))
        self.assertEqual(len({row.tobytes() for row in pixels}), 25)

    def test_single_small_image(self):
        dataset = generate_dataset(1, 2, seed=3)
        self.assertEqual(dataset.pixels.shape, (1, 4))
        self.assertGreater(dataset.pixels.sum(), 0)

    def test_pigeonhole(self):
        with self.assertRaises(Unsatisfiable) as cm:
            generate_dataset(16, 2, seed=1)
        self.assertEqual(cm.exception.exit_code, 21)

    def test_every_nonzero_image_fits(self):
        self.assertEqual(generate_dataset(15, 2, seed=1).M, 15)

    def test_grayscale(self):
        dataset = generate_dataset(5, 4, seed=2, kind=GRAYSCALE)
        self.assertEqual(dataset.kind, GRAYSCALE)
        self.assertTrue(np.all((dataset.pixels >= 0) & (dataset.pixels <= 1)))

    def test_side_must_fill_register(self):
        with self.assertRaises(ValidationError):
            generate_dataset(2, 3, seed=1)

    def test_sum_sq_kept(self):
        dataset = generate_dataset(5, 4, seed=4)
        assert_array_equal(dataset.sum_sq, np.sum(dataset.pixels ** 2, axis=1))
        self.assertEqual(dataset.states.shape, (16, 5))


class ImageDatasetTestCase(SimpleTestCase):
    def test_rejects_out_of_range_pixels(self):
        with self.assertRaises(ValidationError):
            ImageDataset.from_pixels(np.full((1, 4), 2.0))

    def test_rejects_non_square_rows(self):
        with self.assertRaises(ValidationError):
            ImageDataset.from_pixels(np.ones((1, 8)))

    def test_manifest_sum_sq_is_used(self):
        dataset = ImageDataset.from_pixels(np.ones((1, 4)), sum_sq=[9.0])
        self.assertEqual(dataset.sum_sq.tolist(), [9.0])

    def test_rejects_bad_manifest_sums(self):
        with self.assertRaises(MalformedFile):
            ImageDataset.from_pixels(np.ones((2, 4)), sum_sq=[1.0])


class ImageFileTestCase(TempDirMixin, SimpleTestCase):
    def test_pbm_roundtrip(self):
        dataset = generate_dataset(6, 4, seed=5)
        files = save_images(dataset, self.tmp, 'pbm')
        self.assertEqual(len(files), 6)
        self.assertEqual(files[0].name, 'sample_000.pbm')
        assert_array_equal(load_images(self.tmp, 'pbm'), dataset.pixels)

    def test_pgm_quantizes(self):
        pixels = np.random.default_rng(6).uniform(size=(3, 16))
        save_images(pixels, self.tmp, 'pgm')
        loaded = load_images(self.tmp, 'pgm')
        self.assertLessEqual(np.max(np.abs(loaded - pixels)), 0.5 / 255 + 1e-12)

    def test_csv_is_lossless(self):
        pixels = np.random.default_rng(7).uniform(size=(4, 16))
        save_images(pixels, self.tmp, 'csv')
        self.assertEqual(np.max(np.abs(load_images(self.tmp) - pixels)), 0.0)

    def test_pbm_refuses_grayscale(self):
        with self.assertRaises(UnsupportedFormat):
            save_images(np.full((1, 4), 0.5), self.tmp, 'pbm')

    def test_unknown_format(self):
        with self.assertRaises(UnsupportedFormat) as cm:
            save_images(np.ones((1, 4)), self.tmp, 'png')
        self.assertEqual(cm.exception.exit_code, 31)

    def test_truncated_pgm(self):
        target = self.tmp / 'broken.pgm'
        target.write_bytes(b'P5\n4 4\n255\n\x00\x01')
        with self.assertRaises(MalformedFile) as cm:
            load_images(target, 'pgm')
        self.assertEqual(cm.exception.exit_code, 30)

    def test_malformed_csv(self):
        target = self.tmp / 'images.csv'
        target.write_text('0,1,1,0\n1,0\n')
        with self.assertRaises(MalformedFile):
            load_images(target)

    def test_missing_path(self):
        with self.assertRaisesMessage(MissingArtifact, 'nowhere'):
            load_images(self.tmp / 'nowhere')


class DatasetDirectoryTestCase(TempDirMixin, SimpleTestCase):
    def test_roundtrip_with_manifest(self):
        dataset = generate_dataset(8, 4, seed=9)
        save_dataset(dataset, self.tmp, 'pbm')
        self.assertTrue((self.tmp / 'manifest.json').exists())
        self.assertTrue((self.tmp / 'images.csv').exists())
        self.assertTrue((self.tmp / 'sample_007.pbm').exists())

        loaded = load_dataset(self.tmp)
        assert_array_equal(loaded.pixels, dataset.pixels)
        assert_array_equal(loaded.sum_sq, dataset.sum_sq)
        self.assertEqual(loaded.kind, BINARY)
        self.assertEqual(loaded.seed, 9)

    def test_manifest_must_match_images(self):
        save_dataset(generate_dataset(4, 4, seed=1), self.tmp)
        np.savetxt(self.tmp / 'images.csv', np.ones((3, 16)), delimiter=',')
        with self.assertRaises(MalformedFile):
            load_dataset(self.tmp)

    def test_bare_image_directory(self):
        dataset = generate_dataset(3, 4, seed=2)
        save_images(dataset, self.tmp, 'pbm')
        loaded = load_dataset(self.tmp)
        assert_array_equal(loaded.pixels, dataset.pixels)
        self.assertEqual(loaded.kind, BINARY)

    def test_missing_dataset(self):
        with self.assertRaises(MissingArtifact):
            load_dataset(self.tmp / 'absent')
