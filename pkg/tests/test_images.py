"""
Tests for PGM I/O and the toy texture corpus.
"""
import numpy as np
import pytest

from numerics.errors import InputError
from pipeline.images import decode_pgm, encode_pgm, load_corpus, read_pgm, toy_corpus, write_corpus, write_pgm


class TestPgm:
    def test_eight_bit_round_trip(self, tmp_path):
        image = np.arange(256, dtype=np.float64).reshape(16, 16) / 255
        write_pgm(tmp_path / "ramp.pgm", image)
        np.testing.assert_array_equal(read_pgm(tmp_path / "ramp.pgm"), image)

    def test_sixteen_bit(self):
        image = np.array([[0.0, 1.0], [0.5, 0.25]])
        data = encode_pgm(image, maxval=65535)
        assert len(data) == len(b"P5\n2 2\n65535\n") + 8
        np.testing.assert_allclose(decode_pgm(data), image, atol=1 / 65535)

    def test_header_comments(self):
        data = b"P5\n# made by hand\n2 1\n255\n" + bytes([0, 255])
        np.testing.assert_array_equal(decode_pgm(data), [[0.0, 1.0]])

    def test_clips_out_of_range(self):
        data = encode_pgm(np.array([[-0.5, 1.5]]))
        np.testing.assert_array_equal(decode_pgm(data), [[0.0, 1.0]])

    def test_bad_magic(self):
        with pytest.raises(InputError):
            decode_pgm(b"P2\n1 1\n255\n0")

    def test_truncated_raster(self):
        with pytest.raises(InputError):
            decode_pgm(b"P5\n4 4\n255\n" + bytes(10))

    def test_malformed_header(self):
        with pytest.raises(InputError):
            decode_pgm(b"P5\nwide 4\n255\n")


class TestCorpus:
    def test_toy_corpus_deterministic(self):
        a = toy_corpus(3, 4, 32)
        b = toy_corpus(3, 4, 32)
        assert [name for name, _ in a] == ["texture_0000.pgm", "texture_0001.pgm", "texture_0002.pgm", "texture_0003.pgm"]
        for (_, x), (_, y) in zip(a, b):
            np.testing.assert_array_equal(x, y)
        assert not np.array_equal(a[0][1], a[1][1])

    def test_texture_range(self):
        for _, image in toy_corpus(5, 8, 32):
            assert image.shape == (32, 32)
            assert image.min() >= 0.05 - 1e-12
            assert image.max() <= 0.95 + 1e-12

    def test_write_and_load(self, tmp_path):
        write_corpus(tmp_path / "corpus", toy_corpus(1, 3, 16))
        loaded = load_corpus(tmp_path / "corpus")
        assert [name for name, _ in loaded] == ["texture_0000.pgm", "texture_0001.pgm", "texture_0002.pgm"]
        assert loaded[0][1].shape == (16, 16)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(InputError):
            load_corpus(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InputError):
            load_corpus(tmp_path / "absent")
