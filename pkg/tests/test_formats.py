import struct

import numpy as np
import pytest

from areawarp.errors import FormatError
from areawarp.formats import (read_awf, read_image, read_pgm, write_awf,
                              write_image, write_pgm)
from areawarp.grid import GridFrame, IntensityImage


class TestAwf:
    def test_float_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        img = IntensityImage(GridFrame.unit(64, 64),
                             rng.uniform(0, 1000, (64, 64)).astype(np.float32)
                             .astype(np.float64))
        path = tmp_path / "img.awf"
        write_awf(img, path)
        back = read_awf(path)
        assert np.array_equal(back.values, img.values)
        write_awf(back, tmp_path / "img2.awf")
        assert (tmp_path / "img.awf").read_bytes() == \
            (tmp_path / "img2.awf").read_bytes()

    def test_golden_byte_layout_3x2(self, tmp_path):
        # hand-built fixture: header + 6 little-endian float32 values
        values = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, -6.5]])
        img = IntensityImage(GridFrame.unit(3, 2), values)
        path = tmp_path / "g.awf"
        write_awf(img, path)
        expected = b"AWF1 1 3 2\n" + struct.pack(
            "<6f", 1.0, 2.0, 3.0, 4.0, 5.0, -6.5)
        assert path.read_bytes() == expected

    def test_multichannel_interleaved(self, tmp_path):
        v = np.arange(12, dtype=float).reshape(2, 2, 3)
        img = IntensityImage(GridFrame.unit(2, 2), v)
        path = tmp_path / "c.awf"
        write_awf(img, path)
        raw = path.read_bytes()
        assert raw.startswith(b"AWF1 3 2 2\n")
        floats = struct.unpack("<12f", raw.split(b"\n", 1)[1])
        assert list(floats) == list(range(12))
        back = read_awf(path)
        assert np.array_equal(back.values, v)

    def test_malformed_and_truncated(self, tmp_path):
        p = tmp_path / "bad.awf"
        p.write_bytes(b"AWFX 1 2 2\n" + b"\0" * 16)
        with pytest.raises(FormatError):
            read_awf(p)
        p.write_bytes(b"AWF1 1 4 4\n" + b"\0" * 10)
        with pytest.raises(FormatError):
            read_awf(p)
        p.write_bytes(b"AWF1 1 99999999999 4\n")
        with pytest.raises(FormatError):
            read_awf(p)


class TestPgm:
    def test_8bit_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        v = rng.integers(0, 256, (16, 8)).astype(float)
        img = IntensityImage(GridFrame.unit(8, 16), v)
        path = tmp_path / "img.pgm"
        write_pgm(img, path)
        back = read_pgm(path)
        assert np.array_equal(back.values, v)

    def test_16bit_roundtrip(self, tmp_path):
        rng = np.random.default_rng(4)
        v = rng.integers(0, 65536, (5, 7)).astype(float)
        img = IntensityImage(GridFrame.unit(7, 5), v)
        path = tmp_path / "img16.pgm"
        write_pgm(img, path, maxval=65535)
        back = read_pgm(path)
        assert np.array_equal(back.values, v)

    def test_full_range_values(self, tmp_path):
        v = np.array([[0.0, 255.0], [128.0, 1.0]])
        img = IntensityImage(GridFrame.unit(2, 2), v)
        write_pgm(img, tmp_path / "r.pgm")
        assert np.array_equal(read_pgm(tmp_path / "r.pgm").values, v)

    def test_comment_and_whitespace_header(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# a comment\n 2 1\n255\n\x07\x09")
        back = read_pgm(p)
        assert np.array_equal(back.values, [[7.0, 9.0]])

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.pgm"
        p.write_bytes(b"P6 2 2 255\n" + b"\0" * 12)
        with pytest.raises(FormatError):
            read_pgm(p)
        p.write_bytes(b"P5 2 2 255\n\x00")
        with pytest.raises(FormatError):
            read_pgm(p)

    def test_multichannel_rejected(self, tmp_path):
        img = IntensityImage(GridFrame.unit(2, 2), np.zeros((2, 2, 3)))
        with pytest.raises(FormatError):
            write_pgm(img, tmp_path / "mc.pgm")


def test_read_write_image_dispatch(tmp_path):
    v = np.arange(6, dtype=float).reshape(2, 3)
    img = IntensityImage(GridFrame.unit(3, 2), v)
    write_image(img, tmp_path / "a.pgm")
    write_image(img, tmp_path / "a.awf")
    assert np.array_equal(read_image(tmp_path / "a.pgm").values, v)
    assert np.array_equal(read_image(tmp_path / "a.awf").values, v)
