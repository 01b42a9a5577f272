"""PPM/PGM round trips and header handling."""

import numpy as np
import pytest

from mirrorcov.errors import ValidationError
from mirrorcov.imgio import (ImageBuffer, netpbm_bytes, parse_netpbm,
                             read_netpbm, write_netpbm)


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    px = rng.integers(0, 256, size=(7, 5, 3), dtype=np.uint8)
    img = ImageBuffer(width=5, height=7, channels=3, pixels=px)
    path = tmp_path / "img.ppm"
    write_netpbm(img, path)
    back = read_netpbm(path)
    assert back.width == 5 and back.height == 7 and back.channels == 3
    assert np.array_equal(back.pixels, px)


def test_pgm_round_trip_bit_exact(tmp_path):
    px = np.arange(12, dtype=np.uint8).reshape(3, 4, 1)
    img = ImageBuffer(width=4, height=3, channels=1, pixels=px)
    path = tmp_path / "img.pgm"
    write_netpbm(img, path)
    write_netpbm(read_netpbm(path), tmp_path / "img2.pgm")
    assert (tmp_path / "img.pgm").read_bytes() == (tmp_path / "img2.pgm").read_bytes()


def test_header_form_is_fixed():
    img = ImageBuffer.filled(2, 2, (1, 2, 3))
    data = netpbm_bytes(img)
    assert data.startswith(b"P6\n2 2\n255\n")
    assert len(data) == len(b"P6\n2 2\n255\n") + 12


def test_reader_accepts_comments():
    raw = b"P5\n# a comment\n2 1\n255\n\x00\xff"
    img = parse_netpbm(raw)
    assert img.width == 2 and img.height == 1
    assert list(img.pixels.ravel()) == [0, 255]


def test_truncated_payload_rejected():
    with pytest.raises(ValidationError):
        parse_netpbm(b"P5\n4 4\n255\n\x00\x00")


def test_wrong_magic_rejected():
    with pytest.raises(ValidationError):
        parse_netpbm(b"P3\n1 1\n255\n0 0 0")


def test_buffer_shape_validated():
    with pytest.raises(ValidationError):
        ImageBuffer(width=2, height=2, channels=3,
                    pixels=np.zeros((2, 2, 1), dtype=np.uint8))
