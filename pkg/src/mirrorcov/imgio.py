"""8-bit image buffers with binary PPM (P6) / PGM (P5) serialization.

Golden files are bit-exact: the writer emits a fixed header form
(``P6\\n<w> <h>\\n255\\n`` + raw samples), the reader accepts the common
whitespace/comment variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ImageBuffer:
    """Row-major 8-bit image, 1 (gray) or 3 (RGB) channels."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray  # (height, width, channels) uint8

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ValidationError(f"channels must be 1 or 3, got {self.channels}")
        if self.pixels.shape != (self.height, self.width, self.channels):
            raise ValidationError(
                f"pixel block {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x{self.channels}")
        if self.pixels.dtype != np.uint8:
            raise ValidationError("pixels must be uint8")

    @classmethod
    def filled(cls, width, height, color) -> "ImageBuffer":
        color = np.atleast_1d(np.asarray(color, dtype=np.uint8))
        px = np.empty((height, width, len(color)), dtype=np.uint8)
        px[:] = color
        return cls(width=width, height=height, channels=len(color), pixels=px)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data):
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b"#":  # comment to end of line
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValidationError("truncated netpbm header")
    return data[start:pos], pos


def read_netpbm(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_netpbm(data)


def parse_netpbm(data: bytes) -> ImageBuffer:
    magic, pos = _read_token(data, 0)
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise ValidationError(f"unsupported netpbm magic {magic!r}")
    w_tok, pos = _read_token(data, pos)
    h_tok, pos = _read_token(data, pos)
    max_tok, pos = _read_token(data, pos)
    width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    if maxval != 255:
        raise ValidationError(f"only 8-bit netpbm supported, maxval={maxval}")
    pos += 1  # exactly one whitespace byte after the header
    need = width * height * channels
    raw = data[pos:pos + need]
    if len(raw) != need:
        raise ValidationError(f"netpbm payload truncated: {len(raw)} of {need} bytes")
    px = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)
    return ImageBuffer(width=width, height=height, channels=channels,
                       pixels=px.copy())


def write_netpbm(img: ImageBuffer, path) -> None:
    with open(path, "wb") as fh:
        fh.write(netpbm_bytes(img))


def netpbm_bytes(img: ImageBuffer) -> bytes:
    magic = b"P6" if img.channels == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    return header + img.pixels.tobytes()
