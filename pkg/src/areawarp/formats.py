"""Bit-exact image file I/O: NetPBM P5 (8/16-bit) and the AWF1 float raster.

AWF1 layout: one ASCII header line ``AWF1 <channels> <nx> <ny>\\n`` followed
by nx*ny*channels little-endian IEEE 754 float32 values, row-major and
channel-interleaved. Round-trips are bit-exact for float32 data.

Neither format carries frame information; readers attach the unit-square
frame by default and callers may rebind.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError
from .grid import GridFrame, IntensityImage

MAX_DIM = 1 << 24


def _check_dims(nx, ny, channels=1):
    if not (1 <= nx <= MAX_DIM and 1 <= ny <= MAX_DIM and 1 <= channels <= 64):
        raise FormatError(f"unreasonable dimensions {nx}x{ny}x{channels}")


def write_pgm(img: IntensityImage, path, maxval: int = 255):
    """Write grayscale values as NetPBM P5, rounding and clipping to [0, maxval]."""
    if img.values.ndim != 2:
        raise FormatError("PGM supports single-channel images only")
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    data = np.clip(np.rint(img.values), 0, maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    with open(path, "wb") as fh:
        fh.write(f"P5 {img.frame.nx} {img.frame.ny} {maxval}\n".encode("ascii"))
        fh.write(data.astype(dtype).tobytes())


def _read_pnm_token(fh) -> bytes:
    # skips whitespace and '#' comments between header tokens
    tok = b""
    while True:
        c = fh.read(1)
        if not c:
            raise FormatError("truncated PGM header")
        if c == b"#":
            while c not in (b"\n", b""):
                c = fh.read(1)
            continue
        if c.isspace():
            if tok:
                return tok
            continue
        tok += c


def read_pgm(path, frame: GridFrame | None = None) -> IntensityImage:
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic != b"P5":
            raise FormatError(f"not a P5 PGM file: magic {magic!r}")
        try:
            nx = int(_read_pnm_token(fh))
            ny = int(_read_pnm_token(fh))
            maxval = int(_read_pnm_token(fh))
        except ValueError as exc:
            raise FormatError("malformed PGM header") from exc
        _check_dims(nx, ny)
        if not (0 < maxval < 65536):
            raise FormatError(f"bad maxval {maxval}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = fh.read(nx * ny * dtype.itemsize)
        if len(payload) != nx * ny * dtype.itemsize:
            raise FormatError("truncated PGM payload")
    values = np.frombuffer(payload, dtype=dtype).reshape(ny, nx).astype(np.float64)
    return IntensityImage(frame or GridFrame.unit(nx, ny), values)


def write_awf(img: IntensityImage, path):
    """Write the AWF1 float32 raster; bit-exact for float32-representable data."""
    v = img.values
    channels = 1 if v.ndim == 2 else v.shape[2]
    with open(path, "wb") as fh:
        fh.write(f"AWF1 {channels} {img.frame.nx} {img.frame.ny}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def read_awf(path, frame: GridFrame | None = None) -> IntensityImage:
    with open(path, "rb") as fh:
        header = fh.readline(256)
        parts = header.split()
        if len(parts) != 4 or parts[0] != b"AWF1":
            raise FormatError(f"malformed AWF1 header {header!r}")
        try:
            channels, nx, ny = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise FormatError("malformed AWF1 header") from exc
        _check_dims(nx, ny, channels)
        count = nx * ny * channels
        payload = fh.read(4 * count)
        if len(payload) != 4 * count:
            raise FormatError("truncated AWF1 payload")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    shape = (ny, nx) if channels == 1 else (ny, nx, channels)
    return IntensityImage(frame or GridFrame.unit(nx, ny), values.reshape(shape))


def read_image(path, frame: GridFrame | None = None) -> IntensityImage:
    """Read a raster by extension: .pgm -> NetPBM P5, anything else -> AWF1."""
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path, frame)
    return read_awf(path, frame)


def write_image(img: IntensityImage, path, maxval: int = 255):
    """Write by extension: .pgm quantizes to integers, anything else is AWF1."""
    if str(path).lower().endswith(".pgm"):
        write_pgm(img, path, maxval=maxval)
    else:
        write_awf(img, path)
