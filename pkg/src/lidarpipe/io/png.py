"""Minimal PNG codec: baseline chunks, 8-bit RGB/RGBA, no interlacing.

Decoding handles all five scanline filters; RGBA input drops alpha.
Encoding always writes unfiltered 8-bit RGB, which keeps service frame
snapshots deterministic byte-for-byte.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import ParseError
from ..frame import ImageRaster

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _chunks(data: bytes):
    pos = 8
    while pos + 8 <= len(data):
        length, ctype = struct.unpack(">I4s", data[pos : pos + 8])
        body = data[pos + 8 : pos + 8 + length]
        if len(body) != length:
            raise ParseError("truncated PNG chunk")
        yield ctype, body
        pos += 12 + length  # length + type + body + crc
        if ctype == b"IEND":
            return
    raise ParseError("PNG stream ended without IEND")


def _unfilter(raw: np.ndarray, height: int, stride: int, bpp: int) -> np.ndarray:
    """Reverse per-scanline filtering; returns (height, stride) uint8."""
    raw = raw.reshape(height, stride + 1)
    filters = raw[:, 0]
    data = raw[:, 1:].astype(np.int32)
    out = np.zeros((height, stride), dtype=np.int32)
    for y in range(height):
        f = filters[y]
        line = data[y]
        prev = out[y - 1] if y > 0 else np.zeros(stride, dtype=np.int32)
        if f == 0:
            out[y] = line
        elif f == 1:  # Sub
            acc = line.copy()
            for x in range(bpp, stride):
                acc[x] = (acc[x] + acc[x - bpp]) & 0xFF
            out[y] = acc
        elif f == 2:  # Up
            out[y] = (line + prev) & 0xFF
        elif f == 3:  # Average
            acc = line.copy()
            for x in range(stride):
                left = acc[x - bpp] if x >= bpp else 0
                acc[x] = (acc[x] + ((left + prev[x]) >> 1)) & 0xFF
            out[y] = acc
        elif f == 4:  # Paeth
            acc = line.copy()
            for x in range(stride):
                a = acc[x - bpp] if x >= bpp else 0
                b = prev[x]
                c = prev[x - bpp] if x >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                acc[x] = (acc[x] + pred) & 0xFF
            out[y] = acc
        else:
            raise ParseError(f"unknown PNG scanline filter {f}")
    return out.astype(np.uint8)


def read_png(data: bytes) -> ImageRaster:
    """Decode a baseline PNG into an RGB raster (alpha dropped)."""
    if data[:8] != _PNG_MAGIC:
        raise ParseError("unsupported image format: not a PNG (bad magic bytes)")
    width = height = None
    channels = 0
    idat = bytearray()
    for ctype, body in _chunks(data):
        if ctype == b"IHDR":
            width, height, depth, color, _comp, _filt, interlace = struct.unpack(
                ">IIBBBBB", body
            )
            if depth != 8:
                raise ParseError(f"unsupported PNG bit depth {depth} (only 8-bit)")
            if interlace != 0:
                raise ParseError("unsupported PNG: interlaced images are not handled")
            if color == 2:
                channels = 3
            elif color == 6:
                channels = 4
            else:
                raise ParseError(
                    f"unsupported PNG color type {color} (only RGB and RGBA)"
                )
        elif ctype == b"IDAT":
            idat.extend(body)
        elif ctype == b"IEND":
            break
    if width is None:
        raise ParseError("PNG stream lacks IHDR")
    try:
        raw = np.frombuffer(zlib.decompress(bytes(idat)), dtype=np.uint8)
    except zlib.error as exc:
        raise ParseError(f"PNG IDAT inflate failed: {exc}")
    stride = width * channels
    if len(raw) != height * (stride + 1):
        raise ParseError(
            f"PNG pixel data has {len(raw)} bytes, expected {height * (stride + 1)}"
        )
    pixels = _unfilter(raw, height, stride, channels).reshape(height, width, channels)
    return ImageRaster(pixels[:, :, :3])


def write_png(img: ImageRaster) -> bytes:
    """Encode as 8-bit RGB, filter 0 everywhere."""
    h, w = img.height, img.width
    rows = np.zeros((h, w * 3 + 1), dtype=np.uint8)
    rows[:, 1:] = img.data.reshape(h, w * 3)
    compressed = zlib.compress(rows.tobytes(), 6)

    def chunk(ctype: bytes, body: bytes) -> bytes:
        crc = zlib.crc32(ctype + body) & 0xFFFFFFFF
        return struct.pack(">I", len(body)) + ctype + body + struct.pack(">I", crc)

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        _PNG_MAGIC
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", compressed)
        + chunk(b"IEND", b"")
    )


def read_image(data: bytes) -> ImageRaster:
    """Decode an image stream; PNG is the only supported container."""
    return read_png(data)
