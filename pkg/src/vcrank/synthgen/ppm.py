"""Binary PPM (P6) reader/writer carrying feature flags in a comment line."""

from __future__ import annotations

import os
import re

import numpy as np

from vcrank.synthgen.images import HEIGHT, WIDTH, Image

_COMMENT = re.compile(rb"^# vcr has_a=([01]) has_b=([01]) seed=(\d+)$")


class PPMError(ValueError):
    code = "ppm"


class PPMFormatError(PPMError):
    """Bad magic number, malformed header or unsupported maxval."""

    code = "format"


class PPMTruncatedError(PPMError):
    """The pixel payload is shorter than the header promises."""

    code = "truncated"


class PPMDimensionError(PPMError):
    """Well-formed file whose size is not 224x224."""

    code = "dimension"


def encode_ppm(img: Image) -> bytes:
    h, w, _ = img.pixels.shape
    header = (
        f"P6\n# vcr has_a={int(img.has_a)} has_b={int(img.has_b)} seed={int(img.seed)}\n"
        f"{w} {h}\n255\n"
    ).encode("ascii")
    return header + np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes()


def write_ppm(img: Image, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ppm(img))


def decode_ppm(data: bytes) -> Image:
    pos = 0
    tokens: list[bytes] = []
    flags = None
    if not data.startswith(b"P6"):
        raise PPMFormatError(f"bad magic {data[:2]!r}, expected b'P6'")
    # header: magic, width, height, maxval; comments may sit between tokens
    while len(tokens) < 4:
        if pos >= len(data):
            raise PPMFormatError("header ends before maxval")
        c = data[pos : pos + 1]
        if c == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise PPMFormatError("unterminated comment")
            m = _COMMENT.match(data[pos:end].rstrip(b"\r"))
            if m:
                flags = (m.group(1) == b"1", m.group(2) == b"1", int(m.group(3)))
            pos = end + 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PPMFormatError("missing whitespace after maxval")
    pos += 1
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PPMFormatError(f"non-numeric header fields {tokens[1:]!r}") from None
    if maxval != 255:
        raise PPMFormatError(f"unsupported maxval {maxval}")
    if width <= 0 or height <= 0:
        raise PPMFormatError(f"invalid size {width}x{height}")
    need = width * height * 3
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise PPMTruncatedError(f"expected {need} pixel bytes, found {len(payload)}")
    if (width, height) != (WIDTH, HEIGHT):
        raise PPMDimensionError(f"image is {width}x{height}, expected {WIDTH}x{HEIGHT}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()
    has_a, has_b, seed = flags if flags is not None else (False, False, 0)
    return Image(pixels, has_a, has_b, seed)


def read_ppm(path: str | os.PathLike) -> Image:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())
