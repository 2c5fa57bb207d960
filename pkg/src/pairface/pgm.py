"""Byte-exact PGM (P2 / P5) reading and writing for 8-bit grayscale images.

Only maxval <= 255 is supported; the classic face databases are 8-bit and
keeping the parser single-byte keeps it exact and small.
"""

from dataclasses import dataclass


class PgmError(Exception):
    """Base class for PGM parsing failures."""


class MalformedHeader(PgmError):
    """Bad magic number, missing dimensions, or unparsable header token."""


class TruncatedPixelData(PgmError):
    """Fewer pixel samples than width * height."""


class TrailingGarbage(PgmError):
    """Non-whitespace bytes after the last pixel sample."""


class UnsupportedMaxval(PgmError):
    """maxval outside [1, 255]."""


class NonsensicalDimension(PgmError):
    """Zero or negative width/height."""


_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: bytes  # row-major, one byte per pixel
    maxval: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise NonsensicalDimension(
                f"bad dimensions {self.width}x{self.height}")
        if not 1 <= self.maxval <= 255:
            raise UnsupportedMaxval(f"maxval {self.maxval} not in [1, 255]")
        if len(self.pixels) != self.width * self.height:
            raise TruncatedPixelData(
                f"expected {self.width * self.height} pixels, "
                f"got {len(self.pixels)}")
        if max(self.pixels, default=0) > self.maxval:
            raise PgmError("pixel value exceeds maxval")


class _Tokenizer:
    """Whitespace/comment-aware scanner over the raw file bytes."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space_and_comments(self):
        while self.pos < len(self.data):
            c = self.data[self.pos:self.pos + 1]
            if c in (b"#",):
                nl = self.data.find(b"\n", self.pos)
                self.pos = len(self.data) if nl < 0 else nl + 1
            elif c in _WHITESPACE_SET:
                self.pos += 1
            else:
                break

    def next_token(self) -> bytes:
        self.skip_space_and_comments()
        start = self.pos
        while (self.pos < len(self.data)
               and self.data[self.pos:self.pos + 1] not in _WHITESPACE_SET
               and self.data[self.pos] != ord("#")):
            self.pos += 1
        return self.data[start:self.pos]


_WHITESPACE_SET = {bytes([b]) for b in _WHITESPACE}


def _header_int(tok: _Tokenizer, what: str) -> int:
    token = tok.next_token()
    if not token:
        raise MalformedHeader(f"missing {what}")
    try:
        return int(token)
    except ValueError:
        raise MalformedHeader(f"bad {what}: {token!r}") from None


def parse_pgm(data: bytes) -> GrayImage:
    """Decode a complete PGM file image (binary P5 or ASCII P2)."""
    tok = _Tokenizer(data)
    magic = tok.next_token()
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"bad magic {magic!r}")
    width = _header_int(tok, "width")
    height = _header_int(tok, "height")
    if width <= 0 or height <= 0:
        raise NonsensicalDimension(f"bad dimensions {width}x{height}")
    maxval = _header_int(tok, "maxval")
    if not 1 <= maxval <= 255:
        raise UnsupportedMaxval(f"maxval {maxval} not in [1, 255]")
    n = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if tok.pos >= len(data) or data[tok.pos:tok.pos + 1] not in _WHITESPACE_SET:
            raise MalformedHeader("missing whitespace before raster")
        tok.pos += 1
        raw = data[tok.pos:tok.pos + n]
        if len(raw) < n:
            raise TruncatedPixelData(f"expected {n} bytes, got {len(raw)}")
        rest = data[tok.pos + n:]
        if rest.strip(_WHITESPACE):
            raise TrailingGarbage(f"{len(rest)} trailing bytes after raster")
        if max(raw, default=0) > maxval:
            raise PgmError("pixel value exceeds maxval")
        pixels = raw
    else:
        values = bytearray()
        for i in range(n):
            token = tok.next_token()
            if not token:
                raise TruncatedPixelData(f"expected {n} samples, got {i}")
            try:
                v = int(token)
            except ValueError:
                raise TruncatedPixelData(f"bad sample {token!r}") from None
            if not 0 <= v <= maxval:
                raise PgmError(f"pixel value {v} outside [0, {maxval}]")
            values.append(v)
        if tok.next_token():
            raise TrailingGarbage("extra samples after raster")
        pixels = bytes(values)

    return GrayImage(width, height, pixels, maxval)


def serialize_pgm(img: GrayImage, fmt: str = "P5") -> bytes:
    """Encode an image; parse_pgm(serialize_pgm(img)) == img."""
    header = f"{fmt}\n{img.width} {img.height}\n{img.maxval}\n".encode()
    if fmt == "P5":
        return header + img.pixels
    if fmt == "P2":
        lines = []
        for r in range(img.height):
            row = img.pixels[r * img.width:(r + 1) * img.width]
            lines.append(" ".join(str(p) for p in row))
        return header + "\n".join(lines).encode() + b"\n"
    raise ValueError(f"unknown format {fmt!r}")
