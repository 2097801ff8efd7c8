"""Strict readers/writers for MNIST IDX files and 8-bit PGM images."""
from __future__ import annotations

import gzip
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (BadMagicError, HeaderError, MaxvalError, ParseError, PixelRangeError,
                     TrailingDataError, TruncatedError)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True, eq=False)
class LabeledSet:
    images: np.ndarray  # (N, rows, cols) uint8
    labels: np.ndarray  # (N,)

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")

    def __len__(self):
        return len(self.labels)


def _idx_header(data: bytes, magic: int, n_dims: int):
    need = 4 + 4 * n_dims
    if len(data) < 4:
        raise TruncatedError(f"IDX header needs {need} bytes, got {len(data)}", offset=len(data))
    (found,) = struct.unpack_from(">I", data, 0)
    if found != magic:
        raise BadMagicError(f"IDX magic 0x{found:08x}, expected 0x{magic:08x}", offset=0)
    if len(data) < need:
        raise TruncatedError(f"IDX header needs {need} bytes, got {len(data)}", offset=len(data))
    return struct.unpack_from(">" + "I" * n_dims, data, 4), need


def _idx_payload(data: bytes, start: int, expected: int) -> np.ndarray:
    actual = len(data) - start
    if actual < expected:
        raise TruncatedError(f"IDX payload: expected {expected} bytes, got {actual}", offset=len(data))
    if actual > expected:
        raise TrailingDataError(f"IDX payload: expected {expected} bytes, got {actual}", offset=start + expected)
    return np.frombuffer(data, dtype=np.uint8, offset=start)


def read_idx_images(data: bytes) -> np.ndarray:
    """Parse an IDX3 image file into a (count, rows, cols) uint8 array."""
    (count, rows, cols), start = _idx_header(data, IDX_IMAGES_MAGIC, 3)
    pixels = _idx_payload(data, start, count * rows * cols)
    return pixels.reshape(count, rows, cols).copy()


def read_idx_labels(data: bytes) -> np.ndarray:
    (count,), start = _idx_header(data, IDX_LABELS_MAGIC, 1)
    return _idx_payload(data, start, count).copy()


def write_idx_images(images) -> bytes:
    images = np.asarray(images)
    if images.ndim != 3 or images.size and (images.min() < 0 or images.max() > 255):
        raise ValueError("IDX images must be a (count, rows, cols) array of 0..255")
    return struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape) + images.astype(np.uint8).tobytes()


def write_idx_labels(labels) -> bytes:
    labels = np.asarray(labels).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise ValueError("IDX labels must be in 0..255")
    return struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + labels.astype(np.uint8).tobytes()


def read_bytes(path) -> bytes:
    """Read a file, transparently decompressing gzip."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as exc:
            raise ParseError(f"{path}: corrupt gzip stream: {exc}") from None
    return raw


def load_mnist(images_path, labels_path) -> LabeledSet:
    images = read_idx_images(read_bytes(images_path))
    labels = read_idx_labels(read_bytes(labels_path))
    return LabeledSet(images, labels)


# -- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\v\f"


def _pgm_tokens(data: bytes, pos: int, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        if pos >= n:
            raise TruncatedError("PGM header ended early", offset=pos)
        start = pos
        while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise HeaderError(f"PGM header field {tok!r} is not a decimal integer", offset=start)
        tokens.append(int(tok))
    return tokens, pos


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a P2 or P5 PGM (maxval <= 255) into a (rows, cols) uint8 array."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise BadMagicError(f"PGM magic {magic!r}, expected b'P2' or b'P5'", offset=0)
    (width, height, maxval), pos = _pgm_tokens(data, 2, 3)
    if width < 1 or height < 1:
        raise HeaderError(f"PGM size {width}x{height} must be positive", offset=pos)
    if not 1 <= maxval <= 255:
        raise MaxvalError(f"PGM maxval {maxval} outside 1..255", offset=pos)
    expected = width * height
    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WS:
            raise HeaderError("PGM header must end with a single whitespace byte", offset=pos)
        pos += 1
        actual = len(data) - pos
        if actual < expected:
            raise TruncatedError(f"PGM raster: expected {expected} bytes, got {actual}", offset=len(data))
        if actual > expected:
            raise TrailingDataError(f"PGM raster: expected {expected} bytes, got {actual}", offset=pos + expected)
        pixels = np.frombuffer(data, dtype=np.uint8, offset=pos)
        bad = np.nonzero(pixels > maxval)[0]
        if len(bad):
            raise PixelRangeError(f"PGM pixel {pixels[bad[0]]} exceeds maxval {maxval}", offset=pos + int(bad[0]))
    else:
        body = data[pos:]
        matches = list(re.finditer(rb"\S+", body))
        if len(matches) < expected:
            raise TruncatedError(f"PGM raster: expected {expected} values, got {len(matches)}", offset=len(data))
        if len(matches) > expected:
            raise TrailingDataError(f"PGM raster: {len(matches) - expected} extra tokens",
                                    offset=pos + matches[expected].start())
        values = []
        for mt in matches:
            tok = mt.group()
            if not tok.isdigit():
                raise HeaderError(f"PGM pixel {tok!r} is not a decimal integer", offset=pos + mt.start())
            v = int(tok)
            if v > maxval:
                raise PixelRangeError(f"PGM pixel {v} exceeds maxval {maxval}", offset=pos + mt.start())
            values.append(v)
        pixels = np.array(values, dtype=np.uint8)
    return pixels.reshape(height, width).copy()


def write_pgm(image) -> bytes:
    """Encode a 2D array of 0..255 as binary P5 with maxval 255."""
    img = np.asarray(image)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("PGM image must be a non-empty 2D array")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("PGM pixels must be in 0..255")
    rows, cols = img.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def load_pgm(path) -> np.ndarray:
    return read_pgm(Path(path).read_bytes())


def save_pgm(image, path) -> None:
    Path(path).write_bytes(write_pgm(image))


def subsample_balanced(data: LabeledSet, per_class: int, seed: int = 0) -> LabeledSet:
    """Pick ``per_class`` items of every label at random (seeded).

    Selected items keep their original relative order.
    """
    labels = np.asarray(data.labels)
    rng = np.random.default_rng(seed)
    chosen = []
    for c in np.unique(labels):
        idx = np.nonzero(labels == c)[0]
        if len(idx) < per_class:
            raise ValueError(f"label {c} has only {len(idx)} items, {per_class} requested")
        chosen.append(rng.choice(idx, size=per_class, replace=False))
    keep = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    return LabeledSet(data.images[keep], labels[keep])
