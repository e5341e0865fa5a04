"""Image decoding/encoding and the resampling operations of the pipeline.

Images are held as float64 channel data in [0, 1] regardless of source bit
depth (8-bit scaled by 255, 16-bit by 65535). Three resamplers are provided:

* bicubic downscale (cubic convolution kernel, a = -0.5, widened by the
  scale factor when shrinking, i.e. antialiased),
* nearest-neighbor downscale for label maps (never invents class ids),
* bilinear upscale for per-class membership grids (convexity-preserving).

All resamplers clamp source coordinates to the edge and preserve constant
regions bit-exactly: each output sample is computed as
``anchor + sum(w * (tap - anchor))``, which is algebraically the weighted
mean but returns the anchor untouched when every tap equals it.
"""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import (
    DecodeError,
    DimensionError,
    ImageTooSmallError,
    TooManyClassesError,
    UnsupportedFormatError,
)

# Fixed rendering palette for class ids: entry 0 is reserved black, classes
# 1..C cycle through 12 visually distinct colors. The web client uses the
# same table, so label PNGs and overlays agree everywhere.
CLASS_PALETTE = [
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (250, 190, 212),
    (0, 128, 128),
    (220, 190, 255),
]


def class_color(class_id: int) -> tuple[int, int, int]:
    """RGB triple used to render a class id (0 is black)."""
    if class_id == 0:
        return (0, 0, 0)
    return CLASS_PALETTE[(class_id - 1) % len(CLASS_PALETTE)]


@dataclass
class RgbImage:
    """RGB raster with float64 channels in [0, 1], shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DimensionError(
                f"RgbImage needs a (height, width, 3) array, got shape {arr.shape}"
            )
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("RgbImage channels must lie in [0, 1]")
        self.pixels = arr

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_uint8(self) -> np.ndarray:
        """Round channels back to 8-bit values (for color comparisons)."""
        return np.rint(self.pixels * 255.0).astype(np.uint8)


@dataclass
class LabelMap:
    """Per-pixel class assignment; 0 marks unlabeled, classes run 1..num_classes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise DimensionError(f"LabelMap needs a (height, width) array, got {arr.shape}")
        arr = arr.astype(np.int32, copy=False)
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if arr.size and (arr.min() < 0 or arr.max() > self.num_classes):
            raise ValueError(
                f"label entries must lie in 0..{self.num_classes}, "
                f"found range {arr.min()}..{arr.max()}"
            )
        self.labels = arr

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def flat(self) -> np.ndarray:
        """Row-major 1-D view of the labels."""
        return self.labels.reshape(-1)

    def copy(self) -> "LabelMap":
        return LabelMap(self.labels.copy(), self.num_classes)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def decode_image(data: bytes) -> RgbImage:
    """Decode a PNG or binary PPM (P6) byte stream to an RgbImage.

    Grayscale and indexed inputs are expanded to RGB; alpha channels are
    dropped. 8-bit samples are scaled by 255, 16-bit samples by 65535.
    Malformed streams raise DecodeError naming the offending byte offset.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("decode_image expects bytes")
    data = bytes(data)
    if data[:2] == b"P6":
        return _decode_ppm(data)
    if data[:2] in (b"P1", b"P2", b"P3", b"P4", b"P5", b"P7"):
        raise UnsupportedFormatError(
            f"PPM variant {data[:2].decode()} not supported; only binary P6"
        )
    if data[:1] == _PNG_SIGNATURE[:1] or data[:4] == _PNG_SIGNATURE[:4]:
        return _decode_png(data)
    raise UnsupportedFormatError("input is neither a PNG nor a binary PPM (P6) stream")


def _diagnose_png(data: bytes):
    """Walk the chunk structure; return (offset, reason) of the first fault."""
    for i in range(min(8, len(data))):
        if data[i] != _PNG_SIGNATURE[i]:
            return i, "bad PNG signature"
    if len(data) < 8:
        return len(data), "truncated PNG signature"
    pos = 8
    first = True
    while True:
        if pos + 8 > len(data):
            return len(data), "truncated chunk header"
        length = int.from_bytes(data[pos : pos + 4], "big")
        tag = data[pos + 4 : pos + 8]
        if not all(65 <= b <= 90 or 97 <= b <= 122 for b in tag):
            return pos + 4, f"invalid chunk type {tag!r}"
        if first and (tag != b"IHDR" or length != 13):
            return pos + 4, "first chunk is not a 13-byte IHDR"
        first = False
        end = pos + 8 + length + 4
        if end > len(data):
            return len(data), f"truncated {tag.decode()} chunk"
        crc = int.from_bytes(data[end - 4 : end], "big")
        if crc != (zlib.crc32(data[pos + 4 : end - 4]) & 0xFFFFFFFF):
            return end - 4, f"CRC mismatch in {tag.decode()} chunk"
        if tag == b"IEND":
            return None
        pos = end


def _png_header(data: bytes):
    """Parse IHDR fields (width, height, bitdepth, colortype, interlace)."""
    if len(data) < 33 or data[12:16] != b"IHDR":
        fault = _diagnose_png(data)
        offset, reason = fault if fault else (8, "missing IHDR")
        raise DecodeError(f"malformed PNG: {reason}", offset=offset)
    w, h = struct.unpack(">II", data[16:24])
    depth, color, _comp, _filt, interlace = data[24:29]
    return w, h, depth, color, interlace


def _decode_png(data: bytes) -> RgbImage:
    w, h, depth, color, interlace = _png_header(data)
    if interlace == 1:
        raise UnsupportedFormatError("Adam7-interlaced PNG not supported")
    if color not in (0, 2, 3, 4, 6):
        raise UnsupportedFormatError(f"PNG color type {color} not supported")
    if depth == 16 and color in (2, 6):
        # Pillow truncates 16-bit color to 8 bits; decode these ourselves so
        # samples are scaled by 65535 as the contract requires.
        return _decode_png16_color(data, w, h, color)
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        fault = _diagnose_png(data)
        if fault is not None:
            raise DecodeError(f"malformed PNG: {fault[1]}", offset=fault[0]) from exc
        raise DecodeError(f"malformed PNG: undecodable pixel data ({exc})") from exc

    if im.mode in ("RGBA", "LA", "PA"):
        im = im.convert("RGB") if im.mode == "RGBA" else im.convert("L")
    if im.mode == "P":
        im = im.convert("RGB")
    arr = np.asarray(im)
    if im.mode == "RGB":
        channels = arr.astype(np.float64) / 255.0
    elif im.mode == "L":
        channels = np.repeat((arr.astype(np.float64) / 255.0)[:, :, None], 3, axis=2)
    elif im.mode == "1":
        channels = np.repeat(arr.astype(np.float64)[:, :, None], 3, axis=2)
    elif im.mode in ("I", "I;16"):
        channels = np.repeat((arr.astype(np.float64) / 65535.0)[:, :, None], 3, axis=2)
    else:
        raise UnsupportedFormatError(f"PNG decoded to unsupported mode {im.mode!r}")
    return RgbImage(np.clip(channels, 0.0, 1.0))


def _decode_png16_color(data: bytes, w: int, h: int, color: int) -> RgbImage:
    """Minimal decoder for non-interlaced 16-bit RGB/RGBA PNGs."""
    samples = 3 if color == 2 else 4
    bpp = samples * 2
    idat = bytearray()
    first_idat = None
    pos = 8
    while pos + 8 <= len(data):
        length = int.from_bytes(data[pos : pos + 4], "big")
        tag = data[pos + 4 : pos + 8]
        end = pos + 8 + length + 4
        if end > len(data):
            raise DecodeError(f"malformed PNG: truncated {tag.decode(errors='replace')} chunk",
                              offset=len(data))
        if tag == b"IDAT":
            if first_idat is None:
                first_idat = pos + 8
            idat += data[pos + 8 : pos + 8 + length]
        if tag == b"IEND":
            break
        pos = end
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise DecodeError(f"malformed PNG: bad IDAT stream ({exc})", offset=first_idat) from exc
    stride = w * bpp
    if len(raw) != h * (stride + 1):
        raise DecodeError(
            f"malformed PNG: expected {h * (stride + 1)} filtered bytes, got {len(raw)}",
            offset=first_idat,
        )
    rows = _unfilter_scanlines(np.frombuffer(raw, dtype=np.uint8), h, stride, bpp)
    sixteen = (rows[:, 0::2].astype(np.uint32) << 8) | rows[:, 1::2]
    sixteen = sixteen.reshape(h, w, samples)[:, :, :3]
    return RgbImage(sixteen.astype(np.float64) / 65535.0)


def _unfilter_scanlines(raw: np.ndarray, height: int, stride: int, bpp: int) -> np.ndarray:
    """Undo per-scanline PNG filtering (types 0-4). Returns (height, stride) uint8."""
    out = np.zeros((height, stride), dtype=np.int64)
    prev = np.zeros(stride, dtype=np.int64)
    pos = 0
    for y in range(height):
        ftype = int(raw[pos])
        row = raw[pos + 1 : pos + 1 + stride].astype(np.int64)
        pos += 1 + stride
        if ftype == 0:
            cur = row
        elif ftype == 1:
            cur = np.cumsum(row.reshape(-1, bpp), axis=0).reshape(stride) & 255
        elif ftype == 2:
            cur = (row + prev) & 255
        elif ftype in (3, 4):
            cur = np.zeros(stride, dtype=np.int64)
            for i in range(stride):
                a = cur[i - bpp] if i >= bpp else 0
                b = prev[i]
                if ftype == 3:
                    pred = (a + b) >> 1
                else:
                    c = prev[i - bpp] if i >= bpp else 0
                    p = a + b - c
                    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                    pred = a if (pa <= pb and pa <= pc) else (b if pb <= pc else c)
                cur[i] = (row[i] + pred) & 255
        else:
            raise DecodeError(f"malformed PNG: invalid filter type {ftype} in scanline {y}")
        out[y] = cur
        prev = cur
    return out.astype(np.uint8)


def _decode_ppm(data: bytes) -> RgbImage:
    pos = 2  # past "P6"

    def next_int(pos, what):
        # skip whitespace and '#' comment lines
        while pos < len(data):
            b = data[pos]
            if b in b" \t\r\n":
                pos += 1
            elif b == ord("#"):
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and data[pos] in b"0123456789":
            pos += 1
        if start == pos:
            raise DecodeError(f"malformed PPM: expected {what}", offset=start)
        return int(data[start:pos]), pos

    width, pos = next_int(pos, "width")
    height, pos = next_int(pos, "height")
    maxval, pos = next_int(pos, "maxval")
    if width < 1 or height < 1:
        raise DecodeError(f"malformed PPM: bad dimensions {width}x{height}", offset=2)
    if not 1 <= maxval <= 65535:
        raise DecodeError(f"malformed PPM: maxval {maxval} out of range", offset=pos)
    if pos >= len(data) or data[pos] not in b" \t\r\n":
        raise DecodeError("malformed PPM: missing whitespace before pixel data", offset=pos)
    pos += 1
    two_byte = maxval > 255
    need = width * height * 3 * (2 if two_byte else 1)
    if len(data) - pos < need:
        raise DecodeError(
            f"malformed PPM: truncated pixel data (need {need} bytes, have {len(data) - pos})",
            offset=len(data),
        )
    buf = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    if two_byte:
        values = (buf[0::2].astype(np.uint32) << 8) | buf[1::2]
    else:
        values = buf
    arr = values.reshape(height, width, 3).astype(np.float64) / float(maxval)
    return RgbImage(np.clip(arr, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Label map encode/decode
# ---------------------------------------------------------------------------


def encode_labelmap(labels: LabelMap) -> bytes:
    """Serialize a LabelMap as an indexed PNG whose pixel values are class ids."""
    if labels.num_classes > 255:
        raise TooManyClassesError(
            f"indexed PNG can hold at most 255 classes, got {labels.num_classes}"
        )
    arr = labels.labels.astype(np.uint8)
    im = Image.fromarray(arr, mode="P")
    palette = [0, 0, 0]
    for c in range(1, labels.num_classes + 1):
        palette.extend(class_color(c))
    im.putpalette(palette)
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue()


def decode_labelmap(data: bytes, num_classes: int | None = None) -> LabelMap:
    """Read back an indexed PNG produced by encode_labelmap."""
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        fault = _diagnose_png(data)
        if fault is not None:
            raise DecodeError(f"malformed PNG: {fault[1]}", offset=fault[0]) from exc
        raise DecodeError(f"malformed PNG: {exc}") from exc
    if im.mode != "P":
        raise UnsupportedFormatError(f"expected an indexed PNG, got mode {im.mode!r}")
    arr = np.asarray(im).astype(np.int32)
    if num_classes is None:
        num_classes = max(1, int(arr.max()))
    return LabelMap(arr, num_classes)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _cubic_kernel(x: np.ndarray) -> np.ndarray:
    # Keys cubic convolution kernel with a = -0.5, support 2.
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    near = 1.5 * ax3 - 2.5 * ax2 + 1.0
    far = -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0
    return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))


def _linear_kernel(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


def _axis_contributions(src: int, dst: int, kernel, support: float, antialias: bool):
    """Tap indices and normalized weights for a 1-D resample.

    Maps output pixel centers to source coordinates via
    u = (i + 0.5) * src/dst - 0.5 and, when shrinking with antialias on,
    stretches the kernel by the inverse scale so it spans a full source
    footprint. Indices are clamped to the edge after weight evaluation.
    """
    scale = dst / src
    if antialias and scale < 1.0:
        kwidth = 2.0 * support / scale
        kscale = scale
    else:
        kwidth = 2.0 * support
        kscale = 1.0
    u = (np.arange(dst, dtype=np.float64) + 0.5) / scale - 0.5
    left = np.floor(u - kwidth / 2.0).astype(np.int64)
    taps = int(np.ceil(kwidth)) + 2
    idx = left[:, None] + np.arange(taps, dtype=np.int64)[None, :]
    weights = kernel((u[:, None] - idx) * kscale) * kscale
    weights /= weights.sum(axis=1, keepdims=True)
    return np.clip(idx, 0, src - 1), weights


def _resample_axis(arr: np.ndarray, axis: int, dst: int, kernel, support: float,
                   antialias: bool) -> np.ndarray:
    src = arr.shape[axis]
    idx, weights = _axis_contributions(src, dst, kernel, support, antialias)
    moved = np.moveaxis(np.asarray(arr, dtype=np.float64), axis, 0)
    taps = idx.shape[1]
    # Anchor formulation: exact pass-through wherever all taps are identical.
    anchor = moved[idx[:, taps // 2]]
    out = anchor.copy()
    wshape = (dst,) + (1,) * (moved.ndim - 1)
    for t in range(taps):
        out += weights[:, t].reshape(wshape) * (moved[idx[:, t]] - anchor)
    return np.moveaxis(out, 0, axis)


def downscale_bicubic(img: RgbImage) -> RgbImage:
    """Shrink an image to one third per dimension (output dims = ceil(dim/3))."""
    if img.width < 3 or img.height < 3:
        raise ImageTooSmallError(
            f"bicubic downscale needs at least 3x3 pixels, got {img.width}x{img.height}"
        )
    dst_h = -(-img.height // 3)
    dst_w = -(-img.width // 3)
    out = _resample_axis(img.pixels, 0, dst_h, _cubic_kernel, 2.0, antialias=True)
    out = _resample_axis(out, 1, dst_w, _cubic_kernel, 2.0, antialias=True)
    return RgbImage(np.clip(out, 0.0, 1.0))


def downscale_nearest(labels: LabelMap, target_w: int, target_h: int) -> LabelMap:
    """Shrink a label map by sampling; never introduces a class id."""
    if target_w > labels.width or target_h > labels.height:
        raise DimensionError(
            f"nearest downscale target {target_w}x{target_h} exceeds source "
            f"{labels.width}x{labels.height}"
        )
    if target_w < 1 or target_h < 1:
        raise DimensionError("target dimensions must be at least 1x1")
    rows = np.minimum(
        (np.floor((np.arange(target_h) + 0.5) * labels.height / target_h)).astype(np.int64),
        labels.height - 1,
    )
    cols = np.minimum(
        (np.floor((np.arange(target_w) + 0.5) * labels.width / target_w)).astype(np.int64),
        labels.width - 1,
    )
    return LabelMap(labels.labels[np.ix_(rows, cols)], labels.num_classes)


def upscale_bilinear(dom_rows: np.ndarray, src_w: int, src_h: int,
                     dst_w: int, dst_h: int) -> np.ndarray:
    """Enlarge per-node class-membership rows from a src grid to a dst grid.

    dom_rows is (src_w*src_h, C) in row-major pixel order; the result is
    (dst_w*dst_h, C). Bilinear weights are convex, so row-stochastic inputs
    stay row-stochastic (within float rounding).
    """
    rows = np.asarray(dom_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] != src_w * src_h:
        raise DimensionError(
            f"expected {src_w * src_h} rows for a {src_w}x{src_h} grid, got {rows.shape}"
        )
    grid = rows.reshape(src_h, src_w, rows.shape[1])
    out = _resample_axis(grid, 0, dst_h, _linear_kernel, 1.0, antialias=False)
    out = _resample_axis(out, 1, dst_w, _linear_kernel, 1.0, antialias=False)
    return out.reshape(dst_h * dst_w, rows.shape[1])
