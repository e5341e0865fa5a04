import io
import struct
import zlib

import numpy as np
import pytest
from PIL import Image

from conftest import png_bytes
from lapseg import (
    DecodeError,
    DimensionError,
    ImageTooSmallError,
    LabelMap,
    RgbImage,
    TooManyClassesError,
    UnsupportedFormatError,
    decode_image,
    decode_labelmap,
    downscale_bicubic,
    downscale_nearest,
    encode_labelmap,
    upscale_bilinear,
)


def _png_chunk(tag, data):
    return (
        struct.pack(">I", len(data)) + tag + data
        + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
    )


def _raw_png(width, height, bitdepth, colortype, scanlines):
    ihdr = struct.pack(">IIBBBBB", width, height, bitdepth, colortype, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(scanlines))
        + _png_chunk(b"IEND", b"")
    )


class TestDecode:
    def test_1x1_red_png(self):
        img = decode_image(png_bytes(np.array([[[255, 0, 0]]], dtype=np.uint8)))
        assert (img.width, img.height) == (1, 1)
        assert img.pixels[0, 0].tolist() == [1.0, 0.0, 0.0]

    def test_ppm_p6(self):
        data = b"P6 2 1 255\n" + bytes([0, 0, 0, 255, 255, 255])
        img = decode_image(data)
        assert img.pixels[0, 0].tolist() == [0.0, 0.0, 0.0]
        assert img.pixels[0, 1].tolist() == [1.0, 1.0, 1.0]

    def test_ppm_comments_and_16bit(self):
        header = b"P6\n# a comment\n2 1\n65535\n"
        data = header + struct.pack(">HHHHHH", 65535, 0, 1, 0, 32768, 0)
        img = decode_image(data)
        assert img.pixels[0, 0, 0] == 1.0
        assert img.pixels[0, 0, 2] == 1.0 / 65535.0
        assert img.pixels[0, 1, 1] == 32768.0 / 65535.0

    def test_truncated_png_names_offset(self):
        whole = png_bytes(np.zeros((16, 16, 3), dtype=np.uint8))
        with pytest.raises(DecodeError) as err:
            decode_image(whole[: len(whole) // 2])
        assert err.value.offset is not None

    def test_bad_signature_offset(self):
        data = b"\x89PXG" + b"\x00" * 30
        with pytest.raises(DecodeError) as err:
            decode_image(data)
        assert err.value.offset == 2  # first byte that deviates

    def test_truncated_ppm(self):
        with pytest.raises(DecodeError) as err:
            decode_image(b"P6 2 2 255\n" + b"\x00" * 5)
        assert err.value.offset is not None

    def test_unsupported_streams(self):
        with pytest.raises(UnsupportedFormatError):
            decode_image(b"P5 1 1 255\n\x00")
        with pytest.raises(UnsupportedFormatError):
            decode_image(b"not an image at all")

    def test_16bit_gray_png(self):
        row = b"\x00" + struct.pack(">HH", 65535, 12345)
        img = decode_image(_raw_png(2, 1, 16, 0, row))
        assert img.pixels[0, 0, 0] == 1.0
        assert img.pixels[0, 1, 1] == pytest.approx(12345 / 65535, abs=0)

    def test_16bit_rgb_png_scaled_by_65535(self):
        row = b"\x00" + struct.pack(">HHH", 65535, 0, 32768) + struct.pack(">HHH", 1, 0, 0)
        img = decode_image(_raw_png(2, 1, 16, 2, row))
        assert img.pixels[0, 0, 0] == 1.0
        assert img.pixels[0, 0, 2] == 32768.0 / 65535.0
        # sub-8-bit detail survives (Pillow would truncate this to 0)
        assert img.pixels[0, 1, 0] == 1.0 / 65535.0

    def test_16bit_rgb_png_filtered(self):
        # filter type 1 (Sub) and 2 (Up) rows
        row0 = b"\x01" + struct.pack(">HHH", 1000, 2000, 3000) + struct.pack(">HHH", 1, 2, 3)
        row1 = b"\x02" + struct.pack(">HHH", 5, 5, 5) + struct.pack(">HHH", 0, 0, 0)
        img = decode_image(_raw_png(2, 2, 16, 2, row0 + row1))
        expect01 = np.array([1001, 2002, 3003])
        assert np.allclose(img.pixels[0, 1] * 65535, expect01)
        assert np.allclose(img.pixels[1, 0] * 65535, [1005, 2005, 3005])

    def test_rgba_alpha_ignored(self):
        arr = np.zeros((1, 1, 4), dtype=np.uint8)
        arr[0, 0] = [10, 20, 30, 0]
        img = decode_image(png_bytes(arr, mode="RGBA"))
        assert np.allclose(img.pixels[0, 0] * 255, [10, 20, 30])

    def test_grayscale_replicated(self):
        img = decode_image(png_bytes(np.array([[128]], dtype=np.uint8), mode="L"))
        assert np.allclose(img.pixels[0, 0], 128 / 255)

    def test_indexed_png(self):
        pil = Image.fromarray(np.array([[0, 1]], dtype=np.uint8), mode="P")
        pil.putpalette([0, 0, 0, 255, 0, 0] + [0] * 762)
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        img = decode_image(buf.getvalue())
        assert img.pixels[0, 1].tolist() == [1.0, 0.0, 0.0]

    def test_interlaced_rejected(self):
        ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 2, 0, 0, 1)
        data = (
            b"\x89PNG\r\n\x1a\n"
            + _png_chunk(b"IHDR", ihdr)
            + _png_chunk(b"IDAT", zlib.compress(b"\x00\x00\x00\x00"))
            + _png_chunk(b"IEND", b"")
        )
        with pytest.raises(UnsupportedFormatError):
            decode_image(data)


class TestBicubic:
    def test_dog_dimensions(self):
        img = RgbImage(np.zeros((432, 576, 3)))
        out = downscale_bicubic(img)
        assert (out.width, out.height) == (192, 144)

    def test_ceil_rule(self):
        out = downscale_bicubic(RgbImage(np.zeros((600, 800, 3))))
        assert (out.width, out.height) == (267, 200)

    def test_too_small(self):
        with pytest.raises(ImageTooSmallError):
            downscale_bicubic(RgbImage(np.zeros((2, 8, 3))))

    @pytest.mark.parametrize("value", [0.5, 128 / 255, 0.123456789])
    def test_constant_is_bit_exact(self, value):
        out = downscale_bicubic(RgbImage(np.full((15, 11, 3), value)))
        assert (out.pixels == value).all()

    def test_output_clamped(self):
        rng = np.random.default_rng(3)
        img = RgbImage(rng.random((30, 40, 3)))
        out = downscale_bicubic(img)
        assert out.pixels.min() >= 0.0 and out.pixels.max() <= 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        img = RgbImage(rng.random((25, 31, 3)))
        a = downscale_bicubic(img).pixels
        b = downscale_bicubic(img).pixels
        assert (a == b).all()


class TestNearest:
    def test_constant_map(self):
        out = downscale_nearest(LabelMap(np.full((3, 3), 2), 2), 1, 1)
        assert out.labels.tolist() == [[2]]
        assert out.num_classes == 2

    def test_block_layout_subset(self):
        blocks = np.repeat(np.repeat(np.array([[1, 2], [3, 4]]), 3, axis=0), 3, axis=1)
        out = downscale_nearest(LabelMap(blocks, 4), 2, 2)
        assert set(out.labels.reshape(-1)) <= {1, 2, 3, 4}

    def test_never_invents_labels(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h, w = rng.integers(2, 30, 2)
            labels = rng.integers(0, 3, (h, w))
            lm = LabelMap(labels, 2)
            th, tw = rng.integers(1, h + 1), rng.integers(1, w + 1)
            out = downscale_nearest(lm, tw, th)
            assert set(np.unique(out.labels)) <= set(np.unique(labels))

    def test_upscale_is_error(self):
        with pytest.raises(DimensionError):
            downscale_nearest(LabelMap(np.zeros((4, 4), dtype=int), 1), 5, 4)


class TestBilinearUpscale:
    def test_constant_rows(self):
        rows = np.tile([1.0, 0.0], (4, 1))
        out = upscale_bilinear(rows, 2, 2, 5, 5)
        assert (out == [1.0, 0.0]).all()

    def test_convex_mixture(self):
        rows = np.array([[1.0, 0.0], [0.0, 1.0]])
        out = upscale_bilinear(rows, 2, 1, 4, 1)
        assert (out >= 0).all() and (out <= 1).all()
        assert np.allclose(out.sum(axis=1), 1.0, atol=1e-12)
        assert out[0].tolist() == [1.0, 0.0] and out[-1].tolist() == [0.0, 1.0]

    def test_one_hot_2x2_to_6x6_sums(self):
        rows = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        out = upscale_bilinear(rows, 2, 2, 6, 6)
        assert out.shape == (36, 2)
        # oracle: direct per-row summation
        assert np.abs(out.sum(axis=1) - 1.0).max() <= 1e-9

    def test_row_stochastic_preserved(self):
        rng = np.random.default_rng(6)
        for _ in range(15):
            sh, sw = rng.integers(1, 8, 2)
            dh, dw = rng.integers(sh, 20), rng.integers(sw, 20)
            c = rng.integers(2, 5)
            rows = rng.random((sh * sw, c))
            rows /= rows.sum(axis=1, keepdims=True)
            out = upscale_bilinear(rows, sw, sh, dw, dh)
            assert np.abs(out.sum(axis=1) - 1.0).max() <= 1e-9

    def test_identical_region_bit_comparable(self):
        # all source rows identical -> every output row equals it bitwise
        row = np.array([0.12345678901234567, 0.87654321098765433])
        rows = np.tile(row, (9, 1))
        out = upscale_bilinear(rows, 3, 3, 7, 7)
        assert (out == row).all()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            upscale_bilinear(np.ones((3, 2)), 2, 2, 4, 4)


class TestLabelPng:
    def test_roundtrip_single(self):
        lm = LabelMap(np.array([[1]]), 1)
        back = decode_labelmap(encode_labelmap(lm))
        assert back.labels.tolist() == [[1]]

    def test_roundtrip_random(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            labels = rng.integers(0, 6, (16, 16))
            lm = LabelMap(labels, 5)
            back = decode_labelmap(encode_labelmap(lm), num_classes=5)
            assert (back.labels == lm.labels).all()

    def test_too_many_classes(self):
        with pytest.raises(TooManyClassesError):
            encode_labelmap(LabelMap(np.zeros((2, 2), dtype=int), 300))

    def test_palette_entry_zero_black(self):
        data = encode_labelmap(LabelMap(np.array([[0, 1]]), 1))
        im = Image.open(io.BytesIO(data))
        assert im.mode == "P"
        assert tuple(im.getpalette()[:3]) == (0, 0, 0)
