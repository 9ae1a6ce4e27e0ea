import io
import struct

import numpy as np
import pytest
from PIL import Image

from flowsim import (
    FormatError,
    MotionField,
    Stage,
    TruncatedFileError,
    read_depth_auto,
    read_depth_pfm,
    read_depth_png16,
    read_flo,
    read_png_rgb,
    write_depth_png16,
    write_flo,
    write_png_gray8,
    write_png_rgb,
)

import oracles
from conftest import write_png16


def _field(u, v) -> MotionField:
    return MotionField(np.asarray(u, np.float32), np.asarray(v, np.float32), Stage.SCALED)


class TestDepthPng16:
    def test_full_scale_and_zero(self, tmp_path):
        p = tmp_path / "d.png"
        write_png16(p, np.array([[65535]], dtype=np.uint16))
        assert read_depth_png16(p).values[0, 0] == 1.0
        write_png16(p, np.array([[0]], dtype=np.uint16))
        assert read_depth_png16(p).values[0, 0] == 0.0

    def test_scaling_by_hand(self, tmp_path):
        p = tmp_path / "d.png"
        write_png16(p, np.array([[16384, 49151]], dtype=np.uint16))
        expected = np.array([[16384, 49151]], dtype=np.float64) / 65535.0
        assert np.array_equal(read_depth_png16(p).values, expected)

    def test_dimensions_orientation(self, tmp_path):
        p = tmp_path / "d.png"
        arr = np.arange(6, dtype=np.uint16).reshape(2, 3)  # 3 wide, 2 tall
        write_png16(p, arr)
        raw = read_depth_png16(p)
        assert (raw.height, raw.width) == (2, 3)
        assert np.array_equal(raw.values, arr / 65535.0)

    def test_writer_reader_round_trip(self, tmp_path):
        rng = np.random.default_rng(31)
        arr = rng.integers(0, 65536, size=(11, 7), dtype=np.uint16)
        p = tmp_path / "d.png"
        write_depth_png16(arr, p)
        assert np.array_equal(read_depth_png16(p).values, arr / 65535.0)

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_depth_png16(tmp_path / "absent.png")

    def test_8bit_rejected_naming_found(self, tmp_path):
        p = tmp_path / "gray8.png"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8)).save(p)
        with pytest.raises(FormatError, match="expected single-channel 16-bit PNG.*'L'"):
            read_depth_png16(p)

    def test_rgb_rejected(self, tmp_path):
        p = tmp_path / "rgb.png"
        Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(p)
        with pytest.raises(FormatError, match="RGB"):
            read_depth_png16(p)

    def test_non_png_rejected(self, tmp_path):
        p = tmp_path / "d.png"
        buf = io.BytesIO()
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8)).save(buf, format="JPEG")
        p.write_bytes(buf.getvalue())
        with pytest.raises(FormatError, match="expected PNG"):
            read_depth_png16(p)

    def test_truncated_png_rejected(self, tmp_path):
        good = tmp_path / "good.png"
        write_png16(good, np.arange(64, dtype=np.uint16).reshape(8, 8))
        bad = tmp_path / "bad.png"
        bad.write_bytes(good.read_bytes()[:40])
        with pytest.raises(FormatError):
            read_depth_png16(bad)

    def test_garbage_rejected(self, tmp_path):
        p = tmp_path / "junk.png"
        p.write_bytes(b"not an image at all")
        with pytest.raises(FormatError):
            read_depth_png16(p)


class TestPfm:
    def test_single_value(self, tmp_path):
        p = tmp_path / "d.pfm"
        p.write_bytes(oracles.pfm_bytes(np.array([[2.5]]), little_endian=True))
        assert read_depth_pfm(p).values[0, 0] == 2.5

    def test_rows_top_down_after_load(self, tmp_path):
        vals = np.array([[1.0, 2.0], [3.0, 4.0]])
        p = tmp_path / "d.pfm"
        p.write_bytes(oracles.pfm_bytes(vals, little_endian=True))
        assert np.array_equal(read_depth_pfm(p).values, vals)

    def test_endianness_sign_equivalence(self, tmp_path):
        rng = np.random.default_rng(32)
        vals = rng.standard_normal((5, 4)).astype(np.float32).astype(np.float64)
        little = tmp_path / "le.pfm"
        big = tmp_path / "be.pfm"
        little.write_bytes(oracles.pfm_bytes(vals, little_endian=True))
        big.write_bytes(oracles.pfm_bytes(vals, little_endian=False))
        assert np.array_equal(read_depth_pfm(little).values, read_depth_pfm(big).values)

    def test_scale_magnitude_ignored(self, tmp_path):
        vals = np.array([[1.0, -2.0]])
        a = tmp_path / "a.pfm"
        b = tmp_path / "b.pfm"
        a.write_bytes(oracles.pfm_bytes(vals, little_endian=True, scale_mag=1.0))
        b.write_bytes(oracles.pfm_bytes(vals, little_endian=True, scale_mag=3.5))
        assert np.array_equal(read_depth_pfm(a).values, read_depth_pfm(b).values)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "d.pfm"
        p.write_bytes(b"P6\n1 1\n-1.0\n" + struct.pack("<f", 1.0))
        with pytest.raises(FormatError, match="not a PFM"):
            read_depth_pfm(p)

    def test_color_pfm_rejected(self, tmp_path):
        p = tmp_path / "d.pfm"
        p.write_bytes(b"PF\n1 1\n-1.0\n" + struct.pack("<3f", 1.0, 2.0, 3.0))
        with pytest.raises(FormatError, match='color "PF"'):
            read_depth_pfm(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "d.pfm"
        full = oracles.pfm_bytes(np.ones((2, 2)), little_endian=True)
        p.write_bytes(full[:-4])
        with pytest.raises(TruncatedFileError, match="truncated"):
            read_depth_pfm(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "d.pfm"
        p.write_bytes(b"Pf\n2 2\n")
        with pytest.raises(TruncatedFileError):
            read_depth_pfm(p)

    def test_nonfinite_rejected(self, tmp_path):
        p = tmp_path / "d.pfm"
        p.write_bytes(oracles.pfm_bytes(np.array([[1.0, np.nan]]), little_endian=True))
        with pytest.raises(FormatError, match="non-finite"):
            read_depth_pfm(p)


class TestFlo:
    def test_minimal_layout(self, tmp_path):
        p = tmp_path / "z.flo"
        write_flo(_field([[0.0]], [[0.0]]), p)
        data = p.read_bytes()
        assert len(data) == 20  # 12-byte header + 8 bytes for one pixel
        assert struct.unpack("<f", data[:4])[0] == 202021.25
        assert struct.unpack("<ii", data[4:12]) == (1, 1)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(33)
        for i in range(10):
            h, w = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            m = _field(
                rng.standard_normal((h, w)).astype(np.float32),
                rng.standard_normal((h, w)).astype(np.float32),
            )
            p = tmp_path / f"f{i}.flo"
            write_flo(m, p)
            back = read_flo(p)
            assert back.u.tobytes() == m.u.tobytes()
            assert back.v.tobytes() == m.v.tobytes()
            assert (back.height, back.width) == (h, w)

    def test_golden_bytes_match_oracle(self, tmp_path):
        u = np.array([[0.5, -1.25], [3.0, 0.0]], dtype=np.float32)
        v = np.array([[-0.5, 2.0], [65504.0, -0.0]], dtype=np.float32)
        p = tmp_path / "g.flo"
        write_flo(_field(u, v), p)
        assert p.read_bytes() == oracles.flo_bytes_reference(u, v)

    def test_zeroed_magic(self, tmp_path):
        p = tmp_path / "bad.flo"
        write_flo(_field([[1.0]], [[2.0]]), p)
        data = bytearray(p.read_bytes())
        data[:4] = b"\x00\x00\x00\x00"
        p.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="not a .flo file"):
            read_flo(p)

    def test_truncated_by_four(self, tmp_path):
        p = tmp_path / "t.flo"
        write_flo(_field([[1.0, 2.0]], [[3.0, 4.0]]), p)
        p.write_bytes(p.read_bytes()[:-4])
        with pytest.raises(TruncatedFileError, match="truncated"):
            read_flo(p)

    def test_trailing_bytes(self, tmp_path):
        p = tmp_path / "x.flo"
        write_flo(_field([[1.0]], [[2.0]]), p)
        p.write_bytes(p.read_bytes() + b"\x00" * 3)
        with pytest.raises(FormatError, match="trailing"):
            read_flo(p)

    def test_short_header(self, tmp_path):
        p = tmp_path / "s.flo"
        p.write_bytes(b"PIEH\x01\x00")
        with pytest.raises(TruncatedFileError):
            read_flo(p)

    def test_bad_dimensions(self, tmp_path):
        p = tmp_path / "d.flo"
        p.write_bytes(b"PIEH" + struct.pack("<ii", -1, 4))
        with pytest.raises(FormatError, match="dimensions"):
            read_flo(p)

    def test_nonfinite_write_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_flo(_field([[np.nan]], [[0.0]]), tmp_path / "n.flo")


class TestPngRgb:
    def test_single_white_pixel(self, tmp_path):
        p = tmp_path / "w.png"
        write_png_rgb(np.full((1, 1, 3), 255, dtype=np.uint8), p)
        assert np.array_equal(read_png_rgb(p), np.full((1, 1, 3), 255, dtype=np.uint8))

    def test_round_trip_pixel_identical(self, tmp_path):
        rng = np.random.default_rng(34)
        pixels = rng.integers(0, 256, size=(9, 13, 3), dtype=np.uint8)
        p = tmp_path / "r.png"
        write_png_rgb(pixels, p)
        assert np.array_equal(read_png_rgb(p), pixels)

    def test_encoding_deterministic(self, tmp_path):
        rng = np.random.default_rng(35)
        pixels = rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        write_png_rgb(pixels, a)
        write_png_rgb(pixels, b)
        assert a.read_bytes() == b.read_bytes()

    def test_gray8_writer(self, tmp_path):
        p = tmp_path / "g.png"
        write_png_gray8(np.array([[0, 128, 255]], dtype=np.uint8), p)
        with Image.open(p) as img:
            assert img.mode == "L"
            assert np.array_equal(np.asarray(img), np.array([[0, 128, 255]]))


class TestCorruptionRobustness:
    def test_readers_never_crash_on_mangled_files(self, tmp_path):
        # Random truncations and byte flips must yield a typed error or
        # parse cleanly; any other exception type is a reader bug.
        rng = np.random.default_rng(36)
        flo = tmp_path / "base.flo"
        write_flo(_field(rng.standard_normal((4, 5)).astype(np.float32),
                         rng.standard_normal((4, 5)).astype(np.float32)), flo)
        pfm = tmp_path / "base.pfm"
        pfm.write_bytes(oracles.pfm_bytes(rng.standard_normal((4, 5)), little_endian=True))
        for base, reader in ((flo, read_flo), (pfm, read_depth_pfm)):
            data = base.read_bytes()
            target = tmp_path / f"mangled{base.suffix}"
            for trial in range(60):
                mangled = bytearray(data)
                if trial % 2 == 0:
                    mangled = mangled[: int(rng.integers(0, len(mangled)))]
                else:
                    for _ in range(int(rng.integers(1, 6))):
                        mangled[int(rng.integers(0, len(mangled)))] = int(rng.integers(0, 256))
                target.write_bytes(bytes(mangled))
                try:
                    reader(target)
                except FormatError:
                    pass  # TruncatedFileError included


class TestReadDepthAuto:
    def test_dispatch(self, tmp_path):
        png = tmp_path / "a.png"
        write_png16(png, np.array([[1, 2]], dtype=np.uint16))
        pfm = tmp_path / "a.pfm"
        pfm.write_bytes(oracles.pfm_bytes(np.array([[5.0]]), little_endian=True))
        assert read_depth_auto(png).width == 2
        assert read_depth_auto(pfm).values[0, 0] == 5.0

    def test_unsupported_suffix(self, tmp_path):
        p = tmp_path / "a.exr"
        p.write_bytes(b"")
        with pytest.raises(FormatError, match="unsupported depth format"):
            read_depth_auto(p)
