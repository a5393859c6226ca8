import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vimpde.errors import DimensionError, ParameterError, PgmParseError
from vimpde.field import GridField, GridGeometry
from vimpde.imaging import (
    ImageU8,
    add_gaussian_noise,
    edge_contrast,
    from_unit,
    gaussian_noise,
    load_pgm,
    psnr,
    read_pgm,
    save_pgm,
    shapes_image,
    to_unit,
    write_pgm,
)


class TestPgm:
    def test_ascii_example(self):
        img = read_pgm(b"P2\n2 2\n255\n0 64\n128 255\n")
        assert (img.width, img.height) == (2, 2)
        assert img.pixels.tolist() == [[0, 64], [128, 255]]

    def test_binary_example_with_comments(self):
        data = b"P5\n# made by hand\n3 # width\n1\n255\n" + bytes([1, 2, 250])
        img = read_pgm(data)
        assert img.pixels.tolist() == [[1, 2, 250]]

    def test_writer_layout(self):
        img = ImageU8(3, 2, np.array([[0, 1, 2], [253, 254, 255]]))
        assert write_pgm(img) == b"P5\n3 2\n255\n" + bytes([0, 1, 2, 253, 254, 255])

    @pytest.mark.parametrize("data,offset,fragment", [
        (b"P6\n1 1\n255\n\x00", 0, "magic"),
        (b"P5\n2 x\n255\n", 5, "height"),
        (b"P5\n2 2\n65535\n" + bytes(8), 7, "maxval 255"),
        (b"P5\n2 2\n255\n\x00\x01", 13, "truncated"),
        (b"P2\n2 1\n255\n7 300\n", 13, "exceeds"),
        (b"P2\n2 1\n255\n7\n", 13, "end of data"),
        (b"P5\n0 3\n255\n", 6, "positive"),
    ])
    def test_malformed_inputs_report_offsets(self, data, offset, fragment):
        with pytest.raises(PgmParseError) as info:
            read_pgm(data)
        assert info.value.offset == offset
        assert fragment in str(info.value)
        assert f"byte offset {offset}" in str(info.value)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.data())
    def test_round_trip(self, w, h, data):
        px = data.draw(arrays(np.uint8, (h, w)))
        img = ImageU8(w, h, px)
        assert read_pgm(write_pgm(img)) == img

    def test_file_helpers(self, tmp_path):
        img = ImageU8(2, 1, np.array([9, 10]))
        save_pgm(tmp_path / "a.pgm", img)
        assert load_pgm(tmp_path / "a.pgm") == img
        (tmp_path / "bad.pgm").write_bytes(b"P5\n1 1\n255\n")
        with pytest.raises(PgmParseError, match="bad.pgm"):
            load_pgm(tmp_path / "bad.pgm")
        with pytest.raises(OSError):
            load_pgm(tmp_path / "missing.pgm")

    def test_image_validation(self):
        with pytest.raises(DimensionError):
            ImageU8(2, 2, np.zeros(3))
        with pytest.raises(ParameterError):
            ImageU8(1, 1, np.array([256]))


class TestUnitRange:
    def test_examples(self):
        f = to_unit(ImageU8(3, 3, np.array([0, 255, 128] * 3)))
        assert f.values[0].tolist() == [0.0, 1.0, 128 / 255]
        assert f.geometry.hx == 1.0

    def test_clamp_and_round(self):
        g = GridGeometry(3, 3)
        v = np.array([[-0.3, 1.7, 0.5], [1 / 510, 0.9999, 0.0], [0.25, 0.75, 1.0]])
        px = from_unit(GridField(g, v)).pixels
        assert px.tolist() == [[0, 255, 128], [1, 255, 0], [64, 191, 255]]

    def test_every_level_survives_a_round_trip(self):
        img = ImageU8(16, 16, np.arange(256))
        assert from_unit(to_unit(img)) == img


def _box_muller_reference(count, seed):
    words = np.random.Philox(key=seed).random_raw(count + count % 2)
    out = []
    for w1, w2 in zip(words[0::2], words[1::2]):
        u1 = ((int(w1) >> 11) + 0.5) / 2**53
        u2 = ((int(w2) >> 11) + 0.5) / 2**53
        rad = math.sqrt(-2.0 * math.log(u1))
        out += [rad * math.cos(2 * math.pi * u2), rad * math.sin(2 * math.pi * u2)]
    return np.array(out[:count])


class TestNoise:
    def test_documented_algorithm(self):
        assert np.allclose(gaussian_noise(7, 123), _box_muller_reference(7, 123), rtol=0, atol=1e-15)

    def test_zero_sigma_is_identity(self):
        f = shapes_image(64)
        out = add_gaussian_noise(f, 0.0, seed=5)
        assert np.array_equal(out.values, f.values) and out.values is not f.values

    def test_deterministic_and_seed_dependent(self):
        assert gaussian_noise(100, 1).tobytes() == gaussian_noise(100, 1).tobytes()
        assert not np.array_equal(gaussian_noise(100, 1), gaussian_noise(100, 2))
        # a prefix does not depend on how many values were requested
        assert np.array_equal(gaussian_noise(5, 9), gaussian_noise(6, 9)[:5])

    def test_sample_statistics(self):
        f = GridField.constant(GridGeometry(256, 256), 0.5)
        d = add_gaussian_noise(f, 0.05, seed=0).values - 0.5
        assert 0.049 <= d.std() <= 0.051
        assert abs(d.mean()) <= 1e-3

    def test_rejects_negative_sigma(self):
        with pytest.raises(ParameterError):
            add_gaussian_noise(shapes_image(32), -0.1, 0)


def _naive_psnr(a, b):
    total = 0.0
    for j in range(a.shape[0]):
        for i in range(a.shape[1]):
            total += (a[j, i] - b[j, i]) ** 2
    mse = total / a.size
    return mse, 10 * math.log10(1.0 / mse)


class TestPsnr:
    def test_identical_images(self):
        f = shapes_image(32)
        rep = psnr(f, f)
        assert rep.mse == 0.0 and rep.psnr_infinite

    def test_uniform_offset(self):
        g = GridGeometry(8, 8)
        rep = psnr(GridField.constant(g, 0.6), GridField.constant(g, 0.5))
        assert rep.mse == pytest.approx(0.01, rel=1e-12)
        assert rep.psnr_db == pytest.approx(20.0, rel=1e-12)
        assert (rep.min, rep.max, rep.mean) == (0.6, 0.6, pytest.approx(0.6))

    def test_matches_direct_loop_and_is_symmetric(self):
        rng = np.random.default_rng(2)
        g = GridGeometry(13, 9)
        a, b = (GridField(g, rng.uniform(0, 1, g.shape)) for _ in range(2))
        mse, db = _naive_psnr(a.values, b.values)
        assert psnr(a, b).mse == pytest.approx(mse, rel=1e-12)
        assert psnr(a, b).psnr_db == pytest.approx(db, rel=1e-12)
        assert psnr(a, b).psnr_db == psnr(b, a).psnr_db

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            psnr(shapes_image(32), shapes_image(64))


def test_shapes_scene():
    f = shapes_image()
    assert f.geometry.shape == (128, 128)
    assert set(np.unique(f.values)) == {0.2, 0.5, 0.65, 0.8}
    assert edge_contrast(f) == pytest.approx(0.3)
