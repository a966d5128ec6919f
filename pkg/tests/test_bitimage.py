import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bits, random_image
from viskey.bitimage import (
    BitImage,
    DimensionError,
    PbmError,
    Rect,
    crop,
    downsample_majority,
    or_merge,
    projection,
    read_pbm,
    scale_nn,
    write_pbm,
)


def images(max_side=64):
    return st.integers(1, max_side).flatmap(
        lambda w: st.integers(1, max_side).flatmap(
            lambda h: st.lists(
                st.integers(0, 1), min_size=w * h, max_size=w * h
            ).map(lambda px: BitImage(np.array(px, dtype=np.uint8).reshape(h, w)))
        )
    )


class TestBitImage:
    def test_basic_properties(self):
        img = bits("10\n01")
        assert (img.width, img.height) == (2, 2)
        assert list(img.pixels) == [1, 0, 0, 1]

    def test_blank(self):
        img = BitImage.blank(3, 2)
        assert (img.width, img.height) == (3, 2)
        assert img.a.sum() == 0

    def test_immutable(self):
        img = bits("10")
        with pytest.raises(AttributeError):
            img.a = None
        with pytest.raises(ValueError):
            img.a[0, 0] = 0

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BitImage(np.array([[0, 2]], dtype=np.uint8))

    def test_rejects_empty(self):
        with pytest.raises(DimensionError):
            BitImage(np.zeros((0, 4), dtype=np.uint8))
        with pytest.raises(DimensionError):
            BitImage(np.zeros(4, dtype=np.uint8))

    def test_eq_and_hash(self):
        a, b, c = bits("10\n01"), bits("10\n01"), bits("10\n00")
        assert a == b and hash(a) == hash(b)
        assert a != c


class TestRect:
    def test_dimensions(self):
        r = Rect(2, 7, 1, 3)
        assert (r.height, r.width) == (6, 3)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            Rect(3, 2, 0, 0)
        with pytest.raises(ValueError):
            Rect(0, 0, -1, 0)


class TestReadPbm:
    def test_p1_example(self):
        img = read_pbm(b"P1\n2 2\n1 0\n0 1")
        assert img == bits("10\n01")

    def test_p4_full_byte(self):
        img = read_pbm(b"P4\n8 1\n" + bytes([0xFF]))
        assert img == bits("11111111")

    def test_p4_padding_ignored(self):
        img = read_pbm(b"P4\n9 1\n" + bytes([0xFF, 0x80]))
        assert img == bits("111111111")

    def test_comments_and_whitespace(self):
        img = read_pbm(b"P1 # comment\n# another\n 2\t2 \n1 0 0 1")
        assert img == bits("10\n01")

    def test_bad_magic_offset(self):
        with pytest.raises(PbmError) as e:
            read_pbm(b"P5\n2 2\n")
        assert e.value.offset == 0

    def test_nonnumeric_dimension(self):
        with pytest.raises(PbmError):
            read_pbm(b"P1\nx 2\n")

    def test_nonpositive_dimension(self):
        with pytest.raises(PbmError):
            read_pbm(b"P1\n0 2\n")

    def test_truncated_p1(self):
        with pytest.raises(PbmError):
            read_pbm(b"P1\n2 2\n1 0 1")

    def test_truncated_p4(self):
        with pytest.raises(PbmError):
            read_pbm(b"P4\n16 2\n" + bytes(3))

    def test_invalid_p1_bit(self):
        with pytest.raises(PbmError):
            read_pbm(b"P1\n2 1\n1 7")


class TestWritePbm:
    def test_p1_smallest(self):
        assert write_pbm(bits("1"), "P1") == b"P1\n1 1\n1\n"

    def test_p4_full_byte(self):
        assert write_pbm(bits("11111111"), "P4") == b"P4\n8 1\n" + bytes([0xFF])

    def test_p4_msb_padding(self):
        assert write_pbm(bits("111111111"), "P4") == b"P4\n9 1\n" + bytes([0xFF, 0x80])

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            write_pbm(bits("1"), "P2")

    @settings(max_examples=60, deadline=None)
    @given(images(), st.sampled_from(["P1", "P4"]))
    def test_roundtrip(self, img, variant):
        assert read_pbm(write_pbm(img, variant)) == img


class TestOrMerge:
    def test_identity_with_white(self):
        img = bits("10\n01")
        assert or_merge([img, BitImage.blank(2, 2)]) == img

    def test_fig4_blocks(self):
        assert or_merge([bits("10"), bits("01")]) == bits("11")

    def test_idempotent(self):
        img = bits("10\n01")
        assert or_merge([img, img]) == img

    def test_dimension_mismatch_message(self):
        with pytest.raises(DimensionError) as e:
            or_merge([bits("10"), bits("1\n0")])
        assert "image 1" in str(e.value)

    def test_empty(self):
        with pytest.raises(ValueError):
            or_merge([])

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_commutative_associative(self, data):
        w = data.draw(st.integers(1, 12))
        h = data.draw(st.integers(1, 12))
        seed = data.draw(st.integers(0, 2**31))
        rng = np.random.default_rng(seed)
        a, b, c = (random_image(rng, w, h) for _ in range(3))
        assert or_merge([a, b]) == or_merge([b, a])
        assert or_merge([or_merge([a, b]), c]) == or_merge([a, or_merge([b, c])])


class TestProjection:
    def test_all_white(self):
        assert projection(BitImage.blank(5, 3), "rows") == [0, 0, 0]

    def test_example(self):
        img = bits("10\n01")
        assert projection(img, "rows") == [1, 1]
        assert projection(img, "columns") == [1, 1]

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            projection(bits("1"), "diag")

    def test_counting_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            img = random_image(rng, int(rng.integers(1, 20)), int(rng.integers(1, 20)))
            total = int(img.a.sum())
            assert sum(projection(img, "rows")) == total
            assert sum(projection(img, "columns")) == total


class TestCrop:
    def test_full_extent(self):
        img = bits("101\n010")
        assert crop(img, Rect(0, 1, 0, 2)) == img

    def test_example(self):
        img = BitImage(np.ones((4, 4), dtype=np.uint8))
        assert crop(img, Rect(1, 2, 1, 2)) == BitImage(np.ones((2, 2), dtype=np.uint8))

    def test_out_of_bounds(self):
        with pytest.raises(DimensionError):
            crop(bits("10\n01"), Rect(0, 2, 0, 1))

    def test_indexing_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            img = random_image(rng, 12, 9)
            t = int(rng.integers(0, 9))
            b = int(rng.integers(t, 9))
            l = int(rng.integers(0, 12))
            r = int(rng.integers(l, 12))
            sub = crop(img, Rect(t, b, l, r))
            for i in range(sub.height):
                for j in range(sub.width):
                    assert sub.a[i, j] == img.a[t + i, l + j]


class TestScaleNn:
    def test_identity(self):
        rng = np.random.default_rng(3)
        img = random_image(rng, 32, 32)
        assert scale_nn(img, 32, 32) == img

    def test_one_pixel_blowup(self):
        out = scale_nn(bits("1"), 32, 32)
        assert out.a.sum() == 32 * 32

    def test_floor_formula_example(self):
        out = scale_nn(bits("10\n00"), 4, 4)
        expect = bits("1100\n1100\n0000\n0000")
        assert out == expect

    def test_idempotent_at_fixed_size(self):
        rng = np.random.default_rng(5)
        img = random_image(rng, 17, 9)
        once = scale_nn(img, 20, 24)
        assert scale_nn(once, 20, 24) == once

    def test_floor_formula_random_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            img = random_image(rng, int(rng.integers(1, 10)), int(rng.integers(1, 10)))
            ow, oh = int(rng.integers(1, 15)), int(rng.integers(1, 15))
            out = scale_nn(img, ow, oh)
            for i in range(oh):
                for j in range(ow):
                    assert out.a[i, j] == img.a[(i * img.height) // oh, (j * img.width) // ow]

    def test_bad_target(self):
        with pytest.raises(DimensionError):
            scale_nn(bits("1"), 0, 4)


class TestDownsampleMajority:
    def test_identity_blocks(self):
        img = bits("10\n01")
        assert downsample_majority(img, 1, 1) == img

    def test_tie_goes_black(self):
        img = bits("110\n100")  # one 2x3 block with 3 of 6 black
        assert downsample_majority(img, 2, 3) == bits("1")

    def test_one_by_two_threshold(self):
        # ceil(2/2) = 1: a single black subpixel already wins
        assert downsample_majority(bits("10"), 1, 2) == bits("1")
        assert downsample_majority(bits("00"), 1, 2) == bits("0")

    def test_non_divisible(self):
        with pytest.raises(DimensionError):
            downsample_majority(bits("101"), 1, 2)

    def test_two_of_two_partial_order_oracle(self):
        from viskey import vcs

        params = vcs.scheme_params(2)
        rng = np.random.default_rng(17)
        for seed in range(5):
            secret = random_image(rng, 16, 16)
            merged = vcs.reconstruct(vcs.encode(secret, params, seed).shares)
            down = downsample_majority(merged, params.block_h, params.block_w)
            # graying only adds black: down >= secret, equal on black pixels
            assert np.all(down.a >= secret.a)
            assert np.all(down.a[secret.a == 1] == 1)
