import numpy as np
import pytest
from hypothesis import given, strategies as st

from stereo360.depth import depth_feature, diff_mean, diff_stddev, difference_map, entropy
from stereo360.errors import InvalidInputError
from stereo360.projection import extract_viewport
from stereo360.synthetic import DISPARITY_SHIFT, scene, stereo_pair
from stereo360.viewpoints import sample_viewpoints


def test_zero_disparity_is_black():
    img = np.random.default_rng(0).uniform(0, 255, (20, 30))
    d = difference_map(img, img)
    assert np.all(d == 0)
    assert entropy(d) == 0.0 and diff_mean(d) == 0.0 and diff_stddev(d) == 0.0


def test_constant_offset():
    img = np.random.default_rng(1).uniform(0, 200, (20, 30))
    np.testing.assert_allclose(difference_map(img + 12.5, img), 12.5)
    np.testing.assert_allclose(difference_map(img, img + 12.5), 12.5)


def test_matches_elementwise_oracle():
    rng = np.random.default_rng(2)
    a, b = rng.uniform(0, 255, (2, 9, 7))
    d = difference_map(a, b)
    for i in range(9):
        for j in range(7):
            assert d[i, j] == abs(a[i, j] - b[i, j])


def test_entropy_examples():
    assert entropy(np.array([[0.0, 0.0], [40.0, 40.0]])) == 1.0
    uniform = np.arange(256, dtype=float).reshape(16, 16)
    assert entropy(uniform) == 8.0


def test_mean_std_examples():
    d = np.array([[0.0, 0.0], [10.0, 10.0]])
    assert diff_mean(d) == 5.0 and diff_stddev(d) == 5.0
    c = np.full((4, 4), 10.0)
    assert diff_mean(c) == 10.0 and diff_stddev(c) == 0.0


@given(st.integers(0, 2 ** 32 - 1))
def test_invariances(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, 256, (2, 12, 12)).astype(float)
    d = difference_map(a, b)
    assert 0.0 <= entropy(d) <= 8.0
    assert entropy(rng.permutation(d.ravel()).reshape(d.shape)) == entropy(d)
    assert np.array_equal(difference_map(b, a), d)
    c = rng.integers(0, 64, a.shape).astype(float)
    for kind in ("entropy", "mean", "stddev"):
        assert depth_feature(difference_map(a + c, b + c), kind) == depth_feature(d, kind)


def test_entropy_increases_with_disparity():
    base = scene(7, 512)
    vp = sample_viewpoints(8)[5]
    values = []
    for name in ("zero", "medium", "large"):
        left, right = stereo_pair(base, DISPARITY_SHIFT[name])
        values.append(entropy(difference_map(extract_viewport(left, vp), extract_viewport(right, vp))))
    assert values[0] < values[1] < values[2]


def test_errors():
    with pytest.raises(InvalidInputError):
        difference_map(np.zeros((4, 4)), np.zeros((4, 5)))
    with pytest.raises(Exception):
        depth_feature(np.zeros((4, 4)), "median")
