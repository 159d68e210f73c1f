import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from sfdbp.defocus import CameraConfig, gaussian_kernel, sigma_from_depth
from sfdbp.imaging import blur, render_observation_stack, space_variant_blur
from sfdbp.scenes import make_depth, noise_texture, stripe_texture


def test_constant_depth_is_convolution(cams):
    f = noise_texture(48, 40, seed=3)
    d = np.full(f.shape, 0.33)
    g = space_variant_blur(f, d, cams[0])
    k = gaussian_kernel(sigma_from_depth(0.33, cams[0]))
    r = k.shape[0] // 2
    ref = ndimage.convolve(f, k, mode="constant")
    np.testing.assert_allclose(g[r:-r, r:-r], ref[r:-r, r:-r], atol=1e-10, rtol=0)
    # at the borders the weights are renormalised to the in-image mass
    norm = ndimage.convolve(np.ones_like(f), k, mode="constant")
    np.testing.assert_allclose(g, ref / norm, atol=1e-10, rtol=0)


def test_in_focus_is_identity(cams):
    f = noise_texture(32, 32, seed=4)
    d = np.full(f.shape, cams[1].focus_distance)
    np.testing.assert_array_equal(space_variant_blur(f, d, cams[1]), f)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_flat_field(seed, c):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.2, 0.6, size=(24, 20))
    cam = CameraConfig.focused_at(0.28, 0.035, 0.001, 6e4)
    g = space_variant_blur(np.full(d.shape, c), d, cam)
    assert np.abs(g - c).max() <= 1e-10


def test_dimension_mismatch(cams):
    with pytest.raises(ValueError):
        space_variant_blur(np.zeros((4, 4)), np.ones((4, 5)), cams[0])


def _edge_halfwidth(row):
    """10-90 % rise distance of a monotone edge profile, in pixels."""
    lo, hi = row.min(), row.max()
    t = (row - lo) / (hi - lo)
    x = np.arange(len(row))
    return np.interp(0.9, t, x) - np.interp(0.1, t, x)


def test_monotone_blur(cams):
    # step texture, depths moving away from the focus of cams[0]
    f = np.zeros((9, 64))
    f[:, 32:] = 1.0
    widths = []
    for depth in [0.30, 0.32, 0.35, 0.38, 0.42]:
        g = space_variant_blur(f, np.full(f.shape, depth), cams[0])
        widths.append(_edge_halfwidth(g[4, 16:48]))
    assert np.all(np.diff(widths) > 0)


def test_stack_determinism(cams):
    f = noise_texture(32, 32, seed=5)
    d = make_depth("sphere_cap", 32, 32, 0.3, 0.4)
    a = render_observation_stack(f, d, cams)
    b = render_observation_stack(f, d, cams)
    for x, y in zip(a, b):
        assert x.tobytes() == y.tobytes()
    n1 = render_observation_stack(f, d, cams, noise_sigma=0.01, seed=9)
    n2 = render_observation_stack(f, d, cams, noise_sigma=0.01, seed=9)
    n3 = render_observation_stack(f, d, cams, noise_sigma=0.01, seed=10)
    for x, y in zip(n1, n2):
        assert x.tobytes() == y.tobytes()
    assert not np.array_equal(n1[0], n3[0])


def test_stack_identical_configs(cams):
    f = stripe_texture(16, 32)
    d = make_depth("slanted_plane", 16, 32, 0.3, 0.4)
    a, b = render_observation_stack(f, d, [cams[0], cams[0]])
    np.testing.assert_array_equal(a, b)


def test_stack_needs_two(cams):
    with pytest.raises(ValueError):
        render_observation_stack(np.zeros((4, 4)), np.ones((4, 4)), [cams[0]])


def test_blur_reflect101():
    f = noise_texture(20, 20, seed=1)
    k = gaussian_kernel(1.3)
    np.testing.assert_allclose(blur(f, 1.3), ndimage.convolve(f, k, mode="mirror"), atol=1e-14)
