"""Synthetic textures and analytic depth maps for test scenes."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

SHAPES = ("slanted_plane", "sphere_cap", "step_edge", "sinusoid", "constant")
TEXTURES = ("noise", "stripes", "checker")


def noise_texture(height, width, seed=0, smooth=1.0, lo=0.1, hi=0.9):
    """Band-limited random texture rescaled to [lo, hi]."""
    rng = np.random.default_rng(seed)
    t = rng.random((height, width))
    if smooth > 0:
        t = ndimage.gaussian_filter(t, smooth, mode="wrap")
    t = (t - t.min()) / (t.max() - t.min())
    return lo + (hi - lo) * t


def stripe_texture(height, width, period=32, lo=0.2, hi=0.8):
    x = np.arange(width)
    row = np.where((x // (period // 2)) % 2 == 0, lo, hi)
    return np.tile(row, (height, 1)).astype(np.float64)


def checker_texture(height, width, period=16, lo=0.2, hi=0.8):
    yy, xx = np.indices((height, width))
    c = ((yy // (period // 2)) + (xx // (period // 2))) % 2
    return np.where(c == 0, lo, hi).astype(np.float64)


def make_texture(kind, height, width, seed=0, **kw):
    if kind == "noise":
        return noise_texture(height, width, seed=seed, **kw)
    if kind == "stripes":
        return stripe_texture(height, width, **kw)
    if kind == "checker":
        return checker_texture(height, width, **kw)
    raise ValueError(f"unknown texture {kind!r}; choose from {TEXTURES}")


def _profile(shape, height, width, **kw) -> np.ndarray:
    """Unnormalised shape; larger values are farther away."""
    yy, xx = np.indices((height, width), dtype=np.float64)
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    if shape == "slanted_plane":
        return xx
    if shape == "sphere_cap":
        radius = kw.get("radius", 0.45 * min(height, width))
        r2 = ((yy - cy) ** 2 + (xx - cx) ** 2) / radius**2
        return -np.sqrt(np.clip(1.0 - r2, 0.0, None))
    if shape == "step_edge":
        col = kw.get("edge_col", width // 2)
        return (xx >= col).astype(np.float64)
    if shape == "sinusoid":
        periods = kw.get("periods", 2.0)
        return np.sin(2 * np.pi * periods * xx / width) * np.cos(2 * np.pi * periods * yy / height)
    raise ValueError(f"unknown shape {shape!r}; choose from {SHAPES}")


def make_depth(shape, height, width, depth_min, depth_max, **kw) -> np.ndarray:
    """Analytic depth map spanning exactly [depth_min, depth_max]."""
    if not 0 < depth_min <= depth_max:
        raise ValueError(f"need 0 < depth_min <= depth_max, got [{depth_min}, {depth_max}]")
    if shape == "constant":
        return np.full((height, width), float(depth_min))
    p = _profile(shape, height, width, **kw)
    span = p.max() - p.min()
    if span == 0:
        return np.full((height, width), float(depth_min))
    p = (p - p.min()) / span
    d = depth_min + (depth_max - depth_min) * p
    d[p == 0] = depth_min
    d[p == 1] = depth_max
    return d


def local_variance(image, radius=3):
    size = 2 * radius + 1
    m = ndimage.uniform_filter(image, size, mode="mirror")
    m2 = ndimage.uniform_filter(image * image, size, mode="mirror")
    return np.maximum(m2 - m * m, 0.0)


def texture_mask(image, threshold=1e-4, radius=3, border=0):
    """True where local intensity variance exceeds ``threshold``."""
    mask = local_variance(np.asarray(image, dtype=np.float64), radius) > threshold
    if border > 0:
        mask[:border, :] = False
        mask[-border:, :] = False
        mask[:, :border] = False
        mask[:, -border:] = False
    return mask
