"""Forward image formation: space-variant defocus and equi-focal convolution."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from .defocus import MIN_SIGMA, CameraConfig, gaussian_kernel_1d, sigma_from_depth, sigma_map


def as_image(a, name="image") -> np.ndarray:
    """Validate and return a 2D finite float64 raster."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def as_depth(d, shape=None) -> np.ndarray:
    d = as_image(d, "depth")
    if np.any(d <= 0):
        raise ValueError("depth values must be strictly positive")
    if shape is not None and d.shape != tuple(shape):
        raise ValueError(f"depth shape {d.shape} does not match image shape {tuple(shape)}")
    return d


def blur(image: np.ndarray, sigma: float) -> np.ndarray:
    """Convolve with the truncated Gaussian, reflect-101 borders."""
    image = np.asarray(image, dtype=np.float64)
    g = gaussian_kernel_1d(sigma)
    if g.size == 1:
        return image.copy()
    out = ndimage.correlate1d(image, g, axis=0, mode="mirror")
    return ndimage.correlate1d(out, g, axis=1, mode="mirror")


def equifocal_blur(focused, depth: float, cam: CameraConfig) -> np.ndarray:
    """Image of a fronto-parallel scene at a single depth (plain convolution)."""
    return blur(as_image(focused, "focused"), sigma_from_depth(depth, cam).sigma)


def _half_profiles(sigma: np.ndarray, rmax: int) -> np.ndarray:
    """Per-pixel 1D kernel weights at offsets 0..rmax, matching gaussian_kernel_1d."""
    delta = sigma < MIN_SIGMA
    s = np.where(delta, 1.0, sigma)
    radius = np.where(delta, 0, np.ceil(3.0 * s)).astype(np.int64)
    prof = np.empty((rmax + 1,) + sigma.shape)
    for d in range(rmax + 1):
        prof[d] = np.where(d <= radius, np.exp(-(d * d) / (2.0 * s * s)), 0.0)
    z = prof[0] + 2.0 * prof[1:].sum(axis=0)
    return prof / z


def space_variant_blur(focused, depth, cam: CameraConfig) -> np.ndarray:
    """Render ``g(n) = sum_m h(n; m) f(m)`` by scattering each source pixel.

    Every source pixel spreads its intensity through the Gaussian for its
    own depth; overlapping contributions are averaged, i.e. each output pixel
    is divided by the total kernel weight it received. Constant images stay
    constant for any depth map and a constant depth map reproduces the plain
    convolution away from the borders.
    """
    f = as_image(focused, "focused")
    dep = as_depth(depth, f.shape)
    sig = sigma_map(dep, cam)
    if np.all(sig < MIN_SIGMA):
        return f.copy()
    rmax = int(np.ceil(3.0 * sig.max()))
    prof = _half_profiles(sig, rmax)
    h, w = f.shape
    num = np.zeros((h + 2 * rmax, w + 2 * rmax))
    den = np.zeros_like(num)
    for dy in range(-rmax, rmax + 1):
        py = prof[abs(dy)]
        if not py.any():
            continue
        for dx in range(-rmax, rmax + 1):
            wgt = py * prof[abs(dx)]
            if not wgt.any():
                continue
            ys, xs = rmax + dy, rmax + dx
            num[ys:ys + h, xs:xs + w] += wgt * f
            den[ys:ys + h, xs:xs + w] += wgt
    num = num[rmax:rmax + h, rmax:rmax + w]
    den = den[rmax:rmax + h, rmax:rmax + w]
    return num / den


def render_observation_stack(
    focused,
    depth,
    cams: Sequence[CameraConfig],
    noise_sigma: float = 0.0,
    seed: int | None = None,
    clip: bool = True,
) -> list[np.ndarray]:
    """One space-variant render per camera, plus optional seeded Gaussian noise."""
    if len(cams) < 2:
        raise ValueError(f"need at least 2 camera configs, got {len(cams)}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    f = as_image(focused, "focused")
    dep = as_depth(depth, f.shape)
    rng = np.random.default_rng(seed)
    out = []
    for cam in cams:
        g = space_variant_blur(f, dep, cam)
        if noise_sigma > 0:
            g = g + rng.normal(0.0, noise_sigma, size=g.shape)
            if clip:
                g = np.clip(g, 0.0, 1.0)
        out.append(g)
    return out
