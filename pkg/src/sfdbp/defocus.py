"""Thin-lens defocus model: depth -> Gaussian blur, relative blur between views."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Below this the truncated kernel is a 1x1 delta anyway.
MIN_SIGMA = 0.3


@dataclass(frozen=True)
class CameraConfig:
    """Thin-lens camera for one observation.

    Lengths in meters, ``pixel_scale`` in pixels per meter.
    """

    aperture_radius: float
    lens_to_image: float
    focal_length: float
    pixel_scale: float

    def __post_init__(self):
        for name in ("aperture_radius", "lens_to_image", "focal_length", "pixel_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if self.lens_to_image <= self.focal_length:
            raise ValueError(
                "lens_to_image must exceed focal_length "
                f"({self.lens_to_image} <= {self.focal_length})"
            )

    @property
    def inverse_focus_distance(self) -> float:
        return 1.0 / self.focal_length - 1.0 / self.lens_to_image

    @property
    def focus_distance(self) -> float:
        return 1.0 / self.inverse_focus_distance

    @classmethod
    def focused_at(cls, focus_distance, focal_length, aperture_radius, pixel_scale):
        """Camera whose image plane is placed so that ``focus_distance`` is sharp."""
        v = 1.0 / (1.0 / focal_length - 1.0 / focus_distance)
        return cls(aperture_radius, v, focal_length, pixel_scale)

    def to_dict(self) -> dict:
        return {
            "aperture_radius": self.aperture_radius,
            "lens_to_image": self.lens_to_image,
            "focal_length": self.focal_length,
            "pixel_scale": self.pixel_scale,
        }


@dataclass(frozen=True)
class BlurSpec:
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")


class Direction(enum.Enum):
    """Ordering of the first operand's blur relative to the second.

    ``SHARPER`` means the first image must be convolved with the relative
    kernel to match the second.
    """

    SHARPER = "sharper"
    BLURRIER = "blurrier"
    EQUAL = "equal"


@dataclass(frozen=True)
class RelativeBlur:
    sigma_r: float
    direction: Direction

    def __post_init__(self):
        if not (math.isfinite(self.sigma_r) and self.sigma_r >= 0):
            raise ValueError(f"sigma_r must be finite and >= 0, got {self.sigma_r!r}")
        if self.direction is Direction.EQUAL and self.sigma_r != 0:
            raise ValueError("EQUAL direction requires sigma_r == 0")


def sigma_from_depth(depth: float, cam: CameraConfig) -> BlurSpec:
    """Gaussian PSF width in pixels for a scene point at ``depth`` meters.

    sigma = rho * |r V (1/F - 1/V - 1/D)|; the sign of the blur radius only
    says which side of focus the point lies on.
    """
    if not (math.isfinite(depth) and depth > 0):
        raise ValueError(f"depth must be finite and > 0, got {depth!r}")
    if depth == cam.focus_distance:
        return BlurSpec(0.0)
    radius = cam.aperture_radius * cam.lens_to_image * (cam.inverse_focus_distance - 1.0 / depth)
    return BlurSpec(cam.pixel_scale * abs(radius))


def sigma_map(depth: np.ndarray, cam: CameraConfig) -> np.ndarray:
    """Vectorised :func:`sigma_from_depth` over an array of depths."""
    depth = np.asarray(depth, dtype=np.float64)
    if not np.all(np.isfinite(depth)) or np.any(depth <= 0):
        raise ValueError("depths must be finite and > 0")
    scale = cam.pixel_scale * cam.aperture_radius * cam.lens_to_image
    sig = scale * np.abs(cam.inverse_focus_distance - 1.0 / depth)
    sig[depth == cam.focus_distance] = 0.0
    return sig


def relative_sigma(a: BlurSpec, b: BlurSpec) -> RelativeBlur:
    """Relative blur taking the sharper of (a, b) onto the blurrier one."""
    sa, sb = a.sigma, b.sigma
    if sa == sb:
        return RelativeBlur(0.0, Direction.EQUAL)
    sr = math.sqrt(abs(sb * sb - sa * sa))
    return RelativeBlur(sr, Direction.SHARPER if sa < sb else Direction.BLURRIER)


def kernel_radius(sigma: float) -> int:
    if sigma < MIN_SIGMA:
        return 0
    return math.ceil(3.0 * sigma)


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    r = kernel_radius(sigma)
    if r == 0:
        return np.ones(1)
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_kernel(spec: BlurSpec | float) -> np.ndarray:
    """Truncated (3 sigma), normalised, separable 2D Gaussian.

    Sigmas below ``MIN_SIGMA`` give the 1x1 identity kernel.
    """
    sigma = spec.sigma if isinstance(spec, BlurSpec) else float(spec)
    g = gaussian_kernel_1d(sigma)
    k = np.outer(g, g)
    return k / k.sum()
