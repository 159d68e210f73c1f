"""Label discretisation and the relative-blur data cost volume."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .defocus import (
    BlurSpec,
    CameraConfig,
    Direction,
    RelativeBlur,
    relative_sigma,
    sigma_from_depth,
)
from .imaging import as_image, blur


@dataclass(frozen=True)
class LabelSet:
    """Uniform depth labels with their blur in every view.

    ``sigmas[l][i]`` is the blur of observation ``i`` at label ``l``;
    ``relative[l][i]`` relates observation ``i`` (first operand) to the
    reference observation (second operand).
    """

    depths: np.ndarray
    sigmas: tuple[tuple[BlurSpec, ...], ...]
    relative: tuple[tuple[RelativeBlur, ...], ...]
    reference_index: int

    def __len__(self):
        return len(self.depths)

    @property
    def depth_min(self) -> float:
        return float(self.depths[0])

    @property
    def depth_step(self) -> float:
        return float(self.depths[1] - self.depths[0])

    def depth_of(self, labels) -> np.ndarray:
        return self.depths[np.asarray(labels)]

    def nearest_label(self, depth) -> np.ndarray:
        idx = np.rint((np.asarray(depth, dtype=np.float64) - self.depth_min) / self.depth_step)
        return np.clip(idx, 0, len(self) - 1).astype(np.int64)


def build_label_set(
    depth_min: float,
    depth_max: float,
    num_labels: int,
    cams: Sequence[CameraConfig],
    reference_index: int = 0,
) -> LabelSet:
    if not (0 < depth_min < depth_max):
        raise ValueError(f"need 0 < depth_min < depth_max, got [{depth_min}, {depth_max}]")
    if num_labels < 2:
        raise ValueError(f"need at least 2 labels, got {num_labels}")
    if not cams:
        raise ValueError("no cameras given")
    if not 0 <= reference_index < len(cams):
        raise ValueError(f"reference_index {reference_index} out of range for {len(cams)} cameras")
    for i, cam in enumerate(cams):
        u = cam.focus_distance
        if depth_min < u < depth_max:
            raise ValueError(
                f"depth range [{depth_min}, {depth_max}] straddles the focus distance "
                f"{u:.6g} of camera {i}; blur is ambiguous on the two sides of focus"
            )
    depths = np.linspace(depth_min, depth_max, num_labels)
    sigmas = tuple(tuple(sigma_from_depth(float(d), cam) for cam in cams) for d in depths)
    relative = tuple(
        tuple(relative_sigma(row[i], row[reference_index]) for i in range(len(cams)))
        for row in sigmas
    )
    for i in range(len(cams)):
        s = np.array([row[i].sigma for row in sigmas])
        ds = np.diff(s)
        if not (np.all(ds > 0) or np.all(ds < 0)):
            raise ValueError(f"blur of camera {i} is not strictly monotone over the labels")
    return LabelSet(depths, sigmas, relative, reference_index)


@dataclass(frozen=True)
class CostVolume:
    """H x W x L data costs."""

    cost: np.ndarray
    label_set: LabelSet | None = None

    def __post_init__(self):
        c = self.cost
        if c.ndim != 3 or c.shape[2] < 1:
            raise ValueError(f"cost volume must be H x W x L, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("cost volume contains non-finite values")
        if np.any(c < 0):
            raise ValueError("cost volume contains negative values")

    @property
    def shape(self):
        return self.cost.shape

    @property
    def num_labels(self) -> int:
        return self.cost.shape[2]

    def argmin(self) -> np.ndarray:
        return np.argmin(self.cost, axis=2)


def data_cost_plane(g_ref, g_i, rel: RelativeBlur) -> np.ndarray:
    """Absolute residual after blurring whichever view is sharper.

    ``rel`` relates ``g_i`` (first operand) to ``g_ref``: SHARPER blurs
    ``g_i``, BLURRIER blurs ``g_ref``.
    """
    g_ref = as_image(g_ref, "g_ref")
    g_i = as_image(g_i, "g_i")
    if g_ref.shape != g_i.shape:
        raise ValueError(f"image sizes differ: {g_ref.shape} vs {g_i.shape}")
    if rel.direction is Direction.SHARPER:
        return np.abs(g_ref - blur(g_i, rel.sigma_r))
    if rel.direction is Direction.BLURRIER:
        return np.abs(blur(g_ref, rel.sigma_r) - g_i)
    return np.abs(g_ref - g_i)


def box_aggregate(plane: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return plane
    # running sums can dip a hair below zero
    return np.maximum(ndimage.uniform_filter(plane, size=2 * radius + 1, mode="mirror"), 0.0)


def build_cost_volume(
    observations: Sequence[np.ndarray],
    labels: LabelSet,
    reference_index: int | None = None,
    aggregation_radius: int = 2,
    workers: int = 1,
) -> CostVolume:
    """Sum of per-view residual planes for every label, optionally box-averaged."""
    if len(observations) < 2:
        raise ValueError(f"need at least 2 observations, got {len(observations)}")
    if reference_index is None:
        reference_index = labels.reference_index
    if not 0 <= reference_index < len(observations):
        raise ValueError(
            f"reference_index {reference_index} out of range for {len(observations)} observations"
        )
    if reference_index != labels.reference_index:
        raise ValueError("reference_index does not match the one the label set was built for")
    if len(labels.sigmas[0]) != len(observations):
        raise ValueError(
            f"label set describes {len(labels.sigmas[0])} views, got {len(observations)} observations"
        )
    if aggregation_radius < 0:
        raise ValueError("aggregation_radius must be >= 0")
    obs = [as_image(o, f"observation {k}") for k, o in enumerate(observations)]
    if any(o.shape != obs[0].shape for o in obs):
        raise ValueError("observations differ in size")
    g_ref = obs[reference_index]

    def slice_for(l):
        acc = np.zeros_like(g_ref)
        for i, g in enumerate(obs):
            if i != reference_index:
                acc += data_cost_plane(g_ref, g, labels.relative[l][i])
        return box_aggregate(acc, aggregation_radius)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            planes = list(pool.map(slice_for, range(len(labels))))
    else:
        planes = [slice_for(l) for l in range(len(labels))]
    return CostVolume(np.stack(planes, axis=2), labels)
