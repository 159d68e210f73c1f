"""Depth-map error metrics against synthetic ground truth."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class EvalReport:
    rmse_depth: float
    mae_depth: float
    label_accuracy: float
    bad_k: float
    k: int
    valid_pixels: int

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(est_depth, gt_depth, depth_min, depth_step, num_labels, mask=None, k=1) -> EvalReport:
    """Metric and label-space errors over ``mask`` (all pixels if None).

    Both depth maps are quantised to the nearest label before the label
    metrics; ``bad_k`` is the fraction off by more than ``k`` labels.
    """
    est = np.asarray(est_depth, dtype=np.float64)
    gt = np.asarray(gt_depth, dtype=np.float64)
    if est.shape != gt.shape:
        raise ValueError(f"estimate shape {est.shape} != ground truth shape {gt.shape}")
    if mask is None:
        mask = np.ones(est.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != est.shape:
        raise ValueError(f"mask shape {mask.shape} != depth shape {est.shape}")
    n = int(mask.sum())
    if n == 0:
        raise ValueError("mask selects no pixels")

    def to_label(d):
        idx = np.rint((d - depth_min) / depth_step)
        return np.clip(idx, 0, num_labels - 1).astype(np.int64)

    err = (est - gt)[mask]
    dl = np.abs(to_label(est) - to_label(gt))[mask]
    return EvalReport(
        rmse_depth=float(np.sqrt(np.mean(err**2))),
        mae_depth=float(np.mean(np.abs(err))),
        label_accuracy=float(np.mean(dl == 0)),
        bad_k=float(np.mean(dl > k)),
        k=int(k),
        valid_pixels=n,
    )
