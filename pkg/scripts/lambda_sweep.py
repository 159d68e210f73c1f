"""Depth RMSE (in label steps) against smoothness weight on a synthetic scene."""
import argparse

import numpy as np

from sfdbp.bp import PriorParams, run_bp
from sfdbp.cost import build_cost_volume, build_label_set
from sfdbp.defocus import CameraConfig
from sfdbp.imaging import render_observation_stack
from sfdbp.metrics import evaluate
from sfdbp.scenes import SHAPES, make_depth, noise_texture, texture_mask


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scene", default="sphere_cap", choices=SHAPES)
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--noise", type=float, default=0.005)
    ap.add_argument("--truncation", type=float, default=2.0)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0, 0.002, 0.005, 0.01, 0.02, 0.05])
    a = ap.parse_args()

    cams = [CameraConfig.focused_at(d, 0.035, 0.001, 6e4) for d in (0.28, 0.45)]
    labels = build_label_set(0.30, 0.40, 16, cams)
    f = noise_texture(a.size, a.size, seed=1)
    gt = make_depth(a.scene, a.size, a.size, 0.30, 0.40)
    obs = render_observation_stack(f, gt, cams, noise_sigma=a.noise, seed=0)
    cv = build_cost_volume(obs, labels, 0, aggregation_radius=2)
    mask = texture_mask(obs[0], border=8)
    print("lambda   rmse/step  label_acc  bad_1  iters")
    for lam in a.lambdas:
        dm, d = run_bp(cv, PriorParams(a.truncation, lam), max_iters=100)
        r = evaluate(dm.depth(), gt, labels.depth_min, labels.depth_step, len(labels), mask)
        print(f"{lam:<8g} {r.rmse_depth / labels.depth_step:9.3f}  {r.label_accuracy:9.3f}  "
              f"{r.bad_k:5.3f}  {d.iterations}")
    wta = cv.argmin()
    print(f"WTA      {np.sqrt(np.mean((labels.depths[wta] - gt)[mask] ** 2)) / labels.depth_step:9.3f}")


if __name__ == "__main__":
    main()
