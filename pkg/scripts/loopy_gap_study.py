"""Energy gap of loopy BP against exhaustive MAP on random 3x3 grids.

Reports, per schedule, how many instances land within 1.05x of the optimum
and how many failed to converge.
"""
import argparse

import numpy as np

from sfdbp.bp import PriorParams, Schedule, run_bp
from sfdbp.oracle import TinyInstance, exhaustive_map


def study(n, seed, labels, max_iters, t_range, lam_range):
    rng = np.random.default_rng(seed)
    inst = []
    for _ in range(n):
        c = rng.random((3, 3, labels))
        prior = PriorParams(float(rng.uniform(*t_range)), float(rng.uniform(*lam_range)))
        inst.append((c, prior, exhaustive_map(TinyInstance(c, prior))[1]))
    for sched in Schedule:
        ratios, stuck = [], 0
        for c, prior, e_opt in inst:
            _, d = run_bp(c, prior, schedule=sched, max_iters=max_iters)
            ratios.append(d.energy / e_opt)
            stuck += d.iterations >= max_iters
        r = np.array(ratios)
        print(f"{sched.value:12s} within1.05={int(np.sum(r <= 1.05))}/{n} exact={int(np.sum(r == 1))} "
              f"not_converged={stuck} median={np.median(r):.4f} worst={r.max():.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4, 5])
    ap.add_argument("--labels", type=int, default=4)
    ap.add_argument("--max-iters", type=int, default=100)
    ap.add_argument("--t-range", type=float, nargs=2, default=[1.0, 3.0])
    ap.add_argument("--lam-range", type=float, nargs=2, default=[0.0, 1.0])
    a = ap.parse_args()
    for s in a.seeds:
        print(f"seed {s}")
        study(a.n, s, a.labels, a.max_iters, a.t_range, a.lam_range)
