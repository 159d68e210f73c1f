"""Exact reference solvers for tiny grids and chains."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import PriorParams, _as_cost_array, labeling_energy

MAX_PIXELS = 16
MAX_LABELS = 8
MAX_LABELINGS = 2**32
_CHUNK = 1 << 16


@dataclass(frozen=True)
class TinyInstance:
    costs: np.ndarray
    prior: PriorParams

    def __post_init__(self):
        c = _as_cost_array(self.costs)
        object.__setattr__(self, "costs", c)
        h, w, n = c.shape
        if h * w > MAX_PIXELS:
            raise ValueError(f"tiny instance has {h * w} pixels, limit is {MAX_PIXELS}")
        if n > MAX_LABELS:
            raise ValueError(f"tiny instance has {n} labels, limit is {MAX_LABELS}")
        if n ** (h * w) > MAX_LABELINGS:
            raise ValueError(f"{n}^{h * w} labelings exceed the enumeration bound 2^32")

    @property
    def shape(self):
        return self.costs.shape


def _grid_edges(h: int, w: int) -> np.ndarray:
    idx = np.arange(h * w).reshape(h, w)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    return np.concatenate([vert, horiz])


def exhaustive_map(inst: TinyInstance) -> tuple[np.ndarray, float]:
    """Minimum-energy labeling by enumerating every assignment.

    Labelings are visited in lexicographic (row-major, base-L) order, so
    the first minimiser found wins ties.
    """
    c = np.asarray(inst.costs, dtype=np.float64)
    h, w, n = c.shape
    npix = h * w
    flat = c.reshape(npix, n)
    edges = _grid_edges(h, w)
    lam, t = inst.prior.smoothness_weight, inst.prior.truncation
    total = n**npix
    powers = n ** np.arange(npix - 1, -1, -1, dtype=np.int64)
    best_e, best_k = np.inf, -1
    for start in range(0, total, _CHUNK):
        k = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        lab = (k[:, None] // powers[None, :]) % n
        # independent of labeling_energy on purpose
        e = flat[np.arange(npix)[None, :], lab].sum(axis=1)
        if len(edges):
            diff = np.abs(lab[:, edges[:, 0]] - lab[:, edges[:, 1]])
            e = e + lam * np.minimum(diff, t).sum(axis=1)
        j = int(np.argmin(e))
        if e[j] < best_e:
            best_e, best_k = e[j], int(k[j])
    labels = ((best_k // powers) % n).reshape(h, w)
    return labels, labeling_energy(labels, c, inst.prior)


def chain_dp(costs, prior: PriorParams) -> tuple[np.ndarray, float]:
    """Exact MAP on a 1 x N (or N x 1) chain by forward DP and backtracking."""
    c = _as_cost_array(costs)
    h, w, n = c.shape
    if min(h, w) != 1:
        raise ValueError(f"chain_dp needs a 1 x N or N x 1 grid, got {h} x {w}")
    seq = c.reshape(h * w, n)
    v = prior.matrix(n)
    acc = seq[0].copy()
    back = np.zeros((len(seq), n), dtype=np.int64)
    for i in range(1, len(seq)):
        cand = acc[:, None] + v  # [prev, cur]
        back[i] = np.argmin(cand, axis=0)
        acc = cand[back[i], np.arange(n)] + seq[i]
    labels = np.empty(len(seq), dtype=np.int64)
    labels[-1] = int(np.argmin(acc))
    for i in range(len(seq) - 1, 0, -1):
        labels[i - 1] = back[i, labels[i]]
    labels = labels.reshape(h, w)
    return labels, labeling_energy(labels, c, prior)
