"""Min-sum loopy belief propagation on the 4-connected pixel grid.

Messages are stored at the receiving pixel, indexed by the side they come
from (see the ``FROM_*`` constants), with the label axis first so every
per-label plane is contiguous.
"""
from __future__ import annotations

import enum
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .cost import CostVolume, LabelSet

FROM_UP, FROM_DOWN, FROM_LEFT, FROM_RIGHT = range(4)


class Schedule(str, enum.Enum):
    SYNCHRONOUS = "synchronous"
    REDBLACK = "redblack"


@dataclass(frozen=True)
class PriorParams:
    """Truncated linear smoothness prior ``lambda * min(|a - b|, T)``.

    ``truncation`` is measured in label steps.
    """

    truncation: float
    smoothness_weight: float = 1.0

    def __post_init__(self):
        if not self.truncation > 0:
            raise ValueError(f"truncation must be > 0, got {self.truncation!r}")
        if not self.smoothness_weight >= 0:
            raise ValueError(f"smoothness_weight must be >= 0, got {self.smoothness_weight!r}")

    def matrix(self, num_labels: int) -> np.ndarray:
        idx = np.arange(num_labels)
        dist = np.abs(idx[:, None] - idx[None, :])
        return self.smoothness_weight * np.minimum(dist, self.truncation)


def pairwise_cost(a: int, b: int, prior: PriorParams) -> float:
    return prior.smoothness_weight * min(abs(a - b), prior.truncation)


@dataclass
class MessageField:
    """Messages for every directed grid edge, shape (4, L, H, W)."""

    messages: np.ndarray
    iteration: int = 0

    @classmethod
    def zeros(cls, height: int, width: int, num_labels: int) -> MessageField:
        return cls(np.zeros((4, num_labels, height, width)))

    def incoming(self, p: tuple[int, int], side: int) -> np.ndarray:
        return self.messages[side, :, p[0], p[1]]


@dataclass(frozen=True)
class DepthMap:
    labels: np.ndarray
    label_set: LabelSet | None = None

    @property
    def shape(self):
        return self.labels.shape

    def depth(self) -> np.ndarray:
        if self.label_set is None:
            raise ValueError("depth map has no label set attached")
        return self.label_set.depth_of(self.labels)


@dataclass(frozen=True)
class BPDiagnostics:
    iterations: int
    final_delta: float
    energy: float
    wall_time_ms: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _normalize(m: np.ndarray, axis: int) -> np.ndarray:
    return m - m.min(axis=axis, keepdims=True)


def min_convolve_naive(h: np.ndarray, prior: PriorParams, axis: int = -1) -> np.ndarray:
    """``m(l) = min_k h(k) + V(k, l)`` by full enumeration, normalised to min 0."""
    h = np.moveaxis(np.asarray(h, dtype=np.float64), axis, -1)
    v = prior.matrix(h.shape[-1])
    m = (h[..., :, None] + v).min(axis=-2)
    return np.moveaxis(_normalize(m, -1), -1, axis)


def min_convolve_fast(h: np.ndarray, prior: PriorParams, axis: int = -1) -> np.ndarray:
    """Same contract as :func:`min_convolve_naive` in O(L).

    Two-pass lower envelope for the linear part, then the truncation is a
    clamp at ``min(h) + lambda * T``.
    """
    h = np.moveaxis(np.asarray(h, dtype=np.float64), axis, 0)
    shape = h.shape
    n = shape[0]
    m = h.reshape(n, -1).copy()
    lam = prior.smoothness_weight
    for l in range(1, n):
        np.minimum(m[l], m[l - 1] + lam, out=m[l])
    for l in range(n - 2, -1, -1):
        np.minimum(m[l], m[l + 1] + lam, out=m[l])
    np.minimum(m, m.min(axis=0) + lam * prior.truncation, out=m)
    return np.moveaxis(_normalize(m, 0).reshape(shape), 0, axis)


_UPDATES = {"fast": min_convolve_fast, "naive": min_convolve_naive}


def _side_of(p, q) -> int:
    """Side of ``p`` on which ``q`` lies."""
    dy, dx = q[0] - p[0], q[1] - p[1]
    sides = {(-1, 0): FROM_UP, (1, 0): FROM_DOWN, (0, -1): FROM_LEFT, (0, 1): FROM_RIGHT}
    if (dy, dx) not in sides:
        raise ValueError(f"{p} and {q} are not 4-neighbours")
    return sides[(dy, dx)]


def _edge_input(costs, field: MessageField, p, q) -> np.ndarray:
    cost = _as_cost_array(costs)
    h, w, _ = cost.shape
    for y, x in (p, q):
        if not (0 <= y < h and 0 <= x < w):
            raise ValueError(f"pixel {(y, x)} outside {h}x{w} grid")
    skip = _side_of(p, q)
    total = cost[p[0], p[1], :].copy()
    for side in range(4):
        if side != skip:
            total += field.incoming(p, side)
    return total


def update_message_naive(costs, field: MessageField, p, q, prior: PriorParams) -> np.ndarray:
    """Message from pixel ``p`` to its 4-neighbour ``q``, O(L^2)."""
    return min_convolve_naive(_edge_input(costs, field, p, q), prior)


def update_message_fast(costs, field: MessageField, p, q, prior: PriorParams) -> np.ndarray:
    """Message from pixel ``p`` to its 4-neighbour ``q``, O(L)."""
    return min_convolve_fast(_edge_input(costs, field, p, q), prior)


def _as_cost_array(costs) -> np.ndarray:
    c = costs.cost if isinstance(costs, CostVolume) else np.asarray(costs, dtype=np.float64)
    if c.ndim != 3:
        raise ValueError(f"cost volume must be H x W x L, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost volume contains non-finite values")
    return c


def labeling_energy(labels, costs, prior: PriorParams) -> float:
    """Data cost of the labeling plus the prior over all 4-neighbour edges."""
    lab = labels.labels if isinstance(labels, DepthMap) else np.asarray(labels)
    c = _as_cost_array(costs)
    if lab.shape != c.shape[:2]:
        raise ValueError(f"labeling shape {lab.shape} does not match cost volume {c.shape[:2]}")
    lab = lab.astype(np.int64)
    if lab.size and (lab.min() < 0 or lab.max() >= c.shape[2]):
        raise ValueError("label index out of range")
    data = np.take_along_axis(c, lab[..., None], axis=2).sum()
    lam, t = prior.smoothness_weight, prior.truncation
    vert = np.minimum(np.abs(np.diff(lab, axis=0)), t).sum()
    horiz = np.minimum(np.abs(np.diff(lab, axis=1)), t).sum()
    return float(data + lam * (vert + horiz))


def _outgoing(d: np.ndarray, m: np.ndarray, prior: PriorParams, update) -> list:
    """All four outgoing message planes as (slot, receiver slice, sender slice, message)."""
    up = d + m[FROM_DOWN] + m[FROM_LEFT] + m[FROM_RIGHT]
    down = d + m[FROM_UP] + m[FROM_LEFT] + m[FROM_RIGHT]
    left = d + m[FROM_UP] + m[FROM_DOWN] + m[FROM_RIGHT]
    right = d + m[FROM_UP] + m[FROM_DOWN] + m[FROM_LEFT]
    all_ = slice(None)
    return [
        # sent upward: received on the FROM_DOWN side of the pixel above
        (FROM_DOWN, (all_, slice(None, -1), all_), (slice(1, None), all_),
         update(up[:, 1:, :], prior, axis=0)),
        (FROM_UP, (all_, slice(1, None), all_), (slice(None, -1), all_),
         update(down[:, :-1, :], prior, axis=0)),
        (FROM_RIGHT, (all_, all_, slice(None, -1)), (all_, slice(1, None)),
         update(left[:, :, 1:], prior, axis=0)),
        (FROM_LEFT, (all_, all_, slice(1, None)), (all_, slice(None, -1)),
         update(right[:, :, :-1], prior, axis=0)),
    ]


def run_bp(
    costs,
    prior: PriorParams,
    schedule: Schedule | str = Schedule.REDBLACK,
    max_iters: int = 50,
    convergence_eps: float = 1e-6,
    normalize: bool = True,
    update: str = "fast",
) -> tuple[DepthMap, BPDiagnostics]:
    """Iterate min-sum messages, then take the argmin of every belief.

    Stops once the largest change of any message entry over one iteration
    drops below ``convergence_eps``. Belief ties go to the smaller label.
    ``normalize=False`` keeps raw message sums (same labeling, used to check
    that normalisation is harmless).
    """
    t0 = time.perf_counter()
    schedule = Schedule(schedule)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    c = _as_cost_array(costs)
    label_set = costs.label_set if isinstance(costs, CostVolume) else None
    h, w, n = c.shape
    d = np.ascontiguousarray(np.moveaxis(c, 2, 0))
    fn = _UPDATES[update]
    if not normalize:
        base = fn

        def fn(x, p, axis=0):
            # add back the min that the normalised update removed
            return base(x, p, axis=axis) + x.min(axis=axis, keepdims=True)

    field = MessageField.zeros(h, w, n)
    m = field.messages
    if schedule is Schedule.REDBLACK:
        yy, xx = np.indices((h, w))
        colors = [((yy + xx) % 2) == k for k in (0, 1)]
        phases = [colors[0], colors[1]]
    else:
        phases = [None]

    delta = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        delta = 0.0
        for color in phases:
            new = m.copy() if color is None else m
            for slot, recv, send, msg in _outgoing(d, m, prior, fn):
                target = new[slot][recv]
                if color is not None:
                    msg = np.where(color[send][None], msg, target)
                if msg.size:
                    delta = max(delta, float(np.abs(msg - target).max()))
                new[slot][recv] = msg
            m = new
        if delta < convergence_eps:
            break
    field.messages = m
    field.iteration = it

    belief = d + m.sum(axis=0)
    labels = np.argmin(belief, axis=0)
    energy = labeling_energy(labels, c, prior)
    diag = BPDiagnostics(
        iterations=it,
        final_delta=float(delta),
        energy=energy,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
    return DepthMap(labels, label_set), diag
