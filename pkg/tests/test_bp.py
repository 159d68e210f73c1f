import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfdbp.bp import (
    FROM_LEFT,
    MessageField,
    PriorParams,
    labeling_energy,
    min_convolve_fast,
    min_convolve_naive,
    pairwise_cost,
    run_bp,
    update_message_fast,
    update_message_naive,
)
from sfdbp.oracle import chain_dp


def test_pairwise_cost():
    assert pairwise_cost(3, 3, PriorParams(2.0, 0.7)) == 0
    assert pairwise_cost(0, 3, PriorParams(2.0, 1.0)) == 2
    assert pairwise_cost(0, 1, PriorParams(2.0, 0.5)) == 0.5


def test_prior_validates():
    with pytest.raises(ValueError):
        PriorParams(0.0)
    with pytest.raises(ValueError):
        PriorParams(1.0, -0.1)


def test_message_lambda_zero(rng):
    h = rng.random(9)
    np.testing.assert_array_equal(min_convolve_naive(h, PriorParams(2.0, 0.0)), 0)
    np.testing.assert_array_equal(min_convolve_fast(h, PriorParams(2.0, 0.0)), 0)


@pytest.mark.parametrize("update", [update_message_naive, update_message_fast])
@pytest.mark.parametrize(
    "d, expected",
    [
        # m(0) = min(a, b + lam), m(1) = min(a + lam, b), lam = 0.5, then shift to min 0
        ([0.2, 1.0], [0.0, 0.5]),
        ([0.2, 0.4], [0.0, 0.2]),
        ([0.9, 0.1], [0.5, 0.0]),
    ],
)
def test_message_two_labels_by_hand(update, d, expected):
    costs = np.zeros((1, 2, 2))
    costs[0, 0] = d
    field = MessageField.zeros(1, 2, 2)
    m = update(costs, field, (0, 0), (0, 1), PriorParams(2.0, 0.5))
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_message_excludes_receiver(rng):
    costs = rng.random((3, 3, 5))
    field = MessageField(rng.random((4, 5, 3, 3)))
    prior = PriorParams(3.0, 0.3)
    p, q = (1, 1), (1, 0)  # q is to the left of p
    h = costs[1, 1].copy()
    for side in range(4):
        if side != FROM_LEFT:
            h += field.messages[side, :, 1, 1]
    expected = [min(h[k] + pairwise_cost(k, l, prior) for k in range(5)) for l in range(5)]
    expected = np.array(expected) - min(expected)
    np.testing.assert_allclose(update_message_naive(costs, field, p, q, prior), expected, atol=1e-14)
    with pytest.raises(ValueError):
        update_message_naive(costs, field, (0, 0), (1, 1), prior)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 64),
    st.floats(0.01, 80.0),
    st.floats(0.0, 5.0),
    st.integers(0, 2**32 - 1),
)
def test_fast_equals_naive(n, t, lam, seed):
    h = np.random.default_rng(seed).random(n) * 10
    prior = PriorParams(t, lam)
    fast = min_convolve_fast(h, prior)
    naive = min_convolve_naive(h, prior)
    assert np.abs(fast - naive).max() <= 1e-9
    assert fast.min() == 0.0 and naive.min() == 0.0


def test_fast_untruncated_is_linear(rng):
    # truncation beyond any reachable distance
    for n in (2, 7, 40):
        h = rng.random(n)
        prior = PriorParams(10 * n, 0.4)
        idx = np.arange(n)
        lin = (h[:, None] + 0.4 * np.abs(idx[:, None] - idx[None, :])).min(axis=0)
        np.testing.assert_allclose(min_convolve_fast(h, prior), lin - lin.min(), atol=1e-12)


def test_labeling_energy_examples():
    prior = PriorParams(2.0, 1.0)
    assert labeling_energy(np.zeros((3, 3), int), np.zeros((3, 3, 4)), prior) == 0
    assert labeling_energy(np.array([[0], [3]]), np.zeros((2, 1, 4)), prior) == 2


def test_labeling_energy_direct_sum(rng):
    c = rng.random((3, 4, 5))
    lab = rng.integers(0, 5, size=(3, 4))
    prior = PriorParams(1.5, 0.8)
    e = sum(c[y, x, lab[y, x]] for y in range(3) for x in range(4))
    for y, x in itertools.product(range(3), range(4)):
        if y + 1 < 3:
            e += pairwise_cost(lab[y, x], lab[y + 1, x], prior)
        if x + 1 < 4:
            e += pairwise_cost(lab[y, x], lab[y, x + 1], prior)
    assert labeling_energy(lab, c, prior) == pytest.approx(e, rel=1e-12)


def test_single_pixel(rng):
    c = rng.random((1, 1, 6))
    dm, diag = run_bp(c, PriorParams(2.0, 1.0))
    assert dm.labels[0, 0] == np.argmin(c[0, 0])
    assert diag.iterations >= 1


@pytest.mark.parametrize("schedule", ["redblack", "synchronous"])
def test_lambda_zero_is_argmin(rng, schedule):
    c = rng.random((9, 11, 7))
    dm, _ = run_bp(c, PriorParams(2.0, 0.0), schedule=schedule)
    np.testing.assert_array_equal(dm.labels, c.argmin(axis=2))


def test_ties_go_to_smaller_label():
    c = np.zeros((2, 2, 3))
    dm, _ = run_bp(c, PriorParams(1.0, 1.0))
    np.testing.assert_array_equal(dm.labels, 0)


@pytest.mark.parametrize("schedule", ["redblack", "synchronous"])
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_chain_exactness(schedule, n, nl, seed):
    rng = np.random.default_rng(seed)
    c = rng.random((1, n, nl))
    prior = PriorParams(float(rng.uniform(0.5, nl)), float(rng.uniform(0, 1)))
    _, diag = run_bp(c, prior, schedule=schedule, max_iters=2 * n + 5, convergence_eps=1e-12)
    assert diag.energy == chain_dp(c, prior)[1]


def test_vertical_chain_exactness(rng):
    c = rng.random((12, 1, 6))
    prior = PriorParams(2.0, 0.4)
    _, diag = run_bp(c, prior, max_iters=40, convergence_eps=1e-12)
    assert diag.energy == chain_dp(c, prior)[1]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalization_irrelevant(seed):
    rng = np.random.default_rng(seed)
    c = rng.random((5, 6, 5))
    prior = PriorParams(2.0, float(rng.uniform(0, 0.6)))
    a, _ = run_bp(c, prior, max_iters=15, convergence_eps=0.0)
    b, _ = run_bp(c, prior, max_iters=15, convergence_eps=0.0, normalize=False)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_determinism(rng):
    c = rng.random((16, 16, 8))
    runs = [run_bp(c, PriorParams(2.0, 0.3))[0].labels.tobytes() for _ in range(3)]
    assert len(set(runs)) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_data_dominance(seed, winner):
    rng = np.random.default_rng(seed)
    prior = PriorParams(float(rng.uniform(0.5, 4)), float(rng.uniform(0, 1)))
    margin = 4 * prior.smoothness_weight * prior.truncation
    c = rng.random((6, 7, 6)) + margin + 1e-3
    c[:, :, winner] = rng.random((6, 7)) * 1e-3
    dm, _ = run_bp(c, prior)
    np.testing.assert_array_equal(dm.labels, winner)


def test_naive_update_path_agrees(rng):
    c = rng.random((6, 6, 5))
    prior = PriorParams(2.0, 0.2)
    a, da = run_bp(c, prior, update="fast", max_iters=30)
    b, db = run_bp(c, prior, update="naive", max_iters=30)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_non_finite_rejected():
    c = np.zeros((2, 2, 3))
    c[0, 0, 1] = np.inf
    with pytest.raises(ValueError):
        run_bp(c, PriorParams(1.0))
    with pytest.raises(ValueError):
        run_bp(np.zeros((2, 2, 3)), PriorParams(1.0), max_iters=0)


def test_diagnostics_json(rng):
    import json

    _, diag = run_bp(rng.random((4, 4, 3)), PriorParams(1.0, 0.1))
    d = json.loads(diag.to_json())
    assert set(d) == {"iterations", "final_delta", "energy", "wall_time_ms"}
