import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treefire import streams
from treefire.cuttree import worked_example
from treefire.dynamics import (
    first_fire_step,
    run_dynamics,
    run_forward,
    run_marked_process,
    subtree_forest_at_first_fire,
)
from treefire.treegen import LabeledTree, prufer_decode, PruferSequence, sample_uniform_tree


PATH3 = LabeledTree(3, np.array([[1, 2], [2, 3]]))


def random_tree(n, rnd):
    if n == 2:
        return LabeledTree(2, np.array([[1, 2]]))
    sym = np.array([rnd.randint(1, n) for _ in range(n - 2)], dtype=np.int64)
    return prufer_decode(PruferSequence(n, sym))


def test_worked_example_hand_traced():
    # 11 vertices, ignitions at steps 6 and 9; traced by hand:
    # step 6 burns {1,4,5,11}, step 9 burns {9,10}, fireproof {6,7} {2} {3} {8}
    tree, order, coins = worked_example()
    out = run_forward(tree, order, coins)
    out.validate(11)
    assert out.I == 5 and out.B == 6 and out.kappa == 2
    assert out.burnt_by_appearance.tolist() == [4, 2]
    assert out.burnt_ranked.tolist() == [4, 2]
    assert out.fire_steps.tolist() == [6, 9]
    assert out.fireproof_components.tolist() == [2, 1, 1, 1]
    assert first_fire_step(out) == 6


def test_single_edge_both_coins():
    tree = LabeledTree(2, np.array([[1, 2]]))
    burn = run_forward(tree, [0], [True])
    assert (burn.I, burn.B, burn.kappa) == (0, 2, 1)
    assert burn.fire_steps.tolist() == [1]
    keep = run_forward(tree, [0], [False])
    assert (keep.I, keep.B, keep.kappa) == (2, 0, 0)
    assert first_fire_step(keep) == math.inf


def test_path3_exhaustive_outcomes():
    # orders x coins on the path 1-2-3; burnt component of a second ignition
    # is only the remaining edge's pair, the spared endpoint is fireproof
    for order in ([0, 1], [1, 0]):
        out = run_forward(PATH3, order, [False, False])
        assert (out.I, out.kappa) == (3, 0)
        out = run_forward(PATH3, order, [True, False])
        assert (out.I, out.B, out.kappa) == (0, 3, 1)
        out = run_forward(PATH3, order, [False, True])
        assert (out.I, out.B) == (1, 2)
        assert out.fire_steps.tolist() == [2]
        assert out.fireproof_components.tolist() == [1]


def test_all_fireproof_and_first_step_burn():
    rng = streams.stream(3, "test", 20, 0)
    tree = sample_uniform_tree(20, rng)
    order = rng.permutation(19)
    out = run_forward(tree, order, np.zeros(19, dtype=bool))
    assert out.I == 20 and out.kappa == 0
    assert out.fireproof_components.tolist() == [20]
    coins = np.zeros(19, dtype=bool)
    coins[0] = True
    out = run_forward(tree, order, coins)
    # the whole tree is still flammable at step 1
    assert out.I == 0 and out.B == 20
    assert out.burnt_by_appearance.tolist() == [20]


def test_run_dynamics_deterministic():
    tree = sample_uniform_tree(40, streams.stream(11, "test", 40, 0))
    a = run_dynamics(tree, 0.3, streams.stream(11, "dynamics", 40, 7))
    b = run_dynamics(tree, 0.3, streams.stream(11, "dynamics", 40, 7))
    assert a.same_as(b)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.randoms(use_true_random=False))
def test_outcome_invariants_random(n, rnd):
    tree = random_tree(n, rnd)
    order = np.array(rnd.sample(range(n - 1), n - 1), dtype=np.int64)
    coins = np.array([rnd.random() < 0.4 for _ in range(n - 1)], dtype=bool)
    out = run_forward(tree, order, coins)
    out.validate(n)
    # burnt components need at least one interior edge
    assert all(s >= 2 for s in out.burnt_by_appearance)
    assert out.kappa <= int(coins.sum())


def test_subtree_forest_at_first_fire():
    tree, order, coins = worked_example()
    zeta, sizes = subtree_forest_at_first_fire(tree, order, coins)
    assert zeta == 6
    # 5 fireproofed edges removed -> 6 components partitioning the vertices
    assert sizes.sum() == 11 and len(sizes) == 6
    assert np.all(np.diff(sizes) <= 0)
    shuffled_zeta, shuffled = subtree_forest_at_first_fire(
        tree, order, coins, stream=streams.stream(0, "test"))
    assert shuffled_zeta == zeta
    assert sorted(shuffled.tolist()) == sorted(sizes.tolist())
    with pytest.raises(ValueError, match="no coin ignites"):
        subtree_forest_at_first_fire(tree, order, np.zeros(10, dtype=bool))


def test_marked_process_sizes_in_range():
    rng = streams.stream(6, "marked", 30, 0)
    tree = sample_uniform_tree(30, rng)
    order = rng.permutation(29)
    sizes = run_marked_process(tree, order, rng)
    assert sizes.shape == (28,)
    # the marked component contains an edge, so it has 2..n vertices
    assert sizes.min() >= 2 and sizes.max() <= 30
    # after k removals no component can exceed n - k... only for spanning
    # subtrees of a tree: each removal detaches at least one vertex
    for k in range(1, 29):
        assert sizes[k - 1] <= 30 - k


def test_marked_process_needs_three_vertices():
    with pytest.raises(ValueError):
        run_marked_process(LabeledTree(2, np.array([[1, 2]])), [0],
                           streams.stream(0, "marked"))
