from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treefire import streams
from treefire.cuttree import build_cut_tree, mark_and_erase, read_outcome, worked_example
from treefire.dynamics import run_forward
from treefire.treegen import enumerate_trees, prufer_decode, PruferSequence, sample_uniform_tree


def pipeline(tree, order, coins):
    ct = build_cut_tree(tree, order)
    return read_outcome(ct, mark_and_erase(ct, coins))


def test_worked_example_structure():
    tree, order, coins = worked_example()
    ct = build_cut_tree(tree, order)
    ct.validate()
    assert ct.root == ct.node_of_step(1)
    assert ct.leaf_count[ct.root] == 11
    assert ct.block(ct.root) == frozenset(range(1, 12))
    for step in range(1, 11):
        assert ct.split_step(ct.node_of_step(step)) == step
    marks = mark_and_erase(ct, coins)
    marks.validate(ct)
    kept_steps = [int(k) + 1 for k in np.flatnonzero(marks.kept)]
    assert kept_steps == [6, 9]
    assert ct.block(ct.node_of_step(6)) == frozenset({1, 4, 5, 11})
    assert ct.block(ct.node_of_step(9)) == frozenset({9, 10})


def test_worked_example_matches_forward():
    tree, order, coins = worked_example()
    assert pipeline(tree, order, coins).same_as(run_forward(tree, order, coins))


def test_split_step_guards():
    tree, order, _ = worked_example()
    ct = build_cut_tree(tree, order)
    with pytest.raises(ValueError):
        ct.split_step(0)  # leaves carry no step


def test_to_text_lists_every_node():
    tree, order, _ = worked_example()
    ct = build_cut_tree(tree, order)
    lines = ct.to_text().splitlines()
    assert len(lines) == 2 * 11 - 1
    assert sum("leaf" in ln for ln in lines) == 11
    assert lines[0].startswith("block {1,")


def test_blocks_partition_at_internal_nodes():
    tree, order, _ = worked_example()
    ct = build_cut_tree(tree, order)
    for node in range(11, 2 * 11 - 1):
        left = ct.block(ct.child_left[node])
        right = ct.block(ct.child_right[node])
        assert left | right == ct.block(node)
        assert not left & right


def test_pipeline_equals_forward_exhaustive_small():
    # every tree, every order, every coin vector for n = 2..4
    for n in (2, 3, 4):
        for tree in enumerate_trees(n):
            for order in permutations(range(n - 1)):
                order_arr = np.array(order, dtype=np.int64)
                for bits in range(2 ** (n - 1)):
                    coins = np.array([(bits >> i) & 1 for i in range(n - 1)],
                                     dtype=bool)
                    a = run_forward(tree, order_arr, coins)
                    b = pipeline(tree, order_arr, coins)
                    assert a.same_as(b), (n, tree.edges.tolist(), order, bits)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 80), st.randoms(use_true_random=False))
def test_pipeline_equals_forward_random(n, rnd):
    if n == 2:
        tree = prufer_decode(PruferSequence(3, np.array([1])))
        n = 3
    else:
        sym = np.array([rnd.randint(1, n) for _ in range(n - 2)], dtype=np.int64)
        tree = prufer_decode(PruferSequence(n, sym))
    order = np.array(rnd.sample(range(n - 1), n - 1), dtype=np.int64)
    coins = np.array([rnd.random() < 0.5 for _ in range(n - 1)], dtype=bool)
    a = run_forward(tree, order, coins)
    b = pipeline(tree, order, coins)
    assert a.same_as(b)
    ct = build_cut_tree(tree, order)
    ct.validate()
    mark_and_erase(ct, coins).validate(ct)


def test_cut_tree_validate_random_larger():
    rng = streams.stream(17, "test", 500, 0)
    tree = sample_uniform_tree(500, rng)
    order = rng.permutation(499)
    ct = build_cut_tree(tree, order)
    ct.validate()
    assert ct.leaf_count[ct.root] == 500
