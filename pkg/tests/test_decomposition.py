import random
from fractions import Fraction

import pytest

from ncalabel.decomposition import (
    alpha_heavy_decomposition,
    exact_alpha,
    heavy_path_decomposition,
    top_alpha_heavy_path,
)
from ncalabel.treecore import complete_binary_tree, path_tree, random_tree, star_tree


def test_exact_alpha():
    assert exact_alpha(0.704) == Fraction(704, 1000)
    assert exact_alpha("0.659") == Fraction(659, 1000)


def test_top_path_on_path_and_star():
    # threshold 7.04: node 2 (size 8) is heavy, node 3 (size 7) is not
    assert top_alpha_heavy_path(path_tree(10), 0.704).path == (0, 1, 2)
    assert top_alpha_heavy_path(star_tree(5), 0.6).path == (0,)


def test_threshold_is_exact():
    # subtree of 7 out of 10 with alpha = 0.7 exactly: heavy
    t = path_tree(10)
    assert top_alpha_heavy_path(t, Fraction(7, 10)).path == (0, 1, 2, 3)


def test_bad_alpha():
    with pytest.raises(ValueError):
        top_alpha_heavy_path(path_tree(3), 0.5)


def test_decompositions_partition_nodes():
    rng = random.Random(0)
    for _ in range(50):
        t = random_tree(rng.randint(1, 200), rng)
        for paths in (
            [p.path for p in alpha_heavy_decomposition(t, 0.659)],
            heavy_path_decomposition(t),
        ):
            nodes = [u for p in paths for u in p]
            assert sorted(nodes) == list(range(t.size))
            for p in paths:
                assert all(t.parent[b] == a for a, b in zip(p, p[1:]))


def test_heavy_path_follows_largest_child():
    t = complete_binary_tree(3)
    paths = heavy_path_decomposition(t)
    assert len(paths) == 8
    sizes = t.sizes
    for p in paths:
        for a, b in zip(p, p[1:]):
            assert sizes[b] == max(sizes[c] for c in t.children[a])
