import random

import pytest

from ncalabel.embed import Embedding, embed, is_subdivision, parse_embedding, preserves_order, verify_embedding
from ncalabel.treecore import (
    enumerate_ordered_binary,
    enumerate_trees,
    is_topological_minor,
    parse_tree,
    path_tree,
    random_tree,
    single_node,
)
from ncalabel.universal import BINARY, GENERAL, ORDERED, UniversalSpec, build_universal


def test_single_node():
    for kind in (BINARY, GENERAL, ORDERED):
        e = embed(single_node(kind == ORDERED), UniversalSpec(kind, 4))
        assert verify_embedding(single_node(), e)


def test_cherry_and_path_into_b3():
    spec = UniversalSpec(BINARY, 3)
    cherry = parse_tree("(()())")
    e = embed(cherry, spec)
    # root on u_1, leaves into the B_2 copy (nodes 1, 2) and the B_1 copy (node 3)
    assert e.map[0] == 0 and {e.map[1], e.map[2]} & {1, 2} and 3 in (e.map[1], e.map[2])
    p = embed(path_tree(3), spec)
    assert p.map == {0: 0, 1: 1, 2: 2}


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        embed(path_tree(5), UniversalSpec(BINARY, 4))
    with pytest.raises(ValueError):
        embed(parse_tree("(()()())"), UniversalSpec(BINARY, 4))


def test_verify_rejects_non_injective_and_wrong_nca():
    t = parse_tree("(()())")
    spec = UniversalSpec(BINARY, 3)
    assert not verify_embedding(t, Embedding(spec, {0: 0, 1: 1, 2: 1}))
    assert not verify_embedding(t, Embedding(spec, {0: 0, 1: 1, 2: 2}))


def test_identity_into_itself():
    spec = UniversalSpec(BINARY, 3)
    ut = build_universal(spec)
    e = Embedding(spec, {u: u for u in range(ut.size)})
    assert verify_embedding(ut.tree, e, ut)


@pytest.mark.parametrize(
    "kind,top,corpus",
    [
        (BINARY, 8, lambda n: enumerate_trees(n, 2)),
        (GENERAL, 6, lambda n: enumerate_trees(n)),
        (ORDERED, 6, enumerate_ordered_binary),
    ],
)
def test_exhaustive_small(kind, top, corpus):
    for n in range(1, top + 1):
        spec = UniversalSpec(kind, n)
        ut = build_universal(spec)
        for t in corpus(n):
            e = embed(t, spec)
            assert verify_embedding(t, e, ut)
            assert is_subdivision(t, e)
            if kind == ORDERED:
                assert preserves_order(t, e)


def test_consistent_with_existential_oracle():
    for n in range(1, 8):
        spec = UniversalSpec(GENERAL, n)
        ut = build_universal(spec)
        for t in enumerate_trees(n):
            embed(t, spec)
            if ut.size <= 60:
                assert is_topological_minor(t, ut.tree) is not None


def test_random_larger_trees_with_slack():
    rng = random.Random(4)
    for _ in range(20):
        n = rng.randint(1, 150)
        kind = rng.choice([BINARY, GENERAL, ORDERED])
        t = random_tree(n, rng, max_degree=None if kind == GENERAL else 2, ordered=kind == ORDERED)
        spec = UniversalSpec(kind, n + rng.randint(0, 30))
        e = embed(t, spec)
        assert verify_embedding(t, e)
        assert is_subdivision(t, e)


def test_serialization_roundtrip():
    spec = UniversalSpec(GENERAL, 6)
    e = embed(parse_tree("(()(()()))"), spec)
    assert parse_embedding(e.serialize(), spec) == e
