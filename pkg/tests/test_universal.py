import random
from fractions import Fraction

import pytest

from ncalabel.analysis import within_power

from ncalabel.treecore import nca, to_parentheses
from ncalabel.universal import (
    BINARY,
    GENERAL,
    ORDERED,
    UniversalSpec,
    ancestor_path,
    build_universal,
    export_sizes,
    implicit_nca,
    import_sizes,
    layout,
    to_dot,
    universal_nca,
    universal_size,
)

SIZES = {
    BINARY: [0, 1, 2, 4, 5, 8, 9, 14, 17, 19, 24, 28],
    GENERAL: [0, 1, 2, 4, 6, 10, 15, 21, 26, 32, 40, 52],
    ORDERED: [0, 1, 5, 7, 15, 21, 25, 41, 49, 61, 77, 85],
}


@pytest.mark.parametrize("kind", [BINARY, GENERAL, ORDERED])
def test_small_sizes_match_builds(kind):
    for n, want in enumerate(SIZES[kind]):
        spec = UniversalSpec(kind, n)
        assert universal_size(spec) == want
        assert build_universal(spec).size == want


def test_binary_three():
    ut = build_universal(UniversalSpec(BINARY, 3))
    # u_1 with a chain of two (the copy of B_2) and a single node (B_1)
    assert ut.tree.children == ((1, 3), (2,), (), ())
    assert universal_nca(ut, 2, 3) == 0


def test_kind_alias_and_alpha_validation():
    assert UniversalSpec("ordered", 3).kind == ORDERED
    with pytest.raises(ValueError):
        UniversalSpec(BINARY, 3, Fraction(1, 2))
    with pytest.raises(ValueError):
        UniversalSpec("ternary", 3)


@pytest.mark.parametrize("kind,c,top", [(BINARY, 1.894, 2000), (GENERAL, 2.318, 2000), (ORDERED, 2.331, 1000)])
def test_size_bound_and_monotonicity(kind, c, top):
    sizes = [universal_size(UniversalSpec(kind, n)) for n in range(top + 1)]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    for n in range(1, top + 1):
        assert within_power(sizes[n], n, c)


def test_builds_are_deterministic():
    for kind in (BINARY, GENERAL, ORDERED):
        a = build_universal(UniversalSpec(kind, 12))
        b = build_universal(UniversalSpec(kind, 12))
        assert to_parentheses(a.tree) == to_parentheses(b.tree)


def test_ordered_build_is_binary_and_ordered():
    ut = build_universal(UniversalSpec(ORDERED, 15))
    assert ut.tree.ordered and ut.tree.max_degree <= 2


@pytest.mark.parametrize("kind", [BINARY, GENERAL, ORDERED])
def test_implicit_navigation_matches_materialized(kind):
    spec = UniversalSpec(kind, 40)
    ut = build_universal(spec)
    rng = random.Random(1)
    for _ in range(300):
        x, y = rng.randrange(ut.size), rng.randrange(ut.size)
        assert implicit_nca(spec, x, y) == nca(ut.tree, x, y)
    for x in rng.sample(range(ut.size), 50):
        path = ancestor_path(spec, x)
        assert path[-1] == x and path[0] == 0
        assert all(ut.tree.parent[b] == a for a, b in zip(path, path[1:]))


def test_layout_extent_matches_size():
    for kind in (BINARY, GENERAL, ORDERED):
        for n in range(1, 60):
            assert layout(kind, n, UniversalSpec(kind, n).alpha).extent[0] == universal_size(UniversalSpec(kind, n))


def test_universal_nca_trivia():
    ut = build_universal(UniversalSpec(GENERAL, 9))
    for y in range(ut.size):
        assert universal_nca(ut, y, y) == y
        assert universal_nca(ut, 0, y) == 0


def test_size_cache_roundtrip():
    spec = UniversalSpec(GENERAL, 300)
    universal_size(spec)
    sizes = export_sizes(GENERAL, spec.alpha)
    import_sizes(GENERAL, spec.alpha, sizes)
    assert universal_size(spec) == sizes[300]
    with pytest.raises(ValueError):
        import_sizes(GENERAL, spec.alpha, [0, 1, 3])


def test_dot_dump():
    dot = to_dot(build_universal(UniversalSpec(BINARY, 3)))
    assert dot.startswith('digraph "binary_3"') and "0 -> 1;" in dot
