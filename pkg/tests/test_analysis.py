import math
import random

import mpmath
import pytest

from ncalabel.analysis import (
    PUBLISHED_CONSTANTS,
    Interval,
    caterpillar_level,
    certify_double_sum,
    certify_zeta,
    check_inequality,
    contract,
    cut,
    double_sum,
    double_sum_diagonal,
    leaf_recurrence_bound,
    level_properties_check,
    make_caterpillar,
    measure,
    min_feasible_c,
    minimal_universal_leaves,
    optimize_alpha,
    parity_transform,
    within_power,
)
from ncalabel.treecore import (
    TreeSizeError,
    complete_binary_tree,
    enumerate_trees,
    isomorphic,
    nca,
    parse_tree,
    path_tree,
    single_node,
)
from ncalabel.universal import BINARY, GENERAL, ORDERED, UniversalSpec, build_universal


def test_interval_arithmetic_encloses():
    x = Interval.point(0.1)
    y = (x * 3 - 0.3) / 2
    assert 0.0 in y and y.width < 1e-15
    p = Interval.point(2.0) ** Interval.point(0.5)
    assert math.sqrt(2) in p


@pytest.mark.parametrize("c", [1.5, 1.728, 2.0, 2.185, 2.318, 3.0])
def test_zeta_enclosure_against_mpmath(c):
    z = certify_zeta(c, 10 ** 5)
    assert float(mpmath.zeta(c)) in z
    assert z.width < 1e-3


def test_zeta_premises():
    assert math.pi ** 2 / 6 in certify_zeta(2, 10 ** 5)
    assert certify_zeta(1.728, 10 ** 6).lo > 2
    assert certify_zeta(2.185, 10 ** 6).lo > 1.5
    with pytest.raises(ValueError):
        certify_zeta(1.0, 100)


def test_double_sum():
    assert double_sum(2.5, 1) == 2 ** -2.5
    assert certify_double_sum(2.174, 1000).lo > 1
    a, b = double_sum(3, 1000), double_sum_diagonal(3, 1000)
    assert abs(a - b) <= 1e-14
    with mpmath.workdps(30):
        exact = mpmath.fsum(mpmath.mpf(x * y + 1) ** -3 for x in range(1, 41) for y in range(1, 41))
    assert abs(double_sum(3, 40) - float(exact)) < 1e-15


@pytest.mark.parametrize("kind,c,alpha", PUBLISHED_CONSTANTS)
def test_published_inequalities(kind, c, alpha):
    r = check_inequality(kind, c, alpha)
    assert r.holds and r.margin > 0


def test_inequality_fails_for_small_c():
    assert not check_inequality(BINARY, 1.5, 0.704).holds


def test_optimize_alpha_closed_forms():
    b = optimize_alpha(BINARY, 1.894)
    assert round(b.alpha, 3) == 0.704 and round(b.A, 3) == 2.373
    o = optimize_alpha(ORDERED, 2.331)
    assert round(o.alpha, 3) == 0.594 and round(o.A, 3) == 1.463


@pytest.mark.parametrize("kind,c", [(BINARY, 1.894), (GENERAL, 2.318), (ORDERED, 2.331), (BINARY, 2.5), (GENERAL, 2.6)])
def test_optimize_alpha_is_locally_optimal(kind, c):
    best = optimize_alpha(kind, c)
    for delta in (-0.01, 0.01):
        assert best.margin >= check_inequality(kind, c, best.alpha + delta, 10 ** 5).margin


def test_min_feasible_c():
    assert min_feasible_c(BINARY) <= 1.894
    assert min_feasible_c(GENERAL) <= 2.318
    assert min_feasible_c(ORDERED) <= 2.331


def test_caterpillars():
    assert make_caterpillar(1).tree.size == 1
    assert isomorphic(make_caterpillar(2).tree, parse_tree("(()())"))
    assert make_caterpillar(3, 3).leaves == 5
    for s in range(1, 8):
        for d in (2, 3):
            cat = make_caterpillar(s, d)
            assert cat.leaves == (s - 1) * (d - 1) + 1
            assert len(cat.inner) == s - 1


def test_caterpillar_levels():
    t = complete_binary_tree(2)
    assert caterpillar_level(t, 0) == 3
    assert caterpillar_level(t, 3) == 1
    for s in range(1, 7):
        assert caterpillar_level(make_caterpillar(s).tree, 0) == s
    with pytest.raises(TreeSizeError):
        caterpillar_level(path_tree(70), 0)


def test_level_properties():
    assert level_properties_check(single_node()).ok
    for n in range(1, 9):
        for t in enumerate_trees(n, 2):
            assert level_properties_check(t).ok
            for parity in (0, 1):
                assert level_properties_check(t, parity=parity).ok
    assert level_properties_check(build_universal(UniversalSpec(BINARY, 6)).tree).ok


def test_cut_and_contract():
    cherry = parse_tree("(()())")
    assert isomorphic(cut(cherry, 1), path_tree(2))
    assert isomorphic(contract(path_tree(4), 1), path_tree(2))
    assert isomorphic(contract(path_tree(3), 1), path_tree(2))
    assert isomorphic(contract(parse_tree("(((()())))"), 1), cherry)
    with pytest.raises(ValueError):
        cut(cherry, 0)
    with pytest.raises(ValueError):
        contract(cherry, 0)


def test_parity_transform_examples():
    cherry = parse_tree("(()())")
    t0, _ = parity_transform(cherry, {0: 0})
    assert isomorphic(t0, cherry)
    t1, where = parity_transform(cherry, {0: 1})
    assert sum(1 for k in t1.children if not k) == 3
    assert t1.depth[where[0]] == 1
    with pytest.raises(ValueError):
        parity_transform(path_tree(2), {0: 0})


def test_parity_transform_bound_and_nca():
    rng = random.Random(0)
    for n in range(1, 10):
        for t in enumerate_trees(n):
            if any(len(k) == 1 for k in t.children):
                continue
            inner = [u for u, k in enumerate(t.children) if k]
            leaves = t.size - len(inner)
            for _ in range(4):
                c = {u: rng.randrange(2) for u in inner}
                t2, where = parity_transform(t, c)
                assert sum(1 for k in t2.children if not k) <= 2 * leaves - 1
                assert not any(len(k) == 1 for k in t2.children)
                assert all(t2.depth[where[u]] % 2 == c[u] for u in inner)
                for u in range(t.size):
                    for v in range(t.size):
                        assert where[nca(t, u, v)] == nca(t2, where[u], where[v])


def test_minimal_universal_leaves_consistent_with_recurrence():
    known = {}
    for n in range(1, 7):
        known[n] = minimal_universal_leaves(n)
        assert known[n] is not None
        assert known[n] >= leaf_recurrence_bound(n, known)
    assert [known[n] for n in range(1, 7)] == [1, 2, 3, 5, 6, 9]


def test_within_power_is_exact():
    assert within_power(5, 2, 2.331)  # 5 <= 2^2.331 = 5.03
    assert not within_power(6, 2, 2.331)
    assert within_power(4, 2, 2) and not within_power(5, 2, 2)


def test_measure_report():
    r1 = measure(BINARY, range(1, 300), samples=1, seed=3, fast_sizes=[64])
    r2 = measure(BINARY, range(1, 300), samples=1, seed=3, fast_sizes=[64])
    assert r1 == r2
    summary = next(r for r in r1 if r["record"] == "size_summary")
    assert summary["violations"] == 0
    fast = [r for r in r1 if r["record"] == "fast"]
    assert fast and fast[0]["max_ops"] > 0
