"""Acceptance criteria for the primary component, one test per criterion.

Each test prints a single ``ACCEPTANCE PASS|FAIL <name>: <detail>`` line;
the lines are repeated in the terminal summary. Run just this file with
``pytest tests/test_acceptance.py -v``.
"""
import bisect
import math
import random
import time

import pytest

from ncalabel.analysis import (
    PUBLISHED_CONSTANTS,
    certify_double_sum,
    certify_zeta,
    check_inequality,
    within_power,
)
from ncalabel.codes import (
    alphabetical_code,
    build_dominating_sequence,
    dominate,
    dominating_multiset,
    weighted_label_bound,
    weighted_labels,
)
from ncalabel.embed import embed, preserves_order, verify_embedding
from ncalabel.fastscheme import (
    OpCounter,
    decode_fast,
    encode_fast,
    intset_encode,
    intset_extract,
    intset_successor_rank,
    intset_truncate,
    step_budget_check,
)
from ncalabel.scheme import SchemeInstance, decode_nca, encode
from ncalabel.treecore import (
    enumerate_ordered_binary,
    enumerate_trees,
    leaf_degree_identity,
    nca,
    random_tree,
)
from ncalabel.universal import BINARY, GENERAL, ORDERED, UniversalSpec, build_universal, universal_size

RESULTS = []

EXHAUSTIVE = [(BINARY, 9), (GENERAL, 7), (ORDERED, 7)]


def _trees(kind, n):
    if kind == BINARY:
        return enumerate_trees(n, 2)
    if kind == GENERAL:
        return enumerate_trees(n)
    return enumerate_ordered_binary(n)


def report(name, failures, detail):
    ok = failures == 0
    line = f"ACCEPTANCE {'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_universality_exhaustive():
    failures, checked = 0, 0
    for kind, top in EXHAUSTIVE:
        for n in range(1, top + 1):
            spec = UniversalSpec(kind, n)
            ut = build_universal(spec)
            for t in _trees(kind, n):
                e = embed(t, spec)
                good = verify_embedding(t, e, ut)
                if kind == ORDERED:
                    good = good and preserves_order(t, e)
                failures += not good
                checked += 1
    report("universality", failures, f"{checked} trees embedded, {failures} failures")


def test_scheme_correctness_exhaustive():
    failures, pairs = 0, 0
    for kind, top in EXHAUSTIVE:
        for n in range(1, top + 1):
            inst = SchemeInstance(UniversalSpec(kind, n))
            for t in _trees(kind, n):
                labels = encode(t, inst)
                for u in range(n):
                    for v in range(n):
                        pairs += 1
                        failures += decode_nca(labels[u], labels[v], inst) != labels[nca(t, u, v)]
    report("scheme-correctness", failures, f"{pairs} pairs, {failures} failures")


def _fast_pairs(t, b, pairs):
    enc = encode_fast(t, b)
    bad = 0
    for u, v in pairs:
        bad += decode_fast(enc.labels[u], enc.labels[v]) != enc.labels[nca(t, u, v)]
    return bad


def test_fast_scheme_equivalence():
    failures, pairs = 0, 0
    for b in (2, 3):
        for n in range(1, 10):
            everything = [(u, v) for u in range(n) for v in range(n)]
            for t in enumerate_trees(n):
                failures += _fast_pairs(t, b, everything)
                pairs += len(everything)
    rng = random.Random(2024)
    for _ in range(200):
        n = rng.randint(1, 2000)
        t = random_tree(n, rng)
        # all pairs for small trees, a fixed sample plus every pair among
        # 40 random nodes otherwise
        if n <= 60:
            sample = [(u, v) for u in range(n) for v in range(n)]
        else:
            few = rng.sample(range(n), 40)
            sample = [(u, v) for u in few for v in few]
            sample += [(rng.randrange(n), rng.randrange(n)) for _ in range(1000)]
        failures += _fast_pairs(t, rng.choice((2, 3)), sample)
        pairs += len(sample)
    report("fast-equivalence", failures, f"{pairs} pairs, {failures} failures")


def test_size_bounds():
    violations = 0
    ranges = [(BINARY, 1.894, 2000), (GENERAL, 2.318, 2000), (ORDERED, 2.331, 1000)]
    for kind, c, top in ranges:
        for n in range(1, top + 1):
            violations += not within_power(universal_size(UniversalSpec(kind, n)), n, c)
    report("size-bounds", violations, f"{violations} violations")


def test_label_length():
    violations = 0
    worst = {}
    for kind, c in ((BINARY, 1.894), (GENERAL, 2.318)):
        for n in range(1, 2001):
            width = SchemeInstance(UniversalSpec(kind, n)).width
            cap = math.ceil(c * math.log2(n)) + 2
            violations += width > cap
            worst[kind] = max(worst.get(kind, -99), width - cap)
    report("label-length", violations, f"{violations} violations, max width-cap {worst}")


def test_constant_certification():
    checks = {
        "zeta(1.728)>2": certify_zeta(1.728, 10 ** 6).lo > 2,
        "double-sum(2.174)>1": certify_double_sum(2.174, 1000).lo > 1,
        "zeta(2.185)>1.5": certify_zeta(2.185, 10 ** 6).lo > 1.5,
    }
    for kind, c, alpha in PUBLISHED_CONSTANTS:
        checks[f"{kind}({c},{alpha})"] = check_inequality(kind, c, alpha).holds
    failed = [k for k, ok in checks.items() if not ok]
    report("constants", len(failed), f"{len(checks)} certified booleans, failed: {failed or 'none'}")


def _property_failures():
    rng = random.Random(99)
    fails = {}

    # dominating multiset structure and randomized domination
    bad = 0
    for N in range(1, 300):
        want = {}
        for i in range(N.bit_length()):
            want[N >> i] = want.get(N >> i, 0) + (1 << i)
        bad += dominating_multiset(N) != want
    for _ in range(10 ** 4):
        N = rng.randint(1, 400)
        parts, left = [], rng.randint(0, N)
        while left:
            x = rng.randint(1, left)
            parts.append(x)
            left -= x
        rng.shuffle(parts)
        a = build_dominating_sequence(N).entries
        picks = dominate(parts, N)
        bad += not all(x < y for x, y in zip(picks, picks[1:]))
        bad += not all(a[j - 1] >= x for j, x in zip(picks, parts))
    fails["domination"] = bad

    bad = 0
    for _ in range(10 ** 4):
        w = [rng.randint(1, rng.choice([1, 5, 100, 10 ** 6])) for _ in range(rng.randint(1, 30))]
        codes = alphabetical_code(w)
        bad += not all(x < y for x, y in zip(codes, codes[1:]))
        bad += any(len(c) > 1 + math.log2(sum(w) / x) + 1e-12 for c, x in zip(codes, w))
    fails["alphabetical"] = bad

    def weighted_bad(t):
        labels = weighted_labels(t)
        n = len(set(labels.values())) != t.size
        return n + sum(
            len(lab) != weighted_label_bound(t.size, t.degree(u))
            or len(lab) > 2 + math.log2(t.size / (1 + t.degree(u))) + 1e-12
            for u, lab in labels.items()
        )

    generated = [t for n in range(1, 10) for t in enumerate_trees(n)]
    generated += [random_tree(rng.randint(1, 300), rng) for _ in range(1000)]
    fails["weighted-labels"] = sum(weighted_bad(t) for t in generated)

    bad, ops = 0, 0
    while ops < 10 ** 5:
        M = rng.choice([8, 64, 500, 4000])
        s_max = rng.randint(1, 48)
        xs = sorted(rng.sample(range(1, M + 1), rng.randint(0, min(s_max, M))))
        e = intset_encode(xs, s_max, M)
        for _ in range(25):
            op = rng.randrange(3)
            if op == 0 and xs:
                k = rng.randint(1, len(xs))
                bad += intset_extract(e, k) != xs[k - 1]
            elif op == 1:
                x = rng.randint(0, M + 1)
                i = bisect.bisect_left(xs, x)
                bad += intset_successor_rank(e, x) != ((i + 1, xs[i]) if i < len(xs) else None)
            else:
                k = rng.randint(0, len(xs))
                e, xs = intset_truncate(e, k), xs[:k]
                bad += e.bits != intset_encode(xs, s_max, M).bits
            ops += 1
    fails["intset"] = bad

    budget = [t for n in range(1, 8) for t in enumerate_trees(n)]
    budget += [random_tree(rng.randint(1, 3000), rng) for _ in range(40)]
    fails["step-budget"] = sum(not step_budget_check(t, 2, encode_fast(t, 2)).ok for t in budget)

    fails["leaf-degree-identity"] = sum(not leaf_degree_identity(t) for t in generated + budget)
    return fails


def test_property_suites():
    fails = _property_failures()
    report("property-suites", sum(fails.values()), ", ".join(f"{k}={v}" for k, v in fails.items()))


@pytest.mark.slow
def test_constant_operation_decode():
    rng = random.Random(5)
    worst = {}
    for e in (8, 10, 12, 14, 16):
        n = 1 << e
        t = random_tree(n, rng)
        enc = encode_fast(t, 2)
        top = 0
        for _ in range(3000):
            c = OpCounter()
            decode_fast(enc.labels[rng.randrange(n)], enc.labels[rng.randrange(n)], c)
            top = max(top, c.count)
        worst[n] = top
    grew = worst[1 << 16] > 1.1 * worst[1 << 8]
    report("constant-ops", int(grew), f"max ops per n {worst}")
