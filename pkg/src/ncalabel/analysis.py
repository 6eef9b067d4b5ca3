"""Certified constants, lower-bound gadgets and measurement reports.

Inequalities are evaluated on intervals whose endpoints are rounded outwards
with ``math.nextafter`` after every floating operation, so a passing check
does not depend on a lucky rounding. Zeta values come with explicit tail
bounds from the integral test.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .treecore import (
    RootedTree,
    TreeSizeError,
    is_topological_minor,
    random_tree,
)
from .universal import BINARY, GENERAL, ORDERED, UniversalSpec, normalize_kind, universal_size

__all__ = [
    "Interval",
    "certify_zeta",
    "double_sum",
    "double_sum_diagonal",
    "certify_double_sum",
    "InequalityResult",
    "check_inequality",
    "optimize_alpha",
    "min_feasible_c",
    "PUBLISHED_CONSTANTS",
    "Caterpillar",
    "make_caterpillar",
    "caterpillar_level",
    "LevelReport",
    "level_properties_check",
    "cut",
    "contract",
    "parity_transform",
    "full_binary_shapes",
    "minimal_universal_leaves",
    "leaf_recurrence_bound",
    "measure",
    "within_power",
]

EPS = 2.0 ** -52

# (kind, c, alpha) triples the size bounds rest on
PUBLISHED_CONSTANTS = (
    (BINARY, 1.894, 0.704),
    (GENERAL, 2.318, 0.659),
    (ORDERED, 2.331, 0.594),
)


# intervals


def _down(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -math.inf)
    return x


def _up(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, math.inf)
    return x


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        """Enclosure of the real number written as ``x`` (one ulp each side)."""
        return cls(_down(float(x)), _up(float(x)))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, o: "Interval") -> "Interval":
        o = _lift(o)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o: "Interval") -> "Interval":
        return self + (-_lift(o))

    def __rsub__(self, o: "Interval") -> "Interval":
        return _lift(o) - self

    def __mul__(self, o: "Interval") -> "Interval":
        o = _lift(o)
        ps = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Interval(_down(min(ps)), _up(max(ps)))

    __rmul__ = __mul__

    def __truediv__(self, o: "Interval") -> "Interval":
        o = _lift(o)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval contains zero")
        qs = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi]
        return Interval(_down(min(qs)), _up(max(qs)))

    def __rtruediv__(self, o: "Interval") -> "Interval":
        return _lift(o) / self

    def __pow__(self, e: "Interval") -> "Interval":
        """Positive base only; pow is monotone in each argument, so the
        extremes sit at the corners. Two ulps cover the libm error."""
        e = _lift(e)
        if self.lo <= 0:
            raise ValueError("power of a non-positive interval")
        ps = [math.pow(x, y) for x in (self.lo, self.hi) for y in (e.lo, e.hi)]
        return Interval(_down(min(ps), 2), _up(max(ps), 2))


def _lift(x) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, int) and abs(x) < 2 ** 53:
        return Interval(float(x), float(x))
    return Interval.point(x)


# zeta and the double sum


def certify_zeta(c: float, terms: int = 10 ** 6) -> Interval:
    """``S_T + 1/((c-1)(T+1)^(c-1)) <= zeta(c) <= S_T + 1/((c-1) T^(c-1))``
    with the partial sum and both tails rounded outwards."""
    if c <= 1:
        raise ValueError(f"zeta diverges for c = {c} <= 1")
    if terms < 10:
        raise ValueError("need at least 10 terms")
    ci = Interval.point(c)
    # terms are in (0, 1]; numpy's pow is within a few ulps, fsum adds one
    # more rounding, so 8 eps relative covers the partial sum
    arr = np.arange(1, terms + 1, dtype=np.float64) ** (-float(c))
    s = math.fsum(arr.tolist())
    slack = 8 * EPS * s + terms * 2.0 ** -1074
    partial = Interval(_down(s - slack), _up(s + slack))
    cm1 = ci - 1
    tail_lo = 1 / (cm1 * (Interval(terms + 1, terms + 1) ** cm1))
    tail_hi = 1 / (cm1 * (Interval(terms, terms) ** cm1))
    return Interval((partial + tail_lo).lo, (partial + tail_hi).hi)


def double_sum(c: float, limit: int) -> float:
    """``sum_{x,y=1..limit} (x*y + 1)^-c`` in row-major order, compensated."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    x = np.arange(1, limit + 1, dtype=np.float64)
    rows = []
    for i in range(1, limit + 1):
        rows.append(math.fsum(((i * x + 1.0) ** (-float(c))).tolist()))
    return math.fsum(rows)


def double_sum_diagonal(c: float, limit: int) -> float:
    """The same sum accumulated along anti-diagonals ``x + y = k``."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    parts = []
    for k in range(2, 2 * limit + 1):
        x = np.arange(max(1, k - limit), min(limit, k - 1) + 1, dtype=np.float64)
        parts.append(math.fsum(((x * (k - x) + 1.0) ** (-float(c))).tolist()))
    return math.fsum(parts)


def certify_double_sum(c: float, limit: int) -> Interval:
    s = double_sum(c, limit)
    slack = 8 * EPS * s + limit * limit * 2.0 ** -1074
    return Interval(_down(s - slack), _up(s + slack))


# the size inequalities


@dataclass(frozen=True)
class InequalityResult:
    kind: str
    c: float
    alpha: float
    lhs: Interval
    rhs: Interval

    @property
    def holds(self) -> bool:
        return self.lhs.hi <= self.rhs.lo

    @property
    def margin(self) -> float:
        """Certified lower bound on RHS - LHS."""
        return _down(self.rhs.lo - self.lhs.hi)

    def __bool__(self) -> bool:
        return self.holds


def _sides(kind: str, c: Interval, a: Interval, zeta: Optional[Interval]) -> Tuple[Interval, Interval]:
    two = Interval(2.0, 2.0)
    p = two ** (c - 1)
    geo = p / (p - 1)  # 2^(c-1) / (2^(c-1) - 1)
    if kind == BINARY:
        return a ** c + (1 - a) ** c * geo, 1 - Interval(0.5, 0.5) ** c
    if kind == GENERAL:
        # zeta grows the left side and shrinks the right one, so the upper
        # end of zeta bounds the left side from above and the right from below
        assert zeta is not None
        lhs = a ** c + (1 - a) ** c * zeta * geo
        return lhs, 2 - zeta
    return 2 * a ** c + (1 - a) ** c * (two ** c) / (p - 1), Interval(1.0, 1.0)


def check_inequality(kind: str, c: float, alpha: float, zeta_terms: int = 10 ** 6) -> InequalityResult:
    kind = normalize_kind(kind)
    if c <= 1:
        raise ValueError("c must exceed 1")
    if not 0.5 < float(alpha) < 1:
        raise ValueError("alpha must lie in (1/2, 1)")
    ci, ai = Interval.point(c), Interval.point(float(alpha))
    zeta = certify_zeta(c, zeta_terms) if kind == GENERAL else None
    lhs, rhs = _sides(kind, ci, ai, zeta)
    return InequalityResult(kind, float(c), float(alpha), lhs, rhs)


@dataclass(frozen=True)
class AlphaChoice:
    alpha: float
    margin: float
    A: Optional[float] = None


def _float_margin(kind: str, c: float, a: float, zeta: float) -> float:
    p = 2 ** (c - 1)
    if kind == BINARY:
        return (1 - 0.5 ** c) - (a ** c + (1 - a) ** c * p / (p - 1))
    if kind == GENERAL:
        return (2 - zeta) - (a ** c + (1 - a) ** c * zeta * p / (p - 1))
    return 1 - (2 * a ** c + (1 - a) ** c * 2 ** c / (p - 1))


def optimize_alpha(kind: str, c: float, zeta_terms: int = 10 ** 5) -> AlphaChoice:
    kind = normalize_kind(kind)
    if c <= 1:
        raise ValueError("c must exceed 1")
    if kind in (BINARY, ORDERED):
        p = 2 ** (c - 1)
        A = (p / (p - 1)) ** (1 / (c - 1))
        alpha = A / (1 + A)
        return AlphaChoice(alpha, _float_margin(kind, c, alpha, 0.0), A)
    zeta = certify_zeta(c, zeta_terms).mid
    f = lambda a: -_float_margin(kind, c, a, zeta)  # noqa: E731
    grid = np.linspace(0.5, 1.0, 201)[1:-1]
    k = int(np.argmin([f(a) for a in grid]))
    k = min(max(k, 1), len(grid) - 2)
    res = optimize.minimize_scalar(f, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden")
    alpha = float(res.x)
    return AlphaChoice(alpha, -float(res.fun))


def min_feasible_c(kind: str, lo: float = 1.05, hi: float = 4.0, tol: float = 1e-4) -> float:
    """Smallest c (within ``tol``, rounded up) for which the inequality is
    certified at the optimal alpha."""
    kind = normalize_kind(kind)

    def ok(c: float) -> bool:
        choice = optimize_alpha(kind, c)
        return 0.5 < choice.alpha < 1 and check_inequality(kind, c, choice.alpha, 10 ** 5).holds

    if not ok(hi):
        raise ValueError(f"inequality fails even at c = {hi}")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# caterpillars and levels


@dataclass(frozen=True)
class Caterpillar:
    s: int
    d: int
    tree: RootedTree

    @property
    def leaves(self) -> int:
        return sum(1 for k in self.tree.children if not k)

    @property
    def inner(self) -> Tuple[int, ...]:
        return tuple(u for u, k in enumerate(self.tree.children) if k)


def make_caterpillar(s: int, d: int = 2) -> Caterpillar:
    """Path of ``s - 1`` inner nodes; each gets ``d - 1`` leaves except the
    last, which gets ``d``."""
    if s < 1 or d < 2:
        raise ValueError("need s >= 1 and d >= 2")
    parents: List[Optional[int]] = [None]
    if s >= 2:
        spine = [0]
        for _ in range(s - 2):
            parents.append(spine[-1])
            spine.append(len(parents) - 1)
        for i, v in enumerate(spine):
            for _ in range(d if i == len(spine) - 1 else d - 1):
                parents.append(v)
    return Caterpillar(s, d, RootedTree.from_parents(parents))


def _subtree_with_offset(t: RootedTree, v: int) -> Tuple[RootedTree, int]:
    return t.subtree(v), t.depth[v]


def caterpillar_level(
    t: RootedTree,
    v: int,
    d: int = 2,
    parity: Optional[int] = None,
    cap: int = 60,
) -> int:
    """Largest s such that the subtree at ``v`` contains a subdivision of
    the (s, d)-caterpillar. With ``parity`` the caterpillar's inner nodes
    must land at depths (in ``t``) congruent to it modulo 2."""
    t.check_node(v)
    if t.size > cap:
        raise TreeSizeError(f"tree has {t.size} nodes, cap is {cap}")
    sub, offset = _subtree_with_offset(t, v)

    def fits(s: int) -> bool:
        cat = make_caterpillar(s, d)
        constraint = None
        if parity is not None:
            constraint = {u: (parity - offset) % 2 for u in cat.inner}
        return is_topological_minor(cat.tree, sub, constraint, cap) is not None

    leaves = sum(1 for k in sub.children if not k)
    lo, hi = 1, max(1, (leaves - 1) // (d - 1) + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass
class LevelReport:
    levels: Dict[int, int]
    violations: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def level_properties_check(t: RootedTree, d: int = 2, parity: Optional[int] = None, cap: int = 60) -> LevelReport:
    levels = {v: caterpillar_level(t, v, d, parity, cap) for v in range(t.size)}
    report = LevelReport(levels)
    for v in range(t.size):
        kids = t.children[v]
        lv = levels[v]
        if any(levels[u] > lv for u in kids):
            report.violations.append((v, "child above parent"))
        if len(kids) == 1 and levels[kids[0]] != lv:
            report.violations.append((v, "unary node changes level"))
        if len(kids) >= 2 and d == 2:
            if parity is None or t.depth[v] % 2 == parity:
                if not any(levels[u] == lv - 1 for u in kids):
                    report.violations.append((v, "no child one level down"))
            elif not any(levels[u] == lv for u in kids):
                report.violations.append((v, "no child on the same level"))
    return report


# cutting and contraction


def _rebuild(t: RootedTree, kids: Dict[int, List[int]], root: int) -> RootedTree:
    order, stack = [], [root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(reversed(kids[u]))
    index = {u: i for i, u in enumerate(order)}
    return RootedTree(tuple(tuple(index[c] for c in kids[u]) for u in order), t.ordered)


def cut(t: RootedTree, a: int) -> RootedTree:
    """Remove the subtree rooted at ``a`` and the edge to its parent."""
    t.check_node(a)
    if a == t.root:
        raise ValueError("cannot cut the root")
    kids = {u: [c for c in k if c != a] for u, k in enumerate(t.children)}
    return _rebuild(t, kids, t.root)


def contract(t: RootedTree, b: int) -> RootedTree:
    """Remove ``b`` (parent ``a``, single child ``c``); an internal ``c`` is
    removed too and its children move to ``a``, a leaf ``c`` moves to ``a``."""
    t.check_node(b)
    a = t.parent[b]
    if a is None or len(t.children[b]) != 1:
        raise ValueError("contraction needs a non-root node with exactly one child")
    (c,) = t.children[b]
    moved = list(t.children[c]) if t.children[c] else [c]
    kids = {u: list(k) for u, k in enumerate(t.children)}
    pos = kids[a].index(b)
    kids[a][pos : pos + 1] = moved
    return _rebuild(t, kids, t.root)


def parity_transform(t: RootedTree, constraint: Mapping[int, int]) -> Tuple[RootedTree, Dict[int, int]]:
    """Insert helper nodes so that plain depth parity enforces the
    constraint on inner nodes. Returns the new tree and where every original
    node went."""
    if any(len(k) == 1 for k in t.children):
        raise ValueError("tree has a node of degree 1")
    inner = [u for u, k in enumerate(t.children) if k]
    if any(constraint.get(u) not in (0, 1) for u in inner):
        raise ValueError("constraint must give 0 or 1 for every inner node")
    kids: Dict[int, List[int]] = {u: [] for u in range(t.size)}
    nxt = t.size

    def fresh() -> int:
        nonlocal nxt
        kids[nxt] = []
        nxt += 1
        return nxt - 1

    root = t.root
    if inner and constraint[root] == 1:
        top = fresh()
        kids[top] = [root, fresh()]
        root = top
    for u in t.preorder:
        for v in t.children[u]:
            if t.children[v] and constraint[u] == constraint[v]:
                mid = fresh()
                kids[mid] = [v, fresh()]
                kids[u].append(mid)
            else:
                kids[u].append(v)
    order, stack = [], [root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(reversed(kids[u]))
    index = {u: i for i, u in enumerate(order)}
    out = RootedTree(tuple(tuple(index[c] for c in kids[u]) for u in order), t.ordered)
    return out, {u: index[u] for u in range(t.size)}


# minimal universal trees for tiny n


@lru_cache(maxsize=None)
def full_binary_shapes(leaves: int) -> Tuple[str, ...]:
    """Canonical strings of unordered full binary trees with ``leaves`` leaves."""
    if leaves == 1:
        return ("()",)
    out = set()
    for k in range(1, leaves // 2 + 1):
        for x in full_binary_shapes(k):
            for y in full_binary_shapes(leaves - k):
                a, b = sorted((x, y))
                out.add("(" + a + b + ")")
    return tuple(sorted(out))


def minimal_universal_leaves(n: int, max_leaves: int = 16) -> Optional[int]:
    """Fewest leaves of a full binary tree containing a subdivision of every
    full binary tree with ``n`` leaves (None if above ``max_leaves``).

    Unary nodes never help, and a node of higher degree can be replaced by a
    binary cascade without adding leaves, so full binary candidates suffice.
    """
    from .treecore import parse_tree

    targets = [parse_tree(s) for s in full_binary_shapes(n)]
    for L in range(n, max_leaves + 1):
        for s in full_binary_shapes(L):
            cand = parse_tree(s)
            if all(is_topological_minor(x, cand, cap=2 * max_leaves) is not None for x in targets):
                return L
    return None


def leaf_recurrence_bound(n: int, known: Mapping[int, int]) -> int:
    """``1 + sum_{s >= 2} b(n // s)`` from known values (b(0) = 0)."""
    return 1 + sum(known.get(n // s, 0) if n // s else 0 for s in range(2, n + 1))


# measurement


def within_power(size: int, n: int, c) -> bool:
    """Exact ``size <= n^c`` for a decimal exponent ``c = p/q``, decided as
    ``size^q <= n^p`` in integers."""
    from fractions import Fraction

    e = Fraction(str(c)) if isinstance(c, float) else Fraction(c)
    if size <= 0:
        return True
    return size ** e.denominator <= n ** e.numerator


def measure(
    kind: str,
    n_range: Sequence[int],
    samples: int = 3,
    seed: int = 0,
    fast_sizes: Sequence[int] = (),
    b: Optional[int] = None,
) -> List[Dict[str, object]]:
    """JSON-ready records: universal sizes against n^c, simple label widths,
    and for ``fast_sizes`` the fast-scheme label lengths and decode
    operation counts on random trees."""
    from .fastscheme import OpCounter, decode_fast, encode_fast

    kind = normalize_kind(kind)
    c = {k: cc for k, cc, _ in PUBLISHED_CONSTANTS}[kind]
    records: List[Dict[str, object]] = []
    worst, violations = 0.0, 0
    for n in n_range:
        if n < 1:
            continue
        size = universal_size(UniversalSpec(kind, n))
        width = max(1, (size - 1).bit_length())
        over = not within_power(size, n, c)
        violations += over
        ratio = size / n ** c
        worst = max(worst, ratio)
        records.append(
            {
                "record": "size",
                "kind": kind,
                "n": n,
                "size": size,
                "bound": n ** c,
                "ratio": ratio,
                "width": width,
                "width_bound": math.ceil(c * math.log2(n)) + 2 if n > 1 else 2,
            }
        )
    records.append({"record": "size_summary", "kind": kind, "c": c, "max_ratio": worst, "violations": violations})
    rng = random.Random(seed)
    for n in fast_sizes:
        for k in range(samples):
            t = random_tree(n, rng, max_degree=2 if kind != GENERAL else None)
            enc = encode_fast(t, b)
            lengths = [lab.bit_length for lab in enc.labels.values()]
            share = enc.shared.table_bits() / n
            worst_ops = 0
            for _ in range(200):
                u, v = rng.randrange(n), rng.randrange(n)
                cnt = OpCounter()
                decode_fast(enc.labels[u], enc.labels[v], cnt)
                worst_ops = max(worst_ops, cnt.count)
            records.append(
                {
                    "record": "fast",
                    "n": n,
                    "sample": k,
                    "b": enc.shared.b,
                    "m": enc.shared.m,
                    "a": enc.measured_a,
                    "max_bits": max(lengths),
                    "mean_bits": sum(lengths) / n,
                    "max_bits_with_table_share": max(lengths) + share,
                    "max_ops": worst_ops,
                }
            )
    return records
