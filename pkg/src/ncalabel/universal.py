"""Minor-universal trees for binary, general and ordered binary trees.

Each universal tree is a spine of local nodes with smaller universal trees
("copies") hung off it. Nodes are numbered in preorder, children visited in
construction order with the spine child last (for the ordered kind the
spine and copies alternate sides, so order follows the plane embedding).

Sizes come from a memoized recurrence over the actual construction, and the
preorder numbering can be navigated without materializing the tree, which is
what the labeling scheme uses for large ``n``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

from .codes import build_dominating_sequence, dominating_multiset
from .decomposition import Real, exact_alpha
from .treecore import RootedTree, nca

BINARY = "binary"
GENERAL = "general"
ORDERED = "ordered-binary"
KINDS = (BINARY, GENERAL, ORDERED)
KIND_ALIASES = {"ordered": ORDERED, "ordered_binary": ORDERED}

DEFAULT_ALPHA: Dict[str, Fraction] = {
    BINARY: Fraction("0.704"),
    GENERAL: Fraction("0.659"),
    ORDERED: Fraction("0.594"),
}

__all__ = [
    "BINARY",
    "GENERAL",
    "ORDERED",
    "KINDS",
    "DEFAULT_ALPHA",
    "UniversalSpec",
    "UniversalTree",
    "Layout",
    "layout",
    "build_universal",
    "universal_size",
    "export_sizes",
    "import_sizes",
    "universal_nca",
    "ancestor_path",
    "implicit_nca",
    "to_dot",
]


def normalize_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    return kind


@dataclass(frozen=True)
class UniversalSpec:
    kind: str
    n: int
    alpha: Optional[Fraction] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        a = DEFAULT_ALPHA[self.kind] if self.alpha is None else exact_alpha(self.alpha)
        if not Fraction(1, 2) < a < 1:
            raise ValueError(f"alpha must lie in (1/2, 1), got {a}")
        object.__setattr__(self, "alpha", a)
        if self.n < 0:
            raise ValueError("n must be >= 0")

    def with_n(self, n: int) -> "UniversalSpec":
        return UniversalSpec(self.kind, n, self.alpha)


# sizes

_size_lock = threading.Lock()


class _SizeTable:
    """Sizes for one (kind, alpha), grown on demand from n = 0 upwards."""

    def __init__(self, kind: str, alpha: Fraction):
        self.kind = kind
        self.alpha = alpha
        self.size: List[int] = [0, 1]
        self.h: List[int] = [0, 0]  # h(m) = sum_{j=2..m} size(m // j)

    def _h(self, m: int) -> int:
        # block-sum over equal quotients m // j
        total = 0
        j = 2
        size = self.size
        while j <= m:
            q = m // j
            j2 = m // q
            total += (j2 - j + 1) * size[q]
            j = j2 + 1
        return total

    def ensure(self, n: int) -> None:
        size, h, a = self.size, self.h, self.alpha
        while len(size) <= n:
            m = len(size)
            spine_budget = math.floor((1 - a) * m)
            dom = dominating_multiset(spine_budget)
            k = sum(dom.values())
            big = size[math.floor(a * m)]
            if self.kind == BINARY:
                s = k + 1 + sum(c * size[v - 1] for v, c in dom.items()) + big + size[(m - 1) // 2]
            elif self.kind == GENERAL:
                s = k + 1 + sum(c * (size[v - 1] + h[v]) for v, c in dom.items()) + big + h[m - 1]
            else:
                s = 2 * (k + 1) + 1 + 2 * sum(c * size[v - 1] for v, c in dom.items()) + 2 * big
            size.append(s)
            h.append(self._h(m))


_tables: Dict[Tuple[str, Fraction], _SizeTable] = {}


def _table(kind: str, alpha: Fraction, n: int) -> _SizeTable:
    with _size_lock:
        tab = _tables.get((kind, alpha))
        if tab is None:
            tab = _tables[(kind, alpha)] = _SizeTable(kind, alpha)
        tab.ensure(n)
    return tab


def universal_size(spec: UniversalSpec) -> int:
    return _table(spec.kind, spec.alpha, spec.n).size[spec.n]


def export_sizes(kind: str, alpha: Fraction) -> List[int]:
    """Sizes computed so far for one (kind, alpha), for persisting."""
    with _size_lock:
        tab = _tables.get((normalize_kind(kind), alpha))
        return list(tab.size) if tab else [0, 1]


def import_sizes(kind: str, alpha: Fraction, sizes: List[int]) -> None:
    """Seed the table from persisted sizes; entries that disagree with a
    recomputation of the first values are rejected."""
    kind = normalize_kind(kind)
    fresh = _SizeTable(kind, alpha)
    fresh.ensure(min(len(sizes) - 1, 64))
    if sizes[: len(fresh.size)] != fresh.size:
        raise ValueError("cached sizes do not match the recurrence")
    fresh.size = list(sizes)
    fresh.h = [0, 0] + [0] * (len(sizes) - 2)
    for m in range(2, len(sizes)):
        fresh.h[m] = fresh._h(m)
    with _size_lock:
        old = _tables.get((kind, alpha))
        if old is None or len(old.size) < len(sizes):
            _tables[(kind, alpha)] = fresh


def _size(kind: str, alpha: Fraction, n: int) -> int:
    return _table(kind, alpha, n).size[n]


# layout of one level of the construction

Item = Tuple[str, int]  # ("copy", parameter) or ("spine", local node)


@dataclass(frozen=True)
class Layout:
    """One level of a universal tree.

    ``items[j]`` lists the children of local node ``j`` in order; ``offset[j]``
    is its preorder position relative to the root and ``extent[j]`` the size
    of its subtree. ``copy_offset[j][i]`` is the relative preorder position of
    the root of the i-th item of ``j`` when that item is a copy.
    """

    kind: str
    n: int
    items: Tuple[Tuple[Item, ...], ...]
    offset: Tuple[int, ...]
    extent: Tuple[int, ...]
    copy_offset: Tuple[Tuple[int, ...], ...]
    spine_length: int = 0
    sequence: Tuple[int, ...] = field(default=())


def _items(kind: str, n: int, alpha: Fraction) -> Tuple[List[List[Item]], Tuple[int, ...], int]:
    if n == 1:
        return [[]], (), 1
    seq = build_dominating_sequence(math.floor((1 - alpha) * n)).entries
    k = len(seq)
    big = math.floor(alpha * n)
    items: List[List[Item]] = []
    if kind in (BINARY, GENERAL):
        for i, a in enumerate(seq):
            row: List[Item] = []
            if a - 1 > 0:
                row.append(("copy", a - 1))
            if kind == GENERAL:
                row.extend(("copy", a // j) for j in range(2, a + 1))
            row.append(("spine", i + 1))
            items.append(row)
        last: List[Item] = [("copy", big)] if big > 0 else []
        if kind == BINARY:
            if (n - 1) // 2 > 0:
                last.append(("copy", (n - 1) // 2))
        else:
            last.extend(("copy", (n - 1) // j) for j in range(2, n))
        items.append(last)
        return items, seq, k + 1
    # ordered: u_i = 2i, v_i = 2i+1 for i = 0..k, then w = 2k+2
    for i in range(k + 1):
        a = seq[i] if i < k else 0
        u_row: List[Item] = []
        if a - 1 > 0:
            u_row.append(("copy", a - 1))
        u_row.append(("spine", 2 * i + 1))
        v_row: List[Item] = [("spine", 2 * i + 2)]
        if a - 1 > 0:
            v_row.append(("copy", a - 1))
        items.append(u_row)
        items.append(v_row)
    w_row: List[Item] = [("copy", big), ("copy", big)] if big > 0 else []
    items.append(w_row)
    return items, seq, 2 * (k + 1) + 1


@lru_cache(maxsize=8192)
def layout(kind: str, n: int, alpha: Fraction) -> Layout:
    if n < 1:
        raise ValueError("empty universal tree has no layout")
    items, seq, locals_ = _items(kind, n, alpha)
    # every local node's spine child has a larger index, so extents can be
    # filled from the last local node backwards
    extent = [0] * locals_
    for j in range(locals_ - 1, -1, -1):
        total = 1
        for what, x in items[j]:
            total += _size(kind, alpha, x) if what == "copy" else extent[x]
        extent[j] = total
    offset = [0] * locals_
    copy_offset: List[Tuple[int, ...]] = [()] * locals_
    for j in range(locals_):
        pos = offset[j] + 1
        row = []
        for what, x in items[j]:
            row.append(pos)
            if what == "copy":
                pos += _size(kind, alpha, x)
            else:
                offset[x] = pos
                pos += extent[x]
        copy_offset[j] = tuple(row)
    assert extent[0] == _size(kind, alpha, n)
    return Layout(
        kind,
        n,
        tuple(tuple(r) for r in items),
        tuple(offset),
        tuple(extent),
        tuple(copy_offset),
        locals_,
        seq,
    )


# materialized trees


@dataclass(frozen=True)
class UniversalTree:
    spec: UniversalSpec
    tree: RootedTree

    @property
    def size(self) -> int:
        return self.tree.size

    def index(self, node: int) -> int:
        # nodes are numbered by preorder position
        return node


_build_lock = threading.Lock()


def build_universal(spec: UniversalSpec) -> UniversalTree:
    kind, alpha = spec.kind, spec.alpha
    total = universal_size(spec)
    ordered = kind == ORDERED
    if total == 0:
        return UniversalTree(spec, RootedTree.empty(ordered))
    children: List[Tuple[int, ...]] = [()] * total
    with _build_lock:
        stack = [(spec.n, 0)]
        while stack:
            n, base = stack.pop()
            lay = layout(kind, n, alpha)
            for j in range(lay.spine_length):
                kids = []
                for (what, x), off in zip(lay.items[j], lay.copy_offset[j]):
                    kids.append(base + off)
                    if what == "copy":
                        stack.append((x, base + off))
                children[base + lay.offset[j]] = tuple(kids)
    return UniversalTree(spec, RootedTree(tuple(children), ordered))


def universal_nca(ut: UniversalTree, x: int, y: int) -> int:
    return nca(ut.tree, x, y)


# implicit navigation


def ancestor_path(spec: UniversalSpec, x: int) -> List[int]:
    """Preorder indexes of the ancestors of ``x`` (root first, ``x`` last),
    computed from the layouts alone."""
    total = universal_size(spec)
    if not 0 <= x < total:
        raise IndexError(f"index {x} outside universal tree of size {total}")
    kind, alpha = spec.kind, spec.alpha
    path = []
    n, base = spec.n, 0
    while True:
        lay = layout(kind, n, alpha)
        j = 0
        entered_copy = False
        while not entered_copy:
            here = base + lay.offset[j]
            path.append(here)
            if here == x:
                return path
            for (what, arg), off in zip(lay.items[j], lay.copy_offset[j]):
                start = base + off
                if what == "copy":
                    if start <= x < start + _size(kind, alpha, arg):
                        n, base = arg, start
                        entered_copy = True
                        break
                elif start <= x < start + lay.extent[arg]:
                    j = arg
                    break
            else:  # pragma: no cover
                raise AssertionError("index not found in layout")


def implicit_nca(spec: UniversalSpec, x: int, y: int) -> int:
    px, py = ancestor_path(spec, x), ancestor_path(spec, y)
    best = px[0]
    for a, b in zip(px, py):
        if a != b:
            break
        best = a
    return best


def to_dot(ut: UniversalTree) -> str:
    lines = [f'digraph "{ut.spec.kind}_{ut.spec.n}" {{', "  node [shape=point];"]
    for u, kids in enumerate(ut.tree.children):
        for v in kids:
            lines.append(f"  {u} -> {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
