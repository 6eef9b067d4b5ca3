"""Constructive embeddings of trees into the universal trees.

The recursion follows the universality argument: take the top alpha-heavy
path ``v_1..v_s``, charge every path node ``b(i) = 1 + |hanging subtrees|``,
place the path nodes on the spine entries chosen by :func:`dominate`, send
the hanging subtrees into the copies attached there, and send the children of
``v_s`` into the copies hanging from the last spine node.

A subtree smaller than the copy it is sent into is first padded with a chain
below one of its leaves; the padding nodes are dropped from the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .codes import dominate
from .universal import (
    BINARY,
    GENERAL,
    ORDERED,
    UniversalSpec,
    UniversalTree,
    ancestor_path,
    layout,
    universal_size,
)
from .treecore import RootedTree, nca

__all__ = [
    "Embedding",
    "embed",
    "verify_embedding",
    "is_subdivision",
    "parse_embedding",
    "preserves_order",
]


@dataclass(frozen=True)
class Embedding:
    target_spec: UniversalSpec
    map: Dict[int, int]

    def serialize(self) -> str:
        return "".join(f"{u} {self.map[u]}\n" for u in sorted(self.map))


def parse_embedding(text: str, spec: UniversalSpec) -> Embedding:
    pairs = {}
    for line in text.splitlines():
        if line.strip():
            u, x = line.split()
            pairs[int(u)] = int(x)
    return Embedding(spec, pairs)


class _Work:
    """Mutable child lists so that padding chains can be grafted on."""

    def __init__(self, t: RootedTree):
        self.kids: Dict[int, List[int]] = {u: list(k) for u, k in enumerate(t.children)}
        self.next_id = t.size

    def nodes_under(self, r: int) -> List[int]:
        out, stack = [], [r]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.kids[u])
        return out

    def sizes_under(self, r: int) -> Dict[int, int]:
        order = self.nodes_under(r)
        size = {u: 1 for u in order}
        for u in reversed(order):
            for c in self.kids[u]:
                size[u] += size[c]
        return size

    def canonical(self, r: int) -> str:
        forms: Dict[int, str] = {}
        for u in reversed(self.nodes_under(r)):
            parts = sorted(forms.pop(c) for c in self.kids[u])
            forms[u] = "(" + "".join(parts) + ")"
        return forms[r]

    def pad(self, r: int, extra: int) -> None:
        u = r
        while self.kids[u]:
            u = self.kids[u][-1]
        for _ in range(extra):
            v = self.next_id
            self.next_id += 1
            self.kids[u].append(v)
            self.kids[v] = []
            u = v


def _by_size(work: _Work, nodes: List[int], size: Dict[int, int]) -> List[int]:
    counts: Dict[int, int] = {}
    for c in nodes:
        counts[size[c]] = counts.get(size[c], 0) + 1
    # canonical forms only break ties between equal sizes
    keyed = [(-size[c], work.canonical(c) if counts[size[c]] > 1 else "", c) for c in nodes]
    keyed.sort()
    return [c for _, _, c in keyed]


def embed(t: RootedTree, spec: UniversalSpec) -> Embedding:
    if t.size == 0:
        return Embedding(spec, {})
    if t.size > spec.n:
        raise ValueError(f"tree has {t.size} nodes, universal tree is for n={spec.n}")
    if spec.kind in (BINARY, ORDERED) and t.max_degree > 2:
        raise ValueError(f"{spec.kind} universal trees only take trees with degree <= 2")
    work = _Work(t)
    out: Dict[int, int] = {}
    stack: List[Tuple[int, int, int]] = [(t.root, spec.n, 0)]
    while stack:
        r, n, base = stack.pop()
        stack.extend(_embed_level(work, r, n, base, spec, out))
    result = {u: x for u, x in out.items() if u < t.size}
    return Embedding(spec, result)


def _embed_level(
    work: _Work, r: int, n: int, base: int, spec: UniversalSpec, out: Dict[int, int]
) -> List[Tuple[int, int, int]]:
    """Place the top path of the subtree at ``r`` inside the copy of the
    ``n``-parameter universal tree rooted at ``base``; returns the recursive
    subproblems (subtree root, copy parameter, copy base)."""
    kind, alpha = spec.kind, spec.alpha
    size = work.sizes_under(r)
    if size[r] > n:  # pragma: no cover - guarded by the size arithmetic
        raise AssertionError(f"subtree of size {size[r]} routed into copy for n={n}")
    if size[r] < n:
        work.pad(r, n - size[r])
        size = work.sizes_under(r)
    if n == 1:
        out[r] = base
        return []
    lay = layout(kind, n, alpha)
    threshold = alpha * n
    path = [r]
    while True:
        heavy = [c for c in work.kids[path[-1]] if size[c] >= threshold]
        if not heavy:
            break
        path.append(heavy[0])
    hanging = [[c for c in work.kids[v] if c != path[i + 1]] for i, v in enumerate(path[:-1])]
    b = [1 + sum(size[c] for c in hs) for hs in hanging]
    budget = math.floor((1 - alpha) * n)
    picks = dominate(b, budget)
    seq = lay.sequence
    jobs: List[Tuple[int, int, int]] = []

    def copy_slot(local: int, index: int, child: int) -> None:
        what, m = lay.items[local][index]
        assert what == "copy" and size[child] <= m, "domination routed a subtree into a small copy"
        jobs.append((child, m, base + lay.copy_offset[local][index]))

    for i, v in enumerate(path[:-1]):
        j = picks[i]  # 1-based position in the dominating sequence
        if kind == ORDERED:
            kids = work.kids[v]
            right = bool(hanging[i]) and kids.index(hanging[i][0]) > kids.index(path[i + 1])
            local = 2 * (j - 1) + (1 if right else 0)
            out[v] = base + lay.offset[local]
            if hanging[i]:
                copy_slot(local, 1 if right else 0, hanging[i][0])
            continue
        local = j - 1
        out[v] = base + lay.offset[local]
        if not hanging[i]:
            continue
        if kind == BINARY:
            copy_slot(local, 0, hanging[i][0])
        else:
            # k-th largest hanging child -> copy for floor(a/k) (k = 1: a - 1)
            assert seq[j - 1] >= 2
            for k, c in enumerate(_by_size(work, hanging[i], size), start=1):
                copy_slot(local, k - 1, c)

    last = path[-1]
    if kind == ORDERED:
        local = lay.spine_length - 1  # w
        out[last] = base + lay.offset[local]
        for idx, c in enumerate(work.kids[last]):
            copy_slot(local, idx, c)
    else:
        local = lay.spine_length - 1  # u_{k+1}
        out[last] = base + lay.offset[local]
        for idx, c in enumerate(_by_size(work, work.kids[last], size)):
            copy_slot(local, idx, c)
    return jobs


def verify_embedding(t: RootedTree, e: Embedding, ut: Optional[UniversalTree] = None) -> bool:
    """Injective and NCA-preserving over all pairs of nodes of ``t``."""
    if set(e.map) != set(range(t.size)):
        return False
    images = [e.map[u] for u in range(t.size)]
    if len(set(images)) != len(images):
        return False
    total = universal_size(e.target_spec)
    if any(not 0 <= x < total for x in images):
        return False
    if ut is not None:
        target_nca = lambda x, y: nca(ut.tree, x, y)  # noqa: E731
    else:
        paths = {x: ancestor_path(e.target_spec, x) for x in images}

        def target_nca(x: int, y: int) -> int:
            best = None
            for a, b in zip(paths[x], paths[y]):
                if a != b:
                    break
                best = a
            return best  # type: ignore[return-value]

    for u in range(t.size):
        for v in range(u, t.size):
            if e.map[nca(t, u, v)] != target_nca(e.map[u], e.map[v]):
                return False
    return True


def is_subdivision(t: RootedTree, e: Embedding) -> bool:
    """Every edge maps to a descending path; the paths share no inner nodes
    with each other or with the images of nodes."""
    images = set(e.map.values())
    used = set()
    for p in range(t.size):
        for c in t.children[p]:
            path = ancestor_path(e.target_spec, e.map[c])
            if e.map[p] not in path[:-1]:
                return False
            inner = path[path.index(e.map[p]) + 1 : -1]
            for x in inner:
                if x in images or x in used:
                    return False
                used.add(x)
    return True



def preserves_order(t: RootedTree, e: Embedding) -> bool:
    """For ordered inputs: siblings map into distinct child subtrees of their
    parent's image, in the same left-to-right order."""
    for p in range(t.size):
        top = e.map[p]
        positions = []
        for c in t.children[p]:
            path = ancestor_path(e.target_spec, e.map[c])
            positions.append(path[path.index(top) + 1])
        if any(a >= b for a, b in zip(positions, positions[1:])):
            return False
    return True
