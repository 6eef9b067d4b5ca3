"""Rooted trees: representation, text format, canonical forms, enumeration and
brute-force oracles (NCA, topological minor search).

Trees are immutable. Node indexes run over ``0..size-1``; trees produced by
:func:`parse_tree` and the generators here are numbered in preorder.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

__all__ = [
    "RootedTree",
    "TreeParseError",
    "TreeSizeError",
    "parse_tree",
    "serialize_tree",
    "to_parentheses",
    "canonical_form",
    "isomorphic",
    "nca",
    "subtree_sizes",
    "enumerate_trees",
    "enumerate_ordered_binary",
    "random_tree",
    "is_topological_minor",
    "leaf_degree_identity",
    "single_node",
    "path_tree",
    "star_tree",
    "complete_binary_tree",
]


class TreeParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class TreeSizeError(ValueError):
    """Raised when an exhaustive oracle is asked to search a tree above its cap."""


@dataclass(frozen=True)
class RootedTree:
    """A rooted tree stored as per-node child tuples.

    ``ordered`` says whether the order of children is significant. An empty
    tree has ``children == ()``.
    """

    children: Tuple[Tuple[int, ...], ...]
    ordered: bool = False

    def __post_init__(self) -> None:
        n = len(self.children)
        if n == 0:
            return
        parent: List[Optional[int]] = [None] * n
        for u, kids in enumerate(self.children):
            for v in kids:
                if not 0 <= v < n:
                    raise ValueError(f"child index {v} out of range")
                if parent[v] is not None or v == u:
                    raise ValueError(f"node {v} has more than one parent")
                parent[v] = u
        roots = [u for u in range(n) if parent[u] is None]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        object.__setattr__(self, "_parent", tuple(parent))
        object.__setattr__(self, "_root", roots[0])
        # connectivity: every node reachable from the root
        seen = 0
        stack = [roots[0]]
        while stack:
            u = stack.pop()
            seen += 1
            stack.extend(self.children[u])
        if seen != n:
            raise ValueError("tree is not connected")

    # construction helpers

    @classmethod
    def empty(cls, ordered: bool = False) -> "RootedTree":
        return cls((), ordered)

    @classmethod
    def from_parents(cls, parents: Sequence[Optional[int]], ordered: bool = False) -> "RootedTree":
        kids: List[List[int]] = [[] for _ in parents]
        for v, p in enumerate(parents):
            if p is not None:
                kids[p].append(v)
        return cls(tuple(tuple(k) for k in kids), ordered)

    # basic accessors

    @property
    def size(self) -> int:
        return len(self.children)

    def __len__(self) -> int:
        return len(self.children)

    @property
    def root(self) -> int:
        if not self.children:
            raise ValueError("empty tree has no root")
        return self._root  # type: ignore[attr-defined]

    @property
    def parent(self) -> Tuple[Optional[int], ...]:
        if not self.children:
            return ()
        return self._parent  # type: ignore[attr-defined]

    def degree(self, u: int) -> int:
        return len(self.children[u])

    def is_leaf(self, u: int) -> bool:
        return not self.children[u]

    @property
    def max_degree(self) -> int:
        return max((len(k) for k in self.children), default=0)

    @cached_property
    def preorder(self) -> Tuple[int, ...]:
        if not self.children:
            return ()
        out = []
        stack = [self.root]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(reversed(self.children[u]))
        return tuple(out)

    @cached_property
    def depth(self) -> Tuple[int, ...]:
        d = [0] * self.size
        for u in self.preorder:
            for v in self.children[u]:
                d[v] = d[u] + 1
        return tuple(d)

    @cached_property
    def sizes(self) -> Tuple[int, ...]:
        s = [1] * self.size
        for u in reversed(self.preorder):
            p = self.parent[u]
            if p is not None:
                s[p] += s[u]
        return tuple(s)

    @cached_property
    def _intervals(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        pos = [0] * self.size
        for i, u in enumerate(self.preorder):
            pos[u] = i
        return tuple(pos), self.sizes

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when ``a`` is an ancestor of ``b`` (every node is its own ancestor)."""
        pos, sz = self._intervals
        return pos[a] <= pos[b] < pos[a] + sz[a]

    def check_node(self, u: int) -> None:
        if not isinstance(u, int) or not 0 <= u < self.size:
            raise IndexError(f"node {u!r} not in tree of size {self.size}")

    def leaves(self) -> List[int]:
        return [u for u in range(self.size) if not self.children[u]]

    def subtree(self, u: int) -> "RootedTree":
        """Copy of the subtree rooted at ``u``, renumbered in preorder."""
        order = []
        stack = [u]
        while stack:
            x = stack.pop()
            order.append(x)
            stack.extend(reversed(self.children[x]))
        index = {x: i for i, x in enumerate(order)}
        return RootedTree(
            tuple(tuple(index[c] for c in self.children[x]) for x in order), self.ordered
        )

    def relabel_preorder(self) -> "RootedTree":
        if not self.children:
            return self
        return self.subtree(self.root)

    def with_ordered(self, ordered: bool) -> "RootedTree":
        return RootedTree(self.children, ordered)


def single_node(ordered: bool = False) -> RootedTree:
    return RootedTree(((),), ordered)


def path_tree(n: int) -> RootedTree:
    return RootedTree(tuple((i + 1,) if i + 1 < n else () for i in range(n)))


def star_tree(leaves: int) -> RootedTree:
    return RootedTree((tuple(range(1, leaves + 1)),) + ((),) * leaves)


def complete_binary_tree(height: int) -> RootedTree:
    n = (1 << (height + 1)) - 1
    return RootedTree(
        tuple((2 * i + 1, 2 * i + 2) if 2 * i + 2 < n else () for i in range(n))
    ).relabel_preorder()


# text format


def parse_tree(text: str, ordered: bool = False) -> RootedTree:
    """Parse a balanced-parentheses word; the outer pair is the root."""
    text = text.strip()
    if not text:
        raise TreeParseError("empty input", 0)
    parents: List[Optional[int]] = []
    stack: List[int] = []
    for i, ch in enumerate(text):
        if ch == "(":
            if not stack and parents:
                raise TreeParseError("more than one root", i)
            parents.append(stack[-1] if stack else None)
            stack.append(len(parents) - 1)
        elif ch == ")":
            if not stack:
                raise TreeParseError("unmatched ')'", i)
            stack.pop()
        else:
            raise TreeParseError(f"unexpected character {ch!r}", i)
    if stack:
        raise TreeParseError("unclosed '('", len(text))
    return RootedTree.from_parents(parents, ordered)


def canonical_form(t: RootedTree, u: Optional[int] = None) -> str:
    """AHU certificate of the subtree at ``u``: child strings sorted, unless
    the tree is ordered, in which case the child order is kept."""
    if t.size == 0:
        return ""
    if u is None:
        u = t.root
    memo: Dict[int, str] = {}
    order = []
    stack = [u]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(t.children[x])
    for x in reversed(order):
        parts = [memo.pop(c) for c in t.children[x]]
        if not t.ordered:
            parts.sort()
        memo[x] = "(" + "".join(parts) + ")"
    return memo[u]


def to_parentheses(t: RootedTree) -> str:
    """Balanced parentheses in the stored child order; parsing the result
    numbers nodes by their preorder position."""
    if t.size == 0:
        raise ValueError("cannot serialize the empty tree")
    out = []
    stack: List[object] = [t.root]
    while stack:
        x = stack.pop()
        if x == ")":
            out.append(")")
            continue
        out.append("(")
        stack.append(")")
        stack.extend(reversed(t.children[x]))  # type: ignore[index]
    return "".join(out)


def serialize_tree(t: RootedTree) -> str:
    if t.size == 0:
        raise ValueError("cannot serialize the empty tree")
    return canonical_form(t)


def isomorphic(a: RootedTree, b: RootedTree) -> bool:
    return a.size == b.size and canonical_form(a) == canonical_form(b)


# oracles


def nca(t: RootedTree, u: int, v: int) -> int:
    t.check_node(u)
    t.check_node(v)
    depth, parent = t.depth, t.parent
    while depth[u] > depth[v]:
        u = parent[u]  # type: ignore[assignment]
    while depth[v] > depth[u]:
        v = parent[v]  # type: ignore[assignment]
    while u != v:
        u, v = parent[u], parent[v]  # type: ignore[assignment]
    return u


def subtree_sizes(t: RootedTree) -> Dict[int, int]:
    return dict(enumerate(t.sizes))


def leaf_degree_identity(t: RootedTree) -> bool:
    """#leaves == 1 + sum over nodes of (deg - 1), restricted to deg >= 1."""
    leaves = sum(1 for k in t.children if not k)
    return leaves == 1 + sum(len(k) - 1 for k in t.children if k)


# enumeration


def _unordered_forms(n: int, max_degree: Optional[int], memo: Dict[int, List[str]]) -> List[str]:
    if n in memo:
        return memo[n]
    items: List[Tuple[int, str]] = [(s, f) for s in range(1, n) for f in _unordered_forms(s, max_degree, memo)]
    out: set = set()

    def extend(budget: int, start: int, chosen: List[str]) -> None:
        if budget == 0:
            out.add("(" + "".join(sorted(chosen)) + ")")
            return
        if max_degree is not None and len(chosen) >= max_degree:
            return
        for i in range(start, len(items)):
            s, f = items[i]
            if s > budget:
                continue
            chosen.append(f)
            extend(budget - s, i, chosen)
            chosen.pop()

    extend(n - 1, 0, [])
    memo[n] = sorted(out)
    return memo[n]


def enumerate_trees(n: int, max_degree: Optional[int] = None) -> Iterator[RootedTree]:
    """One representative per isomorphism class of unordered rooted trees on
    ``n`` nodes, optionally with at most ``max_degree`` children per node."""
    if n < 1:
        raise ValueError("n must be >= 1")
    memo: Dict[int, List[str]] = {1: ["()"]}
    for form in _unordered_forms(n, max_degree, memo):
        yield parse_tree(form)


def _ordered_binary_forms(n: int, memo: Dict[int, List[str]]) -> List[str]:
    if n in memo:
        return memo[n]
    out = []
    for f in _ordered_binary_forms(n - 1, memo):
        out.append("(" + f + ")")
    for left in range(1, n - 1):
        for fl in _ordered_binary_forms(left, memo):
            for fr in _ordered_binary_forms(n - 1 - left, memo):
                out.append("(" + fl + fr + ")")
    memo[n] = out
    return out


def enumerate_ordered_binary(n: int) -> Iterator[RootedTree]:
    """All ordered trees on ``n`` nodes with at most two children per node."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for form in _ordered_binary_forms(n, {1: ["()"]}):
        yield parse_tree(form, ordered=True)


def random_tree(
    n: int,
    rng: random.Random,
    max_degree: Optional[int] = None,
    ordered: bool = False,
) -> RootedTree:
    """Random recursive tree (each new node picks a uniformly random parent
    among nodes that still have room), renumbered in preorder."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parents: List[Optional[int]] = [None]
    kids = [0]
    open_nodes = [0]
    for v in range(1, n):
        i = rng.randrange(len(open_nodes))
        p = open_nodes[i]
        parents.append(p)
        kids[p] += 1
        kids.append(0)
        if max_degree is not None and kids[p] >= max_degree:
            open_nodes[i] = open_nodes[-1]
            open_nodes.pop()
        open_nodes.append(v)
    return RootedTree.from_parents(parents, ordered).relabel_preorder()


# topological minor search


def _bipartite_match(options: List[List[int]]) -> Optional[List[int]]:
    """Kuhn's augmenting paths; options[i] lists admissible right vertices."""
    owner: Dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j in options[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    for i in range(len(options)):
        if not augment(i, set()):
            return None
    result = [0] * len(options)
    for j, i in owner.items():
        result[i] = j
    return result


def is_topological_minor(
    small: RootedTree,
    big: RootedTree,
    parity_constraint: Optional[Mapping[int, int]] = None,
    cap: int = 60,
) -> Optional[Dict[int, int]]:
    """Search for an NCA-preserving injective map ``small -> big``.

    With ``parity_constraint`` (node of ``small`` -> 0/1) the constrained nodes
    must land on nodes of ``big`` whose depth has that parity. When both trees
    are ordered the children of every node must map in left-to-right order.
    Returns a witness mapping or ``None``.
    """
    if small.size == 0:
        raise ValueError("small tree must be non-empty")
    if big.size > cap:
        raise TreeSizeError(f"big tree has {big.size} nodes, cap is {cap}")
    if big.size == 0:
        return None
    ordered = small.ordered and big.ordered
    constraint = dict(parity_constraint or {})
    depth = big.depth
    emb_memo: Dict[Tuple[int, int], Optional[List[int]]] = {}
    down_memo: Dict[Tuple[int, int], bool] = {}

    def down(x: int, c: int) -> bool:
        key = (x, c)
        if key not in down_memo:
            down_memo[key] = emb(x, c) is not None or any(down(x, g) for g in big.children[c])
        return down_memo[key]

    def emb(x: int, y: int) -> Optional[List[int]]:
        # returns the child of y chosen for each child of x, or None
        key = (x, y)
        if key in emb_memo:
            return emb_memo[key]
        res: Optional[List[int]] = None
        if x in constraint and depth[y] % 2 != constraint[x]:
            res = None
        else:
            xs, ys = small.children[x], big.children[y]
            if len(xs) <= len(ys) and small.sizes[x] <= big.sizes[y]:
                if ordered:
                    picks: Optional[List[int]] = []
                    j = 0
                    for xc in xs:
                        while j < len(ys) and not down(xc, ys[j]):
                            j += 1
                        if j == len(ys):
                            picks = None
                            break
                        picks.append(ys[j])  # type: ignore[union-attr]
                        j += 1
                    res = picks
                else:
                    options = [[k for k, yc in enumerate(ys) if down(xc, yc)] for xc in xs]
                    match = _bipartite_match(options)
                    res = None if match is None else [ys[k] for k in match]
        emb_memo[key] = res
        return res

    root_target = next((y for y in big.preorder if emb(small.root, y) is not None), None)
    if root_target is None:
        return None
    mapping: Dict[int, int] = {}
    work = [(small.root, root_target)]
    while work:
        x, y = work.pop()
        mapping[x] = y
        picks = emb(x, y)
        assert picks is not None
        for xc, c in zip(small.children[x], picks):
            target = c
            while emb(xc, target) is None:
                target = next(g for g in big.children[target] if down(xc, g))
            work.append((xc, target))
    return mapping
