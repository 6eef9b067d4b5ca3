"""Heavy-path and alpha-heavy-path decompositions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .treecore import RootedTree

Real = Union[float, int, Fraction, str]

__all__ = [
    "AlphaHeavyPath",
    "exact_alpha",
    "top_alpha_heavy_path",
    "alpha_heavy_decomposition",
    "heavy_path_decomposition",
]


def exact_alpha(alpha: Real) -> Fraction:
    """Decimal value of ``alpha`` as an exact fraction (0.704 -> 704/1000),
    so thresholds and floors never depend on binary rounding."""
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, float):
        return Fraction(repr(alpha))
    return Fraction(alpha)


def _check_alpha(alpha: Real) -> Fraction:
    a = exact_alpha(alpha)
    if not Fraction(1, 2) < a < 1:
        raise ValueError(f"alpha must lie in (1/2, 1), got {alpha}")
    return a


@dataclass(frozen=True)
class AlphaHeavyPath:
    path: Tuple[int, ...]
    alpha: Fraction

    @property
    def head(self) -> int:
        return self.path[0]

    @property
    def tail(self) -> int:
        return self.path[-1]


def top_alpha_heavy_path(t: RootedTree, alpha: Real, root: Optional[int] = None) -> AlphaHeavyPath:
    """Descend from ``root`` into the child whose subtree holds at least
    ``alpha * |T^root|`` nodes for as long as one exists."""
    a = _check_alpha(alpha)
    if t.size == 0:
        raise ValueError("empty tree")
    u = t.root if root is None else root
    sizes = t.sizes
    threshold = a * sizes[u]
    path = [u]
    while True:
        heavy = [v for v in t.children[u] if sizes[v] >= threshold]
        assert len(heavy) <= 1, "two children above an alpha > 1/2 threshold"
        if not heavy:
            break
        u = heavy[0]
        path.append(u)
    return AlphaHeavyPath(tuple(path), a)


def alpha_heavy_decomposition(t: RootedTree, alpha: Real) -> List[AlphaHeavyPath]:
    """Top path of the whole tree, then recursively of every hanging subtree."""
    _check_alpha(alpha)
    if t.size == 0:
        return []
    out = []
    stack = [t.root]
    while stack:
        r = stack.pop()
        p = top_alpha_heavy_path(t, alpha, r)
        out.append(p)
        on_path = set(p.path)
        for v in p.path:
            stack.extend(c for c in t.children[v] if c not in on_path)
    return out


def heavy_path_decomposition(t: RootedTree) -> List[Tuple[int, ...]]:
    """Classic decomposition: follow the largest child (ties: smaller index)."""
    if t.size == 0:
        return []
    sizes = t.sizes
    out = []
    stack = [t.root]
    while stack:
        u = stack.pop()
        path = [u]
        while t.children[path[-1]]:
            kids = t.children[path[-1]]
            heavy = min(kids, key=lambda v: (-sizes[v], v))
            stack.extend(c for c in kids if c != heavy)
            path.append(heavy)
        out.append(tuple(path))
    return out
