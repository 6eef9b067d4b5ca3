"""Coding primitives.

Bit strings are plain ``str`` objects over ``"0"``/``"1"``; Python string
comparison is exactly the lexicographic order used throughout (a proper prefix
sorts first).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from .treecore import RootedTree

BitString = str

__all__ = [
    "BitString",
    "CodeError",
    "DominatingSequence",
    "build_dominating_sequence",
    "dominating_multiset",
    "dominate",
    "alphabetical_code",
    "elias_gamma",
    "elias_gamma_decode",
    "weighted_labels",
    "weighted_label_bound",
    "to_bits",
]


class CodeError(ValueError):
    pass


def to_bits(value: int, width: int) -> BitString:
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


@dataclass(frozen=True)
class DominatingSequence:
    entries: Tuple[int, ...]
    N: int

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]


@lru_cache(maxsize=4096)
def _sequence(N: int) -> Tuple[int, ...]:
    if N <= 0:
        return ()
    half = _sequence(N // 2)
    return half + (N,) + half


def build_dominating_sequence(N: int) -> DominatingSequence:
    """``a_N = a_{N//2} + (N,) + a_{N//2}`` with ``a_0`` empty."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return DominatingSequence(_sequence(N), N)


def dominating_multiset(N: int) -> Dict[int, int]:
    """value -> multiplicity of ``a_N`` (``2**i`` copies of ``N >> i``)."""
    out: Dict[int, int] = {}
    i = 0
    while N >> i:
        out[N >> i] = out.get(N >> i, 0) + (1 << i)
        i += 1
    return out


def dominate(b: Sequence[int], N: int) -> List[int]:
    """1-based, strictly increasing indices ``j`` into ``a_N`` with
    ``a[j[i]] >= b[i]``, chosen by leftmost fit."""
    if any(x < 1 for x in b):
        raise ValueError("entries of b must be positive")
    if sum(b) > N:
        raise ValueError(f"sum of b ({sum(b)}) exceeds N={N}")
    a = _sequence(N)
    out = []
    j = 0
    for x in b:
        while j < len(a) and a[j] < x:
            j += 1
        if j == len(a):  # pragma: no cover - cannot happen for a dominated input
            raise AssertionError(f"greedy domination failed for b={list(b)}, N={N}")
        out.append(j + 1)
        j += 1
    return out


def alphabetical_code(b: Sequence[int]) -> List[BitString]:
    """Nonempty, strictly increasing (lexicographically) bit strings with
    ``len(s[i]) <= 1 + log2(sum(b) / b[i])``."""
    if not b:
        raise ValueError("need at least one weight")
    if any(x < 1 for x in b):
        raise ValueError("weights must be positive")
    out: List[BitString] = [""] * len(b)
    prefix = [0]
    for x in b:
        prefix.append(prefix[-1] + x)

    # explicit stack: (lo, hi, code prefix) over b[lo:hi]
    stack = [(0, len(b), "")]
    while stack:
        lo, hi, pre = stack.pop()
        if hi - lo == 1:
            out[lo] = pre + "0"
            continue
        half = (prefix[hi] - prefix[lo]) // 2
        # largest j with sum(b[lo:lo+j]) <= half
        j = 0
        while lo + j + 1 <= hi and prefix[lo + j + 1] - prefix[lo] <= half:
            j += 1
        mid = lo + j
        out[mid] = pre + "1"
        if j:
            stack.append((lo, mid, pre + "0"))
        if mid + 1 < hi:
            stack.append((mid + 1, hi, pre + "1"))
    return out


def elias_gamma(x: int) -> BitString:
    if x < 1:
        raise ValueError("Elias gamma needs x >= 1")
    body = format(x, "b")
    return "0" * (len(body) - 1) + body


def elias_gamma_decode(bits: str, start: int = 0) -> Tuple[int, int]:
    """Decode one gamma code at ``bits[start:]``; returns (value, bits consumed)."""
    zeros = 0
    i = start
    while i < len(bits) and bits[i] == "0":
        zeros += 1
        i += 1
    end = i + zeros + 1
    if i >= len(bits) or end > len(bits):
        raise CodeError(f"truncated Elias gamma code at offset {start}")
    return int(bits[i:end], 2), end - start


def weighted_label_bound(size: int, degree: int) -> int:
    """Largest integer length allowed by ``2 + log2(size / (1 + degree))``."""
    e = 0
    while (1 + degree) << (e + 1) <= size:
        e += 1
    return 2 + e


def weighted_labels(t: RootedTree) -> Dict[int, BitString]:
    """Distinct labels with ``len(label[u]) <= 2 + log2(|t| / (1 + deg(u)))``.

    Every node gets the full allowed length; the lengths satisfy Kraft's
    inequality (the degrees sum to ``|t| - 1``), so the labels are taken from a
    canonical prefix code: nodes sorted by (length, preorder position) receive
    consecutive codewords. The length identifies the class, the codeword value
    within that length the rank inside it.
    """
    n = t.size
    if n == 0:
        return {}
    rank = {u: i for i, u in enumerate(t.preorder)}
    lengths = {u: weighted_label_bound(n, t.degree(u)) for u in range(n)}
    order = sorted(range(n), key=lambda u: (lengths[u], rank[u]))
    labels: Dict[int, BitString] = {}
    code = 0
    prev_len = lengths[order[0]]
    for u in order:
        L = lengths[u]
        code <<= L - prev_len
        prev_len = L
        labels[u] = to_bits(code, L)
        code += 1
    return labels
