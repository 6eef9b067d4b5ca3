"""Canonical encoding of a small set of integers from ``[1, M]``.

Layout (all parts concatenated)::

    gamma(block) gamma(count + 1) residues ybits

``block = max(1, M // s_max)``; each element ``x`` contributes ``x % block`` in
a fixed number of bits to ``residues`` and a run ``0^(y_i - y_{i-1}) 1`` to
``ybits`` where ``y_i = x // block``. The encoding is a function of the set,
``s_max`` and ``M`` only, and a prefix of the set is a prefix of each part, so
truncation is slicing.

Scans over ``ybits`` stand in for constant-time select/rank on a machine word;
decoders count each operation once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

from ..codes import elias_gamma, elias_gamma_decode, to_bits

__all__ = [
    "IntSetEncoding",
    "intset_encode",
    "intset_extract",
    "intset_successor",
    "intset_successor_rank",
    "intset_truncate",
    "intset_first_difference",
]


def _block(s_max: int, M: int) -> int:
    return max(1, M // max(1, s_max))


def _width(block: int) -> int:
    return max(1, (block - 1).bit_length())


@dataclass(frozen=True)
class IntSetEncoding:
    bits: str
    s_max: int
    M: int

    @cached_property
    def _header(self) -> Tuple[int, int, int, int, int]:
        block, used = elias_gamma_decode(self.bits, 0)
        count1, used2 = elias_gamma_decode(self.bits, used)
        width = _width(block)
        res_start = used + used2
        y_start = res_start + (count1 - 1) * width
        return block, count1 - 1, width, res_start, y_start

    @property
    def block(self) -> int:
        return self._header[0]

    def __len__(self) -> int:
        return self._header[1]

    @property
    def residues(self) -> str:
        _, count, width, rs, ys = self._header
        return self.bits[rs:ys]

    @property
    def ybits(self) -> str:
        return self.bits[self._header[4]:]

    def values(self) -> Tuple[int, ...]:
        return tuple(intset_extract(self, k) for k in range(1, len(self) + 1))


def intset_encode(xs: Sequence[int], s_max: int, M: int) -> IntSetEncoding:
    xs = list(xs)
    if len(xs) > s_max:
        raise ValueError(f"{len(xs)} elements exceed capacity {s_max}")
    if any(not 1 <= x <= M for x in xs):
        raise ValueError(f"elements must lie in [1, {M}]")
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise ValueError("elements must be strictly increasing")
    block = _block(s_max, M)
    width = _width(block)
    parts = [elias_gamma(block), elias_gamma(len(xs) + 1)]
    parts.extend(to_bits(x % block, width) for x in xs)
    prev = 0
    for x in xs:
        y = x // block
        parts.append("0" * (y - prev) + "1")
        prev = y
    return IntSetEncoding("".join(parts), s_max, M)


def _select1(bits: str, k: int) -> int:
    """Position of the k-th (1-based) one."""
    pos = -1
    for _ in range(k):
        pos = bits.index("1", pos + 1)
    return pos


def _select0(bits: str, k: int) -> int:
    """Position of the k-th (1-based) zero, or -1 if there are fewer zeros."""
    pos = -1
    for _ in range(k):
        pos = bits.find("0", pos + 1)
        if pos < 0:
            return -1
    return pos


def intset_extract(e: IntSetEncoding, k: int) -> int:
    block, count, width, rs, ys = e._header
    if not 1 <= k <= count:
        raise IndexError(f"rank {k} outside 1..{count}")
    residue = int(e.bits[rs + (k - 1) * width : rs + k * width], 2)
    y = _select1(e.bits[ys:], k) - (k - 1)
    return y * block + residue


def intset_successor_rank(e: IntSetEncoding, x: int) -> Optional[Tuple[int, int]]:
    """(rank, value) of the smallest element >= x, or None."""
    block, count, width, rs, ys = e._header
    if count == 0:
        return None
    x = max(x, 0)
    y, r = divmod(x, block)
    ybits = e.bits[ys:]
    # elements with y_i < y occupy ranks 1..lo
    if y == 0:
        lo = 0
    else:
        p = _select0(ybits, y)
        if p < 0:
            return None
        lo = p + 1 - y
    p = _select0(ybits, y + 1)
    hi = count if p < 0 else p + 1 - (y + 1)
    for k in range(lo + 1, hi + 1):
        if int(e.bits[rs + (k - 1) * width : rs + k * width], 2) >= r:
            return k, y * block + int(e.bits[rs + (k - 1) * width : rs + k * width], 2)
    if hi < count:
        return hi + 1, intset_extract(e, hi + 1)
    return None


def intset_successor(e: IntSetEncoding, x: int) -> Optional[int]:
    hit = intset_successor_rank(e, x)
    return None if hit is None else hit[1]


def intset_truncate(e: IntSetEncoding, k: int) -> IntSetEncoding:
    """Encoding of the ``k`` smallest elements, obtained by slicing."""
    block, count, width, rs, ys = e._header
    if not 0 <= k <= count:
        raise IndexError(f"cannot keep {k} of {count} elements")
    ybits = e.bits[ys:]
    ycut = _select1(ybits, k) + 1 if k else 0
    bits = elias_gamma(block) + elias_gamma(k + 1) + e.bits[rs : rs + k * width] + ybits[:ycut]
    return IntSetEncoding(bits, e.s_max, e.M)


def _first_mismatch(a: str, b: str) -> int:
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if a[:mid + 1] == b[:mid + 1]:
            lo = mid + 1
        else:
            hi = mid
    return lo


def intset_first_difference(a: IntSetEncoding, b: IntSetEncoding) -> int:
    """1-based rank of the first element where the sorted sets differ;
    ``min(|a|, |b|) + 1`` when one is a prefix of the other."""
    if (a.s_max, a.M) != (b.s_max, b.M):
        raise ValueError("encodings use different parameters")
    _, ca, width, _, _ = a._header
    _, cb, _, _, _ = b._header
    common = min(ca, cb)
    by_residue = _first_mismatch(a.residues, b.residues) // width
    ya, yb = a.ybits, b.ybits
    by_y = ya[: _first_mismatch(ya, yb)].count("1")
    return min(by_residue, by_y, common) + 1
