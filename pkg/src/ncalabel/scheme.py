"""Fixed-width NCA labels read off a minor-universal tree.

A node's label is the preorder index of its image in the universal tree,
written big-endian in ``ceil(log2 |U|)`` bits (at least one bit).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, TextIO

from .codes import BitString, to_bits
from .embed import embed
from .treecore import RootedTree, nca
from .universal import (
    UniversalSpec,
    UniversalTree,
    build_universal,
    implicit_nca,
    universal_size,
)

__all__ = [
    "MalformedLabelError",
    "SchemeInstance",
    "encode",
    "decode_nca",
    "write_labels",
    "read_labels",
]

# universal trees up to this size are materialized for decoding
MATERIALIZE_LIMIT = 1 << 20


class MalformedLabelError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeInstance:
    spec: UniversalSpec

    @cached_property
    def universe(self) -> int:
        return universal_size(self.spec)

    @property
    def width(self) -> int:
        return max(1, (self.universe - 1).bit_length())

    @cached_property
    def _tree(self) -> Optional[UniversalTree]:
        if self.universe <= MATERIALIZE_LIMIT:
            return build_universal(self.spec)
        return None

    def index_of(self, label: BitString) -> int:
        if len(label) != self.width or any(ch not in "01" for ch in label):
            raise MalformedLabelError(f"expected a {self.width}-bit label, got {label!r}")
        x = int(label, 2)
        if x >= self.universe:
            raise MalformedLabelError(f"label {label} is not a node of a universe of size {self.universe}")
        return x

    def label_of(self, index: int) -> BitString:
        return to_bits(index, self.width)

    def nca_index(self, x: int, y: int) -> int:
        tree = self._tree
        if tree is not None:
            return nca(tree.tree, x, y)
        return implicit_nca(self.spec, x, y)


def encode(t: RootedTree, inst: SchemeInstance) -> Dict[int, BitString]:
    e = embed(t, inst.spec)
    return {u: inst.label_of(x) for u, x in e.map.items()}


def decode_nca(a: BitString, b: BitString, inst: SchemeInstance) -> BitString:
    return inst.label_of(inst.nca_index(inst.index_of(a), inst.index_of(b)))


def write_labels(labels: Dict[int, BitString], out: TextIO) -> None:
    for u in sorted(labels):
        out.write(f"{u}: {labels[u]}\n")


def read_labels(src: TextIO) -> Dict[int, BitString]:
    labels = {}
    for line in src:
        line = line.strip()
        if not line:
            continue
        u, bits = line.split(":")
        labels[int(u)] = bits.strip()
    return labels
