"""NCA labels that decode with a bounded number of primitive operations.

Each recursion step works on a current subtree of size ``n``. Nodes whose
subtree holds at least ``n / b`` nodes are big; the big nodes form a top
subtree whose leaves, branching nodes and a few designated children are
interesting. Every other big node sits on the chain hanging below its nearest
interesting ancestor. A label records, per step:

1. the label of the nearest interesting ancestor in the contracted tree,
2. the position of the nearest big ancestor on that chain (alphabetical code),
3. the rank of the small subtree containing the node,

and then recurses into that small subtree. Labels of the contracted trees are
weighted labels of one general universal tree shared by the whole encoding,
so that a single lookup table answers every contracted-tree NCA query.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..codes import BitString, alphabetical_code, elias_gamma, elias_gamma_decode, weighted_labels
from ..embed import embed
from ..treecore import RootedTree, canonical_form, nca
from ..universal import GENERAL, UniversalSpec, build_universal, universal_size
from .intset import (
    IntSetEncoding,
    intset_encode,
    intset_extract,
    intset_first_difference,
    intset_successor_rank,
    intset_truncate,
)

__all__ = [
    "CONTRACTED_EXPONENT",
    "MEASURED_A",
    "FastSchemeError",
    "Decomposition",
    "decompose",
    "SharedBlock",
    "FastLabel",
    "FastEncoding",
    "OpCounter",
    "encode_fast",
    "decode_fast",
    "default_b",
    "step_budget_check",
    "StepReport",
]

# size exponent of the general universal tree holding the contracted trees
CONTRACTED_EXPONENT = 2.318
# largest |T^c| / b seen for b in 2..8 over random, path, star and complete
# binary trees (see measure_a)
MEASURED_A = 4.0

# lookup tables with at most this many label pairs are filled eagerly
EAGER_TABLE_PAIRS = 1 << 16


class FastSchemeError(ValueError):
    pass


# decomposition


@dataclass(frozen=True)
class Decomposition:
    root: int
    n: int
    b: int
    big_nodes: frozenset
    skeleton: Dict[int, Tuple[int, ...]]  # big node -> big children
    interesting: Tuple[int, ...]  # preorder
    chains: Dict[int, Tuple[int, ...]]  # interesting node -> chain, top first
    weight: Dict[int, int]  # big node -> total size of its small subtrees
    small_children: Dict[int, Tuple[int, ...]]  # big node -> small kids, ranked
    virtual_children: Dict[int, int]
    contracted: RootedTree  # interesting nodes in preorder, then virtual nodes
    contracted_index: Dict[int, int]

    @property
    def contracted_size(self) -> int:
        return self.contracted.size


def _is_big(size: int, n: int, b: int) -> bool:
    return size * b >= n


def decompose(
    t: RootedTree,
    b: int,
    root: Optional[int] = None,
    canon: Optional[Dict[int, str]] = None,
) -> Decomposition:
    """Decomposition of the subtree of ``t`` rooted at ``root``."""
    if not isinstance(b, int) or b < 2:
        raise FastSchemeError(f"b must be an integer >= 2, got {b!r}")
    if t.size == 0:
        raise FastSchemeError("empty tree")
    r = t.root if root is None else root
    sizes, kids = t.sizes, t.children
    n = sizes[r]
    assert _is_big(sizes[r], n, b)

    order: List[int] = []  # big nodes in preorder
    skeleton: Dict[int, Tuple[int, ...]] = {}
    weight: Dict[int, int] = {}
    small: Dict[int, Tuple[int, ...]] = {}
    stack = [r]
    while stack:
        v = stack.pop()
        order.append(v)
        bk = tuple(c for c in kids[v] if _is_big(sizes[c], n, b))
        sk = [c for c in kids[v] if not _is_big(sizes[c], n, b)]
        skeleton[v] = bk
        weight[v] = sum(sizes[c] for c in sk)
        small[v] = _rank_small(t, sk, canon)
        stack.extend(reversed(bk))

    interesting = set()
    for v in order:
        bk = skeleton[v]
        if len(bk) != 1:
            interesting.add(v)
        if len(bk) >= 2:
            interesting.update(bk)
    interesting.add(r)
    if len(skeleton[r]) == 1:
        interesting.add(skeleton[r][0])

    chains: Dict[int, Tuple[int, ...]] = {}
    for u in order:
        if u not in interesting:
            continue
        chain = [u]
        x = u
        while len(skeleton[x]) == 1 and skeleton[x][0] not in interesting:
            x = skeleton[x][0]
            chain.append(x)
        chains[u] = tuple(chain)
    assert sum(len(c) for c in chains.values()) == len(order)

    inter = tuple(v for v in order if v in interesting)
    index = {v: i for i, v in enumerate(inter)}
    virtual = {}
    for u in inter:
        w = sum(weight[v] for v in chains[u])
        virtual[u] = -(-w * b // n)  # ceil(w / (n / b))
    parent = t.parent
    children: List[List[int]] = [[] for _ in inter]
    for u in inter[1:]:
        p = parent[u]
        while p not in interesting:
            p = parent[p]
        children[index[p]].append(index[u])
    for u in inter:
        for _ in range(virtual[u]):
            children[index[u]].append(len(children))
            children.append([])
    contracted = RootedTree(tuple(tuple(c) for c in children))
    return Decomposition(
        root=r,
        n=n,
        b=b,
        big_nodes=frozenset(order),
        skeleton=skeleton,
        interesting=inter,
        chains=chains,
        weight=weight,
        small_children=small,
        virtual_children=virtual,
        contracted=contracted,
        contracted_index=index,
    )


def _rank_small(t: RootedTree, kids: List[int], canon: Optional[Dict[int, str]]) -> Tuple[int, ...]:
    """Small children by size descending; equal sizes by canonical form."""
    if len(kids) <= 1:
        return tuple(kids)
    sizes = t.sizes
    counts: Dict[int, int] = {}
    for c in kids:
        counts[sizes[c]] = counts.get(sizes[c], 0) + 1

    def form(c: int) -> str:
        if counts[sizes[c]] == 1:
            return ""
        if canon is None:
            return canonical_form(t, c)
        if c not in canon:
            canon[c] = canonical_form(t, c)
        return canon[c]

    return tuple(sorted(kids, key=lambda c: (-sizes[c], form(c), c)))


# shared block


class SharedBlock:
    """Parameters and the NCA table shared by all labels of one encoding.

    The table maps a pair of contracted-tree labels to the label of their
    NCA. It is bucketed by the pair of label lengths; inside a bucket the key
    is the pair of label values and the entry is the gamma code of the answer
    with a leading one (so that leading zeros survive).
    """

    def __init__(self, n: int, b: int, m: int, s_max: int, M: int):
        self.n, self.b, self.m, self.s_max, self.M = n, b, m, s_max, M
        self.spec = UniversalSpec(GENERAL, m)
        ut = build_universal(self.spec)
        self.universe = ut.tree
        self.labels: Dict[int, BitString] = weighted_labels(ut.tree)
        self.node_of: Dict[BitString, int] = {x: u for u, x in self.labels.items()}
        self.buckets: Dict[Tuple[int, int], Dict[Tuple[int, int], str]] = {}
        if ut.size * ut.size <= EAGER_TABLE_PAIRS:
            for x in self.labels.values():
                for y in self.labels.values():
                    self.lookup(x, y)

    @property
    def content_hash(self) -> str:
        payload = json.dumps(self.params(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()

    def params(self) -> Dict[str, int]:
        return {"n": self.n, "b": self.b, "m": self.m, "s_max": self.s_max, "M": self.M}

    @classmethod
    def from_params(cls, params: Dict[str, int]) -> "SharedBlock":
        return cls(params["n"], params["b"], params["m"], params["s_max"], params["M"])

    def lookup(self, x: BitString, y: BitString) -> BitString:
        bucket = self.buckets.setdefault((len(x), len(y)), {})
        key = (int(x, 2), int(y, 2))
        entry = bucket.get(key)
        if entry is None:
            try:
                u, v = self.node_of[x], self.node_of[y]
            except KeyError as exc:
                raise FastSchemeError(f"not a contracted-tree label: {exc.args[0]!r}") from None
            entry = bucket[key] = elias_gamma(int("1" + self.labels[nca(self.universe, u, v)], 2))
        return bin(elias_gamma_decode(entry, 0)[0])[3:]

    def table_entries(self) -> int:
        return sum(len(bk) for bk in self.buckets.values())

    def table_bits(self) -> int:
        """Size of the fully tabulated table: every bucket stores an entry
        slot for each of its ``2^(|x| + |y|)`` keys."""
        lengths: Dict[int, int] = {}
        for x in self.labels.values():
            lengths[len(x)] = lengths.get(len(x), 0) + 1
        longest = max(len(elias_gamma(int("1" + x, 2))) for x in self.labels.values())
        return sum((1 << (lx + ly)) * longest for lx in lengths for ly in lengths)


# labels


@dataclass(frozen=True)
class FastLabel:
    fields_concat: BitString
    boundaries: IntSetEncoding
    shared: SharedBlock = field(compare=False, repr=False)

    @property
    def field_count(self) -> int:
        return len(self.boundaries) + 1

    @property
    def bit_length(self) -> int:
        return len(self.fields_concat) + len(self.boundaries.bits)

    def fields(self) -> List[BitString]:
        cuts = [0, *self.boundaries.values(), len(self.fields_concat)]
        return [self.fields_concat[a:b] for a, b in zip(cuts, cuts[1:])]

    def key(self) -> Tuple[str, str]:
        return self.fields_concat, self.boundaries.bits

    def to_text(self) -> str:
        return f"{self.fields_concat}:{self.boundaries.bits}"

    @classmethod
    def from_text(cls, text: str, shared: SharedBlock) -> "FastLabel":
        try:
            concat, bits = text.strip().split(":")
        except ValueError:
            raise FastSchemeError(f"malformed fast label {text!r}") from None
        if any(ch not in "01" for ch in concat + bits):
            raise FastSchemeError(f"malformed fast label {text!r}")
        return cls(concat, IntSetEncoding(bits, shared.s_max, shared.M), shared)

    def to_bytes(self) -> bytes:
        """Length-prefixed sections, bits packed most significant first."""
        out = bytearray()
        for section in (self.fields_concat, self.boundaries.bits):
            out += len(section).to_bytes(4, "big")
            if section:
                out += int(section, 2).to_bytes((len(section) + 7) // 8, "big")
        out += bytes.fromhex(self.shared.content_hash)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, shared: SharedBlock) -> "FastLabel":
        pos = 0
        sections = []
        for _ in range(2):
            length = int.from_bytes(data[pos : pos + 4], "big")
            pos += 4
            nbytes = (length + 7) // 8
            value = int.from_bytes(data[pos : pos + nbytes], "big")
            pos += nbytes
            sections.append(format(value, f"0{length}b") if length else "")
        if data[pos:].hex() != shared.content_hash:
            raise FastSchemeError("label belongs to a different shared block")
        return cls(sections[0], IntSetEncoding(sections[1], shared.s_max, shared.M), shared)


@dataclass
class FastEncoding:
    labels: Dict[int, FastLabel]
    shared: SharedBlock
    # per node: sizes of the current trees of its recursion steps
    steps: Dict[int, Tuple[int, ...]]
    contracted_sizes: List[int]

    def __iter__(self) -> Iterator:
        yield self.labels
        yield self.shared

    def node_of(self) -> Dict[Tuple[str, str], int]:
        return {lab.key(): u for u, lab in self.labels.items()}

    @property
    def measured_a(self) -> float:
        return max(self.contracted_sizes) / self.shared.b


def default_b(n: int, a: float = MEASURED_A) -> int:
    if n <= 2:
        return 2
    return max(2, math.ceil(math.log2(n) ** (1 / (4 * CONTRACTED_EXPONENT)) / a))


HEAD_CODE = "1"

Placeholder = Tuple[int, int]  # (contracted tree id, node of it)
Field = object  # BitString or Placeholder


def encode_fast(t: RootedTree, b: Optional[int] = None) -> FastEncoding:
    if t.size == 0:
        raise FastSchemeError("empty tree")
    if b is None:
        b = default_b(t.size)
    if not isinstance(b, int) or b < 2:
        raise FastSchemeError(f"b must be an integer >= 2, got {b!r}")
    canon: Dict[int, str] = {}
    trees: List[RootedTree] = []
    raw: Dict[int, List[Field]] = {}
    steps: Dict[int, Tuple[int, ...]] = {}
    jobs: List[Tuple[int, List[Field], Tuple[int, ...]]] = [(t.root, [], ())]
    while jobs:
        r, prefix, sizes = jobs.pop()
        d = decompose(t, b, r, canon)
        tid = len(trees)
        trees.append(d.contracted)
        sizes = sizes + (d.n,)
        for owner, chain in d.chains.items():
            f1: Placeholder = (tid, d.contracted_index[owner])
            # the head's own small subtrees get "1"; the chain below it gets
            # "0" + an alphabetical code over bottom-up weights, so codes
            # increase towards the top and the head stays recognizable
            below = chain[1:]
            codes = [HEAD_CODE]
            if below:
                codes += ["0" + x for x in alphabetical_code([1 + d.weight[v] for v in reversed(below)])[::-1]]
            for v, code in zip(chain, codes):
                here = prefix + [f1] if v == owner else prefix + [f1, code]
                raw[v] = here
                steps[v] = sizes
                for k, c in enumerate(d.small_children[v], start=1):
                    jobs.append((c, prefix + [f1, code, format(k, "b")], sizes))

    m = max(x.size for x in trees)
    spec = UniversalSpec(GENERAL, m)
    ulabels = weighted_labels(build_universal(spec).tree)
    images: Dict[Tuple[Tuple[int, ...], ...], Dict[int, int]] = {}
    f1_of: List[Dict[int, BitString]] = []
    for x in trees:
        emap = images.get(x.children)
        if emap is None:
            emap = images[x.children] = embed(x, spec).map
        f1_of.append({i: ulabels[emap[i]] for i in emap})

    resolved: Dict[int, List[BitString]] = {}
    for u, fs in raw.items():
        resolved[u] = [f1_of[f[0]][f[1]] if isinstance(f, tuple) else f for f in fs]  # type: ignore[index]
    s_max = max(1, max(len(fs) - 1 for fs in resolved.values()))
    M = max(1, max(sum(len(f) for f in fs) for fs in resolved.values()))
    shared = SharedBlock(t.size, b, m, s_max, M)
    labels = {}
    for u, fs in resolved.items():
        cuts, pos = [], 0
        for f in fs[:-1]:
            pos += len(f)
            cuts.append(pos)
        labels[u] = FastLabel("".join(fs), intset_encode(cuts, s_max, M), shared)
    return FastEncoding(labels, shared, steps, [x.size for x in trees])


# decoding


class OpCounter:
    """Counts primitive operations: set-structure calls, table lookups,
    word comparisons and slices."""

    def __init__(self) -> None:
        self.count = 0

    def tick(self, k: int = 1) -> None:
        self.count += k


def _first_bit_difference(a: str, b: str) -> int:
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    # one word-level xor and a most-significant-bit computation
    x = int(a[:n], 2) ^ int(b[:n], 2)
    return n - x.bit_length()


def _cut(lab: FastLabel, r: int) -> int:
    """Bit position where field ``r`` ends (``r`` may be the last field)."""
    if r == 0:
        return 0
    if r >= lab.field_count:
        return len(lab.fields_concat)
    return intset_extract(lab.boundaries, r)


def _field(lab: FastLabel, i: int) -> BitString:
    return lab.fields_concat[_cut(lab, i - 1) : _cut(lab, i)]


def _truncate(lab: FastLabel, r: int) -> FastLabel:
    """The label made of the first ``r`` fields; a trailing head code is
    dropped, since the chain head's own label ends at its first field."""
    if r % 3 == 2 and r <= lab.field_count and _field(lab, r) == HEAD_CODE:
        r -= 1
    if r >= lab.field_count:
        return lab
    return FastLabel(lab.fields_concat[: _cut(lab, r)], intset_truncate(lab.boundaries, r - 1), lab.shared)


def decode_fast(a: FastLabel, b: FastLabel, counter: Optional[OpCounter] = None) -> FastLabel:
    if a.shared is not b.shared:
        raise FastSchemeError("labels come from different encodings")
    ops = counter if counter is not None else OpCounter()
    ops.tick()
    if a.key() == b.key():
        return a
    sa, sb = a.field_count, b.field_count
    # first differing field: bounded by the first differing bit and by the
    # first differing field boundary, whichever comes first
    ops.tick()
    p = _first_bit_difference(a.fields_concat, b.fields_concat)
    ops.tick()
    j = intset_first_difference(a.boundaries, b.boundaries)
    ops.tick()
    hit = intset_successor_rank(a.boundaries, p + 1)
    i = min(j, sa if hit is None else hit[0])
    if i <= min(sa, sb):
        ops.tick(5)
        if _field(a, i) == _field(b, i):
            # one label extends the other
            i += 1
    kind = (i - 1) % 3 + 1
    ops.tick()
    if kind == 1:
        ops.tick(5)
        x, y = _field(a, i), _field(b, i)
        ops.tick()
        w = a.shared.lookup(x, y)
        ops.tick(3)
        if w == y:
            return _truncate(b, i + 1)
        if w == x:
            return _truncate(a, i + 1)
        start = _cut(a, i - 1)
        return FastLabel(a.fields_concat[:start] + w, intset_truncate(a.boundaries, i - 1), a.shared)
    if kind == 2:
        if i > sa:
            return a
        if i > sb:
            return b
        ops.tick(5)
        x, y = _field(a, i), _field(b, i)
        ops.tick(3)
        return _truncate(a if x > y else b, i)
    ops.tick(3)
    return _truncate(a, i - 1)


# step budget


@dataclass
class StepReport:
    b: int
    a: float
    s: float
    checked: int = 0
    violations: List[Tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def step_budget_check(t: RootedTree, b: int, enc: FastEncoding, c: float = CONTRACTED_EXPONENT) -> StepReport:
    """For every step that recurses into a small subtree, the current tree
    shrinks by at least ``b * 2^max(0, t_i - s)`` where ``t_i`` is the bit
    length of the step's fields and ``s = 4 + c * log2(a * b)``."""
    if t.size == 0:
        return StepReport(b, 0.0, 0.0)
    a = enc.measured_a
    s = 4 + c * math.log2(a * b)
    report = StepReport(b, a, s)
    for u, lab in enc.labels.items():
        fs = lab.fields()
        sizes = enc.steps[u]
        for step in range(len(sizes) - 1):
            spent = sum(len(f) for f in fs[3 * step : 3 * step + 3])
            shrink = sizes[step] / sizes[step + 1]
            need = b * 2 ** max(0.0, spent - s)
            report.checked += 1
            if shrink < need * (1 - 1e-12):
                report.violations.append((u, step + 1, shrink, need))
    return report


def measure_a(trees: Sequence[RootedTree], b: int) -> float:
    return max(encode_fast(x, b).measured_a for x in trees)


def check_table(shared: SharedBlock) -> bool:
    """Every stored table entry agrees with a direct NCA computation."""
    for (lx, ly), bucket in shared.buckets.items():
        for (vx, vy), entry in bucket.items():
            x, y = format(vx, f"0{lx}b"), format(vy, f"0{ly}b")
            want = shared.labels[nca(shared.universe, shared.node_of[x], shared.node_of[y])]
            if bin(elias_gamma_decode(entry, 0)[0])[3:] != want:
                return False
    return True
