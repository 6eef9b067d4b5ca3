"""Command line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on bad usage or
malformed input. Trees are balanced-parentheses words; nodes are numbered by
their preorder position in the word.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import analysis
from .embed import embed, is_subdivision, preserves_order, verify_embedding
from .fastscheme import FastLabel, FastSchemeError, SharedBlock, decode_fast, encode_fast
from .scheme import MalformedLabelError, SchemeInstance, decode_nca, encode, write_labels
from .treecore import (
    RootedTree,
    TreeParseError,
    TreeSizeError,
    enumerate_ordered_binary,
    enumerate_trees,
    parse_tree,
    to_parentheses,
)
from .universal import (
    KINDS,
    ORDERED,
    UniversalSpec,
    build_universal,
    export_sizes,
    import_sizes,
    normalize_kind,
    to_dot,
    universal_size,
)

CACHE_ENV = "NCALABEL_CACHE_DIR"


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


# plumbing


def _kind(text: str) -> str:
    try:
        return normalize_kind(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha(text: str) -> Fraction:
    try:
        a = Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not Fraction(1, 2) < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (1/2, 1)")
    return a


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _b(text: str) -> int:
    v = _positive(text)
    if v < 2:
        raise argparse.ArgumentTypeError("b must be >= 2")
    return v


def _spec(args: argparse.Namespace, n: Optional[int] = None) -> UniversalSpec:
    n = args.n if n is None else n
    if n is None:
        raise UsageError("--n is required")
    return UniversalSpec(args.kind, n, args.alpha)


def _tree(args: argparse.Namespace) -> RootedTree:
    text = args.tree
    if args.tree_file:
        lines = [ln for ln in Path(args.tree_file).read_text().splitlines() if ln.strip()]
        if not lines:
            raise UsageError(f"{args.tree_file} holds no tree")
        text = lines[0]
    if text is None:
        raise UsageError("give a tree with --tree or --tree-file")
    try:
        return parse_tree(text, ordered=getattr(args, "kind", None) == ORDERED)
    except TreeParseError as exc:
        raise UsageError(f"bad tree: {exc}") from None


def _cache_file(spec: UniversalSpec) -> Optional[Path]:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    alpha = str(spec.alpha).replace("/", "_")
    return Path(root) / f"sizes-{spec.kind}-{alpha}.json"


def _load_cache(spec: UniversalSpec) -> None:
    path = _cache_file(spec)
    if path and path.exists():
        try:
            import_sizes(spec.kind, spec.alpha, json.loads(path.read_text()))
        except (ValueError, OSError):
            pass  # a stale or damaged cache is simply recomputed


def _store_cache(spec: UniversalSpec) -> None:
    path = _cache_file(spec)
    if path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(export_sizes(spec.kind, spec.alpha)))


def _emit(args: argparse.Namespace, payload: Any, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


# subcommands


def cmd_size(args: argparse.Namespace) -> int:
    spec = _spec(args)
    _load_cache(spec)
    size = universal_size(spec)
    _store_cache(spec)
    _emit(args, {"kind": spec.kind, "n": spec.n, "alpha": str(spec.alpha), "size": size}, str(size))
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    spec = _spec(args)
    if universal_size(spec) > args.max_nodes:
        raise UsageError(f"universal tree has {universal_size(spec)} nodes, above --max-nodes {args.max_nodes}")
    ut = build_universal(spec)
    if ut.size == 0:
        text = ""
    elif args.format == "dot":
        text = to_dot(ut).rstrip("\n")
    else:
        text = to_parentheses(ut.tree)
    _emit(args, {"kind": spec.kind, "n": spec.n, "size": ut.size, "tree": to_parentheses(ut.tree) if ut.size else ""}, text)
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    t = _tree(args)
    spec = _spec(args, t.size if args.n is None else args.n)
    try:
        e = embed(t, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = verify_embedding(t, e) and is_subdivision(t, e)
    if spec.kind == ORDERED:
        ok = ok and preserves_order(t, e)
    _emit(args, {"map": {str(u): x for u, x in e.map.items()}, "verified": ok}, e.serialize().rstrip("\n"))
    if not ok:
        raise VerificationFailed("embedding failed verification")
    return 0


def cmd_label(args: argparse.Namespace) -> int:
    t = _tree(args)
    spec = _spec(args, t.size if args.n is None else args.n)
    try:
        labels = encode(t, SchemeInstance(spec))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        with open(args.out, "w") as fh:
            write_labels(labels, fh)
    text = "\n".join(f"{u}: {labels[u]}" for u in sorted(labels))
    _emit(args, {"kind": spec.kind, "n": spec.n, "labels": {str(u): x for u, x in labels.items()}}, text)
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    spec = _spec(args)
    try:
        answer = decode_nca(args.a, args.b_label, SchemeInstance(spec))
    except MalformedLabelError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, {"nca": answer}, answer)
    return 0


def cmd_fastlabel(args: argparse.Namespace) -> int:
    t = _tree(args)
    enc = encode_fast(t, args.b)
    shared = enc.shared
    sidecar = {**shared.params(), "hash": shared.content_hash}
    if args.shared:
        Path(args.shared).write_text(json.dumps(sidecar, sort_keys=True) + "\n")
    if args.out:
        with open(args.out, "w") as fh:
            for u in sorted(enc.labels):
                fh.write(f"{u}: {enc.labels[u].to_text()}\n")
    text = "\n".join(f"{u}: {enc.labels[u].to_text()}" for u in sorted(enc.labels))
    payload = {"shared": sidecar, "labels": {str(u): lab.to_text() for u, lab in enc.labels.items()}}
    _emit(args, payload, text)
    return 0


def cmd_fastquery(args: argparse.Namespace) -> int:
    try:
        params = json.loads(Path(args.shared).read_text())
        shared = SharedBlock.from_params(params)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read shared block: {exc}") from None
    if params.get("hash") not in (None, shared.content_hash):
        raise UsageError("shared block hash does not match its parameters")
    try:
        a = FastLabel.from_text(args.a, shared)
        b = FastLabel.from_text(args.b_label, shared)
        answer = decode_fast(a, b).to_text()
    except (FastSchemeError, ValueError, IndexError) as exc:
        raise UsageError(f"malformed label: {exc}") from None
    _emit(args, {"nca": answer}, answer)
    return 0


def _corpus(kind: str, n: int):
    if kind == ORDERED:
        return enumerate_ordered_binary(n)
    return enumerate_trees(n, max_degree=2 if kind == "binary" else None)


def cmd_check_universal(args: argparse.Namespace) -> int:
    failures, checked = [], 0
    for n in range(1, args.max_n + 1):
        spec = UniversalSpec(args.kind, n, args.alpha)
        ut = build_universal(spec)
        for t in _corpus(spec.kind, n):
            e = embed(t, spec)
            ok = verify_embedding(t, e, ut) and is_subdivision(t, e)
            if spec.kind == ORDERED:
                ok = ok and preserves_order(t, e)
            checked += 1
            if not ok:
                failures.append(to_parentheses(t))
    _emit(
        args,
        {"kind": normalize_kind(args.kind), "max_n": args.max_n, "checked": checked, "failures": failures},
        f"checked {checked} trees, {len(failures)} failures",
    )
    if failures:
        raise VerificationFailed(f"{len(failures)} trees failed to embed")
    return 0


def cmd_verify_constants(args: argparse.Namespace) -> int:
    rows: List[Dict[str, Any]] = []
    for c, bound, label in ((1.728, 2.0, "zeta(1.728) > 2"), (2.185, 1.5, "zeta(2.185) > 1.5")):
        z = analysis.certify_zeta(c, args.terms)
        rows.append({"check": label, "lo": z.lo, "hi": z.hi, "pass": z.lo > bound})
    s = analysis.certify_double_sum(2.174, 1000)
    rows.append({"check": "double sum (xy+1)^-2.174 over [1,1000]^2 > 1", "lo": s.lo, "hi": s.hi, "pass": s.lo > 1})
    for kind, c, alpha in analysis.PUBLISHED_CONSTANTS:
        r = analysis.check_inequality(kind, c, alpha, args.terms)
        rows.append({"check": f"size inequality {kind} c={c} alpha={alpha}", "margin": r.margin, "pass": r.holds})
    ok = all(r["pass"] for r in rows)
    if args.json:
        print(json.dumps({"checks": rows, "pass": ok}, sort_keys=True))
    else:
        for r in rows:
            detail = f"margin {r['margin']:.3e}" if "margin" in r else f"[{r['lo']:.12f}, {r['hi']:.12f}]"
            print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['check']}  {detail}")
    if not ok:
        raise VerificationFailed("a constant failed certification")
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    fast = [int(x) for x in args.fast_sizes.split(",")] if args.fast_sizes else []
    records = analysis.measure(args.kind, range(1, args.n_max + 1), args.samples, args.seed, fast, args.b)
    if args.json:
        for r in records:
            print(json.dumps(r, sort_keys=True))
        return 0
    for r in records:
        if r["record"] == "size_summary":
            print(f"{r['kind']}: max size / n^{r['c']} = {r['max_ratio']:.4f}, violations {r['violations']}")
        elif r["record"] == "fast":
            print(
                f"fast n={r['n']} b={r['b']} max_bits={r['max_bits']} mean_bits={r['mean_bits']:.1f} "
                f"with_table_share={r['max_bits_with_table_share']:.1f} max_ops={r['max_ops']}"
            )
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    if args.ordered:
        trees = enumerate_ordered_binary(args.n)
    else:
        trees = enumerate_trees(args.n, args.max_degree)
    words = [to_parentheses(t) for t in trees]
    _emit(args, {"n": args.n, "trees": words}, "\n".join(words))
    return 0


def cmd_gadgets(args: argparse.Namespace) -> int:
    if args.level:
        try:
            t = parse_tree(args.level)
        except TreeParseError as exc:
            raise UsageError(f"bad tree: {exc}") from None
        try:
            report = analysis.level_properties_check(t, args.d, args.parity, args.cap)
        except TreeSizeError as exc:
            raise UsageError(str(exc)) from None
        levels = [report.levels[v] for v in range(t.size)]
        _emit(
            args,
            {"levels": levels, "violations": report.violations},
            " ".join(map(str, levels)) + ("" if report.ok else f"\nviolations: {report.violations}"),
        )
        if not report.ok:
            raise VerificationFailed("level properties violated")
        return 0
    cat = analysis.make_caterpillar(args.s, args.d)
    word = to_parentheses(cat.tree)
    _emit(args, {"s": cat.s, "d": cat.d, "leaves": cat.leaves, "tree": word}, word)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--kind", type=_kind, default="binary", help=f"one of {', '.join(KINDS)}")
    common.add_argument("--n", type=_count)
    common.add_argument("--alpha", type=_alpha)
    common.add_argument("--b", type=_b, help="fast scheme parameter (default from n)")

    tree_args = argparse.ArgumentParser(add_help=False)
    tree_args.add_argument("--tree", help="balanced-parentheses word")
    tree_args.add_argument("--tree-file", help="file whose first line is a tree")

    p = argparse.ArgumentParser(prog="ncalabel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("size", parents=[common], help="size of a universal tree")
    s.set_defaults(func=cmd_size)

    s = sub.add_parser("build", parents=[common], help="print a universal tree")
    s.add_argument("--format", choices=["parens", "dot"], default="parens")
    s.add_argument("--max-nodes", type=int, default=1 << 20)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("embed", parents=[common, tree_args], help="embed a tree into a universal tree")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("label", parents=[common, tree_args], help="labels of the simple scheme")
    s.add_argument("--out", help="write 'node: label' lines to this file")
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("query", parents=[common], help="decode two simple-scheme labels")
    s.add_argument("a")
    s.add_argument("b_label", metavar="b")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("fastlabel", parents=[common, tree_args], help="labels of the fast scheme")
    s.add_argument("--out", help="write 'node: label' lines to this file")
    s.add_argument("--shared", help="write the shared-block sidecar (JSON) here")
    s.set_defaults(func=cmd_fastlabel)

    s = sub.add_parser("fastquery", parents=[common], help="decode two fast-scheme labels")
    s.add_argument("--shared", required=True, help="shared-block sidecar from fastlabel")
    s.add_argument("a")
    s.add_argument("b_label", metavar="b")
    s.set_defaults(func=cmd_fastquery)

    s = sub.add_parser("check-universal", parents=[common], help="exhaustive universality check")
    s.add_argument("--max-n", type=_positive, default=7)
    s.set_defaults(func=cmd_check_universal)

    s = sub.add_parser("verify-constants", parents=[common], help="certify the numeric constants")
    s.add_argument("--terms", type=_positive, default=10 ** 6)
    s.set_defaults(func=cmd_verify_constants)

    s = sub.add_parser("measure", parents=[common], help="size and label-length report")
    s.add_argument("--n-max", type=_positive, default=2000)
    s.add_argument("--samples", type=_positive, default=3)
    s.add_argument("--fast-sizes", default="", help="comma-separated tree sizes for the fast scheme")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("enumerate", parents=[common], help="list all trees on n nodes")
    s.add_argument("--max-degree", type=_positive)
    s.add_argument("--ordered", action="store_true", help="ordered binary trees")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("gadgets", parents=[common], help="caterpillars and caterpillar levels")
    s.add_argument("--s", type=_positive, default=3)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--level", help="print levels of every node of this tree")
    s.add_argument("--parity", type=int, choices=[0, 1])
    s.add_argument("--cap", type=_positive, default=60)
    s.set_defaults(func=cmd_gadgets)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    random.seed(args.seed)
    if args.command == "enumerate" and args.n is None:
        print("error: --n is required", file=sys.stderr)
        return 2
    if args.command == "gadgets" and args.d < 2:
        print("error: --d must be >= 2", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
