"""Command line entry point: ``treecsp generate|core|poly|classify``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import conditions as cond
from .cores import is_core, is_rooted_core
from .digraph import RootedTree, as_tree, canonical_encoding, load_digraph
from .generation import generate_core_triads, generate_core_trees, generate_rooted_cores
from .indicator import AUTO, FULL, LEVELWISE, ResourceLimit, decide, write_witness
from .pipeline import Cascade, default_cascade, parse_sizes, run_campaign, tree_source


def _emit(lines, out: str | None) -> None:
    if out is None:
        for line in lines:
            print(line)
        return
    with open(out, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def cmd_generate(args) -> int:
    if args.rooted:
        if args.depth is None:
            raise SystemExit("--rooted needs --depth")
        rooted = generate_rooted_cores(args.size, args.depth)
        trees, roots = [rt.tree for rt in rooted], [rt.root for rt in rooted]
    elif args.triads:
        trees, roots = list(generate_core_triads(args.size)), None
    else:
        trees, roots = list(generate_core_trees(args.size)), None

    def lines():
        for i, t in enumerate(trees):
            if args.format == "edges":
                if roots is not None:
                    yield f"# root={roots[i]}"
                yield t.to_edge_list().rstrip("\n")
                yield ""
            elif roots is not None:
                yield canonical_encoding(t, roots[i])
            else:
                yield canonical_encoding(t)

    _emit(lines(), args.out)
    return 0


def cmd_core(args) -> int:
    g = load_digraph(args.path)
    if args.rooted is not None:
        ok = is_rooted_core(RootedTree(as_tree(g), args.rooted))
    else:
        ok = is_core(g)
    print("core" if ok else "not-core")
    return 0


def cmd_poly(args) -> int:
    h = load_digraph(args.path)
    if args.condition_file:
        c = cond.load_condition_file(args.condition_file)
    elif args.condition:
        c = cond.from_cli_name(args.condition)
    else:
        raise SystemExit("give --condition NAME or --condition-file PATH")
    idempotent = False if args.no_idempotent else None
    try:
        d = decide(h, c, args.mode, idempotent=idempotent, budget=args.steps)
    except ResourceLimit as exc:
        print(f"timeout ({exc})")
        return 3
    print(d.verdict)
    if args.witness and d.witness is not None:
        write_witness(d.witness, args.witness)
    return 0 if d.verdict != "timeout" else 3


def cmd_classify(args) -> int:
    if args.cascade == "default":
        cascade = default_cascade(args.chain_bound, args.steps)
    else:
        with open(args.cascade, encoding="utf-8") as fh:
            cascade = Cascade.from_json(fh.read())
    source = tree_source(parse_sizes(args.sizes), triads=args.triads)
    summary = run_campaign(source, cascade, args.out, jobs=args.jobs, resume=args.resume)
    for line in summary.lines(cascade.columns()):
        print(line)
    return summary.exit_code(args.timeout_fraction)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treecsp", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="list core trees, triads or rooted cores")
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--triads", action="store_true")
    g.add_argument("--rooted", action="store_true")
    g.add_argument("--depth", type=int)
    g.add_argument("--format", choices=("canonical", "edges"), default="canonical")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("core", help="core test for an edge-list file or canonical string")
    c.add_argument("path")
    c.add_argument("--rooted", type=int, metavar="R", help="test as a rooted core with root R")
    c.set_defaults(func=cmd_core)

    q = sub.add_parser("poly", help="decide a polymorphism condition")
    q.add_argument("path")
    q.add_argument("--condition")
    q.add_argument("--condition-file")
    q.add_argument("--mode", choices=(FULL, LEVELWISE, AUTO), default=AUTO)
    q.add_argument("--no-idempotent", action="store_true")
    q.add_argument("--witness")
    q.add_argument("--steps", type=int, metavar="BUDGET")
    q.set_defaults(func=cmd_poly)

    k = sub.add_parser("classify", help="run a cascade over all core trees of the given sizes")
    k.add_argument("--sizes", required=True, metavar="A..B")
    k.add_argument("--triads", action="store_true")
    k.add_argument("--cascade", default="default")
    k.add_argument("--chain-bound", type=int, default=32)
    k.add_argument("--steps", type=int, metavar="BUDGET")
    k.add_argument("--jobs", type=int, default=1)
    k.add_argument("--resume", action="store_true")
    k.add_argument("--timeout-fraction", type=float, default=0.5)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_classify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
