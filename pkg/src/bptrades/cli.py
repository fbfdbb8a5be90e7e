"""Command-line front end.

JSON on standard output by default, human-readable tables with
``--pretty``.  Exit codes: 0 success, 1 verification or construction
failed, 2 usage or input error, 3 search budget exhausted before the
requested work completed (partial JSON is still emitted).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from bptrades.core import gen_bp
from bptrades.dissect import (
    SquareDissection,
    base_dissection,
    dissection_svg,
    dissection_to_trade,
    good_dissection,
    log_trade,
)
from bptrades.family16 import construct as family_construct
from bptrades.matrices import size_bounds
from bptrades.rowperm import RowPermutation, three_row_trade, trade_from_rowperm
from bptrades.search import (
    count_transversals,
    diagonal_histogram,
    enumerate_orthomorphisms,
    min_distance_from_linear,
    rowperm_sizes,
    spectrum,
    spectrum_all,
)
from bptrades.trades import (
    TradePair,
    canonicalize,
    validate_latin_trade,
    validate_orthogonal_trade,
)

__all__ = ["run", "main", "emit_svg"]


def emit_svg(d: SquareDissection, path: str) -> None:
    """Write the deterministic SVG rendering of a dissection."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dissection_svg(d))


def _print_json(obj) -> None:
    print(json.dumps(obj))


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _parse_targets(text: str) -> frozenset:
    # comma-separated integers; "a..b" spans an inclusive range
    out = set()
    for part in text.split(","):
        part = part.strip()
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.update(range(int(lo), int(hi) + 1))
            elif part:
                out.add(int(part))
        except ValueError:
            raise ValueError(f"bad --targets element {part!r}") from None
    return frozenset(out)


def _cli_error(exc: ValueError) -> None:
    # library cap messages suggest force=True; the flag spelling applies here
    print(str(exc).replace("force=True", "--force"), file=sys.stderr)


def _cmd_gen(args) -> int:
    try:
        square = gen_bp(args.p, args.k)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if args.pretty:
        print(square.to_text(), end="")
    else:
        _print_json(
            {
                "p": args.p,
                "k": args.k,
                "rows": [list(square.row(r)) for r in range(square.order)],
            }
        )
    return 0


def _cmd_verify(args) -> int:
    try:
        text = _read_text(args.file)
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return 2
    if args.kind == "dissection":
        try:
            d = SquareDissection.from_json(text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"malformed dissection document: {exc}", file=sys.stderr)
            return 2
        except ValueError as exc:
            print(f"invalid dissection: {exc}", file=sys.stderr)
            return 1
        _print_json({"valid": True, "order": d.order, "w": d.w, "h": d.h})
        return 0
    try:
        trade = TradePair.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"malformed trade document: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid trade: {exc}", file=sys.stderr)
        return 1
    # trades without a stored mate index only claim Latin validity
    if trade.k is None:
        report = validate_latin_trade(trade)
    else:
        report = validate_orthogonal_trade(trade)
    payload = {
        "valid": bool(report),
        "is_latin_trade": report.is_latin_trade,
        "is_orthogonal_trade": report.is_orthogonal_trade,
        "orthogonality_checked": report.orthogonality_checked,
        "size": report.size,
        "failures": [list(f) for f in report.failures[:20]],
    }
    if args.pretty:
        state = "valid" if report else "INVALID"
        print(f"trade of size {report.size}: {state}")
        for code, location in report.failures[:20]:
            print(f"  {code} at {location}")
    else:
        _print_json(payload)
    return 0 if report else 1


def _cmd_canon(args) -> int:
    try:
        trade = TradePair.from_json(_read_text(args.file))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"cannot read trade: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid trade: {exc}", file=sys.stderr)
        return 1
    try:
        canonical = canonicalize(trade)
    except ValueError as exc:
        print(f"not canonicalizable: {exc}", file=sys.stderr)
        return 1
    print(canonical.to_json())
    return 0


def _cmd_construct(args) -> int:
    if args.shape == "family":
        try:
            witness = family_construct(args.p)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        # extra keys are ignored by from_json, so verify/canon accept this
        doc = json.loads(witness.trade.to_json())
        doc["intercalate"] = {"cells": [list(t) for t in witness.intercalate]}
        _print_json(doc)
        return 0
    if args.shape == "threerow":
        try:
            got = three_row_trade(args.p)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        if got is None:
            print(
                f"no three-row trade: p={args.p} is not 1 (mod 6)",
                file=sys.stderr,
            )
            return 1
        sigma, k = got
        print(trade_from_rowperm(sigma, k).to_json())
        return 0
    if args.shape == "smalltrade":
        try:
            trade = log_trade(args.p)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        print(trade.to_json())
        return 0
    # dissection
    try:
        d = good_dissection(args.n) if args.n > 14 else base_dissection(args.n)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if args.svg:
        try:
            emit_svg(d, args.svg)
        except OSError as exc:
            print(f"cannot write {args.svg}: {exc}", file=sys.stderr)
            return 2
    if args.trade:
        print(dissection_to_trade(d).to_json())
    else:
        print(d.to_json())
    return 0


def _spectrum_payload(res) -> dict:
    return {
        "p": res.p,
        "per_k": {str(k): sorted(v) for k, v in sorted(res.per_k.items())},
        "sizes": sorted(res.sizes),
        "exhaustive": res.exhaustive,
        "budget_used": round(res.budget_used, 3),
        "via_duality": list(res.via_duality),
        "certificates": {
            str(size): json.loads(trade.to_json())
            for size, trade in sorted(res.certificates.items())
        },
    }


def _cmd_search(args) -> int:
    if args.what == "spectrum":
        try:
            targets = _parse_targets(args.targets) if args.targets else None
            if args.k is None:
                res = spectrum_all(
                    args.p, budget=args.budget, threads=args.threads, targets=targets
                )
            else:
                res = spectrum(
                    args.p,
                    args.k,
                    budget=args.budget,
                    threads=args.threads,
                    targets=targets,
                )
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 2
        payload = _spectrum_payload(res)
        if args.pretty:
            print(f"p={res.p} sizes: {' '.join(map(str, sorted(res.sizes)))}")
            for k, v in sorted(res.per_k.items()):
                print(f"  k={k}: {' '.join(map(str, sorted(v)))}")
            print(f"exhaustive: {res.exhaustive}")
        else:
            _print_json(payload)
        if res.exhaustive or (targets is not None and targets <= res.sizes):
            return 0
        return 3
    # rowperm
    try:
        res = rowperm_sizes(args.p, args.mates, budget=args.budget)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    payload = {
        "p": res.p,
        "mates": res.mates_count,
        "m_values": sorted(res.m_values),
        "nontrivial_m": sorted(res.nontrivial_m),
        "witnesses": {
            str(m): {"images": list(sigma.images), "mates": list(ks)}
            for m, (sigma, ks) in sorted(res.witnesses.items())
        },
        "exhaustive": res.exhaustive,
        "budget_used": round(res.budget_used, 3),
    }
    if args.pretty:
        print(f"p={res.p} mates={res.mates_count}: m in {sorted(res.m_values)}")
    else:
        _print_json(payload)
    return 0 if res.exhaustive else 3


def _cmd_transversals(args) -> int:
    if args.histogram:
        try:
            hist = diagonal_histogram(args.p, force=args.force)
        except ValueError as exc:
            _cli_error(exc)
            return 2
        if args.pretty:
            for hits, count in sorted(hist.items()):
                print(f"{hits:3d} {count}")
        else:
            _print_json(
                {"p": args.p, "histogram": {str(h): n for h, n in sorted(hist.items())}}
            )
        return 0
    try:
        n = count_transversals(gen_bp(args.p, args.k), force=args.force)
    except ValueError as exc:
        _cli_error(exc)
        return 2
    if args.pretty:
        print(n)
    else:
        _print_json({"p": args.p, "k": args.k, "count": n})
    return 0


def _cmd_orthomorphisms(args) -> int:
    if args.min_distance_from is not None:
        try:
            d = min_distance_from_linear(
                args.p, args.min_distance_from, force=args.force
            )
        except ValueError as exc:
            _cli_error(exc)
            return 2
        _print_json({"p": args.p, "k": args.min_distance_from, "min_distance": d})
        return 0
    try:
        n = sum(1 for _ in enumerate_orthomorphisms(args.p, force=args.force))
    except ValueError as exc:
        _cli_error(exc)
        return 2
    _print_json({"p": args.p, "count": n})
    return 0


def _cmd_bounds(args) -> int:
    try:
        b = size_bounds(args.p, args.k)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    payload = {
        "p": args.p,
        "k": args.k,
        "K": b.K,
        "symbol_lb": b.symbol_lb,
        "trade_lb": b.trade_lb,
        "perm_lb": b.perm_lb,
    }
    if args.pretty:
        for name in ("K", "symbol_lb", "trade_lb", "perm_lb"):
            print(f"{name:10s} {payload[name]}")
    else:
        _print_json(payload)
    return 0


def _cmd_fixtures(args) -> int:
    from bptrades.dissect import symbol_twice_search

    os.makedirs(args.dir, exist_ok=True)
    docs = {
        "fig1.json": family_construct(7).trade.to_json(pretty=True),
        "fig2.json": trade_from_rowperm(
            RowPermutation.from_cycle(7, (0, 4, 5)), 3
        ).to_json(pretty=True),
        "fig4.json": family_construct(13).trade.to_json(pretty=True),
        "b13_dissect.json": base_dissection(5).to_json(pretty=True),
    }
    for name, text in docs.items():
        path = os.path.join(args.dir, name)
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
        print(path, file=sys.stderr)
    if args.data_dir:
        os.makedirs(args.data_dir, exist_ok=True)
        for p, symbols in ((5, 4), (7, 5)):
            trade = symbol_twice_search(p, symbols)
            path = os.path.join(args.data_dir, f"small_trade_{p}.json")
            with open(path, "w", encoding="ascii") as fh:
                fh.write(trade.to_json(pretty=True))
            print(path, file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bptrades",
        description="Orthogonal trades in the cyclic Latin square family.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_pretty(sp):
        sp.add_argument("--pretty", action="store_true", help="human-readable output")

    sp = sub.add_parser("gen", help="print B_p(k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    add_pretty(sp)
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("verify", help="validate a trade or dissection file")
    sp.add_argument("kind", choices=["trade", "dissection"])
    sp.add_argument("--file", required=True)
    add_pretty(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("canon", help="canonical form of a trade file")
    sp.add_argument("--file", required=True)
    sp.set_defaults(func=_cmd_canon)

    sp = sub.add_parser("construct", help="build a trade or dissection")
    shapes = sp.add_subparsers(dest="shape", required=True)
    for shape, help_text in (
        ("family", "intercalate-free family member (needs p = 1 mod 6)"),
        ("threerow", "three-row trade (needs p = 1 mod 6)"),
        ("smalltrade", "near-logarithmic trade against B_p(2)"),
    ):
        ssp = shapes.add_parser(shape, help=help_text)
        ssp.add_argument("--p", type=int, required=True)
        add_pretty(ssp)
        ssp.set_defaults(func=_cmd_construct, shape=shape)
    ssp = shapes.add_parser("dissection", help="good dissection of the n+3 by n frame")
    ssp.add_argument("--n", type=int, required=True)
    ssp.add_argument("--svg", help="also write an SVG rendering here")
    ssp.add_argument("--trade", action="store_true", help="emit the induced trade")
    add_pretty(ssp)
    ssp.set_defaults(func=_cmd_construct, shape="dissection")

    sp = sub.add_parser("search", help="exhaustive searches")
    what = sp.add_subparsers(dest="what", required=True)
    ssp = what.add_parser("spectrum", help="orthogonal trade sizes")
    ssp.add_argument("--p", type=int, required=True)
    ssp.add_argument("--k", type=int, help="single mate; default all admissible")
    ssp.add_argument("--budget", type=float, help="seconds before giving up")
    ssp.add_argument("--threads", type=int, default=None)
    ssp.add_argument("--targets", help="sizes to certify, e.g. '0,22,33,36..121'")
    add_pretty(ssp)
    ssp.set_defaults(func=_cmd_search, what="spectrum")
    ssp = what.add_parser("rowperm", help="row-permutation support sizes")
    ssp.add_argument("--p", type=int, required=True)
    ssp.add_argument("--mates", type=int, required=True)
    ssp.add_argument("--budget", type=float)
    add_pretty(ssp)
    ssp.set_defaults(func=_cmd_search, what="rowperm")

    sp = sub.add_parser("transversals", help="count transversals")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--histogram", action="store_true", help="diagonal-hit histogram")
    sp.add_argument("--force", action="store_true", help="ignore the order cap")
    add_pretty(sp)
    sp.set_defaults(func=_cmd_transversals)

    sp = sub.add_parser("orthomorphisms", help="count or scan orthomorphisms")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument(
        "--min-distance-from",
        type=int,
        metavar="K",
        help="minimum distance from the linear map x -> K x",
    )
    sp.add_argument("--force", action="store_true", help="ignore the order cap")
    add_pretty(sp)
    sp.set_defaults(func=_cmd_orthomorphisms)

    sp = sub.add_parser("bounds", help="size lower bounds for index (1, k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    add_pretty(sp)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("fixtures", help="regenerate the shipped JSON fixtures")
    sp.add_argument("--dir", default="fixtures")
    sp.add_argument(
        "--data-dir",
        default=None,
        help="also rewrite the packaged small-trade data files here",
    )
    sp.set_defaults(func=_cmd_fixtures)

    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return int(exc.code or 0)
    return args.func(args)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
