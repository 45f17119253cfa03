"""Command-line front end.

Exit statuses: 0 ran cleanly (no counterexample, or the query was solved),
1 counterexamples found (or the query has no solution), 2 usage or parse
error, 3 runtime error (fuel, non-pattern unification, unsafe negation).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import path as corpus_path
from .engine import DEFAULT_FUEL, DEL, Bnd, EngineError, Fuel, ll_solve, solve
from .fpclib import CertificateError, Library, MalformedBody, RandomSource
from .harness import (Counterexample, Limits, PropertyError, RunStats, deepen, printed_bindings,
                      replay, run_property, sample, shrink, term_size)
from .kernel import check, ll_check
from .syntax import MODES, Program, SpecError, parse_program, pretty
from .terms import Term
from .unify import NonPatternProblem

log = logging.getLogger("proofpbt")

EXIT_OK, EXIT_FOUND, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}")
    if not 0 <= lo <= hi:
        raise argparse.ArgumentTypeError("deepen range needs 0 <= LO <= HI")
    return lo, hi


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _nonneg(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pbt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--program", action="append", required=True, metavar="FILE",
                        help="specification file; repeatable; corpus/NAME.sl finds bundled files")
    common.add_argument("--mode", choices=MODES, help="override the program's mode")
    common.add_argument("--fuel", type=_positive, default=None,
                        help=f"step budget (default {DEFAULT_FUEL}, or $PBT_FUEL)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--report", metavar="DIR", help="write report.json, tables and figures here")
    common.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("solve", parents=[common], help="enumerate solutions of a goal")
    p.add_argument("--goal", required=True)
    p.add_argument("--all", action="store_true", help="all solutions")
    p.add_argument("--max-solutions", type=_positive, default=None)

    p = sub.add_parser("check", parents=[common], help="proofs of a goal fitting a certificate")
    p.add_argument("--goal", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--seed", default="0")
    p.add_argument("--all", action="store_true")
    p.add_argument("--max-solutions", type=_positive, default=None)

    p = sub.add_parser("prop", parents=[common], help="test a property")
    p.add_argument("--prop", action="append", required=True, metavar="NAME")
    p.add_argument("--cert")
    p.add_argument("--deepen", type=_range, metavar="LO..HI")
    p.add_argument("--size-factor", type=_positive)
    p.add_argument("--seed", default=None)
    p.add_argument("--max-counterexamples", type=_positive, default=None)
    p.add_argument("--shrink", action="store_true")
    p.add_argument("--replay", metavar="REPORT", help="re-check counterexamples stored in a JSON report")

    p = sub.add_parser("sample", parents=[common], help="weighted-random generation")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--prop")
    g.add_argument("--goal")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--cert", default="noweight")
    p.add_argument("--shrink", action="store_true")
    return ap


def load_program(paths: Sequence[str], mode: Optional[str]) -> Program:
    texts = []
    for name in paths:
        p = Path(name)
        if not p.exists():
            bundled = Path(corpus_path(p.name))
            if not bundled.exists():
                raise UsageError(f"no such program file: {name}")
            p = bundled
        texts.append(p.read_text(encoding="utf-8"))
    return parse_program(texts, mode=mode)


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose", "format", "report")}
    if cfg.get("deepen") is not None:
        cfg["deepen"] = f"{cfg['deepen'][0]}..{cfg['deepen'][1]}"
    return cfg


def _cex_json(cex: Counterexample) -> dict:
    return {
        "bindings": cex.printed(),
        "certificate": pretty(cex.cert) if cex.cert is not None else None,
        "bound": cex.bound,
        "seed": None if cex.seed is None else str(cex.seed),
        "provenance": cex.provenance,
    }


def _visible(bindings: dict[str, Term]) -> dict[str, Term]:
    return {k: v for k, v in bindings.items() if not k.endswith("#")}


def _context_json(ctx) -> Optional[list]:
    if ctx is None:
        return None
    return ["del" if o is DEL else f"{'bnd' if isinstance(o, Bnd) else 'ubnd'} {pretty(o.atom)}"
            for o in ctx]


def _limit(args) -> Optional[int]:
    if getattr(args, "all", False):
        return args.max_solutions
    return args.max_solutions or 1


def cmd_solve(args, prog: Program) -> tuple[dict, int]:
    fuel = Fuel(args.fuel)
    t0 = time.perf_counter()
    if prog.mode == "linear":
        stream = ll_solve(prog, [], args.goal, fuel=fuel, limit=_limit(args))
    else:
        stream = solve(prog, [], args.goal, fuel=fuel, limit=_limit(args))
    sols = [{"bindings": printed_bindings(_visible(s.bindings)), "context": _context_json(s.context)}
            for s in stream]
    report = {"goal": args.goal, "count": len(sols), "solutions": sols, "fuel_used": fuel.used,
              "timings": {"seconds": time.perf_counter() - t0}}
    return report, EXIT_OK if sols else EXIT_FOUND


def cmd_check(args, prog: Program) -> tuple[dict, int]:
    fuel = Fuel(args.fuel)
    fpc = Library(RandomSource(args.seed))
    t0 = time.perf_counter()
    if prog.mode == "linear":
        stream = ll_check(fpc, prog, args.cert, [], args.goal, fuel=fuel, limit=_limit(args))
    else:
        stream = check(fpc, prog, args.cert, [], args.goal, fuel=fuel, limit=_limit(args))
    sols = [{"bindings": printed_bindings(_visible(s.bindings)),
             "certificate": pretty(s.cert) if s.cert is not None else None,
             "context": _context_json(s.context)} for s in stream]
    report = {"goal": args.goal, "cert": args.cert, "count": len(sols), "solutions": sols,
              "fuel_used": fuel.used, "timings": {"seconds": time.perf_counter() - t0}}
    return report, EXIT_OK if sols else EXIT_FOUND


def _shrunk(prog, name, cex, limits) -> Optional[dict]:
    try:
        small = shrink(prog, name, cex, limits=limits)
    except PropertyError as e:
        return {"error": str(e)}
    return _cex_json(small)


def _run_one(args, prog: Program, name: str, limits: Limits) -> dict:
    stats = RunStats()
    t0 = time.perf_counter()
    if args.deepen is not None:
        stream = deepen(prog, name, *args.deepen, size_factor=args.size_factor, limits=limits,
                        stats=stats)
        cert = None
    else:
        cert = args.cert or "height 3"
        fpc = Library(RandomSource(args.seed if args.seed is not None else 0))
        stream = run_property(prog, name, cert, fpc=fpc, limits=limits, stats=stats,
                              seed=args.seed)
    cexs = []
    for cex in stream:
        item = _cex_json(cex)
        if args.shrink:
            item["shrunk"] = _shrunk(prog, name, cex, limits)
        cexs.append(item)
    return {
        "name": prog.prop(name).name,
        "cert": cert,
        "deepen": None if args.deepen is None else list(args.deepen),
        "size_factor": args.size_factor,
        "seed": args.seed,
        "counterexamples": cexs,
        "generated": stats.generated,
        "discarded": stats.discarded + stats.inconclusive,
        "timings": {"seconds": time.perf_counter() - t0},
    }


def _replay(args, prog: Program, limits: Limits) -> tuple[dict, int]:
    stored = json.loads(Path(args.replay).read_text(encoding="utf-8"))
    wanted = {prog.prop(n).name for n in args.prop}
    results = []
    for entry in stored.get("properties", []):
        if entry["name"] not in wanted:
            continue
        for cex in entry["counterexamples"]:
            ok = replay(prog, entry["name"], cex["bindings"], limits=limits)
            results.append({"name": entry["name"], "bindings": cex["bindings"], "replayed": ok})
    failed = [r for r in results if not r["replayed"]]
    report = {"replay": args.replay, "results": results, "failed": len(failed)}
    if failed:
        return report, EXIT_RUNTIME
    return report, EXIT_FOUND if results else EXIT_OK


def cmd_prop(args, prog: Program) -> tuple[dict, int]:
    if args.cert and args.deepen:
        raise UsageError("--cert and --deepen are exclusive")
    if args.size_factor and not args.deepen:
        raise UsageError("--size-factor needs --deepen")
    limits = Limits(fuel=args.fuel or DEFAULT_FUEL, max_counterexamples=args.max_counterexamples)
    for n in args.prop:
        try:
            prog.prop(n)
        except KeyError:
            raise UsageError(f"unknown property {n!r}")
    if args.replay:
        return _replay(args, prog, limits)
    props = [_run_one(args, prog, n, limits) for n in args.prop]
    found = any(p["counterexamples"] for p in props)
    return {"properties": props}, EXIT_FOUND if found else EXIT_OK


def cmd_sample(args, prog: Program) -> tuple[dict, int]:
    limits = Limits(fuel=args.fuel or DEFAULT_FUEL)
    target = args.prop if args.prop else args.goal
    if args.prop:
        try:
            prog.prop(args.prop)
        except KeyError:
            raise UsageError(f"unknown property {args.prop!r}")
    t0 = time.perf_counter()
    rep = sample(prog, target, args.n, seed=args.seed, limits=limits, cert=args.cert)
    cexs = []
    for cex in rep.counterexamples:
        item = _cex_json(cex)
        if args.shrink:
            item["shrunk"] = _shrunk(prog, args.prop, cex, limits)
        cexs.append(item)
    report = {
        "target": target,
        "seed": args.seed,
        "attempts": rep.attempts,
        "values": [printed_bindings(v) for v in rep.values],
        "sizes": [sum(term_size(t) for t in v.values()) for v in rep.values],
        "counterexamples": cexs,
        "discarded": rep.discarded,
        "timings": {"seconds": time.perf_counter() - t0},
    }
    return report, EXIT_FOUND if cexs else EXIT_OK


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "prop": cmd_prop, "sample": cmd_sample}


def render_text(command: str, report: dict) -> str:
    out = []
    if command in ("solve", "check"):
        for i, s in enumerate(report["solutions"], 1):
            out.append(f"solution {i}:")
            out.extend(f"  {k} = {v}" for k, v in s["bindings"].items())
            if s.get("certificate"):
                out.append(f"  certificate: {s['certificate']}")
            if s.get("context"):
                out.append(f"  context: {', '.join(s['context'])}")
        out.append(f"{report['count']} solution(s)")
    elif "replay" in report:
        for r in report["results"]:
            status = "replays" if r["replayed"] else "DOES NOT REPLAY"
            b = ", ".join(f"{k} = {v}" for k, v in r["bindings"].items())
            out.append(f"{r['name']}: {b}: {status}")
        out.append(f"{len(report['results'])} stored counterexample(s), {report['failed']} failed")
    elif command == "prop":
        for p in report["properties"]:
            how = p["cert"] if p["deepen"] is None else f"deepen {p['deepen'][0]}..{p['deepen'][1]}"
            out.append(f"property {p['name']} ({how})")
            out.extend(_cex_lines(p["counterexamples"]))
            out.append(f"  {len(p['counterexamples'])} counterexample(s), {p['generated']} generated, "
                       f"{p['discarded']} discarded")
    else:
        for i, v in enumerate(report["values"], 1):
            out.append(f"value {i}: " + ", ".join(f"{k} = {t}" for k, t in v.items()))
        out.extend(_cex_lines(report["counterexamples"]))
        out.append(f"{report['attempts']} attempt(s), {len(report['values'])} generated, "
                   f"{report['discarded']} discarded, {len(report['counterexamples'])} counterexample(s)")
    return "\n".join(out)


def _cex_lines(cexs: list[dict]) -> list[str]:
    out = []
    for i, c in enumerate(cexs, 1):
        where = f" at bound {c['bound']}" if c["bound"] is not None else ""
        out.append(f"  counterexample {i}{where}:")
        out.extend(f"    {k} = {v}" for k, v in c["bindings"].items())
        s = c.get("shrunk")
        if s and "bindings" in s:
            out.append("    shrunk: " + ", ".join(f"{k} = {v}" for k, v in s["bindings"].items()))
        elif s:
            out.append(f"    shrink: {s['error']}")
    return out


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def write_report(directory: str, command: str, report: dict) -> list[str]:
    """Write report.json, a tab-separated table and figures into ``directory``."""
    from . import plots

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "report.json").write_text(dumps(report) + "\n", encoding="utf-8")
    rows = _rows(command, report)
    with open(d / "results.tsv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["kind", "index", "bound", "variable", "value"])
        w.writerows(rows)
    written = [str(d / "report.json"), str(d / "results.tsv")]
    written += plots.render(command, report, d)
    return written


def _rows(command: str, report: dict) -> list[list]:
    rows = []
    if command in ("solve", "check"):
        for i, s in enumerate(report["solutions"], 1):
            rows += [["solution", i, "", k, v] for k, v in s["bindings"].items()]
    elif command == "prop" and "properties" in report:
        for p in report["properties"]:
            for i, c in enumerate(p["counterexamples"], 1):
                rows += [[f"counterexample:{p['name']}", i, c["bound"] if c["bound"] is not None else "",
                          k, v] for k, v in c["bindings"].items()]
    elif command == "sample":
        for i, v in enumerate(report["values"], 1):
            rows += [["value", i, "", k, t] for k, t in v.items()]
        for i, c in enumerate(report["counterexamples"], 1):
            rows += [["counterexample", i, "", k, t] for k, t in c["bindings"].items()]
    return rows


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        prog = load_program(args.program, args.mode)
        body, status = COMMANDS[args.command](args, prog)
    except (UsageError, SpecError, CertificateError, KeyError) as e:
        print(f"pbt: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineError, NonPatternProblem, PropertyError, MalformedBody, RecursionError) as e:
        print(f"pbt: runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    report = {"tool": "proofpbt", "version": __version__, "command": args.command,
              "config": _config(args), **body}
    if args.format == "json":
        print(dumps(report))
    else:
        print(render_text(args.command, report))
    if args.report:
        for f in write_report(args.report, args.command, report):
            log.info("wrote %s", f)
    return status


if __name__ == "__main__":
    sys.exit(main())
