"""Command-line entry point.

Exit codes: 0 ok or positive verdict, 1 usage or parse error, 2 negative
verdict, 3 race found, 4 private mobility refused, 5 unprojectable.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import choreography as ch
from . import chorl
from . import formula as fm
from . import process as pr
from . import prover as pv
from . import semantics as se
from . import syntax as sx

OK, USAGE, NEGATIVE, RACE, PRIVATE, UNPROJECTABLE = 0, 1, 2, 3, 4, 5
COMMANDS = ("check", "progress", "races", "extract", "project", "run", "encode", "prove")


@dataclass
class RunConfig:
    command: str
    path: str
    format: str = "text"
    emit_derivation: Optional[str] = None
    depth: int = 64
    nodes: int = 10 ** 6
    trace: bool = False
    oracle: bool = False

    def __post_init__(self):
        if self.depth <= 0 or self.nodes <= 0:
            raise ValueError("budgets must be positive")


@dataclass
class Report:
    code: int
    verdict: str
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def text(self) -> str:
        return "\n".join([self.verdict] + self.lines)

    def json(self) -> dict:
        return {"exit": self.code, "verdict": self.verdict, **self.data}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")


def _load_process(text: str, path: str) -> pr.Process:
    kind = sx.detect_kind(text)
    if kind == "network":
        return sx.parse_network(text, path).as_process()
    if kind == "process":
        return sx.parse_process(text, path)
    raise UsageError(f"{path}: expected a process or network, found a {kind}")


def _load_network(text: str, path: str) -> ch.EndpointNetwork:
    kind = sx.detect_kind(text)
    if kind == "network":
        return sx.parse_network(text, path)
    if kind == "process":
        return ch.network_of_process(pr.make_unambiguous(sx.parse_process(text, path)))
    raise UsageError(f"{path}: expected a network or process, found a {kind}")


def _trace_lines(steps) -> list:
    return [st.trace_line() for st in steps]


def _race_report(w: se.RaceWitness) -> Report:
    a, b = w.pair
    lines = [f"race: {sx.print_process(a)} and {sx.print_process(b)}",
             f"in state: {sx.print_process(w.state)}"]
    lines += _trace_lines(w.trace)
    return Report(RACE, "RaceFound", lines,
                  {"race": [sx.print_process(a), sx.print_process(b)],
                   "state": sx.print_process(w.state), "trace": _trace_lines(w.trace)})


def _emit(cfg: RunConfig, d) -> list:
    if cfg.emit_derivation and d is not None:
        Path(cfg.emit_derivation).write_text(sx.print_derivation(d) + "\n")
        return [f"derivation written to {cfg.emit_derivation}"]
    return []


# ---------------------------------------------------------------- commands

def cmd_check(cfg: RunConfig, text: str) -> Report:
    p = pr.make_unambiguous(_load_process(text, cfg.path))
    w = se.oracle_race_free(p)
    if w is not None:
        return _race_report(w)
    v = pv.prove_encoding(p, check_race=False)
    if cfg.oracle:
        o = se.oracle_deadlock_free(p, with_tree=False)
        if o.deadlock_free != v.deadlock_free:
            raise RuntimeError("prover and oracle disagree on " + sx.print_process(p))
    agree = ["oracle agrees"] if cfg.oracle else []
    if v.deadlock_free:
        lines = _emit(cfg, v.derivation) + agree
        return Report(OK, se.DEADLOCK_FREE, lines, {"derivation_size": v.derivation.size()})
    o = se.oracle_deadlock_free(p, with_tree=False)
    lines = agree + [f"stuck: {sx.print_process(v.witness)}"]
    trace = _trace_lines(o.trace)
    lines += [f"reached: {sx.print_process(o.witness)}"] + trace
    return Report(NEGATIVE, se.DEADLOCKED, lines,
                  {"witness": sx.print_process(v.witness),
                   "reached": sx.print_process(o.witness), "trace": trace})


def cmd_progress(cfg: RunConfig, text: str) -> Report:
    p = pr.make_unambiguous(_load_process(text, cfg.path))
    if fm.has_private_mobility(p):
        msg = ("refused: a restricted name is sent, and progress is characterized "
               "only for processes without private mobility")
        return Report(PRIVATE, "PrivateMobility", [msg], {"reason": msg})
    w = se.oracle_race_free(p)
    if w is not None:
        return _race_report(w)
    ok, d = pv.prove_progress(p, cfg.depth, cfg.nodes, check_race=False)
    if cfg.oracle and se.oracle_progress(p) != ok:
        raise RuntimeError("prover and oracle disagree on " + sx.print_process(p))
    lines = _emit(cfg, d)
    return Report(OK if ok else NEGATIVE, "Progress" if ok else "NoProgress", lines)


def cmd_races(cfg: RunConfig, text: str) -> Report:
    p = _load_process(text, cfg.path)
    w = se.oracle_race_free(p)
    if w is None:
        return Report(OK, "RaceFree")
    return _race_report(w)


def cmd_extract(cfg: RunConfig, text: str) -> Report:
    n = _load_network(text, cfg.path)
    w = se.oracle_race_free(n.as_process())
    if w is not None:
        return _race_report(w)
    res = chorl.chorl_search(n, check_race=False)
    if res.derivation is None:
        r = sx.print_network(res.residual)
        return Report(NEGATIVE, se.DEADLOCKED, [f"stuck: {r}"], {"residual": r})
    c = sx.print_choreography(chorl.extract_choreography(res.derivation))
    lines = [c] + _emit(cfg, res.derivation)
    return Report(OK, "Extracted", lines, {"choreography": c})


def cmd_project(cfg: RunConfig, text: str) -> Report:
    c = sx.parse_choreography(text, cfg.path)
    try:
        n = ch.epp(c)
    except ch.NotFlatError as e:
        raise UsageError(str(e))
    except ch.ProjectionError as e:
        return Report(UNPROJECTABLE, "Unprojectable", [str(e)],
                      {"process": e.process, "labels": list(e.labels or ())})
    s = sx.print_network(n)
    return Report(OK, "Projected", [s], {"network": s})


def _dump_tree(t: se.ExecutionTree, depth, out, seen):
    pad = "  " * depth
    if id(t) in seen:
        out.append(f"{pad}(shared) {sx.print_process(t.root)}")
        return
    seen.add(id(t))
    for st, sub in t.children:
        out.append(f"{pad}{st.trace_line()} -> {sx.print_process(sub.root)}")
        _dump_tree(sub, depth + 1, out, seen)


def _dump_labeled(term, steps, show, depth, out, budget):
    for mu, nxt in steps(term):
        if len(out) >= budget:
            out.append("...")
            return
        out.append(f"{'  ' * depth}μ={mu} -> {show(nxt)}")
        _dump_labeled(nxt, steps, show, depth + 1, out, budget)


def cmd_run(cfg: RunConfig, text: str) -> Report:
    kind = sx.detect_kind(text)
    out = []
    if kind == "choreography":
        c = sx.parse_choreography(text, cfg.path)
        out.append(sx.print_choreography(c))
        _dump_labeled(c, ch.chor_steps, sx.print_choreography, 0, out, 10_000)
        return Report(OK, "Executed", out)
    if kind == "network":
        n = sx.parse_network(text, cfg.path)
        out.append(sx.print_network(n))
        _dump_labeled(n, ch.network_steps, sx.print_network, 0, out, 10_000)
        return Report(OK, "Executed", out)
    p = _load_process(text, cfg.path)
    space = se.StateSpace(p)
    out.append(sx.print_process(space.states[0]))
    _dump_tree(space.tree(), 0, out, set())
    return Report(OK, "Executed", out, {"states": len(space.states)})


def cmd_encode(cfg: RunConfig, text: str) -> Report:
    kind = sx.detect_kind(text)
    if kind == "network":
        j = chorl.annotate(sx.parse_network(text, cfg.path))
        s = ", ".join(str(a) for a in j.sequent)
        if j.restricted:
            s = f"new {' '.join(j.restricted)}. {s}"
        return Report(OK, "Encoded", [s], {"formula": s})
    f = sx.print_formula(fm.encode(pr.make_unambiguous(_load_process(text, cfg.path))))
    return Report(OK, "Encoded", [f], {"formula": f})


def cmd_prove(cfg: RunConfig, text: str) -> Report:
    forms = tuple(sx.parse_formula(s, cfg.path) for s in _sequent_parts(text))
    try:
        d = pv.prove_bounded(pv.Judgement((), forms), cfg.depth, cfg.nodes)
    except pv.SearchBudgetExceeded as e:
        return Report(NEGATIVE, "BudgetExhausted", [str(e)])
    if d is None:
        return Report(NEGATIVE, "Unprovable", ["search space exhausted"])
    lines = _emit(cfg, d)
    if cfg.trace:
        lines.append(sx.print_derivation(d))
    return Report(OK, "Provable", lines, {"derivation_size": d.size()})


def _sequent_parts(text):
    """One formula per non-empty line; blank lines and '#' comments are skipped."""
    parts = [l.strip() for l in text.splitlines()]
    parts = [l for l in parts if l and not l.startswith("#")]
    if not parts:
        raise UsageError("empty sequent")
    return parts


HANDLERS = {"check": cmd_check, "progress": cmd_progress, "races": cmd_races,
            "extract": cmd_extract, "project": cmd_project, "run": cmd_run,
            "encode": cmd_encode, "prove": cmd_prove}


def run_one(cfg: RunConfig) -> Report:
    try:
        text = _read(cfg.path)
        rep = HANDLERS[cfg.command](cfg, text)
    except sx.ParseError as e:
        return Report(USAGE, "ParseError", [str(e)], {"error": str(e)})
    except (UsageError, fm.EncodingError) as e:
        return Report(USAGE, "UsageError", [str(e)], {"error": str(e)})
    if cfg.trace and cfg.command in ("check", "extract") and rep.code == OK:
        p = _load_process(text, cfg.path)
        rep.lines.append(sx.print_process(pr.precongruence_normalize(pr.make_unambiguous(p))))
        _dump_tree(se.oracle_deadlock_free(p).tree, 0, rep.lines, set())
    return rep


# ---------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pilot", description=(
        "Deadlock, race and progress analysis of pi-calculus processes by proof search, "
        "with choreography extraction and endpoint projection."))
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "check": "decide deadlock-freedom of a race-free process or network",
        "progress": "decide progress of a process without private mobility",
        "races": "look for a reachable race",
        "extract": "extract a choreography from a flat network",
        "project": "endpoint projection of a flat choreography",
        "run": "print the labeled execution tree",
        "encode": "print the formula of a process",
        "prove": "bounded proof search on a sequent file (one formula per line)",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("paths", nargs="+", metavar="PATH", help="input file, or - for stdin")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--emit-derivation", metavar="PATH")
        sp.add_argument("--oracle", action="store_true",
                        help="also run the semantic oracle and require agreement")
        sp.add_argument("--trace", action="store_true")
        sp.add_argument("--depth", type=int, default=64)
        sp.add_argument("--nodes", type=int, default=10 ** 6)
        sp.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    if args.jobs < 1 or args.depth < 1 or args.nodes < 1:
        print("pilot: --jobs, --depth and --nodes must be positive", file=sys.stderr)
        return USAGE
    if args.emit_derivation and len(args.paths) > 1:
        print("pilot: --emit-derivation takes a single input", file=sys.stderr)
        return USAGE
    cfgs = [RunConfig(args.command, p, args.format, args.emit_derivation, args.depth,
                      args.nodes, args.trace, args.oracle) for p in args.paths]
    if args.jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            reports = list(ex.map(run_one, cfgs))
    else:
        reports = [run_one(c) for c in cfgs]
    if args.format == "json":
        if len(reports) == 1:
            doc = reports[0].json()
        else:
            doc = {"results": [{"path": c.path, **r.json()} for c, r in zip(cfgs, reports)]}
        print(json.dumps(doc, indent=2))
    else:
        for c, r in zip(cfgs, reports):
            if len(reports) > 1:
                print(f"== {c.path}")
            print(r.text())
    return max(r.code for r in reports)


if __name__ == "__main__":
    sys.exit(main())
