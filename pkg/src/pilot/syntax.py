"""Plain-text syntax for processes, networks, formulas, choreographies
and derivations.

Precedence: prefixes bind tighter than ``|``.  ``new x.`` directly
followed by ``(`` takes that group as its body; otherwise it extends as
far to the right as possible.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from . import choreography as ch
from . import formula as fm
from . import process as pr


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("spans are 1-based")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, span: SourceSpan, expected: str, found: str):
        if not expected:
            raise ValueError("expected must be nonempty")
        super().__init__(f"{span}: expected {expected}, found {found!r}")
        self.span = span
        self.expected = expected
        self.found = found


KEYWORDS = {"new", "sel", "bra", "par", "tens", "seq", "oplus", "with", "all", "ex", "ya"}
_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_']*)
  | (?P<num>[0-9]+)
  | (?P<sym>[!?.|(){},:;\[\]])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, file: str = "<input>") -> list:
    out, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(SourceSpan(file, line, col), "a token", text[pos])
        s = m.group()
        kind = m.lastgroup
        if kind != "ws":
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text, file="<input>"):
        self.toks = tokenize(text, file)
        self.i = 0
        self.file = file

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected):
        t = self.tok
        raise ParseError(SourceSpan(self.file, t.line, t.col), expected, t.text or "end of input")

    def at(self, text):
        return self.tok.text == text and self.tok.kind != "ident"

    def eat(self, text):
        if not self.at(text):
            self.fail(repr(text))
        self.i += 1

    def maybe(self, text):
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, what="a name"):
        if self.tok.kind != "ident":
            self.fail(what)
        s = self.tok.text
        self.i += 1
        return s

    def done(self):
        if self.tok.kind != "eof":
            self.fail("end of input")

    # ------------------------------------------------------------ processes

    def process(self):
        parts = [self.prefixed()]
        while self.maybe("|"):
            parts.append(self.prefixed())
        return pr.par_of(parts)

    def prefixed(self):
        t = self.tok
        if t.kind == "num":
            if t.text != "0":
                self.fail("'0'")
            self.i += 1
            return pr.NIL
        if self.maybe("("):
            p = self.process()
            self.eat(")")
            return p
        if t.kind == "kw" and t.text == "new":
            self.i += 1
            names = [self.ident()]
            while self.maybe(","):
                names.append(self.ident())
            self.eat(".")
            if self.at("("):
                self.i += 1
                body = self.process()
                self.eat(")")
            else:
                body = self.process()
            return pr.res_of(names, body)
        subj = self.ident("a process")
        if self.maybe("!"):
            obj = self.ident()
            self.eat(".")
            return pr.Send(subj, obj, self.prefixed())
        if self.maybe("?"):
            b = self.ident()
            self.eat(".")
            return pr.Recv(subj, b, self.prefixed())
        if self.maybe("sel"):
            return pr.LabelSend(subj, self.branches(self.process))
        if self.maybe("bra"):
            return pr.LabelRecv(subj, self.branches(self.process))
        self.fail("'!', '?', 'sel' or 'bra'")

    def branches(self, item):
        self.eat("{")
        out = self.branch_list(item)
        self.eat("}")
        return out

    def branch_list(self, item, seen=None):
        seen = set() if seen is None else seen
        out = []
        while True:
            t = self.tok
            l = self.ident("a label")
            if l in seen:
                raise ParseError(SourceSpan(self.file, t.line, t.col), "a distinct label", l)
            seen.add(l)
            self.eat(":")
            out.append((l, item()))
            if not self.maybe(","):
                return tuple(out)

    # ------------------------------------------------------------ networks

    def network(self):
        restricted = []
        if self.at("new"):
            self.i += 1
            restricted.append(self.ident())
            while self.tok.kind == "ident" or self.at(","):
                self.maybe(",")
                restricted.append(self.ident())
            self.eat(".")
        comps = [self.component()]
        while self.maybe("|"):
            comps.append(self.component())
        names = [n for n, _ in comps]
        if len(set(names)) != len(names):
            self.fail("distinct process names")
        for n, b in comps:
            if not pr.is_sequential(b):
                raise ParseError(SourceSpan(self.file, 1, 1), f"a sequential body for {n}", str(b))
        return ch.EndpointNetwork(tuple(restricted), tuple(comps))

    def component(self):
        n = self.ident("a process name")
        self.eat("[")
        body = self.process()
        self.eat("]")
        return n, body

    # ------------------------------------------------------------ formulas

    def formula(self):
        first = self.unary()
        op = None
        args = [first]
        while self.tok.kind == "kw" and self.tok.text in ("par", "tens", "seq"):
            if op is not None and self.tok.text != op:
                self.fail(f"'{op}' (mixed operators need parentheses)")
            if op == "seq":
                self.fail("parentheses around a nested 'seq'")
            op = self.tok.text
            self.i += 1
            args.append(self.unary())
        out = args[0]
        ctor = {"par": fm.Parr, "tens": fm.Tensor, "seq": fm.Prec}.get(op)
        for a in args[1:]:
            out = ctor(out, a)
        return out

    def unary(self):
        t = self.tok
        if t.kind == "num":
            if t.text != "1":
                self.fail("'1'")
            self.i += 1
            return fm.UNIT
        if self.maybe("("):
            f = self.formula()
            self.eat(")")
            return f
        if t.kind == "kw" and t.text in ("oplus", "with"):
            self.i += 1
            self.eat("{")
            if self.at("}"):
                self.fail("at least one formula")
            items = [self.formula()]
            while self.maybe(","):
                items.append(self.formula())
            self.eat("}")
            return (fm.Oplus if t.text == "oplus" else fm.With)(tuple(items))
        if t.kind == "kw" and t.text in ("all", "ex", "new", "ya"):
            self.i += 1
            v = self.ident("a variable")
            self.eat(".")
            body = self.unary()
            return {"all": fm.Forall, "ex": fm.Exists, "new": fm.New, "ya": fm.Ya}[t.text](v, body)
        x = self.ident("a formula")
        if self.maybe("!"):
            return fm.SendAtom(x, self.ident())
        if self.maybe("?"):
            return fm.RecvAtom(x, self.ident())
        self.fail("'!' or '?'")

    # ------------------------------------------------------------ choreographies

    def chor(self):
        t = self.tok
        if t.kind == "num":
            if t.text != "0":
                self.fail("'0'")
            self.i += 1
            return ch.END
        if self.maybe("("):
            c = self.chor()
            self.eat(")")
            return c
        if t.kind == "kw" and t.text == "new":
            self.i += 1
            x = self.ident()
            self.eat(".")
            return ch.Restrict(x, self.chor())
        p = self.ident("a process name")
        if self.maybe("."):
            x = self.ident()
            self.eat("->")
            q = self.ident("a process name")
            self.eat(".")
            y = self.ident()
            self.eat(":")
            k = self.ident("a channel")
            self.eat(";")
            if p == q:
                self.fail("two distinct process names")
            return ch.Com(p, x, q, y, k, self.chor())
        self.eat("->")
        q = self.ident("a process name")
        self.eat(":")
        k = self.ident("a channel")
        if p == q:
            self.fail("two distinct process names")
        self.eat("{")
        seen = set()
        sel = self.branch_list(self.chor, seen)
        garbage = ()
        if self.maybe("|"):
            garbage = self.branch_list(self.garbage_item, seen)
        self.eat("}")
        return ch.Choice(p, q, k, sel, garbage)

    def garbage_item(self):
        t = self.tok
        p = self.prefixed()
        if not pr.is_sequential(p):
            raise ParseError(SourceSpan(self.file, t.line, t.col), "a sequential process", str(p))
        return p

    def annotated(self):
        self.eat("[")
        f = self.formula()
        self.eat("]")
        return f, self.ident("a process name")


def parse_process(text: str, file: str = "<input>") -> pr.Process:
    ps = _Parser(text, file)
    p = ps.process()
    ps.done()
    return p


def parse_network(text: str, file: str = "<input>") -> ch.EndpointNetwork:
    ps = _Parser(text, file)
    n = ps.network()
    ps.done()
    return n


def parse_formula(text: str, file: str = "<input>") -> fm.Formula:
    ps = _Parser(text, file)
    f = ps.formula()
    ps.done()
    return f


def parse_choreography(text: str, file: str = "<input>") -> ch.Choreography:
    ps = _Parser(text, file)
    c = ps.chor()
    ps.done()
    return c


def parse_annotated(text: str):
    ps = _Parser(text)
    out = ps.annotated()
    ps.done()
    return out


def looks_like_network(text: str) -> bool:
    try:
        toks = tokenize(text)
    except ParseError:
        return False
    i = 0
    if toks and toks[0].text == "new":
        while i < len(toks) and toks[i].text != ".":
            i += 1
        i += 1
    return i + 1 < len(toks) and toks[i].kind == "ident" and toks[i + 1].text == "["


def detect_kind(text: str) -> str:
    """One of "choreography", "network" or "process"."""
    if "->" in text:
        return "choreography"
    if looks_like_network(text):
        return "network"
    return "process"


# ---------------------------------------------------------------- printers

def print_process(p: pr.Process) -> str:
    if isinstance(p, pr.Par):
        return " | ".join(_proc_atom(c) for c in pr.components(p))
    return _proc_atom(p)


def _proc_atom(p):
    if isinstance(p, pr.Nil):
        return "0"
    if isinstance(p, pr.Par):
        return "(" + print_process(p) + ")"
    if isinstance(p, pr.Res):
        names = [p.binder]
        body = p.body
        while isinstance(body, pr.Res):
            names.append(body.binder)
            body = body.body
        return f"new {', '.join(names)}.({print_process(body)})"
    if isinstance(p, pr.Send):
        return f"{p.subject}!{p.obj}.{_proc_atom(p.cont)}"
    if isinstance(p, pr.Recv):
        return f"{p.subject}?{p.binder}.{_proc_atom(p.cont)}"
    kw = "sel" if isinstance(p, pr.LabelSend) else "bra"
    inner = ", ".join(f"{l}: {print_process(q)}" for l, q in p.branches)
    return f"{p.subject} {kw}{{{inner}}}"


def print_network(n: ch.EndpointNetwork) -> str:
    body = " | ".join(f"{name}[{print_process(p)}]" for name, p in n.components)
    if n.restricted:
        return f"new {' '.join(n.restricted)}. {body}"
    return body


_BIN = {fm.Parr: "par", fm.Tensor: "tens", fm.Prec: "seq"}
_Q = {fm.Forall: "all", fm.Exists: "ex", fm.New: "new", fm.Ya: "ya"}


def print_formula(f: fm.Formula) -> str:
    if isinstance(f, fm.BINARY):
        return f"{_form_atom(f.left)} {_BIN[type(f)]} {_form_atom(f.right)}"
    return _form_atom(f)


def _form_atom(f):
    if isinstance(f, fm.BINARY):
        return "(" + print_formula(f) + ")"
    if isinstance(f, fm.Unit):
        return "1"
    if isinstance(f, fm.Hole):
        return "[]"
    if isinstance(f, fm.SendAtom):
        return f"{f.x}!{f.y}"
    if isinstance(f, fm.RecvAtom):
        return f"{f.x}?{f.y}"
    if isinstance(f, fm.NARY):
        kw = "oplus" if isinstance(f, fm.Oplus) else "with"
        return f"{kw}{{{', '.join(print_formula(a) for a in f.items)}}}"
    return f"{_Q[type(f)]} {f.var}.{_form_atom(f.body)}"


def print_annotated(f: fm.Formula, owner: str) -> str:
    return f"[{print_formula(f)}]{owner}"


def print_choreography(c: ch.Choreography) -> str:
    if isinstance(c, ch.End):
        return "0"
    if isinstance(c, ch.Restrict):
        return f"new {c.x}. {print_choreography(c.body)}"
    if isinstance(c, ch.Com):
        return f"{c.p}.{c.x} -> {c.q}.{c.y} : {c.k} ; {print_choreography(c.cont)}"
    sel = ", ".join(f"{l}: {print_choreography(b)}" for l, b in c.selectable)
    if c.garbage:
        sel += " | " + ", ".join(f"{l}: {_proc_atom(s)}" for l, s in c.garbage)
    return f"{c.p} -> {c.q} : {c.k} {{ {sel} }}"


def print_derivation(d, indent: Optional[int] = 2) -> str:
    return json.dumps(derivation_to_json(d), indent=indent)


def derivation_to_json(d) -> dict:
    from .chorl import ChorLDerivation
    if isinstance(d, ChorLDerivation):
        seq = [print_annotated(a.formula, a.owner) for a in d.conclusion]
        store = {}
    else:
        seq = [print_formula(f) for f in d.conclusion.sequent]
        store = dict(d.conclusion.store)
    node = {"rule": d.rule, "store": store, "sequent": seq,
            "premises": [derivation_to_json(p) for p in d.premises]}
    if d.meta:
        node["meta"] = d.meta
    return node


def parse_derivation(text: str):
    return derivation_from_json(json.loads(text))


def derivation_from_json(node: dict):
    from .chorl import AnnotatedFormula, ChorLDerivation
    from .prover import Derivation, Judgement
    premises = tuple(derivation_from_json(p) for p in node.get("premises", []))
    meta = dict(node.get("meta", {}))
    seq = node["sequent"]
    if node["rule"].startswith("C-"):
        concl = tuple(AnnotatedFormula(*parse_annotated(s)) for s in seq)
        return ChorLDerivation(node["rule"], concl, premises, meta)
    j = Judgement(tuple(sorted(node.get("store", {}).items())), tuple(parse_formula(s) for s in seq))
    return Derivation(node["rule"], j, premises, meta)
