"""The ChorL calculus over process-annotated sequents: proof search for
flat networks, expansion into PiL derivations and choreography
extraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import choreography as ch
from . import formula as fm
from . import process as pr
from .prover import Derivation, _node, _replace, _units


@dataclass(frozen=True)
class AnnotatedFormula:
    formula: fm.Formula
    owner: str

    def __str__(self):
        from .syntax import print_annotated
        return print_annotated(self.formula, self.owner)


@dataclass
class ChorLDerivation:
    rule: str
    conclusion: tuple
    premises: tuple = ()
    meta: dict = field(default_factory=dict)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def rules_used(self) -> set:
        return {n.rule for n in self.nodes()}


@dataclass
class AnnotatedJudgement:
    """The sequent form of a network together with its restriction prefix."""
    restricted: tuple
    sequent: tuple

    @property
    def formula(self) -> fm.Formula:
        return network_formula(self.restricted, [a.formula for a in self.sequent])


def network_formula(restricted, forms) -> fm.Formula:
    body = forms[0]
    for f in forms[1:]:
        body = fm.Parr(body, f)
    for x in reversed(list(restricted)):
        body = fm.New(x, body)
    return body


def _annot(comps):
    return tuple(AnnotatedFormula(fm._enc(s), n) for n, s in comps)


# ---------------------------------------------------------------- binder alignment

def _pairs(comps):
    """The leftmost matching pair as (kind, sender index, receiver index)."""
    for i, (_, a) in enumerate(comps):
        for j, (_, b) in enumerate(comps):
            if i == j:
                continue
            if isinstance(a, pr.Send) and isinstance(b, pr.Recv) and a.subject == b.subject:
                return "com", i, j
            if isinstance(a, pr.Recv) and isinstance(b, pr.Send) and a.subject == b.subject:
                return "com", j, i
            if isinstance(a, pr.LabelSend) and isinstance(b, pr.LabelRecv) and a.subject == b.subject:
                return "sel", i, j
            if isinstance(a, pr.LabelRecv) and isinstance(b, pr.LabelSend) and a.subject == b.subject:
                return "sel", j, i
    return None


def _collect(comps, sent):
    m = _pairs(comps)
    if m is None:
        return
    kind, i, j = m
    (p, a), (q, b) = comps[i], comps[j]
    if kind == "com":
        sent.setdefault((q, b.binder), set()).add(a.obj)
        nxt = list(comps)
        nxt[i] = (p, a.cont)
        nxt[j] = (q, pr._subst(b.cont, a.obj, b.binder))
        _collect(nxt, sent)
        return
    for l, cont in a.branches:
        if l in b.labels():
            nxt = list(comps)
            nxt[i] = (p, cont)
            nxt[j] = (q, b.branch(l))
            _collect(nxt, sent)


def align_binders(n: ch.EndpointNetwork) -> ch.EndpointNetwork:
    """Rename each receive binder to the name its unique partner sends,
    when that name is otherwise unused by the receiving component."""
    sent = {}
    _collect(list(n.components), sent)
    comps = []
    for name, body in n.components:
        ren = {}
        for (q, y), xs in sent.items():
            if q == name and len(xs) == 1:
                x = next(iter(xs))
                if x != y and x not in pr.all_names(body) and x not in ren.values():
                    ren[y] = x
        comps.append((name, _rename_binders(body, ren)))
    return ch.EndpointNetwork(n.restricted, tuple(comps))


def _rename_binders(p, ren):
    if not ren or isinstance(p, pr.Nil):
        return p
    if isinstance(p, pr.Send):
        return pr.Send(p.subject, p.obj, _rename_binders(p.cont, ren))
    if isinstance(p, pr.Recv):
        cont = _rename_binders(p.cont, ren)
        if p.binder in ren:
            new = ren[p.binder]
            return pr.Recv(p.subject, new, pr._subst(cont, new, p.binder))
        return pr.Recv(p.subject, p.binder, cont)
    return type(p)(p.subject, tuple((l, _rename_binders(q, ren)) for l, q in p.branches))


def annotate(n: ch.EndpointNetwork) -> AnnotatedJudgement:
    from .semantics import oracle_race_free
    from .prover import RaceError
    w = oracle_race_free(n.as_process())
    if w is not None:
        raise RaceError(w)
    n = align_binders(n)
    return AnnotatedJudgement(n.restricted, _annot(n.components))


# ---------------------------------------------------------------- search

@dataclass
class ChorLResult:
    derivation: Optional[ChorLDerivation]
    residual: Optional[ch.EndpointNetwork]


def chorl_search(n: ch.EndpointNetwork, check_race: bool = True) -> ChorLResult:
    if check_race:
        annotate(n)
    n = align_binders(n)
    res = _search(list(n.components), n.restricted)
    if isinstance(res, ch.EndpointNetwork):
        return ChorLResult(None, res)
    if n.restricted:
        res = ChorLDerivation("C-flat", _annot(n.components), (res,),
                              {"restricted": list(n.restricted)})
    return ChorLResult(res, None)


def chorl_prove(n: ch.EndpointNetwork) -> Optional[ChorLDerivation]:
    return chorl_search(n).derivation


def _search(comps, restricted):
    concl = _annot(comps)
    if all(isinstance(s, pr.Nil) for _, s in comps):
        return ChorLDerivation("C-init", concl)
    m = _pairs(comps)
    if m is None:
        return ch.EndpointNetwork(tuple(restricted), tuple(comps))
    kind, i, j = m
    (p, a), (q, b) = comps[i], comps[j]
    if kind == "com":
        nxt = list(comps)
        nxt[i] = (p, a.cont)
        nxt[j] = (q, pr._subst(b.cont, a.obj, b.binder))
        sub = _search(nxt, restricted)
        if isinstance(sub, ch.EndpointNetwork):
            return sub
        return ChorLDerivation("C-com", concl, (sub,),
                               {"p": p, "x": a.obj, "q": q, "y": b.binder, "k": a.subject})
    labels, recv_labels = a.labels(), b.labels()
    if not set(labels) <= set(recv_labels):
        return ch.EndpointNetwork(tuple(restricted), tuple(comps))
    subs = []
    for l in labels:
        nxt = list(comps)
        nxt[i] = (p, a.branch(l))
        nxt[j] = (q, b.branch(l))
        sub = _search(nxt, restricted)
        if isinstance(sub, ch.EndpointNetwork):
            return sub
        subs.append(sub)
    return ChorLDerivation("C-sel", concl, tuple(subs),
                           {"p": p, "q": q, "k": a.subject, "L": labels, "L'": recv_labels})


# ---------------------------------------------------------------- expansion

def expand_to_pil(d: ChorLDerivation) -> Derivation:
    if d.rule == "C-flat":
        forms = [a.formula for a in d.conclusion]
        restricted = d.meta.get("restricted", [])
        inner = expand_to_pil(d.premises[0])
        return _flat_prefix(restricted, forms, inner)
    seq = tuple(a.formula for a in d.conclusion)
    owners = [a.owner for a in d.conclusion]
    if d.rule == "C-init":
        return _units(seq)
    if d.rule == "C-com":
        i, j = owners.index(d.meta["p"]), owners.index(d.meta["q"])
        send, recv = seq[i], seq[j]
        x = d.meta["x"]
        opened = fm.subst(recv.body, x, recv.var)
        mid = _replace(seq, j, opened)
        ax = _node("ax", (send.left, opened.left))
        prec = _node("prec", mid, (ax, expand_to_pil(d.premises[0])), principal=[i, j])
        return _node("exists", seq, (prec,), principal=[j], witness=x)
    if d.rule == "C-sel":
        i, j = owners.index(d.meta["p"]), owners.index(d.meta["q"])
        w, o = seq[i], seq[j]
        recv_labels = [b.left.y for b in o.items]
        branches = []
        for item, sub in zip(w.items, d.premises):
            k = recv_labels.index(item.left.y)
            mid = _replace(seq, i, item)
            mid2 = _replace(mid, j, o.items[k])
            ax = _node("ax", (item.left, o.items[k].left))
            prec = _node("prec", mid2, (ax, expand_to_pil(sub)), principal=[i, j])
            branches.append(_node("oplus", mid, (prec,), principal=[j], branch=k))
        return _node("with", seq, branches, principal=[i])
    raise ValueError(f"unknown ChorL rule {d.rule}")


def _flat_prefix(restricted, forms, inner):
    """New-unit rules for the prefix, then par rules down the spine."""
    nodes = []
    spine = network_formula((), forms)
    seqs = []
    cur = [spine]
    while len(cur) < len(forms):
        seqs.append(tuple(cur))
        head = cur[0]
        cur = [head.left, head.right] + cur[1:]
    d = inner
    for s in reversed(seqs):
        d = _node("par", s, (d,), principal=[0])
    body = spine
    for k in range(len(restricted), 0, -1):
        f = network_formula(restricted[k - 1:], forms)
        d = _node("new_unit", (f,), (d,), principal=[0])
    return d


# ---------------------------------------------------------------- extraction

def extract_choreography(d: ChorLDerivation) -> ch.Choreography:
    if d.rule == "C-flat":
        c = extract_choreography(d.premises[0])
        for x in reversed(d.meta.get("restricted", [])):
            c = ch.Restrict(x, c)
        return c
    if d.rule == "C-init":
        return ch.END
    m = d.meta
    if d.rule == "C-com":
        return ch.Com(m["p"], m["x"], m["q"], m["y"], m["k"], extract_choreography(d.premises[0]))
    owners = [a.owner for a in d.conclusion]
    o = d.conclusion[owners.index(m["q"])].formula
    sel = tuple((l, extract_choreography(s)) for l, s in zip(m["L"], d.premises))
    garbage = tuple((b.left.y, fm.decode_sequential(b.right)) for b in o.items
                    if b.left.y not in m["L"])
    return ch.Choice(m["p"], m["q"], m["k"], sel, garbage)


def extract(n: ch.EndpointNetwork) -> Optional[ch.Choreography]:
    d = chorl_prove(n)
    return None if d is None else extract_choreography(d)
