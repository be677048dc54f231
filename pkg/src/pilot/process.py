"""Process terms of the recursion-free pi-calculus.

Names are plain strings.  Branch maps of label constructors are kept as
tuples of ``(label, process)`` pairs so that terms stay hashable.
"""
from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional


class Process:
    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import print_process
        return print_process(self)


@dataclass(frozen=True, repr=False)
class Nil(Process):
    def __repr__(self):
        return "Nil()"


@dataclass(frozen=True)
class Send(Process):
    subject: str
    obj: str
    cont: Process


@dataclass(frozen=True)
class Recv(Process):
    subject: str
    binder: str
    cont: Process


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Res(Process):
    binder: str
    body: Process


@dataclass(frozen=True)
class LabelSend(Process):
    subject: str
    branches: tuple

    def labels(self):
        return [l for l, _ in self.branches]

    def branch(self, label):
        return dict(self.branches)[label]


@dataclass(frozen=True)
class LabelRecv(Process):
    subject: str
    branches: tuple

    def labels(self):
        return [l for l, _ in self.branches]

    def branch(self, label):
        return dict(self.branches)[label]


NIL = Nil()
PREFIXES = (Send, Recv, LabelSend, LabelRecv)


class CaptureError(ValueError):
    """Raised when a substitution would capture the replacement name."""


# ---------------------------------------------------------------- construction

def par_of(parts: Iterable[Process]) -> Process:
    """Left-nested parallel spine; the empty list gives Nil."""
    parts = list(parts)
    if not parts:
        return NIL
    out = parts[0]
    for q in parts[1:]:
        out = Par(out, q)
    return out


def res_of(binders: Iterable[str], body: Process) -> Process:
    for x in reversed(list(binders)):
        body = Res(x, body)
    return body


def components(p: Process) -> list:
    """Flatten the parallel spine (no restriction handling)."""
    if isinstance(p, Par):
        return components(p.left) + components(p.right)
    return [p]


def is_sequential(p: Process) -> bool:
    if isinstance(p, Nil):
        return True
    if isinstance(p, (Send, Recv)):
        return is_sequential(p.cont)
    if isinstance(p, (LabelSend, LabelRecv)):
        return all(is_sequential(q) for _, q in p.branches)
    return False


def prefix_count(p: Process) -> int:
    if isinstance(p, Nil):
        return 0
    if isinstance(p, (Send, Recv)):
        return 1 + prefix_count(p.cont)
    if isinstance(p, (LabelSend, LabelRecv)):
        return 1 + sum(prefix_count(q) for _, q in p.branches)
    if isinstance(p, Par):
        return prefix_count(p.left) + prefix_count(p.right)
    return prefix_count(p.body)


def labels_of(p: Process) -> frozenset:
    return frozenset(l for t in subterms(p) if isinstance(t, (LabelSend, LabelRecv))
                     for l, _ in t.branches)


def subterms(p: Process) -> Iterator[Process]:
    yield p
    if isinstance(p, (Send, Recv)):
        yield from subterms(p.cont)
    elif isinstance(p, (LabelSend, LabelRecv)):
        for _, q in p.branches:
            yield from subterms(q)
    elif isinstance(p, Par):
        yield from subterms(p.left)
        yield from subterms(p.right)
    elif isinstance(p, Res):
        yield from subterms(p.body)


# ---------------------------------------------------------------- names

def free_names(p: Process) -> frozenset:
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Send):
        return frozenset((p.subject, p.obj)) | free_names(p.cont)
    if isinstance(p, Recv):
        return frozenset((p.subject,)) | (free_names(p.cont) - {p.binder})
    if isinstance(p, Par):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, Res):
        return free_names(p.body) - {p.binder}
    out = {p.subject}
    for _, q in p.branches:
        out |= free_names(q)
    return frozenset(out)


def bound_names(p: Process) -> frozenset:
    return frozenset(binder_list(p))


def binder_list(p: Process) -> list:
    """Binders in preorder, with repetitions."""
    out = []
    for q in subterms(p):
        if isinstance(q, Recv):
            out.append(q.binder)
        elif isinstance(q, Res):
            out.append(q.binder)
    return out


def all_names(p: Process) -> frozenset:
    return free_names(p) | bound_names(p)


def is_unambiguous(p: Process) -> bool:
    bs = binder_list(p)
    return len(bs) == len(set(bs)) and not (set(bs) & free_names(p))


_SUFFIX = re.compile(r"_\d+$")


class NameSupply:
    """Deterministic source of fresh names of the form ``base_k``."""

    def __init__(self, counter: Optional[int] = None, reserved=()):
        if counter is None:
            counter = int(os.environ.get("PILOT_SEED", "0") or 0)
        if counter < 0:
            raise ValueError("counter must be non-negative")
        self.counter = counter
        self.reserved = set(reserved)

    def fresh(self, base: str) -> str:
        stem = _SUFFIX.sub("", base) or "n"
        while True:
            self.counter += 1
            name = f"{stem}_{self.counter}"
            if name not in self.reserved:
                self.reserved.add(name)
                return name

    def reserve(self, names):
        self.reserved.update(names)


# ---------------------------------------------------------------- substitution

def substitute(p: Process, replacement: str, target: str) -> Process:
    """``p{replacement/target}``; binders of ``target`` shadow it."""
    if replacement == target or target not in free_names(p):
        return p
    if replacement in bound_names(p):
        raise CaptureError(
            f"substituting {replacement} for {target} would capture {replacement}; "
            "alpha-rename the process first")
    return _subst(p, replacement, target)


def _subst(p, new, old):
    r = (lambda n: new if n == old else n)
    if isinstance(p, Nil):
        return p
    if isinstance(p, Send):
        return Send(r(p.subject), r(p.obj), _subst(p.cont, new, old))
    if isinstance(p, Recv):
        if p.binder == old:
            return Recv(r(p.subject), p.binder, p.cont)
        return Recv(r(p.subject), p.binder, _subst(p.cont, new, old))
    if isinstance(p, Par):
        return Par(_subst(p.left, new, old), _subst(p.right, new, old))
    if isinstance(p, Res):
        if p.binder == old:
            return p
        return Res(p.binder, _subst(p.body, new, old))
    return type(p)(r(p.subject), tuple((l, _subst(q, new, old)) for l, q in p.branches))


def rename_free(p: Process, mapping: dict) -> Process:
    """Simultaneous renaming of free names; caller guarantees no capture."""
    if not mapping:
        return p
    if isinstance(p, Nil):
        return p
    g = lambda n: mapping.get(n, n)
    if isinstance(p, Send):
        return Send(g(p.subject), g(p.obj), rename_free(p.cont, mapping))
    if isinstance(p, Recv):
        inner = {k: v for k, v in mapping.items() if k != p.binder}
        return Recv(g(p.subject), p.binder, rename_free(p.cont, inner))
    if isinstance(p, Par):
        return Par(rename_free(p.left, mapping), rename_free(p.right, mapping))
    if isinstance(p, Res):
        inner = {k: v for k, v in mapping.items() if k != p.binder}
        return Res(p.binder, rename_free(p.body, inner))
    return type(p)(g(p.subject), tuple((l, rename_free(q, mapping)) for l, q in p.branches))


# ---------------------------------------------------------------- alpha

def alpha_equiv(p: Process, q: Process) -> bool:
    return _alpha(p, q, {}, {}, 0)


def _same(a, b, ea, eb):
    if a in ea or b in eb:
        return ea.get(a) == eb.get(b) and a in ea and b in eb
    return a == b


def _alpha(p, q, ea, eb, depth):
    if type(p) is not type(q):
        return False
    if isinstance(p, Nil):
        return True
    if isinstance(p, Send):
        return (_same(p.subject, q.subject, ea, eb) and _same(p.obj, q.obj, ea, eb)
                and _alpha(p.cont, q.cont, ea, eb, depth))
    if isinstance(p, Recv):
        if not _same(p.subject, q.subject, ea, eb):
            return False
        return _alpha(p.cont, q.cont, {**ea, p.binder: depth}, {**eb, q.binder: depth}, depth + 1)
    if isinstance(p, Res):
        return _alpha(p.body, q.body, {**ea, p.binder: depth}, {**eb, q.binder: depth}, depth + 1)
    if isinstance(p, Par):
        return _alpha(p.left, q.left, ea, eb, depth) and _alpha(p.right, q.right, ea, eb, depth)
    if not _same(p.subject, q.subject, ea, eb):
        return False
    bp, bq = dict(p.branches), dict(q.branches)
    if set(bp) != set(bq):
        return False
    return all(_alpha(bp[l], bq[l], ea, eb, depth) for l in bp)


def make_unambiguous(p: Process, supply: Optional[NameSupply] = None) -> Process:
    """Rename binders so that each is bound once and never also free."""
    if supply is None:
        supply = NameSupply()
    supply.reserve(all_names(p))
    seen = set(free_names(p))

    def go(t, env):
        g = lambda n: env.get(n, n)
        if isinstance(t, Nil):
            return t
        if isinstance(t, Send):
            return Send(g(t.subject), g(t.obj), go(t.cont, env))
        if isinstance(t, (Recv, Res)):
            b = t.binder
            nb = supply.fresh(b) if b in seen else b
            seen.add(nb)
            inner = {**env, b: nb}
            if isinstance(t, Recv):
                return Recv(g(t.subject), nb, go(t.cont, inner))
            return Res(nb, go(t.body, inner))
        if isinstance(t, Par):
            return Par(go(t.left, env), go(t.right, env))
        return type(t)(g(t.subject), tuple((l, go(q, env)) for l, q in t.branches))

    return go(p, {})


# ---------------------------------------------------------------- precongruence

def flatten(p: Process, deep: bool = True):
    """Split ``p`` into extruded binders and non-nil parallel components.

    Vacuous restrictions are dropped.  With ``deep`` the continuations
    of prefixes are normalized as well.
    """
    if isinstance(p, Nil):
        return [], []
    if isinstance(p, Par):
        b1, c1 = flatten(p.left, deep)
        b2, c2 = flatten(p.right, deep)
        return b1 + b2, c1 + c2
    if isinstance(p, Res):
        bs, cs = flatten(p.body, deep)
        if any(p.binder in free_names(c) for c in cs):
            return [p.binder] + bs, cs
        return bs, cs
    if deep:
        p = _normalize_cont(p)
    return [], [p]


def _normalize_cont(p):
    if isinstance(p, (Send, Recv)):
        return type(p)(p.subject, p.obj if isinstance(p, Send) else p.binder,
                       precongruence_normalize(p.cont))
    return type(p)(p.subject, tuple((l, precongruence_normalize(q)) for l, q in p.branches))


def precongruence_normalize(p: Process) -> Process:
    """A maximal form under the oriented structural rules."""
    bs, cs = flatten(p)
    return res_of(bs, par_of(cs))


def struct_equiv(p: Process, q: Process) -> bool:
    supply = NameSupply(0, all_names(p) | all_names(q))
    p = precongruence_normalize(make_unambiguous(p, supply))
    q = precongruence_normalize(make_unambiguous(q, supply))
    if free_names(p) != free_names(q):
        return False
    if shape_key(p) != shape_key(q):
        return False
    return _equiv_norm(p, q)


def _equiv_norm(p, q) -> bool:
    bp, bq = bound_names(p), bound_names(q)
    if len(bp) != len(bq):
        return False
    for _ in _match_term(p, q, {}, {}, bp, bq):
        return True
    return False


def _match_name(a, b, fw, bw, bp, bq):
    if a in bp:
        if b not in bq:
            return None
        if a in fw:
            return (fw, bw) if fw[a] == b else None
        if b in bw:
            return None
        return {**fw, a: b}, {**bw, b: a}
    if b in bq or a != b:
        return None
    return fw, bw


def _match_term(p, q, fw, bw, bp, bq):
    bsp, csp = flatten(p, deep=False)
    bsq, csq = flatten(q, deep=False)
    if len(bsp) != len(bsq) or len(csp) != len(csq):
        return
    for fw2, bw2 in _match_multiset(csp, csq, fw, bw, bp, bq):
        if all(fw2.get(x) in bsq for x in bsp):
            yield fw2, bw2


def _match_multiset(ps, qs, fw, bw, bp, bq):
    if not ps:
        yield fw, bw
        return
    head, rest = ps[0], ps[1:]
    for i, cand in enumerate(qs):
        for fw2, bw2 in _match_prefix(head, cand, fw, bw, bp, bq):
            yield from _match_multiset(rest, qs[:i] + qs[i + 1:], fw2, bw2, bp, bq)


def _match_prefix(p, q, fw, bw, bp, bq):
    if type(p) is not type(q):
        return
    m = _match_name(p.subject, q.subject, fw, bw, bp, bq)
    if m is None:
        return
    fw, bw = m
    if isinstance(p, (Send, Recv)):
        a = p.obj if isinstance(p, Send) else p.binder
        b = q.obj if isinstance(q, Send) else q.binder
        m = _match_name(a, b, fw, bw, bp, bq)
        if m is None:
            return
        yield from _match_term(p.cont, q.cont, m[0], m[1], bp, bq)
        return
    dp, dq = dict(p.branches), dict(q.branches)
    if set(dp) != set(dq):
        return
    yield from _match_branches(sorted(dp), dp, dq, fw, bw, bp, bq)


def _match_branches(labels, dp, dq, fw, bw, bp, bq):
    if not labels:
        yield fw, bw
        return
    l = labels[0]
    for fw2, bw2 in _match_term(dp[l], dq[l], fw, bw, bp, bq):
        yield from _match_branches(labels[1:], dp, dq, fw2, bw2, bp, bq)


def shape_key(p: Process) -> str:
    """Hash key invariant under struct_equiv for unambiguous normal forms."""
    bound = bound_names(p)
    return _shape(p, bound)


def _shape(p, bound):
    n = lambda x: "_" if x in bound else x
    bs, cs = flatten(p, deep=False)
    parts = []
    for c in cs:
        if isinstance(c, Send):
            parts.append(f"{n(c.subject)}!{n(c.obj)}.{_shape(c.cont, bound)}")
        elif isinstance(c, Recv):
            parts.append(f"{n(c.subject)}?_.{_shape(c.cont, bound)}")
        else:
            tag = "sel" if isinstance(c, LabelSend) else "bra"
            inner = ",".join(f"{l}:{_shape(q, bound)}" for l, q in sorted(c.branches))
            parts.append(f"{n(c.subject)} {tag}{{{inner}}}")
    parts.sort()
    return f"new{len(bs)}(" + "|".join(parts) + ")"


# ---------------------------------------------------------------- races

def same_kind(a: Process, b: Process) -> bool:
    return type(a) is type(b) and isinstance(a, PREFIXES) and a.subject == b.subject


def find_race_shape(p: Process) -> Optional[tuple]:
    """Two top-level prefixes of one kind competing on one subject."""
    _, cs = flatten(p, deep=False)
    for a, b in itertools.combinations(cs, 2):
        if same_kind(a, b):
            return a, b
    return None
