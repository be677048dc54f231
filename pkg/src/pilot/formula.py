"""PiL formulas, the process encoding and its partial inverse."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from . import process as pr


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import print_formula
        return print_formula(self)


@dataclass(frozen=True, repr=False)
class Unit(Formula):
    def __repr__(self):
        return "Unit()"


@dataclass(frozen=True)
class SendAtom(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class RecvAtom(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class Parr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Tensor(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Prec(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Oplus(Formula):
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError("oplus needs at least one argument")


@dataclass(frozen=True)
class With(Formula):
    items: tuple

    def __post_init__(self):
        if not self.items:
            raise ValueError("with needs at least one argument")


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class New(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Ya(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, repr=False)
class Hole(Formula):
    def __repr__(self):
        return "Hole()"


UNIT = Unit()
HOLE = Hole()
ATOMS = (SendAtom, RecvAtom)
BINARY = (Parr, Tensor, Prec)
NARY = (Oplus, With)
QUANTS = (Forall, Exists, New, Ya)

_DUAL = {Parr: Tensor, Tensor: Parr, Prec: Prec, Oplus: With, With: Oplus,
         Forall: Exists, Exists: Forall, New: Ya, Ya: New,
         SendAtom: RecvAtom, RecvAtom: SendAtom}


def negate(a: Formula) -> Formula:
    if isinstance(a, (Unit, Hole)):
        return a
    t = _DUAL[type(a)]
    if isinstance(a, ATOMS):
        return t(a.x, a.y)
    if isinstance(a, BINARY):
        return t(negate(a.left), negate(a.right))
    if isinstance(a, NARY):
        return t(tuple(negate(b) for b in a.items))
    return t(a.var, negate(a.body))


def lolli(a: Formula, b: Formula) -> Formula:
    """Linear implication, expanded to its definition."""
    return Parr(negate(a), b)


def lequiv(a: Formula, b: Formula) -> Formula:
    return Tensor(lolli(a, b), lolli(b, a))


def children(a: Formula) -> tuple:
    if isinstance(a, BINARY):
        return (a.left, a.right)
    if isinstance(a, NARY):
        return a.items
    if isinstance(a, QUANTS):
        return (a.body,)
    return ()


def depth(a: Formula) -> int:
    cs = children(a)
    return 0 if not cs else 1 + max(depth(c) for c in cs)


def size(a: Formula) -> int:
    return 1 + sum(size(c) for c in children(a))


def fv(a: Formula) -> frozenset:
    if isinstance(a, ATOMS):
        return frozenset((a.x, a.y))
    if isinstance(a, QUANTS):
        return fv(a.body) - {a.var}
    out = frozenset()
    for c in children(a):
        out |= fv(c)
    return out


def fv_all(forms: Iterable[Formula]) -> frozenset:
    out = frozenset()
    for f in forms:
        out |= fv(f)
    return out


def binders(a: Formula) -> list:
    """(quantifier type, variable) pairs in preorder."""
    out = []
    stack = [a]
    while stack:
        f = stack.pop()
        if isinstance(f, QUANTS):
            out.append((type(f), f.var))
        stack.extend(reversed(children(f)))
    return out


def is_clean(forms: Iterable[Formula], store=None) -> bool:
    """Each variable bound at most once, or by one dual New/Ya pair, and
    never both bound and free.  A variable loaded in the store counts as
    one half of its nominal pair."""
    forms = list(forms)
    store = dict(store or {})
    kinds = {}
    for f in forms:
        for q, v in binders(f):
            kinds.setdefault(v, []).append(q)
    free = fv_all(forms)
    for v, qs in kinds.items():
        if v in store:
            want = Ya if store[v] == "nu" else New
            if qs != [want]:
                return False
            continue
        if v in free:
            return False
        if len(qs) == 1:
            continue
        if sorted(q.__name__ for q in qs) != ["New", "Ya"]:
            return False
    return True


def subst(a: Formula, new: str, old: str) -> Formula:
    """``a{new/old}`` with shadowing by quantifiers binding ``old``."""
    if new == old:
        return a
    if isinstance(a, (Unit, Hole)):
        return a
    if isinstance(a, ATOMS):
        r = lambda n: new if n == old else n
        return type(a)(r(a.x), r(a.y))
    if isinstance(a, BINARY):
        return type(a)(subst(a.left, new, old), subst(a.right, new, old))
    if isinstance(a, NARY):
        return type(a)(tuple(subst(b, new, old) for b in a.items))
    if a.var == old:
        return a
    return type(a)(a.var, subst(a.body, new, old))


def alpha_equal(a: Formula, b: Formula) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a, b, ea, eb, d):
    if type(a) is not type(b):
        return False
    if isinstance(a, ATOMS):
        return all(pr._same(u, v, ea, eb) for u, v in ((a.x, b.x), (a.y, b.y)))
    if isinstance(a, QUANTS):
        return _alpha(a.body, b.body, {**ea, a.var: d}, {**eb, b.var: d}, d + 1)
    ca, cb = children(a), children(b)
    return len(ca) == len(cb) and all(_alpha(x, y, ea, eb, d) for x, y in zip(ca, cb))


# ---------------------------------------------------------------- contexts

class FormulaContext:
    """A formula with exactly one hole."""

    def __init__(self, shape: Formula):
        n = sum(1 for f in _walk(shape) if isinstance(f, Hole))
        if n != 1:
            raise ValueError(f"context needs exactly one hole, found {n}")
        self.shape = shape

    def plug(self, a: Formula) -> Formula:
        return _plug(self.shape, a)

    @classmethod
    def nu_par(cls, names, other: Formula) -> "FormulaContext":
        body = Parr(HOLE, other)
        for x in reversed(list(names)):
            body = New(x, body)
        return cls(body)

    def __repr__(self):
        return f"FormulaContext({self.shape!r})"


def _walk(a):
    yield a
    for c in children(a):
        yield from _walk(c)


def _plug(s, a):
    if isinstance(s, Hole):
        return a
    if isinstance(s, BINARY):
        return type(s)(_plug(s.left, a), _plug(s.right, a))
    if isinstance(s, NARY):
        return type(s)(tuple(_plug(b, a) for b in s.items))
    if isinstance(s, QUANTS):
        return type(s)(s.var, _plug(s.body, a))
    return s


# ---------------------------------------------------------------- encoding

class EncodingError(ValueError):
    pass


def encode(p: pr.Process) -> Formula:
    if not pr.is_unambiguous(p):
        raise EncodingError("encode needs an unambiguous process; call make_unambiguous first")
    return _enc(p)


def _enc(p):
    if isinstance(p, pr.Nil):
        return UNIT
    if isinstance(p, pr.Send):
        return Prec(SendAtom(p.subject, p.obj), _enc(p.cont))
    if isinstance(p, pr.Recv):
        return Exists(p.binder, Prec(RecvAtom(p.subject, p.binder), _enc(p.cont)))
    if isinstance(p, pr.Par):
        return Parr(_enc(p.left), _enc(p.right))
    if isinstance(p, pr.Res):
        return New(p.binder, _enc(p.body))
    if isinstance(p, pr.LabelSend):
        return With(tuple(Prec(SendAtom(p.subject, l), _enc(q)) for l, q in p.branches))
    return Oplus(tuple(Prec(RecvAtom(p.subject, l), _enc(q)) for l, q in p.branches))


def decode_sequential(f: Formula) -> pr.Process:
    """Inverse of ``encode`` on sequential processes."""
    return _dec(f, sequential=True)


def decode(f: Formula) -> pr.Process:
    """Inverse of ``encode`` on its whole image."""
    return _dec(f, sequential=False)


def _dec(f, sequential):
    if isinstance(f, Unit):
        return pr.NIL
    if isinstance(f, Prec) and isinstance(f.left, SendAtom):
        return pr.Send(f.left.x, f.left.y, _dec(f.right, sequential))
    if (isinstance(f, Exists) and isinstance(f.body, Prec)
            and isinstance(f.body.left, RecvAtom) and f.body.left.y == f.var):
        return pr.Recv(f.body.left.x, f.var, _dec(f.body.right, sequential))
    if isinstance(f, NARY):
        atom = SendAtom if isinstance(f, With) else RecvAtom
        subj, branches = None, []
        for b in f.items:
            if not (isinstance(b, Prec) and isinstance(b.left, atom)):
                raise EncodingError(f"not an encoded branch: {b}")
            if subj not in (None, b.left.x):
                raise EncodingError("branches disagree on their subject")
            subj = b.left.x
            branches.append((b.left.y, _dec(b.right, sequential)))
        if len({l for l, _ in branches}) != len(branches):
            raise EncodingError("duplicate label")
        ctor = pr.LabelSend if isinstance(f, With) else pr.LabelRecv
        return ctor(subj, tuple(branches))
    if not sequential:
        if isinstance(f, Parr):
            return pr.Par(_dec(f.left, False), _dec(f.right, False))
        if isinstance(f, New):
            return pr.Res(f.var, _dec(f.body, False))
    raise EncodingError(f"formula is not the image of a {'sequential ' if sequential else ''}process: {f}")


# ---------------------------------------------------------------- progress

def unitize(f: Formula, names) -> Formula:
    """Replace atoms on the given subjects by units and simplify."""
    names = frozenset(names)
    return _unitize(f, names)


def _unitize(f, names):
    if isinstance(f, ATOMS):
        return UNIT if f.x in names else f
    if isinstance(f, (Unit, Hole)):
        return f
    if isinstance(f, NARY):
        return type(f)(tuple(_unitize(b, names) for b in f.items))
    if isinstance(f, QUANTS):
        return type(f)(f.var, _unitize(f.body, names))
    l, r = _unitize(f.left, names), _unitize(f.right, names)
    # a unit left of seq disappears; a trailing unit is kept unless the
    # prefix itself became a unit, so untouched prefixes keep their shape
    if isinstance(f, (Prec, Parr)) and isinstance(l, Unit):
        return r
    if isinstance(f, Parr) and isinstance(r, Unit):
        return l
    return type(f)(l, r)


def has_private_mobility(p: pr.Process) -> bool:
    """Some send carries a name bound by an enclosing restriction."""
    def go(t, restricted):
        if isinstance(t, pr.Send):
            return t.obj in restricted or go(t.cont, restricted)
        if isinstance(t, pr.Recv):
            return go(t.cont, restricted - {t.binder})
        if isinstance(t, pr.Res):
            return go(t.body, restricted | {t.binder})
        if isinstance(t, pr.Par):
            return go(t.left, restricted) or go(t.right, restricted)
        if isinstance(t, (pr.LabelSend, pr.LabelRecv)):
            return any(go(q, restricted) for _, q in t.branches)
        return False
    return go(p, frozenset())


def atom_multiset(forms) -> Counter:
    c = Counter()
    for f in forms:
        for g in _walk(f):
            if isinstance(g, ATOMS):
                c[g] += 1
    return c
