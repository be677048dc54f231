"""Sequent calculus for PiL: derivations, a rule checker, identity
derivations, a bounded generic prover and the block prover for encoded
processes."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import formula as fm
from . import process as pr
from .formula import (Exists, Forall, New, Oplus, Parr, Prec, RecvAtom, SendAtom,
                      Tensor, Unit, With, Ya)

RULES = ("ax", "unit", "par", "tens", "mix", "prec", "prec_unit", "oplus", "with",
         "forall", "exists", "new_unit", "new_load", "new_pop", "ya_unit", "ya_load",
         "ya_pop", "cut")
ENCODING_FRAGMENT = frozenset({"unit", "ax", "par", "mix", "prec", "with", "oplus",
                               "exists", "new_unit"})


@dataclass(frozen=True)
class Judgement:
    """``store |- sequent``; occurrence ids are positions in the sequent."""
    store: tuple = ()
    sequent: tuple = ()

    @classmethod
    def of(cls, *forms, store=None):
        return cls(tuple(sorted((store or {}).items())), tuple(forms))

    def store_map(self) -> dict:
        return dict(self.store)

    def __str__(self):
        from .syntax import print_formula
        st = ", ".join(("И" if t == "nu" else "Я") + x for x, t in self.store)
        return f"{st} |- " + ", ".join(print_formula(f) for f in self.sequent)


@dataclass
class Derivation:
    rule: str
    conclusion: Judgement
    premises: tuple = ()
    meta: dict = field(default_factory=dict)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def rules_used(self) -> set:
        return {n.rule for n in self.nodes()}

    def stores_empty(self) -> bool:
        return all(not n.conclusion.store for n in self.nodes())


class SearchBudgetExceeded(RuntimeError):
    """The node budget ran out before the search space was exhausted."""


class RaceError(ValueError):
    """The process has a race; the deadlock characterization needs race-freedom."""

    def __init__(self, witness):
        super().__init__(f"process is not race-free (competing prefixes {witness.pair[0]} and "
                         f"{witness.pair[1]}); deadlock-freedom is decided only for race-free processes")
        self.witness = witness


class PrivateMobilityError(ValueError):
    """Progress is characterized only for processes without private mobility."""


# ---------------------------------------------------------------- checking

@dataclass
class Check:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def _ms(forms) -> Counter:
    return Counter(forms)


def _minus(gamma, idxs):
    return [f for k, f in enumerate(gamma) if k not in idxs]


def check_rule(node: Derivation) -> Check:
    """Validate one node against its rule; premises are not visited."""
    try:
        msg = _check(node)
    except (IndexError, KeyError, TypeError, ValueError) as e:
        msg = f"malformed metadata: {e}"
    return Check(msg is None, msg or "")


def check_derivation(d: Derivation) -> list:
    """All failing nodes as (rule, message) pairs; empty means valid."""
    out = []
    for n in d.nodes():
        c = check_rule(n)
        if not c:
            out.append((n.rule, c.message))
    return out


def _split_stores(node, s):
    stores = [p.conclusion.store_map() for p in node.premises]
    joined = {}
    for st in stores:
        for x, t in st.items():
            if x in joined:
                return f"store variable {x} occurs in both premises"
            joined[x] = t
    if joined != s:
        return "premise stores do not partition the conclusion store"
    return None


def _check(node):
    rule, j, prem = node.rule, node.conclusion, node.premises
    gamma, s = list(j.sequent), j.store_map()
    meta = node.meta
    nprem = {"ax": 0, "unit": 0, "par": 1, "tens": 2, "mix": 2, "prec": 2, "prec_unit": 2,
             "oplus": 1, "forall": 1, "exists": 1, "new_unit": 1, "new_load": 1,
             "new_pop": 1, "ya_unit": 1, "ya_load": 1, "ya_pop": 1, "cut": 2}
    if rule not in RULES:
        return f"unknown rule {rule}"
    if rule in nprem and len(prem) != nprem[rule]:
        return f"{rule} needs {nprem[rule]} premises, got {len(prem)}"
    pseq = [_ms(p.conclusion.sequent) for p in prem]
    pst = [p.conclusion.store_map() for p in prem]

    if rule == "ax":
        if len(gamma) != 2:
            return "ax concludes exactly two atoms"
        a, b = gamma
        if isinstance(a, RecvAtom):
            a, b = b, a
        if not (isinstance(a, SendAtom) and isinstance(b, RecvAtom) and (a.x, a.y) == (b.x, b.y)):
            return "ax needs a send atom and its dual receive atom"
        return None
    if rule == "unit":
        return None if gamma == [fm.UNIT] else "unit concludes exactly the unit"
    if rule == "mix":
        if pseq[0] + pseq[1] != _ms(gamma):
            return "mix premises do not partition the sequent"
        if not pseq[0] or not pseq[1]:
            return "mix premises must be nonempty"
        return _split_stores(node, s)
    if rule == "cut":
        a = _parse_meta_formula(meta["cut"])
        for x, y in ((0, 1), (1, 0)):
            if pseq[x][a] and pseq[y][fm.negate(a)]:
                rest = (pseq[x] - _ms([a])) + (pseq[y] - _ms([fm.negate(a)]))
                if rest == _ms(gamma):
                    return _split_stores(node, s)
        return "cut premises do not match the cut formula and context"

    principal = list(meta["principal"])
    for i in principal:
        if not 0 <= i < len(gamma):
            return f"principal index {i} out of range"
    rest = _minus(gamma, set(principal))
    f = gamma[principal[0]]

    if rule == "par":
        if not isinstance(f, Parr):
            return "par needs a par formula"
        if pseq[0] != _ms(rest + [f.left, f.right]) or pst[0] != s:
            return "par premise must replace A par B by A, B"
        return None
    if rule in ("tens", "prec_unit"):
        want = Tensor if rule == "tens" else Prec
        if not isinstance(f, want):
            return f"{rule} needs a {want.__name__} formula"
        if not (pseq[0][f.left] and pseq[1][f.right]):
            return f"{rule} premises must contain the two components"
        if (pseq[0] - _ms([f.left])) + (pseq[1] - _ms([f.right])) != _ms(rest):
            return f"{rule} premises do not partition the context"
        return _split_stores(node, s)
    if rule == "prec":
        if len(principal) != 2:
            return "prec needs two principal formulas"
        g = gamma[principal[1]]
        if not (isinstance(f, Prec) and isinstance(g, Prec)):
            return "prec needs two prec formulas"
        if not (pseq[0][f.left] and pseq[1][f.right]):
            return "prec: left premise holds A, C and right premise holds B, D"
        a = pseq[0] - _ms([f.left])
        b = pseq[1] - _ms([f.right])
        if not (a[g.left] and b[g.right]):
            return "prec: left premise holds A, C and right premise holds B, D"
        if (a - _ms([g.left])) + (b - _ms([g.right])) != _ms(rest):
            return "prec premises do not partition the context"
        return _split_stores(node, s)
    if rule == "oplus":
        if not isinstance(f, Oplus):
            return "oplus needs an oplus formula"
        k = meta["branch"]
        if not 0 <= k < len(f.items):
            return f"oplus picks k in [1,{len(f.items)}]"
        if pseq[0] != _ms(rest + [f.items[k]]) or pst[0] != s:
            return "oplus premise must replace the formula by its chosen branch"
        return None
    if rule == "with":
        if not isinstance(f, With):
            return "with needs a with formula"
        if len(prem) != len(f.items):
            return "with needs one premise per branch"
        for k, item in enumerate(f.items):
            if pseq[k] != _ms(rest + [item]) or pst[k] != s:
                return f"with premise {k + 1} does not match its branch"
        return None
    if rule in ("forall", "new_unit", "new_load", "ya_unit", "ya_load"):
        want = {"forall": Forall, "new_unit": New, "new_load": New,
                "ya_unit": Ya, "ya_load": Ya}[rule]
        if not isinstance(f, want):
            return f"{rule} needs a {want.__name__} formula"
        y = meta.get("eigen", f.var)
        if y in fm.fv_all(rest):
            return f"side condition: {y} must not be free in the context"
        if y in s:
            return f"side condition: {y} already occurs in the store"
        if pseq[0] != _ms(rest + [fm.subst(f.body, y, f.var)]):
            return f"{rule} premise must open the quantifier"
        expect = dict(s)
        if rule.endswith("load"):
            expect[y] = "nu" if want is New else "ya"
        if pst[0] != expect:
            return f"{rule} premise store is wrong"
        return None
    if rule == "exists":
        if not isinstance(f, Exists):
            return "exists needs an exists formula"
        y = meta["witness"]
        if pseq[0] != _ms(rest + [fm.subst(f.body, y, f.var)]) or pst[0] != s:
            return "exists premise must instantiate the witness"
        return None
    if rule in ("new_pop", "ya_pop"):
        want, tag = (Ya, "nu") if rule == "new_pop" else (New, "ya")
        if not isinstance(f, want):
            return f"{rule} needs a {want.__name__} formula"
        y = meta["name"]
        if s.get(y) != tag:
            return f"{rule} consumes a {tag} variable {y} that is not in the store"
        expect = {k: v for k, v in s.items() if k != y}
        if pst[0] != expect:
            return f"{rule} premise store must drop {y}"
        if pseq[0] != _ms(rest + [fm.subst(f.body, y, f.var)]):
            return f"{rule} premise must instantiate the quantifier with {y}"
        return None
    return f"unhandled rule {rule}"


def _parse_meta_formula(text):
    from .syntax import parse_formula
    return parse_formula(text) if isinstance(text, str) else text


# ---------------------------------------------------------------- builders

def _node(rule, forms, premises=(), store=(), **meta):
    return Derivation(rule, Judgement(tuple(sorted(dict(store).items())), tuple(forms)),
                      tuple(premises), meta)


def prove_identity(a: fm.Formula) -> Derivation:
    """A cut-free derivation of ``|- negate(a), a`` by induction on ``a``."""
    na = fm.negate(a)
    seq = (na, a)
    if isinstance(a, Unit):
        return _node("mix", seq, (_node("unit", (na,)), _node("unit", (a,))))
    if isinstance(a, fm.ATOMS):
        return _node("ax", seq)
    if isinstance(a, Parr):
        tens = _node("tens", (na, a.left, a.right),
                     (prove_identity(a.left), prove_identity(a.right)), principal=[0])
        return _node("par", seq, (tens,), principal=[1])
    if isinstance(a, Tensor):
        tens = _node("tens", (na.left, na.right, a),
                     (prove_identity(a.left), prove_identity(a.right)), principal=[2])
        return _node("par", seq, (tens,), principal=[0])
    if isinstance(a, Prec):
        return _node("prec", seq, (prove_identity(a.left), prove_identity(a.right)),
                     principal=[0, 1])
    if isinstance(a, (With, Oplus)):
        wi, oi = (1, 0) if isinstance(a, With) else (0, 1)
        branches = []
        for k, item in enumerate(seq[wi].items):
            mid = _replace(seq, wi, item)
            branches.append(_node("oplus", mid, (prove_identity(a.items[k]),),
                                  principal=[oi], branch=k))
        return _node("with", seq, branches, principal=[wi])
    if isinstance(a, (Forall, Exists)):
        ai, ei = (1, 0) if isinstance(a, Forall) else (0, 1)
        mid = _replace(seq, ai, seq[ai].body)
        inner = _node("exists", mid, (prove_identity(a.body),), principal=[ei],
                      witness=a.var)
        return _node("forall", seq, (inner,), principal=[ai])
    # nominal pair: load the New side, pop it against the Ya side
    ni, yi = (1, 0) if isinstance(a, New) else (0, 1)
    mid = _replace(seq, ni, seq[ni].body)
    pop = _node("new_pop", mid, (prove_identity(a.body),), {a.var: "nu"},
                principal=[yi], name=a.var)
    return _node("new_load", seq, (pop,), principal=[ni])


# ---------------------------------------------------------------- bounded search

def _fkey(f):
    return repr(f)


class _Search:
    def __init__(self, depth, nodes, avoid=frozenset()):
        self.depth = depth
        self.avoid = avoid
        self.budget = nodes
        self.used = 0
        self.fail = {}
        self.win = {}
        self.fresh = "_f"

    def run(self, seq, store):
        d, _ = self.prove(tuple(seq), frozenset(store.items()), self.depth)
        return d

    def prove(self, seq, store, depth):
        key = (tuple(sorted(map(_fkey, seq))), store)
        if key in self.win:
            return self._retarget(self.win[key], seq), True
        if key in self.fail:
            definite, at = self.fail[key]
            if definite or at >= depth:
                return None, definite
        self.used += 1
        if self.used > self.budget:
            raise SearchBudgetExceeded(f"node budget {self.budget} exhausted")
        if depth <= 0:
            return None, False
        d, definite = self._prove(seq, store, depth)
        if d is not None:
            self.win[key] = d
        else:
            self.fail[key] = (definite, depth)
        return d, definite

    def _retarget(self, d, seq):
        if list(d.conclusion.sequent) == list(seq):
            return d
        return Derivation(d.rule, Judgement(d.conclusion.store, tuple(seq)),
                          d.premises, _reindex(d, seq))

    def _prove(self, seq, store, depth):
        st = tuple(sorted(store))
        smap = dict(store)
        n = len(seq)
        if seq == (fm.UNIT,):
            return _node("unit", seq, (), st), True
        if n == 2:
            a, b = seq
            if {type(a), type(b)} == {SendAtom, RecvAtom} and (a.x, a.y) == (b.x, b.y):
                return _node("ax", seq, (), st), True
        # invertible rules first
        for i, f in enumerate(seq):
            if isinstance(f, Parr):
                prem = _replace(seq, i, f.left, f.right)
                d, df = self.sub(prem, store, depth)
                return (_node("par", seq, (d,), st, principal=[i]) if d else None), df
            if isinstance(f, With):
                subs, definite = [], True
                for item in f.items:
                    d, df = self.sub(_replace(seq, i, item), store, depth)
                    if d is None:
                        return None, df
                    subs.append(d)
                return _node("with", seq, subs, st, principal=[i]), True
            if isinstance(f, Forall):
                rest = _minus(seq, {i})
                y = f.var
                if y in fm.fv_all(rest) or y in smap:
                    y = self._fresh_for(seq, store)
                d, df = self.sub(_replace(seq, i, fm.subst(f.body, y, f.var)), store, depth)
                return (_node("forall", seq, (d,), st, principal=[i], eigen=y) if d else None), df
        definite = True
        for d in self._alternatives(seq, store, smap, st, depth):
            if d is None:
                definite = False
                continue
            return d, True
        return None, definite

    def sub(self, seq, store, depth):
        if not fm.is_clean(seq, dict(store)):
            return None, True
        return self.prove(tuple(seq), store, depth - 1)

    def _fresh_for(self, seq, store):
        names = fm.fv_all(seq) | {x for x, _ in store}
        for f in seq:
            names |= {v for _, v in fm.binders(f)}
        k = 0
        while f"{self.fresh}{k}" in names:
            k += 1
        return f"{self.fresh}{k}"

    def _alternatives(self, seq, store, smap, st, depth):
        """Yield derivations, or None for a branch cut short by the depth."""
        n = len(seq)
        for i, f in enumerate(seq):
            rest = _minus(seq, {i})
            if isinstance(f, Oplus):
                for k, item in enumerate(f.items):
                    r = yield from self._one(seq, i, item, store, depth, "oplus", st, branch=k)
                    if r:
                        return
            elif isinstance(f, Exists):
                ws = sorted((fm.fv_all(seq) | set(smap)) - self.avoid)
                ws.append(self._fresh_for(seq, store))
                for w in ws:
                    r = yield from self._one(seq, i, fm.subst(f.body, w, f.var), store, depth,
                                             "exists", st, witness=w)
                    if r:
                        return
            elif isinstance(f, (New, Ya)):
                kind = "new" if isinstance(f, New) else "ya"
                x = f.var
                if x not in fm.fv_all(rest) and x not in smap:
                    r = yield from self._one(seq, i, f.body, store, depth, f"{kind}_unit", st)
                    if r:
                        return
                    loaded = store | {(x, "nu" if kind == "new" else "ya")}
                    r = yield from self._one(seq, i, f.body, loaded, depth, f"{kind}_load", st)
                    if r:
                        return
                want = "ya" if kind == "new" else "nu"
                for y, tag in sorted(store):
                    if tag != want:
                        continue
                    popped = store - {(y, tag)}
                    r = yield from self._one(seq, i, fm.subst(f.body, y, x), popped, depth,
                                             f"{'ya' if kind == 'new' else 'new'}_pop", st, name=y)
                    if r:
                        return
        # binary rules
        for i, j in itertools.combinations(range(n), 2):
            f, g = seq[i], seq[j]
            if isinstance(f, Prec) and isinstance(g, Prec):
                ctx = _minus(seq, {i, j})
                for g1, g2, s1, s2 in _splits(ctx, store):
                    r = yield from self._two(seq, st, depth, "prec", [i, j],
                                             g1 + [f.left, g.left], s1, g2 + [f.right, g.right], s2)
                    if r:
                        return
        for i, f in enumerate(seq):
            if isinstance(f, (Prec, Tensor)):
                ctx = _minus(seq, {i})
                rule = "prec_unit" if isinstance(f, Prec) else "tens"
                for g1, g2, s1, s2 in _splits(ctx, store):
                    r = yield from self._two(seq, st, depth, rule, [i], g1 + [f.left], s1,
                                             g2 + [f.right], s2)
                    if r:
                        return
        if n >= 2:
            head, tail = [seq[0]], list(seq[1:])
            for g1, g2, s1, s2 in _splits(tail, store):
                if not g2:
                    continue
                r = yield from self._two(seq, st, depth, "mix", None, head + g1, s1, g2, s2)
                if r:
                    return

    def _one(self, seq, i, repl, store, depth, rule, st, **meta):
        prem = _replace(seq, i, repl)
        d, df = self.sub(prem, store, depth)
        if d is not None:
            yield _node(rule, seq, (d,), st, principal=[i], **meta)
            return True
        if not df:
            yield None
        return False

    def _two(self, seq, st, depth, rule, principal, g1, s1, g2, s2):
        d1, df1 = self.sub(g1, s1, depth)
        if d1 is None:
            if not df1:
                yield None
            return False
        d2, df2 = self.sub(g2, s2, depth)
        if d2 is None:
            if not df2:
                yield None
            return False
        meta = {} if principal is None else {"principal": principal}
        yield _node(rule, seq, (d1, d2), st, **meta)
        return True


def _replace(seq, i, *new):
    return tuple(seq[:i]) + tuple(new) + tuple(seq[i + 1:])


def _splits(ctx, store):
    """All (context, store) bipartitions, de-duplicated on multisets."""
    seen = set()
    idx = range(len(ctx))
    stores = sorted(store)
    if stores:
        store_splits = []
        for mask in range(2 ** len(stores)):
            a = frozenset(s for b, s in enumerate(stores) if mask >> b & 1)
            store_splits.append((a, frozenset(stores) - a))
    else:
        store_splits = [(frozenset(), frozenset())]
    for r in range(len(ctx) + 1):
        for pick in itertools.combinations(idx, r):
            g1 = [ctx[k] for k in pick]
            g2 = [ctx[k] for k in idx if k not in pick]
            key = tuple(sorted(map(_fkey, g1)))
            if key in seen:
                continue
            seen.add(key)
            for s1, s2 in store_splits:
                yield g1, g2, s1, s2


def _reindex(d, seq):
    """Principal indices of ``d`` re-pointed into a permuted sequent."""
    meta = dict(d.meta)
    if "principal" not in meta:
        return meta
    old = list(d.conclusion.sequent)
    taken = set()
    new_idx = []
    for i in meta["principal"]:
        f = old[i]
        k = next(k for k, g in enumerate(seq) if g == f and k not in taken)
        taken.add(k)
        new_idx.append(k)
    meta["principal"] = new_idx
    return meta


def prove_bounded(j: Judgement, depth: int = 64, nodes: int = 10 ** 6,
                  avoid=frozenset()) -> Optional[Derivation]:
    """Exhaustive cut-free search.

    Names in ``avoid`` are never used as existential witnesses; encodings
    pass their labels here, since labels and names are different sorts.

    Returns None only when the finite search space is exhausted; raises
    SearchBudgetExceeded when the node budget runs out first.  A search
    cut short by ``depth`` also raises, since its failure is not definite.
    """
    s = _Search(depth, nodes, frozenset(avoid))
    d, definite = s.prove(tuple(j.sequent), frozenset(j.store), depth)
    if d is None and not definite:
        raise SearchBudgetExceeded(f"depth limit {depth} reached")
    return d


def provable(*forms, depth=64, nodes=10 ** 6) -> bool:
    return prove_bounded(Judgement((), tuple(forms)), depth, nodes) is not None


# ---------------------------------------------------------------- block prover

@dataclass
class EncodingVerdict:
    deadlock_free: bool
    derivation: Optional[Derivation] = None
    witness: Optional[pr.Process] = None
    residual: tuple = ()
    blocks: list = field(default_factory=list)


def prove_encoding(p: pr.Process, check_race: bool = True) -> EncodingVerdict:
    """Decide deadlock-freedom of a race-free process by block-wise search."""
    from .semantics import oracle_race_free
    if not pr.is_unambiguous(p):
        p = pr.make_unambiguous(p)
    if check_race:
        w = oracle_race_free(p)
        if w is not None:
            raise RaceError(w)
    blocks = []
    res = _blocks((fm.encode(p),), [], blocks)
    if isinstance(res, Derivation):
        return EncodingVerdict(True, res, blocks=blocks)
    residual, stripped = res
    parts = [fm.decode(f) for f in residual if not isinstance(f, Unit)]
    body = pr.par_of(parts)
    names = [x for x in stripped if x in pr.free_names(body)]
    witness = pr.precongruence_normalize(pr.res_of(names, body))
    return EncodingVerdict(False, None, witness, tuple(residual), blocks)


def _blocks(seq, stripped, log):
    for i, f in enumerate(seq):
        if isinstance(f, Parr):
            sub = _blocks(_replace(seq, i, f.left, f.right), stripped, log)
            return _wrap(sub, "par", seq, principal=[i])
        if isinstance(f, New):
            sub = _blocks(_replace(seq, i, f.body), stripped + [f.var], log)
            return _wrap(sub, "new_unit", seq, principal=[i])
    if all(isinstance(f, Unit) for f in seq):
        return _units(seq)
    for i, f in enumerate(seq):
        for j, g in enumerate(seq):
            if i == j:
                continue
            if _send(f) and _recv(g) and _send(f).x == _recv(g).x:
                return _com_block(seq, i, j, stripped, log)
            if _lsend(f) and _lrecv(g) and _lsend(f) == _lrecv(g):
                return _sel_block(seq, i, j, stripped, log)
    return list(seq), stripped


def _send(f):
    return f.left if isinstance(f, Prec) and isinstance(f.left, SendAtom) else None


def _recv(f):
    if (isinstance(f, Exists) and isinstance(f.body, Prec) and isinstance(f.body.left, RecvAtom)
            and f.body.left.y == f.var):
        return f.body.left
    return None


def _lsend(f):
    if isinstance(f, With) and all(isinstance(b, Prec) and isinstance(b.left, SendAtom) for b in f.items):
        return f.items[0].left.x
    return None


def _lrecv(f):
    if isinstance(f, Oplus) and all(isinstance(b, Prec) and isinstance(b.left, RecvAtom) for b in f.items):
        return f.items[0].left.x
    return None


def _wrap(sub, rule, seq, **meta):
    if isinstance(sub, Derivation):
        return _node(rule, seq, (sub,), **meta)
    return sub


def _units(seq):
    if len(seq) == 1:
        return _node("unit", seq)
    return _node("mix", seq, (_node("unit", seq[:1]), _units(seq[1:])))


def _com_block(seq, i, j, stripped, log):
    f, g = seq[i], seq[j]
    atom = f.left
    y = atom.y
    opened = fm.subst(g.body, y, g.var)
    mid = _replace(seq, j, opened)
    log.append(f"Com {atom.x}!{y}")
    rest = list(mid)
    rest[i] = f.right
    rest[j] = opened.right
    sub = _blocks(tuple(rest), stripped, log)
    if not isinstance(sub, Derivation):
        return sub
    ax = _node("ax", (atom, opened.left))
    prec = _node("prec", mid, (ax, sub), principal=[i, j])
    return _node("exists", seq, (prec,), principal=[j], witness=y)


def _sel_block(seq, i, j, stripped, log):
    w, o = seq[i], seq[j]
    recv_labels = [b.left.y for b in o.items]
    branches = []
    for item in w.items:
        label = item.left.y
        mid = _replace(seq, i, item)
        log.append(f"Sel {item.left.x}:{label}")
        if label not in recv_labels:
            return list(mid), stripped
        k = recv_labels.index(label)
        chosen = o.items[k]
        mid2 = _replace(mid, j, chosen)
        rest = list(mid2)
        rest[i] = item.right
        rest[j] = chosen.right
        sub = _blocks(tuple(rest), stripped, log)
        if not isinstance(sub, Derivation):
            return sub
        ax = _node("ax", (item.left, chosen.left))
        prec = _node("prec", mid2, (ax, sub), principal=[i, j])
        branches.append(_node("oplus", mid, (prec,), principal=[j], branch=k))
    return _node("with", seq, branches, principal=[i])


def prove_progress(p: pr.Process, depth: int = 64, nodes: int = 10 ** 6, check_race: bool = True):
    """(has progress, derivation or None) via the unitized encoding."""
    from .semantics import oracle_race_free
    if not pr.is_unambiguous(p):
        p = pr.make_unambiguous(p)
    if fm.has_private_mobility(p):
        raise PrivateMobilityError(
            "the progress characterization holds only for processes without private "
            "mobility (no restricted name is ever sent)")
    if check_race:
        w = oracle_race_free(p)
        if w is not None:
            raise RaceError(w)
    f = fm.unitize(fm.encode(p), pr.free_names(p))
    d = prove_bounded(Judgement((), (f,)), depth, nodes, avoid=pr.labels_of(p))
    return d is not None, d
