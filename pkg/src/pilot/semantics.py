"""Reduction semantics with oriented structural pre-rewrites, entropy
bookkeeping, execution trees and the exhaustive semantic oracles."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import process as pr
from .process import LabelRecv, LabelSend, Nil, Par, Recv, Res, Send


@dataclass(frozen=True)
class ReductionStep:
    source: pr.Process
    target: pr.Process
    core_rule: str
    core_redex: pr.Process
    core_reductum: pr.Process
    entropy: int

    def trace_line(self) -> str:
        return f"entropy={self.entropy} rule={self.core_rule} redex={self.core_redex}"


@dataclass
class ExecutionTree:
    root: pr.Process
    children: list = field(default_factory=list)

    def leaves(self):
        if not self.children:
            yield self.root
        for _, t in self.children:
            yield from t.leaves()

    def size(self) -> int:
        return 1 + sum(t.size() for _, t in self.children)


DEADLOCK_FREE = "DeadlockFree"
DEADLOCKED = "Deadlocked"
RACE_FOUND = "RaceFound"


@dataclass
class Verdict:
    status: str
    witness: Optional[object] = None
    trace: list = field(default_factory=list)
    tree: Optional[ExecutionTree] = None

    @property
    def deadlock_free(self) -> bool:
        return self.status == DEADLOCK_FREE


# ---------------------------------------------------------------- steps

def cores_at(p: pr.Process) -> list:
    """Core rules applicable with ``p`` itself as the redex."""
    out = []
    if isinstance(p, Par):
        a, b = p.left, p.right
        if isinstance(a, Send) and isinstance(b, Recv) and a.subject == b.subject:
            out.append(("Com", Par(a.cont, pr.substitute(b.cont, a.obj, b.binder))))
        elif (isinstance(a, LabelSend) and len(a.branches) == 1 and isinstance(b, LabelRecv)
              and a.subject == b.subject and a.branches[0][0] in b.labels()):
            l, cont = a.branches[0]
            out.append(("Label", Par(cont, b.branch(l))))
    elif isinstance(p, LabelSend) and len(p.branches) >= 2:
        for br in p.branches:
            out.append(("Choice", LabelSend(p.subject, (br,))))
    return out


def _direct(p, mult, wrap, path, acc):
    for rule, red in cores_at(p):
        acc.append((path, rule, p, red, mult, wrap(red)))
    if isinstance(p, Par):
        _direct(p.left, mult * 2, lambda t, w=wrap, r=p.right: w(Par(t, r)), path + "L", acc)
    elif isinstance(p, Res):
        _direct(p.body, mult * 2, lambda t, w=wrap, x=p.binder: w(Res(x, t)), path + "B", acc)


def _shallow(p, path, bs, cs):
    if isinstance(p, Nil):
        return
    if isinstance(p, Par):
        _shallow(p.left, path + "L", bs, cs)
        _shallow(p.right, path + "R", bs, cs)
    elif isinstance(p, Res):
        bs.append(p.binder)
        _shallow(p.body, path + "B", bs, cs)
    else:
        cs.append((path, p))


def enumerate_steps(p: pr.Process) -> list:
    """All one-step reductions of ``p``, one step per core and choice."""
    direct = []
    _direct(p, 1, lambda t: t, "", direct)
    steps = [ReductionStep(p, tgt, rule, redex, red, ent) for _, rule, redex, red, ent, tgt in direct]
    covered = set()
    for path, rule, redex, *_ in direct:
        covered.add((rule, path + "L", path + "R") if rule != "Choice" else (rule, path))
    bs, cs = [], []
    _shallow(p, "", bs, cs)
    used = pr.free_names(pr.par_of(c for _, c in cs))
    bs = [x for x in bs if x in used]
    mult = 3 * 2 ** len(bs)
    for i, (pi, a) in enumerate(cs):
        if isinstance(a, LabelSend) and len(a.branches) >= 2 and ("Choice", pi) not in covered:
            rest = [c for j, (_, c) in enumerate(cs) if j != i]
            for rule, red in cores_at(a):
                tgt = pr.res_of(bs, pr.par_of([red] + rest))
                steps.append(ReductionStep(p, tgt, rule, a, red, mult * 2 ** len(rest)))
        for j, (pj, b) in enumerate(cs):
            if i == j:
                continue
            pair = Par(a, b)
            found = cores_at(pair)
            if not found or found[0][0] == "Choice":
                continue
            rule, red = found[0]
            if (rule, pi, pj) in covered:
                continue
            rest = [c for k, (_, c) in enumerate(cs) if k not in (i, j)]
            tgt = pr.res_of(bs, pr.par_of([red] + rest))
            steps.append(ReductionStep(p, tgt, rule, pair, red, mult * 2 ** len(rest)))
    return steps


def is_stuck(p: pr.Process) -> bool:
    p = pr.make_unambiguous(p)
    return not isinstance(pr.precongruence_normalize(p), Nil) and not enumerate_steps(p)


# ---------------------------------------------------------------- exploration

class StateSpace:
    """Reachable states of a process, de-duplicated up to struct_equiv."""

    def __init__(self, p: pr.Process, limit: int = 200_000):
        start = pr.precongruence_normalize(pr.make_unambiguous(p))
        self.states = []
        self.edges = []
        self.parent = []
        self._buckets = {}
        self._add(start, None)
        queue = deque([0])
        while queue:
            i = queue.popleft()
            out = []
            for st in enumerate_steps(self.states[i]):
                tgt = pr.precongruence_normalize(st.target)
                j = self._find(tgt)
                if j is None:
                    if len(self.states) >= limit:
                        raise RuntimeError(f"state space exceeds {limit} states")
                    j = self._add(tgt, (i, st))
                    queue.append(j)
                out.append((st, j))
            self.edges[i] = out

    def _find(self, q):
        for j in self._buckets.get(pr.shape_key(q), ()):
            if pr._equiv_norm(self.states[j], q):
                return j
        return None

    def _add(self, q, parent):
        j = len(self.states)
        self.states.append(q)
        self.edges.append([])
        self.parent.append(parent)
        self._buckets.setdefault(pr.shape_key(q), []).append(j)
        return j

    def trace(self, j) -> list:
        out = []
        while self.parent[j] is not None:
            i, st = self.parent[j]
            out.append(st)
            j = i
        return out[::-1]

    def is_stuck(self, j) -> bool:
        return not self.edges[j] and not isinstance(self.states[j], Nil)

    def tree(self) -> ExecutionTree:
        """A maximal execution tree; subtrees are shared between equal states."""
        memo = {}

        def build(i):
            if i in memo:
                return memo[i]
            node = ExecutionTree(self.states[i])
            memo[i] = node
            if self.edges[i]:
                first, _ = self.edges[i][0]
                if first.core_rule == "Choice":
                    picked = [(s, j) for s, j in self.edges[i]
                              if s.core_rule == "Choice" and s.core_redex == first.core_redex]
                else:
                    picked = [self.edges[i][0]]
                node.children = [(s, build(j)) for s, j in picked]
            return node

        return build(0)


def oracle_deadlock_free(p: pr.Process, with_tree: bool = True) -> Verdict:
    space = StateSpace(p)
    for j in range(len(space.states)):
        if space.is_stuck(j):
            return Verdict(DEADLOCKED, space.states[j], space.trace(j))
    return Verdict(DEADLOCK_FREE, None, [], space.tree() if with_tree else None)


@dataclass
class RaceWitness:
    pair: tuple
    state: pr.Process
    trace: list

    @property
    def depth(self):
        return len(self.trace)


def oracle_race_free(p: pr.Process) -> Optional[RaceWitness]:
    space = StateSpace(p)
    for j, s in enumerate(space.states):
        w = pr.find_race_shape(s)
        if w is not None:
            return RaceWitness(w, s, space.trace(j))
    return None


# ---------------------------------------------------------------- progress

def _heads(p):
    bs, cs = pr.flatten(p, deep=False)
    bound = pr.bound_names(p)
    return [c for c in cs if c.subject not in bound]


def _duals(head, names, fresh):
    if isinstance(head, Send):
        return [Recv(head.subject, fresh, pr.NIL)]
    if isinstance(head, Recv):
        return [Send(head.subject, o, pr.NIL) for o in sorted(names)]
    if isinstance(head, LabelSend):
        return [LabelRecv(head.subject, tuple((l, pr.NIL) for l in head.labels()))]
    return [LabelSend(head.subject, ((l, pr.NIL),)) for l in head.labels()]


def _mirrors(s, names, supply, limit=8):
    """Sequential partners replaying ``s`` with every prefix dualized."""
    out = []

    def go(t, ren):
        r = lambda n: ren.get(n, n)
        if isinstance(t, Nil):
            yield pr.NIL
        elif isinstance(t, Send):
            w = supply.fresh("w")
            for rest in go(t.cont, {**ren, t.obj: w}):
                yield Recv(r(t.subject), w, rest)
        elif isinstance(t, Recv):
            for o in sorted(names):
                for rest in go(t.cont, {**ren, t.binder: o}):
                    yield Send(r(t.subject), o, rest)
        elif isinstance(t, LabelSend):
            parts = [list(go(q, ren)) for _, q in t.branches]
            for combo in itertools.product(*parts):
                yield LabelRecv(r(t.subject), tuple((l, c) for (l, _), c in zip(t.branches, combo)))
        else:
            for l, q in t.branches:
                for rest in go(q, ren):
                    yield LabelSend(r(t.subject), ((l, rest),))

    for m in go(s, {}):
        out.append(m)
        if len(out) >= limit:
            break
    return out


def oracle_progress(p: pr.Process, max_partners: Optional[int] = None) -> bool:
    """Deadlock-free, or deadlock-free next to a synthesized stuck partner.

    Partners are parallel compositions of single prefixes dual to the
    free-subject prefixes of reachable stuck states, over ``fn(p)``.
    """
    p = pr.make_unambiguous(p)
    if oracle_deadlock_free(p, with_tree=False).deadlock_free:
        return True
    names = pr.free_names(p)
    if max_partners is None:
        max_partners = pr.prefix_count(p)
    reserved = pr.all_names(p)
    fresh = next(f"w{i}" for i in itertools.count() if f"w{i}" not in reserved)
    tried = set()

    def search(parts):
        key = tuple(sorted(map(str, parts)))
        if key in tried:
            return False
        tried.add(key)
        q = pr.par_of(parts)
        if parts and not is_stuck(q):
            return False
        whole = pr.make_unambiguous(Par(p, q))
        space = StateSpace(whole)
        stuck = [space.states[j] for j in range(len(space.states)) if space.is_stuck(j)]
        if parts and not stuck:
            return True
        if len(parts) >= max_partners:
            return False
        for s in stuck:
            for h in _heads(s):
                cands = _duals(h, names, fresh)
                if pr.prefix_count(h) > 1:
                    cands += _mirrors(h, names, pr.NameSupply(0, reserved))
                for d in cands:
                    if search(parts + [d]):
                        return True
        return False

    return search([])
