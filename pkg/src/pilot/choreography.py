"""Choreographies, endpoint networks, endpoint projection and merge."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import process as pr


class Choreography:
    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import print_choreography
        return print_choreography(self)


@dataclass(frozen=True, repr=False)
class End(Choreography):
    def __repr__(self):
        return "End()"


@dataclass(frozen=True)
class Com(Choreography):
    p: str
    x: str
    q: str
    y: str
    k: str
    cont: Choreography


@dataclass(frozen=True)
class Choice(Choreography):
    p: str
    q: str
    k: str
    selectable: tuple
    garbage: tuple = ()

    def labels(self):
        return [l for l, _ in self.selectable] + [l for l, _ in self.garbage]


@dataclass(frozen=True)
class Restrict(Choreography):
    x: str
    body: Choreography


END = End()


@dataclass(frozen=True)
class ComLabel:
    p: str
    q: str
    k: str

    def names(self):
        return {self.p, self.q, self.k}

    def __str__(self):
        return f"Com({self.p},{self.q},{self.k})"


@dataclass(frozen=True)
class BraLabel:
    p: str
    k: str

    def names(self):
        return {self.p, self.k}

    def __str__(self):
        return f"Bra({self.p},{self.k})"


@dataclass(frozen=True)
class EndpointNetwork:
    restricted: tuple
    components: tuple

    def __post_init__(self):
        names = [n for n, _ in self.components]
        if len(set(names)) != len(names):
            raise ValueError("process names must be distinct")
        for n, body in self.components:
            if not pr.is_sequential(body):
                raise ValueError(f"component {n} is not sequential")

    def names(self):
        return [n for n, _ in self.components]

    def body(self, name):
        return dict(self.components)[name]

    def as_process(self) -> pr.Process:
        return pr.res_of(self.restricted, pr.par_of(b for _, b in self.components))

    def without_nil(self) -> "EndpointNetwork":
        comps = tuple((n, b) for n, b in self.components if not isinstance(b, pr.Nil))
        used = pr.free_names(pr.par_of(b for _, b in comps))
        return EndpointNetwork(tuple(x for x in self.restricted if x in used), comps)

    def replace(self, **bodies) -> "EndpointNetwork":
        return EndpointNetwork(self.restricted,
                               tuple((n, bodies.get(n, b)) for n, b in self.components))

    def __str__(self):
        from .syntax import print_network
        return print_network(self)


class ProjectionError(ValueError):
    """Endpoint projection is undefined for the given choreography."""

    def __init__(self, message, process=None, labels=None):
        super().__init__(message)
        self.process = process
        self.labels = labels


class NotFlatError(ProjectionError):
    pass


# ---------------------------------------------------------------- names

def process_names(c: Choreography) -> list:
    out = []
    def add(n):
        if n not in out:
            out.append(n)
    def go(t):
        if isinstance(t, Com):
            add(t.p); add(t.q); go(t.cont)
        elif isinstance(t, Choice):
            add(t.p); add(t.q)
            for _, b in t.selectable:
                go(b)
        elif isinstance(t, Restrict):
            go(t.body)
    go(c)
    return out


def is_flat(c: Choreography) -> bool:
    while isinstance(c, Restrict):
        c = c.body
    return not _has_restrict(c)


def _has_restrict(c):
    if isinstance(c, Restrict):
        return True
    if isinstance(c, Com):
        return _has_restrict(c.cont)
    if isinstance(c, Choice):
        return any(_has_restrict(b) for _, b in c.selectable)
    return False


def chor_subst(c: Choreography, new: str, old: str) -> Choreography:
    """``c{new/old}`` on channel and value names; binders shadow."""
    if new == old:
        return c
    r = lambda n: new if n == old else n
    if isinstance(c, End):
        return c
    if isinstance(c, Com):
        cont = c.cont if c.y == old else chor_subst(c.cont, new, old)
        return Com(c.p, r(c.x), c.q, c.y, r(c.k), cont)
    if isinstance(c, Choice):
        return Choice(c.p, c.q, r(c.k),
                      tuple((l, chor_subst(b, new, old)) for l, b in c.selectable),
                      tuple((l, pr.substitute(s, new, old)) for l, s in c.garbage))
    if c.x == old:
        return c
    return Restrict(c.x, chor_subst(c.body, new, old))


def chor_alpha_equiv(a: Choreography, b: Choreography) -> bool:
    """Equality up to renaming of communication binders and restrictions."""
    return _chor_alpha(a, b, {}, {}, 0)


def _chor_alpha(a, b, ea, eb, depth):
    if type(a) is not type(b):
        return False
    same = lambda x, y: pr._same(x, y, ea, eb)
    if isinstance(a, End):
        return True
    if isinstance(a, Restrict):
        return _chor_alpha(a.body, b.body, {**ea, a.x: depth}, {**eb, b.x: depth}, depth + 1)
    if isinstance(a, Com):
        return (a.p == b.p and a.q == b.q and same(a.x, b.x) and same(a.k, b.k)
                and _chor_alpha(a.cont, b.cont, {**ea, a.y: depth}, {**eb, b.y: depth}, depth + 1))
    if (a.p, a.q) != (b.p, b.q) or not same(a.k, b.k):
        return False
    if [l for l, _ in a.selectable] != [l for l, _ in b.selectable]:
        return False
    if dict(a.garbage).keys() != dict(b.garbage).keys():
        return False
    gb = dict(b.garbage)
    return (all(_chor_alpha(x, y, ea, eb, depth) for (_, x), (_, y) in zip(a.selectable, b.selectable))
            and all(pr._alpha(s, gb[l], ea, eb, depth) for l, s in a.garbage))


# ---------------------------------------------------------------- semantics

def chor_steps(c: Choreography) -> list:
    """All labeled one-step reductions, de-duplicated."""
    out = []
    for step in _steps(c):
        if step not in out:
            out.append(step)
    return out


def _steps(c):
    if isinstance(c, End):
        return []
    if isinstance(c, Restrict):
        return [(mu, Restrict(c.x, t)) for mu, t in _steps(c.body)]
    if isinstance(c, Com):
        out = [(ComLabel(c.p, c.q, c.k), chor_subst(c.cont, c.x, c.y))]
        busy = {c.p, c.q, c.k}
        for mu, t in _steps(c.cont):
            if not (mu.names() & busy):
                out.append((mu, Com(c.p, c.x, c.q, c.y, c.k, t)))
        return out
    out = []
    if len(c.selectable) >= 2:
        for l, _ in c.selectable:
            out.append((BraLabel(c.p, c.k), narrow(c, l)))
    else:
        out.append((ComLabel(c.p, c.q, c.k), c.selectable[0][1]))
    busy = {c.p, c.q, c.k}
    per_branch = []
    for l, b in c.selectable:
        steps = {}
        for mu, t in _steps(b):
            if not (mu.names() & busy):
                steps.setdefault(mu, []).append(t)
        per_branch.append(steps)
    shared = [mu for mu in per_branch[0] if all(mu in s for s in per_branch[1:])]
    for mu in shared:
        for combo in itertools.product(*(s[mu] for s in per_branch)):
            sel = tuple((l, t) for (l, _), t in zip(c.selectable, combo))
            out.append((mu, Choice(c.p, c.q, c.k, sel, c.garbage)))
    return out


def narrow(c: Choice, label: str) -> Choice:
    """The choice after ``p`` has committed to ``label``.

    Dropped selectable branches become garbage, carrying ``q``'s
    projection so that ``q`` keeps its full branching behaviour.
    """
    keep = tuple((l, b) for l, b in c.selectable if l == label)
    dropped = tuple((l, project(b, c.q)) for l, b in c.selectable if l != label)
    return Choice(c.p, c.q, c.k, keep, dropped + c.garbage)


# ---------------------------------------------------------------- merge

def merge(a, b):
    """Merge of two sequential processes or two networks; None if undefined."""
    if isinstance(a, EndpointNetwork):
        return _merge_networks(a, b)
    return _merge(a, b)


def _merge(a, b):
    if type(a) is not type(b):
        return None
    if isinstance(a, pr.Nil):
        return a
    if isinstance(a, pr.Send):
        if (a.subject, a.obj) != (b.subject, b.obj):
            return None
        m = _merge(a.cont, b.cont)
        return None if m is None else pr.Send(a.subject, a.obj, m)
    if isinstance(a, pr.Recv):
        if a.subject != b.subject:
            return None
        bc = b.cont
        if b.binder != a.binder:
            if a.binder in pr.free_names(bc) or a.binder in pr.bound_names(bc):
                return None
            bc = pr.substitute(bc, a.binder, b.binder)
        m = _merge(a.cont, bc)
        return None if m is None else pr.Recv(a.subject, a.binder, m)
    if isinstance(a, pr.LabelSend):
        if a.subject != b.subject or set(a.labels()) != set(b.labels()):
            return None
        out = []
        for l, p in a.branches:
            m = _merge(p, b.branch(l))
            if m is None:
                return None
            out.append((l, m))
        return pr.LabelSend(a.subject, tuple(out))
    if isinstance(a, pr.LabelRecv):
        if a.subject != b.subject:
            return None
        db = dict(b.branches)
        out = []
        for l, p in a.branches:
            if l in db:
                p = _merge(p, db[l])
                if p is None:
                    return None
            out.append((l, p))
        out += [(l, q) for l, q in b.branches if l not in dict(a.branches)]
        return pr.LabelRecv(a.subject, tuple(out))
    return None


def _merge_networks(a, b):
    if set(a.names()) != set(b.names()) or set(a.restricted) != set(b.restricted):
        return None
    out = []
    for n, p in a.components:
        m = _merge(p, b.body(n))
        if m is None:
            return None
        out.append((n, m))
    return EndpointNetwork(a.restricted, tuple(out))


def merge_order(a, b) -> bool:
    """``a`` is above ``b``: merging ``b`` into ``a`` changes nothing."""
    m = merge(a, b)
    if m is None:
        return False
    if isinstance(a, EndpointNetwork):
        return all(pr.alpha_equiv(p, m.body(n)) for n, p in a.components)
    return pr.alpha_equiv(m, a)


def network_order(a: "EndpointNetwork", b: "EndpointNetwork") -> bool:
    """``merge_order`` up to absorption of terminated components."""
    return merge_order(a.without_nil(), b.without_nil())


# ---------------------------------------------------------------- projection

def project(c: Choreography, r: str) -> pr.Process:
    if isinstance(c, End):
        return pr.NIL
    if isinstance(c, Restrict):
        raise NotFlatError("projection is defined only for flat choreographies")
    if isinstance(c, Com):
        rest = project(c.cont, r)
        if r == c.p:
            return pr.Send(c.k, c.x, rest)
        if r == c.q:
            return pr.Recv(c.k, c.y, rest)
        return rest
    if r == c.p:
        return pr.LabelSend(c.k, tuple((l, project(b, r)) for l, b in c.selectable))
    if r == c.q:
        return pr.LabelRecv(c.k, tuple((l, project(b, r)) for l, b in c.selectable) + c.garbage)
    acc, first = None, None
    for l, b in c.selectable:
        t = project(b, r)
        if acc is None:
            acc, first = t, l
            continue
        m = _merge(acc, t)
        if m is None:
            raise ProjectionError(
                f"merge undefined for process {r} between branches {first} and {l}",
                process=r, labels=(first, l))
        acc = m
    return acc


def epp(c: Choreography) -> EndpointNetwork:
    """Endpoint projection; raises ProjectionError when undefined."""
    restricted = []
    while isinstance(c, Restrict):
        restricted.append(c.x)
        c = c.body
    if _has_restrict(c):
        raise NotFlatError("projection is defined only for flat choreographies")
    names = process_names(c)
    if not names:
        return EndpointNetwork(tuple(restricted), (("p0", pr.NIL),))
    return EndpointNetwork(tuple(restricted), tuple((n, project(c, n)) for n in names))


def is_projectable(c: Choreography) -> bool:
    try:
        epp(c)
    except ProjectionError:
        return False
    return True


# ---------------------------------------------------------------- networks

def network_steps(n: EndpointNetwork) -> list:
    out = []
    comps = n.components
    for (p, a), (q, b) in itertools.permutations(comps, 2):
        if isinstance(a, pr.Send) and isinstance(b, pr.Recv) and a.subject == b.subject:
            step = (ComLabel(p, q, a.subject),
                    n.replace(**{p: a.cont, q: pr.substitute(b.cont, a.obj, b.binder)}))
        elif (isinstance(a, pr.LabelSend) and len(a.branches) == 1
              and isinstance(b, pr.LabelRecv) and a.subject == b.subject
              and a.branches[0][0] in b.labels()):
            l, cont = a.branches[0]
            step = (ComLabel(p, q, a.subject), n.replace(**{p: cont, q: b.branch(l)}))
        else:
            continue
        if step not in out:
            out.append(step)
    for p, a in comps:
        if isinstance(a, pr.LabelSend) and len(a.branches) >= 2:
            for br in a.branches:
                out.append((BraLabel(p, a.subject), n.replace(**{p: pr.LabelSend(a.subject, (br,))})))
    return out


def network_of_process(p: pr.Process, prefix: str = "p") -> EndpointNetwork:
    """Name the components of a flat process ``p1 ... pn`` left to right."""
    bs, cs = pr.flatten(p)
    comps = []
    for i, c in enumerate(cs, 1):
        if not pr.is_sequential(c):
            raise ValueError("process is not flat")
        comps.append((f"{prefix}{i}", c))
    if not comps:
        comps = [(f"{prefix}1", pr.NIL)]
    return EndpointNetwork(tuple(bs), tuple(comps))


def network_equiv(a: EndpointNetwork, b: EndpointNetwork) -> bool:
    """Equality up to terminated components, restriction order and alpha."""
    a, b = a.without_nil(), b.without_nil()
    if set(a.names()) != set(b.names()) or len(a.restricted) != len(b.restricted):
        return False
    for perm in itertools.permutations(b.restricted):
        ren = dict(zip(perm, a.restricted))
        if all(pr.alpha_equiv(a.body(n), pr.rename_free(b.body(n), ren)) for n in a.names()):
            return True
    return False


# ---------------------------------------------------------------- correspondence

@dataclass
class Correspondence:
    ok: bool
    states: int
    problem: Optional[str] = None


def check_epp_correspondence(c: Choreography, limit: int = 1000) -> Correspondence:
    """Exhaustively check completeness and soundness of projection.

    Explores pairs (C, N) with N ⊒ epp(C), starting from (c, epp(c)).
    Completeness: every step of C is matched by epp(C) up to ⊒.
    Soundness: every step of N is matched by some step of C with the same
    label, the targets again related by ⊒.
    """
    start = (c, epp(c))
    seen = {(str(c), str(start[1]))}
    todo = [start]
    while todo:
        cur, net = todo.pop()
        if len(seen) > limit:
            return Correspondence(False, len(seen), f"more than {limit} states")
        csteps = chor_steps(cur)
        proj = epp(cur)
        psteps = network_steps(proj)
        targets = []
        for mu, c2 in csteps:
            try:
                e2 = epp(c2)
            except ProjectionError as e:
                return Correspondence(False, len(seen), f"{c2} is not projectable: {e}")
            targets.append((mu, c2, e2))
            if not any(m == mu and network_order(n2, e2) for m, n2 in psteps):
                return Correspondence(False, len(seen), f"completeness fails at {cur} for {mu}")
        for mu, n2 in network_steps(net):
            match = next(((c2, e2) for m, c2, e2 in targets if m == mu and network_order(n2, e2)), None)
            if match is None:
                return Correspondence(False, len(seen), f"soundness fails at {net} for {mu}")
            key = (str(match[0]), str(n2))
            if key not in seen:
                seen.add(key)
                todo.append((match[0], n2))
    return Correspondence(True, len(seen))
