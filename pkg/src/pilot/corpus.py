"""Golden inputs and exhaustive generators for small processes, networks
and choreographies."""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional

from . import choreography as ch
from . import process as pr

CHANNELS = ("x", "a", "y", "k")
LABELS = ("l", "m", "n")
BINDERS = ("b", "c", "d", "e", "f", "g", "h", "u", "v", "w")


@dataclass(frozen=True)
class GeneratorSpec:
    """Bounds for exhaustive enumeration.

    ``max_prefixes`` bounds the whole process; ``max_total`` is an
    optional tighter cap kept for callers sweeping budgets.
    """
    max_prefixes: int = 0
    max_components: int = 1
    max_restrictions: int = 0
    labels: int = 0
    channels: int = 1
    max_total: Optional[int] = None

    def __post_init__(self):
        for f in ("max_prefixes", "max_components", "max_restrictions", "labels", "channels"):
            if getattr(self, f) < 0:
                raise ValueError(f"{f} must be non-negative")
        if self.channels > len(CHANNELS) or self.labels > len(LABELS):
            raise ValueError("alphabet too large")

    @property
    def budget(self) -> int:
        cap = self.max_prefixes
        return cap if self.max_total is None else min(cap, self.max_total)


# The agreement corpus: at most 3 prefixes in total, up to symmetry.
AGREEMENT = GeneratorSpec(max_prefixes=3, max_components=3, max_restrictions=2,
                          labels=2, channels=2)


def _sequential(n, chans, labels, depth):
    """Sequential terms with exactly ``n`` prefixes; binders are named by depth."""
    return _seq_cached(n, tuple(chans), tuple(labels), depth)


@lru_cache(maxsize=None)
def _seq_cached(n, chans, labels, depth):
    if n == 0:
        return (pr.NIL,)
    out = []
    bound = BINDERS[:depth]
    names = chans + bound
    binder = BINDERS[depth]
    for s in names:
        for o in names:
            out += [pr.Send(s, o, c) for c in _seq_cached(n - 1, chans, labels, depth)]
        out += [pr.Recv(s, binder, c) for c in _seq_cached(n - 1, chans, labels, depth + 1)]
        for k in range(1, len(labels) + 1):
            for ls in itertools.combinations(labels, k):
                for split in _compositions(n - 1, k):
                    parts = [_seq_cached(m, chans, labels, depth) for m in split]
                    for conts in itertools.product(*parts):
                        br = tuple(zip(ls, conts))
                        out.append(pr.LabelSend(s, br))
                        out.append(pr.LabelRecv(s, br))
    return tuple(out)


def _compositions(n, k):
    if k == 1:
        yield (n,)
        return
    for i in range(n + 1):
        for rest in _compositions(n - i, k - 1):
            yield (i,) + rest


def _rename_apart(components, reserved):
    """Give every binder of the composition a distinct name."""
    pool = iter(b for b in BINDERS + tuple(f"b{i}" for i in range(100)) if b not in reserved)
    out = []

    def go(p):
        if isinstance(p, pr.Nil):
            return p
        if isinstance(p, pr.Send):
            return pr.Send(p.subject, p.obj, go(p.cont))
        if isinstance(p, pr.Recv):
            new = next(pool)
            return pr.Recv(p.subject, new, go(pr._subst(p.cont, new, p.binder)))
        return type(p)(p.subject, tuple((l, go(q)) for l, q in p.branches))

    for c in components:
        out.append(go(c))
    return out


def enumerate_processes(spec: GeneratorSpec) -> Iterator[pr.Process]:
    """Flat processes ``new xs.(S1 | ... | Sn)`` within the bounds.

    Components are unordered and non-empty (except the lone ``0``), and
    restrictions range over channels that occur free; so no two emitted
    processes are alpha-equivalent.
    """
    chans = CHANNELS[:spec.channels]
    labels = LABELS[:spec.labels]
    yield pr.NIL
    if spec.max_components == 0:
        return
    groups = {n: sorted(_sequential(n, chans, labels, 0), key=str)
              for n in range(1, spec.max_prefixes + 1)}
    perms = _symmetries(chans, labels)
    for m in range(1, spec.max_components + 1):
        for comps in _multisets(groups, m, spec.budget):
            if not _canonical(comps, perms):
                continue
            comps = _rename_apart(comps, set(chans))
            body = pr.par_of(comps)
            free = [c for c in chans if c in pr.free_names(body)]
            for r in range(0, min(spec.max_restrictions, len(free)) + 1):
                for xs in itertools.combinations(free, r):
                    yield pr.res_of(list(xs), body)


def _multisets(groups, m, budget):
    """Multisets of ``m`` components with prefix sizes summing to at most ``budget``."""
    for sizes in _size_vectors(m, budget, max(groups, default=0)):
        per = []
        for n in sorted(set(sizes)):
            k = sizes.count(n)
            per.append(list(itertools.combinations_with_replacement(groups[n], k)))
        for pick in itertools.product(*per):
            yield [c for part in pick for c in part]


def _size_vectors(m, budget, top):
    """Non-increasing size vectors of length ``m`` with entries in 1..top."""
    if m == 0:
        yield ()
        return
    for first in range(min(top, budget), 0, -1):
        for rest in _size_vectors(m - 1, budget - first, first):
            yield (first,) + rest


def _symmetries(chans, labels):
    out = []
    for cp in itertools.permutations(chans):
        for lp in itertools.permutations(labels):
            if cp != tuple(chans) or lp != tuple(labels):
                out.append((dict(zip(chans, cp)), dict(zip(labels, lp))))
    return out


def _permute(p, cm, lm):
    if isinstance(p, pr.Nil):
        return p
    g = lambda n: cm.get(n, n)
    if isinstance(p, pr.Send):
        return pr.Send(g(p.subject), g(p.obj), _permute(p.cont, cm, lm))
    if isinstance(p, pr.Recv):
        return pr.Recv(g(p.subject), p.binder, _permute(p.cont, cm, lm))
    br = sorted((lm.get(l, l), _permute(q, cm, lm)) for l, q in p.branches)
    return type(p)(g(p.subject), tuple(br))


def _canonical(comps, perms):
    """True when no channel or label permutation gives a smaller multiset."""
    key = sorted(map(str, comps))
    for cm, lm in perms:
        if sorted(str(_permute(c, cm, lm)) for c in comps) < key:
            return False
    return True


def race_free_corpus(spec: GeneratorSpec = AGREEMENT) -> list:
    from .semantics import oracle_race_free
    return [p for p in enumerate_processes(spec) if oracle_race_free(p) is None]


# ---------------------------------------------------------------- choreographies

def enumerate_choreographies(max_actions=3, roles=("p", "q", "r"), channels=("x", "k"),
                             values=("a",), labels=("l", "m"), restrict=True
                             ) -> Iterator[ch.Choreography]:
    """Flat choreographies with at most ``max_actions`` interactions in
    total; a choice with one selectable label may carry a ``0`` garbage
    branch for the other label."""
    for n in range(0, max_actions + 1):
        for c in _chors(n, tuple(roles), tuple(channels), tuple(values), tuple(labels), ()):
            yield c
            if restrict and n:
                used = [k for k in channels if _uses(c, k)]
                for k in used[:1]:
                    yield ch.Restrict(k, c)


def _uses(c, k):
    if isinstance(c, ch.Com):
        return c.k == k or _uses(c.cont, k)
    if isinstance(c, ch.Choice):
        return c.k == k or any(_uses(b, k) for _, b in c.selectable)
    return False


@lru_cache(maxsize=None)
def _chor_cached(n, roles, channels, values, labels, owned):
    return tuple(_chors_exact(n, roles, channels, values, labels, owned))


def _chors(n, roles, channels, values, labels, owned):
    """``owned`` lists (binder, role) pairs in scope; a binder is usable
    only by the role that received it."""
    return _chor_cached(n, roles, channels, values, labels, owned)


def _chors_exact(n, roles, channels, values, labels, owned):
    if n == 0:
        yield ch.END
        return
    binder = BINDERS[len(owned)]
    for p, q in itertools.permutations(roles, 2):
        names = values + tuple(b for b, r in owned if r == p)
        for k in channels:
            for x in names:
                for c in _chors(n - 1, roles, channels, values, labels, owned + ((binder, q),)):
                    yield ch.Com(p, x, q, binder, k, c)
            for c in _chors(n - 1, roles, channels, values, labels, owned):
                yield ch.Choice(p, q, k, ((labels[0], c),))
                if len(labels) > 1:
                    yield ch.Choice(p, q, k, ((labels[0], c),), ((labels[1], pr.NIL),))
            if len(labels) > 1:
                for i in range(n):
                    for c1 in _chors(i, roles, channels, values, labels, owned):
                        for c2 in _chors(n - 1 - i, roles, channels, values, labels, owned):
                            yield ch.Choice(p, q, k, ((labels[0], c1), (labels[1], c2)))


def projectable_choreographies(limit=400, max_actions=3) -> list:
    out = []
    for c in enumerate_choreographies(max_actions):
        if ch.is_projectable(c):
            out.append(c)
            if limit is not None and len(out) >= limit:
                break
    return out


# ---------------------------------------------------------------- endpoints for merge

def endpoint_terms(max_prefixes=2, chans=("x", "k"), labels=("l", "m")) -> list:
    out = []
    for n in range(max_prefixes + 1):
        out += list(_sequential(n, chans, labels, 0))
    return out


# ---------------------------------------------------------------- golden cases

@dataclass(frozen=True)
class GoldenCase:
    name: str
    kind: str          # process | network | choreography | formula
    text: str
    expect: str
    detail: Optional[str] = None


EQ1 = "new x. new y. ( x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0} )"
EQ11 = "new x y. p[x!a.y sel{l: y!b.0}] | q[x?a.y bra{l: y?b.0, m: z!c.0}]"
EQ_CHOREO = "new x. new y. p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }"
APPB_C = ("p -> q : kpq { l1: q.x1 -> r.a : kqr ; q -> r : kqr { l1p: r.y1 -> p.z : kpr ; 0 },"
          " l2: q.x2 -> r.a : kqr ; q -> r : kqr { l2p: r.y1 -> p.z : kpr ; 0 } }")
APPB_C_PRIME = ("p -> q : kpq { l1: q.x1 -> r.a : kqr ; r.y1 -> p.z : kpr ; 0,"
                " l2: q.x2 -> r.a : kqr ; r.y2 -> p.z : kpr ; 0 }")
APPB_NETWORK = ("p[kpq sel{l1: kpr?z.0, l2: kpr?z.0}]"
                " | q[kpq bra{l1: kqr!x1.kqr sel{l1p: 0}, l2: kqr!x2.kqr sel{l2p: 0}}]"
                " | r[kqr?a.kqr bra{l1p: kpr!y1.0, l2p: kpr!y1.0}]")
# extraction keeps the unselected receiver branches as garbage
APPB_EXTRACTED = ("p -> q : kpq { l1: q.x1 -> r.a : kqr ; q -> r : kqr { l1p: r.y1 -> p.z : kpr ; 0"
                  " | l2p: kpr!y1.0 }, l2: q.x2 -> r.a : kqr ; q -> r : kqr"
                  " { l2p: r.y1 -> p.z : kpr ; 0 | l1p: kpr!y1.0 } }")
REMARK_DEADLOCK = "new x.(x!a.0 | x?b.0 | y!c.0)"
RESTRICTION_LITERAL = "(new a.(x!a seq 1)) par (ex a.(x?a seq 1))"


def golden_cases() -> list:
    return [
        GoldenCase("nil", "process", "0", "DeadlockFree"),
        GoldenCase("eq1", "process", EQ1, "DeadlockFree"),
        GoldenCase("eq13", "process", "new x.new y.(x!a.y?b.0 | x?a.y!b.0)", "DeadlockFree"),
        GoldenCase("remark-deadlock", "process", REMARK_DEADLOCK, "Deadlocked", "y!c.0"),
        GoldenCase("remark-stuck-progress", "process", "y!c.0", "Progress"),
        GoldenCase("race-receive", "process", "x!a.0 | x?b.0 | x?c.0", "RaceFound"),
        GoldenCase("race-send", "process", "x!a.0 | x!b.0 | x?c.0", "RaceFound"),
        GoldenCase("private-mobility", "process", "new a.(b!a.a!c.0)", "PrivateMobility"),
        GoldenCase("restriction-literal", "formula", RESTRICTION_LITERAL, "Unprovable"),
        GoldenCase("eq11-network", "network", EQ11, "DeadlockFree"),
        GoldenCase("eq-choreo", "choreography", EQ_CHOREO, "Projects", EQ11),
        GoldenCase("appB-project", "choreography", APPB_C, "Projects", APPB_NETWORK),
        GoldenCase("appB-extract", "network", APPB_NETWORK, "Extracts", APPB_EXTRACTED),
        GoldenCase("appB-unprojectable", "choreography", APPB_C_PRIME, "Unprojectable"),
    ]


def golden(name: str) -> GoldenCase:
    for c in golden_cases():
        if c.name == name:
            return c
    raise KeyError(name)


# ---------------------------------------------------------------- fixtures

FIXTURES = Path(__file__).parent / "fixtures"


def load_manifest(root: Path = FIXTURES) -> list:
    return json.loads((root / "manifest.json").read_text())


def output_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------- formulas

def _formula_atoms():
    from . import formula as fm
    return (fm.SendAtom("x", "y"), fm.RecvAtom("a", "b"))


def enumerate_formulas(max_depth: int, atoms=None, units=True) -> list:
    """Every formula up to ``max_depth`` over the atoms, with binary
    connectives and the four quantifiers (binding a depth-indexed variable,
    so results are clean)."""
    from . import formula as fm
    leaves = list(atoms or _formula_atoms()) + ([fm.UNIT] if units else [])
    levels = [leaves]
    allf = list(leaves)
    for d in range(1, max_depth + 1):
        prev = allf
        new = []
        for a in prev:
            for b in prev:
                if max(fm.depth(a), fm.depth(b)) != d - 1:
                    continue
                new += [fm.Parr(a, b), fm.Tensor(a, b), fm.Prec(a, b),
                        fm.With((a, b)), fm.Oplus((a, b))]
        for a in prev:
            if fm.depth(a) == d - 1:
                v = f"q{d}"
                body = fm.subst(a, v, "y") if "y" in fm.fv(a) else a
                new += [Q(v, body) for Q in (fm.Forall, fm.Exists, fm.New, fm.Ya)]
        levels.append(new)
        allf = allf + new
    return [f for f in allf if fm.is_clean([f], {})]


def sample_formulas(n: int, min_depth: int, max_depth: int, seed: int = 0) -> list:
    """A fixed pseudo-random family of clean formulas with depth in range."""
    import random
    from . import formula as fm
    rng = random.Random(seed)
    atoms = list(_formula_atoms()) + [fm.UNIT]
    counter = itertools.count()

    def gen(d):
        if d == 0:
            return rng.choice(atoms)
        k = rng.randrange(9)
        if k < 5:
            a, b = gen(d - 1), gen(rng.randrange(d))
            if rng.random() < 0.5:
                a, b = b, a
            return [fm.Parr, fm.Tensor, fm.Prec,
                    lambda x, y: fm.With((x, y)), lambda x, y: fm.Oplus((x, y))][k](a, b)
        v = f"q{next(counter)}"
        body = gen(d - 1)
        body = fm.subst(body, v, "y") if "y" in fm.fv(body) else body
        return [fm.Forall, fm.Exists, fm.New, fm.Ya][k - 5](v, body)

    out = []
    while len(out) < n:
        f = gen(rng.randint(min_depth, max_depth))
        if fm.depth(f) >= min_depth and fm.is_clean([f], {}):
            out.append(f)
    return out


def feq_instances() -> list:
    """The standard equivalences instantiated with atoms, n in {1, 2, 3}.

    Entries are (name, left, right, kind) with kind "equiv" or "imp".
    Nominal instances are alpha-renamed apart so each side is clean.
    """
    from . import formula as fm
    A, B, D = fm.SendAtom("x", "y"), fm.RecvAtom("a", "b"), fm.SendAtom("z", "c")
    out = [("par-unit", fm.Parr(A, fm.UNIT), A, "equiv"),
           ("prec-unit", fm.Prec(A, fm.UNIT), A, "equiv"),
           ("par-assoc", fm.Parr(fm.Parr(A, B), D), fm.Parr(A, fm.Parr(B, D)), "equiv"),
           ("par-comm", fm.Parr(A, B), fm.Parr(B, A), "equiv")]
    xy = fm.Parr(fm.SendAtom("u", "v"), fm.RecvAtom("v", "u"))
    out.append(("new-comm", fm.New("u", fm.New("v", xy)), fm.New("v", fm.New("u", xy)), "equiv"))
    out.append(("new-par", fm.New("u", fm.Parr(fm.SendAtom("u", "y"), D)),
                fm.Parr(fm.New("u", fm.SendAtom("u", "y")), D), "equiv"))
    out.append(("new-vacuous", fm.New("u", D), D, "equiv"))
    for n in (1, 2, 3):
        items = [fm.SendAtom("x", f"v{i}") for i in range(n)]
        for perm in itertools.permutations(range(n)):
            tag = "".join(map(str, perm))
            out.append((f"oplus-perm-{n}-{tag}", fm.Oplus(tuple(items)),
                        fm.Oplus(tuple(items[i] for i in perm)), "equiv"))
            out.append((f"with-perm-{n}-{tag}", fm.With(tuple(items)),
                        fm.With(tuple(items[i] for i in perm)), "equiv"))
        sep = [fm.New(f"u{i}", fm.SendAtom(f"u{i}", f"v{i}")) for i in range(n)]
        shared = [fm.SendAtom("u", f"v{i}") for i in range(n)]
        out.append((f"with-new-{n}", fm.With(tuple(sep)), fm.New("u", fm.With(tuple(shared))), "equiv"))
        out.append((f"oplus-new-{n}", fm.Oplus(tuple(sep)), fm.New("u", fm.Oplus(tuple(shared))), "equiv"))
        out.append((f"with-par-{n}", fm.With(tuple(fm.Parr(a, B) for a in items)),
                    fm.Parr(fm.With(tuple(items)), B), "imp"))
    return out


def equivalence_classes() -> list:
    """Lists of pairwise equivalent formulas built from the laws above."""
    from . import formula as fm
    A, B, D = fm.SendAtom("x", "y"), fm.RecvAtom("a", "b"), fm.SendAtom("z", "c")
    P, O, W = fm.Parr, fm.Oplus, fm.With
    u = fm.UNIT
    return [
        [A, P(A, u), fm.Prec(A, u), P(fm.Prec(A, u), u), fm.Prec(P(A, u), u)],
        [P(P(A, B), D), P(A, P(B, D)), P(P(B, A), D), P(D, P(A, B)), P(B, P(D, A))],
        [O((A, B, D)), O((B, A, D)), O((D, B, A)), O((A, D, B))],
        [W((A, B, D)), W((B, D, A)), W((D, A, B)), W((B, A, D))],
        [P(A, B), P(B, A), P(P(A, u), B), P(B, fm.Prec(A, u))],
        [fm.Prec(A, B), fm.Prec(P(A, u), B), fm.Prec(A, P(B, u)), P(fm.Prec(A, B), u)],
    ]


def implication_triples(n: int = 50) -> list:
    out = []
    for cls in equivalence_classes():
        for t in itertools.permutations(cls, 3):
            out.append(t)
    step = max(1, len(out) // n)
    return out[::step][:n]


def small_contexts() -> list:
    """Pairs of alpha-variant one-hole contexts, so that ``C[A] -o C'[B]``
    stays clean when the context binds a variable."""
    from . import formula as fm
    H, E = fm.HOLE, fm.SendAtom("e", "f")

    def shapes(w):
        return [fm.Parr(H, E), fm.Parr(E, H), fm.Prec(H, E), fm.Prec(E, H), fm.Tensor(H, E),
                fm.With((H, E)), fm.Oplus((E, H)), fm.Exists(w, fm.Parr(H, fm.SendAtom(w, "e"))),
                fm.New(w, fm.Prec(fm.SendAtom(w, "e"), H))]

    return [(fm.FormulaContext(a), fm.FormulaContext(b))
            for a, b in zip(shapes("w"), shapes("w2"))]
