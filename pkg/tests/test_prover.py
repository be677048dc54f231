import pytest
from hypothesis import given, settings

from pilot import corpus as co
from pilot import formula as fm
from pilot import process as pr
from pilot import prover as pv
from pilot.formula import UNIT, Exists, New, Prec, RecvAtom, SendAtom, Ya
from pilot.prover import Judgement, _node
from pilot.syntax import parse_formula, parse_process

from .strategies import formulas, processes


def P(text):
    return pr.make_unambiguous(parse_process(text))


def valid(d):
    return not pv.check_derivation(d)


# check_rule

def com_block():
    """The Com block for x!y.0 | x?z.0."""
    send = Prec(SendAtom("x", "y"), UNIT)
    recv = Exists("z", Prec(RecvAtom("x", "z"), UNIT))
    opened = Prec(RecvAtom("x", "y"), UNIT)
    ax = _node("ax", (SendAtom("x", "y"), RecvAtom("x", "y")))
    cont = _node("mix", (UNIT, UNIT), (_node("unit", (UNIT,)), _node("unit", (UNIT,))))
    prec = _node("prec", (send, opened), (ax, cont), principal=[0, 1])
    ex = _node("exists", (send, recv), (prec,), principal=[1], witness="y")
    return _node("par", (fm.Parr(send, recv),), (ex,), principal=[0])


def test_com_block_valid():
    assert valid(com_block())


def test_ax_needs_duals():
    bad = _node("ax", (SendAtom("x", "y"), SendAtom("x", "y")))
    c = pv.check_rule(bad)
    assert not c and "dual" in c.message


def test_load_then_pop():
    a = New("a", Prec(SendAtom("x", "a"), UNIT))
    na = fm.negate(a)
    body = Prec(SendAtom("x", "a"), UNIT)
    leaf = pv.prove_identity(body)
    pop = _node("new_pop", (na, body), (leaf,), {"a": "nu"}, principal=[0], name="a")
    load = _node("new_load", (na, a), (pop,), principal=[1])
    assert valid(load)


def test_pop_on_empty_store_fails():
    a = Ya("a", Prec(RecvAtom("x", "a"), UNIT))
    pop = _node("new_pop", (a, Prec(SendAtom("x", "a"), UNIT)),
                (pv.prove_identity(Prec(SendAtom("x", "a"), UNIT)),), principal=[0], name="a")
    c = pv.check_rule(pop)
    assert not c and "store" in c.message


@pytest.mark.parametrize("rule, forms, premises, meta, needle", [
    ("unit", (UNIT, UNIT), (), {}, "unit"),
    ("par", (UNIT,), (_node("unit", (UNIT,)),), {"principal": [0]}, "par"),
    ("frob", (UNIT,), (), {}, "unknown"),
    ("oplus", (fm.Oplus((UNIT,)),), (_node("unit", (UNIT,)),), {"principal": [0], "branch": 3}, "picks"),
    ("mix", (UNIT,), (_node("unit", (UNIT,)), _node("unit", (UNIT,))), {}, "partition"),
    ("exists", (Exists("z", RecvAtom("x", "z")),), (), {"principal": [0], "witness": "y"}, "premises"),
])
def test_check_rule_diagnostics(rule, forms, premises, meta, needle):
    c = pv.check_rule(_node(rule, forms, premises, **meta))
    assert not c and needle in c.message


def test_eigenvariable_side_condition():
    f = fm.Forall("u", RecvAtom("x", "u"))
    inner = _node("ax", (SendAtom("x", "u"), RecvAtom("x", "u")))
    d = _node("forall", (SendAtom("x", "u"), f), (inner,), principal=[1])
    c = pv.check_rule(d)
    assert not c and "free" in c.message


def test_store_must_be_partitioned():
    u = _node("unit", (UNIT,), store={"a": "nu"})
    d = _node("mix", (UNIT, UNIT), (u, u), store={"a": "nu"})
    assert "both" in pv.check_rule(d).message


def test_cut_is_checkable():
    a = SendAtom("x", "y")
    left = _node("ax", (fm.negate(a), a))
    right = _node("ax", (fm.negate(a), a))
    d = _node("cut", (fm.negate(a), a), (left, right), cut="x?y")
    assert pv.check_rule(d)


# identity

@pytest.mark.parametrize("text, rules", [
    ("x!y", {"ax"}),
    ("1", {"mix", "unit"}),
    ("new x.(x!y seq 1)", {"new_load", "new_pop", "prec", "ax", "mix", "unit"}),
    ("ya x.(x!y)", {"new_load", "new_pop", "ax"}),
    ("all u.(u?u)", {"forall", "exists", "ax"}),
])
def test_prove_identity(text, rules):
    d = pv.prove_identity(parse_formula(text))
    assert valid(d)
    assert d.rules_used() == rules


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_identity_always_checks(f):
    if fm.is_clean([f]):
        assert valid(pv.prove_identity(f))


# bounded search

def test_unit_one_rule():
    d = pv.prove_bounded(Judgement.of(UNIT))
    assert d.rule == "unit" and d.size() == 1


@pytest.mark.parametrize("name, left, right, kind", co.feq_instances()[:12])
def test_feq_sample(name, left, right, kind):
    goals = [fm.lolli(left, right)] + ([fm.lolli(right, left)] if kind == "equiv" else [])
    for g in goals:
        d = pv.prove_bounded(Judgement.of(g))
        assert d is not None and valid(d)


def test_nominal_self_implication():
    f = fm.encode(P("new a.(x!a.0)"))
    assert pv.provable(fm.lolli(f, f))


def test_restriction_literal_unprovable():
    f = parse_formula(co.RESTRICTION_LITERAL)
    assert pv.prove_bounded(Judgement.of(f)) is None


def test_budget_is_distinct_from_failure():
    f = fm.encode(P(co.EQ1))
    with pytest.raises(pv.SearchBudgetExceeded):
        pv.prove_bounded(Judgement.of(f), nodes=3)


def test_unprovable_atom():
    assert pv.prove_bounded(Judgement.of(SendAtom("x", "y"))) is None


# block prover

@pytest.mark.parametrize("text", [co.EQ1, "new x.new y.(x!a.y?b.0 | x?a.y!b.0)", "0 | 0", "0"])
def test_prove_encoding_positive(text):
    v = pv.prove_encoding(P(text))
    assert v.deadlock_free and valid(v.derivation)
    assert v.derivation.rules_used() <= pv.ENCODING_FRAGMENT
    assert v.derivation.stores_empty()


def test_nil_par_nil_shape():
    d = pv.prove_encoding(P("0 | 0")).derivation
    assert [n.rule for n in d.nodes()] == ["par", "mix", "unit", "unit"]


def test_remark_stuck_residual():
    v = pv.prove_encoding(P(co.REMARK_DEADLOCK))
    assert not v.deadlock_free
    assert pr.struct_equiv(v.witness, parse_process("y!c.0"))
    assert any(SendAtom("y", "c") in fm.atom_multiset([f]) for f in v.residual)


def test_prove_encoding_refuses_race():
    with pytest.raises(pv.RaceError, match="race-free"):
        pv.prove_encoding(P("x!a.0 | x?b.0 | x?c.0"))


@settings(max_examples=80, deadline=None)
@given(processes(max_leaves=5))
def test_prove_encoding_agrees_with_oracle(p):
    from pilot.semantics import oracle_deadlock_free, oracle_race_free
    p = pr.make_unambiguous(p)
    if oracle_race_free(p) is not None:
        return
    v = pv.prove_encoding(p, check_race=False)
    assert v.deadlock_free == oracle_deadlock_free(p, with_tree=False).deadlock_free
    if v.derivation is not None:
        assert valid(v.derivation)


# progress

@pytest.mark.parametrize("text, expected", [
    ("y!c.0", True), ("0", True), (co.EQ1, True), ("new x.(x!a.0)", False),
])
def test_prove_progress(text, expected):
    ok, d = pv.prove_progress(P(text))
    assert ok is expected
    if ok:
        assert valid(d)


def test_progress_refuses_private_mobility():
    with pytest.raises(pv.PrivateMobilityError, match="private"):
        pv.prove_progress(P("new a.(b!a.a!c.0)"))
