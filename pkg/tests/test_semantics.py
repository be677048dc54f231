import pytest
from hypothesis import given, settings

from pilot import corpus as co
from pilot import process as pr
from pilot import semantics as se
from pilot.syntax import parse_process, print_process

from .strategies import processes


def P(text):
    return pr.make_unambiguous(parse_process(text))


@pytest.mark.parametrize("text, rule, entropy", [
    ("x!a.0 | x?y.0", "Com", 1),
    ("(x!a.0 | x?y.0) | r!s.0", "Com", 2),
    ("new a.(b!a.0) | b?c.0", "Com", 6),
    ("x sel{l: 0, m: 0}", "Choice", 1),
    ("x sel{l: 0} | x bra{l: 0, m: 0}", "Label", 1),
    ("new x.(x!a.0 | x?b.0)", "Com", 2),
])
def test_single_step(text, rule, entropy):
    steps = se.enumerate_steps(P(text))
    assert len({s.core_rule for s in steps}) == 1
    st = steps[0]
    assert (st.core_rule, st.entropy) == (rule, entropy)


def test_exentropy_rows():
    assert [s.entropy for s in se.enumerate_steps(P("(x!a.0 | x?y.0) | r!s.0"))] == [2]
    assert [s.entropy for s in se.enumerate_steps(P("new a.(b!a.0) | b?c.0"))] == [6]


def test_choice_alternatives_share_redex():
    steps = se.enumerate_steps(P("x sel{l: a!b.0, m: 0, n: c!d.0}"))
    assert len(steps) == 3
    assert len({s.core_redex for s in steps}) == 1
    assert sorted(print_process(s.target) for s in steps) == ["x sel{l: a!b.0}", "x sel{m: 0}", "x sel{n: c!d.0}"]


def test_nil_has_no_steps():
    assert se.enumerate_steps(pr.NIL) == []


def test_trace_line_format():
    st = se.enumerate_steps(P("x!a.0 | x?b.0"))[0]
    assert st.trace_line() == "entropy=1 rule=Com redex=x!a.0 | x?b.0"


@pytest.mark.parametrize("text, stuck", [
    ("y!c.0", True), ("0 | 0", False), ("x!a.0 | x?b.0", False),
    ("x sel{l: 0} | x bra{m: 0}", True), ("new x.(x?b.0 | x?c.0)", True),
])
def test_is_stuck(text, stuck):
    assert se.is_stuck(P(text)) is stuck


def test_eq1_deadlock_free_with_maximal_tree():
    v = se.oracle_deadlock_free(P(co.EQ1))
    assert v.deadlock_free
    leaves = list(v.tree.leaves())
    assert leaves and all(pr.struct_equiv(l, pr.NIL) for l in leaves)


def test_eq13_deadlock_free():
    assert se.oracle_deadlock_free(P("new x.new y.(x!a.y?b.0 | x?a.y!b.0)")).deadlock_free


def test_remark_deadlock_witness():
    v = se.oracle_deadlock_free(P(co.REMARK_DEADLOCK))
    assert v.status == se.DEADLOCKED
    assert pr.struct_equiv(v.witness, parse_process("y!c.0"))
    assert [s.core_rule for s in v.trace] == ["Com"]


def test_tree_shape_invariants():
    v = se.oracle_deadlock_free(P("x sel{l: y!a.0, m: y!b.0} | x bra{l: y?c.0, m: y?d.0}"))
    assert v.deadlock_free

    def walk(t):
        rules = {st.core_rule for st, _ in t.children}
        assert len(rules) <= 1
        if rules & {"Com", "Label"}:
            assert len(t.children) == 1
        if rules == {"Choice"}:
            assert len({st.core_redex for st, _ in t.children}) == 1
        for _, c in t.children:
            walk(c)
    walk(v.tree)


@pytest.mark.parametrize("text, depth", [
    ("x!a.0 | x?b.0 | x?c.0", 0),
    ("k!k.0 | k?b.(x!a.0 | x!b.0)", 1),
    ("k!k.0 | k?b.b!a.0", None),
    ("y!a.x!a.0 | y?b.x!b.0 | x?c.0", 1),
])
def test_race_witness(text, depth):
    w = se.oracle_race_free(P(text))
    if depth is None:
        assert w is None
    else:
        assert w is not None and w.depth == depth


@pytest.mark.parametrize("text", [co.EQ1, "0", "x!a.0 | x?b.0"])
def test_race_free(text):
    assert se.oracle_race_free(P(text)) is None


@pytest.mark.parametrize("text, expected", [
    ("y!c.0", True),
    ("new a.(b!a.a!c.0)", True),
    ("0", True),
    ("new x.(x!a.0)", False),
    ("new x.(x!a.0 | x?b.0) | y?c.0", True),
    ("new y.(x?a.y!a.0)", False),
])
def test_oracle_progress(text, expected):
    assert se.oracle_progress(P(text)) is expected


def test_entropy_doubles_under_par():
    base = P("x!a.0 | x?b.0")
    inner = se.enumerate_steps(base)[0].entropy
    outer = se.enumerate_steps(pr.Par(base, parse_process("r!s.0")))[0].entropy
    assert outer == 2 * inner


def _replay(st):
    q = pr.precongruence_normalize(st.source)
    binders = []
    while isinstance(q, pr.Res):
        binders.append(q.binder)
        q = q.body
    rest = list(pr.components(q))
    for c in pr.components(st.core_redex):
        rest.remove(c)
    return pr.res_of(binders, pr.par_of(rest + [st.core_reductum]))


@pytest.mark.parametrize("text", [
    "new a.(b!a.a!c.0) | b?d.d?e.0", co.EQ1, "x sel{l: 0, m: y!a.0} | x bra{l: 0, m: y?b.0} | y?c.0",
])
def test_targets_replay(text):
    todo = [P(text)]
    while todo:
        for st in se.enumerate_steps(todo.pop()):
            assert pr.struct_equiv(_replay(st), st.target)
            todo.append(st.target)


@settings(max_examples=60, deadline=None)
@given(processes(max_leaves=4))
def test_steps_decrease_size(p):
    p = pr.make_unambiguous(p)
    size = lambda q: sum(1 for _ in pr.subterms(pr.precongruence_normalize(q)))
    for st in se.enumerate_steps(p):
        assert size(st.target) < size(p)
        assert st.entropy >= 1


def _partners(tree, seen, out):
    for st, child in tree.children:
        if st.core_rule == "Com":
            a, b = pr.components(st.core_redex)
            out.setdefault(str(a), set()).add(str(b))
        _partners(child, seen, out)


def test_race_free_determinism():
    # every send meets the same receive in every branch
    p = P("x sel{l: y!a.0, m: y!a.0} | x bra{l: y?b.0, m: y?c.0} | k!k.0 | k?d.0")
    assert se.oracle_race_free(p) is None
    out = {}
    _partners(se.oracle_deadlock_free(p).tree, set(), out)
    assert all(len(v) == 1 for k, v in out.items() if k.startswith("k!"))
