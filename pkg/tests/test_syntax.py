import json

import pytest
from hypothesis import given, settings

from pilot import choreography as ch
from pilot import corpus as co
from pilot import formula as fm
from pilot import process as pr
from pilot import syntax as sx
from pilot.formula import Exists, Parr, Prec, RecvAtom, SendAtom, Unit
from pilot.process import NIL, LabelRecv, LabelSend, Par, Recv, Res, Send

from .strategies import formulas, processes


def test_nil():
    assert sx.parse_process("0") == NIL
    assert sx.print_process(NIL) == "0"


def test_intro_process_shape():
    p = sx.parse_process(co.EQ1)
    assert p == Res("x", Res("y", Par(
        Send("x", "a", LabelSend("y", (("l", Send("y", "b", NIL)),))),
        Recv("x", "a", LabelRecv("y", (("l", Recv("y", "b", NIL)), ("m", Send("z", "c", NIL))))))))


def test_parallel_is_left_nested():
    p = sx.parse_process("x!a.0 | x?b.0 | x?c.0")
    assert p == Par(Par(Send("x", "a", NIL), Recv("x", "b", NIL)), Recv("x", "c", NIL))
    assert len(pr.components(p)) == 3


@pytest.mark.parametrize("text, expected", [
    ("((x!y.0))", "x!y.0"),
    ("(x!y.0 | 0)", "x!y.0 | 0"),
    ("new x, y.x!y.0", "new x, y.(x!y.0)"),
    ("x sel{l: 0}", "x sel{l: 0}"),
])
def test_parens_not_recorded(text, expected):
    assert sx.print_process(sx.parse_process(text)) == expected


def test_new_extends_right():
    p = sx.parse_process("new x. x!a.0 | x?b.0")
    assert isinstance(p, Res) and isinstance(p.body, Par)


def test_new_with_group_binds_group_only():
    p = sx.parse_process("new a.(b!a.0) | b?c.0")
    assert isinstance(p, Par) and isinstance(p.left, Res)


@pytest.mark.parametrize("text", [
    "x!.0", "x!a", "x sel{}", "x sel{l: 0, l: 0}", "x bra{l: 0, m: 0, l: 0}",
    "(x!a.0", "x!a.0 |", "new .0", "x?a.0 )",
])
def test_process_errors(text):
    with pytest.raises(sx.ParseError) as e:
        sx.parse_process(text)
    assert e.value.expected
    assert e.value.span.line >= 1 and e.value.span.column >= 1


def test_error_span_points_at_token():
    with pytest.raises(sx.ParseError) as e:
        sx.parse_process("x!a.0 |\n  ?", file="f.pi")
    assert (e.value.span.file, e.value.span.line, e.value.span.column) == ("f.pi", 2, 3)
    assert e.value.found == "?"


def test_span_rejects_zero():
    with pytest.raises(ValueError):
        sx.SourceSpan("f", 0, 1)


# formulas

def test_formula_unit():
    assert sx.parse_formula("1") == Unit()


def test_formula_matches_encoding():
    f = sx.parse_formula("(x!y seq 1) par ex z.(x?z seq 1)")
    assert f == Parr(Prec(SendAtom("x", "y"), Unit()), Exists("z", Prec(RecvAtom("x", "z"), Unit())))
    assert f == fm.encode(sx.parse_process("x!y.0 | x?z.0"))


def test_formula_nominal():
    f = sx.parse_formula("new a.(x!a seq 1)")
    assert f == fm.New("a", Prec(SendAtom("x", "a"), Unit()))


def test_nary_order_kept():
    f = sx.parse_formula("oplus{x!a, 1, x?b}")
    assert f.items == (SendAtom("x", "a"), Unit(), RecvAtom("x", "b"))


@pytest.mark.parametrize("text", ["oplus{}", "with{}", "x!y par", "(1 seq 1", "1 seq 1 seq 1"])
def test_formula_errors(text):
    with pytest.raises(sx.ParseError):
        sx.parse_formula(text)


# choreographies

def test_choreography_end():
    assert sx.parse_choreography("0") == ch.END


def test_example_choreography():
    c = sx.parse_choreography("p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }")
    assert c == ch.Com("p", "a", "q", "a", "x", ch.Choice(
        "p", "q", "y", (("l", ch.Com("p", "b", "q", "b", "y", ch.END)),),
        (("m", Send("z", "c", NIL)),)))


def test_restricted_choreography():
    c = sx.parse_choreography("new x. p.a -> q.b : x ; 0")
    assert c == ch.Restrict("x", ch.Com("p", "a", "q", "b", "x", ch.END))


@pytest.mark.parametrize("text", [
    "p -> q : k { l: 0 | m: x!a.0 | y?b.0 }",
    "p -> q : k { l: 0 | l: x!a.0 }",
    "p.a -> q.b : x",
    "p -> q : k { }",
])
def test_choreography_errors(text):
    with pytest.raises(sx.ParseError):
        sx.parse_choreography(text)


def test_garbage_must_be_sequential():
    with pytest.raises(sx.ParseError):
        sx.parse_choreography("p -> q : k { l: 0 | m: (x!a.0 | y!b.0) }")


# networks

def test_network():
    n = sx.parse_network(co.EQ11)
    assert n.restricted == ("x", "y")
    assert n.names() == ["p", "q"]
    assert sx.parse_network(sx.print_network(n)) == n


@pytest.mark.parametrize("text, kind", [
    (co.EQ1, "process"), (co.EQ11, "network"), (co.EQ_CHOREO, "choreography"),
    ("p[0]", "network"), ("0", "process"),
])
def test_detect_kind(text, kind):
    assert sx.detect_kind(text) == kind


# round trips

@pytest.mark.parametrize("case", co.golden_cases(), ids=lambda c: c.name)
def test_golden_round_trip(case):
    parse, show = {
        "process": (sx.parse_process, sx.print_process),
        "network": (sx.parse_network, sx.print_network),
        "choreography": (sx.parse_choreography, sx.print_choreography),
        "formula": (sx.parse_formula, sx.print_formula),
    }[case.kind]
    v = parse(case.text)
    assert parse(show(v)) == v


@settings(max_examples=200, deadline=None)
@given(processes())
def test_process_round_trip(p):
    assert sx.parse_process(sx.print_process(p)) == p


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_formula_round_trip(f):
    assert sx.parse_formula(sx.print_formula(f)) == f


def test_choreography_corpus_round_trip():
    for c in co.projectable_choreographies(limit=300):
        assert sx.parse_choreography(sx.print_choreography(c)) == c


def test_annotated_round_trip():
    f = fm.encode(sx.parse_process("x!y.0"))
    assert sx.parse_annotated(sx.print_annotated(f, "p")) == (f, "p")


def test_derivation_json_round_trip():
    from pilot import prover as pv
    d = pv.prove_encoding(sx.parse_process(co.EQ1)).derivation
    text = sx.print_derivation(d)
    doc = json.loads(text)
    assert set(doc) >= {"rule", "store", "sequent", "premises"}
    back = sx.parse_derivation(text)
    assert sx.print_derivation(back) == text
    assert not pv.check_derivation(back)
