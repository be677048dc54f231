import pytest

from pilot import choreography as ch
from pilot import chorl as cl
from pilot import corpus as co
from pilot import formula as fm
from pilot import process as pr
from pilot import prover as pv
from pilot.syntax import (parse_choreography, parse_formula, parse_network,
                          print_choreography, print_network)

N = parse_network


def test_annotate_simple():
    j = cl.annotate(N("p[x!y.0] | q[x?y.0]"))
    assert [str(a) for a in j.sequent] == ["[x!y seq 1]p", "[ex y.(x?y seq 1)]q"]


def test_annotate_empty():
    j = cl.annotate(N("p[0]"))
    assert [str(a) for a in j.sequent] == ["[1]p"]


def test_annotate_eq11_matches_eq1_encoding():
    j = cl.annotate(N(co.EQ11))
    eq1 = fm.encode(pr.make_unambiguous(parse_network(co.EQ11).as_process()))
    assert fm.alpha_equal(j.formula, eq1)


def test_annotate_race():
    with pytest.raises(pv.RaceError):
        cl.annotate(N("p[x!a.0] | q[x?b.0] | r[x?c.0]"))


def test_binders_follow_sender():
    n = cl.align_binders(N("p[x!a.0] | q[x?b.b!c.0]"))
    assert print_network(n) == "p[x!a.0] | q[x?a.a!c.0]"
    # renaming is skipped when the sent name is already used by the receiver
    n = cl.align_binders(N("p[x!a.0] | q[x?b.a!b.0]"))
    assert print_network(n) == "p[x!a.0] | q[x?b.a!b.0]"


def test_eq11_derivation_shape():
    d = cl.chorl_prove(N(co.EQ11))
    assert d.rule == "C-flat"
    com = d.premises[0]
    assert com.rule == "C-com"
    sel = com.premises[0]
    assert sel.rule == "C-sel" and sel.meta["L"] == ["l"] and sel.meta["L'"] == ["l", "m"]
    inner = sel.premises[0]
    assert inner.rule == "C-com" and inner.premises[0].rule == "C-init"
    assert sum(1 for n in d.nodes() if n.rule == "C-flat") == 1


def test_no_flat_without_restriction():
    d = cl.chorl_prove(N("p[0] | q[0]"))
    assert d.rule == "C-init" and not d.premises


def test_stuck_residual():
    r = cl.chorl_search(N("p[x!a.0] | q[y?b.0]"))
    assert r.derivation is None
    assert print_network(r.residual) == "p[x!a.0] | q[y?b.0]"


def test_sel_needs_subset():
    r = cl.chorl_search(N("p[x sel{l: 0, m: 0}] | q[x bra{l: 0}]"))
    assert r.derivation is None


def test_expand_init():
    d = cl.chorl_prove(N("p[0] | q[0] | r[0]"))
    e = cl.expand_to_pil(d)
    assert sorted(n.rule for n in e.nodes()) == ["mix", "mix", "unit", "unit", "unit"]
    assert cl.expand_to_pil(cl.chorl_prove(N("p[0]"))).rule == "unit"


@pytest.mark.parametrize("text", [co.EQ11, co.APPB_NETWORK, "p[x!y.0] | q[x?y.0]",
                                  "new k. p[k sel{l: k!a.0, m: 0}] | q[k bra{l: k?b.0, m: 0, n: 0}]"])
def test_expansion_checks(text):
    d = cl.chorl_prove(N(text))
    e = cl.expand_to_pil(d)
    assert not pv.check_derivation(e)
    assert e.rules_used() <= pv.ENCODING_FRAGMENT
    assert e.stores_empty()
    # the root proves the network formula, or its sequent form when nothing is restricted
    j = cl.annotate(N(text))
    want = (j.formula,) if j.restricted else tuple(a.formula for a in j.sequent)
    assert e.conclusion.sequent == want


def test_appB_inner_com_block():
    d = cl.chorl_prove(N(co.APPB_NETWORK))
    assert d.rule == "C-sel"
    inner = d.premises[0]
    assert inner.rule == "C-com" and inner.meta["k"] == "kqr"
    e = cl.expand_to_pil(inner)
    assert [n.rule for n in e.nodes()][:3] == ["exists", "prec", "ax"]


def test_extract_init():
    assert cl.extract_choreography(cl.chorl_prove(N("p[0]"))) == ch.END


def test_extract_eq11():
    c = cl.extract(N(co.EQ11))
    assert ch.chor_alpha_equiv(c, parse_choreography(co.EQ_CHOREO))
    assert print_choreography(c) == co.EQ_CHOREO


def test_extract_appB():
    c = cl.extract(N(co.APPB_NETWORK))
    assert ch.chor_alpha_equiv(c, parse_choreography(co.APPB_EXTRACTED))
    # projecting the extraction gives back the network
    assert ch.network_equiv(ch.epp(c), N(co.APPB_NETWORK))


@pytest.mark.parametrize("text", [
    co.EQ11, co.APPB_NETWORK, "p[x!a.y?b.0] | q[x?c.y!c.0]",
    "new k. p[k sel{l: 0, m: k!a.0}] | q[k bra{l: 0, m: k?b.0}]",
])
def test_round_trip(text):
    n = N(text)
    back = ch.epp(cl.extract(n))
    assert ch.network_equiv(back, n)
    assert pr.struct_equiv(back.as_process(), n.as_process())


def test_agreement_with_prove_encoding():
    for n in [N(co.EQ11), N("p[x!a.0] | q[y?b.0]"), N("p[x!a.x?b.0] | q[x?c.x!c.0]")]:
        ok = cl.chorl_prove(n) is not None
        assert ok == pv.prove_encoding(n.as_process()).deadlock_free


def test_annotated_formula_round_trip():
    a = cl.AnnotatedFormula(parse_formula("x!y seq 1"), "p")
    assert str(a) == "[x!y seq 1]p"
