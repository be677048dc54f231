import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilot import choreography as ch
from pilot import corpus as co
from pilot import process as pr
from pilot.syntax import (parse_choreography, parse_network, parse_process,
                          print_choreography, print_network, print_process)

C = parse_choreography
P = parse_process
N = parse_network

TERMS = co.endpoint_terms(2)


def labels(steps):
    return sorted(str(mu) for mu, _ in steps)


def test_example_steps():
    c = C(co.EQ_CHOREO)
    (mu, c1), = ch.chor_steps(c)
    assert str(mu) == "Com(p,q,x)"
    (mu, c2), = ch.chor_steps(c1)
    assert str(mu) == "Com(p,q,y)"
    assert print_choreography(c2) == "new x. new y. p.b -> q.b : y ; 0"


def test_end_is_final():
    assert ch.chor_steps(ch.END) == []


def test_delay_com():
    c = C("p.a -> q.b : x ; r.c -> s.d : y ; 0")
    assert labels(ch.chor_steps(c)) == ["Com(p,q,x)", "Com(r,s,y)"]


def test_delay_blocked_by_shared_channel():
    c = C("p.a -> q.b : x ; r.c -> s.d : x ; 0")
    assert labels(ch.chor_steps(c)) == ["Com(p,q,x)"]


def test_delay_choice_needs_every_branch():
    c = C("p -> q : k { l: r.a -> s.b : y ; 0, m: r.a -> s.b : y ; 0 }")
    assert labels(ch.chor_steps(c)) == ["Bra(p,k)", "Bra(p,k)", "Com(r,s,y)"]
    c = C("p -> q : k { l: r.a -> s.b : y ; 0, m: 0 }")
    assert labels(ch.chor_steps(c)) == ["Bra(p,k)", "Bra(p,k)"]


def test_garbage_is_inert():
    c = C("p -> q : k { l: 0 | m: r!a.0 }")
    (mu, c1), = ch.chor_steps(c)
    assert str(mu) == "Com(p,q,k)" and c1 == ch.END


def test_label_pn():
    assert ch.ComLabel("p", "q", "k").names() == {"p", "q", "k"}
    assert ch.BraLabel("p", "k").names() == {"p", "k"}


# merge

def test_merge_table():
    assert ch.merge(pr.NIL, pr.NIL) == pr.NIL
    assert print_process(ch.merge(P("x bra{l: a!b.0}"), P("x bra{m: 0}"))) == "x bra{l: a!b.0, m: 0}"
    assert ch.merge(P("x sel{l: 0}"), P("x sel{m: 0}")) is None
    assert ch.merge(P("x!a.0"), P("x!b.0")) is None
    assert ch.merge(P("x?a.a!c.0"), P("x?b.b!c.0")) == P("x?a.a!c.0")
    assert ch.merge(P("x sel{l: 0, m: 0}"), P("x sel{m: 0, l: 0}")) is not None


@pytest.mark.parametrize("a, b, expected", [
    ("x bra{l: 0, m: 0}", "x bra{l: 0}", True),
    ("x bra{l: 0}", "x bra{l: 0, m: 0}", False),
    ("x sel{l: 0}", "x sel{m: 0}", False),
    ("x!a.x bra{l: 0, m: 0}", "x!a.x bra{m: 0}", True),
])
def test_merge_order(a, b, expected):
    assert ch.merge_order(P(a), P(b)) is expected


@pytest.mark.parametrize("t", TERMS[::7])
def test_merge_order_reflexive(t):
    assert ch.merge_order(t, t)


def test_merge_commutative_associative():
    defined = 0
    for a, b in itertools.product(TERMS[:80], repeat=2):
        m1, m2 = ch.merge(a, b), ch.merge(b, a)
        assert (m1 is None) == (m2 is None)
        if m1 is not None:
            defined += 1
            assert pr.alpha_equiv(m1, m2) or ch.merge_order(m1, m2) and ch.merge_order(m2, m1)
    assert defined > 80
    rel = [t for t in TERMS if isinstance(t, pr.LabelRecv)][:25]
    for a, b, c in itertools.product(rel, repeat=3):
        ab = ch.merge(a, b)
        bc = ch.merge(b, c)
        left = None if ab is None else ch.merge(ab, c)
        right = None if bc is None else ch.merge(a, bc)
        if left is not None and right is not None:
            assert ch.merge_order(left, right) and ch.merge_order(right, left)


def test_merge_order_partial_order():
    rel = {(i, j) for i, a in enumerate(TERMS) for j, b in enumerate(TERMS) if ch.merge_order(a, b)}
    for i, j in rel:
        if i != j:
            assert (j, i) not in rel
    succ = {}
    for i, j in rel:
        succ.setdefault(i, set()).add(j)
    for i, j in rel:
        for k in succ.get(j, ()):
            assert (i, k) in rel


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(TERMS), st.sampled_from(TERMS), st.sampled_from(["x", "k"]))
def test_prefix_monotone(p, q, k):
    if ch.merge_order(p, q):
        assert ch.merge_order(pr.Send(k, "y", p), pr.Send(k, "y", q))
        assert ch.merge_order(pr.Recv(k, "w", p), pr.Recv(k, "w", q))


def test_network_merge_componentwise():
    a, b = N("p[x bra{l: 0, m: 0}] | q[0]"), N("p[x bra{l: 0}] | q[0]")
    assert ch.merge_order(a, b) and not ch.merge_order(b, a)
    assert ch.merge(a, N("r[0] | q[0]")) is None


# projection

def test_epp_example():
    assert ch.network_equiv(ch.epp(C(co.EQ_CHOREO)), N(co.EQ11))
    assert print_network(ch.epp(C(co.EQ_CHOREO))) == co.EQ11


def test_epp_appB():
    assert print_network(ch.epp(C(co.APPB_C))) == co.APPB_NETWORK


def test_epp_appB_prime_fails():
    with pytest.raises(ch.ProjectionError) as e:
        ch.epp(C(co.APPB_C_PRIME))
    assert e.value.process == "r" and e.value.labels == ("l1", "l2")
    assert not ch.is_projectable(C(co.APPB_C_PRIME))


def test_epp_end():
    assert print_network(ch.epp(ch.END)) == "p0[0]"


def test_epp_needs_flat():
    c = ch.Com("p", "a", "q", "b", "x", ch.Restrict("y", ch.Com("p", "a", "q", "b", "y", ch.END)))
    assert not ch.is_flat(c)
    with pytest.raises(ch.NotFlatError):
        ch.epp(c)


def test_network_steps():
    assert labels(ch.network_steps(N(co.EQ11))) == ["Com(p,q,x)"]
    assert ch.network_steps(N("p[0]")) == []
    steps = ch.network_steps(N("p[x sel{l: 0, m: 0}]"))
    assert labels(steps) == ["Bra(p,x)", "Bra(p,x)"]


def test_network_label_step():
    (mu, n), = ch.network_steps(N("p[x sel{l: a!b.0}] | q[x bra{l: a?c.0, m: 0}]"))
    assert str(mu) == "Com(p,q,x)"
    assert print_network(n) == "p[a!b.0] | q[a?c.0]"


@pytest.mark.parametrize("text", [co.EQ_CHOREO, co.APPB_C, "p.a -> q.b : x ; r.c -> s.d : y ; 0",
                                  "p -> q : k { l: r.a -> s.b : y ; 0, m: r.a -> s.b : y ; 0 }"])
def test_correspondence_golden(text):
    res = ch.check_epp_correspondence(C(text))
    assert res.ok, res.problem
    assert res.states < 1000


def test_correspondence_counterexample():
    # the network may branch at r before p and q talk on the same channel;
    # the choreography keeps them ordered because the channel is shared
    res = ch.check_epp_correspondence(C("p.a -> q.b : x ; r -> p : x { l: 0, m: 0 }"))
    assert not res.ok and "Bra" in res.problem


def test_alpha_equiv():
    a = C("p.a -> q.b : x ; q.b -> p.c : x ; 0")
    b = C("p.a -> q.d : x ; q.d -> p.e : x ; 0")
    assert ch.chor_alpha_equiv(a, b)
    assert not ch.chor_alpha_equiv(a, C("p.a -> q.b : x ; q.a -> p.c : x ; 0"))
