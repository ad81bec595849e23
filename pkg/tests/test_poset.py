import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prostar.errors import EmptyPoset, NotAntisymmetric, NotDirected, UnknownElement
from prostar.poset import (branch, chain, maximum, poset_from_json, poset_to_json, product_poset, validate_poset)


def diamond():
    return validate_poset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def test_singleton():
    P = validate_poset(["a"], [("a", "a")])
    assert list(P) == ["a"] and maximum(P) == "a"


def test_v_shape_has_maximum_c():
    P = validate_poset("abc", [("a", "c"), ("b", "c")])
    # upper bounds by exhaustion
    for x, y in itertools.product(P, repeat=2):
        assert any(P.le(x, z) and P.le(y, z) for z in P)
    assert maximum(P) == "c"
    assert not P.le("a", "b") and not P.le("b", "a")


def test_rejections():
    with pytest.raises(NotDirected):
        validate_poset("ab", [])
    with pytest.raises(NotAntisymmetric):
        validate_poset("ab", [("a", "b"), ("b", "a")])
    with pytest.raises(EmptyPoset):
        validate_poset([], [])


def test_transitive_closure():
    P = validate_poset("abc", [("a", "b"), ("b", "c")])
    assert P.le("a", "c")
    for x, y, z in itertools.product(P, repeat=3):
        if P.le(x, y) and P.le(y, z):
            assert P.le(x, z)


def test_maximum():
    assert maximum(chain("a", "b", "c")) == "c"
    D = diamond()
    assert maximum(D) == "d"
    assert all(D.le(e, "d") for e in D)


def test_branch():
    assert list(branch(chain("a", "b", "c"), "b")) == ["a", "b"]
    D = diamond()
    assert branch(D, "d") == D
    B = branch(D, "b")
    assert set(B) == {"a", "b"} and maximum(B) == "b"
    with pytest.raises(UnknownElement):
        branch(D, "z")


def test_products():
    one = validate_poset(["*"])
    assert len(product_poset(one, one)) == 1
    D = product_poset(chain("a", "b"), chain("a", "b"))
    assert len(D) == 4
    comparable = {(x, y) for x, y in itertools.product(D, repeat=2) if D.le(x, y) and x != y}
    assert comparable == {(("a", "a"), ("a", "b")), (("a", "a"), ("b", "a")), (("a", "a"), ("b", "b")),
                          (("a", "b"), ("b", "b")), (("b", "a"), ("b", "b"))}
    G = product_poset(chain("a", "b"), chain("x", "y", "z"))
    assert len(G) == 6 and maximum(G) == ("b", "z")
    for x, y in itertools.product(G, repeat=2):
        assert any(G.le(x, u) and G.le(y, u) for u in G)


def test_json_round_trip():
    D = diamond()
    assert poset_from_json(poset_to_json(D)) == D


@st.composite
def directed_posets(draw, max_size=6):
    """Random poset with a forced top element, so it is directed."""
    n = draw(st.integers(1, max_size))
    labels = [f"p{i}" for i in range(n)]
    pairs = [(labels[i], labels[j]) for i in range(n - 1) for j in range(i + 1, n - 1)
             if draw(st.booleans())]
    pairs += [(labels[i], labels[-1]) for i in range(n - 1)]
    return validate_poset(labels, pairs)


@settings(max_examples=60, deadline=None)
@given(directed_posets(), directed_posets())
def test_product_directed_property(P, Q):
    R = product_poset(P, Q)
    assert maximum(R) == (maximum(P), maximum(Q))
    for x, y in itertools.product(R, repeat=2):
        assert R.upper_bounds(x, y)
    for x, y in itertools.product(R, repeat=2):
        if R.le(x, y) and R.le(y, x):
            assert x == y


@settings(max_examples=60, deadline=None)
@given(directed_posets())
def test_branch_of_maximum_is_whole(P):
    assert branch(P, maximum(P)) == P
    assert all(P.le(e, maximum(P)) for e in P)
