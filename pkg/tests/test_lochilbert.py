import numpy as np
import pytest

from prostar.errors import DimensionMismatch, NotIsometric, NotNested
from prostar.lochilbert import (LocalVector, direct_sum_space, embed, inner_product, make_space, tensor_space,
                                transitivity_residual)
from prostar.poset import chain, validate_poset
from prostar.sampling import random_poset, random_space


def diamond():
    return validate_poset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def test_coordinate_chain():
    H = make_space(chain("a", "b"), {"a": 1, "b": 2})
    assert H.dim == 2
    assert np.allclose(H.embedding("a"), [[1], [0]])


def test_rejections():
    with pytest.raises(DimensionMismatch):
        make_space(chain("a", "b"), {"a": 2, "b": 1})
    with pytest.raises(NotIsometric):
        make_space(chain("a", "b"), {"a": 1, "b": 2}, {"a": np.array([[2.0], [0.0]]), "b": np.eye(2)})
    P = validate_poset("abc", [("a", "b"), ("b", "c")])
    with pytest.raises(NotNested):
        make_space(P, {"a": 1, "b": 1, "c": 2},
                   {"a": np.array([[1.0], [0.0]]), "b": np.array([[0.0], [1.0]]), "c": np.eye(2)})


def test_diamond_connecting_maps():
    H = make_space(diamond(), {"a": 1, "b": 2, "c": 2, "d": 3})
    for lam in "abcd":
        j = H.embedding(lam)
        assert np.allclose(j.conj().T @ j, np.eye(H.dims[lam]))
    assert np.allclose(H.connecting("d", "b"), np.eye(3)[:, :2])
    assert transitivity_residual(H) < 1e-12


def test_inner_products():
    H = make_space(chain("a", "b"), {"a": 1, "b": 2})
    e1a = LocalVector("a", np.array([1.0]))
    e2b = LocalVector("b", np.array([0.0, 1.0]))
    assert inner_product(H, e1a, e1a) == pytest.approx(1)
    assert inner_product(H, embed(H, e1a, "b"), e1a) == pytest.approx(1)
    assert abs(inner_product(H, e1a, e2b)) < 1e-15
    u = LocalVector("b", np.array([1, 1j]) / np.sqrt(2))
    v = LocalVector("b", np.array([1, -1j]) / np.sqrt(2))
    assert abs(inner_product(H, u, v)) < 1e-15


def test_inner_product_level_independent(rng):
    for _ in range(20):
        H = random_space(rng, random_poset(rng))
        lams = list(H.poset)
        lam = lams[int(rng.integers(len(lams)))]
        u = LocalVector(lam, rng.standard_normal(H.dims[lam]) + 1j * rng.standard_normal(H.dims[lam]))
        v = LocalVector(lam, rng.standard_normal(H.dims[lam]) + 1j * rng.standard_normal(H.dims[lam]))
        direct = np.vdot(H.embedding(lam) @ v.coords, H.embedding(lam) @ u.coords)
        for mu in H.poset.upper_bounds(lam):
            assert abs(inner_product(H, u, v, mu) - direct) < 1e-10


def test_tensor_space():
    one = validate_poset(["*"])
    assert tensor_space(make_space(one, {"*": 2}), make_space(one, {"*": 3})).dim == 6
    H = make_space(chain("a", "b"), {"a": 1, "b": 2})
    T = tensor_space(H, H)
    assert T.dims == {("a", "a"): 1, ("a", "b"): 2, ("b", "a"): 2, ("b", "b"): 4}
    for lam in T.poset:
        j = T.embedding(lam)
        assert np.allclose(j.conj().T @ j, np.eye(T.dims[lam]))


def test_random_spaces_are_transitive(rng):
    for _ in range(30):
        H = random_space(rng, random_poset(rng))
        assert transitivity_residual(H) < 1e-10
        S = direct_sum_space(H, H)
        assert S.dim == 2 * H.dim
