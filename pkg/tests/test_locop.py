import numpy as np
import pytest

from prostar.errors import AdjointCoherenceViolation, CoherenceViolation, NotEndomorphism, ShapeMismatch
from prostar.lochilbert import LocalVector, embed, make_space
from prostar.locop import (adjoint, apply, check_locally_bounded, compose, identity, is_locally_positive,
                           is_locally_selfadjoint, is_locally_unitary, positive_sqrt, seminorm, tensor_op)
from prostar.poset import chain, validate_poset
from prostar.sampling import random_coherent, random_poset, random_space

from oracles import spectral


@pytest.fixture
def H():
    return make_space(chain("a", "b"), {"a": 1, "b": 2})


def diag23(H):
    return check_locally_bounded(H, H, {"a": np.array([[2.0]]), "b": np.diag([2.0, 3.0])})


def test_block_diagonal_is_valid(H):
    T = diag23(H)
    # both coherence equations by hand
    j = H.connecting("b", "a")
    assert np.allclose(T["b"] @ j, j @ T["a"])
    assert np.allclose(T["b"].conj().T @ j, j @ T["a"].conj().T)
    assert T.residual < 1e-12


def test_adjoint_violation(H):
    with pytest.raises(AdjointCoherenceViolation) as exc:
        check_locally_bounded(H, H, {"a": np.array([[2.0]]), "b": np.array([[2.0, 1.0], [0.0, 3.0]])})
    assert exc.value.residual > 0.5


def test_coherence_violation(H):
    with pytest.raises(CoherenceViolation):
        check_locally_bounded(H, H, {"a": np.array([[2.0]]), "b": np.array([[2.0, 0.0], [1.0, 3.0]])})


def test_shape_mismatch(H):
    with pytest.raises(ShapeMismatch):
        check_locally_bounded(H, H, {"a": np.eye(2), "b": np.eye(2)})


def test_algebra(H, rng):
    I = identity(H)
    assert np.allclose(adjoint(I)["b"], np.eye(2))
    for _ in range(20):
        G = random_space(rng, random_poset(rng))
        T = random_coherent(rng, G, G)
        assert all(np.allclose(adjoint(adjoint(T))[l], T[l]) for l in G.poset)
        TT = compose(T, adjoint(T))
        assert is_locally_positive(TT)
        for lam in G.poset:
            assert np.min(np.linalg.eigvalsh(TT[lam])) > -1e-10 * (1 + spectral(TT[lam]))


def test_apply(H):
    T = diag23(H)
    e2 = LocalVector("b", np.array([0.0, 1.0]))
    assert np.allclose(apply(T, e2).coords, [0, 3])
    v = LocalVector("a", np.array([1.5 - 0.5j]))
    lhs = embed(H, apply(T, v), "b").coords
    rhs = apply(T, embed(H, v, "b")).coords
    assert np.linalg.norm(lhs - rhs) < 1e-12


def test_apply_commutes_with_embeddings(rng):
    for _ in range(20):
        G = random_space(rng, random_poset(rng))
        T = random_coherent(rng, G, G)
        for lam, mu in G.poset.pairs():
            v = LocalVector(lam, rng.standard_normal(G.dims[lam]) + 0j)
            lhs = embed(G, apply(T, v), mu).coords
            rhs = apply(T, embed(G, v, mu)).coords
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * (1 + np.abs(T.top).max())


def test_seminorms(H):
    assert seminorm(identity(H), "b") == pytest.approx(1)
    assert seminorm(diag23(H), "b") == pytest.approx(3)
    one = make_space(validate_poset(["*"]), {"*": 2})
    N = check_locally_bounded(one, one, {"*": np.array([[0.0, 2.0], [0.0, 0.0]])})
    assert seminorm(N, "*") == pytest.approx(np.sqrt(np.max(np.linalg.eigvalsh(N["*"].conj().T @ N["*"]))))
    assert seminorm(N, "*") == pytest.approx(2)


def test_operator_classes(H):
    I = identity(H)
    assert is_locally_selfadjoint(I) and is_locally_positive(I) and is_locally_unitary(I)
    S = check_locally_bounded(H, H, {"a": np.array([[1.0]]), "b": np.diag([1.0, -1.0])})
    assert is_locally_selfadjoint(S) and is_locally_unitary(S) and not is_locally_positive(S)
    K = make_space(chain("a", "b"), {"a": 1, "b": 3})
    with pytest.raises(NotEndomorphism):
        is_locally_unitary(check_locally_bounded(H, K, {"a": np.eye(1), "b": np.eye(3)[:, :2]}))


def test_positivity_equivalence(rng):
    for _ in range(25):
        G = random_space(rng, random_poset(rng), max_dim=4)
        S = random_coherent(rng, G, G)
        P = S.H @ S
        assert is_locally_positive(P)
        R = positive_sqrt(P)
        assert all(np.linalg.norm((R.H @ R)[l] - P[l]) < 1e-9 * (1 + spectral(P[l])) for l in G.poset)
        # an indefinite selfadjoint element is rejected
        Q = S + S.H
        if np.min(np.linalg.eigvalsh(Q.top)) < -1e-6:
            assert not is_locally_positive(Q)


def test_c_star_identity(rng):
    for _ in range(25):
        G = random_space(rng, random_poset(rng))
        T = random_coherent(rng, G, G)
        for mu in G.poset:
            assert seminorm(T.H @ T, mu) == pytest.approx(seminorm(T, mu) ** 2, rel=1e-8, abs=1e-12)


def test_tensor_op(H, rng):
    I = identity(H)
    II = tensor_op(I, I)
    assert all(np.allclose(II[l], np.eye(II.domain.dims[l])) for l in II.domain.poset)
    for _ in range(15):
        A = random_space(rng, random_poset(rng, 3))
        B = random_space(rng, random_poset(rng, 3))
        T, S = random_coherent(rng, A, A), random_coherent(rng, B, B)
        TS = tensor_op(T, S)
        assert TS.residual < 1e-8
        adj = tensor_op(T.H, S.H)
        for lam in TS.domain.poset:
            assert np.allclose(TS.H[lam], adj[lam])
            a, b = lam
            want = spectral(T[a]) * spectral(S[b])
            assert seminorm(TS, lam) == pytest.approx(want, rel=1e-9, abs=1e-12)
        assert is_locally_positive(tensor_op(T.H @ T, S.H @ S))
