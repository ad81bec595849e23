import numpy as np
import pytest

from prostar.dilation import (KolmogorovDecomposition, equivalence_residuals, factorization_residual,
                              invariant_dilation, kolmogorov, minimalize, reproducing_kernel_space, stinespring,
                              stinespring_residuals, unitary_equivalence)
from prostar.errors import BoundednessFails, KernelNotPSD, NotCompletelyPositive, NotEquivalent, NotInvariant, NotMinimal
from prostar.kernel import (StarSemigroup, action_from_table, cyclic_group, kernel_from_blocks, permutation_action,
                            scalar_kernel, trivial_semigroup, zero_kernel)
from prostar.lochilbert import make_space
from prostar.localg import full_algebra, matrix_algebra
from prostar.locop import (LocallyBoundedOperator, coherent_basis, expm_i, from_top, is_locally_unitary,
                           linear_combination, unitary_residual)
from prostar.poset import validate_poset
from prostar.sampling import (random_coherent, random_group_action, random_kraus_map, random_poset,
                              random_psd_kernel, random_space, symmetrised_kernel)


def single(n):
    return make_space(validate_poset(["*"]), {"*": n})


def test_rank_one_kernel():
    k = scalar_kernel(np.ones((2, 2)))
    D = kolmogorov(k)
    assert D.rank == 1 and D.minimal
    v1, v2 = D.V["x1"].top, D.V["x2"].top
    assert np.allclose(np.abs(v1), [[1]]) and np.allclose(v1, v2)
    assert D.residual < 1e-14


def test_delta_kernel():
    H = single(2)
    m = 3
    D = kolmogorov(kernel_from_blocks(H, ["x", "y", "z"], np.eye(m * 2)))
    assert D.rank == m * 2
    for x in "xyz":
        v = D.V[x].top
        assert np.allclose(v.conj().T @ v, np.eye(2))


def test_zero_kernel():
    H = make_space(validate_poset("ab", [("a", "b")]), {"a": 1, "b": 2})
    D = kolmogorov(zero_kernel(H, ["x", "y"]))
    assert all(d == 0 for d in D.space.dims.values())
    assert all(D.V[x].top.shape == (0, 2) for x in "xy")


def test_not_psd():
    with pytest.raises(KernelNotPSD):
        kolmogorov(scalar_kernel(np.array([[0.0, 1.0], [1.0, 0.0]])))


def test_random_factorizations_are_minimal(rng):
    for _ in range(30):
        H = random_space(rng, random_poset(rng))
        k = random_psd_kernel(rng, H, int(rng.integers(1, 5)))
        D = kolmogorov(k)
        assert D.residual < 1e-9
        assert D.rank == np.linalg.matrix_rank(k.gram(H.top), tol=1e-8)
        for x in k.points:
            assert D.V[x].residual < 1e-8


def _padded(D):
    K = D.space
    P = K.poset
    top = P.top
    dims = {lam: K.dims[lam] + (1 if lam == top else 0) for lam in P}
    js = {lam: np.vstack([K.embedding(lam), np.zeros((1, K.dims[lam]))]) for lam in P if lam != top}
    js[top] = np.eye(dims[top])
    K2 = make_space(P, dims, js)
    V2 = {}
    for x, V in D.V.items():
        lv = {lam: V[lam] for lam in P if lam != top}
        lv[top] = np.vstack([V[top], np.zeros((1, V[top].shape[1]))])
        V2[x] = LocallyBoundedOperator(D.kernel.space, K2, lv)
    return KolmogorovDecomposition(D.kernel, K2, V2, False, factorization_residual(D.kernel, V2))


def test_minimalize(rng):
    H = random_space(rng, random_poset(rng))
    D = kolmogorov(random_psd_kernel(rng, H, 3))
    same = minimalize(D)
    assert same.space.dims == D.space.dims
    padded = _padded(D)
    assert padded.space.dim == D.space.dim + 1
    M = minimalize(padded)
    assert M.space.dims == D.space.dims and M.minimal and M.residual < 1e-9
    with pytest.raises(NotMinimal):
        reproducing_kernel_space(padded)
    Z = zero_kernel(single(2), ["x"])
    zD = kolmogorov(Z)
    assert minimalize(zD).space.dim == 0


def test_swap_dilation():
    k = scalar_kernel(np.array([[2.0, 1.0], [1.0, 2.0]]))
    G = cyclic_group(2)
    act = permutation_action(G, k.points, {"e": [0, 1], "g": [1, 0]})
    dil = invariant_dilation(k, G, act)
    assert dil.space.dim == 2
    pg = dil.pi["g"].top
    assert np.allclose(pg @ pg, np.eye(2))
    assert np.allclose(pg @ dil.V["x1"].top, dil.V["x2"].top)
    assert np.allclose(dil.pi["e"].top, np.eye(2))
    assert dil.certificates[("g", "*")] == pytest.approx(1)


def test_trivial_semigroup_reduces_to_kolmogorov(rng):
    H = random_space(rng, random_poset(rng))
    k = random_psd_kernel(rng, H, 2)
    T = trivial_semigroup()
    e = T.elements[0]
    dil = invariant_dilation(k, T, permutation_action(T, k.points, {e: [0, 1]}))
    assert dil.space.dims == kolmogorov(k).space.dims
    assert all(np.allclose(dil.pi[e][lam], np.eye(dil.space.dims[lam])) for lam in H.poset)


def test_collapsing_action_fails_with_witness():
    k = scalar_kernel(np.diag([1.0, 0.0]))
    S = StarSemigroup(("s",), {("s", "s"): "s"}, {"s": "s"})
    act = action_from_table(S, k.points, {("s", "x1"): "x1", ("s", "x2"): "x1"})
    with pytest.raises(BoundednessFails) as exc:
        invariant_dilation(k, S, act)
    assert np.allclose(np.abs(exc.value.witness), [0, 1])


def test_non_invariant_rejected():
    k = scalar_kernel(np.diag([1.0, 2.0]))
    G = cyclic_group(2)
    with pytest.raises(NotInvariant):
        invariant_dilation(k, G, permutation_action(G, k.points, {"e": [0, 1], "g": [1, 0]}))


def test_group_dilations_are_unitary(rng):
    for _ in range(20):
        H = random_space(rng, random_poset(rng))
        G, act = random_group_action(rng, int(rng.integers(1, 5)))
        k = symmetrised_kernel(rng, H, G, act)
        dil = invariant_dilation(k, G, act)
        assert max(dil.residuals.values()) < 1e-8
        for s in G:
            assert is_locally_unitary(dil.pi[s])


def test_reproducing_kernel_space(rng):
    for _ in range(10):
        H = random_space(rng, random_poset(rng))
        k = random_psd_kernel(rng, H, 3)
        R = reproducing_kernel_space(kolmogorov(k))
        for lam in H.poset:
            h = rng.standard_normal(H.dims[lam]) + 1j * rng.standard_normal(H.dims[lam])
            w = R.section("x1", h, lam)
            f = R.evaluate(w, lam)
            for y in k.points:
                assert np.allclose(f[y], k(y, "x1")[lam] @ h)
            dK = R.decomposition.space.dims[lam]
            assert all(np.allclose(v, 0) for v in R.evaluate(np.zeros(dK), lam).values())
            w = rng.standard_normal(dK) + 1j * rng.standard_normal(dK)
            for x in k.points:
                assert R.reproducing_residual(w, x, h, lam) < 1e-8


def test_equivalence_with_itself_and_conjugate(rng):
    for _ in range(10):
        H = random_space(rng, random_poset(rng))
        k = random_psd_kernel(rng, H, 3)
        D = kolmogorov(k)
        U = unitary_equivalence(D, D)
        assert all(np.allclose(U[lam], np.eye(D.space.dims[lam])) for lam in H.poset)
        K = D.space
        basis = coherent_basis(K, K)
        T = random_coherent(rng, K, K, basis)
        U0 = expm_i(T + T.H)
        V2 = {x: U0 @ v for x, v in D.V.items()}
        D2 = KolmogorovDecomposition(k, K, V2, True, factorization_residual(k, V2))
        U = unitary_equivalence(D, D2)
        assert unitary_residual(U) < 1e-8
        assert all(np.linalg.norm(U[lam] - U0[lam]) < 1e-8 for lam in H.poset)
        assert equivalence_residuals(U, D, D2)["intertwining"] < 1e-8


def test_different_kernels_not_equivalent():
    D1 = kolmogorov(scalar_kernel(np.array([[2.0, 1.0], [1.0, 2.0]])))
    D2 = kolmogorov(scalar_kernel(np.array([[2.0, -1.0], [-1.0, 2.0]])))
    with pytest.raises(NotEquivalent):
        unitary_equivalence(D1, D2)


def test_orders_give_equivalent_dilations(rng):
    H = random_space(rng, random_poset(rng))
    G, act = random_group_action(rng, 3)
    k = symmetrised_kernel(rng, H, G, act)
    d1 = invariant_dilation(k, G, act, "descending")
    d2 = invariant_dilation(k, G, act, "ascending")
    U = unitary_equivalence(d1, d2)
    assert max(equivalence_residuals(U, d1, d2).values()) < 1e-8


def _kraus_images(A, kraus):
    return [sum((C.H @ b @ C for C in kraus[1:]), kraus[0].H @ b @ kraus[0]) for b in A.basis]


def test_stinespring_identity():
    A = matrix_algebra(2)
    D = stinespring(A, A.basis)
    W = D.W.top
    assert np.allclose(W.conj().T @ W, np.eye(2))
    for b in A.basis:
        assert np.allclose((D.W.H @ D.represent(A.coefficients(b)) @ D.W).top, b.top)


def test_stinespring_compression():
    A = matrix_algebra(2)
    T = single(1)
    C = from_top(T, A.carrier, np.array([[1.0], [0.0]]))
    images = _kraus_images(A, [C])
    # basis order is E11, E12, E21, E22
    assert images[0].top[0, 0] == pytest.approx(1) and images[3].top[0, 0] == pytest.approx(0)
    D = stinespring(A, images)
    for i in range(4):
        assert np.allclose((D.W.H @ D.pi[i] @ D.W).top, images[i].top)


def test_stinespring_trace():
    A = matrix_algebra(2)
    units = [from_top(A.carrier, A.carrier, b.top / np.sqrt(2)) for b in A.basis]
    images = _kraus_images(A, units)
    for b, img in zip(A.basis, images):
        assert np.allclose(img.top, np.trace(b.top) * np.eye(2) / 2)
    D = stinespring(A, images)
    assert max(stinespring_residuals(D).values()) < 1e-8


def test_stinespring_rejects_non_cp():
    A = matrix_algebra(2)
    transpose = [from_top(A.carrier, A.carrier, b.top.T) for b in A.basis]
    with pytest.raises(NotCompletelyPositive):
        stinespring(A, transpose)


def test_stinespring_random(rng):
    for _ in range(10):
        A, images, _ = random_kraus_map(rng)
        D = stinespring(A, images)
        assert max(D.residuals.values()) < 1e-8
        a = rng.standard_normal(A.dim) + 1j * rng.standard_normal(A.dim)
        lhs = D.W.H @ D.represent(a) @ D.W
        rhs = linear_combination(a, list(images))
        assert all(np.linalg.norm(lhs[l] - rhs[l]) < 1e-8 * (1 + np.abs(a).sum()) for l in A.poset)
