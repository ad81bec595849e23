import numpy as np
import pytest

from prostar.errors import InvalidSystem, NotInAlgebra, NotMultiplicative
from prostar.lochilbert import direct_sum_space, make_space
from prostar.localg import (MatrixProjectiveSystem, algebra_seminorm, bounded_norm, check_coherent_morphism,
                            cross_seminorm_residual, full_algebra, gelfand_naimark_rep, make_algebra,
                            matrix_algebra, spatial_tensor)
from prostar.locop import direct_sum_op, from_top, identity, zero
from prostar.poset import chain, validate_poset
from prostar.sampling import random_algebra, random_coherent, random_element

from oracles import closure_dimension, spectral


def single(n):
    return make_space(validate_poset(["*"]), {"*": n})


def test_identity_generates_scalars():
    A = make_algebra(single(3), [identity(single(3))])
    assert A.dim == 1


def test_matrix_units_generate_everything():
    H = make_space(chain("a", "b"), {"a": 3, "b": 3})
    units = []
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3))
            e[i, j] = 1
            units.append(from_top(H, H, e))
    A = make_algebra(H, units)
    assert A.dim == 9 == closure_dimension([u.top for u in units])


def test_nilpotent_generates_m2():
    N = np.array([[0, 1], [0, 0]], complex)
    H = single(2)
    A = make_algebra(H, [from_top(H, H, N)])
    assert A.dim == closure_dimension([N]) == 4
    assert A.structure_residual() < 1e-12


def test_membership():
    H = single(2)
    A = make_algebra(H, [identity(H)])
    with pytest.raises(NotInAlgebra):
        A.coefficients(from_top(H, H, np.diag([1.0, 2.0])))


def test_seminorms_basic():
    H = make_space(chain("a", "b"), {"a": 1, "b": 2})
    A = full_algebra(H)
    one = A.identity_coefficients()
    assert algebra_seminorm(A, one, "b") == pytest.approx(1)
    assert algebra_seminorm(A, 2 * one, "a") == pytest.approx(2)
    d = A.coefficients(from_top(H, H, np.diag([2.0, 3.0])))
    assert bounded_norm(A, d) == pytest.approx(3)


def test_seminorm_laws(rng):
    for _ in range(30):
        A = random_algebra(rng)
        a, b = random_element(rng, A), random_element(rng, A)
        for mu in A.poset:
            pa = algebra_seminorm(A, a, mu)
            assert algebra_seminorm(A, A.product(A.star(a), a), mu) == pytest.approx(pa ** 2, rel=1e-8, abs=1e-12)
            assert algebra_seminorm(A, A.star(a), mu) == pytest.approx(pa, rel=1e-8, abs=1e-12)
            assert algebra_seminorm(A, A.product(a, b), mu) <= pa * algebra_seminorm(A, b, mu) * (1 + 1e-8) + 1e-12
        top = A.carrier.poset.top
        assert bounded_norm(A, a) == pytest.approx(algebra_seminorm(A, a, top), rel=1e-12)
        # compression norms grow along the order
        for lam, mu in A.poset.pairs():
            assert algebra_seminorm(A, a, lam) <= algebra_seminorm(A, a, mu) * (1 + 1e-10) + 1e-12


def test_identity_morphism():
    A = full_algebra(make_space(chain("a", "b"), {"a": 1, "b": 2}))
    rep = check_coherent_morphism(A, A, A.basis)
    assert rep.is_faithful and rep.multiplicative_residual < 1e-12


def test_ampliation_is_faithful():
    H = make_space(chain("a", "b"), {"a": 1, "b": 2})
    A = full_algebra(H)
    HH = direct_sum_space(H, H)
    images = [direct_sum_op(b, b) for b in A.basis]
    B = make_algebra(HH, images)
    rep = check_coherent_morphism(A, B, images)
    assert rep.is_faithful
    assert rep.coherence_residual < 1e-12


def test_zero_morphism_not_faithful():
    H = single(2)
    A = full_algebra(H)
    rep = check_coherent_morphism(A, A, [zero(H)] * A.dim)
    assert not rep.is_faithful


def test_non_multiplicative():
    H = single(2)
    A = full_algebra(H)
    with pytest.raises(NotMultiplicative):
        check_coherent_morphism(A, A, [2 * b for b in A.basis])


def _chain_system(scale=1.0):
    P = chain("a", "b")
    return MatrixProjectiveSystem(P, {"a": np.array([[[1.0]]]), "b": np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])},
                                  {("a", "b"): np.array([[scale, 0.0]])})


def test_gelfand_naimark_chain():
    system = _chain_system()
    rep = gelfand_naimark_rep(system)
    assert rep.space.dims == {"a": 1, "b": 3}
    x, y = 2.0, 5.0
    a = x * rep.images[0] + y * rep.images[1]
    assert np.allclose(a["a"], [[x]])
    assert np.allclose(a["b"], np.diag([x, x, y]))
    assert rep.report.is_faithful
    for lam in ("a", "b"):
        # ker pi_lam = 0 on the level quotient A_lam
        m = np.array([img[lam].reshape(-1) for img in rep.images])
        src = np.array([b.reshape(-1) for b in system.level_matrices(lam)])
        assert np.linalg.matrix_rank(m) == np.linalg.matrix_rank(src) == {"a": 1, "b": 2}[lam]


def test_gelfand_naimark_singleton():
    P = validate_poset(["*"])
    units = np.array([np.outer(np.eye(2)[i], np.eye(2)[j]) for i in range(2) for j in range(2)])
    rep = gelfand_naimark_rep(MatrixProjectiveSystem(P, {"*": units}, {}))
    assert rep.space.dim == 2
    for img, u in zip(rep.images, units):
        assert np.allclose(img.top, u)


def test_invalid_system():
    with pytest.raises(InvalidSystem):
        _chain_system(2.0)


def test_spatial_tensor():
    A = matrix_algebra(2)
    assert spatial_tensor(A, A).dim == 16
    C = make_algebra(single(1), [identity(single(1))])
    assert spatial_tensor(C, A).dim == A.dim


def test_cross_seminorms(rng):
    for _ in range(10):
        A, B = random_algebra(rng, 2), random_algebra(rng, 2)
        a = A.element(random_element(rng, A))
        b = B.element(random_element(rng, B))
        assert cross_seminorm_residual(a, b) < 1e-9 * (1 + spectral(a.top) * spectral(b.top))
        AB = spatial_tensor(A, B)
        assert AB.dim == A.dim * B.dim
