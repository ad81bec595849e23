"""Random instances for property tests and benchmarks.

Every generator takes a ``numpy.random.Generator`` so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from .csmodule import AbstractHilbertModule
from .kernel import (OperatorKernel, SemigroupAction, StarSemigroup, cyclic_group, kernel_from_blocks, klein_group,
                     permutation_action)
from .lochilbert import LocallyHilbertSpace, make_space
from .localg import ConcreteLocallyCStarAlgebra, full_algebra, make_algebra, matrix_algebra
from .locop import LocallyBoundedOperator, coherent_basis, from_top, zero
from .poset import DirectedPoset, chain, maximum, validate_poset


def cnormal(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), complex)
    q, r = np.linalg.qr(cnormal(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def diamond() -> DirectedPoset:
    return validate_poset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def random_poset(rng, max_size: int = 4) -> DirectedPoset:
    """A chain of length ``1..max_size`` or (when ``max_size >= 4``) the diamond."""
    if max_size >= 4 and rng.random() < 0.3:
        return diamond()
    n = int(rng.integers(1, max_size + 1))
    return chain(*"abcd"[:n])


def _linear_extension(P: DirectedPoset) -> list:
    return sorted(P.elements, key=lambda e: sum(P.le(x, e) for x in P.elements))


def random_space(rng, P: DirectedPoset, max_dim: int = 3, min_dim: int = 1) -> LocallyHilbertSpace:
    """Random nested flag: each level spans a subset of the columns of a random unitary."""
    top = maximum(P)
    n = int(rng.integers(min_dim, max_dim + 1))
    cols = {}
    for lam in _linear_extension(P):
        if lam == top:
            cols[lam] = list(range(n))
            continue
        below = sorted(set().union(*[cols[mu] for mu in cols if P.le(mu, lam)]))
        rest = [c for c in range(n) if c not in below]
        extra = int(rng.integers(0, len(rest) + 1))
        if not below and extra == 0 and min_dim > 0 and rest:
            extra = 1
        pick = sorted(rng.choice(rest, size=extra, replace=False).tolist()) if extra else []
        cols[lam] = sorted(below + pick)
    dims = {lam: len(cols[lam]) for lam in P}
    u = random_unitary(rng, n)
    js = {lam: (np.eye(n, dtype=complex) if lam == top else u[:, cols[lam]]) for lam in P}
    return make_space(P, dims, js)


def random_coordinate_chain(rng, length: int, max_dim: int = 3, equal: bool = False) -> LocallyHilbertSpace:
    P = chain(*"abcd"[:length])
    if equal:
        n = int(rng.integers(1, max_dim + 1))
        dims = {lam: n for lam in P}
    else:
        ds = sorted(int(rng.integers(1, max_dim + 1)) for _ in range(length))
        dims = dict(zip(P.elements, ds))
    return make_space(P, dims)


def random_coherent(rng, H: LocallyHilbertSpace, K: LocallyHilbertSpace, basis=None) -> LocallyBoundedOperator:
    basis = coherent_basis(H, K) if basis is None else basis
    if not basis:
        return zero(H, K)
    c = cnormal(rng, len(basis))
    top = sum(ci * b for ci, b in zip(c, basis))
    return from_top(H, K, top)


def random_psd_kernel(rng, H: LocallyHilbertSpace, m: int, aux_dim: int = 3) -> OperatorKernel:
    """``k(x, y) = F(x)^* F(y)`` with ``F(x)`` random coherent maps into an auxiliary space."""
    L = random_space(rng, H.poset, max_dim=aux_dim)
    basis = coherent_basis(H, L)
    F = [random_coherent(rng, H, L, basis) for _ in range(m)]
    points = tuple(f"x{i + 1}" for i in range(m))
    values = {(points[i], points[j]): F[i].H @ F[j] for i in range(m) for j in range(m)}
    return OperatorKernel(points, H, values)


def _perm_power(p, k):
    out = list(range(len(p)))
    for _ in range(k):
        out = [p[i] for i in out]
    return out


def _random_perm_of_order_dividing(rng, m: int, n: int) -> list:
    """Random permutation of ``range(m)`` whose cycle lengths divide ``n``."""
    lengths = [d for d in range(1, n + 1) if n % d == 0]
    order = rng.permutation(m).tolist()
    p = list(range(m))
    i = 0
    while i < m:
        choices = [l for l in lengths if l <= m - i]
        l = int(rng.choice(choices))
        cyc = order[i:i + l]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            p[a] = b
        i += l
    return p


def random_group_action(rng, m: int):
    """A group of order at most 4 acting on ``m`` points by permutations."""
    points = tuple(f"x{i + 1}" for i in range(m))
    kind = int(rng.integers(0, 5))
    if kind < 4:
        n = kind + 1
        G = cyclic_group(n)
        p = _random_perm_of_order_dividing(rng, m, n)
        perms = {s: _perm_power(p, i) for i, s in enumerate(G.elements)}
    else:
        G = klein_group()
        order = rng.permutation(m).tolist()
        half = int(rng.integers(0, m // 2 + 1))
        p = list(range(m))
        q = list(range(m))
        pairs = [order[2 * i: 2 * i + 2] for i in range(m // 2)]
        for i, (a, b) in enumerate(pairs):
            target = p if i < half else q
            target[a], target[b] = b, a
        pq = [p[q[i]] for i in range(m)]
        perms = {"e": list(range(m)), "a": p, "b": q, "c": pq}
    # perms[s][j] is the index of s.x_j
    return G, permutation_action(G, points, perms)


def symmetrised_kernel(rng, H: LocallyHilbertSpace, G: StarSemigroup, action: SemigroupAction, aux_dim: int = 3) -> OperatorKernel:
    """Average of ``k0(s.x, s.y)`` over a finite group: invariant and PSD."""
    m = len(action.points)
    k0 = random_psd_kernel(rng, H, m, aux_dim)
    g0 = k0.gram(H.top)
    d = H.dim
    g = sum(action.lifted(s, d).conj().T @ g0 @ action.lifted(s, d) for s in G) / len(G)
    return kernel_from_blocks(H, action.points, g)


def random_kraus_map(rng, max_len: int = 3, max_dim: int = 3, max_kraus: int = 3):
    """``phi(a) = sum_i C_i^* a C_i`` on ``B_loc`` of a coordinate chain.

    Returns ``(A, phi_images, kraus)``.
    """
    length = int(rng.integers(1, max_len + 1))
    H = random_coordinate_chain(rng, length, max_dim, equal=rng.random() < 0.5)
    A = full_algebra(H)
    T = random_space(rng, H.poset, max_dim=max_dim)
    basis = coherent_basis(T, H)
    kraus = [random_coherent(rng, T, H, basis) for _ in range(int(rng.integers(1, max_kraus + 1)))]
    images = [sum((C.H @ b @ C for C in kraus[1:]), kraus[0].H @ b @ kraus[0]) for b in A.basis]
    return A, images, kraus


def random_module(rng, max_n: int = 2, max_gens: int = 3, max_rank: int = 3) -> AbstractHilbertModule:
    """Module over ``M_n`` presented by operators ``T_i : C^n -> C^p``.

    The first generators span a right ideal ``v (x) (C^n)^T`` so part of the
    action table is defined; later generators are random.
    """
    n = int(rng.integers(1, max_n + 1))
    A = matrix_algebra(n)
    p = int(rng.integers(1, max_rank + 1))
    m = int(rng.integers(1, max_gens + 1))
    v = cnormal(rng, p, 1)
    mats = []
    for i in range(m):
        if i < n and rng.random() < 0.7:
            row = np.zeros((1, n), complex)
            row[0, i] = 1.0
            mats.append(v @ row)
        else:
            mats.append(cnormal(rng, p, n))
    gram = {(i, j): A.coefficients(mats[i].conj().T @ mats[j]) for i in range(m) for j in range(m)}
    frame = np.array([t.reshape(-1) for t in mats]).T
    action = {}
    for i, t in enumerate(mats):
        for k, b in enumerate(A.basis):
            target = (t @ b.top).reshape(-1)
            c, *_ = np.linalg.lstsq(frame, target, rcond=None)
            if np.linalg.norm(frame @ c - target) <= 1e-10 * (1 + np.linalg.norm(target)):
                action[(i, k)] = c
    return AbstractHilbertModule(A, tuple(f"e{i}" for i in range(m)), gram, action)


def random_algebra(rng, max_dim: int = 3, generators: int = 1) -> ConcreteLocallyCStarAlgebra:
    P = random_poset(rng)
    H = random_space(rng, P, max_dim=max_dim)
    basis = coherent_basis(H, H)
    return make_algebra(H, [random_coherent(rng, H, H, basis) for _ in range(generators)])


def random_element(rng, A: ConcreteLocallyCStarAlgebra) -> np.ndarray:
    return cnormal(rng, A.dim)
