"""Hilbert modules over concrete locally C*-algebras.

The gramian is conjugate-linear in its first slot and linear in its second,
so ``[e, f a] = [e, f] a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _tol
from .dilation import KolmogorovDecomposition, kolmogorov
from .errors import ActionIncompatible, GramianNotHermitian, GramianNotPositive, NotAModule, NotInAlgebra, PosetMismatch
from .kernel import OperatorKernel
from .lochilbert import tensor_space
from .localg import ConcreteLocallyCStarAlgebra, algebra_seminorm, spatial_tensor
from .locop import LocallyBoundedOperator, linear_combination, tensor_op


@dataclass(frozen=True, eq=False)
class AbstractHilbertModule:
    """Finitely generated module given by tables.

    ``gramian[(i, j)]`` is ``[e_i, e_j]`` as a coefficient vector over the
    algebra basis.  ``action[(i, k)]``, when present, is ``e_i . basis_k`` as a
    coefficient vector over the generators.
    """

    algebra: ConcreteLocallyCStarAlgebra
    generators: tuple
    gramian: dict
    action: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        m, n = len(self.generators), self.algebra.dim
        g = {}
        for i in range(m):
            for j in range(m):
                if (i, j) not in self.gramian:
                    raise ValueError(f"gramian entry ({i}, {j}) is missing")
                v = np.asarray(self.gramian[(i, j)], dtype=complex)
                if v.shape != (n,):
                    raise ValueError(f"gramian entries must have length {n}")
                g[(i, j)] = v
        a = {}
        for (i, k), v in self.action.items():
            v = np.asarray(v, dtype=complex)
            if not (0 <= i < m and 0 <= k < n) or v.shape != (m,):
                raise ValueError(f"bad action entry ({i}, {k})")
            a[(i, k)] = v
        object.__setattr__(self, "gramian", g)
        object.__setattr__(self, "action", a)

    @property
    def size(self) -> int:
        return len(self.generators)

    def inner(self, e, f) -> np.ndarray:
        """``[e, f]`` for coefficient vectors over the generators."""
        e, f = np.asarray(e, complex), np.asarray(f, complex)
        out = np.zeros(self.algebra.dim, complex)
        for i in range(self.size):
            for j in range(self.size):
                out += np.conj(e[i]) * f[j] * self.gramian[(i, j)]
        return out

    def block_gram(self, lam) -> np.ndarray:
        A = self.algebra
        d = A.carrier.dims[lam]
        m = self.size
        g = np.zeros((m * d, m * d), complex)
        mats = A.level_matrices(lam)
        for (i, j), c in self.gramian.items():
            g[i * d:(i + 1) * d, j * d:(j + 1) * d] = sum(
                (cc * b for cc, b in zip(c, mats)), np.zeros((d, d), complex))
        return g


@dataclass
class ModuleReport:
    hermitian_residual: float
    min_eigenvalue: float
    compatibility_residual: float
    definite: bool
    undefined_actions: list


def check_module(M: AbstractHilbertModule) -> ModuleReport:
    A = M.algebra
    m = M.size
    herm = 0.0
    for i in range(m):
        for j in range(m):
            d = M.gramian[(j, i)] - A.star(M.gramian[(i, j)])
            r = _tol.residual(d)
            herm = max(herm, r)
            if r > _tol.atol(M.gramian[(i, j)], M.gramian[(j, i)]):
                raise GramianNotHermitian(f"[e_{j}, e_{i}] != [e_{i}, e_{j}]^*: residual {r:.3e}")
    min_eig = np.inf
    for lam in A.poset:
        g = M.block_gram(lam)
        if g.size == 0:
            continue
        w = np.linalg.eigvalsh((g + g.conj().T) / 2)
        min_eig = min(min_eig, float(w[0]))
        if w[0] < -_tol.scale() * (1.0 + float(np.max(np.abs(w)))):
            raise GramianNotPositive(f"block Gram at level {lam!r} has eigenvalue {w[0]:.3e}")
    compat = 0.0
    for (j, k), c in M.action.items():
        for i in range(m):
            lhs = sum((c[l] * M.gramian[(i, l)] for l in range(m)), np.zeros(A.dim, complex))
            rhs = A.product(M.gramian[(i, j)], np.eye(A.dim)[k])
            r = _tol.residual(lhs - rhs)
            compat = max(compat, r)
            if r > _tol.verify_tol(lhs, rhs):
                raise ActionIncompatible(f"[e_{i}, e_{j} b_{k}] != [e_{i}, e_{j}] b_{k}: residual {r:.3e}")
    undefined = [(i, k) for i in range(m) for k in range(A.dim) if (i, k) not in M.action]
    return ModuleReport(herm, float(min_eig) if np.isfinite(min_eig) else 0.0, compat, _is_definite(M), undefined)


def _is_definite(M: AbstractHilbertModule) -> bool:
    """``[e, e] = 0`` only for ``e = 0``: the map ``c -> ([e_i, sum_j c_j e_j])_i`` is injective."""
    m = M.size
    if m == 0:
        return True
    stack = np.array([[M.gramian[(i, j)] for i in range(m)] for j in range(m)]).reshape(m, -1).T
    s = np.linalg.svd(stack, compute_uv=False)
    return int(np.sum(s > _tol.RANK_CUTOFF * max(1.0, s[0]))) == m


def module_seminorm(M: AbstractHilbertModule, e, mu) -> float:
    """``sqrt(p_mu([e, e]))``."""
    return float(np.sqrt(algebra_seminorm(M.algebra, M.inner(e, e), mu)))


@dataclass(frozen=True, eq=False)
class OperatorModel:
    module: AbstractHilbertModule
    decomposition: KolmogorovDecomposition
    Phi: dict
    residuals: dict
    undefined_actions: list

    def phi(self, a) -> LocallyBoundedOperator:
        """The representation of the algebra (its identity representation)."""
        return self.module.algebra.element(a)

    def embed(self, e) -> LocallyBoundedOperator:
        """``Phi(sum_i e_i g_i)``."""
        return linear_combination(np.asarray(e, complex), [self.Phi[g] for g in self.module.generators])


def operator_model(M: AbstractHilbertModule) -> OperatorModel:
    """Realise ``M`` as operators ``Phi(e) : H -> K`` with ``Phi(e)^* Phi(f) = [e, f]``."""
    rep = check_module(M)
    A = M.algebra
    H = A.carrier
    gens = M.generators
    values = {(gens[i], gens[j]): A.element(M.gramian[(i, j)]) for i in range(M.size) for j in range(M.size)}
    k = OperatorKernel(gens, H, values)
    D = kolmogorov(k)
    Phi = dict(D.V)
    act = 0.0
    gnorm = _tol.spectral_norm(k.gram(H.top))
    tol = 10 * _tol.scale() * (1.0 + gnorm)
    for (i, kk), c in M.action.items():
        lhs = linear_combination(c, [Phi[g] for g in gens])
        rhs = Phi[gens[i]] @ A.basis[kk]
        r = max(_tol.residual((lhs - rhs)[lam]) for lam in A.poset)
        act = max(act, r)
        if r > tol:
            raise ActionIncompatible(f"Phi(e_{i} b_{kk}) != Phi(e_{i}) b_{kk}: residual {r:.3e}")
    res = {"gramian": D.residual, "action": act}
    return OperatorModel(M, D, Phi, res, rep.undefined_actions)


@dataclass(frozen=True, eq=False)
class ConcreteHilbertModule:
    """Span of operators ``H -> K`` with gramian ``[T, S] = T^* S`` in ``algebra``."""

    H: object
    K: object
    elements: tuple
    algebra: ConcreteLocallyCStarAlgebra

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if not self.algebra.carrier.same_as(self.H):
            raise PosetMismatch("the algebra must act on the module's domain space")
        for T in els:
            if not (T.domain.same_as(self.H) and T.codomain.same_as(self.K)):
                raise PosetMismatch("module elements must map H to K")
        for i, T in enumerate(els):
            for j, S in enumerate(els):
                try:
                    self.algebra.coefficients(T.H @ S)
                except NotInAlgebra:
                    raise NotAModule(f"T_{i}^* T_{j} is not in the algebra") from None
        frame = self._frame()
        for i, T in enumerate(els):
            for kk, b in enumerate(self.algebra.basis):
                if not _in_span(frame, (T @ b).top):
                    raise NotAModule(f"T_{i} b_{kk} leaves the span of the module elements")

    def _frame(self) -> np.ndarray:
        if not self.elements:
            return np.zeros((self.K.dim * self.H.dim, 0), complex)
        return np.array([T.top.reshape(-1) for T in self.elements]).T

    def gramian(self, i, j) -> np.ndarray:
        return self.algebra.coefficients(self.elements[i].H @ self.elements[j])

    def to_abstract(self) -> AbstractHilbertModule:
        n = len(self.elements)
        gram = {(i, j): self.gramian(i, j) for i in range(n) for j in range(n)}
        frame = self._frame()
        action = {}
        for i, T in enumerate(self.elements):
            for kk, b in enumerate(self.algebra.basis):
                c, *_ = np.linalg.lstsq(frame, (T @ b).top.reshape(-1), rcond=None)
                action[(i, kk)] = c
        return AbstractHilbertModule(self.algebra, tuple(f"e{i}" for i in range(n)), gram, action)


def _in_span(frame: np.ndarray, m: np.ndarray) -> bool:
    v = m.reshape(-1)
    if frame.shape[1] == 0:
        return float(np.linalg.norm(v)) <= 1e-8
    c, *_ = np.linalg.lstsq(frame, v, rcond=None)
    return float(np.linalg.norm(frame @ c - v)) <= 1e-8 * (1.0 + float(np.linalg.norm(v)))


def exterior_tensor(E: ConcreteHilbertModule, F: ConcreteHilbertModule) -> ConcreteHilbertModule:
    """Module over the spatial tensor algebra spanned by ``e_i (x) f_j`` (``i`` major)."""
    AB = spatial_tensor(E.algebra, F.algebra)
    HG = tensor_space(E.H, F.H)
    KN = tensor_space(E.K, F.K)
    els = [tensor_op(e, f) for e in E.elements for f in F.elements]
    return ConcreteHilbertModule(HG, KN, tuple(els), AB)


def exterior_tensor_residuals(E: ConcreteHilbertModule, F: ConcreteHilbertModule, EF: ConcreteHilbertModule | None = None) -> dict:
    """Entrywise residuals of the gramian and right-action identities on elementary tensors.

    ``[e (x) f, e' (x) f'] = [e, e'] (x) [f, f']`` and
    ``(e (x) f)(a (x) b) = (e a) (x) (f b)``.
    """
    P = tensor_space(E.H, F.H).poset
    gram = act = 0.0
    for e1 in E.elements:
        for f1 in F.elements:
            t1 = tensor_op(e1, f1)
            for e2 in E.elements:
                for f2 in F.elements:
                    lhs = t1.H @ tensor_op(e2, f2)
                    rhs = tensor_op(e1.H @ e2, f1.H @ f2)
                    gram = max(gram, max(_tol.residual(lhs[l] - rhs[l]) for l in P))
            for a in E.algebra.basis:
                for b in F.algebra.basis:
                    lhs = t1 @ tensor_op(a, b)
                    rhs = tensor_op(e1 @ a, f1 @ b)
                    act = max(act, max(_tol.residual(lhs[l] - rhs[l]) for l in P))
    return {"gramian": gram, "action": act}
