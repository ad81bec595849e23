"""Kolmogorov decompositions, invariant dilations and Stinespring dilations.

The dilation space is realised inside ``C^r`` where ``r`` is the rank of the
top-level Gram matrix ``G = W^* W``.  Level ``lam`` of the dilation space is
the span of the columns of ``W (I_m (x) J_lam)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _tol
from .errors import (BoundednessFails, CoherenceViolation, AdjointCoherenceViolation, ConstructionError,
                     KernelNotPSD, NotCompletelyPositive, NotEquivalent, NotInvariant, NotMinimal, NotUnital)
from .kernel import (OperatorKernel, SemigroupAction, StarSemigroup, _phase_normalise, invariance_residuals,
                     kernel_from_cp_map, multiplicative_semigroup, range_basis, require_psd, sznagy_certificate)
from .lochilbert import LocallyHilbertSpace, make_space
from .localg import ConcreteLocallyCStarAlgebra
from .locop import LocallyBoundedOperator, linear_combination


@dataclass(frozen=True, eq=False)
class KolmogorovDecomposition:
    kernel: OperatorKernel
    space: LocallyHilbertSpace
    V: dict
    minimal: bool
    residual: float

    @property
    def rank(self) -> int:
        return self.space.dim


@dataclass(frozen=True, eq=False)
class InvariantDilation:
    decomposition: KolmogorovDecomposition
    action: SemigroupAction
    pi: dict
    certificates: dict
    residuals: dict = field(default_factory=dict)

    @property
    def space(self) -> LocallyHilbertSpace:
        return self.decomposition.space

    @property
    def V(self) -> dict:
        return self.decomposition.V


def _normalised_columns(u: np.ndarray) -> np.ndarray:
    return np.column_stack([_phase_normalise(u[:, j]) for j in range(u.shape[1])]) if u.shape[1] else u


def _column_space(m: np.ndarray, cutoff: float) -> np.ndarray:
    """Orthonormal basis of the range of ``m``: left singular vectors above ``cutoff``."""
    if m.size == 0:
        return np.zeros((m.shape[0], 0), complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    keep = s > cutoff
    return _normalised_columns(u[:, keep])


def _factor(g: np.ndarray, order: str):
    w, u = range_basis(g)
    if order == "ascending":
        w, u = w[::-1], u[:, ::-1]
    elif order != "descending":
        raise ValueError(f"unknown eigenvalue order {order!r}")
    u = _normalised_columns(u)
    return w, u


def factorization_residual(k: OperatorKernel, V: dict) -> float:
    worst = 0.0
    for x in k.points:
        for y in k.points:
            kxy = k(x, y)
            for lam in k.poset:
                worst = max(worst, _tol.residual(V[x][lam].conj().T @ V[y][lam] - kxy[lam]))
    return worst


def spanning_matrix(k: OperatorKernel, D_space: LocallyHilbertSpace, V: dict, lam) -> np.ndarray:
    """Columns ``V_lam(x) e_i`` (point major), at level ``lam``."""
    cols = [V[x][lam] for x in k.points]
    return np.hstack(cols) if cols else np.zeros((D_space.dims[lam], 0), complex)


def _is_minimal(k, space, V) -> bool:
    for lam in k.poset:
        m = spanning_matrix(k, space, V, lam)
        if _rank(m) != space.dims[lam]:
            return False
    return True


def _rank(m: np.ndarray, cutoff: float | None = None) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if cutoff is None:
        cutoff = np.sqrt(_tol.RANK_CUTOFF) * s[0]
    return int(np.sum(s > cutoff)) if s[0] > 0 else 0


def _build_decomposition(k: OperatorKernel, order: str):
    """Shared core: returns the decomposition plus the factor data ``(W, w, u)``."""
    require_psd(k)
    H = k.space
    P = k.poset
    d = H.dim
    m = len(k.points)
    G = k.gram(H.top)
    w, u = _factor(G, order)
    r = w.size
    W = (np.sqrt(w)[:, None] * u.conj().T) if r else np.zeros((0, m * d), complex)
    cutoff = np.sqrt(_tol.RANK_CUTOFF * w.max()) if r else 0.0
    js, dims = {}, {}
    for lam in P:
        if lam == H.top:
            q = np.eye(r, dtype=complex)
        else:
            q = _column_space(W @ np.kron(np.eye(m), H.embedding(lam)), cutoff)
            if order == "ascending":
                q = q[:, ::-1]
        js[lam] = q
        dims[lam] = q.shape[1]
    K = make_space(P, dims, js)
    V = {}
    for i, x in enumerate(k.points):
        wx = W[:, i * d:(i + 1) * d]
        levels = {lam: js[lam].conj().T @ wx @ H.embedding(lam) for lam in P}
        V[x] = LocallyBoundedOperator(H, K, levels)
    res = factorization_residual(k, V)
    D = KolmogorovDecomposition(k, K, V, _is_minimal(k, K, V), res)
    return D, W, w, u


def kolmogorov(k: OperatorKernel, order: str = "descending") -> KolmogorovDecomposition:
    """Minimal Kolmogorov decomposition ``k(x, y) = V(x)^* V(y)``.

    ``order`` picks how the top-level eigenvectors are sorted (``"descending"``
    or ``"ascending"``), which changes the basis of the dilation space but not
    the decomposition up to local unitary equivalence.
    """
    D, *_ = _build_decomposition(k, order)
    tol = 10 * _tol.scale() * (1.0 + _tol.spectral_norm(k.gram(k.space.top)))
    if D.residual > tol:
        raise ConstructionError(f"factorisation residual {D.residual:.3e} exceeds {tol:.3e}")
    return D


def minimalize(D: KolmogorovDecomposition) -> KolmogorovDecomposition:
    """Compress ``D`` onto the span of ``V(X) H`` at every level."""
    k, K = D.kernel, D.space
    P = k.poset
    bases = {}
    for lam in P:
        m = K.embedding(lam) @ spanning_matrix(k, K, D.V, lam)
        s = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(0)
        cutoff = np.sqrt(_tol.RANK_CUTOFF) * s[0] if s.size and s[0] > 0 else np.inf
        bases[lam] = _column_space(m, cutoff)
    top = bases[K.top]
    js = {lam: top.conj().T @ bases[lam] for lam in P}
    K0 = make_space(P, {lam: bases[lam].shape[1] for lam in P}, js)
    V0 = {}
    for x in k.points:
        V0[x] = LocallyBoundedOperator(k.space, K0, {
            lam: bases[lam].conj().T @ K.embedding(lam) @ D.V[x][lam] for lam in P})
    return KolmogorovDecomposition(k, K0, V0, True, factorization_residual(k, V0))


def _images(action: SemigroupAction, V: dict, s, points) -> dict:
    """``V(s.x)`` for every point, by linearity of the action."""
    a = action.matrices[s]
    out = {}
    for j, x in enumerate(points):
        out[x] = linear_combination(a[:, j], [V[y] for y in points])
    return out


def invariant_dilation(k: OperatorKernel, S: StarSemigroup, action: SemigroupAction,
                       order: str = "descending") -> InvariantDilation:
    """Minimal invariant dilation ``(K, pi, V)`` of an invariant PSD kernel.

    Checks, in order: positivity, the boundedness condition for every
    ``(s, lam)`` (raising with a witness), and invariance.
    """
    if tuple(action.points) != tuple(k.points):
        raise ValueError("the action must be on the kernel's points, in the same order")
    require_psd(k)
    certs = {}
    for s in S:
        for lam in k.poset:
            c, witness = sznagy_certificate(k, action, s, lam)
            if not np.isfinite(c):
                raise BoundednessFails(s, lam, witness)
            certs[(s, lam)] = c
    for s, x, y, r, tol in invariance_residuals(k, action):
        if r > tol:
            raise NotInvariant(s, x, y, r)
    D, W, w, u = _build_decomposition(k, order)
    K = D.space
    H = k.space
    pi = {}
    for s in S:
        if w.size:
            top = W @ action.lifted(s, H.dim) @ (u / np.sqrt(w))
        else:
            top = np.zeros((0, 0), complex)
        levels = {lam: K.embedding(lam).conj().T @ top @ K.embedding(lam) for lam in k.poset}
        pi[s] = LocallyBoundedOperator(K, K, levels)
    residuals = dilation_residuals(D, S, action, pi)
    residuals["factorization"] = D.residual
    gnorm = _tol.spectral_norm(k.gram(H.top))
    tol = 10 * _tol.scale() * (1.0 + gnorm)
    for name, r in residuals.items():
        if r > tol:
            raise ConstructionError(f"{name} residual {r:.3e} exceeds {tol:.3e}")
    return InvariantDilation(D, action, pi, certs, residuals)


def dilation_residuals(D: KolmogorovDecomposition, S: StarSemigroup, action: SemigroupAction, pi: dict) -> dict:
    """Worst residuals of ``pi(st) = pi(s)pi(t)``, ``pi(s*) = pi(s)^*`` and ``pi(s)V(x) = V(s.x)``."""
    k = D.kernel
    mult = star = inter = 0.0
    for s in S:
        ps = pi[s]
        for t in S:
            d = pi[S.mult[(s, t)]] - ps @ pi[t]
            mult = max(mult, max((_tol.residual(d[lam]) for lam in k.poset), default=0.0))
        d = pi[S.star[s]] - ps.H
        star = max(star, max((_tol.residual(d[lam]) for lam in k.poset), default=0.0))
        imgs = _images(action, D.V, s, k.points)
        for x in k.points:
            d = ps @ D.V[x] - imgs[x]
            inter = max(inter, max((_tol.residual(d[lam]) for lam in k.poset), default=0.0))
    return {"multiplicative": mult, "star": star, "intertwining": inter}


@dataclass(frozen=True, eq=False)
class ReproducingKernelSpace:
    """Function view of a minimal decomposition: ``w`` in ``K_lam`` becomes ``x -> V_lam(x)^* w``."""

    decomposition: KolmogorovDecomposition

    def evaluate(self, w, lam) -> dict:
        w = np.asarray(w, dtype=complex)
        return {x: V[lam].conj().T @ w for x, V in self.decomposition.V.items()}

    def section(self, x, h, lam) -> np.ndarray:
        """The vector ``V_lam(x) h``, whose function is ``y -> k_lam(y, x) h``."""
        return self.decomposition.V[x][lam] @ np.asarray(h, dtype=complex)

    def inner(self, w1, w2) -> complex:
        """``<w1, w2>``, linear in the first slot."""
        return complex(np.vdot(np.asarray(w2, complex), np.asarray(w1, complex)))

    def reproducing_residual(self, w, x, h, lam) -> float:
        """``|<f_w, k_x h> - <f_w(x), h>|``."""
        lhs = self.inner(w, self.section(x, h, lam))
        rhs = complex(np.vdot(np.asarray(h, complex), self.evaluate(w, lam)[x]))
        return abs(lhs - rhs)


def reproducing_kernel_space(D: KolmogorovDecomposition) -> ReproducingKernelSpace:
    if not D.minimal:
        raise NotMinimal("the reproducing kernel view needs a minimal decomposition")
    return ReproducingKernelSpace(D)


def _as_pair(D):
    if isinstance(D, InvariantDilation):
        return D.decomposition, D.pi
    return D, None


def unitary_equivalence(D1, D2) -> LocallyBoundedOperator:
    """The locally unitary ``U`` with ``U V1(x) = V2(x)`` (and ``U pi1 = pi2 U`` when present)."""
    E1, pi1 = _as_pair(D1)
    E2, pi2 = _as_pair(D2)
    if not (E1.minimal and E2.minimal):
        raise NotMinimal("unitary equivalence is only defined for minimal decompositions")
    k1, k2 = E1.kernel, E2.kernel
    if k1.points != k2.points or not k1.space.same_as(k2.space):
        raise NotEquivalent("decompositions live over different points or spaces")
    K1, K2 = E1.space, E2.space
    if K1.dims != K2.dims:
        raise NotEquivalent(f"dilation dimensions differ: {K1.dims} vs {K2.dims}")
    levels = {}
    for lam in k1.poset:
        m1 = spanning_matrix(k1, K1, E1.V, lam)
        m2 = spanning_matrix(k2, K2, E2.V, lam)
        levels[lam] = m2 @ np.linalg.pinv(m1, rcond=np.sqrt(_tol.RANK_CUTOFF)) if m1.size else np.zeros((K2.dims[lam], K1.dims[lam]), complex)
    try:
        U = LocallyBoundedOperator(K1, K2, levels)
    except (CoherenceViolation, AdjointCoherenceViolation) as exc:
        raise NotEquivalent(f"the induced map is not coherent: {exc}") from None
    res = equivalence_residuals(U, D1, D2)
    gnorm = _tol.spectral_norm(k1.gram(k1.space.top)) + _tol.spectral_norm(k2.gram(k2.space.top))
    tol = 10 * _tol.scale() * (1.0 + gnorm)
    for name, r in res.items():
        if r > tol:
            raise NotEquivalent(f"{name} residual {r:.3e} exceeds {tol:.3e}")
    return U


def equivalence_residuals(U: LocallyBoundedOperator, D1, D2) -> dict:
    E1, pi1 = _as_pair(D1)
    E2, pi2 = _as_pair(D2)
    P = E1.kernel.poset
    uni = inter = rep = 0.0
    for lam in P:
        u = U[lam]
        uni = max(uni, _tol.residual(u.conj().T @ u - np.eye(u.shape[1])), _tol.residual(u @ u.conj().T - np.eye(u.shape[0])))
        for x in E1.kernel.points:
            inter = max(inter, _tol.residual(u @ E1.V[x][lam] - E2.V[x][lam]))
        if pi1 is not None and pi2 is not None:
            for s in pi1:
                rep = max(rep, _tol.residual(u @ pi1[s][lam] - pi2[s][lam] @ u))
    return {"unitary": uni, "intertwining": inter, "representation": rep}


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    algebra: ConcreteLocallyCStarAlgebra
    phi: tuple
    dilation: InvariantDilation
    pi: tuple
    W: LocallyBoundedOperator
    residuals: dict

    @property
    def space(self) -> LocallyHilbertSpace:
        return self.dilation.space

    def represent(self, a) -> LocallyBoundedOperator:
        return linear_combination(np.asarray(a, complex), list(self.pi), self.space, self.space)


def stinespring(A: ConcreteLocallyCStarAlgebra, phi_images, limit: int = 64) -> StinespringDilation:
    """Coherent Stinespring dilation ``phi(a) = W^* pi(a) W`` of a CP map on a unital algebra.

    ``phi_images[i]`` is ``phi(basis_i)``.  The kernel ``k(a, b) = phi(a^* b)``
    lives on the basis together with the unit; the multiplicative semigroup of
    the basis acts on it by left multiplication.
    """
    phi_images = tuple(phi_images)
    unit = A.identity_coefficients()
    if unit is None:
        raise NotUnital("the algebra does not contain the identity")
    if len(phi_images) != A.dim:
        raise ValueError(f"phi needs {A.dim} basis images, got {len(phi_images)}")
    eye = np.eye(A.dim, dtype=complex)
    labels = [f"b{i}" for i in range(A.dim)] + ["1"]
    points = [eye[i] for i in range(A.dim)] + [unit]
    SG = multiplicative_semigroup(A, [eye[i] for i in range(A.dim)], labels=labels[:-1], limit=limit)
    k, action = kernel_from_cp_map(A, phi_images, points, labels=labels, semigroup=SG)
    try:
        require_psd(k)
    except KernelNotPSD as exc:
        raise NotCompletelyPositive(f"phi is not completely positive: {exc}") from None
    dil = invariant_dilation(k, SG.semigroup, action)
    pi = tuple(dil.pi[lab] for lab in labels[:-1])
    W = dil.V["1"]
    out = StinespringDilation(A, phi_images, dil, pi, W, {})
    res = stinespring_residuals(out)
    tol = 10 * _tol.scale() * (1.0 + _tol.spectral_norm(k.gram(k.space.top)))
    for name, r in res.items():
        if r > tol:
            raise ConstructionError(f"{name} residual {r:.3e} exceeds {tol:.3e}")
    res.update({f"dilation_{n}": r for n, r in dil.residuals.items()})
    object.__setattr__(out, "residuals", res)
    return out


def stinespring_residuals(D: StinespringDilation) -> dict:
    A = D.algebra
    P = A.poset
    pi = list(D.pi)
    compress = mult = star = 0.0
    for i in range(A.dim):
        approx = D.W.H @ pi[i] @ D.W
        compress = max(compress, max(_tol.residual(approx[lam] - D.phi[i][lam]) for lam in P))
        s = linear_combination(A.involution[i], pi, D.space, D.space)
        star = max(star, max(_tol.residual(pi[i].H[lam] - s[lam]) for lam in P))
        for j in range(A.dim):
            p = linear_combination(A.structure[i, j], pi, D.space, D.space)
            mult = max(mult, max(_tol.residual((pi[i] @ pi[j])[lam] - p[lam]) for lam in P))
    return {"compression": compress, "multiplicative": mult, "star": star}
