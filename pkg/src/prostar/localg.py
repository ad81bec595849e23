"""Concrete locally C*-algebras given by a finite linear basis of operator nets.

An algebra is a *-closed span of locally bounded endomorphisms of a carrier
space, carried together with its structure constants

    basis[i] @ basis[j] = sum_k structure[i, j, k] * basis[k]
    basis[i]^*          = sum_k involution[i, k]   * basis[k]

Elements are coefficient vectors over ``basis``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _tol
from .errors import ClosureTooLarge, ConstructionError, InvalidSystem, NotCoherent, NotInAlgebra, NotMultiplicative, NotStarPreserving, PosetMismatch
from .lochilbert import LocallyHilbertSpace, make_space, tensor_space
from .locop import LocallyBoundedOperator, adjoint, coherent_basis, from_top, linear_combination, tensor_op
from .poset import DirectedPoset, maximum

SPAN_RTOL = 1e-8


def _in_span_residual(frame: np.ndarray, v: np.ndarray) -> tuple:
    """Project ``v`` off the orthonormal columns of ``frame`` (twice, for stability)."""
    r = v.copy()
    if frame.shape[1]:
        for _ in range(2):
            r = r - frame @ (frame.conj().T @ r)
    return r, float(np.linalg.norm(r))


@dataclass(frozen=True, eq=False)
class ConcreteLocallyCStarAlgebra:
    carrier: LocallyHilbertSpace
    basis: tuple
    structure: np.ndarray
    involution: np.ndarray
    _flat: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def poset(self) -> DirectedPoset:
        return self.carrier.poset

    def element(self, coeffs) -> LocallyBoundedOperator:
        return linear_combination(np.asarray(coeffs, dtype=complex), list(self.basis), self.carrier, self.carrier)

    def coefficients(self, op, what="operator") -> np.ndarray:
        """Re-express an operator (or ambient matrix) in the basis."""
        top = op.top if isinstance(op, LocallyBoundedOperator) else np.asarray(op, dtype=complex)
        v = top.reshape(-1)
        if self.dim == 0:
            if np.linalg.norm(v) > SPAN_RTOL:
                raise NotInAlgebra(f"{what} is not in the (zero) algebra")
            return np.zeros(0, dtype=complex)
        c, *_ = np.linalg.lstsq(self._flat, v, rcond=None)
        r = float(np.linalg.norm(self._flat @ c - v))
        if r > SPAN_RTOL * (1.0 + float(np.linalg.norm(v))):
            raise NotInAlgebra(f"{what} is not in the algebra: residual {r:.3e}")
        return c

    def contains(self, op) -> bool:
        try:
            self.coefficients(op)
        except NotInAlgebra:
            return False
        return True

    def product(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(a, complex), np.asarray(b, complex), self.structure)

    def star(self, a) -> np.ndarray:
        return np.conj(np.asarray(a, complex)) @ self.involution

    def level_matrices(self, lam) -> list:
        return [b[lam] for b in self.basis]

    def identity_coefficients(self):
        """Coefficients of the carrier identity, or ``None`` if the algebra is not unital."""
        try:
            return self.coefficients(np.eye(self.carrier.dim), "identity")
        except NotInAlgebra:
            return None

    def structure_residual(self) -> float:
        worst = 0.0
        for i, bi in enumerate(self.basis):
            for j, bj in enumerate(self.basis):
                rhs = np.tensordot(self.structure[i, j], self._stack_top(), axes=1)
                worst = max(worst, _tol.residual(bi.top @ bj.top - rhs))
        return worst

    def _stack_top(self) -> np.ndarray:
        return np.array([b.top for b in self.basis])


def _build(carrier, basis) -> ConcreteLocallyCStarAlgebra:
    n = len(basis)
    d = carrier.dim
    flat = np.array([b.top.reshape(-1) for b in basis]).T if n else np.zeros((d * d, 0), complex)
    alg = ConcreteLocallyCStarAlgebra(carrier, tuple(basis), np.zeros((n, n, n), complex), np.zeros((n, n), complex), flat)
    structure = np.zeros((n, n, n), complex)
    involution = np.zeros((n, n), complex)
    for i, bi in enumerate(basis):
        involution[i] = alg.coefficients(bi.top.conj().T, "adjoint of a basis element")
        for j, bj in enumerate(basis):
            structure[i, j] = alg.coefficients(bi.top @ bj.top, "product of basis elements")
    object.__setattr__(alg, "structure", structure)
    object.__setattr__(alg, "involution", involution)
    return alg


def make_algebra(H: LocallyHilbertSpace, generators) -> ConcreteLocallyCStarAlgebra:
    """Close ``generators`` under adjoint, product and linear span.

    The basis keeps the generators (and then their adjoints, then products)
    in discovery order, skipping anything already in the span; products are
    normalised to unit Frobenius norm.
    """
    d = H.dim
    limit = d * d
    basis: list = []
    frame = np.zeros((d * d, 0), complex)

    def try_add(op, normalise):
        nonlocal frame
        v = op.top.reshape(-1)
        nv = float(np.linalg.norm(v))
        r, nr = _in_span_residual(frame, v)
        if nr <= SPAN_RTOL * (1.0 + nv) or nr == 0.0:
            return False
        if len(basis) >= limit:
            raise ClosureTooLarge(f"span exceeds dim B(H_top) = {limit}")
        basis.append(op if not normalise else LocallyBoundedOperator(op.domain, op.codomain, {k: m / nv for k, m in op.levels.items()}))
        frame = np.hstack([frame, (r / nr)[:, None]])
        return True

    for g in generators:
        if not g.domain.same_as(H) or not g.codomain.same_as(H):
            raise PosetMismatch("generators must be endomorphisms of the carrier")
        try_add(g, False)
    for g in list(basis):
        try_add(adjoint(g), False)

    done = set()
    for _ in range(2 * limit + 2):
        n = len(basis)
        grew = False
        for i in range(n):
            for j in range(n):
                if (i, j) in done:
                    continue
                done.add((i, j))
                p = basis[i] @ basis[j]
                if try_add(p, True):
                    grew = True
                    try_add(adjoint(basis[-1]), True)
        if not grew:
            break
    else:
        raise ClosureTooLarge("closure did not stabilise")
    return _build(H, basis)


def _diagonal_membership(H):
    """Per-coordinate level membership when every level projection is diagonal, else ``None``."""
    member = []
    for lam in H.poset:
        p = H.ambient_projection(lam)
        if _tol.residual(p - np.diag(np.diag(p))) > _tol.atol(p):
            return None
        member.append(np.round(np.diag(p).real).astype(int))
    return np.array(member).T if member else None


def full_algebra(H: LocallyHilbertSpace) -> ConcreteLocallyCStarAlgebra:
    """``B_loc(H)``.  Uses matrix units when the level projections are diagonal."""
    member = _diagonal_membership(H)
    d = H.dim
    if member is not None:
        gens = []
        for i in range(d):
            for j in range(d):
                if np.array_equal(member[i], member[j]):
                    e = np.zeros((d, d), complex)
                    e[i, j] = 1.0
                    gens.append(from_top(H, H, e))
    else:
        gens = [from_top(H, H, m) for m in coherent_basis(H, H)]
    return _build(H, gens)


def matrix_algebra(n: int) -> ConcreteLocallyCStarAlgebra:
    """``M_n`` on ``C^n`` over a one-point poset, basis = matrix units (row major)."""
    from .poset import validate_poset

    H = make_space(validate_poset(["*"]), {"*": n})
    return full_algebra(H)


def algebra_seminorm(A: ConcreteLocallyCStarAlgebra, a, mu) -> float:
    """``p_mu(a)``: spectral norm of the level-``mu`` matrix of ``a``."""
    A.poset.index(mu)
    m = sum((c * b for c, b in zip(np.asarray(a, complex), A.level_matrices(mu))),
            np.zeros((A.carrier.dims[mu],) * 2, complex))
    return _tol.spectral_norm(m)


def bounded_norm(A: ConcreteLocallyCStarAlgebra, a) -> float:
    return max(algebra_seminorm(A, a, lam) for lam in A.poset)


@dataclass
class MorphismReport:
    multiplicative_residual: float
    star_residual: float
    coherence_residual: float
    faithful: dict

    @property
    def is_faithful(self) -> bool:
        return all(self.faithful.values())


def _rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > _tol.RANK_CUTOFF * max(1.0, s[0])))


def check_coherent_morphism(A, B: ConcreteLocallyCStarAlgebra, images) -> MorphismReport:
    """Verify that ``basis_i(A) -> images[i]`` extends to a coherent *-morphism into ``B``.

    ``A`` may be a concrete algebra or a :class:`MatrixProjectiveSystem`; it
    needs ``dim``, ``structure``, ``involution``, ``poset`` and
    ``level_matrices``.
    """
    images = list(images)
    if len(images) != A.dim:
        raise ValueError(f"need {A.dim} images, got {len(images)}")
    if A.poset != B.poset:
        raise PosetMismatch("coherent morphisms need a shared poset")
    for k, img in enumerate(images):
        B.coefficients(img, f"image of basis element {k}")
    worst_m = worst_s = worst_c = 0.0
    faithful = {}
    for lam in A.poset:
        rho = [img[lam] for img in images]
        shape = (B.carrier.dims[lam],) * 2
        tol = 10 * _tol.atol(*rho) * (1.0 + _tol.max_abs(*rho))
        stack = np.array(rho) if rho else np.zeros((0,) + shape)
        for i in range(A.dim):
            for j in range(A.dim):
                rhs = np.tensordot(A.structure[i, j], stack, axes=1) if A.dim else 0
                r = _tol.residual(rho[i] @ rho[j] - rhs)
                worst_m = max(worst_m, r)
                if r > tol:
                    raise NotMultiplicative(lam, r)
            r = _tol.residual(rho[i].conj().T - np.tensordot(A.involution[i], stack, axes=1))
            worst_s = max(worst_s, r)
            if r > tol:
                raise NotStarPreserving(lam, r)
        src = np.array([m.reshape(-1) for m in A.level_matrices(lam)]).T if A.dim else np.zeros((0, 0))
        img = np.array([m.reshape(-1) for m in rho]).T if A.dim else np.zeros((0, 0))
        if A.dim and src.size:
            _, s, vh = np.linalg.svd(src)
            rank = int(np.sum(s > _tol.RANK_CUTOFF * max(1.0, s[0] if s.size else 0.0)))
            null = vh[rank:].conj().T
            r = _tol.residual(img @ null) if null.size else 0.0
        elif A.dim:
            r = _tol.residual(img)
        else:
            r = 0.0
        worst_c = max(worst_c, r)
        if r > tol:
            raise NotCoherent(lam, r)
        faithful[lam] = _rank(img) == _rank(src) if A.dim else True
    return MorphismReport(worst_m, worst_s, worst_c, faithful)


@dataclass(frozen=True, eq=False)
class MatrixProjectiveSystem:
    """A projective system of matrix *-algebras over a finite directed poset.

    ``bases[lam]`` is an array ``(dim_lam, n_lam, n_lam)`` spanning ``A_lam``;
    ``maps[(lam, mu)]`` (for ``lam < mu``) is the ``dim_lam x dim_mu`` matrix of
    the connecting *-morphism ``A_mu -> A_lam`` on coefficient vectors.
    Elements of the limit are coefficient vectors over the top basis.
    """

    poset: DirectedPoset
    bases: dict
    maps: dict
    structure: np.ndarray = field(init=False, repr=False)
    involution: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bases = {lam: np.asarray(self.bases[lam], dtype=complex) for lam in self.poset}
        object.__setattr__(self, "bases", bases)
        maps = {}
        for lam, mu in self.poset.pairs():
            if lam == mu:
                maps[(lam, mu)] = np.eye(bases[lam].shape[0], dtype=complex)
            elif (lam, mu) not in self.maps:
                raise InvalidSystem(f"missing connecting map for {lam!r} <= {mu!r}")
            else:
                maps[(lam, mu)] = np.asarray(self.maps[(lam, mu)], dtype=complex).reshape(
                    bases[lam].shape[0], bases[mu].shape[0])
        object.__setattr__(self, "maps", maps)
        structures = {lam: self._structure(lam) for lam in self.poset}
        self._check_maps(structures)
        top = maximum(self.poset)
        object.__setattr__(self, "structure", structures[top][0])
        object.__setattr__(self, "involution", structures[top][1])

    @property
    def top(self):
        return maximum(self.poset)

    @property
    def dim(self) -> int:
        return self.bases[self.top].shape[0]

    def _structure(self, lam):
        b = self.bases[lam]
        n = b.shape[0]
        flat = b.reshape(n, -1).T
        if n and _rank(flat) < n:
            raise InvalidSystem(f"basis at {lam!r} is linearly dependent")

        def coeffs(m, what):
            c, *_ = np.linalg.lstsq(flat, m.reshape(-1), rcond=None)
            r = float(np.linalg.norm(flat @ c - m.reshape(-1)))
            if r > SPAN_RTOL * (1.0 + float(np.linalg.norm(m))):
                raise InvalidSystem(f"A_{lam} is not closed under {what}: residual {r:.3e}")
            return c

        structure = np.zeros((n, n, n), complex)
        involution = np.zeros((n, n), complex)
        for i in range(n):
            involution[i] = coeffs(b[i].conj().T, "adjoints")
            for j in range(n):
                structure[i, j] = coeffs(b[i] @ b[j], "products")
        return structure, involution

    def _check_maps(self, structures):
        for lam, mu in self.poset.strict_pairs():
            p = self.maps[(lam, mu)]
            c_mu, s_mu = structures[mu]
            c_lam, s_lam = structures[lam]
            for i in range(p.shape[1]):
                for j in range(p.shape[1]):
                    lhs = p @ c_mu[i, j]
                    rhs = np.einsum("a,b,abk->k", p[:, i], p[:, j], c_lam)
                    if _tol.residual(lhs - rhs) > 10 * _tol.atol(lhs, rhs):
                        raise InvalidSystem(f"connecting map {lam!r} <= {mu!r} is not multiplicative")
                lhs = p @ s_mu[i]
                rhs = np.conj(p[:, i]) @ s_lam
                if _tol.residual(lhs - rhs) > 10 * _tol.atol(lhs, rhs):
                    raise InvalidSystem(f"connecting map {lam!r} <= {mu!r} is not *-preserving")
        for lam, mu in self.poset.pairs():
            for nu in self.poset:
                if self.poset.le(mu, nu):
                    d = self.maps[(lam, nu)] - self.maps[(lam, mu)] @ self.maps[(mu, nu)]
                    if _tol.residual(d) > _tol.atol(self.maps[(lam, nu)]):
                        raise InvalidSystem(f"transitivity fails for {lam!r} <= {mu!r} <= {nu!r}")

    def level_matrices(self, lam) -> list:
        """Level-``lam`` matrices of the top basis elements."""
        p = self.maps[(lam, self.top)]
        b = self.bases[lam]
        return [np.tensordot(p[:, k], b, axes=1) for k in range(self.dim)]


@dataclass
class Representation:
    space: LocallyHilbertSpace
    images: list
    algebra: ConcreteLocallyCStarAlgebra
    report: MorphismReport


def gelfand_naimark_rep(system: MatrixProjectiveSystem) -> Representation:
    """Faithful coherent representation on ``H_lam = (+)_{mu <= lam} C^{n_mu}``.

    Blocks are laid out in the poset's element order; ``pi_lam(a)`` is the
    block diagonal of the ``a_mu`` for ``mu <= lam``.
    """
    P = system.poset
    sizes = {lam: system.bases[lam].shape[1] for lam in P}
    offsets, o = {}, 0
    for lam in P:
        offsets[lam] = o
        o += sizes[lam]
    total = o
    dims, js = {}, {}
    for lam in P:
        below = [mu for mu in P if P.le(mu, lam)]
        dims[lam] = sum(sizes[mu] for mu in below)
        j = np.zeros((total, dims[lam]), complex)
        c = 0
        for mu in below:
            j[offsets[mu]: offsets[mu] + sizes[mu], c: c + sizes[mu]] = np.eye(sizes[mu])
            c += sizes[mu]
        js[lam] = j
    H = make_space(P, dims, js)
    level_mats = {lam: system.level_matrices(lam) for lam in P}
    images = []
    for k in range(system.dim):
        top = np.zeros((total, total), complex)
        for mu in P:
            top[offsets[mu]: offsets[mu] + sizes[mu], offsets[mu]: offsets[mu] + sizes[mu]] = level_mats[mu][k]
        images.append(from_top(H, H, top))
    target = make_algebra(H, images) if images else _build(H, [])
    report = check_coherent_morphism(system, target, images)
    return Representation(H, images, target, report)


def spatial_tensor(A: ConcreteLocallyCStarAlgebra, B: ConcreteLocallyCStarAlgebra) -> ConcreteLocallyCStarAlgebra:
    """Algebra on ``H (x) G`` generated by the elementary tensors of the two bases."""
    HG = tensor_space(A.carrier, B.carrier)
    gens = [tensor_op(a, b) for a in A.basis for b in B.basis]
    AB = make_algebra(HG, gens) if gens else _build(HG, [])
    for a in A.basis:
        for b in B.basis:
            r = cross_seminorm_residual(a, b)
            if r > 1e-8 * (1.0 + _tol.max_abs(a.top) * _tol.max_abs(b.top)):
                raise ConstructionError(f"cross-seminorm identity fails: residual {r:.3e}")
    return AB


def cross_seminorm_residual(a: LocallyBoundedOperator, b: LocallyBoundedOperator) -> float:
    """Worst ``|p_(lam,alpha)(a (x) b) - p_lam(a) p_alpha(b)|`` over the product poset."""
    ab = tensor_op(a, b)
    return max(
        abs(_tol.spectral_norm(ab[(lam, al)]) - _tol.spectral_norm(a[lam]) * _tol.spectral_norm(b[al]))
        for (lam, al) in ab.domain.poset
    )
