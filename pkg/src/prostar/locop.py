"""Locally bounded operators: coherent, adjoint-coherent nets of matrices.

An operator ``T: H -> K`` between locally Hilbert spaces over one poset is
stored level by level.  Construction always validates

* coherence,          ``T_mu J^H_{mu,lam} = J^K_{mu,lam} T_lam``
* adjoint coherence,  ``T_mu^* J^K_{mu,lam} = J^H_{mu,lam} T_lam^*``

for every comparable pair, so any instance in hand is a genuine locally
bounded operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg

from . import _tol
from .errors import (
    AdjointCoherenceViolation,
    CoherenceViolation,
    NotEndomorphism,
    PosetMismatch,
    ShapeMismatch,
)
from .lochilbert import LocalVector, LocallyHilbertSpace, direct_sum_space, tensor_space


def coherence_residuals(H: LocallyHilbertSpace, K: LocallyHilbertSpace, levels: Mapping):
    """Yield ``(lam, mu, r1, r2)`` for every strict comparable pair.

    ``r1`` is the (lbo1) residual and ``r2`` the (lbo2) residual.
    """
    for lam, mu in H.poset.strict_pairs():
        jh = H.connecting(mu, lam)
        jk = K.connecting(mu, lam)
        t_mu, t_lam = levels[mu], levels[lam]
        r1 = _tol.residual(t_mu @ jh - jk @ t_lam)
        r2 = _tol.residual(t_mu.conj().T @ jk - jh @ t_lam.conj().T)
        yield lam, mu, r1, r2


def _check_shapes(H, K, levels):
    if H.poset != K.poset:
        raise PosetMismatch("domain and codomain live over different posets")
    out = {}
    for lam in H.poset:
        if lam not in levels:
            raise ShapeMismatch(f"no matrix given for level {lam!r}")
        m = np.asarray(levels[lam], dtype=complex)
        shape = (K.dims[lam], H.dims[lam])
        if m.size == 0 and 0 in shape:
            m = m.reshape(shape)
        if m.shape != shape:
            raise ShapeMismatch(f"level {lam!r} must be {shape[0]}x{shape[1]}, got {m.shape}")
        out[lam] = m
    return out


@dataclass(frozen=True, eq=False)
class LocallyBoundedOperator:
    domain: LocallyHilbertSpace
    codomain: LocallyHilbertSpace
    levels: dict
    residual: float = field(init=False)

    def __post_init__(self):
        levels = _check_shapes(self.domain, self.codomain, self.levels)
        object.__setattr__(self, "levels", levels)
        tol = _tol.atol(*levels.values())
        worst = 0.0
        for lam, mu, r1, r2 in coherence_residuals(self.domain, self.codomain, levels):
            if r1 > tol:
                raise CoherenceViolation(lam, mu, r1)
            if r2 > tol:
                raise AdjointCoherenceViolation(lam, mu, r2)
            worst = max(worst, r1, r2)
        object.__setattr__(self, "residual", worst)

    def __getitem__(self, lam) -> np.ndarray:
        return self.levels[lam]

    @property
    def top(self) -> np.ndarray:
        return self.levels[self.domain.top]

    @property
    def H(self) -> "LocallyBoundedOperator":
        return adjoint(self)

    def __matmul__(self, other):
        if isinstance(other, LocallyBoundedOperator):
            return compose(self, other)
        if isinstance(other, LocalVector):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __rmul__(self, c):
        return scale(c, self)

    def __repr__(self):
        return f"LocallyBoundedOperator({self.domain!r} -> {self.codomain!r})"


def check_locally_bounded(H, K, levels) -> LocallyBoundedOperator:
    """Validate a level net; raises on the first violated pair."""
    return LocallyBoundedOperator(H, K, dict(levels))


def identity(H: LocallyHilbertSpace) -> LocallyBoundedOperator:
    return LocallyBoundedOperator(H, H, {lam: np.eye(H.dims[lam], dtype=complex) for lam in H.poset})


def zero(H: LocallyHilbertSpace, K: LocallyHilbertSpace | None = None) -> LocallyBoundedOperator:
    K = H if K is None else K
    return LocallyBoundedOperator(H, K, {lam: np.zeros((K.dims[lam], H.dims[lam]), complex) for lam in H.poset})


def from_top(H, K, matrix) -> LocallyBoundedOperator:
    """Compress an ambient matrix to every level, ``T_lam = J^K_lam^* T J^H_lam``.

    The result validates only if ``matrix`` reduces every level subspace.
    """
    matrix = np.asarray(matrix, dtype=complex)
    return LocallyBoundedOperator(
        H, K, {lam: K.embedding(lam).conj().T @ matrix @ H.embedding(lam) for lam in H.poset}
    )


def coherent_basis(H: LocallyHilbertSpace, K: LocallyHilbertSpace) -> list:
    """Orthonormal (Frobenius) basis of ambient matrices of ``B_loc(H, K)``.

    ``T: H_top -> K_top`` is locally bounded exactly when it intertwines the
    level projections, ``P^K_lam T = T P^H_lam`` for all ``lam``; this
    returns a basis of the solution space of that linear system.
    """
    if H.poset != K.poset:
        raise PosetMismatch("spaces live over different posets")
    n, m = K.dim, H.dim
    if n * m == 0:
        return []
    rows = []
    eye_n, eye_m = np.eye(n), np.eye(m)
    for lam in H.poset:
        pk, ph = K.ambient_projection(lam), H.ambient_projection(lam)
        # row-major vec: vec(A X B) = (A kron B^T) vec(X)
        rows.append(np.kron(pk, eye_m) - np.kron(eye_n, ph.T))
    system = np.vstack(rows)
    _, s, vh = np.linalg.svd(system)
    cutoff = _tol.scale() * (1.0 + (s[0] if s.size else 0.0))
    rank = int(np.sum(s > cutoff))
    null = vh[rank:].conj()
    return [v.reshape(n, m) for v in null]


def _same_space(a, b, what):
    if a.poset != b.poset:
        raise PosetMismatch(f"{what}: spaces live over different posets")
    if not a.same_as(b):
        raise ShapeMismatch(f"{what}: spaces do not match")


def compose(T: LocallyBoundedOperator, S: LocallyBoundedOperator) -> LocallyBoundedOperator:
    """``T S`` (apply ``S`` first)."""
    _same_space(S.codomain, T.domain, "compose")
    return LocallyBoundedOperator(S.domain, T.codomain, {lam: T[lam] @ S[lam] for lam in T.domain.poset})


def adjoint(T: LocallyBoundedOperator) -> LocallyBoundedOperator:
    return LocallyBoundedOperator(T.codomain, T.domain, {lam: m.conj().T for lam, m in T.levels.items()})


def add(T: LocallyBoundedOperator, S: LocallyBoundedOperator) -> LocallyBoundedOperator:
    _same_space(T.domain, S.domain, "add")
    _same_space(T.codomain, S.codomain, "add")
    return LocallyBoundedOperator(T.domain, T.codomain, {lam: T[lam] + S[lam] for lam in T.domain.poset})


def scale(c, T: LocallyBoundedOperator) -> LocallyBoundedOperator:
    return LocallyBoundedOperator(T.domain, T.codomain, {lam: c * m for lam, m in T.levels.items()})


def linear_combination(coeffs, ops, H=None, K=None) -> LocallyBoundedOperator:
    """``sum_i coeffs[i] * ops[i]``; ``H``/``K`` are needed only when ``ops`` is empty."""
    if not ops:
        return zero(H, K)
    H, K = ops[0].domain, ops[0].codomain
    levels = {}
    for lam in H.poset:
        acc = np.zeros((K.dims[lam], H.dims[lam]), dtype=complex)
        for c, op in zip(coeffs, ops):
            if c != 0:
                acc = acc + c * op[lam]
        levels[lam] = acc
    return LocallyBoundedOperator(H, K, levels)


def apply(T: LocallyBoundedOperator, v: LocalVector) -> LocalVector:
    coords = np.asarray(v.coords, dtype=complex)
    if coords.shape != (T.domain.dims[v.level],):
        raise ShapeMismatch(f"vector at {v.level!r} must have length {T.domain.dims[v.level]}")
    return LocalVector(v.level, T[v.level] @ coords)


def seminorm(T: LocallyBoundedOperator, mu) -> float:
    """``q_mu(T)``: spectral norm of the level-``mu`` matrix."""
    T.domain.poset.index(mu)
    return _tol.spectral_norm(T[mu])


def bounded_seminorm(T: LocallyBoundedOperator) -> float:
    """Supremum of the level seminorms (exact over a finite poset)."""
    return max(seminorm(T, lam) for lam in T.domain.poset)


def _require_endo(T):
    if not T.domain.same_as(T.codomain):
        raise NotEndomorphism("operator class checks need H = K")


def is_locally_selfadjoint(T: LocallyBoundedOperator) -> bool:
    _require_endo(T)
    return all(_tol.residual(m - m.conj().T) <= _tol.atol(m) for m in T.levels.values())


def min_level_eigenvalue(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def is_locally_positive(T: LocallyBoundedOperator) -> bool:
    if not is_locally_selfadjoint(T):
        return False
    for m in T.levels.values():
        if min_level_eigenvalue(m) < -_tol.scale() * (1.0 + _tol.spectral_norm(m)):
            return False
    return True


def unitary_residual(T: LocallyBoundedOperator) -> float:
    """Worst of ``||T*T - I||`` and ``||TT* - I||`` over levels; ``inf`` on shape mismatch."""
    worst = 0.0
    for lam, m in T.levels.items():
        if m.shape[0] != m.shape[1]:
            return float("inf")
        eye = np.eye(m.shape[0])
        worst = max(worst, _tol.residual(m.conj().T @ m - eye), _tol.residual(m @ m.conj().T - eye))
    return worst


def is_locally_unitary(T: LocallyBoundedOperator) -> bool:
    _require_endo(T)
    return unitary_residual(T) <= _tol.atol(*T.levels.values())


def positive_sqrt(T: LocallyBoundedOperator) -> LocallyBoundedOperator:
    """Levelwise square root ``S`` with ``S^* S = T`` for a locally positive ``T``.

    Eigenvalues are clipped at zero.  Functional calculus respects every
    reducing subspace, so the root is again coherent.
    """
    levels = {}
    for lam, m in T.levels.items():
        if m.size == 0:
            levels[lam] = m.copy()
            continue
        w, u = np.linalg.eigh((m + m.conj().T) / 2)
        levels[lam] = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    return LocallyBoundedOperator(T.domain, T.codomain, levels)


def expm_i(T: LocallyBoundedOperator) -> LocallyBoundedOperator:
    """``exp(i T)`` levelwise; locally unitary when ``T`` is locally selfadjoint."""
    return LocallyBoundedOperator(
        T.domain, T.codomain, {lam: scipy.linalg.expm(1j * m) if m.size else m.copy() for lam, m in T.levels.items()}
    )


def tensor_op(T: LocallyBoundedOperator, S: LocallyBoundedOperator) -> LocallyBoundedOperator:
    """``T (x) S`` on the tensor spaces; level ``(lam, alpha)`` is ``kron(T_lam, S_alpha)``."""
    dom = tensor_space(T.domain, S.domain)
    cod = tensor_space(T.codomain, S.codomain)
    return LocallyBoundedOperator(dom, cod, {(a, b): np.kron(T[a], S[b]) for (a, b) in dom.poset})


def direct_sum_op(T: LocallyBoundedOperator, S: LocallyBoundedOperator) -> LocallyBoundedOperator:
    """Block-diagonal ``T (+) S`` between direct-sum spaces."""
    dom = direct_sum_space(T.domain, S.domain)
    cod = direct_sum_space(T.codomain, S.codomain)
    return LocallyBoundedOperator(dom, cod, {lam: scipy.linalg.block_diag(T[lam], S[lam]) for lam in dom.poset})
