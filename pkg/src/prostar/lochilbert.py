"""Locally Hilbert spaces: nested nets of finite-dimensional Hilbert spaces.

Every level ``H_lam`` is stored through an isometry ``J_lam`` into the
ambient space ``H_top`` sitting at the maximum of the poset.  Pairwise
embeddings are derived, ``J_{mu,lam} = J_mu^* J_lam``, so the net is
consistent by construction and range inclusion becomes a projection residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _tol
from .errors import DimensionMismatch, NotIsometric, NotNested, PosetMismatch
from .poset import DirectedPoset, maximum, product_poset


@dataclass(frozen=True, eq=False)
class LocallyHilbertSpace:
    poset: DirectedPoset
    dims: dict
    ambient_isometries: dict
    top: object = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "top", maximum(self.poset))

    @property
    def dim(self) -> int:
        return self.dims[self.top]

    def embedding(self, lam) -> np.ndarray:
        """``J_lam``: columns are an orthonormal basis of ``H_lam`` inside ``H_top``."""
        return self.ambient_isometries[lam]

    def connecting(self, mu, lam) -> np.ndarray:
        """``J_{mu,lam}``, the isometric inclusion ``H_lam -> H_mu`` for ``lam <= mu``."""
        return self.ambient_isometries[mu].conj().T @ self.ambient_isometries[lam]

    def projection(self, lam, mu) -> np.ndarray:
        """Orthogonal projection of ``H_mu`` onto its subspace ``H_lam``."""
        j = self.connecting(mu, lam)
        return j @ j.conj().T

    def ambient_projection(self, lam) -> np.ndarray:
        j = self.ambient_isometries[lam]
        return j @ j.conj().T

    def same_as(self, other: "LocallyHilbertSpace") -> bool:
        if self is other:
            return True
        if self.poset != other.poset or self.dims != other.dims:
            return False
        return all(
            np.allclose(self.ambient_isometries[lam], other.ambient_isometries[lam],
                        rtol=0, atol=_tol.atol(self.ambient_isometries[lam]))
            for lam in self.poset
        )

    def __repr__(self):
        dims = ", ".join(f"{lam!r}: {d}" for lam, d in self.dims.items())
        return f"LocallyHilbertSpace({{{dims}}})"


@dataclass(frozen=True)
class LocalVector:
    """A vector of ``H`` presented at a level that contains it."""

    level: object
    coords: np.ndarray


def coordinate_embeddings(poset: DirectedPoset, dims: dict) -> dict:
    """``H_lam`` = span of the first ``d_lam`` standard basis vectors of ``H_top``."""
    top = maximum(poset)
    n = dims[top]
    eye = np.eye(n, dtype=complex)
    return {lam: eye[:, : dims[lam]].copy() for lam in poset}


def make_space(poset: DirectedPoset, dims: dict, embeddings="coordinate") -> LocallyHilbertSpace:
    """Build and validate a locally Hilbert space.

    Parameters
    ----------
    poset
        Validated directed poset.
    dims
        Level dimensions; must be monotone along the order.  Zero is allowed,
        since degenerate dilation spaces need it.
    embeddings
        ``"coordinate"`` or a mapping from level to its ambient isometry
        (a ``d_top x d_lam`` matrix with orthonormal columns).
    """
    missing = [lam for lam in poset if lam not in dims]
    if missing:
        raise DimensionMismatch(f"no dimension given for {missing!r}")
    dims = {lam: int(dims[lam]) for lam in poset}
    for lam, d in dims.items():
        if d < 0:
            raise DimensionMismatch(f"negative dimension at {lam!r}")
    for lam, mu in poset.pairs():
        if dims[lam] > dims[mu]:
            raise DimensionMismatch(f"dim H_{lam} = {dims[lam]} exceeds dim H_{mu} = {dims[mu]}")
    top = maximum(poset)
    n = dims[top]
    if isinstance(embeddings, str):
        if embeddings != "coordinate":
            raise ValueError(f"unknown embedding generator {embeddings!r}")
        js = coordinate_embeddings(poset, dims)
    else:
        js = {}
        for lam in poset:
            if lam not in embeddings:
                raise DimensionMismatch(f"missing embedding for {lam!r}")
            j = np.asarray(embeddings[lam], dtype=complex)
            if j.size == 0:
                j = j.reshape(n, dims[lam])
            if j.shape != (n, dims[lam]):
                raise DimensionMismatch(f"embedding at {lam!r} must be {n}x{dims[lam]}, got {j.shape}")
            js[lam] = j
    _validate(poset, dims, js)
    return LocallyHilbertSpace(poset, dims, js)


def _validate(poset, dims, js):
    top = maximum(poset)
    for lam in poset:
        j = js[lam]
        tol = _tol.atol(j)
        r = _tol.residual(j.conj().T @ j - np.eye(dims[lam]))
        if r > tol:
            raise NotIsometric(f"J_{lam} is not isometric: residual {r:.3e}")
    if _tol.residual(js[top] - np.eye(dims[top])) > _tol.atol(js[top]):
        raise NotIsometric("the ambient embedding at the maximum must be the identity")
    for lam, mu in poset.strict_pairs():
        jm = js[mu]
        r = _tol.residual(js[lam] - jm @ (jm.conj().T @ js[lam]))
        if r > _tol.atol(js[lam]):
            raise NotNested(f"range of J_{lam} is not inside range of J_{mu}: residual {r:.3e}")


def transitivity_residual(space: LocallyHilbertSpace) -> float:
    """Worst ``||J_{nu,lam} - J_{nu,mu} J_{mu,lam}||`` over chains ``lam <= mu <= nu``."""
    worst = 0.0
    P = space.poset
    for lam, mu in P.pairs():
        for nu in P.elements:
            if P.le(mu, nu):
                d = space.connecting(nu, lam) - space.connecting(nu, mu) @ space.connecting(mu, lam)
                worst = max(worst, _tol.residual(d))
    return worst


def embed(space: LocallyHilbertSpace, v: LocalVector, level) -> LocalVector:
    """Present ``v`` at a higher level."""
    if not space.poset.le(v.level, level):
        raise ValueError(f"cannot move a vector from {v.level!r} down to {level!r}")
    return LocalVector(level, space.connecting(level, v.level) @ np.asarray(v.coords, dtype=complex))


def inner_product(space: LocallyHilbertSpace, u: LocalVector, v: LocalVector, level=None) -> complex:
    """``<u, v>``, linear in ``u`` and conjugate-linear in ``v``.

    Computed at ``level`` (default: the first common upper bound of the two
    levels); the value does not depend on that choice.
    """
    if level is None:
        level = space.poset.common_upper(u.level, v.level)
    uu = embed(space, u, level).coords
    vv = embed(space, v, level).coords
    return complex(np.vdot(vv, uu))


def tensor_space(H: LocallyHilbertSpace, K: LocallyHilbertSpace) -> LocallyHilbertSpace:
    """Tensor product over the product poset; index ``(i, j) -> i * d_K + j``."""
    P = product_poset(H.poset, K.poset)
    dims = {(a, b): H.dims[a] * K.dims[b] for (a, b) in P}
    js = {(a, b): np.kron(H.embedding(a), K.embedding(b)) for (a, b) in P}
    _validate(P, dims, js)
    return LocallyHilbertSpace(P, dims, js)


def direct_sum_space(H: LocallyHilbertSpace, K: LocallyHilbertSpace) -> LocallyHilbertSpace:
    """``H (+) K`` over a shared poset, ``H`` occupying the leading coordinates."""
    if H.poset != K.poset:
        raise PosetMismatch("direct sums need a shared poset")
    dims = {lam: H.dims[lam] + K.dims[lam] for lam in H.poset}
    js = {}
    for lam in H.poset:
        a, b = H.embedding(lam), K.embedding(lam)
        j = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
        j[: a.shape[0], : a.shape[1]] = a
        j[a.shape[0]:, a.shape[1]:] = b
        js[lam] = j
    _validate(H.poset, dims, js)
    return LocallyHilbertSpace(H.poset, dims, js)
