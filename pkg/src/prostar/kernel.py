"""Operator-valued kernels on finite point sets, *-semigroups and their actions.

Block Gram matrices are laid out point-major: entry ``(i*d + p, j*d + q)`` is
``k_lam(x_i, x_j)[p, q]`` with ``d = dim H_lam``.

Actions are stored linearly.  A set action ``s.x = y`` is the one-hot column
``e_y``; a linear action may send a point to a combination of points, which is
how left multiplication on an algebra is encoded.  The kernel is extended
conjugate-linearly in its first slot and linearly in its second.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _tol
from .errors import (InvalidAction, InvalidSemigroup, KernelNotPSD, PointsNotSpanning, PosetMismatch,
                     ProductOutsideSpan, SemigroupTooLarge)
from .lochilbert import LocallyHilbertSpace, make_space
from .localg import ConcreteLocallyCStarAlgebra
from .locop import LocallyBoundedOperator, from_top, linear_combination, zero
from .poset import validate_poset


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    points: tuple
    space: LocallyHilbertSpace
    values: dict

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(set(self.points)) != len(self.points):
            raise ValueError("kernel points must be distinct")
        for x in self.points:
            for y in self.points:
                v = self.values.get((x, y))
                if v is None:
                    raise ValueError(f"kernel value k({x!r}, {y!r}) is missing")
                if not (v.domain.same_as(self.space) and v.codomain.same_as(self.space)):
                    raise PosetMismatch(f"k({x!r}, {y!r}) is not an endomorphism of the kernel's space")

    def __call__(self, x, y) -> LocallyBoundedOperator:
        return self.values[(x, y)]

    @property
    def poset(self):
        return self.space.poset

    def gram(self, lam) -> np.ndarray:
        m, d = len(self.points), self.space.dims[lam]
        g = np.zeros((m * d, m * d), complex)
        for i, x in enumerate(self.points):
            for j, y in enumerate(self.points):
                g[i * d:(i + 1) * d, j * d:(j + 1) * d] = self.values[(x, y)][lam]
        return g


def kernel_from_blocks(space: LocallyHilbertSpace, points, top_gram) -> OperatorKernel:
    """Kernel whose top-level block Gram matrix is ``top_gram`` (levels by compression)."""
    d = space.dim
    g = np.asarray(top_gram, dtype=complex)
    values = {}
    for i, x in enumerate(points):
        for j, y in enumerate(points):
            values[(x, y)] = from_top(space, space, g[i * d:(i + 1) * d, j * d:(j + 1) * d])
    return OperatorKernel(tuple(points), space, values)


def scalar_kernel(matrix, points=None) -> OperatorKernel:
    """Scalar kernel on a singleton poset with one-dimensional ``H``."""
    g = np.atleast_2d(np.asarray(matrix, dtype=complex))
    points = tuple(points) if points is not None else tuple(f"x{i + 1}" for i in range(g.shape[0]))
    H = make_space(validate_poset(["*"]), {"*": 1})
    return kernel_from_blocks(H, points, g)


def is_hermitian(k: OperatorKernel) -> bool:
    for x in k.points:
        for y in k.points:
            a, b = k(x, y), k(y, x)
            for lam in k.poset:
                if _tol.residual(a[lam].conj().T - b[lam]) > _tol.atol(a[lam], b[lam]):
                    return False
    return True


def _psd_margin(g: np.ndarray) -> tuple:
    """(smallest eigenvalue of the hermitian part, tolerance)."""
    if g.size == 0:
        return 0.0, _tol.scale()
    h = (g + g.conj().T) / 2
    w = np.linalg.eigvalsh(h)
    return float(w[0]), _tol.scale() * (1.0 + float(np.max(np.abs(w))))


def _level_psd(k: OperatorKernel, lam, idx=None) -> bool:
    g = k.gram(lam)
    if idx is not None:
        d = k.space.dims[lam]
        rows = [i * d + p for i in idx for p in range(d)]
        g = g[np.ix_(rows, rows)]
    if _tol.residual(g - g.conj().T) > _tol.atol(g):
        return False
    w, tol = _psd_margin(g)
    return w >= -tol


def is_positive_semidefinite(k: OperatorKernel) -> bool:
    return all(_level_psd(k, lam) for lam in k.poset)


def is_n_positive(k: OperatorKernel, n: int) -> bool:
    """n-positivity.  Tuples may repeat points, so principal blocks over ``min(n, m)`` distinct points suffice."""
    if n < 1:
        raise ValueError("n must be at least 1")
    m = len(k.points)
    if n >= m:
        return is_positive_semidefinite(k)
    return all(_level_psd(k, lam, idx) for lam in k.poset for idx in itertools.combinations(range(m), n))


def require_psd(k: OperatorKernel) -> None:
    for lam in k.poset:
        g = k.gram(lam)
        w, tol = _psd_margin(g)
        if w < -tol or _tol.residual(g - g.conj().T) > _tol.atol(g):
            raise KernelNotPSD(lam, w)


@dataclass(frozen=True, eq=False)
class StarSemigroup:
    elements: tuple
    mult: dict
    star: dict
    unit: object = None

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise InvalidSemigroup("a semigroup needs at least one element")
        if len(set(els)) != len(els):
            raise InvalidSemigroup("semigroup labels must be distinct")
        known = set(els)
        for s in els:
            if self.star.get(s) not in known:
                raise InvalidSemigroup(f"star of {s!r} is missing or unknown")
            for t in els:
                if self.mult.get((s, t)) not in known:
                    raise InvalidSemigroup(f"product {s!r}*{t!r} is missing or unknown")
        m, st = self.mult, self.star
        for s in els:
            if st[st[s]] != s:
                raise InvalidSemigroup(f"s** != s for {s!r}")
            for t in els:
                if st[m[(s, t)]] != m[(st[t], st[s])]:
                    raise InvalidSemigroup(f"(st)* != t*s* for s={s!r}, t={t!r}")
                for u in els:
                    if m[(m[(s, t)], u)] != m[(s, m[(t, u)])]:
                        raise InvalidSemigroup(f"associativity fails for ({s!r}, {t!r}, {u!r})")
        if self.unit is not None:
            if self.unit not in known:
                raise InvalidSemigroup(f"unit {self.unit!r} is not an element")
            for s in els:
                if m[(self.unit, s)] != s or m[(s, self.unit)] != s:
                    raise InvalidSemigroup(f"{self.unit!r} is not a unit")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def is_group(self) -> bool:
        """Whether ``s s* = s* s = unit`` for every ``s``."""
        if self.unit is None:
            return False
        return all(self.mult[(s, self.star[s])] == self.unit == self.mult[(self.star[s], s)] for s in self.elements)


def cyclic_group(n: int) -> StarSemigroup:
    """``Z/n`` with ``s* = s^-1``; elements ``e, g, g2, ..., g{n-1}``."""
    if n < 1:
        raise ValueError("group order must be positive")
    names = ["e"] + ["g" if k == 1 else f"g{k}" for k in range(1, n)]
    mult = {(names[a], names[b]): names[(a + b) % n] for a in range(n) for b in range(n)}
    star = {names[a]: names[(-a) % n] for a in range(n)}
    return StarSemigroup(tuple(names), mult, star, "e")


def klein_group() -> StarSemigroup:
    names = ("e", "a", "b", "c")
    bits = {"e": 0, "a": 1, "b": 2, "c": 3}
    inv = {v: k for k, v in bits.items()}
    mult = {(s, t): inv[bits[s] ^ bits[t]] for s in names for t in names}
    return StarSemigroup(names, mult, {s: s for s in names}, "e")


def trivial_semigroup() -> StarSemigroup:
    return StarSemigroup(("e",), {("e", "e"): "e"}, {"e": "e"}, "e")


@dataclass(frozen=True, eq=False)
class SemigroupAction:
    """Left action of ``semigroup`` on ``points``.

    ``matrices[s]`` is ``m x m`` with column ``j`` the coefficients of ``s.x_j``.
    """

    semigroup: StarSemigroup
    points: tuple
    matrices: dict
    is_set_action: bool = True

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        m = len(self.points)
        S = self.semigroup
        for s in S:
            a = self.matrices.get(s)
            if a is None or np.shape(a) != (m, m):
                raise InvalidAction(f"action of {s!r} is missing or has the wrong shape")
        for s in S:
            for t in S:
                d = self.matrices[S.mult[(s, t)]] - self.matrices[s] @ self.matrices[t]
                if _tol.residual(d) > _tol.atol(self.matrices[s], self.matrices[t]):
                    raise InvalidAction(f"(st).x != s.(t.x) for s={s!r}, t={t!r}")

    def image(self, s, x):
        """``s.x`` as a point label (set actions only)."""
        j = self.points.index(x)
        col = self.matrices[s][:, j]
        return self.points[int(np.argmax(np.abs(col)))]

    def lifted(self, s, d: int) -> np.ndarray:
        return np.kron(self.matrices[s], np.eye(d))


def action_from_table(semigroup: StarSemigroup, points, table) -> SemigroupAction:
    """Build an action from ``table[(s, x)]``: a point label or a coefficient mapping ``{point: c}``."""
    points = tuple(points)
    m = len(points)
    pos = {x: i for i, x in enumerate(points)}
    mats, is_set = {}, True
    for s in semigroup:
        a = np.zeros((m, m), complex)
        for j, x in enumerate(points):
            if (s, x) not in table:
                raise InvalidAction(f"action of {s!r} on {x!r} is undefined")
            img = table[(s, x)]
            if isinstance(img, dict):
                is_set = False
                for y, c in img.items():
                    if y not in pos:
                        raise InvalidAction(f"{y!r} is not a point")
                    a[pos[y], j] += c
            else:
                if img not in pos:
                    raise InvalidAction(f"{s!r}.{x!r} = {img!r} is not a point")
                a[pos[img], j] = 1.0
        mats[s] = a
    return SemigroupAction(semigroup, points, mats, is_set)


def permutation_action(semigroup: StarSemigroup, points, perms: dict) -> SemigroupAction:
    """``perms[s]`` is a sequence of target indices: ``s.x_j = x_{perms[s][j]}``."""
    points = tuple(points)
    table = {(s, x): points[perms[s][j]] for s in semigroup for j, x in enumerate(points)}
    return action_from_table(semigroup, points, table)


def _check_action(k: OperatorKernel, action: SemigroupAction):
    if tuple(action.points) != tuple(k.points):
        raise InvalidAction("the action must be on the kernel's point set, in the same order")


def invariance_residuals(k: OperatorKernel, action: SemigroupAction):
    """Yield ``(s, x, y, residual)`` for ``k(s.x, y) - k(x, s*.y)``, worst level."""
    _check_action(k, action)
    S = action.semigroup
    grams = {lam: k.gram(lam) for lam in k.poset}
    m = len(k.points)
    for s in S:
        worst = np.zeros((m, m))
        tols = np.zeros((m, m))
        for lam, g in grams.items():
            d = k.space.dims[lam]
            lhs = action.lifted(s, d).conj().T @ g
            rhs = g @ action.lifted(S.star[s], d)
            diff = lhs - rhs
            for i in range(m):
                for j in range(m):
                    blk = (slice(i * d, (i + 1) * d), slice(j * d, (j + 1) * d))
                    worst[i, j] = max(worst[i, j], _tol.residual(diff[blk]))
                    tols[i, j] = max(tols[i, j], _tol.atol(lhs[blk], rhs[blk]))
        for i, x in enumerate(k.points):
            for j, y in enumerate(k.points):
                yield s, x, y, float(worst[i, j]), float(tols[i, j])


def is_invariant(k: OperatorKernel, S: StarSemigroup, action: SemigroupAction) -> bool:
    if action.semigroup is not S and action.semigroup.elements != S.elements:
        raise InvalidAction("action belongs to a different semigroup")
    return all(r <= tol for *_, r, tol in invariance_residuals(k, action))


def shifted_gram(k: OperatorKernel, action: SemigroupAction, s, lam) -> np.ndarray:
    """Block Gram of ``k_lam(s.x_i, s.x_j)``."""
    a = action.lifted(s, k.space.dims[lam])
    return a.conj().T @ k.gram(lam) @ a


def _phase_normalise(v: np.ndarray) -> np.ndarray:
    if v.size == 0:
        return v
    mags = np.abs(v)
    i = int(np.argmax(mags > 1e-12 * max(1.0, float(mags.max()))))
    if mags[i] == 0:
        return v
    return v * (abs(v[i]) / v[i])


def range_basis(g: np.ndarray) -> tuple:
    """Eigenpairs of a PSD matrix above the rank cutoff, descending."""
    if g.size == 0:
        return np.zeros(0), np.zeros((g.shape[0], 0), complex)
    w, u = np.linalg.eigh((g + g.conj().T) / 2)
    w, u = w[::-1], u[:, ::-1]
    wmax = float(w[0]) if w.size else 0.0
    keep = w > _tol.RANK_CUTOFF * wmax if wmax > 0 else np.zeros(w.shape, bool)
    return w[keep], u[:, keep]


def sznagy_certificate(k: OperatorKernel, action: SemigroupAction, s, lam) -> tuple:
    """Least ``c`` with ``G^s_lam <= c G_lam`` and, when none exists, a witness vector.

    Returns ``(c, witness)`` where ``witness`` is ``None`` for finite ``c``.
    """
    g = k.gram(lam)
    w0, tol0 = _psd_margin(g)
    if w0 < -tol0:
        raise KernelNotPSD(lam, w0)
    gs = shifted_gram(k, action, s, lam)
    if g.size == 0:
        return 0.0, None
    w, u = range_basis(g)
    n = g.shape[0]
    proj = u @ u.conj().T
    comp = np.eye(n) - proj
    tol = _tol.scale() * (1.0 + max(_tol.spectral_norm(g), _tol.spectral_norm(gs)))
    outside = comp @ gs @ comp
    cross = comp @ gs @ proj
    if _tol.spectral_norm(outside) > tol or _tol.spectral_norm(cross) > tol:
        ev, evec = np.linalg.eigh((outside + outside.conj().T) / 2)
        return float("inf"), _phase_normalise(evec[:, -1])
    if w.size == 0:
        return 0.0, None
    isq = u / np.sqrt(w)
    m = isq.conj().T @ gs @ isq
    c = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[-1])
    return max(c, 0.0), None


def sznagy_bound(k: OperatorKernel, action: SemigroupAction, s, lam) -> float:
    """Least constant in the boundedness condition (b), or ``inf``."""
    return sznagy_certificate(k, action, s, lam)[0]


@dataclass(frozen=True, eq=False)
class AlgebraSemigroup:
    """Multiplicative *-semigroup of algebra elements with its abstract tables."""

    semigroup: StarSemigroup
    elements: dict  # label -> coefficient vector


def _find(vecs: list, v: np.ndarray):
    for i, w in enumerate(vecs):
        if _tol.residual(w - v) <= 1e-9 * (1.0 + _tol.max_abs(w, v)):
            return i
    return None


def multiplicative_semigroup(A: ConcreteLocallyCStarAlgebra, generators, labels=None, limit: int = 64) -> AlgebraSemigroup:
    """Close ``generators`` (coefficient vectors) under product and adjoint."""
    vecs = [np.asarray(g, dtype=complex) for g in generators]
    names = list(labels) if labels is not None else [f"s{i}" for i in range(len(vecs))]
    if len(names) != len(vecs):
        raise ValueError("labels and generators differ in length")
    uniq_vecs, uniq_names = [], []
    for n_, v in zip(names, vecs):
        if _find(uniq_vecs, v) is None:
            uniq_vecs.append(v)
            uniq_names.append(n_)
    vecs, names = uniq_vecs, uniq_names

    def add(v):
        i = _find(vecs, v)
        if i is not None:
            return i
        if len(vecs) >= limit:
            raise SemigroupTooLarge(f"semigroup orbit exceeds {limit} elements")
        vecs.append(v)
        names.append(f"w{len(vecs) - 1}")
        return len(vecs) - 1

    mult, star = {}, {}
    i = 0
    while i < len(vecs):
        star[i] = add(A.star(vecs[i]))
        for j in range(i + 1):
            mult[(i, j)] = add(A.product(vecs[i], vecs[j]))
            mult[(j, i)] = add(A.product(vecs[j], vecs[i]))
        i += 1
    unit_c = A.identity_coefficients()
    unit = None
    if unit_c is not None:
        u = _find(vecs, unit_c)
        unit = names[u] if u is not None else None
    S = StarSemigroup(
        tuple(names),
        {(names[a], names[b]): names[c] for (a, b), c in mult.items()},
        {names[a]: names[b] for a, b in star.items()},
        unit,
    )
    return AlgebraSemigroup(S, dict(zip(names, vecs)))


def _independent_prefix(mat: np.ndarray) -> list:
    """Greedy indices of linearly independent columns, in order."""
    chosen = []
    for j in range(mat.shape[1]):
        trial = mat[:, chosen + [j]]
        s = np.linalg.svd(trial, compute_uv=False)
        if s.size and s[-1] > 1e-8 * max(1.0, s[0]):
            chosen.append(j)
    return chosen


def kernel_from_cp_map(A: ConcreteLocallyCStarAlgebra, phi_images, points, labels=None, semigroup: AlgebraSemigroup | None = None):
    """Kernel ``k(a, b) = phi(a* b)`` on the finite set ``points`` of algebra elements.

    ``phi_images[i]`` is ``phi(basis_i)``, an endomorphism of the target space.
    When ``semigroup`` is given, also returns its left-multiplication action
    on the span of the points; otherwise the action is ``None``.
    """
    phi_images = list(phi_images)
    if len(phi_images) != A.dim:
        raise ValueError(f"phi needs {A.dim} basis images, got {len(phi_images)}")
    pts = [np.asarray(p, dtype=complex) for p in points]
    if not pts:
        raise PointsNotSpanning("the point set is empty")
    for p in pts:
        if p.shape != (A.dim,):
            raise PointsNotSpanning(f"points must be coefficient vectors of length {A.dim}")
    if not phi_images:
        raise PointsNotSpanning("the algebra is zero")
    H = phi_images[0].domain
    if H.poset != A.poset:
        raise PosetMismatch("phi must take values over the algebra's poset")
    names = tuple(labels) if labels is not None else tuple(f"p{i}" for i in range(len(pts)))
    values = {}
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            c = A.product(A.star(a), b)
            values[(names[i], names[j])] = linear_combination(c, phi_images, H, H)
    k = OperatorKernel(names, H, values)
    if semigroup is None:
        return k, None
    mat = np.array(pts).T
    idx = _independent_prefix(mat)
    sub = mat[:, idx]
    m = len(pts)
    mats = {}
    for s, sv in semigroup.elements.items():
        a = np.zeros((m, m), complex)
        for j, p in enumerate(pts):
            prod = A.product(sv, p)
            c, *_ = np.linalg.lstsq(sub, prod, rcond=None)
            r = float(np.linalg.norm(sub @ c - prod))
            if r > 1e-8 * (1.0 + float(np.linalg.norm(prod))):
                raise ProductOutsideSpan(f"{s}.{names[j]} is outside the span of the points")
            a[idx, j] = c
        mats[s] = a
    return k, SemigroupAction(semigroup.semigroup, names, mats, is_set_action=False)


def zero_kernel(space: LocallyHilbertSpace, points) -> OperatorKernel:
    z = zero(space)
    return OperatorKernel(tuple(points), space, {(x, y): z for x in points for y in points})
