"""Brute-force reference computations used to check the library independently."""

import itertools

import numpy as np
import scipy.linalg


def pivoted_cholesky(g, tol=1e-12):
    """Return ``L`` (n x r) with ``g = L L^*`` by greedy diagonal pivoting."""
    g = np.array(g, dtype=complex)
    n = g.shape[0]
    resid = g.copy()
    cols = []
    scale = max(1.0, float(np.max(np.abs(np.diag(g)))) if n else 1.0)
    for _ in range(n):
        d = np.real(np.diag(resid))
        p = int(np.argmax(d))
        if d[p] <= tol * scale:
            break
        col = resid[:, p] / np.sqrt(d[p])
        cols.append(col)
        resid = resid - np.outer(col, col.conj())
    if not cols:
        return np.zeros((n, 0), complex)
    return np.array(cols).T


def gram_rank(g, rel=1e-10):
    w = np.linalg.eigvalsh((g + g.conj().T) / 2)
    if w.size == 0:
        return 0
    return int(np.sum(w > rel * max(1.0, float(np.max(np.abs(w))))))


def sznagy_oracle(g, gs, rel=1e-10):
    """Least ``c`` with ``gs <= c g`` via a generalized eigensolve on the range of ``g``."""
    w, u = scipy.linalg.eigh((g + g.conj().T) / 2)
    keep = w > rel * max(1.0, float(np.max(np.abs(w)))) if w.size else np.array([], bool)
    r = u[:, keep]
    if r.shape[1] == 0:
        return 0.0 if np.allclose(gs, 0) else np.inf
    comp = np.eye(g.shape[0]) - r @ r.conj().T
    if np.linalg.norm(comp @ gs @ comp) > 1e-8 * (1 + np.linalg.norm(gs)):
        return np.inf
    a = r.conj().T @ gs @ r
    b = r.conj().T @ g @ r
    vals = scipy.linalg.eigh((a + a.conj().T) / 2, (b + b.conj().T) / 2, eigvals_only=True)
    return max(0.0, float(vals[-1]))


def closure_dimension(mats, limit=200):
    """Dimension of the *-algebra generated by ``mats`` by repeated multiplication."""
    mats = [np.asarray(m, complex) for m in mats]
    span = []

    def rank_with(v):
        return np.linalg.matrix_rank(np.array(span + [v]), tol=1e-9) if span else int(np.linalg.norm(v) > 1e-9)

    frontier = list(mats) + [m.conj().T for m in mats]
    words = []
    for m in frontier:
        v = m.reshape(-1)
        if rank_with(v) > len(span):
            span.append(v)
            words.append(m)
    changed = True
    while changed and len(span) < limit:
        changed = False
        for a, b in itertools.product(list(words), repeat=2):
            m = a @ b
            v = m.reshape(-1)
            if rank_with(v) > len(span):
                span.append(v)
                words.append(m)
                changed = True
    return len(span)


def spectral(m):
    m = np.atleast_2d(m)
    return float(np.linalg.svd(m, compute_uv=False)[0]) if m.size else 0.0
