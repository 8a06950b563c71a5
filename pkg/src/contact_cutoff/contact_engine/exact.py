"""Exact transient law of the contact process on tiny graphs.

States are bitmasks over the ``2**n`` subsets of vertices.  The transient
distribution is computed by uniformization with the Poisson series cut
once the neglected tail mass drops below ``tol``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.stats import poisson

from ..errors import CapacityError, PreconditionError

MAX_EXACT_VERTICES = 12
DEFAULT_TOL = 1e-12


def generator_matrix(g, lam: float, absorbing: int | None = None) -> sp.csr_matrix:
    """Sparse CTMC generator; ``absorbing`` freezes every state containing that vertex."""
    n, d = g.n, g.d
    if n > MAX_EXACT_VERTICES:
        raise CapacityError(f"exact solver supports n <= {MAX_EXACT_VERTICES}, got n={n}")
    S = np.arange(1 << n, dtype=np.int64)
    nbrs = g.targets.reshape(n, d)
    rows, cols, vals = [], [], []
    frozen = np.zeros(S.size, dtype=bool) if absorbing is None else ((S >> absorbing) & 1).astype(bool)
    for v in range(n):
        has_v = ((S >> v) & 1).astype(bool)
        rec = has_v & ~frozen
        rows.append(S[rec]); cols.append(S[rec] & ~(1 << v)); vals.append(np.ones(int(rec.sum())))
        k = np.zeros(S.size, dtype=np.int64)
        for w in nbrs[v]:
            k += (S >> int(w)) & 1
        inf = ~has_v & ~frozen & (k > 0)
        rows.append(S[inf]); cols.append(S[inf] | (1 << v)); vals.append(lam * k[inf])
    r = np.concatenate(rows); c = np.concatenate(cols); q = np.concatenate(vals).astype(float)
    off = sp.csr_matrix((q, (r, c)), shape=(S.size, S.size))
    out = np.asarray(off.sum(axis=1)).ravel()
    return (off - sp.diags(out)).tocsr()


def transient(Q: sp.csr_matrix, p0: np.ndarray, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``p0 @ expm(Q t)`` by uniformization, Poisson tail below ``tol``."""
    if t < 0:
        raise PreconditionError("t must be non-negative")
    p = np.asarray(p0, dtype=float).copy()
    if t == 0:
        return p
    rate = float(-Q.diagonal().min())
    if rate <= 0:
        return p
    P = (sp.identity(Q.shape[0], format="csr") + Q / rate).T.tocsr()
    mu = rate * t
    kmax = int(poisson.isf(tol, mu)) + 1
    weights = poisson.pmf(np.arange(kmax + 1), mu)
    out = weights[0] * p
    for k in range(1, kmax + 1):
        p = P @ p
        out += weights[k] * p
    return out


def initial_vector(n: int, init) -> np.ndarray:
    p0 = np.zeros(1 << n)
    s = 0
    for v in init:
        s |= 1 << int(v)
    p0[s] = 1.0
    return p0


def exact_distribution(g, lam: float, init, t: float, tol: float = DEFAULT_TOL, absorbing=None):
    Q = generator_matrix(g, lam, absorbing)
    return transient(Q, initial_vector(g.n, init), t, tol)


def _mass_with(n: int, v: int, p: np.ndarray) -> float:
    S = np.arange(1 << n)
    return float(p[((S >> v) & 1).astype(bool)].sum())


def exact_hit_probability(g, lam: float, u: int, v: int, t: float, tol: float = DEFAULT_TOL) -> float:
    """``P(v in xi^u_t)``."""
    return _mass_with(g.n, v, exact_distribution(g, lam, [u], t, tol))


def exact_ever_hit_probability(g, lam: float, u: int, v: int, t: float, tol: float = DEFAULT_TOL) -> float:
    """``P(v in xi^u_s for some s <= t)``."""
    if u == v:
        return 1.0
    return _mass_with(g.n, v, exact_distribution(g, lam, [u], t, tol, absorbing=v))


def exact_extinction_probability(g, lam: float, init, t: float, tol: float = DEFAULT_TOL) -> float:
    """``P(xi^init_t is empty)``."""
    return float(exact_distribution(g, lam, init, t, tol)[0])


def exact_size_distribution(g, lam: float, init, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Law of ``|xi_t|`` as a length ``n+1`` vector."""
    p = exact_distribution(g, lam, init, t, tol)
    sizes = np.array([bin(s).count("1") for s in range(1 << g.n)])
    return np.bincount(sizes, weights=p, minlength=g.n + 1)
