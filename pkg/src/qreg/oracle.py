"""Ground-truth engines for small instances: exhaustive search over the codebook and exact ridge."""

from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg

from .codebook import Codebook
from .data import Dataset

MAX_CONFIGS = 10**8
_CHUNK = 1 << 16


class SearchSpaceTooLarge(ValueError):
    pass


def enumerate_min(d: Dataset, cb: Codebook, lam: float) -> tuple[np.ndarray, float]:
    """Global minimizer of ``|y - X w|^2 / 2 + lam |w|^2 / 2`` over ``w`` in levels**N.

    Configurations are visited in lexicographic order of level indices (the
    last coordinate varies fastest); the first minimum encountered wins.  The
    energy is expanded through the Gram matrix so each configuration costs
    ``O(N^2)`` instead of ``O(M N)``.
    """
    L, N = len(cb.levels), d.N
    if L**N > MAX_CONFIGS:
        raise SearchSpaceTooLarge(f"{L}**{N} configurations exceed the limit of {MAX_CONFIGS}")
    G = d.X.T @ d.X + lam * np.eye(N)
    b = d.X.T @ d.y
    c = 0.5 * float(d.y @ d.y)
    levels = cb.levels
    best_e, best_idx = np.inf, None
    flat = np.arange(L**N)
    radix = L ** np.arange(N - 1, -1, -1)
    for start in range(0, L**N, _CHUNK):
        idx = (flat[start:start + _CHUNK, None] // radix) % L
        W = levels[idx]
        e = 0.5 * np.einsum("ki,ij,kj->k", W, G, W) - W @ b + c
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e, best_idx = float(e[k]), idx[k]
    w = levels[best_idx]
    # report the energy of the winner directly from the residual
    r = d.y - d.X @ w
    return w, 0.5 * float(r @ r) + 0.5 * lam * float(w @ w)


def enumerate_min_reference(d: Dataset, cb: Codebook, lam: float) -> tuple[np.ndarray, float]:
    """Plain loop over ``itertools.product``; slow, used to cross-check :func:`enumerate_min`."""
    best = (np.inf, None)
    for combo in itertools.product(cb.levels, repeat=d.N):
        w = np.array(combo)
        r = d.y - d.X @ w
        e = 0.5 * float(r @ r) + 0.5 * lam * float(w @ w)
        if e < best[0]:
            best = (e, w)
    return best[1], best[0]


def ridge_exact(d: Dataset, lam: float) -> np.ndarray:
    """Solve ``(X^T X + lam I) w = X^T y`` by Cholesky.

    Raises:
        numpy.linalg.LinAlgError: if the system is singular (only possible at ``lam = 0``).
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    A = d.X.T @ d.X + lam * np.eye(d.N)
    rhs = d.X.T @ d.y
    try:
        c = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("ridge system is singular; use lam > 0") from exc
    w = scipy.linalg.cho_solve(c, rhs)
    if np.linalg.norm(A @ w - rhs) > 1e-8 * max(np.linalg.norm(rhs), 1e-300):
        # polish once; ill-conditioned systems at tiny lam need it
        w = w + scipy.linalg.cho_solve(c, rhs - A @ w)
    return w
