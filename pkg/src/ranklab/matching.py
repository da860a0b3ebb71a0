"""Dominance matchings between equal-size multisets of real vectors."""

from __future__ import annotations

import numpy as np


def perfect_matching(adj: np.ndarray) -> list[int] | None:
    """Perfect matching of a square bipartite graph by augmenting paths.

    ``adj[u, v]`` marks an admissible edge. Returns ``mate`` with ``mate[u] = v``,
    or None when no perfect matching exists.
    """
    n_left, n_right = adj.shape
    if n_left != n_right:
        return None
    neighbours = [np.flatnonzero(row).tolist() for row in adj]
    if any(not nb for nb in neighbours) or not adj.any(axis=0).all():
        return None
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        for v in neighbours[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in range(n_left):
        if not augment(u, [False] * n_right):
            return None
    mate = [0] * n_left
    for v, u in enumerate(match_right):
        mate[u] = v
    return mate


def dominance_graph(upper: np.ndarray, lower: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """``adj[u, v]`` iff ``upper[u] >= lower[v] - tol`` in every component."""
    return (upper[:, None, :] >= lower[None, :, :] - tol).all(axis=2)


def sorted_columns_dominate(upper: np.ndarray, lower: np.ndarray, tol: float = 0.0) -> bool:
    """Necessary condition for a dominance matching: each sorted column dominates."""
    return bool((np.sort(upper, axis=0) >= np.sort(lower, axis=0) - tol).all())


def dominance_matching(upper: np.ndarray, lower: np.ndarray, tol: float = 0.0) -> list[int] | None:
    if not sorted_columns_dominate(upper, lower, tol):
        return None
    return perfect_matching(dominance_graph(upper, lower, tol))


def multisets_equal(x: np.ndarray, y: np.ndarray, tol: float = 0.0) -> bool:
    """Equality of multisets of vectors; with ``tol > 0``, up to a tolerance matching."""
    if x.shape != y.shape:
        return False
    if tol == 0.0:
        kx = np.lexsort(x.T[::-1])
        ky = np.lexsort(y.T[::-1])
        return bool(np.array_equal(x[kx], y[ky]))
    close = (np.abs(x[:, None, :] - y[None, :, :]) <= tol).all(axis=2)
    return perfect_matching(close) is not None
