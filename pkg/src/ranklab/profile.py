"""Preference profiles and score vectors.

A profile holds one complementary paired-comparison matrix per individual:
``a[p, i, j]`` in [0, 1] is the share of the unit preference individual ``p``
gives to ``i`` over ``j``, with ``a[p, i, j] + a[p, j, i] == 1`` off the
diagonal and zeros on it.

Arrays are indexed from 0. Alternative *labels* (orders, ballots, choice sets,
error messages) run from 1 to n.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComplementarityViolation,
    DimensionMismatch,
    ElementOutOfRange,
    InvalidWeights,
    MalformedOrder,
    MalformedRanks,
    NonzeroDiagonal,
    OutOfRange,
)

DEFAULT_TOLERANCE = 1e-9


def default_tolerance() -> float:
    """Score comparison tolerance; ``RANKLAB_TOL`` overrides the built-in 1e-9."""
    raw = os.environ.get("RANKLAB_TOL")
    if raw is None:
        return DEFAULT_TOLERANCE
    tol = float(raw)
    if not tol >= 0:
        raise ValueError(f"RANKLAB_TOL must be a non-negative number, got {raw!r}")
    return tol


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Profile:
    """m paired-comparison matrices over n alternatives, validated on construction."""

    matrices: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrices, dtype=float)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise DimensionMismatch(f"expected an (m, n, n) array, got shape {a.shape}")
        m, n, _ = a.shape
        if n < 2:
            raise DimensionMismatch(f"need at least 2 alternatives, got {n}")
        if m < 1:
            raise DimensionMismatch("need at least 1 individual")
        _check_entries(a)
        object.__setattr__(self, "matrices", _readonly(a))

    @property
    def m(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    @property
    def aggregate(self) -> np.ndarray:
        """Summed outcomes over individuals, ``sum_p a[p, i, j]``."""
        return self.matrices.sum(axis=0)

    def permute_alternatives(self, perm: Sequence[int]) -> Profile:
        """Relabel so that old alternative ``i`` becomes ``perm[i]`` (0-based)."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return Profile(self.matrices[:, inv][:, :, inv])

    def permute_individuals(self, perm: Sequence[int]) -> Profile:
        return Profile(self.matrices[np.asarray(perm)])

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return np.array_equal(self.matrices, other.matrices)

    def __hash__(self):
        return hash(self.matrices.tobytes())

    def __repr__(self):
        return f"Profile(n={self.n}, m={self.m})"


def _check_entries(a: np.ndarray) -> None:
    bad = ~((a >= 0.0) & (a <= 1.0))
    if bad.any():
        p, i, j = np.argwhere(bad)[0]
        raise OutOfRange(p + 1, i + 1, j + 1, float(a[p, i, j]))
    diag = np.diagonal(a, axis1=1, axis2=2)
    if (diag != 0.0).any():
        p, i = np.argwhere(diag != 0.0)[0]
        raise NonzeroDiagonal(p + 1, i + 1, float(diag[p, i]))
    n = a.shape[1]
    total = a + a.transpose(0, 2, 1)
    off = ~np.eye(n, dtype=bool)
    bad = (total != 1.0) & off
    if bad.any():
        p, i, j = min(tuple(idx) for idx in np.argwhere(bad) if idx[1] < idx[2])
        raise ComplementarityViolation(p + 1, i + 1, j + 1, float(total[p, i, j]))


def validate_profile(n: int, m: int, matrices) -> Profile:
    a = np.asarray(matrices, dtype=float)
    if a.shape != (m, n, n):
        raise DimensionMismatch(f"declared n={n}, m={m} but matrices have shape {a.shape}")
    return Profile(a)


def from_upper(values: np.ndarray) -> Profile:
    """Build a profile from the strict upper triangles of ``values`` (shape (m, n, n)).

    Lower entries are set to the exact complement ``1 - a[i, j]``; for any
    ``a`` in [0, 1] the sum then rounds to exactly 1.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[1]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    out = np.where(upper, values, 0.0)
    out = out + np.where(upper.T, 1.0 - out.transpose(0, 2, 1), 0.0)
    return Profile(out)


def _order_positions(order: Sequence[int], n: int) -> np.ndarray:
    try:
        labels = [int(x) for x in order]
    except (TypeError, ValueError) as exc:
        raise MalformedOrder(f"order {order!r} contains non-integer labels") from exc
    if sorted(labels) != list(range(1, n + 1)) or any(
        int(x) != x for x in order
    ):
        raise MalformedOrder(f"order {tuple(order)} is not a permutation of 1..{n}")
    pos = np.empty(n, dtype=int)
    pos[np.asarray(labels) - 1] = np.arange(n)
    return pos


def from_linear_orders(orders: Sequence[Sequence[int]], n: int | None = None) -> Profile:
    """One strict order per individual, best first, labels 1..n."""
    orders = list(orders)
    if not orders:
        raise MalformedOrder("need at least one order")
    if n is None:
        n = len(orders[0])
    mats = []
    for order in orders:
        pos = _order_positions(order, n)
        mats.append((pos[:, None] < pos[None, :]).astype(float))
    return Profile(np.array(mats))


def _as_rank_matrix(rankings, n: int | None) -> np.ndarray:
    rows = [list(r) for r in rankings]
    if not rows:
        raise MalformedRanks("need at least one rank vector")
    if n is None:
        n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise MalformedRanks(f"every rank vector must have length {n}")
    try:
        ranks = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedRanks("rank vectors must be numeric") from exc
    if not np.isfinite(ranks).all():
        raise MalformedRanks("rank vectors must be finite")
    return ranks


def from_weak_orders(rankings: Sequence[Sequence[float]], n: int | None = None) -> Profile:
    """``rankings[p][i]`` is the rank of alternative i+1 for individual p (lower is better)."""
    ranks = _as_rank_matrix(rankings, n)
    r_i = ranks[:, :, None]
    r_j = ranks[:, None, :]
    a = np.where(r_i < r_j, 1.0, np.where(r_i > r_j, 0.0, 0.5))
    idx = np.arange(ranks.shape[1])
    a[:, idx, idx] = 0.0
    return Profile(a)


def approval_ranks(ballots: Iterable[Iterable[int]], n: int) -> np.ndarray:
    """Two-strata rank vectors: approved alternatives rank 1, the rest rank 2."""
    out = []
    for ballot in ballots:
        ballot = set(ballot)
        for x in ballot:
            if not (isinstance(x, (int, np.integer)) and 1 <= x <= n):
                raise ElementOutOfRange(f"ballot element {x!r} is not in 1..{n}")
        out.append([1 if i + 1 in ballot else 2 for i in range(n)])
    if not out:
        raise MalformedRanks("need at least one ballot")
    return np.array(out, dtype=float)


def from_approval_ballots(ballots: Iterable[Iterable[int]], n: int) -> Profile:
    return from_weak_orders(approval_ranks(ballots, n), n)


def concat_profiles(a: Profile, b: Profile) -> Profile:
    if a.n != b.n:
        raise DimensionMismatch(f"cannot combine profiles over {a.n} and {b.n} alternatives")
    return Profile(np.concatenate([a.matrices, b.matrices]))


def linear_order_defeats(profile: Profile) -> np.ndarray | None:
    """Per-individual defeat counts if every matrix encodes a strict linear order.

    A 0/1 tournament is transitive exactly when its row sums are a permutation
    of 0..n-1. Returns an (m, n) integer array, or None otherwise.
    """
    a = profile.matrices
    n = profile.n
    off = ~np.eye(n, dtype=bool)
    if not np.isin(a[:, off], (0.0, 1.0)).all():
        return None
    counts = a.sum(axis=2).astype(int)
    if not (np.sort(counts, axis=1) == np.arange(n)).all():
        return None
    return counts


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Scores with tolerance-mediated comparisons.

    Equality is the equivalence induced by single-linkage clustering of the
    sorted scores: neighbours closer than ``tolerance`` share a stratum. Unlike
    a raw ``|s_i - s_j| <= tol`` test this is transitive.
    """

    scores: np.ndarray
    tolerance: float = field(default_factory=default_tolerance)

    def __post_init__(self):
        s = _readonly(np.ravel(self.scores))
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be non-negative")
        object.__setattr__(self, "scores", s)

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, i):
        return self.scores[i]

    def __iter__(self):
        return iter(self.scores)

    def stratum_index(self) -> np.ndarray:
        """0 for the top stratum, increasing downwards; one entry per alternative."""
        order = np.argsort(-self.scores, kind="stable")
        level = np.zeros(len(self.scores), dtype=int)
        current = 0
        for prev, nxt in zip(order[:-1], order[1:]):
            if self.scores[prev] - self.scores[nxt] > self.tolerance:
                current += 1
            level[nxt] = current
        return level

    def equal(self, i: int, j: int) -> bool:
        level = self.stratum_index()
        return bool(level[i] == level[j])

    def greater(self, i: int, j: int) -> bool:
        level = self.stratum_index()
        return bool(level[i] < level[j])

    def tolist(self) -> list[float]:
        return self.scores.tolist()

    def __repr__(self):
        return f"ScoreVector({self.scores.tolist()}, tolerance={self.tolerance:g})"


@dataclass(frozen=True, eq=False)
class PositionalWeights:
    """Points by number of defeated opponents (index 0..n-1); non-negative, non-decreasing."""

    points: np.ndarray

    def __post_init__(self):
        w = _readonly(np.ravel(self.points))
        _check_weights(w, "points")
        object.__setattr__(self, "points", w)


@dataclass(frozen=True, eq=False)
class LobbyWeights:
    """Partial scores by aggregate support size 0..m; non-negative, non-decreasing."""

    weights: np.ndarray

    def __post_init__(self):
        w = _readonly(np.ravel(self.weights))
        _check_weights(w, "weights")
        object.__setattr__(self, "weights", w)


def _check_weights(w: np.ndarray, name: str) -> None:
    if len(w) == 0 or not np.isfinite(w).all():
        raise InvalidWeights(f"{name} must be a non-empty finite sequence")
    if (w < 0).any():
        raise InvalidWeights(f"{name} must be non-negative")
    if (np.diff(w) < 0).any():
        raise InvalidWeights(f"{name} must be non-decreasing")
