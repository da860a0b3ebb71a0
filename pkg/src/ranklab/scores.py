"""Closed-form scoring procedures on complete profiles."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import InvalidWeights, MalformedRanks, NotLinearOrderProfile, NotSingleRelation
from .profile import (
    LobbyWeights,
    PositionalWeights,
    Profile,
    ScoreVector,
    _as_rank_matrix,
    linear_order_defeats,
)


def _offdiag_sum(a: np.ndarray) -> np.ndarray:
    # diagonals are zero by construction, so a plain row sum is the j != i sum
    return a.sum(axis=1)


def extended_borda(profile: Profile) -> ScoreVector:
    """``s_i = sum_{j != i} sum_p (a_ij - a_ji)``; sums to zero."""
    agg = profile.aggregate
    return ScoreVector(_offdiag_sum(agg - agg.T))


def down_sided_borda(profile: Profile) -> ScoreVector:
    return ScoreVector(_offdiag_sum(profile.aggregate))


def up_sided_borda(profile: Profile) -> ScoreVector:
    return ScoreVector(-_offdiag_sum(profile.aggregate.T))


def factored_borda(rankings: Sequence[Sequence[float]], n: int | None = None) -> ScoreVector:
    """Per individual, count the strata strictly below each alternative, then sum.

    ``rankings[p][i]`` is the rank of alternative i+1 (lower is better, equal
    ranks are ties). Approval ballots become two-strata rank vectors via
    :func:`ranklab.profile.approval_ranks`.
    """
    ranks = _as_rank_matrix(rankings, n)
    if ranks.shape[1] < 2:
        raise MalformedRanks("need at least 2 alternatives")
    total = np.zeros(ranks.shape[1])
    for row in ranks:
        levels = np.unique(row)
        # number of distinct rank values strictly worse than row[i]
        total += len(levels) - np.searchsorted(levels, row, side="right")
    return ScoreVector(total)


def point_scores(profile: Profile, weights: PositionalWeights) -> ScoreVector:
    """``s_i = sum_p w(#opponents i beats in order p)`` on linear-order profiles."""
    counts = linear_order_defeats(profile)
    if counts is None:
        raise NotLinearOrderProfile("point scores need every matrix to encode a strict linear order")
    if len(weights.points) != profile.n:
        raise InvalidWeights(f"need {profile.n} positional weights, got {len(weights.points)}")
    return ScoreVector(weights.points[counts].sum(axis=0))


def lobby_size_scores(profile: Profile, weights: LobbyWeights) -> ScoreVector:
    """``s_i = sum_{j != i} w(sum_p a_ij)``, w linearly interpolated at fractional support."""
    if len(weights.weights) != profile.m + 1:
        raise InvalidWeights(f"need {profile.m + 1} lobby weights, got {len(weights.weights)}")
    support = profile.aggregate
    vals = np.interp(support, np.arange(profile.m + 1), weights.weights)
    np.fill_diagonal(vals, 0.0)
    return ScoreVector(vals.sum(axis=1))


def convex_combination_scores(
    profile: Profile,
    point_weights: PositionalWeights,
    lobby_weights: LobbyWeights,
    nu: float,
) -> ScoreVector:
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {nu}")
    lobby = lobby_size_scores(profile, lobby_weights).scores
    if nu == 0.0:
        return ScoreVector(lobby)
    point = point_scores(profile, point_weights).scores
    if nu == 1.0:
        return ScoreVector(point)
    return ScoreVector(nu * point + (1.0 - nu) * lobby)


def copeland_scores(profile: Profile) -> ScoreVector:
    """Extended Borda scores of a single relation."""
    if profile.m != 1:
        raise NotSingleRelation(f"Copeland scores take one relation, got m={profile.m}")
    return extended_borda(profile)
