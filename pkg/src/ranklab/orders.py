"""Rankings and choices from scores, inversion distances and the Kemeny median."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NotLinearOrderProfile, TooLarge
from .profile import Profile, ScoreVector, linear_order_defeats

KEMENY_CAP = 8
KEMENY_TIE_TOL = 1e-9


@dataclass(frozen=True)
class Ranking:
    """Descending strata of 1-based alternatives."""

    strata: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen = sorted(x for s in self.strata for x in s)
        if not self.strata or any(not s for s in self.strata) or seen != list(range(1, len(seen) + 1)):
            raise ValueError("strata must be non-empty and partition 1..n")

    @property
    def top(self) -> frozenset[int]:
        return self.strata[0]

    def tolist(self) -> list[list[int]]:
        return [sorted(s) for s in self.strata]


@dataclass(frozen=True)
class ChoiceSet:
    members: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a choice set is non-empty")

    def tolist(self) -> list[int]:
        return sorted(self.members)


def _as_scores(s) -> ScoreVector:
    return s if isinstance(s, ScoreVector) else ScoreVector(np.asarray(s, dtype=float))


def ranking_from_scores(s) -> Ranking:
    s = _as_scores(s)
    level = s.stratum_index()
    return Ranking(tuple(frozenset((np.flatnonzero(level == k) + 1).tolist()) for k in range(level.max() + 1)))


def choice_from_scores(s) -> ChoiceSet:
    return ChoiceSet(ranking_from_scores(s).top)


def _defeats(profile: Profile) -> np.ndarray:
    d = linear_order_defeats(profile)
    if d is None:
        raise NotLinearOrderProfile("every matrix must encode a linear order")
    return d


def inversion_distance(order, profile: Profile) -> int:
    """Pairs ordered differently by ``order`` and each individual, summed over individuals.

    This is the number of adjacent swaps turning the profile into unanimity on ``order``.
    """
    _defeats(profile)
    order = [int(x) - 1 for x in order]
    if sorted(order) != list(range(profile.n)):
        raise ValueError(f"order must be a permutation of 1..{profile.n}")
    pos = np.empty(profile.n, dtype=int)
    pos[order] = np.arange(profile.n)
    ahead = pos[:, None] < pos[None, :]  # i before j in ``order``
    # a_ji^p = 1 while i is before j in ``order`` is one inversion
    return int(profile.matrices.transpose(0, 2, 1)[:, ahead].sum())


def distance_to_unanimity(profile: Profile) -> np.ndarray:
    """Per alternative, the swaps needed to bring it to the top of every order.

    An alternative beating k others in an order sits n-1-k places from the top.
    """
    wins = _defeats(profile)
    return (profile.n - 1 - wins).sum(axis=0).astype(int)


def closeness_to_unanimity_choice(profile: Profile) -> ChoiceSet:
    d = distance_to_unanimity(profile)
    return ChoiceSet(frozenset((np.flatnonzero(d == d.min()) + 1).tolist()))


@dataclass(frozen=True)
class KemenyResult:
    medians: tuple[tuple[int, ...], ...]
    distance: float

    def to_dict(self) -> dict:
        dist = self.distance
        if float(dist).is_integer():
            dist = int(dist)
        return {"medians": [list(r) for r in self.medians], "distance": dist}


def kemeny_median(profile: Profile, n_cap: int = KEMENY_CAP) -> KemenyResult:
    """All linear orders nearest to the profile by exhaustive search.

    The distance counts ordered pairs, ``sum_p sum_{i != j} |r_ij - a_ij^p|``,
    which is twice the aggregate weight of the pairs an order reverses.
    Orders within ``KEMENY_TIE_TOL`` (relative) of the optimum are all returned.
    """
    n = profile.n
    if n > n_cap:
        raise TooLarge(n, n_cap)
    agg = profile.aggregate
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    cost = np.zeros(len(perms))
    for a, b in itertools.combinations(range(n), 2):
        # perms[:, a] is placed above perms[:, b]; the reversed weight is agg[later, earlier]
        cost += agg[perms[:, b], perms[:, a]]
    cost *= 2.0
    best = cost.min()
    keep = cost <= best + KEMENY_TIE_TOL * max(1.0, abs(best))
    medians = tuple(tuple(int(x) + 1 for x in p) for p in perms[keep])
    return KemenyResult(medians, float(best))
