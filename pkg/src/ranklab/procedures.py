"""Named scoring procedures behind one calling convention."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import implicit, scores
from .profile import LobbyWeights, PositionalWeights, Profile, ScoreVector

# crisp single-order profiles break the Ford/irreducibility condition or make
# Katz singular, so these kinds cannot be asked about faithfulness
_NO_CRISP = frozenset({"faithfulness"})


@dataclass(frozen=True)
class ProcedureHandle:
    """A scoring procedure: a deterministic map from profiles to score vectors."""

    name: str
    evaluator: Callable[[Profile], object]
    unsupported: frozenset[str] = field(default_factory=frozenset)

    def __call__(self, profile: Profile) -> ScoreVector:
        out = self.evaluator(profile)
        if isinstance(out, ScoreVector):
            return out
        return ScoreVector(np.asarray(out, dtype=float))


def _implicit(kind: str, epsilon: float | None = None, cfg=None) -> Callable[[Profile], ScoreVector]:
    if kind == "katz" and epsilon is None:
        def run(profile: Profile) -> ScoreVector:
            spec = implicit.ImplicitProcedureSpec(kind, implicit.katz_default_epsilon(profile))
            return implicit.solve(spec, profile, cfg).scores

        return run
    spec = implicit.ImplicitProcedureSpec(kind, epsilon)

    def run(profile: Profile) -> ScoreVector:
        return implicit.solve(spec, profile, cfg).scores

    return run


def constant_zero(profile: Profile) -> ScoreVector:
    return ScoreVector(np.zeros(profile.n))


def reversed_borda(profile: Profile) -> ScoreVector:
    return ScoreVector(-scores.extended_borda(profile).scores)


METHODS = (
    "borda", "down", "up", "copeland", "grs", "zermelo", "katz", "lsq",
    "daniels-lin", "daniels-ratio", "cowden", "point", "lobby", "convex",
    "constant-zero", "reversed-borda",
)


def get_procedure(
    name: str,
    *,
    epsilon: float | None = None,
    points=None,
    lobby=None,
    nu: float | None = None,
    solver: implicit.SolverConfig | None = None,
) -> ProcedureHandle:
    """Look up a procedure by its CLI name.

    ``grs`` defaults to epsilon 1 and ``katz`` to ``1/(2m(n-1))`` per profile,
    half its singular value. ``point``, ``lobby`` and
    ``convex`` need their weight vectors.
    """
    if name == "borda":
        return ProcedureHandle(name, scores.extended_borda)
    if name == "down":
        return ProcedureHandle(name, scores.down_sided_borda)
    if name == "up":
        return ProcedureHandle(name, scores.up_sided_borda)
    if name == "copeland":
        return ProcedureHandle(name, scores.copeland_scores)
    if name == "grs":
        return ProcedureHandle(name, _implicit("grs", 1.0 if epsilon is None else epsilon, solver))
    if name == "katz":
        return ProcedureHandle(
            name, _implicit("katz", epsilon, solver), _NO_CRISP
        )
    if name == "lsq":
        return ProcedureHandle(name, _implicit("lsq", cfg=solver))
    if name in ("zermelo", "daniels-lin", "daniels-ratio", "cowden"):
        return ProcedureHandle(name, _implicit(name, cfg=solver), _NO_CRISP)
    if name == "point":
        if points is None:
            raise ValueError("point scores need positional weights")
        w = PositionalWeights(points)
        return ProcedureHandle(name, lambda p: scores.point_scores(p, w))
    if name == "lobby":
        if lobby is None:
            raise ValueError("lobby size scores need lobby weights")
        w = LobbyWeights(lobby)
        return ProcedureHandle(name, lambda p: scores.lobby_size_scores(p, w))
    if name == "convex":
        if points is None or lobby is None or nu is None:
            raise ValueError("convex combinations need point weights, lobby weights and nu")
        wp, wl = PositionalWeights(points), LobbyWeights(lobby)
        return ProcedureHandle(name, lambda p: scores.convex_combination_scores(p, wp, wl, nu))
    if name == "constant-zero":
        return ProcedureHandle(name, constant_zero)
    if name == "reversed-borda":
        return ProcedureHandle(name, reversed_borda)
    raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
