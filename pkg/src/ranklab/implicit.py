"""Scores defined implicitly by n equations of the form

    sum_{j != i} sum_p h(a_ij^p, a_ji^p, s_j, s_i) = 0,    i = 1..n.

Each kind below fixes ``h`` and a side condition that picks one solution.
The linear kinds (Katz, generalized row sums, least squares) are solved
directly; the others by normalized fixed-point iteration.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DomainViolation,
    FordConditionViolated,
    NotConverged,
    PositivityLost,
    SingularSystem,
)
from .profile import Profile, ScoreVector
from .scores import extended_borda


class Kind(str, enum.Enum):
    ZERMELO = "zermelo"
    KATZ = "katz"
    LEAST_SQUARES = "lsq"
    DANIELS_LINEAR = "daniels-lin"
    DANIELS_RATIO = "daniels-ratio"
    COWDEN = "cowden"
    GENERALIZED_ROW_SUM = "grs"


_NEEDS_EPSILON = {Kind.KATZ, Kind.GENERALIZED_ROW_SUM}
_POSITIVE = {Kind.ZERMELO, Kind.DANIELS_LINEAR, Kind.DANIELS_RATIO, Kind.COWDEN}


@dataclass(frozen=True)
class ImplicitProcedureSpec:
    kind: Kind
    epsilon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in _NEEDS_EPSILON:
            if self.epsilon is None or not self.epsilon > 0 or not np.isfinite(self.epsilon):
                raise ValueError(f"{self.kind.value} needs a finite epsilon > 0, got {self.epsilon}")

    def gamma(self, profile: Profile) -> float:
        """``1/epsilon + m n`` for generalized row sums."""
        if self.kind is not Kind.GENERALIZED_ROW_SUM:
            raise ValueError("gamma is only defined for generalized row sums")
        return 1.0 / self.epsilon + profile.m * profile.n


@dataclass(frozen=True)
class SolverConfig:
    residual_tolerance: float = 1e-10
    max_iterations: int = 10_000
    step_tolerance: float = 1e-14
    newton: bool = True

    def __post_init__(self):
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class SolveReport:
    scores: ScoreVector
    iterations: int
    max_abs_residual: float
    converged: bool


def term(spec: ImplicitProcedureSpec, a_ij, a_ji, s_j, s_i, m: int, n: int):
    """One comparison's contribution ``h`` to alternative i's equation (broadcasts)."""
    kind = spec.kind
    if kind is Kind.ZERMELO:
        return a_ij - s_i / (s_i + s_j)
    if kind is Kind.KATZ:
        return a_ij * (spec.epsilon * s_j + 1.0 - s_i / (m * (n - 1)))
    if kind is Kind.LEAST_SQUARES:
        return m * n * (a_ij - a_ji) + s_j - s_i
    if kind is Kind.DANIELS_LINEAR:
        return a_ij * s_j - a_ji * s_i
    if kind is Kind.DANIELS_RATIO:
        return a_ij * s_j / s_i - a_ji * s_i / s_j
    if kind is Kind.COWDEN:
        return a_ij * s_j * (1.0 - s_i) - a_ji * s_i * (1.0 - s_j)
    if kind is Kind.GENERALIZED_ROW_SUM:
        gamma = 1.0 / spec.epsilon + m * n
        # the trailing -s_i/epsilon is spread evenly over the m(n-1) comparisons
        return gamma * (a_ij - a_ji) - (s_i - s_j) - s_i / (spec.epsilon * m * (n - 1))
    raise ValueError(kind)


def complementary_term(spec: ImplicitProcedureSpec, a, s_j, s_i, m: int, n: int):
    """``term`` with ``a_ji = 1 - a``: the three-argument form used for monotonicity checks."""
    return term(spec, a, 1.0 - a, s_j, s_i, m, n)


def _check_domain(kind: Kind, s: np.ndarray) -> None:
    if kind in _POSITIVE:
        bad = np.flatnonzero(~(s > 0))
        if bad.size:
            raise DomainViolation(kind.value, int(bad[0]) + 1, float(s[bad[0]]))
    if kind is Kind.COWDEN:
        bad = np.flatnonzero(~(s < 1))
        if bad.size:
            raise DomainViolation(kind.value, int(bad[0]) + 1, float(s[bad[0]]))


def residual(spec: ImplicitProcedureSpec, profile: Profile, scores) -> np.ndarray:
    """Left-hand sides of the n equations at ``scores``."""
    s = np.asarray(getattr(scores, "scores", scores), dtype=float)
    if s.shape != (profile.n,):
        raise ValueError(f"expected {profile.n} scores, got shape {s.shape}")
    _check_domain(spec.kind, s)
    a = profile.matrices
    m, n = profile.m, profile.n
    with np.errstate(divide="ignore", invalid="ignore"):
        h = term(spec, a, a.transpose(0, 2, 1), s[None, None, :], s[None, :, None], m, n)
    h = np.where(np.eye(n, dtype=bool)[None], 0.0, h)
    return h.sum(axis=(0, 2))


def strongly_connected(adj: np.ndarray) -> bool:
    """True when every vertex reaches every other along edges ``adj[i, j] > 0``."""
    n = len(adj)
    edges = adj > 0
    if edges.sum() >= n * (n - 1):
        return True
    for graph in (edges, edges.T):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in np.flatnonzero(graph[v] & ~seen):
                seen[w] = True
                frontier.append(w)
        if not seen.all():
            return False
    return True


def _linear_solve(k: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.abs(k).max()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(k, check_finite=True)
    if scale == 0 or np.abs(np.diag(lu)).min() < 1e-12 * scale:
        raise SingularSystem("linear system is numerically singular")
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    # one step of iterative refinement
    return x + scipy.linalg.lu_solve((lu, piv), rhs - k @ x)


def katz_default_epsilon(profile: Profile) -> float:
    """Half the singular value ``1/(m(n-1))``.

    Katz rows factor as ``w_i (1/(m(n-1)) - eps) c = w_i`` at a constant vector
    ``c``, so constant scores solve the system on every profile. It is
    singular at ``eps = 1/(m(n-1))`` and the solution is negative beyond it.
    """
    return 0.5 / (profile.m * (profile.n - 1))


def _solve_linear(spec: ImplicitProcedureSpec, profile: Profile) -> np.ndarray:
    m, n = profile.m, profile.n
    agg = profile.aggregate
    if spec.kind is Kind.KATZ:
        wins = agg.sum(axis=1)
        k = np.diag(wins / (m * (n - 1))) - spec.epsilon * agg
        s = _linear_solve(k, wins)
        if not (s > 0).all():
            i = int(np.flatnonzero(~(s > 0))[0])
            raise PositivityLost(
                f"katz: solution has non-positive score {s[i]!r} for alternative {i + 1}"
            )
        return s
    borda = extended_borda(profile).scores
    off = m * (np.ones((n, n)) - np.eye(n))
    if spec.kind is Kind.GENERALIZED_ROW_SUM:
        k = np.diag(np.full(n, m * (n - 1) + 1.0 / spec.epsilon)) - off
        return _linear_solve(k, spec.gamma(profile) * borda)
    if spec.kind is Kind.LEAST_SQUARES:
        # singular Laplacian bordered with the zero-sum constraint
        k = np.zeros((n + 1, n + 1))
        k[:n, :n] = np.diag(np.full(n, m * (n - 1.0))) - off
        k[:n, n] = 1.0
        k[n, :n] = 1.0
        rhs = np.append(m * n * borda, 0.0)
        return _linear_solve(k, rhs)[:n]
    raise ValueError(spec.kind)


class _NonlinearSystem:
    """Residual, Jacobian and damped fixed-point map of one nonlinear kind.

    Everything works on the aggregate matrix ``A[i, j] = sum_p a_ij^p``. The
    residuals sum to zero identically, so the last equation is redundant and
    is swapped for the normalization ``sum(s) = 1`` in Newton steps.
    """

    def __init__(self, kind: Kind, agg: np.ndarray, m: int):
        self.kind = kind
        self.agg = agg
        self.agg_t = np.ascontiguousarray(agg.T)
        self.m = m
        self.wins = agg.sum(axis=1)
        self.losses = agg.sum(axis=0)
        self.off = 1.0 - np.eye(len(agg))

    def residual(self, s: np.ndarray) -> np.ndarray:
        kind, agg = self.kind, self.agg
        if kind is Kind.ZERMELO:
            return self.wins - self.m * s * (self.off / (s[:, None] + s)).sum(axis=1)
        if kind is Kind.DANIELS_LINEAR:
            return agg @ s - self.losses * s
        if kind is Kind.DANIELS_RATIO:
            return (agg @ s) / s - s * (self.agg_t @ (1.0 / s))
        if kind is Kind.COWDEN:
            return (agg @ s) * (1.0 - s) - s * (self.agg_t @ (1.0 - s))
        raise ValueError(kind)

    def fixed_point(self, s: np.ndarray) -> np.ndarray:
        kind, agg = self.kind, self.agg
        if kind is Kind.ZERMELO:
            # minorize-maximize update
            return self.wins / (self.m * (self.off / (s[:, None] + s)).sum(axis=1))
        if kind is Kind.DANIELS_LINEAR:
            # lazy step keeps the same fixed points and cannot cycle on periodic data
            return 0.5 * (s + (agg @ s) / self.losses)
        if kind is Kind.DANIELS_RATIO:
            # geometric half step towards sqrt(x / y); undamped it oscillates
            return np.sqrt(s * np.sqrt((agg @ s) / (self.agg_t @ (1.0 / s))))
        if kind is Kind.COWDEN:
            x = agg @ s
            # half step towards x/(x+y); undamped it oscillates on many profiles
            return 0.5 * (s + x / (x + self.agg_t @ (1.0 - s)))
        raise ValueError(kind)

    def jacobian(self, s: np.ndarray) -> np.ndarray:
        kind, agg, agg_t = self.kind, self.agg, self.agg_t
        if kind is Kind.ZERMELO:
            q = self.m * self.off / (s[:, None] + s) ** 2
            return q * s[:, None] - np.diag((q * s[None, :]).sum(axis=1))
        if kind is Kind.DANIELS_LINEAR:
            return agg - np.diag(self.losses)
        if kind is Kind.DANIELS_RATIO:
            x, y = agg @ s, agg_t @ (1.0 / s)
            return agg / s[:, None] + s[:, None] * agg_t / s**2 - np.diag(x / s**2 + y)
        if kind is Kind.COWDEN:
            x, y = agg @ s, agg_t @ (1.0 - s)
            return agg * (1.0 - s)[:, None] + s[:, None] * agg_t - np.diag(x + y)
        raise ValueError(kind)

    def in_domain(self, s: np.ndarray) -> bool:
        if self.kind is Kind.COWDEN:
            return bool(((s > 0) & (s < 1)).all())
        return bool((s > 0).all())

    def newton(self, s: np.ndarray, res: np.ndarray) -> np.ndarray | None:
        jac = self.jacobian(s)
        jac[-1] = 1.0
        rhs = res.copy()
        rhs[-1] = s.sum() - 1.0
        try:
            return s - np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            return None


def _solve_iterative(
    spec: ImplicitProcedureSpec, profile: Profile, cfg: SolverConfig
) -> tuple[np.ndarray, int]:
    """Newton steps on the normalized system, falling back to the kind's
    fixed-point update whenever Newton leaves the domain or fails to reduce
    the residual. The fallback alone converges; Newton only speeds it up.
    """
    agg = profile.aggregate
    if not strongly_connected(agg):
        raise FordConditionViolated(
            f"{spec.kind.value}: some group of alternatives never beats (or never loses to) the rest"
        )
    system = _NonlinearSystem(spec.kind, agg, profile.m)
    s = np.full(profile.n, 1.0 / profile.n)
    res = system.residual(s)
    worst = np.abs(res).max()
    for it in range(1, cfg.max_iterations + 1):
        if worst <= cfg.residual_tolerance:
            return s, it - 1
        cand = system.newton(s, res) if cfg.newton else None
        if cand is not None and system.in_domain(cand):
            cand_res = system.residual(cand)
            cand_worst = np.abs(cand_res).max()
        else:
            cand_worst = np.inf
        if not cand_worst < worst:
            cand = system.fixed_point(s)
            if not (cand > 0).all():
                # also catches NaN
                raise PositivityLost(f"{spec.kind.value}: iterate left the positive orthant")
            cand /= cand.sum()
            cand_res = system.residual(cand)
            cand_worst = np.abs(cand_res).max()
        moved = np.abs(cand - s).max()
        s, res, worst = cand, cand_res, cand_worst
        if moved <= cfg.step_tolerance and worst > cfg.residual_tolerance:
            break
    if worst <= cfg.residual_tolerance:
        return s, it
    raise NotConverged(
        f"{spec.kind.value}: residual {worst:.3e} above {cfg.residual_tolerance:g} after {it} iterations"
    )


def solve(
    spec: ImplicitProcedureSpec,
    profile: Profile,
    cfg: SolverConfig | None = None,
    tolerance: float | None = None,
) -> SolveReport:
    """Solve the kind's system with its normalization.

    Zermelo, Daniels (both) and Cowden are scaled to sum to 1, least squares
    to sum to 0; Katz and generalized row sums are unique as they stand.
    """
    cfg = cfg or SolverConfig()
    if spec.kind in (Kind.KATZ, Kind.GENERALIZED_ROW_SUM, Kind.LEAST_SQUARES):
        s, iterations = _solve_linear(spec, profile), 1
    else:
        s, iterations = _solve_iterative(spec, profile, cfg)
    worst = float(np.abs(residual(spec, profile, s)).max())
    if worst > cfg.residual_tolerance:
        raise NotConverged(
            f"{spec.kind.value}: residual {worst:.3e} above {cfg.residual_tolerance:g}"
        )
    sv = ScoreVector(s) if tolerance is None else ScoreVector(s, tolerance)
    return SolveReport(sv, iterations, worst, True)


def grs_closed_form(profile: Profile, epsilon: float) -> ScoreVector:
    """Generalized row sums on complete data: they coincide with extended Borda scores."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return extended_borda(profile)
