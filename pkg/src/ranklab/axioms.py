"""Executable axiom checks and a seeded falsification harness.

Self-consistency compares alternatives through their performance multisets:
``U_i = {(a_ik^p, s_k) : k != i, p}``. Alternative i in A majorizes j in B when
some bijection pairs every element of ``U_i`` with a componentwise smaller or
equal element of ``U'_j``; a self-consistent procedure must then score
``s_i >= s'_j``, strictly when the majorization is strict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CardinalityMismatch, SolverError, UnsupportedAxiomForProcedure
from .generate import INTERIOR_HIGH, GeneratorConfig, random_profile, trial_rng
from .matching import dominance_matching, multisets_equal, perfect_matching
from .procedures import ProcedureHandle
from .profile import Profile, ScoreVector, concat_profiles, from_linear_orders, from_upper

AXIOMS = (
    "self_consistency",
    "reinforcement",
    "cancellation",
    "faithfulness",
    "neutrality",
    "anonymity",
    "monotonicity",
)


@dataclass(frozen=True, eq=False)
class PerformanceMultiset:
    """``pairs[r] = (outcome, opponent score)``; m(n-1) rows."""

    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.array(self.pairs, dtype=float).reshape(-1, 2)
        if ((pairs[:, 0] < 0) | (pairs[:, 0] > 1)).any():
            raise ValueError("outcomes must lie in [0, 1]")
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if not isinstance(other, PerformanceMultiset):
            return NotImplemented
        return multisets_equal(self.pairs, other.pairs)


@dataclass(frozen=True)
class MajorizationWitness:
    """``mapping[r]`` is the element of the dominated multiset paired with element r."""

    mapping: tuple[int, ...]
    strict: bool


def _opponent_outcomes(profile: Profile) -> np.ndarray:
    """(n, m(n-1)) outcomes of each alternative against every opponent, ordered (k, p)."""
    a = profile.matrices
    n = profile.n
    off = ~np.eye(n, dtype=bool)
    # a[p, i, k] -> [i, k, p], keep k != i
    return a.transpose(1, 2, 0)[off].reshape(n, (n - 1) * profile.m)


def _opponent_scores(s: np.ndarray, m: int) -> np.ndarray:
    n = len(s)
    off = ~np.eye(n, dtype=bool)
    opp = np.broadcast_to(s[None, :], (n, n))[off].reshape(n, n - 1)
    return np.repeat(opp, m, axis=1)


def _all_multisets(profile: Profile, s: np.ndarray) -> np.ndarray:
    """(n, m(n-1), 2) stack of every alternative's performance multiset."""
    return np.stack([_opponent_outcomes(profile), _opponent_scores(s, profile.m)], axis=2)


def performance_multiset(profile: Profile, scores, i: int) -> PerformanceMultiset:
    """Performance multiset of alternative ``i`` (1-based label)."""
    s = np.asarray(getattr(scores, "scores", scores), dtype=float)
    if len(s) != profile.n:
        raise ValueError(f"expected {profile.n} scores, got {len(s)}")
    if not 1 <= i <= profile.n:
        raise ValueError(f"alternative {i} is not in 1..{profile.n}")
    return PerformanceMultiset(_all_multisets(profile, s)[i - 1])


def _pairs(u) -> np.ndarray:
    return u.pairs if isinstance(u, PerformanceMultiset) else np.asarray(u, dtype=float)


def majorizes(u, v, tol: float = 0.0) -> MajorizationWitness | None:
    """Witness that ``u`` majorizes ``v``, or None.

    Works for multisets of vectors of any width. The witness is strict exactly
    when the two multisets differ: a dominance matching between equal multisets
    can only pair equal elements, since componentwise sums agree. With
    ``tol > 0`` dominance allows deficits up to ``tol`` and "differ" means no
    matching pairs the elements within ``tol``.
    """
    x, y = _pairs(u), _pairs(v)
    if x.shape != y.shape:
        raise CardinalityMismatch(f"multisets of sizes {len(x)} and {len(y)} cannot be matched")
    mate = dominance_matching(x, y, tol)
    if mate is None:
        return None
    return MajorizationWitness(tuple(mate), not multisets_equal(x, y, tol))


@dataclass(frozen=True, eq=False)
class ViolationReport:
    """A self-consistency failure: i in ``profile_a`` majorizes j in ``profile_b``."""

    profile_a: Profile
    profile_b: Profile
    i: int
    j: int
    kind: str
    witness: MajorizationWitness
    scores_a: ScoreVector
    scores_b: ScoreVector
    tolerance: float

    @property
    def gap(self) -> float:
        return float(self.scores_a[self.i - 1] - self.scores_b[self.j - 1])

    def replay(self, proc: ProcedureHandle) -> bool:
        """Re-run ``proc`` and confirm the same violation appears."""
        sa = proc(self.profile_a).scores[self.i - 1]
        sb = proc(self.profile_b).scores[self.j - 1]
        if self.kind == "strict":
            return bool(sa <= sb + self.tolerance)
        return bool(sa < sb - self.tolerance)

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "kind": self.kind,
            "gap": self.gap,
            "scores_a": self.scores_a.tolist(),
            "scores_b": self.scores_b.tolist(),
            "mapping": list(self.witness.mapping),
            "profile_a": self.profile_a.matrices.tolist(),
            "profile_b": self.profile_b.matrices.tolist(),
        }


@dataclass
class _ScanCounts:
    weak: int = 0
    strict: int = 0


@dataclass(frozen=True, eq=False)
class _Scored:
    profile: Profile
    scores: ScoreVector
    multisets: np.ndarray
    keys: np.ndarray

    @classmethod
    def of(cls, profile: Profile, scores: ScoreVector) -> _Scored:
        u = _all_multisets(profile, scores.scores)
        return cls(profile, scores, u, np.sort(u, axis=1))


def _scan(a: _Scored, b: _Scored, tol: float, counts: _ScanCounts) -> list[ViolationReport]:
    pa, pb = a.profile, b.profile
    if (pa.n, pa.m) != (pb.n, pb.m):
        raise CardinalityMismatch("self-consistency compares profiles with equal n and m")
    # sorted-column dominance is necessary for a matching; filter all (i, j) at once
    candidates = (a.keys[:, None] >= b.keys[None, :] - tol).all(axis=(2, 3))
    sa, sb = a.scores.scores, b.scores.scores
    out = []
    for i, j in zip(*np.nonzero(candidates)):
        if a is b and i == j:
            counts.weak += 1
            continue
        w = majorizes(a.multisets[i], b.multisets[j], tol)
        if w is None:
            continue
        gap = sa[i] - sb[j]
        if w.strict:
            counts.strict += 1
            bad, kind = gap <= tol, "strict"
        else:
            counts.weak += 1
            bad, kind = gap < -tol, "weak"
        if bad:
            out.append(
                ViolationReport(pa, pb, int(i) + 1, int(j) + 1, kind, w, a.scores, b.scores, tol)
            )
    return out


def check_self_consistency(
    proc: ProcedureHandle, a: Profile, b: Profile | None = None, tol: float | None = None
) -> list[ViolationReport]:
    """Every (i in A, j in B) majorization whose scores break self-consistency.

    ``b`` defaults to ``a`` (within-profile comparisons). Comparisons use the
    tolerance of A's score vector unless ``tol`` is given.
    """
    sa = _Scored.of(a, proc(a))
    tol = sa.scores.tolerance if tol is None else tol
    sb = sa if b is None else _Scored.of(b, proc(b))
    return _scan(sa, sb, tol, _ScanCounts())


# --- randomized harness ---------------------------------------------------


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    trial: int
    message: str
    profiles: tuple[Profile, ...]

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "trial": self.trial,
            "message": self.message,
            "profiles": [p.matrices.tolist() for p in self.profiles],
        }


@dataclass
class FuzzSummary:
    axiom: str
    procedure: str
    trials: int
    seed: int
    checked: int = 0
    skipped: int = 0
    weak_instances: int = 0
    strict_instances: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "procedure": self.procedure,
            "trials": self.trials,
            "seed": self.seed,
            "checked": self.checked,
            "skipped": self.skipped,
            "weak_instances": self.weak_instances,
            "strict_instances": self.strict_instances,
            "violations": [v.to_dict() for v in self.violations],
        }


FUZZ_DEFAULTS = GeneratorConfig(n_min=2, n_max=4, m_min=1, m_max=3, mode="interior")


def _size(rng: np.random.Generator, gen: GeneratorConfig) -> tuple[int, int]:
    return int(rng.integers(gen.n_min, gen.n_max + 1)), int(rng.integers(gen.m_min, gen.m_max + 1))


def _perturb(rng: np.random.Generator, p: Profile, mode: str) -> Profile:
    """Redraw a few upper-triangle entries of ``p`` from the same distribution."""
    fresh = random_profile(rng, p.n, p.m, mode).matrices
    upper = np.triu(np.ones((p.n, p.n), dtype=bool), k=1)
    slots = np.argwhere(np.broadcast_to(upper, p.matrices.shape))
    pick = slots[rng.choice(len(slots), size=rng.integers(1, min(3, len(slots)) + 1), replace=False)]
    vals = p.matrices.copy()
    for q, i, j in pick:
        vals[q, i, j] = fresh[q, i, j]
    return from_upper(vals)


def _self_consistency_pair(rng, gen: GeneratorConfig, trial: int) -> tuple[Profile, Profile]:
    """A random pair with equal n, m; related pairs make majorization likely."""
    mode = gen.mode
    if mode == "interior" and trial % 2:
        mode = "interior-grid"
    n, m = _size(rng, gen)
    a = random_profile(rng, n, m, mode)
    strategy = trial % 3
    if strategy == 0:
        b = random_profile(rng, n, m, mode)
    elif strategy == 1:
        b = _perturb(rng, a, mode)
    else:
        b = _perturb(rng, a.permute_alternatives(rng.permutation(n)).permute_individuals(
            rng.permutation(m)), mode)
    return a, b


def _close(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
    return bool(np.abs(x - y).max() <= tol)


def _run_trial(proc, axiom, rng, gen, trial, tol, summary) -> list[AxiomViolation]:
    if axiom == "self_consistency":
        a, b = _self_consistency_pair(rng, gen, trial)
        sa, sb = _Scored.of(a, proc(a)), _Scored.of(b, proc(b))
        counts = _ScanCounts()
        found = _scan(sa, sb, tol, counts)
        found += _scan(sb, sa, tol, counts)
        found += _scan(sa, sa, tol, counts)
        summary.checked += 1
        summary.weak_instances += counts.weak
        summary.strict_instances += counts.strict
        return found

    n, m = _size(rng, gen)
    mode = gen.mode

    if axiom == "reinforcement":
        a = random_profile(rng, n, m, mode)
        b = random_profile(rng, n, int(rng.integers(gen.m_min, gen.m_max + 1)), mode)
        lhs = proc(concat_profiles(a, b)).scores
        rhs = proc(a).scores + proc(b).scores
        summary.checked += 1
        if not _close(lhs, rhs, tol):
            return [AxiomViolation(axiom, trial, f"scores of A+B {lhs.tolist()} != {rhs.tolist()}", (a, b))]
        return []

    if axiom == "cancellation":
        half = random_profile(rng, n, max(1, (m + 1) // 2), mode)
        # each matrix together with its reversal: sum_p a_ij = sum_p a_ji
        a = concat_profiles(half, Profile(half.matrices.transpose(0, 2, 1)))
        s = proc(a).scores
        summary.checked += 1
        if s.max() - s.min() > tol:
            return [AxiomViolation(axiom, trial, f"balanced profile scored {s.tolist()}", (a,))]
        return []

    if axiom == "faithfulness":
        order = (rng.permutation(n) + 1).tolist()
        a = from_linear_orders([order])
        s = proc(a).scores
        summary.checked += 1
        idx = np.asarray(order) - 1
        if not (s[idx[:-1]] - s[idx[1:]] > tol).all():
            return [AxiomViolation(axiom, trial, f"order {order} scored {s.tolist()}", (a,))]
        return []

    a = random_profile(rng, n, m, mode)
    s = proc(a).scores

    if axiom == "neutrality":
        perm = rng.permutation(n)
        moved = proc(a.permute_alternatives(perm)).scores
        summary.checked += 1
        if not _close(moved[perm], s, tol):
            return [AxiomViolation(axiom, trial, f"relabelling by {perm.tolist()} changed scores", (a,))]
        return []

    if axiom == "anonymity":
        perm = rng.permutation(m)
        moved = proc(a.permute_individuals(perm)).scores
        summary.checked += 1
        if not _close(moved, s, tol):
            return [AxiomViolation(axiom, trial, f"reordering individuals by {perm.tolist()} changed scores", (a,))]
        return []

    if axiom == "monotonicity":
        p = int(rng.integers(m))
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
        old = a.matrices[p, i, j]
        high = max(old, INTERIOR_HIGH) if mode.startswith("interior") else 1.0
        new = float(rng.uniform(old, high)) if high > old else old
        if not new > old:
            summary.skipped += 1
            return []
        vals = a.matrices.copy()
        vals[p, i, j] = new
        vals[p, j, i] = 1.0 - new
        b = Profile(vals)
        t = proc(b).scores
        summary.checked += 1
        problems = []
        if t[i] < s[i] - tol:
            problems.append(f"score of {i + 1} fell from {s[i]!r} to {t[i]!r}")
        for k in range(n):
            if k != i and s[i] > s[k] + tol and t[k] > t[i] + tol:
                problems.append(f"{k + 1} overtook {i + 1}")
        if problems:
            msg = f"raising a[{p + 1}][{i + 1},{j + 1}] from {old!r} to {new!r}: " + "; ".join(problems)
            return [AxiomViolation(axiom, trial, msg, (a, b))]
        return []

    raise ValueError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")


def fuzz_axiom(
    proc: ProcedureHandle,
    axiom: str,
    trials: int,
    seed: int,
    gen: GeneratorConfig | None = None,
    tol: float | None = None,
) -> FuzzSummary:
    """Test ``axiom`` on ``trials`` seeded random instances.

    Trial t draws from ``default_rng([seed, t])``, so results do not depend on
    evaluation order. Trials where the procedure raises a solver error are
    counted as skipped.
    """
    axiom = axiom.replace("-", "_")
    if axiom not in AXIOMS:
        raise ValueError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if axiom in proc.unsupported:
        raise UnsupportedAxiomForProcedure(f"{proc.name} is not defined on the profiles {axiom} needs")
    gen = gen or FUZZ_DEFAULTS
    tol = ScoreVector([0.0]).tolerance if tol is None else tol
    summary = FuzzSummary(axiom, proc.name, trials, seed)
    for t in range(trials):
        rng = trial_rng(seed, t)
        try:
            summary.violations += _run_trial(proc, axiom, rng, gen, t, tol, summary)
        except SolverError:
            summary.skipped += 1
    return summary


# --- permuted dominance ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class DominanceOrder:
    """``geq[i, j]``: i permuted-dominates j (0-based indices)."""

    geq: np.ndarray

    def dominates(self, i: int, j: int) -> bool:
        return bool(self.geq[i - 1, j - 1])

    def strictly(self, i: int, j: int) -> bool:
        return self.dominates(i, j) and not self.dominates(j, i)

    def equivalent(self, i: int, j: int) -> bool:
        return self.dominates(i, j) and self.dominates(j, i)


def sorted_rows(profile: Profile) -> np.ndarray:
    """(m, n, n-1): each individual's outcomes for i against its opponents, descending."""
    a = profile.matrices
    n = profile.n
    off = ~np.eye(n, dtype=bool)
    rows = a[:, off].reshape(profile.m, n, n - 1)
    return -np.sort(-rows, axis=2)


def permuted_dominance(profile: Profile) -> DominanceOrder:
    """i dominates j iff individuals can be paired so that, per pair, some
    relabelling of opponents makes i's outcomes componentwise at least j's.

    Per pair of individuals the opponent relabelling exists iff the descending
    sorted rows dominate componentwise; the pairing of individuals is then a
    perfect bipartite matching.
    """
    rows = sorted_rows(profile)
    n = profile.n
    geq = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            adj = (rows[:, i][:, None, :] >= rows[:, j][None, :, :]).all(axis=2)
            geq[i, j] = perfect_matching(adj) is not None
    for i in range(n):
        for j in range(i + 1, n):
            if geq[i, j] and geq[j, i] and not multisets_equal(rows[:, i], rows[:, j]):
                raise RuntimeError("mutual permuted dominance between different rows")
    geq.setflags(write=False)
    return DominanceOrder(geq)
