"""Strictly increasing extensions of functions given on Paretian sets.

A finite set P of k-vectors is Paretian when every point has, against every
other point, some coordinate strictly above it. Any bounded ``f_P`` on such a
set extends to an ``f`` on all of R^k that agrees with ``f_P`` on P and is
strictly increasing in every coordinate. The extension is built on the open
cube ``|y_c| < 1`` from axis distances to the down-set D and up-set U of P,
and transported to R^k by ``y = (2/pi) arctan(x)``.

The second half applies this to scoring procedures: for each alternative, the
multiset of comparison triples ``(a_ij^p, s_j, -s_i)`` is a point of R^(3m(n-1)).
For a self-consistent procedure these points form a Paretian set, and the
extension with ``f_P = 0`` gives an implicit form ``g = 0`` for its scores.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NotParetian
from .matching import dominance_matching, multisets_equal
from .procedures import ProcedureHandle
from .profile import Profile

_INSIDE = math.nextafter(1.0, 0.0)


def contract(x) -> np.ndarray:
    """R^k onto the open cube; saturates just inside the boundary for huge inputs."""
    y = (2.0 / math.pi) * np.arctan(np.asarray(x, dtype=float))
    return np.clip(y, -_INSIDE, _INSIDE)


def expand(y) -> np.ndarray:
    return np.tan((math.pi / 2.0) * np.asarray(y, dtype=float))


def find_dominated_pair(points: np.ndarray, block: int = 256) -> tuple[int, int] | None:
    """Indices (r, q), r != q, with ``points[r] <= points[q]`` everywhere, if any."""
    n = len(points)
    for start in range(0, n, block):
        chunk = points[start : start + block]
        le = (chunk[:, None, :] <= points[None, :, :]).all(axis=2)
        le[np.arange(len(chunk)), np.arange(start, start + len(chunk))] = False
        hit = np.argwhere(le)
        if hit.size:
            r, q = hit[0]
            return start + int(r), int(q)
    return None


@dataclass(frozen=True, eq=False)
class ParetianSet:
    points: np.ndarray
    values: np.ndarray
    f_min: float
    f_max: float

    @property
    def k(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    @cached_property
    def context(self) -> ExtensionContext:
        return ExtensionContext(self)


def build_paretian(points, values, f_min: float | None = None, f_max: float | None = None) -> ParetianSet:
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty (count, k) array")
    vals = np.array(values, dtype=float).reshape(-1)
    if len(vals) != len(pts):
        raise ValueError(f"{len(pts)} points but {len(vals)} values")
    if not (np.isfinite(pts).all() and np.isfinite(vals).all()):
        raise ValueError("points and values must be finite")
    f_min = float(vals.min()) if f_min is None else float(f_min)
    f_max = float(vals.max()) if f_max is None else float(f_max)
    if not (f_min <= vals.min() and vals.max() <= f_max):
        raise ValueError("values must lie within [f_min, f_max]")
    pair = find_dominated_pair(pts)
    if pair is not None:
        raise NotParetian(pts[pair[0]], pts[pair[1]])
    pts.setflags(write=False)
    vals.setflags(write=False)
    return ParetianSet(pts, vals, f_min, f_max)


class CubeExtension:
    """The extension on the open cube for points already inside it.

    ``d[c]`` is how far y can move down axis c before entering D (the cube
    exit counts, since everything outside the cube belongs to D); ``u[c]``
    likewise upwards into U. Then ``f = sum(d) - sum(u) + f2`` with f2 equal
    to f_min below, f_max above, their midpoint in between, and f_P on P.
    """

    def __init__(self, points, values, f_min: float, f_max: float):
        self.points = np.asarray(points, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if not (np.abs(self.points) < 1).all():
            raise ValueError("cube points must satisfy |y_c| < 1")
        self.f_min, self.f_max = float(f_min), float(f_max)

    def parts(self, y) -> tuple[np.ndarray, np.ndarray, float]:
        """Axis distances ``d``, ``u`` and the piecewise term f2 at ``y``."""
        y = np.asarray(y, dtype=float)
        if not (np.abs(y) < 1).all():
            raise ValueError("query must lie in the open cube")
        z = self.points
        k = len(y)
        le = y <= z  # y below z, per coordinate
        ge = y >= z
        n_le = le.sum(axis=1)
        n_ge = ge.sum(axis=1)
        # z is usable for axis c when y is below z on every other coordinate
        down_ok = (n_le[:, None] - le) == k - 1
        up_ok = (n_ge[:, None] - ge) == k - 1
        d_cand = np.where(down_ok, np.maximum(0.0, y - z), np.inf)
        u_cand = np.where(up_ok, np.maximum(0.0, z - y), np.inf)
        d = np.minimum(y + 1.0, d_cand.min(axis=0))
        u = np.minimum(1.0 - y, u_cand.min(axis=0))
        in_d = bool((n_le == k).any())
        in_u = bool((n_ge == k).any())
        if in_d and in_u:
            # y is in P: anything above and below y at once equals y
            f2 = float(self.values[np.flatnonzero((n_le == k) & (n_ge == k))[0]])
        elif in_d:
            f2 = self.f_min
        elif in_u:
            f2 = self.f_max
        else:
            f2 = 0.5 * (self.f_min + self.f_max)
        return d, u, f2

    def __call__(self, y) -> float:
        d, u, f2 = self.parts(y)
        # fsum makes the value independent of coordinate order
        return math.fsum(d) - math.fsum(u) + f2


class ExtensionContext:
    """A Paretian set contracted into the cube, ready for evaluation on R^k."""

    def __init__(self, paretian: ParetianSet):
        self.paretian = paretian
        cube = contract(paretian.points)
        if find_dominated_pair(cube) is not None:
            # arctan saturated distinct coordinates; the set is too spread for float64
            raise ValueError("points too large to contract without collisions")
        self.cube = CubeExtension(cube, paretian.values, paretian.f_min, paretian.f_max)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.paretian.k,):
            raise ValueError(f"expected a vector of length {self.paretian.k}")
        if not np.isfinite(x).all():
            raise ValueError("query must be finite")
        return self.cube(contract(x))


def extend_evaluate(paretian: ParetianSet, x) -> float:
    """Value at ``x`` of the strictly increasing extension of the set's values."""
    return paretian.context(x)


# --- comparison triples of a scoring procedure ------------------------------


def comparison_triples(profile: Profile, scores, i: int) -> np.ndarray:
    """(m(n-1), 3) rows ``(a_ij^p, s_j, -s_i)`` for alternative ``i`` (1-based)."""
    s = np.asarray(getattr(scores, "scores", scores), dtype=float)
    idx = i - 1
    opp = np.array([j for j in range(profile.n) if j != idx])
    a = profile.matrices[:, idx, opp].T.reshape(-1)  # ordered (j, p)
    sj = np.repeat(s[opp], profile.m)
    # adding 0.0 maps -0.0 to 0.0, so equal triples have equal bytes
    return np.column_stack([a, sj, np.full(len(a), -s[idx])]) + 0.0


def canonical(triples: np.ndarray) -> np.ndarray:
    """Lexicographically sorted triples, flattened to a vector of length 3K."""
    order = np.lexsort(triples.T[::-1])
    return triples[order].reshape(-1)


def _collect(proc: ProcedureHandle, profiles) -> list[tuple[np.ndarray, int, int]]:
    """Canonical triple vectors with (profile index, alternative) provenance, exact duplicates merged."""
    out, seen, shape = [], set(), None
    for t, profile in enumerate(profiles):
        if shape is None:
            shape = (profile.n, profile.m)
        elif (profile.n, profile.m) != shape:
            raise ValueError("all profiles must share n and m")
        s = proc(profile)
        for i in range(1, profile.n + 1):
            vec = canonical(comparison_triples(profile, s, i))
            key = vec.tobytes()
            if key not in seen:
                seen.add(key)
                out.append((vec, t, i))
    return out


@dataclass(frozen=True)
class TriplesReport:
    paretian: bool
    points: int
    offending: tuple | None = None  # ((profile, alternative), (profile, alternative), z, z')


def triples_paretian_check(proc: ProcedureHandle, profiles, tol: float = 1e-9) -> TriplesReport:
    """Check that the procedure's comparison-triple multisets form a Paretian set.

    The set contains every ordering of each multiset, so a point z fails against
    z' exactly when the triples of z can be matched one-to-one with triples of
    z' that are at least as large componentwise, and the multisets differ.
    ``tol`` absorbs rounding in computed scores.
    """
    data = _collect(proc, profiles)
    if not data:
        return TriplesReport(True, 0)
    mats = np.stack([vec.reshape(-1, 3) for vec, _, _ in data])
    keys = np.sort(mats, axis=1)
    for r in range(len(data)):
        below = (keys[r][None] <= keys + tol).all(axis=(1, 2))
        below[r] = False
        for q in np.flatnonzero(below):
            if dominance_matching(mats[q], mats[r], tol) is None:
                continue
            if multisets_equal(mats[r], mats[q], tol):
                continue
            (_, pr, ir), (_, pq, iq) = data[r], data[q]
            return TriplesReport(False, len(data), ((pr, ir), (pq, iq), data[r][0], data[q][0]))
    return TriplesReport(True, len(data))


@dataclass(frozen=True)
class WitnessReport:
    points: int
    closure_points: int
    max_abs_g: float
    probes: int
    monotone_failures: int
    permutation_failures: int

    @property
    def ok(self) -> bool:
        return self.max_abs_g == 0.0 and self.monotone_failures == 0 and self.permutation_failures == 0


class ImplicitForm:
    """``g`` for a self-consistent procedure: zero on its comparison triples,
    strictly increasing in outcomes and opponent scores, decreasing in own score.

    Built over every ordering of the observed triple multisets, so ``g`` does
    not depend on how triples are listed.
    """

    def __init__(self, proc: ProcedureHandle, profiles, max_triples: int = 6):
        data = _collect(proc, profiles)
        if not data:
            raise ValueError("need at least one profile")
        n_triples = len(data[0][0]) // 3
        if n_triples > max_triples:
            raise ValueError(f"{n_triples} triples per alternative; closure would need {n_triples}! orderings")
        report = triples_paretian_check(proc, profiles, tol=0.0)
        if not report.paretian:
            _, _, z, z_prime = report.offending
            raise NotParetian(z, z_prime)
        closure = {}
        for vec, _, _ in data:
            triples = vec.reshape(-1, 3)
            for perm in itertools.permutations(range(n_triples)):
                v = triples[list(perm)].reshape(-1)
                closure.setdefault(v.tobytes(), v)
        points = np.array(list(closure.values()))
        self.data = np.array([vec for vec, _, _ in data])
        self.n_triples = n_triples
        self.paretian = build_paretian(points, np.zeros(len(points)), 0.0, 0.0)

    def __call__(self, x) -> float:
        return extend_evaluate(self.paretian, x)


def implicit_form_witness(
    proc: ProcedureHandle,
    profiles,
    probes: int = 1000,
    seed: int = 0,
    deltas=(1e-6, 1e-2, 1.0),
) -> WitnessReport:
    """Build the implicit form for ``proc`` on ``profiles`` and test it.

    Reports the largest ``|g|`` on the observed triples (zero by construction),
    then probes strict monotonicity: from an observed point or a nearby random
    point, raising one coordinate must raise ``g``. Each probe also compares
    ``g`` under a random reordering of the triples.
    """
    profiles = list(profiles)
    form = ImplicitForm(proc, profiles)
    rng = np.random.default_rng(seed)
    max_abs = max(abs(form(vec)) for vec in form.data)
    mono = perm_fail = 0
    t = form.n_triples
    for r in range(probes):
        base = form.data[rng.integers(len(form.data))].copy()
        if r % 2:
            base = base + rng.normal(scale=0.5, size=base.shape)
        coord = int(rng.integers(3 * t))
        delta = deltas[r % len(deltas)]
        g0 = form(base)
        bumped = base.copy()
        bumped[coord] += delta
        if not form(bumped) > g0:
            mono += 1
        shuffled = base.reshape(t, 3)[rng.permutation(t)].reshape(-1)
        if form(shuffled) != g0:
            perm_fail += 1
    return WitnessReport(
        len(form.data), len(form.paretian), float(max_abs), probes, mono, perm_fail
    )
