import math

import numpy as np
import pytest
from scipy import linalg, optimize

from ranklab.errors import (
    DomainViolation,
    FordConditionViolated,
    NotConverged,
    PositivityLost,
    SingularSystem,
)
from ranklab.generate import GeneratorConfig, generate_profiles, random_profile
from ranklab.implicit import (
    ImplicitProcedureSpec,
    Kind,
    SolverConfig,
    complementary_term,
    grs_closed_form,
    katz_default_epsilon,
    residual,
    solve,
    strongly_connected,
)
from ranklab.profile import Profile, from_linear_orders, from_upper
from ranklab.scores import extended_borda

ALL_KINDS = [
    ("zermelo", None), ("katz", 0.01), ("lsq", None), ("daniels-lin", None),
    ("daniels-ratio", None), ("cowden", None), ("grs", 0.1), ("grs", 1.0), ("grs", 10.0),
]
ORDER_123 = from_linear_orders([(1, 2, 3)])


def two(a12):
    return from_upper(np.array([[[0, a12], [0, 0]]], dtype=float))


def spec(kind, eps=None):
    return ImplicitProcedureSpec(kind, eps)


# --- closed forms for two alternatives ---------------------------------------


def test_zermelo_two_alternatives():
    s = solve(spec("zermelo"), two(0.75)).scores.scores
    assert np.allclose(s, [0.75, 0.25], atol=1e-12)
    assert np.allclose(residual(spec("zermelo"), two(0.75), [0.75, 0.25]), 0, atol=1e-15)


def test_daniels_linear_two_alternatives():
    s = solve(spec("daniels-lin"), two(0.75)).scores.scores
    assert np.allclose(s, [0.75, 0.25], atol=1e-12)


def test_daniels_ratio_two_alternatives():
    s = solve(spec("daniels-ratio"), two(0.75)).scores.scores
    # (s1/s2)^2 = a/(1-a) = 3
    assert abs(s[0] / s[1] - math.sqrt(3)) <= 1e-9
    assert abs(s.sum() - 1) <= 1e-12


def test_cowden_two_alternatives():
    s = solve(spec("cowden"), two(0.75)).scores.scores
    s1 = (3 - math.sqrt(3)) / 2
    assert np.allclose(s, [s1, 1 - s1], atol=1e-9)


def test_katz_two_alternatives():
    s = solve(spec("katz", 0.5), two(0.6)).scores.scores
    assert np.allclose(s, [2, 2], atol=1e-12)


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0, 10.0])
def test_linear_kinds_on_order(eps):
    assert np.allclose(solve(spec("grs", eps), ORDER_123).scores.scores, [2, 0, -2], atol=1e-12)
    assert np.allclose(solve(spec("lsq"), ORDER_123).scores.scores, [2, 0, -2], atol=1e-12)


def test_grs_closed_form():
    rng = np.random.default_rng(5)
    p = random_profile(rng, 5, 3, "interior")
    assert np.array_equal(grs_closed_form(p, 0.3).scores, extended_borda(p).scores)
    ties = from_upper(np.full((2, 4, 4), 0.5))
    assert grs_closed_form(ties, 2.0).tolist() == [0, 0, 0, 0]
    with pytest.raises(ValueError):
        grs_closed_form(p, 0.0)


# --- errors -------------------------------------------------------------------


def test_ford_condition():
    with pytest.raises(FordConditionViolated) as err:
        solve(spec("zermelo"), two(1.0))
    assert err.value.code == "FORD_CONDITION"
    # a group {1,2} that never loses to 3
    p = from_linear_orders([(1, 2, 3), (2, 1, 3)])
    for kind in ("zermelo", "daniels-lin", "daniels-ratio", "cowden"):
        with pytest.raises(FordConditionViolated):
            solve(spec(kind), p)


def test_domain_violation():
    with pytest.raises(DomainViolation):
        residual(spec("cowden"), two(0.75), [0.0, 1.0])
    with pytest.raises(DomainViolation):
        residual(spec("cowden"), two(0.75), [0.5, 1.0])
    with pytest.raises(DomainViolation):
        residual(spec("zermelo"), two(0.75), [-0.1, 1.1])
    # no domain restriction for linear kinds
    residual(spec("lsq"), two(0.75), [-3.0, 3.0])


def test_katz_singular_and_positivity():
    # s_i = 1 + eps s_j has no positive solution for eps > 1 and none at all at eps = 1
    with pytest.raises(SingularSystem):
        solve(spec("katz", 1.0), two(0.6))
    with pytest.raises(PositivityLost):
        solve(spec("katz", 2.0), two(0.6))
    # an alternative without wins has an all-zero row
    with pytest.raises(SingularSystem):
        solve(spec("katz", 0.1), ORDER_123)


def test_katz_scores_are_constant():
    # every row factors as w_i (1/(m(n-1)) - eps) c = w_i at a constant c
    for p in SAMPLE[:10]:
        eps = katz_default_epsilon(p)
        s = solve(spec("katz", eps), p).scores.scores
        k = p.m * (p.n - 1)
        assert np.allclose(s, k / (1 - eps * k), rtol=1e-12)


def test_epsilon_required():
    with pytest.raises(ValueError):
        spec("katz")
    with pytest.raises(ValueError):
        spec("grs", -1.0)
    assert spec("grs", 0.5).gamma(ORDER_123) == 2 + 3


def test_not_converged_on_tiny_budget():
    rng = np.random.default_rng(3)
    p = random_profile(rng, 5, 2, "interior")
    with pytest.raises(NotConverged):
        solve(spec("zermelo"), p, SolverConfig(max_iterations=1, newton=False))


def test_strongly_connected():
    assert strongly_connected(np.array([[0, 1], [1, 0]]))
    assert not strongly_connected(np.array([[0, 1], [0, 0]]))
    chain = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert strongly_connected(chain)


# --- independent oracles ---------------------------------------------------------


def oracle_lsq(p: Profile) -> np.ndarray:
    # least-squares fit of mn(a_ij - a_ji) ~ s_i - s_j over all ordered pairs and individuals
    n = p.n
    rows, rhs = [], []
    for a in p.matrices:
        for i in range(n):
            for j in range(n):
                if i != j:
                    r = np.zeros(n)
                    r[i], r[j] = 1, -1
                    rows.append(r)
                    rhs.append(p.m * n * (a[i, j] - a[j, i]))
    rows.append(np.ones(n))
    rhs.append(0.0)
    return np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]


def oracle_katz(p: Profile, eps: float) -> np.ndarray:
    # equation i: sum_{j,q} a_ij^q (eps s_j + 1 - s_i / (m(n-1))) = 0
    n, m = p.n, p.m
    k = np.zeros((n, n))
    rhs = np.zeros(n)
    for a in p.matrices:
        for i in range(n):
            for j in range(n):
                if i != j:
                    k[i, j] += a[i, j] * eps
                    k[i, i] -= a[i, j] / (m * (n - 1))
                    rhs[i] -= a[i, j]
    return np.linalg.solve(k, rhs)


def oracle_daniels_linear(p: Profile) -> np.ndarray:
    agg = p.aggregate
    null = linalg.null_space(agg - np.diag(agg.sum(axis=0)))
    v = null[:, 0]
    return v / v.sum()


def oracle_zermelo(p: Profile) -> np.ndarray:
    agg = p.aggregate
    wins = agg.sum(axis=1)

    def eqs(theta):
        s = np.exp(theta - theta.max())
        f = wins - (p.m * s[:, None] / (s[:, None] + s[None, :]) * (1 - np.eye(p.n))).sum(axis=1)
        return np.concatenate([f[:-1], [theta.sum()]])

    theta = optimize.fsolve(eqs, np.zeros(p.n), xtol=1e-12)
    s = np.exp(theta)
    return s / s.sum()


SAMPLE = list(generate_profiles(GeneratorConfig(2, 6, 1, 4, "interior", seed=11), 60))


@pytest.mark.parametrize("p", SAMPLE[:30])
def test_against_oracles(p):
    assert np.allclose(solve(spec("lsq"), p).scores.scores, oracle_lsq(p), atol=1e-9)
    assert np.allclose(solve(spec("katz", 0.01), p).scores.scores, oracle_katz(p, 0.01), atol=1e-9)
    assert np.allclose(solve(spec("daniels-lin"), p).scores.scores, oracle_daniels_linear(p), atol=1e-9)
    assert np.allclose(solve(spec("zermelo"), p).scores.scores, oracle_zermelo(p), atol=1e-8)


@pytest.mark.parametrize("kind,eps", ALL_KINDS)
def test_residuals_and_side_constraints(kind, eps):
    sp = spec(kind, eps)
    for p in SAMPLE:
        rep = solve(sp, p)
        s = rep.scores.scores
        assert rep.converged
        assert np.abs(residual(sp, p, s)).max() <= 1e-10
        if kind in ("zermelo", "daniels-lin", "daniels-ratio", "cowden"):
            assert (s > 0).all() and abs(s.sum() - 1) <= 1e-12
        if kind == "cowden":
            assert (s < 1).all()
        if kind == "katz":
            assert (s > 0).all()
        if kind in ("lsq", "grs"):
            assert np.abs(s - extended_borda(p).scores).max() <= 1e-9


@pytest.mark.parametrize("kind,eps", ALL_KINDS)
def test_neutral_and_anonymous(kind, eps):
    sp = spec(kind, eps)
    rng = np.random.default_rng(2)
    for p in SAMPLE[:20]:
        s = solve(sp, p).scores.scores
        perm = rng.permutation(p.n)
        moved = solve(sp, p.permute_alternatives(perm)).scores.scores
        assert np.allclose(moved[perm], s, atol=1e-8)
        shuffled = solve(sp, p.permute_individuals(rng.permutation(p.m))).scores.scores
        assert np.allclose(shuffled, s, atol=1e-8)


@pytest.mark.parametrize("kind", ["zermelo", "daniels-lin", "daniels-ratio", "cowden"])
def test_fixed_point_route_alone(kind):
    cfg = SolverConfig(newton=False, max_iterations=100_000)
    for p in SAMPLE[:15]:
        slow = solve(spec(kind), p, cfg).scores.scores
        fast = solve(spec(kind), p).scores.scores
        assert np.allclose(slow, fast, atol=1e-8)


def test_zermelo_win_balance():
    for p in SAMPLE[:20]:
        s = solve(spec("zermelo"), p).scores.scores
        expected = (p.m * s[:, None] / (s[:, None] + s[None, :]) * (1 - np.eye(p.n))).sum(axis=1)
        assert np.allclose(p.aggregate.sum(axis=1), expected, atol=1e-9)


def test_crisp_cycle_gives_equal_scores():
    cycle = Profile(np.array([[[0, 1, 0], [0, 0, 1], [1, 0, 0]]], dtype=float))
    for kind in ("zermelo", "daniels-lin", "daniels-ratio", "cowden"):
        assert np.allclose(solve(spec(kind), cycle).scores.scores, 1 / 3, atol=1e-12)


# --- monotone form ------------------------------------------------------------------

GRID_A = np.linspace(0.05, 0.95, 7)
GRID_POS = np.linspace(0.05, 0.95, 7)
GRID_REAL = np.linspace(-3.0, 3.0, 7)


def domain_grid(kind):
    return GRID_POS if kind in ("zermelo", "daniels-lin", "daniels-ratio", "cowden") else GRID_REAL


@pytest.mark.parametrize("kind,eps", ALL_KINDS)
def test_h_monotone_by_finite_differences(kind, eps):
    sp = spec(kind, eps)
    m, n = 2, 4
    d = 1e-6
    grid = domain_grid(kind)
    a, sj, si = np.meshgrid(GRID_A, grid, grid, indexing="ij")
    if kind == "katz":
        # Katz rows increase in a only while s_i < m(n-1)(1 + eps s_j); keep scores positive too
        keep = (sj > 0) & (si > 0)
        a, sj, si = a[keep], sj[keep], si[keep]
    h = complementary_term(sp, a, sj, si, m, n)
    up_a = complementary_term(sp, a + d, sj, si, m, n) - h
    up_j = complementary_term(sp, a, sj + d, si, m, n) - h
    up_i = complementary_term(sp, a, sj, si + d, m, n) - h
    assert (up_a > 0).all()
    assert (up_j > 0).all()
    assert (up_i < 0).all()


def test_katz_boundary_is_not_strict():
    # at a = 0 the Katz term vanishes, so it is flat in both scores there
    sp = spec("katz", 0.5)
    h = complementary_term(sp, 0.0, np.array([0.1, 0.9]), np.array([0.2, 0.8]), 2, 3)
    assert (h == 0).all()
