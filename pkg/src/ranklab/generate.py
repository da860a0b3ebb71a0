"""Seeded random profiles.

All randomness flows from one integer seed. Streams are indexed: item ``t``
is drawn from ``default_rng([seed, t])``, so any item can be regenerated
alone and trials can run in any order.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .profile import Profile, from_linear_orders, from_upper, from_weak_orders

MODES = ("interior", "interior-grid", "crisp", "weak-order", "linear-order")

INTERIOR_LOW, INTERIOR_HIGH = 0.01, 0.99
GRID = np.round(np.arange(1, 10) / 10, 1)


@dataclass(frozen=True)
class GeneratorConfig:
    n_min: int = 2
    n_max: int = 6
    m_min: int = 1
    m_max: int = 5
    mode: str = "interior"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 2 <= self.n_min <= self.n_max:
            raise ValueError("need 2 <= n_min <= n_max")
        if not 1 <= self.m_min <= self.m_max:
            raise ValueError("need 1 <= m_min <= m_max")


def random_profile(rng: np.random.Generator, n: int, m: int, mode: str = "interior") -> Profile:
    """One profile; ``interior`` draws each upper entry uniformly from (0.01, 0.99).

    ``interior-grid`` draws from {0.1, ..., 0.9} instead, which keeps outcomes
    interior while producing the exact ties that make majorization common.
    ``crisp`` draws from {0, 1/2, 1}.
    """
    if mode == "interior":
        return from_upper(rng.uniform(INTERIOR_LOW, INTERIOR_HIGH, (m, n, n)))
    if mode == "interior-grid":
        return from_upper(rng.choice(GRID, (m, n, n)))
    if mode == "crisp":
        return from_upper(rng.choice([0.0, 0.5, 1.0], (m, n, n)))
    if mode == "weak-order":
        return from_weak_orders(rng.integers(1, n + 1, (m, n)).tolist(), n)
    if mode == "linear-order":
        return from_linear_orders([(rng.permutation(n) + 1).tolist() for _ in range(m)], n)
    raise ValueError(f"unknown mode {mode!r}")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def draw(cfg: GeneratorConfig, index: int) -> Profile:
    rng = trial_rng(cfg.seed, index)
    n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    m = int(rng.integers(cfg.m_min, cfg.m_max + 1))
    return random_profile(rng, n, m, cfg.mode)


def generate_profiles(cfg: GeneratorConfig, count: int | None = None) -> Iterator[Profile]:
    """Deterministic stream; infinite when ``count`` is None."""
    indices = itertools.count() if count is None else range(count)
    for t in indices:
        yield draw(cfg, t)
