"""Set-function oracle abstraction plus submodularity diagnostics.

An action set is any iterable of integer action ids; evaluation oracles
normalize it to a canonical sorted tuple, so callers never need to care
about ordering or duplicates.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np


class SetFunction:
    """Evaluation oracle for a monotone non-decreasing submodular set function.

    Contract: ``evaluate`` is pure (equal inputs give bit-identical floats),
    ``evaluate(()) == 0.0``, and instances are immutable after construction
    so they are safe for concurrent reads.
    """

    def __init__(self, ground_set: Iterable[int]):
        self.ground_set = frozenset(int(v) for v in ground_set)

    def evaluate(self, ids: Iterable[int]) -> float:
        raise NotImplementedError


class CallableSetFunction(SetFunction):
    """Wraps a plain ``frozenset -> float`` callable (test instances, toys)."""

    def __init__(self, fn: Callable[[frozenset], float], ground_set: Iterable[int]):
        super().__init__(ground_set)
        self._fn = fn

    def evaluate(self, ids: Iterable[int]) -> float:
        return float(self._fn(frozenset(ids)))


def marginal_gain(f: SetFunction, base: Iterable[int], v: int) -> float:
    """f(base ∪ {v}) − f(base). Raises if ``v`` is already in ``base``."""
    base = frozenset(base)
    if v in base:
        raise ValueError(f"action {v} is already in the base set")
    return f.evaluate(base | {v}) - f.evaluate(base)


def curvature(f: SetFunction) -> float:
    """How far ``f`` is from modular, in [0, 1] (0 = additive, 1 = saturating).

    Computed as 1 minus the minimum over the ground set of the ratio between
    an element's marginal gain on top of everything else and its standalone
    value. Elements with standalone value 0 cannot constrain the minimum
    (their ratio is 0/0) and are skipped.
    """
    ground = sorted(f.ground_set)
    if not ground:
        raise ValueError("curvature needs a non-empty ground set")
    total = f.evaluate(ground)
    ratios = []
    for v in ground:
        solo = f.evaluate((v,))
        if solo == 0.0:
            continue
        rest = [u for u in ground if u != v]
        ratios.append((total - f.evaluate(rest)) / solo)
    c = 1.0 - (min(ratios) if ratios else 1.0)
    return min(1.0, max(0.0, c))


def _random_chain(rng: np.random.Generator, ground: np.ndarray):
    """Random X ⊆ Y ⊆ ground plus v outside Y, or None if no v exists."""
    in_y = rng.random(ground.size) < rng.random()
    outside = ground[~in_y]
    if outside.size == 0:
        return None
    y = ground[in_y]
    x = y[rng.random(y.size) < rng.random()]
    v = int(outside[rng.integers(outside.size)])
    return frozenset(int(u) for u in x), frozenset(int(u) for u in y), v


def check_submodular(
    f: SetFunction, trials: int, rng_seed: int, tol: float = 1e-9
) -> tuple[bool, tuple | None]:
    """Sample nested-set chains and test the diminishing-returns inequality.

    Returns ``(True, None)`` if no sampled chain violates
    gain(X, v) ≥ gain(Y, v) − tol, else ``(False, (X, Y, v))`` for the first
    violation found.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    ground = np.array(sorted(f.ground_set), dtype=np.int64)
    for _ in range(trials):
        chain = _random_chain(rng, ground)
        if chain is None:
            continue
        x, y, v = chain
        if marginal_gain(f, x, v) < marginal_gain(f, y, v) - tol:
            return False, (x, y, v)
    return True, None


def check_monotone(
    f: SetFunction, trials: int, rng_seed: int, tol: float = 1e-9
) -> tuple[bool, tuple | None]:
    """Sample X ⊆ Y pairs and test f(X) ≤ f(Y) + tol."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    ground = np.array(sorted(f.ground_set), dtype=np.int64)
    for _ in range(trials):
        in_y = rng.random(ground.size) < rng.random()
        y = ground[in_y]
        x = y[rng.random(y.size) < rng.random()]
        fx = f.evaluate(int(u) for u in x)
        fy = f.evaluate(int(u) for u in y)
        if fx > fy + tol:
            return False, (frozenset(int(u) for u in x), frozenset(int(u) for u in y))
    return True, None
