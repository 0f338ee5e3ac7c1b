"""Shared helpers for the test suite: handcrafted correlation models and
exact-arithmetic randomized-response parameters."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from corrldp.data import CorrelationModel
from corrldp.rr import PerturbParams

UNIFORM = (1.0 / 3, 1.0 / 3, 1.0 / 3)


def uniform_corr(l: int) -> CorrelationModel:
    """Every conditional and marginal is 1/3: no pair carries any signal."""
    cond = np.full((l, l, 3, 3), 1.0 / 3)
    marginals = np.full((l, 3), 1.0 / 3)
    return CorrelationModel(cond=cond, marginals=marginals)


def custom_corr(l: int, triples: dict[tuple[int, int, int], tuple[float, float, float]]) -> CorrelationModel:
    """Uniform model with selected conditional columns overridden.

    ``triples[(i, k, b)]`` replaces the probability triple
    (Pr(SNP_i = 0 | SNP_k = b), Pr(... = 1 | ...), Pr(... = 2 | ...)).
    Each triple must sum to 1.
    """
    cond = np.full((l, l, 3, 3), 1.0 / 3)
    for (i, k, b), triple in triples.items():
        if abs(sum(triple) - 1.0) > 1e-12:
            raise ValueError(f"override for {(i, k, b)} must sum to 1, got {triple}")
        cond[i, k, :, b] = triple
    marginals = np.full((l, 3), 1.0 / 3)
    return CorrelationModel(cond=cond, marginals=marginals)


def exact_params(ratio: Fraction) -> PerturbParams:
    """Randomized-response parameters with exact rational arithmetic, for a
    likelihood ratio standing in for e^epsilon."""
    return PerturbParams.from_likelihood_ratio(Fraction(ratio))


def reference_optimal_value(spec) -> float:
    """Independent expectimax over raw prefix states of an order-selection
    decision process, memoized on the exact prefix (no state compression)."""
    memo: dict = {}

    def best(state):
        actions = spec.actions(state)
        if not actions:
            return 0.0
        hit = memo.get(state)
        if hit is not None:
            return hit
        val = max(
            sum(p * (r + best(nxt)) for p, nxt, r in spec.transition(state, a))
            for a in actions
        )
        memo[state] = val
        return val

    return best(spec.initial_state())
