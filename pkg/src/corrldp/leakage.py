"""Analytic upper bound on what any attacker can conclude from a share.

An attacker weighing two candidate values for an unknown SNP starts from a
prior-probability ratio zeta between them.  Whatever side information the
prior encodes, one perturbed report under budget epsilon can shift the
posterior probability of either candidate to at most

    max( 1 / (zeta e^eps + 1),  zeta e^eps / (zeta e^eps + 1) ),

a value in [1/2, 1) depending only on the product zeta * e^eps.  It reaches
1/2 exactly when the report's evidence balances the prior (zeta e^eps = 1)
and approaches 1 only as the prior or the budget grows without bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LeakageQuery:
    """Attacker prior ratio between two candidate values, plus the budget."""

    zeta: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.zeta) and self.zeta > 0):
            raise ValueError(f"zeta must be finite and > 0, got {self.zeta}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")


def leakage_upper_bound(query: LeakageQuery) -> float:
    """Largest posterior probability either candidate value can attain."""
    w = query.zeta * math.exp(query.epsilon)
    return max(1.0, w) / (w + 1.0)
