"""Correlation-based inference against a shared genotype row.

The attacker sees a reported row y, the pairwise correlation model, and the
privacy budget.  For every SNP i it counts, over all other reported SNPs
k != i, how often Pr(SNP_i = v | SNP_k = y_k) is defined and strictly below
tau; a state v whose count reaches gamma * l is ruled out.  The belief over
the true value starts from the randomized-response likelihood profile
(p on the reported value, q elsewhere), zeroes ruled-out states, and
renormalizes.  If every state is ruled out, the unmodified profile is kept —
total inconsistency carries no usable direction.

Also here: the estimation-error score that summarizes how close beliefs sit
to the truth, and a consistency post-processing pass for plain randomized
response reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import STATES, CorrelationModel, _as_genotype_array
from .rr import rr_params


@dataclass(frozen=True)
class AttackConfig:
    """Attacker knowledge: the budget, its own thresholds, and (optionally)
    the mechanism's elimination parameters for a replay-augmented attack."""

    epsilon_known: float
    tau: float
    gamma: float
    mechanism_params_known: tuple[float, float] | None = None

    def __post_init__(self):
        if not math.isfinite(self.epsilon_known) or self.epsilon_known < 0:
            raise ValueError(f"epsilon_known must be finite and >= 0, got {self.epsilon_known}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.mechanism_params_known is not None:
            tau_hat, gamma_hat = self.mechanism_params_known
            if not 0.0 < tau_hat < 1.0:
                raise ValueError(f"known tau_hat must be in (0, 1), got {tau_hat}")
            if not math.isfinite(gamma_hat) or gamma_hat <= 0:
                raise ValueError(f"known gamma_hat must be finite and > 0, got {gamma_hat}")


@dataclass(frozen=True)
class AttackerBelief:
    """Per-SNP posterior over true values for one attacked row."""

    probs: np.ndarray  # (l, 3)
    eliminated: np.ndarray  # (l, 3) bool
    fallback: np.ndarray  # (l,) bool, True where every state was ruled out


def _rr_profile(y: np.ndarray, epsilon: float) -> np.ndarray:
    params = rr_params(epsilon)
    l = y.size
    profile = np.full((l, 3), params.q)
    profile[np.arange(l), y] = params.p
    return profile


def _attack_counts(Y: np.ndarray, corr: CorrelationModel, tau: float) -> np.ndarray:
    """counts[j, i, v] = #{k != i : Pr(SNP_i=v | SNP_k=Y[j,k]) defined, < tau}."""
    mask = corr.low_mask(tau)  # (l, l, 3, 3), diagonal cleared
    n, l = Y.shape
    M2 = mask.transpose(1, 3, 0, 2).reshape(l * 3, l * 3).astype(np.float32)
    onehot = np.zeros((n, l, 3), dtype=np.float32)
    onehot[np.arange(n)[:, None], np.arange(l)[None, :], Y] = 1.0
    counts = onehot.reshape(n, l * 3) @ M2
    return np.rint(counts.reshape(n, l, 3)).astype(np.int32)


def rr_belief_population(Y, epsilon: float) -> AttackerBelief:
    """Beliefs of an attacker who ignores correlations entirely.

    Pure randomized-response likelihood profiles (p on each reported value,
    q elsewhere), nothing eliminated; the no-attack baseline for estimation
    error comparisons.
    """
    Y = np.atleast_2d(_as_genotype_array(Y, "reported values"))
    n, l = Y.shape
    probs = np.stack([_rr_profile(Y[j], epsilon) for j in range(n)])
    return AttackerBelief(
        probs=probs,
        eliminated=np.zeros((n, l, 3), dtype=bool),
        fallback=np.zeros((n, l), dtype=bool),
    )


def attack_population(
    Y, corr: CorrelationModel, config: AttackConfig, assumed_order=None
) -> AttackerBelief:
    """Attack every row of a reported matrix at once.

    When the config carries the mechanism's (tau_hat, gamma_hat), states the
    mechanism could not have reported under ``assumed_order`` (identity by
    default) are additionally ruled out before renormalizing.
    """
    Y = np.atleast_2d(_as_genotype_array(Y, "reported values"))
    n, l = Y.shape
    if corr.l != l:
        raise ValueError(f"correlation model covers {corr.l} SNPs, data has {l}")
    counts = _attack_counts(Y, corr, config.tau)
    eliminated = counts >= config.gamma * l
    if config.mechanism_params_known is not None:
        tau_hat, gamma_hat = config.mechanism_params_known
        for j in range(n):
            possible = recover_possible_inputs(Y[j], corr, tau_hat, gamma_hat, assumed_order)
            eliminated[j] |= ~possible
    profile = np.stack([_rr_profile(Y[j], config.epsilon_known) for j in range(n)])
    fallback = eliminated.all(axis=2)
    kept = np.where(fallback[:, :, None], True, ~eliminated)
    probs = profile * kept
    probs /= probs.sum(axis=2, keepdims=True)
    return AttackerBelief(probs=probs, eliminated=eliminated, fallback=fallback)


def attack(y, corr: CorrelationModel, config: AttackConfig, assumed_order=None) -> AttackerBelief:
    """Attack a single reported row; see attack_population."""
    y = _as_genotype_array(y, "reported values")
    if y.ndim != 1:
        raise ValueError(f"reported row must be 1-D, got shape {y.shape}")
    belief = attack_population(y[None, :], corr, config, assumed_order)
    return AttackerBelief(
        probs=belief.probs[0], eliminated=belief.eliminated[0], fallback=belief.fallback[0]
    )


def recover_possible_inputs(
    y, corr: CorrelationModel, tau_hat: float, gamma_hat: float, order=None
) -> np.ndarray:
    """Replay the mechanism's elimination rule on a reported row.

    Returns a (l, 3) boolean array of states the mechanism could still have
    reported at each SNP.  With the true parameters and the true processing
    order this reproduces the mechanism's own elimination outcomes exactly,
    because those depended only on the shared values.  ``order`` defaults to
    the identity order.
    """
    y = _as_genotype_array(y, "reported values")
    l = y.size
    if order is None:
        order = range(l)
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(l)):
        raise ValueError(f"order must be a permutation of 0..{l - 1}, got {order}")
    if not math.isfinite(gamma_hat) or gamma_hat <= 0:
        raise ValueError(f"gamma_hat must be finite and > 0, got {gamma_hat}")
    mask = corr.low_mask(tau_hat)
    inc = mask.transpose(1, 3, 0, 2)  # [k, b, i, v]
    counters = np.zeros((l, 3), dtype=np.int32)
    possible = np.ones((l, 3), dtype=bool)
    for a, i in enumerate(order, start=1):
        possible[i] = counters[i] < gamma_hat * a
        counters += inc[i, y[i]]
    return possible


def estimation_error(belief_probs, truth) -> float:
    """Mean belief-weighted distance to the truth: (1/l) sum_k sum_v
    Pr(x_k = v) |x_k - v|, in [0, 2]."""
    probs = np.asarray(belief_probs, dtype=np.float64)
    x = _as_genotype_array(truth, "truth")
    if probs.shape != (x.size, 3):
        raise ValueError(f"belief must be ({x.size}, 3), got {probs.shape}")
    dist = np.abs(x[:, None] - np.arange(3)[None, :])
    return float((probs * dist).sum() / x.size)


def population_estimation_error(belief: AttackerBelief, truth_matrix) -> float:
    """Mean per-row estimation error over a population."""
    X = np.atleast_2d(_as_genotype_array(truth_matrix, "truth"))
    probs = belief.probs
    if probs.shape[:2] != X.shape:
        raise ValueError(f"beliefs cover shape {probs.shape[:2]}, truth is {X.shape}")
    dist = np.abs(X[:, :, None] - np.arange(3)[None, None, :])
    return float((probs * dist).sum(axis=(1, 2)).mean() / X.shape[1])


def rr_postprocess(
    y, corr: CorrelationModel, tau: float, gamma: float, max_sweeps: int = 3
) -> np.ndarray:
    """Rewrite a randomized-response row so it passes the consistency check.

    Sweeps the row in index order; where the reported value is ruled out by
    the attack-style count over the other current reports, it is replaced by
    the surviving state with the highest average defined conditional given
    those reports (lowest state on ties; left alone if nothing survives).
    Stops when a sweep changes nothing or after ``max_sweeps`` sweeps.
    """
    y = _as_genotype_array(y, "reported values").copy()
    l = y.size
    if corr.l != l:
        raise ValueError(f"correlation model covers {corr.l} SNPs, row has {l}")
    low = corr.low_mask(tau)
    cond = corr.cond
    defined = ~np.isnan(cond)
    idx = np.arange(l)
    defined_od = defined.copy()
    defined_od[idx, idx] = False  # exclude self-pairs from averages
    cond_filled = np.where(defined_od, cond, 0.0)
    low_int = low.astype(np.int32)
    threshold = gamma * l

    for _ in range(max_sweeps):
        changed = False
        # counts[i, v] = #{k : report k rules out state v of SNP i}; the
        # diagonal of the low-mask is clear, so self-pairs contribute nothing
        counts = low[:, idx, :, y].sum(axis=0)
        for i in range(l):
            ruled_out = counts[i] >= threshold
            if not ruled_out[y[i]]:
                continue
            survivors = [v for v in STATES if not ruled_out[v]]
            if not survivors:
                continue
            sums = cond_filled[i][idx, :, y].sum(axis=0)
            support = defined_od[i][idx, :, y].sum(axis=0)
            means = np.where(support > 0, sums / np.maximum(support, 1), -1.0)
            best = max(survivors, key=lambda v: (means[v], -v))
            if best != y[i]:
                counts += low_int[:, i, :, best] - low_int[:, i, :, y[i]]
                y[i] = best
                changed = True
        if not changed:
            break
    return y


def rr_postprocess_population(
    Y, corr: CorrelationModel, tau: float, gamma: float, max_sweeps: int = 3
) -> np.ndarray:
    """Row-by-row rr_postprocess over a matrix."""
    Y = np.atleast_2d(_as_genotype_array(Y, "reported values"))
    return np.stack([rr_postprocess(Y[j], corr, tau, gamma, max_sweeps) for j in range(Y.shape[0])])
