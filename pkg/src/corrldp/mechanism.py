"""Correlation-aware sequential perturbation of a genotype row.

SNPs are processed in a chosen order.  Before sharing SNP i at (1-based)
position a, each state v accumulates an inconsistency counter over the
already-shared prefix: a previously shared (k, y_k) increments the counter
when Pr(SNP_i = v | SNP_k = y_k) is defined and falls strictly below the
threshold tau_hat (each state tested independently).  States whose counter
reaches gamma_hat * a are eliminated, and the report for SNP i is drawn from
a distribution adjusted to the surviving states:

* nothing eliminated      -> plain randomized response (p on the truth, q
                             elsewhere);
* one state eliminated,
  truth survives          -> truth gets p' = p/(p+q), the other survivor q';
* one state eliminated,
  truth eliminated        -> plain mode splits 1/2-1/2 over the survivors;
                             beacon mode keeps the truth's zero/non-zero
                             class likely: truth 0 splits 1/2-1/2, truth 1
                             sends p' to state 2, truth 2 sends p' to state 1;
* two states eliminated   -> the lone survivor is reported outright;
* all three eliminated    -> fall back to plain randomized response on the
                             truth.

The adjusted distributions preserve the e^eps likelihood-ratio bound between
any two states that remain possible given the shared prefix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .data import STATES, CorrelationModel, GenotypeMatrix, _as_genotype_array, as_seed_sequence
from .rr import PerturbParams, rr_params


class SharingMode(enum.Enum):
    PLAIN = "plain"
    BEACON = "beacon"


class Branch(enum.Enum):
    """Which case of the adjusted-distribution table produced a report."""

    RR = "rr"
    PAIR_TRUTH_KEPT = "pair_truth_kept"
    PAIR_TRUTH_DROPPED = "pair_truth_dropped"
    SOLE_SURVIVOR = "sole_survivor"
    ALL_ELIMINATED_FALLBACK = "all_eliminated_fallback"


@dataclass(frozen=True)
class MechanismConfig:
    """Budget and elimination thresholds for the sequential mechanism.

    gamma_hat is the per-position elimination fraction; values >= 1 can never
    fire (counters stay below the position index) and effectively disable
    elimination, which is occasionally useful for baselines.
    """

    epsilon: float
    tau_hat: float
    gamma_hat: float
    mode: SharingMode = SharingMode.BEACON

    def __post_init__(self):
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not 0.0 < self.tau_hat < 1.0:
            raise ValueError(f"tau_hat must be in (0, 1), got {self.tau_hat}")
        if not math.isfinite(self.gamma_hat) or self.gamma_hat <= 0:
            raise ValueError(f"gamma_hat must be finite and > 0, got {self.gamma_hat}")
        if not isinstance(self.mode, SharingMode):
            raise ValueError(f"mode must be a SharingMode, got {self.mode!r}")

    @cached_property
    def params(self) -> PerturbParams:
        return rr_params(self.epsilon)


@dataclass(frozen=True)
class EliminationOutcome:
    """Counters and eliminated states for one SNP at its processing position."""

    snp: int
    position: int
    counters: tuple[int, int, int]
    eliminated: frozenset[int]


@dataclass(frozen=True)
class SharingDistribution:
    """Report distribution over states for one SNP, with its table branch."""

    probs: tuple[float, float, float]
    branch: Branch

    def support(self) -> tuple[int, ...]:
        return tuple(v for v in STATES if self.probs[v] > 0)


def sharing_probs(
    x: int, eliminated: Iterable[int], params: PerturbParams, mode: SharingMode
) -> tuple[tuple, Branch]:
    """Adjusted report distribution for true value x given eliminated states.

    Arithmetic stays in the numeric type of ``params`` (floats or exact
    fractions), so the returned probabilities can be checked exactly.
    """
    if x not in STATES:
        raise ValueError(f"true value must be in {{0, 1, 2}}, got {x}")
    elim = frozenset(eliminated)
    if not elim <= set(STATES):
        raise ValueError(f"eliminated states must be a subset of {{0, 1, 2}}, got {elim}")
    zero = params.p - params.p
    one = params.p / params.p if params.p != 0 else 1.0
    half = one / 2
    probs = [zero, zero, zero]

    if len(elim) == 0:
        for v in STATES:
            probs[v] = params.p if v == x else params.q
        return tuple(probs), Branch.RR
    if len(elim) == 3:
        for v in STATES:
            probs[v] = params.p if v == x else params.q
        return tuple(probs), Branch.ALL_ELIMINATED_FALLBACK
    if len(elim) == 2:
        (survivor,) = set(STATES) - elim
        probs[survivor] = one
        return tuple(probs), Branch.SOLE_SURVIVOR

    # exactly one state eliminated
    survivors = [v for v in STATES if v not in elim]
    if x not in elim:
        other = survivors[0] if survivors[1] == x else survivors[1]
        probs[x] = params.p_pair
        probs[other] = params.q_pair
        return tuple(probs), Branch.PAIR_TRUTH_KEPT
    # the truth itself was eliminated (elim == {x})
    if mode is SharingMode.PLAIN or x == 0:
        for v in survivors:
            probs[v] = half
    elif x == 1:
        probs[0] = params.q_pair
        probs[2] = params.p_pair
    else:  # x == 2
        probs[0] = params.q_pair
        probs[1] = params.p_pair
    return tuple(probs), Branch.PAIR_TRUTH_DROPPED


def sharing_distribution(
    x: int, eliminated: Iterable[int], config: MechanismConfig
) -> SharingDistribution:
    probs, branch = sharing_probs(x, eliminated, config.params, config.mode)
    return SharingDistribution(probs=tuple(float(v) for v in probs), branch=branch)


def eliminate_states(
    snp: int,
    prefix: Sequence[tuple[int, int]],
    corr: CorrelationModel,
    config: MechanismConfig,
) -> EliminationOutcome:
    """Run the inconsistency test for one SNP against the shared prefix.

    ``prefix`` holds (snp_index, shared_value) pairs for everything already
    reported, in processing order; the SNP under test sits at position
    ``len(prefix) + 1``.  Undefined conditionals never count as evidence.
    """
    position = len(prefix) + 1
    mask = corr.low_mask(config.tau_hat)
    if prefix:
        ks = np.fromiter((k for k, _ in prefix), dtype=np.intp, count=len(prefix))
        ys = np.fromiter((y for _, y in prefix), dtype=np.intp, count=len(prefix))
        counters = mask[snp, ks, :, ys].sum(axis=0)
    else:
        counters = np.zeros(3, dtype=np.int64)
    threshold = config.gamma_hat * position
    eliminated = frozenset(v for v in STATES if counters[v] >= threshold)
    return EliminationOutcome(
        snp=snp,
        position=position,
        counters=tuple(int(c) for c in counters),
        eliminated=eliminated,
    )


@dataclass(frozen=True)
class DependenceInfo:
    """What the mechanism actually conditioned on, per SNP.

    ``horizon`` is the maximum number of other SNPs any report may depend on
    (the full preceding prefix, so l - 1); ``consulted[i]`` is the set of SNP
    indices SNP i's elimination test saw; ``ineliminable[i]`` marks SNPs
    where elimination left exactly the true value, which are inherently
    revealed and sit outside the likelihood-ratio guarantee.
    """

    horizon: int
    consulted: tuple[frozenset[int], ...]
    ineliminable: tuple[bool, ...]


@dataclass(frozen=True)
class PerturbedSequence:
    """One individual's shared row plus the full per-SNP trace."""

    values: np.ndarray
    order: tuple[int, ...]
    records: tuple[tuple[EliminationOutcome, SharingDistribution], ...]
    info: DependenceInfo

    def record_for(self, snp: int) -> tuple[EliminationOutcome, SharingDistribution]:
        return self.records[snp]


def _validate_order(order: Sequence[int], l: int) -> tuple[int, ...]:
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(l)):
        raise ValueError(f"order must be a permutation of 0..{l - 1}, got {order}")
    return order


def _stream(rng_seed) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(rng_seed))


def _sample_state(cum: Sequence[float], u: float) -> int:
    """Inverse-CDF draw shared by the scalar and population paths."""
    return int(u >= cum[0]) + int(u >= cum[1])


def classify_ineliminable(row, outcomes: Sequence[EliminationOutcome]) -> list[bool]:
    """True where exactly two states were eliminated and the survivor is the truth."""
    row = _as_genotype_array(row, "row")
    flags = []
    for x, outcome in zip(row, outcomes):
        survivors = set(STATES) - outcome.eliminated
        flags.append(len(survivors) == 1 and survivors == {int(x)})
    return flags


def perturb_sequence(
    row,
    order: Sequence[int],
    corr: CorrelationModel,
    config: MechanismConfig,
    rng_seed,
) -> PerturbedSequence:
    """Share one genotype row through the sequential mechanism.

    One uniform draw is consumed per processing step, so a fixed seed pins
    the entire output.  Reported values land at their original positions.
    """
    row = _as_genotype_array(row, "row")
    if row.ndim != 1:
        raise ValueError(f"row must be 1-D, got shape {row.shape}")
    l = row.size
    if corr.l != l:
        raise ValueError(f"correlation model covers {corr.l} SNPs, row has {l}")
    order = _validate_order(order, l)
    gen = _stream(rng_seed)

    values = np.empty(l, dtype=np.int8)
    records: list = [None] * l
    consulted: list = [None] * l
    prefix: list[tuple[int, int]] = []
    for i in order:
        outcome = eliminate_states(i, prefix, corr, config)
        dist = sharing_distribution(int(row[i]), outcome.eliminated, config)
        cum = np.cumsum(dist.probs)
        y = _sample_state(cum, gen.random())
        values[i] = y
        records[i] = (outcome, dist)
        consulted[i] = frozenset(k for k, _ in prefix)
        prefix.append((i, y))

    info = DependenceInfo(
        horizon=l - 1,
        consulted=tuple(consulted),
        ineliminable=tuple(classify_ineliminable(row, [records[i][0] for i in range(l)])),
    )
    return PerturbedSequence(values=values, order=order, records=tuple(records), info=info)


@dataclass(frozen=True)
class PopulationShare:
    """Vectorized share of a whole population under one processing order."""

    values: np.ndarray  # (n, l) int8
    eliminated: np.ndarray  # (n, l, 3) bool
    order: tuple[int, ...]

    def matrix(self) -> GenotypeMatrix:
        return GenotypeMatrix(self.values)


def branch_tables(config: MechanismConfig) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative report distributions indexed by (true value, eliminated bits).

    Returns (cum, probs), each shaped (3, 8, 3); bit v of the second index
    says state v is eliminated.
    """
    probs = np.zeros((3, 8, 3))
    for x in STATES:
        for bits in range(8):
            elim = {v for v in STATES if bits >> v & 1}
            p, _ = sharing_probs(x, elim, config.params, config.mode)
            probs[x, bits] = [float(val) for val in p]
    return np.cumsum(probs, axis=2), probs


def perturb_population(
    matrix: GenotypeMatrix,
    order: Sequence[int],
    corr: CorrelationModel,
    config: MechanismConfig,
    rng_seed,
) -> PopulationShare:
    """Share every row of a matrix under one order; row j draws its uniforms
    from the j-th spawned child of the seed (spawn_key=(j,) for an int seed),
    making the output identical to calling perturb_sequence row by row with
    those sub-streams."""
    X = matrix.values
    n, l = X.shape
    if corr.l != l:
        raise ValueError(f"correlation model covers {corr.l} SNPs, matrix has {l}")
    order = _validate_order(order, l)
    cum, _ = branch_tables(config)

    children = as_seed_sequence(rng_seed).spawn(n)
    U = np.empty((n, l))
    for j in range(n):
        U[j] = np.random.default_rng(children[j]).random(l)

    # inc[k, b] is the (l, 3) counter increment caused by sharing SNP k as b
    inc = np.ascontiguousarray(
        corr.low_mask(config.tau_hat).transpose(1, 3, 0, 2).astype(np.int16)
    )
    counters = np.zeros((n, l, 3), dtype=np.int16)
    values = np.empty((n, l), dtype=np.int8)
    eliminated = np.empty((n, l, 3), dtype=bool)
    for a, i in enumerate(order, start=1):
        elim = counters[:, i, :] >= config.gamma_hat * a
        bits = elim[:, 0] * 1 + elim[:, 1] * 2 + elim[:, 2] * 4
        c = cum[X[:, i], bits]
        u = U[:, a - 1]
        y = (u[:, None] >= c[:, :2]).sum(axis=1).astype(np.int8)
        values[:, i] = y
        eliminated[:, i, :] = elim
        counters += inc[i, y]
    return PopulationShare(values=values, eliminated=eliminated, order=order)
