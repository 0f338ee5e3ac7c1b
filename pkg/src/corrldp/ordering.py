"""Choosing the order in which a row's SNPs are shared.

The order matters because elimination looks at the already-shared prefix:
an order that front-loads informative SNPs changes which states later SNPs
can drop, and with them the chance that each report stays in the truth's
zero/non-zero class (its beacon utility).

Order selection is a finite-horizon decision process: a state is the prefix
of (snp, value) reports, an action is the next SNP to share, and the reward
for a step is 1 when the sampled report preserves the SNP's beacon class.
The exact optimum comes from one backward pass of memoized recursion (the
horizon is finite, so no iterate-to-convergence loop is needed); the greedy
policy takes the best immediate expected utility and samples as it goes;
``random_order`` is the baseline.

Everything here is exponential in the worst case, so the exact solver caps
at EXACT_METHOD_MAX_SNPS and full order enumeration at BRUTE_FORCE_MAX_SNPS.
The exact solver collapses prefixes that no future elimination test can tell
apart (same remaining set, same counters after saturating at the largest
threshold any position can demand), which keeps realistic instances small.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .beacon import per_snp_expected_utility
from .data import STATES, CorrelationModel, _as_genotype_array, as_seed_sequence
from .mechanism import (
    DependenceInfo,
    MechanismConfig,
    PerturbedSequence,
    branch_tables,
    classify_ineliminable,
    eliminate_states,
    perturb_sequence,
    sharing_distribution,
)

ProcessingOrder = tuple[int, ...]

EXACT_METHOD_MAX_SNPS = 12
BRUTE_FORCE_MAX_SNPS = 6

_SHARE_STREAM = 0
_TIE_STREAM = 1


def random_order(l: int, rng_seed) -> ProcessingOrder:
    """A uniformly random permutation of 0..l-1, pinned by the seed."""
    if l < 1:
        raise ValueError(f"need at least one SNP, got l={l}")
    rng = np.random.default_rng(as_seed_sequence(rng_seed))
    return tuple(int(i) for i in rng.permutation(l))


@dataclass(frozen=True)
class MdpSpec:
    """Semantic view of the order-selection decision process.

    States are prefixes of (snp, value) pairs in processing order; actions
    are unshared SNP indices; transitions sample the sharing distribution
    induced by elimination against the prefix, with reward 1 when the report
    preserves the beacon class of the true value.
    """

    row: tuple[int, ...]
    corr: CorrelationModel
    config: MechanismConfig

    def initial_state(self) -> tuple:
        return ()

    def actions(self, state: tuple) -> tuple[int, ...]:
        taken = {k for k, _ in state}
        return tuple(i for i in range(len(self.row)) if i not in taken)

    def transition(self, state: tuple, action: int) -> list[tuple[float, tuple, int]]:
        """(probability, next state, reward) for each possible report."""
        outcome = eliminate_states(action, list(state), self.corr, self.config)
        dist = sharing_distribution(self.row[action], outcome.eliminated, self.config)
        x_class = self.row[action] > 0
        result = []
        for y in STATES:
            if dist.probs[y] > 0:
                reward = int((y > 0) == x_class)
                result.append((dist.probs[y], state + ((action, y),), reward))
        return result


class _ExactSolver:
    """Backward-induction solver over (remaining set, saturated counters)."""

    def __init__(self, row: np.ndarray, corr: CorrelationModel, config: MechanismConfig):
        self.row = row
        self.config = config
        self.l = row.size
        self.gamma_hat = config.gamma_hat
        self.cap = max(1, math.ceil(config.gamma_hat * self.l))
        cum, probs = branch_tables(config)
        self.probs_table = probs  # (3, 8, 3)
        self.util_table = np.empty((3, 8))
        for x in STATES:
            for bits in range(8):
                self.util_table[x, bits] = per_snp_expected_utility(x, probs[x, bits])
        low = corr.low_mask(config.tau_hat)
        # sparse increments: sharing (k, y) bumps counter slot 3*i + v of SNP i
        self.inc: list[list[tuple[tuple[int, int], ...]]] = []
        for k in range(self.l):
            per_value = []
            for y in STATES:
                hits = []
                for i in range(self.l):
                    for v in STATES:
                        if low[i, k, v, y]:
                            hits.append((3 * i + v, 1 << i))
                per_value.append(tuple(hits))
            self.inc.append(per_value)
        self.memo: dict[tuple[int, bytes], tuple[float, int]] = {}

    def initial(self) -> tuple[int, bytes]:
        return (1 << self.l) - 1, bytes(3 * self.l)

    def child(self, mask: int, counters: bytes, snp: int, y: int) -> tuple[int, bytes]:
        child_mask = mask & ~(1 << snp)
        cc = bytearray(counters)
        cc[3 * snp] = cc[3 * snp + 1] = cc[3 * snp + 2] = 0
        for slot, snp_bit in self.inc[snp][y]:
            if child_mask & snp_bit and cc[slot] < self.cap:
                cc[slot] += 1
        return child_mask, bytes(cc)

    def elimination_bits(self, counters: bytes, snp: int, position: int) -> int:
        thr = self.gamma_hat * position
        base = 3 * snp
        return (
            (counters[base] >= thr)
            | ((counters[base + 1] >= thr) << 1)
            | ((counters[base + 2] >= thr) << 2)
        )

    def value(self, mask: int, counters: bytes) -> tuple[float, int]:
        """(best expected remaining utility, best next SNP; -1 when done)."""
        if mask == 0:
            return 0.0, -1
        key = (mask, counters)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        position = self.l - mask.bit_count() + 1
        best_val, best_act = -1.0, -1
        for i in range(self.l):
            if not mask >> i & 1:
                continue
            bits = self.elimination_bits(counters, i, position)
            x = self.row[i]
            val = self.util_table[x, bits]
            probs = self.probs_table[x, bits]
            for y in STATES:
                if probs[y] > 0:
                    cm, cc = self.child(mask, counters, i, y)
                    val += probs[y] * self.value(cm, cc)[0]
            if val > best_val:
                best_val, best_act = val, i
        self.memo[key] = (best_val, best_act)
        return best_val, best_act

    def state_after(self, prefix: Sequence[tuple[int, int]]) -> tuple[int, bytes]:
        mask, counters = self.initial()
        for k, y in prefix:
            if not mask >> k & 1:
                raise ValueError(f"SNP {k} appears twice in the prefix")
            mask, counters = self.child(mask, counters, k, y)
        return mask, counters


class OrderPolicy:
    """Adaptive optimal policy: maps a realized prefix to the next SNP."""

    def __init__(self, solver: _ExactSolver):
        self._solver = solver
        self.expected_utility = solver.value(*solver.initial())[0]

    def action(self, prefix: Sequence[tuple[int, int]] = ()) -> int:
        mask, counters = self._solver.state_after(prefix)
        act = self._solver.value(mask, counters)[1]
        if act < 0:
            raise ValueError("every SNP has already been shared")
        return act


def optimal_order_value_iteration(
    row, corr: CorrelationModel, config: MechanismConfig
) -> tuple[OrderPolicy, float]:
    """Exact adaptive optimum of the expected per-row beacon utility.

    Returns the policy and its expected total utility.  Ties between SNPs
    resolve to the lowest index.  Capped at EXACT_METHOD_MAX_SNPS.
    """
    row = _as_genotype_array(row, "row")
    if row.size > EXACT_METHOD_MAX_SNPS:
        raise ValueError(
            f"exact solve supports at most {EXACT_METHOD_MAX_SNPS} SNPs, got {row.size}"
        )
    if corr.l != row.size:
        raise ValueError(f"correlation model covers {corr.l} SNPs, row has {row.size}")
    solver = _ExactSolver(row, corr, config)
    policy = OrderPolicy(solver)
    return policy, policy.expected_utility


def expected_utility_of_order(
    row,
    order: Sequence[int],
    corr: CorrelationModel,
    config: MechanismConfig,
    method: str = "exact",
    trials: int = 1000,
    rng_seed: int = 0,
) -> float:
    """Expected total beacon utility of sharing ``row`` in a fixed order.

    ``method="exact"`` walks the full outcome tree (memoized, capped at
    EXACT_METHOD_MAX_SNPS); ``method="monte_carlo"`` averages realized
    utility over seeded trials.
    """
    row = _as_genotype_array(row, "row")
    l = row.size
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(l)):
        raise ValueError(f"order must be a permutation of 0..{l - 1}, got {order}")
    if method == "monte_carlo":
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        children = as_seed_sequence(rng_seed).spawn(trials)
        total = 0.0
        for t in range(trials):
            seq = perturb_sequence(row, order, corr, config, children[t])
            total += sum(
                int((int(y) > 0) == (int(x) > 0)) for x, y in zip(row, seq.values)
            )
        return total / trials
    if method != "exact":
        raise ValueError(f"method must be 'exact' or 'monte_carlo', got {method!r}")
    if l > EXACT_METHOD_MAX_SNPS:
        raise ValueError(f"exact evaluation supports at most {EXACT_METHOD_MAX_SNPS} SNPs")
    solver = _ExactSolver(row, corr, config)
    memo: dict[tuple[int, bytes], float] = {}

    def walk(a: int, mask: int, counters: bytes) -> float:
        if a == l:
            return 0.0
        key = (a, counters)
        hit = memo.get(key)
        if hit is not None:
            return hit
        i = order[a]
        bits = solver.elimination_bits(counters, i, a + 1)
        x = row[i]
        val = solver.util_table[x, bits]
        probs = solver.probs_table[x, bits]
        for y in STATES:
            if probs[y] > 0:
                cm, cc = solver.child(mask, counters, i, y)
                val += probs[y] * walk(a + 1, cm, cc)
        memo[key] = val
        return val

    m0, c0 = solver.initial()
    return walk(0, m0, c0)


def brute_force_order(
    row, corr: CorrelationModel, config: MechanismConfig
) -> tuple[ProcessingOrder, float]:
    """Best static order by exhaustive enumeration (lexicographically first
    among ties).  Capped at BRUTE_FORCE_MAX_SNPS."""
    row = _as_genotype_array(row, "row")
    l = row.size
    if l > BRUTE_FORCE_MAX_SNPS:
        raise ValueError(f"brute force supports at most {BRUTE_FORCE_MAX_SNPS} SNPs, got {l}")
    best_order, best_val = None, -1.0
    for perm in itertools.permutations(range(l)):
        val = expected_utility_of_order(row, perm, corr, config, method="exact")
        if val > best_val:
            best_order, best_val = perm, val
    return best_order, best_val


def greedy_share(
    row, corr: CorrelationModel, config: MechanismConfig, rng_seed
) -> tuple[ProcessingOrder, PerturbedSequence]:
    """Greedy order plus the sequence realized while choosing it.

    At each step the unshared SNP with the highest immediate expected utility
    is picked (ties uniformly at random from a dedicated sub-stream) and its
    report is sampled before the next pick.  Shares come from the seed's
    first spawned child (spawn_key=(0,) for an int seed), so
    perturb_sequence(row, order, corr, config, SeedSequence(rng_seed,
    spawn_key=(0,))) replays the identical sequence.
    """
    row = _as_genotype_array(row, "row")
    l = row.size
    if corr.l != l:
        raise ValueError(f"correlation model covers {corr.l} SNPs, row has {l}")
    share_ss, tie_ss = as_seed_sequence(rng_seed).spawn(2)
    share_stream = np.random.default_rng(share_ss)
    tie_stream = np.random.default_rng(tie_ss)

    prefix: list[tuple[int, int]] = []
    remaining = list(range(l))
    order: list[int] = []
    for _ in range(l):
        utilities = []
        for i in remaining:
            outcome = eliminate_states(i, prefix, corr, config)
            dist = sharing_distribution(int(row[i]), outcome.eliminated, config)
            utilities.append(per_snp_expected_utility(int(row[i]), dist.probs))
        best = max(utilities)
        ties = [i for i, u in zip(remaining, utilities) if u == best]
        pick = ties[0] if len(ties) == 1 else ties[int(tie_stream.integers(len(ties)))]
        outcome = eliminate_states(pick, prefix, corr, config)
        dist = sharing_distribution(int(row[pick]), outcome.eliminated, config)
        cum = np.cumsum(dist.probs)
        u = share_stream.random()
        y = int(u >= cum[0]) + int(u >= cum[1])
        prefix.append((pick, y))
        order.append(pick)
        remaining.remove(pick)

    seq = perturb_sequence(row, order, corr, config, share_ss)
    return tuple(order), seq


def greedy_order(
    row, corr: CorrelationModel, config: MechanismConfig, rng_seed
) -> ProcessingOrder:
    """The order greedy_share would take; see greedy_share for replaying it."""
    return greedy_share(row, corr, config, rng_seed)[0]


def perturb_with_policy(
    row, policy: OrderPolicy, corr: CorrelationModel, config: MechanismConfig, rng_seed
) -> PerturbedSequence:
    """Realize an adaptive policy: each next SNP may depend on past reports.

    One uniform per step, same convention as perturb_sequence."""
    row = _as_genotype_array(row, "row")
    l = row.size
    gen = np.random.default_rng(as_seed_sequence(rng_seed))
    values = np.empty(l, dtype=np.int8)
    records: list = [None] * l
    consulted: list = [None] * l
    prefix: list[tuple[int, int]] = []
    for _ in range(l):
        i = policy.action(prefix)
        outcome = eliminate_states(i, prefix, corr, config)
        dist = sharing_distribution(int(row[i]), outcome.eliminated, config)
        cum = np.cumsum(dist.probs)
        u = gen.random()
        y = int(u >= cum[0]) + int(u >= cum[1])
        values[i] = y
        records[i] = (outcome, dist)
        consulted[i] = frozenset(k for k, _ in prefix)
        prefix.append((i, y))
    order = tuple(k for k, _ in prefix)
    info = DependenceInfo(
        horizon=l - 1,
        consulted=tuple(consulted),
        ineliminable=tuple(classify_ineliminable(row, [records[i][0] for i in range(l)])),
    )
    return PerturbedSequence(values=values, order=order, records=tuple(records), info=info)
