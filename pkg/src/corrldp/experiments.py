"""Seeded comparison harness for the sharing mechanisms.

For every budget in a grid and every trial, one dataset is produced (or
loaded), correlations are estimated from it, and both sharing schemes run
against the same attacker:

* estimation error of plain randomized response with no attack, with the
  correlation attack, and of the correlation-aware mechanism under the
  attack (higher = more privacy kept);
* beacon accuracy of randomized response under the count-compensating
  decision rule, of the correlation-aware mechanism under the direct rule,
  and (optionally) of randomized response repaired by consistency
  post-processing (higher = more utility kept).

Randomness fans out from the master seed through fixed spawn keys —
(trial, 0) for data, and (trial, purpose, round(eps * 1e6)) with purpose
1/2/3 for ordering, randomized-response noise, and mechanism noise — so
adding trials or grid points never changes existing rows, and rows are
emitted in (grid index, trial) order no matter how many workers ran.

Results are plain CSV: a detail file with one row per (epsilon, trial) and
a summary file with per-epsilon means and standard errors.  Every cell is
populated; undefined values (an empty beacon class, a standard error over
one trial) are written as ``nan``.
"""

from __future__ import annotations

import csv
import enum
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .attack import (
    AttackConfig,
    attack,
    attack_population,
    estimation_error,
    population_estimation_error,
    rr_belief_population,
    rr_postprocess_population,
)
from .beacon import AccuracyReport, DecisionRule, beacon_accuracy
from .data import (
    GenotypeMatrix,
    SyntheticSpec,
    compute_correlation_model,
    generate_synthetic_population,
    load_genotype_matrix,
)
from .mechanism import MechanismConfig, SharingMode, perturb_population
from .ordering import (
    greedy_share,
    optimal_order_value_iteration,
    perturb_with_policy,
    random_order,
)
from .rr import rr_perturb


class OrderStrategy(enum.Enum):
    RANDOM = "random"
    GREEDY = "greedy"
    OPTIMAL = "optimal"


_DATA_PURPOSE = 0
_ORDER_PURPOSE = 1
_RR_PURPOSE = 2
_MECH_PURPOSE = 3


def _eps_key(epsilon: float) -> int:
    return int(round(epsilon * 1e6))


def _sub_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(key))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run depends on; fully determines its output."""

    epsilon_grid: tuple[float, ...]
    trials: int
    seed: int
    synthetic: SyntheticSpec | None = None
    dataset_path: str | None = None
    tau_hat: float = 0.2
    gamma_hat: float = 0.5
    mode: SharingMode = SharingMode.BEACON
    tau: float = 0.2
    gamma: float = 0.5
    attacker_knows_mechanism: bool = False
    order_strategy: OrderStrategy = OrderStrategy.RANDOM
    include_postprocess: bool = True
    pseudo_count: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        if not self.epsilon_grid:
            raise ValueError("epsilon grid must be nonempty")
        for eps in self.epsilon_grid:
            if not math.isfinite(eps) or eps < 0:
                raise ValueError(f"grid epsilons must be finite and >= 0, got {eps}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if (self.synthetic is None) == (self.dataset_path is None):
            raise ValueError("exactly one of synthetic spec or dataset path is required")
        if not isinstance(self.order_strategy, OrderStrategy):
            raise ValueError(f"order_strategy must be an OrderStrategy, got {self.order_strategy!r}")
        if self.pseudo_count < 0:
            raise ValueError(f"pseudo_count must be >= 0, got {self.pseudo_count}")
        # range checks for thresholds/mode live in the component configs
        MechanismConfig(
            epsilon=self.epsilon_grid[0],
            tau_hat=self.tau_hat,
            gamma_hat=self.gamma_hat,
            mode=self.mode,
        )
        AttackConfig(epsilon_known=self.epsilon_grid[0], tau=self.tau, gamma=self.gamma)

    def metric_names(self) -> tuple[str, ...]:
        names = [
            "e_rr",
            "e_rr_attack",
            "e_prop_attack",
            "a_rr",
            "a_rr_yes",
            "a_rr_no",
            "a_prop",
            "a_prop_yes",
            "a_prop_no",
        ]
        if self.include_postprocess:
            names += ["a_rr_post", "a_rr_post_yes", "a_rr_post_no"]
        return tuple(names)


@dataclass(frozen=True)
class TrialResult:
    epsilon: float
    trial: int
    metrics: dict[str, float]


def _load_data(config: ExperimentConfig, trial: int) -> GenotypeMatrix:
    if config.dataset_path is not None:
        return load_genotype_matrix(config.dataset_path)
    return generate_synthetic_population(
        config.synthetic, _sub_seed(config.seed, trial, _DATA_PURPOSE)
    )


def _accuracy_metrics(prefix: str, report: AccuracyReport) -> dict[str, float]:
    return {
        prefix: report.overall,
        f"{prefix}_yes": report.yes_accuracy,
        f"{prefix}_no": report.no_accuracy,
    }


def _perturb_proposed(
    config: ExperimentConfig,
    matrix: GenotypeMatrix,
    corr,
    mech_config: MechanismConfig,
    epsilon: float,
    trial: int,
) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Share the whole population with the configured ordering strategy.

    Returns the reported matrix and each row's processing order.
    """
    ek = _eps_key(epsilon)
    mech_seed = _sub_seed(config.seed, trial, _MECH_PURPOSE, ek)
    if config.order_strategy is OrderStrategy.RANDOM:
        order = random_order(matrix.l, _sub_seed(config.seed, trial, _ORDER_PURPOSE, ek))
        share = perturb_population(matrix, order, corr, mech_config, mech_seed)
        return share.values, [order] * matrix.n

    children = mech_seed.spawn(matrix.n)
    values = np.empty((matrix.n, matrix.l), dtype=np.int8)
    orders: list[tuple[int, ...]] = []
    try:
        for j in range(matrix.n):
            if config.order_strategy is OrderStrategy.GREEDY:
                order, seq = greedy_share(matrix.row(j), corr, mech_config, children[j])
            else:
                policy, _ = optimal_order_value_iteration(matrix.row(j), corr, mech_config)
                seq = perturb_with_policy(matrix.row(j), policy, corr, mech_config, children[j])
                order = seq.order
            values[j] = seq.values
            orders.append(tuple(order))
    except ValueError as exc:
        if "supports at most" in str(exc):
            raise ValueError(
                f"{exc}; switch the ordering strategy to random or greedy for this size"
            ) from exc
        raise
    return values, orders


def run_single_trial(config: ExperimentConfig, epsilon: float, trial: int) -> TrialResult:
    """One (epsilon, trial) cell: all configured metrics on one dataset."""
    matrix = _load_data(config, trial)
    corr = compute_correlation_model(matrix, config.pseudo_count)
    ek = _eps_key(epsilon)
    mech_config = MechanismConfig(
        epsilon=epsilon, tau_hat=config.tau_hat, gamma_hat=config.gamma_hat, mode=config.mode
    )
    # the replay augmentation only makes sense against mechanism output, so
    # the plain randomized-response arm is always attacked without it
    attack_rr = AttackConfig(epsilon_known=epsilon, tau=config.tau, gamma=config.gamma)
    attack_prop = AttackConfig(
        epsilon_known=epsilon,
        tau=config.tau,
        gamma=config.gamma,
        mechanism_params_known=(
            (config.tau_hat, config.gamma_hat) if config.attacker_knows_mechanism else None
        ),
    )

    rr_matrix = rr_perturb(matrix, epsilon, _sub_seed(config.seed, trial, _RR_PURPOSE, ek))
    Y_rr = rr_matrix.values
    prop_values, prop_orders = _perturb_proposed(
        config, matrix, corr, mech_config, epsilon, trial
    )

    metrics: dict[str, float] = {}
    metrics["e_rr"] = population_estimation_error(
        rr_belief_population(Y_rr, epsilon), matrix.values
    )
    metrics["e_rr_attack"] = population_estimation_error(
        attack_population(Y_rr, corr, attack_rr), matrix.values
    )
    if attack_prop.mechanism_params_known is not None and len(set(prop_orders)) > 1:
        errors = [
            estimation_error(
                attack(prop_values[j], corr, attack_prop, assumed_order=prop_orders[j]).probs,
                matrix.row(j),
            )
            for j in range(matrix.n)
        ]
        metrics["e_prop_attack"] = float(np.mean(errors))
    else:
        assumed = prop_orders[0] if attack_prop.mechanism_params_known is not None else None
        metrics["e_prop_attack"] = population_estimation_error(
            attack_population(prop_values, corr, attack_prop, assumed_order=assumed),
            matrix.values,
        )

    metrics.update(
        _accuracy_metrics(
            "a_rr",
            beacon_accuracy(matrix, rr_matrix, DecisionRule.RR_ESTIMATED, epsilon=epsilon),
        )
    )
    metrics.update(
        _accuracy_metrics(
            "a_prop",
            beacon_accuracy(matrix, GenotypeMatrix(prop_values), DecisionRule.DIRECT),
        )
    )
    if config.include_postprocess:
        repaired = rr_postprocess_population(Y_rr, corr, config.tau, config.gamma)
        metrics.update(
            _accuracy_metrics(
                "a_rr_post",
                beacon_accuracy(
                    matrix, GenotypeMatrix(repaired), DecisionRule.RR_ESTIMATED, epsilon=epsilon
                ),
            )
        )
    return TrialResult(epsilon=epsilon, trial=trial, metrics=metrics)


def _trial_task(args: tuple[ExperimentConfig, float, int]) -> TrialResult:
    return run_single_trial(*args)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    results: tuple[TrialResult, ...]

    def detail_table(self) -> tuple[list[str], list[list[str]]]:
        header = ["epsilon", "trial", *self.config.metric_names()]
        rows = [
            [_fmt(r.epsilon), str(r.trial), *(_fmt(r.metrics[m]) for m in self.config.metric_names())]
            for r in self.results
        ]
        return header, rows

    def summary_table(self) -> tuple[list[str], list[list[str]]]:
        names = self.config.metric_names()
        header = ["epsilon", "trials"]
        for m in names:
            header += [f"mean_{m}", f"se_{m}"]
        rows = []
        for eps in self.config.epsilon_grid:
            group = [r for r in self.results if r.epsilon == eps]
            row = [_fmt(eps), str(len(group))]
            for m in names:
                vals = [r.metrics[m] for r in group if not math.isnan(r.metrics[m])]
                mean = statistics.fmean(vals) if vals else math.nan
                se = statistics.stdev(vals) / math.sqrt(len(vals)) if len(vals) >= 2 else math.nan
                row += [_fmt(mean), _fmt(se)]
            rows.append(row)
        return header, rows

    def mean_metric(self, name: str, epsilon: float) -> float:
        vals = [
            r.metrics[name]
            for r in self.results
            if r.epsilon == epsilon and not math.isnan(r.metrics[name])
        ]
        return statistics.fmean(vals) if vals else math.nan


def _fmt(x: float) -> str:
    return repr(float(x))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run the full grid; rows come back in (grid order, trial) order."""
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    tasks = [
        (config, eps, trial) for eps in config.epsilon_grid for trial in range(config.trials)
    ]
    if jobs == 1:
        results = [_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_task, tasks))
    return ExperimentResult(config=config, results=tuple(results))


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_results(result: ExperimentResult, out_dir) -> tuple[Path, Path]:
    """Write detail.csv and summary.csv under out_dir; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    detail_path = out / "detail.csv"
    summary_path = out / "summary.csv"
    header, rows = result.detail_table()
    _write_csv(detail_path, header, rows)
    header, rows = result.summary_table()
    _write_csv(summary_path, header, rows)
    return detail_path, summary_path
