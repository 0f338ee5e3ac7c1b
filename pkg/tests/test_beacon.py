"""Presence queries: answers, decision rules, accuracy, per-SNP utility."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import exact_params

from corrldp.beacon import (
    AccuracyReport,
    BeaconAnswer,
    DecisionRule,
    beacon_accuracy,
    beacon_response,
    per_snp_expected_utility,
    rr_beacon_decision,
)
from corrldp.data import GenotypeMatrix
from corrldp.mechanism import SharingMode, sharing_probs

LN2 = math.log(2)


def test_response_definition():
    assert beacon_response([0, 0, 0]) is BeaconAnswer.NO
    assert beacon_response([0, 1, 0]) is BeaconAnswer.YES
    assert beacon_response([2]) is BeaconAnswer.YES
    assert beacon_response([0]) is BeaconAnswer.NO


def test_rr_decision_threshold():
    # at eps = ln 2, p = 1/2, so 100 reports flip at 50 zeros
    col = np.zeros(100, dtype=int)
    col[:51] = 1  # 49 zeros
    assert rr_beacon_decision(col, LN2) is BeaconAnswer.YES
    col[:50] = 1
    col[50:] = 0  # 50 zeros: threshold reached -> No
    assert rr_beacon_decision(col, LN2) is BeaconAnswer.NO
    assert rr_beacon_decision(np.zeros(100, dtype=int), LN2) is BeaconAnswer.NO


def test_rr_decision_extremes():
    # eps = 0: p = 1/3, all-ones column is a Yes regardless
    assert rr_beacon_decision(np.ones(30, dtype=int), 0.0) is BeaconAnswer.YES
    # huge eps: p -> 1, a single non-zero already defeats the threshold
    col = np.zeros(1000, dtype=int)
    col[0] = 2
    assert rr_beacon_decision(col, 20.0) is BeaconAnswer.YES


def test_accuracy_direct_hand_case():
    original = GenotypeMatrix(np.array([[0, 1, 0, 2], [0, 0, 0, 1]]))
    # truth answers: No, Yes, No, Yes
    perturbed = GenotypeMatrix(np.array([[0, 0, 1, 2], [0, 0, 0, 0]]))
    # direct answers: No, No, Yes, Yes -> preserved on SNPs 0 and 3
    report = beacon_accuracy(original, perturbed)
    assert report.overall == pytest.approx(0.5)
    assert report.yes_total == 2 and report.no_total == 2
    assert report.yes_accuracy == pytest.approx(0.5)
    assert report.no_accuracy == pytest.approx(0.5)
    assert report.preserved == 2
    assert report.queries == 4


def test_accuracy_identity_and_empty_class():
    original = GenotypeMatrix(np.array([[1, 2], [0, 1]]))  # both answers Yes
    perturbed = GenotypeMatrix(np.array([[0, 1], [0, 0]]))
    report = beacon_accuracy(original, perturbed)
    assert report.no_total == 0
    assert math.isnan(report.no_accuracy)
    assert report.yes_accuracy == pytest.approx(0.5)
    assert report.overall == pytest.approx(0.5)


def test_accuracy_rr_estimated_rule():
    # 4 individuals, eps = ln 2 -> zero threshold 4 * 0.5 = 2
    original = GenotypeMatrix(np.array([[0, 1], [0, 1], [0, 1], [0, 1]]))
    perturbed = GenotypeMatrix(np.array([[0, 0], [0, 0], [1, 1], [1, 1]]))
    # zeros per column: 2 and 2 -> both No; truth: No, Yes
    report = beacon_accuracy(original, perturbed, DecisionRule.RR_ESTIMATED, epsilon=LN2)
    assert report.no_accuracy == pytest.approx(1.0)
    assert report.yes_accuracy == pytest.approx(0.0)
    assert report.overall == pytest.approx(0.5)
    with pytest.raises(ValueError, match="epsilon"):
        beacon_accuracy(original, perturbed, DecisionRule.RR_ESTIMATED)


def test_accuracy_shape_mismatch():
    a = GenotypeMatrix(np.zeros((2, 3), dtype=int))
    b = GenotypeMatrix(np.zeros((2, 4), dtype=int))
    with pytest.raises(ValueError, match="shape"):
        beacon_accuracy(a, b)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(1, 6),
    st.integers(0, 2**32 - 1),
    st.sampled_from(list(DecisionRule)),
)
def test_accuracy_identity_holds(n, l, seed, rule):
    rng = np.random.default_rng(seed)
    original = GenotypeMatrix(rng.integers(0, 3, size=(n, l)))
    perturbed = GenotypeMatrix(rng.integers(0, 3, size=(n, l)))
    report = beacon_accuracy(original, perturbed, rule, epsilon=1.0)
    total = report.preserved
    recomputed = 0.0
    if report.yes_total:
        recomputed += report.yes_accuracy * report.yes_total
    if report.no_total:
        recomputed += report.no_accuracy * report.no_total
    assert recomputed == pytest.approx(total)
    assert report.overall == pytest.approx(total / l)
    assert 0.0 <= report.overall <= 1.0


def test_per_snp_utility_hand_values():
    # truth 0 with distribution (1/2, 1/4, 1/4): utility 1/2
    assert per_snp_expected_utility(0, (0.5, 0.25, 0.25)) == pytest.approx(0.5)
    # truth 1 with the same distribution: 1/4 + 1/4 = 1/2
    assert per_snp_expected_utility(1, (0.5, 0.25, 0.25)) == pytest.approx(0.5)
    # truth 1 whose class is fully preserved: (0, 2/3, 1/3) -> 1
    assert per_snp_expected_utility(1, (0.0, 2 / 3, 1 / 3)) == pytest.approx(1.0)
    # sole-survivor on the truth: certainty
    assert per_snp_expected_utility(2, (0.0, 0.0, 1.0)) == pytest.approx(1.0)


def test_class_preserving_branch_beats_plain_split():
    # when a non-zero truth is itself eliminated, the class-aware mode puts
    # the pair weight on the other non-zero state (utility p-pair = 2/3 at
    # likelihood ratio 2) while the plain mode splits evenly (utility 1/2)
    params = exact_params(Fraction(2))
    for x in (1, 2):
        probs, _ = sharing_probs(x, {x}, params, SharingMode.BEACON)
        assert per_snp_expected_utility(x, probs) == pytest.approx(2 / 3)
        plain_probs = sharing_probs(x, {x}, params, SharingMode.PLAIN)[0]
        assert per_snp_expected_utility(x, plain_probs) == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.floats(0.0, 6.0), st.sets(st.integers(0, 2), max_size=2))
def test_utility_bounds(x, epsilon, elim):
    from corrldp.rr import rr_params

    probs, _ = sharing_probs(x, elim, rr_params(epsilon), SharingMode.BEACON)
    u = per_snp_expected_utility(x, probs)
    assert 0.0 <= u <= 1.0 + 1e-12
