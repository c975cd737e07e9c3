from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisoncert import (
    Budget,
    CertStatus,
    Certificate,
    VoteMatrix,
    ensemble_predict,
    prediction_changed,
    relative_gap,
    rival_deficit,
    tally_row,
    vote_swing,
)


class TestEnsemblePredict:
    def test_plain_majority(self):
        assert ensemble_predict((2, 1)) == 0

    def test_tie_goes_to_smallest_index(self):
        assert ensemble_predict((2, 2, 1)) == 0
        assert ensemble_predict((0, 3, 3)) == 1

    def test_empty_ensemble_defaults_to_class_zero(self):
        assert ensemble_predict((0, 0, 0)) == 0

    def test_no_classes_rejected(self):
        with pytest.raises(ValueError):
            ensemble_predict(())


class TestPredictionChanged:
    def test_strict_winner_elsewhere(self):
        assert prediction_changed((1, 2), 0) is True

    def test_tie_with_lower_class(self):
        assert prediction_changed((2, 2), 1) is True

    def test_tie_with_higher_class_is_kept(self):
        assert prediction_changed((2, 2), 0) is False


class TestDeficitAndSwing:
    def test_deficit_accounts_for_tie_direction(self):
        counts = (3, 5, 3)
        # class 0 wins ties against class 1, class 2 loses them
        assert rival_deficit(counts, 1, 0) == 2
        assert rival_deficit(counts, 1, 2) == 3
        assert rival_deficit((3, 3), 1, 0) == 0

    def test_swing_values(self):
        assert vote_swing(0, pred=0, rival=1) == 2
        assert vote_swing(1, pred=0, rival=1) == 0
        assert vote_swing(2, pred=0, rival=1) == 1

    @given(
        vote=st.integers(0, 4),
        pred=st.integers(0, 4),
        rival=st.integers(0, 4),
    )
    def test_swing_matches_count_delta(self, vote, pred, rival):
        # reassigning one vote to the rival moves the (pred - rival) count
        # difference by exactly the swing
        counts = [0] * 5
        counts[vote] += 1
        before = counts[pred] - counts[rival]
        counts[vote] -= 1
        counts[rival] += 1
        after = counts[pred] - counts[rival]
        if pred != rival:
            assert before - after == vote_swing(vote, pred, rival)


class TestRelativeGap:
    def test_fraction(self):
        assert relative_gap(3, 2) == pytest.approx(1 / 3)

    def test_equal_counts(self):
        assert relative_gap(5, 5) == 0.0

    def test_zero_over_zero_is_nan(self):
        assert math.isnan(relative_gap(0, 0))

    def test_collective_above_samplewise_rejected(self):
        with pytest.raises(ValueError):
            relative_gap(2, 3)


class TestBudget:
    def test_cap_weights_mutations_double(self):
        assert Budget(r_ins=1, r_del=1, r_mod=1).per_pair_cap() == 4
        assert Budget().per_pair_cap() == 0

    def test_negative_components_rejected(self):
        with pytest.raises(ValueError):
            Budget(r_ins=-1)

    def test_json_dict(self):
        assert Budget(r_mod=2).to_json_dict() == {
            "r_ins": 0,
            "r_del": 0,
            "r_mod": 2,
        }


vote_rows = st.integers(2, 4).flatmap(
    lambda c: st.tuples(
        st.just(c),
        st.lists(
            st.lists(st.integers(0, c - 1), min_size=1, max_size=8).map(tuple),
            min_size=1,
            max_size=6,
        ).filter(lambda rows: len({len(r) for r in rows}) == 1),
    )
)


class TestVoteMatrix:
    def test_from_votes_tallies_and_predicts(self):
        vm = VoteMatrix.from_votes(((0, 0, 1), (1, 1, 0)), num_classes=2)
        assert vm.counts == ((2, 1), (1, 2))
        assert vm.predictions == (0, 1)
        assert vm.num_classifiers == 3
        assert vm.num_samples == 2
        assert tally_row((0, 0, 1), 2) == (2, 1)

    def test_vote_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            VoteMatrix.from_votes(((0, 2),), num_classes=2)

    def test_ragged_rows_rejected(self):
        with pytest.raises(ValueError):
            VoteMatrix.from_votes(((0, 1), (0,)), num_classes=2)

    def test_inconsistent_counts_rejected(self):
        vm = VoteMatrix.from_votes(((0, 1),), num_classes=2)
        with pytest.raises(ValueError):
            VoteMatrix(
                num_classifiers=2,
                num_samples=1,
                num_classes=2,
                votes=vm.votes,
                counts=((2, 0),),
                predictions=vm.predictions,
            )

    def test_restrict_rows_keeps_order(self):
        vm = VoteMatrix.from_votes(((0, 1), (1, 1), (0, 0)), num_classes=2)
        sub = vm.restrict_rows((2, 0))
        assert sub.votes == ((0, 0), (0, 1))
        assert sub.predictions == (0, 0)

    @given(vote_rows)
    def test_counts_sum_to_ensemble_size(self, case):
        c, rows = case
        vm = VoteMatrix.from_votes(tuple(rows), num_classes=c)
        for row_counts in vm.counts:
            assert sum(row_counts) == vm.num_classifiers

    @given(vote_rows)
    def test_predictions_are_stable(self, case):
        c, rows = case
        vm = VoteMatrix.from_votes(tuple(rows), num_classes=c)
        for t in range(vm.num_samples):
            pred = vm.predictions[t]
            assert pred == ensemble_predict(vm.counts[t])
            assert not prediction_changed(vm.counts[t], pred)


class TestCertificate:
    def _mk(self, **overrides):
        fields = dict(
            collective_robustness_lb=1,
            attacked_ub=2,
            attacked_incumbent=2,
            certified_accuracy=None,
            status=CertStatus.EXACT,
            solve_seconds=0.01,
            budget=Budget(r_mod=1),
            omega_size=3,
        )
        fields.update(overrides)
        return Certificate(**fields)

    def test_incumbent_above_bound_rejected(self):
        with pytest.raises(ValueError):
            self._mk(attacked_incumbent=3)

    def test_exact_requires_matching_bounds(self):
        with pytest.raises(ValueError):
            self._mk(attacked_incumbent=1)
        self._mk(
            attacked_incumbent=1, status=CertStatus.TIME_LIMIT_BOUND
        )

    def test_json_dict_reports_bound_gap(self):
        cert = self._mk(
            attacked_incumbent=1, status=CertStatus.TIME_LIMIT_BOUND
        )
        payload = cert.to_json_dict()
        assert payload["bound_gap"] == 1
        assert payload["status"] == "TimeLimitBound"
        assert payload["budget"] == {"r_ins": 0, "r_del": 0, "r_mod": 1}
