"""
Unit tests for distributions, deviation functions and rationals
"""

import os
import sys
import unittest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from elections.candidate_sets import CandidateSet, CommitteeSpace
from elections.deviation_functions import DeviationFunction
from elections.distributions import (
    ApprovalProfile,
    VoteDistribution,
    distribution_to_profile,
    profile_to_distribution,
    replicate_profile
)
from elections.random_instances import make_rng, random_deviation_function, random_distribution
from elections.rationals import (
    format_fraction,
    fraction_from_pair,
    fraction_to_pair,
    rationalize,
    rationalize_weights
)
from errors import ParameterError

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestVoteDistribution(unittest.TestCase):
    """Test validation and serialization of vote distributions"""

    def test_weights_must_sum_to_one(self):
        """Test that weights not summing to 1 are rejected"""
        with self.assertRaises(ParameterError):
            VoteDistribution.from_indices(3, [([0], Fraction(1, 2))])

    def test_negative_weight_rejected(self):
        """Test that a negative weight is rejected even when the sum is 1"""
        with self.assertRaises(ParameterError):
            VoteDistribution.from_indices(3, [([0], Fraction(3, 2)), ([1], Fraction(-1, 2))])

    def test_repeated_ballots_add_up(self):
        """Test that repeated ballots merge into one weight"""
        x = VoteDistribution.from_indices(3, [([0], Fraction(1, 4)), ([0], Fraction(1, 4)), ([1], Fraction(1, 2))])
        self.assertEqual(x.weight(CandidateSet.from_indices([0], 3)), Fraction(1, 2))
        self.assertEqual(len(x), 2)

    def test_zero_weights_dropped(self):
        """Test that zero-weight ballots are not stored"""
        x = VoteDistribution.from_indices(3, [([0], Fraction(1)), ([1], Fraction(0))])
        self.assertEqual(len(x), 1)

    def test_approval_mass(self):
        """Test the total weight approving each candidate"""
        x = VoteDistribution.from_indices(3, [([0, 1], Fraction(1, 3)), ([1], Fraction(2, 3))])
        self.assertEqual(x.approval_mass(1), 1)
        self.assertEqual(x.approval_mass(0), Fraction(1, 3))
        self.assertEqual(x.approval_mass(2), 0)

    def test_json_uses_string_rationals(self):
        """Test that weights are written as string numerator and denominator"""
        x = VoteDistribution.from_indices(3, [([0, 2], Fraction(1, 3)), ([1], Fraction(2, 3))])
        data = x.to_dict()
        self.assertEqual(data["m"], 3)
        self.assertIn({"ballot": [0, 2], "num": "1", "den": "3"}, data["weights"])
        self.assertEqual(VoteDistribution.from_dict(data), x)

    def test_from_dict_rejects_duplicates(self):
        """Test that a file listing a ballot twice is rejected"""
        data = {"m": 2, "weights": [{"ballot": [0], "num": "1", "den": "2"},
                                    {"ballot": [0], "num": "1", "den": "2"}]}
        with self.assertRaises(ParameterError):
            VoteDistribution.from_dict(data)

    def test_from_dict_rejects_missing_keys(self):
        """Test that a file without m is rejected"""
        with self.assertRaises(ParameterError):
            VoteDistribution.from_dict({"weights": []})


class TestProfiles(unittest.TestCase):
    """Test profile and distribution conversion"""

    def test_profile_to_distribution(self):
        """Test converting a five-voter profile to weights"""
        profile = ApprovalProfile.from_indices(3, [[0], [1, 2], [1, 2], [1, 2], [1, 2]])
        x = profile_to_distribution(profile)
        self.assertEqual(x.weight(CandidateSet.from_indices([0], 3)), Fraction(1, 5))
        self.assertEqual(x.weight(CandidateSet.from_indices([1, 2], 3)), Fraction(4, 5))

    def test_smallest_profile(self):
        """Test that the smallest profile uses the common denominator of the weights"""
        x = VoteDistribution.from_indices(4, [([2, 3], Fraction(1, 3)), ([0, 2, 3], Fraction(2, 3))])
        profile = distribution_to_profile(x)
        self.assertEqual(profile.n, 3)
        self.assertEqual(profile_to_distribution(profile), x)

    def test_empty_profile_rejected(self):
        """Test that a profile without voters is rejected"""
        with self.assertRaises(ParameterError):
            profile_to_distribution(ApprovalProfile(3, []))

    def test_replication_keeps_distribution(self):
        """Test that copying every voter leaves the distribution unchanged"""
        profile = ApprovalProfile.from_indices(3, [[0], [1, 2]])
        self.assertEqual(profile_to_distribution(replicate_profile(profile, 4)), profile_to_distribution(profile))

    def test_replication_needs_positive_copies(self):
        """Test that zero copies are rejected"""
        with self.assertRaises(ParameterError):
            replicate_profile(ApprovalProfile.from_indices(2, [[0]]), 0)


class TestDeviationFunction(unittest.TestCase):
    """Test deviation function validation"""

    def setUp(self):
        self.space = CommitteeSpace(3, 2)

    def _singletons(self):
        return {w: CandidateSet.from_indices([(set(range(3)) - set(w.indices)).pop()], 3)
                for w in self.space.committees}

    def test_total_function(self):
        """Test lookups on an all-singleton deviation function"""
        d = DeviationFunction(self.space, self._singletons())
        self.assertEqual(d.by_id(0), CandidateSet.from_indices([2], 3))
        self.assertEqual(d.non_singletons(), {})
        self.assertIsNone(d.singleton_exception())

    def test_partial_function_rejected(self):
        """Test that a committee without a deviation is rejected"""
        mapping = self._singletons()
        mapping.pop(self.space.committees[0])
        with self.assertRaises(ParameterError):
            DeviationFunction(self.space, mapping)

    def test_oversized_deviation_rejected(self):
        """Test that a deviation larger than k is rejected"""
        mapping = self._singletons()
        mapping[self.space.committees[0]] = CandidateSet.full(3)
        with self.assertRaises(ParameterError):
            DeviationFunction(self.space, mapping)

    def test_single_exception(self):
        """Test locating the one non-singleton deviation"""
        mapping = self._singletons()
        exception = self.space.committees[1]
        mapping[exception] = CandidateSet.from_indices([0, 1], 3)
        self.assertEqual(DeviationFunction(self.space, mapping).singleton_exception(), exception)

    def test_two_exceptions_rejected(self):
        """Test that two non-singleton deviations have no single exception"""
        mapping = self._singletons()
        for w in self.space.committees[:2]:
            mapping[w] = CandidateSet.from_indices([0, 1], 3)
        with self.assertRaises(ParameterError):
            DeviationFunction(self.space, mapping).singleton_exception()

    def test_json(self):
        """Test that a random deviation function survives the JSON form"""
        d = random_deviation_function(CommitteeSpace(5, 2), make_rng(3))
        self.assertEqual(DeviationFunction.from_dict(d.to_dict()), d)

    def test_from_dict_rejects_repeated_committee(self):
        """Test that a file listing a committee twice is rejected"""
        data = {"m": 3, "k": 2, "deviations": [{"committee": [0, 1], "deviation": [2]},
                                               {"committee": [0, 1], "deviation": [2]}]}
        with self.assertRaises(ParameterError):
            DeviationFunction.from_dict(data)


class TestRationals(unittest.TestCase):
    """Test rational helpers"""

    def test_pairs(self):
        """Test string pairs for fractions, including a zero denominator"""
        self.assertEqual(fraction_to_pair(Fraction(-1, 42)), ["-1", "42"])
        self.assertEqual(fraction_from_pair(["2", "4"]), Fraction(1, 2))
        with self.assertRaises(ParameterError):
            fraction_from_pair(["1", "0"])

    def test_format(self):
        """Test display of negative and zero fractions"""
        self.assertEqual(format_fraction(Fraction(-1, 6)), "-1/6")
        self.assertEqual(format_fraction(Fraction(0)), "0")

    def test_rationalize(self):
        """Test rounding a float to the nearest small fraction"""
        self.assertEqual(rationalize(0.3333333333, 1000), Fraction(1, 3))

    def test_rationalize_weights_normalizes(self):
        """Test that rounded weights are clipped and renormalized to sum 1"""
        weights = rationalize_weights({"a": 0.3333334, "b": 0.6666667, "c": -1e-9}, 1000, 1e-6)
        self.assertEqual(weights, {"a": Fraction(1, 3), "b": Fraction(2, 3)})

    def test_rationalize_weights_rejects_negative(self):
        """Test that a clearly negative weight is rejected"""
        with self.assertRaises(ParameterError):
            rationalize_weights({"a": 1.5, "b": -0.5}, 1000, 1e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=10_000))
    def test_random_distributions_are_valid(self, m, seed):
        """Test that random distributions sum to 1 with small denominators and no empty ballot"""
        x = random_distribution(m, make_rng(seed))
        self.assertEqual(sum(w for _, w in x.items()), 1)
        self.assertTrue(all(w.denominator <= 6 for _, w in x.items()))
        self.assertTrue(all(ballot for ballot, _ in x.items()))


if __name__ == "__main__":
    unittest.main()
