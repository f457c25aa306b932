"""
Unit tests for the stable-but-not-priceable search
"""

import os
import sys
import unittest
from fractions import Fraction
from unittest import mock

from elections.candidate_sets import CandidateSet
from elections.core_oracle import Quota, is_stable
from elections.distributions import VoteDistribution
from errors import ParameterError
from programs import (
    KNOWN_WITNESSES,
    CounterexampleStatus,
    PriceKind,
    build_linqip,
    search_counterexample,
    verify_infeasibility_certificate
)
from programs.counterexamples import (
    candidate_witnesses,
    confirm_counterexample,
    fixed_committee,
    is_counterexample_value
)
from solvers import BackendConfig, SolveResult, SolveStatus, available_backends

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

CFG = BackendConfig(solver="highs", tolerance=1e-6)
HAS_GUROBI = available_backends().get("gurobi", False)


class TestWitnesses(unittest.TestCase):
    """Test the recorded witnesses exactly"""

    def test_witnesses_are_stable(self):
        """Test that every recorded witness keeps W* stable under its quota"""
        droop, hare, lindahl = KNOWN_WITNESSES
        self.assertTrue(is_stable(droop.lift(5), fixed_committee(5, 3), 3, Quota.DROOP))
        self.assertTrue(is_stable(hare.lift(5), fixed_committee(5, 3), 3, Quota.HARE))
        self.assertFalse(is_stable(hare.lift(5), fixed_committee(5, 3), 3, Quota.DROOP))
        self.assertTrue(is_stable(lindahl.lift(4), fixed_committee(4, 2), 2, Quota.DROOP))

    def test_lift_adds_unapproved_candidates(self):
        """Test that lifting adds candidates nobody approves"""
        x = KNOWN_WITNESSES[2].lift(6)
        self.assertEqual(x.m, 6)
        self.assertEqual(x.approval_mass(5), 0)
        with self.assertRaises(ParameterError):
            KNOWN_WITNESSES[0].lift(4)

    def test_candidate_pool(self):
        """Test which witnesses fit a given m, k and kind"""
        self.assertEqual(len(candidate_witnesses(5, 3, PriceKind.WEAK)), 2)
        self.assertEqual(len(candidate_witnesses(4, 3, PriceKind.WEAK)), 0)
        self.assertEqual(len(candidate_witnesses(6, 2, PriceKind.LINDAHL)), 1)

    def test_confirm(self):
        """Test exact confirmation of the Droop weak witness"""
        confirmed, cert, excess = confirm_counterexample(KNOWN_WITNESSES[0].lift(5), 3, Quota.DROOP,
                                                         PriceKind.WEAK, CFG)
        self.assertTrue(confirmed)
        self.assertEqual(excess, 0)
        self.assertTrue(verify_infeasibility_certificate(cert))

    def test_priceable_distribution_does_not_confirm(self):
        """Test that a priceable distribution is not confirmed"""
        x = VoteDistribution.concentrated(CandidateSet.from_indices([0, 1, 2], 5))
        confirmed, cert, _ = confirm_counterexample(x, 3, Quota.HARE, PriceKind.WEAK, CFG)
        self.assertFalse(confirmed)
        self.assertIsNone(cert)


class TestBuildLinqip(unittest.TestCase):
    """Test the bilinear program shape"""

    def test_sizes(self):
        """Test variable counts of the bilinear program for m=3, k=1"""
        model = build_linqip(3, 1)
        # 8 ballots, mu, three t and eight weak affordability pairs
        self.assertEqual(len(model.variables), 8 + 1 + 3 + 8)
        self.assertTrue(model.has_bilinear)
        self.assertEqual(model.summary()["bilinear_rows"], 11)
        self.assertEqual(model.binary_count, 0)

    def test_peters_not_supported(self):
        """Test that Peters priceability has no bilinear program"""
        with self.assertRaises(ParameterError):
            build_linqip(3, 1, kind=PriceKind.PETERS)

    def test_threshold(self):
        """Test the strict Hare and weak Droop thresholds"""
        self.assertTrue(is_counterexample_value(-0.1, Quota.HARE, 1e-6))
        self.assertFalse(is_counterexample_value(0.0, Quota.HARE, 1e-6))
        self.assertTrue(is_counterexample_value(0.0, Quota.DROOP, 1e-6))
        self.assertFalse(is_counterexample_value(0.1, Quota.DROOP, 1e-6))


class TestSearch(unittest.TestCase):
    """Test the search through an LP-only backend"""

    def test_droop_weak_found(self):
        """Test finding the Droop weak witness through the candidate pool"""
        result = search_counterexample(5, 3, Quota.DROOP, PriceKind.WEAK, CFG)
        self.assertIs(result.status, CounterexampleStatus.FOUND)
        self.assertEqual(result.method, "candidates")
        self.assertEqual(result.checked, 1)
        self.assertEqual(result.excess, 0)
        self.assertTrue(verify_infeasibility_certificate(result.certificate))

    def test_hare_weak_found(self):
        """Test finding a Hare weak counterexample"""
        result = search_counterexample(5, 3, Quota.HARE, PriceKind.WEAK, CFG)
        self.assertIs(result.status, CounterexampleStatus.FOUND)
        self.assertLessEqual(result.excess, 0)

    def test_droop_lindahl_found(self):
        """Test finding the Droop Lindahl witness for k=2"""
        result = search_counterexample(4, 2, Quota.DROOP, PriceKind.LINDAHL, CFG)
        self.assertIs(result.status, CounterexampleStatus.FOUND)
        self.assertEqual(result.to_dict()["committee"], [0, 1])

    def test_explicit_candidates(self):
        """Test that user candidates replace the recorded witnesses"""
        x = VoteDistribution.concentrated(CandidateSet.from_indices([0, 1, 2], 5))
        result = search_counterexample(5, 3, Quota.HARE, PriceKind.WEAK, CFG, candidates=[x])
        self.assertIsNot(result.status, CounterexampleStatus.FOUND)
        self.assertEqual(result.checked, 1)

    def test_candidates_must_match(self):
        """Test that a candidate over the wrong m is rejected"""
        x = VoteDistribution.from_indices(4, [([0], Fraction(1))])
        with self.assertRaises(ParameterError):
            search_counterexample(5, 3, Quota.HARE, PriceKind.WEAK, CFG, candidates=[x])

    @unittest.skipUnless(HAS_GUROBI, "gurobipy is not installed")
    def test_global_search(self):
        """Test that the bilinear backend never reports absence for the Lindahl witness size"""
        result = search_counterexample(4, 2, Quota.DROOP, PriceKind.LINDAHL,
                                       BackendConfig(solver="gurobi", tolerance=1e-6))
        self.assertEqual(result.method, "global")
        self.assertIsNot(result.status, CounterexampleStatus.ABSENT)


class TestGlobalDecision(unittest.TestCase):
    """Test how a bilinear solve's incumbent and bound decide the status"""

    def decide(self, objective, bound, quota=Quota.HARE, status=SolveStatus.OPTIMAL):
        solved = SolveResult(status, objective=objective, bound=bound, values={"x_0": 1.0}, backend="gurobi")
        with mock.patch("programs.counterexamples.supports_bilinear", return_value=True), \
                mock.patch("programs.counterexamples.solve", return_value=solved):
            return search_counterexample(4, 2, quota, PriceKind.WEAK, BackendConfig(solver="gurobi", tolerance=1e-6))

    def test_bound_past_threshold_is_not_absence(self):
        """An incumbent above 0 with a bound below it stays undecided"""
        result = self.decide(0.05, -0.02)
        self.assertIs(result.status, CounterexampleStatus.UNDECIDED)
        self.assertEqual(result.method, "global")
        self.assertEqual(result.lower_bound, -0.02)
        self.assertIn("straddle", result.message)

    def test_bound_short_of_threshold_proves_absence(self):
        """A best bound above 0 rules out Hare counterexamples"""
        result = self.decide(0.05, 0.01)
        self.assertIs(result.status, CounterexampleStatus.ABSENT)
        self.assertIn("best bound", result.message)

    def test_droop_bound_at_zero_is_not_absence(self):
        """Droop counts a value of 0 as a counterexample, so a bound of 0 decides nothing"""
        result = self.decide(0.05, 0.0, quota=Quota.DROOP)
        self.assertIs(result.status, CounterexampleStatus.UNDECIDED)

    def test_time_limit_without_bound(self):
        """A time-limited solve with no bound stays undecided"""
        result = self.decide(0.05, None, status=SolveStatus.TIME_LIMIT)
        self.assertIs(result.status, CounterexampleStatus.UNDECIDED)
        self.assertIn("without a bound", result.message)


if __name__ == "__main__":
    unittest.main()
