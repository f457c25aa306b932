"""
Unit tests for the per-deviation dual and its certificates
"""

import os
import sys
import unittest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from elections.candidate_sets import CandidateSet, CommitteeSpace
from elections.core_oracle import Quota, check_stable_lottery
from elections.deviation_functions import DeviationFunction
from elections.random_instances import make_rng, random_deviation_function
from errors import CertificateViolation, ParameterError
from programs import (
    DualCertificate,
    build_dlp,
    build_fixed_deviation_lp,
    certificate_kplusone,
    certificate_singleton,
    lower_bound_assignment,
    solve_dlp,
    tighten_certificate,
    verify_certificate
)
from programs.duality import ballot_loads, certificate_objective
from solvers import BackendConfig, SolveStatus, solve

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

CFG = BackendConfig(solver="highs", tolerance=1e-6)


def cs(indices, m=4):
    return CandidateSet.from_indices(indices, m)


def smallest_outside(m, k):
    """Every committee deviates to its smallest missing candidate"""
    space = CommitteeSpace(m, k)
    mapping = {w: cs([min(set(range(m)) - set(w.indices))], m) for w in space.committees}
    return DeviationFunction(space, mapping)


def with_exception(d, committee, deviation):
    mapping = dict(d.items())
    mapping[committee] = deviation
    return DeviationFunction(d.space, mapping)


class TestBuildDlp(unittest.TestCase):
    """Test the dual program shape and optimum"""

    def test_sizes(self):
        """Test variable and row counts of the dual for m=4, k=2"""
        model = build_dlp(4, 2, smallest_outside(4, 2))
        self.assertEqual(len(model.variables), 6 + 1)
        self.assertEqual(len(model.constraints), 1 + 16)
        self.assertEqual(model.binary_count, 0)

    def test_rejects_mismatched_deviations(self):
        """Test that a deviation function for another m is rejected"""
        with self.assertRaises(ParameterError):
            build_dlp(5, 2, smallest_outside(4, 2))

    def test_optimum_matches_fixed_deviation_value(self):
        """Test that the lower-bound deviations give -1/6 for (4,2)"""
        lba = lower_bound_assignment(4, 2)
        result = solve_dlp(4, 2, lba.deviations, Quota.HARE, CFG)
        self.assertIs(result.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(result.objective, -1 / 6, places=6)

    def test_counts_m3_k1(self):
        """Test one lottery variable per committee and one row per ballot for (3,1)"""
        space = CommitteeSpace(3, 1)
        d = DeviationFunction(space, {w: cs([(w.indices[0] + 1) % 3], 3) for w in space.committees})
        model = build_dlp(3, 1, d)
        self.assertEqual(len([v for v in model.variables if v.name.startswith("q_")]), 3)
        self.assertEqual(len([r for r in model.constraints if r.name.startswith("ballot_")]), 8)

    def test_strong_duality(self):
        """Test that the fixed-deviation program and the dual agree on random deviations"""
        for m, k in [(4, 2), (5, 3)]:
            rng = make_rng(m * 100 + k)
            for _ in range(20):
                d = random_deviation_function(CommitteeSpace(m, k), rng)
                primal = solve(build_fixed_deviation_lp(m, k, d), CFG)
                dual = solve_dlp(m, k, d, Quota.HARE, CFG)
                self.assertAlmostEqual(primal.objective, dual.objective, places=6)

    def test_superset_deviation_never_improves(self):
        """Growing one singleton deviation never lifts the optimum above the singleton bound"""
        for m, k in [(4, 2), (5, 2), (5, 3)]:
            rng = make_rng(m * 10 + k)
            space = CommitteeSpace(m, k)
            for _ in range(10):
                d = random_deviation_function(space, rng, singleton_conforming=True, exception_size=1)
                committee = rng.choice(space.committees)
                others = [c for c in range(m) if c not in d[committee].indices]
                extra = rng.sample(others, rng.randint(1, k - 1))
                grown = with_exception(d, committee, cs(list(d[committee].indices) + extra, m))
                self.assertGreater(len(grown[committee]), 1)
                for quota, bound in ((Quota.HARE, -1 / (k * (k + 1))), (Quota.DROOP, 0.0)):
                    base = solve_dlp(m, k, d, quota, CFG)
                    swapped = solve_dlp(m, k, grown, quota, CFG)
                    self.assertLessEqual(base.objective, bound + 1e-6)
                    self.assertLessEqual(swapped.objective, bound + 1e-6)

    def test_optimum_below_any_certificate(self):
        """Test that the dual optimum is at most any verified certificate"""
        d = smallest_outside(5, 2)
        for quota in Quota:
            cert = certificate_singleton(5, 2, d, quota)
            bound = verify_certificate(cert, d, 5, 2, quota)
            result = solve_dlp(5, 2, d, quota, CFG)
            self.assertLessEqual(result.objective, float(bound) + 1e-6)


class TestSingletonCertificate(unittest.TestCase):
    """Test the chain construction for singleton deviations"""

    def test_all_singletons(self):
        """Test the chain certificate for all-singleton deviations with k=2"""
        d = smallest_outside(4, 2)
        cert = certificate_singleton(4, 2, d)
        self.assertEqual(cert.construction, "singleton-chain")
        self.assertEqual(cert.u, Fraction(1, 3))
        self.assertEqual(sum(cert.q.values()), 1)
        self.assertEqual(verify_certificate(cert, d, 4, 2), Fraction(-1, 6))
        self.assertEqual(verify_certificate(cert, d, 4, 2, Quota.DROOP), 0)

    def test_one_larger_deviation(self):
        """Test the shorter chain when one deviation has two members"""
        d = with_exception(smallest_outside(4, 2), cs([0, 1]), cs([2, 3]))
        cert = certificate_singleton(4, 2, d)
        self.assertEqual(cert.u, Fraction(1, 2))
        self.assertEqual(verify_certificate(cert, d, 4, 2), Fraction(-1, 4))

    def test_full_size_exception(self):
        """Test a chain of length 2 when the exception has k members"""
        d = smallest_outside(5, 3)
        d = with_exception(d, cs([0, 1, 2], 5), cs([1, 3, 4], 5))
        cert = certificate_singleton(5, 3, d)
        self.assertEqual(cert.u, Fraction(1, 2))
        self.assertEqual(verify_certificate(cert, d, 5, 3), Fraction(-1, 6))

    def test_all_singletons_m5_k3(self):
        """Test the chain value -1/12 for all-singleton deviations with k=3"""
        d = smallest_outside(5, 3)
        self.assertEqual(verify_certificate(certificate_singleton(5, 3, d), d, 5, 3), Fraction(-1, 12))

    def test_negative_objective_gives_stable_lottery(self):
        """Test that a negative certificate gives a stable lottery"""
        rng = make_rng(5)
        space = CommitteeSpace(5, 2)
        for _ in range(10):
            d = random_deviation_function(space, rng, singleton_conforming=True)
            cert = certificate_singleton(5, 2, d)
            self.assertLess(verify_certificate(cert, d, 5, 2), 0)
            self.assertTrue(check_stable_lottery(cert.q, d, 2).holds)

    def test_two_larger_deviations_rejected(self):
        """Test that two non-singleton deviations are refused"""
        d = with_exception(smallest_outside(4, 2), cs([0, 1]), cs([2, 3]))
        d = with_exception(d, cs([0, 2]), cs([1, 3]))
        with self.assertRaises(ParameterError):
            certificate_singleton(4, 2, d)

    def assert_chain_value(self, m, k, d):
        exception = d.singleton_exception()
        t = len(d[exception]) if exception is not None else 1
        for quota in Quota:
            cert = certificate_singleton(m, k, d, quota)
            value = verify_certificate(cert, d, m, k, quota)
            expected = Fraction(-1, k * (k + 2 - t)) if quota is Quota.HARE else Fraction(0)
            self.assertEqual(value, expected)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=100_000))
    def test_random_singleton_conforming(self, seed):
        """Any size and exception: the chain meets -1/(k(k+2-t)) Hare and 0 Droop"""
        rng = make_rng(seed)
        m = rng.randint(3, 6)
        k = rng.randint(1, m - 1)
        self.assert_chain_value(m, k, random_deviation_function(CommitteeSpace(m, k), rng, singleton_conforming=True))

    def test_seeded_pairs(self):
        """Fifty seeded deviation functions for each of (4,2), (5,2), (5,3), (6,3)"""
        for m, k in [(4, 2), (5, 2), (5, 3), (6, 3)]:
            rng = make_rng(1000 + m * 10 + k)
            space = CommitteeSpace(m, k)
            for trial in range(50):
                with self.subTest(m=m, k=k, trial=trial):
                    self.assert_chain_value(m, k, random_deviation_function(space, rng, singleton_conforming=True))


class TestKPlusOneCertificate(unittest.TestCase):
    """Test the certificate for committees of size m-1"""

    def test_deviation_inside_committee(self):
        """Test case 1: a deviation inside its committee gives q on that committee"""
        d = with_exception(smallest_outside(4, 3), cs([0, 1, 2]), cs([0]))
        cert = certificate_kplusone(4, d)
        self.assertEqual(cert.construction, "case-1")
        self.assertEqual(cert.u, 0)
        self.assertEqual(cert.q, {cs([0, 1, 2]): Fraction(1)})
        self.assertEqual(verify_certificate(cert, d, 4, 3), Fraction(-1, 3))

    def test_covering_chain(self):
        """Test case 2: the covering chain over all m committees"""
        d = smallest_outside(4, 3)
        cert = certificate_kplusone(4, d)
        self.assertEqual(cert.construction, "case-2")
        self.assertEqual(len(cert.q), 4)
        self.assertEqual(verify_certificate(cert, d, 4, 3), Fraction(-1, 12))
        self.assertEqual(verify_certificate(cert, d, 4, 3, Quota.DROOP), 0)

    def test_wrong_committee_size(self):
        """Test that k other than m-1 is refused"""
        with self.assertRaises(ParameterError):
            certificate_kplusone(4, smallest_outside(4, 2))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=100_000))
    def test_random_deviations(self, m, seed):
        """Arbitrary deviations with k = m-1 stay at or below the lower bound"""
        d = random_deviation_function(CommitteeSpace(m, m - 1), make_rng(seed))
        cert = certificate_kplusone(m, d)
        self.assertLessEqual(verify_certificate(cert, d, m, m - 1), Fraction(-1, m * (m - 1)))
        self.assertLessEqual(verify_certificate(cert, d, m, m - 1, Quota.DROOP), 0)

    def test_seeded_sizes(self):
        """Fifty seeded deviation functions for each m from 3 to 6"""
        for m in range(3, 7):
            rng = make_rng(2000 + m)
            space = CommitteeSpace(m, m - 1)
            for trial in range(50):
                with self.subTest(m=m, trial=trial):
                    d = random_deviation_function(space, rng)
                    cert = certificate_kplusone(m, d)
                    self.assertTrue(check_stable_lottery(cert.q, d, m - 1).holds)
                    self.assertLessEqual(verify_certificate(cert, d, m, m - 1), Fraction(-1, m * (m - 1)))
                    self.assertLessEqual(verify_certificate(cert, d, m, m - 1, Quota.DROOP), 0)


class TestVerifyCertificate(unittest.TestCase):
    """Test exact rejection of bad certificates"""

    def setUp(self):
        self.d = smallest_outside(4, 2)
        self.cert = certificate_singleton(4, 2, self.d)

    def test_load_above_u(self):
        """Test that a ballot load above u is rejected"""
        bad = DualCertificate(q=dict(self.cert.q), u=Fraction(0))
        with self.assertRaises(CertificateViolation) as ctx:
            verify_certificate(bad, self.d, 4, 2)
        self.assertIsNotNone(ctx.exception.ballot)
        self.assertGreater(ctx.exception.load, 0)
        self.assertEqual(ctx.exception.bound, 0)
        self.assertIn("exceeds u = 0", str(ctx.exception))

    def test_q_not_a_distribution(self):
        """Test that q not summing to 1 is rejected"""
        bad = DualCertificate(q={cs([0, 1]): Fraction(1, 2)}, u=Fraction(1))
        with self.assertRaises(CertificateViolation) as ctx:
            verify_certificate(bad, self.d, 4, 2)
        self.assertIn("q sums to 1/2", str(ctx.exception))

    def test_q_on_wrong_size(self):
        """Test that q on a set of the wrong size is rejected"""
        bad = DualCertificate(q={cs([0, 1, 2]): Fraction(1)}, u=Fraction(1))
        with self.assertRaises(CertificateViolation):
            verify_certificate(bad, self.d, 4, 2)

    def test_negative_mass(self):
        """Test that negative lottery mass is rejected"""
        bad = DualCertificate(q={cs([0, 1]): Fraction(3, 2), cs([0, 2]): Fraction(-1, 2)}, u=Fraction(1))
        with self.assertRaises(CertificateViolation):
            verify_certificate(bad, self.d, 4, 2)

    def test_tighten(self):
        """Test that tightening lowers u to the largest ballot load"""
        loose = DualCertificate(q=dict(self.cert.q), u=Fraction(1), construction="manual")
        tight = tighten_certificate(loose, self.d)
        self.assertEqual(tight.u, max(load for _, load in ballot_loads(loose.q, self.d)))
        self.assertLessEqual(tight.u, Fraction(1, 3))
        self.assertEqual(tight.construction, "manual")
        self.assertEqual(verify_certificate(tight, self.d, 4, 2), certificate_objective(tight, self.d, Quota.HARE))

    def test_json(self):
        """Test that a certificate survives the JSON form"""
        data = self.cert.to_dict()
        self.assertEqual(data["u"], ["1", "3"])
        self.assertEqual(DualCertificate.from_dict(data, 4), self.cert)

    def test_from_dict_rejects_garbage(self):
        """Test that a malformed certificate file is rejected"""
        with self.assertRaises(ParameterError):
            DualCertificate.from_dict({"q": [[[0, 1], "1"]]}, 4)


if __name__ == "__main__":
    unittest.main()
