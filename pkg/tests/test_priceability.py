"""
Unit tests for weak, Lindahl and Peters priceability
"""

import os
import sys
import unittest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from config import config
from elections.candidate_sets import CandidateSet, CommitteeSpace
from elections.core_oracle import Quota, is_stable
from elections.distributions import VoteDistribution
from elections.random_instances import make_rng, random_distribution
from errors import CertificateViolation, ParameterError
from programs import (
    InfeasibilityCertificate,
    PetersPayment,
    PriceabilityStatus,
    PriceKind,
    PriceSystem,
    build_peters_lp,
    build_price_dual,
    build_price_lp,
    check_peters_priceable,
    check_priceability,
    check_priceable,
    peters_to_weak_prices,
    tsets,
    verify_infeasibility_certificate,
    verify_peters_payment,
    verify_price_system
)
from programs.priceability import _exact_payment, _payment_variable
from solvers import BackendConfig, SolveResult, SolveStatus, solve

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

CFG = BackendConfig(solver="highs", tolerance=1e-6)


def cs(indices, m):
    return CandidateSet.from_indices(indices, m)


# Hare stable for W = {c1,c2,c3}, k = 3, but not weakly priceable
RUNNING_EXAMPLE = VoteDistribution.from_indices(5, [
    ([1, 3], Fraction(1, 3)),
    ([1, 4], Fraction(1, 3)),
    ([0, 1, 2], Fraction(1, 6)),
    ([3, 4], Fraction(1, 6)),
])
RUNNING_COMMITTEE = cs([0, 1, 2], 5)

# W = {c1,c2}, k = 2: weakly priceable, not Lindahl priceable
LINDAHL_WITNESS = VoteDistribution.from_indices(4, [
    ([2, 3], Fraction(1, 3)),
    ([0, 2, 3], Fraction(1, 3)),
    ([0, 1, 2, 3], Fraction(1, 3)),
])
LINDAHL_COMMITTEE = cs([0, 1], 4)

# W = {c1,c2}, k = 2: Lindahl priceable, not Peters priceable
PETERS_GAP = VoteDistribution.from_indices(3, [([0], Fraction(1, 5)), ([1, 2], Fraction(4, 5))])
PETERS_OK = VoteDistribution.from_indices(3, [([0], Fraction(1, 2)), ([1, 2], Fraction(1, 2))])
PAIR = cs([0, 1], 3)


def running_certificate():
    """Scale the budget rows of c2, c4, c5 by 1 against the four cheapest affordability rows"""
    m = 5
    g = {
        (cs([1, 3], m), cs([1, 3], m)): Fraction(1, 3),
        (cs([1, 4], m), cs([1, 4], m)): Fraction(1, 3),
        (cs([3, 4], m), cs([3], m)): Fraction(1, 6),
        (cs([3, 4], m), cs([4], m)): Fraction(1, 6),
    }
    t = {1: Fraction(1), 3: Fraction(1), 4: Fraction(1)}
    return InfeasibilityCertificate(kind=PriceKind.WEAK, x=RUNNING_EXAMPLE, committee=RUNNING_COMMITTEE,
                                    k=3, t=t, g=g)


def lindahl_certificate():
    m = 4
    g = {
        (cs([2, 3], m), cs([2], m)): Fraction(2, 9),
        (cs([2, 3], m), cs([3], m)): Fraction(2, 9),
        (cs([0, 2, 3], m), cs([0, 2], m)): Fraction(1, 9),
        (cs([0, 2, 3], m), cs([0, 3], m)): Fraction(1, 9),
        (cs([0, 2, 3], m), cs([2, 3], m)): Fraction(1, 9),
        (cs([0, 1, 2, 3], m), cs([0, 2, 3], m)): Fraction(2, 9),
    }
    t = {0: Fraction(2, 3), 2: Fraction(2, 3), 3: Fraction(2, 3)}
    return InfeasibilityCertificate(kind=PriceKind.LINDAHL, x=LINDAHL_WITNESS, committee=LINDAHL_COMMITTEE,
                                    k=2, t=t, g=g)


def lindahl_witness_weak_prices():
    m = 4
    prices = {
        (cs([2, 3], m), 2): Fraction(3, 2),
        (cs([2, 3], m), 3): Fraction(3, 2),
        (cs([0, 2, 3], m), 0): Fraction(3, 2),
        (cs([0, 1, 2, 3], m), 1): Fraction(3, 2),
    }
    return PriceSystem(kind=PriceKind.WEAK, x=LINDAHL_WITNESS, committee=LINDAHL_COMMITTEE, k=2, prices=prices)


class TestAffordabilitySets(unittest.TestCase):
    """Test the sets each ballot must not afford"""

    def test_weak(self):
        """Test that a weak ballot may only add one candidate to its approved members of W"""
        sets = tsets(cs([1, 3], 5), RUNNING_COMMITTEE, PriceKind.WEAK)
        self.assertEqual(sets, [cs([1, 3], 5)])
        self.assertEqual(tsets(cs([0, 1], 5), RUNNING_COMMITTEE, PriceKind.WEAK), [])

    def test_lindahl(self):
        """Test the Lindahl sets of a ballot with one approved member of W"""
        sets = tsets(cs([0, 2, 3], 4), LINDAHL_COMMITTEE, PriceKind.LINDAHL)
        self.assertEqual(set(sets), {cs([0, 2], 4), cs([0, 3], 4), cs([2, 3], 4)})

    def test_ballot_inside_committee_has_none(self):
        """Test that a ballot inside W has no affordability sets"""
        for kind in (PriceKind.WEAK, PriceKind.LINDAHL):
            self.assertEqual(tsets(cs([0, 2], 5), RUNNING_COMMITTEE, kind), [])

    def test_peters_has_none(self):
        """Test that Peters priceability has no affordability sets"""
        with self.assertRaises(ParameterError):
            tsets(cs([0], 3), PAIR, PriceKind.PETERS)

    def test_parse_kind(self):
        """Test priceability kind names, case-insensitive, and an unknown name"""
        self.assertIs(PriceKind.parse("Lindahl"), PriceKind.LINDAHL)
        with self.assertRaises(ParameterError):
            PriceKind.parse("walrasian")


class TestExactVerification(unittest.TestCase):
    """Test hand-built price systems and certificates"""

    def test_weak_certificate_for_running_example(self):
        """Test the hand-built running-example certificate with value 1"""
        cert = running_certificate()
        self.assertEqual(cert.value, 1)
        self.assertTrue(verify_infeasibility_certificate(cert))

    def test_certificate_with_short_multiplier(self):
        """Test that a multiplier too small for its rows is rejected"""
        cert = running_certificate()
        cert.t[3] = Fraction(1, 2)
        self.assertFalse(verify_infeasibility_certificate(cert))

    def test_certificate_with_unnormalized_g(self):
        """Test that g not summing to 1 is rejected"""
        cert = running_certificate()
        cert.g[(cs([1, 3], 5), cs([1, 3], 5))] = Fraction(1, 2)
        self.assertFalse(verify_infeasibility_certificate(cert))

    def test_certificate_with_foreign_set(self):
        """Test that a set outside the ballot's family is rejected"""
        cert = running_certificate()
        cert.g.pop((cs([3, 4], 5), cs([4], 5)))
        cert.g[(cs([3, 4], 5), cs([0], 5))] = Fraction(1, 6)
        self.assertFalse(verify_infeasibility_certificate(cert))

    def test_lindahl_certificate(self):
        """Test the hand-built Lindahl certificate for the witness"""
        self.assertTrue(verify_infeasibility_certificate(lindahl_certificate()))

    def test_weak_prices_for_lindahl_witness(self):
        """Test a weak price system spending exactly 1/2 per candidate"""
        system = lindahl_witness_weak_prices()
        self.assertTrue(verify_price_system(system))
        self.assertTrue(all(system.load(c) == Fraction(1, 2) for c in range(4)))

    def test_same_prices_are_not_lindahl(self):
        """Test that the same prices fail the Lindahl rows"""
        system = lindahl_witness_weak_prices()
        system.kind = PriceKind.LINDAHL
        self.assertFalse(verify_price_system(system))

    def test_budget_violation(self):
        """Test that a load above 1/k is rejected"""
        system = lindahl_witness_weak_prices()
        system.prices[(cs([2, 3], 4), 2)] = Fraction(2)
        self.assertFalse(verify_price_system(system))

    def test_off_support_price_must_exceed_one(self):
        """Test that the price for ballots outside the support must exceed 1"""
        system = lindahl_witness_weak_prices()
        system.off_support_price = Fraction(1)
        self.assertFalse(verify_price_system(system))

    def test_lindahl_prices_for_peters_gap(self):
        """Test a Lindahl price system for the Peters gap instance"""
        prices = {(cs([1, 2], 3), 1): Fraction(3, 5), (cs([1, 2], 3), 2): Fraction(1, 2)}
        system = PriceSystem(kind=PriceKind.LINDAHL, x=PETERS_GAP, committee=PAIR, k=2, prices=prices)
        self.assertTrue(verify_price_system(system))
        self.assertEqual(system.load(1), Fraction(12, 25))

    def test_peters_kind_needs_payment_check(self):
        """Test that a Peters price system is refused by the price check"""
        system = lindahl_witness_weak_prices()
        system.kind = PriceKind.PETERS
        with self.assertRaises(ParameterError):
            verify_price_system(system)

    def test_json(self):
        """Test that certificates and price systems survive the JSON form"""
        cert = running_certificate()
        self.assertEqual(InfeasibilityCertificate.from_dict(cert.to_dict()), cert)
        system = lindahl_witness_weak_prices()
        self.assertEqual(PriceSystem.from_dict(system.to_dict()), system)

    def test_json_needs_context(self):
        """Test that a certificate file without its instance is rejected"""
        data = running_certificate().to_dict()
        data.pop("instance")
        with self.assertRaises(ParameterError):
            InfeasibilityCertificate.from_dict(data)


class TestCheckPriceable(unittest.TestCase):
    """Test the LP-based decisions"""

    def test_running_example_not_weakly_priceable(self):
        """Test that the LP finds and verifies a certificate for the running example"""
        result = check_priceable(RUNNING_EXAMPLE, RUNNING_COMMITTEE, 3, PriceKind.WEAK, CFG)
        self.assertIs(result.status, PriceabilityStatus.NOT_PRICEABLE)
        self.assertFalse(result.priceable)
        self.assertTrue(verify_infeasibility_certificate(result.certificate))
        self.assertLessEqual(result.certificate.value, 1)
        self.assertLessEqual(result.lp_value, 1 + 1e-6)

    def test_running_example_multipliers(self):
        """The dual optimum is unique, so the extracted certificate is the hand-built one"""
        cert = check_priceable(RUNNING_EXAMPLE, RUNNING_COMMITTEE, 3, PriceKind.WEAK, CFG).certificate
        expected = running_certificate()
        self.assertEqual(sorted(cert.g.values()), [Fraction(1, 6), Fraction(1, 6), Fraction(1, 3), Fraction(1, 3)])
        self.assertEqual({key: v for key, v in cert.g.items() if v}, expected.g)
        self.assertEqual({c: v for c, v in cert.t.items() if v}, expected.t)
        self.assertEqual(cert.value, 1)

    def test_lindahl_witness(self):
        """Test that the witness is weakly but not Lindahl priceable"""
        weak = check_priceable(LINDAHL_WITNESS, LINDAHL_COMMITTEE, 2, PriceKind.WEAK, CFG)
        self.assertIs(weak.status, PriceabilityStatus.PRICEABLE)
        self.assertTrue(verify_price_system(weak.price_system))
        lindahl = check_priceable(LINDAHL_WITNESS, LINDAHL_COMMITTEE, 2, PriceKind.LINDAHL, CFG)
        self.assertIs(lindahl.status, PriceabilityStatus.NOT_PRICEABLE)
        self.assertTrue(verify_infeasibility_certificate(lindahl.certificate))

    def test_peters_gap_is_lindahl_priceable(self):
        """Test the Lindahl LP value 5/4 on the Peters gap instance"""
        result = check_priceable(PETERS_GAP, PAIR, 2, PriceKind.LINDAHL, CFG)
        self.assertIs(result.status, PriceabilityStatus.PRICEABLE)
        self.assertAlmostEqual(result.lp_value, 1.25, places=6)

    def test_unreduced_lindahl_program_has_same_value(self):
        """Test that all improving sets give the same LP value as the reduced family"""
        reduced = solve(build_price_lp(LINDAHL_WITNESS, LINDAHL_COMMITTEE, 2, PriceKind.LINDAHL), CFG)
        full = solve(build_price_lp(LINDAHL_WITNESS, LINDAHL_COMMITTEE, 2, PriceKind.LINDAHL, reduced=False), CFG)
        self.assertAlmostEqual(reduced.objective, full.objective, places=6)

    def test_reduction_keeps_value_on_random_instances(self):
        """Test the reduced Lindahl family on eight seeded instances"""
        for seed in range(8):
            rng = make_rng(seed)
            m = rng.randint(3, 4)
            k = rng.randint(1, m - 1)
            x = random_distribution(m, rng)
            committee = rng.choice(CommitteeSpace(m, k).committees)
            reduced = solve(build_price_lp(x, committee, k, PriceKind.LINDAHL), CFG)
            full = solve(build_price_lp(x, committee, k, PriceKind.LINDAHL, reduced=False), CFG)
            self.assertAlmostEqual(reduced.objective, full.objective, places=6)

    def test_dual_shape(self):
        """Test the variable count of the weak dual for the running example"""
        dual = build_price_dual(RUNNING_EXAMPLE, RUNNING_COMMITTEE, 3, PriceKind.WEAK)
        # t for five candidates plus one g per (ballot, set) pair
        self.assertEqual(len(dual.variables), 5 + 4)

    def test_invalid_committee(self):
        """Test that a committee of the wrong size is rejected"""
        with self.assertRaises(ParameterError):
            check_priceable(RUNNING_EXAMPLE, cs([0, 1], 5), 3, PriceKind.WEAK, CFG)

    def test_peters_goes_through_its_own_check(self):
        """Test that check_priceable refuses the Peters kind"""
        with self.assertRaises(ParameterError):
            check_priceable(PETERS_GAP, PAIR, 2, PriceKind.PETERS, CFG)

    def test_result_json(self):
        """Test the result JSON of a not-priceable verdict"""
        data = check_priceable(RUNNING_EXAMPLE, RUNNING_COMMITTEE, 3, PriceKind.WEAK, CFG).to_dict()
        self.assertEqual(data["status"], "not_priceable")
        self.assertEqual(data["kind"], "weak")
        self.assertIn("g", data["evidence"])

    def assert_implications(self, seed):
        rng = make_rng(seed)
        m = rng.randint(3, 4)
        k = rng.randint(1, m - 1)
        x = random_distribution(m, rng)
        committee = rng.choice(CommitteeSpace(m, k).committees)
        results = {kind: check_priceability(x, committee, k, kind, CFG) for kind in PriceKind}
        weak = results[PriceKind.WEAK].status
        for stronger in (PriceKind.LINDAHL, PriceKind.PETERS):
            if results[stronger].status is PriceabilityStatus.PRICEABLE:
                self.assertIsNot(weak, PriceabilityStatus.NOT_PRICEABLE)
        if results[PriceKind.LINDAHL].status is PriceabilityStatus.PRICEABLE:
            self.assertTrue(is_stable(x, committee, k, Quota.HARE))
        for kind in (PriceKind.WEAK, PriceKind.LINDAHL):
            result = results[kind]
            if result.price_system is not None:
                self.assertTrue(verify_price_system(result.price_system))
            if result.certificate is not None:
                self.assertTrue(verify_infeasibility_certificate(result.certificate))
        if results[PriceKind.PETERS].payment is not None:
            self.assertTrue(verify_peters_payment(results[PriceKind.PETERS].payment))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=100_000))
    def test_implications_on_random_instances(self, seed):
        """Lindahl or Peters priceable implies weakly priceable; Lindahl priceable implies stable"""
        self.assert_implications(seed)

    @unittest.skipUnless(config.SLOW_TESTS, "set CORE_FORGE_SLOW_TESTS=1 for 200 seeded instances")
    def test_implications_on_200_seeded_instances(self):
        """The same implications on seeds 0..199"""
        for seed in range(200):
            with self.subTest(seed=seed):
                self.assert_implications(seed)


class TestPeters(unittest.TestCase):
    """Test Peters priceability and the conversion to weak prices"""

    def payment(self):
        f = {(cs([0], 3), 0): Fraction(1), (cs([1, 2], 3), 1): Fraction(1)}
        return PetersPayment(x=PETERS_OK, committee=PAIR, k=2, r=Fraction(1), f=f)

    def test_hand_built_payment(self):
        """Test a hand-built payment at r = 1"""
        payment = self.payment()
        self.assertEqual(payment.per_voter_price, Fraction(1, 2))
        self.assertEqual(payment.spent(cs([1, 2], 3)), 1)
        self.assertTrue(verify_peters_payment(payment))

    def test_price_mismatch(self):
        """Test that collections differing from r are rejected"""
        payment = self.payment()
        payment.r = Fraction(1, 2)
        self.assertFalse(verify_peters_payment(payment))

    def test_payment_for_unelected_candidate(self):
        """Test that paying a candidate outside W is rejected"""
        payment = self.payment()
        payment.f[(cs([1, 2], 3), 2)] = Fraction(1, 10)
        self.assertFalse(verify_peters_payment(payment))

    def test_lp_finds_payment(self):
        """Test that the payment LP finds r = 1"""
        result = check_peters_priceable(PETERS_OK, PAIR, 2, CFG)
        self.assertIs(result.status, PriceabilityStatus.PRICEABLE)
        self.assertEqual(result.payment.r, 1)
        self.assertTrue(verify_peters_payment(result.payment))

    def test_gap_instance_not_peters_priceable(self):
        """Test that the gap instance has no payment"""
        result = check_peters_priceable(PETERS_GAP, PAIR, 2, CFG)
        self.assertIs(result.status, PriceabilityStatus.NOT_PRICEABLE)
        self.assertIsNone(result.payment)

    def test_rounded_payments_keep_residual_rows(self):
        """Equalizing an uneven rounded point upward keeps the tight residual row of c3"""
        x = VoteDistribution.from_indices(3, [([0], Fraction(1, 3)), ([1], Fraction(1, 3)), ([2], Fraction(1, 3))])
        model = build_peters_lp(x, PAIR, 2)
        rounded = SolveResult(SolveStatus.OPTIMAL, objective=0.33, values={
            _payment_variable(cs([0], 3), 0): 1.0,
            _payment_variable(cs([1], 3), 1): 0.99,
        })
        payment = _exact_payment(rounded, model, x, PAIR, 2, 1_000_000)
        self.assertIsNotNone(payment)
        self.assertEqual(payment.per_voter_price, Fraction(1, 3))
        self.assertEqual(payment.f[(cs([1], 3), 1)], 1)
        self.assertTrue(verify_peters_payment(payment))

    def test_concentrated_vote(self):
        """Test a single ballot equal to W"""
        x = VoteDistribution.concentrated(PAIR)
        result = check_peters_priceable(x, PAIR, 2, CFG)
        self.assertIs(result.status, PriceabilityStatus.PRICEABLE)
        self.assertEqual(result.payment.r, 1)

    def test_conversion_to_weak_prices(self):
        """Test turning a payment into a verified weak price system"""
        system = peters_to_weak_prices(self.payment())
        self.assertIs(system.kind, PriceKind.WEAK)
        self.assertTrue(verify_price_system(system))
        self.assertEqual(system.price(cs([1, 2], 3), 2), Fraction(1, 2))

    def test_conversion_rejects_invalid_payment(self):
        """Test that an invalid payment is not converted"""
        payment = self.payment()
        payment.r = Fraction(1, 2)
        with self.assertRaises(CertificateViolation):
            peters_to_weak_prices(payment)

    def test_json(self):
        """Test that a payment survives the JSON form"""
        payment = self.payment()
        self.assertEqual(PetersPayment.from_dict(payment.to_dict()), payment)


if __name__ == "__main__":
    unittest.main()
