"""
Core oracle - exact brute-force decisions over vote distributions
Hare and Droop core stability, sizewise-least-core values and the stable-lottery condition
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple, Union

from elections.candidate_sets import (
    CandidateSet,
    CommitteeSpace,
    all_ballots,
    enumerate_committees,
    enumerate_deviations,
    improves,
)
from elections.deviation_functions import DeviationFunction
from elections.distributions import VoteDistribution
from elections.rationals import format_fraction, fraction_to_pair
from errors import ParameterError
from logging_config import get_logger

logger = get_logger(__name__)


class Quota(Enum):
    """Seat entitlement: Hare divides by k with strict '<', Droop by k+1 with '<='"""
    HARE = ("hare", 0)
    DROOP = ("droop", 1)

    def __init__(self, label: str, offset: int):
        self.label = label
        self.offset = offset

    def denominator(self, k: int) -> int:
        return k + self.offset

    def admits(self, excess: Fraction) -> bool:
        """Whether a deviation with this excess leaves the committee stable"""
        return excess < 0 if self is Quota.HARE else excess <= 0

    @classmethod
    def parse(cls, text: str) -> "Quota":
        for quota in cls:
            if quota.label == str(text).lower():
                return quota
        raise ParameterError(f"unknown quota {text!r}, expected hare or droop")


def _check_committee(x_m: int, committee: CandidateSet, k: int):
    if committee.m != x_m:
        raise ParameterError(f"committee over {committee.m} candidates, distribution over {x_m}")
    CommitteeSpace(x_m, k)
    if len(committee) != k:
        raise ParameterError(f"committee {committee.label()} has size {len(committee)}, expected k={k}")


def support_mass(x: VoteDistribution, committee: CandidateSet, deviation: CandidateSet) -> Fraction:
    """Weight of ballots that strictly prefer the deviation"""
    return sum((w for ballot, w in x.items() if improves(ballot, committee, deviation)), Fraction(0))


def deviation_excess(x: VoteDistribution, committee: CandidateSet, deviation: CandidateSet,
                     k: int, quota: Quota = Quota.HARE) -> Fraction:
    """
    Supporter mass of a deviation minus its entitlement |W'|/denom.

    Raises:
        ParameterError: if |W| != k or |W'| is outside 1..k
    """
    _check_committee(x.m, committee, k)
    if deviation.m != x.m or not 1 <= len(deviation) <= k:
        raise ParameterError(f"deviation {deviation.label()} must have size 1..{k}")
    return support_mass(x, committee, deviation) - Fraction(len(deviation), quota.denominator(k))


def worst_deviation(x: VoteDistribution, committee: CandidateSet, k: int,
                    quota: Quota = Quota.HARE) -> Tuple[CandidateSet, Fraction]:
    """Deviation with the largest excess; ties go to the first in enumeration order"""
    _check_committee(x.m, committee, k)
    denom = quota.denominator(k)
    best = None
    best_excess = None
    for deviation in enumerate_deviations(CommitteeSpace(x.m, k)):
        excess = support_mass(x, committee, deviation) - Fraction(len(deviation), denom)
        if best_excess is None or excess > best_excess:
            best, best_excess = deviation, excess
    return best, best_excess


def is_stable(x: VoteDistribution, committee: CandidateSet, k: int, quota: Quota = Quota.HARE) -> bool:
    """Hare: every excess < 0. Droop: every excess <= 0."""
    _, excess = worst_deviation(x, committee, k, quota)
    return quota.admits(excess)


@dataclass
class LeastCoreReport:
    """Exact min over committees of the max deviation excess"""
    value: Fraction
    witnesses: Tuple[int, ...]  # committee ids attaining the min
    worst: Dict[int, Tuple[CandidateSet, Fraction]]  # committee id -> (deviation, excess)
    k: int
    quota: Quota = Quota.HARE

    @property
    def core_nonempty(self) -> bool:
        return self.quota.admits(self.value)

    def witness_committees(self, space: CommitteeSpace) -> List[CandidateSet]:
        return [space.committees[i] for i in self.witnesses]

    def to_dict(self) -> Dict:
        return {
            "value": fraction_to_pair(self.value),
            "value_text": format_fraction(self.value),
            "k": self.k,
            "quota": self.quota.label,
            "witnesses": list(self.witnesses),
            "worst": [
                {"committee_id": cid, "deviation": dev.to_list(), "excess": fraction_to_pair(excess)}
                for cid, (dev, excess) in sorted(self.worst.items())
            ]
        }


def least_core(x: VoteDistribution, k: int, quota: Quota = Quota.HARE) -> LeastCoreReport:
    """
    Sizewise-least-core value of x by full enumeration.

    Reports every committee attaining the minimum, not just the first.
    """
    space = CommitteeSpace(x.m, k)
    denom = quota.denominator(k)
    deviations = enumerate_deviations(space)
    support = list(x.items())
    worst = {}
    for committee_id, committee in enumerate(enumerate_committees(space)):
        best, best_excess = None, None
        for deviation in deviations:
            mass = Fraction(0)
            for ballot, weight in support:
                if improves(ballot, committee, deviation):
                    mass += weight
            excess = mass - Fraction(len(deviation), denom)
            if best_excess is None or excess > best_excess:
                best, best_excess = deviation, excess
        worst[committee_id] = (best, best_excess)
    value = min(excess for _, excess in worst.values())
    witnesses = tuple(cid for cid, (_, excess) in worst.items() if excess == value)
    logger.debug(f"least core m={x.m} k={k} {quota.label}: {format_fraction(value)} "
                 f"attained by {len(witnesses)} committees")
    return LeastCoreReport(value=value, witnesses=witnesses, worst=worst, k=k, quota=quota)


@dataclass
class BallotLoad:
    """Probability that a ballot is improved upon under a committee lottery"""
    ballot: CandidateSet
    probability: Fraction
    holds: bool


@dataclass
class StableLotteryReport:
    """Per-ballot probabilities against the common bound E|W'|/denom"""
    bound: Fraction
    quota: Quota
    loads: List[BallotLoad] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(load.holds for load in self.loads)

    @property
    def violations(self) -> List[BallotLoad]:
        return [load for load in self.loads if not load.holds]

    def to_dict(self) -> Dict:
        return {
            "bound": fraction_to_pair(self.bound),
            "quota": self.quota.label,
            "holds": self.holds,
            "loads": [
                {"ballot": load.ballot.to_list(), "probability": fraction_to_pair(load.probability),
                 "holds": load.holds}
                for load in self.loads
            ]
        }


def _check_lottery(q: Mapping[CandidateSet, Fraction], k: int) -> int:
    if not q:
        raise ParameterError("committee lottery is empty")
    ms = {committee.m for committee in q}
    if len(ms) != 1:
        raise ParameterError("committee lottery mixes candidate counts")
    m = ms.pop()
    CommitteeSpace(m, k)
    for committee, prob in q.items():
        if len(committee) != k:
            raise ParameterError(f"lottery committee {committee.label()} does not have size {k}")
        if prob < 0:
            raise ParameterError(f"negative probability {prob} on {committee.label()}")
    total = sum(q.values(), Fraction(0))
    if total != 1:
        raise ParameterError(f"committee lottery sums to {total}, expected 1")
    return m


def check_stable_lottery(q: Mapping[CandidateSet, Fraction],
                         target: Union[DeviationFunction, Mapping[CandidateSet, Fraction]],
                         k: int, quota: Quota = Quota.HARE) -> StableLotteryReport:
    """
    Check the stable-lottery inequality for every one of the 2^m ballots.

    With a DeviationFunction D the deviation depends on the drawn committee:
    P_{W~q}[|W∩A| < |D(W)∩A|] against E_q|D(W)|/denom. With a distribution r over
    deviations, drawn independently of W: P_{W~q, W'~r}[|W∩A| < |W'∩A|] against
    E_r|W'|/denom. Hare needs the probability strictly below the bound, Droop allows equality.

    Raises:
        ParameterError: if q is not a distribution over k-committees
    """
    m = _check_lottery(q, k)
    denom = quota.denominator(k)
    lottery = [(w, p) for w, p in q.items() if p]

    if isinstance(target, DeviationFunction):
        if target.m != m or target.k != k:
            raise ParameterError("deviation function and lottery disagree on (m, k)")
        pairs = [(w, target[w], p) for w, p in lottery]
        bound = sum((p * len(target[w]) for w, p in lottery), Fraction(0)) / denom
    else:
        if sum(target.values(), Fraction(0)) != 1 or any(p < 0 for p in target.values()):
            raise ParameterError("deviation distribution must be nonnegative and sum to 1")
        for deviation in target:
            if deviation.m != m or not 1 <= len(deviation) <= k:
                raise ParameterError(f"deviation {deviation.label()} must have size 1..{k}")
        pairs = [(w, d, p * r) for w, p in lottery for d, r in target.items() if r]
        bound = sum((r * len(d) for d, r in target.items()), Fraction(0)) / denom

    report = StableLotteryReport(bound=bound, quota=quota)
    for ballot in all_ballots(m):
        probability = sum((p for w, d, p in pairs if improves(ballot, w, d)), Fraction(0))
        holds = probability < bound if quota is Quota.HARE else probability <= bound
        report.loads.append(BallotLoad(ballot=ballot, probability=probability, holds=holds))
    logger.debug(f"stable lottery check m={m} k={k}: bound {format_fraction(bound)}, "
                 f"{len(report.violations)} violating ballots")
    return report
