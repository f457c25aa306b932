"""
Random instance generator - seeded sampling of small elections
Supplies distributions, deviation functions and committee lotteries for property checks
"""

import random
from fractions import Fraction
from typing import Dict, Optional

from elections.candidate_sets import CandidateSet, CommitteeSpace, all_ballots
from elections.deviation_functions import DeviationFunction
from elections.distributions import ApprovalProfile, VoteDistribution, profile_to_distribution
from errors import ParameterError


def make_rng(seed: Optional[int] = None) -> random.Random:
    """Independent generator so callers never touch the global random state"""
    return random.Random(seed)


def random_subset(m: int, size: int, rng: random.Random) -> CandidateSet:
    return CandidateSet.from_indices(rng.sample(range(m), size), m)


def random_profile(m: int, rng: random.Random, max_voters: int = 6,
                   allow_empty: bool = False) -> ApprovalProfile:
    """
    Between 1 and max_voters voters, each with a uniformly drawn ballot.

    Examples:
        >>> random_profile(4, make_rng(1)).m
        4
    """
    ballots = [b for b in all_ballots(m) if allow_empty or b.mask]
    n = rng.randint(1, max_voters)
    return ApprovalProfile(m, [rng.choice(ballots) for _ in range(n)])


def random_distribution(m: int, rng: random.Random, max_denominator: int = 6,
                        allow_empty: bool = False) -> VoteDistribution:
    """Distribution of a random profile, so every denominator divides at most max_denominator"""
    return profile_to_distribution(random_profile(m, rng, max_denominator, allow_empty))


def random_deviation_function(space: CommitteeSpace, rng: random.Random,
                              singleton_conforming: bool = False,
                              exception_size: Optional[int] = None) -> DeviationFunction:
    """
    Random deviation for every committee.

    In singleton-conforming mode every deviation is a singleton except possibly one
    committee, whose deviation has exception_size members (drawn in 1..k when None).
    """
    mapping: Dict[CandidateSet, CandidateSet] = {}
    if singleton_conforming:
        if exception_size is None:
            exception_size = rng.randint(1, space.k)
        if not 1 <= exception_size <= space.k:
            raise ParameterError(f"exception size must be in 1..{space.k}")
        exception = rng.choice(space.committees)
        for committee in space.committees:
            size = exception_size if committee == exception else 1
            mapping[committee] = random_subset(space.m, size, rng)
    else:
        for committee in space.committees:
            mapping[committee] = random_subset(space.m, rng.randint(1, space.k), rng)
    return DeviationFunction(space, mapping)


def random_lottery(space: CommitteeSpace, rng: random.Random, draws: int = 6) -> Dict[CandidateSet, Fraction]:
    """Committee lottery formed by drawing committees with replacement"""
    counts: Dict[CandidateSet, int] = {}
    for _ in range(draws):
        committee = rng.choice(space.committees)
        counts[committee] = counts.get(committee, 0) + 1
    return {committee: Fraction(c, draws) for committee, c in counts.items()}


def random_deviation_distribution(space: CommitteeSpace, rng: random.Random,
                                  draws: int = 4) -> Dict[CandidateSet, Fraction]:
    counts: Dict[CandidateSet, int] = {}
    for _ in range(draws):
        deviation = rng.choice(space.deviations)
        counts[deviation] = counts.get(deviation, 0) + 1
    return {deviation: Fraction(c, draws) for deviation, c in counts.items()}
