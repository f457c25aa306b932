"""
Elections package for coreforge
Candidate sets, vote distributions and the exact core oracle
"""

from .candidate_sets import (
    CandidateSet,
    CommitteeSpace,
    enumerate_committees,
    enumerate_deviations,
    all_ballots,
    improves,
    parse_committee
)

from .distributions import (
    VoteDistribution,
    ApprovalProfile,
    profile_to_distribution,
    distribution_to_profile,
    replicate_profile
)

from .deviation_functions import DeviationFunction

from .core_oracle import (
    Quota,
    LeastCoreReport,
    StableLotteryReport,
    deviation_excess,
    worst_deviation,
    is_stable,
    least_core,
    check_stable_lottery
)

__all__ = [
    'CandidateSet',
    'CommitteeSpace',
    'enumerate_committees',
    'enumerate_deviations',
    'all_ballots',
    'improves',
    'parse_committee',
    'VoteDistribution',
    'ApprovalProfile',
    'profile_to_distribution',
    'distribution_to_profile',
    'replicate_profile',
    'DeviationFunction',
    'Quota',
    'LeastCoreReport',
    'StableLotteryReport',
    'deviation_excess',
    'worst_deviation',
    'is_stable',
    'least_core',
    'check_stable_lottery'
]
