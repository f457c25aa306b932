"""
Vote distributions and approval profiles
A distribution is the normalized frequency of each approval ballot; a profile lists one ballot per voter
"""

from collections import Counter
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Mapping, Tuple

from elections.candidate_sets import CandidateSet, all_ballots
from elections.rationals import fraction_from_json, fraction_to_json, to_fraction
from errors import ParameterError


class VoteDistribution:
    """
    Sparse map from ballots to nonnegative fractions summing to exactly 1.

    Zero weights are not stored; weight() returns 0 for any ballot outside the support.
    """

    def __init__(self, m: int, weights: Mapping[CandidateSet, Fraction]):
        self.m = m
        cleaned = {}
        for ballot, weight in weights.items():
            if not isinstance(ballot, CandidateSet) or ballot.m != m:
                raise ParameterError(f"ballot {ballot!r} is not a subset of {m} candidates")
            weight = to_fraction(weight)
            if weight < 0:
                raise ParameterError(f"negative weight {weight} on {ballot.label()}")
            if weight:
                cleaned[ballot] = cleaned.get(ballot, Fraction(0)) + weight
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise ParameterError(f"weights sum to {total}, expected exactly 1")
        # Support kept in mask order so iteration is deterministic
        self._weights = dict(sorted(cleaned.items(), key=lambda item: item[0].mask))

    @classmethod
    def from_indices(cls, m: int, weights: Iterable[Tuple[Iterable[int], Fraction]]) -> "VoteDistribution":
        """Build from (ballot indices, weight) pairs; repeated ballots add up"""
        merged: Dict[CandidateSet, Fraction] = {}
        for indices, weight in weights:
            ballot = CandidateSet.from_indices(indices, m)
            merged[ballot] = merged.get(ballot, Fraction(0)) + to_fraction(weight)
        return cls(m, merged)

    @classmethod
    def concentrated(cls, ballot: CandidateSet) -> "VoteDistribution":
        return cls(ballot.m, {ballot: Fraction(1)})

    @property
    def support(self) -> Tuple[CandidateSet, ...]:
        return tuple(self._weights)

    def items(self):
        return self._weights.items()

    def weight(self, ballot: CandidateSet) -> Fraction:
        return self._weights.get(ballot, Fraction(0))

    def __getitem__(self, ballot: CandidateSet) -> Fraction:
        return self.weight(ballot)

    def __len__(self):
        return len(self._weights)

    def dense(self) -> List[Fraction]:
        """Weights of all 2^m ballots in mask order"""
        return [self.weight(ballot) for ballot in all_ballots(self.m)]

    def approval_mass(self, candidate: int) -> Fraction:
        """Total weight of ballots approving the candidate"""
        return sum((w for ballot, w in self._weights.items() if candidate in ballot), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, VoteDistribution):
            return NotImplemented
        return self.m == other.m and self._weights == other._weights

    def __hash__(self):
        return hash((self.m, frozenset(self._weights.items())))

    def __repr__(self):
        body = ", ".join(f"{ballot.label()}: {weight}" for ballot, weight in self._weights.items())
        return f"VoteDistribution(m={self.m}, {{{body}}})"

    def to_dict(self) -> Dict:
        """Serialize to the JSON instance format"""
        return {
            "m": self.m,
            "weights": [
                {"ballot": ballot.to_list(), **fraction_to_json(weight)}
                for ballot, weight in self._weights.items()
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "VoteDistribution":
        """
        Deserialize from the JSON instance format.

        Raises:
            ParameterError: on missing keys or invalid weights
        """
        try:
            m = int(data["m"])
            entries = data["weights"]
        except (KeyError, TypeError, ValueError):
            raise ParameterError("instance must carry 'm' and 'weights'")
        weights: Dict[CandidateSet, Fraction] = {}
        for entry in entries:
            try:
                ballot = CandidateSet.from_list(entry["ballot"], m)
            except (KeyError, TypeError):
                raise ParameterError(f"weight entry without ballot: {entry!r}")
            if ballot in weights:
                raise ParameterError(f"ballot {ballot.label()} listed twice")
            weights[ballot] = fraction_from_json(entry)
        return cls(m, weights)


class ApprovalProfile:
    """One approval ballot per voter"""

    def __init__(self, m: int, ballots: Iterable[CandidateSet]):
        self.m = m
        self.ballots = tuple(ballots)
        for ballot in self.ballots:
            if ballot.m != m:
                raise ParameterError(f"ballot {ballot!r} is not a subset of {m} candidates")

    @classmethod
    def from_indices(cls, m: int, ballots: Iterable[Iterable[int]]) -> "ApprovalProfile":
        return cls(m, [CandidateSet.from_indices(b, m) for b in ballots])

    @property
    def n(self) -> int:
        return len(self.ballots)

    def __eq__(self, other):
        if not isinstance(other, ApprovalProfile):
            return NotImplemented
        return self.m == other.m and self.ballots == other.ballots

    def __repr__(self):
        return f"ApprovalProfile(m={self.m}, n={self.n})"

    def to_dict(self) -> Dict:
        return {"m": self.m, "ballots": [b.to_list() for b in self.ballots]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ApprovalProfile":
        try:
            m = int(data["m"])
            return cls(m, [CandidateSet.from_list(b, m) for b in data["ballots"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"invalid profile: {exc}")


def profile_to_distribution(profile: ApprovalProfile) -> VoteDistribution:
    """
    Frequency of each ballot in the profile.

    Raises:
        ParameterError: if the profile has no voters
    """
    if profile.n == 0:
        raise ParameterError("profile has no voters")
    counts = Counter(profile.ballots)
    return VoteDistribution(profile.m, {ballot: Fraction(c, profile.n) for ballot, c in counts.items()})


def distribution_to_profile(x: VoteDistribution) -> ApprovalProfile:
    """Smallest profile with distribution x: n is the LCM of the weight denominators"""
    n = lcm(*(w.denominator for _, w in x.items()))
    ballots = []
    for ballot, weight in x.items():
        ballots.extend([ballot] * int(weight * n))
    return ApprovalProfile(x.m, ballots)


def replicate_profile(profile: ApprovalProfile, copies: int) -> ApprovalProfile:
    """Every voter repeated the given number of times"""
    if copies < 1:
        raise ParameterError(f"copies must be positive, got {copies}")
    return ApprovalProfile(profile.m, [b for b in profile.ballots for _ in range(copies)])
