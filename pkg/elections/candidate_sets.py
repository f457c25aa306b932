"""
Candidate sets - bitmask subsets of {c1..cm}
Enumerates committees and deviations and decides which ballots a deviation improves
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, Iterable, List, Tuple

from errors import ParameterError

# Candidate sets are single machine words
MAX_CANDIDATES = 64


def _check_m(m: int):
    if not isinstance(m, int) or m < 1 or m > MAX_CANDIDATES:
        raise ParameterError(f"candidate count must be in 1..{MAX_CANDIDATES}, got {m}")


@dataclass(frozen=True)
class CandidateSet:
    """
    A subset of the m candidates stored as a bit pattern.

    Bit i set means candidate c_{i+1} is in the set. JSON uses the sorted 0-based
    indices; human-readable text uses the 1-based labels c1..cm.
    """
    mask: int
    m: int

    def __post_init__(self):
        _check_m(self.m)
        if self.mask < 0 or self.mask >> self.m:
            raise ParameterError(f"mask {self.mask:#x} uses bits beyond m={self.m}")

    @classmethod
    def from_indices(cls, indices: Iterable[int], m: int) -> "CandidateSet":
        """Build a set from 0-based candidate indices"""
        mask = 0
        for i in indices:
            if not 0 <= i < m:
                raise ParameterError(f"candidate index {i} out of range for m={m}")
            mask |= 1 << i
        return cls(mask, m)

    @classmethod
    def empty(cls, m: int) -> "CandidateSet":
        return cls(0, m)

    @classmethod
    def full(cls, m: int) -> "CandidateSet":
        return cls((1 << m) - 1, m)

    @property
    def indices(self) -> Tuple[int, ...]:
        """Sorted 0-based member indices"""
        return tuple(i for i in range(self.m) if self.mask >> i & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, candidate: int) -> bool:
        return bool(self.mask >> candidate & 1)

    def __iter__(self):
        return iter(self.indices)

    def _same_space(self, other: "CandidateSet"):
        if self.m != other.m:
            raise ParameterError(f"sets over different candidate counts ({self.m} vs {other.m})")

    def __and__(self, other: "CandidateSet") -> "CandidateSet":
        self._same_space(other)
        return CandidateSet(self.mask & other.mask, self.m)

    def __or__(self, other: "CandidateSet") -> "CandidateSet":
        self._same_space(other)
        return CandidateSet(self.mask | other.mask, self.m)

    def __sub__(self, other: "CandidateSet") -> "CandidateSet":
        self._same_space(other)
        return CandidateSet(self.mask & ~other.mask, self.m)

    def overlap(self, other: "CandidateSet") -> int:
        """|self ∩ other|"""
        return (self.mask & other.mask).bit_count()

    def issubset(self, other: "CandidateSet") -> bool:
        return self.mask & ~other.mask == 0

    def with_candidate(self, candidate: int) -> "CandidateSet":
        return CandidateSet(self.mask | 1 << candidate, self.m)

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Size first, then lexicographic on sorted indices"""
        return (len(self), self.indices)

    @property
    def variable_suffix(self) -> str:
        """Indices joined by '_' as used in model variable names ('empty' for the empty set)"""
        if self.mask == 0:
            return "empty"
        return "_".join(str(i) for i in self.indices)

    def label(self) -> str:
        """Human-readable form such as {c2,c4}"""
        return "{" + ",".join(f"c{i + 1}" for i in self.indices) + "}"

    def to_list(self) -> List[int]:
        return list(self.indices)

    @classmethod
    def from_list(cls, data: Iterable[int], m: int) -> "CandidateSet":
        indices = list(data)
        if len(set(indices)) != len(indices):
            raise ParameterError(f"duplicate candidate indices in {indices}")
        return cls.from_indices(indices, m)

    def __repr__(self):
        return f"CandidateSet({self.label()}, m={self.m})"


@dataclass(frozen=True)
class CommitteeSpace:
    """
    The committees M_k and deviations M_{<=k} over m candidates.

    Committee ids are positions in enumerate_committees order and deviation ids
    are positions in enumerate_deviations order; both name model variables.
    """
    m: int
    k: int

    def __post_init__(self):
        _check_m(self.m)
        if not isinstance(self.k, int) or not 0 < self.k < self.m:
            raise ParameterError(f"committee size must satisfy 0 < k < m, got m={self.m}, k={self.k}")

    @property
    def committee_count(self) -> int:
        return comb(self.m, self.k)

    @property
    def deviation_count(self) -> int:
        return sum(comb(self.m, size) for size in range(1, self.k + 1))

    @property
    def committees(self) -> Tuple[CandidateSet, ...]:
        return _committees(self.m, self.k)

    @property
    def deviations(self) -> Tuple[CandidateSet, ...]:
        return _deviations(self.m, self.k)

    def committee_id(self, committee: CandidateSet) -> int:
        try:
            return _committee_ids(self.m, self.k)[committee]
        except KeyError:
            raise ParameterError(f"{committee.label()} is not a {self.k}-committee over {self.m} candidates")

    def deviation_id(self, deviation: CandidateSet) -> int:
        try:
            return _deviation_ids(self.m, self.k)[deviation]
        except KeyError:
            raise ParameterError(f"{deviation.label()} is not a deviation of size 1..{self.k}")


# Enumerations are cached per (m, k); sets are immutable so sharing is safe
_CACHE: Dict[Tuple[str, int, int], object] = {}


def _cached(kind, m, k, build):
    key = (kind, m, k)
    if key not in _CACHE:
        _CACHE[key] = build()
    return _CACHE[key]


def _committees(m, k):
    return _cached("committees", m, k, lambda: tuple(
        CandidateSet.from_indices(combo, m) for combo in combinations(range(m), k)
    ))


def _deviations(m, k):
    return _cached("deviations", m, k, lambda: tuple(
        CandidateSet.from_indices(combo, m)
        for size in range(1, k + 1)
        for combo in combinations(range(m), size)
    ))


def _committee_ids(m, k):
    return _cached("committee_ids", m, k, lambda: {w: i for i, w in enumerate(_committees(m, k))})


def _deviation_ids(m, k):
    return _cached("deviation_ids", m, k, lambda: {d: i for i, d in enumerate(_deviations(m, k))})


def enumerate_committees(space: CommitteeSpace) -> Tuple[CandidateSet, ...]:
    """
    All size-k subsets, each once, in lexicographic order of sorted index lists.

    Examples:
        >>> [w.to_list() for w in enumerate_committees(CommitteeSpace(3, 2))]
        [[0, 1], [0, 2], [1, 2]]
    """
    return space.committees


def enumerate_deviations(space: CommitteeSpace) -> Tuple[CandidateSet, ...]:
    """All subsets of size 1..k, sizes ascending, lexicographic within a size"""
    return space.deviations


def all_ballots(m: int) -> Tuple[CandidateSet, ...]:
    """All 2^m ballots (the empty ballot included) in mask order"""
    _check_m(m)
    return _cached("ballots", m, 0, lambda: tuple(CandidateSet(mask, m) for mask in range(1 << m)))


def improves(ballot: CandidateSet, committee: CandidateSet, deviation: CandidateSet) -> bool:
    """True iff the ballot approves strictly more members of the deviation than of the committee"""
    return (ballot.mask & deviation.mask).bit_count() > (ballot.mask & committee.mask).bit_count()


def parse_committee(text: str, m: int) -> CandidateSet:
    """Parse a comma-separated list of 0-based indices such as '0,1,2'"""
    try:
        indices = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParameterError(f"committee must be comma-separated indices, got {text!r}")
    return CandidateSet.from_list(indices, m)
