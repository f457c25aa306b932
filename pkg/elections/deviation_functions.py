"""
Deviation functions - one deviation assigned to every k-committee
"""

from typing import Dict, Iterator, Mapping, Optional, Tuple

from elections.candidate_sets import CandidateSet, CommitteeSpace
from errors import ParameterError


class DeviationFunction:
    """
    Total map from the k-committees of a CommitteeSpace to deviations of size 1..k.

    Iteration follows committee id order.
    """

    def __init__(self, space: CommitteeSpace, mapping: Mapping[CandidateSet, CandidateSet]):
        self.space = space
        missing = [w for w in space.committees if w not in mapping]
        if missing:
            raise ParameterError(
                f"deviation function is partial: {len(missing)} committees unassigned, first {missing[0].label()}"
            )
        extra = set(mapping) - set(space.committees)
        if extra:
            raise ParameterError(f"{next(iter(extra)).label()} is not a {space.k}-committee")
        for committee, deviation in mapping.items():
            if deviation.m != space.m or not 1 <= len(deviation) <= space.k:
                raise ParameterError(
                    f"D({committee.label()}) = {deviation.label()} must have size 1..{space.k}"
                )
        self._mapping = {w: mapping[w] for w in space.committees}

    @property
    def m(self) -> int:
        return self.space.m

    @property
    def k(self) -> int:
        return self.space.k

    def __getitem__(self, committee: CandidateSet) -> CandidateSet:
        return self._mapping[committee]

    def by_id(self, committee_id: int) -> CandidateSet:
        return self._mapping[self.space.committees[committee_id]]

    def items(self) -> Iterator[Tuple[CandidateSet, CandidateSet]]:
        return iter(self._mapping.items())

    def non_singletons(self) -> Dict[CandidateSet, CandidateSet]:
        return {w: d for w, d in self._mapping.items() if len(d) != 1}

    def singleton_exception(self) -> Optional[CandidateSet]:
        """
        The committee whose deviation is not a singleton, when there is exactly one.

        Raises:
            ParameterError: if more than one committee has a non-singleton deviation
        """
        others = self.non_singletons()
        if len(others) > 1:
            labels = ", ".join(w.label() for w in list(others)[:3])
            raise ParameterError(f"{len(others)} committees have non-singleton deviations ({labels}, ...)")
        return next(iter(others), None)

    def __eq__(self, other):
        if not isinstance(other, DeviationFunction):
            return NotImplemented
        return self.space == other.space and self._mapping == other._mapping

    def __repr__(self):
        return f"DeviationFunction(m={self.m}, k={self.k}, non_singletons={len(self.non_singletons())})"

    def to_dict(self) -> Dict:
        return {
            "m": self.m,
            "k": self.k,
            "deviations": [
                {"committee": w.to_list(), "deviation": d.to_list()}
                for w, d in self._mapping.items()
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "DeviationFunction":
        try:
            space = CommitteeSpace(int(data["m"]), int(data["k"]))
            mapping = {}
            for entry in data["deviations"]:
                committee = CandidateSet.from_list(entry["committee"], space.m)
                if committee in mapping:
                    raise ParameterError(f"committee {committee.label()} assigned twice")
                mapping[committee] = CandidateSet.from_list(entry["deviation"], space.m)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"invalid deviation function file: {exc}")
        return cls(space, mapping)
