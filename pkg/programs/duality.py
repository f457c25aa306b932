"""
Dual programs per deviation function
Builds the committee-lottery dual, constructs feasible dual certificates and verifies them exactly
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from elections.candidate_sets import CandidateSet, CommitteeSpace, all_ballots, improves
from elections.core_oracle import Quota
from elections.deviation_functions import DeviationFunction
from elections.rationals import format_fraction, fraction_from_pair, fraction_to_pair
from errors import CertificateViolation, ParameterError
from logging_config import get_logger
from solvers.backend import BackendConfig, SolveResult, solve
from solvers.model import ObjectiveSense, OptModel, Sense

logger = get_logger(__name__)


@dataclass
class DualCertificate:
    """
    A lottery q over k-committees plus the load bound u.

    construction records which builder produced it ('singleton-chain', 'case-1',
    'case-2' or '' for external certificates).
    """
    q: Dict[CandidateSet, Fraction]
    u: Fraction
    construction: str = ""

    def to_dict(self) -> Dict:
        return {
            "q": [[w.to_list(), *fraction_to_pair(p)] for w, p in self.q.items()],
            "u": fraction_to_pair(self.u),
            "construction": self.construction,
        }

    @classmethod
    def from_dict(cls, data: Mapping, m: int) -> "DualCertificate":
        try:
            q: Dict[CandidateSet, Fraction] = {}
            for committee, num, den in data["q"]:
                key = CandidateSet.from_list(committee, m)
                q[key] = q.get(key, Fraction(0)) + fraction_from_pair((num, den))
            return cls(q=q, u=fraction_from_pair(data["u"]), construction=data.get("construction", ""))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"invalid certificate file: {exc}")


def _check_deviations(m: int, k: int, deviations: DeviationFunction) -> CommitteeSpace:
    space = CommitteeSpace(m, k)
    if not isinstance(deviations, DeviationFunction) or deviations.space != space:
        raise ParameterError(f"deviation function must be total over the {k}-committees of {m} candidates")
    return space


def build_dlp(m: int, k: int, deviations: DeviationFunction, quota: Quota = Quota.HARE) -> OptModel:
    """
    min u - sum_W (|D(W)|/denom) q[W]  over q on the simplex, with
    sum_{W: A prefers D(W) to W} q[W] <= u for each of the 2^m ballots A.

    Raises:
        ParameterError: if D is not total over M_k
    """
    space = _check_deviations(m, k, deviations)
    denom = quota.denominator(k)
    model = OptModel(f"core_dlp_m{m}_k{k}_{quota.label}")
    model.metadata.update({"m": m, "k": k, "quota": quota})

    q = [model.add_variable(f"q_{cid}") for cid in range(space.committee_count)]
    u = model.add_variable("u", -math.inf, math.inf)
    model.add_constraint("simplex", {index: 1 for index in q}, Sense.EQ, 1)
    for ballot in all_ballots(m):
        coeffs = {u: Fraction(-1)}
        for cid, committee in enumerate(space.committees):
            if improves(ballot, committee, deviations[committee]):
                coeffs[q[cid]] = Fraction(1)
        model.add_constraint(f"ballot_{ballot.variable_suffix}", coeffs, Sense.LE, 0)

    objective = {u: Fraction(1)}
    for cid, committee in enumerate(space.committees):
        objective[q[cid]] = -Fraction(len(deviations[committee]), denom)
    model.set_objective(ObjectiveSense.MINIMIZE, objective)
    logger.debug(f"Built {model!r}")
    return model


def solve_dlp(m: int, k: int, deviations: DeviationFunction, quota: Quota = Quota.HARE,
              cfg: Optional[BackendConfig] = None) -> SolveResult:
    return solve(build_dlp(m, k, deviations, quota), cfg or BackendConfig.from_config())


def _complete(required: CandidateSet, k: int) -> CandidateSet:
    """required filled up to size k with the smallest-index candidates outside it"""
    committee = required
    candidate = 0
    while len(committee) < k:
        if candidate not in committee:
            committee = committee.with_candidate(candidate)
        candidate += 1
    return committee


def certificate_singleton(m: int, k: int, deviations: DeviationFunction,
                          quota: Quota = Quota.HARE) -> DualCertificate:
    """
    Certificate for a D whose deviations are singletons except at most one committee W*.

    The chain starts at W*, and each later committee contains every deviation
    chosen so far, completed with the smallest-index candidates. A ballot can prefer
    the deviation at no more than one chain position, so the uniform lottery over the
    k+2-t positions has load at most 1/(k+2-t), where t = |D(W*)|.

    Raises:
        ParameterError: if more than one committee has a non-singleton deviation
    """
    space = _check_deviations(m, k, deviations)
    exception = deviations.singleton_exception()
    start = exception if exception is not None else space.committees[0]
    t = len(deviations[start])
    length = k + 2 - t
    weight = Fraction(1, length)

    chain = [start]
    covered = deviations[start]
    while len(chain) < length:
        committee = _complete(covered, k)
        chain.append(committee)
        covered = covered | deviations[committee]

    q: Dict[CandidateSet, Fraction] = {}
    for committee in chain:
        q[committee] = q.get(committee, Fraction(0)) + weight
    logger.debug(f"singleton chain of length {length} (t={t}) over {len(q)} distinct committees")
    return DualCertificate(q=q, u=weight, construction="singleton-chain")


def certificate_kplusone(m: int, deviations: DeviationFunction, quota: Quota = Quota.HARE) -> DualCertificate:
    """
    Certificate for committees of size m-1, where W^(j) leaves out candidate c_j.

    If some D(W^(j)) lies inside W^(j) nobody prefers it and the lottery on W^(j)
    alone has load 0. Otherwise c_j is in D(W^(j)) for every j, and the chain picks
    W^(j) for the smallest c_j not yet covered until the deviations cover every
    candidate; the uniform lottery over the chain has load at most 1/T.

    Raises:
        ParameterError: if D is not over committees of size m-1
    """
    if deviations.k != m - 1:
        raise ParameterError(f"committee size must be m-1 = {m - 1}, got k={deviations.k}")
    space = _check_deviations(m, m - 1, deviations)
    full = CandidateSet.full(m)
    leave_out = {j: full - CandidateSet.from_indices([j], m) for j in range(m)}

    for j in range(m):
        if deviations[leave_out[j]].issubset(leave_out[j]):
            return DualCertificate(q={leave_out[j]: Fraction(1)}, u=Fraction(0), construction="case-1")

    chain = [leave_out[0]]
    covered = deviations[leave_out[0]]
    while covered != full:
        j = (full - covered).indices[0]
        chain.append(leave_out[j])
        covered = covered | deviations[leave_out[j]]
    weight = Fraction(1, len(chain))
    logger.debug(f"k=m-1 chain of length {len(chain)} for m={space.m}")
    return DualCertificate(q={committee: weight for committee in chain}, u=weight, construction="case-2")


def ballot_loads(q: Mapping[CandidateSet, Fraction], deviations: DeviationFunction) -> List[Tuple[CandidateSet, Fraction]]:
    """Probability mass of committees whose deviation the ballot prefers, for every ballot"""
    loads = []
    for ballot in all_ballots(deviations.m):
        load = sum((p for w, p in q.items() if improves(ballot, w, deviations[w])), Fraction(0))
        loads.append((ballot, load))
    return loads


def certificate_objective(cert: DualCertificate, deviations: DeviationFunction, quota: Quota) -> Fraction:
    denom = quota.denominator(deviations.k)
    return cert.u - sum((p * Fraction(len(deviations[w]), denom) for w, p in cert.q.items()), Fraction(0))


def verify_certificate(cert: DualCertificate, deviations: DeviationFunction, m: int, k: int,
                       quota: Quota = Quota.HARE) -> Fraction:
    """
    Exact feasibility check; returns the objective, an upper bound on the search value for D.

    Raises:
        CertificateViolation: naming the first ballot whose load exceeds u, or the
            malformed part of q
        ParameterError: if D does not match (m, k)
    """
    space = _check_deviations(m, k, deviations)
    for committee, p in cert.q.items():
        if committee.m != m or len(committee) != k:
            raise CertificateViolation(f"q has mass on {committee.label()}, which is not a {k}-committee")
        if p < 0:
            raise CertificateViolation(f"q[{committee.label()}] = {format_fraction(p)} is negative")
    total = sum(cert.q.values(), Fraction(0))
    if total != 1:
        raise CertificateViolation(f"q sums to {format_fraction(total)}, expected 1")

    for ballot, load in ballot_loads(cert.q, deviations):
        if load > cert.u:
            raise CertificateViolation(
                f"ballot {ballot.label()} load {format_fraction(load)} exceeds u = {format_fraction(cert.u)}",
                ballot=ballot, load=load, bound=cert.u
            )
    objective = certificate_objective(cert, deviations, quota)
    logger.info(f"Certificate verified on {space.committee_count} committees: objective {format_fraction(objective)}")
    return objective


def tighten_certificate(cert: DualCertificate, deviations: DeviationFunction) -> DualCertificate:
    """Same lottery with u lowered to the exact maximum ballot load"""
    u = max(load for _, load in ballot_loads(cert.q, deviations))
    return DualCertificate(q=dict(cert.q), u=u, construction=cert.construction)
