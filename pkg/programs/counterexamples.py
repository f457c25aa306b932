"""
Counterexample search - core-stable committees that are not priceable
Bilinear program over vote distributions joined with the pricing dual, plus a verification fallback for LP-only backends
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from config import config
from elections.candidate_sets import CandidateSet, CommitteeSpace, all_ballots, improves
from elections.core_oracle import Quota, worst_deviation
from elections.distributions import VoteDistribution
from elections.rationals import format_fraction, rationalize_weights
from errors import ParameterError
from logging_config import get_logger
from programs.priceability import (
    InfeasibilityCertificate,
    PriceabilityStatus,
    PriceKind,
    check_priceable,
    tsets,
)
from solvers.backend import BackendConfig, solve, supports_bilinear
from solvers.model import ObjectiveSense, OptModel, Sense
from solvers.relaxation import mccormick_relaxation

logger = get_logger(__name__)


@dataclass(frozen=True)
class Witness:
    """A known distribution where the first k candidates are stable but not priceable"""
    kind: PriceKind
    m: int
    k: int
    weights: Tuple[Tuple[Tuple[int, ...], Fraction], ...]

    def lift(self, m: int) -> VoteDistribution:
        """Same ballots over m >= self.m candidates; the added candidates get no approvals"""
        if m < self.m:
            raise ParameterError(f"witness needs at least {self.m} candidates")
        return VoteDistribution.from_indices(m, self.weights)


KNOWN_WITNESSES: Tuple[Witness, ...] = (
    # Droop stable, not weakly priceable
    Witness(PriceKind.WEAK, 5, 3, (
        ((1, 3), Fraction(1, 4)),
        ((1, 4), Fraction(1, 4)),
        ((3, 4), Fraction(1, 4)),
        ((0, 1, 4), Fraction(1, 4)),
    )),
    # Hare stable only, not weakly priceable
    Witness(PriceKind.WEAK, 5, 3, (
        ((1, 3), Fraction(1, 3)),
        ((1, 4), Fraction(1, 3)),
        ((0, 1, 2), Fraction(1, 6)),
        ((3, 4), Fraction(1, 6)),
    )),
    # Droop stable and weakly priceable, not Lindahl priceable
    Witness(PriceKind.LINDAHL, 4, 2, (
        ((2, 3), Fraction(1, 3)),
        ((0, 2, 3), Fraction(1, 3)),
        ((0, 1, 2, 3), Fraction(1, 3)),
    )),
)


def fixed_committee(m: int, k: int) -> CandidateSet:
    """W* = {c1, ..., ck}"""
    CommitteeSpace(m, k)
    return CandidateSet.from_indices(range(k), m)


def build_linqip(m: int, k: int, quota: Quota = Quota.HARE, kind: PriceKind = PriceKind.WEAK) -> OptModel:
    """
    min mu over a vote distribution x and pricing-dual multipliers (t, g) for W* = {c1..ck}:
    sum t/k <= 1, sum g = 1, t[c]*x[A] >= sum_{T contains c} g[A,T], and
    mu >= sigma_{W*,W'}^T x - |W'|/denom for every deviation W'.

    Raises:
        ParameterError: for invalid sizes or the Peters kind
    """
    if kind is PriceKind.PETERS:
        raise ParameterError("the counterexample program covers weak and Lindahl priceability")
    space = CommitteeSpace(m, k)
    committee = fixed_committee(m, k)
    denom = quota.denominator(k)
    model = OptModel(f"linqip_{kind.value}_m{m}_k{k}_{quota.label}")
    model.metadata.update({"m": m, "k": k, "quota": quota, "kind": kind})

    x = {ballot: model.add_variable(f"x_{ballot.variable_suffix}", 0.0, 1.0) for ballot in all_ballots(m)}
    mu = model.add_variable("mu", -math.inf, math.inf)
    t = [model.add_variable(f"t_{c}", 0.0, float(k)) for c in range(m)]
    g: Dict[Tuple[CandidateSet, CandidateSet], int] = {}
    for ballot in all_ballots(m):
        for tset in tsets(ballot, committee, kind):
            g[(ballot, tset)] = model.add_variable(f"g_{ballot.variable_suffix}__{tset.variable_suffix}", 0.0, 1.0)

    model.add_constraint("simplex", {index: 1 for index in x.values()}, Sense.EQ, 1)
    model.add_constraint("dual_value", {index: Fraction(1, k) for index in t}, Sense.LE, 1)
    model.add_constraint("normalize", {index: 1 for index in g.values()}, Sense.EQ, 1)
    for ballot in all_ballots(m):
        for c in ballot:
            coeffs = {index: Fraction(-1) for (b, tset), index in g.items() if b == ballot and c in tset}
            if not coeffs:
                continue
            model.add_constraint(f"cover_{ballot.variable_suffix}__{c}", coeffs, Sense.GE, 0,
                                 bilinear=[(t[c], x[ballot], Fraction(1))])
    for deviation_id, deviation in enumerate(space.deviations):
        coeffs = {mu: Fraction(1)}
        for ballot, index in x.items():
            if improves(ballot, committee, deviation):
                coeffs[index] = Fraction(-1)
        model.add_constraint(f"excess_{deviation_id}", coeffs, Sense.GE, -Fraction(len(deviation), denom))
    model.set_objective(ObjectiveSense.MINIMIZE, {mu: 1})
    logger.info(f"Built {model!r}")
    return model


def is_counterexample_value(value: float, quota: Quota, tolerance: float) -> bool:
    """Hare needs the optimum strictly below 0, Droop at most 0"""
    if quota is Quota.HARE:
        return value < -tolerance
    return value <= tolerance


class CounterexampleStatus(Enum):
    FOUND = "found"
    ABSENT = "absent"
    UNDECIDED = "undecided"


@dataclass
class CounterexampleResult:
    status: CounterexampleStatus
    m: int
    k: int
    quota: Quota
    kind: PriceKind
    method: str  # "global" or "candidates"
    distribution: Optional[VoteDistribution] = None
    certificate: Optional[InfeasibilityCertificate] = None
    excess: Optional[Fraction] = None  # worst deviation excess of W* at the distribution
    objective: Optional[float] = None
    lower_bound: Optional[float] = None
    checked: int = 0
    message: str = ""

    def to_dict(self) -> Dict:
        return {
            "status": self.status.value,
            "m": self.m,
            "k": self.k,
            "quota": self.quota.label,
            "kind": self.kind.value,
            "method": self.method,
            "committee": fixed_committee(self.m, self.k).to_list(),
            "distribution": self.distribution.to_dict() if self.distribution else None,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "excess": format_fraction(self.excess) if self.excess is not None else None,
            "objective": self.objective,
            "lower_bound": self.lower_bound,
            "checked": self.checked,
            "message": self.message,
        }


def confirm_counterexample(x: VoteDistribution, k: int, quota: Quota, kind: PriceKind,
                           cfg: Optional[BackendConfig] = None
                           ) -> Tuple[bool, Optional[InfeasibilityCertificate], Fraction]:
    """
    Exact confirmation that W* is stable for x and carries a verified not-priceable certificate.

    Returns:
        tuple: (confirmed, certificate or None, worst excess of W*)
    """
    committee = fixed_committee(x.m, k)
    _, excess = worst_deviation(x, committee, k, quota)
    if not quota.admits(excess):
        return False, None, excess
    result = check_priceable(x, committee, k, kind, cfg)
    if result.status is not PriceabilityStatus.NOT_PRICEABLE:
        return False, None, excess
    return True, result.certificate, excess


def candidate_witnesses(m: int, k: int, kind: PriceKind) -> List[VoteDistribution]:
    """Known witnesses of this kind and committee size that fit in m candidates"""
    return [w.lift(m) for w in KNOWN_WITNESSES if w.kind is kind and w.k == k and w.m <= m]


def relaxation_bound(model: OptModel, cfg: BackendConfig) -> Optional[float]:
    """Optimum of the McCormick relaxation, a lower bound on the bilinear program"""
    result = solve(mccormick_relaxation(model), cfg)
    return result.objective if result.ok else None


def search_counterexample(m: int, k: int, quota: Quota = Quota.HARE, kind: PriceKind = PriceKind.WEAK,
                          cfg: Optional[BackendConfig] = None,
                          candidates: Optional[Sequence[VoteDistribution]] = None) -> CounterexampleResult:
    """
    Look for x where W* = {c1..ck} is (Hare or Droop) stable but not priceable.

    A backend with bilinear support solves the program globally: an incumbent past the
    threshold is confirmed exactly, a best bound short of it proves absence, and a bound
    and incumbent on either side of it stay undecided. Otherwise the given
    candidate distributions (or the known witnesses) are confirmed one by one, and the
    McCormick relaxation bound can still prove absence.
    """
    cfg = cfg or BackendConfig.from_config()
    model = build_linqip(m, k, quota, kind)
    result = CounterexampleResult(CounterexampleStatus.UNDECIDED, m, k, quota, kind, method="candidates")

    if supports_bilinear(cfg.solver):
        result.method = "global"
        solved = solve(model, cfg)
        result.objective = solved.objective
        result.lower_bound = solved.bound
        incumbent_hits = (solved.has_incumbent and solved.objective is not None
                          and is_counterexample_value(solved.objective, quota, cfg.tolerance))
        if incumbent_hits:
            x = VoteDistribution(m, rationalize_weights(
                {b: solved.values[f"x_{b.variable_suffix}"] for b in all_ballots(m)},
                config.DENOMINATOR_CAP, cfg.tolerance))
            confirmed, cert, excess = confirm_counterexample(x, k, quota, kind, cfg)
            result.checked = 1
            if confirmed:
                result.status = CounterexampleStatus.FOUND
                result.distribution, result.certificate, result.excess = x, cert, excess
                result.message = f"incumbent {solved.objective:.6f}; counterexample confirmed exactly"
                return result
            result.message = f"incumbent {solved.objective:.6f} but the rationalized point did not confirm"
        elif solved.bound is not None and not is_counterexample_value(solved.bound, quota, cfg.tolerance):
            # absence is decided by the bound, never the incumbent
            result.status = CounterexampleStatus.ABSENT
            result.message = f"best bound {solved.bound:.6f} rules out counterexamples"
            return result
        elif solved.bound is not None and solved.objective is not None:
            result.message = (f"best bound {solved.bound:.6f} and incumbent {solved.objective:.6f} "
                              f"straddle the threshold")
        else:
            result.message = f"bilinear solve ended {solved.status.value} without a bound: {solved.message}"
        logger.warning(result.message)
        return result

    pool = list(candidates) if candidates is not None else candidate_witnesses(m, k, kind)
    for x in pool:
        if x.m != m:
            raise ParameterError(f"candidate distribution over {x.m} candidates, expected {m}")
        result.checked += 1
        confirmed, cert, excess = confirm_counterexample(x, k, quota, kind, cfg)
        if confirmed:
            result.status = CounterexampleStatus.FOUND
            result.distribution, result.certificate, result.excess = x, cert, excess
            result.message = f"candidate {result.checked} of {len(pool)} confirmed exactly"
            logger.info(f"counterexample for m={m} k={k} {quota.label} {kind.value}: {x!r}")
            return result

    result.lower_bound = relaxation_bound(model, cfg)
    if result.lower_bound is not None and not is_counterexample_value(result.lower_bound, quota, cfg.tolerance):
        result.status = CounterexampleStatus.ABSENT
        result.message = f"relaxation bound {result.lower_bound:.6f} rules out counterexamples"
    else:
        result.message = (f"{result.checked} candidates checked, none confirmed; "
                          f"relaxation bound {result.lower_bound}")
    logger.info(result.message)
    return result
