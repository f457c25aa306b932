"""
MILP encoder - search for vote distributions with the emptiest core
Builds the big-M program over all 2^m ballot frequencies, solves it and turns solver floats back into exact objects
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Tuple

from config import config
from elections.candidate_sets import CandidateSet, CommitteeSpace, all_ballots, improves
from elections.core_oracle import LeastCoreReport, Quota, least_core, support_mass
from elections.deviation_functions import DeviationFunction
from elections.distributions import VoteDistribution
from elections.rationals import format_fraction, fraction_to_pair, rationalize, rationalize_weights
from errors import IntegrityError, ParameterError
from logging_config import get_logger
from solvers.backend import BackendConfig, SolveStatus, solve
from solvers.model import ObjectiveSense, OptModel, Sense

logger = get_logger(__name__)

BIG_M = 3


def ballot_variable(ballot: CandidateSet) -> str:
    return f"x_{ballot.variable_suffix}"


def selector_variable(committee_id: int, deviation_id: int) -> str:
    return f"y_{committee_id}_{deviation_id}"


def kept_pairs(space: CommitteeSpace, max_deviation_size: Optional[int] = None
               ) -> Iterator[Tuple[int, CandidateSet, int, CandidateSet]]:
    """(committee id, W, deviation id, W') for every pair that gets a selector; W' inside W never does"""
    for committee_id, committee in enumerate(space.committees):
        for deviation_id, deviation in enumerate(space.deviations):
            if deviation.issubset(committee):
                continue
            if max_deviation_size is not None and len(deviation) > max_deviation_size:
                continue
            yield committee_id, committee, deviation_id, deviation


def build_milp(m: int, k: int, quota: Quota = Quota.HARE, big_m: int = BIG_M,
               max_deviation_size: Optional[int] = None) -> OptModel:
    """
    Max mu subject to: x on the simplex, at least one selected deviation per committee,
    and mu <= sigma_{W,W'}^T x - |W'|/denom + big_m*(1 - y[W,W']) for every kept pair.

    Args:
        m: candidate count
        k: committee size
        quota: Hare (denominator k) or Droop (k+1)
        big_m: deactivation constant; any value >= 2 is loss-free
        max_deviation_size: only deviations up to this size (1 gives singleton deviations only)

    Raises:
        ParameterError: for invalid sizes
    """
    space = CommitteeSpace(m, k)
    if max_deviation_size is not None and not 1 <= max_deviation_size <= k:
        raise ParameterError(f"deviation size cap must be in 1..{k}")
    denom = quota.denominator(k)
    model = OptModel(f"core_milp_m{m}_k{k}_{quota.label}")
    model.metadata.update({"m": m, "k": k, "quota": quota, "big_m": big_m,
                           "max_deviation_size": max_deviation_size})

    x = {ballot: model.add_variable(ballot_variable(ballot), 0.0, 1.0) for ballot in all_ballots(m)}
    mu = model.add_variable("mu", -math.inf, math.inf)
    model.add_constraint("simplex", {index: 1 for index in x.values()}, Sense.EQ, 1)

    cover: Dict[int, Dict[int, int]] = {cid: {} for cid in range(space.committee_count)}
    for committee_id, committee, deviation_id, deviation in kept_pairs(space, max_deviation_size):
        y = model.add_binary(selector_variable(committee_id, deviation_id))
        cover[committee_id][y] = 1
        coeffs = {mu: Fraction(1), y: Fraction(big_m)}
        for ballot, index in x.items():
            if improves(ballot, committee, deviation):
                coeffs[index] = Fraction(-1)
        model.add_constraint(f"excess_{committee_id}_{deviation_id}", coeffs, Sense.LE,
                             big_m - Fraction(len(deviation), denom))
    for committee_id, selectors in cover.items():
        model.add_constraint(f"cover_{committee_id}", selectors, Sense.GE, 1)

    model.set_objective(ObjectiveSense.MAXIMIZE, {mu: 1})
    logger.info(f"Built {model!r}")
    return model


@dataclass
class MilpSolution:
    """Solver output of the search program, with selectors keyed by (committee id, deviation id)"""
    space: CommitteeSpace
    quota: Quota
    status: SolveStatus
    mu: Optional[float] = None
    x: Dict[CandidateSet, float] = field(default_factory=dict)
    y: Dict[Tuple[int, int], int] = field(default_factory=dict)
    bound: Optional[float] = None
    message: str = ""
    runtime: float = 0.0

    @property
    def has_solution(self) -> bool:
        return self.mu is not None and bool(self.x)

    @property
    def gap(self) -> Optional[float]:
        if self.mu is None or self.bound is None:
            return None
        return abs(self.bound - self.mu)

    def to_dict(self) -> Dict:
        return {
            "m": self.space.m,
            "k": self.space.k,
            "quota": self.quota.label,
            "status": self.status.value,
            "mu": self.mu,
            "bound": self.bound,
            "gap": self.gap,
            "runtime": self.runtime,
            "message": self.message,
            "x": [{"ballot": b.to_list(), "value": v} for b, v in self.x.items() if abs(v) > 1e-12],
            "selected": [list(pair) for pair, v in sorted(self.y.items()) if v],
        }


def solve_search(model: OptModel, cfg: Optional[BackendConfig] = None,
                 warm_start: Optional[Mapping[str, float]] = None) -> MilpSolution:
    """
    Solve a model produced by build_milp.

    On TIME_LIMIT the incumbent (if any) and the best bound are kept; solver failures
    come back as SolveStatus.ERROR with the backend message.
    """
    cfg = cfg or BackendConfig.from_config()
    try:
        space = CommitteeSpace(model.metadata["m"], model.metadata["k"])
        quota = model.metadata["quota"]
    except KeyError:
        raise ParameterError(f"{model.name} was not built by build_milp")

    result = solve(model, cfg, warm_start)
    solution = MilpSolution(space=space, quota=quota, status=result.status, bound=result.bound,
                            message=result.message, runtime=result.runtime)
    if result.has_incumbent:
        solution.mu = result.values["mu"]
        solution.x = {b: result.values[ballot_variable(b)] for b in all_ballots(space.m)}
        for name, value in result.values.items():
            if name.startswith("y_"):
                _, committee_id, deviation_id = name.split("_")
                solution.y[(int(committee_id), int(deviation_id))] = int(round(value))
    if result.status is SolveStatus.OPTIMAL:
        logger.info(f"m={space.m} k={space.k} {quota.label}: mu* = {solution.mu:.6f}")
    else:
        logger.warning(f"m={space.m} k={space.k} {quota.label}: {result.status.value} ({result.message})")
    return solution


def rationalize_solution(sol: MilpSolution, tolerance: float = None, cap: int = None) -> VoteDistribution:
    """
    Exact distribution from the solver's x.

    Raises:
        ParameterError: if x is missing or clearly negative
    """
    if not sol.x:
        raise ParameterError("solution carries no distribution")
    tolerance = config.TOLERANCE if tolerance is None else tolerance
    cap = config.DENOMINATOR_CAP if cap is None else cap
    return VoteDistribution(sol.space.m, rationalize_weights(sol.x, cap, tolerance))


def extract_deviation_function(sol: MilpSolution) -> DeviationFunction:
    """
    The deviation selected for each committee.

    Where several selectors are 1 the deviation with the largest excess at the
    solution x wins, ties going to the lexicographically smallest index list.

    Raises:
        IntegrityError: if some committee has no selected deviation
    """
    space = sol.space
    if not sol.y:
        raise IntegrityError("solution carries no selector values")
    try:
        x = rationalize_solution(sol)
    except ParameterError as exc:
        raise IntegrityError(f"cannot rationalize solution x: {exc}")
    denom = sol.quota.denominator(space.k)

    selected: Dict[int, List[int]] = {cid: [] for cid in range(space.committee_count)}
    for (committee_id, deviation_id), value in sol.y.items():
        if value:
            selected[committee_id].append(deviation_id)

    mapping = {}
    for committee_id, committee in enumerate(space.committees):
        choices = selected[committee_id]
        if not choices:
            raise IntegrityError(f"no deviation selected for committee {committee.label()} (id {committee_id})")
        deviations = [space.deviations[did] for did in choices]
        mapping[committee] = min(
            deviations,
            key=lambda d: (-(support_mass(x, committee, d) - Fraction(len(d), denom)), d.indices)
        )
        if len(choices) > 1:
            logger.debug(f"{committee.label()}: {len(choices)} selectors set, kept {mapping[committee].label()}")
    return DeviationFunction(space, mapping)


@dataclass
class SolutionCheck:
    """Exact re-evaluation of a solver solution through the core oracle"""
    verified: bool
    mu: Optional[float]
    exact_value: Optional[Fraction] = None
    distribution: Optional[VoteDistribution] = None
    report: Optional[LeastCoreReport] = None
    message: str = ""

    def to_dict(self) -> Dict:
        return {
            "verified": self.verified,
            "mu": self.mu,
            "exact_value": fraction_to_pair(self.exact_value) if self.exact_value is not None else None,
            "exact_value_text": format_fraction(self.exact_value) if self.exact_value is not None else None,
            "distribution": self.distribution.to_dict() if self.distribution else None,
            "report": self.report.to_dict() if self.report else None,
            "message": self.message,
        }


def verify_solution(sol: MilpSolution, k: Optional[int] = None, quota: Optional[Quota] = None,
                    tolerance: Optional[float] = None, cap: Optional[int] = None) -> SolutionCheck:
    """
    Rationalize x, compute its exact least-core value and compare with mu.

    A failure to rationalize or a gap above 2*tolerance yields verified=False, never an exception.
    """
    k = sol.space.k if k is None else k
    quota = sol.quota if quota is None else quota
    tolerance = config.TOLERANCE if tolerance is None else tolerance
    if not sol.has_solution:
        return SolutionCheck(verified=False, mu=sol.mu, message=f"no solution ({sol.status.value})")
    try:
        x = rationalize_solution(sol, tolerance, cap)
    except ParameterError as exc:
        return SolutionCheck(verified=False, mu=sol.mu, message=f"rationalization failed: {exc}")

    report = least_core(x, k, quota)
    difference = abs(float(report.value) - sol.mu)
    verified = difference <= 2 * tolerance
    message = (f"exact value {format_fraction(report.value)} vs mu {sol.mu:.6f}"
               + ("" if verified else f": differs by {difference:.2e}"))
    if verified:
        logger.info(f"Verified solution: {message}")
    else:
        logger.warning(f"Verification failed: {message}")
    return SolutionCheck(verified=verified, mu=sol.mu, exact_value=report.value, distribution=x,
                         report=report, message=message)


class LowerBoundAssignment(NamedTuple):
    distribution: VoteDistribution
    deviations: DeviationFunction
    mu: Fraction


def lower_bound_assignment(m: int, k: int, quota: Quota = Quota.HARE) -> LowerBoundAssignment:
    """
    Hand-built feasible point reaching -1/(k(k+1)) (Hare) or 0 (Droop).

    B is the first k+1 candidates and x puts 1/(k+1) on each singleton of B. Every
    committee misses some member of B; D(W) is the smallest such member.
    """
    space = CommitteeSpace(m, k)
    base = CandidateSet.from_indices(range(k + 1), m)
    x = VoteDistribution(m, {CandidateSet.from_indices([c], m): Fraction(1, k + 1) for c in base})
    mapping = {}
    for committee in space.committees:
        missing = (base - committee).indices[0]
        mapping[committee] = CandidateSet.from_indices([missing], m)
    mu = Fraction(1, k + 1) - Fraction(1, quota.denominator(k))
    return LowerBoundAssignment(x, DeviationFunction(space, mapping), mu)


def assignment_values(space: CommitteeSpace, x: VoteDistribution, deviations: DeviationFunction,
                      mu: Fraction, max_deviation_size: Optional[int] = None) -> Dict[str, Fraction]:
    """Variable values of build_milp for an exact (x, D, mu); also usable as a warm start"""
    values = {ballot_variable(b): x.weight(b) for b in all_ballots(space.m)}
    values["mu"] = mu
    for committee_id, committee, deviation_id, deviation in kept_pairs(space, max_deviation_size):
        values[selector_variable(committee_id, deviation_id)] = Fraction(int(deviations[committee] == deviation))
    return values


def check_milp_assignment(space: CommitteeSpace, quota: Quota, x: VoteDistribution,
                          deviations: DeviationFunction, mu: Fraction, big_m: int = BIG_M,
                          max_deviation_size: Optional[int] = None) -> List[str]:
    """
    Exact row-by-row check of build_milp at (x, y = D, mu) without building the model.

    Also reports 'mu_not_maximal' when a larger mu would fit the same (x, y).

    Returns:
        list[str]: Names of violated rows, empty when feasible and maximal
    """
    violations = []
    if sum((w for _, w in x.items()), Fraction(0)) != 1:
        violations.append("simplex")
    denom = quota.denominator(space.k)
    tightest = None
    for committee_id, committee in enumerate(space.committees):
        chosen = deviations[committee]
        if chosen.issubset(committee) or (max_deviation_size is not None and len(chosen) > max_deviation_size):
            violations.append(f"cover_{committee_id}")
            continue
        for deviation_id, deviation in enumerate(space.deviations):
            if deviation.issubset(committee):
                continue
            if max_deviation_size is not None and len(deviation) > max_deviation_size:
                continue
            entitlement = Fraction(len(deviation), denom)
            if deviation != chosen:
                # support mass is nonnegative, so mu <= big_m - |W'|/denom settles the row
                if mu <= big_m - entitlement:
                    continue
                slack = big_m
            else:
                slack = 0
            excess = support_mass(x, committee, deviation) - entitlement
            if mu > excess + slack:
                violations.append(f"excess_{committee_id}_{deviation_id}")
            if deviation == chosen:
                tightest = excess if tightest is None else min(tightest, excess)
    if not violations and tightest is not None and mu < tightest:
        violations.append("mu_not_maximal")
    return violations


def solution_from_assignment(space: CommitteeSpace, quota: Quota, x: VoteDistribution,
                             deviations: DeviationFunction, mu: Fraction,
                             extra_selectors: Optional[List[Tuple[int, int]]] = None) -> MilpSolution:
    """A MilpSolution carrying an exact assignment as floats, as a solver would report it"""
    y = {}
    for committee_id, committee, deviation_id, deviation in kept_pairs(space):
        y[(committee_id, deviation_id)] = int(deviations[committee] == deviation)
    for pair in extra_selectors or []:
        y[pair] = 1
    return MilpSolution(space=space, quota=quota, status=SolveStatus.OPTIMAL, mu=float(mu),
                        x={b: float(x.weight(b)) for b in all_ballots(space.m)}, y=y, bound=float(mu),
                        message="constructed assignment")


def build_fixed_deviation_lp(m: int, k: int, deviations: DeviationFunction,
                             quota: Quota = Quota.HARE) -> OptModel:
    """
    The search program with every selector fixed by D: max mu over x on the simplex with
    mu <= sigma_{W,D(W)}^T x - |D(W)|/denom for each committee.
    """
    space = CommitteeSpace(m, k)
    if deviations.space != space:
        raise ParameterError("deviation function does not match (m, k)")
    denom = quota.denominator(k)
    model = OptModel(f"fixed_deviation_lp_m{m}_k{k}_{quota.label}")
    model.metadata.update({"m": m, "k": k, "quota": quota})
    x = {ballot: model.add_variable(ballot_variable(ballot), 0.0, 1.0) for ballot in all_ballots(m)}
    mu = model.add_variable("mu", -math.inf, math.inf)
    model.add_constraint("simplex", {index: 1 for index in x.values()}, Sense.EQ, 1)
    for committee_id, committee in enumerate(space.committees):
        deviation = deviations[committee]
        coeffs = {mu: Fraction(1)}
        for ballot, index in x.items():
            if improves(ballot, committee, deviation):
                coeffs[index] = Fraction(-1)
        model.add_constraint(f"excess_{committee_id}", coeffs, Sense.LE, -Fraction(len(deviation), denom))
    model.set_objective(ObjectiveSense.MAXIMIZE, {mu: 1})
    return model


def rationalized_mu(sol: MilpSolution, cap: Optional[int] = None) -> Optional[Fraction]:
    """Closest small fraction to mu, for display next to the float"""
    if sol.mu is None:
        return None
    return rationalize(sol.mu, cap or 10_000)
