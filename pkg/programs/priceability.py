"""
Priceability checks - weak, Lindahl and Peters price systems
Solves the pricing LPs and turns their solutions into exactly verified price systems or infeasibility certificates
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Tuple

from config import config
from elections.candidate_sets import CandidateSet, CommitteeSpace
from elections.distributions import VoteDistribution
from elections.rationals import (
    format_fraction,
    fraction_from_pair,
    fraction_to_pair,
    rationalize,
    rationalize_weights,
)
from errors import CertificateViolation, ParameterError
from logging_config import get_logger
from solvers.backend import BackendConfig, SolveResult, SolveStatus, solve
from solvers.model import ObjectiveSense, OptModel, Sense

logger = get_logger(__name__)

# Any price above 1 makes every affordability row hold for ballots nobody casts
OFF_SUPPORT_PRICE = Fraction(11, 10)

# Upper bound on epsilon in the pricing LP; any value above 1 already proves priceability
EPSILON_CAP = 2


class PriceKind(Enum):
    WEAK = "weak"
    LINDAHL = "lindahl"
    PETERS = "peters"

    @classmethod
    def parse(cls, text: str) -> "PriceKind":
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ParameterError(f"unknown priceability kind {text!r}, expected weak, lindahl or peters")


class PriceabilityStatus(Enum):
    PRICEABLE = "priceable"
    NOT_PRICEABLE = "not_priceable"
    UNDECIDED = "undecided"


def _check_instance(x: VoteDistribution, committee: CandidateSet, k: int):
    CommitteeSpace(x.m, k)
    if committee.m != x.m or len(committee) != k:
        raise ParameterError(f"committee {committee.label()} must be a {k}-committee over {x.m} candidates")


def tsets(ballot: CandidateSet, committee: CandidateSet, kind: PriceKind) -> List[CandidateSet]:
    """
    Sets a voter with this ballot must not be able to afford.

    Weak: {d} plus the approved members of W, for each approved d outside W.
    Lindahl: every T inside the ballot with |T| = |A∩W| + 1; larger or wider sets
    only add nonnegative prices to one of these.

    Examples:
        >>> a = CandidateSet.from_indices([1, 3], 5)
        >>> w = CandidateSet.from_indices([0, 1, 2], 5)
        >>> [t.label() for t in tsets(a, w, PriceKind.WEAK)]
        ['{c2,c4}']
    """
    inside = ballot & committee
    if kind is PriceKind.WEAK:
        return [inside.with_candidate(d) for d in (ballot - committee).indices]
    if kind is PriceKind.LINDAHL:
        size = len(inside) + 1
        return [CandidateSet.from_indices(combo, ballot.m) for combo in combinations(ballot.indices, size)]
    raise ParameterError(f"{kind.value} priceability has no affordability sets")


def all_improving_sets(ballot: CandidateSet, committee: CandidateSet) -> List[CandidateSet]:
    """Every T over the m candidates with |A∩T| > |A∩W|; the unreduced Lindahl family"""
    m = ballot.m
    bar = ballot.overlap(committee)
    return [CandidateSet(mask, m) for mask in range(1 << m) if ballot.overlap(CandidateSet(mask, m)) > bar]


# ============================================================================
# RESULT TYPES
# ============================================================================

def _context_to_dict(kind: PriceKind, x: VoteDistribution, committee: CandidateSet, k: int) -> Dict:
    return {"kind": kind.value, "k": k, "committee": committee.to_list(), "instance": x.to_dict()}


def _context_from_dict(data: Mapping) -> Tuple[PriceKind, VoteDistribution, CandidateSet, int]:
    try:
        x = VoteDistribution.from_dict(data["instance"])
        return PriceKind.parse(data["kind"]), x, CandidateSet.from_list(data["committee"], x.m), int(data["k"])
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"priceability file lacks its instance context: {exc}")


@dataclass
class PriceSystem:
    """
    Prices p[A, c] for ballots A in the support of x and candidates c in A.

    Every other pair is 0, except ballots outside the support which pay
    off_support_price for each approved candidate.
    """
    kind: PriceKind
    x: VoteDistribution
    committee: CandidateSet
    k: int
    prices: Dict[Tuple[CandidateSet, int], Fraction]
    off_support_price: Fraction = OFF_SUPPORT_PRICE

    def price(self, ballot: CandidateSet, candidate: int) -> Fraction:
        if self.x.weight(ballot) == 0:
            return self.off_support_price if candidate in ballot else Fraction(0)
        return self.prices.get((ballot, candidate), Fraction(0))

    def load(self, candidate: int) -> Fraction:
        """sum_A x[A] * p[A, c]"""
        return sum((w * self.price(ballot, candidate) for ballot, w in self.x.items()), Fraction(0))

    def to_dict(self) -> Dict:
        data = _context_to_dict(self.kind, self.x, self.committee, self.k)
        data["off_support_price"] = fraction_to_pair(self.off_support_price)
        data["prices"] = [
            {"ballot": ballot.to_list(), "candidate": c, "price": fraction_to_pair(p)}
            for (ballot, c), p in sorted(self.prices.items(), key=lambda item: (item[0][0].mask, item[0][1]))
        ]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "PriceSystem":
        kind, x, committee, k = _context_from_dict(data)
        try:
            prices = {
                (CandidateSet.from_list(entry["ballot"], x.m), int(entry["candidate"])): fraction_from_pair(entry["price"])
                for entry in data["prices"]
            }
            off = fraction_from_pair(data.get("off_support_price", fraction_to_pair(OFF_SUPPORT_PRICE)))
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"invalid price system file: {exc}")
        return cls(kind=kind, x=x, committee=committee, k=k, prices=prices, off_support_price=off)


@dataclass
class InfeasibilityCertificate:
    """
    Multipliers t on the per-candidate budget rows and g on the affordability rows.

    g sums to 1 and sum_c t[c]/k <= 1; adding the budget rows scaled by t to the
    affordability rows scaled by -g yields 0 < 0 or worse.
    """
    kind: PriceKind
    x: VoteDistribution
    committee: CandidateSet
    k: int
    t: Dict[int, Fraction]
    g: Dict[Tuple[CandidateSet, CandidateSet], Fraction]

    @property
    def value(self) -> Fraction:
        """(1/k) * sum_c t[c]; at most 1 for a valid certificate"""
        return sum(self.t.values(), Fraction(0)) / self.k

    def to_dict(self) -> Dict:
        data = _context_to_dict(self.kind, self.x, self.committee, self.k)
        data["t"] = [{"candidate": c, "value": fraction_to_pair(v)} for c, v in sorted(self.t.items())]
        data["g"] = [
            {"ballot": ballot.to_list(), "tset": tset.to_list(), "value": fraction_to_pair(v)}
            for (ballot, tset), v in sorted(self.g.items(), key=lambda item: (item[0][0].mask, item[0][1].sort_key()))
        ]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "InfeasibilityCertificate":
        kind, x, committee, k = _context_from_dict(data)
        try:
            t = {int(entry["candidate"]): fraction_from_pair(entry["value"]) for entry in data["t"]}
            g = {}
            for entry in data["g"]:
                key = (CandidateSet.from_list(entry["ballot"], x.m), CandidateSet.from_list(entry["tset"], x.m))
                g[key] = g.get(key, Fraction(0)) + fraction_from_pair(entry["value"])
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"invalid infeasibility certificate file: {exc}")
        return cls(kind=kind, x=x, committee=committee, k=k, t=t, g=g)


@dataclass
class PetersPayment:
    """
    Price r (in units of the Hare quota) and payments f[A, c] for ballots in the
    support, shared by every voter casting the same ballot.
    """
    x: VoteDistribution
    committee: CandidateSet
    k: int
    r: Fraction
    f: Dict[Tuple[CandidateSet, int], Fraction]

    @property
    def per_voter_price(self) -> Fraction:
        """r' = r/k, the price as a share of the whole electorate"""
        return self.r / self.k

    def spent(self, ballot: CandidateSet) -> Fraction:
        return sum((v for (b, _), v in self.f.items() if b == ballot), Fraction(0))

    def to_dict(self) -> Dict:
        data = _context_to_dict(PriceKind.PETERS, self.x, self.committee, self.k)
        data["r"] = fraction_to_pair(self.r)
        data["f"] = [
            {"ballot": ballot.to_list(), "candidate": c, "value": fraction_to_pair(v)}
            for (ballot, c), v in sorted(self.f.items(), key=lambda item: (item[0][0].mask, item[0][1]))
        ]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "PetersPayment":
        _, x, committee, k = _context_from_dict(data)
        try:
            f = {
                (CandidateSet.from_list(entry["ballot"], x.m), int(entry["candidate"])): fraction_from_pair(entry["value"])
                for entry in data["f"]
            }
            r = fraction_from_pair(data["r"])
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"invalid payment file: {exc}")
        return cls(x=x, committee=committee, k=k, r=r, f=f)


@dataclass
class PriceabilityResult:
    """
    Outcome of one priceability check.

    PRICEABLE carries a verified price system (or Peters payment), NOT_PRICEABLE a
    verified infeasibility certificate (or, for Peters, a reason), UNDECIDED neither.
    """
    status: PriceabilityStatus
    kind: PriceKind
    price_system: Optional[PriceSystem] = None
    certificate: Optional[InfeasibilityCertificate] = None
    payment: Optional[PetersPayment] = None
    lp_value: Optional[float] = None
    dual_value: Optional[float] = None
    message: str = ""
    backend_error: bool = False

    @property
    def priceable(self) -> Optional[bool]:
        if self.status is PriceabilityStatus.UNDECIDED:
            return None
        return self.status is PriceabilityStatus.PRICEABLE

    @property
    def evidence(self):
        return self.price_system or self.certificate or self.payment

    def to_dict(self) -> Dict:
        evidence = self.evidence
        return {
            "status": self.status.value,
            "kind": self.kind.value,
            "lp_value": self.lp_value,
            "dual_value": self.dual_value,
            "message": self.message,
            "evidence": evidence.to_dict() if evidence is not None else None,
        }


# ============================================================================
# EXACT VERIFICATION
# ============================================================================

def _price_violation(prices: PriceSystem) -> Optional[str]:
    x, committee, k = prices.x, prices.committee, prices.k
    if prices.off_support_price <= 1:
        return f"off-support price {format_fraction(prices.off_support_price)} must exceed 1"
    for (ballot, candidate), p in prices.prices.items():
        if p < 0:
            return f"p[{ballot.label()},c{candidate + 1}] = {format_fraction(p)} is negative"
    for candidate in range(x.m):
        load = prices.load(candidate)
        if load > Fraction(1, k):
            return f"candidate c{candidate + 1} collects {format_fraction(load)} > 1/{k}"
    for ballot, _ in x.items():
        for tset in tsets(ballot, committee, prices.kind):
            total = sum((prices.price(ballot, c) for c in tset), Fraction(0))
            if total <= 1:
                return f"ballot {ballot.label()} affords {tset.label()} at {format_fraction(total)}"
    return None


def verify_price_system(prices: PriceSystem) -> bool:
    """Exact check of the budget rows (<= 1/k per candidate) and the strict affordability rows (> 1)"""
    if prices.kind is PriceKind.PETERS:
        raise ParameterError("Peters payments are checked with verify_peters_payment")
    _check_instance(prices.x, prices.committee, prices.k)
    violation = _price_violation(prices)
    if violation:
        logger.debug(f"price system rejected: {violation}")
    return violation is None


def _certificate_violation(cert: InfeasibilityCertificate) -> Optional[str]:
    x, committee, k = cert.x, cert.committee, cert.k
    if any(v < 0 for v in cert.t.values()) or any(v < 0 for v in cert.g.values()):
        return "negative multiplier"
    if any(not 0 <= c < x.m for c in cert.t):
        return "multiplier on an unknown candidate"
    if sum(cert.g.values(), Fraction(0)) != 1:
        return f"g sums to {format_fraction(sum(cert.g.values(), Fraction(0)))}, expected 1"
    if cert.value > 1:
        return f"sum t / k = {format_fraction(cert.value)} exceeds 1"

    by_ballot: Dict[CandidateSet, Dict[CandidateSet, Fraction]] = {}
    for (ballot, tset), v in cert.g.items():
        if cert.kind is PriceKind.WEAK:
            valid = tset in tsets(ballot, committee, PriceKind.WEAK)
        else:
            valid = tset.issubset(ballot) and len(tset) > ballot.overlap(committee)
        if not valid:
            return f"{tset.label()} is not an affordability set of ballot {ballot.label()}"
        by_ballot.setdefault(ballot, {})[tset] = v

    for ballot, rows in by_ballot.items():
        for candidate in ballot:
            demand = sum((v for tset, v in rows.items() if candidate in tset), Fraction(0))
            supply = cert.t.get(candidate, Fraction(0)) * x.weight(ballot)
            if supply < demand:
                return (f"ballot {ballot.label()}, c{candidate + 1}: t*x = {format_fraction(supply)} "
                        f"< {format_fraction(demand)}")
    return None


def verify_infeasibility_certificate(cert: InfeasibilityCertificate) -> bool:
    """Exact check that (t, g) is feasible for the pricing dual with value at most 1"""
    _check_instance(cert.x, cert.committee, cert.k)
    violation = _certificate_violation(cert)
    if violation:
        logger.debug(f"infeasibility certificate rejected: {violation}")
    return violation is None


def _peters_violation(payment: PetersPayment) -> Optional[str]:
    x, committee = payment.x, payment.committee
    r = payment.per_voter_price
    if r <= 0:
        return f"price r = {format_fraction(payment.r)} must be positive"
    for (ballot, candidate), v in payment.f.items():
        if not 0 <= v <= 1:
            return f"f[{ballot.label()},c{candidate + 1}] = {format_fraction(v)} outside [0, 1]"
        if v and candidate not in ballot:
            return f"ballot {ballot.label()} pays unapproved c{candidate + 1}"
        if v and candidate not in committee:
            return f"ballot {ballot.label()} pays non-elected c{candidate + 1}"
    for ballot, _ in x.items():
        if payment.spent(ballot) > 1:
            return f"ballot {ballot.label()} spends {format_fraction(payment.spent(ballot))} > 1"
    for candidate in committee:
        collected = sum((w * payment.f.get((ballot, candidate), Fraction(0)) for ballot, w in x.items()),
                        Fraction(0))
        if collected != r:
            return f"c{candidate + 1} collects {format_fraction(collected)}, price is {format_fraction(r)}"
    for candidate in range(x.m):
        if candidate in committee:
            continue
        residual = sum((w * (1 - payment.spent(ballot)) for ballot, w in x.items() if candidate in ballot),
                       Fraction(0))
        if residual > r:
            return f"supporters of c{candidate + 1} keep {format_fraction(residual)} > {format_fraction(r)}"
    return None


def verify_peters_payment(payment: PetersPayment) -> bool:
    _check_instance(payment.x, payment.committee, payment.k)
    violation = _peters_violation(payment)
    if violation:
        logger.debug(f"payment rejected: {violation}")
    return violation is None


# ============================================================================
# PRICING LP AND ITS DUAL
# ============================================================================

def _price_variable(ballot: CandidateSet, candidate: int) -> str:
    return f"p_{ballot.variable_suffix}__{candidate}"


def _dual_variable(ballot: CandidateSet, tset: CandidateSet) -> str:
    return f"g_{ballot.variable_suffix}__{tset.variable_suffix}"


def _family(ballot: CandidateSet, committee: CandidateSet, kind: PriceKind, reduced: bool) -> List[CandidateSet]:
    if kind is PriceKind.LINDAHL and not reduced:
        return all_improving_sets(ballot, committee)
    return tsets(ballot, committee, kind)


def build_price_lp(x: VoteDistribution, committee: CandidateSet, k: int, kind: PriceKind,
                   reduced: bool = True) -> OptModel:
    """
    max eps  s.t.  sum_A x[A] p[A,c] <= 1/k per candidate,
    sum_{c in T} p[A,c] >= eps per support ballot A and affordability set T, p >= 0.

    With reduced=False the Lindahl rows range over every T with |A∩T| > |A∩W|
    (prices only on approved candidates, so T counts through T∩A).
    """
    _check_instance(x, committee, k)
    model = OptModel(f"price_lp_{kind.value}_m{x.m}_k{k}")
    variables: Dict[Tuple[CandidateSet, int], int] = {}
    for ballot, _ in x.items():
        for candidate in ballot:
            variables[(ballot, candidate)] = model.add_variable(_price_variable(ballot, candidate))
    eps = model.add_variable("eps", -math.inf, EPSILON_CAP)

    for candidate in range(x.m):
        coeffs = {variables[(ballot, candidate)]: w for ballot, w in x.items() if candidate in ballot}
        model.add_constraint(f"budget_{candidate}", coeffs, Sense.LE, Fraction(1, k))
    for ballot, _ in x.items():
        for tset in _family(ballot, committee, kind, reduced):
            coeffs = {variables[(ballot, c)]: Fraction(1) for c in tset if c in ballot}
            coeffs[eps] = Fraction(-1)
            model.add_constraint(f"afford_{ballot.variable_suffix}__{tset.variable_suffix}", coeffs, Sense.GE, 0)
    model.set_objective(ObjectiveSense.MAXIMIZE, {eps: 1})
    model.metadata["variables"] = variables
    return model


def build_price_dual(x: VoteDistribution, committee: CandidateSet, k: int, kind: PriceKind) -> OptModel:
    """
    min (1/k) sum_c t[c]  s.t.  sum g = 1 and t[c]*x[A] >= sum_{T contains c} g[A,T]
    for every support ballot A and approved c; t, g >= 0.
    """
    _check_instance(x, committee, k)
    model = OptModel(f"price_dual_{kind.value}_m{x.m}_k{k}")
    t = [model.add_variable(f"t_{c}") for c in range(x.m)]
    g: Dict[Tuple[CandidateSet, CandidateSet], int] = {}
    for ballot, _ in x.items():
        for tset in tsets(ballot, committee, kind):
            g[(ballot, tset)] = model.add_variable(_dual_variable(ballot, tset))
    model.add_constraint("normalize", {index: 1 for index in g.values()}, Sense.EQ, 1)
    for ballot, w in x.items():
        for candidate in ballot:
            coeffs = {index: Fraction(-1) for (b, tset), index in g.items() if b == ballot and candidate in tset}
            if not coeffs:
                continue
            coeffs[t[candidate]] = w
            model.add_constraint(f"cover_{ballot.variable_suffix}__{candidate}", coeffs, Sense.GE, 0)
    model.set_objective(ObjectiveSense.MINIMIZE, {index: Fraction(1, k) for index in t})
    model.metadata["g"] = g
    return model


def _caps(cap: int) -> List[int]:
    """Denominator caps tried in turn when rationalizing a solver point"""
    return [cap] + [c for c in (1000, 100) if c < cap]


def _exact_prices(result: SolveResult, x: VoteDistribution, committee: CandidateSet, k: int,
                  kind: PriceKind, cap: int) -> Optional[PriceSystem]:
    """Rationalize p, scale it back under the 1/k budgets and confirm every row exactly"""
    for candidate_cap in _caps(cap):
        prices = {}
        for ballot, _ in x.items():
            for c in ballot:
                value = rationalize(max(result.values.get(_price_variable(ballot, c), 0.0), 0.0), candidate_cap)
                if value:
                    prices[(ballot, c)] = value
        system = PriceSystem(kind=kind, x=x, committee=committee, k=k, prices=prices)
        heaviest = max((system.load(c) for c in range(x.m)), default=Fraction(0))
        if heaviest > Fraction(1, k):
            scale = Fraction(1, k) / heaviest
            system.prices = {key: p * scale for key, p in prices.items()}
        if _price_violation(system) is None:
            return system
    return None


def _exact_certificate(result: SolveResult, dual: OptModel, x: VoteDistribution, committee: CandidateSet,
                       k: int, kind: PriceKind, tolerance: float, cap: int) -> Optional[InfeasibilityCertificate]:
    """Rationalize g, recompute the smallest t it needs, and confirm sum t / k <= 1 exactly"""
    keys: Dict[Tuple[CandidateSet, CandidateSet], int] = dual.metadata["g"]
    raw = {key: result.values.get(dual.variables[index].name, 0.0) for key, index in keys.items()}
    for candidate_cap in _caps(cap):
        try:
            g = rationalize_weights(raw, candidate_cap, tolerance)
        except ParameterError:
            return None
        t: Dict[int, Fraction] = {}
        for (ballot, tset), v in g.items():
            for c in tset:
                demand = sum((gv for (b, ts), gv in g.items() if b == ballot and c in ts), Fraction(0))
                t[c] = max(t.get(c, Fraction(0)), demand / x.weight(ballot))
        cert = InfeasibilityCertificate(kind=kind, x=x, committee=committee, k=k, t=t, g=g)
        if _certificate_violation(cert) is None:
            return cert
    return None


def check_priceable(x: VoteDistribution, committee: CandidateSet, k: int, kind: PriceKind,
                    cfg: Optional[BackendConfig] = None, tolerance: Optional[float] = None,
                    cap: Optional[int] = None) -> PriceabilityResult:
    """
    Decide weak or Lindahl priceability of W for x.

    The pricing LP value eps* is compared with 1. From eps* >= 1 - tol a price system
    is rationalized and verified; from eps* <= 1 + tol the dual is solved and its g
    turned into an exact certificate. Whatever fails both ways is UNDECIDED.

    Raises:
        ParameterError: for an invalid instance or kind
    """
    if kind is PriceKind.PETERS:
        raise ParameterError("use check_peters_priceable for Peters priceability")
    cfg = cfg or BackendConfig.from_config()
    tolerance = cfg.tolerance if tolerance is None else tolerance
    cap = config.DENOMINATOR_CAP if cap is None else cap

    primal = solve(build_price_lp(x, committee, k, kind), cfg)
    if primal.status is SolveStatus.ERROR:
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, message=primal.message, backend_error=True)
    if not primal.ok:
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind,
                                  message=f"pricing LP ended {primal.status.value}")
    eps = primal.objective
    result = PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, lp_value=eps)

    if eps >= 1 - tolerance:
        system = _exact_prices(primal, x, committee, k, kind, cap)
        if system is not None:
            result.status = PriceabilityStatus.PRICEABLE
            result.price_system = system
            result.message = f"eps* = {eps:.6f}; price system verified"
            logger.info(f"{committee.label()} is {kind.value} priceable (eps* = {eps:.6f})")
            return result

    if eps <= 1 + tolerance:
        dual_model = build_price_dual(x, committee, k, kind)
        dual = solve(dual_model, cfg)
        if dual.status is SolveStatus.ERROR:
            result.message = dual.message
            result.backend_error = True
            return result
        if dual.ok:
            result.dual_value = dual.objective
            if dual.objective <= 1 + tolerance:
                cert = _exact_certificate(dual, dual_model, x, committee, k, kind, tolerance, cap)
                if cert is not None:
                    result.status = PriceabilityStatus.NOT_PRICEABLE
                    result.certificate = cert
                    result.message = (f"eps* = {eps:.6f}; certificate with value "
                                      f"{format_fraction(cert.value)} verified")
                    logger.info(f"{committee.label()} is not {kind.value} priceable")
                    return result

    result.message = f"eps* = {eps:.6f}; neither a price system nor a certificate verified exactly"
    logger.warning(f"{kind.value} priceability of {committee.label()} undecided: {result.message}")
    return result


# ============================================================================
# PETERS PRICEABILITY
# ============================================================================

def _payment_variable(ballot: CandidateSet, candidate: int) -> str:
    return f"f_{ballot.variable_suffix}__{candidate}"


def build_peters_lp(x: VoteDistribution, committee: CandidateSet, k: int) -> OptModel:
    """
    max r' over payments f[A,c] in [0,1] for c in A∩W with: at most 1 spent per ballot,
    exactly r' collected by each elected candidate, and for each c outside W
    sum_{A contains c} x[A] * (1 - spent(A)) <= r'.
    """
    _check_instance(x, committee, k)
    model = OptModel(f"peters_lp_m{x.m}_k{k}")
    f: Dict[Tuple[CandidateSet, int], int] = {}
    for ballot, _ in x.items():
        for c in ballot & committee:
            f[(ballot, c)] = model.add_variable(_payment_variable(ballot, c), 0.0, 1.0)
    r = model.add_variable("r")

    for ballot, _ in x.items():
        coeffs = {index: 1 for (b, _), index in f.items() if b == ballot}
        if coeffs:
            model.add_constraint(f"spend_{ballot.variable_suffix}", coeffs, Sense.LE, 1)
    for c in committee:
        coeffs = {index: x.weight(b) for (b, cc), index in f.items() if cc == c}
        coeffs[r] = Fraction(-1)
        model.add_constraint(f"price_{c}", coeffs, Sense.EQ, 0)
    for c in range(x.m):
        if c in committee:
            continue
        # residual budget of c's supporters, moved to the left: -sum x*spent - r <= -sum x
        supporters = [(b, w) for b, w in x.items() if c in b]
        coeffs = {r: Fraction(-1)}
        for ballot, w in supporters:
            for (b, _), index in f.items():
                if b == ballot:
                    coeffs[index] = coeffs.get(index, Fraction(0)) - w
        model.add_constraint(f"residual_{c}", coeffs, Sense.LE, -sum((w for _, w in supporters), Fraction(0)))
    model.set_objective(ObjectiveSense.MAXIMIZE, {r: 1})
    model.metadata["f"] = f
    return model


def _exact_payment(result: SolveResult, model: OptModel, x: VoteDistribution, committee: CandidateSet,
                   k: int, cap: int) -> Optional[PetersPayment]:
    """
    Rationalize f, equalize every elected candidate's collection and confirm exactly.

    Collections are first raised to the largest one, which only lowers the residual
    budgets; if that overspends a ballot they are lowered to the smallest one instead.
    """
    keys: Dict[Tuple[CandidateSet, int], int] = model.metadata["f"]
    for candidate_cap in _caps(cap):
        f = {}
        for key, index in keys.items():
            value = rationalize(min(max(result.values.get(model.variables[index].name, 0.0), 0.0), 1.0),
                                candidate_cap)
            if value:
                f[key] = value
        loads = {c: sum((x.weight(b) * v for (b, cc), v in f.items() if cc == c), Fraction(0)) for c in committee}
        lowest, highest = min(loads.values()), max(loads.values())
        if lowest <= 0:
            continue
        for price in dict.fromkeys((highest, lowest)):
            scaled = {(b, c): v * price / loads[c] for (b, c), v in f.items()}
            payment = PetersPayment(x=x, committee=committee, k=k, r=price * k, f=scaled)
            violation = _peters_violation(payment)
            if violation is None:
                return payment
            logger.debug(f"payment at r' = {format_fraction(price)} rejected: {violation}")
    return None


def check_peters_priceable(x: VoteDistribution, committee: CandidateSet, k: int,
                           cfg: Optional[BackendConfig] = None, tolerance: Optional[float] = None,
                           cap: Optional[int] = None) -> PriceabilityResult:
    """
    Decide Peters priceability: some price r > 0 and payments meeting all five conditions.

    An infeasible LP or an elected candidate nobody approves means not priceable;
    r* within tolerance of 0 otherwise stays UNDECIDED.
    """
    _check_instance(x, committee, k)
    cfg = cfg or BackendConfig.from_config()
    tolerance = cfg.tolerance if tolerance is None else tolerance
    cap = config.DENOMINATOR_CAP if cap is None else cap
    kind = PriceKind.PETERS

    model = build_peters_lp(x, committee, k)
    lp = solve(model, cfg)
    if lp.status is SolveStatus.ERROR:
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, message=lp.message, backend_error=True)
    if lp.status is SolveStatus.INFEASIBLE:
        return PriceabilityResult(PriceabilityStatus.NOT_PRICEABLE, kind,
                                  message="no price and payments satisfy the residual-budget rows")
    if not lp.ok:
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, message=f"payment LP ended {lp.status.value}")

    r_value = lp.objective * k
    if lp.objective <= tolerance:
        unsupported = [c for c in committee if x.approval_mass(c) == 0]
        if unsupported:
            return PriceabilityResult(PriceabilityStatus.NOT_PRICEABLE, kind, lp_value=r_value,
                                      message=f"c{unsupported[0] + 1} is elected but nobody can pay for it")
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, lp_value=r_value,
                                  message=f"largest price r* = {r_value:.3g} is within tolerance of 0")

    payment = _exact_payment(lp, model, x, committee, k, cap)
    if payment is None:
        return PriceabilityResult(PriceabilityStatus.UNDECIDED, kind, lp_value=r_value,
                                  message=f"r* = {r_value:.6f} but no payment verified exactly")
    logger.info(f"{committee.label()} is Peters priceable with r = {format_fraction(payment.r)}")
    return PriceabilityResult(PriceabilityStatus.PRICEABLE, kind, payment=payment, lp_value=r_value,
                              message=f"payment with r = {format_fraction(payment.r)} verified")


def check_priceability(x: VoteDistribution, committee: CandidateSet, k: int, kind: PriceKind,
                       cfg: Optional[BackendConfig] = None, tolerance: Optional[float] = None,
                       cap: Optional[int] = None) -> PriceabilityResult:
    if kind is PriceKind.PETERS:
        return check_peters_priceable(x, committee, k, cfg, tolerance, cap)
    return check_priceable(x, committee, k, kind, cfg, tolerance, cap)


def peters_to_weak_prices(payment: PetersPayment) -> PriceSystem:
    """
    Weak price system built from a Peters payment.

    Elected candidates keep the payments. An approved candidate c outside W costs the
    voter's unspent budget plus eps_c, where the eps_c spread the slack 1/k - r' over
    c's supporters (or equal 1/k when there is no slack).

    Raises:
        CertificateViolation: if the payment or the resulting prices fail exact verification
    """
    violation = _peters_violation(payment)
    if violation:
        raise CertificateViolation(f"payment is not valid: {violation}")
    x, committee, k = payment.x, payment.committee, payment.k
    slack = Fraction(1, k) - payment.per_voter_price

    prices: Dict[Tuple[CandidateSet, int], Fraction] = {}
    for ballot, _ in x.items():
        unspent = 1 - payment.spent(ballot)
        for c in ballot:
            if c in committee:
                value = payment.f.get((ballot, c), Fraction(0))
            else:
                mass = x.approval_mass(c)
                value = unspent + (slack / mass if slack > 0 else Fraction(1, k))
            if value:
                prices[(ballot, c)] = value
    system = PriceSystem(kind=PriceKind.WEAK, x=x, committee=committee, k=k, prices=prices)
    violation = _price_violation(system)
    if violation:
        raise CertificateViolation(f"converted prices fail: {violation}")
    return system
