"""
Human-readable non-priceability proofs
Turns a verified infeasibility certificate into the weighted sum of inequalities that ends in a contradiction
"""

from fractions import Fraction
from math import lcm
from typing import Dict, List, Tuple

from elections.candidate_sets import CandidateSet
from elections.rationals import format_fraction
from errors import CertificateViolation
from programs.priceability import InfeasibilityCertificate, verify_infeasibility_certificate

PriceTerm = Tuple[CandidateSet, int]


def _price_name(term: PriceTerm) -> str:
    ballot, candidate = term
    return f"p[{ballot.label()},c{candidate + 1}]"


def _linear(terms: Dict[PriceTerm, Fraction]) -> str:
    """'1/3 p[..] + p[..] - 1/6 p[..]' in ballot then candidate order; '0' when empty"""
    parts: List[str] = []
    for term in sorted(terms, key=lambda item: (item[0].mask, item[1])):
        coef = terms[term]
        if coef == 0:
            continue
        magnitude = abs(coef)
        body = _price_name(term) if magnitude == 1 else f"{format_fraction(magnitude)} {_price_name(term)}"
        if not parts:
            parts.append(body if coef > 0 else f"-{body}")
        else:
            parts.append(f"{'+' if coef > 0 else '-'} {body}")
    return " ".join(parts) if parts else "0"


def render_proof(cert: InfeasibilityCertificate, clear_denominators: bool = False) -> str:
    """
    Proof text: budget rows scaled by t, affordability rows scaled by -g, their sum and
    the contradiction it yields. With clear_denominators every multiplier is scaled by
    the common denominator so the scale factors are integers.

    Raises:
        CertificateViolation: if the certificate does not verify exactly
    """
    if not verify_infeasibility_certificate(cert):
        raise CertificateViolation("certificate does not verify exactly; no proof rendered")
    x, committee, k = cert.x, cert.committee, cert.k

    scale = Fraction(1)
    if clear_denominators:
        scale = Fraction(lcm(*(v.denominator for v in list(cert.t.values()) + list(cert.g.values()))))
    t = {c: v * scale for c, v in cert.t.items() if v}
    g = {key: v * scale for key, v in cert.g.items() if v}

    lines = [
        f"Claim: {committee.label()} is not {cert.kind.value} priceable for k = {k} and",
        "  x = " + ", ".join(f"{format_fraction(w)} {ballot.label()}" for ballot, w in x.items()),
        "Suppose prices p >= 0 satisfy both conditions.",
        "",
        "Budget rows, each scaled by t[c], keeping only ballots with an affordability row:",
    ]
    involved = {ballot for ballot, _ in g}
    total: Dict[PriceTerm, Fraction] = {}
    budget_rhs = Fraction(0)
    for c in sorted(t):
        row = {(ballot, c): t[c] * w for ballot, w in x.items() if c in ballot and ballot in involved}
        for term, coef in row.items():
            total[term] = total.get(term, Fraction(0)) + coef
        rhs = t[c] / k
        budget_rhs += rhs
        lines.append(f"  (t = {format_fraction(t[c])}) {_linear(row)} <= {format_fraction(rhs)}")

    lines.append("")
    lines.append("Affordability rows, each scaled by -g[A,T]:")
    afford_rhs = Fraction(0)
    for (ballot, tset) in sorted(g, key=lambda key: (key[0].mask, key[1].sort_key())):
        weight = g[(ballot, tset)]
        row = {(ballot, c): -weight for c in tset}
        for term, coef in row.items():
            total[term] = total.get(term, Fraction(0)) + coef
        afford_rhs -= weight
        lines.append(f"  (g = {format_fraction(weight)}, T = {tset.label()}) "
                     f"{_linear(row)} < {format_fraction(-weight)}")

    rhs = budget_rhs + afford_rhs
    leftover = {term: coef for term, coef in total.items() if coef}
    lines.append("")
    lines.append(f"Sum: {_linear(leftover)} < {format_fraction(rhs)}")
    if leftover:
        lines.append(f"Contradiction: the left side is a nonnegative combination of prices, "
                     f"so it cannot be below {format_fraction(rhs)}")
    else:
        lines.append(f"Contradiction: 0 < {format_fraction(rhs)}")
    return "\n".join(lines) + "\n"
