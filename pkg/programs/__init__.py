"""
Programs package for coreforge
The search MILP, its per-deviation duals and certificates, priceability checks and proof rendering
"""

from .milp_encoder import (
    BIG_M,
    MilpSolution,
    SolutionCheck,
    LowerBoundAssignment,
    build_milp,
    solve_search,
    rationalize_solution,
    extract_deviation_function,
    verify_solution,
    lower_bound_assignment,
    check_milp_assignment,
    assignment_values,
    solution_from_assignment,
    build_fixed_deviation_lp
)

from .duality import (
    DualCertificate,
    build_dlp,
    solve_dlp,
    certificate_singleton,
    certificate_kplusone,
    verify_certificate,
    tighten_certificate
)

from .priceability import (
    PriceKind,
    PriceabilityStatus,
    PriceSystem,
    InfeasibilityCertificate,
    PetersPayment,
    PriceabilityResult,
    tsets,
    build_price_lp,
    build_price_dual,
    build_peters_lp,
    check_priceable,
    check_peters_priceable,
    check_priceability,
    verify_price_system,
    verify_infeasibility_certificate,
    verify_peters_payment,
    peters_to_weak_prices
)

from .counterexamples import (
    KNOWN_WITNESSES,
    CounterexampleStatus,
    CounterexampleResult,
    build_linqip,
    search_counterexample
)

from .proofs import render_proof

__all__ = [
    'BIG_M',
    'MilpSolution',
    'SolutionCheck',
    'LowerBoundAssignment',
    'build_milp',
    'solve_search',
    'rationalize_solution',
    'extract_deviation_function',
    'verify_solution',
    'lower_bound_assignment',
    'check_milp_assignment',
    'assignment_values',
    'solution_from_assignment',
    'build_fixed_deviation_lp',
    'DualCertificate',
    'build_dlp',
    'solve_dlp',
    'certificate_singleton',
    'certificate_kplusone',
    'verify_certificate',
    'tighten_certificate',
    'PriceKind',
    'PriceabilityStatus',
    'PriceSystem',
    'InfeasibilityCertificate',
    'PetersPayment',
    'PriceabilityResult',
    'tsets',
    'build_price_lp',
    'build_price_dual',
    'build_peters_lp',
    'check_priceable',
    'check_peters_priceable',
    'check_priceability',
    'verify_price_system',
    'verify_infeasibility_certificate',
    'verify_peters_payment',
    'peters_to_weak_prices',
    'KNOWN_WITNESSES',
    'CounterexampleStatus',
    'CounterexampleResult',
    'build_linqip',
    'search_counterexample',
    'render_proof'
]
