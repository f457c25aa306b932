"""
Solvers package for coreforge
Backend-agnostic models, LP/MILP/QCP backends, file export and relaxations
"""

from .model import (
    OptModel,
    Variable,
    Constraint,
    VarType,
    Sense,
    ObjectiveSense
)

from .backend import (
    BackendConfig,
    SolveStatus,
    SolveResult,
    solve,
    get_backend,
    available_backends,
    supports_bilinear
)

from .export import (
    export,
    to_lp,
    to_mps,
    read_lp,
    read_mps,
    write_model
)

from .relaxation import McCormickEnvelope, mccormick_relaxation

__all__ = [
    'OptModel',
    'Variable',
    'Constraint',
    'VarType',
    'Sense',
    'ObjectiveSense',
    'BackendConfig',
    'SolveStatus',
    'SolveResult',
    'solve',
    'get_backend',
    'available_backends',
    'supports_bilinear',
    'export',
    'to_lp',
    'to_mps',
    'read_lp',
    'read_mps',
    'write_model',
    'McCormickEnvelope',
    'mccormick_relaxation'
]
