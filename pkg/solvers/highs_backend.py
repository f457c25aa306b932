"""
HiGHS backend through scipy.optimize.milp
Open-source default; handles LPs and MILPs, no bilinear rows
"""

from typing import Mapping, Optional

import numpy as np

from logging_config import get_logger
from solvers.backend import Backend, BackendConfig, SolveResult, SolveStatus
from solvers.model import ObjectiveSense, OptModel, Sense

logger = get_logger(__name__)

# scipy.optimize.milp status codes
_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.TIME_LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
}


def model_to_arrays(model: OptModel):
    """
    Dense objective, integrality and bounds plus a sparse row matrix with row bounds.

    Returns:
        tuple: (c, integrality, lb, ub, A, row_lb, row_ub, sign) where sign is -1 for
        maximization (the objective is negated for a minimizing solver)
    """
    from scipy.sparse import csr_matrix

    n = len(model.variables)
    sign = -1.0 if model.objective_sense is ObjectiveSense.MAXIMIZE else 1.0
    c = np.zeros(n)
    for index, coef in model.objective.items():
        c[index] = sign * float(coef)
    integrality = np.array([1 if v.is_binary else 0 for v in model.variables], dtype=int)
    lb = np.array([v.lb for v in model.variables], dtype=float)
    ub = np.array([v.ub for v in model.variables], dtype=float)

    rows, cols, data = [], [], []
    row_lb = np.full(len(model.constraints), -np.inf)
    row_ub = np.full(len(model.constraints), np.inf)
    for r, row in enumerate(model.constraints):
        for index, coef in row.coeffs.items():
            rows.append(r)
            cols.append(index)
            data.append(float(coef))
        rhs = float(row.rhs)
        if row.sense in (Sense.LE, Sense.EQ):
            row_ub[r] = rhs
        if row.sense in (Sense.GE, Sense.EQ):
            row_lb[r] = rhs
    A = csr_matrix((data, (rows, cols)), shape=(len(model.constraints), n))
    return c, integrality, lb, ub, A, row_lb, row_ub, sign


class HighsBackend(Backend):
    """HiGHS via scipy; thread count and seed are not exposed by scipy and are ignored"""

    name = "highs"
    supports_bilinear = False
    supports_warm_start = False

    @classmethod
    def is_available(cls) -> bool:
        try:
            from scipy.optimize import milp  # noqa: F401
        except ImportError:
            return False
        return True

    def solve(self, model: OptModel, cfg: BackendConfig,
              warm_start: Optional[Mapping[str, float]] = None) -> SolveResult:
        from scipy.optimize import Bounds, LinearConstraint, milp

        c, integrality, lb, ub, A, row_lb, row_ub, sign = model_to_arrays(model)
        options = {"disp": False, "presolve": True, "mip_rel_gap": cfg.tolerance}
        if cfg.time_limit is not None:
            options["time_limit"] = cfg.time_limit
        if cfg.threads or cfg.seed:
            logger.debug("highs: threads and seed are not configurable through scipy")

        constraints = LinearConstraint(A, row_lb, row_ub) if model.constraints else None
        res = milp(c, integrality=integrality, bounds=Bounds(lb, ub), constraints=constraints,
                   options=options)

        status = _STATUS.get(res.status, SolveStatus.ERROR)
        result = SolveResult(status=status, message=str(res.message))
        if res.x is not None:
            result.values = {v.name: float(res.x[v.index]) for v in model.variables}
            result.objective = sign * float(res.fun)
        dual_bound = getattr(res, "mip_dual_bound", None)
        if dual_bound is not None and np.isfinite(dual_bound):
            result.bound = sign * float(dual_bound)
        elif status is SolveStatus.OPTIMAL:
            result.bound = result.objective
        if status is SolveStatus.OPTIMAL and res.x is None:
            result.status = SolveStatus.ERROR
            result.message = "solver reported optimal without a solution"
        return result
