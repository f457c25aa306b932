"""
Gurobi backend (optional, needs a gurobipy license)
Solves bilinear rows to global optimality with NonConvex=2 and accepts warm starts
"""

from typing import Mapping, Optional

from logging_config import get_logger
from solvers.backend import Backend, BackendConfig, SolveResult, SolveStatus
from solvers.model import ObjectiveSense, OptModel, Sense, VarType

logger = get_logger(__name__)


class GurobiBackend(Backend):
    name = "gurobi"
    supports_bilinear = True
    supports_warm_start = True

    @classmethod
    def is_available(cls) -> bool:
        try:
            import gurobipy  # noqa: F401
        except ImportError:
            return False
        return True

    def solve(self, model: OptModel, cfg: BackendConfig,
              warm_start: Optional[Mapping[str, float]] = None) -> SolveResult:
        import gurobipy as gp
        from gurobipy import GRB

        env = gp.Env(empty=True)
        env.setParam("OutputFlag", 0)
        env.start()
        try:
            grb = gp.Model(model.name, env=env)
            grb.Params.MIPGap = cfg.tolerance
            if cfg.time_limit is not None:
                grb.Params.TimeLimit = cfg.time_limit
            if cfg.threads:
                grb.Params.Threads = cfg.threads
            grb.Params.Seed = cfg.seed
            if model.has_bilinear:
                grb.Params.NonConvex = 2

            gvars = [
                grb.addVar(lb=v.lb, ub=v.ub, name=v.name,
                           vtype=GRB.BINARY if v.vtype is VarType.BINARY else GRB.CONTINUOUS)
                for v in model.variables
            ]
            for row in model.constraints:
                expr = gp.QuadExpr() if row.bilinear else gp.LinExpr()
                for index, coef in row.coeffs.items():
                    expr.add(gvars[index], float(coef))
                for i, j, coef in row.bilinear:
                    expr.add(gvars[i] * gvars[j], float(coef))
                rhs = float(row.rhs)
                if row.sense is Sense.LE:
                    constr = expr <= rhs
                elif row.sense is Sense.GE:
                    constr = expr >= rhs
                else:
                    constr = expr == rhs
                if row.bilinear:
                    grb.addQConstr(constr, name=row.name)
                else:
                    grb.addLConstr(constr, name=row.name)

            objective = gp.LinExpr()
            for index, coef in model.objective.items():
                objective.add(gvars[index], float(coef))
            grb.setObjective(objective, GRB.MAXIMIZE
                             if model.objective_sense is ObjectiveSense.MAXIMIZE else GRB.MINIMIZE)

            if warm_start:
                for v in model.variables:
                    if v.name in warm_start:
                        gvars[v.index].Start = float(warm_start[v.name])

            grb.optimize()
            return self._result(grb, gvars, model, gp, GRB)
        finally:
            env.dispose()

    @staticmethod
    def _result(grb, gvars, model, gp, GRB) -> SolveResult:
        status_map = {
            GRB.OPTIMAL: SolveStatus.OPTIMAL,
            GRB.TIME_LIMIT: SolveStatus.TIME_LIMIT,
            GRB.INFEASIBLE: SolveStatus.INFEASIBLE,
            GRB.UNBOUNDED: SolveStatus.UNBOUNDED,
            GRB.INF_OR_UNBD: SolveStatus.INFEASIBLE,
        }
        status = status_map.get(grb.Status, SolveStatus.ERROR)
        result = SolveResult(status=status, message=f"gurobi status {grb.Status}")
        if grb.SolCount > 0:
            result.values = {v.name: gvars[v.index].X for v in model.variables}
            result.objective = grb.ObjVal
            try:
                result.bound = grb.ObjBound
            except gp.GurobiError:
                result.bound = grb.ObjVal
        return result
