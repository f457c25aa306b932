"""
McCormick relaxation of bilinear rows
Replaces every product v_i*v_j by an auxiliary w_ij bounded by the four envelope inequalities
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from errors import ParameterError
from solvers.model import OptModel, Sense


@dataclass
class McCormickEnvelope:
    """Envelope of w = x*y over the box [xL, xU] x [yL, yU]"""
    w: int
    x: int
    y: int
    xL: Fraction
    xU: Fraction
    yL: Fraction
    yU: Fraction

    def _coeffs(self, y_coef, x_coef) -> Dict[int, Fraction]:
        coeffs = {self.w: Fraction(1)}
        coeffs[self.y] = coeffs.get(self.y, Fraction(0)) + y_coef
        coeffs[self.x] = coeffs.get(self.x, Fraction(0)) + x_coef
        return coeffs

    def rows(self) -> List[Tuple[str, Dict[int, Fraction], Sense, Fraction]]:
        """(suffix, coeffs, sense, rhs) for the four inequalities"""
        return [
            # w >= xL*y + x*yL - xL*yL
            ("lo1", self._coeffs(-self.xL, -self.yL), Sense.GE, -self.xL * self.yL),
            # w >= xU*y + x*yU - xU*yU
            ("lo2", self._coeffs(-self.xU, -self.yU), Sense.GE, -self.xU * self.yU),
            # w <= xU*y + x*yL - xU*yL
            ("up1", self._coeffs(-self.xU, -self.yL), Sense.LE, -self.xU * self.yL),
            # w <= xL*y + x*yU - xL*yU
            ("up2", self._coeffs(-self.xL, -self.yU), Sense.LE, -self.xL * self.yU),
        ]


def _finite_bounds(model: OptModel, index: int) -> Tuple[Fraction, Fraction]:
    var = model.variables[index]
    if math.isinf(var.lb) or math.isinf(var.ub):
        raise ParameterError(f"McCormick relaxation needs finite bounds on {var.name}")
    return Fraction(var.lb), Fraction(var.ub)


def mccormick_relaxation(model: OptModel) -> OptModel:
    """
    Linear relaxation of a model with bilinear rows.

    Every optimum of the relaxation bounds the original optimum from the
    relaxing side (a lower bound when minimizing).

    Raises:
        ParameterError: if a variable in a product lacks finite bounds
    """
    relaxed = OptModel(f"{model.name}_mccormick")
    for var in model.variables:
        relaxed.add_variable(var.name, var.lb, var.ub, var.vtype)

    products: Dict[Tuple[int, int], int] = {}
    envelopes: List[McCormickEnvelope] = []
    for row in model.constraints:
        for i, j, _ in row.bilinear:
            key = (min(i, j), max(i, j))
            if key in products:
                continue
            xL, xU = _finite_bounds(model, key[0])
            yL, yU = _finite_bounds(model, key[1])
            corners = [xL * yL, xL * yU, xU * yL, xU * yU]
            name = f"w_{model.variables[key[0]].name}__{model.variables[key[1]].name}"
            w = relaxed.add_variable(name, float(min(corners)), float(max(corners)))
            products[key] = w
            envelopes.append(McCormickEnvelope(w, key[0], key[1], xL, xU, yL, yU))

    for row in model.constraints:
        coeffs = dict(row.coeffs)
        for i, j, coef in row.bilinear:
            w = products[(min(i, j), max(i, j))]
            coeffs[w] = coeffs.get(w, Fraction(0)) + coef
        relaxed.add_constraint(row.name, coeffs, row.sense, row.rhs)

    for envelope in envelopes:
        label = relaxed.variables[envelope.w].name
        for suffix, coeffs, sense, rhs in envelope.rows():
            relaxed.add_constraint(f"{label}_{suffix}", coeffs, sense, rhs)

    relaxed.set_objective(model.objective_sense, model.objective)
    return relaxed
