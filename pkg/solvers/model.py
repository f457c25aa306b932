"""
Backend-agnostic optimization model
Variables, sparse linear rows with optional bilinear terms, and a linear objective, all with exact coefficients
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from errors import ParameterError


class VarType(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(Enum):
    """Constraint sense"""
    LE = "<="
    GE = ">="
    EQ = "="


class ObjectiveSense(Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass
class Variable:
    name: str
    index: int
    lb: float = 0.0  # -inf allowed
    ub: float = math.inf
    vtype: VarType = VarType.CONTINUOUS

    @property
    def is_binary(self) -> bool:
        return self.vtype is VarType.BINARY


@dataclass
class Constraint:
    """sum coeffs[i]*v_i + sum coef*v_i*v_j  (sense)  rhs"""
    name: str
    coeffs: Dict[int, Fraction]
    sense: Sense
    rhs: Fraction
    bilinear: List[Tuple[int, int, Fraction]] = field(default_factory=list)

    def activity(self, values: List) -> object:
        total = sum(c * values[i] for i, c in self.coeffs.items())
        for i, j, c in self.bilinear:
            total += c * values[i] * values[j]
        return total

    def satisfied(self, values: List, tolerance=0) -> bool:
        lhs = self.activity(values)
        if self.sense is Sense.LE:
            return lhs <= self.rhs + tolerance
        if self.sense is Sense.GE:
            return lhs >= self.rhs - tolerance
        return abs(lhs - self.rhs) <= tolerance


class OptModel:
    """
    An optimization model independent of any solver.

    Coefficients are stored as Fractions so that hand-built assignments can be
    checked exactly; backends convert them to floats.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: List[Variable] = []
        self.constraints: List[Constraint] = []
        self.objective_sense = ObjectiveSense.MINIMIZE
        self.objective: Dict[int, Fraction] = {}
        self._by_name: Dict[str, int] = {}
        self._row_names = set()
        # builder context such as (m, k, quota), carried through to solution parsing
        self.metadata: Dict[str, object] = {}

    def add_variable(self, name: str, lb: float = 0.0, ub: float = math.inf,
                     vtype: VarType = VarType.CONTINUOUS) -> int:
        if name in self._by_name:
            raise ParameterError(f"variable {name} declared twice")
        if vtype is VarType.BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ParameterError(f"variable {name} has empty bounds [{lb}, {ub}]")
        index = len(self.variables)
        self.variables.append(Variable(name=name, index=index, lb=lb, ub=ub, vtype=vtype))
        self._by_name[name] = index
        return index

    def add_binary(self, name: str) -> int:
        return self.add_variable(name, 0.0, 1.0, VarType.BINARY)

    def add_constraint(self, name: str, coeffs: Mapping[int, Fraction], sense: Sense, rhs,
                       bilinear: Optional[List[Tuple[int, int, Fraction]]] = None) -> Constraint:
        if name in self._row_names:
            raise ParameterError(f"constraint {name} declared twice")
        merged: Dict[int, Fraction] = {}
        for index, coef in coeffs.items():
            self._check_index(index, name)
            merged[index] = merged.get(index, Fraction(0)) + Fraction(coef)
        terms = []
        for i, j, coef in bilinear or []:
            self._check_index(i, name)
            self._check_index(j, name)
            terms.append((i, j, Fraction(coef)))
        row = Constraint(name=name, coeffs={i: c for i, c in merged.items() if c},
                         sense=sense, rhs=Fraction(rhs), bilinear=terms)
        self.constraints.append(row)
        self._row_names.add(name)
        return row

    def set_objective(self, sense: ObjectiveSense, coeffs: Mapping[int, Fraction]):
        for index in coeffs:
            self._check_index(index, "objective")
        self.objective_sense = sense
        self.objective = {i: Fraction(c) for i, c in coeffs.items() if c}

    def _check_index(self, index: int, where: str):
        if not 0 <= index < len(self.variables):
            raise ParameterError(f"{where} references undeclared variable {index}")

    def index_of(self, name: str) -> int:
        return self._by_name[name]

    def variable(self, name: str) -> Variable:
        return self.variables[self._by_name[name]]

    def fix(self, name: str, value: float):
        """Pin a variable to a value through its bounds"""
        var = self.variable(name)
        var.lb = var.ub = value

    @property
    def has_bilinear(self) -> bool:
        return any(row.bilinear for row in self.constraints)

    @property
    def binary_count(self) -> int:
        return sum(1 for v in self.variables if v.is_binary)

    @property
    def continuous_count(self) -> int:
        return len(self.variables) - self.binary_count

    def objective_value(self, values: List):
        return sum((c * values[i] for i, c in self.objective.items()), Fraction(0))

    def check_assignment(self, values: Mapping[str, Fraction], tolerance=0) -> List[str]:
        """
        Names of the bounds and rows violated by an assignment.

        Missing variables count as 0. With Fraction values and tolerance 0 the check is exact.
        """
        dense = [Fraction(0)] * len(self.variables)
        for name, value in values.items():
            dense[self._by_name[name]] = value
        violated = []
        for var in self.variables:
            value = dense[var.index]
            if value < var.lb - tolerance or value > var.ub + tolerance:
                violated.append(f"bound:{var.name}")
            if var.is_binary and value not in (0, 1):
                violated.append(f"integrality:{var.name}")
        for row in self.constraints:
            if not row.satisfied(dense, tolerance):
                violated.append(row.name)
        return violated

    def summary(self) -> Dict[str, int]:
        return {
            "variables": len(self.variables),
            "continuous": self.continuous_count,
            "binary": self.binary_count,
            "constraints": len(self.constraints),
            "bilinear_rows": sum(1 for row in self.constraints if row.bilinear),
        }

    def __repr__(self):
        s = self.summary()
        return (f"OptModel({self.name}: {s['continuous']} continuous, {s['binary']} binary, "
                f"{s['constraints']} rows)")
