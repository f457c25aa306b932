"""
LP and MPS file export and import
Writes CPLEX-LP and free-MPS text (bilinear rows as LP brackets / MPS QCMATRIX) and reads the same dialect back
"""

import math
import os
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from errors import ParameterError
from logging_config import get_logger
from solvers.model import ObjectiveSense, OptModel, Sense, VarType

logger = get_logger(__name__)

TERMS_PER_LINE = 8

_LP_SENSE = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}
_MPS_SENSE = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}


def _number(value) -> str:
    number = float(value)
    if number == int(number) and abs(number) < 1e15:
        return str(int(number))
    return repr(number)


def _bound(value: float) -> str:
    if value == math.inf:
        return "+inf"
    if value == -math.inf:
        return "-inf"
    return _number(value)


def _linear_terms(coeffs: Dict[int, Fraction], model: OptModel) -> List[str]:
    terms = []
    for index, coef in coeffs.items():
        sign = "-" if coef < 0 else "+"
        terms.append(f"{sign} {_number(abs(coef))} {model.variables[index].name}")
    return terms


def _wrap(head: str, terms: List[str]) -> str:
    lines = []
    for start in range(0, len(terms), TERMS_PER_LINE):
        lines.append(" ".join(terms[start:start + TERMS_PER_LINE]))
    if not lines:
        lines = ["0"]
    return head + ("\n   ".join(lines))


def to_lp(model: OptModel) -> str:
    """CPLEX LP text; every variable is listed in Bounds so unused columns survive a round trip"""
    out = [f"\\ Problem: {model.name}"]
    out.append("Maximize" if model.objective_sense is ObjectiveSense.MAXIMIZE else "Minimize")
    objective_terms = _linear_terms(model.objective, model)
    if not objective_terms and model.variables:
        objective_terms = [f"+ 0 {model.variables[0].name}"]
    out.append(_wrap(" obj: ", objective_terms))

    out.append("Subject To")
    for row in model.constraints:
        terms = _linear_terms(row.coeffs, model)
        if row.bilinear:
            products = []
            for i, j, coef in row.bilinear:
                sign = "-" if coef < 0 else "+"
                products.append(f"{sign} {_number(abs(coef))} {model.variables[i].name} * "
                                f"{model.variables[j].name}")
            terms.append("+ [ " + " ".join(products).lstrip("+ ") + " ]")
        body = _wrap(f" {row.name}: ", terms)
        out.append(f"{body} {_LP_SENSE[row.sense]} {_number(row.rhs)}")

    out.append("Bounds")
    for var in model.variables:
        if var.is_binary:
            out.append(f" {_bound(var.lb)} <= {var.name} <= {_bound(var.ub)}")
        elif var.lb == -math.inf and var.ub == math.inf:
            out.append(f" {var.name} free")
        elif var.ub == math.inf:
            out.append(f" {var.name} >= {_bound(var.lb)}")
        else:
            out.append(f" {_bound(var.lb)} <= {var.name} <= {_bound(var.ub)}")

    binaries = [var.name for var in model.variables if var.is_binary]
    if binaries:
        out.append("Binaries")
        for start in range(0, len(binaries), TERMS_PER_LINE):
            out.append(" " + " ".join(binaries[start:start + TERMS_PER_LINE]))
    out.append("End")
    return "\n".join(out) + "\n"


def to_mps(model: OptModel) -> str:
    """Free-format MPS with OBJSENSE and QCMATRIX sections"""
    out = [f"NAME {model.name}"]
    out.append("OBJSENSE")
    out.append("    MAX" if model.objective_sense is ObjectiveSense.MAXIMIZE else "    MIN")
    out.append("ROWS")
    out.append(" N  obj")
    for row in model.constraints:
        out.append(f" {_MPS_SENSE[row.sense]}  {row.name}")

    entries: Dict[int, List[Tuple[str, Fraction]]] = {v.index: [] for v in model.variables}
    for index, coef in model.objective.items():
        entries[index].append(("obj", coef))
    for row in model.constraints:
        for index, coef in row.coeffs.items():
            entries[index].append((row.name, coef))

    out.append("COLUMNS")
    in_integer_block = False
    for var in model.variables:
        if var.is_binary and not in_integer_block:
            out.append("    MARKER  'MARKER'  'INTORG'")
            in_integer_block = True
        elif not var.is_binary and in_integer_block:
            out.append("    MARKER  'MARKER'  'INTEND'")
            in_integer_block = False
        column = entries[var.index] or [("obj", Fraction(0))]
        for row_name, coef in column:
            out.append(f"    {var.name}  {row_name}  {_number(coef)}")
    if in_integer_block:
        out.append("    MARKER  'MARKER'  'INTEND'")

    out.append("RHS")
    for row in model.constraints:
        if row.rhs:
            out.append(f"    RHS  {row.name}  {_number(row.rhs)}")

    out.append("BOUNDS")
    for var in model.variables:
        if var.is_binary:
            out.append(f" BV BND  {var.name}")
        elif var.lb == -math.inf and var.ub == math.inf:
            out.append(f" FR BND  {var.name}")
        elif var.lb == var.ub:
            out.append(f" FX BND  {var.name}  {_number(var.lb)}")
        else:
            if var.lb == -math.inf:
                out.append(f" MI BND  {var.name}")
            elif var.lb != 0:
                out.append(f" LO BND  {var.name}  {_number(var.lb)}")
            if var.ub != math.inf:
                out.append(f" UP BND  {var.name}  {_number(var.ub)}")

    for row in model.constraints:
        if not row.bilinear:
            continue
        out.append(f"QCMATRIX  {row.name}")
        # symmetric matrix: each product x*y with coefficient c appears as two c/2 entries
        for i, j, coef in row.bilinear:
            a, b = model.variables[i].name, model.variables[j].name
            if i == j:
                out.append(f"    {a}  {a}  {_number(coef)}")
            else:
                out.append(f"    {a}  {b}  {_number(coef / 2)}")
                out.append(f"    {b}  {a}  {_number(coef / 2)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export(model: OptModel, fmt: str) -> str:
    """Model text in 'lp' or 'mps' format"""
    fmt = fmt.lower()
    if fmt == "lp":
        return to_lp(model)
    if fmt == "mps":
        return to_mps(model)
    raise ParameterError(f"unknown export format {fmt!r}, expected lp or mps")


def write_model(model: OptModel, path: str, fmt: Optional[str] = None) -> str:
    """
    Write a model to disk; the format defaults to the file extension.

    Returns:
        str: Path written
    """
    fmt = fmt or os.path.splitext(path)[1].lstrip(".")
    text = export(model, fmt)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"Exported {model.name} as {fmt.upper()} to {path}")
    return path


class _ModelBuilder:
    """Collects variables by first use while parsing"""

    def __init__(self, name):
        self.model = OptModel(name)

    def var(self, name: str) -> int:
        try:
            return self.model.index_of(name)
        except KeyError:
            return self.model.add_variable(name)


def _parse_number(token: str) -> Fraction:
    lowered = token.lower()
    if lowered in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if lowered in ("-inf", "-infinity"):
        return -math.inf
    return Fraction(token)


def _is_number(token: str) -> bool:
    try:
        _parse_number(token)
    except (ValueError, ZeroDivisionError):
        return False
    return True


def _parse_expression(tokens: List[str], builder: _ModelBuilder):
    """Linear and bracketed bilinear terms until the end of the token list"""
    coeffs: Dict[int, Fraction] = {}
    bilinear = []
    sign = Fraction(1)
    coef = None
    position = 0
    while position < len(tokens):
        token = tokens[position]
        if token in ("+", "-"):
            sign = Fraction(-1 if token == "-" else 1)
        elif token == "[":
            end = tokens.index("]", position)
            inner = tokens[position + 1:end]
            inner_sign = Fraction(1)
            cursor = 0
            while cursor < len(inner):
                if inner[cursor] in ("+", "-"):
                    inner_sign = Fraction(-1 if inner[cursor] == "-" else 1)
                    cursor += 1
                    continue
                product_coef = Fraction(1)
                if _is_number(inner[cursor]):
                    product_coef = _parse_number(inner[cursor])
                    cursor += 1
                left = inner[cursor]
                if inner[cursor + 1] == "*":
                    right = inner[cursor + 2]
                    cursor += 3
                else:  # x ^ 2
                    right = left
                    cursor += 3
                bilinear.append((builder.var(left), builder.var(right), sign * inner_sign * product_coef))
                inner_sign = Fraction(1)
            position = end
            sign = Fraction(1)
        elif _is_number(token):
            coef = _parse_number(token)
        else:
            index = builder.var(token)
            value = sign * (coef if coef is not None else Fraction(1))
            coeffs[index] = coeffs.get(index, Fraction(0)) + value
            sign, coef = Fraction(1), None
        position += 1
    return coeffs, bilinear


def read_lp(text: str) -> OptModel:
    """
    Parse the LP dialect written by to_lp.

    Raises:
        ParameterError: on text outside that dialect
    """
    builder = _ModelBuilder("imported")
    sections: Dict[str, List[str]] = {}
    current = None
    sense = ObjectiveSense.MINIMIZE
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if raw.startswith("\\ Problem:"):
            builder.model.name = raw.split(":", 1)[1].strip()
            continue
        if not line:
            continue
        keyword = line.lower()
        if keyword in ("maximize", "maximum", "max", "minimize", "minimum", "min"):
            sense = ObjectiveSense.MAXIMIZE if keyword.startswith("max") else ObjectiveSense.MINIMIZE
            current = "objective"
        elif keyword in ("subject to", "such that", "st", "s.t."):
            current = "rows"
        elif keyword == "bounds":
            current = "bounds"
        elif keyword in ("binaries", "binary", "bin"):
            current = "binaries"
        elif keyword == "end":
            current = None
        elif current is None:
            raise ParameterError(f"LP text outside any section: {raw!r}")
        else:
            sections.setdefault(current, []).append(line)

    objective_tokens = " ".join(sections.get("objective", [])).replace("[", " [ ").replace("]", " ] ").split()
    if objective_tokens and objective_tokens[0].endswith(":"):
        objective_tokens = objective_tokens[1:]
    objective, _ = _parse_expression(objective_tokens, builder)

    senses = {"<=": Sense.LE, "=<": Sense.LE, ">=": Sense.GE, "=>": Sense.GE, "=": Sense.EQ}
    rows = []
    current = None
    for token in " ".join(sections.get("rows", [])).replace("[", " [ ").replace("]", " ] ").split():
        if current is None or current["rhs"] is not None:
            if not token.endswith(":"):
                raise ParameterError(f"LP constraint without a name near {token!r}")
            current = {"name": token[:-1], "lhs": [], "sense": None, "rhs": None}
            rows.append(current)
        elif current["sense"] is None:
            if token in senses:
                current["sense"] = senses[token]
            else:
                current["lhs"].append(token)
        else:
            current["rhs"] = _parse_number(token)
    parsed_rows = []
    for row in rows:
        if row["rhs"] is None:
            raise ParameterError(f"LP constraint {row['name']} has no right-hand side")
        coeffs, bilinear = _parse_expression(row["lhs"], builder)
        parsed_rows.append((row["name"], coeffs, row["sense"], row["rhs"], bilinear))

    for line in sections.get("bounds", []):
        tokens = line.split()
        if len(tokens) == 2 and tokens[1].lower() == "free":
            var = builder.model.variables[builder.var(tokens[0])]
            var.lb, var.ub = -math.inf, math.inf
        elif len(tokens) == 5:
            var = builder.model.variables[builder.var(tokens[2])]
            var.lb, var.ub = float(_parse_number(tokens[0])), float(_parse_number(tokens[4]))
        elif len(tokens) == 3 and tokens[1] in (">=", "<="):
            var = builder.model.variables[builder.var(tokens[0])]
            value = float(_parse_number(tokens[2]))
            if tokens[1] == ">=":
                var.lb = value
            else:
                var.ub = value
        else:
            raise ParameterError(f"unsupported bound line {line!r}")

    for line in sections.get("binaries", []):
        for name in line.split():
            var = builder.model.variables[builder.var(name)]
            var.vtype, var.lb, var.ub = VarType.BINARY, 0.0, 1.0

    model = builder.model
    for name, coeffs, row_sense, rhs, bilinear in parsed_rows:
        model.add_constraint(name, coeffs, row_sense, rhs, bilinear)
    model.set_objective(sense, objective)
    return model


def read_mps(text: str) -> OptModel:
    """
    Parse the free-MPS dialect written by to_mps.

    Raises:
        ParameterError: on unknown sections or rows
    """
    builder = _ModelBuilder("imported")
    sense = ObjectiveSense.MINIMIZE
    section = None
    objective_row = None
    row_order: List[str] = []
    row_sense: Dict[str, Sense] = {}
    row_coeffs: Dict[str, Dict[int, Fraction]] = {}
    row_rhs: Dict[str, Fraction] = {}
    row_bilinear: Dict[str, Dict[Tuple[int, int], Fraction]] = {}
    objective: Dict[int, Fraction] = {}
    integer_block = False
    qc_row = None
    mps_senses = {"L": Sense.LE, "G": Sense.GE, "E": Sense.EQ}

    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        tokens = raw.split()
        if not raw[0].isspace():
            section = tokens[0].upper()
            if section == "NAME" and len(tokens) > 1:
                builder.model.name = tokens[1]
            elif section == "OBJSENSE" and len(tokens) > 1:
                sense = ObjectiveSense.MAXIMIZE if tokens[1].upper().startswith("MAX") else ObjectiveSense.MINIMIZE
            elif section == "QCMATRIX":
                qc_row = tokens[1]
                row_bilinear.setdefault(qc_row, {})
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA", "OBJSENSE", "NAME"):
                raise ParameterError(f"unsupported MPS section {section}")
            continue

        if section == "OBJSENSE":
            sense = ObjectiveSense.MAXIMIZE if tokens[0].upper().startswith("MAX") else ObjectiveSense.MINIMIZE
        elif section == "ROWS":
            kind, name = tokens[0].upper(), tokens[1]
            if kind == "N":
                objective_row = objective_row or name
            else:
                row_order.append(name)
                row_sense[name] = mps_senses[kind]
                row_coeffs[name] = {}
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'") == "MARKER":
                integer_block = tokens[2].strip("'") == "INTORG"
                continue
            index = builder.var(tokens[0])
            if integer_block:
                var = builder.model.variables[index]
                var.vtype, var.lb, var.ub = VarType.BINARY, 0.0, 1.0
            for row_name, value in zip(tokens[1::2], tokens[2::2]):
                coef = Fraction(value)
                if row_name == objective_row:
                    if coef:
                        objective[index] = coef
                elif row_name in row_coeffs:
                    if coef:
                        row_coeffs[row_name][index] = coef
                else:
                    raise ParameterError(f"column {tokens[0]} references unknown row {row_name}")
        elif section == "RHS":
            for row_name, value in zip(tokens[1::2], tokens[2::2]):
                row_rhs[row_name] = Fraction(value)
        elif section == "BOUNDS":
            kind, name = tokens[0].upper(), tokens[2]
            var = builder.model.variables[builder.var(name)]
            value = float(Fraction(tokens[3])) if len(tokens) > 3 else None
            if kind == "FR":
                var.lb, var.ub = -math.inf, math.inf
            elif kind == "MI":
                var.lb = -math.inf
            elif kind == "LO":
                var.lb = value
            elif kind == "UP":
                var.ub = value
            elif kind == "FX":
                var.lb = var.ub = value
            elif kind == "BV":
                var.vtype, var.lb, var.ub = VarType.BINARY, 0.0, 1.0
            else:
                raise ParameterError(f"unsupported MPS bound type {kind}")
        elif section == "QCMATRIX":
            i, j = builder.var(tokens[0]), builder.var(tokens[1])
            key = (min(i, j), max(i, j))
            entries = row_bilinear[qc_row]
            entries[key] = entries.get(key, Fraction(0)) + Fraction(tokens[2])

    model = builder.model
    for name in row_order:
        bilinear = [(i, j, c) for (i, j), c in row_bilinear.get(name, {}).items() if c]
        model.add_constraint(name, row_coeffs[name], row_sense[name], row_rhs.get(name, Fraction(0)), bilinear)
    model.set_objective(sense, objective)
    return model
