"""Exact two-phase simplex over rationals; no tolerances, no floating point.

The solver works on a condensed (dictionary) tableau: one column per nonbasic
variable plus the right-hand side, one row per constraint plus the objective
row(s).  Slack variables start basic, so their identity columns are never
materialized; artificial variables are introduced only for rows infeasible at
the origin and their columns are deleted as soon as they leave the basis.

Pivot rules: ``bland`` (smallest-index, guaranteed terminating) and the
default ``auto``, which uses Dantzig's largest-coefficient rule and falls back
to Bland's rule whenever the objective stalls for ``stall_limit`` consecutive
degenerate pivots, returning to Dantzig on strict improvement.  This
terminates for the same reason Bland's rule does, while avoiding Bland's long
monotone paths on the large grid programs (pure Bland is an order of
magnitude slower on the dimension-8 full models).

The hot loop — the rank-one row update after a pivot — lives in a compiled
Cython kernel with a pure-Python fallback (see ``qvolume._backend``).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from qvolume._backend import PIVOT_BACKEND, pivot_update
from qvolume.kernel import ONE, ZERO, rational, rational_str
from qvolume.lp_model import LPModel, dualize

__all__ = [
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "SimplexError",
    "PivotLimitError",
    "LPSolution",
    "solve",
    "RowCheck",
    "FeasibilityReport",
    "check_feasible",
    "shuffle_variables",
    "PIVOT_BACKEND",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEFAULT_PIVOT_LIMIT = 10_000_000
DEFAULT_STALL_LIMIT = 5000


class SimplexError(Exception):
    """Internal solver inconsistency; always indicates a bug, not bad input."""


class PivotLimitError(SimplexError):
    """Pivot ceiling exceeded.  Bland's rule guarantees termination, so this
    signals a defect rather than a hard problem."""


@dataclass
class LPSolution:
    status: str
    objective: Optional[object]
    assignment: dict
    pivots: int
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "objective": None if self.objective is None else rational_str(self.objective),
            "assignment": {
                name: rational_str(value)
                for name, value in sorted(self.assignment.items())
            },
            "pivots": self.pivots,
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_json(cls, data: dict) -> "LPSolution":
        objective = data.get("objective")
        return cls(
            status=data["status"],
            objective=None if objective is None else rational(objective),
            assignment={k: rational(v) for k, v in data["assignment"].items()},
            pivots=int(data.get("pivots", 0)),
            provenance=dict(data.get("provenance", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


class _Tableau:
    """Condensed tableau with label bookkeeping.

    Column/row labels are integer ids: structural columns first (in declared
    variable order, free variables split into a +/- pair), then slack ids per
    row, then artificial ids.  Bland's rule orders candidates by these ids.
    """

    def __init__(self, model: LPModel):
        self.model = model
        self.pivots = 0
        self._build()

    # -- construction -----------------------------------------------------

    def _build(self):
        model = self.model
        col_info = []  # per structural column: (name, sign)
        self.var_columns = {}
        for variable in model.variables:
            cols = [(variable.name, 1)]
            if not variable.nonnegative:
                cols.append((variable.name, -1))
            for name, sign in cols:
                col_info.append((name, sign))
        n_struct = len(col_info)

        # Orient rows to "<=" and decide which need a surplus column and/or
        # an artificial basic variable.
        specs = []
        n_surplus = 0
        for row in model.constraints:
            coeffs, rel, rhs = dict(row.coeffs), row.rel, row.rhs
            if rel == ">=":
                coeffs = {k: -v for k, v in coeffs.items()}
                rhs = -rhs
                rel = "<="
            if rel == "<=":
                if rhs >= ZERO:
                    specs.append((coeffs, rhs, None))
                else:
                    coeffs = {k: -v for k, v in coeffs.items()}
                    specs.append((coeffs, -rhs, n_surplus))
                    n_surplus += 1
            else:  # equality
                if rhs < ZERO:
                    coeffs = {k: -v for k, v in coeffs.items()}
                    rhs = -rhs
                specs.append((coeffs, rhs, "artificial"))

        n_rows = len(specs)
        self.n_cols = n_struct + n_surplus
        self.rhs_col = self.n_cols
        width = self.n_cols + 1

        # Label ids: structural cols, surplus slack cols, basic slacks, artificials.
        self.col_ids = list(range(self.n_cols))
        self.col_var = {i: col_info[i] for i in range(n_struct)}
        slack_base = self.n_cols
        self.slack_base = slack_base

        name_to_cols: dict = {}
        for col, (name, sign) in enumerate(col_info):
            name_to_cols.setdefault(name, []).append((col, sign))

        rows = []
        self.basis = []
        self.artificial_ids = set()
        artificial_rows = []
        for row_index, (coeffs, rhs, kind) in enumerate(specs):
            vector = [ZERO] * width
            for name, coeff in coeffs.items():
                for col, sign in name_to_cols[name]:
                    vector[col] = vector[col] + coeff * sign
            vector[self.rhs_col] = rhs
            if kind is None:
                self.basis.append(slack_base + row_index)
            elif kind == "artificial":
                art = slack_base + n_rows + row_index
                self.artificial_ids.add(art)
                self.basis.append(art)
                artificial_rows.append(row_index)
            else:
                surplus_col = n_struct + kind
                vector[surplus_col] = -ONE
                self.col_ids[surplus_col] = slack_base + row_index
                art = slack_base + n_rows + row_index
                self.artificial_ids.add(art)
                self.basis.append(art)
                artificial_rows.append(row_index)
            rows.append(vector)

        self.n_rows = n_rows
        sense = ONE if model.sense == "min" else -ONE
        z_row = [ZERO] * width
        for name, coeff in model.objective.items():
            for col, sign in name_to_cols[name]:
                z_row[col] = z_row[col] - coeff * sign * sense
        rows.append(z_row)
        self.z_index = n_rows
        self.sense = sense

        if artificial_rows:
            w_row = [ZERO] * width
            for row_index in artificial_rows:
                vector = rows[row_index]
                for j in range(width):
                    if vector[j]:
                        w_row[j] = w_row[j] + vector[j]
            rows.append(w_row)
            self.w_index = n_rows + 1
        else:
            self.w_index = None
        self.rows = rows

    # -- pivoting ----------------------------------------------------------

    def _entering(self, obj_index: int, mode: str) -> Optional[int]:
        obj = self.rows[obj_index]
        best_col = None
        best_id = None
        if mode == "bland":
            for col in range(self.n_cols):
                if obj[col] > ZERO:
                    cid = self.col_ids[col]
                    if best_id is None or cid < best_id:
                        best_id = cid
                        best_col = col
        else:
            best_value = None
            for col in range(self.n_cols):
                value = obj[col]
                if value > ZERO and (
                    best_value is None
                    or value > best_value
                    or (value == best_value and self.col_ids[col] < best_id)
                ):
                    best_value = value
                    best_id = self.col_ids[col]
                    best_col = col
        return best_col

    def _leaving(self, col: int) -> Optional[int]:
        best_row = None
        best_ratio = None
        rhs_col = self.rhs_col
        for i in range(self.n_rows):
            coeff = self.rows[i][col]
            if coeff > ZERO:
                ratio = self.rows[i][rhs_col] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        return best_row

    def _entering_best(self, obj_index: int) -> Optional[tuple]:
        """Greatest-improvement pricing: maximize reduced cost times min ratio.

        Falls back to the Dantzig choice when every improving column is
        blocked at ratio zero (fully degenerate vertex).  Returns (col, row).
        """
        obj = self.rows[obj_index]
        rhs_col = self.rhs_col
        best = None  # (improvement, -col_id, col, row)
        dantzig = None
        for col in range(self.n_cols):
            value = obj[col]
            if value <= ZERO:
                continue
            row = self._leaving(col)
            if row is None:
                return col, None  # unbounded direction
            ratio = self.rows[row][rhs_col] / self.rows[row][col]
            gain = value * ratio
            cid = self.col_ids[col]
            if best is None or gain > best[0] or (gain == best[0] and cid < best[1]):
                best = (gain, cid, col, row)
            if dantzig is None or value > dantzig[0] or (
                value == dantzig[0] and cid < dantzig[1]
            ):
                dantzig = (value, cid, col, row)
        if best is None:
            return None
        if best[0] == ZERO:
            return dantzig[2], dantzig[3]
        return best[2], best[3]

    def _pivot(self, row: int, col: int, pivot_limit: int):
        pivot_update(self.rows, row, col)
        self.pivots += 1
        if self.pivots > pivot_limit:
            raise PivotLimitError(f"pivot limit {pivot_limit} exceeded")
        leaving = self.basis[row]
        self.basis[row] = self.col_ids[col]
        self.col_ids[col] = leaving
        if leaving in self.artificial_ids:
            self._drop_column(col)

    def _drop_column(self, col: int):
        for vector in self.rows:
            del vector[col]
        del self.col_ids[col]
        self.n_cols -= 1
        self.rhs_col -= 1

    def _minimize(self, obj_index: int, rule: str, pivot_limit: int, stall_limit: int):
        """Run pivots until the row at obj_index is optimal.

        Returns "optimal" or "unbounded".
        """
        if rule == "auto":
            mode = "dantzig"
        else:
            mode = rule
        stall = 0
        last = self.rows[obj_index][self.rhs_col]
        while True:
            if mode == "best":
                pick = self._entering_best(obj_index)
                if pick is None:
                    return OPTIMAL
                col, row = pick
            else:
                col = self._entering(obj_index, mode)
                if col is None:
                    return OPTIMAL
                row = self._leaving(col)
            if row is None:
                return UNBOUNDED
            self._pivot(row, col, pivot_limit)
            if rule in ("auto", "best"):
                current = self.rows[obj_index][self.rhs_col]
                if current != last:
                    stall = 0
                    mode = "best" if rule == "best" else "dantzig"
                else:
                    stall += 1
                    if stall >= stall_limit:
                        mode = "bland"
                last = current

    def run(self, rule: str, pivot_limit: int, stall_limit: int) -> str:
        if self.w_index is not None:
            status = self._minimize(self.w_index, rule, pivot_limit, stall_limit)
            if status == UNBOUNDED:
                raise SimplexError("phase-1 objective cannot be unbounded")
            if self.rows[self.w_index][self.rhs_col] != ZERO:
                return INFEASIBLE
            self._evict_artificials(pivot_limit)
            self.rows.pop()  # w-row
            self.w_index = None
        return self._minimize(self.z_index, rule, pivot_limit, stall_limit)

    def _evict_artificials(self, pivot_limit: int):
        """Drive artificials left basic at value 0 out, dropping redundant rows."""
        row = 0
        while row < self.n_rows:
            if self.basis[row] not in self.artificial_ids:
                row += 1
                continue
            pivot_col = None
            for col in range(self.n_cols):
                if self.rows[row][col] and self.col_ids[col] not in self.artificial_ids:
                    pivot_col = col
                    break
            if pivot_col is None:
                self.rows.pop(row)
                self.basis.pop(row)
                self.n_rows -= 1
                self.z_index -= 1
                self.w_index -= 1
            else:
                self._pivot(row, pivot_col, pivot_limit)
                row += 1

    # -- extraction ---------------------------------------------------------

    def assignment(self) -> dict:
        values = {variable.name: ZERO for variable in self.model.variables}
        for row in range(self.n_rows):
            label = self.basis[row]
            info = self.col_var.get(label)
            if info is not None:
                name, sign = info
                values[name] = values[name] + sign * self.rows[row][self.rhs_col]
        return values

    def objective_value(self):
        return self.sense * self.rows[self.z_index][self.rhs_col]

    def row_multipliers(self) -> list:
        """Shadow price of every model row, relative to its <=-oriented form.

        The multiplier of row i is the z-row entry at the column of its slack
        (zero while the slack is basic).  Rows dropped as redundant get 0.
        Only valid at optimality.
        """
        z_row = self.rows[self.z_index]
        position = {cid: col for col, cid in enumerate(self.col_ids)}
        in_basis = set(self.basis)
        multipliers = []
        for i in range(len(self.model.constraints)):
            slack_id = self.slack_base + i
            if slack_id in in_basis:
                multipliers.append(ZERO)
            elif slack_id in position:
                multipliers.append(z_row[position[slack_id]])
            else:
                multipliers.append(ZERO)
        return multipliers


def _verified_solution(model, assignment, objective, pivots, extra=None) -> LPSolution:
    recomputed = sum(
        (coeff * assignment[name] for name, coeff in model.objective.items()), ZERO
    )
    if recomputed != objective:
        raise SimplexError("objective mismatch between tableau and assignment")
    report = check_feasible(model, assignment)
    if not report.feasible:
        raise SimplexError(
            f"optimal assignment violates {report.violations[0].label!r}"
        )
    provenance = dict(model.provenance)
    if extra:
        provenance.update(extra)
    return LPSolution(OPTIMAL, objective, assignment, pivots, provenance)


def _dual_eligible(model: LPModel) -> bool:
    return all(v.nonnegative for v in model.variables) and all(
        row.rel != "=" for row in model.constraints
    )


def _solve_primal(model, rule, pivot_limit, stall_limit) -> LPSolution:
    tableau = _Tableau(model)
    status = tableau.run(rule, pivot_limit, stall_limit)
    if status != OPTIMAL:
        return LPSolution(status, None, {}, tableau.pivots, dict(model.provenance))
    return _verified_solution(
        model, tableau.assignment(), tableau.objective_value(), tableau.pivots
    )


def _solve_dual(model, rule, pivot_limit, stall_limit) -> Optional[LPSolution]:
    """Solve through the LP dual, recovering the primal point from the shadow
    prices of the dual rows; returns None when the outcome cannot be
    classified on the dual side (caller then solves the primal directly)."""
    if not _dual_eligible(model):
        raise ValueError(
            "dual solving needs nonnegative variables and inequality rows only"
        )
    if model.sense == "max":
        min_model = LPModel(
            variables=list(model.variables),
            constraints=list(model.constraints),
            objective={k: -v for k, v in model.objective.items()},
            sense="min",
            provenance=dict(model.provenance),
        )
    else:
        min_model = model
    dual = dualize(min_model)
    tableau = _Tableau(dual)
    status = tableau.run(rule, pivot_limit, stall_limit)
    if status == UNBOUNDED:
        # weak duality: an unbounded dual leaves no room for a primal point
        return LPSolution(INFEASIBLE, None, {}, tableau.pivots, dict(model.provenance))
    if status != OPTIMAL:
        return None
    multipliers = tableau.row_multipliers()
    assignment = {
        name: -multipliers[j] for j, name in enumerate(min_model.variable_names)
    }
    min_objective = -tableau.objective_value()
    objective = -min_objective if model.sense == "max" else min_objective
    return _verified_solution(
        model, assignment, objective, tableau.pivots, extra={"via": "dual"}
    )


def solve(
    model: LPModel,
    rule: str = "auto",
    pivot_limit: int = DEFAULT_PIVOT_LIMIT,
    stall_limit: int = DEFAULT_STALL_LIMIT,
    via: str = "auto",
) -> LPSolution:
    """Solve the model exactly; the returned assignment is a basic feasible
    solution re-verified row by row against the source model.

    ``via`` selects the tableau: ``primal``, ``dual`` (solve the LP dual and
    read the primal point off the shadow prices, preferable when the model has
    many more rows than variables) or ``auto``.
    """
    if rule not in ("auto", "bland", "dantzig", "best"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    if via not in ("auto", "primal", "dual"):
        raise ValueError(f"unknown via {via!r}")
    if via == "auto":
        tall = len(model.constraints) >= max(1000, 4 * len(model.variables))
        via = "dual" if tall and _dual_eligible(model) else "primal"
    if via == "dual":
        solution = _solve_dual(model, rule, pivot_limit, stall_limit)
        if solution is not None:
            return solution
    return _solve_primal(model, rule, pivot_limit, stall_limit)


# ---------------------------------------------------------------------------
# Feasibility checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RowCheck:
    label: str
    lhs: object
    rel: str
    rhs: object
    ok: bool

    @property
    def residual(self):
        """Signed slack: nonnegative iff the row holds."""
        if self.rel == "<=":
            return self.rhs - self.lhs
        if self.rel == ">=":
            return self.lhs - self.rhs
        return -abs(self.lhs - self.rhs)

    def describe(self) -> str:
        status = "ok" if self.ok else "VIOLATED"
        return (
            f"{self.label}: {rational_str(self.lhs)} {self.rel} "
            f"{rational_str(self.rhs)} [{status}]"
        )


@dataclass
class FeasibilityReport:
    checks: list

    @property
    def violations(self) -> list:
        return [check for check in self.checks if not check.ok]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": [
                {
                    "label": check.label,
                    "lhs": rational_str(check.lhs),
                    "rel": check.rel,
                    "rhs": rational_str(check.rhs),
                    "residual": rational_str(check.residual),
                }
                for check in self.violations
            ],
        }


def check_feasible(model: LPModel, assignment: Mapping) -> FeasibilityReport:
    """Evaluate every row exactly; lists each violated row with its residual."""
    values = {}
    names = {variable.name for variable in model.variables}
    for name, value in assignment.items():
        if name not in names:
            raise KeyError(f"unknown variable {name!r} in assignment")
        values[name] = rational(value)
    missing = names - set(values)
    if missing:
        raise KeyError(f"assignment not total; missing {sorted(missing)[:3]}")
    checks = []
    for row in model.constraints:
        lhs = ZERO
        for name, coeff in row.coeffs.items():
            lhs += coeff * values[name]
        if row.rel == "<=":
            ok = lhs <= row.rhs
        elif row.rel == ">=":
            ok = lhs >= row.rhs
        else:
            ok = lhs == row.rhs
        checks.append(RowCheck(row.label, lhs, row.rel, row.rhs, ok))
    return FeasibilityReport(checks)


def shuffle_variables(model: LPModel, seed: int) -> LPModel:
    """Model with the variable table reordered (rows untouched).

    Solving the shuffled model follows a different pivot path; the optimal
    objective must come out as the identical rational.
    """
    rng = random.Random(seed)
    variables = list(model.variables)
    rng.shuffle(variables)
    return LPModel(
        variables=variables,
        constraints=list(model.constraints),
        objective=dict(model.objective),
        sense=model.sense,
        provenance={**model.provenance, "shuffled_seed": seed},
    )
