"""Linear programs for extremal box volumes, in full and symmetric form.

Three program families are built here, all over exact rationals:

* ``min2`` / ``max2``: decision variables are the box endpoints a_i, b_i and a
  grid value q_I for every I in {0,1}^d; the objective is the signed corner
  sum of the box.  Constraints are the box range, a monotonicity and a
  Lipschitz row for every adjacent vertex pair, and the Frechet-Hoeffding
  envelope at every vertex (max{0, G} <= q_I <= H linearized into rows).
* ``min3``: the same over the 3-level grid {a_i, b_i, 1}^d, with the Lipschitz
  width depending on the target level of the step (b_l - a_l into level 1,
  1 - b_l into level 2).  The objective sums only over the 2^d inner-box
  corners (indices with no level-2 coordinate).

Because the constraint set is invariant under coordinate permutations, each
family also has a symmetric reduction whose unknowns are a single pair (a, b)
and one value per level-count class; ``lift_symmetric`` maps its solutions
back to full grids.

Strict inequalities a_i < b_i are modeled non-strictly; strictness is checked
on the optimum after solving (LP feasible sets are closed, and degenerate
boxes have volume 0, never beating the nonzero optima).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Mapping, Optional

from qvolume.kernel import (
    ONE,
    ZERO,
    GridSolution,
    SymmetricLevelValues,
    THREE_LEVEL,
    TWO_LEVEL,
    adjacent_pairs,
    multi_indices,
    one_norm,
    parse_rational,
    rational,
    rational_str,
    sign_of,
)

__all__ = [
    "Variable",
    "Constraint",
    "LPModel",
    "FULL_2GRID_MAX_DIMENSION",
    "FULL_3GRID_MAX_DIMENSION",
    "build_min_2grid",
    "build_max_2grid",
    "build_min_3grid",
    "symmetrize",
    "lift_symmetric",
    "grid_solution_from_assignment",
    "compositions",
    "permute_axes",
]

# Beyond these the full index sets blow up; only the symmetric form is offered.
FULL_2GRID_MAX_DIMENSION = 10
FULL_3GRID_MAX_DIMENSION = 6


@dataclass(frozen=True)
class Variable:
    """A model variable: name, role and whether x >= 0 may be assumed.

    Roles: ``box-lower`` (a_l), ``box-upper`` (b_l), ``grid-value`` (q_I),
    ``symmetric-grid-value``.  All builders mark variables nonnegative since
    the rows force x >= 0 on the feasible set anyway; the solver splits any
    variable left free into a difference of nonnegatives.
    """

    name: str
    role: str
    nonnegative: bool = False


@dataclass(frozen=True)
class Constraint:
    label: str
    coeffs: Mapping
    rel: str  # "<=", ">=" or "="
    rhs: object

    def __post_init__(self):
        if self.rel not in ("<=", ">=", "="):
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(
            self, "coeffs", {name: rational(c) for name, c in self.coeffs.items()}
        )
        object.__setattr__(self, "rhs", rational(self.rhs))

    @property
    def category(self) -> str:
        return self.label.split(":", 1)[0]


@dataclass
class LPModel:
    """An LP in exact rationals: variables, rows, objective and provenance."""

    variables: list
    constraints: list
    objective: Mapping
    sense: str  # "min" or "max"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"unknown sense {self.sense!r}")
        self.objective = {name: rational(c) for name, c in self.objective.items()}
        names = {v.name for v in self.variables}
        if len(names) != len(self.variables):
            raise ValueError("duplicate variable names")
        for row in self.constraints:
            unknown = set(row.coeffs) - names
            if unknown:
                raise ValueError(f"row {row.label!r} references unknown {unknown}")
        unknown = set(self.objective) - names
        if unknown:
            raise ValueError(f"objective references unknown {unknown}")

    @property
    def variable_names(self) -> list:
        return [v.name for v in self.variables]

    def census(self) -> dict:
        """Row counts per label category (box/adj/qlb/glb/hub/...)."""
        counts: dict = {}
        for row in self.constraints:
            counts[row.category] = counts.get(row.category, 0) + 1
        return counts

    def to_json(self) -> dict:
        return {
            "provenance": dict(self.provenance),
            "sense": self.sense,
            "variables": [
                {"name": v.name, "role": v.role, "nonnegative": v.nonnegative}
                for v in self.variables
            ],
            "constraints": [
                {
                    "label": row.label,
                    "coeffs": {
                        name: rational_str(c) for name, c in sorted(row.coeffs.items())
                    },
                    "rel": row.rel,
                    "rhs": rational_str(row.rhs),
                }
                for row in self.constraints
            ],
            "objective": {
                name: rational_str(c) for name, c in sorted(self.objective.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "LPModel":
        return cls(
            variables=[
                Variable(v["name"], v["role"], bool(v.get("nonnegative")))
                for v in data["variables"]
            ],
            constraints=[
                Constraint(
                    label=row["label"],
                    coeffs={k: parse_rational(v) for k, v in row["coeffs"].items()},
                    rel=row["rel"],
                    rhs=parse_rational(row["rhs"]),
                )
                for row in data["constraints"]
            ],
            objective={k: parse_rational(v) for k, v in data["objective"].items()},
            sense=data["sense"],
            provenance=dict(data.get("provenance", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Full models
# ---------------------------------------------------------------------------

def _q_name(index: tuple) -> str:
    return "q_" + "".join(str(level) for level in index)


def _box_variables(dimension: int) -> list:
    names = []
    for i in range(1, dimension + 1):
        names.append(Variable(f"a{i}", "box-lower", nonnegative=True))
    for i in range(1, dimension + 1):
        names.append(Variable(f"b{i}", "box-upper", nonnegative=True))
    return names


def _box_rows(dimension: int) -> list:
    rows = []
    for i in range(1, dimension + 1):
        rows.append(Constraint(f"box:a{i}>=0", {f"a{i}": 1}, ">=", 0))
        rows.append(Constraint(f"box:a{i}<=b{i}", {f"a{i}": 1, f"b{i}": -1}, "<=", 0))
        rows.append(Constraint(f"box:b{i}<=1", {f"b{i}": 1}, "<=", 1))
    return rows


def _coordinate_var(level: int, axis: int) -> Optional[str]:
    """LP variable carrying the coordinate of a grid level, None for the constant 1."""
    if level == 0:
        return f"a{axis + 1}"
    if level == 1:
        return f"b{axis + 1}"
    return None


def _vertex_rows(index: tuple, levels: int) -> list:
    """Frechet envelope at one vertex: q >= 0, q >= G linearized, q <= each coord."""
    q = _q_name(index)
    rows = [Constraint(f"qlb:{q}", {q: 1}, ">=", 0)]
    coeffs = {q: 1}
    constant = 0
    for axis, level in enumerate(index):
        var = _coordinate_var(level, axis)
        if var is None:
            constant += 1
        else:
            coeffs[var] = coeffs.get(var, 0) - 1
    # q_I - sum of variable coordinates >= (d - 1 lowered by constant coords) negated
    rows.append(Constraint(f"glb:{q}", coeffs, ">=", constant - len(index) + 1))
    for axis, level in enumerate(index):
        var = _coordinate_var(level, axis)
        if var is None:
            rows.append(Constraint(f"hub:{q}:x{axis + 1}", {q: 1}, "<=", 1))
        else:
            rows.append(
                Constraint(f"hub:{q}:x{axis + 1}", {q: 1, var: -1}, "<=", 0)
            )
    return rows


def _grid_objective(dimension: int) -> dict:
    return {
        _q_name(index): sign_of(index) for index in multi_indices(dimension, 1)
    }


def _build_2grid(dimension: int, sense: str) -> LPModel:
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    if dimension > FULL_2GRID_MAX_DIMENSION:
        raise ValueError(
            f"full 2-grid model capped at dimension {FULL_2GRID_MAX_DIMENSION}; "
            "use the symmetric form"
        )
    variables = _box_variables(dimension)
    variables += [
        Variable(_q_name(index), "grid-value", nonnegative=True)
        for index in multi_indices(dimension, 1)
    ]
    rows = _box_rows(dimension)
    for lower, upper, axis in adjacent_pairs(dimension, 1):
        lo, hi = _q_name(lower), _q_name(upper)
        rows.append(Constraint(f"adj:mono:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
        rows.append(
            Constraint(
                f"adj:lip:{hi}-{lo}",
                {hi: 1, lo: -1, f"b{axis + 1}": -1, f"a{axis + 1}": 1},
                "<=",
                0,
            )
        )
    for index in multi_indices(dimension, 1):
        rows.extend(_vertex_rows(index, 1))
    return LPModel(
        variables=variables,
        constraints=rows,
        objective=_grid_objective(dimension),
        sense=sense,
        provenance={
            "lp": "min2" if sense == "min" else "max2",
            "dimension": dimension,
            "form": "full",
        },
    )


def build_min_2grid(dimension: int) -> LPModel:
    """Minimal signed volume over 2-level grids (the relaxation program)."""
    return _build_2grid(dimension, "min")


def build_max_2grid(dimension: int) -> LPModel:
    """Maximal signed volume over 2-level grids."""
    return _build_2grid(dimension, "max")


def build_min_3grid(dimension: int) -> LPModel:
    """Minimal signed inner-box volume over 3-level grids {a_i, b_i, 1}^d."""
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    if dimension > FULL_3GRID_MAX_DIMENSION:
        raise ValueError(
            f"full 3-grid model capped at dimension {FULL_3GRID_MAX_DIMENSION}; "
            "use the symmetric form"
        )
    variables = _box_variables(dimension)
    variables += [
        Variable(_q_name(index), "grid-value", nonnegative=True)
        for index in multi_indices(dimension, 2)
    ]
    rows = _box_rows(dimension)
    for lower, upper, axis in adjacent_pairs(dimension, 2):
        lo, hi = _q_name(lower), _q_name(upper)
        rows.append(Constraint(f"adj:mono:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
        if upper[axis] == 1:
            width = {f"b{axis + 1}": -1, f"a{axis + 1}": 1}
            rhs = 0
        else:  # step into the top level: width 1 - b
            width = {f"b{axis + 1}": 1}
            rhs = 1
        coeffs = {hi: 1, lo: -1}
        for name, c in width.items():
            coeffs[name] = coeffs.get(name, 0) + c
        rows.append(Constraint(f"adj:lip:{hi}-{lo}", coeffs, "<=", rhs))
    for index in multi_indices(dimension, 2):
        rows.extend(_vertex_rows(index, 2))
    objective = {}
    for index in multi_indices(dimension, 2):
        if max(index) <= 1:  # inner-box corners only
            objective[_q_name(index)] = sign_of(index)
    return LPModel(
        variables=variables,
        constraints=rows,
        objective=objective,
        sense="min",
        provenance={"lp": "min3", "dimension": dimension, "form": "full"},
    )


# ---------------------------------------------------------------------------
# Symmetric reductions
# ---------------------------------------------------------------------------

def compositions(total: int, parts: int) -> Iterator[tuple]:
    """Nonnegative integer tuples of the given length summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def _sym2_name(ones: int) -> str:
    return f"q{ones}"


def _sym3_name(counts: tuple) -> str:
    return "q{}_{}_{}".format(*counts)


def _symmetric_2grid(dimension: int, sense: str, lp: str) -> LPModel:
    variables = [
        Variable("a", "box-lower", nonnegative=True),
        Variable("b", "box-upper", nonnegative=True),
    ]
    variables += [
        Variable(_sym2_name(k), "symmetric-grid-value", nonnegative=True)
        for k in range(dimension + 1)
    ]
    rows = [
        Constraint("box:a>=0", {"a": 1}, ">=", 0),
        Constraint("box:a<=b", {"a": 1, "b": -1}, "<=", 0),
        Constraint("box:b<=1", {"b": 1}, "<=", 1),
    ]
    for k in range(dimension):
        lo, hi = _sym2_name(k), _sym2_name(k + 1)
        rows.append(Constraint(f"adj:mono:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
        rows.append(
            Constraint(f"adj:lip:{hi}-{lo}", {hi: 1, lo: -1, "b": -1, "a": 1}, "<=", 0)
        )
    for k in range(dimension + 1):
        q = _sym2_name(k)
        rows.append(Constraint(f"qlb:{q}", {q: 1}, ">=", 0))
        # vertex with k coordinates at b and d-k at a
        rows.append(
            Constraint(
                f"glb:{q}",
                {q: 1, "a": -(dimension - k), "b": -k},
                ">=",
                1 - dimension,
            )
        )
        if k < dimension:
            rows.append(Constraint(f"hub:{q}:a", {q: 1, "a": -1}, "<=", 0))
        if k > 0:
            rows.append(Constraint(f"hub:{q}:b", {q: 1, "b": -1}, "<=", 0))
    objective = {
        _sym2_name(k): rational((-1) ** (dimension - k) * comb(dimension, k))
        for k in range(dimension + 1)
    }
    return LPModel(
        variables=variables,
        constraints=rows,
        objective=objective,
        sense=sense,
        provenance={"lp": lp, "dimension": dimension, "form": "symmetric"},
    )


def _symmetric_3grid(dimension: int) -> LPModel:
    classes = sorted(compositions(dimension, 3))
    variables = [
        Variable("a", "box-lower", nonnegative=True),
        Variable("b", "box-upper", nonnegative=True),
    ]
    variables += [
        Variable(_sym3_name(c), "symmetric-grid-value", nonnegative=True)
        for c in classes
    ]
    rows = [
        Constraint("box:a>=0", {"a": 1}, ">=", 0),
        Constraint("box:a<=b", {"a": 1, "b": -1}, "<=", 0),
        Constraint("box:b<=1", {"b": 1}, "<=", 1),
    ]
    for counts in classes:
        na, nb, n1 = counts
        lo = _sym3_name(counts)
        if na >= 1:  # one coordinate steps a -> b
            hi = _sym3_name((na - 1, nb + 1, n1))
            rows.append(Constraint(f"adj:mono:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
            rows.append(
                Constraint(
                    f"adj:lip:{hi}-{lo}", {hi: 1, lo: -1, "b": -1, "a": 1}, "<=", 0
                )
            )
        if nb >= 1:  # one coordinate steps b -> 1
            hi = _sym3_name((na, nb - 1, n1 + 1))
            rows.append(Constraint(f"adj:mono:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
            rows.append(
                Constraint(f"adj:lip:{hi}-{lo}", {hi: 1, lo: -1, "b": 1}, "<=", 1)
            )
    for counts in classes:
        na, nb, n1 = counts
        q = _sym3_name(counts)
        rows.append(Constraint(f"qlb:{q}", {q: 1}, ">=", 0))
        rows.append(
            Constraint(
                f"glb:{q}", {q: 1, "a": -na, "b": -nb}, ">=", n1 - dimension + 1
            )
        )
        if na >= 1:
            rows.append(Constraint(f"hub:{q}:a", {q: 1, "a": -1}, "<=", 0))
        if nb >= 1:
            rows.append(Constraint(f"hub:{q}:b", {q: 1, "b": -1}, "<=", 0))
        if n1 >= 1:
            rows.append(Constraint(f"hub:{q}:1", {q: 1}, "<=", 1))
    objective = {
        _sym3_name((dimension - nb, nb, 0)): rational(
            (-1) ** (dimension - nb) * comb(dimension, nb)
        )
        for nb in range(dimension + 1)
    }
    return LPModel(
        variables=variables,
        constraints=rows,
        objective=objective,
        sense="min",
        provenance={"lp": "min3", "dimension": dimension, "form": "symmetric"},
    )


def symmetrize(model_kind: str, dimension: int) -> LPModel:
    """Symmetric reduction of one of the three programs.

    Valid because the full constraint set is permutation-invariant: averaging
    any optimal solution over all axis permutations stays feasible (the set is
    convex) with the same objective, so an optimum with equal endpoints and
    class-constant values always exists.
    """
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    if model_kind == "min2":
        return _symmetric_2grid(dimension, "min", "min2")
    if model_kind == "max2":
        return _symmetric_2grid(dimension, "max", "max2")
    if model_kind == "min3":
        return _symmetric_3grid(dimension)
    raise ValueError(f"unknown model kind {model_kind!r}")


def lift_symmetric(assignment: Mapping, dimension: int, kind: str) -> GridSolution:
    """Full grid solution q_I := q_class(I) from a symmetric assignment.

    Feasible for the full model whenever the assignment is feasible for the
    reduced model, since every full constraint is a permutation image of a
    class representative.
    """
    a = rational(assignment["a"])
    b = rational(assignment["b"])
    if kind == TWO_LEVEL:
        table = {
            (dimension - k, k): rational(assignment[_sym2_name(k)])
            for k in range(dimension + 1)
        }
        values = SymmetricLevelValues(dimension, 1, table)
    elif kind == THREE_LEVEL:
        table = {
            counts: rational(assignment[_sym3_name(counts)])
            for counts in compositions(dimension, 3)
        }
        values = SymmetricLevelValues(dimension, 2, table)
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return GridSolution(
        dimension=dimension,
        kind=kind,
        a=(a,) * dimension,
        b=(b,) * dimension,
        values=values,
    )


def grid_solution_from_assignment(model: LPModel, assignment: Mapping) -> GridSolution:
    """Assemble the grid solution encoded by a solved model's assignment."""
    lp = model.provenance.get("lp")
    dimension = model.provenance.get("dimension")
    form = model.provenance.get("form")
    if lp not in ("min2", "max2", "min3") or dimension is None:
        raise ValueError("model does not describe a grid program")
    kind = THREE_LEVEL if lp == "min3" else TWO_LEVEL
    if form == "symmetric":
        return lift_symmetric(assignment, dimension, kind)
    levels = 2 if kind == THREE_LEVEL else 1
    values = {
        index: rational(assignment[_q_name(index)])
        for index in multi_indices(dimension, levels)
    }
    return GridSolution(
        dimension=dimension,
        kind=kind,
        a=tuple(rational(assignment[f"a{i}"]) for i in range(1, dimension + 1)),
        b=tuple(rational(assignment[f"b{i}"]) for i in range(1, dimension + 1)),
        values=values,
    )


def dualize(model: LPModel) -> LPModel:
    """LP dual of the model, as a minimization over nonnegative row multipliers.

    With the primal written as min c'x s.t. Ax <= b (rows oriented), x >= 0,
    the model returned is min b'u s.t. A'u >= -c, u >= 0, whose optimal value
    is the negative of the primal optimum.  Free primal variables yield
    equality dual rows.  Used to solve the tall grid programs on the short
    side of the constraint matrix.
    """
    if model.sense != "min":
        raise ValueError("dualize expects a minimization model")
    columns: dict = {name: {} for name in model.variable_names}
    rhs = []
    variables = []
    for i, row in enumerate(model.constraints):
        coeffs, rel, b = row.coeffs, row.rel, row.rhs
        flip = rel == ">="
        for name, coeff in coeffs.items():
            columns[name][f"u{i}"] = -coeff if flip else coeff
        rhs.append(-b if flip else b)
        variables.append(
            Variable(f"u{i}", "dual-multiplier", nonnegative=rel != "=")
        )
    rows = []
    nonneg = {v.name: v.nonnegative for v in model.variables}
    for name in model.variable_names:
        rel = ">=" if nonneg[name] else "="
        rows.append(
            Constraint(
                f"dual:{name}", columns[name], rel, -model.objective.get(name, ZERO)
            )
        )
    objective = {f"u{i}": value for i, value in enumerate(rhs) if value}
    return LPModel(
        variables=variables,
        constraints=rows,
        objective=objective,
        sense="min",
        provenance={**model.provenance, "dual_of": model.provenance.get("lp")},
    )


def permute_axes(model: LPModel, order: list) -> LPModel:
    """Model with variables renamed along an axis permutation.

    Used by the optimality cross-check: the permuted model must solve to the
    identical objective value.
    """
    dimension = model.provenance.get("dimension")
    if dimension is None or len(order) != dimension:
        raise ValueError("permutation length must equal the model dimension")

    def rename(name: str) -> str:
        if name.startswith("q_"):
            levels = name[2:]
            return "q_" + "".join(levels[order[axis]] for axis in range(dimension))
        for prefix in ("a", "b"):
            if name.startswith(prefix) and name[len(prefix) :].isdigit():
                axis = int(name[len(prefix) :]) - 1
                return f"{prefix}{order[axis] + 1}"
        return name

    return LPModel(
        variables=[
            Variable(rename(v.name), v.role, v.nonnegative) for v in model.variables
        ],
        constraints=[
            Constraint(
                label=row.label,
                coeffs={rename(name): c for name, c in row.coeffs.items()},
                rel=row.rel,
                rhs=row.rhs,
            )
            for row in model.constraints
        ],
        objective={rename(name): c for name, c in model.objective.items()},
        sense=model.sense,
        provenance={**model.provenance, "permuted": True},
    )
