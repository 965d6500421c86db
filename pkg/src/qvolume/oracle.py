"""Independent brute-force cross-checks at small scale.

``inner_lp`` freezes the box endpoints and optimizes only the grid values, so
the feasible region comes straight from the monotonicity, Lipschitz and
envelope definitions with numeric bounds; the constraint rows are built here,
not by the model builders (single collapsed rows with max{0, G} and min-coord
right-hand sides, instead of the builders' split symbolic rows), so agreement
with the free-box programs is evidence rather than tautology.

``grid_scan`` exhausts all boxes with endpoints on the lattice {0, 1/N, .., 1}
and reports the best inner optimum; by construction it can never beat the
free-box LP optimum and matches it exactly whenever the optimal endpoints lie
on the lattice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional

from qvolume import simplex
from qvolume.kernel import (
    ZERO,
    Box,
    adjacent_pairs,
    frechet_lower,
    frechet_upper,
    multi_indices,
    rational,
    rational_str,
    sign_of,
)
from qvolume.lp_model import Constraint, LPModel, Variable, symmetrize

__all__ = [
    "INNER_LP_MAX_DIMENSION",
    "inner_lp",
    "ScanResult",
    "grid_scan",
    "equivalence_sweep",
]

# The inner program has 2^d unknowns; beyond this the scan-scale point is lost.
INNER_LP_MAX_DIMENSION = 8


def _q_name(index: tuple) -> str:
    return "q_" + "".join(str(level) for level in index)


def inner_lp(box: Box, kind: str) -> object:
    """Extremal signed corner sum achievable on a fixed box.

    Equals the free-box optimum whenever the box is the optimizer.
    """
    if kind not in ("min", "max"):
        raise ValueError(f"unknown kind {kind!r}")
    if not box.is_strict:
        raise ValueError("inner program needs a box with positive width on every axis")
    d = box.dimension
    if d > INNER_LP_MAX_DIMENSION:
        raise ValueError(f"inner program capped at dimension {INNER_LP_MAX_DIMENSION}")
    variables = [
        Variable(_q_name(index), "grid-value", nonnegative=True)
        for index in multi_indices(d, 1)
    ]
    rows = []
    for low, high, axis in adjacent_pairs(d, 1):
        width = box.upper[axis] - box.lower[axis]
        lo, hi = _q_name(low), _q_name(high)
        rows.append(Constraint(f"step:lo:{hi}-{lo}", {hi: 1, lo: -1}, ">=", 0))
        rows.append(Constraint(f"step:hi:{hi}-{lo}", {hi: 1, lo: -1}, "<=", width))
    for index in multi_indices(d, 1):
        corner = box.corner(index)
        name = _q_name(index)
        lower = max(ZERO, frechet_lower(corner))
        rows.append(Constraint(f"env:lo:{name}", {name: 1}, ">=", lower))
        rows.append(Constraint(f"env:hi:{name}", {name: 1}, "<=", frechet_upper(corner)))
    model = LPModel(
        variables=variables,
        constraints=rows,
        objective={_q_name(index): sign_of(index) for index in multi_indices(d, 1)},
        sense=kind,
        provenance={"lp": "inner", "dimension": d, "kind": kind},
    )
    solution = simplex.solve(model)
    if solution.status != simplex.OPTIMAL:
        raise simplex.SimplexError(
            f"inner program unexpectedly {solution.status} on {box}"
        )
    return solution.objective


@dataclass
class ScanResult:
    """Exhaustive lattice-box scan: best box, best value, full audit table."""

    dimension: int
    kind: str
    resolution: int
    best_box: Box
    best_value: object
    table: list = field(repr=False)

    def __post_init__(self):
        extremum = (
            min(value for _, value in self.table)
            if self.kind == "min"
            else max(value for _, value in self.table)
        )
        if extremum != self.best_value:
            raise ValueError("best value must equal the extremum of the table")

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "resolution": self.resolution,
            "boxes": len(self.table),
            "best_box": self.best_box.to_json(),
            "best_value": rational_str(self.best_value),
        }

    def csv_rows(self) -> Iterable[list]:
        yield ["lower", "upper", "value"]
        for box, value in self.table:
            yield [
                " ".join(rational_str(v) for v in box.lower),
                " ".join(rational_str(v) for v in box.upper),
                rational_str(value),
            ]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def grid_scan(dimension: int, kind: str, resolution: int) -> ScanResult:
    """Exhaust every box with endpoints on the 1/resolution lattice."""
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    if resolution > 12:
        raise ValueError("scan cost grows as the box count times an LP; cap is 12")
    if not 2 <= dimension <= 3:
        raise ValueError("scans are supported for dimensions 2 and 3")
    points = [rational(i, resolution) for i in range(resolution + 1)]
    intervals = [
        (points[i], points[j])
        for i in range(resolution + 1)
        for j in range(i + 1, resolution + 1)
    ]
    table = []
    best = None
    for combo in product(intervals, repeat=dimension):
        box = Box(tuple(c[0] for c in combo), tuple(c[1] for c in combo))
        value = inner_lp(box, kind)
        table.append((box, value))
        if best is None:
            best = (box, value)
        elif kind == "min" and value < best[1]:
            best = (box, value)
        elif kind == "max" and value > best[1]:
            best = (box, value)
    return ScanResult(
        dimension=dimension,
        kind=kind,
        resolution=resolution,
        best_box=best[0],
        best_value=best[1],
        table=table,
    )


_BUILDERS = {
    "min2": "build_min_2grid",
    "max2": "build_max_2grid",
    "min3": "build_min_3grid",
}


def equivalence_sweep(kinds: Iterable[str], dimensions: Iterable[int]) -> list:
    """Solve full and symmetric forms and compare objectives exactly."""
    from qvolume import lp_model

    records = []
    for kind in kinds:
        builder = getattr(lp_model, _BUILDERS[kind])
        for d in dimensions:
            full = simplex.solve(builder(d))
            reduced = simplex.solve(symmetrize(kind, d))
            records.append(
                {
                    "kind": kind,
                    "dimension": d,
                    "full": full.objective,
                    "symmetric": reduced.objective,
                    "equal": full.objective == reduced.objective,
                    "full_pivots": full.pivots,
                    "symmetric_pivots": reduced.pivots,
                }
            )
    return records
