"""Piecewise-multilinear quasi-copula built from a feasible grid solution.

A verified grid solution on prod{a_i, 1} (2-level) or prod{a_i, b_i, 1}
(3-level) extends to a quasi-copula on the whole unit cube: refine each axis
with the cuts {0, a_i, (b_i,) 1}, set every refined-grid node with a zero
coordinate to 0 and every grid node to its q-value, and take the multilinear
interpolant inside each subbox.  Equivalently, each subbox carries the
constant density rho = (signed corner sum)/(Lebesgue volume) and the function
is the cumulative integral of that density; the two descriptions agree
because interpolation is exact in rationals.

Cut duplicates collapse (a_i = 0, or b_i = 1 on 3-level grids); the zero-width
adjacency constraints checked beforehand force the collapsed values to agree.

For symmetric grid solutions (values depend only on coordinate-level counts,
equal cuts on every axis) evaluation runs as a dynamic program over level
counts, O(d^2) instead of 2^d per point, which keeps dimension 18 exact and
fast.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import product
from math import comb
from typing import Iterator, Optional

from qvolume.kernel import (
    ONE,
    ZERO,
    Box,
    GridSolution,
    SymmetricLevelValues,
    TWO_LEVEL,
    multi_indices,
    q_volume,
    rational,
    rational_str,
    sign_of,
)

__all__ = [
    "ExtensionError",
    "PWMLQuasiCopula",
    "extend",
    "evaluate",
    "box_volume",
    "GENERIC_EVAL_MAX_DIMENSION",
    "GENERIC_VOLUME_MAX_DIMENSION",
    "DENSITY_TABLE_MAX_DIMENSION",
]

# Guards for the generic 2^d corner enumeration; symmetric grids use the
# level-count fast paths and are not subject to them.
GENERIC_EVAL_MAX_DIMENSION = 14
GENERIC_VOLUME_MAX_DIMENSION = 12
DENSITY_TABLE_MAX_DIMENSION = 10


class ExtensionError(ValueError):
    """A hypothesis of the extension construction fails; message carries the
    exact offending inequality."""


@dataclass(frozen=True)
class PWMLQuasiCopula:
    """Refined axis cuts plus the vertex-value rule of the extension.

    ``node_levels[axis][j]`` is the grid level whose coordinate equals
    ``cuts[axis][j]``, or None for the pure zero node at coordinate 0; a node
    with any None coordinate has value exactly 0, every other node carries its
    grid value.  Values anywhere else come from multilinear interpolation in
    the containing cell.
    """

    dimension: int
    cuts: tuple
    node_levels: tuple
    source: GridSolution = field(repr=False)
    symmetric: bool

    # -- node values --------------------------------------------------------

    def vertex_value(self, node: tuple):
        """Value at a refined-grid node given by per-axis cut positions."""
        grid_index = []
        for axis, position in enumerate(node):
            level = self.node_levels[axis][position]
            if level is None:
                return ZERO
            grid_index.append(level)
        return self.source.value(tuple(grid_index))

    def nodes(self) -> Iterator[tuple]:
        """All refined-grid nodes (per-axis cut positions), lexicographic."""
        return product(*(range(len(c)) for c in self.cuts))

    def cells(self) -> Iterator[tuple]:
        """All subbox positions, lexicographic."""
        return product(*(range(len(c) - 1) for c in self.cuts))

    def cell_box(self, cell: tuple) -> Box:
        return Box(
            tuple(self.cuts[axis][j] for axis, j in enumerate(cell)),
            tuple(self.cuts[axis][j + 1] for axis, j in enumerate(cell)),
        )

    # -- evaluation ----------------------------------------------------------

    def _locate(self, axis: int, coordinate):
        """Containing cell (half-open [c_j, c_{j+1}), last cell closed) and the
        barycentric weight; continuity makes the tie choice value-irrelevant."""
        cuts = self.cuts[axis]
        position = bisect_right(cuts, coordinate) - 1
        if position == len(cuts) - 1:
            position -= 1
        lo, hi = cuts[position], cuts[position + 1]
        return position, (coordinate - lo) / (hi - lo)

    def evaluate(self, point: tuple):
        """Exact multilinear interpolant, equal to the cumulative integral of
        the cell densities over [0, x]."""
        if len(point) != self.dimension:
            raise ValueError("point length must equal the dimension")
        coords = tuple(rational(c) for c in point)
        for c in coords:
            if not (ZERO <= c <= ONE):
                raise ValueError(f"coordinate {c} outside [0, 1]")
        located = [self._locate(axis, c) for axis, c in enumerate(coords)]
        if self.symmetric:
            return self._evaluate_symmetric(located)
        return self._evaluate_generic(located)

    def _axis_branches(self, axis: int, position: int, weight):
        branches = []
        if weight != ONE:
            level = self.node_levels[axis][position]
            if level is not None:
                branches.append((ONE - weight, level))
        if weight != ZERO:
            level = self.node_levels[axis][position + 1]
            if level is not None:
                branches.append((weight, level))
        return branches

    def _evaluate_symmetric(self, located):
        values = self.source.values
        levels = values.levels
        states = {(0,) * (levels + 1): ONE}
        for axis, (position, weight) in enumerate(located):
            branches = self._axis_branches(axis, position, weight)
            if not branches:
                return ZERO
            new_states = {}
            for counts, mass in states.items():
                for branch_weight, level in branches:
                    key = counts[:level] + (counts[level] + 1,) + counts[level + 1 :]
                    prior = new_states.get(key)
                    term = mass * branch_weight
                    new_states[key] = term if prior is None else prior + term
            states = new_states
        total = ZERO
        for counts, mass in states.items():
            total += mass * values.class_value(counts)
        return total

    def _evaluate_generic(self, located):
        if self.dimension > GENERIC_EVAL_MAX_DIMENSION:
            raise ValueError(
                "generic evaluation enumerates 2^d cell corners; "
                f"dimension {self.dimension} exceeds {GENERIC_EVAL_MAX_DIMENSION} "
                "(symmetric grids have no such limit)"
            )
        positions = [position for position, _ in located]
        values = [
            self.vertex_value(tuple(p + bit for p, bit in zip(positions, bits)))
            for bits in product((0, 1), repeat=self.dimension)
        ]
        for axis in reversed(range(self.dimension)):
            weight = located[axis][1]
            values = [
                lo + weight * (hi - lo)
                for lo, hi in zip(values[0::2], values[1::2])
            ]
        return values[0]

    # -- volumes and densities ------------------------------------------------

    def box_volume(self, box: Box):
        """Signed corner sum of the box under this quasi-copula."""
        if box.dimension != self.dimension:
            raise ValueError("box dimension mismatch")
        if (
            self.symmetric
            and len(set(box.lower)) == 1
            and len(set(box.upper)) == 1
        ):
            d = self.dimension
            lo, hi = box.lower[0], box.upper[0]
            total = ZERO
            for k in range(d + 1):
                corner = (hi,) * k + (lo,) * (d - k)
                term = comb(d, k) * self.evaluate(corner)
                total = total + term if (d - k) % 2 == 0 else total - term
            return total
        if self.dimension > GENERIC_VOLUME_MAX_DIMENSION:
            raise ValueError(
                "generic box volume enumerates 2^d corners; dimension "
                f"{self.dimension} exceeds {GENERIC_VOLUME_MAX_DIMENSION} "
                "(symmetric quasi-copulas over symmetric boxes have no such limit)"
            )
        total = ZERO
        for index in multi_indices(self.dimension, 1):
            value = self.evaluate(box.corner(index))
            total = total + value if sign_of(index) > 0 else total - value
        return total

    def density(self, cell: tuple):
        """Constant density of one subbox: signed corner sum over Lebesgue."""
        corners = {}
        for bits in multi_indices(self.dimension, 1):
            node = tuple(c + bit for c, bit in zip(cell, bits))
            corners[bits] = self.vertex_value(node)
        volume = q_volume(corners)
        lebesgue = ONE
        for axis, j in enumerate(cell):
            lebesgue *= self.cuts[axis][j + 1] - self.cuts[axis][j]
        return volume / lebesgue

    def densities(self) -> dict:
        """Full subbox density table; guarded, use density_classes at scale."""
        if self.dimension > DENSITY_TABLE_MAX_DIMENSION:
            raise ValueError(
                f"dense density table capped at dimension {DENSITY_TABLE_MAX_DIMENSION}"
            )
        return {cell: self.density(cell) for cell in self.cells()}

    def density_classes(self) -> dict:
        """Density per cell class (counts of per-axis cell positions) for
        symmetric quasi-copulas; exact for any dimension."""
        if not self.symmetric:
            raise ValueError("density classes need a symmetric quasi-copula")
        n_cells = len(self.cuts[0]) - 1
        values = self.source.values
        levels = values.levels
        out = {}
        for cell_class in SymmetricLevelValues._compositions(self.dimension, n_cells):
            # signed corner sum via a level-count dynamic program
            states = {(0,) * (levels + 1): ONE}
            for position, multiplicity in enumerate(cell_class):
                lo_level = self.node_levels[0][position]
                hi_level = self.node_levels[0][position + 1]
                for _ in range(multiplicity):
                    new_states = {}
                    for counts, mass in states.items():
                        for sign, level in ((-1, lo_level), (1, hi_level)):
                            if level is None:
                                continue
                            key = (
                                counts[:level]
                                + (counts[level] + 1,)
                                + counts[level + 1 :]
                            )
                            term = mass * sign
                            prior = new_states.get(key)
                            new_states[key] = (
                                term if prior is None else prior + term
                            )
                    states = new_states
            volume = ZERO
            for counts, mass in states.items():
                volume += mass * values.class_value(counts)
            lebesgue = ONE
            for position, multiplicity in enumerate(cell_class):
                width = self.cuts[0][position + 1] - self.cuts[0][position]
                lebesgue *= width**multiplicity
            out[cell_class] = volume / lebesgue
        return out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        data = {
            "dimension": self.dimension,
            "symmetric": self.symmetric,
            "cuts": [[rational_str(c) for c in axis] for axis in self.cuts],
            "source": self.source.to_json(),
        }
        if self.dimension <= 8 and not self.symmetric:
            data["vertex_tensor"] = {
                ",".join(map(str, node)): rational_str(self.vertex_value(node))
                for node in self.nodes()
            }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PWMLQuasiCopula":
        return extend(GridSolution.from_json(data["source"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def extend(solution: GridSolution, check: bool = True) -> PWMLQuasiCopula:
    """Construct the piecewise-multilinear quasi-copula extending a grid
    solution; refuses with the exact failing inequality when a hypothesis of
    the construction is violated."""
    if check:
        from qvolume.verifier import check_grid_conditions

        report = check_grid_conditions(solution)
        if not report.passed:
            failure = report.failures[0]
            raise ExtensionError(
                f"grid solution violates {failure.name}: {failure.witness}"
            )
    if solution.kind == TWO_LEVEL and any(b != ONE for b in solution.b):
        raise ExtensionError(
            "two-level extension needs every upper endpoint equal to 1; "
            "route grids with b < 1 through a three-level solution"
        )
    cuts = []
    node_levels = []
    for axis in range(solution.dimension):
        by_value: dict = {}
        for level in range(solution.levels + 1):
            by_value.setdefault(solution.cut(axis, level), level)
        if ZERO not in by_value:
            by_value[ZERO] = None
        ordered = sorted(by_value.items())
        cuts.append(tuple(value for value, _ in ordered))
        node_levels.append(tuple(level for _, level in ordered))
    return PWMLQuasiCopula(
        dimension=solution.dimension,
        cuts=tuple(cuts),
        node_levels=tuple(node_levels),
        source=solution,
        symmetric=solution.is_symmetric,
    )


def evaluate(quasi_copula: PWMLQuasiCopula, point: tuple):
    return quasi_copula.evaluate(point)


def box_volume(quasi_copula: PWMLQuasiCopula, box: Box):
    return quasi_copula.box_volume(box)
