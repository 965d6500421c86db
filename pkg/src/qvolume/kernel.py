"""Exact rational scalars, multi-index combinatorics, grids, boxes and signed box sums.

Everything downstream (LP construction, the simplex solver, extensions,
verification) works over the single scalar type provided here: an
arbitrary-precision rational kept in lowest terms with a positive denominator.
No floating point is used anywhere in the package.

The scalar is backed by ``gmpy2.mpq`` when available (much faster) and falls
back to :class:`fractions.Fraction`.  Set ``QVOLUME_RATIONAL=fractions`` in the
environment to force the fallback.  Both backends guarantee canonical lowest
terms, exact arithmetic and total ordering, and both serialize to the wire
format ``"p/q"`` (or ``"p"`` when the denominator is 1).
"""

from __future__ import annotations

import json
import os
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Optional

__all__ = [
    "RATIONAL_BACKEND",
    "Rational",
    "rational",
    "rational_str",
    "parse_rational",
    "ZERO",
    "ONE",
    "one_norm",
    "sign_of",
    "multi_indices",
    "adjacent_pairs",
    "frechet_lower",
    "frechet_upper",
    "q_volume",
    "Box",
    "TWO_LEVEL",
    "THREE_LEVEL",
    "SymmetricLevelValues",
    "GridSolution",
]

if os.environ.get("QVOLUME_RATIONAL", "gmpy2") == "fractions":
    from fractions import Fraction as Rational

    RATIONAL_BACKEND = "fractions"
else:
    try:
        from gmpy2 import mpq as Rational

        RATIONAL_BACKEND = "gmpy2"
    except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
        from fractions import Fraction as Rational

        RATIONAL_BACKEND = "fractions"

_RATIONAL_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def rational(numerator, denominator=None):
    """Build an exact rational from ints, a ``"p/q"`` string or a rational."""
    if denominator is not None:
        return Rational(numerator, denominator)
    if isinstance(numerator, str):
        return parse_rational(numerator)
    if isinstance(numerator, float):
        raise TypeError("floating-point values are not accepted; pass 'p/q' strings or ints")
    return Rational(numerator)


def parse_rational(text: str):
    """Parse the wire format ``"p/q"`` (or ``"p"``); rejects anything else."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational in 'p/q' form: {text!r}")
    return Rational(text)


def rational_str(value) -> str:
    """Wire format: ``"p/q"`` in lowest terms, ``"p"`` when the denominator is 1."""
    return str(Rational(value))


ZERO = Rational(0)
ONE = Rational(1)


# ---------------------------------------------------------------------------
# Multi-indices
# ---------------------------------------------------------------------------

def one_norm(index: tuple) -> int:
    """Sum of the levels of a multi-index."""
    return sum(index)


def sign_of(index: tuple) -> int:
    """Alternating sign (-1)^(d - |index|) used in the signed corner sum."""
    return -1 if (len(index) - sum(index)) % 2 else 1


def multi_indices(dimension: int, levels: int) -> Iterator[tuple]:
    """All multi-indices in {0..levels}^dimension, lexicographically.

    This ordering is the canonical one used for variable and constraint
    ordering everywhere, which keeps solver pivot paths reproducible.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return product(range(levels + 1), repeat=dimension)


def adjacent_pairs(dimension: int, levels: int) -> Iterator[tuple]:
    """All (I, J, axis) with J = I + E^(axis), lexicographic in (I, axis).

    The pair count is dimension * levels * (levels+1)^(dimension-1).
    """
    for index in multi_indices(dimension, levels):
        for axis in range(dimension):
            if index[axis] < levels:
                upper = index[:axis] + (index[axis] + 1,) + index[axis + 1 :]
                yield index, upper, axis


# ---------------------------------------------------------------------------
# Frechet-Hoeffding envelope and the signed corner sum
# ---------------------------------------------------------------------------

def frechet_lower(point: Iterable):
    """Lower envelope before clamping: sum(x_i) - d + 1 (may be negative)."""
    total = ZERO
    count = 0
    for coord in point:
        total += coord
        count += 1
    return total - count + 1


def frechet_upper(point: Iterable):
    """Upper envelope: min of the coordinates."""
    return min(point)


def q_volume(corner_values: Mapping):
    """Signed inclusion-exclusion sum of the 2^d corner values of a box.

    ``corner_values`` must be total over {0,1}^d; a missing corner raises
    ``KeyError``.
    """
    sample = next(iter(corner_values))
    dimension = len(sample)
    total = ZERO
    for index in multi_indices(dimension, 1):
        try:
            value = corner_values[index]
        except KeyError:
            raise KeyError(f"missing corner value for index {index}") from None
        total = total + value if sign_of(index) > 0 else total - value
    return total


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """A product of closed intervals inside the unit cube.

    Degenerate axes (lower == upper) are representable; :attr:`is_strict`
    records whether every axis has positive width.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(rational(v) for v in self.lower)
        upper = tuple(rational(v) for v in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) != len(upper):
            raise ValueError("lower and upper must have the same length")
        if not lower:
            raise ValueError("box must have at least one axis")
        for a, b in zip(lower, upper):
            if not (ZERO <= a <= b <= ONE):
                raise ValueError(f"need 0 <= {a} <= {b} <= 1 on every axis")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def is_strict(self) -> bool:
        return all(a < b for a, b in zip(self.lower, self.upper))

    def corner(self, index: tuple) -> tuple:
        """Corner selected by a 0/1 multi-index (0 -> lower, 1 -> upper)."""
        return tuple(
            self.upper[k] if bit else self.lower[k] for k, bit in enumerate(index)
        )

    def lebesgue(self):
        volume = ONE
        for a, b in zip(self.lower, self.upper):
            volume *= b - a
        return volume

    def to_json(self) -> dict:
        return {
            "lower": [rational_str(v) for v in self.lower],
            "upper": [rational_str(v) for v in self.upper],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Box":
        return cls(tuple(data["lower"]), tuple(data["upper"]))


# ---------------------------------------------------------------------------
# Grid solutions
# ---------------------------------------------------------------------------

TWO_LEVEL = "two-level"
THREE_LEVEL = "three-level"

_GRID_LEVELS = {TWO_LEVEL: 1, THREE_LEVEL: 2}


class SymmetricLevelValues(Mapping):
    """Total value map where the value depends only on per-level counts.

    Keys are full multi-indices; lookups reduce an index to its level-count
    class ``(n_0, ..., n_s)`` and read a small table.  This is what makes
    grids at dimension 18 tractable: the table has O(d^2) entries while the
    full map has 2^d.
    """

    def __init__(self, dimension: int, levels: int, table: Mapping):
        self.dimension = dimension
        self.levels = levels
        self._table = {
            tuple(key): rational(value) for key, value in table.items()
        }
        expected = {
            counts for counts in self._compositions(dimension, levels + 1)
        }
        if set(self._table) != expected:
            missing = expected - set(self._table)
            raise ValueError(f"class table not total; missing {sorted(missing)[:3]}...")

    @staticmethod
    def _compositions(total: int, parts: int) -> Iterator[tuple]:
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in SymmetricLevelValues._compositions(total - head, parts - 1):
                yield (head,) + rest

    def class_of(self, index: tuple) -> tuple:
        counts = [0] * (self.levels + 1)
        for level in index:
            counts[level] += 1
        return tuple(counts)

    def class_value(self, counts: tuple):
        return self._table[tuple(counts)]

    @property
    def class_table(self) -> dict:
        return dict(self._table)

    def __getitem__(self, index: tuple):
        if len(index) != self.dimension:
            raise KeyError(index)
        return self._table[self.class_of(index)]

    def __iter__(self):
        return multi_indices(self.dimension, self.levels)

    def __len__(self) -> int:
        return (self.levels + 1) ** self.dimension


@dataclass(frozen=True)
class GridSolution:
    """Box endpoints plus the value at every vertex of a 2- or 3-level grid.

    For ``two-level`` grids the vertex set is prod{a_i, b_i}; for
    ``three-level`` it is prod{a_i, b_i, 1}.  The value map must be total over
    the full index set and all values must lie in [0, 1].
    """

    dimension: int
    kind: str
    a: tuple
    b: tuple
    values: Mapping = field(repr=False)

    def __post_init__(self):
        if self.kind not in _GRID_LEVELS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.dimension < 2:
            raise ValueError("grids need dimension >= 2")
        object.__setattr__(self, "a", tuple(rational(v) for v in self.a))
        object.__setattr__(self, "b", tuple(rational(v) for v in self.b))
        if len(self.a) != self.dimension or len(self.b) != self.dimension:
            raise ValueError("cut vectors must match the dimension")
        for lo, hi in zip(self.a, self.b):
            if not (ZERO <= lo <= hi <= ONE):
                raise ValueError("need 0 <= a_i <= b_i <= 1 on every axis")
        values = self.values
        if isinstance(values, SymmetricLevelValues):
            if values.dimension != self.dimension or values.levels != self.levels:
                raise ValueError("symmetric value table does not match the grid")
            table_values = values.class_table.values()
        else:
            values = {tuple(k): rational(v) for k, v in values.items()}
            object.__setattr__(self, "values", values)
            if len(values) != (self.levels + 1) ** self.dimension:
                raise ValueError("value map is not total over the index set")
            table_values = values.values()
        for value in table_values:
            if not (ZERO <= value <= ONE):
                raise ValueError("grid values must lie in [0, 1]")

    @property
    def levels(self) -> int:
        return _GRID_LEVELS[self.kind]

    @property
    def is_symmetric(self) -> bool:
        """True when values depend only on level counts and cuts are equal."""
        if not isinstance(self.values, SymmetricLevelValues):
            return False
        return len(set(self.a)) == 1 and len(set(self.b)) == 1

    def cut(self, axis: int, level: int):
        """Coordinate of a grid level on one axis (top level of 3-grids is 1)."""
        if level == 0:
            return self.a[axis]
        if level == 1:
            return self.b[axis]
        if level == 2 and self.kind == THREE_LEVEL:
            return ONE
        raise ValueError(f"level {level} out of range for {self.kind} grid")

    def vertex(self, index: tuple) -> tuple:
        """Coordinates of the grid vertex selected by a multi-index."""
        if len(index) != self.dimension:
            raise ValueError("index length must equal the dimension")
        return tuple(self.cut(axis, level) for axis, level in enumerate(index))

    def value(self, index: tuple):
        return self.values[tuple(index)]

    def indices(self) -> Iterator[tuple]:
        return multi_indices(self.dimension, self.levels)

    def inner_box(self) -> Box:
        """The box spanned by the a- and b-cuts (the objective's corners)."""
        return Box(self.a, self.b)

    def inner_volume(self):
        """Signed corner sum of the inner box (level-2 vertices ignored)."""
        corners = {
            index: self.values[index] for index in multi_indices(self.dimension, 1)
        }
        return q_volume(corners)

    def to_json(self) -> dict:
        data = {
            "dimension": self.dimension,
            "kind": self.kind,
            "a": [rational_str(v) for v in self.a],
            "b": [rational_str(v) for v in self.b],
        }
        if isinstance(self.values, SymmetricLevelValues):
            data["class_values"] = {
                ",".join(map(str, counts)): rational_str(value)
                for counts, value in sorted(self.values.class_table.items())
            }
        else:
            data["values"] = {
                ",".join(map(str, index)): rational_str(self.values[index])
                for index in self.indices()
            }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "GridSolution":
        dimension = int(data["dimension"])
        kind = data["kind"]
        if "class_values" in data:
            table = {
                tuple(int(p) for p in key.split(",")): parse_rational(value)
                for key, value in data["class_values"].items()
            }
            values = SymmetricLevelValues(dimension, _GRID_LEVELS[kind], table)
        else:
            values = {
                tuple(int(p) for p in key.split(",")): parse_rational(value)
                for key, value in data["values"].items()
            }
        return cls(
            dimension=dimension,
            kind=kind,
            a=tuple(data["a"]),
            b=tuple(data["b"]),
            values=values,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"
