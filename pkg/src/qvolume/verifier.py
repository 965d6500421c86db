"""Executable checks for grid hypotheses and the quasi-copula axioms.

Two layers, all comparisons exact:

* deterministic — every adjacency inequality and Frechet bound of a grid
  solution; vertex-level monotonicity and 1-Lipschitz bounds on every subbox
  edge of a constructed quasi-copula (which certifies monotonicity and the
  Lipschitz condition globally, since both properties of a multilinear cell
  reduce to its vertices and piecewise bounds chain across cells); boundary
  values at the refined-grid boundary nodes.
* randomized — seeded rational sample points (denominators at most 2^16), so
  failures replay exactly; the boundary, monotonicity and Lipschitz axioms are
  re-tested pointwise as belt and braces on top of the certifying layer.

For symmetric grids the deterministic layer may check one representative per
permutation class: with equal cuts on all axes, every instance of a constraint
is the image of its class representative under an axis permutation, so the
class check is complete, not a sample.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional

from qvolume.kernel import (
    ONE,
    ZERO,
    GridSolution,
    SymmetricLevelValues,
    THREE_LEVEL,
    adjacent_pairs,
    frechet_lower,
    frechet_upper,
    multi_indices,
    rational,
    rational_str,
)

__all__ = [
    "CheckResult",
    "VerificationReport",
    "check_grid_conditions",
    "check_quasicopula",
    "check_extension_consistency",
    "DEFAULT_SAMPLES",
    "SAMPLE_DENOMINATOR_BOUND",
]

DEFAULT_SAMPLES = 1000
SAMPLE_DENOMINATOR_BOUND = 2**16

# Class-based checking kicks in for symmetric grids above this dimension.
CLASS_STRATEGY_MIN_DIMENSION = 11


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: Optional[str] = None
    failures: int = 0

    def describe(self) -> str:
        if self.passed:
            return f"{self.name}: pass"
        return f"{self.name}: FAIL ({self.failures} violations; first: {self.witness})"


@dataclass
class VerificationReport:
    subject: str
    checks: list = field(default_factory=list)
    seed: Optional[int] = None
    samples: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list:
        return [check for check in self.checks if not check.passed]

    def to_json(self) -> dict:
        data = {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [
                {
                    "name": check.name,
                    "passed": check.passed,
                    "witness": check.witness,
                    "failures": check.failures,
                }
                for check in self.checks
            ],
        }
        if self.seed is not None:
            data["sampling"] = {"seed": self.seed, "samples": self.samples}
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def describe(self) -> str:
        return "\n".join(check.describe() for check in self.checks)


class _Collector:
    """Accumulates failures for one named check."""

    def __init__(self, name: str):
        self.name = name
        self.witness = None
        self.count = 0

    def fail(self, witness: str):
        if self.witness is None:
            self.witness = witness
        self.count += 1

    def require(self, condition: bool, witness):
        if not condition:
            self.fail(witness() if callable(witness) else witness)

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.count == 0, self.witness, self.count)


# ---------------------------------------------------------------------------
# Grid conditions
# ---------------------------------------------------------------------------

def _step_width(solution: GridSolution, axis: int, target_level: int):
    if target_level == 1:
        return solution.b[axis] - solution.a[axis]
    return ONE - solution.b[axis]


def check_grid_conditions(
    solution: GridSolution, strategy: str = "auto"
) -> VerificationReport:
    """Verify every adjacency inequality and Frechet bound of a grid solution.

    ``strategy``: ``full`` enumerates all pairs and vertices; ``classes``
    checks one representative per permutation class (symmetric grids only);
    ``auto`` picks ``classes`` for symmetric grids in high dimension.
    """
    if strategy == "auto":
        strategy = (
            "classes"
            if solution.is_symmetric
            and solution.dimension >= CLASS_STRATEGY_MIN_DIMENSION
            else "full"
        )
    if strategy == "classes" and not solution.is_symmetric:
        raise ValueError("class strategy needs a symmetric grid solution")
    if strategy not in ("full", "classes"):
        raise ValueError(f"unknown strategy {strategy!r}")

    report = VerificationReport(
        subject=f"grid-conditions[d={solution.dimension} {solution.kind}]"
    )

    cuts = _Collector("cuts-in-range")
    for axis in range(solution.dimension):
        a, b = solution.a[axis], solution.b[axis]
        cuts.require(
            ZERO <= a <= b <= ONE,
            f"axis {axis + 1}: need 0 <= {a} <= {b} <= 1",
        )
        if solution.kind == THREE_LEVEL:
            cuts.require(a < b, f"axis {axis + 1}: need a < b, got {a} = {b}")
    report.checks.append(cuts.result())

    in_range = _Collector("values-in-unit-interval")
    monotone = _Collector("adjacency-monotone")
    lipschitz = _Collector("adjacency-lipschitz")
    lower = _Collector("frechet-lower")
    upper = _Collector("frechet-upper")

    if strategy == "full":
        for index in solution.indices():
            value = solution.value(index)
            in_range.require(
                ZERO <= value <= ONE, lambda i=index, v=value: f"q{i} = {v} not in [0,1]"
            )
            point = solution.vertex(index)
            g = frechet_lower(point)
            h = frechet_upper(point)
            lower.require(g <= value, lambda i=index, v=value, g=g: f"q{i} = {v} < G = {g}")
            upper.require(value <= h, lambda i=index, v=value, h=h: f"q{i} = {v} > H = {h}")
        for low, high, axis in adjacent_pairs(solution.dimension, solution.levels):
            delta = solution.value(high) - solution.value(low)
            width = _step_width(solution, axis, high[axis])
            monotone.require(
                delta >= ZERO,
                lambda a=low, b=high, d=delta: f"q{b} - q{a} = {d} < 0",
            )
            lipschitz.require(
                delta <= width,
                lambda a=low, b=high, d=delta, w=width: f"q{b} - q{a} = {d} > {w}",
            )
    else:
        values: SymmetricLevelValues = solution.values
        levels = solution.levels
        cut_values = [solution.cut(0, level) for level in range(levels + 1)]
        for counts in SymmetricLevelValues._compositions(solution.dimension, levels + 1):
            value = values.class_value(counts)
            in_range.require(
                ZERO <= value <= ONE,
                lambda c=counts, v=value: f"class {c}: q = {v} not in [0,1]",
            )
            g = sum(
                (n * cut_values[level] for level, n in enumerate(counts)), ZERO
            ) - solution.dimension + 1
            h = min(cut_values[level] for level, n in enumerate(counts) if n)
            lower.require(
                g <= value, lambda c=counts, v=value, g=g: f"class {c}: q = {v} < G = {g}"
            )
            upper.require(
                value <= h, lambda c=counts, v=value, h=h: f"class {c}: q = {v} > H = {h}"
            )
            for level in range(levels):
                if counts[level] == 0:
                    continue
                target = list(counts)
                target[level] -= 1
                target[level + 1] += 1
                delta = values.class_value(tuple(target)) - value
                width = _step_width(solution, 0, level + 1)
                monotone.require(
                    delta >= ZERO,
                    lambda c=counts, l=level, d=delta: (
                        f"class {c} step {l}->{l + 1}: delta = {d} < 0"
                    ),
                )
                lipschitz.require(
                    delta <= width,
                    lambda c=counts, l=level, d=delta, w=width: (
                        f"class {c} step {l}->{l + 1}: delta = {d} > {w}"
                    ),
                )

    report.checks.extend(
        [in_range.result(), monotone.result(), lipschitz.result(),
         lower.result(), upper.result()]
    )
    return report


# ---------------------------------------------------------------------------
# Quasi-copula axioms on a constructed extension
# ---------------------------------------------------------------------------

def _random_rational(rng: random.Random):
    denominator = rng.randint(1, SAMPLE_DENOMINATOR_BOUND)
    return rational(rng.randint(0, denominator), denominator)


def _random_point(rng: random.Random, dimension: int) -> tuple:
    return tuple(_random_rational(rng) for _ in range(dimension))


def _vertex_pair_checks(quasi_copula, monotone, lipschitz):
    """Monotonicity and Lipschitz bounds on every refined subbox edge.

    Together with multilinearity inside cells this certifies both axioms
    globally; per-class checking is complete for symmetric extensions.
    """
    d = quasi_copula.dimension
    node_counts = [len(c) for c in quasi_copula.cuts]
    if quasi_copula.symmetric:
        nodes = node_counts[0]
        widths = [
            quasi_copula.cuts[0][j + 1] - quasi_copula.cuts[0][j]
            for j in range(nodes - 1)
        ]

        def class_value(counts):
            grid_counts = [0] * (quasi_copula.source.levels + 1)
            for position, n in enumerate(counts):
                if n == 0:
                    continue
                level = quasi_copula.node_levels[0][position]
                if level is None:
                    return ZERO
                grid_counts[level] += n
            return quasi_copula.source.values.class_value(tuple(grid_counts))

        for counts in SymmetricLevelValues._compositions(d, nodes):
            value = class_value(counts)
            for position in range(nodes - 1):
                if counts[position] == 0:
                    continue
                target = list(counts)
                target[position] -= 1
                target[position + 1] += 1
                delta = class_value(tuple(target)) - value
                monotone.require(
                    delta >= ZERO,
                    lambda c=counts, p=position, x=delta: (
                        f"node class {c} step {p}->{p + 1}: delta = {x} < 0"
                    ),
                )
                lipschitz.require(
                    delta <= widths[position],
                    lambda c=counts, p=position, x=delta, w=widths[position]: (
                        f"node class {c} step {p}->{p + 1}: delta = {x} > {w}"
                    ),
                )
        return

    total_nodes = 1
    for count in node_counts:
        total_nodes *= count
    if total_nodes * d > 2_000_000:
        raise ValueError(
            "refined grid too large for exhaustive vertex checks and the "
            "quasi-copula is not symmetric"
        )
    for node in quasi_copula.nodes():
        value = quasi_copula.vertex_value(node)
        for axis in range(d):
            position = node[axis]
            if position + 1 >= node_counts[axis]:
                continue
            neighbour = node[:axis] + (position + 1,) + node[axis + 1 :]
            delta = quasi_copula.vertex_value(neighbour) - value
            width = (
                quasi_copula.cuts[axis][position + 1]
                - quasi_copula.cuts[axis][position]
            )
            monotone.require(
                delta >= ZERO,
                lambda n=node, ax=axis, x=delta: (
                    f"node {n} axis {ax + 1}: delta = {x} < 0"
                ),
            )
            lipschitz.require(
                delta <= width,
                lambda n=node, ax=axis, x=delta, w=width: (
                    f"node {n} axis {ax + 1}: delta = {x} > {w}"
                ),
            )


def check_quasicopula(
    quasi_copula,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> VerificationReport:
    """Certify the boundary, monotonicity and Lipschitz axioms of an extension.

    The deterministic layer is the proof; the seeded randomized layer
    re-tests each axiom on `samples` exact rational points.
    """
    report = VerificationReport(
        subject=f"quasi-copula[d={quasi_copula.dimension}]",
        seed=seed,
        samples=samples,
    )
    d = quasi_copula.dimension

    monotone = _Collector("vertex-monotonicity")
    lipschitz = _Collector("vertex-lipschitz")
    _vertex_pair_checks(quasi_copula, monotone, lipschitz)
    report.checks.append(monotone.result())
    report.checks.append(lipschitz.result())

    boundary = _Collector("boundary-values")
    top = (ONE,) * d
    boundary.require(
        quasi_copula.evaluate(top) == ONE,
        lambda: f"Q(1,...,1) = {quasi_copula.evaluate(top)} != 1",
    )
    for axis in range(d):
        for cut in quasi_copula.cuts[axis]:
            point = top[:axis] + (cut,) + top[axis + 1 :]
            value = quasi_copula.evaluate(point)
            boundary.require(
                value == cut,
                lambda ax=axis, c=cut, v=value: (
                    f"Q(1,..,{c},..,1) = {v} != {c} on axis {ax + 1}"
                ),
            )
        zero_point = tuple(
            ZERO if k == axis else quasi_copula.cuts[k][-2] for k in range(d)
        )
        value = quasi_copula.evaluate(zero_point)
        boundary.require(
            value == ZERO,
            lambda ax=axis, v=value: f"zero face from axis {ax + 1}: Q = {v} != 0",
        )
    report.checks.append(boundary.result())

    rng = random.Random(seed)

    bc_random = _Collector("bc-random")
    for i in range(samples):
        point = list(_random_point(rng, d))
        axis = rng.randrange(d)
        if i % 2 == 0:
            point[axis] = ZERO
            value = quasi_copula.evaluate(tuple(point))
            bc_random.require(
                value == ZERO,
                lambda p=tuple(point), v=value: f"Q{p} = {v} != 0",
            )
        else:
            u = point[axis]
            edge = tuple(u if k == axis else ONE for k in range(d))
            value = quasi_copula.evaluate(edge)
            bc_random.require(
                value == u,
                lambda p=edge, v=value, u=u: f"Q{p} = {v} != {u}",
            )
    report.checks.append(bc_random.result())

    mc_random = _Collector("mc-random")
    for _ in range(samples):
        point = list(_random_point(rng, d))
        axis = rng.randrange(d)
        other = _random_rational(rng)
        low, high = sorted((point[axis], other))
        point[axis] = low
        value_low = quasi_copula.evaluate(tuple(point))
        point[axis] = high
        value_high = quasi_copula.evaluate(tuple(point))
        mc_random.require(
            value_low <= value_high,
            lambda p=tuple(point), lo=value_low, hi=value_high, ax=axis: (
                f"axis {ax + 1}: Q drops from {lo} to {hi} near {p}"
            ),
        )
    report.checks.append(mc_random.result())

    lc_random = _Collector("lc-random")
    for _ in range(samples):
        first = _random_point(rng, d)
        second = _random_point(rng, d)
        gap = quasi_copula.evaluate(first) - quasi_copula.evaluate(second)
        if gap < ZERO:
            gap = -gap
        distance = sum((abs(u - v) for u, v in zip(first, second)), ZERO)
        lc_random.require(
            gap <= distance,
            lambda a=first, b=second, g=gap, m=distance: (
                f"|Q{a} - Q{b}| = {g} > {m}"
            ),
        )
    report.checks.append(lc_random.result())
    return report


def check_extension_consistency(
    solution: GridSolution, quasi_copula
) -> VerificationReport:
    """Exact equality of the extension with the grid values at every vertex."""
    if solution.dimension != quasi_copula.dimension:
        raise ValueError(
            f"dimension mismatch: grid d={solution.dimension}, "
            f"extension d={quasi_copula.dimension}"
        )
    report = VerificationReport(
        subject=f"extension-consistency[d={solution.dimension}]"
    )
    agree = _Collector("grid-values-reproduced")
    count = (solution.levels + 1) ** solution.dimension
    if solution.is_symmetric and quasi_copula.symmetric and count > 100_000:
        for counts in SymmetricLevelValues._compositions(
            solution.dimension, solution.levels + 1
        ):
            index = []
            for level, n in enumerate(counts):
                index.extend([level] * n)
            index = tuple(index)
            expected = solution.values.class_value(counts)
            got = quasi_copula.evaluate(solution.vertex(index))
            agree.require(
                got == expected,
                lambda c=counts, g=got, e=expected: (
                    f"class {c}: Q(x) = {g} != q = {e}"
                ),
            )
    else:
        for index in solution.indices():
            expected = solution.value(index)
            got = quasi_copula.evaluate(solution.vertex(index))
            agree.require(
                got == expected,
                lambda i=index, g=got, e=expected: f"Q(x_{i}) = {g} != q_{i} = {e}",
            )
    report.checks.append(agree.result())
    return report
