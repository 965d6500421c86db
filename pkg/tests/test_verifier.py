"""Grid-condition checks, axiom certification, fuzzing."""

import random

import pytest

from qvolume import extension, simplex, verifier
from qvolume.closedform import record_to_grid_solution, table_fixture, three_grid_witness
from qvolume.kernel import (
    GridSolution,
    ONE,
    SymmetricLevelValues,
    THREE_LEVEL,
    TWO_LEVEL,
    ZERO,
    rational,
)
from qvolume.lp_model import (
    Constraint,
    LPModel,
    Variable,
    build_min_2grid,
    lift_symmetric,
    symmetrize,
)

R = rational


class TestGridConditions:
    def test_table_d9_lift_passes(self, solved_symmetric):
        grid = lift_symmetric(solved_symmetric("min2", 9).assignment, 9, TWO_LEVEL)
        report = verifier.check_grid_conditions(grid)
        assert report.passed

    def test_val_q5_passes(self):
        report = verifier.check_grid_conditions(three_grid_witness(5))
        assert report.passed

    def test_val_q5_perturbation_caught(self):
        """Raising the class value at one-norm 6 (composition (4,0,1)) from
        1/13 to 2/13 breaks an adjacency inequality."""
        grid = three_grid_witness(5)
        table = grid.values.class_table
        table[(4, 0, 1)] = R(2, 13)
        perturbed = GridSolution(
            5, THREE_LEVEL, grid.a, grid.b, SymmetricLevelValues(5, 2, table)
        )
        report = verifier.check_grid_conditions(perturbed)
        assert not report.passed
        assert any(
            not check.passed and check.name.startswith("adjacency")
            for check in report.checks
        )

    def test_three_level_needs_strict_box(self):
        table = {c: ZERO for c in SymmetricLevelValues._compositions(2, 3)}
        table[(0, 0, 2)] = ONE
        table[(0, 1, 1)] = R(1, 2)
        table[(1, 0, 1)] = R(1, 2)
        table[(0, 2, 0)] = R(1, 2)
        grid = GridSolution(
            2, THREE_LEVEL, (R(1, 2),) * 2, (R(1, 2),) * 2,
            SymmetricLevelValues(2, 2, table),
        )
        report = verifier.check_grid_conditions(grid)
        failing = {check.name for check in report.failures}
        assert "cuts-in-range" in failing

    @pytest.mark.parametrize("d", (5, 8))
    def test_class_and_full_strategies_agree(self, d, solved_symmetric):
        grid = lift_symmetric(solved_symmetric("max2", d).assignment, d, TWO_LEVEL)
        full = verifier.check_grid_conditions(grid, strategy="full")
        classes = verifier.check_grid_conditions(grid, strategy="classes")
        assert full.passed and classes.passed

        # both strategies catch the same planted violation
        table = grid.values.class_table
        table[(d - 1, 1)] = ONE  # jump of 1 from the bottom class
        broken = GridSolution(
            d, TWO_LEVEL, grid.a, grid.b, SymmetricLevelValues(d, 1, table)
        )
        assert not verifier.check_grid_conditions(broken, strategy="full").passed
        assert not verifier.check_grid_conditions(broken, strategy="classes").passed

    def test_classes_strategy_needs_symmetry(self):
        values = {
            (0, 0): ZERO, (0, 1): R(1, 4), (1, 0): R(1, 3), (1, 1): ONE,
        }
        grid = GridSolution(2, TWO_LEVEL, (R(1, 3),) * 2, (ONE,) * 2, values)
        with pytest.raises(ValueError):
            verifier.check_grid_conditions(grid, strategy="classes")

    def test_report_json(self):
        report = verifier.check_grid_conditions(three_grid_witness(5))
        data = report.to_json()
        assert data["passed"] is True
        assert {check["name"] for check in data["checks"]} >= {
            "adjacency-monotone", "frechet-lower", "frechet-upper",
        }


class TestQuasiCopulaChecks:
    def test_d7_extension_passes(self, solved_symmetric):
        grid = lift_symmetric(solved_symmetric("min2", 7).assignment, 7, TWO_LEVEL)
        quasi_copula = extension.extend(grid)
        report = verifier.check_quasicopula(quasi_copula, samples=100, seed=0)
        assert report.passed
        assert report.seed == 0
        assert report.samples == 100

    def test_val_q6_extension_passes(self):
        grid = three_grid_witness(6)
        quasi_copula = extension.extend(grid)
        report = verifier.check_quasicopula(quasi_copula, samples=100, seed=2)
        assert report.passed

    def test_raised_vertex_value_fails_lipschitz(self):
        """A vertex value above its axis cut forces a Lipschitz violation."""
        values = {
            (0, 0): R(1, 2),  # exceeds the cut 1/4: violates q <= H upstream,
            (0, 1): R(1, 2),  # and the vertex Lipschitz check downstream
            (1, 0): R(1, 2),
            (1, 1): ONE,
        }
        grid = GridSolution(2, TWO_LEVEL, (R(1, 4),) * 2, (ONE,) * 2, values)
        quasi_copula = extension.extend(grid, check=False)
        report = verifier.check_quasicopula(quasi_copula, samples=10, seed=0)
        assert not report.passed
        failing = {check.name for check in report.failures}
        assert "vertex-lipschitz" in failing

    def test_sampling_is_replayable(self, solved_symmetric):
        grid = lift_symmetric(solved_symmetric("max2", 4).assignment, 4, TWO_LEVEL)
        quasi_copula = extension.extend(grid)
        first = verifier.check_quasicopula(quasi_copula, samples=50, seed=9)
        second = verifier.check_quasicopula(quasi_copula, samples=50, seed=9)
        assert first.to_json() == second.to_json()


class TestExtensionConsistency:
    def test_val_q5_pair_counts_all_vertices(self):
        grid = three_grid_witness(5)
        quasi_copula = extension.extend(grid)
        report = verifier.check_extension_consistency(grid, quasi_copula)
        assert report.passed

    def test_dimension_mismatch_raises(self):
        grid5 = three_grid_witness(5)
        grid6 = three_grid_witness(6)
        quasi_copula6 = extension.extend(grid6)
        with pytest.raises(ValueError):
            verifier.check_extension_consistency(grid5, quasi_copula6)


def _random_objective_model(dimension: int, rng: random.Random) -> LPModel:
    base = build_min_2grid(dimension)
    objective = {
        name: R(rng.randint(-8, 8), rng.randint(1, 6))
        for name in base.objective
    }
    return LPModel(
        variables=base.variables,
        constraints=base.constraints,
        objective=objective,
        sense="min",
        provenance={**base.provenance, "fuzz": True},
    )


class TestFuzz:
    @pytest.mark.parametrize("d", (2, 3))
    def test_random_objective_optima_extend(self, d):
        """Optimal grids of random-objective programs always pass the checks
        and extend to passing quasi-copulas, provided the optimizer lands on
        b = 1 (force it by fixing the upper endpoints with extra rows)."""
        rng = random.Random(d * 17)
        for trial in range(4):
            model = _random_objective_model(d, rng)
            pinned = LPModel(
                variables=model.variables,
                constraints=list(model.constraints)
                + [
                    Constraint(f"pin:b{i+1}", {f"b{i+1}": 1}, ">=", 1)
                    for i in range(d)
                ],
                objective=model.objective,
                sense="min",
                provenance=model.provenance,
            )
            solution = simplex.solve(pinned)
            assert solution.status == simplex.OPTIMAL
            from qvolume.lp_model import grid_solution_from_assignment

            grid = grid_solution_from_assignment(model, solution.assignment)
            report = verifier.check_grid_conditions(grid)
            assert report.passed, report.failures[0].witness
            quasi_copula = extension.extend(grid)
            axiom_report = verifier.check_quasicopula(
                quasi_copula, samples=40, seed=trial
            )
            assert axiom_report.passed

    @pytest.mark.parametrize("d", (2, 3))
    def test_random_infeasible_perturbations_caught(self, d, solved_symmetric):
        grid = lift_symmetric(solved_symmetric("max2", d).assignment, d, TWO_LEVEL)
        rng = random.Random(d * 31)
        for _ in range(6):
            values = {index: grid.value(index) for index in grid.indices()}
            index = random.Random(rng.random()).choice(sorted(values))
            # push one interior value far above the upper envelope
            values[index] = ONE
            if grid.vertex(index) == (ONE,) * d:
                continue
            perturbed = GridSolution(d, TWO_LEVEL, grid.a, grid.b, values)
            report = verifier.check_grid_conditions(perturbed)
            assert not report.passed
